//! Versioned binary artifact container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "SCST"  u16 version  u32 section-count
//! per section: u8 kind, u32 name-len, name, u64 payload-len, payload
//! 32-byte SHA-256 of everything before it
//! ```
//!
//! Matrix payloads are `u64 rows, u64 cols` then row-major `f64` values. Text
//! payloads are UTF-8. Station tables are `u64 count` then, per station, id
//! and name as `u32`-length-prefixed UTF-8 followed by `f64` latitude and
//! longitude.

use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::autodiff::Matrix;
use crate::error::{Error, Result};
use crate::graph::StationMeta;

pub const MAGIC: &[u8; 4] = b"SCST";
pub const FORMAT_VERSION: u16 = 1;
const DIGEST_LEN: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub enum Section {
    Matrix(Matrix),
    Text(String),
    Stations(Vec<StationMeta>),
}

impl Section {
    fn kind(&self) -> u8 {
        match self {
            Section::Matrix(_) => 1,
            Section::Text(_) => 2,
            Section::Stations(_) => 3,
        }
    }
}

/// Ordered named sections.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Container {
    sections: Vec<(String, Section)>,
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn encode_payload(section: &Section) -> Vec<u8> {
    let mut out = Vec::new();
    match section {
        Section::Matrix(m) => {
            out.reserve(16 + 8 * m.len());
            out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
            out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
            for v in m.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Section::Text(t) => out.extend_from_slice(t.as_bytes()),
        Section::Stations(list) => {
            out.extend_from_slice(&(list.len() as u64).to_le_bytes());
            for s in list {
                put_str(&mut out, &s.station_id);
                put_str(&mut out, &s.name);
                out.extend_from_slice(&s.latitude.to_le_bytes());
                out.extend_from_slice(&s.longitude.to_le_bytes());
            }
        }
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Container("unexpected end of data".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn len(&mut self, wide: bool) -> Result<usize> {
        let n = if wide { self.u64()? } else { self.u32()? as u64 };
        usize::try_from(n).map_err(|_| Error::Container("length overflow".into()))
    }

    fn string(&mut self, wide: bool) -> Result<String> {
        let n = self.len(wide)?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Container("invalid UTF-8".into()))
    }

    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn decode_payload(kind: u8, payload: &[u8]) -> Result<Section> {
    let mut c = Cursor { buf: payload, pos: 0 };
    let section = match kind {
        1 => {
            let rows = c.len(true)?;
            let cols = c.len(true)?;
            let count = rows
                .checked_mul(cols)
                .filter(|&n| n.checked_mul(8) == Some(payload.len() - 16))
                .ok_or_else(|| Error::Container(format!("matrix payload does not hold {rows}x{cols}")))?;
            let data = (0..count).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
            Section::Matrix(Matrix::from_vec(rows, cols, data).map_err(|e| Error::Container(e.to_string()))?)
        }
        2 => Section::Text(
            String::from_utf8(c.take(payload.len())?.to_vec()).map_err(|_| Error::Container("invalid UTF-8".into()))?,
        ),
        3 => {
            let count = c.len(true)?;
            let mut list = Vec::new();
            for _ in 0..count {
                let id = c.string(false)?;
                let name = c.string(false)?;
                let lat = c.f64()?;
                let lon = c.f64()?;
                list.push(StationMeta::new(id, name, lat, lon));
            }
            Section::Stations(list)
        }
        other => return Err(Error::Container(format!("unknown section kind {other}"))),
    };
    if !c.done() {
        return Err(Error::Container("trailing bytes in section payload".into()));
    }
    Ok(section)
}

impl Container {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, section: Section) -> &mut Self {
        self.sections.push((name.into(), section));
        self
    }

    pub fn push_matrix(&mut self, name: impl Into<String>, m: Matrix) -> &mut Self {
        self.push(name, Section::Matrix(m))
    }

    pub fn push_text(&mut self, name: impl Into<String>, t: impl Into<String>) -> &mut Self {
        self.push(name, Section::Text(t.into()))
    }

    pub fn push_stations(&mut self, name: impl Into<String>, s: Vec<StationMeta>) -> &mut Self {
        self.push(name, Section::Stations(s))
    }

    pub fn sections(&self) -> &[(String, Section)] {
        &self.sections
    }

    pub fn get(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    fn missing(name: &str) -> Error {
        Error::Container(format!("no section `{name}` of the expected kind"))
    }

    pub fn matrix(&self, name: &str) -> Result<&Matrix> {
        match self.get(name) {
            Some(Section::Matrix(m)) => Ok(m),
            _ => Err(Self::missing(name)),
        }
    }

    pub fn text(&self, name: &str) -> Result<&str> {
        match self.get(name) {
            Some(Section::Text(t)) => Ok(t),
            _ => Err(Self::missing(name)),
        }
    }

    pub fn stations(&self, name: &str) -> Result<&[StationMeta]> {
        match self.get(name) {
            Some(Section::Stations(s)) => Ok(s),
            _ => Err(Self::missing(name)),
        }
    }

    /// Matrix sections whose names start with `prefix`, prefix stripped.
    pub fn matrices_with_prefix(&self, prefix: &str) -> Vec<(String, Matrix)> {
        self.sections
            .iter()
            .filter_map(|(n, s)| match (n.strip_prefix(prefix), s) {
                (Some(rest), Section::Matrix(m)) => Some((rest.to_string(), m.clone())),
                _ => None,
            })
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.sections.len() as u32).to_le_bytes());
        for (name, section) in &self.sections {
            out.push(section.kind());
            put_str(&mut out, name);
            let payload = encode_payload(section);
            out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
            out.extend_from_slice(&payload);
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    /// Verifies the digest before interpreting anything else.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < DIGEST_LEN + MAGIC.len() {
            return Err(Error::Container("digest mismatch (file too short)".into()));
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::Container("digest mismatch (corrupt or truncated file)".into()));
        }
        let mut c = Cursor { buf: body, pos: 0 };
        if c.take(4)? != MAGIC {
            return Err(Error::Container("not an artifact container (bad magic)".into()));
        }
        let version = c.u16()?;
        if version != FORMAT_VERSION {
            return Err(Error::Container(format!(
                "unsupported format version {version} (this build reads {FORMAT_VERSION})"
            )));
        }
        let count = c.u32()?;
        let mut sections = Vec::new();
        for _ in 0..count {
            let kind = c.u8()?;
            let name = c.string(false)?;
            let len = c.len(true)?;
            let payload = c.take(len)?;
            sections.push((name, decode_payload(kind, payload)?));
        }
        if !c.done() {
            return Err(Error::Container("trailing bytes after last section".into()));
        }
        Ok(Self { sections })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes =
            fs::read(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Self::from_bytes(&bytes)
    }
}

/// Writes to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Usage(format!("`{}` is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", file_name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}
