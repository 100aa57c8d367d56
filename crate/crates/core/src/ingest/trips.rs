use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use chrono::NaiveDateTime;
use csv::{ReaderBuilder, StringRecord, Trim};

use crate::error::{Error, Result};

/// One validated bike-share trip.
#[derive(Clone, Debug, PartialEq)]
pub struct TripRecord {
    pub duration_secs: f64,
    pub start_time: NaiveDateTime,
    pub stop_time: NaiveDateTime,
    pub start_station_id: String,
    pub start_station_name: String,
    pub start_latitude: f64,
    pub start_longitude: f64,
    pub end_station_id: String,
    pub end_station_name: String,
    pub end_latitude: f64,
    pub end_longitude: f64,
    pub user_type: String,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Fail on the first malformed row instead of skipping it.
    pub strict: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseTally {
    pub accepted: u64,
    pub skipped: u64,
}

impl ParseTally {
    pub fn merge(&mut self, other: ParseTally) {
        self.accepted += other.accepted;
        self.skipped += other.skipped;
    }
}

const TIMESTAMP_FORMATS: &[&str] = &[
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%d %H:%M",
    "%m/%d/%Y %H:%M:%S%.f",
    "%m/%d/%Y %H:%M",
    "%Y-%m-%dT%H:%M:%S%.f",
];

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

/// Lowercased header with everything but letters and digits removed, so
/// `"Start Station ID"`, `"start station id"` and `"start_station_id"` agree.
fn header_key(h: &str) -> String {
    h.trim_start_matches('\u{feff}')
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

#[derive(Clone, Debug)]
struct Columns {
    duration: Option<usize>,
    start_time: usize,
    stop_time: usize,
    start_id: usize,
    start_name: Option<usize>,
    start_lat: usize,
    start_lon: usize,
    end_id: usize,
    end_name: Option<usize>,
    end_lat: usize,
    end_lon: usize,
    user_type: Option<usize>,
}

impl Columns {
    fn resolve(headers: &StringRecord) -> Result<Self> {
        let keys: Vec<String> = headers.iter().map(header_key).collect();
        let find = |aliases: &[&str]| keys.iter().position(|k| aliases.contains(&k.as_str()));
        let need = |what: &str, aliases: &[&str]| {
            find(aliases).ok_or_else(|| {
                Error::Parse(format!(
                    "trip file header has no {what} column (looked for {aliases:?}, found {:?})",
                    headers.iter().collect::<Vec<_>>()
                ))
            })
        };
        Ok(Self {
            duration: find(&["tripduration", "duration"]),
            start_time: need("start time", &["starttime", "startedat"])?,
            stop_time: need("stop time", &["stoptime", "endedat"])?,
            start_id: need("start station id", &["startstationid"])?,
            start_name: find(&["startstationname"]),
            start_lat: need("start latitude", &["startstationlatitude", "startlat", "startlatitude"])?,
            start_lon: need(
                "start longitude",
                &["startstationlongitude", "startlng", "startlon", "startlongitude"],
            )?,
            end_id: need("end station id", &["endstationid"])?,
            end_name: find(&["endstationname"]),
            end_lat: need("end latitude", &["endstationlatitude", "endlat", "endlatitude"])?,
            end_lon: need(
                "end longitude",
                &["endstationlongitude", "endlng", "endlon", "endlongitude"],
            )?,
            user_type: find(&["usertype", "membercasual"]),
        })
    }

    fn record(&self, row: &StringRecord) -> std::result::Result<TripRecord, String> {
        let field = |i: usize| row.get(i).ok_or_else(|| format!("missing column {i}"));
        let opt = |i: Option<usize>| i.and_then(|i| row.get(i)).unwrap_or("").to_string();
        let time = |i: usize| {
            let raw = field(i)?;
            parse_timestamp(raw).ok_or_else(|| format!("bad timestamp `{raw}`"))
        };
        let num = |i: usize| {
            let raw = field(i)?;
            raw.parse::<f64>().map_err(|_| format!("bad number `{raw}`"))
        };
        let id = |i: usize| {
            let raw = field(i)?;
            if raw.is_empty() || raw.eq_ignore_ascii_case("null") {
                Err("empty station id".to_string())
            } else {
                Ok(raw.to_string())
            }
        };

        let start_time = time(self.start_time)?;
        let stop_time = time(self.stop_time)?;
        let duration_secs = match self.duration {
            Some(i) => num(i)?,
            None => (stop_time - start_time).num_milliseconds() as f64 / 1000.0,
        };
        if !(duration_secs > 0.0) {
            return Err(format!("non-positive duration {duration_secs}"));
        }
        if stop_time < start_time {
            return Err("stop time precedes start time".into());
        }
        let rec = TripRecord {
            duration_secs,
            start_time,
            stop_time,
            start_station_id: id(self.start_id)?,
            start_station_name: opt(self.start_name),
            start_latitude: num(self.start_lat)?,
            start_longitude: num(self.start_lon)?,
            end_station_id: id(self.end_id)?,
            end_station_name: opt(self.end_name),
            end_latitude: num(self.end_lat)?,
            end_longitude: num(self.end_lon)?,
            user_type: opt(self.user_type),
        };
        for (lat, lon) in [
            (rec.start_latitude, rec.start_longitude),
            (rec.end_latitude, rec.end_longitude),
        ] {
            if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
                return Err(format!("coordinates ({lat}, {lon}) out of range"));
            }
        }
        Ok(rec)
    }
}

/// Streaming reader over one trip CSV.
pub struct TripReader<R> {
    reader: csv::Reader<R>,
    columns: Columns,
    options: ParseOptions,
    tally: ParseTally,
    row: StringRecord,
    done: bool,
}

/// Opens a trip CSV stream, resolving its header up front.
pub fn parse_trips<R: Read>(input: R, options: ParseOptions) -> Result<TripReader<R>> {
    let mut reader = ReaderBuilder::new().flexible(true).trim(Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let columns = Columns::resolve(&headers)?;
    Ok(TripReader {
        reader,
        columns,
        options,
        tally: ParseTally::default(),
        row: StringRecord::new(),
        done: false,
    })
}

impl<R: Read> TripReader<R> {
    pub fn tally(&self) -> ParseTally {
        self.tally
    }
}

impl<R: Read> Iterator for TripReader<R> {
    type Item = Result<TripRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let line = self.reader.position().line();
            match self.reader.read_record(&mut self.row) {
                Ok(false) => self.done = true,
                Ok(true) => match self.columns.record(&self.row) {
                    Ok(rec) => {
                        self.tally.accepted += 1;
                        return Some(Ok(rec));
                    }
                    Err(reason) => {
                        self.tally.skipped += 1;
                        if self.options.strict {
                            self.done = true;
                            return Some(Err(Error::Parse(format!("line {}: {reason}", line + 1))));
                        }
                    }
                },
                Err(e) => {
                    if self.options.strict {
                        self.done = true;
                        return Some(Err(e.into()));
                    }
                    self.tally.skipped += 1;
                }
            }
        }
        None
    }
}

/// Streams every file in order through `sink`, returning the combined tally.
pub fn read_trip_files<P: AsRef<Path>>(
    paths: &[P],
    options: ParseOptions,
    mut sink: impl FnMut(TripRecord),
) -> Result<ParseTally> {
    let mut total = ParseTally::default();
    for path in paths {
        let path = path.as_ref();
        let file = File::open(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        let mut reader = parse_trips(BufReader::new(file), options)?;
        for rec in reader.by_ref() {
            sink(rec?);
        }
        total.merge(reader.tally());
    }
    Ok(total)
}
