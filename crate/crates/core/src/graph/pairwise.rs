use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::autodiff::Matrix;
use crate::error::{Error, Result};
use crate::graph::geo::{haversine_distance, StationMeta};

/// Which station relation a pairwise matrix measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MatrixKind {
    /// Great-circle distance in miles.
    SpatialDistance,
    /// Trips between two stations, both directions summed.
    Demand,
    /// Mean trip duration in seconds between two stations.
    AverageTripDuration,
    /// Pearson correlation of hourly demand series.
    DemandCorrelation,
}

impl MatrixKind {
    pub const ALL: [MatrixKind; 4] = [
        MatrixKind::SpatialDistance,
        MatrixKind::Demand,
        MatrixKind::AverageTripDuration,
        MatrixKind::DemandCorrelation,
    ];

    pub fn code(self) -> &'static str {
        match self {
            MatrixKind::SpatialDistance => "sd",
            MatrixKind::Demand => "de",
            MatrixKind::AverageTripDuration => "atd",
            MatrixKind::DemandCorrelation => "dc",
        }
    }

    /// Distance-like kinds connect small values, affinity-like kinds connect large ones.
    pub fn connects_below(self) -> bool {
        matches!(self, MatrixKind::SpatialDistance | MatrixKind::AverageTripDuration)
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MatrixKind::ALL
            .into_iter()
            .find(|k| k.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Usage(format!("unknown matrix kind `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseMatrix {
    pub kind: MatrixKind,
    pub values: Matrix,
    pub stations: Vec<String>,
}

impl PairwiseMatrix {
    pub fn n(&self) -> usize {
        self.values.rows()
    }
}

/// Thresholded 0/1 station graph without self-loops.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryAdjacency {
    pub entries: Matrix,
    pub kind: Option<MatrixKind>,
    pub threshold: f64,
    pub stations: Vec<String>,
}

impl BinaryAdjacency {
    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    /// Builds an undirected graph from an edge list; self-loops are ignored.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut entries = Matrix::zeros(n, n);
        for &(i, j) in edges {
            if i != j {
                entries[(i, j)] = 1.0;
                entries[(j, i)] = 1.0;
            }
        }
        Self {
            entries,
            kind: None,
            threshold: f64::NAN,
            stations: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    pub fn edge_count(&self) -> usize {
        let n = self.n();
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if self.entries[(i, j)] != 0.0 {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&j| self.entries[(i, j)] != 0.0)
    }
}

fn check_unique(stations: &[StationMeta]) -> Result<()> {
    let mut seen = HashSet::new();
    for s in stations {
        if !seen.insert(s.station_id.as_str()) {
            return Err(Error::Validation(format!("duplicate station id `{}`", s.station_id)));
        }
    }
    Ok(())
}

fn check_square(op: &'static str, m: &Matrix, stations: &[String]) -> Result<()> {
    if !m.is_square() || m.rows() != stations.len() {
        return Err(Error::dim(op, m.shape(), (stations.len(), stations.len())));
    }
    Ok(())
}

pub fn build_sd_matrix(stations: &[StationMeta]) -> Result<PairwiseMatrix> {
    if stations.len() < 2 {
        return Err(Error::Validation(
            "spatial distance matrix needs at least two stations".into(),
        ));
    }
    check_unique(stations)?;
    let n = stations.len();
    let mut values = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = haversine_distance(&stations[i], &stations[j])?;
            values[(i, j)] = d;
            values[(j, i)] = d;
        }
    }
    Ok(PairwiseMatrix {
        kind: MatrixKind::SpatialDistance,
        values,
        stations: stations.iter().map(|s| s.station_id.clone()).collect(),
    })
}

/// Folds a directed origin–destination matrix into an undirected one:
/// off-diagonal entries sum both directions, the diagonal is kept.
pub fn aggregate_directions(directed: &Matrix) -> Result<Matrix> {
    if !directed.is_square() {
        return Err(Error::dim("aggregate_directions", directed.shape(), directed.shape()));
    }
    let n = directed.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = directed[(i, i)];
        for j in (i + 1)..n {
            let v = directed[(i, j)] + directed[(j, i)];
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Symmetric demand matrix from directed trip counts.
pub fn build_de_matrix(od: &Matrix, stations: &[String]) -> Result<PairwiseMatrix> {
    check_square("build_de_matrix", od, stations)?;
    if let Some(bad) = od.data().iter().find(|v| !(**v >= 0.0) || v.fract() != 0.0) {
        return Err(Error::Validation(format!(
            "origin-destination counts must be non-negative integers, found {bad}"
        )));
    }
    Ok(PairwiseMatrix {
        kind: MatrixKind::Demand,
        values: aggregate_directions(od)?,
        stations: stations.to_vec(),
    })
}

/// Mean trip duration `TTD / DE`; pairs without trips get `+inf` so no
/// `≤` threshold ever connects them.
///
/// `ttd` must already be direction-aggregated like the demand matrix.
pub fn build_atd_matrix(ttd: &Matrix, de: &PairwiseMatrix) -> Result<PairwiseMatrix> {
    if de.kind != MatrixKind::Demand {
        return Err(Error::Validation(format!(
            "average trip duration needs a demand matrix, got {}",
            de.kind
        )));
    }
    check_square("build_atd_matrix", ttd, &de.stations)?;
    if let Some(bad) = ttd.data().iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Validation(format!(
            "trip durations must be non-negative, found {bad}"
        )));
    }
    if ttd.asymmetry() != 0.0 {
        return Err(Error::Validation(
            "total trip duration matrix must be direction-aggregated (symmetric)".into(),
        ));
    }
    let values = ttd.zip_map("build_atd_matrix", &de.values, |t, d| {
        if d > 0.0 {
            t / d
        } else {
            f64::INFINITY
        }
    })?;
    Ok(PairwiseMatrix {
        kind: MatrixKind::AverageTripDuration,
        values,
        stations: de.stations.clone(),
    })
}

/// Pearson correlation between station rows of `series` (stations × hours).
///
/// Returns the matrix plus the ids of constant stations, whose off-diagonal
/// correlations are set to zero.
pub fn build_dc_matrix(series: &Matrix, stations: &[String]) -> Result<(PairwiseMatrix, Vec<String>)> {
    let (n, t) = series.shape();
    if n != stations.len() {
        return Err(Error::dim("build_dc_matrix", series.shape(), (stations.len(), t)));
    }
    if t < 2 {
        return Err(Error::Validation(
            "demand correlation needs at least two hours per station".into(),
        ));
    }
    let mut centered = Matrix::zeros(n, t);
    let mut norms = vec![0.0; n];
    for i in 0..n {
        let row = series.row(i);
        let mean = row.iter().sum::<f64>() / t as f64;
        let out = centered.row_mut(i);
        for (o, v) in out.iter_mut().zip(row) {
            *o = v - mean;
        }
        norms[i] = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    let constant: Vec<String> = (0..n)
        .filter(|&i| norms[i] == 0.0)
        .map(|i| stations[i].clone())
        .collect();
    for id in &constant {
        warn!("station {id} has a constant demand series; its correlations are set to 0");
    }
    let mut values = Matrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = if norms[i] == 0.0 || norms[j] == 0.0 {
                0.0
            } else {
                let dot: f64 = centered.row(i).iter().zip(centered.row(j)).map(|(a, b)| a * b).sum();
                (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0)
            };
            values[(i, j)] = r;
            values[(j, i)] = r;
        }
    }
    Ok((
        PairwiseMatrix {
            kind: MatrixKind::DemandCorrelation,
            values,
            stations: stations.to_vec(),
        },
        constant,
    ))
}

/// Binary adjacency: distance-like kinds connect when `value ≤ κ`, affinity
/// kinds when `value ≥ κ`. The diagonal is always zero.
pub fn threshold(matrix: &PairwiseMatrix, kappa: f64) -> Result<BinaryAdjacency> {
    if !kappa.is_finite() {
        return Err(Error::Validation(format!("threshold must be finite, got {kappa}")));
    }
    let n = matrix.n();
    let below = matrix.kind.connects_below();
    let mut entries = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = matrix.values[(i, j)];
            let connected = if below { v <= kappa } else { v >= kappa };
            if connected {
                entries[(i, j)] = 1.0;
                entries[(j, i)] = 1.0;
            }
        }
    }
    Ok(BinaryAdjacency {
        entries,
        kind: Some(matrix.kind),
        threshold: kappa,
        stations: matrix.stations.clone(),
    })
}
