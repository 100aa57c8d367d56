//! The learned filter read as a weighted station graph.

mod community;
mod export;
mod profile;

pub use community::{detect_communities, modularity, CommunityPartition, LouvainOptions};
pub use export::{edge_csv, gexf_document, vertex_csv, GEXF_NAMESPACE};
pub use profile::{edge_profiles, profiles_csv, Bins, ProfileRow};

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::autodiff::Matrix;
use crate::error::{Error, Result};
use crate::graph::{compare_station_ids, StationMeta};

/// Symmetric weights over stations.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    pub weights: Matrix,
    pub stations: Vec<StationMeta>,
}

impl WeightedGraph {
    pub fn new(weights: Matrix, stations: Vec<StationMeta>) -> Result<Self> {
        if !weights.is_square() || weights.rows() != stations.len() {
            return Err(Error::dim(
                "weighted_graph",
                weights.shape(),
                (stations.len(), stations.len()),
            ));
        }
        Ok(Self { weights, stations })
    }

    pub fn n(&self) -> usize {
        self.weights.rows()
    }

    pub fn index_of(&self, station_id: &str) -> Result<usize> {
        self.stations
            .iter()
            .position(|s| s.station_id == station_id)
            .ok_or_else(|| Error::Validation(format!("unknown station `{station_id}`")))
    }

    /// Off-diagonal pairs `i < j` with non-zero weight.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let w = self.weights[(i, j)];
                if w != 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }
}

/// Affine min-max over all entries onto `[0, 1]`; a constant matrix maps to zeros.
pub fn normalize_ddgf(filter: &Matrix, stations: Vec<StationMeta>) -> Result<WeightedGraph> {
    if !filter.is_square() {
        return Err(Error::dim("normalize_ddgf", filter.shape(), filter.shape()));
    }
    let (lo, hi) = (filter.min_value(), filter.max_value());
    let span = hi - lo;
    let weights = if span > 0.0 {
        filter.map(|w| (w - lo) / span)
    } else {
        Matrix::zeros(filter.rows(), filter.cols())
    };
    WeightedGraph::new(weights, stations)
}

/// Keeps weights `≥ tau`, self-loops included, and zeroes the rest.
pub fn threshold_edges(g: &WeightedGraph, tau: f64) -> WeightedGraph {
    WeightedGraph {
        weights: g.weights.map(|w| if w >= tau { w } else { 0.0 }),
        stations: g.stations.clone(),
    }
}

/// Row sums, self-connection included.
pub fn weighted_degree(g: &WeightedGraph) -> Vec<f64> {
    (0..g.n()).map(|i| g.weights.row(i).iter().sum()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct NeighborRank {
    pub index: usize,
    pub station_id: String,
    pub weight: f64,
    /// 1 = largest weight.
    pub rank: usize,
}

/// Every station ranked by its weight to `station`, largest first, ties by station id.
pub fn neighbor_ranks_matrix(weights: &Matrix, stations: &[StationMeta], station: usize) -> Vec<NeighborRank> {
    let row = weights.row(station);
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        row[b]
            .partial_cmp(&row[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| compare_station_ids(&stations[a].station_id, &stations[b].station_id))
    });
    order
        .into_iter()
        .enumerate()
        .map(|(r, i)| NeighborRank {
            index: i,
            station_id: stations[i].station_id.clone(),
            weight: row[i],
            rank: r + 1,
        })
        .collect()
}

pub fn neighbor_ranks(g: &WeightedGraph, station_id: &str) -> Result<Vec<NeighborRank>> {
    let i = g.index_of(station_id)?;
    Ok(neighbor_ranks_matrix(&g.weights, &g.stations, i))
}

/// Indices of the `k` largest values, ties by lower index.
pub fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(k);
    order
}

/// For each focus station, its `top` strongest neighbors under `g` and their
/// ranks under each reference matrix. Reference ranks sort the same way as
/// [`neighbor_ranks`].
pub fn rank_table_csv(g: &WeightedGraph, focus: &[usize], top: usize, references: &[(&str, &Matrix)]) -> String {
    let mut header = String::from("focus_id,focus_name,neighbor_id,neighbor_name,weight,rank");
    for (name, _) in references {
        let _ = write!(header, ",{name}_rank");
    }
    let mut rows = vec![header];
    for &f in focus {
        let own = neighbor_ranks_matrix(&g.weights, &g.stations, f);
        let ref_ranks: Vec<Vec<usize>> = references
            .iter()
            .map(|(_, m)| {
                let mut by_index = vec![0; g.n()];
                for r in neighbor_ranks_matrix(m, &g.stations, f) {
                    by_index[r.index] = r.rank;
                }
                by_index
            })
            .collect();
        for nr in own.iter().take(top) {
            let mut line = format!(
                "{},{},{},{},{},{}",
                csv_field(&g.stations[f].station_id),
                csv_field(&g.stations[f].name),
                csv_field(&nr.station_id),
                csv_field(&g.stations[nr.index].name),
                nr.weight,
                nr.rank
            );
            for r in &ref_ranks {
                let _ = write!(line, ",{}", r[nr.index]);
            }
            rows.push(line);
        }
    }
    rows.join("\n") + "\n"
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    /// Squared correlation; 1 when `y` is constant, since the fit is then exact.
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<RegressionFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Validation(format!(
            "linear fit needs two equal-length series of at least 2 points (got {} and {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::Validation(
            "linear fit needs at least two distinct x values".into(),
        ));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    Ok(RegressionFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}
