use std::fmt::Write as _;

use crate::analysis::{CommunityPartition, WeightedGraph};
use crate::error::{Error, Result};
use crate::graph::PairwiseMatrix;

/// Bin edges `e_0 < e_1 < … < e_k`; bin `t` is `[e_t, e_{t+1})` and the last one is closed.
#[derive(Clone, Debug, PartialEq)]
pub struct Bins {
    edges: Vec<f64>,
}

impl Bins {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation(format!(
                "bin edges must be finite and strictly increasing, got {edges:?}"
            )));
        }
        Ok(Self { edges })
    }

    /// `count` bins of equal `width` starting at `start`.
    pub fn uniform(start: f64, width: f64, count: usize) -> Result<Self> {
        Self::new((0..=count).map(|k| start + k as f64 * width).collect())
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bounds(&self, t: usize) -> (f64, f64) {
        (self.edges[t], self.edges[t + 1])
    }

    /// Bin of `v`, if it falls inside the covered range.
    pub fn locate(&self, v: f64) -> Option<usize> {
        let last = *self.edges.last().unwrap();
        if !(v >= self.edges[0] && v <= last) {
            return None;
        }
        if v == last {
            return Some(self.len() - 1);
        }
        Some(self.edges.partition_point(|&e| e <= v) - 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileRow {
    pub community: usize,
    pub bin_low: f64,
    pub bin_high: f64,
    /// 0 when the bin holds no edge.
    pub mean_weight: f64,
    pub count: usize,
}

/// Mean weight of each community's internal edges, grouped by the reference
/// value of the same station pair. Edges are the retained off-diagonal pairs;
/// pairs whose reference value falls outside the bins are left out.
pub fn edge_profiles(
    g: &WeightedGraph,
    partition: &CommunityPartition,
    reference: &PairwiseMatrix,
    bins: &Bins,
) -> Result<Vec<ProfileRow>> {
    if reference.values.shape() != g.weights.shape() || partition.assignment.len() != g.n() {
        return Err(Error::dim("edge_profiles", g.weights.shape(), reference.values.shape()));
    }
    let k = partition.count();
    let mut sums = vec![vec![0.0; bins.len()]; k];
    let mut counts = vec![vec![0usize; bins.len()]; k];
    for (i, j, w) in g.edges() {
        let c = partition.assignment[i];
        if partition.assignment[j] != c {
            continue;
        }
        if let Some(t) = bins.locate(reference.values[(i, j)]) {
            sums[c][t] += w;
            counts[c][t] += 1;
        }
    }
    let mut rows = Vec::with_capacity(k * bins.len());
    for c in 0..k {
        for t in 0..bins.len() {
            let (lo, hi) = bins.bounds(t);
            let n = counts[c][t];
            rows.push(ProfileRow {
                community: c,
                bin_low: lo,
                bin_high: hi,
                mean_weight: if n > 0 { sums[c][t] / n as f64 } else { 0.0 },
                count: n,
            });
        }
    }
    Ok(rows)
}

/// `reference,community,bin_low,bin_high,mean_weight,count` rows for each labelled profile set.
pub fn profiles_csv(sets: &[(&str, &[ProfileRow])]) -> String {
    let mut out = String::from("reference,community,bin_low,bin_high,mean_weight,count\n");
    for (name, rows) in sets {
        for r in rows.iter() {
            let _ = writeln!(
                out,
                "{name},{},{},{},{},{}",
                r.community, r.bin_low, r.bin_high, r.mean_weight, r.count
            );
        }
    }
    out
}
