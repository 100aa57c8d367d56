#![allow(dead_code)]

pub mod cli;
pub mod oracles;

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stationcast::analysis::{detect_communities, CommunityPartition, LouvainOptions, WeightedGraph};
use stationcast::autodiff::Matrix;
use stationcast::graph::{BinaryAdjacency, StationMeta};
use stationcast::ingest::{parse_timestamp, WindowedDataset};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Windows over a random normalized series; the raw series is the same matrix.
pub fn toy_dataset(n: usize, hours: usize, c0: usize, seed: u64) -> WindowedDataset {
    let mut r = rng(seed);
    let m = Arc::new(Matrix::from_fn(n, hours, |_, _| r.gen_range(0.0..1.0)));
    WindowedDataset::new(
        m.clone(),
        m,
        parse_timestamp("2016-01-04 00:00:00").unwrap(),
        0..hours,
        c0,
    )
    .unwrap()
}

/// Erdős–Rényi graph with edge probability `p`.
pub fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> BinaryAdjacency {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    BinaryAdjacency::from_edges(n, &edges)
}

/// Symmetric random weights in [0.05, 1) on a `density` fraction of pairs.
pub fn weighted_graph(rng: &mut ChaCha8Rng, n: usize, density: f64, self_loops: bool) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            if (i != j || self_loops) && rng.gen_bool(density) {
                let w = rng.gen_range(0.05..1.0);
                m[(i, j)] = w;
                m[(j, i)] = w;
            }
        }
    }
    m
}

pub fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn four_stations() -> Vec<StationMeta> {
    vec![
        StationMeta::new("72", "W 52 St & 11 Ave", 40.76727216, -73.99392888),
        StationMeta::new("79", "Franklin St & W Broadway", 40.71911552, -74.00666661),
        StationMeta::new("82", "St James Pl & \"Pearl\" St", 40.71117416, -74.00016545),
        StationMeta::new("83", "Atlantic Ave <Fort Greene>", 40.68382604, -73.97632328),
    ]
}

pub fn small_graph() -> (WeightedGraph, CommunityPartition) {
    let w = Matrix::from_rows(&[
        [1.0, 0.75, 0.0, 0.0],
        [0.75, 0.5, 0.25, 0.0],
        [0.0, 0.25, 1.0, 0.625],
        [0.0, 0.0, 0.625, 0.875],
    ]);
    let g = WeightedGraph::new(w, four_stations()).unwrap();
    let p = detect_communities(&g.weights, LouvainOptions::default()).unwrap();
    (g, p)
}
