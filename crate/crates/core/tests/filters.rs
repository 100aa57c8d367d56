//! Normalized adjacency and Laplacian against dense linear algebra, and
//! K-hop localization of polynomial filters against breadth-first search.

mod common;

use common::oracles::{bfs, max_diff, oracle_filter, oracle_laplacian};
use common::{random_graph, rng};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::Rng;
use stationcast::autodiff::Matrix;
use stationcast::graph::{normalize, normalized_laplacian, BinaryAdjacency, PolynomialFilter};

#[test]
fn two_hundred_random_graphs_match_dense_oracle() {
    let mut r = rng(2);
    for trial in 0..200 {
        let n = r.gen_range(1..=30);
        let p = r.gen_range(0.0..0.6);
        let adj = random_graph(n, p, &mut r);
        let f = normalize(&adj);
        let e = max_diff(&f.matrix, &oracle_filter(&adj));
        assert!(e < 1e-12, "trial {trial}: filter differs by {e}");
        assert_eq!(f.matrix.asymmetry(), 0.0);
        let l = normalized_laplacian(&adj);
        let e = max_diff(&l, &oracle_laplacian(&adj));
        assert!(e < 1e-12, "trial {trial}: Laplacian differs by {e}");

        let eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| l[(i, j)]));
        for &lambda in eig.eigenvalues.iter() {
            assert!(
                (-1e-9..=2.0 + 1e-9).contains(&lambda),
                "trial {trial}: eigenvalue {lambda}"
            );
        }
    }
}

#[test]
fn zero_edge_graphs_give_exact_identity() {
    for n in 1..=30 {
        let adj = BinaryAdjacency::from_edges(n, &[]);
        assert_eq!(normalize(&adj).matrix, Matrix::identity(n));
    }
}

#[test]
fn complete_graph_filter_is_uniform() {
    let n = 6;
    let edges: Vec<_> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let f = normalize(&BinaryAdjacency::from_edges(n, &edges));
    for v in f.matrix.data() {
        assert!((v - 1.0 / n as f64).abs() < 1e-15);
    }
}

#[test]
fn hundred_random_graphs_are_k_localized() {
    let mut r = rng(3);
    for trial in 0..100 {
        let n = r.gen_range(1..=25);
        let adj = random_graph(n, r.gen_range(0.05..0.3), &mut r);
        let l = normalized_laplacian(&adj);
        let support: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.15)).collect();
        let mut x = vec![0.0; n];
        for &s in &support {
            x[s] = r.gen_range(-2.0..2.0);
        }
        let dist = bfs(&adj, &support);
        for k in 1..=3 {
            let theta: Vec<f64> = (0..=k).map(|_| r.gen_range(-1.0..1.0)).collect();
            let y = PolynomialFilter::new(theta).unwrap().apply(&l, &x).unwrap();
            for v in 0..n {
                if dist[v] > k {
                    assert!(
                        y[v].abs() < 1e-12,
                        "trial {trial}, K={k}: vertex {v} at {} hops has {}",
                        dist[v],
                        y[v]
                    );
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn filter_is_symmetric_with_positive_diagonal(n in 1usize..20, p in 0.0f64..1.0, seed: u64) {
        let adj = random_graph(n, p, &mut rng(seed));
        let f = normalize(&adj).matrix;
        prop_assert_eq!(f.asymmetry(), 0.0);
        for i in 0..n {
            let deg = adj.neighbors(i).count() as f64;
            prop_assert!((f[(i, i)] - 1.0 / (1.0 + deg)).abs() < 1e-15);
        }
    }

    #[test]
    fn laplacian_rows_of_connected_vertices_annihilate_sqrt_degree(n in 2usize..20, p in 0.1f64..1.0, seed: u64) {
        // D^{1/2}·1 is in the kernel of the normalized Laplacian
        let adj = random_graph(n, p, &mut rng(seed));
        let l = normalized_laplacian(&adj);
        let root: Vec<f64> = (0..n).map(|i| (adj.neighbors(i).count() as f64).sqrt()).collect();
        for i in 0..n {
            if root[i] > 0.0 {
                let s: f64 = (0..n).map(|j| l[(i, j)] * root[j]).sum();
                prop_assert!(s.abs() < 1e-12);
            }
        }
    }
}
