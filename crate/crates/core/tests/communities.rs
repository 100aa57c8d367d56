mod common;

use common::oracles::brute_best;
use common::weighted_graph;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stationcast::analysis::{detect_communities, modularity, LouvainOptions};
use stationcast::autodiff::Matrix;

#[test]
fn matches_exhaustive_optimum_small_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(2..=8);
        let density = rng.gen_range(0.2..0.8);
        let loops = rng.gen_bool(0.3);
        let w = weighted_graph(&mut rng, n, density, loops);
        if w.sum() == 0.0 {
            continue;
        }
        let found = detect_communities(&w, LouvainOptions::default()).unwrap();
        let best = brute_best(&w);
        worst = worst.max(best - found.modularity);
        assert!(
            (found.modularity - best).abs() < 1e-9,
            "n={n}: {} vs {best}",
            found.modularity
        );
    }
    assert!(worst < 1e-9);
}

#[test]
fn planted_cliques_with_bridge() {
    let mut w = Matrix::zeros(6, 6);
    for (a, b) in [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)] {
        w[(a, b)] = 1.0;
        w[(b, a)] = 1.0;
    }
    let p = detect_communities(&w, LouvainOptions::default()).unwrap();
    assert_eq!(p.assignment, vec![0, 0, 0, 1, 1, 1]);
    assert!((p.modularity - brute_best(&w)).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn never_below_singletons_and_no_improving_merge(seed in any::<u64>(), n in 2usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = weighted_graph(&mut rng, n, 0.4, true);
        let p = detect_communities(&w, LouvainOptions { seed, ..Default::default() }).unwrap();
        let singletons: Vec<usize> = (0..n).collect();
        prop_assert!(p.modularity >= modularity(&w, &singletons, 1.0) - 1e-12);
        prop_assert!((p.modularity - modularity(&w, &p.assignment, 1.0)).abs() < 1e-12);
        let k = p.count();
        for a in 0..k {
            for b in a + 1..k {
                let merged: Vec<usize> = p.assignment.iter().map(|&c| if c == b { a } else { c }).collect();
                prop_assert!(modularity(&w, &merged, 1.0) <= p.modularity + 1e-12);
            }
        }
    }

    #[test]
    fn deterministic_given_seed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = weighted_graph(&mut rng, 12, 0.3, false);
        let opts = LouvainOptions { seed, ..Default::default() };
        prop_assert_eq!(detect_communities(&w, opts).unwrap(), detect_communities(&w, opts).unwrap());
    }
}
