//! Build a spatial-distance graph over a handful of stations, normalize it into
//! a graph filter, and show that a K-th order Laplacian polynomial stays within
//! K hops.
//!
//! ```text
//! cargo run --example graph_filters -- [threshold-miles]
//! ```

use stationcast::graph::{build_sd_matrix, normalize, normalized_laplacian, threshold, PolynomialFilter, StationMeta};

fn main() -> stationcast::Result<()> {
    let kappa: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    // a line of stations about 0.7 miles apart along a meridian
    let stations: Vec<StationMeta> = (0..6)
        .map(|i| {
            StationMeta::new(
                (i + 1).to_string(),
                format!("Stop {i}"),
                40.70 + 0.01 * i as f64,
                -73.99,
            )
        })
        .collect();
    let sd = build_sd_matrix(&stations)?;
    let adj = threshold(&sd, kappa)?;
    println!("{} edges at {kappa} miles", adj.edge_count());

    let filter = normalize(&adj);
    println!("normalized filter:");
    for i in 0..filter.n() {
        let row: Vec<String> = (0..filter.n())
            .map(|j| format!("{:.3}", filter.matrix[(i, j)]))
            .collect();
        println!("  {}", row.join(" "));
    }

    let l = normalized_laplacian(&adj);
    let mut impulse = vec![0.0; stations.len()];
    impulse[0] = 1.0;
    for k in 1..=3 {
        let y = PolynomialFilter::new(vec![1.0; k + 1])?.apply(&l, &impulse)?;
        let reach = y.iter().rposition(|v| v.abs() > 1e-12).map_or(0, |i| i);
        let shown: Vec<String> = y.iter().map(|v| format!("{v:.3}")).collect();
        println!("K={k}: [{}], farthest nonzero vertex {reach}", shown.join(", "));
    }
    Ok(())
}
