//! Parse trip CSVs, keep stations active over the study window and aggregate
//! hourly check-outs.
//!
//! ```text
//! cargo run --example ingest_trips -- [trips.csv ...]
//! ```

use std::path::PathBuf;

use stationcast::ingest::{
    aggregate_hourly, filter_stations, parse_timestamp, read_trip_files, ParseOptions, StationFilter, StudyWindow,
};

fn main() -> stationcast::Result<()> {
    let mut paths: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    if paths.is_empty() {
        paths.push(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/trips_1000.csv"));
    }
    let mut trips = Vec::new();
    let tally = read_trip_files(&paths, ParseOptions::default(), |t| trips.push(t))?;
    println!("{} rows accepted, {} skipped", tally.accepted, tally.skipped);

    let window = StudyWindow::new(
        parse_timestamp("2016-01-04 00:00:00").unwrap(),
        parse_timestamp("2016-01-11 00:00:00").unwrap(),
    )?;
    let rules = StationFilter {
        min_total_demand: 50,
        require_every_year: true,
    };
    let stations = filter_stations(&trips, &window, rules)?;
    let (series, counts) = aggregate_hourly(&trips, &stations, &window)?;
    println!(
        "{} stations over {} hours; {} trips counted, {} outside the window, {} from dropped stations",
        series.n_stations(),
        series.n_hours(),
        counts.counted,
        counts.outside_window,
        counts.other_station
    );
    for (i, s) in stations.iter().enumerate() {
        let row = series.station_row(i);
        let peak = (0..row.len()).max_by_key(|&h| row[h]).unwrap_or(0);
        println!(
            "  {:>4} {:<32} total {:>4}, busiest hour {}",
            s.station_id,
            s.name,
            row.iter().map(|&c| c as u64).sum::<u64>(),
            series.timestamp(peak)
        );
    }
    Ok(())
}
