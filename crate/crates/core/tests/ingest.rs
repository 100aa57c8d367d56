//! Trip parsing, hourly aggregation and station filtering.

mod common;

use std::fs;
use std::path::PathBuf;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use common::oracles::oracle_rows;
use stationcast::ingest::{
    aggregate_hourly, filter_stations, parse_trips, read_trip_files, split_hours, ParseOptions, StationFilter,
    StudyWindow, TripRecord,
};

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/trips_1000.csv")
}

fn week() -> StudyWindow {
    StudyWindow::new(at(2016, 1, 4, 0), at(2016, 1, 11, 0)).unwrap()
}

fn at(y: i32, m: u32, d: u32, h: u32) -> NaiveDateTime {
    NaiveDate::from_ymd_opt(y, m, d).unwrap().and_hms_opt(h, 0, 0).unwrap()
}

fn fixture_trips() -> Vec<TripRecord> {
    let mut trips = Vec::new();
    let tally = read_trip_files(&[fixture()], ParseOptions::default(), |t| trips.push(t)).unwrap();
    assert_eq!(tally.accepted, 1000);
    assert_eq!(tally.skipped, 3);
    trips
}

#[test]
fn hourly_aggregation_matches_brute_force_tally() {
    let trips = fixture_trips();
    let window = week();
    let rules = StationFilter {
        min_total_demand: 1,
        require_every_year: true,
    };
    let stations = filter_stations(&trips, &window, rules).unwrap();
    let ids: Vec<&str> = stations.iter().map(|s| s.station_id.as_str()).collect();
    assert_eq!(ids, ["72", "79", "82", "83", "116", "119", "120", "127"]);

    let (series, tally) = aggregate_hourly(&trips, &stations, &window).unwrap();
    let rows = oracle_rows(&fixture());
    assert_eq!(rows.len(), 1000);
    let mut inside = 0;
    for (i, id) in ids.iter().enumerate() {
        for h in 0..window.hours() {
            let lo = window.start + Duration::hours(h as i64);
            let hi = lo + Duration::hours(1);
            let expected = rows.iter().filter(|(s, t)| s == id && *t >= lo && *t < hi).count();
            inside += expected;
            assert_eq!(series.count(i, h) as usize, expected, "station {id}, hour {h}");
        }
    }
    assert_eq!(series.total() as usize, inside);
    assert_eq!(tally.counted as usize, inside);
    assert_eq!(tally.outside_window as usize, 1000 - inside);
    assert_eq!(tally.other_station, 0);
}

#[test]
fn order_of_rows_does_not_change_the_result() {
    let mut trips = fixture_trips();
    let window = week();
    let rules = StationFilter {
        min_total_demand: 1,
        require_every_year: true,
    };
    let a = filter_stations(&trips, &window, rules).unwrap();
    let (sa, _) = aggregate_hourly(&trips, &a, &window).unwrap();
    trips.reverse();
    let b = filter_stations(&trips, &window, rules).unwrap();
    let (sb, _) = aggregate_hourly(&trips, &b, &window).unwrap();
    assert_eq!(a, b);
    assert_eq!(sa, sb);
}

#[test]
fn strict_mode_stops_at_the_first_bad_row() {
    let text = fs::read_to_string(fixture()).unwrap();
    let reader = parse_trips(text.as_bytes(), ParseOptions { strict: true }).unwrap();
    let results: Vec<_> = reader.collect();
    assert!(results.last().unwrap().is_err());
    assert_eq!(results.iter().filter(|r| r.is_ok()).count(), 120);
}

#[test]
fn header_aliases_of_later_exports() {
    let csv = "ride_id,rideable_type,started_at,ended_at,start_station_name,start_station_id,end_station_name,end_station_id,start_lat,start_lng,end_lat,end_lng,member_casual\n\
               A1,classic_bike,2016-01-04 08:00:00,2016-01-04 08:20:30,Foo,72,Bar,79,40.76,-73.99,40.71,-74.00,member\n";
    let trips: Vec<_> = parse_trips(csv.as_bytes(), ParseOptions::default()).unwrap().collect();
    let t = trips[0].as_ref().unwrap();
    assert_eq!(t.duration_secs, 1230.0);
    assert_eq!(t.start_station_id, "72");
    assert_eq!(t.user_type, "member");
}

fn trip(id: &str, t: NaiveDateTime) -> TripRecord {
    TripRecord {
        duration_secs: 600.0,
        start_time: t,
        stop_time: t + Duration::minutes(10),
        start_station_id: id.into(),
        start_station_name: format!("Station {id}"),
        start_latitude: 40.7,
        start_longitude: -74.0,
        end_station_id: "9".into(),
        end_station_name: "Station 9".into(),
        end_latitude: 40.71,
        end_longitude: -74.01,
        user_type: "Subscriber".into(),
    }
}

#[test]
fn demand_and_year_rules_at_the_boundary() {
    let window = StudyWindow::new(at(2013, 7, 1, 0), at(2016, 7, 1, 0)).unwrap();
    assert_eq!(window.hours(), 26_304);
    let mut trips = Vec::new();
    for h in 0..26_304 {
        let t = window.start + Duration::hours(h) + Duration::minutes(5);
        // one check-out every hour: exactly the minimum
        trips.push(trip("1", t));
        // misses one hour: one short of the minimum
        if h != 5000 {
            trips.push(trip("2", t));
        }
        // plenty of trips, but none in the last twelve months
        if t < at(2015, 7, 1, 0) {
            trips.push(trip("3", t));
            trips.push(trip("3", t));
        }
        // exactly the minimum, but nothing in the first year
        if t >= at(2014, 7, 1, 0) {
            trips.push(trip("4", t));
            if h % 2 == 0 {
                trips.push(trip("4", t));
                trips.push(trip("4", t));
            }
        }
    }
    let n4 = trips.iter().filter(|t| t.start_station_id == "4").count();
    assert!(n4 >= 26_304);
    // trips outside the window never count towards the threshold
    for _ in 0..10 {
        trips.push(trip("2", at(2016, 7, 1, 0)));
    }

    let kept = |rules| -> Vec<String> {
        filter_stations(&trips, &window, rules)
            .map(|s| s.into_iter().map(|m| m.station_id).collect())
            .unwrap_or_default()
    };
    assert_eq!(kept(StationFilter::default()), ["1"]);
    assert_eq!(
        kept(StationFilter {
            min_total_demand: 26_304,
            require_every_year: false
        }),
        ["1", "3", "4"]
    );
    assert_eq!(
        kept(StationFilter {
            min_total_demand: 26_303,
            require_every_year: true
        }),
        ["1", "2"]
    );
}

#[test]
fn nothing_passing_the_filter_is_an_error() {
    let trips = fixture_trips();
    let rules = StationFilter {
        min_total_demand: 10_000,
        require_every_year: true,
    };
    assert!(filter_stations(&trips, &week(), rules).is_err());
}

#[test]
fn split_sizes_must_add_up() {
    let s = split_hours(100, 80, 10, 10).unwrap();
    assert_eq!((s.train, s.validation, s.test), (0..80, 80..90, 90..100));
    assert!(split_hours(100, 80, 10, 11).is_err());
}

#[test]
fn window_bounds_must_be_on_the_hour() {
    let start = at(2016, 1, 4, 0) + Duration::minutes(30);
    assert!(StudyWindow::new(start, at(2016, 1, 5, 0)).is_err());
    assert!(StudyWindow::new(at(2016, 1, 5, 0), at(2016, 1, 5, 0)).is_err());
}
