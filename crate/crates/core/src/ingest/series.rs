use std::borrow::Borrow;
use std::collections::HashMap;
use std::ops::Range;

use chrono::{Datelike, Duration, Months, NaiveDateTime, Timelike};

use crate::autodiff::Matrix;
use crate::error::{Error, Result};
use crate::graph::{compare_station_ids, StationMeta};
use crate::ingest::trips::TripRecord;

/// Half-open study period `[start, end)` in local wall-clock time, hour aligned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StudyWindow {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
}

impl StudyWindow {
    pub fn new(start: NaiveDateTime, end: NaiveDateTime) -> Result<Self> {
        let aligned = |t: NaiveDateTime| t.minute() == 0 && t.second() == 0 && t.nanosecond() == 0;
        if !aligned(start) || !aligned(end) {
            return Err(Error::Validation("study window bounds must fall on the hour".into()));
        }
        if end <= start {
            return Err(Error::Validation("study window is empty".into()));
        }
        Ok(Self { start, end })
    }

    pub fn hours(&self) -> usize {
        (self.end - self.start).num_hours() as usize
    }

    /// Index of the hour bucket containing `t`, if inside the window.
    pub fn hour_index(&self, t: NaiveDateTime) -> Option<usize> {
        if t < self.start || t >= self.end {
            return None;
        }
        Some((t - self.start).num_hours() as usize)
    }

    /// Consecutive 12-month spans from the start; the last one is cut at the end.
    pub fn year_spans(&self) -> Vec<(NaiveDateTime, NaiveDateTime)> {
        let mut spans = Vec::new();
        let mut from = self.start;
        while from < self.end {
            let to = (from + Months::new(12)).min(self.end);
            spans.push((from, to));
            from = to;
        }
        spans
    }
}

/// Hourly check-out counts, stations × hours.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandSeries {
    pub stations: Vec<StationMeta>,
    pub t0: NaiveDateTime,
    hours: usize,
    counts: Vec<u32>,
}

impl DemandSeries {
    pub fn new(stations: Vec<StationMeta>, t0: NaiveDateTime, hours: usize, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != stations.len() * hours {
            return Err(Error::Validation(format!(
                "{} stations x {hours} hours needs {} counts, got {}",
                stations.len(),
                stations.len() * hours,
                counts.len()
            )));
        }
        Ok(Self {
            stations,
            t0,
            hours,
            counts,
        })
    }

    /// Rounds a non-negative matrix to integer counts.
    pub fn from_matrix(stations: Vec<StationMeta>, t0: NaiveDateTime, m: &Matrix) -> Result<Self> {
        if m.rows() != stations.len() {
            return Err(Error::dim(
                "DemandSeries::from_matrix",
                m.shape(),
                (stations.len(), m.cols()),
            ));
        }
        let mut counts = Vec::with_capacity(m.len());
        for &v in m.data() {
            if !(v >= 0.0) || v.fract() != 0.0 || v > u32::MAX as f64 {
                return Err(Error::Validation(format!(
                    "demand count {v} is not a non-negative integer"
                )));
            }
            counts.push(v as u32);
        }
        Self::new(stations, t0, m.cols(), counts)
    }

    pub fn n_stations(&self) -> usize {
        self.stations.len()
    }

    pub fn n_hours(&self) -> usize {
        self.hours
    }

    pub fn count(&self, station: usize, hour: usize) -> u32 {
        self.counts[station * self.hours + hour]
    }

    pub fn station_row(&self, station: usize) -> &[u32] {
        &self.counts[station * self.hours..(station + 1) * self.hours]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn timestamp(&self, hour: usize) -> NaiveDateTime {
        self.t0 + Duration::hours(hour as i64)
    }

    pub fn hour_of_day(&self, hour: usize) -> u32 {
        self.timestamp(hour).hour()
    }

    /// 0..168, Monday 00:00 first.
    pub fn hour_of_week(&self, hour: usize) -> u32 {
        let t = self.timestamp(hour);
        t.weekday().num_days_from_monday() * 24 + t.hour()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec(
            self.n_stations().max(1),
            self.hours.max(1),
            self.counts.iter().map(|&c| c as f64).collect(),
        )
        .expect("series shape")
    }

    /// Hours `range` of every station.
    pub fn slice_hours(&self, range: Range<usize>) -> DemandSeries {
        let mut counts = Vec::with_capacity(self.n_stations() * range.len());
        for i in 0..self.n_stations() {
            counts.extend_from_slice(&self.station_row(i)[range.clone()]);
        }
        DemandSeries {
            stations: self.stations.clone(),
            t0: self.timestamp(range.start),
            hours: range.len(),
            counts,
        }
    }
}

/// Rules for picking study stations.
#[derive(Clone, Copy, Debug)]
pub struct StationFilter {
    /// Minimum total check-outs over the whole window (inclusive).
    pub min_total_demand: u64,
    /// Require at least one check-out in every 12-month span of the window.
    pub require_every_year: bool,
}

impl Default for StationFilter {
    fn default() -> Self {
        Self {
            min_total_demand: 26_304,
            require_every_year: true,
        }
    }
}

#[derive(Default)]
struct StationStats {
    total: u64,
    per_span: Vec<u64>,
    first_seen: Option<(NaiveDateTime, String, f64, f64)>,
}

/// Stations meeting `rules`, ordered by ascending station id.
///
/// Metadata comes from the station's earliest check-out in the window, ties
/// broken by name, so the result does not depend on input order.
pub fn filter_stations<I>(trips: I, window: &StudyWindow, rules: StationFilter) -> Result<Vec<StationMeta>>
where
    I: IntoIterator,
    I::Item: Borrow<TripRecord>,
{
    let spans = window.year_spans();
    let mut stats: HashMap<String, StationStats> = HashMap::new();
    for trip in trips {
        let trip = trip.borrow();
        if window.hour_index(trip.start_time).is_none() {
            continue;
        }
        let s = stats.entry(trip.start_station_id.clone()).or_default();
        if s.per_span.is_empty() {
            s.per_span = vec![0; spans.len()];
        }
        s.total += 1;
        if let Some(k) = spans
            .iter()
            .position(|(a, b)| trip.start_time >= *a && trip.start_time < *b)
        {
            s.per_span[k] += 1;
        }
        let candidate = (
            trip.start_time,
            trip.start_station_name.clone(),
            trip.start_latitude,
            trip.start_longitude,
        );
        let replace = match &s.first_seen {
            None => true,
            Some((t, name, _, _)) => (candidate.0, &candidate.1) < (*t, name),
        };
        if replace {
            s.first_seen = Some(candidate);
        }
    }

    let mut kept: Vec<StationMeta> = stats
        .into_iter()
        .filter(|(_, s)| {
            s.total >= rules.min_total_demand && (!rules.require_every_year || s.per_span.iter().all(|&c| c > 0))
        })
        .map(|(id, s)| {
            let (_, name, lat, lon) = s.first_seen.expect("counted station has a trip");
            StationMeta::new(id, name, lat, lon)
        })
        .collect();
    kept.sort_by(|a, b| compare_station_ids(&a.station_id, &b.station_id));
    if kept.is_empty() {
        return Err(Error::Validation(format!(
            "no station passes the filter (min total demand {}, every year: {})",
            rules.min_total_demand, rules.require_every_year
        )));
    }
    Ok(kept)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AggregateTally {
    pub counted: u64,
    pub outside_window: u64,
    pub other_station: u64,
}

fn station_index(stations: &[StationMeta]) -> HashMap<&str, usize> {
    stations
        .iter()
        .enumerate()
        .map(|(i, s)| (s.station_id.as_str(), i))
        .collect()
}

/// Counts check-outs per retained station per hour of the window.
pub fn aggregate_hourly<I>(
    trips: I,
    stations: &[StationMeta],
    window: &StudyWindow,
) -> Result<(DemandSeries, AggregateTally)>
where
    I: IntoIterator,
    I::Item: Borrow<TripRecord>,
{
    let hours = window.hours();
    let index = station_index(stations);
    let mut counts = vec![0u32; stations.len() * hours];
    let mut tally = AggregateTally::default();
    for trip in trips {
        let trip = trip.borrow();
        let Some(h) = window.hour_index(trip.start_time) else {
            tally.outside_window += 1;
            continue;
        };
        match index.get(trip.start_station_id.as_str()) {
            Some(&i) => {
                counts[i * hours + h] += 1;
                tally.counted += 1;
            }
            None => tally.other_station += 1,
        }
    }
    Ok((
        DemandSeries::new(stations.to_vec(), window.start, hours, counts)?,
        tally,
    ))
}

/// Directed trip counts and summed durations (seconds) between retained
/// stations for trips whose check-out hour lies in `hours`.
pub fn od_totals<I>(trips: I, stations: &[StationMeta], window: &StudyWindow, hours: Range<usize>) -> (Matrix, Matrix)
where
    I: IntoIterator,
    I::Item: Borrow<TripRecord>,
{
    let n = stations.len();
    let index = station_index(stations);
    let mut od = Matrix::zeros(n, n);
    let mut ttd = Matrix::zeros(n, n);
    for trip in trips {
        let trip = trip.borrow();
        let Some(h) = window.hour_index(trip.start_time) else {
            continue;
        };
        if !hours.contains(&h) {
            continue;
        }
        if let (Some(&i), Some(&j)) = (
            index.get(trip.start_station_id.as_str()),
            index.get(trip.end_station_id.as_str()),
        ) {
            od[(i, j)] += 1.0;
            ttd[(i, j)] += trip.duration_secs;
        }
    }
    (od, ttd)
}

/// Chronological train/validation/test partition of hour indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Range<usize>,
    pub validation: Range<usize>,
    pub test: Range<usize>,
}

pub fn split(series: &DemandSeries, n_train: usize, n_val: usize, n_test: usize) -> Result<DatasetSplit> {
    split_hours(series.n_hours(), n_train, n_val, n_test)
}

pub fn split_hours(total: usize, n_train: usize, n_val: usize, n_test: usize) -> Result<DatasetSplit> {
    if n_train + n_val + n_test != total {
        return Err(Error::Validation(format!(
            "split sizes {n_train} + {n_val} + {n_test} do not add up to {total} hours"
        )));
    }
    Ok(DatasetSplit {
        train: 0..n_train,
        validation: n_train..n_train + n_val,
        test: n_train + n_val..total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::trips::parse_timestamp;

    fn t(s: &str) -> NaiveDateTime {
        parse_timestamp(s).unwrap()
    }

    fn trip(station: &str, start: &str) -> TripRecord {
        TripRecord {
            duration_secs: 600.0,
            start_time: t(start),
            stop_time: t(start) + Duration::minutes(10),
            start_station_id: station.into(),
            start_station_name: format!("station {station}"),
            start_latitude: 40.7,
            start_longitude: -74.0,
            end_station_id: "1".into(),
            end_station_name: "station 1".into(),
            end_latitude: 40.7,
            end_longitude: -74.0,
            user_type: "Subscriber".into(),
        }
    }

    #[test]
    fn full_window_hours() {
        let w = StudyWindow::new(t("2013-07-01 00:00"), t("2016-07-01 00:00")).unwrap();
        assert_eq!(w.hours(), 26_304);
        assert_eq!(w.year_spans().len(), 3);
    }

    #[test]
    fn floor_to_hour() {
        let w = StudyWindow::new(t("2013-07-01 00:00"), t("2013-07-02 00:00")).unwrap();
        let s = vec![
            StationMeta::new("7", "x", 40.7, -74.0),
            StationMeta::new("9", "y", 40.7, -74.0),
        ];
        let (series, tally) = aggregate_hourly([trip("7", "2013-07-01 09:15")], &s, &w).unwrap();
        assert_eq!(series.count(0, 9), 1);
        assert_eq!(series.total(), 1);
        assert_eq!(tally.counted, 1);
        let (_, tally) = aggregate_hourly([trip("7", "2013-07-02 00:00")], &s, &w).unwrap();
        assert_eq!(tally.outside_window, 1);
    }

    #[test]
    fn split_defaults() {
        let s = split_hours(26_304, 22_304, 2_000, 2_000).unwrap();
        assert_eq!(s.validation.start, 22_304);
        assert_eq!(s.test.start, 24_304);
        assert!(split_hours(10, 5, 0, 5).unwrap().validation.is_empty());
        assert!(split_hours(10, 5, 1, 5).is_err());
    }

    #[test]
    fn filter_needs_every_year() {
        let w = StudyWindow::new(t("2013-07-01 00:00"), t("2016-07-01 00:00")).unwrap();
        let mut trips = vec![];
        for year in ["2013-08-01 10:00", "2014-08-01 10:00", "2015-08-01 10:00"] {
            trips.push(trip("1", year));
        }
        trips.push(trip("2", "2013-08-01 10:00"));
        trips.push(trip("2", "2015-08-01 10:00"));
        trips.push(trip("2", "2015-08-02 10:00"));
        let rules = StationFilter {
            min_total_demand: 3,
            require_every_year: true,
        };
        let kept = filter_stations(&trips, &w, rules).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].station_id, "1");
        let none = StationFilter {
            min_total_demand: 4,
            require_every_year: true,
        };
        assert!(filter_stations(&trips, &w, none).is_err());
    }
}
