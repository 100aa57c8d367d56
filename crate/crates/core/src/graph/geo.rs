use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Mean Earth radius in statute miles.
pub const EARTH_RADIUS_MILES: f64 = 3958.7613;

#[derive(Clone, Debug, PartialEq)]
pub struct StationMeta {
    pub station_id: String,
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
}

impl StationMeta {
    pub fn new(station_id: impl Into<String>, name: impl Into<String>, latitude: f64, longitude: f64) -> Self {
        Self {
            station_id: station_id.into(),
            name: name.into(),
            latitude,
            longitude,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude) || !(-180.0..=180.0).contains(&self.longitude) {
            return Err(Error::Validation(format!(
                "station {} has coordinates ({}, {}) outside [-90, 90] x [-180, 180]",
                self.station_id, self.latitude, self.longitude
            )));
        }
        Ok(())
    }
}

/// Orders station ids numerically when both are integers, otherwise lexically.
pub fn compare_station_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        _ => a.cmp(b),
    }
}

/// Great-circle distance in miles using the haversine formula.
pub fn haversine_distance(a: &StationMeta, b: &StationMeta) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    Ok(haversine_miles(a.latitude, a.longitude, b.latitude, b.longitude))
}

pub(crate) fn haversine_miles(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = (lat2 - lat1).to_radians();
    let dlambda = (lon2 - lon1).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_MILES * h.sqrt().min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_point_is_zero() {
        let a = StationMeta::new("1", "a", 40.7, -73.99);
        assert_eq!(haversine_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn antipodes() {
        let a = StationMeta::new("1", "a", 0.0, 0.0);
        let b = StationMeta::new("2", "b", 0.0, 180.0);
        let d = haversine_distance(&a, &b).unwrap();
        assert!((d - std::f64::consts::PI * EARTH_RADIUS_MILES).abs() < 1e-9);
        assert!((d - 12437.0).abs() < 0.5);
    }

    #[test]
    fn out_of_range_rejected() {
        let a = StationMeta::new("1", "a", 91.0, 0.0);
        let b = StationMeta::new("2", "b", 0.0, 0.0);
        assert!(haversine_distance(&a, &b).is_err());
        let c = StationMeta::new("3", "c", 0.0, -180.5);
        assert!(haversine_distance(&b, &c).is_err());
    }

    #[test]
    fn id_ordering() {
        assert_eq!(compare_station_ids("72", "100"), Ordering::Less);
        assert_eq!(compare_station_ids("5 Ave", "100"), Ordering::Greater);
        assert_eq!(compare_station_ids("HB101", "HB102"), Ordering::Less);
    }
}
