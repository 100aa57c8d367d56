//! Trip parsing, station filtering, hourly aggregation, splitting, scaling
//! and windowing.

mod scaler;
mod series;
mod trips;
mod window;

pub use scaler::Scaler;
pub use series::{
    aggregate_hourly, filter_stations, od_totals, split, split_hours, AggregateTally, DatasetSplit, DemandSeries,
    StationFilter, StudyWindow,
};
pub use trips::{parse_timestamp, parse_trips, read_trip_files, ParseOptions, ParseTally, TripReader, TripRecord};
pub use window::{prepare_windows, PreparedData, WindowedDataset};
