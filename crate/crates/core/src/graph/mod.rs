//! Station graphs: pairwise matrices, thresholded adjacencies and the
//! propagation filters derived from them.

mod filter;
mod geo;
mod pairwise;

pub use filter::{normalize, normalized_laplacian, FilterProvenance, GraphFilter, PolynomialFilter};
pub use geo::{compare_station_ids, haversine_distance, StationMeta, EARTH_RADIUS_MILES};
pub use pairwise::{
    aggregate_directions, build_atd_matrix, build_dc_matrix, build_de_matrix, build_sd_matrix, threshold,
    BinaryAdjacency, MatrixKind, PairwiseMatrix,
};
