//! Multi-scale cubical persistence for 2D scalar fields.
//!
//! The pipeline: decode an image, derive filtration fields (intensity,
//! Laplacian gradient), build a resolution pyramid, compute a persistence
//! diagram per level, link diagram points across adjacent scales by
//! thresholded optimal assignment, and keep the medial representative of
//! every sufficiently stable chain. The result is a single stable diagram
//! per filtration that favors structure visible at every resolution over
//! resolution-specific artifacts.

pub mod field;
pub mod io;
pub mod matching;
pub mod oracle;
pub mod persistence;
pub mod synth;
pub mod vineyard;

pub use field::{
    build_pyramid, downsample, gradient_field, intensity_field, load_image, FieldError,
    FiltrationKind, RasterImage, ScalarField, ScalePyramid, ValueRange,
};
pub use matching::{
    distance_matrix, match_diagrams, point_distance, solve_assignment, CostMatrix, DistanceMetric,
    MatchError, MatchResult,
};
pub use oracle::{oracle_pd, OracleError, ORACLE_PIXEL_LIMIT};
pub use persistence::{
    betti_at, compute_pd, Degree, PersistenceDiagram, PersistencePoint,
};
pub use vineyard::{
    stabilize, stabilize_diagrams, stabilize_with_vines, stability_score, stable_diagram,
    track_vines, StableDiagram, StablePoint, TrackError, Vine, VineSegment,
    DEFAULT_MATCH_THRESHOLD, DEFAULT_STABILITY_THRESHOLD,
};
