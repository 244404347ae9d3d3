//! Corpus-to-map engine for band logo collections.
//!
//! Manifests are filtered and parsed ([`corpus`]), logos become feature
//! vectors ([`features`]), compared under a [`metrics::Metric`], embedded in
//! the plane ([`embed`]), snapped to a collision-free Hilbert grid
//! ([`gridify`]) and bundled into map documents ([`atlas`]). [`doom`] holds
//! the rating-table statistics for the logo design space.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! name the common instantiations.

pub mod atlas;
pub mod corpus;
pub mod doom;
pub mod embed;
pub mod error;
pub mod features;
pub mod gridify;
pub mod metrics;
mod scalar;

pub use atlas::{assemble_map, export_map, genre_background, import_map, BackgroundRaster, MapDocument, MapItem, Provenance};
pub use corpus::{apply_filters, build_vocabulary, parse_genre_string, parse_manifest, tag_vector, BandRecord, FilterReport, Status, TagVocabulary};
pub use doom::{load_ratings, Dimension, DimensionGroup, RatingTable};
pub use embed::{embed, fit_ab, EmbedParams, Embedding, FuzzyGraph, Layout2D};
pub use error::{Error, Result};
pub use features::{FeatureKind, FeatureSet, RasterImage};
pub use gridify::{assign_cells, choose_level, hilbert_d2xy, hilbert_xy2d, GridAssignment};
pub use metrics::{knn_graph, Metric, NeighborGraph};
pub use scalar::Real;

pub type FeatureSetF64 = FeatureSet<f64>;
pub type FeatureSetF32 = FeatureSet<f32>;
pub type NeighborGraphF64 = NeighborGraph<f64>;
pub type NeighborGraphF32 = NeighborGraph<f32>;
pub type FuzzyGraphF64 = FuzzyGraph<f64>;
pub type FuzzyGraphF32 = FuzzyGraph<f32>;
pub type LayoutF64 = Layout2D<f64>;
pub type LayoutF32 = Layout2D<f32>;
pub type EmbedParamsF64 = EmbedParams<f64>;
pub type EmbedParamsF32 = EmbedParams<f32>;
