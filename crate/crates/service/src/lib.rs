//! Command-line pipeline and read-only HTTP service for metalmap.

pub mod config;
pub mod pipeline;
pub mod server;

pub use config::{EmbedSection, PipelineConfig};
pub use server::{router, AppState};
