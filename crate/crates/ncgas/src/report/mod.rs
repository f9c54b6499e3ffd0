//! Batch reporting: run configuration, sweep execution, CSV/SVG/manifest.

pub mod config;
pub mod manifest;
pub mod svg;
pub mod sweep;

pub use config::{parse_config, ConfigError, OutputPaths, RunConfig};
pub use manifest::{ManifestStatus, RunManifest};
pub use svg::{emit_svg, SvgError};
pub use sweep::{run_sweep, SweepError, SweepOutput};
