//! Configuration, CSV tables, SVG figures and run manifests.

mod config;
mod manifest;
mod svg;
mod tables;

pub use config::{parse_config, Mode, RunConfig};
pub use manifest::{sha256_file, unix_now, FileEntry, RunManifest, MANIFEST_NAME};
pub use svg::emit_svg_plots;
pub use tables::{
    read_cloud_csv, read_diagnostics_csv, read_measure_csv, write_cloud_csv, write_diagnostics_csv,
    write_measure_csv, write_trajectory_csv, CLOUD_HEADER, DIAGNOSTICS_HEADER, INVARIANTS_HEADER, MEASURE_HEADER,
    TRAJECTORY_HEADER,
};
