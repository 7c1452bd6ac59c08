//! Batch experiment runner for the `tusla` toolkit: JSON run configurations
//! in, result bundles (CSV trajectories and tables, JSON summaries and
//! bounds reports) out.
//!
//! * [`config`] — the run-configuration schema and its validation.
//! * [`jobs`] — job execution and bundle layout.
//! * [`output`] — atomic file writing and summary statistics.
//! * [`presets`] — configurations of the published experiments.

pub mod config;
pub mod error;
pub mod jobs;
pub mod output;
pub mod presets;

pub use config::{JobKind, RunConfig};
pub use error::{CliError, Result};
pub use jobs::{run_job, Bundle};

/// Environment variable naming the default output root.
pub const OUT_ROOT_ENV: &str = "TUSLA_OUT_ROOT";

/// Output directory: an explicit `--out`, else the config's `output_dir`,
/// else `<root>/<config stem>` with the root from [`OUT_ROOT_ENV`] or
/// `./tusla-out`.
pub fn resolve_output(
    explicit: Option<&std::path::Path>,
    cfg: &RunConfig,
    config_path: &std::path::Path,
    env_root: Option<&std::path::Path>,
) -> std::path::PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = &cfg.output_dir {
        return p.clone();
    }
    let stem = config_path.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned());
    env_root.map_or_else(|| std::path::PathBuf::from("tusla-out"), |r| r.to_path_buf()).join(stem)
}
