//! Line-oriented `key = value` run configuration.
//!
//! Grids accept either comma lists (`0,0.5,1`) or inclusive ranges
//! (`start:stop:step`). Documents may carry `[section]` headers; when a
//! `[config]` section is present only its lines are read, which lets a
//! run manifest double as a config file. Full-line `#` comments and blank
//! lines are ignored.

use crate::mc::SamplerConfig;
use thiserror::Error;

pub const DEFAULT_SAMPLES: u64 = 10_000_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_Q_TAIL_SCALE: f64 = 2.0;
pub const DEFAULT_BATCH_SIZE: u64 = 65_536;
pub const DEFAULT_ORACLE_BOX: f64 = 10.0;
pub const DEFAULT_CSV_PATH: &str = "results.csv";
pub const DEFAULT_MANIFEST_PATH: &str = "run_manifest.txt";

/// Output file locations. The SVG plot is only written when a path is
/// configured.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub csv: String,
    pub svg: Option<String>,
    pub manifest: String,
}

/// A validated sweep configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Density parameters, strictly increasing, all positive.
    pub rs_grid: Vec<f64>,
    /// Deformation scales, strictly increasing, all nonnegative.
    pub tau_grid: Vec<f64>,
    pub sampler: SamplerConfig,
    pub outputs: OutputPaths,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("config parse error at line {line}: {what}")]
    Parse { line: usize, what: String },
    #[error("config validation error for `{key}`: {what}")]
    Validation { key: String, what: String },
}

fn validation(key: &str, what: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        key: key.to_string(),
        what: what.into(),
    }
}

/// Expand a grid expression: either `start:stop:step` (inclusive of the
/// endpoint up to a small slack) or a comma list.
fn parse_grid(key: &str, text: &str) -> Result<Vec<f64>, ConfigError> {
    let parse_num = |tok: &str| -> Result<f64, ConfigError> {
        tok.trim()
            .parse::<f64>()
            .map_err(|_| validation(key, format!("`{tok}` is not a number")))
    };
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(validation(key, "range must be start:stop:step"));
        }
        let start = parse_num(parts[0])?;
        let stop = parse_num(parts[1])?;
        let step = parse_num(parts[2])?;
        if step.is_nan() || step <= 0.0 {
            return Err(validation(key, "range step must be positive"));
        }
        if stop < start {
            return Err(validation(key, "range stop must not be below start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| start + i as f64 * step).collect()
    } else {
        text.split(',')
            .map(parse_num)
            .collect::<Result<Vec<f64>, _>>()?
    };
    if values.is_empty() {
        return Err(validation(key, "grid is empty"));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(validation(key, "grid must be strictly increasing"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(validation(key, "grid values must be finite"));
    }
    Ok(values)
}

fn parse_u64(key: &str, value: &str) -> Result<u64, ConfigError> {
    value
        .parse::<u64>()
        .map_err(|_| validation(key, format!("`{value}` is not an unsigned integer")))
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .map_err(|_| validation(key, format!("`{value}` is not a number")))
}

/// Parse and validate a config document, filling defaults for everything
/// except the required `rs_grid` and `tau_grid`.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut rs_grid = None;
    let mut tau_grid = None;
    let mut samples = DEFAULT_SAMPLES;
    let mut seed = DEFAULT_SEED;
    let mut q_tail_scale = DEFAULT_Q_TAIL_SCALE;
    let mut batch_size = DEFAULT_BATCH_SIZE;
    let mut oracle_box = DEFAULT_ORACLE_BOX;
    let mut out = DEFAULT_CSV_PATH.to_string();
    let mut svg = None;
    let mut manifest = DEFAULT_MANIFEST_PATH.to_string();
    let mut seen: Vec<String> = Vec::new();

    let has_config_section = text.lines().any(|line| line.trim() == "[config]");
    let mut in_config_section = !has_config_section;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            in_config_section = line == "[config]";
            continue;
        }
        if !in_config_section {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Parse {
                line: line_no,
                what: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(ConfigError::Parse {
                line: line_no,
                what: "missing key before `=`".to_string(),
            });
        }
        if seen.iter().any(|k| k == key) {
            return Err(validation(key, "key appears more than once"));
        }
        seen.push(key.to_string());
        match key {
            "rs_grid" => rs_grid = Some(parse_grid(key, value)?),
            "tau_grid" => tau_grid = Some(parse_grid(key, value)?),
            "samples" => samples = parse_u64(key, value)?,
            "seed" => seed = parse_u64(key, value)?,
            "q_tail_scale" => q_tail_scale = parse_f64(key, value)?,
            "batch_size" => batch_size = parse_u64(key, value)?,
            "oracle_box" => oracle_box = parse_f64(key, value)?,
            "out" => out = value.to_string(),
            "svg" => svg = Some(value.to_string()),
            "manifest" => manifest = value.to_string(),
            _ => return Err(validation(key, "unknown key")),
        }
    }

    let rs_grid = rs_grid.ok_or_else(|| validation("rs_grid", "required key is missing"))?;
    let tau_grid = tau_grid.ok_or_else(|| validation("tau_grid", "required key is missing"))?;

    build_config(
        rs_grid,
        tau_grid,
        samples,
        seed,
        q_tail_scale,
        batch_size,
        oracle_box,
        OutputPaths { csv: out, svg, manifest },
    )
}

/// Final cross-field validation shared by the parser and the CLI override
/// path.
#[allow(clippy::too_many_arguments)]
pub fn build_config(
    rs_grid: Vec<f64>,
    tau_grid: Vec<f64>,
    samples: u64,
    seed: u64,
    q_tail_scale: f64,
    batch_size: u64,
    oracle_box: f64,
    outputs: OutputPaths,
) -> Result<RunConfig, ConfigError> {
    if rs_grid.iter().any(|&v| v <= 0.0) {
        return Err(validation("rs_grid", "density parameters must be positive"));
    }
    if tau_grid.iter().any(|&v| v < 0.0) {
        return Err(validation("tau_grid", "deformation scales must be nonnegative"));
    }
    if samples == 0 {
        return Err(validation("samples", "sample budget must be at least 1"));
    }
    if batch_size == 0 {
        return Err(validation("batch_size", "batch size must be at least 1"));
    }
    if q_tail_scale.is_nan() || q_tail_scale <= 0.0 || q_tail_scale > 100.0 {
        return Err(validation("q_tail_scale", "must lie in (0, 100]"));
    }
    if oracle_box <= 0.0 || !oracle_box.is_finite() {
        return Err(validation("oracle_box", "must be positive"));
    }
    if outputs.csv.is_empty() {
        return Err(validation("out", "output path must be non-empty"));
    }
    if outputs.manifest.is_empty() {
        return Err(validation("manifest", "manifest path must be non-empty"));
    }
    if matches!(&outputs.svg, Some(path) if path.is_empty()) {
        return Err(validation("svg", "svg path must be non-empty when given"));
    }
    let sampler = SamplerConfig {
        n_samples: samples,
        seed,
        q_tail_scale,
        // a batch larger than the budget would violate the sampler
        // invariant; the effective (clamped) value is what gets echoed
        // into manifests
        batch_size: batch_size.min(samples),
        oracle_box,
    };
    Ok(RunConfig {
        rs_grid,
        tau_grid,
        sampler,
        outputs,
    })
}

impl RunConfig {
    /// Render the effective configuration as config-syntax lines (no
    /// section header). Parsing this text yields this config back.
    pub fn echo(&self) -> String {
        let grid = |values: &[f64]| {
            values
                .iter()
                .map(|v| format_config_float(*v))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut text = String::new();
        text.push_str(&format!("rs_grid = {}\n", grid(&self.rs_grid)));
        text.push_str(&format!("tau_grid = {}\n", grid(&self.tau_grid)));
        text.push_str(&format!("samples = {}\n", self.sampler.n_samples));
        text.push_str(&format!("seed = {}\n", self.sampler.seed));
        text.push_str(&format!(
            "q_tail_scale = {}\n",
            format_config_float(self.sampler.q_tail_scale)
        ));
        text.push_str(&format!("batch_size = {}\n", self.sampler.batch_size));
        text.push_str(&format!(
            "oracle_box = {}\n",
            format_config_float(self.sampler.oracle_box)
        ));
        text.push_str(&format!("out = {}\n", self.outputs.csv));
        if let Some(svg) = &self.outputs.svg {
            text.push_str(&format!("svg = {svg}\n"));
        }
        text.push_str(&format!("manifest = {}\n", self.outputs.manifest));
        text
    }
}

/// Shortest decimal that round-trips through `f64::parse`.
pub fn format_config_float(v: f64) -> String {
    let s = format!("{v}");
    debug_assert_eq!(s.parse::<f64>().unwrap(), v);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "rs_grid = 1\ntau_grid = 0\n";

    #[test]
    fn defaults_are_filled() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.sampler.n_samples, DEFAULT_SAMPLES);
        assert_eq!(cfg.sampler.seed, DEFAULT_SEED);
        assert_eq!(cfg.sampler.q_tail_scale, DEFAULT_Q_TAIL_SCALE);
        assert_eq!(cfg.outputs.csv, DEFAULT_CSV_PATH);
        assert_eq!(cfg.outputs.svg, None);
    }

    #[test]
    fn range_grid_expands_inclusively() {
        let cfg = parse_config("rs_grid = 1,2\ntau_grid = 0:1:0.5\n").unwrap();
        assert_eq!(cfg.tau_grid, vec![0.0, 0.5, 1.0]);
        assert_eq!(cfg.rs_grid, vec![1.0, 2.0]);
    }

    #[test]
    fn missing_required_key_names_it() {
        let err = parse_config("tau_grid = 0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref key, .. } if key == "rs_grid"));
    }

    #[test]
    fn negative_seed_is_a_validation_error() {
        let err = parse_config(&format!("{MINIMAL}seed = -1\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref key, .. } if key == "seed"));
    }

    #[test]
    fn parse_error_carries_line_number() {
        let err = parse_config("rs_grid = 1\nthis is not a pair\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::Parse {
                line: 2,
                what: "expected `key = value`, got `this is not a pair`".into()
            }
        );
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_config(&format!("{MINIMAL}bogus = 1\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref key, .. } if key == "bogus"));
    }

    #[test]
    fn non_increasing_grid_is_rejected() {
        let err = parse_config("rs_grid = 2,1\ntau_grid = 0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref key, .. } if key == "rs_grid"));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = parse_config("# a comment\n\nrs_grid = 1\ntau_grid = 0\n").unwrap();
        assert_eq!(cfg.rs_grid, vec![1.0]);
    }

    #[test]
    fn config_section_in_larger_document_is_honored() {
        let doc = "[meta]\nrs_grid = 5\n[config]\nrs_grid = 1\ntau_grid = 0\n[other]\nx = y\n";
        let cfg = parse_config(doc).unwrap();
        assert_eq!(cfg.rs_grid, vec![1.0]);
    }

    #[test]
    fn echo_round_trips() {
        let text = format!("{MINIMAL}samples = 1000\nseed = 7\nsvg = plot.svg\n");
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&cfg.echo()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let err = parse_config("rs_grid = 1\nrs_grid = 2\ntau_grid = 0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref key, .. } if key == "rs_grid"));
    }

    #[test]
    fn batch_size_is_clamped_to_budget() {
        let cfg = parse_config(&format!("{MINIMAL}samples = 100\n")).unwrap();
        assert_eq!(cfg.sampler.batch_size, 100);
    }
}
