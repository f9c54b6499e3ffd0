//! Run manifest: a sectioned key/value document that records everything
//! needed to replay a sweep byte-for-byte.
//!
//! Schema (version 1):
//!
//! ```text
//! [ncgas]      tool, version, schema, status (+ error when aborted)
//! [config]     the effective run configuration, in config syntax;
//!              feeding the whole manifest back to `--config` replays it
//! [constants]  the closed-form coefficients used by the energy model
//! [estimates]  per-tau exchange-term estimates of the shared sweep
//! [cells]      per-(rs, tau) energies with statistical errors
//! [timing]     wall-clock per phase; informational only, excluded from
//!              reproducibility comparisons
//! ```
//!
//! Every section except `[timing]` is a pure function of the config.

use crate::energy::AnalyticConstants;
use crate::mc::IntegralEstimate;
use crate::report::config::format_config_float;

pub const MANIFEST_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TauEstimate {
    pub tau: f64,
    pub eps2b: IntegralEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub rs: f64,
    pub tau: f64,
    pub eps2b: f64,
    pub eps2b_stderr: f64,
    pub total: f64,
    pub total_stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub status: ManifestStatus,
    /// Effective configuration in config syntax (see `RunConfig::echo`).
    pub config_echo: String,
    pub constants: AnalyticConstants,
    pub estimates: Vec<TauEstimate>,
    pub cells: Vec<CellRecord>,
    pub timing_ms: Vec<(String, u128)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ManifestStatus {
    Complete,
    /// Partial results: the run aborted with the recorded error.
    Aborted { error: String },
}

impl RunManifest {
    pub fn render(&self) -> String {
        let f = format_config_float;
        let mut out = String::new();
        out.push_str("[ncgas]\n");
        out.push_str("tool = ncgas\n");
        out.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("schema = {MANIFEST_SCHEMA}\n"));
        match &self.status {
            ManifestStatus::Complete => out.push_str("status = complete\n"),
            ManifestStatus::Aborted { error } => {
                out.push_str("status = aborted\n");
                out.push_str(&format!("error = {}\n", error.replace('\n', " ")));
            }
        }
        out.push('\n');

        out.push_str("[config]\n");
        out.push_str(&self.config_echo);
        out.push('\n');

        out.push_str("[constants]\n");
        out.push_str(&format!("prefactor = {}\n", f(self.constants.prefactor)));
        out.push_str(&format!("eps2b_exact = {}\n", f(self.constants.eps2b_exact)));
        out.push_str(&format!("c_fermi = {}\n", f(self.constants.c_fermi)));
        out.push_str(&format!("c_exchange = {}\n", f(self.constants.c_exchange)));
        out.push_str(&format!("c_log = {}\n", f(self.constants.c_log)));
        out.push_str(&format!("c_const_total = {}\n", f(self.constants.c_const_total)));
        out.push('\n');

        out.push_str("[estimates]\n");
        for (i, e) in self.estimates.iter().enumerate() {
            out.push_str(&format!("tau.{i}.tau = {}\n", f(e.tau)));
            out.push_str(&format!("tau.{i}.eps2b = {}\n", f(e.eps2b.mean)));
            out.push_str(&format!("tau.{i}.stderr = {}\n", f(e.eps2b.stderr)));
            out.push_str(&format!("tau.{i}.n_samples = {}\n", e.eps2b.n_samples));
            out.push_str(&format!("tau.{i}.n_in_domain = {}\n", e.eps2b.n_in_domain));
            out.push_str(&format!(
                "tau.{i}.acceptance_rate = {}\n",
                f(e.eps2b.acceptance_rate)
            ));
        }
        out.push('\n');

        out.push_str("[cells]\n");
        for (i, c) in self.cells.iter().enumerate() {
            out.push_str(&format!("cell.{i}.rs = {}\n", f(c.rs)));
            out.push_str(&format!("cell.{i}.tau = {}\n", f(c.tau)));
            out.push_str(&format!("cell.{i}.eps2b = {}\n", f(c.eps2b)));
            out.push_str(&format!("cell.{i}.eps2b_stderr = {}\n", f(c.eps2b_stderr)));
            out.push_str(&format!("cell.{i}.total = {}\n", f(c.total)));
            out.push_str(&format!("cell.{i}.total_stderr = {}\n", f(c.total_stderr)));
        }
        out.push('\n');

        out.push_str("[timing]\n");
        for (phase, ms) in &self.timing_ms {
            out.push_str(&format!("{phase}_ms = {ms}\n"));
        }
        out
    }

    /// The manifest text without its `[timing]` section, i.e. the part
    /// that is byte-reproducible for a fixed config.
    pub fn reproducible_part(text: &str) -> String {
        let mut out = String::new();
        let mut in_timing = false;
        for line in text.lines() {
            let trimmed = line.trim();
            if trimmed.starts_with('[') && trimmed.ends_with(']') {
                in_timing = trimmed == "[timing]";
            }
            if !in_timing {
                out.push_str(line);
                out.push('\n');
            }
        }
        out
    }
}
