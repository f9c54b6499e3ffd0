//! Sweep executor: evaluates the (r_s, tau) grid and renders the CSV
//! table and the run manifest.
//!
//! All tau cells share one sample stream (one `estimate_sweep` call), so
//! differences along tau are strongly correlated; the exchange term is
//! density-independent in these units, so the same per-tau estimates feed
//! every r_s row.

use crate::energy::{
    eps2_ring, eps_exchange, eps_fermi, exchange_prefactor, AnalyticConstants, EnergyError,
};
use crate::kernel::{kernel_avg, PhasePoint};
use crate::mc::{estimate_sweep, Kernel};
use crate::report::config::RunConfig;
use crate::report::manifest::{CellRecord, ManifestStatus, RunManifest, TauEstimate};
use std::time::Instant;
use thiserror::Error;

pub const CSV_HEADER: &str =
    "rs,tau,eps_fermi,eps_exchange,eps2_ring,eps2b,eps2b_stderr,total,total_stderr";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub csv: String,
    pub manifest: RunManifest,
}

#[derive(Debug, Error)]
pub enum SweepError {
    /// The estimator failed; the partial manifest carries the
    /// aborted-status marker and should still be written out.
    #[error("sweep aborted: {source}")]
    Estimator {
        source: EnergyError,
        manifest: Box<RunManifest>,
    },
}

/// Fixed-point decimal with 10 significant digits, locale-free. Values
/// this formatter has to handle stay well below 1e10 in magnitude.
pub fn fmt_sig10(v: f64) -> String {
    if v == 0.0 {
        return "0.000000000".to_string();
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (9 - exponent).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn run_sweep(config: &RunConfig) -> Result<SweepOutput, SweepError> {
    let start = Instant::now();
    let prefactor = exchange_prefactor();

    let kernels: Vec<Box<dyn Kernel>> = config
        .tau_grid
        .iter()
        .map(|&tau| {
            let k: Box<dyn Kernel> = Box::new(move |pt: &PhasePoint| kernel_avg(pt, tau));
            k
        })
        .collect();
    let kernel_refs: Vec<&dyn Kernel> = kernels.iter().map(|k| k.as_ref()).collect();

    let raw = match estimate_sweep(&kernel_refs, &config.sampler) {
        Ok(raw) => raw,
        Err(err) => {
            let sweep_ms = start.elapsed().as_millis();
            let source = EnergyError::from(err);
            let manifest = RunManifest {
                status: ManifestStatus::Aborted {
                    error: source.to_string(),
                },
                config_echo: config.echo(),
                constants: AnalyticConstants::default(),
                estimates: Vec::new(),
                cells: Vec::new(),
                timing_ms: vec![("sweep".into(), sweep_ms)],
            };
            return Err(SweepError::Estimator {
                source,
                manifest: Box::new(manifest),
            });
        }
    };
    let estimates: Vec<TauEstimate> = config
        .tau_grid
        .iter()
        .zip(&raw)
        .map(|(&tau, est)| TauEstimate {
            tau,
            eps2b: est.scaled(prefactor),
        })
        .collect();
    let sweep_ms = start.elapsed().as_millis();

    let emit_start = Instant::now();
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    let mut cells = Vec::with_capacity(config.rs_grid.len() * config.tau_grid.len());
    for &rs in &config.rs_grid {
        // rs was validated positive, so the analytic terms cannot fail
        let fermi = eps_fermi(rs).expect("validated rs");
        let exchange = eps_exchange(rs).expect("validated rs");
        let ring = eps2_ring(rs).expect("validated rs");
        for e in &estimates {
            let total = fermi + exchange + ring + e.eps2b.mean;
            cells.push(CellRecord {
                rs,
                tau: e.tau,
                eps2b: e.eps2b.mean,
                eps2b_stderr: e.eps2b.stderr,
                total,
                total_stderr: e.eps2b.stderr,
            });
            let row = [
                rs,
                e.tau,
                fermi,
                exchange,
                ring,
                e.eps2b.mean,
                e.eps2b.stderr,
                total,
                e.eps2b.stderr,
            ];
            let line: Vec<String> = row.iter().map(|&v| fmt_sig10(v)).collect();
            csv.push_str(&line.join(","));
            csv.push('\n');
        }
    }
    let emit_ms = emit_start.elapsed().as_millis();

    let manifest = RunManifest {
        status: ManifestStatus::Complete,
        config_echo: config.echo(),
        constants: AnalyticConstants::default(),
        estimates,
        cells,
        timing_ms: vec![("sweep".into(), sweep_ms), ("emit".into(), emit_ms)],
    };

    Ok(SweepOutput { csv, manifest })
}
