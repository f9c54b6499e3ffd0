//! Deterministic, parallel importance-sampling Monte Carlo engine for the
//! 9-dimensional kernel integrals.
//!
//! The estimator draws `k` and `p` uniformly in the unit ball and `q`
//! isotropically with a heavy-tailed radial law, weights each kernel
//! evaluation by the reciprocal proposal density, and reduces per-batch
//! compensated sums over a fixed pairwise tree. Results are bit-identical
//! for a fixed configuration regardless of how many worker threads run
//! the batches.

mod engine;
mod oracle;
mod sampler;

pub use engine::{estimate, estimate_sweep};
pub use oracle::oracle_estimate;
pub use sampler::sample_point;

use crate::kernel::PhasePoint;
use thiserror::Error;

/// Configuration of one estimator run. The seed plus the sample budget
/// fully determine the sample stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Total number of proposal draws.
    pub n_samples: u64,
    /// Master seed of the counter-based sample stream.
    pub seed: u64,
    /// Scale `s` of the radial proposal `rho(Q) = s / (s + Q)^2` for `|q|`.
    pub q_tail_scale: f64,
    /// Samples per reduction batch. Part of the determinism contract:
    /// changing it changes the reduction tree (but never the mean beyond
    /// rounding).
    pub batch_size: u64,
    /// Half-width of the truncated `q`-cube used by the brute-force
    /// oracle estimator.
    pub oracle_box: f64,
}

impl SamplerConfig {
    /// Defaults: tail scale 2, batches of 65536 (clamped to the budget),
    /// oracle box 10.
    pub fn new(n_samples: u64, seed: u64) -> Self {
        SamplerConfig {
            n_samples,
            seed,
            q_tail_scale: 2.0,
            batch_size: 65_536.min(n_samples.max(1)),
            oracle_box: 10.0,
        }
    }

    pub fn with_oracle_box(mut self, oracle_box: f64) -> Self {
        self.oracle_box = oracle_box;
        self
    }

    pub fn validate(&self) -> Result<(), McError> {
        if self.n_samples == 0 {
            return Err(McError::EmptyBudget);
        }
        if self.batch_size == 0 || self.batch_size > self.n_samples {
            return Err(McError::InvalidConfig {
                what: format!(
                    "batch_size must be in [1, n_samples] (got {} with n_samples = {})",
                    self.batch_size, self.n_samples
                ),
            });
        }
        if self.q_tail_scale.is_nan() || self.q_tail_scale <= 0.0 || self.q_tail_scale > 100.0 {
            return Err(McError::InvalidConfig {
                what: format!("q_tail_scale must lie in (0, 100] (got {})", self.q_tail_scale),
            });
        }
        if self.oracle_box <= 0.0 || !self.oracle_box.is_finite() {
            return Err(McError::InvalidConfig {
                what: format!("oracle_box must be positive (got {})", self.oracle_box),
            });
        }
        Ok(())
    }
}

/// Monte Carlo estimate of one integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralEstimate {
    pub mean: f64,
    /// Sample standard deviation of the weighted terms divided by sqrt(N).
    pub stderr: f64,
    pub n_samples: u64,
    /// Number of samples with a nonzero kernel value (for the physics
    /// kernels this counts the Fermi-constrained domain).
    pub n_in_domain: u64,
    /// `n_in_domain / n_samples`.
    pub acceptance_rate: f64,
}

impl IntegralEstimate {
    /// Estimate of `factor` times the integral.
    pub fn scaled(&self, factor: f64) -> IntegralEstimate {
        IntegralEstimate {
            mean: factor * self.mean,
            stderr: factor.abs() * self.stderr,
            ..*self
        }
    }

    /// Bit-level equality, distinguishing signed zeros (used by the
    /// determinism checks; `==` on floats would not).
    pub fn bitwise_eq(&self, o: &IntegralEstimate) -> bool {
        self.mean.to_bits() == o.mean.to_bits()
            && self.stderr.to_bits() == o.stderr.to_bits()
            && self.n_samples == o.n_samples
            && self.n_in_domain == o.n_in_domain
            && self.acceptance_rate.to_bits() == o.acceptance_rate.to_bits()
    }
}

/// One proposal draw: the phase point and the reciprocal proposal density
/// at that point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleDraw {
    pub point: PhasePoint,
    pub weight: f64,
}

/// A real-valued integrand over phase points. Implemented by plain
/// closures.
pub trait Kernel: Sync {
    fn eval(&self, pt: &PhasePoint) -> f64;
}

impl<F> Kernel for F
where
    F: Fn(&PhasePoint) -> f64 + Sync,
{
    #[inline]
    fn eval(&self, pt: &PhasePoint) -> f64 {
        self(pt)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum McError {
    #[error("sample budget is exhausted (n_samples = 0)")]
    EmptyBudget,
    #[error("invalid sampler configuration: {what}")]
    InvalidConfig { what: String },
    #[error("kernel returned a non-finite value at sample index {index}")]
    NonFiniteKernel { index: u64 },
    #[error("oracle_box must be at least 3 to cover the bulk of the integrand (got {got})")]
    OracleBoxTooSmall { got: f64 },
    #[error("estimate_sweep requires at least one kernel")]
    NoKernels,
}
