//! Batched estimator with a fixed-order pairwise reduction.
//!
//! The sample index range is split into batches of `batch_size`. Each
//! batch accumulates compensated sums of the weighted kernel values (and
//! their squares) in index order; the per-batch partials are then merged
//! over a pairwise tree whose shape depends only on the batch count.
//! Worker threads only decide *who* computes a batch, never the result,
//! so estimates are bit-identical for any thread count.

use super::{sample_point, IntegralEstimate, Kernel, McError, SamplerConfig};
use rayon::prelude::*;

/// Compensated (Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    #[inline]
    fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    /// Fold another accumulator in, preserving its pending correction.
    fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(-other.compensation);
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Partial sums for one kernel over one batch.
#[derive(Debug, Clone, Default)]
struct KernelAccum {
    sum: KahanSum,
    sum_sq: KahanSum,
    n_nonzero: u64,
}

impl KernelAccum {
    fn merge(&mut self, other: &KernelAccum) {
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
        self.n_nonzero += other.n_nonzero;
    }
}

#[derive(Debug, Clone)]
struct BatchAccum {
    per_kernel: Vec<KernelAccum>,
    n: u64,
}

impl BatchAccum {
    fn empty(n_kernels: usize) -> Self {
        BatchAccum {
            per_kernel: vec![KernelAccum::default(); n_kernels],
            n: 0,
        }
    }

    fn merge(&mut self, other: &BatchAccum) {
        for (a, b) in self.per_kernel.iter_mut().zip(&other.per_kernel) {
            a.merge(b);
        }
        self.n += other.n;
    }
}

fn run_batch(
    kernels: &[&dyn Kernel],
    config: &SamplerConfig,
    start: u64,
    end: u64,
) -> Result<BatchAccum, McError> {
    let mut acc = BatchAccum::empty(kernels.len());
    for index in start..end {
        let draw = sample_point(config.seed, index, config.q_tail_scale);
        for (slot, kernel) in acc.per_kernel.iter_mut().zip(kernels) {
            let value = kernel.eval(&draw.point);
            if !value.is_finite() {
                return Err(McError::NonFiniteKernel { index });
            }
            let term = value * draw.weight;
            slot.sum.add(term);
            slot.sum_sq.add(term * term);
            if value != 0.0 {
                slot.n_nonzero += 1;
            }
        }
    }
    acc.n = end - start;
    Ok(acc)
}

/// Pairwise tree over the ordered batch partials; the shape is a function
/// of the slice length alone.
fn reduce_tree(parts: &[BatchAccum]) -> BatchAccum {
    match parts {
        [] => unreachable!("at least one batch"),
        [single] => single.clone(),
        _ => {
            let (left, right) = parts.split_at(parts.len() / 2);
            let mut acc = reduce_tree(left);
            acc.merge(&reduce_tree(right));
            acc
        }
    }
}

fn finalize(acc: &KernelAccum, n: u64) -> IntegralEstimate {
    let nf = n as f64;
    let sum = acc.sum.value();
    let sum_sq = acc.sum_sq.value();
    let mean = sum / nf;
    let variance = if n > 1 {
        ((sum_sq - sum * sum / nf) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    IntegralEstimate {
        mean,
        stderr: (variance / nf).sqrt(),
        n_samples: n,
        n_in_domain: acc.n_nonzero,
        acceptance_rate: acc.n_nonzero as f64 / nf,
    }
}

/// Estimate the integrals of several kernels over one shared sample
/// stream. Sharing the stream makes differences between the returned
/// estimates strongly correlated, which is what the deformation sweeps
/// rely on; element `j` is exactly what `estimate(kernels[j], config)`
/// would return.
pub fn estimate_sweep(
    kernels: &[&dyn Kernel],
    config: &SamplerConfig,
) -> Result<Vec<IntegralEstimate>, McError> {
    if kernels.is_empty() {
        return Err(McError::NoKernels);
    }
    config.validate()?;

    let n = config.n_samples;
    let batch = config.batch_size;
    let n_batches = n.div_ceil(batch);

    let partials: Vec<Result<BatchAccum, McError>> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let start = b * batch;
            let end = (start + batch).min(n);
            run_batch(kernels, config, start, end)
        })
        .collect();

    // Surface the error of the lowest failing batch so the reported index
    // does not depend on scheduling.
    let mut batches = Vec::with_capacity(partials.len());
    for part in partials {
        batches.push(part?);
    }
    let total = reduce_tree(&batches);
    debug_assert_eq!(total.n, n);

    Ok(total.per_kernel.iter().map(|acc| finalize(acc, n)).collect())
}

/// Estimate the integral of one kernel; see [`estimate_sweep`].
pub fn estimate(kernel: &dyn Kernel, config: &SamplerConfig) -> Result<IntegralEstimate, McError> {
    let mut estimates = estimate_sweep(std::slice::from_ref(&kernel), config)?;
    Ok(estimates.pop().expect("one kernel in, one estimate out"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{kernel_comm, PhasePoint};
    use std::f64::consts::PI;

    fn shell_indicator(pt: &PhasePoint) -> f64 {
        let q = pt.q.norm();
        if pt.k.norm() < 1.0 && pt.p.norm() < 1.0 && q > 1.0 && q < 2.0 {
            1.0
        } else {
            0.0
        }
    }

    #[test]
    fn shell_volume_within_three_sigma() {
        let exact = (4.0 * PI / 3.0).powi(3) * 7.0;
        let cfg = SamplerConfig::new(400_000, 42);
        let est = estimate(&shell_indicator, &cfg).unwrap();
        assert!(
            (est.mean - exact).abs() <= 3.0 * est.stderr,
            "mean = {} +- {}, exact = {exact}",
            est.mean,
            est.stderr
        );
    }

    #[test]
    fn rerun_is_bit_identical() {
        let cfg = SamplerConfig::new(50_000, 7);
        let a = estimate(&(kernel_comm as fn(&PhasePoint) -> f64), &cfg).unwrap();
        let b = estimate(&(kernel_comm as fn(&PhasePoint) -> f64), &cfg).unwrap();
        assert!(a.bitwise_eq(&b));
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let cfg = SamplerConfig {
            batch_size: 1000,
            ..SamplerConfig::new(30_000, 11)
        };
        let kernel: fn(&PhasePoint) -> f64 = kernel_comm;
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| estimate(&kernel, &cfg).unwrap())
        };
        let one = run(1);
        let four = run(4);
        assert!(one.bitwise_eq(&four));
    }

    #[test]
    fn sweep_single_kernel_matches_estimate() {
        let cfg = SamplerConfig::new(20_000, 3);
        let kernel: fn(&PhasePoint) -> f64 = kernel_comm;
        let single = estimate(&kernel, &cfg).unwrap();
        let sweep = estimate_sweep(&[&kernel], &cfg).unwrap();
        assert!(single.bitwise_eq(&sweep[0]));
    }

    #[test]
    fn zero_kernel_gives_zero_mean_and_stderr() {
        let cfg = SamplerConfig::new(10_000, 1);
        let zero = |_: &PhasePoint| 0.0;
        let est = estimate(&zero, &cfg).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.stderr, 0.0);
        assert_eq!(est.n_in_domain, 0);
        assert_eq!(est.acceptance_rate, 0.0);
    }

    #[test]
    fn empty_budget_is_an_error() {
        let cfg = SamplerConfig {
            n_samples: 0,
            batch_size: 1,
            ..SamplerConfig::new(1, 1)
        };
        let kernel: fn(&PhasePoint) -> f64 = kernel_comm;
        assert_eq!(estimate(&kernel, &cfg), Err(McError::EmptyBudget));
    }

    #[test]
    fn non_finite_kernel_reports_lowest_index() {
        let cfg = SamplerConfig {
            batch_size: 100,
            ..SamplerConfig::new(1_000, 1)
        };
        let bad = |_: &PhasePoint| f64::NAN;
        assert_eq!(
            estimate(&bad, &cfg),
            Err(McError::NonFiniteKernel { index: 0 })
        );
    }

    #[test]
    fn stderr_shrinks_like_inverse_sqrt_n() {
        let kernel: fn(&PhasePoint) -> f64 = kernel_comm;
        let small = estimate(&kernel, &SamplerConfig::new(250_000, 5)).unwrap();
        let large = estimate(&kernel, &SamplerConfig::new(1_000_000, 5)).unwrap();
        let ratio = large.stderr / small.stderr;
        assert!((0.4..=0.6).contains(&ratio), "ratio = {ratio}");
    }
}
