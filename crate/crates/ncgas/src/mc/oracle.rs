//! Brute-force cross-check estimator.
//!
//! Uniform sampling of `q` in the truncated cube `[-L, L]^3` and of `k`,
//! `p` in the enclosing cubes `[-1, 1]^3`, with plain arithmetic and its
//! own RNG streams. Deliberately naive and independent of the
//! importance-sampling engine so the two can validate each other; it
//! reports the integral over the truncated `q` domain, so comparisons
//! must budget for the tail beyond the cube.

use super::{IntegralEstimate, Kernel, McError, SamplerConfig};
use crate::kernel::PhasePoint;
use crate::vec3::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

const ORACLE_STREAM_SALT: u64 = 0x6f72_6163_6c65; // distinct stream space from the engine

pub fn oracle_estimate(
    kernel: &dyn Kernel,
    config: &SamplerConfig,
) -> Result<IntegralEstimate, McError> {
    config.validate()?;
    let half_width = config.oracle_box;
    if half_width < 3.0 {
        return Err(McError::OracleBoxTooSmall { got: half_width });
    }

    let n = config.n_samples;
    let batch = config.batch_size;
    let n_batches = n.div_ceil(batch);
    let volume = (2.0 * half_width).powi(3) * 64.0;

    let partials: Vec<Result<(f64, f64, u64, u64), McError>> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let start = b * batch;
            let end = (start + batch).min(n);
            let mut rng = ChaCha12Rng::seed_from_u64(config.seed ^ ORACLE_STREAM_SALT);
            rng.set_stream(b);
            let mut sum = 0.0f64;
            let mut sum_sq = 0.0f64;
            let mut n_nonzero = 0u64;
            for index in start..end {
                let cube = |rng: &mut ChaCha12Rng, half: f64| {
                    Vec3::new(
                        half * (2.0 * rng.random::<f64>() - 1.0),
                        half * (2.0 * rng.random::<f64>() - 1.0),
                        half * (2.0 * rng.random::<f64>() - 1.0),
                    )
                };
                let q = cube(&mut rng, half_width);
                let k = cube(&mut rng, 1.0);
                let p = cube(&mut rng, 1.0);
                let value = kernel.eval(&PhasePoint::new(q, k, p));
                if !value.is_finite() {
                    return Err(McError::NonFiniteKernel { index });
                }
                let term = value * volume;
                sum += term;
                sum_sq += term * term;
                if value != 0.0 {
                    n_nonzero += 1;
                }
            }
            Ok((sum, sum_sq, n_nonzero, end - start))
        })
        .collect();

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut n_nonzero = 0u64;
    for part in partials {
        let (s, s2, nz, _) = part?;
        sum += s;
        sum_sq += s2;
        n_nonzero += nz;
    }

    let nf = n as f64;
    let mean = sum / nf;
    let variance = if n > 1 {
        ((sum_sq - sum * sum / nf) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(IntegralEstimate {
        mean,
        stderr: (variance / nf).sqrt(),
        n_samples: n,
        n_in_domain: n_nonzero,
        acceptance_rate: n_nonzero as f64 / nf,
    })
}
