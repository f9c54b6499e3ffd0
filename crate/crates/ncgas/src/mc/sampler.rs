//! Counter-based proposal sampler.
//!
//! Every sample index owns a dedicated ChaCha8 stream keyed by the master
//! seed, so a draw is a pure function of `(seed, index)` and any subset of
//! the index range can be generated independently, in any order, on any
//! number of workers. Within a stream the draws are consumed in a fixed
//! component order: hole momentum `k`, hole momentum `p`, `q` direction,
//! `q` radius.

use super::SampleDraw;
use crate::kernel::PhasePoint;
use crate::vec3::Vec3;
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Volume of the unit ball.
const BALL_VOLUME: f64 = 4.0 * PI / 3.0;

#[inline]
fn unit_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let phi: f64 = 2.0 * PI * rng.random::<f64>();
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

#[inline]
fn uniform_in_ball(rng: &mut ChaCha8Rng) -> Vec3 {
    let dir = unit_direction(rng);
    let r = rng.random::<f64>().cbrt();
    dir * r
}

/// Draw the sample with the given index from the stream keyed by `seed`.
///
/// `k` and `p` are uniform in the unit ball; the direction of `q` is
/// uniform on the sphere and its radius follows `rho(Q) = s/(s+Q)^2`
/// via the inverse CDF `Q = s u / (1 - u)` with `u` in the open unit
/// interval (so `Q > 0` always). The weight is the reciprocal of the
/// joint proposal density, making `kernel * weight` an unbiased
/// one-sample estimate of the plain 9-D integral.
pub fn sample_point(seed: u64, index: u64, q_tail_scale: f64) -> SampleDraw {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);

    let k = uniform_in_ball(&mut rng);
    let p = uniform_in_ball(&mut rng);
    let q_dir = unit_direction(&mut rng);
    let u: f64 = rng.sample(Open01);
    let s = q_tail_scale;
    let radius = s * u / (1.0 - u);
    let q = q_dir * radius;

    // Densities: 1/BALL_VOLUME for each ball, and
    // rho(Q)/(4 pi Q^2) = s / ((s+Q)^2 4 pi Q^2) for q in 3-space.
    let weight =
        BALL_VOLUME * BALL_VOLUME * 4.0 * PI * radius * radius * (s + radius) * (s + radius) / s;

    SampleDraw {
        point: PhasePoint::new(q, k, p),
        weight,
    }
}
