//! Cross-module invariants of the estimator and the energy model, mostly
//! built on shared-stream sweeps where statistical noise largely cancels.

use ncgas::energy::{
    eps2b_small_tau, eps2b_tau, exchange_prefactor, r_coefficient, eps2b_exact,
};
use ncgas::kernel::{kernel_avg, kernel_comm, PhasePoint};
use ncgas::mc::{estimate, estimate_sweep, Kernel, SamplerConfig};
use std::f64::consts::PI;

fn avg_kernels(taus: &[f64]) -> Vec<Box<dyn Kernel>> {
    taus.iter()
        .map(|&tau| {
            let k: Box<dyn Kernel> = Box::new(move |pt: &PhasePoint| kernel_avg(pt, tau));
            k
        })
        .collect()
}

#[test]
fn raw_commutative_integral_matches_closed_form() {
    // the raw 9-D integral, before the Rydberg prefactor
    let exact = eps2b_exact() / exchange_prefactor();
    let cfg = SamplerConfig::new(2_000_000, 42);
    let est = estimate(&(kernel_comm as fn(&PhasePoint) -> f64), &cfg).unwrap();
    assert!(
        (est.mean - exact).abs() <= 3.0 * est.stderr,
        "raw integral {} +- {} vs {exact}",
        est.mean,
        est.stderr
    );
}

#[test]
fn sweep_of_commutative_and_zero_deformation_is_identical() {
    let cfg = SamplerConfig::new(100_000, 3);
    let comm: fn(&PhasePoint) -> f64 = kernel_comm;
    let avg0 = |pt: &PhasePoint| kernel_avg(pt, 0.0);
    let sweep = estimate_sweep(&[&comm as &dyn Kernel, &avg0 as &dyn Kernel], &cfg).unwrap();
    assert!(sweep[0].bitwise_eq(&sweep[1]));
}

#[test]
fn deformed_term_is_bounded_by_undeformed_plus_noise() {
    let cfg = SamplerConfig::new(1_000_000, 42);
    let taus = [0.0, 0.3, 2.0, 30.0];
    let kernels = avg_kernels(&taus);
    let refs: Vec<&dyn Kernel> = kernels.iter().map(|k| k.as_ref()).collect();
    let sweep = estimate_sweep(&refs, &cfg).unwrap();
    let base = &sweep[0];
    for est in &sweep[1..] {
        let noise = 3.0 * (base.stderr.powi(2) + est.stderr.powi(2)).sqrt();
        assert!(
            est.mean.abs() <= base.mean + noise,
            "{} > {} + {noise}",
            est.mean.abs(),
            base.mean
        );
    }
}

#[test]
fn small_tau_ratio_converges_to_second_moment() {
    // [eps2b(0) - eps2b(tau)] * 32 pi^5 / tau^2 approaches the
    // second-moment coefficient from below as tau -> 0
    let cfg = SamplerConfig::new(2_000_000, 42);
    let taus = [0.2, 0.1, 0.05];
    let kernels = avg_kernels(&[0.0, 0.2, 0.1, 0.05]);
    let refs: Vec<&dyn Kernel> = kernels.iter().map(|k| k.as_ref()).collect();
    let sweep = estimate_sweep(&refs, &cfg).unwrap();
    let r = r_coefficient(&cfg).unwrap();

    let ratio = |i: usize| {
        let tau = taus[i - 1];
        (sweep[0].mean - sweep[i].mean) * 6.0 / (tau * tau)
    };
    let deviations: Vec<f64> = (1..=3).map(|i| (ratio(i) - r.value).abs()).collect();
    assert!(
        deviations[2] < deviations[1] && deviations[1] < deviations[0],
        "|ratio - R| should shrink with tau: {deviations:?}"
    );
    // agreement at the smallest tau, with the estimates' own errors
    // combined
    let tau = taus[2];
    let scale = 6.0 / (tau * tau);
    let sigma_ratio = scale * (sweep[0].stderr.powi(2) + sweep[3].stderr.powi(2)).sqrt();
    let combined = (sigma_ratio.powi(2) + r.stderr.powi(2)).sqrt();
    assert!(
        deviations[2] <= 3.0 * combined,
        "ratio {} vs R {} (3 sigma = {})",
        ratio(3),
        r.value,
        3.0 * combined
    );
}

#[test]
fn small_tau_expansion_matches_deformed_estimate() {
    let cfg = SamplerConfig::new(2_000_000, 42);
    let r = r_coefficient(&cfg).unwrap();
    for tau in [0.05, 0.1] {
        let est = eps2b_tau(tau, &cfg).unwrap();
        let predicted = eps2b_small_tau(tau, &r);
        let sigma = (est.stderr.powi(2)
            + (tau * tau / (32.0 * PI.powi(5)) * r.stderr).powi(2))
        .sqrt();
        assert!(
            (est.mean - predicted).abs() <= 3.0 * sigma,
            "tau = {tau}: estimate {} vs expansion {predicted} (3 sigma = {})",
            est.mean,
            3.0 * sigma
        );
    }
}
