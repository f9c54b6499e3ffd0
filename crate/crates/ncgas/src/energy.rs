//! Per-electron ground-state energy assembly in Rydberg units.
//!
//! The kinetic, exchange and ring coefficients are closed forms; the
//! second-order exchange term is Monte Carlo estimated, either undeformed
//! or with the direction-averaged deformation factor, and carries the only
//! statistical error in the breakdown.

use crate::kernel::{kernel_avg, kernel_comm, kernel_r, PhasePoint};
use crate::mc::{estimate, IntegralEstimate, McError, SamplerConfig};
use std::f64::consts::PI;
use thiserror::Error;

/// Apery's constant, zeta(3).
pub const ZETA_3: f64 = 1.202_056_903_159_594_3;

/// Exact value of the undeformed second-order exchange integral,
/// `ln(2)/3 - 3 zeta(3) / (2 pi^2)`.
pub fn eps2b_exact() -> f64 {
    std::f64::consts::LN_2 / 3.0 - 1.5 * ZETA_3 / (PI * PI)
}

/// Prefactor `3 / (16 pi^5)` converting the raw 9-D exchange integral to
/// Rydberg per electron.
pub fn exchange_prefactor() -> f64 {
    3.0 / (16.0 * PI.powi(5))
}

/// Coefficient of the quadratic deformation term, `1 / (32 pi^5)`.
fn quadratic_prefactor() -> f64 {
    1.0 / (32.0 * PI.powi(5))
}

/// Kinetic coefficient `(3/5)(9 pi / 4)^(2/3)`, about 2.21.
pub fn fermi_coefficient() -> f64 {
    0.6 * (2.25 * PI).powf(2.0 / 3.0)
}

/// Exchange coefficient `(3 / 2 pi)(9 pi / 4)^(1/3)`, about 0.916.
pub fn exchange_coefficient() -> f64 {
    1.5 / PI * (2.25 * PI).powf(1.0 / 3.0)
}

/// Coefficient of `ln r_s` in the second-order total.
pub const RING_LOG_COEFF: f64 = 0.0622;
/// Constant part of the second-order total.
pub const RING_CONST: f64 = -0.094;

/// The closed-form constants used by the energy model, echoed into run
/// manifests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticConstants {
    pub prefactor: f64,
    pub eps2b_exact: f64,
    pub c_fermi: f64,
    pub c_exchange: f64,
    pub c_log: f64,
    pub c_const_total: f64,
}

impl Default for AnalyticConstants {
    fn default() -> Self {
        AnalyticConstants {
            prefactor: exchange_prefactor(),
            eps2b_exact: eps2b_exact(),
            c_fermi: fermi_coefficient(),
            c_exchange: exchange_coefficient(),
            c_log: RING_LOG_COEFF,
            c_const_total: RING_CONST,
        }
    }
}

/// Physical parameters of one gas configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParameters {
    /// Density parameter, Wigner-Seitz radius over Bohr radius.
    pub r_s: f64,
    pub n_electrons: u64,
    /// Dimensionless deformation scale (Fermi wavenumber squared times
    /// the noncommutative area).
    pub tau: f64,
}

impl GasParameters {
    pub fn new(r_s: f64, n_electrons: u64, tau: f64) -> Result<Self, EnergyError> {
        if r_s <= 0.0 || !r_s.is_finite() {
            return Err(EnergyError::NonPositiveRs { r_s });
        }
        if n_electrons == 0 {
            return Err(EnergyError::NoElectrons);
        }
        if tau < 0.0 || !tau.is_finite() {
            return Err(EnergyError::NegativeTau { tau });
        }
        Ok(GasParameters { r_s, n_electrons, tau })
    }
}

/// Per-electron energy terms in Rydberg units. `total` is by construction
/// the exact floating-point sum of the four terms, and the only
/// statistical error comes from the exchange estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub eps_fermi: f64,
    pub eps_exchange: f64,
    pub eps2_ring: f64,
    pub eps2b: f64,
    pub eps2b_stderr: f64,
    pub total: f64,
    pub total_stderr: f64,
}

impl EnergyBreakdown {
    fn assemble(eps_fermi: f64, eps_exchange: f64, eps2_ring: f64, eps2b: &IntegralEstimate) -> Self {
        EnergyBreakdown {
            eps_fermi,
            eps_exchange,
            eps2_ring,
            eps2b: eps2b.mean,
            eps2b_stderr: eps2b.stderr,
            total: eps_fermi + eps_exchange + eps2_ring + eps2b.mean,
            total_stderr: eps2b.stderr,
        }
    }
}

/// Quadratic deformation coefficient estimate (the raw second-moment
/// integral, no Rydberg prefactor).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RCoefficient {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("density parameter r_s must be positive (got {r_s})")]
    NonPositiveRs { r_s: f64 },
    #[error("electron count must be at least 1")]
    NoElectrons,
    #[error("deformation scale tau must be nonnegative (got {tau})")]
    NegativeTau { tau: f64 },
    #[error("length must be positive (got {length})")]
    NonPositiveLength { length: f64 },
    #[error("second-moment estimate vanished; sample budget too small to touch the domain")]
    DegenerateSecondMoment,
    #[error(transparent)]
    Mc(#[from] McError),
}

fn check_rs(r_s: f64) -> Result<(), EnergyError> {
    if r_s > 0.0 && r_s.is_finite() {
        Ok(())
    } else {
        Err(EnergyError::NonPositiveRs { r_s })
    }
}

/// Unperturbed kinetic energy per electron, `c_fermi / r_s^2`.
pub fn eps_fermi(r_s: f64) -> Result<f64, EnergyError> {
    check_rs(r_s)?;
    Ok(fermi_coefficient() / (r_s * r_s))
}

/// First-order exchange energy per electron, `-c_exchange / r_s`.
pub fn eps_exchange(r_s: f64) -> Result<f64, EnergyError> {
    check_rs(r_s)?;
    Ok(-exchange_coefficient() / r_s)
}

/// Ring (direct second-order) energy per electron: the second-order total
/// `0.0622 ln r_s - 0.094` minus the exact exchange part. This term is
/// untouched by the deformation.
pub fn eps2_ring(r_s: f64) -> Result<f64, EnergyError> {
    check_rs(r_s)?;
    Ok(RING_LOG_COEFF * r_s.ln() + RING_CONST - eps2b_exact())
}

/// Monte Carlo estimate of the undeformed second-order exchange energy.
pub fn eps2b_commutative(config: &SamplerConfig) -> Result<IntegralEstimate, EnergyError> {
    let raw = estimate(&(kernel_comm as fn(&PhasePoint) -> f64), config)?;
    Ok(raw.scaled(exchange_prefactor()))
}

/// Monte Carlo estimate of the direction-averaged deformed exchange
/// energy at scale `tau`. At `tau = 0` this is byte-identical to
/// [`eps2b_commutative`] on the same configuration.
pub fn eps2b_tau(tau: f64, config: &SamplerConfig) -> Result<IntegralEstimate, EnergyError> {
    if tau < 0.0 || !tau.is_finite() {
        return Err(EnergyError::NegativeTau { tau });
    }
    let kernel = move |pt: &PhasePoint| kernel_avg(pt, tau);
    let raw = estimate(&kernel, config)?;
    Ok(raw.scaled(exchange_prefactor()))
}

/// Monte Carlo estimate of the raw second-moment integral governing the
/// leading deformation shift.
pub fn r_coefficient(config: &SamplerConfig) -> Result<RCoefficient, EnergyError> {
    let est = estimate(&(kernel_r as fn(&PhasePoint) -> f64), config)?;
    if est.mean <= 0.0 {
        return Err(EnergyError::DegenerateSecondMoment);
    }
    Ok(RCoefficient {
        value: est.mean,
        stderr: est.stderr,
    })
}

/// Small-deformation expansion of the exchange energy:
/// `eps2b_exact - tau^2 R / (32 pi^5)`.
pub fn eps2b_small_tau(tau: f64, r: &RCoefficient) -> f64 {
    eps2b_exact() - tau * tau * r.value * quadratic_prefactor()
}

/// Full per-electron breakdown at the given parameters. The quartic
/// deformation corrections (which require a cutoff) and the higher-order
/// `r_s ln r_s` terms are not modeled.
pub fn total_energy(
    params: &GasParameters,
    config: &SamplerConfig,
) -> Result<EnergyBreakdown, EnergyError> {
    let fermi = eps_fermi(params.r_s)?;
    let exchange = eps_exchange(params.r_s)?;
    let ring = eps2_ring(params.r_s)?;
    let eps2b = eps2b_tau(params.tau, config)?;
    Ok(EnergyBreakdown::assemble(fermi, exchange, ring, &eps2b))
}

/// Derivative of the quadratic deformation term with respect to `tau`:
/// `-2 tau R / (32 pi^5)`. Linear in `tau`, the way a specific heat is
/// linear in temperature; this is the sense in which the deformation
/// scale acts as a reference temperature.
pub fn theta_heat(params: &GasParameters, r: &RCoefficient) -> f64 {
    -2.0 * params.tau * r.value * quadratic_prefactor()
}

/// Dimensionless deformation scale for a physical noncommutative area:
/// `k_F^2 theta` with `k_F = (9 pi / 4)^(1/3) / (r_s a_0)`.
pub fn tau_of(theta_area: f64, r_s: f64, bohr_radius: f64) -> Result<f64, EnergyError> {
    check_rs(r_s)?;
    if bohr_radius <= 0.0 || !bohr_radius.is_finite() {
        return Err(EnergyError::NonPositiveLength { length: bohr_radius });
    }
    if theta_area < 0.0 || !theta_area.is_finite() {
        return Err(EnergyError::NegativeTau { tau: theta_area });
    }
    let k_fermi = (2.25 * PI).powf(1.0 / 3.0) / (r_s * bohr_radius);
    Ok(k_fermi * k_fermi * theta_area)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_coefficients_match_printed_values() {
        assert!((fermi_coefficient() - 2.21).abs() < 5e-3);
        assert!((exchange_coefficient() - 0.916).abs() < 5e-4);
        assert!((eps2b_exact() - 0.048_358_317_836_288_81).abs() < 1e-15);
        assert!(eps2b_exact() > 0.0483 && eps2b_exact() < 0.0484);
    }

    #[test]
    fn eps_fermi_examples() {
        assert!((eps_fermi(1.0).unwrap() - 2.21).abs() < 5e-3);
        assert!((eps_fermi(2.0).unwrap() - 0.5525).abs() < 1e-4);
        assert!(eps_fermi(1e9).unwrap() > 0.0);
        assert!(eps_fermi(1e9).unwrap() < 1e-17);
        assert!(matches!(
            eps_fermi(0.0),
            Err(EnergyError::NonPositiveRs { .. })
        ));
    }

    #[test]
    fn eps_exchange_examples() {
        assert!((eps_exchange(1.0).unwrap() + 0.916).abs() < 5e-4);
        for r_s in [0.1, 1.0, 7.0, 250.0] {
            assert!(eps_exchange(r_s).unwrap() < 0.0);
        }
    }

    #[test]
    fn eps2_ring_examples() {
        let ring = eps2_ring(1.0).unwrap();
        assert!((ring + 0.094 + eps2b_exact()).abs() < 1e-15);
        assert!((ring - (-0.1424)).abs() < 5e-5);
        // second-order total recovers the printed constants
        assert!((ring + eps2b_exact() + 0.094).abs() < 1e-15);
        assert!(eps2_ring(2.0).unwrap() > ring);
    }

    #[test]
    fn small_tau_expansion() {
        let r = RCoefficient { value: 160.0, stderr: 0.0 };
        assert_eq!(eps2b_small_tau(0.0, &r), eps2b_exact());
        let tau = 0.05;
        let slope = (eps2b_exact() - eps2b_small_tau(tau, &r)) / (tau * tau);
        assert!((slope - r.value / (32.0 * PI.powi(5))).abs() < 1e-12);
    }

    #[test]
    fn theta_heat_is_linear_and_negative() {
        let r = RCoefficient { value: 160.0, stderr: 0.0 };
        let params = |tau| GasParameters::new(1.0, 1, tau).unwrap();
        assert_eq!(theta_heat(&params(0.0), &r), 0.0);
        let h1 = theta_heat(&params(0.3), &r);
        let h2 = theta_heat(&params(0.6), &r);
        assert!(h1 < 0.0);
        assert!((h2 / h1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tau_of_examples() {
        assert_eq!(tau_of(0.0, 1.0, 1.0).unwrap(), 0.0);
        let base = tau_of(1.0, 1.0, 1.0).unwrap();
        assert!((base - 3.683_168_552_352_866_7).abs() < 1e-12);
        let halved = tau_of(1.0, 2.0, 1.0).unwrap();
        assert!((halved - base / 4.0).abs() < 1e-12);
        assert!(matches!(
            tau_of(1.0, 1.0, 0.0),
            Err(EnergyError::NonPositiveLength { .. })
        ));
    }

    #[test]
    fn exchange_estimate_brackets_exact_value() {
        let cfg = SamplerConfig::new(400_000, 42);
        let est = eps2b_commutative(&cfg).unwrap();
        assert!(
            (est.mean - eps2b_exact()).abs() <= 3.0 * est.stderr,
            "mean = {} +- {}",
            est.mean,
            est.stderr
        );
    }

    #[test]
    fn zero_tau_estimate_is_byte_identical_to_commutative() {
        let cfg = SamplerConfig::new(100_000, 42);
        let a = eps2b_commutative(&cfg).unwrap();
        let b = eps2b_tau(0.0, &cfg).unwrap();
        assert!(a.bitwise_eq(&b));
    }

    #[test]
    fn breakdown_total_is_exact_sum() {
        let cfg = SamplerConfig::new(200_000, 42);
        let params = GasParameters::new(1.0, 1, 0.0).unwrap();
        let b = total_energy(&params, &cfg).unwrap();
        assert_eq!(b.total, b.eps_fermi + b.eps_exchange + b.eps2_ring + b.eps2b);
        assert_eq!(b.total_stderr, b.eps2b_stderr);
        let analytic = fermi_coefficient() - exchange_coefficient() + RING_CONST;
        assert!(
            (b.total - analytic).abs() <= 3.0 * b.total_stderr,
            "total = {} +- {}, analytic = {analytic}",
            b.total,
            b.total_stderr
        );
    }

    #[test]
    fn r_coefficient_is_positive() {
        let cfg = SamplerConfig::new(100_000, 13);
        let r = r_coefficient(&cfg).unwrap();
        assert!(r.value > 0.0);
        assert!(r.stderr > 0.0);
    }
}
