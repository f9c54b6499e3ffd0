//! Integrand kernels for the second-order exchange integral of the
//! degenerate electron gas and its noncommutative deformations.
//!
//! All momenta are dimensionless (units of the Fermi wavenumber). The
//! integration domain is the Fermi-constrained region
//!
//! ```text
//!   |k| < 1,  |p| < 1,  |k + q| > 1,  |p - q| > 1,  |q| > 0,
//! ```
//!
//! i.e. two holes inside the Fermi sphere scattered to two particles
//! outside it by a momentum transfer `q`. Every kernel is the common
//! commutative integrand `1 / (q^2 [q.(q+k-p)] (q+k-p)^2)` times a
//! deformation factor; outside the domain all kernels return 0 so they
//! can be used directly as indicator-weighted Monte Carlo integrands.
//!
//! The kernels are evaluated so that the exchange map
//! `(q, k, p) -> (-q, p, k)` is an exact bitwise symmetry: `k - p` is
//! formed first, and every other quantity is built from sums, products
//! and squares whose IEEE rounding commutes with the sign flips of that
//! map.

use crate::vec3::Vec3;
use thiserror::Error;

/// One sample of the 9-dimensional integration space: momentum transfer
/// `q` and the two hole momenta `k`, `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: Vec3,
    pub k: Vec3,
    pub p: Vec3,
}

impl PhasePoint {
    pub const fn new(q: Vec3, k: Vec3, p: Vec3) -> Self {
        PhasePoint { q, k, p }
    }
}

/// Noncommutativity vector: a unit direction and the dimensionless
/// magnitude `tau` (Fermi wavenumber squared times the noncommutative
/// area scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaVector {
    direction: Vec3,
    tau: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("phase point lies outside the Fermi-constrained domain")]
    OutOfDomain,
    #[error("theta direction must be a unit vector (|direction| = {norm})")]
    NonUnitDirection { norm: f64 },
    #[error("tau must be nonnegative and finite (got {tau})")]
    InvalidTau { tau: f64 },
}

impl ThetaVector {
    /// Unit-direction tolerance: `| |direction| - 1 | <= 1e-12`.
    pub fn new(direction: Vec3, tau: f64) -> Result<Self, KernelError> {
        let norm = direction.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(KernelError::NonUnitDirection { norm });
        }
        if tau < 0.0 || !tau.is_finite() {
            return Err(KernelError::InvalidTau { tau });
        }
        Ok(ThetaVector { direction, tau })
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// True iff the point lies strictly inside the Fermi-constrained domain.
/// Boundary equalities are excluded (measure zero, and they would sit on
/// the zeros of the energy denominator).
#[inline]
pub fn in_domain(pt: &PhasePoint) -> bool {
    let PhasePoint { q, k, p } = *pt;
    q.norm2() > 0.0
        && k.norm2() < 1.0
        && p.norm2() < 1.0
        && (k + q).norm2() > 1.0
        && (p - q).norm2() > 1.0
}

#[inline]
fn denominator(pt: &PhasePoint) -> f64 {
    let diff = pt.k - pt.p;
    let w = pt.q + diff;
    pt.q.norm2() * pt.q.dot(w) * w.norm2()
}

/// Energy denominator `D = q^2 [q.(q+k-p)] (q+k-p)^2` of the exchange
/// integrand, including the `q^2` measure factor. Strictly positive on
/// the domain: `2 q.(q+k-p) = (|k+q|^2 - |k|^2) + (|p-q|^2 - |p|^2)`
/// and both parentheses are positive there.
pub fn energy_denominator(pt: &PhasePoint) -> Result<f64, KernelError> {
    if !in_domain(pt) {
        return Err(KernelError::OutOfDomain);
    }
    Ok(denominator(pt))
}

/// Commutative exchange kernel: `1/D` inside the domain, 0 outside.
#[inline]
pub fn kernel_comm(pt: &PhasePoint) -> f64 {
    if !in_domain(pt) {
        return 0.0;
    }
    let d = denominator(pt);
    // Rounding can produce a nonpositive denominator within one ulp of the
    // domain boundary; treat such points as excluded like the boundary.
    if d > 0.0 && d.is_finite() {
        1.0 / d
    } else {
        0.0
    }
}

/// Phase `chi = 2 tau theta_hat . (q x (k - p))` of the deformed
/// integrand, using the convention `q ^ v = theta . (q x v)`.
#[inline]
pub fn wedge_phase(pt: &PhasePoint, theta: &ThetaVector) -> f64 {
    let cross = pt.q.cross(pt.k - pt.p);
    2.0 * theta.tau * theta.direction.dot(cross)
}

/// Fixed-direction deformed kernel: `kernel_comm . cos(chi)`.
#[inline]
pub fn kernel_cos(pt: &PhasePoint, theta: &ThetaVector) -> f64 {
    let kc = kernel_comm(pt);
    if kc == 0.0 {
        return 0.0;
    }
    kc * wedge_phase(pt, theta).cos()
}

/// Imaginary part of the complex-exponential kernel
/// `kernel_comm . e^{-i chi}`, i.e. `-kernel_comm . sin(chi)`. The
/// deformed integral is real, so estimates of this kernel must be
/// statistically consistent with zero.
#[inline]
pub fn kernel_phase_im(pt: &PhasePoint, theta: &ThetaVector) -> f64 {
    let kc = kernel_comm(pt);
    if kc == 0.0 {
        return 0.0;
    }
    -kc * wedge_phase(pt, theta).sin()
}

/// `sin(x)/x` with a two-term Taylor branch below `|x| = 1e-4`. Both
/// branches agree to better than 1e-15 at the switchover.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Direction-averaged deformed kernel:
/// `kernel_comm . sinc(tau |q x (k - p)|)`.
#[inline]
pub fn kernel_avg(pt: &PhasePoint, tau: f64) -> f64 {
    let kc = kernel_comm(pt);
    if kc == 0.0 {
        return 0.0;
    }
    let cross = pt.q.cross(pt.k - pt.p);
    kc * sinc(tau * cross.norm())
}

/// Second-moment kernel `kernel_comm . |q x (k - p)|^2`, the integrand of
/// the quadratic coefficient of the small-deformation expansion. Always
/// nonnegative.
#[inline]
pub fn kernel_r(pt: &PhasePoint) -> f64 {
    let kc = kernel_comm(pt);
    if kc == 0.0 {
        return 0.0;
    }
    let cross = pt.q.cross(pt.k - pt.p);
    kc * cross.norm2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(q: [f64; 3], k: [f64; 3], p: [f64; 3]) -> PhasePoint {
        PhasePoint::new(
            Vec3::new(q[0], q[1], q[2]),
            Vec3::new(k[0], k[1], k[2]),
            Vec3::new(p[0], p[1], p[2]),
        )
    }

    fn theta(direction: [f64; 3], tau: f64) -> ThetaVector {
        ThetaVector::new(Vec3::new(direction[0], direction[1], direction[2]), tau).unwrap()
    }

    #[test]
    fn in_domain_examples() {
        assert!(in_domain(&pt([2.0, 0.0, 0.0], [0.0; 3], [0.0; 3])));
        // |k + q| = 0.5 < 1
        assert!(!in_domain(&pt([0.5, 0.0, 0.0], [0.0; 3], [0.0; 3])));
        // hole outside the Fermi sphere
        assert!(!in_domain(&pt([2.0, 0.0, 0.0], [1.5, 0.0, 0.0], [0.0; 3])));
        // q = 0 is excluded
        assert!(!in_domain(&pt([0.0; 3], [0.0; 3], [0.0; 3])));
    }

    #[test]
    fn in_domain_boundary_is_excluded() {
        // |k| = 1 exactly
        assert!(!in_domain(&pt([2.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0; 3])));
        // |k + q| = 1 exactly
        assert!(!in_domain(&pt([1.0, 0.0, 0.0], [0.0; 3], [0.0; 3])));
    }

    #[test]
    fn energy_denominator_examples() {
        let d = energy_denominator(&pt([2.0, 0.0, 0.0], [0.0; 3], [0.0; 3])).unwrap();
        assert_eq!(d, 64.0);
        let d = energy_denominator(&pt(
            [2.0, 0.0, 0.0],
            [0.0, 0.5, 0.0],
            [0.0, -0.5, 0.0],
        ))
        .unwrap();
        assert_eq!(d, 80.0);
        assert_eq!(
            energy_denominator(&pt([0.5, 0.0, 0.0], [0.0; 3], [0.0; 3])),
            Err(KernelError::OutOfDomain)
        );
    }

    #[test]
    fn kernel_comm_examples() {
        assert_eq!(kernel_comm(&pt([2.0, 0.0, 0.0], [0.0; 3], [0.0; 3])), 1.0 / 64.0);
        assert_eq!(kernel_comm(&pt([0.5, 0.0, 0.0], [0.0; 3], [0.0; 3])), 0.0);
        assert_eq!(
            kernel_comm(&pt([2.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, -0.5, 0.0])),
            0.0125
        );
    }

    #[test]
    fn wedge_phase_examples() {
        let th = theta([0.0, 0.0, 1.0], 0.5);
        // q x (k - p) = (1,0,0) x (0,1,0) = (0,0,1)
        let p1 = pt([1.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, -0.5, 0.0]);
        assert_eq!(wedge_phase(&p1, &th), 1.0);
        // k = p gives zero phase
        let p2 = pt([1.0, 2.0, 3.0], [0.1, 0.2, 0.3], [0.1, 0.2, 0.3]);
        assert_eq!(wedge_phase(&p2, &th), 0.0);
        // tau = 0 gives zero phase everywhere
        let th0 = theta([0.0, 0.0, 1.0], 0.0);
        assert_eq!(wedge_phase(&p1, &th0), 0.0);
    }

    #[test]
    fn kernel_cos_full_turn_phase() {
        // chi = 2 (pi/2) * 2 = 2 pi, so the cosine factor is 1.
        let th = theta([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2);
        let p1 = pt([2.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, -0.5, 0.0]);
        assert!((kernel_cos(&p1, &th) - 0.0125).abs() < 1e-15);
    }

    #[test]
    fn sinc_examples() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(std::f64::consts::PI).abs() < 1e-15);
        assert!((sinc(1e-9) - 1.0).abs() < 1e-17);
        assert!((sinc(-1e-9) - 1.0).abs() < 1e-17);
    }

    #[test]
    fn sinc_branches_agree_at_switchover() {
        for &x in &[1e-4, -1e-4, 9.9999e-5, 1.00001e-4] {
            let taylor = {
                let x2: f64 = x * x;
                1.0 - x2 / 6.0 + x2 * x2 / 120.0
            };
            let analytic = x.sin() / x;
            assert!((taylor - analytic).abs() < 1e-15, "x = {x}");
        }
    }

    #[test]
    fn sinc_matches_ratio_over_range() {
        // log-spaced |x| from the switchover up to 1e3
        let mut x = 1e-4;
        while x <= 1e3 {
            for s in [x, -x] {
                assert!((sinc(s) - s.sin() / s).abs() < 1e-15, "x = {s}");
            }
            x *= 1.037;
        }
    }

    #[test]
    fn kernel_r_example() {
        let p1 = pt([2.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, -0.5, 0.0]);
        assert_eq!(kernel_r(&p1), 0.05);
        let p2 = pt([2.0, 0.0, 0.0], [0.1, 0.2, 0.3], [0.1, 0.2, 0.3]);
        assert_eq!(kernel_r(&p2), 0.0);
    }

    #[test]
    fn theta_vector_validation() {
        assert!(ThetaVector::new(Vec3::new(0.0, 0.0, 1.0), 0.0).is_ok());
        assert!(matches!(
            ThetaVector::new(Vec3::new(0.0, 0.0, 2.0), 0.0),
            Err(KernelError::NonUnitDirection { .. })
        ));
        assert!(matches!(
            ThetaVector::new(Vec3::new(0.0, 0.0, 1.0), -0.5),
            Err(KernelError::InvalidTau { .. })
        ));
    }

    /// Strategy producing points that land in the domain reasonably often
    /// and stress the boundary region.
    fn arb_point() -> impl Strategy<Value = PhasePoint> {
        let coord = -3.0..3.0f64;
        let ball = -1.0..1.0f64;
        (
            [coord.clone(), coord.clone(), coord],
            [ball.clone(), ball.clone(), ball.clone()],
            [ball.clone(), ball.clone(), ball],
        )
            .prop_map(|(q, k, p)| pt(q, k, p))
    }

    proptest! {
        #[test]
        fn exchange_symmetry_is_bitwise(point in arb_point()) {
            let mapped = PhasePoint::new(-point.q, point.p, point.k);
            prop_assert_eq!(kernel_comm(&point).to_bits(), kernel_comm(&mapped).to_bits());
            prop_assert_eq!(kernel_r(&point).to_bits(), kernel_r(&mapped).to_bits());
            prop_assert_eq!(
                kernel_avg(&point, 0.7).to_bits(),
                kernel_avg(&mapped, 0.7).to_bits()
            );
        }

        #[test]
        fn zero_tau_reduces_to_commutative(point in arb_point()) {
            let th0 = theta([0.0, 0.0, 1.0], 0.0);
            prop_assert_eq!(kernel_avg(&point, 0.0).to_bits(), kernel_comm(&point).to_bits());
            prop_assert_eq!(kernel_cos(&point, &th0).to_bits(), kernel_comm(&point).to_bits());
        }

        #[test]
        fn averaged_kernel_is_bounded_by_commutative(point in arb_point(), tau in 0.0..50.0f64) {
            let kc = kernel_comm(&point);
            prop_assert!(kernel_avg(&point, tau).abs() <= kc);
            prop_assert!(kernel_r(&point) >= 0.0);
        }

        #[test]
        fn equal_holes_give_undeformed_kernel(point in arb_point(), tau in 0.0..50.0f64) {
            let eq = PhasePoint::new(point.q, point.k, point.k);
            let th = theta([0.0, 0.0, 1.0], tau);
            prop_assert_eq!(kernel_avg(&eq, tau).to_bits(), kernel_comm(&eq).to_bits());
            prop_assert_eq!(kernel_cos(&eq, &th).to_bits(), kernel_comm(&eq).to_bits());
        }
    }

    #[test]
    fn denominator_positive_on_fuzzed_domain_points() {
        // Cheap xorshift fuzz; statistical positivity check over 1e6
        // in-domain points.
        let mut state = 0x243f_6a88_85a3_08d3u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut found = 0u32;
        while found < 1_000_000 {
            let point = pt(
                [6.0 * next() - 3.0, 6.0 * next() - 3.0, 6.0 * next() - 3.0],
                [2.0 * next() - 1.0, 2.0 * next() - 1.0, 2.0 * next() - 1.0],
                [2.0 * next() - 1.0, 2.0 * next() - 1.0, 2.0 * next() - 1.0],
            );
            if in_domain(&point) {
                found += 1;
                assert!(energy_denominator(&point).unwrap() > 0.0);
            }
        }
    }
}
