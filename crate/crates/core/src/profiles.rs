//! Analytic order parameters and mean-field densities for the supported
//! excitation families, with exact derivatives with respect to the
//! excitation position `q`.
//!
//! All profiles are pure functions of immutable parameter records and can
//! be evaluated concurrently without synchronization.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::units::KAPPA_AT_REST;

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("background density must be positive, got {0}")]
    NonPositiveDensity(f64),
    #[error("velocity fraction v/c must satisfy 0 <= v/c {bound} got {value}")]
    InvalidVelocity { value: f64, bound: &'static str },
    #[error("only singly charged vortices are supported, got winding {0}")]
    InvalidWinding(i32),
    #[error("axial length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("healing length must be positive, got {0}")]
    NonPositiveHealingLength(f64),
    #[error("Thomas-Fermi radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("soliton position {q} lies outside the Thomas-Fermi radius {r_tf}")]
    PositionOutsideTrap { q: f64, r_tf: f64 },
}

/// Dark (kink) soliton on a homogeneous 1D background.
///
/// `Phi(x; q) = sqrt(n) * (i v/c + sqrt(1 - v^2/c^2) tanh[kappa(v) (x - q)])`
/// with `kappa(v) = sqrt(1 - v^2/c^2) / sqrt(2)` in internal units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DarkSolitonParams {
    pub n: f64,
    pub v_over_c: f64,
    pub q: f64,
}

impl DarkSolitonParams {
    pub fn new(n: f64, v_over_c: f64, q: f64) -> Result<Self, ProfileError> {
        if !(n.is_finite() && n > 0.0) {
            return Err(ProfileError::NonPositiveDensity(n));
        }
        if !(0.0..1.0).contains(&v_over_c) {
            return Err(ProfileError::InvalidVelocity { value: v_over_c, bound: "< 1;" });
        }
        Ok(Self { n, v_over_c, q })
    }

    /// Inverse kink width `kappa(v) = kappa(0) sqrt(1 - v^2/c^2)`.
    pub fn kappa(&self) -> f64 {
        KAPPA_AT_REST * (1.0 - self.v_over_c * self.v_over_c).sqrt()
    }

    /// Complex order parameter at `x`.
    pub fn amplitude(&self, x: f64) -> Complex64 {
        let s = self.v_over_c;
        let t = (self.kappa() * (x - self.q)).tanh();
        self.n.sqrt() * Complex64::new((1.0 - s * s).sqrt() * t, s)
    }

    /// `|Phi|^2`, the mean density.
    pub fn density(&self, x: f64) -> f64 {
        let s2 = self.v_over_c * self.v_over_c;
        let t = (self.kappa() * (x - self.q)).tanh();
        self.n * (s2 + (1.0 - s2) * t * t)
    }

    pub fn abs_phi(&self, x: f64) -> f64 {
        self.density(x).sqrt()
    }

    /// Analytic `d|Phi|/dq`.
    ///
    /// For the resting kink `|Phi|` has a corner at `x = q`; exactly at that
    /// point the right-branch slope `-sqrt(n) kappa` is returned. The value
    /// is odd about the soliton, so its square (the Fisher integrand) is
    /// even.
    pub fn dabs_dq(&self, x: f64) -> f64 {
        let s2 = self.v_over_c * self.v_over_c;
        let k = self.kappa();
        let t = (k * (x - self.q)).tanh();
        let sech2 = 1.0 - t * t;
        let norm = (s2 + (1.0 - s2) * t * t).sqrt();
        if norm < 1e-150 {
            return -self.n.sqrt() * k;
        }
        -self.n.sqrt() * (1.0 - s2) * k * t * sech2 / norm
    }

    /// Density and its position derivative `(|Phi|^2, d|Phi|/dq)`.
    pub fn density_dq(&self, x: f64) -> (f64, f64) {
        (self.density(x), self.dabs_dq(x))
    }

    /// Atoms displaced from the notch: `integral of (n - |Phi|^2) dx
    /// = 2 n (1 - v^2/c^2) / kappa(v)`.
    pub fn missing_atoms(&self) -> f64 {
        2.0 * self.n * (1.0 - self.v_over_c * self.v_over_c) / self.kappa()
    }

    pub fn with_position(&self, q: f64) -> Self {
        Self { q, ..*self }
    }
}

/// Soliton of the quintic (three-body) nonlinearity on a 1D background.
///
/// `|Phi|^2 = n f^2` with
/// `f^2 = 1 - 3 (1 - v^2/c^2) / (2 + sqrt(1 + 3 v^2/c^2) cosh[kp (x - q)])`
/// and `kp = 2 pi n sqrt(1 - v^2/c^2)`. The phase profile is not needed for
/// density observables and is not implemented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuinticSolitonParams {
    pub n: f64,
    pub v_over_c: f64,
    pub q: f64,
}

impl QuinticSolitonParams {
    pub fn new(n: f64, v_over_c: f64, q: f64) -> Result<Self, ProfileError> {
        if !(n.is_finite() && n > 0.0) {
            return Err(ProfileError::NonPositiveDensity(n));
        }
        // v/c = 1 is the degenerate flat profile; it is representable, but
        // information-rate evaluations reject it (no dip left to locate).
        if !(0.0..=1.0).contains(&v_over_c) {
            return Err(ProfileError::InvalidVelocity { value: v_over_c, bound: "<= 1;" });
        }
        Ok(Self { n, v_over_c, q })
    }

    /// Inverse soliton width `kp = 2 pi n sqrt(1 - v^2/c^2)`.
    pub fn kappa_prime(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.n * (1.0 - self.v_over_c * self.v_over_c).sqrt()
    }

    fn f_squared(&self, x: f64) -> f64 {
        let s2 = self.v_over_c * self.v_over_c;
        let c = (1.0 + 3.0 * s2).sqrt();
        let u = self.kappa_prime() * (x - self.q);
        1.0 - 3.0 * (1.0 - s2) / (2.0 + c * u.cosh())
    }

    pub fn density(&self, x: f64) -> f64 {
        self.n * self.f_squared(x)
    }

    pub fn abs_phi(&self, x: f64) -> f64 {
        self.density(x).max(0.0).sqrt()
    }

    /// Analytic `d|Phi|/dq`; at the notch of the resting soliton the
    /// right-branch slope `-sqrt(n) kp / sqrt(6)` is returned.
    pub fn dabs_dq(&self, x: f64) -> f64 {
        let s2 = self.v_over_c * self.v_over_c;
        let c = (1.0 + 3.0 * s2).sqrt();
        let kp = self.kappa_prime();
        let u = kp * (x - self.q);
        let denom = 2.0 + c * u.cosh();
        let f2 = 1.0 - 3.0 * (1.0 - s2) / denom;
        if f2 < 1e-280 {
            return -self.n.sqrt() * kp / 6.0f64.sqrt();
        }
        let df_dw = 3.0 * (1.0 - s2) * c * kp * u.sinh() / (2.0 * denom * denom * f2.sqrt());
        -self.n.sqrt() * df_dw
    }

    pub fn with_position(&self, q: f64) -> Self {
        Self { q, ..*self }
    }
}

/// Singly charged vortex line in a gas homogeneous in the plane and uniform
/// along `z` over a length `L`.
///
/// The core profile is `f^2 = r^2 / (2 xi^2 + r^2)` with
/// `r^2 = (x - q)^2 + y^2`. Densities are treated per unit axial length:
/// the `1/L` in `|Phi|^2 = (n/L) f^2` cancels against the axial integral,
/// so the areal density is `n f^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VortexParams {
    pub n: f64,
    pub length: f64,
    pub q: f64,
    pub winding: i32,
}

impl VortexParams {
    pub fn new(n: f64, length: f64, q: f64, winding: i32) -> Result<Self, ProfileError> {
        if !(n.is_finite() && n > 0.0) {
            return Err(ProfileError::NonPositiveDensity(n));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(ProfileError::NonPositiveLength(length));
        }
        if winding.abs() != 1 {
            return Err(ProfileError::InvalidWinding(winding));
        }
        Ok(Self { n, length, q, winding })
    }

    pub fn f_squared(&self, x: f64, y: f64) -> f64 {
        let r2 = (x - self.q) * (x - self.q) + y * y;
        r2 / (2.0 + r2)
    }

    /// 3D density `(n/L) f^2` at any point on the line of sight.
    pub fn density(&self, x: f64, y: f64) -> f64 {
        self.n / self.length * self.f_squared(x, y)
    }

    /// Column (areal) density `n f^2` after the trivial axial integral.
    pub fn areal_density(&self, x: f64, y: f64) -> f64 {
        self.n * self.f_squared(x, y)
    }

    pub fn abs_phi_areal(&self, x: f64, y: f64) -> f64 {
        self.areal_density(x, y).sqrt()
    }

    /// `d sqrt(n f^2) / dq`; zero exactly at the core where the direction
    /// is undefined.
    pub fn dabs_dq_areal(&self, x: f64, y: f64) -> f64 {
        let wx = x - self.q;
        let r2 = wx * wx + y * y;
        if r2 == 0.0 {
            return 0.0;
        }
        let r = r2.sqrt();
        -self.n.sqrt() * 2.0 * wx / (r * (2.0 + r2).powf(1.5))
    }

    pub fn with_position(&self, q: f64) -> Self {
        Self { q, ..*self }
    }
}

/// Soliton at rest near the center of a harmonically trapped cloud in the
/// Thomas-Fermi regime.
///
/// `|Phi|^2 = n_bg(x) tanh^2[(x - q)/(sqrt(2) xi0)]` with the inverted
/// parabola `n_bg(x) = n0 (1 - x^2/R_TF^2)` clipped at zero. The local
/// healing length is taken as `xi0 = hbar / sqrt(2 m g n0)`, i.e. `xi0 = 1`
/// when lengths are quoted in units of the central healing length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrappedSolitonParams {
    pub n0: f64,
    pub xi0: f64,
    pub r_tf: f64,
    pub q: f64,
}

impl TrappedSolitonParams {
    pub fn new(n0: f64, xi0: f64, r_tf: f64, q: f64) -> Result<Self, ProfileError> {
        if !(n0.is_finite() && n0 > 0.0) {
            return Err(ProfileError::NonPositiveDensity(n0));
        }
        if !(xi0.is_finite() && xi0 > 0.0) {
            return Err(ProfileError::NonPositiveHealingLength(xi0));
        }
        if !(r_tf.is_finite() && r_tf > 0.0) {
            return Err(ProfileError::NonPositiveRadius(r_tf));
        }
        if q.abs() > r_tf {
            return Err(ProfileError::PositionOutsideTrap { q, r_tf });
        }
        Ok(Self { n0, xi0, r_tf, q })
    }

    /// Thomas-Fermi background density, clipped at zero outside `R_TF`.
    pub fn background_density(&self, x: f64) -> f64 {
        (self.n0 * (1.0 - x * x / (self.r_tf * self.r_tf))).max(0.0)
    }

    pub fn density(&self, x: f64) -> f64 {
        let u = (x - self.q) / (std::f64::consts::SQRT_2 * self.xi0);
        self.background_density(x) * u.tanh().powi(2)
    }

    pub fn abs_phi(&self, x: f64) -> f64 {
        self.density(x).sqrt()
    }

    pub fn dabs_dq(&self, x: f64) -> f64 {
        let scale = std::f64::consts::SQRT_2 * self.xi0;
        let u = (x - self.q) / scale;
        let t = u.tanh();
        let sech2 = 1.0 - t * t;
        let bg = self.background_density(x).sqrt();
        if t == 0.0 {
            return -bg * sech2 / scale;
        }
        -bg * sech2 * t.signum() / scale
    }

    pub fn with_position(&self, q: f64) -> Result<Self, ProfileError> {
        Self::new(self.n0, self.xi0, self.r_tf, q)
    }
}

/// Any of the supported parametrized profiles, for generic dispatch in the
/// quadrature-based information-rate evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum OrderParameter {
    DarkSoliton(DarkSolitonParams),
    Quintic(QuinticSolitonParams),
    Trapped(TrappedSolitonParams),
    Vortex(VortexParams),
}

impl OrderParameter {
    /// Spatial dimension of the density image (1 for line profiles, 2 for
    /// the vortex plane).
    pub fn dimension(&self) -> usize {
        match self {
            OrderParameter::Vortex(_) => 2,
            _ => 1,
        }
    }

    pub fn position(&self) -> f64 {
        match self {
            OrderParameter::DarkSoliton(p) => p.q,
            OrderParameter::Quintic(p) => p.q,
            OrderParameter::Trapped(p) => p.q,
            OrderParameter::Vortex(p) => p.q,
        }
    }

    /// `|Phi|` for 1D families; panics for the vortex (see
    /// [`VortexParams::abs_phi_areal`]).
    pub fn abs_phi(&self, x: f64) -> f64 {
        match self {
            OrderParameter::DarkSoliton(p) => p.abs_phi(x),
            OrderParameter::Quintic(p) => p.abs_phi(x),
            OrderParameter::Trapped(p) => p.abs_phi(x),
            OrderParameter::Vortex(_) => panic!("vortex profile is two-dimensional"),
        }
    }

    /// `d|Phi|/dq` for 1D families; panics for the vortex.
    pub fn dabs_dq(&self, x: f64) -> f64 {
        match self {
            OrderParameter::DarkSoliton(p) => p.dabs_dq(x),
            OrderParameter::Quintic(p) => p.dabs_dq(x),
            OrderParameter::Trapped(p) => p.dabs_dq(x),
            OrderParameter::Vortex(_) => panic!("vortex profile is two-dimensional"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Central finite difference of |Phi|, the independent oracle for the
    /// analytic dq derivatives.
    fn fd_dabs<F: Fn(f64) -> f64>(abs_at_q: F, h: f64) -> f64 {
        (abs_at_q(h) - abs_at_q(-h)) / (2.0 * h)
    }

    #[test]
    fn kink_zero_at_center_and_background_far_away() {
        let p = DarkSolitonParams::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(p.amplitude(0.0).norm(), 0.0);
        assert_relative_eq!(p.density(50.0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(p.density(-50.0), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn moving_soliton_center_density() {
        // At the dip the tanh term vanishes and only the iv part remains.
        let p = DarkSolitonParams::new(1.0, 0.5, 0.0).unwrap();
        assert_relative_eq!(p.density(0.0), 0.25, max_relative = 1e-14);
    }

    #[test]
    fn dark_soliton_dq_matches_finite_difference() {
        let h = 1e-5;
        for v in [0.0, 0.3, 0.8] {
            for x in [-3.0, -0.7, 0.41, 2.2] {
                let p = DarkSolitonParams::new(100.0, v, 0.1).unwrap();
                let oracle = fd_dabs(|dq| p.with_position(0.1 + dq).abs_phi(x), h);
                assert_relative_eq!(p.dabs_dq(x), oracle, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn dark_soliton_kink_slope() {
        let p = DarkSolitonParams::new(1.0, 0.0, 0.0).unwrap();
        // Exactly at the notch: right-branch slope -sqrt(n)*kappa.
        assert_relative_eq!(p.dabs_dq(0.0), -p.kappa(), max_relative = 1e-14);
        // The magnitude is even about the notch (the derivative itself is
        // odd); this is what enters the information integrand squared.
        for a in [0.3, 1.1, 2.9] {
            assert_relative_eq!(p.dabs_dq(a).abs(), p.dabs_dq(-a).abs(), max_relative = 1e-13);
            assert_relative_eq!(p.dabs_dq(a), -p.dabs_dq(-a), max_relative = 1e-13);
        }
        // Flat background: derivative negligible ten healing lengths out
        // (sech^2 tail, ~2e-6 at 10 xi and below 1e-6 past 11 xi).
        assert!(p.dabs_dq(10.0).abs() < 1e-5);
        assert!(p.dabs_dq(11.0).abs() < 1e-6);
    }

    #[test]
    fn dark_soliton_phase_jump_is_pi_at_rest() {
        let p = DarkSolitonParams::new(2.0, 0.0, 0.0).unwrap();
        let jump = p.amplitude(1e3).arg() - p.amplitude(-1e3).arg();
        assert_relative_eq!(jump.abs(), std::f64::consts::PI, max_relative = 1e-12);
    }

    #[test]
    fn missing_atoms_match_quadrature() {
        use crate::numerics::adaptive_quad;
        for v in [0.0, 0.4] {
            let p = DarkSolitonParams::new(3.0, v, 0.0).unwrap();
            let notch = adaptive_quad(|x| p.n - p.density(x), -60.0, 60.0, 1e-10).unwrap();
            assert_relative_eq!(notch.value, p.missing_atoms(), max_relative = 1e-6);
        }
    }

    #[test]
    fn quintic_notch_background_and_sound_speed_limit() {
        let p = QuinticSolitonParams::new(1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(p.density(0.0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(p.density(5.0), 1.0, max_relative = 1e-9);
        let flat = QuinticSolitonParams::new(1.0, 1.0, 0.0).unwrap();
        for x in [-1.0, 0.0, 0.3] {
            assert_relative_eq!(flat.density(x), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn quintic_dq_matches_finite_difference() {
        let h = 1e-7;
        for v in [0.0, 0.5] {
            let p = QuinticSolitonParams::new(2.0, v, 0.0).unwrap();
            for x in [-0.21, 0.037, 0.4] {
                let oracle = fd_dabs(|dq| p.with_position(dq).abs_phi(x), h);
                assert_relative_eq!(p.dabs_dq(x), oracle, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn vortex_core_half_density_radius_and_background() {
        let p = VortexParams::new(7.0, 1.0, 0.5, 1).unwrap();
        assert_eq!(p.areal_density(0.5, 0.0), 0.0);
        let r = std::f64::consts::SQRT_2;
        assert_relative_eq!(p.f_squared(0.5 + r, 0.0), 0.5, max_relative = 1e-14);
        assert_relative_eq!(p.f_squared(0.5, r), 0.5, max_relative = 1e-14);
        assert_relative_eq!(p.f_squared(0.5 + 1e4, 0.0), 1.0, max_relative = 1e-7);
    }

    #[test]
    fn vortex_dq_matches_finite_difference() {
        let p = VortexParams::new(5.0, 2.0, 0.0, -1).unwrap();
        let h = 1e-5;
        for (x, y) in [(0.7, 0.2), (-1.1, 0.9), (0.0, 2.5)] {
            let oracle = fd_dabs(|dq| p.with_position(dq).abs_phi_areal(x, y), h);
            assert_relative_eq!(p.dabs_dq_areal(x, y), oracle, max_relative = 1e-8);
        }
    }

    #[test]
    fn vortex_rejects_higher_winding() {
        assert_eq!(
            VortexParams::new(1.0, 1.0, 0.0, 2).unwrap_err(),
            ProfileError::InvalidWinding(2)
        );
    }

    #[test]
    fn trapped_profile_notch_edges_and_value() {
        let p = TrappedSolitonParams::new(100.0, 1.0, 60.0, 0.0).unwrap();
        assert_eq!(p.density(0.0), 0.0);
        assert_eq!(p.density(60.0), 0.0);
        assert_eq!(p.density(-60.0), 0.0);
        assert_eq!(p.density(75.0), 0.0);
        let x = 30.0;
        let expect = 100.0 * 0.75 * (30.0 / std::f64::consts::SQRT_2).tanh().powi(2);
        assert_relative_eq!(p.density(x), expect, max_relative = 1e-13);
    }

    #[test]
    fn trapped_rejects_position_outside_radius() {
        assert!(matches!(
            TrappedSolitonParams::new(1.0, 1.0, 20.0, 25.0),
            Err(ProfileError::PositionOutsideTrap { .. })
        ));
    }

    #[test]
    fn trapped_dq_matches_finite_difference() {
        let p = TrappedSolitonParams::new(50.0, 1.0, 80.0, 2.0).unwrap();
        let h = 1e-5;
        for x in [1.0, 2.6, 40.0] {
            let oracle = fd_dabs(|dq| p.with_position(2.0 + dq).unwrap().abs_phi(x), h);
            assert_relative_eq!(p.dabs_dq(x), oracle, max_relative = 1e-8);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(DarkSolitonParams::new(0.0, 0.0, 0.0).is_err());
        assert!(DarkSolitonParams::new(1.0, 1.0, 0.0).is_err());
        assert!(DarkSolitonParams::new(1.0, -0.1, 0.0).is_err());
        assert!(QuinticSolitonParams::new(1.0, 1.2, 0.0).is_err());
        assert!(VortexParams::new(1.0, 0.0, 0.0, 1).is_err());
        assert!(TrappedSolitonParams::new(1.0, 0.0, 1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn densities_are_nonnegative(
            x in -30.0f64..30.0,
            v in 0.0f64..0.99,
            n in 0.1f64..500.0,
            q in -3.0f64..3.0,
        ) {
            let dark = DarkSolitonParams::new(n, v, q).unwrap();
            prop_assert!(dark.density(x) >= 0.0);
            let quintic = QuinticSolitonParams::new(n / 50.0, v, q).unwrap();
            prop_assert!(quintic.density(x) >= 0.0);
            let vortex = VortexParams::new(n, 1.0, q, 1).unwrap();
            prop_assert!(vortex.areal_density(x, 0.3) >= 0.0);
            let trapped = TrappedSolitonParams::new(n, 1.0, 50.0, q).unwrap();
            prop_assert!(trapped.density(x) >= 0.0);
        }
    }
}
