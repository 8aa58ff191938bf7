//! Bogoliubov-de Gennes excitations of a dark soliton at rest in a box of
//! length `2 ell` with periodic boundary conditions: phonon modes with
//! quantized wavenumbers, the phase and displacement (Goldstone) zero modes
//! with their adjoint partners, and Gaussian quantum states of the
//! displacement mode.
//!
//! The closed-form mode functions assume `kappa ell >> 1` (soliton well
//! inside the box); exponentially small finite-box corrections to the
//! normalizations are neglected, which bounds how small box sizes may get.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::numerics::{find_root_bracketed, RootError};
use crate::units::{INTERACTION_GN, KAPPA_AT_REST, MC_SQUARED, SOUND_SPEED};

#[derive(Debug, Error)]
pub enum BdgError {
    #[error("box half-length must be at least 5 healing lengths, got {0}")]
    BoxTooSmall(f64),
    #[error("soliton at q = {q} sits too close to the edge of the box of half-length {ell}")]
    SolitonNearEdge { q: f64, ell: f64 },
    #[error("at least one phonon pair is required")]
    NoModes,
    #[error("wavenumber bracket failed for pair {pair} on ({lo}, {hi}): {source}")]
    Bracket { pair: usize, lo: f64, hi: f64, source: RootError },
    #[error("quantization residual {residual} for pair {pair} exceeds 1e-10")]
    QuantizationResidual { pair: usize, residual: f64 },
    #[error("zero-mode state parameter must be positive, got {0}")]
    NonPositiveStateParameter(f64),
    #[error("mismatched parameter records: {0}")]
    Mismatch(String),
}

/// Background configuration shared by all mode families: a soliton at rest
/// (`theta = 0`, real order parameter) at position `q` in a box
/// `[-ell, ell]` with background density `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolitonBox {
    pub n: f64,
    pub half_length: f64,
    pub q: f64,
}

impl SolitonBox {
    pub fn new(n: f64, half_length: f64, q: f64) -> Result<Self, BdgError> {
        if half_length < 5.0 {
            return Err(BdgError::BoxTooSmall(half_length));
        }
        if q.abs() + 3.0 > half_length {
            return Err(BdgError::SolitonNearEdge { q, ell: half_length });
        }
        Ok(Self { n, half_length, q })
    }

    pub fn kappa(&self) -> f64 {
        KAPPA_AT_REST
    }

    /// Real order parameter `sqrt(n) tanh[kappa (x - q)]`.
    pub fn phi(&self, x: f64) -> f64 {
        self.n.sqrt() * (self.kappa() * (x - self.q)).tanh()
    }

    /// Condensate atom number `N0 = 2 ell n - 2 n / kappa`; the negative
    /// correction counts the atoms displaced from the notch.
    pub fn n0(&self) -> f64 {
        2.0 * self.half_length * self.n - 2.0 * self.n / self.kappa()
    }

    pub(crate) fn close_to(&self, other: &Self) -> bool {
        (self.n - other.n).abs() <= 1e-12 * self.n.abs()
            && (self.half_length - other.half_length).abs() <= 1e-12 * self.half_length
            && (self.q - other.q).abs() <= 1e-12 * self.half_length
    }
}

/// Bogoliubov dispersion on the background,
/// `E = c |k| sqrt(1 + k^2/(4 kappa^2))` (identical to the homogeneous gas).
pub fn phonon_energy(k: f64) -> f64 {
    SOUND_SPEED * k.abs() * (1.0 + k * k / (4.0 * KAPPA_AT_REST * KAPPA_AT_REST)).sqrt()
}

/// Phase shift a phonon picks up crossing the density notch.
fn notch_phase_shift(k: f64) -> f64 {
    2.0 * (2.0 * KAPPA_AT_REST / k).atan()
}

/// Quantized phonon modes `j = +/-1 ..= +/-pairs` for a soliton in a box.
#[derive(Debug, Clone)]
pub struct PhononModeSet {
    background: SolitonBox,
    wavenumbers: Vec<f64>,
    energies: Vec<f64>,
    norms: Vec<f64>,
}

/// Solve the wavenumber quantization `2 k ell + 2 arctan(2 kappa/k) = 2 pi j`
/// for the first `pairs` positive roots; negative-j partners follow by
/// symmetry (`k_{-j} = -k_j`, `j = 0` excluded).
///
/// The left-hand side is strictly increasing in `k` and crosses `2 pi j`
/// exactly once in `((j-1) pi/ell, j pi/ell)`, which brackets every root.
pub fn solve_wavenumbers(background: &SolitonBox, pairs: usize) -> Result<PhononModeSet, BdgError> {
    if pairs == 0 {
        return Err(BdgError::NoModes);
    }
    let ell = background.half_length;
    let mut wavenumbers = Vec::with_capacity(pairs);
    let mut energies = Vec::with_capacity(pairs);
    let mut norms = Vec::with_capacity(pairs);
    for j in 1..=pairs {
        let target = 2.0 * std::f64::consts::PI * j as f64;
        let lo = ((j - 1) as f64 * std::f64::consts::PI / ell).max(1e-12);
        let hi = j as f64 * std::f64::consts::PI / ell;
        let k = find_root_bracketed(
            |k| 2.0 * k * ell + notch_phase_shift(k) - target,
            lo,
            hi,
            1e-15,
        )
        .map_err(|source| BdgError::Bracket { pair: j, lo, hi, source })?;
        let residual = (2.0 * k * ell + notch_phase_shift(k) - target).abs();
        if residual > 1e-10 {
            return Err(BdgError::QuantizationResidual { pair: j, residual });
        }
        let energy = phonon_energy(k);
        wavenumbers.push(k);
        energies.push(energy);
        norms.push(mode_norm(k, energy, ell));
    }
    Ok(PhononModeSet { background: *background, wavenumbers, energies, norms })
}

/// Closed-form normalization constant of the box modes.
fn mode_norm(k: f64, energy: f64, ell: f64) -> f64 {
    let kappa = KAPPA_AT_REST;
    let bracket = ell * kappa * (k * k / (2.0 * kappa * kappa) + 2.0) - 1.0;
    (kappa / (2.0 * k.abs())) * (kappa * INTERACTION_GN / (2.0 * energy)).sqrt() / bracket.sqrt()
}

impl PhononModeSet {
    pub fn background(&self) -> &SolitonBox {
        &self.background
    }

    pub fn pair_count(&self) -> usize {
        self.wavenumbers.len()
    }

    /// Positive wavenumber of pair `j` (1-based).
    pub fn wavenumber(&self, j: usize) -> f64 {
        self.wavenumbers[j - 1]
    }

    pub fn energy(&self, j: usize) -> f64 {
        self.energies[j - 1]
    }

    pub fn norm(&self, j: usize) -> f64 {
        self.norms[j - 1]
    }

    /// Residual of the quantization condition for pair `j`.
    pub fn quantization_residual(&self, j: usize) -> f64 {
        let k = self.wavenumber(j);
        (2.0 * k * self.background.half_length + notch_phase_shift(k)
            - 2.0 * std::f64::consts::PI * j as f64)
            .abs()
    }

    /// Mode functions `(u_j(x), v_j(x))`, `j` in `+/-1 ..= +/-pairs`:
    /// `M_k e^{ikx} { (k/kappa) sech^2 + beta_k^{+/-} (k/(2 kappa) + i tanh) }`
    /// with `beta_k^{+/-} = (k/kappa)^2 +/- 2 E_k/(m c^2)`, upper sign for u.
    pub fn eval(&self, j: i64, x: f64) -> (Complex64, Complex64) {
        assert!(j != 0, "j = 0 is excluded by the quantization condition");
        let idx = (j.unsigned_abs() as usize) - 1;
        let k = self.wavenumbers[idx] * j.signum() as f64;
        let m = self.norms[idx];
        let energy = self.energies[idx];
        let kappa = self.background.kappa();
        let t = (kappa * (x - self.background.q)).tanh();
        let sech2 = 1.0 - t * t;
        let phase = Complex64::from_polar(m, k * x);
        let envelope = Complex64::new(k / (2.0 * kappa), t);
        let common = k / kappa * sech2;
        let beta = (k / kappa) * (k / kappa);
        let shift = 2.0 * energy / MC_SQUARED;
        let u = phase * (common + (beta + shift) * envelope);
        let v = phase * (common + (beta - shift) * envelope);
        (u, v)
    }

    /// Same mode spectrum with the soliton moved to `q` (the quantization
    /// condition does not depend on the position while the soliton stays
    /// well inside the box).
    pub fn with_position(&self, q: f64) -> Result<Self, BdgError> {
        let background = SolitonBox::new(self.background.n, self.background.half_length, q)?;
        Ok(Self { background, ..self.clone() })
    }
}

/// Goldstone families of the broken symmetries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GoldstoneFamily {
    /// Global U(1) phase of the condensate.
    Phase,
    /// Soliton displacement.
    Displacement,
}

/// The four functions attached to a zero mode: `(u, v, u_ad, v_ad)` with
/// `v = -u*` and `v_ad = +u_ad*`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroModeFunctions {
    pub u: Complex64,
    pub v: Complex64,
    pub u_ad: Complex64,
    pub v_ad: Complex64,
}

/// Zero (Goldstone) modes and adjoint partners for the soliton box, in the
/// `theta = 0` convention (real order parameter).
///
/// A caveat worth knowing: the displacement family decouples from the
/// closed-form phonons up to exponentially small box corrections, but the
/// phase family does not (`Phi` is anti-periodic over the box while the
/// phonons are periodic), so `<phonon|u_theta>` overlaps stay finite. The
/// density and correlation kernels built on these modes inherit that
/// approximation from the closed forms themselves.
#[derive(Debug, Clone, Copy)]
pub struct ZeroModes {
    background: SolitonBox,
}

impl ZeroModes {
    pub fn new(background: &SolitonBox) -> Self {
        Self { background: *background }
    }

    pub fn background(&self) -> &SolitonBox {
        &self.background
    }

    /// `u_theta = Phi` (real by convention).
    pub fn u_phase(&self, x: f64) -> Complex64 {
        Complex64::new(self.background.phi(x), 0.0)
    }

    /// `u_q = -i kappa sqrt(n) sech^2[kappa (x - q)]` (purely imaginary).
    pub fn u_displacement(&self, x: f64) -> Complex64 {
        Complex64::new(0.0, -self.displacement_magnitude(x))
    }

    /// `|u_q(x)| = kappa sqrt(n) sech^2`, handy for real-arithmetic kernels.
    pub fn displacement_magnitude(&self, x: f64) -> f64 {
        let kappa = self.background.kappa();
        let t = (kappa * (x - self.background.q)).tanh();
        kappa * self.background.n.sqrt() * (1.0 - t * t)
    }

    /// Adjoint of the phase mode,
    /// `u_theta_ad = kappa/(2 (N0 kappa + n)) [Phi + i (x - q) u_q]`,
    /// which is real: `i u_q` is real.
    pub fn u_phase_adjoint(&self, x: f64) -> Complex64 {
        Complex64::new(self.phase_adjoint_magnitude(x), 0.0)
    }

    pub fn phase_adjoint_magnitude(&self, x: f64) -> f64 {
        let b = &self.background;
        let kappa = b.kappa();
        kappa / (2.0 * (b.n0() * kappa + b.n))
            * (b.phi(x) + (x - b.q) * self.displacement_magnitude(x))
    }

    /// Adjoint of the displacement mode, the constant `-i / (4 sqrt(n))`.
    pub fn u_displacement_adjoint(&self) -> Complex64 {
        Complex64::new(0.0, -self.displacement_adjoint_magnitude())
    }

    pub fn displacement_adjoint_magnitude(&self) -> f64 {
        1.0 / (4.0 * self.background.n.sqrt())
    }

    /// All four functions of one family at `x`.
    pub fn eval(&self, family: GoldstoneFamily, x: f64) -> ZeroModeFunctions {
        let (u, u_ad) = match family {
            GoldstoneFamily::Phase => (self.u_phase(x), self.u_phase_adjoint(x)),
            GoldstoneFamily::Displacement => {
                (self.u_displacement(x), self.u_displacement_adjoint())
            }
        };
        ZeroModeFunctions { u, v: -u.conj(), u_ad, v_ad: u_ad.conj() }
    }
}

/// Evaluate the zero-mode quadruple of one Goldstone family at `x`.
pub fn zero_modes(modes: &ZeroModes, family: GoldstoneFamily, x: f64) -> ZeroModeFunctions {
    modes.eval(family, x)
}

/// Class of Gaussian state assigned to the displacement mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ZeroModeKind {
    /// Squeezed state; `zeta = 1` is the notch-pinning ground state.
    Squeezed { zeta: f64 },
    /// Maximum-entropy state at fixed mean pinning energy, parametrized by
    /// a density-like `tau`. (The displacement mode has a negative
    /// effective mass, so a phonon-style thermal occupation is not
    /// available; this state plays that role instead.)
    Thermal { tau: f64 },
}

/// Effective mass of the displacement mode, `m_q = -4 m n / kappa`;
/// negative, which is why the mode cannot thermalize. Exposed as metadata
/// only.
pub fn displacement_effective_mass(background: &SolitonBox) -> f64 {
    -4.0 * background.n / background.kappa()
}

/// Second moments of the Goldstone-mode operators.
///
/// The phase mode is fixed by the coherent-state assumption for the
/// condensate: `<P_theta^2> = N0`, `<Q_theta^2> = 1/(4 N0)`. The
/// displacement-mode quadratures come from the squeezed or thermal
/// parametrization; mixed moments vanish, `<{P, Q}> = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroModeState {
    pub kind: ZeroModeKind,
    pub p2_displacement: f64,
    pub q2_displacement: f64,
    pub p2_phase: f64,
    pub q2_phase: f64,
    pub pq_sym: f64,
    /// Mean of the pinning form `h = P^2/(16 n) + n kappa^2 Q^2 - kappa/4`.
    pub h_mean: f64,
    background: SolitonBox,
}

/// Build the displacement-mode state on a given background.
pub fn zero_mode_state(
    kind: ZeroModeKind,
    background: &SolitonBox,
) -> Result<ZeroModeState, BdgError> {
    let n = background.n;
    let kappa = background.kappa();
    let n0 = background.n0();
    let (p2, q2, h_mean) = match kind {
        ZeroModeKind::Squeezed { zeta } => {
            if !(zeta.is_finite() && zeta > 0.0) {
                return Err(BdgError::NonPositiveStateParameter(zeta));
            }
            (
                2.0 * n * kappa / zeta,
                zeta / (8.0 * n * kappa),
                kappa / 8.0 * (1.0 / zeta + zeta - 2.0),
            )
        }
        ZeroModeKind::Thermal { tau } => {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(BdgError::NonPositiveStateParameter(tau));
            }
            let coth = 1.0 / (kappa / (4.0 * tau)).tanh();
            (
                2.0 * n * kappa * coth,
                coth / (8.0 * n * kappa),
                0.5 * kappa / ((kappa / (2.0 * tau)).exp() - 1.0),
            )
        }
    };
    Ok(ZeroModeState {
        kind,
        p2_displacement: p2,
        q2_displacement: q2,
        p2_phase: n0,
        q2_phase: 1.0 / (4.0 * n0),
        pq_sym: 0.0,
        h_mean,
        background: *background,
    })
}

impl ZeroModeState {
    pub fn background(&self) -> &SolitonBox {
        &self.background
    }

    /// Uncertainty product of the displacement quadratures (>= 1/4).
    pub fn uncertainty_product(&self) -> f64 {
        self.p2_displacement * self.q2_displacement
    }

    pub fn matches(&self, other: &SolitonBox) -> bool {
        self.background.close_to(other)
    }
}

/// Truncated completeness kernel: the phonon sum
/// `sum_k [u_k(x) u_k*(y) - v_k*(x) v_k(y)]` plus the zero-mode sum
/// `sum_alpha [u_alpha(x) u_alpha_ad*(y) - v_alpha_ad(x) v_alpha*(y)]`,
/// which approaches `delta(x - y)` as the phonon count grows. For `x != y`
/// the returned value is the truncation residual; pass `None` for the
/// zero modes to see the non-decaying defect their omission leaves
/// behind.
pub fn completeness_kernel(
    modes: &PhononModeSet,
    zero: Option<&ZeroModes>,
    x: f64,
    y: f64,
) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for j in 1..=modes.pair_count() {
        for sign in [1i64, -1] {
            let (ux, vx) = modes.eval(sign * j as i64, x);
            let (uy, vy) = modes.eval(sign * j as i64, y);
            acc += ux * uy.conj() - vx.conj() * vy;
        }
    }
    if let Some(zm) = zero {
        for family in [GoldstoneFamily::Phase, GoldstoneFamily::Displacement] {
            let fx = zm.eval(family, x);
            let fy = zm.eval(family, y);
            acc += fx.u * fy.u_ad.conj() - fx.v_ad * fy.v.conj();
        }
    }
    acc
}

/// Bogoliubov inner product `integral [a_u* b_u - a_v* b_v] dx` over the
/// box, by composite Gauss quadrature resolving the highest wavenumber.
pub fn bogoliubov_overlap(
    background: &SolitonBox,
    max_wavenumber: f64,
    a: impl Fn(f64) -> (Complex64, Complex64),
    b: impl Fn(f64) -> (Complex64, Complex64),
) -> Complex64 {
    let ell = background.half_length;
    let h = (1.0 / max_wavenumber.abs().max(0.5)).min(0.5);
    let panels = (2.0 * ell / h).ceil() as usize;
    let rule = crate::numerics::gauss_legendre(8);
    let width = 2.0 * ell / panels as f64;
    let mut acc = Complex64::ZERO;
    for p in 0..panels {
        let start = -ell + p as f64 * width;
        let mid = start + 0.5 * width;
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let x = mid + 0.5 * width * t;
            let (au, av) = a(x);
            let (bu, bv) = b(x);
            acc += (au.conj() * bu - av.conj() * bv) * (w * 0.5 * width);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn standard_box() -> SolitonBox {
        SolitonBox::new(100.0, 10.0, 0.0).unwrap()
    }

    #[test]
    fn wavenumbers_match_reference_values() {
        let modes = solve_wavenumbers(&standard_box(), 3).unwrap();
        let unit = std::f64::consts::PI / 10.0;
        let expected = [0.5379, 1.6093, 2.6704];
        for (j, want) in expected.iter().enumerate() {
            let got = modes.wavenumber(j + 1) / unit;
            assert!((got - want).abs() < 5e-4, "pair {}: {got} vs {want}", j + 1);
            assert!(modes.quantization_residual(j + 1) <= 1e-10);
        }
    }

    #[test]
    fn wavenumbers_increase_and_limit_behavior() {
        let bx = SolitonBox::new(100.0, 400.0, 0.0).unwrap();
        let modes = solve_wavenumbers(&bx, 6).unwrap();
        let unit = std::f64::consts::PI / 400.0;
        let mut prev = 0.0;
        for j in 1..=6 {
            let k = modes.wavenumber(j);
            assert!(k > prev);
            prev = k;
            // k_j sits within one free spacing below j pi/ell, pushed down
            // by the notch phase shift.
            let scaled = k / unit;
            assert!(scaled < j as f64 && scaled > j as f64 - 1.0, "j={j}: {scaled}");
        }
        // ell -> inf at fixed j: the phase shift tends to pi and
        // k_j -> (j - 1/2) pi / ell.
        assert!((modes.wavenumber(1) / unit - 0.5).abs() < 0.01);
        // High modes barely feel the notch: free-particle spacing j pi/ell.
        let small = solve_wavenumbers(&standard_box(), 70).unwrap();
        let scaled = small.wavenumber(70) / (std::f64::consts::PI / 10.0);
        assert!((scaled / 70.0 - 1.0).abs() < 1e-3, "{scaled}");
    }

    #[test]
    fn energy_matches_homogeneous_dispersion() {
        let kappa = KAPPA_AT_REST;
        assert_relative_eq!(phonon_energy(kappa), 0.559_016_994_374_947_4, max_relative = 1e-12);
        let modes = solve_wavenumbers(&standard_box(), 4).unwrap();
        for j in 1..=4 {
            assert_relative_eq!(
                modes.energy(j),
                phonon_energy(modes.wavenumber(j)),
                max_relative = 1e-14
            );
            assert!(modes.energy(j) > 0.0);
        }
    }

    #[test]
    fn modes_are_orthonormal_in_large_box() {
        // Finite-box corrections to the closed-form normalization decay as
        // exp(-2 kappa ell); at ell = 20 they are ~1e-12 and the overlap is
        // quadrature-limited.
        let bx = SolitonBox::new(100.0, 20.0, 0.0).unwrap();
        let modes = solve_wavenumbers(&bx, 5).unwrap();
        let kmax = modes.wavenumber(5);
        for j in 1..=5i64 {
            for p in 1..=5i64 {
                for (js, ps) in [(j, p), (-j, p), (j, -p), (-j, -p)] {
                    let overlap = bogoliubov_overlap(
                        &bx,
                        kmax,
                        |x| modes.eval(js, x),
                        |x| modes.eval(ps, x),
                    );
                    let expect = if js == ps { 1.0 } else { 0.0 };
                    assert!((overlap - expect).norm() < 1e-8, "({js},{ps}): {overlap}");
                }
            }
        }
    }

    #[test]
    fn finite_box_orthonormality_defect_is_small() {
        // At ell = 10 the neglected corrections show up at the 1e-7 level.
        let bx = standard_box();
        let modes = solve_wavenumbers(&bx, 3).unwrap();
        let kmax = modes.wavenumber(3);
        for j in 1..=3i64 {
            let overlap =
                bogoliubov_overlap(&bx, kmax, |x| modes.eval(j, x), |x| modes.eval(j, x));
            assert!((overlap - 1.0).norm() < 1e-6, "pair {j}: {overlap}");
        }
    }

    #[test]
    fn mode_value_at_notch_is_real() {
        // At x = q = 0 the tanh factor and the plane-wave phase both
        // vanish, so u and v are real there.
        let modes = solve_wavenumbers(&standard_box(), 3).unwrap();
        for j in 1..=3 {
            let (u, v) = modes.eval(j, 0.0);
            assert!(u.im.abs() < 1e-14 && v.im.abs() < 1e-14, "pair {j}");
        }
    }

    #[test]
    fn negative_index_modes_are_conjugate_partners() {
        let modes = solve_wavenumbers(&standard_box(), 2).unwrap();
        for x in [-3.2, 0.4, 5.9] {
            // The literal mode formula is odd under k -> -k on top of
            // conjugation; the overall sign is a phase convention that
            // drops out of every bilinear.
            let (u, v) = modes.eval(2, x);
            let (um, vm) = modes.eval(-2, x);
            assert_relative_eq!((um + u.conj()).norm(), 0.0, epsilon = 1e-12);
            assert_relative_eq!((vm + v.conj()).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_modes_have_zero_norm_and_unit_duality() {
        let bx = SolitonBox::new(100.0, 20.0, 0.0).unwrap();
        let zm = ZeroModes::new(&bx);
        let kmax = 2.0;
        for family in [GoldstoneFamily::Phase, GoldstoneFamily::Displacement] {
            // Zero Bogoliubov norm pointwise: |v| = |u| by construction.
            let f = zm.eval(family, 1.3);
            assert_relative_eq!(f.u.norm(), f.v.norm(), max_relative = 1e-14);
            let norm = bogoliubov_overlap(
                &bx,
                kmax,
                |x| {
                    let f = zm.eval(family, x);
                    (f.u, f.v)
                },
                |x| {
                    let f = zm.eval(family, x);
                    (f.u, f.v)
                },
            );
            assert!(norm.norm() < 1e-10, "{family:?}: {norm}");
        }
        // Duality matrix <ad_a | b> = delta_ab.
        let families = [GoldstoneFamily::Phase, GoldstoneFamily::Displacement];
        for (i, fa) in families.iter().enumerate() {
            for (jj, fb) in families.iter().enumerate() {
                let d = bogoliubov_overlap(
                    &bx,
                    kmax,
                    |x| {
                        let f = zm.eval(*fa, x);
                        (f.u_ad, f.v_ad)
                    },
                    |x| {
                        let f = zm.eval(*fb, x);
                        (f.u, f.v)
                    },
                );
                let expect = if i == jj { 1.0 } else { 0.0 };
                assert!((d - expect).norm() < 1e-8, "({fa:?},{fb:?}): {d}");
            }
        }
    }

    #[test]
    fn phase_adjoint_is_real_everywhere() {
        let zm = ZeroModes::new(&standard_box());
        for x in [-7.0, -0.3, 0.0, 2.4, 9.9] {
            assert_eq!(zm.u_phase_adjoint(x).im, 0.0);
        }
    }

    #[test]
    fn phonons_are_orthogonal_to_displacement_family() {
        // The displacement mode and its adjoint decouple from the phonons
        // up to exponentially small box corrections. The phase family does
        // not (anti-periodic Phi vs periodic phonons); see the ZeroModes
        // docs.
        let bx = SolitonBox::new(100.0, 20.0, 0.0).unwrap();
        let modes = solve_wavenumbers(&bx, 3).unwrap();
        let zm = ZeroModes::new(&bx);
        let kmax = modes.wavenumber(3);
        for j in [1i64, -1, 2, 3] {
            let against_mode = bogoliubov_overlap(
                &bx,
                kmax,
                |x| modes.eval(j, x),
                |x| {
                    let f = zm.eval(GoldstoneFamily::Displacement, x);
                    (f.u, f.v)
                },
            );
            assert!(against_mode.norm() < 1e-7, "mode {j}: {against_mode}");
            let against_adjoint = bogoliubov_overlap(
                &bx,
                kmax,
                |x| modes.eval(j, x),
                |x| {
                    let f = zm.eval(GoldstoneFamily::Displacement, x);
                    (f.u_ad, f.v_ad)
                },
            );
            assert!(against_adjoint.norm() < 1e-7, "adjoint {j}: {against_adjoint}");
        }
    }

    #[test]
    fn squeezed_state_quadratures() {
        let bx = standard_box();
        let ground = zero_mode_state(ZeroModeKind::Squeezed { zeta: 1.0 }, &bx).unwrap();
        assert_relative_eq!(ground.h_mean, 0.0, epsilon = 1e-15);
        assert_relative_eq!(ground.uncertainty_product(), 0.25, max_relative = 1e-14);
        assert_relative_eq!(ground.p2_phase, bx.n0(), max_relative = 1e-14);
        assert_relative_eq!(ground.q2_phase, 0.25 / bx.n0(), max_relative = 1e-14);

        let squeezed = zero_mode_state(ZeroModeKind::Squeezed { zeta: 100.0 }, &bx).unwrap();
        let kappa = bx.kappa();
        assert_relative_eq!(squeezed.h_mean, kappa / 8.0 * 98.01, max_relative = 1e-12);
        assert!(squeezed.uncertainty_product() >= 0.25);
    }

    #[test]
    fn thermal_state_reduces_to_ground_state_at_low_tau() {
        let bx = standard_box();
        let cold = zero_mode_state(ZeroModeKind::Thermal { tau: 1e-3 }, &bx).unwrap();
        let ground = zero_mode_state(ZeroModeKind::Squeezed { zeta: 1.0 }, &bx).unwrap();
        assert_relative_eq!(cold.p2_displacement, ground.p2_displacement, max_relative = 1e-12);
        assert_relative_eq!(cold.q2_displacement, ground.q2_displacement, max_relative = 1e-12);
        let warm = zero_mode_state(ZeroModeKind::Thermal { tau: 5.0 }, &bx).unwrap();
        let coth = 1.0 / (bx.kappa() / 20.0).tanh();
        assert_relative_eq!(warm.uncertainty_product(), 0.25 * coth * coth, max_relative = 1e-12);
        assert!(warm.uncertainty_product() > 0.25);
    }

    #[test]
    fn state_rejects_nonpositive_parameters() {
        let bx = standard_box();
        assert!(zero_mode_state(ZeroModeKind::Squeezed { zeta: 0.0 }, &bx).is_err());
        assert!(zero_mode_state(ZeroModeKind::Thermal { tau: -1.0 }, &bx).is_err());
    }

    /// Kernel smeared over windows of half-width `w` around both points.
    /// The double integral factorizes into per-mode 1D window integrals.
    /// Pointwise the truncated kernel oscillates with a non-decaying
    /// envelope (like any band-limited delta); the smeared value is what
    /// pixel integrals see and is the meaningful convergence diagnostic.
    fn smeared_kernel(
        bx: &SolitonBox,
        pairs: usize,
        with_zm: bool,
        x: f64,
        y: f64,
        w: f64,
    ) -> f64 {
        use crate::numerics::composite_gauss;
        let modes = solve_wavenumbers(bx, pairs).unwrap();
        let kmax = modes.wavenumber(pairs);
        let panels = (2.0 * w * kmax).ceil().max(8.0) as usize;
        let window = |f: &dyn Fn(f64) -> Complex64, c: f64| -> Complex64 {
            let re = composite_gauss(|t| f(t).re, c - w, c + w, panels, 8);
            let im = composite_gauss(|t| f(t).im, c - w, c + w, panels, 8);
            Complex64::new(re, im)
        };
        let mut acc = Complex64::ZERO;
        for j in 1..=pairs as i64 {
            for s in [j, -j] {
                let iux = window(&|t| modes.eval(s, t).0, x);
                let ivx = window(&|t| modes.eval(s, t).1, x);
                let iuy = window(&|t| modes.eval(s, t).0, y);
                let ivy = window(&|t| modes.eval(s, t).1, y);
                acc += iux * iuy.conj() - ivx.conj() * ivy;
            }
        }
        if with_zm {
            let zm = ZeroModes::new(bx);
            for family in [GoldstoneFamily::Phase, GoldstoneFamily::Displacement] {
                let iux = window(&|t| zm.eval(family, t).u, x);
                let iuy = window(&|t| zm.eval(family, t).u, y);
                let iax = window(&|t| zm.eval(family, t).u_ad, x);
                let iay = window(&|t| zm.eval(family, t).u_ad, y);
                // u(x) u_ad*(y) - v_ad(x) v*(y) = u(x) u_ad*(y) + u_ad*(x) u(y)
                acc += iux * iay.conj() + iax.conj() * iuy;
            }
        }
        acc.norm() / (4.0 * w * w)
    }

    #[test]
    fn completeness_residual_converges_under_smearing() {
        let bx = standard_box();
        let zm = ZeroModes::new(&bx);
        let (x, y) = (2.5, -2.5);
        // Pointwise diagnostic at 140 modes: far below the background
        // density scale.
        let modes = solve_wavenumbers(&bx, 70).unwrap();
        let pointwise = completeness_kernel(&modes, Some(&zm), x, y).norm();
        assert!(pointwise < 0.05 * bx.n, "pointwise residual {pointwise}");
        // Smeared residual settles (Cauchy differences shrink) onto a
        // small floor set by the kappa*ell >> 1 approximations behind the
        // closed-form modes.
        let s20 = smeared_kernel(&bx, 20, true, x, y, 0.35);
        let s40 = smeared_kernel(&bx, 40, true, x, y, 0.35);
        let s70 = smeared_kernel(&bx, 70, true, x, y, 0.35);
        assert!((s70 - s40).abs() < (s40 - s20).abs(), "{s20} {s40} {s70}");
        assert!(s70 < 1e-3 * bx.n, "floor {s70}");
    }

    #[test]
    fn omitting_zero_modes_leaves_residual_near_notch() {
        let bx = standard_box();
        let (x, y) = (0.35, -0.85);
        // The phonon-only sum stalls at the weight the Goldstone sector
        // carries near the notch; including the zero modes removes it.
        let with_zm = smeared_kernel(&bx, 70, true, x, y, 0.35);
        let without_40 = smeared_kernel(&bx, 40, false, x, y, 0.35);
        let without_70 = smeared_kernel(&bx, 70, false, x, y, 0.35);
        assert!(with_zm < 0.05 * without_70, "{with_zm} vs {without_70}");
        assert!(without_70 > 0.9 * without_40, "non-decaying: {without_40} -> {without_70}");
    }

    #[test]
    fn completeness_kernel_is_hermitian() {
        let bx = standard_box();
        let zm = ZeroModes::new(&bx);
        let modes = solve_wavenumbers(&bx, 25).unwrap();
        let a = completeness_kernel(&modes, Some(&zm), 1.2, -0.7);
        let b = completeness_kernel(&modes, Some(&zm), -0.7, 1.2);
        assert!((a - b.conj()).norm() < 1e-10 * a.norm().max(1.0));
    }

    #[test]
    fn box_validation() {
        assert!(matches!(SolitonBox::new(100.0, 4.0, 0.0), Err(BdgError::BoxTooSmall(_))));
        assert!(matches!(
            SolitonBox::new(100.0, 10.0, 8.5),
            Err(BdgError::SolitonNearEdge { .. })
        ));
        assert!(matches!(solve_wavenumbers(&standard_box(), 0), Err(BdgError::NoModes)));
    }

    #[test]
    fn condensate_number_counts_missing_atoms() {
        let bx = standard_box();
        use crate::numerics::adaptive_quad;
        let direct = adaptive_quad(|x| bx.phi(x) * bx.phi(x), -10.0, 10.0, 1e-11).unwrap();
        assert_relative_eq!(direct.value, bx.n0(), max_relative = 1e-6);
    }

    #[test]
    fn effective_mass_is_negative() {
        assert!(displacement_effective_mass(&standard_box()) < 0.0);
    }
}
