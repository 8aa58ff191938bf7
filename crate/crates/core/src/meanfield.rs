//! Fisher information of density images under single-mode Poisson counting
//! statistics.
//!
//! The continuum limit of infinitely small pixels gives
//! `F(q) = 4 integral dx [d|Phi(x;q)|/dq]^2`; for finite pixels the Poisson
//! pixel sum `F = sum_s (d rho_s/dq)^2 / rho_s` applies, optionally with the
//! Gaussian-statistics correction `1/2 sum_s (d rho_s/dq / rho_s)^2`.

use serde_json::json;
use thiserror::Error;

use crate::grid::{GridError, PixelGrid};
use crate::numerics::{adaptive_quad, gauss_legendre, QuadError};
use crate::profiles::{DarkSolitonParams, OrderParameter, TrappedSolitonParams};
use crate::report::{FisherReport, ReportError, StatModel};

#[derive(Debug, Error)]
pub enum FisherError {
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("pixel {index} has non-positive mean count {mean}")]
    NonPositivePixelMean { index: i64, mean: f64 },
    #[error("Thomas-Fermi approximation requires R_TF >= 10 xi0, got R_TF = {0} xi0")]
    TrapTooNarrow(f64),
}

/// Detection window must reach this many healing lengths past the
/// excitation before the continuum quadrature is trusted without warning.
const WINDOW_MARGIN: f64 = 10.0;

/// Fisher information by adaptive quadrature of `4 [d|Phi|/dq]^2` over the
/// detection window (over the plane for the vortex).
pub fn fisher_poisson_continuum(
    profile: &OrderParameter,
    window: &PixelGrid,
    quad_tol: f64,
) -> Result<FisherReport, FisherError> {
    let q = profile.position();
    let mut warnings = Vec::new();
    if profile.dimension() == 1 && !window.covers(q, WINDOW_MARGIN) {
        warnings.push(format!(
            "window [{:.3}, {:.3}] does not cover {WINDOW_MARGIN} healing lengths on both sides of q = {q}",
            -window.half_length(),
            window.half_length()
        ));
    }

    let value = match profile {
        OrderParameter::Vortex(v) => {
            // Polar coordinates around the core; the phi integral uses a
            // fixed rule (the integrand is a trigonometric polynomial), the
            // radial integral is adaptive with an analytic tail bound
            // 4/R^4 used to pick the cutoff.
            let radius = (40.0 / quad_tol.max(1e-14)).powf(0.25).clamp(20.0, 2000.0);
            let rule = gauss_legendre(16);
            let vort = *v;
            let result = adaptive_quad(
                move |r| {
                    let ring = rule.integrate(0.0, 2.0 * std::f64::consts::PI, |phi| {
                        let x = vort.q + r * phi.cos();
                        let y = r * phi.sin();
                        let d = vort.dabs_dq_areal(x, y);
                        d * d
                    });
                    4.0 * r * ring
                },
                0.0,
                radius,
                quad_tol,
            )?;
            result.value
        }
        _ => {
            let half = window.half_length().max(WINDOW_MARGIN + q.abs());
            let prof = *profile;
            let result = adaptive_quad(
                move |x| {
                    let d = prof.dabs_dq(x);
                    4.0 * d * d
                },
                q - half,
                q + half,
                quad_tol,
            )?;
            result.value
        }
    };

    let mut report = FisherReport::new(
        value,
        StatModel::PoissonContinuum,
        json!({ "profile": profile, "quad_tol": quad_tol }),
    )?;
    report.warnings = warnings;
    Ok(report)
}

/// Closed-form Fisher information for the dark soliton, independent of `q`.
///
/// At rest this reduces to `F = 16 n / (3 sqrt(2) xi)`; the value vanishes
/// as the velocity approaches the sound speed and the dip flattens out.
pub fn fisher_dark_soliton_closed(params: &DarkSolitonParams) -> Result<FisherReport, FisherError> {
    let s = params.v_over_c;
    let n = params.n;
    let kappa = params.kappa();
    let bulk = 8.0 * n / 3.0 * (2.0 + s * s) * kappa;
    let arctan_part = if s > 0.0 {
        let root = (1.0 - s * s).sqrt(); // = sqrt(2) xi kappa(v)
        let a1 = ((s - 1.0 / (2.0 * s)) / root).atan();
        let a2 = (s / root).atan();
        4.0 * n * std::f64::consts::SQRT_2 * s * (a1 - a2)
    } else {
        0.0
    };
    Ok(FisherReport::new(
        bulk + arctan_part,
        StatModel::ClosedForm,
        json!({ "profile": params }),
    )?)
}

/// Closed pixel integrals for the dark soliton: the squared difference of
/// sech^2 at the pixel edges and the mean count of the pixel.
fn pixel_terms(params: &DarkSolitonParams, left: f64, right: f64, q: f64) -> (f64, f64) {
    let kappa = params.kappa();
    let s2 = params.v_over_c * params.v_over_c;
    let tl = (kappa * (left - q)).tanh();
    let tr = (kappa * (right - q)).tanh();
    let sech2_l = 1.0 - tl * tl;
    let sech2_r = 1.0 - tr * tr;
    let g = (sech2_r - sech2_l) * (sech2_r - sech2_l);
    let rho = params.n * (right - left) - params.n * (1.0 - s2) / kappa * (tr - tl);
    (g, rho)
}

/// Pixelized Poisson/Gaussian Fisher information for a dark soliton.
#[derive(Debug, Clone)]
pub struct PixelizedFisher {
    pub report: FisherReport,
    /// Pure-Poisson part `sum_s (d rho_s/dq)^2 / rho_s`.
    pub first_sum: f64,
    /// Gaussian-statistics correction `1/2 sum_s (d rho_s/dq)^2 / rho_s^2`.
    /// Diverges for shrinking pixels once mean counts drop below one.
    pub gaussian_correction: f64,
    /// Pixels with mean count below one, where the Gaussian term is
    /// untrustworthy.
    pub low_count_pixels: usize,
}

/// Fisher information of the pixelized image under Poisson statistics plus
/// the Gaussian correction term, using the closed pixel integrals.
pub fn fisher_pixelized_poisson(
    params: &DarkSolitonParams,
    grid: &PixelGrid,
    q: f64,
) -> Result<PixelizedFisher, FisherError> {
    let s2 = params.v_over_c * params.v_over_c;
    let prefactor = params.n * params.n * (1.0 - s2) * (1.0 - s2);
    let mut first = 0.0;
    let mut second = 0.0;
    let mut low_count = 0;
    for s in grid.indices() {
        let (g, rho) = pixel_terms(params, grid.left_edge(s), grid.right_edge(s), q);
        if rho <= 0.0 {
            return Err(FisherError::NonPositivePixelMean { index: s, mean: rho });
        }
        if rho < 1.0 {
            low_count += 1;
        }
        first += g / rho;
        second += g / (rho * rho);
    }
    let first_sum = prefactor * first;
    let gaussian_correction = 0.5 * prefactor * second;
    let mut report = FisherReport::new(
        first_sum + gaussian_correction,
        StatModel::PoissonPixel,
        json!({ "profile": params, "q": q, "dx": grid.dx(), "pixels": grid.count() }),
    )?
    .with_extra("first_sum", first_sum)
    .with_extra("gaussian_correction", gaussian_correction);
    if low_count > 0 {
        report.warnings.push(format!(
            "{low_count} pixels have mean count < 1; the Gaussian correction term is unreliable there"
        ));
    }
    Ok(PixelizedFisher { report, first_sum, gaussian_correction, low_count_pixels: low_count })
}

/// Pixelized Poisson Fisher information for a soliton confined to a box of
/// length `2 ell`.
#[derive(Debug, Clone)]
pub struct BoxFisher {
    pub report: FisherReport,
    /// The step-function-restricted Poisson sum before the finite-size
    /// density enhancement.
    pub restricted_sum: f64,
    /// Ratio of the box background density to the mean density `N/(2 ell)`.
    pub enhancement: f64,
    pub background_density: f64,
}

/// Fisher information in a box: only pixels whose left edge satisfies
/// `|x_s| <= ell` contribute.
///
/// `params.n` is interpreted as the mean density `N / (2 ell)` held by the
/// box. The atoms displaced from the notch raise the background above the
/// mean, `n_bg = n / (1 - (1 - v^2/c^2)/(kappa ell))`, a finite-size
/// enhancement that fades as `ell` grows; the limit `ell -> infinity`
/// recovers the homogeneous Poisson sum.
pub fn fisher_box(
    params: &DarkSolitonParams,
    grid: &PixelGrid,
    box_half_length: f64,
) -> Result<BoxFisher, FisherError> {
    let mut warnings = Vec::new();
    if params.q.abs() + 5.0 >= box_half_length {
        warnings.push(format!(
            "soliton at q = {} is within 5 healing lengths of the box edge {box_half_length}",
            params.q
        ));
    }
    let s2 = params.v_over_c * params.v_over_c;
    let missing_per_atom = (1.0 - s2) / params.kappa(); // missing atoms / (2 n_bg)
    let enhancement = 1.0 / (1.0 - missing_per_atom / box_half_length);
    let background_density = params.n * enhancement;

    let prefactor = params.n * params.n * (1.0 - s2) * (1.0 - s2);
    let mut first = 0.0;
    for s in grid.indices() {
        if grid.left_edge(s).abs() > box_half_length {
            continue;
        }
        let (g, rho) = pixel_terms(params, grid.left_edge(s), grid.right_edge(s), params.q);
        if rho <= 0.0 {
            return Err(FisherError::NonPositivePixelMean { index: s, mean: rho });
        }
        first += g / rho;
    }
    let restricted_sum = prefactor * first;
    let mut report = FisherReport::new(
        enhancement * restricted_sum,
        StatModel::PoissonPixel,
        json!({
            "profile": params,
            "dx": grid.dx(),
            "box_half_length": box_half_length,
        }),
    )?
    .with_extra("restricted_sum", restricted_sum)
    .with_extra("enhancement", enhancement)
    .with_extra("background_density", background_density);
    report.warnings = warnings;
    Ok(BoxFisher { report, restricted_sum, enhancement, background_density })
}

/// Shot-noise coefficient of the trapped-soliton information expressed
/// through the total atom number and trap length, `F ~ 14.1 N0 / a_x^2`.
/// Assumes the Thomas-Fermi relation between `n0`, `N0` and `a_x`; carried
/// as a documented constant, not recomputed.
pub const TRAP_SHOT_NOISE_COEFFICIENT: f64 = 14.1;

/// Information ratio between a homogeneous sample and a harmonically
/// trapped one of the same size and atom number. Assumes the Thomas-Fermi
/// density profile with corrections of order `xi/R_TF` neglected; carried
/// as a documented constant, not recomputed.
pub const HOMOGENEOUS_TO_TRAP_RATIO: f64 = 0.11;

/// Local-density closed form for a soliton at rest near the trap center:
/// `F = 16 n0 / (3 sqrt(2) xi0)`.
pub fn fisher_trapped(params: &TrappedSolitonParams) -> Result<FisherReport, FisherError> {
    let ratio = params.r_tf / params.xi0;
    if ratio < 10.0 {
        return Err(FisherError::TrapTooNarrow(ratio));
    }
    let value = 16.0 / (3.0 * std::f64::consts::SQRT_2) * params.n0 / params.xi0;
    let mut report = FisherReport::new(value, StatModel::ClosedForm, json!({ "profile": params }))?
        .with_extra("trap_shot_noise_coefficient", TRAP_SHOT_NOISE_COEFFICIENT)
        .with_extra("homogeneous_to_trap_ratio", HOMOGENEOUS_TO_TRAP_RATIO);
    if params.q.abs() > 0.1 * params.r_tf {
        report.warnings.push(format!(
            "local-density form assumes q near the trap center; q = {} vs R_TF = {}",
            params.q, params.r_tf
        ));
    }
    Ok(report)
}
