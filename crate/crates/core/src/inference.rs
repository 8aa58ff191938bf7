//! Fisher information of Gaussian images, gain-filter construction and
//! signal-to-noise analysis.
//!
//! For a multivariate Gaussian likelihood with mean `rho(q)` and covariance
//! `P(q)` the Fisher information is
//!
//! `F = 1/2 { d2 det P / det P - (d det P / det P)^2
//!            + sum_sj [ (d2 P^-1)_sj P_sj + 2 (P^-1)_sj drho_s drho_j ] }`.
//!
//! The determinant terms collapse to `1/2 d2 log det P`, evaluated through
//! log-determinant differences for scale stability. Derivatives of `P^-1`
//! are assembled analytically from stencil derivatives of `P`
//! (`-P^-1 P' P^-1` and friends) rather than by differencing an inverse.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::grid::PixelGrid;
use crate::imagestats::{ImageStatistics, StatsError, StatsModel};
use crate::profiles::OrderParameter;
use crate::report::{FisherReport, ReportError, StatModel};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("covariance is ill-conditioned: condition number {0:.3e} exceeds 1e12")]
    IllConditioned(f64),
    #[error("covariance factorization failed even after regularization")]
    FactorizationFailed,
    #[error("finite-difference step {0} must be positive")]
    BadStep(f64),
    #[error("gain and statistics have mismatched pixel counts: {gain} vs {stats}")]
    LengthMismatch { gain: usize, stats: usize },
    #[error("noise split requires Bogoliubov statistics with retained components")]
    MissingComponents,
    #[error("estimator calibration has zero slope")]
    ZeroSlope,
}

/// Per-pixel weights of a linear filter `S = sum_s g_s rho_s dx`.
#[derive(Debug, Clone, Serialize)]
pub struct GainFunction {
    pub grid: PixelGrid,
    pub values: Vec<f64>,
    /// Normalization convention tag; gains are reported with max-abs = 1
    /// unless stated otherwise.
    pub normalization: &'static str,
}

impl GainFunction {
    /// Rescale so the largest magnitude entry is one.
    pub fn normalized_max_abs(grid: &PixelGrid, mut values: Vec<f64>) -> Self {
        let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max > 0.0 {
            for v in &mut values {
                *v /= max;
            }
        }
        Self { grid: grid.clone(), values, normalization: "max-abs-1" }
    }

    pub fn raw(grid: &PixelGrid, values: Vec<f64>) -> Self {
        Self { grid: grid.clone(), values, normalization: "raw" }
    }
}

/// Additive decomposition of the filtered-signal variance:
/// `total = meanfield + phonon - goldstone`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NoiseSplit {
    pub total: f64,
    pub meanfield: f64,
    pub phonon: f64,
    pub goldstone: f64,
}

/// Fisher information of a Gaussian image family, with the individual
/// terms retained for diagnostics.
#[derive(Debug, Clone)]
pub struct GaussianFisher {
    pub report: FisherReport,
    /// `drho . P^-1 drho`, the part a linear filter can reach.
    pub quadratic_term: f64,
    /// `1/2 d2 log det P`.
    pub logdet_term: f64,
    /// `1/2 Tr[(d2 P^-1) P]`.
    pub trace_term: f64,
    pub condition_number: f64,
    /// Central-difference mean derivative at the evaluation point.
    pub drho_dq: Vec<f64>,
    /// Relative change of F when the step is halved.
    pub fd_shift: f64,
}

fn cholesky_logdet(matrix: &DMatrix<f64>) -> Option<f64> {
    let chol = Cholesky::new(matrix.clone())?;
    Some(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

fn condition_number(matrix: &DMatrix<f64>) -> f64 {
    let eigs = matrix.clone().symmetric_eigen().eigenvalues;
    let max = eigs.iter().fold(f64::MIN, |m, &v| m.max(v.abs()));
    let min = eigs.iter().fold(f64::MAX, |m, &v| m.min(v.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

struct StencilData {
    center: ImageStatistics,
    cov0: DMatrix<f64>,
    dcov: DMatrix<f64>,
    d2cov: DMatrix<f64>,
    drho: DVector<f64>,
    logdets: [f64; 3],
}

fn stencil<F>(family: &F, q: f64, h: f64) -> Result<StencilData, InferenceError>
where
    F: Fn(f64) -> Result<ImageStatistics, StatsError>,
{
    let minus = family(q - h)?;
    let center = family(q)?;
    let plus = family(q + h)?;
    let cov_m = minus.regularized_cov();
    let cov0 = center.regularized_cov();
    let cov_p = plus.regularized_cov();
    let dcov = (&cov_p - &cov_m) / (2.0 * h);
    let d2cov = (&cov_p - 2.0 * &cov0 + &cov_m) / (h * h);
    let drho = DVector::from_iterator(
        center.rho_bar.len(),
        plus.rho_bar.iter().zip(&minus.rho_bar).map(|(p, m)| (p - m) / (2.0 * h)),
    );
    let logdets = [
        cholesky_logdet(&cov_m).ok_or(InferenceError::FactorizationFailed)?,
        cholesky_logdet(&cov0).ok_or(InferenceError::FactorizationFailed)?,
        cholesky_logdet(&cov_p).ok_or(InferenceError::FactorizationFailed)?,
    ];
    Ok(StencilData { center, cov0, dcov, d2cov, drho, logdets })
}

fn fisher_from_stencil(data: &StencilData, h: f64) -> Result<(f64, f64, f64, f64), InferenceError> {
    let cond = condition_number(&data.cov0);
    if cond > 1e12 {
        return Err(InferenceError::IllConditioned(cond));
    }
    let chol = Cholesky::new(data.cov0.clone()).ok_or(InferenceError::FactorizationFailed)?;
    let inv = chol.inverse();

    let logdet_term = 0.5 * (data.logdets[2] - 2.0 * data.logdets[1] + data.logdets[0]) / (h * h);

    // (P^-1)'' = -P^-1 P'' P^-1 + 2 P^-1 P' P^-1 P' P^-1.
    let inv_d = &inv * &data.dcov * &inv;
    let d2inv = -(&inv * &data.d2cov * &inv) + 2.0 * (&inv_d * &data.dcov * &inv);
    let trace_term = 0.5 * (&d2inv * &data.cov0).trace();

    let quadratic = (&inv * &data.drho).dot(&data.drho);
    Ok((logdet_term, trace_term, quadratic, cond))
}

/// Fisher information of a `q`-parametrized family of Gaussian image
/// statistics, by 3-point central stencils of the mean and covariance.
///
/// The step-halving consistency check is always performed; a relative
/// shift above 1% is recorded as a warning on the report.
pub fn gaussian_fisher<F>(
    family: F,
    q: f64,
    fd_step: f64,
) -> Result<GaussianFisher, InferenceError>
where
    F: Fn(f64) -> Result<ImageStatistics, StatsError>,
{
    if !(fd_step.is_finite() && fd_step > 0.0) {
        return Err(InferenceError::BadStep(fd_step));
    }
    let coarse = stencil(&family, q, fd_step)?;
    let (logdet_term, trace_term, quadratic, cond) = fisher_from_stencil(&coarse, fd_step)?;
    let fisher = logdet_term + trace_term + quadratic;

    let fine = stencil(&family, q, 0.5 * fd_step)?;
    let (l2, t2, q2, _) = fisher_from_stencil(&fine, 0.5 * fd_step)?;
    let refined = l2 + t2 + q2;
    let fd_shift = (refined - fisher).abs() / fisher.abs().max(f64::MIN_POSITIVE);

    let mut report = FisherReport::new(
        fisher,
        StatModel::GaussianPixel,
        json!({
            "q": q,
            "fd_step": fd_step,
            "model": coarse.center.model,
            "dx": coarse.center.grid.dx(),
            "pixels": coarse.center.grid.count(),
        }),
    )?
    .with_extra("quadratic_term", quadratic)
    .with_extra("logdet_term", logdet_term)
    .with_extra("trace_term", trace_term)
    .with_extra("condition_number", cond)
    .with_extra("fd_shift", fd_shift);
    if fd_shift > 0.01 {
        report
            .warnings
            .push(format!("halving fd_step changes F by {:.2}% (> 1%)", 100.0 * fd_shift));
    }
    for w in &coarse.center.warnings {
        report.warnings.push(w.clone());
    }
    Ok(GaussianFisher {
        report,
        quadratic_term: quadratic,
        logdet_term,
        trace_term,
        condition_number: cond,
        drho_dq: coarse.drho.iter().copied().collect(),
        fd_shift,
    })
}

/// Matched filter for uncorrelated Poisson pixels,
/// `g_opt(x) = alpha (d|Phi|/dq) / |Phi|` sampled at pixel centers and
/// normalized to max-abs one.
///
/// For the resting kink the pointwise ratio diverges at the notch; a pixel
/// whose center sits within machine precision of it falls back to the
/// pixel-averaged ratio `d(rho_s)/dq / (2 rho_s)`, which is always finite.
pub fn optimal_gain_meanfield(profile: &OrderParameter, grid: &PixelGrid) -> GainFunction {
    let mut values = Vec::with_capacity(grid.count());
    for s in grid.indices() {
        let x = grid.center(s);
        let amp = profile.abs_phi(x);
        let slope = profile.dabs_dq(x);
        let g = if amp > 1e-12 * slope.abs().max(1.0) {
            slope / amp
        } else {
            // Pixel-averaged fallback for a center exactly on the notch.
            let rule = crate::numerics::gauss_legendre(16);
            let rho = rule.integrate(grid.left_edge(s), grid.right_edge(s), |t| {
                let a = profile.abs_phi(t);
                a * a
            });
            let drho = rule.integrate(grid.left_edge(s), grid.right_edge(s), |t| {
                2.0 * profile.abs_phi(t) * profile.dabs_dq(t)
            });
            drho / (2.0 * rho)
        };
        values.push(g);
    }
    GainFunction::normalized_max_abs(grid, values)
}

/// Result of the regularized linear solve for the almost-optimal gain.
#[derive(Debug, Clone)]
pub struct AlmostOptimalGain {
    /// Solution normalized to max-abs one (the usual reporting form).
    pub gain: GainFunction,
    /// Raw solution of `P g = drho`.
    pub raw: Vec<f64>,
    /// Relative residual `|P g - drho| / |drho|`.
    pub residual: f64,
    /// Ridge parameter, when the plain solve was too ill-conditioned.
    pub ridge: Option<f64>,
}

/// Almost-optimal gain from the linear system `P g = drho/dq`.
pub fn almost_optimal_gain(
    stats: &ImageStatistics,
    drho_dq: &[f64],
) -> Result<AlmostOptimalGain, InferenceError> {
    let m = stats.rho_bar.len();
    if drho_dq.len() != m {
        return Err(InferenceError::LengthMismatch { gain: drho_dq.len(), stats: m });
    }
    let rhs = DVector::from_column_slice(drho_dq);
    let cov = stats.regularized_cov();
    let rhs_norm = rhs.norm().max(f64::MIN_POSITIVE);

    let solve = |matrix: &DMatrix<f64>| -> Option<DVector<f64>> {
        Cholesky::new(matrix.clone()).map(|c| c.solve(&rhs))
    };

    let mut ridge = None;
    let mut solution = solve(&cov);
    if let Some(ref g) = solution {
        let residual = (&cov * g - &rhs).norm() / rhs_norm;
        if residual > 1e-10 {
            solution = None;
        }
    }
    if solution.is_none() {
        // Ridge fallback for covariances the plain factorization cannot
        // handle at the requested residual.
        let scale = cov.trace() / m as f64;
        let mut lambda = 1e-12 * scale;
        for _ in 0..12 {
            let reg = &cov + DMatrix::identity(m, m) * lambda;
            if let Some(g) = solve(&reg) {
                solution = Some(g);
                ridge = Some(lambda);
                break;
            }
            lambda *= 10.0;
        }
    }
    let g = solution.ok_or(InferenceError::FactorizationFailed)?;
    let residual = (&cov * &g - &rhs).norm() / rhs_norm;
    let raw: Vec<f64> = g.iter().copied().collect();
    Ok(AlmostOptimalGain {
        gain: GainFunction::normalized_max_abs(&stats.grid, raw.clone()),
        raw,
        residual,
        ridge,
    })
}

/// Signal slope, filtered-noise variance and the component split for a
/// gain applied to pixelized statistics.
#[derive(Debug, Clone, Serialize)]
pub struct SnrAnalysis {
    /// `d S_bar / dq = g . drho dx`.
    pub slope: f64,
    /// `Delta S^2 = g . P g dx^2`.
    pub variance: f64,
    pub split: NoiseSplit,
    /// `slope^2 / variance`, the information reachable with this filter;
    /// bounded by the Gaussian Fisher information.
    pub snr_information: f64,
}

fn quadratic_form(matrix: &DMatrix<f64>, g: &DVector<f64>) -> f64 {
    (matrix * g).dot(g)
}

/// Evaluate the linear-filter signal slope and noise on image statistics,
/// splitting the noise into mean-field, phonon and Goldstone parts when
/// the statistics retain them (`total = meanfield + phonon - goldstone`).
pub fn snr_and_split(
    stats: &ImageStatistics,
    gain: &GainFunction,
    drho_dq: &[f64],
) -> Result<SnrAnalysis, InferenceError> {
    let m = stats.rho_bar.len();
    if gain.values.len() != m {
        return Err(InferenceError::LengthMismatch { gain: gain.values.len(), stats: m });
    }
    if drho_dq.len() != m {
        return Err(InferenceError::LengthMismatch { gain: drho_dq.len(), stats: m });
    }
    let dx = stats.grid.dx();
    let g = DVector::from_column_slice(&gain.values);
    let slope = g.dot(&DVector::from_column_slice(drho_dq)) * dx;
    let dx2 = dx * dx;
    let (variance, split) = match (&stats.model, &stats.components) {
        (StatsModel::Bogoliubov { .. }, Some(c)) => {
            let mf = quadratic_form(&c.meanfield, &g) * dx2;
            let ph = quadratic_form(&c.phonon, &g) * dx2;
            let gold = quadratic_form(&c.goldstone, &g) * dx2;
            let total = quadratic_form(&stats.cov, &g) * dx2;
            (total, NoiseSplit { total, meanfield: mf, phonon: ph, goldstone: gold })
        }
        (StatsModel::Bogoliubov { .. }, None) => return Err(InferenceError::MissingComponents),
        (StatsModel::MeanfieldPoisson, _) => {
            let total = quadratic_form(&stats.cov, &g) * dx2;
            (total, NoiseSplit { total, meanfield: total, phonon: 0.0, goldstone: 0.0 })
        }
    };
    let snr_information = if variance > 0.0 { slope * slope / variance } else { 0.0 };
    Ok(SnrAnalysis { slope, variance, split, snr_information })
}

/// Central-difference derivative of the pixel means of a statistics
/// family.
pub fn mean_count_derivative<F>(
    family: F,
    q: f64,
    fd_step: f64,
) -> Result<Vec<f64>, InferenceError>
where
    F: Fn(f64) -> Result<ImageStatistics, StatsError>,
{
    if !(fd_step.is_finite() && fd_step > 0.0) {
        return Err(InferenceError::BadStep(fd_step));
    }
    let plus = family(q + fd_step)?;
    let minus = family(q - fd_step)?;
    Ok(plus
        .rho_bar
        .iter()
        .zip(&minus.rho_bar)
        .map(|(p, m)| (p - m) / (2.0 * fd_step))
        .collect())
}
