//! Monte Carlo image sampling and empirical verification that the linear
//! filters attain (or approach) the Cramér–Rao bound.
//!
//! Sampling is deterministic given a seed: draws are organized in
//! fixed-size chunks, each served by its own ChaCha12 stream, and chunk
//! results are reduced in order. Parallel execution therefore reproduces
//! the sequential byte stream exactly.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::imagestats::{ImageStatistics, StatsModel};
use crate::inference::GainFunction;

/// Generator recorded in experiment metadata for reproducibility.
pub const RNG_ALGORITHM: &str = "chacha12";

const CHUNK: usize = 4096;

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("pixel {index} has invalid Poisson mean {mean}")]
    BadPoissonMean { index: usize, mean: f64 },
    #[error("covariance factorization failed: negative eigenvalue {0} below tolerance")]
    FactorizationFailed(f64),
    #[error("estimator calibration has zero slope")]
    ZeroSlope,
    #[error("gain length {gain} does not match pixel count {pixels}")]
    LengthMismatch { gain: usize, pixels: usize },
}

/// One synthetic image: per-pixel counts (integers for the Poisson model;
/// reals, possibly negative, for the Gaussian model — retained rather than
/// truncated so the linear estimator stays exactly analyzable).
#[derive(Debug, Clone, Serialize)]
pub struct ImageSample {
    pub counts: Vec<f64>,
    pub q_true: f64,
}

enum Sampler {
    Poisson(Vec<Poisson<f64>>),
    /// Mean vector plus a symmetric factor `B` with `B B^T = P` from the
    /// eigendecomposition, eigenvalues floored at zero.
    Gaussian { mean: DVector<f64>, factor: DMatrix<f64> },
}

fn build_sampler(stats: &ImageStatistics) -> Result<Sampler, SimulateError> {
    match stats.model {
        StatsModel::MeanfieldPoisson => {
            let dists = stats
                .rho_bar
                .iter()
                .enumerate()
                .map(|(i, &m)| {
                    Poisson::new(m).map_err(|_| SimulateError::BadPoissonMean { index: i, mean: m })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Sampler::Poisson(dists))
        }
        StatsModel::Bogoliubov { .. } => {
            let eig = stats.regularized_cov().symmetric_eigen();
            let trace: f64 = eig.eigenvalues.iter().sum();
            let mut scaled = eig.eigenvectors.clone();
            for (c, &lambda) in eig.eigenvalues.iter().enumerate() {
                if lambda < -1e-9 * trace.abs() {
                    return Err(SimulateError::FactorizationFailed(lambda));
                }
                let s = lambda.max(0.0).sqrt();
                for r in 0..scaled.nrows() {
                    scaled[(r, c)] *= s;
                }
            }
            Ok(Sampler::Gaussian {
                mean: DVector::from_column_slice(&stats.rho_bar),
                factor: scaled,
            })
        }
    }
}

fn sample_chunk(sampler: &Sampler, q: f64, seed: u64, chunk_index: u64, len: usize) -> Vec<ImageSample> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(chunk_index + 1);
    let mut out = Vec::with_capacity(len);
    match sampler {
        Sampler::Poisson(dists) => {
            for _ in 0..len {
                let counts = dists.iter().map(|d| d.sample(&mut rng)).collect();
                out.push(ImageSample { counts, q_true: q });
            }
        }
        Sampler::Gaussian { mean, factor } => {
            let m = mean.len();
            for _ in 0..len {
                let z = DVector::from_iterator(
                    m,
                    (0..m).map(|_| StandardNormal.sample(&mut rng)),
                );
                let counts = (mean + factor * z).iter().copied().collect();
                out.push(ImageSample { counts, q_true: q });
            }
        }
    }
    out
}

/// Draw `count` images from the statistics: independent per-pixel Poisson
/// counts for the mean-field model, correlated multivariate normals (via a
/// symmetric eigen-factorization of the covariance) for the Bogoliubov
/// model. Deterministic for a fixed seed, independent of thread count.
pub fn sample_images(
    stats: &ImageStatistics,
    count: usize,
    seed: u64,
) -> Result<Vec<ImageSample>, SimulateError> {
    let sampler = build_sampler(stats)?;
    let chunks: Vec<(u64, usize)> = (0..count.div_ceil(CHUNK))
        .map(|c| (c as u64, CHUNK.min(count - c * CHUNK)))
        .collect();
    let mut all: Vec<Vec<ImageSample>> = chunks
        .par_iter()
        .map(|&(c, len)| sample_chunk(&sampler, stats.q, seed, c, len))
        .collect();
    let mut out = Vec::with_capacity(count);
    for chunk in all.iter_mut() {
        out.append(chunk);
    }
    Ok(out)
}

/// Calibration of the linear position estimator at the working point:
/// `q_hat = (S - s_bar0) / slope` with `S = sum_s g_s rho_s dx`.
#[derive(Debug, Clone, Serialize)]
pub struct EstimatorCalibration {
    pub slope: f64,
    pub s_bar0: f64,
    pub dx: f64,
    pub q0: f64,
}

impl EstimatorCalibration {
    /// Calibrate against the statistics the samples are drawn from:
    /// `slope = g . drho dx`, `s_bar0 = g . rho_bar dx`.
    pub fn new(
        stats: &ImageStatistics,
        gain: &GainFunction,
        drho_dq: &[f64],
    ) -> Result<Self, SimulateError> {
        let m = stats.rho_bar.len();
        if gain.values.len() != m || drho_dq.len() != m {
            return Err(SimulateError::LengthMismatch { gain: gain.values.len(), pixels: m });
        }
        let dx = stats.grid.dx();
        let slope: f64 = gain.values.iter().zip(drho_dq).map(|(g, d)| g * d).sum::<f64>() * dx;
        if slope == 0.0 || !slope.is_finite() {
            return Err(SimulateError::ZeroSlope);
        }
        let s_bar0: f64 =
            gain.values.iter().zip(&stats.rho_bar).map(|(g, r)| g * r).sum::<f64>() * dx;
        Ok(Self { slope, s_bar0, dx, q0: stats.q })
    }

    /// Filtered signal `S = sum_s g_s counts_s dx`.
    pub fn signal(&self, gain: &GainFunction, sample: &ImageSample) -> f64 {
        gain.values.iter().zip(&sample.counts).map(|(g, c)| g * c).sum::<f64>() * self.dx
    }
}

/// Position estimate from one image: `q0 + (S - s_bar0) / slope`.
pub fn estimate_position(
    sample: &ImageSample,
    gain: &GainFunction,
    calibration: &EstimatorCalibration,
) -> f64 {
    let s = calibration.signal(gain, sample);
    calibration.q0 + (s - calibration.s_bar0) / calibration.slope
}

/// Outcome of a Cramér–Rao verification run.
#[derive(Debug, Clone, Serialize)]
pub struct CrbExperiment {
    pub samples: usize,
    pub seed: u64,
    pub rng: &'static str,
    pub mean_estimate: f64,
    pub var_estimate: f64,
    pub fisher: f64,
    /// `Var(q_hat) * F`; equals one when the filter saturates the bound.
    pub ratio: f64,
    /// Monte Carlo standard error of the ratio, `sqrt(2/N) * ratio`.
    pub ratio_std_error: f64,
}

impl CrbExperiment {
    pub fn to_json(&self) -> Value {
        json!(self)
    }
}

/// Sample images, run the linear estimator on each, and compare the
/// empirical variance against a Fisher information value.
pub fn crb_experiment(
    stats: &ImageStatistics,
    gain: &GainFunction,
    drho_dq: &[f64],
    fisher: f64,
    samples: usize,
    seed: u64,
) -> Result<CrbExperiment, SimulateError> {
    let calibration = EstimatorCalibration::new(stats, gain, drho_dq)?;
    let images = sample_images(stats, samples, seed)?;
    let estimates: Vec<f64> =
        images.iter().map(|img| estimate_position(img, gain, &calibration)).collect();
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let var = estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0);
    let ratio = var * fisher;
    Ok(CrbExperiment {
        samples,
        seed,
        rng: RNG_ALGORITHM,
        mean_estimate: mean,
        var_estimate: var,
        fisher,
        ratio,
        ratio_std_error: (2.0 / n).sqrt() * ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdg::{solve_wavenumbers, zero_mode_state, SolitonBox, ZeroModeKind};
    use crate::grid::PixelGrid;
    use crate::imagestats::{
        build_image_statistics, build_poisson_statistics, FluctuationModel, StatsError,
        ThermalOccupation,
    };
    use crate::inference::{
        almost_optimal_gain, gaussian_fisher, mean_count_derivative, optimal_gain_meanfield,
    };
    use crate::meanfield::fisher_pixelized_poisson;
    use crate::profiles::{DarkSolitonParams, OrderParameter};
    use approx::assert_relative_eq;

    fn poisson_stats(grid: &PixelGrid) -> ImageStatistics {
        let p = DarkSolitonParams::new(100.0, 0.0, 0.0).unwrap();
        build_poisson_statistics(&p, grid).unwrap()
    }

    fn bogoliubov_family(
        grid: PixelGrid,
    ) -> impl Fn(f64) -> Result<ImageStatistics, StatsError> {
        move |q: f64| {
            let bx = SolitonBox::new(100.0, 10.0, q)?;
            let modes = solve_wavenumbers(&bx, 70)?;
            let state = zero_mode_state(ZeroModeKind::Squeezed { zeta: 1.0 }, &bx)?;
            let model =
                FluctuationModel::new(modes, state, ThermalOccupation::zero_temperature())?;
            build_image_statistics(&model, &grid)
        }
    }

    #[test]
    fn poisson_samples_are_nonnegative_integers() {
        let grid = PixelGrid::symmetric(0.5, 10.0).unwrap();
        let stats = poisson_stats(&grid);
        let images = sample_images(&stats, 200, 7).unwrap();
        for img in &images {
            for &c in &img.counts {
                assert!(c >= 0.0 && c.fract() == 0.0, "count {c}");
            }
        }
    }

    #[test]
    fn sample_mean_and_covariance_match_statistics() {
        let grid = PixelGrid::symmetric(1.0, 8.0).unwrap();
        let stats = poisson_stats(&grid);
        let n = 100_000;
        let images = sample_images(&stats, n, 12).unwrap();
        let m = stats.rho_bar.len();
        let mut mean = vec![0.0; m];
        for img in &images {
            for (acc, &c) in mean.iter_mut().zip(&img.counts) {
                *acc += c;
            }
        }
        for v in &mut mean {
            *v /= n as f64;
        }
        for (i, (&got, &want)) in mean.iter().zip(&stats.rho_bar).enumerate() {
            // Four standard errors of a Poisson mean.
            let se = (want / n as f64).sqrt();
            assert!((got - want).abs() < 4.0 * se, "pixel {i}: {got} vs {want}");
        }
        // Spot-check variances (diagonal covariance): five standard errors.
        for i in [0, m / 2, m - 1] {
            let mu = mean[i];
            let var = images.iter().map(|im| (im.counts[i] - mu).powi(2)).sum::<f64>()
                / (n as f64 - 1.0);
            let se = stats.cov[(i, i)] * (2.0 / n as f64).sqrt();
            assert!(
                (var - stats.cov[(i, i)]).abs() < 5.0 * se,
                "pixel {i}: {var} vs {}",
                stats.cov[(i, i)]
            );
        }
    }

    #[test]
    fn gaussian_samples_match_covariance() {
        let grid = PixelGrid::symmetric(0.7, 9.8).unwrap();
        let stats = bogoliubov_family(grid)(0.0).unwrap();
        let n = 60_000;
        let images = sample_images(&stats, n, 99).unwrap();
        let m = stats.rho_bar.len();
        let mut mean = vec![0.0; m];
        for img in &images {
            for (acc, &c) in mean.iter_mut().zip(&img.counts) {
                *acc += c;
            }
        }
        for v in &mut mean {
            *v /= n as f64;
        }
        // Entry-wise covariance check against the target on a probe set.
        for (i, j) in [(3, 3), (7, 7), (13, 14), (12, 16)] {
            let cij = images
                .iter()
                .map(|im| (im.counts[i] - mean[i]) * (im.counts[j] - mean[j]))
                .sum::<f64>()
                / (n as f64 - 1.0);
            let target = stats.cov[(i, j)];
            let se = ((stats.cov[(i, i)] * stats.cov[(j, j)] + target * target) / n as f64).sqrt();
            assert!((cij - target).abs() < 5.0 * se, "({i},{j}): {cij} vs {target}");
        }
    }

    #[test]
    fn fixed_seed_reproduces_samples_bitwise() {
        let grid = PixelGrid::symmetric(0.7, 9.8).unwrap();
        let stats = bogoliubov_family(grid.clone())(0.0).unwrap();
        let a = sample_images(&stats, 5000, 4242).unwrap();
        let b = sample_images(&stats, 5000, 4242).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.counts, y.counts);
        }
        let c = sample_images(&stats, 5000, 4243).unwrap();
        assert!(a.iter().zip(&c).any(|(x, y)| x.counts != y.counts));

        let p = poisson_stats(&grid);
        let a = sample_images(&p, 3000, 1).unwrap();
        let b = sample_images(&p, 3000, 1).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.counts, y.counts);
        }
    }

    #[test]
    fn estimator_is_unbiased_at_the_mean_and_linear() {
        let grid = PixelGrid::symmetric(0.5, 10.0).unwrap();
        let stats = poisson_stats(&grid);
        let p = DarkSolitonParams::new(100.0, 0.0, 0.0).unwrap();
        let gain = optimal_gain_meanfield(&OrderParameter::DarkSoliton(p), &grid);
        let family = |q: f64| {
            let p = DarkSolitonParams::new(100.0, 0.0, q).unwrap();
            build_poisson_statistics(&p, &grid)
        };
        let drho = mean_count_derivative(family, 0.0, 1e-3).unwrap();
        let cal = EstimatorCalibration::new(&stats, &gain, &drho).unwrap();

        // Exactly the mean image: estimate equals the true position.
        let mean_image = ImageSample { counts: stats.rho_bar.clone(), q_true: 0.0 };
        assert_relative_eq!(estimate_position(&mean_image, &gain, &cal), 0.0, epsilon = 1e-12);

        // Superposition of count perturbations acts linearly.
        let mut bumped = mean_image.clone();
        bumped.counts[10] += 2.0;
        bumped.counts[25] += 3.0;
        let single_a = {
            let mut s = mean_image.clone();
            s.counts[10] += 2.0;
            estimate_position(&s, &gain, &cal)
        };
        let single_b = {
            let mut s = mean_image.clone();
            s.counts[25] += 3.0;
            estimate_position(&s, &gain, &cal)
        };
        assert_relative_eq!(
            estimate_position(&bumped, &gain, &cal),
            single_a + single_b,
            max_relative = 1e-12
        );
    }

    #[test]
    fn matched_filter_saturates_poisson_bound() {
        // Fine pixels: the continuum-sampled matched filter is within a
        // fraction of a percent of the discrete optimum.
        let grid = PixelGrid::symmetric(0.125, 10.0).unwrap();
        let p = DarkSolitonParams::new(100.0, 0.0, 0.0).unwrap();
        let stats = build_poisson_statistics(&p, &grid).unwrap();
        let gain = optimal_gain_meanfield(&OrderParameter::DarkSoliton(p), &grid);
        let family = |q: f64| {
            let p = DarkSolitonParams::new(100.0, 0.0, q).unwrap();
            build_poisson_statistics(&p, &grid)
        };
        let drho = mean_count_derivative(family, 0.0, 1e-3).unwrap();
        let fisher = fisher_pixelized_poisson(&p, &grid, 0.0).unwrap().first_sum;
        let run = crb_experiment(&stats, &gain, &drho, fisher, 100_000, 2024).unwrap();
        assert!(
            (run.ratio - 1.0).abs() < 0.02,
            "Var(q) * F = {} +- {}",
            run.ratio,
            run.ratio_std_error
        );
    }

    #[test]
    fn almost_optimal_filter_approaches_gaussian_bound() {
        let grid = PixelGrid::symmetric(0.7, 9.8).unwrap();
        let family = bogoliubov_family(grid.clone());
        let stats = family(0.0).unwrap();
        let gauss = gaussian_fisher(&family, 0.0, 1e-3).unwrap();
        let ao = almost_optimal_gain(&stats, &gauss.drho_dq).unwrap();
        let run = crb_experiment(
            &stats,
            &ao.gain,
            &gauss.drho_dq,
            gauss.report.fisher,
            100_000,
            555,
        )
        .unwrap();
        assert!(
            run.ratio >= 1.0 - 3.0 * run.ratio_std_error && run.ratio <= 1.10,
            "Var(q) * F = {} +- {}",
            run.ratio,
            run.ratio_std_error
        );
    }

    #[test]
    fn crb_never_violated_for_any_gain() {
        use rand::{Rng, SeedableRng};
        let grid = PixelGrid::symmetric(0.5, 10.0).unwrap();
        let p = DarkSolitonParams::new(100.0, 0.0, 0.0).unwrap();
        let stats = build_poisson_statistics(&p, &grid).unwrap();
        let family = |q: f64| {
            let p = DarkSolitonParams::new(100.0, 0.0, q).unwrap();
            build_poisson_statistics(&p, &grid)
        };
        let drho = mean_count_derivative(family, 0.0, 1e-3).unwrap();
        let fisher = fisher_pixelized_poisson(&p, &grid, 0.0).unwrap().report.fisher;
        let opt = optimal_gain_meanfield(&OrderParameter::DarkSoliton(p), &grid);
        let opt_run = crb_experiment(&stats, &opt, &drho, fisher, 10_000, 31).unwrap();

        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(8);
        for trial in 0..20 {
            let values: Vec<f64> =
                (0..stats.rho_bar.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let gain = GainFunction::normalized_max_abs(&grid, values);
            let Ok(run) = crb_experiment(&stats, &gain, &drho, fisher, 10_000, 100 + trial)
            else {
                continue; // zero-slope gain draws are legitimately rejected
            };
            // The bound holds within Monte Carlo resolution...
            assert!(
                run.ratio >= 1.0 - 3.0 * run.ratio_std_error,
                "trial {trial}: ratio {}",
                run.ratio
            );
            // ...and the matched filter is never beaten.
            assert!(run.var_estimate >= opt_run.var_estimate * 0.99, "trial {trial}");
        }
    }

    #[test]
    fn zero_slope_rejected() {
        let grid = PixelGrid::symmetric(0.5, 10.0).unwrap();
        let stats = poisson_stats(&grid);
        let gain = GainFunction::raw(&grid, vec![0.0; stats.rho_bar.len()]);
        let drho = vec![0.0; stats.rho_bar.len()];
        assert!(matches!(
            EstimatorCalibration::new(&stats, &gain, &drho),
            Err(SimulateError::ZeroSlope)
        ));
    }
}
