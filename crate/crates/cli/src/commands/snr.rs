//! Gain construction, noise decomposition and the Monte Carlo
//! Cramér–Rao verification, reported as a JSON document.

use std::path::PathBuf;

use clap::ValueEnum;
use serde_json::json;
use solimg::imagestats::{build_poisson_statistics, ImageStatistics, StatsError};
use solimg::inference::{
    almost_optimal_gain, gaussian_fisher, mean_count_derivative, optimal_gain_meanfield,
    snr_and_split, GainFunction,
};
use solimg::meanfield::fisher_pixelized_poisson;
use solimg::profiles::{DarkSolitonParams, OrderParameter};
use solimg::simulate::{crb_experiment, RNG_ALGORITHM};

use crate::output::{metadata, write_json, Sink};

pub const SCHEMA: &str = "\
JSON document with:
data.manifest   model, parameters, seed, sample count, rng algorithm
data.gain       per-pixel filter weights and normalization tag
data.snr        slope dS/dq, variance dS^2, noise split
                (total = meanfield + phonon - goldstone), snr information
data.fisher     Fisher information the experiment is measured against
data.experiment Var(q_hat), ratio Var(q_hat)*F, Monte Carlo standard error
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Poisson,
    Bogoliubov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Gain {
    /// Mean-field matched filter `d|Phi|/dq / |Phi|` at pixel centers.
    Opt,
    /// Almost-optimal filter from the linear solve `P g = drho/dq`.
    Ao,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Counting-statistics model to sample from.
    #[arg(long, value_enum, default_value_t = Model::Bogoliubov)]
    pub model: Model,

    /// Background density n*xi.
    #[arg(long, default_value_t = 100.0)]
    pub n_xi: f64,

    /// Soliton velocity fraction (Poisson model only).
    #[arg(long, default_value_t = 0.0)]
    pub v_over_c: f64,

    /// Pixel width.
    #[arg(long, default_value_t = 0.7)]
    pub dx: f64,

    /// Box (and detection-window) half-length.
    #[arg(long, default_value_t = 10.0)]
    pub half_length: f64,

    /// Phonon pairs (Bogoliubov model).
    #[arg(long, default_value_t = 70)]
    pub pairs: usize,

    /// Squeezed displacement state parameter (default zeta = 1).
    #[arg(long)]
    pub zeta: Option<f64>,

    /// Thermal displacement state parameter (excludes --zeta).
    #[arg(long)]
    pub tau: Option<f64>,

    /// Inverse phonon temperature; omitted means T = 0.
    #[arg(long)]
    pub beta: Option<f64>,

    /// Filter choice (default: opt for Poisson, ao for Bogoliubov).
    #[arg(long, value_enum)]
    pub gain: Option<Gain>,

    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,

    /// RNG seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Finite-difference step for the q-derivatives.
    #[arg(long, default_value_t = 1e-3)]
    pub fd_step: f64,

    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Also write the pixelized image statistics (mean counts and
    /// row-major covariance) as a JSON document.
    #[arg(long)]
    pub stats_out: Option<PathBuf>,
}

pub fn run(args: &Args) -> anyhow::Result<()> {
    let grid = super::grid_in_box(args.dx, args.half_length)?;
    let gain_choice = args.gain.unwrap_or(match args.model {
        Model::Poisson => Gain::Opt,
        Model::Bogoliubov => Gain::Ao,
    });

    let (stats, drho, fisher, fisher_model, gain): (
        ImageStatistics,
        Vec<f64>,
        f64,
        &'static str,
        GainFunction,
    );
    match args.model {
        Model::Poisson => {
            let params = DarkSolitonParams::new(args.n_xi, args.v_over_c, 0.0)?;
            let family = |q: f64| -> Result<ImageStatistics, StatsError> {
                let p = DarkSolitonParams::new(args.n_xi, args.v_over_c, q)
                    .expect("validated parameters");
                build_poisson_statistics(&p, &grid)
            };
            stats = family(0.0)?;
            drho = mean_count_derivative(family, 0.0, args.fd_step)?;
            // The Poisson-likelihood information is the pure pixel sum.
            fisher = fisher_pixelized_poisson(&params, &grid, 0.0)?.first_sum;
            fisher_model = "poisson-pixel-first-sum";
            gain = match gain_choice {
                Gain::Opt => optimal_gain_meanfield(&OrderParameter::DarkSoliton(params), &grid),
                Gain::Ao => almost_optimal_gain(&stats, &drho)?.gain,
            };
        }
        Model::Bogoliubov => {
            anyhow::ensure!(
                args.v_over_c == 0.0,
                "the Bogoliubov model treats a soliton at rest"
            );
            let kind = super::state_kind(args.zeta, args.tau)?;
            let temp = super::occupation(args.beta)?;
            let family = |q: f64| -> Result<ImageStatistics, StatsError> {
                let model = super::fluctuation_model(
                    args.n_xi,
                    args.half_length,
                    q,
                    args.pairs,
                    kind,
                    temp,
                )?;
                solimg::imagestats::build_image_statistics(&model, &grid)
            };
            let gf = gaussian_fisher(family, 0.0, args.fd_step)?;
            stats = family(0.0)?;
            drho = gf.drho_dq.clone();
            fisher = gf.report.fisher;
            fisher_model = "gaussian-pixel";
            gain = match gain_choice {
                Gain::Ao => almost_optimal_gain(&stats, &drho)?.gain,
                Gain::Opt => {
                    let params = DarkSolitonParams::new(args.n_xi, 0.0, 0.0)?;
                    optimal_gain_meanfield(&OrderParameter::DarkSoliton(params), &grid)
                }
            };
        }
    }

    let snr = snr_and_split(&stats, &gain, &drho)?;
    let experiment = crb_experiment(&stats, &gain, &drho, fisher, args.samples, args.seed)?;

    let manifest = json!({
        "model": format!("{:?}", args.model).to_lowercase(),
        "gain": format!("{:?}", gain_choice).to_lowercase(),
        "n_xi": args.n_xi,
        "v_over_c": args.v_over_c,
        "dx": args.dx,
        "half_length": args.half_length,
        "pairs": args.pairs,
        "zeta": args.zeta,
        "tau": args.tau,
        "beta": args.beta,
        "samples": args.samples,
        "seed": args.seed,
        "fd_step": args.fd_step,
        "rng": RNG_ALGORITHM,
    });
    let data = json!({
        "manifest": manifest,
        "gain": { "values": gain.values, "normalization": gain.normalization },
        "snr": {
            "slope": snr.slope,
            "variance": snr.variance,
            "split": snr.split,
            "snr_information": snr.snr_information,
        },
        "fisher": { "value": fisher, "model": fisher_model },
        "experiment": experiment,
    });

    if let Some(path) = &args.stats_out {
        write_json(
            &Sink::Path(path.clone()),
            metadata("snr", json!({"section": "image-statistics"})),
            stats.to_json(),
        )?;
    }
    if args.out.is_some() {
        println!(
            "Var(q) * F = {:.4} +- {:.4}  (F = {:.4}, {} samples, seed {})",
            experiment.ratio, experiment.ratio_std_error, fisher, args.samples, args.seed
        );
    }
    write_json(&Sink::from_option(&args.out), metadata("snr", json!({})), data)
}
