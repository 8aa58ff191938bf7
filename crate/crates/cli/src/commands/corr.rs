//! Correlation kernel on a spatial grid, for surface plots of the
//! density-correlation structure.

use std::path::PathBuf;

use clap::ValueEnum;
use rayon::prelude::*;
use serde_json::json;

use crate::output::{metadata, write_csv, Field, Sink};

pub const SCHEMA: &str = "\
x      first position, xi
y      second position, xi
value  correlation kernel at (x, y): J(x,y) for --kernel j, or the
       regular part of the density correlations for --kernel general
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kernel {
    /// Zero-temperature kernel `J(x, y)` multiplying `Phi(x) Phi(y)`.
    J,
    /// Full correlation function (regular part), thermal phonons allowed.
    General,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Background density n*xi.
    #[arg(long, default_value_t = 100.0)]
    pub n_xi: f64,

    /// Box half-length.
    #[arg(long, default_value_t = 10.0)]
    pub half_length: f64,

    /// Phonon pairs (mode count is twice this).
    #[arg(long, default_value_t = 70)]
    pub pairs: usize,

    /// Squeezed displacement state parameter (default zeta = 1).
    #[arg(long)]
    pub zeta: Option<f64>,

    /// Thermal displacement state parameter (excludes --zeta).
    #[arg(long)]
    pub tau: Option<f64>,

    /// Inverse phonon temperature; omitted means T = 0 (general kernel).
    #[arg(long)]
    pub beta: Option<f64>,

    /// Which kernel to export.
    #[arg(long, value_enum, default_value_t = Kernel::J)]
    pub kernel: Kernel,

    /// Soliton position.
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,

    /// Grid points per axis.
    #[arg(long, default_value_t = 81)]
    pub points: usize,

    /// Half-extent of the sampled square (defaults to the box half-length).
    #[arg(long)]
    pub extent: Option<f64>,

    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &Args) -> anyhow::Result<()> {
    anyhow::ensure!(args.points >= 2, "--points must be at least 2");
    let kind = super::state_kind(args.zeta, args.tau)?;
    let temp = super::occupation(args.beta)?;
    if matches!(args.kernel, Kernel::J) && !temp.is_zero_temperature() {
        anyhow::bail!("the J kernel is the zero-temperature form; use --kernel general with --beta");
    }
    let model = super::fluctuation_model(
        args.n_xi,
        args.half_length,
        args.q,
        args.pairs,
        kind,
        temp,
    )?;
    let extent = args.extent.unwrap_or(args.half_length);
    let coords: Vec<f64> = (0..args.points)
        .map(|i| -extent + 2.0 * extent * i as f64 / (args.points - 1) as f64)
        .collect();

    let rows: Vec<Vec<Field>> = coords
        .par_iter()
        .map(|&x| {
            coords
                .iter()
                .map(|&y| {
                    let value = match args.kernel {
                        Kernel::J => model.correlation_j(x, y),
                        Kernel::General => model.correlation_general(x, y),
                    };
                    vec![Field::Number(x), Field::Number(y), Field::Number(value)]
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();

    let (state_name, state_param) = super::state_label(kind);
    let meta = metadata(
        "corr",
        json!({
            "n_xi": args.n_xi,
            "half_length": args.half_length,
            "pairs": args.pairs,
            "state": state_name,
            "state_param": state_param,
            "beta": args.beta,
            "kernel": format!("{:?}", args.kernel).to_lowercase(),
            "q": args.q,
            "points": args.points,
            "extent": extent,
        }),
    );
    write_csv(&Sink::from_option(&args.out), meta, &["x", "y", "value"], &rows)
}
