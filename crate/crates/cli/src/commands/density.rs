//! Beyond-mean-field density profiles across the soliton notch for one or
//! more displacement-mode states.

use std::path::PathBuf;

use serde_json::json;
use solimg::bdg::ZeroModeKind;

use crate::output::{metadata, write_csv, Field, Sink};

pub const SCHEMA: &str = "\
state              squeezed | thermal
state_param        zeta (squeezed) or tau (thermal)
x                  position, xi
density_meanfield  order-parameter density |Phi|^2
density            Bogoliubov mean density including depletion and the
                   Goldstone-sector contribution
";

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

    /// Squeezed-state parameters (repeatable).
    #[arg(long)]
    pub zeta: Vec<f64>,

    /// Thermal-state parameters (repeatable).
    #[arg(long)]
    pub tau: Vec<f64>,

    /// Inverse phonon temperature; omitted means T = 0.
    #[arg(long)]
    pub beta: Option<f64>,

    /// Soliton position.
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,

    /// Sample points across the box.
    #[arg(long, default_value_t = 401)]
    pub points: usize,

    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &Args) -> anyhow::Result<()> {
    anyhow::ensure!(args.points >= 2, "--points must be at least 2");
    let temp = super::occupation(args.beta)?;
    let mut kinds: Vec<ZeroModeKind> =
        args.zeta.iter().map(|&zeta| ZeroModeKind::Squeezed { zeta }).collect();
    kinds.extend(args.tau.iter().map(|&tau| ZeroModeKind::Thermal { tau }));
    if kinds.is_empty() {
        kinds.push(ZeroModeKind::Squeezed { zeta: 1.0 });
    }

    let mut rows = Vec::with_capacity(kinds.len() * args.points);
    for kind in &kinds {
        let model = super::fluctuation_model(
            args.n_xi,
            args.half_length,
            args.q,
            args.pairs,
            *kind,
            temp,
        )?;
        let (name, param) = super::state_label(*kind);
        for i in 0..args.points {
            let x = -args.half_length
                + 2.0 * args.half_length * i as f64 / (args.points - 1) as f64;
            let phi = model.background().phi(x);
            rows.push(vec![
                Field::Text(name.to_string()),
                Field::Number(param),
                Field::Number(x),
                Field::Number(phi * phi),
                Field::Number(model.mean_density(x)),
            ]);
        }
    }

    let meta = metadata(
        "density",
        json!({
            "n_xi": args.n_xi,
            "half_length": args.half_length,
            "pairs": args.pairs,
            "zeta": args.zeta,
            "tau": args.tau,
            "beta": args.beta,
            "q": args.q,
            "points": args.points,
        }),
    );
    write_csv(
        &Sink::from_option(&args.out),
        meta,
        &["state", "state_param", "x", "density_meanfield", "density"],
        &rows,
    )
}
