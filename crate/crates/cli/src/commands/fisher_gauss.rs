//! Gaussian-image Fisher information from Bogoliubov statistics, swept
//! over pixel size and density.

use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::json;
use solimg::inference::gaussian_fisher;

use crate::output::{metadata, write_csv, Field, Sink};
use crate::sweep::RangeSpec;

pub const SCHEMA: &str = "\
n_xi              background density in atoms per healing length
dx                pixel width in healing lengths
grid_half_length  detection-window half-length actually used
pixels            pixel count
modes             phonon mode count (2 x pairs)
state             displacement-mode state (squeezed | thermal)
state_param       zeta (squeezed) or tau (thermal)
beta              inverse phonon temperature (inf for T = 0)
q                 soliton position
f                 Fisher information, 1/xi^2
f_scaled          F' = F xi^2
crb_sigma         Cramer-Rao position bound, xi
quadratic_term    drho . P^-1 drho contribution
logdet_term       1/2 d2 log det P contribution
trace_term        1/2 Tr[(d2 P^-1) P] contribution
condition_number  covariance condition number
fd_shift          relative change of F under step halving
";

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Background density n*xi (scalar or start:stop:step sweep).
    #[arg(long, default_value = "100")]
    pub n_xi: RangeSpec,

    /// Pixel width (scalar or sweep).
    #[arg(long, default_value = "0.7")]
    pub dx: RangeSpec,

    /// Box half-length in healing lengths.
    #[arg(long, default_value_t = 10.0)]
    pub half_length: f64,

    /// Phonon pairs (mode count is twice this).
    #[arg(long, default_value_t = 70)]
    pub pairs: usize,

    /// Squeezed displacement state parameter (default state, zeta = 1).
    #[arg(long)]
    pub zeta: Option<f64>,

    /// Thermal displacement state parameter (excludes --zeta).
    #[arg(long)]
    pub tau: Option<f64>,

    /// Inverse phonon temperature; omitted means T = 0.
    #[arg(long)]
    pub beta: Option<f64>,

    /// Soliton position.
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,

    /// Finite-difference step for the q-derivatives.
    #[arg(long, default_value_t = 1e-3)]
    pub fd_step: f64,

    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const COLUMNS: [&str; 17] = [
    "n_xi",
    "dx",
    "grid_half_length",
    "pixels",
    "modes",
    "state",
    "state_param",
    "beta",
    "q",
    "f",
    "f_scaled",
    "crb_sigma",
    "quadratic_term",
    "logdet_term",
    "trace_term",
    "condition_number",
    "fd_shift",
];

pub fn run(args: &Args) -> anyhow::Result<()> {
    let kind = super::state_kind(args.zeta, args.tau)?;
    let temp = super::occupation(args.beta)?;
    let (state_name, state_param) = super::state_label(kind);

    let mut points = Vec::new();
    for n in args.n_xi.values() {
        for dx in args.dx.values() {
            points.push((n, dx));
        }
    }
    let rows: Vec<Vec<Field>> = points
        .par_iter()
        .map(|&(n, dx)| -> anyhow::Result<Vec<Field>> {
            let grid = super::grid_in_box(dx, args.half_length)?;
            let family = |q: f64| {
                let model =
                    super::fluctuation_model(n, args.half_length, q, args.pairs, kind, temp)?;
                solimg::imagestats::build_image_statistics(&model, &grid)
            };
            let fisher = gaussian_fisher(family, args.q, args.fd_step)?;
            Ok(vec![
                Field::Number(n),
                Field::Number(dx),
                Field::Number(grid.half_length()),
                Field::Integer(grid.count() as i64),
                Field::Integer(2 * args.pairs as i64),
                Field::Text(state_name.to_string()),
                Field::Number(state_param),
                Field::Number(args.beta.unwrap_or(f64::INFINITY)),
                Field::Number(args.q),
                Field::Number(fisher.report.fisher),
                Field::Number(fisher.report.fisher_scaled),
                Field::Number(fisher.report.crb_sigma),
                Field::Number(fisher.quadratic_term),
                Field::Number(fisher.logdet_term),
                Field::Number(fisher.trace_term),
                Field::Number(fisher.condition_number),
                Field::Number(fisher.fd_shift),
            ])
        })
        .collect::<anyhow::Result<_>>()?;

    let meta = metadata(
        "fisher-gauss",
        json!({
            "n_xi": args.n_xi.to_string(),
            "dx": args.dx.to_string(),
            "half_length": args.half_length,
            "pairs": args.pairs,
            "state": state_name,
            "state_param": state_param,
            "beta": args.beta,
            "q": args.q,
            "fd_step": args.fd_step,
        }),
    );
    write_csv(&Sink::from_option(&args.out), meta, &COLUMNS, &rows)
}
