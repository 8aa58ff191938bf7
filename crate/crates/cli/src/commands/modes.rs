//! Phonon spectrum tables: wavenumbers, energies, normalizations, and
//! optionally the mode functions sampled on a spatial grid.

use std::path::PathBuf;

use serde_json::json;
use solimg::bdg::{solve_wavenumbers, SolitonBox};

use crate::output::{metadata, write_csv, Field, Sink};

pub const SCHEMA: &str = "\
wavenumber table:
j                     pair index (positive branch)
k                     wavenumber, 1/xi
k_over_pi_ell         k in units of pi / half_length
energy                phonon energy, hbar^2/(m xi^2)
norm                  closed-form normalization constant
quantization_residual absolute residual of the quantization condition

function table (--functions-out):
j, x, re_u, im_u, re_v, im_v   mode functions on the sample grid
";

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Box half-length in healing lengths.
    #[arg(long, default_value_t = 10.0)]
    pub half_length: f64,

    /// Number of phonon pairs to solve.
    #[arg(long, default_value_t = 3)]
    pub pairs: usize,

    /// Background density n*xi.
    #[arg(long, default_value_t = 100.0)]
    pub n_xi: f64,

    /// Soliton position.
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,

    /// Output CSV path for the wavenumber table (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Also write the sampled mode functions to this CSV path.
    #[arg(long)]
    pub functions_out: Option<PathBuf>,

    /// Sample points for the mode-function table.
    #[arg(long, default_value_t = 401)]
    pub table_points: usize,
}

pub fn run(args: &Args) -> anyhow::Result<()> {
    let bx = SolitonBox::new(args.n_xi, args.half_length, args.q)?;
    let modes = solve_wavenumbers(&bx, args.pairs)?;
    let unit = std::f64::consts::PI / args.half_length;

    let rows: Vec<Vec<Field>> = (1..=args.pairs)
        .map(|j| {
            vec![
                Field::Integer(j as i64),
                Field::Number(modes.wavenumber(j)),
                Field::Number(modes.wavenumber(j) / unit),
                Field::Number(modes.energy(j)),
                Field::Number(modes.norm(j)),
                Field::Number(modes.quantization_residual(j)),
            ]
        })
        .collect();

    let params = json!({
        "half_length": args.half_length,
        "pairs": args.pairs,
        "n_xi": args.n_xi,
        "q": args.q,
    });
    write_csv(
        &Sink::from_option(&args.out),
        metadata("modes", params.clone()),
        &["j", "k", "k_over_pi_ell", "energy", "norm", "quantization_residual"],
        &rows,
    )?;

    if let Some(path) = &args.functions_out {
        anyhow::ensure!(args.table_points >= 2, "--table-points must be at least 2");
        let mut rows = Vec::with_capacity(args.pairs * args.table_points);
        for j in 1..=args.pairs {
            for i in 0..args.table_points {
                let x = -args.half_length
                    + 2.0 * args.half_length * i as f64 / (args.table_points - 1) as f64;
                let (u, v) = modes.eval(j as i64, x);
                rows.push(vec![
                    Field::Integer(j as i64),
                    Field::Number(x),
                    Field::Number(u.re),
                    Field::Number(u.im),
                    Field::Number(v.re),
                    Field::Number(v.im),
                ]);
            }
        }
        write_csv(
            &Sink::Path(path.clone()),
            metadata("modes", params),
            &["j", "x", "re_u", "im_u", "re_v", "im_v"],
            &rows,
        )?;
    }
    Ok(())
}
