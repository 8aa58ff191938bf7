//! Mean-field (Poisson) information-rate sweeps over velocity, density,
//! position and pixel size, for all profile families.

use std::path::PathBuf;

use clap::ValueEnum;
use rayon::prelude::*;
use serde_json::json;
use solimg::grid::PixelGrid;
use solimg::meanfield::{
    fisher_box, fisher_dark_soliton_closed, fisher_pixelized_poisson, fisher_poisson_continuum,
    fisher_trapped,
};
use solimg::profiles::{
    DarkSolitonParams, OrderParameter, QuinticSolitonParams, TrappedSolitonParams, VortexParams,
};

use crate::output::{metadata, write_csv, Field, Sink};
use crate::sweep::RangeSpec;

pub const SCHEMA: &str = "\
family              profile family (dark | quintic | vortex | trapped)
n_xi                background density in atoms per healing length
v_over_c            soliton velocity fraction (dark, quintic)
q                   excitation position in healing lengths
dx                  pixel width (pixel models only)
box_half_length     confining-box half-length (box model only)
model               closed-form | poisson-continuum | poisson-pixel | poisson-pixel-box
f                   Fisher information for the position, 1/xi^2
f_scaled            F' = F xi^2
crb_sigma           Cramer-Rao position bound F^{-1/2}, in xi
first_sum           pure-Poisson pixel sum (pixel models)
gaussian_correction Gaussian-statistics correction term (pixel model)
enhancement         finite-box background enhancement factor (box model)
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Dark,
    Quintic,
    Vortex,
    Trapped,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Profile family.
    #[arg(long, value_enum, default_value_t = Family::Dark)]
    pub family: Family,

    /// Background density n*xi (scalar or start:stop:step sweep).
    #[arg(long, default_value = "100")]
    pub n_xi: RangeSpec,

    /// Velocity fraction v/c (scalar or sweep).
    #[arg(long, default_value = "0")]
    pub v_over_c: RangeSpec,

    /// Excitation position (scalar or sweep).
    #[arg(long, default_value = "0")]
    pub q: RangeSpec,

    /// Pixel width; enables the pixel-sum models (dark family).
    #[arg(long)]
    pub dx: Option<RangeSpec>,

    /// Confining-box half-length; enables the box model (dark family,
    /// requires --dx).
    #[arg(long)]
    pub box_half_length: Option<f64>,

    /// Detection-window half-length for quadrature and pixel grids.
    #[arg(long, default_value_t = 12.0)]
    pub window_half_length: f64,

    /// Thomas-Fermi radius in units of the central healing length
    /// (trapped family).
    #[arg(long, default_value_t = 100.0)]
    pub r_tf: f64,

    /// Relative quadrature tolerance for the continuum model.
    #[arg(long, default_value_t = 1e-8)]
    pub quad_tol: f64,

    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const COLUMNS: [&str; 13] = [
    "family",
    "n_xi",
    "v_over_c",
    "q",
    "dx",
    "box_half_length",
    "model",
    "f",
    "f_scaled",
    "crb_sigma",
    "first_sum",
    "gaussian_correction",
    "enhancement",
];

struct Point {
    n: f64,
    v: f64,
    q: f64,
    dx: Option<f64>,
}

fn base_row(args: &Args, p: &Point) -> Vec<Field> {
    vec![
        Field::Text(format!("{:?}", args.family).to_lowercase()),
        Field::Number(p.n),
        Field::Number(p.v),
        Field::Number(p.q),
        p.dx.map_or(Field::Empty, Field::Number),
        Field::Empty,
        Field::Empty,
        Field::Empty,
        Field::Empty,
        Field::Empty,
        Field::Empty,
        Field::Empty,
        Field::Empty,
    ]
}

fn fill_report(row: &mut [Field], model: &str, report: &solimg::FisherReport) {
    row[6] = Field::Text(model.to_string());
    row[7] = Field::Number(report.fisher);
    row[8] = Field::Number(report.fisher_scaled);
    row[9] = Field::Number(report.crb_sigma);
}

fn rows_for_point(args: &Args, p: &Point, window: &PixelGrid) -> anyhow::Result<Vec<Vec<Field>>> {
    let mut rows = Vec::new();
    match args.family {
        Family::Dark => {
            let params = DarkSolitonParams::new(p.n, p.v, p.q)?;
            if p.dx.is_none() {
                let closed = fisher_dark_soliton_closed(&params)?;
                let mut row = base_row(args, p);
                fill_report(&mut row, "closed-form", &closed);
                rows.push(row);
                let cont = fisher_poisson_continuum(
                    &OrderParameter::DarkSoliton(params),
                    window,
                    args.quad_tol,
                )?;
                let mut row = base_row(args, p);
                fill_report(&mut row, "poisson-continuum", &cont);
                rows.push(row);
            }
            if let Some(dx) = p.dx {
                let grid = super::grid_in_box(dx, args.window_half_length)?;
                let pixel = fisher_pixelized_poisson(&params, &grid, p.q)?;
                let mut row = base_row(args, p);
                fill_report(&mut row, "poisson-pixel", &pixel.report);
                row[10] = Field::Number(pixel.first_sum);
                row[11] = Field::Number(pixel.gaussian_correction);
                rows.push(row);
                if let Some(ell) = args.box_half_length {
                    let boxed = fisher_box(&params, &grid, ell)?;
                    let mut row = base_row(args, p);
                    fill_report(&mut row, "poisson-pixel-box", &boxed.report);
                    row[5] = Field::Number(ell);
                    row[10] = Field::Number(boxed.restricted_sum);
                    row[12] = Field::Number(boxed.enhancement);
                    rows.push(row);
                }
            }
        }
        Family::Quintic => {
            let params = QuinticSolitonParams::new(p.n, p.v, p.q)?;
            let cont = fisher_poisson_continuum(
                &OrderParameter::Quintic(params),
                window,
                args.quad_tol,
            )?;
            let mut row = base_row(args, p);
            fill_report(&mut row, "poisson-continuum", &cont);
            rows.push(row);
        }
        Family::Vortex => {
            anyhow::ensure!(p.v == 0.0, "the vortex profile has no velocity parameter");
            let params = VortexParams::new(p.n, 1.0, p.q, 1)?;
            let cont = fisher_poisson_continuum(
                &OrderParameter::Vortex(params),
                window,
                args.quad_tol,
            )?;
            let mut row = base_row(args, p);
            fill_report(&mut row, "poisson-continuum", &cont);
            rows.push(row);
        }
        Family::Trapped => {
            anyhow::ensure!(p.v == 0.0, "the trapped soliton is treated at rest");
            let params = TrappedSolitonParams::new(p.n, 1.0, args.r_tf, p.q)?;
            let closed = fisher_trapped(&params)?;
            let mut row = base_row(args, p);
            fill_report(&mut row, "closed-form", &closed);
            rows.push(row);
            let trap_window = PixelGrid::symmetric(args.r_tf / 64.0, args.r_tf)?;
            let cont = fisher_poisson_continuum(
                &OrderParameter::Trapped(params),
                &trap_window,
                args.quad_tol,
            )?;
            let mut row = base_row(args, p);
            fill_report(&mut row, "poisson-continuum", &cont);
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn run(args: &Args) -> anyhow::Result<()> {
    let window = super::grid_in_box(args.window_half_length / 8.0, args.window_half_length)?;
    let dxs: Vec<Option<f64>> = match &args.dx {
        None => vec![None],
        Some(spec) => spec.values().into_iter().map(Some).collect(),
    };
    let mut points = Vec::new();
    for n in args.n_xi.values() {
        for v in args.v_over_c.values() {
            for q in args.q.values() {
                for dx in &dxs {
                    points.push(Point { n, v, q, dx: *dx });
                }
            }
        }
    }
    let rows: Vec<Vec<Vec<Field>>> = points
        .par_iter()
        .map(|p| rows_for_point(args, p, &window))
        .collect::<anyhow::Result<_>>()?;
    let rows: Vec<Vec<Field>> = rows.into_iter().flatten().collect();

    let meta = metadata(
        "fisher-mf",
        json!({
            "family": format!("{:?}", args.family).to_lowercase(),
            "n_xi": args.n_xi.to_string(),
            "v_over_c": args.v_over_c.to_string(),
            "q": args.q.to_string(),
            "dx": args.dx.as_ref().map(|d| d.to_string()),
            "box_half_length": args.box_half_length,
            "window_half_length": args.window_half_length,
            "r_tf": args.r_tf,
            "quad_tol": args.quad_tol,
        }),
    );
    write_csv(&Sink::from_option(&args.out), meta, &COLUMNS, &rows)
}
