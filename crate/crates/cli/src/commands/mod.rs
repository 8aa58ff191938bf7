//! Subcommand implementations.

pub mod corr;
pub mod density;
pub mod fisher_gauss;
pub mod fisher_mf;
pub mod modes;
pub mod snr;

use anyhow::Context;
use solimg::bdg::{solve_wavenumbers, zero_mode_state, SolitonBox, ZeroModeKind};
use solimg::grid::PixelGrid;
use solimg::imagestats::{FluctuationModel, ThermalOccupation};

/// Displacement-mode state selection shared by the Bogoliubov commands.
pub(crate) fn state_kind(zeta: Option<f64>, tau: Option<f64>) -> anyhow::Result<ZeroModeKind> {
    match (zeta, tau) {
        (Some(_), Some(_)) => anyhow::bail!("--zeta and --tau are mutually exclusive"),
        (None, Some(tau)) => Ok(ZeroModeKind::Thermal { tau }),
        (Some(zeta), None) => Ok(ZeroModeKind::Squeezed { zeta }),
        (None, None) => Ok(ZeroModeKind::Squeezed { zeta: 1.0 }),
    }
}

pub(crate) fn state_label(kind: ZeroModeKind) -> (&'static str, f64) {
    match kind {
        ZeroModeKind::Squeezed { zeta } => ("squeezed", zeta),
        ZeroModeKind::Thermal { tau } => ("thermal", tau),
    }
}

pub(crate) fn occupation(beta: Option<f64>) -> anyhow::Result<ThermalOccupation> {
    match beta {
        None => Ok(ThermalOccupation::zero_temperature()),
        Some(b) => ThermalOccupation::new(b).context("invalid --beta"),
    }
}

/// Build the fluctuation model for one soliton position.
pub(crate) fn fluctuation_model(
    n: f64,
    half_length: f64,
    q: f64,
    pairs: usize,
    kind: ZeroModeKind,
    temp: ThermalOccupation,
) -> Result<FluctuationModel, solimg::imagestats::StatsError> {
    let bx = SolitonBox::new(n, half_length, q)?;
    let modes = solve_wavenumbers(&bx, pairs)?;
    let state = zero_mode_state(kind, &bx)?;
    FluctuationModel::new(modes, state, temp)
}

/// Largest even pixel grid of width `dx` fitting inside the box.
pub(crate) fn grid_in_box(dx: f64, half_length: f64) -> anyhow::Result<PixelGrid> {
    let mut m = (2.0 * half_length / dx).floor() as usize;
    m -= m % 2;
    PixelGrid::centered(dx, m).context("pixel grid construction")
}
