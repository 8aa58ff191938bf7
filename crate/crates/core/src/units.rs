//! Internal unit convention.
//!
//! Lengths are measured in healing lengths `xi = hbar / sqrt(2 m g n)`,
//! and we set `xi = 1`, `hbar = 1`, `m = 1`. This fixes
//!
//! * the interaction energy `g n = 1/2`,
//! * the sound speed `c = sqrt(g n / m) = 1/sqrt(2)`,
//! * the inverse kink width at rest `kappa(0) = 1/sqrt(2)`,
//! * energies in units of `hbar^2 / (m xi^2)`.
//!
//! Densities are quoted as `n xi` (atoms per healing length). Fisher
//! information for a position parameter carries units `1/xi^2`, so the
//! scaled value `F' = F xi^2` is numerically identical to `F` here. For
//! the trapped soliton the same convention is applied with the local
//! healing length `xi_0 = hbar / sqrt(2 m g n_0)` as the length unit.

use std::f64::consts::FRAC_1_SQRT_2;

/// Tag recorded in every report so downstream consumers know the scaling.
pub const UNITS_LABEL: &str = "xi=1,hbar=1,m=1";

/// Sound speed `c = sqrt(g n / m)`.
pub const SOUND_SPEED: f64 = FRAC_1_SQRT_2;

/// Inverse width of the resting kink, `kappa(0) = 1/(sqrt(2) xi)`.
pub const KAPPA_AT_REST: f64 = FRAC_1_SQRT_2;

/// Interaction energy `g n` of the background.
pub const INTERACTION_GN: f64 = 0.5;

/// `m c^2` of the background, entering the Bogoliubov amplitudes.
pub const MC_SQUARED: f64 = 0.5;
