//! Counting statistics and position-resolution limits for density images of
//! an ultracold Bose gas.
//!
//! The library computes the Fisher information and Cramér–Rao bound for the
//! position of localized excitations (dark solitons, quintic solitons, vortex
//! lines, trapped solitons) seen through a pixelized density image. Two
//! statistical models are supported:
//!
//! * mean-field images with independent Poisson counts per pixel
//!   ([`meanfield`]), and
//! * correlated Gaussian images whose mean vector and covariance matrix come
//!   from Bogoliubov theory, including phonon modes and the Goldstone
//!   (phase / displacement) zero modes of a dark soliton in a box
//!   ([`bdg`], [`imagestats`], [`inference`]).
//!
//! A Monte Carlo layer ([`simulate`]) draws synthetic images from either
//! model and verifies that linear matched filters attain (or approach) the
//! Cramér–Rao bound.
//!
//! All quantities are expressed in internal units with the healing length
//! `xi = 1`, `hbar = 1` and atom mass `m = 1`; see [`units`].

/// Library version, echoed into output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod bdg;
pub mod grid;
pub mod imagestats;
pub mod inference;
pub mod meanfield;
pub mod numerics;
pub mod profiles;
pub mod report;
pub mod simulate;
pub mod units;

pub use grid::PixelGrid;
pub use profiles::{
    DarkSolitonParams, OrderParameter, QuinticSolitonParams, TrappedSolitonParams, VortexParams,
};
pub use report::{FisherReport, StatModel};
