//! Shared numerical kernels: fixed Gauss–Legendre rules, adaptive
//! Gauss–Kronrod quadrature, bracketed root finding and least-squares
//! slope fits.

mod fit;
mod gauss;
mod quad;
mod roots;

pub use fit::linear_fit;
pub use gauss::{gauss_legendre, GaussRule};
pub use quad::{adaptive_quad, composite_gauss, QuadError, QuadResult};
pub use roots::{find_root_bracketed, RootError};
