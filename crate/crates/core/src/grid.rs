//! Detector pixel grid.
//!
//! Pixel `s` (an integer index) integrates the density over the half-open
//! interval `[s*dx, (s+1)*dx)`, so `x = 0` is always a pixel boundary and
//! pixel membership of a point is unambiguous.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("pixel width must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("grid needs at least two pixels, got {0}")]
    TooFewPixels(usize),
    #[error("window half-length {half_length} is not an integer number of pixel pairs: M*dx = {m}*{dx} must equal 2*half_length within 1e-12")]
    Misaligned { half_length: f64, dx: f64, m: usize },
}

/// A uniform grid of `count` pixels of width `dx`, starting at index `first`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PixelGrid {
    dx: f64,
    first: i64,
    count: usize,
}

impl PixelGrid {
    /// Grid of `count` pixels centered on the origin (`count` even), so the
    /// detection window is `[-count*dx/2, +count*dx/2)`.
    pub fn centered(dx: f64, count: usize) -> Result<Self, GridError> {
        if dx <= 0.0 || !dx.is_finite() {
            return Err(GridError::NonPositiveWidth(dx));
        }
        if count < 2 {
            return Err(GridError::TooFewPixels(count));
        }
        Ok(Self { dx, first: -((count / 2) as i64), count })
    }

    /// Symmetric window of half-length `ell`: requires `2*ell` to be an even
    /// multiple of `dx` (within 1e-12 relative), so that pixel boundaries sit
    /// on integer multiples of `dx` and the window is `[-ell, +ell)`.
    pub fn symmetric(dx: f64, half_length: f64) -> Result<Self, GridError> {
        if dx <= 0.0 || !dx.is_finite() {
            return Err(GridError::NonPositiveWidth(dx));
        }
        let m_real = 2.0 * half_length / dx;
        let m = m_real.round();
        let tol = 1e-12 * m_real.abs().max(1.0);
        if (m_real - m).abs() > tol || m < 2.0 || (m as i64) % 2 != 0 {
            return Err(GridError::Misaligned {
                half_length,
                dx,
                m: m.max(0.0) as usize,
            });
        }
        Self::centered(dx, m as usize)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Window half-length, defined through `M * dx = 2 * ell`.
    pub fn half_length(&self) -> f64 {
        0.5 * self.count as f64 * self.dx
    }

    /// Integer pixel indices, in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.count as i64).map(move |k| self.first + k)
    }

    /// Left edge `x_s = s * dx` of pixel `s`.
    pub fn left_edge(&self, s: i64) -> f64 {
        s as f64 * self.dx
    }

    /// Right edge of pixel `s` (exclusive).
    pub fn right_edge(&self, s: i64) -> f64 {
        (s + 1) as f64 * self.dx
    }

    pub fn center(&self, s: i64) -> f64 {
        (s as f64 + 0.5) * self.dx
    }

    /// True when the window extends at least `margin` on both sides of `x`.
    pub fn covers(&self, x: f64, margin: f64) -> bool {
        let lo = self.first as f64 * self.dx;
        let hi = (self.first + self.count as i64) as f64 * self.dx;
        x - margin >= lo && x + margin <= hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symmetric_grid_is_aligned() {
        let g = PixelGrid::symmetric(0.5, 10.0).unwrap();
        assert_eq!(g.count(), 40);
        assert_eq!(g.indices().next(), Some(-20));
        assert_eq!(g.left_edge(-20), -10.0);
        assert_eq!(g.right_edge(19), 10.0);
        assert!((g.half_length() - 10.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_misaligned_window() {
        assert!(matches!(
            PixelGrid::symmetric(0.7, 10.0),
            Err(GridError::Misaligned { .. })
        ));
        // 2*10.85/0.7 = 31 pixels, odd: cannot center on a pixel boundary.
        assert!(matches!(
            PixelGrid::symmetric(0.7, 10.85),
            Err(GridError::Misaligned { .. })
        ));
        // 2*9.8/0.7 = 28, even: fine.
        assert!(PixelGrid::symmetric(0.7, 9.8).is_ok());
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(PixelGrid::centered(0.0, 10).is_err());
        assert!(PixelGrid::centered(-1.0, 10).is_err());
        assert!(PixelGrid::centered(0.1, 1).is_err());
    }

    #[test]
    fn coverage_check() {
        let g = PixelGrid::centered(0.5, 40).unwrap();
        assert!(g.covers(0.0, 10.0));
        assert!(!g.covers(1.0, 10.0));
    }

    proptest! {
        #[test]
        fn pixel_edges_tile_the_window(count in 1usize..200, dx in 1e-3f64..10.0) {
            let count = 2 * count;
            let g = PixelGrid::centered(dx, count).unwrap();
            let mut prev_right = None;
            for s in g.indices() {
                prop_assert!(g.left_edge(s) < g.right_edge(s));
                if let Some(r) = prev_right {
                    prop_assert_eq!(g.left_edge(s), r);
                }
                prev_right = Some(g.right_edge(s));
            }
            let ell = g.half_length();
            prop_assert!((g.count() as f64 * g.dx() - 2.0 * ell).abs() <= 1e-12 * (2.0 * ell));
        }
    }
}
