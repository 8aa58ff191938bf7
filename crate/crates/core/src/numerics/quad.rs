//! Adaptive quadrature built on the 15-point Gauss–Kronrod rule, plus a
//! composite fixed-order rule for smooth oscillatory integrands where the
//! resolution requirement is known in advance.

use thiserror::Error;

use super::gauss::gauss_legendre;

// Standard 15-point Gauss-Kronrod table (QUADPACK values), kept at full
// printed precision.
#[allow(clippy::excessive_precision)]
/// Kronrod abscissae for the 15-point rule.
const XGK15: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_33,
    0.949_107_912_342_758_524_526_189_684_047_85,
    0.864_864_423_359_769_072_789_712_788_640_93,
    0.741_531_185_599_394_439_863_864_773_280_79,
    0.586_087_235_467_691_130_294_144_838_258_73,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_24,
    0.0,
];

#[allow(clippy::excessive_precision)]
/// 7-point Gauss weights embedded in the 15-point rule.
const WG15: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_08,
    0.279_705_391_489_276_667_901_467_771_423_78,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_33,
];

#[allow(clippy::excessive_precision)]
/// 15-point Kronrod weights.
const WGK15: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_52,
    0.140_653_259_715_525_918_745_189_590_510_24,
    0.169_004_726_639_267_902_826_583_426_598_55,
    0.190_350_578_064_785_409_913_256_402_421_01,
    0.204_432_940_075_298_892_414_161_999_234_65,
    0.209_482_141_084_727_828_012_999_174_891_71,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Error)]
pub enum QuadError {
    /// The subdivision budget ran out before the tolerance was met. The
    /// best estimate and its residual error are carried along.
    #[error("quadrature did not converge: best estimate {best}, residual {residual}")]
    NonConvergence { best: f64, residual: f64 },
    #[error("invalid integration interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut kronrod = fc * WGK15[7];
    let mut gauss = fc * WG15[3];
    for j in 0..7 {
        let dx = half * XGK15[j];
        let fsum = f(mid - dx) + f(mid + dx);
        kronrod += WGK15[j] * fsum;
        if j % 2 == 1 {
            gauss += WG15[j / 2] * fsum;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    // The (200 e)^{3/2} sharpening used by QUADPACK; keeps the estimate
    // from being wildly pessimistic on smooth panels.
    let sharpened = if err > 0.0 {
        let scale = (200.0 * err / value.abs().max(f64::MIN_POSITIVE)).powf(1.5);
        if scale < 1.0 {
            err.min(value.abs() * scale)
        } else {
            err
        }
    } else {
        0.0
    };
    (value, sharpened.max(err * 1e-6))
}

/// Integrate `f` over [a, b] to the requested relative tolerance by
/// bisecting the panel with the largest error estimate.
pub fn adaptive_quad<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<QuadResult, QuadError> {
    if !a.is_finite() || !b.is_finite() || a >= b {
        return Err(QuadError::BadInterval { a, b });
    }
    const MAX_PANELS: usize = 4096;
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    let (v, e) = gk15(&f, a, b);
    panels.push((a, b, v, e));
    for iteration in 0..MAX_PANELS {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        let target = rel_tol * total.abs().max(f64::MIN_POSITIVE);
        if err <= target || err <= 1e-300 {
            return Ok(QuadResult {
                value: total,
                abs_error: err,
                subdivisions: iteration,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty panel list");
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let pm = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&f, pa, pm);
        let (v2, e2) = gk15(&f, pm, pb);
        panels.push((pa, pm, v1, e1));
        panels.push((pm, pb, v2, e2));
    }
    let best: f64 = panels.iter().map(|p| p.2).sum();
    let residual: f64 = panels.iter().map(|p| p.3).sum();
    Err(QuadError::NonConvergence { best, residual })
}

/// Composite fixed-order Gauss rule: `panels` equal panels of an
/// `order`-point rule. Suited to smooth integrands whose oscillation scale
/// is known, e.g. mode-function overlaps with bounded wavenumber.
pub fn composite_gauss<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> f64 {
    let rule = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let pa = a + p as f64 * h;
        acc += rule.integrate(pa, pa + h, &mut f);
    }
    acc
}
