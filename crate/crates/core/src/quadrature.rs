//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use alloc::vec;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureFailure {
    /// Abscissa where the integrand misbehaved (or the worst panel midpoint).
    pub at: f64,
    pub integrand: f64,
}

fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadratureFailure> {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(QuadratureFailure { at: c, integrand: fc });
    }
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = r * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        if !f1.is_finite() {
            return Err(QuadratureFailure { at: c - dx, integrand: f1 });
        }
        if !f2.is_finite() {
            return Err(QuadratureFailure { at: c + dx, integrand: f2 });
        }
        k += WGK[i] * (f1 + f2);
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    Ok((k * r, ((k - g) * r).abs()))
}

/// Panels allowed per call before giving up.
const PANEL_BUDGET: usize = 2000;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Globally adaptive: the panel with the largest error estimate is bisected
/// until the summed estimate meets `tol` (or sits at rounding level).
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, QuadratureFailure> {
    if a == b {
        return Ok(0.0);
    }
    let (v0, e0) = kronrod_panel(f, a, b)?;
    let mut panels = vec![(a, b, v0, e0)];
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        let magnitude: f64 = panels.iter().map(|p| p.2.abs()).sum();
        if err <= tol || err <= 64.0 * f64::EPSILON * magnitude {
            return Ok(total);
        }
        let worst = panels
            .iter()
            .enumerate()
            .fold(0, |w, (i, p)| if p.3 > panels[w].3 { i } else { w });
        let (lo, hi, _, _) = panels[worst];
        let m = 0.5 * (lo + hi);
        if panels.len() >= PANEL_BUDGET || !(m > lo && m < hi) {
            return Err(QuadratureFailure { at: m, integrand: f(m) });
        }
        let (vl, el) = kronrod_panel(f, lo, m)?;
        let (vr, er) = kronrod_panel(f, m, hi)?;
        panels[worst] = (lo, m, vl, el);
        panels.push((m, hi, vr, er));
    }
}
