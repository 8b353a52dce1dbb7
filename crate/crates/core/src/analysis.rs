//! Spectral post-processing: extrema, free spectral range and Lorentzian fits.
//!
//! All helpers expect `x` sorted in ascending order.

use nalgebra::{Matrix3, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

/// Indices of strict interior local extrema.
pub fn find_extrema(y: &[f64], kind: Extremum) -> Vec<usize> {
    let better = |a: f64, b: f64| match kind {
        Extremum::Max => a > b,
        Extremum::Min => a < b,
    };
    (1..y.len().saturating_sub(1)).filter(|&i| better(y[i], y[i - 1]) && better(y[i], y[i + 1])).collect()
}

/// Vertex of the parabola through samples `i-1`, `i`, `i+1`.
pub fn refine_vertex(x: &[f64], y: &[f64], i: usize) -> f64 {
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        x1
    } else {
        x1 - 0.5 * num / den
    }
}

/// Refined positions of all extrema of `kind`, ascending.
pub fn extrema_positions(x: &[f64], y: &[f64], kind: Extremum) -> Vec<f64> {
    find_extrema(y, kind).into_iter().map(|i| refine_vertex(x, y, i)).collect()
}

/// Spacing of the adjacent pair of `positions` whose midpoint is closest to `target`.
pub fn spacing_near(positions: &[f64], target: f64) -> Option<f64> {
    positions
        .windows(2)
        .min_by(|a, b| {
            let da = (0.5 * (a[0] + a[1]) - target).abs();
            let db = (0.5 * (b[0] + b[1]) - target).abs();
            da.total_cmp(&db)
        })
        .map(|w| w[1] - w[0])
}

/// `peak / (1 + ((x − center)/half_width)²)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianFit {
    pub center: f64,
    pub half_width: f64,
    pub peak: f64,
    pub r_squared: f64,
}

impl LorentzianFit {
    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.half_width;
        self.peak / (1.0 + u * u)
    }
}

/// Fits a Lorentzian by weighted least squares on `1/y`, which is quadratic
/// in `x`. Weights `y⁴` make the residuals comparable to residuals in `y`.
/// `r_squared` is measured on `y` itself.
pub fn fit_lorentzian(x: &[f64], y: &[f64]) -> Option<LorentzianFit> {
    if x.len() < 3 || x.len() != y.len() || y.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let shift = x.iter().sum::<f64>() / x.len() as f64;
    let scale = x.iter().map(|v| (v - shift).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    for (&xi, &yi) in x.iter().zip(y) {
        let u = (xi - shift) / scale;
        let w = yi.powi(4);
        let row = Vector3::new(1.0, u, u * u);
        ata += w * row * row.transpose();
        atb += w * row * (1.0 / yi);
    }
    let c = ata.lu().solve(&atb)?;
    let (c0, c1, c2) = (c[0], c[1], c[2]);
    if !(c2 > 0.0) {
        return None;
    }
    let u0 = -c1 / (2.0 * c2);
    let floor = c0 - c1 * c1 / (4.0 * c2);
    if !(floor > 0.0) {
        return None;
    }
    let fit = LorentzianFit {
        center: shift + u0 * scale,
        half_width: (floor / c2).sqrt() * scale,
        peak: 1.0 / floor,
        r_squared: 0.0,
    };
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(&xi, &yi)| (yi - fit.eval(xi)).powi(2)).sum();
    Some(LorentzianFit { r_squared: 1.0 - ss_res / ss_tot, ..fit })
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
pub fn golden_max(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa > fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Bisection root of `f` on `[lo, hi]`; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> Option<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
