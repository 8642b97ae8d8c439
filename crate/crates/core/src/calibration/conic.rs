//! Direct least-squares ellipse fit (Halir–Flusser split of the Fitzgibbon problem).
//!
//! The 3x3 reduced eigenproblem is solved through its characteristic cubic; eigenvectors
//! come from cross products of rows of `M - lambda I`.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::solve_real;

/// Ellipse `(p - center)^T Q (p - center) = 1` with `Q = [[a, b/2], [b/2, c]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseForm {
    pub center: (f64, f64),
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// RMS of `q(p_i) - 1` over the fitted points.
    pub residual: f64,
}

impl EllipseForm {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (u, v) = (x - self.center.0, y - self.center.1);
        self.a * u * u + self.b * u * v + self.c * v * v
    }
}

type M3 = [[f64; 3]; 3];

fn mat_mul(a: &M3, b: &M3) -> M3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Real roots of `x^3 + p x^2 + q x + r`, Newton-polished.
pub(crate) fn real_cubic_roots(p: f64, q: f64, r: f64) -> Vec<f64> {
    let shift = p / 3.0;
    let dp = q - p * p / 3.0;
    let dq = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
    let disc = dq * dq / 4.0 + dp * dp * dp / 27.0;
    let mut roots = Vec::with_capacity(3);
    if dp.abs() < 1e-300 && dq.abs() < 1e-300 {
        roots.push(-shift);
    } else if disc > 0.0 {
        let s = disc.sqrt();
        roots.push((-dq / 2.0 + s).cbrt() + (-dq / 2.0 - s).cbrt() - shift);
    } else {
        let m = 2.0 * (-dp / 3.0).sqrt();
        let arg = (3.0 * dq / (dp * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        for k in 0..3 {
            roots.push(m * (phi - 2.0 * core::f64::consts::PI * k as f64 / 3.0).cos() - shift);
        }
    }
    for x in &mut roots {
        for _ in 0..4 {
            let f = ((*x + p) * *x + q) * *x + r;
            let df = (3.0 * *x + 2.0 * p) * *x + q;
            if df.abs() < 1e-300 {
                break;
            }
            *x -= f / df;
        }
    }
    roots
}

/// Unit vector spanning the (numerical) null space of a 3x3 matrix.
fn null_vector(m: &M3) -> Option<[f64; 3]> {
    let candidates = [cross(&m[0], &m[1]), cross(&m[0], &m[2]), cross(&m[1], &m[2])];
    let best = candidates.iter().max_by(|a, b| norm3(a).total_cmp(&norm3(b)))?;
    let n = norm3(best);
    (n > 0.0 && n.is_finite()).then(|| [best[0] / n, best[1] / n, best[2] / n])
}

/// Fits an ellipse to at least six points.
pub fn fit_ellipse(points: &[(f64, f64)]) -> Result<EllipseForm> {
    if points.len() < 6 {
        return Err(Error::InsufficientPoints { needed: 6, found: points.len() });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let spread = (points.iter().map(|p| (p.0 - mx).powi(2) + (p.1 - my).powi(2)).sum::<f64>() / (2.0 * n)).sqrt();
    if !(spread > 0.0) || !spread.is_finite() {
        return Err(Error::RankDeficient);
    }
    let norm: Vec<(f64, f64)> = points.iter().map(|p| ((p.0 - mx) / spread, (p.1 - my) / spread)).collect();

    let mut s1 = [[0.0; 3]; 3];
    let mut s2 = [[0.0; 3]; 3];
    let mut s3 = [[0.0; 3]; 3];
    for &(x, y) in &norm {
        let d1 = [x * x, x * y, y * y];
        let d2 = [x, y, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                s1[i][j] += d1[i] * d1[j];
                s2[i][j] += d1[i] * d2[j];
                s3[i][j] += d2[i] * d2[j];
            }
        }
    }
    let s3_flat: Vec<f64> = s3.iter().flatten().copied().collect();
    // T = -S3^{-1} S2^T, column by column
    let mut t = [[0.0; 3]; 3];
    for col in 0..3 {
        let rhs = [s2[col][0], s2[col][1], s2[col][2]];
        let x = solve_real(&s3_flat, &rhs, 3, 1e-14).ok_or(Error::RankDeficient)?;
        for row in 0..3 {
            t[row][col] = -x[row];
        }
    }
    let s2t = mat_mul(&s2, &t);
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = s1[i][j] + s2t[i][j];
        }
    }
    // premultiply by the inverse of the constraint matrix [[0,0,2],[0,-1,0],[2,0,0]]
    let m = [
        [m[2][0] / 2.0, m[2][1] / 2.0, m[2][2] / 2.0],
        [-m[1][0], -m[1][1], -m[1][2]],
        [m[0][0] / 2.0, m[0][1] / 2.0, m[0][2] / 2.0],
    ];
    let trace = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);

    let mut best: Option<([f64; 6], f64)> = None;
    for lambda in real_cubic_roots(-trace, minors, -det) {
        let mut shifted = m;
        for (i, row) in shifted.iter_mut().enumerate() {
            row[i] -= lambda;
        }
        let Some(v) = null_vector(&shifted) else { continue };
        let cond = 4.0 * v[0] * v[2] - v[1] * v[1];
        if !(cond > 0.0) {
            continue;
        }
        let k = 1.0 / cond.sqrt();
        let a1 = [v[0] * k, v[1] * k, v[2] * k];
        let a2: Vec<f64> = (0..3).map(|r| (0..3).map(|c| t[r][c] * a1[c]).sum()).collect();
        let coeffs = [a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]];
        let residual: f64 = norm
            .iter()
            .map(|&(x, y)| {
                let q = coeffs[0] * x * x + coeffs[1] * x * y + coeffs[2] * y * y + coeffs[3] * x + coeffs[4] * y + coeffs[5];
                q * q
            })
            .sum();
        if best.as_ref().map_or(true, |(_, r)| residual < *r) {
            best = Some((coeffs, residual));
        }
    }
    let (co, _) = best.ok_or(Error::NotAnEllipse)?;
    let [a, b, c, d, e, f] = co;

    // center from the vanishing gradient, in normalized coordinates
    let det2 = 4.0 * a * c - b * b;
    let xc = (b * e - 2.0 * c * d) / det2;
    let yc = (b * d - 2.0 * a * e) / det2;
    let level = -(a * xc * xc + b * xc * yc + c * yc * yc + d * xc + e * yc + f);
    if !(level.abs() > 0.0) || !level.is_finite() {
        return Err(Error::NotAnEllipse);
    }
    let s2 = spread * spread;
    let (qa, qb, qc) = (a / level / s2, b / level / s2, c / level / s2);
    if !(qa > 0.0 && 4.0 * qa * qc - qb * qb > 0.0) {
        return Err(Error::NotAnEllipse);
    }
    let mut form = EllipseForm { center: (mx + spread * xc, my + spread * yc), a: qa, b: qb, c: qc, residual: 0.0 };
    form.residual = (points.iter().map(|&(x, y)| (form.eval(x, y) - 1.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(form)
}
