//! Device parameters from measured `(C, D)` scans.
//!
//! A qubit scan with the target rotated by `theta` relative to the probe traces
//!
//! ```text
//! C = a0 b0 + |a||b| cos(theta) + delta |b| sin(theta)
//! D = s |b| sin(theta)
//! ```
//!
//! From `(C, D)` data alone only the products `a0 b0`, `|a||b|`, `delta |b|` and `s |b|`
//! are identifiable. A sharp-probe reference run (`C^2 + D^2 = |b|^2`) supplies `|b|`,
//! after which every probe parameter separates.

mod conic;

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use conic::{fit_ellipse, EllipseForm};

use crate::detector::{estimate_noise, DetectorNoise};
use crate::error::{Error, Result};
use crate::linalg::solve_real;
use crate::qubit::{ellipse_character, QubitMeasurement};

/// One measured point; `theta` is `None` when the setting is unknown.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CdPoint {
    pub theta: Option<f64>,
    pub c: f64,
    pub d: f64,
    pub c_err: f64,
    pub d_err: f64,
}

impl CdPoint {
    pub fn exact(theta: f64, c: f64, d: f64) -> Self {
        Self { theta: Some(theta), c, d, c_err: 0.0, d_err: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CdScan {
    pub points: Vec<CdPoint>,
}

impl CdScan {
    pub fn new(points: Vec<CdPoint>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn has_errors(&self) -> bool {
        self.points.iter().all(|p| p.c_err > 0.0 && p.d_err > 0.0)
    }
}

/// Target strength `|b|` from a sharp-probe run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CircleFit {
    pub target_strength: f64,
    pub error: f64,
    /// RMS of `sqrt(C^2 + D^2) - |b|`.
    pub residual: f64,
}

/// `|b| = sqrt(<C^2 + D^2>)`, inverse-variance weighted when every point carries errors.
pub fn fit_circle_sharp_probe(scan: &CdScan) -> Result<CircleFit> {
    let n = scan.len();
    if n < 2 {
        return Err(Error::InsufficientPoints { needed: 2, found: n });
    }
    let r2: Vec<f64> = scan.points.iter().map(|p| p.c * p.c + p.d * p.d).collect();
    let (mean, se) = if scan.has_errors() {
        let w: Vec<f64> = scan
            .points
            .iter()
            .map(|p| {
                let var = (2.0 * p.c * p.c_err).powi(2) + (2.0 * p.d * p.d_err).powi(2);
                1.0 / var.max(f64::MIN_POSITIVE)
            })
            .collect();
        let wsum: f64 = w.iter().sum();
        let mean = w.iter().zip(&r2).map(|(w, r)| w * r).sum::<f64>() / wsum;
        (mean, 1.0 / wsum.sqrt())
    } else {
        let mean = r2.iter().sum::<f64>() / n as f64;
        let var = r2.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (mean, (var / n as f64).sqrt())
    };
    let target_strength = mean.max(0.0).sqrt();
    let error = if target_strength > 0.0 { se / (2.0 * target_strength) } else { se.sqrt() };
    let residual =
        (r2.iter().map(|r| (r.sqrt() - target_strength).powi(2)).sum::<f64>() / n as f64).sqrt();
    Ok(CircleFit { target_strength, error, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Identifiability {
    Full,
    CombosOnly,
}

/// Recovered ellipse parameters. The products are always set; the separated parameters
/// only when `identifiability` is `Full`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeviceCharacter {
    /// `a0 b0`
    pub center_shift: f64,
    /// `|a| |b|`
    pub strength_product: f64,
    /// `delta |b|`
    pub shear_product: f64,
    /// `s |b|`
    pub squeeze_product: f64,
    /// `delta / s`; `None` when the squeeze vanishes.
    pub shear_ratio: Option<f64>,
    pub identifiability: Identifiability,
    /// RMS fit residual.
    pub residual: f64,
    pub target_strength: Option<f64>,
    pub probe_sharpness: Option<f64>,
    pub probe_bias: Option<f64>,
    /// `b0`; `None` also when `a0 = 0` leaves it undetermined.
    pub target_bias: Option<f64>,
    pub squeeze: Option<f64>,
    pub shear: Option<f64>,
    /// Largest mismatch between the fitted `(s, delta)` and the values implied by the
    /// fitted `(|a|, a0)`.
    pub consistency: Option<f64>,
}

impl DeviceCharacter {
    fn from_products(c0: f64, p: f64, q: f64, s: f64, residual: f64) -> Self {
        Self {
            center_shift: c0,
            strength_product: p,
            shear_product: q,
            squeeze_product: s,
            shear_ratio: (s.abs() > 1e-12).then(|| q / s),
            identifiability: Identifiability::CombosOnly,
            residual,
            target_strength: None,
            probe_sharpness: None,
            probe_bias: None,
            target_bias: None,
            squeeze: None,
            shear: None,
            consistency: None,
        }
    }

    /// Separates every parameter given the target strength `|b|`.
    pub fn with_target_strength(mut self, target_strength: f64) -> Result<Self> {
        if !(target_strength > 0.0 && target_strength <= 1.0 + crate::tol::PSD) {
            return Err(Error::InvalidGamma(target_strength));
        }
        let a = self.strength_product / target_strength;
        let s = self.squeeze_product / target_strength;
        let delta = self.shear_product / target_strength;
        let a0 = delta * (1.0 - s);
        self.identifiability = Identifiability::Full;
        self.target_strength = Some(target_strength);
        self.probe_sharpness = Some(a);
        self.probe_bias = Some(a0);
        self.squeeze = Some(s);
        self.shear = Some(delta);
        self.target_bias = (a0.abs() > 1e-9).then(|| self.center_shift / a0);
        self.consistency = QubitMeasurement::new(a0, [a, 0.0, 0.0])
            .and_then(|m| ellipse_character(&m))
            .ok()
            .map(|ch| (ch.squeeze - s).abs().max((ch.shear - delta).abs()));
        Ok(self)
    }

    /// The four identifiable products followed by the shear ratio (NaN when undefined).
    pub fn products(&self) -> [f64; 5] {
        [
            self.center_shift,
            self.strength_product,
            self.shear_product,
            self.squeeze_product,
            self.shear_ratio.unwrap_or(f64::NAN),
        ]
    }
}

fn weights(scan: &CdScan, pick: impl Fn(&CdPoint) -> f64) -> Vec<f64> {
    if scan.has_errors() {
        scan.points.iter().map(|p| 1.0 / pick(p).powi(2)).collect()
    } else {
        alloc::vec![1.0; scan.len()]
    }
}

/// Linear least squares for `C = c0 + P cos + Q sin`, `D = S sin` at known angles.
pub fn fit_ellipse_known_theta(scan: &CdScan, target_strength: Option<f64>) -> Result<DeviceCharacter> {
    let n = scan.len();
    if n < 4 {
        return Err(Error::InsufficientPoints { needed: 4, found: n });
    }
    let thetas: Vec<f64> = scan
        .points
        .iter()
        .map(|p| p.theta.ok_or(Error::OutOfDomain("known-theta fit needs theta on every point")))
        .collect::<Result<_>>()?;
    let mut distinct = thetas.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if distinct.len() < 3 {
        return Err(Error::RankDeficient);
    }

    let wc = weights(scan, |p| p.c_err);
    let wd = weights(scan, |p| p.d_err);
    let mut ata = [0.0; 9];
    let mut atb = [0.0; 3];
    let (mut ss, mut sd) = (0.0, 0.0);
    for ((p, &t), (&w_c, &w_d)) in scan.points.iter().zip(&thetas).zip(wc.iter().zip(&wd)) {
        let (s, c) = t.sin_cos();
        let row = [1.0, c, s];
        for i in 0..3 {
            for j in 0..3 {
                ata[3 * i + j] += w_c * row[i] * row[j];
            }
            atb[i] += w_c * row[i] * p.c;
        }
        ss += w_d * s * s;
        sd += w_d * s * p.d;
    }
    let x = solve_real(&ata, &atb, 3, 1e-12).ok_or(Error::RankDeficient)?;
    if ss <= 1e-12 * wd.iter().sum::<f64>() {
        return Err(Error::RankDeficient);
    }
    let (c0, pp, qq, sq) = (x[0], x[1], x[2], sd / ss);

    let mut sq_res = 0.0;
    for (p, &t) in scan.points.iter().zip(&thetas) {
        let (s, c) = t.sin_cos();
        sq_res += (p.c - (c0 + pp * c + qq * s)).powi(2) + (p.d - sq * s).powi(2);
    }
    let ch = DeviceCharacter::from_products(c0, pp, qq, sq, (sq_res / (2.0 * n as f64)).sqrt());
    match target_strength {
        Some(b) => ch.with_target_strength(b),
        None => Ok(ch),
    }
}

/// Conic fit of the scan in the `(C, D)` plane, without angles.
pub fn fit_ellipse_unknown_theta(scan: &CdScan) -> Result<DeviceCharacter> {
    let pts: Vec<(f64, f64)> = scan.points.iter().map(|p| (p.c, p.d)).collect();
    let form = fit_ellipse(&pts)?;
    // ((C - c0 - k D) / P)^2 + (D / S)^2 = 1
    let p = 1.0 / form.a.sqrt();
    let k = -form.b / (2.0 * form.a);
    let inv_s2 = form.c - form.b * form.b / (4.0 * form.a);
    if !(inv_s2 > 0.0) {
        return Err(Error::NotAnEllipse);
    }
    let s = 1.0 / inv_s2.sqrt();
    Ok(DeviceCharacter::from_products(form.center.0, p, k * s, s, form.residual))
}

/// Spread of fitted quantities over pair-resampled scans.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bootstrap {
    /// Standard deviation of each fitted component.
    pub std_dev: Vec<f64>,
    /// Resamples whose fit succeeded.
    pub accepted: usize,
}

/// Nonparametric bootstrap; resample `i` draws from `ChaCha8Rng::seed_from_u64(seed ^ i)`.
/// Failed fits are skipped. `fit` returns the components to summarize.
pub fn bootstrap<F>(scan: &CdScan, resamples: usize, seed: u64, fit: F) -> Result<Bootstrap>
where
    F: Fn(&CdScan) -> Result<Vec<f64>>,
{
    let n = scan.len();
    if n == 0 {
        return Err(Error::InsufficientPoints { needed: 1, found: 0 });
    }
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(resamples);
    for i in 0..resamples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
        let resampled = CdScan::new((0..n).map(|_| scan.points[rng.random_range(0..n)]).collect());
        if let Ok(v) = fit(&resampled) {
            if v.iter().all(|x| x.is_finite()) {
                samples.push(v);
            }
        }
    }
    if samples.len() < 2 {
        return Err(Error::InsufficientPoints { needed: 2, found: samples.len() });
    }
    let m = samples[0].len();
    let count = samples.len() as f64;
    let std_dev = (0..m)
        .map(|j| {
            let mean = samples.iter().map(|s| s[j]).sum::<f64>() / count;
            (samples.iter().map(|s| (s[j] - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
        })
        .collect();
    Ok(Bootstrap { std_dev, accepted: samples.len() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectorEstimate {
    pub noise: DetectorNoise,
    pub eta_err: f64,
    pub nu_err: f64,
}

/// Excess over a physical bound still attributed to shot noise, in standard errors.
pub const BOUNDARY_SIGMAS: f64 = 5.0;

/// Detector noise from the two reference measurements with first-order error propagation.
///
/// Estimates that overshoot `exp(-nu) <= 1` or `eta <= 1` by at most
/// [`BOUNDARY_SIGMAS`] propagated errors are projected onto the bound.
pub fn estimate_detector(d1: f64, c2: f64, d1_err: f64, c2_err: f64) -> Result<DetectorEstimate> {
    if !(d1_err >= 0.0 && c2_err >= 0.0) {
        return Err(Error::OutOfDomain("reference errors must be nonnegative"));
    }
    let k = 0.5 * (c2 + d1 + 1.0);
    let k_err = 0.5 * d1_err.hypot(c2_err);
    let (mut d1p, mut c2p) = (d1, c2);
    if k > 1.0 && k - 1.0 <= BOUNDARY_SIGMAS * k_err {
        // move both references equally so that exp(-nu) = 1
        let shift = k - 1.0;
        d1p -= shift;
        c2p -= shift;
    }
    // eta = 1 is the line D1 = C2 + 1
    let excess = d1p - c2p - 1.0;
    if excess > 0.0 && excess <= BOUNDARY_SIGMAS * d1_err.hypot(c2_err) {
        d1p -= 0.5 * excess;
        c2p += 0.5 * excess;
    }
    let noise = estimate_noise(d1p, c2p)?;
    let k = 0.5 * (c2p + d1p + 1.0);
    let deta_dd1 = 1.0 / k - d1p / (2.0 * k * k);
    let deta_dc2 = -d1p / (2.0 * k * k);
    let dnu = -1.0 / (2.0 * k);
    let eta_err = ((deta_dd1 * d1_err).powi(2) + (deta_dc2 * c2_err).powi(2)).sqrt();
    let nu_err = ((dnu * d1_err).powi(2) + (dnu * c2_err).powi(2)).sqrt();
    Ok(DetectorEstimate { noise, eta_err, nu_err })
}
