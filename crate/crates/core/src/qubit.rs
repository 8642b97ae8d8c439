//! Qubit two-outcome measurements in the four-vector form
//! `E_+- = ((1 +- b0) 1 +- b.sigma) / 2` and the closed-form CD ellipse they produce.
//!
//! With probe `(a0, a)` and target `(b0, b)` at angle `theta` between their Bloch
//! vectors, the optimal input state gives
//!
//! ```text
//! C = a0 b0 + |a||b| cos(theta) + delta |b| sin(theta)
//! D = s |b| sin(theta)
//! ```
//!
//! with `u_+- = sqrt((1 +- a0)^2 - |a|^2)`, squeeze `s = 1 - (u_+ + u_-)/2` and shear
//! `delta = (u_+ - u_-)/2`.

use alloc::vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::cd::CdValue;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};
use crate::quantum::{DensityMatrix, LuedersInstrument, Povm};
use crate::tol;

pub type Bloch = [f64; 3];

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_entries(2, vec![ZERO, ONE, ONE, ZERO]).expect("2x2")
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_entries(2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]).expect("2x2")
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&[1.0, -1.0])
}

/// `v . sigma`.
pub fn pauli_dot(v: &Bloch) -> ComplexMatrix {
    ComplexMatrix::from_entries(
        2,
        vec![
            C64::new(v[2], 0.0),
            C64::new(v[0], -v[1]),
            C64::new(v[0], v[1]),
            C64::new(-v[2], 0.0),
        ],
    )
    .expect("2x2")
}

pub fn dot(a: &Bloch, b: &Bloch) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &Bloch, b: &Bloch) -> Bloch {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm(v: &Bloch) -> f64 {
    dot(v, v).sqrt()
}

pub fn scaled(v: &Bloch, k: f64) -> Bloch {
    [v[0] * k, v[1] * k, v[2] * k]
}

fn unit(v: &Bloch) -> Result<Bloch> {
    let n = norm(v);
    if n <= 1e-12 {
        Err(Error::ZeroBloch)
    } else {
        Ok(scaled(v, 1.0 / n))
    }
}

/// `arccos(a^ . b^)` in `[0, pi]`.
pub fn angle_between(a: &Bloch, b: &Bloch) -> Result<f64> {
    let (a, b) = (unit(a)?, unit(b)?);
    Ok(dot(&a, &b).clamp(-1.0, 1.0).acos())
}

/// Unit vector in the x-z plane at angle `theta` from +x toward +z.
pub fn xz_direction(theta: f64) -> Bloch {
    [theta.cos(), 0.0, theta.sin()]
}

/// `(1 + r.sigma) / 2`.
pub fn bloch_state(r: &Bloch) -> Result<DensityMatrix> {
    let m = (&ComplexMatrix::identity(2) + &pauli_dot(r)).scale(0.5);
    DensityMatrix::new(m)
}

/// Bloch vector `(tr rho sx, tr rho sy, tr rho sz)`.
pub fn bloch_of(rho: &DensityMatrix) -> Result<Bloch> {
    if rho.dim() != 2 {
        return Err(Error::NonQubit(rho.dim()));
    }
    Ok([rho.expectation(&sigma_x()), rho.expectation(&sigma_y()), rho.expectation(&sigma_z())])
}

/// Proper rotation of Bloch vectors, stored as a row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3([[f64; 3]; 3]);

impl Rotation3 {
    /// Rodrigues rotation by `angle` about `axis` (normalized internally).
    pub fn axis_angle(axis: &Bloch, angle: f64) -> Result<Self> {
        let [x, y, z] = unit(axis)?;
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Ok(Self([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ]))
    }

    /// Rotation about +y, the axis that keeps the x-z plane in place.
    pub fn about_y(angle: f64) -> Self {
        Self::axis_angle(&[0.0, 1.0, 0.0], angle).expect("unit axis")
    }

    pub fn apply(&self, v: &Bloch) -> Bloch {
        let m = &self.0;
        [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
    }
}

/// Two-outcome qubit measurement `(b0, b)`; outcome labels `+1`, `-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QubitMeasurement {
    pub bias: f64,
    pub bloch: Bloch,
}

impl QubitMeasurement {
    /// Enforces positivity `|b0| + |b| <= 1`.
    pub fn new(bias: f64, bloch: Bloch) -> Result<Self> {
        let total = bias.abs() + norm(&bloch);
        if !total.is_finite() || total > 1.0 + tol::PSD {
            return Err(Error::InvalidMeasurement(total));
        }
        Ok(Self { bias, bloch })
    }

    /// Unbiased projective measurement along `direction`.
    pub fn sharp(direction: &Bloch) -> Result<Self> {
        Self::new(0.0, unit(direction)?)
    }

    /// Strength `gamma` along the x-z direction `theta`.
    pub fn in_xz_plane(gamma: f64, theta: f64, bias: f64) -> Result<Self> {
        Self::new(bias, scaled(&xz_direction(theta), gamma))
    }

    pub fn sharpness(&self) -> f64 {
        norm(&self.bloch)
    }

    pub fn direction(&self) -> Result<Bloch> {
        unit(&self.bloch)
    }

    /// Effect for outcome `+1` (`sign > 0`) or `-1`.
    pub fn effect_matrix(&self, sign: f64) -> ComplexMatrix {
        let s = sign.signum();
        let id = ComplexMatrix::identity(2).scale(1.0 + s * self.bias);
        (&id + &pauli_dot(&scaled(&self.bloch, s))).scale(0.5)
    }

    pub fn to_povm(&self) -> Result<Povm> {
        Povm::from_matrices(vec![self.effect_matrix(1.0), self.effect_matrix(-1.0)], vec![1.0, -1.0])
    }

    pub fn instrument(&self) -> Result<LuedersInstrument> {
        LuedersInstrument::new(self.to_povm()?)
    }

    /// `M = b0 1 + b.sigma`.
    pub fn observable(&self) -> ComplexMatrix {
        &ComplexMatrix::identity(2).scale(self.bias) + &pauli_dot(&self.bloch)
    }
}

/// Randomized measurement `E_+- = gamma Pi_+-(theta) + (1 - gamma) N_+-(b0)` with
/// `Pi_+-` projecting onto `cos(theta) sx + sin(theta) sz` and
/// `N_+- = (1 +- b0/(1-gamma)) 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvexPovmSpec {
    pub theta: f64,
    pub gamma: f64,
    pub bias_b0: f64,
}

impl ConvexPovmSpec {
    pub fn new(theta: f64, gamma: f64, bias_b0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) || !gamma.is_finite() {
            return Err(Error::InvalidGamma(gamma));
        }
        let limit = 1.0 - gamma;
        if !bias_b0.is_finite() || bias_b0.abs() > limit + tol::PSD {
            return Err(Error::InvalidBias { bias: bias_b0, limit });
        }
        Ok(Self { theta, gamma, bias_b0 })
    }

    pub fn to_measurement(&self) -> Result<QubitMeasurement> {
        QubitMeasurement::in_xz_plane(self.gamma, self.theta, self.bias_b0)
    }

    /// Builds the effects as the literal convex mixture of projector and dummy parts.
    pub fn to_povm(&self) -> Result<Povm> {
        let id = ComplexMatrix::identity(2);
        let axis = pauli_dot(&xz_direction(self.theta));
        let projector = |s: f64| (&id + &axis.scale(s)).scale(0.5);
        let dummy_weight = 1.0 - self.gamma;
        let dummy = |s: f64| {
            if dummy_weight <= 0.0 {
                ComplexMatrix::zeros(2)
            } else {
                id.scale(0.5 * (1.0 + s * self.bias_b0 / dummy_weight))
            }
        };
        let effect = |s: f64| &projector(s).scale(self.gamma) + &dummy(s).scale(dummy_weight);
        Povm::from_matrices(vec![effect(1.0), effect(-1.0)], vec![1.0, -1.0])
    }
}

/// Ellipse parameters generated by a probe, scaled for a target of strength `|b|` and bias `b0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EllipseCharacter {
    pub probe_sharpness: f64,
    pub probe_bias: f64,
    /// `a0 b0`
    pub shift: f64,
    /// `|a| |b|`
    pub scale_major: f64,
    /// `s |b|`
    pub scale_minor: f64,
    pub shear: f64,
    pub squeeze: f64,
    pub u_plus: f64,
    pub u_minus: f64,
}

impl EllipseCharacter {
    /// Rescales for a target of strength `target_gamma` and bias `target_bias`.
    pub fn for_target(&self, target_gamma: f64, target_bias: f64) -> Self {
        Self {
            shift: self.probe_bias * target_bias,
            scale_major: self.probe_sharpness * target_gamma,
            scale_minor: self.squeeze * target_gamma,
            ..*self
        }
    }
}

fn clamped_sqrt(x: f64) -> f64 {
    if (-tol::PSD..0.0).contains(&x) {
        0.0
    } else {
        x.sqrt()
    }
}

/// Squeeze, shear and `u_+-` of a probe, for a unit sharp unbiased target.
pub fn ellipse_character(probe: &QubitMeasurement) -> Result<EllipseCharacter> {
    let a = probe.sharpness();
    let a0 = probe.bias;
    if a0.abs() + a > 1.0 + tol::PSD {
        return Err(Error::InvalidMeasurement(a0.abs() + a));
    }
    let u_plus = clamped_sqrt((1.0 + a0) * (1.0 + a0) - a * a);
    let u_minus = clamped_sqrt((1.0 - a0) * (1.0 - a0) - a * a);
    let squeeze = 1.0 - 0.5 * (u_plus + u_minus);
    let shear = 0.5 * (u_plus - u_minus);
    Ok(EllipseCharacter {
        probe_sharpness: a,
        probe_bias: a0,
        shift: 0.0,
        scale_major: a,
        scale_minor: squeeze,
        shear,
        squeeze,
        u_plus,
        u_minus,
    })
}

/// Closed-form `(C, D)` on the optimal state for a target at angle `theta` from the probe.
pub fn cd_parametric(probe: &QubitMeasurement, target_gamma: f64, target_bias: f64, theta: f64) -> Result<CdValue> {
    if !(0.0..=1.0 + tol::PSD).contains(&target_gamma) || target_bias.abs() + target_gamma > 1.0 + tol::PSD {
        return Err(Error::InvalidMeasurement(target_bias.abs() + target_gamma));
    }
    let ch = ellipse_character(probe)?;
    let (s, c) = theta.sin_cos();
    let correlation = ch.probe_bias * target_bias + ch.probe_sharpness * target_gamma * c + ch.shear * target_gamma * s;
    let disturbance = ch.squeeze * target_gamma * s;
    Ok(CdValue::new(correlation, disturbance))
}

/// `C - a0 b0 = R cos(theta - phi)` with `R = |b| sqrt(|a|^2 + delta^2)`, `tan(phi) = delta/|a|`.
pub fn amplitude_phase_form(ch: &EllipseCharacter, target_gamma: f64) -> Result<(f64, f64)> {
    if ch.probe_sharpness <= 0.0 {
        return Err(Error::ZeroBloch);
    }
    let r = target_gamma * (ch.probe_sharpness * ch.probe_sharpness + ch.shear * ch.shear).sqrt();
    Ok((r, ch.shear.atan2(ch.probe_sharpness)))
}

/// Unit Bloch vector `-a^ x (a^ x b^)`, normalized: perpendicular to the probe, in the
/// plane of both measurement directions, pointing toward the target.
///
/// When the directions are parallel every state gives `D = 0`; the vector
/// `a^ x e` for the first standard basis vector `e` not parallel to `a^` is returned.
pub fn optimal_bloch(probe_dir: &Bloch, target_dir: &Bloch) -> Result<Bloch> {
    let a = unit(probe_dir)?;
    let b = unit(target_dir)?;
    let v = scaled(&cross(&a, &cross(&a, &b)), -1.0);
    if norm(&v) > 1e-9 {
        return unit(&v);
    }
    const BASIS: [Bloch; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for e in &BASIS {
        let c = cross(&a, e);
        if norm(&c) > 1e-6 {
            return unit(&c);
        }
    }
    unreachable!("a unit vector is parallel to at most one basis vector")
}

/// Pure state maximizing `D` for the given probe and target.
pub fn optimal_state(probe: &QubitMeasurement, target: &QubitMeasurement) -> Result<DensityMatrix> {
    bloch_state(&optimal_bloch(&probe.bloch, &target.bloch)?)
}
