//! Two-outcome randomized measurements `E_+ = gamma Pi_+ + (1 - gamma) 1/2` in `d`
//! dimensions, with `Pi_+` a rank-one projector.
//!
//! For a sharp probe and a target of strength `gamma`, with `c^2 = tr(Pi_a Pi_b)` and
//! `lambda = 2 sqrt((1 - c^2) c^2)`, the state `|psi_+>` (top eigenvector of the
//! disturbance operator) gives `C = gamma (2c^2 - 1)`, `D = gamma lambda` and therefore
//! `C^2 + D^2 = gamma^2`.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::cd::{disturbance_operator, CdValue};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, C64};
use crate::quantum::{Effect, LuedersInstrument, Povm};
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedDichotomic {
    gamma: f64,
    ket: Vec<C64>,
    projector_plus: Effect,
}

impl RandomizedDichotomic {
    /// `ket` spans the range of `Pi_+`; it is normalized here.
    pub fn new(gamma: f64, ket: &[C64]) -> Result<Self> {
        if ket.len() < 2 {
            return Err(Error::InvalidDim(ket.len()));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidGamma(gamma));
        }
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-12 || !norm.is_finite() {
            return Err(Error::ZeroBloch);
        }
        let ket: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        let projector_plus = Effect::new(ComplexMatrix::outer(&ket))?;
        Ok(Self { gamma, ket, projector_plus })
    }

    pub fn dim(&self) -> usize {
        self.ket.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn ket(&self) -> &[C64] {
        &self.ket
    }

    pub fn projector_plus(&self) -> &Effect {
        &self.projector_plus
    }

    pub fn is_sharp(&self) -> bool {
        (self.gamma - 1.0).abs() <= tol::PSD
    }

    /// Effects `E_+` and `1 - E_+`, labels `+1`, `-1`.
    pub fn to_povm(&self) -> Result<Povm> {
        let d = self.dim();
        let id = ComplexMatrix::identity(d);
        let plus = &self.projector_plus.matrix().scale(self.gamma) + &id.scale(0.5 * (1.0 - self.gamma));
        let minus = &id - &plus;
        Povm::from_matrices(alloc::vec![plus, minus], alloc::vec![1.0, -1.0])
    }

    pub fn instrument(&self) -> Result<LuedersInstrument> {
        LuedersInstrument::new(self.to_povm()?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapGeometry {
    pub c_squared: f64,
    pub lambda: f64,
    /// Eigenvector `|psi_+>` of the disturbance operator for eigenvalue `+lambda`.
    pub optimal_ket: Vec<C64>,
}

pub fn overlap(pa: &RandomizedDichotomic, pb: &RandomizedDichotomic) -> Result<OverlapGeometry> {
    if pa.dim() != pb.dim() {
        return Err(Error::DimensionMismatch { expected: pa.dim(), found: pb.dim() });
    }
    if !pa.is_sharp() {
        return Err(Error::ProbeNotSharp(pa.gamma));
    }
    let inner: C64 = pa.ket.iter().zip(&pb.ket).map(|(a, b)| a.conj() * b).sum();
    let c_squared = inner.norm_sqr().clamp(0.0, 1.0);
    let lambda = 2.0 * ((1.0 - c_squared) * c_squared).sqrt();

    let optimal_ket = if lambda <= 1e-9 {
        pa.ket.clone()
    } else {
        // d^ for the sharp target direction; its +lambda eigenvector does not depend on gamma_b
        let d = pa.dim();
        let m_b = &pb.projector_plus.matrix().scale(2.0) - &ComplexMatrix::identity(d);
        let op = disturbance_operator(&pa.instrument()?, &m_b)?;
        let eig = hermitian_eigen(&op)?;
        eig.vector(d - 1)
    };
    Ok(OverlapGeometry { c_squared, lambda, optimal_ket })
}

/// Closed-form `(C, D)` on `|psi_+>`; the target carries `gamma`.
pub fn cd_highdim(pa: &RandomizedDichotomic, pb: &RandomizedDichotomic) -> Result<CdValue> {
    let g = overlap(pa, pb)?;
    Ok(CdValue::new(pb.gamma * (2.0 * g.c_squared - 1.0), pb.gamma * g.lambda))
}

/// Generalized Bloch length `gamma sqrt(d - 1)` under `tr(sigma_i sigma_j) = d delta_ij`.
pub fn bloch_length(gamma: f64, dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidDim(dim));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidGamma(gamma));
    }
    Ok(gamma * ((dim - 1) as f64).sqrt())
}
