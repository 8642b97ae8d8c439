//! States, effects, POVMs and Lüders instruments on a finite-dimensional Hilbert space,
//! plus the sequential (probe then target) outcome statistics.
//!
//! Validation happens once, at construction. Every operation afterwards is a pure
//! function of already-valid inputs.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, C64};
use crate::tol;

/// Unit-trace, Hermitian, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_hermitian(&matrix)?;
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > tol::TRACE {
            return Err(Error::NotUnitTrace { trace });
        }
        let eig = hermitian_eigen(&matrix)?;
        if eig.min_value() < -tol::PSD {
            return Err(Error::NotPsd { min_eigenvalue: eig.min_value() });
        }
        Ok(Self { matrix })
    }

    /// Pure state `|psi><psi|`; the ket is normalized here.
    pub fn pure(ket: &[C64]) -> Result<Self> {
        if ket.is_empty() {
            return Err(Error::InvalidDim(0));
        }
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotUnitTrace { trace: norm * norm });
        }
        let ket: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        Ok(Self { matrix: ComplexMatrix::outer(&ket) })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64) }
    }

    /// Normalizes a nonzero subnormalized state such as `K rho K^dagger`.
    pub fn from_subnormalized(matrix: ComplexMatrix) -> Result<Self> {
        let trace = matrix.trace().re;
        if trace <= 0.0 {
            return Err(Error::NotUnitTrace { trace });
        }
        Self::new(matrix.scale(1.0 / trace))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `tr(rho * op)`, real part.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        self.matrix.trace_product(op).re
    }
}

/// Hermitian operator with spectrum in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    matrix: ComplexMatrix,
}

impl Effect {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_hermitian(&matrix)?;
        let eig = hermitian_eigen(&matrix)?;
        if eig.min_value() < -tol::PSD {
            return Err(Error::EffectOutOfRange { eigenvalue: eig.min_value() });
        }
        if eig.max_value() > 1.0 + tol::PSD {
            return Err(Error::EffectOutOfRange { eigenvalue: eig.max_value() });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Ordered effects with one real outcome label each.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<Effect>,
    labels: Vec<f64>,
}

impl Povm {
    pub fn new(effects: Vec<Effect>, labels: Vec<f64>) -> Result<Self> {
        if effects.len() < 2 {
            return Err(Error::TooFewOutcomes(effects.len()));
        }
        if effects.len() != labels.len() {
            return Err(Error::LabelCountMismatch { effects: effects.len(), labels: labels.len() });
        }
        let dim = effects[0].dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for e in &effects {
            e.matrix.check_dim(dim)?;
            sum = &sum + &e.matrix;
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if deviation > tol::COMPLETE {
            return Err(Error::NotComplete { deviation });
        }
        Ok(Self { effects, labels })
    }

    /// Builds a POVM from raw matrices, validating each effect.
    pub fn from_matrices(matrices: Vec<ComplexMatrix>, labels: Vec<f64>) -> Result<Self> {
        let effects = matrices.into_iter().map(Effect::new).collect::<Result<Vec<_>>>()?;
        Self::new(effects, labels)
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    /// `M = sum_alpha alpha E_alpha`.
    pub fn observable(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim());
        for (e, &l) in self.effects.iter().zip(&self.labels) {
            m = &m + &e.matrix.scale(l);
        }
        m
    }

    /// Born-rule distribution `tr(rho E_alpha)`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        rho.matrix.check_dim(self.dim())?;
        Ok(self.effects.iter().map(|e| rho.expectation(&e.matrix)).collect())
    }
}

/// Lüders instrument: Kraus operator `K_alpha = E_alpha^{1/2}` for every effect.
#[derive(Debug, Clone, PartialEq)]
pub struct LuedersInstrument {
    povm: Povm,
    kraus: Vec<ComplexMatrix>,
}

impl LuedersInstrument {
    pub fn new(povm: Povm) -> Result<Self> {
        let kraus = povm.effects.iter().map(|e| psd_sqrt(&e.matrix)).collect::<Result<Vec<_>>>()?;
        Ok(Self { povm, kraus })
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.povm.dim()
    }

    pub fn len(&self) -> usize {
        self.povm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.povm.is_empty()
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    let deviation = m.hermiticity_deviation();
    if deviation > tol::HERM {
        Err(Error::NotHermitian { deviation })
    } else {
        Ok(())
    }
}

/// Principal square root of a Hermitian PSD matrix.
///
/// Eigenvalues in `[-tol::PSD, 0)` are clamped to zero; anything more negative is an error.
/// Eigenvalues within rounding noise of zero (`64 eps` relative to the spectral radius)
/// are also set to zero, so a projector maps exactly onto itself instead of picking up
/// `sqrt(eps)`-sized entries.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_hermitian(m)?;
    let eig = hermitian_eigen(m)?;
    if eig.min_value() < -tol::PSD {
        return Err(Error::NotPsd { min_eigenvalue: eig.min_value() });
    }
    let noise = 64.0 * f64::EPSILON * eig.max_value().abs().max(eig.min_value().abs());
    Ok(eig.map_values(|l| if l <= noise { 0.0 } else { l.sqrt() }))
}

/// `(K rho K^dagger, tr(K rho K^dagger))` for one outcome of the instrument.
pub fn apply_instrument(
    inst: &LuedersInstrument,
    rho: &DensityMatrix,
    outcome: usize,
) -> Result<(ComplexMatrix, f64)> {
    rho.matrix.check_dim(inst.dim())?;
    let k = inst.kraus.get(outcome).ok_or(Error::InvalidOutcome { index: outcome, outcomes: inst.len() })?;
    let out = rho.matrix.sandwich(k);
    let p = out.trace().re;
    Ok((out, p))
}

/// State after the instrument fires with its outcome discarded: `sum_alpha K rho K^dagger`.
pub fn unregistered_channel(inst: &LuedersInstrument, rho: &DensityMatrix) -> Result<DensityMatrix> {
    rho.matrix.check_dim(inst.dim())?;
    let mut out = ComplexMatrix::zeros(inst.dim());
    for k in &inst.kraus {
        out = &out + &rho.matrix.sandwich(k);
    }
    // Trace preservation holds to rounding; keep the matrix exactly Hermitian.
    Ok(DensityMatrix { matrix: out.hermitian_part() })
}

/// Heisenberg-picture dual of the unregistered channel: `sum_alpha K op K`.
pub fn dual_channel(inst: &LuedersInstrument, op: &ComplexMatrix) -> Result<ComplexMatrix> {
    op.check_dim(inst.dim())?;
    let mut out = ComplexMatrix::zeros(inst.dim());
    for k in &inst.kraus {
        out = &out + &(&(k * op) * k);
    }
    Ok(out)
}

/// Joint outcome distribution `p(alpha, beta)` of a probe followed by a target.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JointTable {
    pub labels_a: Vec<f64>,
    pub labels_b: Vec<f64>,
    /// Row-major, `labels_a.len()` rows by `labels_b.len()` columns.
    pub probs: Vec<f64>,
}

impl JointTable {
    pub fn new(labels_a: Vec<f64>, labels_b: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let expected = labels_a.len() * labels_b.len();
        if probs.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: probs.len() });
        }
        Ok(Self { labels_a, labels_b, probs })
    }

    pub fn rows(&self) -> usize {
        self.labels_a.len()
    }

    pub fn cols(&self) -> usize {
        self.labels_b.len()
    }

    pub fn get(&self, alpha: usize, beta: usize) -> f64 {
        self.probs[alpha * self.cols() + beta]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `sum_beta p(alpha, beta)`.
    pub fn probe_marginal(&self) -> Vec<f64> {
        (0..self.rows()).map(|a| (0..self.cols()).map(|b| self.get(a, b)).sum()).collect()
    }

    /// `sum_alpha p(alpha, beta)`, the target statistics with the probe outcome ignored.
    pub fn target_marginal(&self) -> Vec<f64> {
        (0..self.cols()).map(|b| (0..self.rows()).map(|a| self.get(a, b)).sum()).collect()
    }
}

/// `p(alpha, beta) = tr(K_alpha rho K_alpha^dagger E_beta)`.
pub fn joint_probabilities(inst_a: &LuedersInstrument, povm_b: &Povm, rho: &DensityMatrix) -> Result<JointTable> {
    rho.matrix.check_dim(inst_a.dim())?;
    povm_b.effects[0].matrix.check_dim(inst_a.dim())?;
    let mut probs = Vec::with_capacity(inst_a.len() * povm_b.len());
    for k in &inst_a.kraus {
        let post = rho.matrix.sandwich(k);
        for e in &povm_b.effects {
            probs.push(post.trace_product(&e.matrix).re);
        }
    }
    JointTable::new(inst_a.povm.labels.clone(), povm_b.labels.clone(), probs)
}
