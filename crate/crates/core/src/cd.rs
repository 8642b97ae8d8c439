//! Correlation `C` and disturbance `D` for a probe measurement followed by a target
//! measurement, in statistical form and as operator expectation values.
//!
//! For `n` outcomes with a shared label set:
//!
//! ```text
//! C = n/(n-1) * (p(alpha = beta) - 1/n)
//! D = sqrt(n/(n-1)) * || p(beta|b) - p~(beta|b) ||_2
//! ```
//!
//! where `p~` is the target distribution after the probe fires unregistered. Both obey
//! `C^2 + D^2 <= 1`. For dichotomic `+1/-1` devices the operator forms
//! `C = tr(rho C^)` and signed `D = tr(rho d^)` hold with
//! `d^ = M_b - I*(M_b)` and `C^ = 1/2 {M_a, M_b} - sum_alpha alpha L*_alpha(M_b)`.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix};
use crate::quantum::{dual_channel, joint_probabilities, DensityMatrix, JointTable, LuedersInstrument, Povm};
use crate::tol;

/// One (correlation, disturbance) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CdValue {
    pub correlation: f64,
    pub disturbance: f64,
}

impl CdValue {
    pub fn new(correlation: f64, disturbance: f64) -> Self {
        Self { correlation, disturbance }
    }

    /// `C^2 + D^2`, bounded by one for every valid scenario.
    pub fn radius_squared(&self) -> f64 {
        self.correlation * self.correlation + self.disturbance * self.disturbance
    }
}

/// Normalized distribution over labelled outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    probs: Vec<f64>,
    labels: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(probs: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        if probs.len() != labels.len() {
            return Err(Error::LabelCountMismatch { effects: probs.len(), labels: labels.len() });
        }
        check_normalized(&probs)?;
        Ok(Self { probs, labels })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    fn prob_of(&self, label: f64) -> Option<f64> {
        self.labels.iter().position(|&l| l == label).map(|i| self.probs[i])
    }
}

fn check_normalized(probs: &[f64]) -> Result<()> {
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tol::PROB || probs.iter().any(|&p| !(-tol::PROB..=1.0 + tol::PROB).contains(&p)) {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

/// True when both slices hold the same set of distinct labels.
fn same_label_set(a: &[f64], b: &[f64]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.windows(2).all(|w| w[0] != w[1]) && a == b
}

fn is_plus_minus_one(labels: &[f64]) -> bool {
    same_label_set(labels, &[1.0, -1.0])
}

/// Rescaled probability that probe and target report the same label.
pub fn correlation(joint: &JointTable) -> Result<f64> {
    if !same_label_set(&joint.labels_a, &joint.labels_b) {
        return Err(Error::LabelMismatch);
    }
    check_normalized(&joint.probs)?;
    let n = joint.rows() as f64;
    let mut matched = 0.0;
    for (a, la) in joint.labels_a.iter().enumerate() {
        for (b, lb) in joint.labels_b.iter().enumerate() {
            if la == lb {
                matched += joint.get(a, b);
            }
        }
    }
    Ok(n / (n - 1.0) * (matched - 1.0 / n))
}

/// Rescaled Euclidean distance between the target statistics with the probe off and on.
pub fn disturbance(p_alone: &OutcomeDistribution, p_tilde: &OutcomeDistribution) -> Result<f64> {
    if !same_label_set(&p_alone.labels, &p_tilde.labels) {
        return Err(Error::LabelMismatch);
    }
    let n = p_alone.probs.len() as f64;
    let mut sq = 0.0;
    for (&l, &p) in p_alone.labels.iter().zip(&p_alone.probs) {
        let q = p_tilde.prob_of(l).ok_or(Error::LabelMismatch)?;
        sq += (p - q) * (p - q);
    }
    Ok((n / (n - 1.0)).sqrt() * sq.sqrt())
}

/// Target statistics with and without the (unregistered) probe in place.
fn target_arms(rho: &DensityMatrix, povm_b: &Povm, joint: &JointTable) -> Result<(OutcomeDistribution, OutcomeDistribution)> {
    let alone = OutcomeDistribution::new(povm_b.probabilities(rho)?, povm_b.labels().to_vec())?;
    let tilde = OutcomeDistribution::new(joint.target_marginal(), povm_b.labels().to_vec())?;
    Ok((alone, tilde))
}

/// Exact `(C, D)` of a sequential scenario.
pub fn cd_from_scenario(rho: &DensityMatrix, inst_a: &LuedersInstrument, povm_b: &Povm) -> Result<CdValue> {
    let joint = joint_probabilities(inst_a, povm_b, rho)?;
    let c = correlation(&joint)?;
    let (alone, tilde) = target_arms(rho, povm_b, &joint)?;
    Ok(CdValue::new(c, disturbance(&alone, &tilde)?))
}

/// `sum_beta beta (p(beta|b) - p~(beta|b))` for a `+1/-1` target; equals `tr(rho d^)`.
///
/// Its absolute value is `D`. On the optimal state it is nonnegative.
pub fn signed_disturbance(rho: &DensityMatrix, inst_a: &LuedersInstrument, povm_b: &Povm) -> Result<f64> {
    if !is_plus_minus_one(povm_b.labels()) {
        return Err(Error::NotDichotomic);
    }
    let joint = joint_probabilities(inst_a, povm_b, rho)?;
    let (alone, tilde) = target_arms(rho, povm_b, &joint)?;
    Ok(povm_b
        .labels()
        .iter()
        .zip(alone.probs.iter().zip(&tilde.probs))
        .map(|(l, (p, q))| l * (p - q))
        .sum())
}

/// `L*(M) = 1/2 [K, [K, M]]` for `K = E^{1/2}`.
pub fn dissipator(effect_sqrt: &ComplexMatrix, target: &ComplexMatrix) -> Result<ComplexMatrix> {
    target.check_dim(effect_sqrt.dim())?;
    Ok(effect_sqrt.commutator(&effect_sqrt.commutator(target)).scale(0.5))
}

/// `d^ = M_b - I*_a(M_b)`.
pub fn disturbance_operator(inst_a: &LuedersInstrument, observable_b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dual = dual_channel(inst_a, observable_b)?;
    Ok(observable_b - &dual)
}

/// `C^ = 1/2 {M_a, M_b} - sum_alpha alpha L*_alpha(M_b)` for a `+1/-1` probe.
pub fn correlation_operator(inst_a: &LuedersInstrument, observable_b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let povm = inst_a.povm();
    if !is_plus_minus_one(povm.labels()) {
        return Err(Error::NotDichotomic);
    }
    observable_b.check_dim(inst_a.dim())?;
    let m_a = povm.observable();
    let mut out = m_a.anticommutator(observable_b).scale(0.5);
    for (k, &label) in inst_a.kraus().iter().zip(povm.labels()) {
        out = &out - &dissipator(k, observable_b)?.scale(label);
    }
    Ok(out)
}

/// Largest `|eigenvalue|` of `d^`: the supremum of `|tr(rho d^)|` over states.
pub fn max_disturbance(inst_a: &LuedersInstrument, observable_b: &ComplexMatrix) -> Result<f64> {
    let d = disturbance_operator(inst_a, observable_b)?;
    let eig = hermitian_eigen(&d)?;
    Ok(eig.min_value().abs().max(eig.max_value().abs()))
}
