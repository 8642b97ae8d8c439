//! Finite-shot emulation of a CD experiment.
//!
//! A record holds two arms: the joint arm (probe on, counts `I(alpha, beta)`) and the
//! alone arm (probe off, counts `I~(beta)`). Counts are multinomial draws from a
//! `ChaCha8Rng` seeded with `seed_from_u64(seed)`; each multinomial is generated as a
//! chain of conditional binomials in cell order, joint arm first.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::quantum::{apply_instrument, joint_probabilities, DensityMatrix, JointTable, LuedersInstrument, Povm};
use crate::qubit::{bloch_state, scaled, QubitMeasurement};

/// State handed to the target after the probe reports an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum InstrumentPolicy {
    /// `K rho K / p` with `K = E^{1/2}`.
    #[default]
    Lueders,
    /// `1/2 (1 +- a^.sigma)`.
    Eigenstate,
    /// `1/2 (1 +- gamma a^.sigma)`.
    Mixed,
}

/// Post-measurement state for probe outcome index `outcome` (0 is `+1`, 1 is `-1`).
pub fn policy_update(
    policy: InstrumentPolicy,
    probe: &QubitMeasurement,
    rho: &DensityMatrix,
    outcome: usize,
) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(Error::NonQubit(rho.dim()));
    }
    if outcome > 1 {
        return Err(Error::InvalidOutcome { index: outcome, outcomes: 2 });
    }
    let sign = if outcome == 0 { 1.0 } else { -1.0 };
    match policy {
        InstrumentPolicy::Lueders => {
            let (out, p) = apply_instrument(&probe.instrument()?, rho, outcome)?;
            if p <= 0.0 {
                return Err(Error::OutOfDomain("outcome has zero probability"));
            }
            DensityMatrix::new(out.scale(1.0 / p).hermitian_part())
        }
        InstrumentPolicy::Eigenstate => bloch_state(&scaled(&probe.direction()?, sign)),
        InstrumentPolicy::Mixed => bloch_state(&scaled(&probe.bloch, sign)),
    }
}

/// `p(alpha, beta) = p(alpha) tr(rho_out(alpha) E_beta)` under a qubit policy.
pub fn policy_joint_probabilities(
    policy: InstrumentPolicy,
    probe: &QubitMeasurement,
    povm_b: &Povm,
    rho: &DensityMatrix,
) -> Result<JointTable> {
    if rho.dim() != 2 {
        return Err(Error::NonQubit(rho.dim()));
    }
    if povm_b.dim() != 2 {
        return Err(Error::NonQubit(povm_b.dim()));
    }
    let probe_povm = probe.to_povm()?;
    let p_a = probe_povm.probabilities(rho)?;
    let mut probs = Vec::with_capacity(2 * povm_b.len());
    for (alpha, &pa) in p_a.iter().enumerate() {
        if pa <= 0.0 {
            probs.extend(core::iter::repeat(0.0).take(povm_b.len()));
            continue;
        }
        let out = policy_update(policy, probe, rho, alpha)?;
        probs.extend(povm_b.probabilities(&out)?.into_iter().map(|q| pa * q));
    }
    JointTable::new(probe_povm.labels().to_vec(), povm_b.labels().to_vec(), probs)
}

/// Counts of one two-arm run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShotRecord {
    pub labels_a: Vec<f64>,
    pub labels_b: Vec<f64>,
    /// Row-major `n_a x n_b`.
    pub joint_counts: Vec<u64>,
    pub alone_counts: Vec<u64>,
    pub shots_joint: u64,
    pub shots_alone: u64,
    pub seed: u64,
}

impl ShotRecord {
    /// Record from raw counts; shot totals are the count sums.
    pub fn from_counts(
        labels_a: &[f64],
        labels_b: &[f64],
        joint_counts: Vec<u64>,
        alone_counts: Vec<u64>,
        seed: u64,
    ) -> Result<Self> {
        if joint_counts.len() != labels_a.len() * labels_b.len() {
            return Err(Error::DimensionMismatch { expected: labels_a.len() * labels_b.len(), found: joint_counts.len() });
        }
        if alone_counts.len() != labels_b.len() {
            return Err(Error::DimensionMismatch { expected: labels_b.len(), found: alone_counts.len() });
        }
        Ok(Self {
            labels_a: labels_a.to_vec(),
            labels_b: labels_b.to_vec(),
            shots_joint: joint_counts.iter().sum(),
            shots_alone: alone_counts.iter().sum(),
            joint_counts,
            alone_counts,
            seed,
        })
    }

    pub fn rows(&self) -> usize {
        self.labels_a.len()
    }

    pub fn cols(&self) -> usize {
        self.labels_b.len()
    }

    pub fn joint(&self, alpha: usize, beta: usize) -> u64 {
        self.joint_counts[alpha * self.cols() + beta]
    }
}

/// Seed of the stream owned by scan point `index`.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

/// Multinomial draw of `n` trials over `probs` (clamped at zero, renormalized on the fly).
pub fn multinomial<R: rand::Rng + ?Sized>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let Some(last) = probs.len().checked_sub(1) else {
        return counts;
    };
    let mut remaining = n;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    for (i, &p) in probs.iter().enumerate().take(last) {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q).expect("probability clamped to [0, 1]").sample(rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    counts[last] += remaining;
    counts
}

/// Draws both arms from given probabilities.
pub fn sample_tables(
    joint: &JointTable,
    alone_probs: &[f64],
    shots_joint: u64,
    shots_alone: u64,
    seed: u64,
) -> Result<ShotRecord> {
    if shots_joint == 0 || shots_alone == 0 {
        return Err(Error::InvalidShots);
    }
    if alone_probs.len() != joint.cols() {
        return Err(Error::DimensionMismatch { expected: joint.cols(), found: alone_probs.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let joint_counts = multinomial(&mut rng, shots_joint, &joint.probs);
    let alone_counts = multinomial(&mut rng, shots_alone, alone_probs);
    ShotRecord::from_counts(&joint.labels_a, &joint.labels_b, joint_counts, alone_counts, seed)
}

/// Lüders-instrument experiment.
pub fn sample(
    rho: &DensityMatrix,
    inst_a: &LuedersInstrument,
    povm_b: &Povm,
    shots_joint: u64,
    shots_alone: u64,
    seed: u64,
) -> Result<ShotRecord> {
    let joint = joint_probabilities(inst_a, povm_b, rho)?;
    sample_tables(&joint, &povm_b.probabilities(rho)?, shots_joint, shots_alone, seed)
}

/// Qubit experiment with the probe's post-measurement state set by `policy`.
pub fn sample_with_policy(
    policy: InstrumentPolicy,
    probe: &QubitMeasurement,
    rho: &DensityMatrix,
    povm_b: &Povm,
    shots_joint: u64,
    shots_alone: u64,
    seed: u64,
) -> Result<ShotRecord> {
    let joint = policy_joint_probabilities(policy, probe, povm_b, rho)?;
    sample_tables(&joint, &povm_b.probabilities(rho)?, shots_joint, shots_alone, seed)
}

/// Plug-in `(C, D)` with 1-sigma errors.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CdEstimate {
    pub c_hat: f64,
    pub d_hat: f64,
    pub c_err: f64,
    pub d_err: f64,
}

/// Covariance of a multinomial frequency vector, `(diag(p) - p p^T) / n`.
fn multinomial_cov(p: &[f64], n: f64) -> impl Fn(usize, usize) -> f64 + '_ {
    move |i, j| if i == j { p[i] * (1.0 - p[i]) / n } else { -p[i] * p[j] / n }
}

/// For dichotomic records: `C = 2 (I(+,+) + I(-,-)) / sum I - 1` and
/// `D = 2 |I~(+) / (I~(+) + I~(-)) - (I(+,+) + I(-,+)) / sum I|`; general `n` uses the
/// same rescaled forms. The correlation error is binomial in the matched fraction; the
/// disturbance error adds both arms in quadrature through the delta method.
pub fn estimate_cd(rec: &ShotRecord) -> Result<CdEstimate> {
    if rec.shots_joint == 0 || rec.shots_alone == 0 {
        return Err(Error::EmptyRecord);
    }
    let n = rec.cols();
    if n < 2 || rec.rows() != n {
        return Err(Error::TooFewOutcomes(n.min(rec.rows())));
    }
    let nj = rec.shots_joint as f64;
    let na = rec.shots_alone as f64;
    let k_c = n as f64 / (n as f64 - 1.0);
    let k_d = k_c.sqrt();

    let mut matched = 0u64;
    for (a, la) in rec.labels_a.iter().enumerate() {
        let b = rec.labels_b.iter().position(|lb| lb == la).ok_or(Error::LabelMismatch)?;
        matched += rec.joint(a, b);
    }
    let q = matched as f64 / nj;
    let c_hat = k_c * (q - 1.0 / n as f64);
    let c_err = k_c * (q * (1.0 - q) / nj).sqrt();

    let p_alone: Vec<f64> = rec.alone_counts.iter().map(|&c| c as f64 / na).collect();
    let p_joint: Vec<f64> =
        (0..n).map(|b| (0..rec.rows()).map(|a| rec.joint(a, b)).sum::<u64>() as f64 / nj).collect();
    let delta: Vec<f64> = p_alone.iter().zip(&p_joint).map(|(a, j)| a - j).collect();
    let dist = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
    let d_hat = k_d * dist;

    let va = multinomial_cov(&p_alone, na);
    let vj = multinomial_cov(&p_joint, nj);
    let var = if dist > 0.0 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += delta[i] * delta[j] * (va(i, j) + vj(i, j));
            }
        }
        k_d * k_d * acc / (dist * dist)
    } else {
        k_d * k_d * (0..n).map(|i| va(i, i) + vj(i, i)).sum::<f64>()
    };
    Ok(CdEstimate { c_hat, d_hat, c_err, d_err: var.max(0.0).sqrt() })
}
