//! On-off single-photon detector with efficiency `eta` and dark-count parameter `nu`:
//! `E_off = e^{-nu} sum_n (1 - eta)^n |n><n|`, `E_on = 1 - E_off`.
//!
//! Two reference settings of a polarization measurement in front of the detector expose
//! the noise directly:
//!
//! * sharp H/V reference on a diagonally polarized photon: `C = 0`, `D = e^{-nu} eta`;
//! * fully biased reference (always reports V) on an H photon: `D = 0`,
//!   `C = e^{-nu} (2 - eta) - 1`.
//!
//! Both settings are simulated here from the Lüders rule on the single-photon sector
//! `{|0,0>, |1_H,0>, |0,1_V>}`; the detector watches the diagonal polarization mode.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::cd::{cd_from_scenario, CdValue, OutcomeDistribution};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};
use crate::quantum::{joint_probabilities, DensityMatrix, Effect, JointTable, LuedersInstrument, Povm};
use crate::tol;

/// Polarization outcome labels.
pub const LABEL_H: f64 = -1.0;
pub const LABEL_V: f64 = 1.0;
/// Detector outcome labels.
pub const LABEL_OFF: f64 = 1.0;
pub const LABEL_ON: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectorNoise {
    pub eta: f64,
    pub nu: f64,
}

impl DetectorNoise {
    pub fn new(eta: f64, nu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || !nu.is_finite() || nu < 0.0 {
            return Err(Error::InvalidNoise { eta, nu });
        }
        Ok(Self { eta, nu })
    }

    /// `<n|E_off|n> = e^{-nu} (1 - eta)^n`.
    pub fn off_probability(&self, photons: u32) -> f64 {
        (-self.nu).exp() * (1.0 - self.eta).powi(photons as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorPovm {
    pub e_off: Effect,
    pub e_on: Effect,
}

/// Detector effects on the single-mode Fock space truncated at `cutoff` photons.
pub fn detector_povm(noise: &DetectorNoise, cutoff: usize) -> Result<DetectorPovm> {
    if cutoff < 1 {
        return Err(Error::InvalidCutoff);
    }
    let off: Vec<f64> = (0..=cutoff).map(|n| noise.off_probability(n as u32)).collect();
    let on: Vec<f64> = off.iter().map(|p| 1.0 - p).collect();
    Ok(DetectorPovm {
        e_off: Effect::new(ComplexMatrix::from_real_diag(&off))?,
        e_on: Effect::new(ComplexMatrix::from_real_diag(&on))?,
    })
}

/// Amplitudes over `{|0,0>, |1_H,0>, |0,1_V>}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockState {
    pub amplitudes: [C64; 3],
}

impl FockState {
    pub fn new(amplitudes: [C64; 3]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > tol::PROB {
            return Err(Error::NotNormalized { sum: norm });
        }
        Ok(Self { amplitudes })
    }

    pub fn vacuum() -> Self {
        Self { amplitudes: [ONE, ZERO, ZERO] }
    }

    pub fn horizontal() -> Self {
        Self { amplitudes: [ZERO, ONE, ZERO] }
    }

    pub fn vertical() -> Self {
        Self { amplitudes: [ZERO, ZERO, ONE] }
    }

    /// `(|1_H>|0_V> + |0_H>|1_V>) / sqrt(2)`.
    pub fn diagonal() -> Self {
        let h = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { amplitudes: [ZERO, h, h] }
    }

    /// `(|1_H>|0_V> - |0_H>|1_V>) / sqrt(2)`.
    pub fn antidiagonal() -> Self {
        let h = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { amplitudes: [ZERO, h, -h] }
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.amplitudes).expect("normalized by construction")
    }

    fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes)
    }
}

/// Setting of the polarization measurement that precedes the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Reference {
    /// Projective H/V measurement; vacuum reads as H (no click on the ideal detector).
    Sharp,
    /// Every photon passes and the outcome is always V.
    FullyBiased,
}

/// Everything needed to evaluate one reference setting.
#[derive(Debug, Clone)]
pub struct DetectorScenario {
    pub input: DensityMatrix,
    pub reference: LuedersInstrument,
    pub detector: Povm,
}

/// Embeds the detector effects in the single-photon sector with the detector on the
/// diagonal mode: `|1_D>` carries one photon, `|0,0>` and `|1_A>` carry none.
fn embedded_detector(noise: &DetectorNoise) -> Result<Povm> {
    let fock = detector_povm(noise, 1)?;
    let off0 = fock.e_off.matrix()[(0, 0)].re;
    let off1 = fock.e_off.matrix()[(1, 1)].re;
    let empty = &FockState::vacuum().projector() + &FockState::antidiagonal().projector();
    let one = FockState::diagonal().projector();
    let e_off = &empty.scale(off0) + &one.scale(off1);
    let e_on = &ComplexMatrix::identity(3) - &e_off;
    Povm::from_matrices(vec![e_off, e_on], vec![LABEL_OFF, LABEL_ON])
}

pub fn scenario(noise: &DetectorNoise, reference: Reference) -> Result<DetectorScenario> {
    let (effects, input) = match reference {
        Reference::Sharp => (
            vec![
                &FockState::vacuum().projector() + &FockState::horizontal().projector(),
                FockState::vertical().projector(),
            ],
            FockState::diagonal(),
        ),
        Reference::FullyBiased => (vec![ComplexMatrix::zeros(3), ComplexMatrix::identity(3)], FockState::horizontal()),
    };
    let reference = LuedersInstrument::new(Povm::from_matrices(effects, vec![LABEL_H, LABEL_V])?)?;
    Ok(DetectorScenario { input: input.density(), reference, detector: embedded_detector(noise)? })
}

/// Joint table and the detector-alone distribution of one reference setting.
pub fn scenario_statistics(noise: &DetectorNoise, reference: Reference) -> Result<(JointTable, OutcomeDistribution)> {
    let s = scenario(noise, reference)?;
    let joint = joint_probabilities(&s.reference, &s.detector, &s.input)?;
    let alone = OutcomeDistribution::new(s.detector.probabilities(&s.input)?, s.detector.labels().to_vec())?;
    Ok((joint, alone))
}

/// `(C, D)` of one reference setting, evaluated from the Lüders rule.
pub fn scenario_cd(noise: &DetectorNoise, reference: Reference) -> Result<CdValue> {
    let s = scenario(noise, reference)?;
    cd_from_scenario(&s.input, &s.reference, &s.detector)
}

/// Inverts `D1 = e^{-nu} eta` and `C2 = e^{-nu} (2 - eta) - 1`:
/// `e^{-nu} = (C2 + D1 + 1) / 2`, `eta = 2 D1 / (C2 + D1 + 1)`.
pub fn estimate_noise(d1: f64, c2: f64) -> Result<DetectorNoise> {
    if !(d1 > 0.0 && d1 <= 1.0 + tol::PROB) {
        return Err(Error::OutOfDomain("D1 must lie in (0, 1]"));
    }
    if !(c2 > -1.0 && c2 <= 1.0 + tol::PROB) {
        return Err(Error::OutOfDomain("C2 must lie in (-1, 1]"));
    }
    let survival = 0.5 * (c2 + d1 + 1.0);
    if survival <= 0.0 {
        return Err(Error::OutOfDomain("C2 + D1 + 1 must be positive"));
    }
    if survival > 1.0 + tol::PROB {
        return Err(Error::OutOfDomain("implied exp(-nu) exceeds 1"));
    }
    let eta = d1 / survival;
    if eta > 1.0 + tol::PROB {
        return Err(Error::OutOfDomain("implied efficiency exceeds 1"));
    }
    let nu = (-survival.min(1.0).ln()).max(0.0);
    DetectorNoise::new(eta.min(1.0), nu)
}
