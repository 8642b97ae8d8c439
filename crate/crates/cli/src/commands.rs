use std::f64::consts::TAU;
use std::path::Path;

use covcd_core::calibration::{
    bootstrap, estimate_detector, fit_circle_sharp_probe, fit_ellipse_known_theta, fit_ellipse_unknown_theta, CdPoint,
    CdScan, DeviceCharacter, Identifiability,
};
use covcd_core::cd::{cd_from_scenario, correlation, disturbance, CdValue, OutcomeDistribution};
use covcd_core::detector::{scenario_cd, scenario_statistics, DetectorNoise, Reference};
use covcd_core::highdim::{overlap, RandomizedDichotomic};
use covcd_core::linalg::C64;
use covcd_core::quantum::{DensityMatrix, LuedersInstrument, Povm};
use covcd_core::qubit::{bloch_state, optimal_state, QubitMeasurement};
use covcd_core::sampler::{
    estimate_cd, point_seed, policy_joint_probabilities, sample, sample_tables, sample_with_policy, InstrumentPolicy,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{FitMethod, Mode, ScenarioConfig, SearchConfig, Shots, StateConfig};
use crate::error::CliError;
use crate::format::{csv, parse_csv};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SCAN_COLUMNS: [&str; 6] = ["theta", "c", "d", "c_err", "d_err", "c2d2"];
pub const SEARCH_COLUMNS: [&str; 6] = ["phi", "c", "d", "c_err", "d_err", "c2d2"];

/// Result of one run: a CSV table with a JSON sidecar, or a JSON report alone.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub csv: Option<String>,
    pub json: Value,
}

/// SHA-256 of the compact JSON serialization of the resolved config.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

fn envelope(schema: &str, cfg: &ScenarioConfig) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(schema));
    m.insert("version".into(), json!(VERSION));
    m.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    m.insert("config_sha256".into(), json!(config_hash(cfg)));
    m
}

/// Runs the configured mode; `base_dir` resolves relative paths inside the config.
pub fn run(cfg: &ScenarioConfig, base_dir: &Path) -> Result<Output, CliError> {
    cfg.validate()?;
    match cfg.mode {
        Mode::Scan => table(cfg, &SCAN_COLUMNS, scan_rows(cfg)?),
        Mode::SearchOptimal => table(cfg, &SEARCH_COLUMNS, search_rows(cfg)?),
        Mode::Highdim => table(cfg, &SCAN_COLUMNS, highdim_rows(cfg)?),
        Mode::Calibrate => calibrate(cfg, base_dir),
        Mode::Detector => detector(cfg),
    }
}

fn table(cfg: &ScenarioConfig, columns: &[&str], rows: Vec<Vec<f64>>) -> Result<Output, CliError> {
    let mut side = envelope("covcd-output/1", cfg);
    side.insert("columns".into(), json!(columns));
    side.insert("rows".into(), json!(rows.len()));
    Ok(Output { csv: Some(csv(columns, &rows)), json: Value::Object(side) })
}

/// `[c, d, c_err, d_err]` for a qubit scenario under the configured policy and shots.
fn evaluate_qubit(
    cfg: &ScenarioConfig,
    probe: &QubitMeasurement,
    target: &QubitMeasurement,
    rho: &DensityMatrix,
    index: usize,
) -> Result<[f64; 4], CliError> {
    let povm_b = target.to_povm()?;
    match (cfg.shots, cfg.policy) {
        (Shots::Exact, InstrumentPolicy::Lueders) => {
            let cd = cd_from_scenario(rho, &probe.instrument()?, &povm_b)?;
            Ok([cd.correlation, cd.disturbance, 0.0, 0.0])
        }
        (Shots::Exact, policy) => {
            let cd = policy_cd(policy, probe, &povm_b, rho)?;
            Ok([cd.correlation, cd.disturbance, 0.0, 0.0])
        }
        (Shots::Count(n), policy) => {
            let alone = cfg.shots_alone().unwrap_or(n);
            let seed = point_seed(cfg.seed, index);
            let rec = match policy {
                InstrumentPolicy::Lueders => sample(rho, &probe.instrument()?, &povm_b, n, alone, seed)?,
                _ => sample_with_policy(policy, probe, rho, &povm_b, n, alone, seed)?,
            };
            let e = estimate_cd(&rec)?;
            Ok([e.c_hat, e.d_hat, e.c_err, e.d_err])
        }
    }
}

fn policy_cd(policy: InstrumentPolicy, probe: &QubitMeasurement, povm_b: &Povm, rho: &DensityMatrix) -> Result<CdValue, CliError> {
    let joint = policy_joint_probabilities(policy, probe, povm_b, rho)?;
    let labels = povm_b.labels().to_vec();
    let alone = OutcomeDistribution::new(povm_b.probabilities(rho)?, labels.clone())?;
    let tilde = OutcomeDistribution::new(joint.target_marginal(), labels)?;
    Ok(CdValue::new(correlation(&joint)?, disturbance(&alone, &tilde)?))
}

fn row(x: f64, v: [f64; 4]) -> Vec<f64> {
    vec![x, v[0], v[1], v[2], v[3], v[0] * v[0] + v[1] * v[1]]
}

fn scan_rows(cfg: &ScenarioConfig) -> Result<Vec<Vec<f64>>, CliError> {
    let probe = cfg.probe.as_ref().expect("validated").measurement()?;
    let target = cfg.target.as_ref().expect("validated");
    let thetas = target.thetas()?;
    thetas
        .par_iter()
        .enumerate()
        .map(|(i, &theta)| {
            let t = target.measurement(theta)?;
            let rho = match cfg.state {
                StateConfig::Optimal => optimal_state(&probe, &t)?,
                StateConfig::Bloch(r) => bloch_state(&r)?,
            };
            Ok(row(theta, evaluate_qubit(cfg, &probe, &t, &rho, i)?))
        })
        .collect()
}

fn search_rows(cfg: &ScenarioConfig) -> Result<Vec<Vec<f64>>, CliError> {
    let s = cfg.search.clone().unwrap_or_default();
    let SearchConfig { probe_theta, probe_gamma, probe_bias, target_theta, target_gamma, target_bias, points } = s;
    crate::config::check_angle("search.probe_theta", probe_theta)?;
    crate::config::check_angle("search.target_theta", target_theta)?;
    if points == 0 {
        return Err(CliError::config("search.points must be positive"));
    }
    let probe = QubitMeasurement::in_xz_plane(probe_gamma, probe_theta, probe_bias)?;
    let target = QubitMeasurement::in_xz_plane(target_gamma, target_theta, target_bias)?;
    (0..points)
        .into_par_iter()
        .map(|k| {
            let phi = TAU * k as f64 / points as f64;
            let rho = bloch_state(&[phi.sin(), 0.0, phi.cos()])?;
            Ok(row(phi, evaluate_qubit(cfg, &probe, &target, &rho, k)?))
        })
        .collect()
}

fn highdim_rows(cfg: &ScenarioConfig) -> Result<Vec<Vec<f64>>, CliError> {
    let dim = cfg.highdim.as_ref().expect("validated").dim;
    let target = cfg.target.as_ref().expect("validated");
    if cfg.policy != InstrumentPolicy::Lueders {
        return Err(CliError::config("highdim mode supports only the lueders policy"));
    }
    if target.bias != 0.0 {
        return Err(CliError::config("highdim mode takes an unbiased target"));
    }
    if dim < 2 {
        return Err(CliError::Physics(covcd_core::Error::InvalidDim(dim)));
    }
    let basis = |k: usize| -> Vec<C64> { (0..dim).map(|i| C64::new(if i == k { 1.0 } else { 0.0 }, 0.0)).collect() };
    let pa = RandomizedDichotomic::new(1.0, &basis(0))?;
    let inst: LuedersInstrument = pa.instrument()?;
    target
        .thetas()?
        .par_iter()
        .enumerate()
        .map(|(i, &theta)| {
            let (s, c) = (0.5 * theta).sin_cos();
            let ket: Vec<C64> = basis(0).iter().zip(basis(1)).map(|(a, b)| a * c + b * s).collect();
            let pb = RandomizedDichotomic::new(target.gamma, &ket)?;
            let rho = DensityMatrix::pure(&overlap(&pa, &pb)?.optimal_ket)?;
            let povm_b = pb.to_povm()?;
            let v = match cfg.shots {
                Shots::Exact => {
                    let cd = cd_from_scenario(&rho, &inst, &povm_b)?;
                    [cd.correlation, cd.disturbance, 0.0, 0.0]
                }
                Shots::Count(n) => {
                    let rec = sample(&rho, &inst, &povm_b, n, cfg.shots_alone().unwrap_or(n), point_seed(cfg.seed, i))?;
                    let e = estimate_cd(&rec)?;
                    [e.c_hat, e.d_hat, e.c_err, e.d_err]
                }
            };
            Ok(row(theta, v))
        })
        .collect()
}

/// Reads a scan CSV with columns `c`, `d` and optionally `theta`, `c_err`, `d_err`.
pub fn read_scan(path: &Path) -> Result<CdScan, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read scan {}: {e}", path.display())))?;
    scan_from_csv(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::config(format!("scan {}: {msg}", path.display())),
        other => other,
    })
}

/// Parses scan CSV text; an empty or `nan` theta marks an unknown setting.
pub fn scan_from_csv(text: &str) -> Result<CdScan, CliError> {
    let (header, rows) = parse_csv(text).map_err(CliError::config)?;
    let col = |name: &str| header.iter().position(|h| h == name);
    let (c, d) = match (col("c"), col("d")) {
        (Some(c), Some(d)) => (c, d),
        _ => return Err(CliError::config("scan lacks `c` and `d` columns")),
    };
    let (theta, c_err, d_err) = (col("theta"), col("c_err"), col("d_err"));
    let points = rows
        .iter()
        .map(|r| {
            let opt = |i: Option<usize>| i.map(|i| r[i]).filter(|x| !x.is_nan());
            if r[c].is_nan() || r[d].is_nan() {
                return Err(CliError::config("missing c or d"));
            }
            if let Some(t) = opt(theta) {
                crate::config::check_angle("scan theta", t)?;
            }
            Ok(CdPoint {
                theta: opt(theta),
                c: r[c],
                d: r[d],
                c_err: opt(c_err).unwrap_or(0.0),
                d_err: opt(d_err).unwrap_or(0.0),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(CdScan::new(points))
}

const PRODUCT_NAMES: [&str; 5] = ["center_shift", "strength_product", "shear_product", "squeeze_product", "shear_ratio"];
const SEPARATED_NAMES: [&str; 4] = ["probe_sharpness", "probe_bias", "squeeze", "shear"];

/// Fitted quantities and their names, in bootstrap order.
fn device_components(ch: &DeviceCharacter, with_ratio: bool) -> (Vec<&'static str>, Vec<f64>) {
    let p = ch.products();
    let mut names: Vec<&'static str> = PRODUCT_NAMES[..4].to_vec();
    let mut values = p[..4].to_vec();
    if with_ratio {
        names.push(PRODUCT_NAMES[4]);
        values.push(p[4]);
    }
    if ch.identifiability == Identifiability::Full {
        names.extend(SEPARATED_NAMES);
        values.extend([ch.probe_sharpness, ch.probe_bias, ch.squeeze, ch.shear].map(|v| v.unwrap_or(f64::NAN)));
    }
    (names, values)
}

fn calibrate(cfg: &ScenarioConfig, base_dir: &Path) -> Result<Output, CliError> {
    let cal = cfg.calibrate.as_ref().expect("validated");
    let scan = read_scan(&base_dir.join(&cal.scan))?;
    let mut report = envelope("covcd-calibration/1", cfg);
    report.insert("method".into(), serde_json::to_value(cal.method).expect("enum serializes"));
    report.insert("points".into(), json!(scan.len()));

    let boot_json = |names: &[&str], std: &[f64], accepted: usize| {
        let mut m = Map::new();
        for (n, s) in names.iter().zip(std) {
            m.insert((*n).into(), json!(s));
        }
        json!({ "resamples": cal.bootstrap, "accepted": accepted, "std_dev": m })
    };

    match cal.method {
        FitMethod::Circle => {
            if cal.target_strength.is_some() {
                return Err(CliError::config("target_strength does not apply to the circle fit"));
            }
            let fit = fit_circle_sharp_probe(&scan).map_err(CliError::Fit)?;
            report.insert("fit".into(), serde_json::to_value(fit).expect("fit serializes"));
            if cal.bootstrap > 0 {
                let b = bootstrap(&scan, cal.bootstrap, cfg.seed, |s| fit_circle_sharp_probe(s).map(|f| vec![f.target_strength]))
                    .map_err(CliError::Fit)?;
                report.insert("bootstrap".into(), boot_json(&["target_strength"], &b.std_dev, b.accepted));
            }
        }
        FitMethod::KnownTheta | FitMethod::UnknownTheta => {
            let known = cal.method == FitMethod::KnownTheta;
            if !known && cal.target_strength.is_some() {
                return Err(CliError::config("target_strength applies only to the known-theta fit"));
            }
            let strength = cal.target_strength;
            let fit = move |s: &CdScan| {
                if known {
                    fit_ellipse_known_theta(s, strength)
                } else {
                    fit_ellipse_unknown_theta(s)
                }
            };
            let ch = fit(&scan).map_err(CliError::Fit)?;
            report.insert("device".into(), serde_json::to_value(ch).expect("device serializes"));
            if cal.bootstrap > 0 {
                let with_ratio = ch.shear_ratio.is_some();
                let (names, _) = device_components(&ch, with_ratio);
                let b = bootstrap(&scan, cal.bootstrap, cfg.seed, |s| fit(s).map(|c| device_components(&c, with_ratio).1))
                    .map_err(CliError::Fit)?;
                report.insert("bootstrap".into(), boot_json(&names, &b.std_dev, b.accepted));
            }
        }
    }
    Ok(Output { csv: None, json: Value::Object(report) })
}

fn detector(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let det = cfg.detector.as_ref().expect("validated");
    let mut report = envelope("covcd-detector/1", cfg);
    let (d1, c2, d1_err, c2_err) = match (det.eta, det.nu, det.d1, det.c2) {
        (Some(eta), Some(nu), None, None) => {
            let noise = DetectorNoise::new(eta, nu)?;
            report.insert("source".into(), json!("simulated"));
            report.insert("true".into(), json!({ "eta": eta, "nu": nu }));
            match cfg.shots {
                Shots::Exact => (
                    scenario_cd(&noise, Reference::Sharp)?.disturbance,
                    scenario_cd(&noise, Reference::FullyBiased)?.correlation,
                    0.0,
                    0.0,
                ),
                Shots::Count(n) => {
                    let alone = cfg.shots_alone().unwrap_or(n);
                    let run = |reference, index| -> Result<_, CliError> {
                        let (joint, p_alone) = scenario_statistics(&noise, reference)?;
                        let rec = sample_tables(&joint, p_alone.probs(), n, alone, point_seed(cfg.seed, index))?;
                        Ok(estimate_cd(&rec)?)
                    };
                    let sharp = run(Reference::Sharp, 0)?;
                    let biased = run(Reference::FullyBiased, 1)?;
                    (sharp.d_hat, biased.c_hat, sharp.d_err, biased.c_err)
                }
            }
        }
        (None, None, Some(d1), Some(c2)) => {
            if det.d1_err < 0.0 || det.c2_err < 0.0 {
                return Err(CliError::config("detector errors must be nonnegative"));
            }
            report.insert("source".into(), json!("measured"));
            (d1, c2, det.d1_err, det.c2_err)
        }
        _ => return Err(CliError::config("detector needs either `eta` and `nu`, or `d1` and `c2`")),
    };
    let est = estimate_detector(d1, c2, d1_err, c2_err)?;
    report.insert(
        "references".into(),
        json!({ "d1": d1, "c2": c2, "d1_err": d1_err, "c2_err": c2_err }),
    );
    report.insert(
        "estimate".into(),
        json!({ "eta": est.noise.eta, "nu": est.noise.nu, "eta_err": est.eta_err, "nu_err": est.nu_err }),
    );
    Ok(Output { csv: None, json: Value::Object(report) })
}
