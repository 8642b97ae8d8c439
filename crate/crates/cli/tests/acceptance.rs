//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use covcd_cli::commands::scan_from_csv;
use covcd_cli::{run, ScenarioConfig};
use covcd_core::calibration::{bootstrap, fit_ellipse_known_theta, fit_ellipse_unknown_theta, CdPoint, CdScan};
use covcd_core::cd::{
    cd_from_scenario, correlation_operator, disturbance_operator, dissipator, signed_disturbance,
};
use covcd_core::detector::{estimate_noise, scenario_cd, DetectorNoise, Reference};
use covcd_core::highdim::{cd_highdim, overlap, RandomizedDichotomic};
use covcd_core::linalg::{hermitian_eigen, ComplexMatrix, C64};
use covcd_core::quantum::{DensityMatrix, LuedersInstrument, Povm};
use covcd_core::qubit::{
    angle_between, cd_parametric, ellipse_character, optimal_state, scaled, xz_direction, QubitMeasurement, Rotation3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Gen(ChaCha8Rng);

impl Gen {
    fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    fn sym(&mut self) -> f64 {
        self.0.random_range(-1.0..1.0)
    }

    fn unit(&mut self) -> f64 {
        self.0.random_range(0.0..1.0)
    }

    fn ket(&mut self, dim: usize) -> Vec<C64> {
        loop {
            let v: Vec<C64> = (0..dim).map(|_| C64::new(self.sym(), self.sym())).collect();
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n > 1e-3 {
                return v.iter().map(|z| z / n).collect();
            }
        }
    }

    fn density(&mut self, dim: usize) -> DensityMatrix {
        let g = ComplexMatrix::from_fn(dim, |_, _| C64::new(self.sym(), self.sym()));
        let m = &g * &g.adjoint();
        let t = m.trace().re;
        DensityMatrix::new(m.scale(1.0 / t)).unwrap()
    }

    /// Random eigenbasis and random spectrum in `[0, 1]`; labels `+1`, `-1`.
    fn dichotomic(&mut self, dim: usize) -> Povm {
        let h = ComplexMatrix::from_fn(dim, |_, _| C64::new(self.sym(), self.sym())).hermitian_part();
        let spectrum: Vec<f64> = (0..dim).map(|_| self.unit()).collect();
        let mut k = 0;
        let plus = hermitian_eigen(&h).unwrap().map_values(|_| {
            k += 1;
            spectrum[k - 1]
        });
        let minus = &ComplexMatrix::identity(dim) - &plus;
        Povm::from_matrices(vec![plus.hermitian_part(), minus.hermitian_part()], vec![1.0, -1.0]).unwrap()
    }

    fn direction(&mut self) -> [f64; 3] {
        loop {
            let v = [self.sym(), self.sym(), self.sym()];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-3 && n <= 1.0 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }

    /// Strength in `[0.05, 1]`, admissible bias.
    fn measurement(&mut self, dir: [f64; 3]) -> QubitMeasurement {
        let gamma = 0.05 + 0.95 * self.unit();
        let bias = (1.0 - gamma) * self.sym();
        QubitMeasurement::new(bias, scaled(&dir, gamma)).unwrap()
    }

    fn rotation(&mut self) -> Rotation3 {
        let axis = self.direction();
        Rotation3::axis_angle(&axis, PI * self.sym()).unwrap()
    }
}

fn config(text: &str) -> ScenarioConfig {
    ScenarioConfig::parse(text).expect("acceptance config parses")
}

/// Runs a table mode through the CLI library; returns the parsed numeric rows.
fn table(cfg: &ScenarioConfig) -> Result<Vec<Vec<f64>>, String> {
    let out = run(cfg, Path::new(".")).map_err(|e| e.to_string())?;
    let text = out.csv.ok_or("no table produced")?;
    Ok(covcd_cli::format::parse_csv(&text)?.1)
}

fn scan_config(probe: &str, gamma: f64, bias: f64, grid: &str, shots: &str, seed: u64) -> ScenarioConfig {
    config(&format!(
        r#"{{"schema":"covcd-config/1","mode":"scan","probe":{probe},
            "target":{{"gamma":{gamma},"bias":{bias},"theta_grid":{grid}}},"shots":{shots},"seed":{seed}}}"#
    ))
}

// 1
fn tradeoff_inequality() -> Outcome {
    let start = Instant::now();
    let mut g = Gen::new(1);
    let mut worst = f64::MIN;
    for i in 0..10_000 {
        let dim = 2 + i % 3;
        let rho = DensityMatrix::pure(&g.ket(dim)).unwrap();
        let inst = LuedersInstrument::new(g.dichotomic(dim)).unwrap();
        let target = g.dichotomic(dim);
        let cd = cd_from_scenario(&rho, &inst, &target).map_err(|e| e.to_string())?;
        worst = worst.max(cd.radius_squared());
    }
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("10^4 scenarios, max C^2+D^2 = {worst:.12}, {secs:.1} s");
    if worst <= 1.0 + 1e-9 && secs < 30.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 2
fn sharp_probe_circle() -> Outcome {
    let grid = r#"{"start":0,"stop":3.141592653589793,"points":32}"#;
    let probe = r#"{"bloch":[1,0,0]}"#;
    let (mut worst, mut inside, mut total) = (0.0f64, 0, 0);
    for gamma in [0.233, 0.485, 0.731] {
        let exact = table(&scan_config(probe, gamma, 0.0, grid, "\"exact\"", 0))?;
        if exact.len() != 32 {
            return Err(format!("expected 32 rows, got {}", exact.len()));
        }
        for r in &exact {
            worst = worst.max((r[5] - gamma * gamma).abs());
        }
        let noisy = table(&scan_config(probe, gamma, 0.0, grid, "100000", 17))?;
        for (n, e) in noisy.iter().zip(&exact) {
            total += 1;
            if (n[1] - e[1]).abs() <= 5.0 * n[3] && (n[2] - e[2]).abs() <= 5.0 * n[4] {
                inside += 1;
            }
        }
    }
    let frac = inside as f64 / total as f64;
    let msg = format!("exact |C^2+D^2-gamma^2| <= {worst:.1e}; 10^5 shots {inside}/{total} points within 5 sigma");
    if worst <= 1e-9 && frac >= 0.95 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ellipse_vs_simulation(probe: &QubitMeasurement, target: &QubitMeasurement) -> Result<f64, String> {
    let theta = angle_between(&probe.bloch, &target.bloch).map_err(|e| e.to_string())?;
    let law = cd_parametric(probe, target.sharpness(), target.bias, theta).map_err(|e| e.to_string())?;
    let rho = optimal_state(probe, target).map_err(|e| e.to_string())?;
    let sim = cd_from_scenario(&rho, &probe.instrument().unwrap(), &target.to_povm().unwrap()).map_err(|e| e.to_string())?;
    Ok((law.correlation - sim.correlation).abs().max((law.disturbance - sim.disturbance).abs()))
}

// 3
fn ellipse_law() -> Outcome {
    let mut g = Gen::new(3);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let (a, b) = (g.direction(), g.direction());
        let probe = g.measurement(a);
        let target = g.measurement(b);
        worst = worst.max(ellipse_vs_simulation(&probe, &target)?);
    }
    let settings = [(0.5, 0.0), (0.75, 0.0), (0.5, 0.5), (0.75, 0.25)];
    let mut fig = 0.0f64;
    for (gamma, a0) in settings {
        let probe = QubitMeasurement::new(a0, [gamma, 0.0, 0.0]).unwrap();
        for i in 1..32 {
            let target = QubitMeasurement::sharp(&xz_direction(PI * i as f64 / 32.0)).unwrap();
            fig = fig.max(ellipse_vs_simulation(&probe, &target)?);
        }
    }
    let msg = format!("500 random pairs max dev {worst:.1e}; figure settings max dev {fig:.1e}");
    if worst <= 1e-9 && fig <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

const CAL_POINTS: usize = 16;

fn cal_theta(i: usize) -> f64 {
    PI * (i as f64 + 0.5) / CAL_POINTS as f64
}

struct Device {
    a: f64,
    a0: f64,
    b: f64,
    b0: f64,
}

impl Device {
    fn random(g: &mut Gen) -> Self {
        let a = 0.2 + 0.8 * g.unit();
        let a0 = (1.0 - a) * g.sym();
        let b = 0.2 + 0.8 * g.unit();
        let b0 = (1.0 - b) * g.sym();
        Self { a, a0, b, b0 }
    }

    fn products(&self) -> [f64; 4] {
        let ch = ellipse_character(&QubitMeasurement::new(self.a0, [self.a, 0.0, 0.0]).unwrap()).unwrap();
        [self.a0 * self.b0, self.a * self.b, ch.shear * self.b, ch.squeeze * self.b]
    }

    /// Noiseless scan from full simulation with every direction rotated by `rot`.
    fn simulated_scan(&self, rot: &Rotation3) -> CdScan {
        let probe = QubitMeasurement::new(self.a0, rot.apply(&[self.a, 0.0, 0.0])).unwrap();
        CdScan::new(
            (0..CAL_POINTS)
                .map(|i| {
                    let b = rot.apply(&scaled(&xz_direction(cal_theta(i)), self.b));
                    let target = QubitMeasurement::new(self.b0, b).unwrap();
                    let rho = optimal_state(&probe, &target).unwrap();
                    let cd = cd_from_scenario(&rho, &probe.instrument().unwrap(), &target.to_povm().unwrap()).unwrap();
                    CdPoint::exact(cal_theta(i), cd.correlation, cd.disturbance)
                })
                .collect(),
        )
    }

    fn parametric_scan(&self) -> CdScan {
        let probe = QubitMeasurement::new(self.a0, [self.a, 0.0, 0.0]).unwrap();
        CdScan::new(
            (0..CAL_POINTS)
                .map(|i| {
                    let cd = cd_parametric(&probe, self.b, self.b0, cal_theta(i)).unwrap();
                    CdPoint::exact(cal_theta(i), cd.correlation, cd.disturbance)
                })
                .collect(),
        )
    }

    fn cli_scan(&self, shots: u64, seed: u64) -> Result<CdScan, String> {
        let step = PI / CAL_POINTS as f64;
        let grid = format!(r#"{{"start":{},"stop":{},"points":{CAL_POINTS}}}"#, 0.5 * step, PI - 0.5 * step);
        let probe = format!(r#"{{"bias":{},"bloch":[{},0,0]}}"#, self.a0, self.a);
        let cfg = scan_config(&probe, self.b, self.b0, &grid, &shots.to_string(), seed);
        let out = run(&cfg, Path::new(".")).map_err(|e| e.to_string())?;
        scan_from_csv(&out.csv.ok_or("no table")?).map_err(|e| e.to_string())
    }
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// 4
fn covariance() -> Outcome {
    let mut g = Gen::new(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let dev = Device::random(&mut g);
        let rot = g.rotation();
        let id = Rotation3::about_y(0.0);
        let (base, moved) = (dev.simulated_scan(&id), dev.simulated_scan(&rot));
        let fit = |s: &CdScan| -> Result<Vec<f64>, String> {
            let k = fit_ellipse_known_theta(s, Some(dev.b)).map_err(|e| e.to_string())?;
            let u = fit_ellipse_unknown_theta(s).map_err(|e| e.to_string())?;
            let mut v = k.products().to_vec();
            v.extend([k.probe_sharpness.unwrap(), k.probe_bias.unwrap(), k.squeeze.unwrap(), k.shear.unwrap()]);
            v.extend_from_slice(&u.products()[..4]);
            Ok(v)
        };
        worst = worst.max(max_dev(&fit(&base)?, &fit(&moved)?));
    }
    let msg = format!("100 random rotations, max parameter change {worst:.1e}");
    if worst <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 5
fn highdim_circle() -> Outcome {
    let mut g = Gen::new(5);
    let (mut circle, mut sim, mut phase, mut mean_a) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut n = 0;
    while n < 500 {
        let dim = 2 + n % 5;
        let gamma = [0.25, 0.5, 0.75, 1.0][n % 4];
        let pa = RandomizedDichotomic::new(1.0, &g.ket(dim)).unwrap();
        let pb = RandomizedDichotomic::new(gamma, &g.ket(dim)).unwrap();
        let geo = overlap(&pa, &pb).map_err(|e| e.to_string())?;
        if geo.lambda < 1e-3 {
            continue;
        }
        n += 1;
        let law = cd_highdim(&pa, &pb).unwrap();
        circle = circle.max((law.radius_squared() - gamma * gamma).abs());
        let rho = DensityMatrix::pure(&geo.optimal_ket).unwrap();
        let s = cd_from_scenario(&rho, &pa.instrument().unwrap(), &pb.to_povm().unwrap()).unwrap();
        sim = sim.max((s.correlation - law.correlation).abs().max((s.disturbance - law.disturbance).abs()));
        let inner: C64 = pa.ket().iter().zip(&geo.optimal_ket).map(|(a, p)| a.conj() * p).sum();
        phase = phase.max((inner.norm() - FRAC_1_SQRT_2).abs());
        let m_a = &pa.projector_plus().matrix().scale(2.0) - &ComplexMatrix::identity(dim);
        mean_a = mean_a.max(rho.expectation(&m_a).abs());
    }
    let msg = format!(
        "500 pairs: circle {circle:.1e}, simulation {sim:.1e}, |<psi|v_a>| - 1/sqrt2 {phase:.1e}, <M_a> {mean_a:.1e}"
    );
    if circle.max(sim).max(phase).max(mean_a) <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 6
fn optimal_search() -> Outcome {
    let rows = table(&config(r#"{"schema":"covcd-config/1","mode":"search-optimal","shots":"exact"}"#))?;
    if rows.len() != 64 {
        return Err(format!("expected 64 rows, got {}", rows.len()));
    }
    let d_max = rows.iter().map(|r| r[2]).fold(f64::MIN, f64::max);
    let argmax: Vec<usize> = (0..64).filter(|&k| (rows[k][2] - d_max).abs() < 1e-9).collect();
    let c_dev = rows.iter().map(|r| (r[1] - FRAC_1_SQRT_2).abs()).fold(0.0, f64::max);
    let phis: Vec<f64> = argmax.iter().map(|&k| rows[k][0]).collect();
    let at_expected = argmax == vec![24, 56]
        && (phis[0] - 0.75 * PI).abs() < 1e-8
        && (phis[1] - 1.75 * PI).abs() < 1e-8;
    let msg = format!("argmax D at phi = {phis:?} (3pi/4 = {:.9}, 7pi/4 = {:.9}); max |C - 1/sqrt2| = {c_dev:.1e}", 0.75 * PI, 1.75 * PI);
    if at_expected && c_dev <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 7
fn detector_round_trip() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..20 {
        for j in 0..20 {
            let noise = DetectorNoise::new(0.05 + 0.95 * (i + 1) as f64 / 20.0, 0.5 * j as f64 / 19.0).unwrap();
            let d1 = scenario_cd(&noise, Reference::Sharp).unwrap().disturbance;
            let c2 = scenario_cd(&noise, Reference::FullyBiased).unwrap().correlation;
            let back = estimate_noise(d1, c2).map_err(|e| e.to_string())?;
            worst = worst.max((back.eta - noise.eta).abs()).max((back.nu - noise.nu).abs());
        }
    }
    let mut shot_ok = 0;
    let settings = [(0.9, 0.05), (0.8, 0.1), (0.6, 0.3), (0.95, 0.0), (0.3, 0.45)];
    for (k, (eta, nu)) in settings.iter().enumerate() {
        let cfg = config(&format!(
            r#"{{"schema":"covcd-config/1","mode":"detector","shots":1000000,"seed":{k},"detector":{{"eta":{eta},"nu":{nu}}}}}"#
        ));
        let out = run(&cfg, Path::new(".")).map_err(|e| e.to_string())?;
        let est = &out.json["estimate"];
        let f = |key: &str| est[key].as_f64().unwrap();
        if (f("eta") - eta).abs() <= 3.0 * f("eta_err") && (f("nu") - nu).abs() <= 3.0 * f("nu_err") {
            shot_ok += 1;
        }
    }
    let msg = format!("20x20 grid max dev {worst:.1e}; 10^6 shots {shot_ok}/{} settings within 3 sigma", settings.len());
    if worst <= 1e-10 && shot_ok == settings.len() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 8
fn calibration_round_trip() -> Outcome {
    let mut g = Gen::new(8);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let dev = Device::random(&mut g);
        let truth = dev.products();
        let scan = dev.parametric_scan();
        let k = fit_ellipse_known_theta(&scan, Some(dev.b)).map_err(|e| e.to_string())?;
        let u = fit_ellipse_unknown_theta(&scan).map_err(|e| e.to_string())?;
        worst = worst
            .max(max_dev(&k.products()[..4], &truth))
            .max(max_dev(&u.products()[..4], &truth))
            .max((k.probe_sharpness.unwrap() - dev.a).abs())
            .max((k.probe_bias.unwrap() - dev.a0).abs());
    }
    let trials = 40;
    let mut good = 0;
    for t in 0..trials {
        let dev = Device::random(&mut g);
        let truth = dev.products();
        let scan = dev.cli_scan(100_000, 500 + t)?;
        let fit = |s: &CdScan| fit_ellipse_known_theta(s, None).map(|c| c.products()[..4].to_vec());
        let est = fit(&scan).map_err(|e| e.to_string())?;
        let boot = bootstrap(&scan, 200, 900 + t, fit).map_err(|e| e.to_string())?;
        if est.iter().zip(&truth).zip(&boot.std_dev).all(|((e, w), s)| (e - w).abs() <= 3.0 * s) {
            good += 1;
        }
    }
    let frac = good as f64 / trials as f64;
    let msg = format!("200 noiseless devices max dev {worst:.1e}; 10^5 shots {good}/{trials} trials within 3 bootstrap sigma");
    if worst <= 1e-6 && frac >= 0.95 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 9
fn operator_consistency() -> Outcome {
    let mut g = Gen::new(9);
    let (mut stat, mut decomp) = (0.0f64, 0.0f64);
    for i in 0..1000 {
        let dim = 2 + i % 3;
        let rho = g.density(dim);
        let inst = LuedersInstrument::new(g.dichotomic(dim)).unwrap();
        let target = g.dichotomic(dim);
        let m_b = target.observable();
        let cd = cd_from_scenario(&rho, &inst, &target).unwrap();
        let signed = signed_disturbance(&rho, &inst, &target).unwrap();
        let c_op = rho.expectation(&correlation_operator(&inst, &m_b).unwrap());
        let d_op = rho.expectation(&disturbance_operator(&inst, &m_b).unwrap());
        stat = stat.max((c_op - cd.correlation).abs()).max((d_op - signed).abs());
        for (k, e) in inst.kraus().iter().zip(inst.povm().effects()) {
            let lhs = &(k * &m_b) * k;
            let rhs = &e.matrix().anticommutator(&m_b).scale(0.5) - &dissipator(k, &m_b).unwrap();
            decomp = decomp.max(lhs.max_abs_diff(&rhs));
        }
    }
    let msg = format!("10^3 scenarios: operator vs statistics {stat:.1e}; decomposition {decomp:.1e}");
    if stat <= 1e-9 && decomp <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// 10
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs = [
        (
            "scan.json",
            r#"{"schema":"covcd-config/1","mode":"scan","probe":{"bias":0.1,"bloch":[0.6,0,0]},
               "target":{"gamma":0.8,"theta_grid":{"start":0,"stop":3.141592653589793,"points":24}},
               "shots":10000,"seed":7}"#,
        ),
        ("detector.json", r#"{"schema":"covcd-config/1","mode":"detector","shots":100000,"seed":7,"detector":{"eta":0.8,"nu":0.1}}"#),
    ];
    let bin = env!("CARGO_BIN_EXE_covcd");
    let mut compared = 0;
    for (name, text) in configs {
        let cfg_path = dir.path().join(name);
        std::fs::write(&cfg_path, text).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for run_ix in 0..2 {
            let out = dir.path().join(format!("{name}.{run_ix}.out"));
            let status = Command::new(bin).arg("--config").arg(&cfg_path).arg("--out").arg(&out).status().map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("{name}: exit {status}"));
            }
            let mut files = vec![std::fs::read(&out).map_err(|e| e.to_string())?];
            let side = covcd_cli::sidecar_path(&out);
            if side.exists() {
                files.push(std::fs::read(side).map_err(|e| e.to_string())?);
            }
            outputs.push(files);
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{name}: outputs differ between runs"));
        }
        compared += outputs[0].len();
    }
    Ok(format!("{compared} files byte-identical across two runs"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("tradeoff inequality", tradeoff_inequality),
        ("sharp-probe circle", sharp_probe_circle),
        ("ellipse law", ellipse_law),
        ("covariance", covariance),
        ("d-dimensional circle", highdim_circle),
        ("optimal-state search", optimal_search),
        ("detector round trip", detector_round_trip),
        ("calibration round trip", calibration_round_trip),
        ("operator consistency", operator_consistency),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
