mod common;

use common::{pool, Draw};
use covcd_core::cd::{cd_from_scenario, disturbance, OutcomeDistribution};
use covcd_core::quantum::{DensityMatrix, LuedersInstrument, Povm};
use covcd_core::qubit::{optimal_state, QubitMeasurement};
use covcd_core::sampler::{estimate_cd, policy_joint_probabilities, sample, InstrumentPolicy};
use proptest::prelude::*;

fn scenarios() -> Vec<(DensityMatrix, LuedersInstrument, Povm)> {
    let values: Vec<f64> = (0..common::POOL).map(|i| ((i as f64 * 0.618_033_988_7).fract() * 2.0) - 1.0).collect();
    let mut d = Draw::new(&values);
    let mut out = Vec::new();
    for dim in [2, 2, 3, 4] {
        let rho = d.density(dim);
        out.push((rho, LuedersInstrument::new(d.dichotomic(dim)).unwrap(), d.dichotomic(dim)));
    }
    let probe = QubitMeasurement::in_xz_plane(0.6, 0.0, 0.2).unwrap();
    let target = QubitMeasurement::in_xz_plane(0.9, 1.1, -0.05).unwrap();
    out.push((optimal_state(&probe, &target).unwrap(), probe.instrument().unwrap(), target.to_povm().unwrap()));
    out
}

#[test]
fn estimates_cover_exact_values() {
    for (k, (rho, inst, povm_b)) in scenarios().iter().enumerate() {
        let exact = cd_from_scenario(rho, inst, povm_b).unwrap();
        let mut inside = 0;
        for rep in 0..100u64 {
            let rec = sample(rho, inst, povm_b, 1_000_000, 1_000_000, 1000 * k as u64 + rep).unwrap();
            let e = estimate_cd(&rec).unwrap();
            let c_ok = (e.c_hat - exact.correlation).abs() <= 5.0 * e.c_err;
            let d_ok = (e.d_hat - exact.disturbance).abs() <= 5.0 * e.d_err;
            if c_ok && d_ok {
                inside += 1;
            }
        }
        assert!(inside >= 99, "scenario {k}: {inside}/100 within 5 sigma");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identical_seed_identical_record(v in pool(), seed in any::<u64>(), dim in 2usize..=3) {
        let mut d = Draw::new(&v);
        let rho = d.density(dim);
        let inst = d.instrument(dim, 2);
        let povm_b = d.povm(dim, 2);
        let a = sample(&rho, &inst, &povm_b, 5_000, 3_000, seed).unwrap();
        let b = sample(&rho, &inst, &povm_b, 5_000, 3_000, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.joint_counts.iter().sum::<u64>(), 5_000);
        prop_assert_eq!(a.alone_counts.iter().sum::<u64>(), 3_000);
    }
}

#[test]
fn lueders_disturbs_less_than_eigenstate_policy() {
    for gamma in [0.25, 0.5, 0.75] {
        let probe = QubitMeasurement::in_xz_plane(gamma, 0.0, 0.0).unwrap();
        let target = QubitMeasurement::sharp(&[0.0, 0.0, 1.0]).unwrap();
        let rho = optimal_state(&probe, &target).unwrap();
        let povm_b = target.to_povm().unwrap();
        let alone = OutcomeDistribution::new(povm_b.probabilities(&rho).unwrap(), vec![1.0, -1.0]).unwrap();
        let d_for = |policy| {
            let joint = policy_joint_probabilities(policy, &probe, &povm_b, &rho).unwrap();
            disturbance(&alone, &OutcomeDistribution::new(joint.target_marginal(), vec![1.0, -1.0]).unwrap()).unwrap()
        };
        let lueders = d_for(InstrumentPolicy::Lueders);
        let eigen = d_for(InstrumentPolicy::Eigenstate);
        assert!(lueders < eigen, "gamma {gamma}: {lueders} vs {eigen}");
        assert!((lueders - (1.0 - (1.0 - gamma * gamma).sqrt())).abs() < 1e-12);
    }
}
