mod common;

use common::{compare, instance, qp_oracle, OracleKernel};
use proptest::prelude::*;
use rand::Rng;
use rhythmsvm::rng::seeded;
use rhythmsvm::svm::{smo_solve, KernelSpec, SvmParams};

#[test]
fn two_point_problem_is_exact() {
    let a = [1.0, 0.0];
    let b = [-1.0, 0.0];
    let s = smo_solve(&[&a, &b], &[1, -1], &SvmParams::new(10.0, KernelSpec::Linear).with_tol(1e-9)).unwrap();
    // maximize 2α − 2α² → α = ½, w = (1, 0), b = 0
    assert!((s.alphas[0] - 0.5).abs() < 1e-9 && (s.alphas[1] - 0.5).abs() < 1e-9);
    assert!(s.model.decision_value(&[0.0, 5.0]).unwrap().abs() < 1e-6);
    assert!((s.model.decision_value(&a).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn smo_matches_qp_oracle_on_fifty_instances() {
    for i in 0..50 {
        let inst = instance(i);
        let c = compare(&inst);
        assert!(c.rel_objective_gap <= 1e-3, "instance {i}: gap {}", c.rel_objective_gap);
        assert_eq!(c.disagreements, 0, "instance {i}: {} of {} probes disagree", c.disagreements, c.probes);
    }
}

#[test]
fn oracle_solves_two_point_problem() {
    let x = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
    let s = qp_oracle(&x, &[1, -1], OracleKernel::Linear, 10.0, 5000);
    assert!((s.alpha[0] - 0.5).abs() < 1e-6 && s.bias.abs() < 1e-6);
    assert!((s.objective - 0.5).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn label_flip_negates_decision(seed in 0u64..10_000, probe in prop::collection::vec(-1.5f64..1.5, 2)) {
        let mut rng = seeded(seed);
        let x: Vec<Vec<f64>> = (0..8).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let y: Vec<i8> = (0..8).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let flipped: Vec<i8> = y.iter().map(|v| -v).collect();
        let refs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let params = SvmParams::new(1.0, KernelSpec::Rbf { gamma: 1.0 });
        let a = smo_solve(&refs, &y, &params).unwrap();
        let b = smo_solve(&refs, &flipped, &params).unwrap();
        prop_assert_eq!(a.model.decision_value(&probe).unwrap(), -b.model.decision_value(&probe).unwrap());
    }

    #[test]
    fn alphas_stay_feasible(seed in 0u64..10_000, c in 0.05f64..20.0) {
        let mut rng = seeded(seed);
        let x: Vec<Vec<f64>> = (0..12).map(|_| vec![rng.gen_range(-1.0..1.0)]).collect();
        let y: Vec<i8> = (0..12).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).chain([1, -1]).take(12).collect();
        let mut y = y;
        y[0] = 1;
        y[1] = -1;
        let refs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let s = smo_solve(&refs, &y, &SvmParams::new(c, KernelSpec::Linear)).unwrap();
        let balance: f64 = s.alphas.iter().zip(&y).map(|(a, &l)| a * f64::from(l)).sum();
        prop_assert!(balance.abs() < 1e-9 * c.max(1.0));
        prop_assert!(s.alphas.iter().all(|&a| (0.0..=c).contains(&a)));
    }
}
