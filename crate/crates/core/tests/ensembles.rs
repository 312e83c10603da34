use std::f64::consts::PI;

use gedanken_core::bellstates::BellKind;
use gedanken_core::ensembles::*;
use gedanken_core::qstate::Plane;
use proptest::prelude::*;

const SINGLET: Source = Source::Bell(BellKind::PsiMinus);

#[test]
fn figure7() {
    let (ens, report) = figure7_ensemble();
    assert_eq!(report.avg_given_plus, Some(0.5));
    let c = conservation_check(&ens, 1e-12).unwrap();
    assert!(c.fails_every_trial());
    assert!(c.average_conserved);
}

#[test]
fn aligned_outcomes() {
    let e = run_trials(SINGLET, 0.4, 0.4, Plane::Xz, 10_000, 5).unwrap();
    assert!(e.trials.iter().all(|t| t.alice_outcome == -t.bob_outcome));
    let e = run_trials(Source::Bell(BellKind::PhiPlus), 1.1, 1.1, Plane::Xz, 10_000, 5).unwrap();
    assert!(e.trials.iter().all(|t| t.alice_outcome == t.bob_outcome));
}

#[test]
fn orthogonal_settings_decorrelate() {
    let e = run_trials(SINGLET, 0.0, PI / 2.0, Plane::Xy, 100_000, 11).unwrap();
    assert!(partition_by_alice(&e).unwrap().correlation_estimate.abs() < 0.02);
}

#[test]
fn sixty_degree_partition() {
    let n = 100_000;
    let e = run_trials(SINGLET, 0.0, 60f64.to_radians(), Plane::Xz, n, 7).unwrap();
    let r = partition_by_alice(&e).unwrap();
    let tol = 4.0 / (n as f64).sqrt();
    assert!((r.avg_given_plus.unwrap() + 0.5).abs() < tol);
    assert!((r.avg_given_minus.unwrap() - 0.5).abs() < tol);
    let by_bob = partition_by_bob(&e).unwrap();
    assert!((by_bob.avg_given_plus.unwrap() + 0.5).abs() < tol);
    assert!((by_bob.avg_given_minus.unwrap() - 0.5).abs() < tol);
}

#[test]
fn convergence_over_seeds() {
    let n = 100_000;
    for deg in [0.0f64, 30.0, 60.0, 90.0] {
        let th = deg.to_radians();
        let good = (0..20u64)
            .filter(|&seed| {
                let e = run_trials(SINGLET, 0.0, th, Plane::Xz, n, seed).unwrap();
                let est = partition_by_alice(&e).unwrap().correlation_estimate;
                (est + th.cos()).abs() <= 4.0 / (n as f64).sqrt()
            })
            .count();
        assert!(good >= 19, "{deg}: {good}");
    }
}

#[test]
fn synthetic_all_plus() {
    let trials = vec![Trial { alice_angle: 0.0, bob_angle: 0.0, alice_outcome: 1, bob_outcome: 1 }; 10];
    let e = TrialEnsemble { source: SINGLET, plane: Plane::Xz, seed: 0, generator: "fixed".into(), trials };
    let r = partition_by_alice(&e).unwrap();
    assert_eq!(r.avg_given_plus, Some(1.0));
    assert_eq!(r.avg_given_minus, None);
    assert_eq!(r.correlation_estimate, 1.0);
}

#[test]
fn regeneration_is_bit_identical() {
    let a = run_trials(Source::Mu(0.6), 0.2, 1.3, Plane::Xy, 9000, 99).unwrap();
    let b = run_trials(Source::Mu(0.6), 0.2, 1.3, Plane::Xy, 9000, 99).unwrap();
    assert_eq!(a, b);
    let json = serde_json::to_string(&a).unwrap();
    assert_eq!(serde_json::from_str::<TrialEnsemble>(&json).unwrap(), a);
}

#[test]
fn csv_header() {
    let (ens, _) = figure7_ensemble();
    let mut buf = Vec::new();
    ens.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("trial,alice_angle_deg,bob_angle_deg,a,b"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn empty_ensemble_is_rejected() {
    assert!(run_trials(SINGLET, 0.0, 0.0, Plane::Xz, 0, 1).is_err());
    assert!(run_trials(Source::Mu(2.0), 0.0, 0.0, Plane::Xz, 10, 1).is_err());
}

fn source() -> impl Strategy<Value = Source> {
    prop_oneof![
        prop::sample::select(BellKind::ALL.to_vec()).prop_map(Source::Bell),
        (0.0..=1.0f64).prop_map(Source::Mu),
    ]
}

fn plane() -> impl Strategy<Value = Plane> {
    prop::sample::select(vec![Plane::Xz, Plane::Yz, Plane::Xy])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_matches_product_average(s in source(), p in plane(), a in 0.0..6.3f64, b in 0.0..6.3f64, seed in any::<u64>()) {
        let e = run_trials(s, a, b, p, 500, seed).unwrap();
        let r = partition_by_alice(&e).unwrap();
        prop_assert_eq!(r.count_weighted_estimate, e.product_average().unwrap());
        prop_assert_eq!(r.correlation_estimate, r.count_weighted_estimate);
        if r.count_plus == r.count_minus {
            prop_assert!((r.equal_weight_estimate.unwrap() - r.correlation_estimate).abs() < 1e-12);
        }
        prop_assert!(e.trials.iter().all(|t| t.alice_outcome.abs() == 1 && t.bob_outcome.abs() == 1));
    }

    #[test]
    fn sampling_order_does_not_change_the_law(s in source(), p in plane(), a in 0.0..6.3f64, b in 0.0..6.3f64) {
        let x = joint_law(s, p, a, b, SamplingOrder::AliceFirst).unwrap();
        let y = joint_law(s, p, a, b, SamplingOrder::BobFirst).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((x[i][j] - y[i][j]).abs() < 1e-12);
            }
        }
    }
}
