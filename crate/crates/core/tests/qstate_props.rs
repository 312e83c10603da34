use gedanken_core::qstate::*;
use gedanken_core::rng::range_rng;
use proptest::prelude::*;

fn amp() -> impl Strategy<Value = Amplitude> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b))
}

fn state(n_qubits: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec(amp(), 1 << n_qubits)
        .prop_filter("nonzero", |v| v.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(|v| PureState::normalized(v).unwrap())
}

fn direction() -> impl Strategy<Value = Direction> {
    (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(t, p)| {
        Direction::new([t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]).unwrap()
    })
}

fn mixed(n_qubits: usize) -> impl Strategy<Value = MixedState> {
    (prop::collection::vec(state(n_qubits), 3), prop::collection::vec(0.05..1.0f64, 3)).prop_map(|(states, w)| {
        let total: f64 = w.iter().sum();
        let rhos: Vec<MixedState> = states.iter().map(PureState::density).collect();
        let parts: Vec<(f64, &MixedState)> = w.iter().map(|x| x / total).zip(rhos.iter()).collect();
        MixedState::convex(&parts).unwrap()
    })
}

#[test]
fn tensor_examples() {
    let u = PureState::basis(1, 0).unwrap();
    let d = PureState::basis(1, 1).unwrap();
    let ud = u.tensor(&d);
    assert_eq!(ud.amplitudes(), &[re(0.0), re(1.0), re(0.0), re(0.0)]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = PureState::qubit(re(1.0), re(1.0)).unwrap();
    let want = [h, 0.0, h, 0.0];
    for (a, w) in plus.tensor(&u).amplitudes().iter().zip(want) {
        assert!((a - re(w)).norm() < 1e-15);
    }
    let id = Observable::identity(2).tensor(&Observable::identity(2));
    assert_eq!(id.matrix(), Observable::identity(4).matrix());
}

#[test]
fn diagonal_spin_eigenvalues() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let ev = spin_observable([h, 0.0, h]).unwrap().eigenvalues();
    assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    assert!(spin_observable([1.0, 1.0, 0.0]).is_err());
}

#[test]
fn balanced_coin_frequency() {
    let coin = PureState::qubit(re(1.0), re(1.0)).unwrap();
    let basis = ProjectorSet::computational();
    let mut rng = range_rng(2024, 0);
    let heads = (0..100_000).filter(|_| project_measure(&coin, &basis, &mut rng).unwrap().outcome == 0).count();
    assert!((heads as f64 / 1e5 - 0.5).abs() < 0.01);
}

#[test]
fn partial_trace_of_mixture() {
    let rho = MixedState::convex(&[
        (0.5, &PureState::basis(2, 0b01).unwrap().density()),
        (0.5, &PureState::basis(2, 0b10).unwrap().density()),
    ])
    .unwrap();
    let a = partial_trace(&rho, &[0]).unwrap();
    assert!(a.approx_eq(&MixedState::maximally_mixed(1), 1e-15));
    assert!(partial_trace(&rho, &[]).is_err());
    assert!(partial_trace(&rho, &[2]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn post_states_are_normalized(s in state(2), d in direction(), seed in any::<u64>()) {
        let basis = ProjectorSet::spin(&d).on_qubit(1, 2).unwrap();
        let m = project_measure(&s, &basis, &mut range_rng(seed, 0)).unwrap();
        prop_assert!((m.post_state.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn outcome_probabilities_sum_to_one(s in state(2), d in direction()) {
        let basis = ProjectorSet::spin(&d).on_qubit(0, 2).unwrap();
        let total: f64 = s.branches(&basis).unwrap().iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_consistency(s in state(1), d in direction()) {
        let set = ProjectorSet::spin(&d);
        let obs = Observable::from_projectors(&set);
        let direct = expectation(&obs, &s).unwrap();
        let spectral: f64 = s.branches(&set).unwrap().iter().map(|b| b.value * b.probability).sum();
        prop_assert!((direct - spectral).abs() < 1e-10);
        prop_assert!((direct - expectation(&spin_observable(d.components()).unwrap(), &s).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn tensor_is_associative(a in state(1), b in state(1), c in state(1)) {
        let left = a.tensor(&b).tensor(&c);
        let right = a.tensor(&b.tensor(&c));
        prop_assert!(left.approx_eq(&right, 1e-12));
    }

    #[test]
    fn no_signaling(rho in mixed(2), da in direction(), db1 in direction(), db2 in direction()) {
        let alice = ProjectorSet::spin(&da).on_qubit(0, 2).unwrap();
        let marginal = |db: &Direction| -> [f64; 2] {
            let bob = ProjectorSet::spin(db).on_qubit(1, 2).unwrap();
            let mut p = [0.0; 2];
            for b in rho.branches(&bob).unwrap() {
                if let Some(post) = b.post_state {
                    for a in post.branches(&alice).unwrap() {
                        p[a.outcome] += b.probability * a.probability;
                    }
                }
            }
            p
        };
        let (m1, m2) = (marginal(&db1), marginal(&db2));
        prop_assert!((m1[0] - m2[0]).abs() < 1e-10 && (m1[1] - m2[1]).abs() < 1e-10);
    }

    #[test]
    fn mixtures_are_density_operators(rho in mixed(2)) {
        prop_assert!(MixedState::new(rho.matrix().clone()).is_ok());
        let reduced = partial_trace(&rho, &[1]).unwrap();
        let tr: f64 = (0..2).map(|i| reduced.matrix()[(i, i)].re).sum();
        prop_assert!((tr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn global_phase_is_ignored(s in state(2), phi in 0.0..std::f64::consts::TAU) {
        let rot = c(phi.cos(), phi.sin());
        let t = PureState::new(s.amplitudes().iter().map(|a| a * rot).collect()).unwrap();
        prop_assert!(s.equal_up_to_phase(&t, 1e-12));
    }
}
