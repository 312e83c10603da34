use std::f64::consts::{PI, TAU};

use gedanken_core::bellstates::*;
use gedanken_core::qstate::{Direction, Plane};
use proptest::prelude::*;

fn direction() -> impl Strategy<Value = Direction> {
    (0.0..PI, 0.0..TAU).prop_map(|(t, p)| Direction::new([t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]).unwrap())
}

fn kind() -> impl Strategy<Value = BellKind> {
    prop::sample::select(BellKind::ALL.to_vec())
}

fn plane() -> impl Strategy<Value = Plane> {
    prop::sample::select(vec![Plane::Xz, Plane::Yz, Plane::Xy])
}

#[test]
fn singlet_in_plane_table() {
    for plane in [Plane::Xz, Plane::Yz, Plane::Xy] {
        for deg in [0.0f64, 30.0, 60.0, 90.0, 180.0] {
            let th = deg.to_radians();
            let dirs = MeasurementDirection::in_plane(plane, 0.0, th);
            assert!((correlation_closed(BellKind::PsiMinus, &dirs) + th.cos()).abs() < 1e-12);
            assert!((correlation_numeric(BellKind::PsiMinus, &dirs).unwrap() + th.cos()).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn numeric_matches_closed_form(k in kind(), a in direction(), b in direction()) {
        let dirs = MeasurementDirection::new(a, b, None).unwrap();
        prop_assert!((correlation_numeric(k, &dirs).unwrap() - correlation_closed(k, &dirs)).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn symmetry_planes(k in kind(), angle in 0.0..TAU) {
        let dirs = match k.symmetry_plane() {
            Some(p) => MeasurementDirection::aligned(p.direction(angle)),
            None => MeasurementDirection::aligned(Plane::Xz.direction(angle)),
        };
        let want = if k == BellKind::PsiMinus { -1.0 } else { 1.0 };
        prop_assert!((correlation_numeric(k, &dirs).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn singlet_any_aligned_direction(d in direction()) {
        let c = correlation_closed(BellKind::PsiMinus, &MeasurementDirection::aligned(d));
        prop_assert!((c + 1.0).abs() < 1e-12);
    }

    #[test]
    fn in_plane_cosine_form(p in plane(), k in kind(), alpha in 0.0..TAU, beta in 0.0..TAU) {
        let c = correlation_numeric(BellKind::PsiMinus, &MeasurementDirection::in_plane(p, alpha, beta)).unwrap();
        prop_assert!((c + (alpha - beta).cos()).abs() < 1e-12);
        if let Some(sp) = k.symmetry_plane() {
            let c = correlation_numeric(k, &MeasurementDirection::in_plane(sp, alpha, beta)).unwrap();
            prop_assert!((c - (alpha - beta).cos()).abs() < 1e-12);
        }
    }
}
