mod common;

use common::{fd_jacobian, params, positive_state};
use igp_core::model::{jacobian, vector_field, Params, State};
use proptest::prelude::*;

fn reference() -> Params<f64> {
    Params::reference()
}

#[test]
fn jacobian_matches_finite_differences_at_reference_point() {
    let s = State::new(2.0, 1.0, 1.0);
    let p = reference();
    let j = jacobian(&s, &p).unwrap();
    let fd = fd_jacobian(&s, &p);
    for r in 0..3 {
        for c in 0..3 {
            let scale = fd[r][c].abs().max(1.0);
            assert!(
                (j[r][c] - fd[r][c]).abs() <= 1e-5 * scale,
                "entry ({r},{c})"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rational_form_equals_switching_form(x in 1e-3f64..50.0, y in 1e-3f64..50.0, c in 0.0f64..5.0) {
        let rational = x * x / (x + c * y);
        let switching = x / (1.0 + c * y / x);
        prop_assert!((rational - switching).abs() <= 1e-12 * rational.abs());
    }

    #[test]
    fn no_switching_reduces_to_plain_omnivory(p in params(), s in (0.0f64..10.0, 0.0f64..10.0, 0.0f64..10.0)) {
        let p = p.with_c(0.0);
        let (x, y, z) = s;
        let d = vector_field(&State::new(x, y, z), &p).unwrap();
        let plain = [
            x * (p.b1 - p.a11 * x - p.a12 * y - p.a13 * z),
            y * (-p.b2 + p.a21 * x - p.a23 * z),
            z * (-p.b3 + p.a31 * x + p.a32 * y),
        ];
        for (got, want) in d.to_array().iter().zip(plain) {
            prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn coordinate_planes_are_invariant(p in params(), s in positive_state(), face in 0usize..3) {
        let mut a = s.to_array();
        a[face] = 0.0;
        let d = vector_field(&State::from_array(a), &p).unwrap().to_array();
        prop_assert_eq!(d[face], 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jacobian_agrees_with_finite_differences(p in params(), s in positive_state()) {
        let j = jacobian(&s, &p).unwrap();
        let fd = fd_jacobian(&s, &p);
        for r in 0..3 {
            for c in 0..3 {
                let scale = fd[r][c].abs().max(1.0);
                prop_assert!((j[r][c] - fd[r][c]).abs() <= 1e-5 * scale,
                    "entry ({},{}) analytic {} fd {}", r, c, j[r][c], fd[r][c]);
            }
        }
    }
}
