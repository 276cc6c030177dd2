mod common;

use common::{forced_equilibrium, positive_state, rate};
use igp_core::equilibria::{
    boundary_equilibria, hurwitz_cubic, linear_coexistence, routh_hurwitz, solve_coexistence,
};
use igp_core::linalg::char_poly;
use igp_core::model::{jacobian, vector_field, Params};
use igp_core::spectral::cardano_roots;
use proptest::prelude::*;

/// Exact linear solve of the `c = 0` per-capita system by Cramer's rule.
fn cramer(p: &Params<f64>) -> [f64; 3] {
    let m = [
        [p.a11, p.a12, p.a13],
        [p.a21, 0.0, -p.a23],
        [p.a31, p.a32, 0.0],
    ];
    let b = [p.b1, p.b2, p.b3];
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    std::array::from_fn(|col| {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = b[row];
        }
        det(&mc) / d
    })
}

#[test]
fn reference_linear_solution_is_exact() {
    let p = Params::<f64>::reference().with_c(0.0);
    let s = cramer(&p);
    assert!((s[0] - 35.0 / 12.0).abs() < 1e-14);
    assert!((s[1] - 23.0 / 24.0).abs() < 1e-14);
    assert!((s[2] - 23.0 / 12.0).abs() < 1e-14);
    let lin = linear_coexistence(&p).unwrap();
    for i in 0..3 {
        assert!((lin[i] - s[i]).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn routh_hurwitz_iff_all_roots_stable(s1 in -10.0f64..10.0, s2 in -10.0f64..10.0, s3 in -10.0f64..10.0) {
        let roots = cardano_roots(s1, s2, s3).roots;
        let stable = roots.iter().all(|r| r.re < 0.0);
        prop_assert_eq!(hurwitz_cubic(s1, s2, s3), stable, "roots {:?}", roots);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn coexistence_without_switching_matches_linear_solve((p, s) in forced_equilibrium()) {
        // rebuild with c = 0 so the forced point stays an equilibrium
        let mut p = p.with_c(0.0);
        p.b1 = p.a11 * s.x + p.a12 * s.y + p.a13 * s.z;
        p.a21 = (p.b2 + p.a23 * s.z) / s.x;
        p.b3 = p.a31 * s.x + p.a32 * s.y;
        let exact = cramer(&p);
        let e4 = solve_coexistence(&p, None).unwrap().expect("admitting set").point.unwrap();
        for (got, want) in e4.to_array().iter().zip(exact) {
            prop_assert!((got - want).abs() <= 1e-10 * (1.0 + want.abs()), "{} vs {}", got, want);
        }
    }

    #[test]
    fn v_formulas_agree_with_jacobian_coefficients((p, s) in forced_equilibrium()) {
        prop_assert!(vector_field(&s, &p).unwrap().norm() <= 1e-9 * (1.0 + s.norm()));
        let r = routh_hurwitz(&p, &s).unwrap();
        let j = char_poly(&jacobian(&s, &p).unwrap());
        for (a, b) in r.sigmas().iter().zip(j) {
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs().max(b.abs())), "{} vs {}", a, b);
        }
        // exact recombination of the V terms
        let v = r.v;
        prop_assert_eq!(r.sigma1, v[0] + v[4]);
        prop_assert_eq!(r.sigma2, v[0] * v[4] - v[1] * v[3] + v[2] * v[6] + v[5] * v[7]);
        prop_assert_eq!(
            r.sigma3,
            v[0] * v[5] * v[7] + v[1] * v[5] * v[6] + v[2] * v[3] * v[7] + v[2] * v[4] * v[6]
        );
        prop_assert_eq!(r.hurwitz, r.sigma1 > 0.0 && r.sigma3 > 0.0 && r.sigma1 * r.sigma2 > r.sigma3);
    }

    #[test]
    fn newton_recovers_forced_equilibrium((p, s) in forced_equilibrium()) {
        // the solver may find a different positive root; it must be a root
        if let Some(e) = solve_coexistence(&p, Some(s)).unwrap() {
            let q = e.point.unwrap();
            prop_assert!(q.is_strictly_positive());
            prop_assert!(vector_field(&q, &p).unwrap().norm() <= 1e-10 * (1.0 + q.norm()));
        } else {
            prop_assert!(false, "guess at an exact root must converge");
        }
    }

    #[test]
    fn feasible_boundary_points_are_rest_points(b1 in rate(), b2 in rate(), b3 in rate(), s in positive_state()) {
        let mut p = Params::<f64>::reference();
        p.b1 = b1 * 3.0;
        p.b2 = b2;
        p.b3 = b3;
        p.c = s.x / 5.0;
        for e in boundary_equilibria(&p).unwrap().into_iter().filter(|e| e.feasible) {
            let q = e.point.unwrap();
            prop_assert!(vector_field(&q, &p).unwrap().norm() <= 1e-9 * (1.0 + q.norm()), "{:?}", e);
        }
    }
}
