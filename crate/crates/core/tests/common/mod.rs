#![allow(dead_code)]

use igp_core::model::{Params, State};
use proptest::prelude::*;

/// Central finite differences of the vector field, step `1e-6` scaled by the
/// component magnitude.
pub fn fd_jacobian(s: &State<f64>, p: &Params<f64>) -> [[f64; 3]; 3] {
    let base = s.to_array();
    let mut j = [[0.0; 3]; 3];
    for col in 0..3 {
        let h = 1e-6 * base[col].abs().max(1.0);
        let mut plus = base;
        let mut minus = base;
        plus[col] += h;
        minus[col] -= h;
        let fp = igp_core::model::vector_field(&State::from_array(plus), p)
            .unwrap()
            .to_array();
        let fm = igp_core::model::vector_field(&State::from_array(minus), p)
            .unwrap()
            .to_array();
        for row in 0..3 {
            j[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    j
}

pub fn rate() -> impl Strategy<Value = f64> {
    0.05f64..3.0
}

/// Random valid parameter sets.
pub fn params() -> impl Strategy<Value = Params<f64>> {
    (
        (rate(), rate(), rate(), 0.0f64..2.0),
        (rate(), rate(), rate(), rate()),
        (rate(), rate(), rate()),
    )
        .prop_map(
            |((b1, b2, b3, c), (a11, a12, a13, a21), (a23, a31, a32))| Params {
                b1,
                b2,
                b3,
                c,
                a11,
                a12,
                a13,
                a21,
                a23,
                a31,
                a32,
            },
        )
}

pub fn positive_state() -> impl Strategy<Value = State<f64>> {
    (0.05f64..10.0, 0.05f64..10.0, 0.05f64..10.0).prop_map(|(x, y, z)| State::new(x, y, z))
}

/// Parameters with rates rebuilt so that `point` is an interior equilibrium:
/// `b1`, `b3` and `a21` are solved from the per-capita equations.
pub fn forced_equilibrium() -> impl Strategy<Value = (Params<f64>, State<f64>)> {
    (params(), positive_state()).prop_map(|(mut p, s)| {
        let State { x, y, z } = s;
        let gx = x / (x + p.c * y);
        let gy = y / (y + p.c * x);
        p.b1 = p.a11 * x + p.a12 * y + p.a13 * z * gx;
        p.a21 = (p.b2 + p.a23 * z * gy) / x;
        p.b3 = p.a31 * x * gx + p.a32 * y * gy;
        (p, s)
    })
}
