//! Steady states E0–E4 and their local stability.
//!
//! The boundary equilibria have closed forms; the coexistence point E4 is
//! found numerically by damped Newton iteration on the per-capita equations.
//! Stability is always decided by the eigenvalues of the analytic Jacobian.
//! The closed-form inequalities are evaluated and reported next to them.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{char_poly, solve, Mat3};
use crate::model::{jacobian, vector_field, Params, State};
use crate::scalar::Scalar;
use crate::spectral::cardano_roots;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquilibriumKind {
    /// Extinction of all three species.
    E0,
    /// Prey alone at carrying capacity.
    E1,
    /// Prey and top predator.
    E2,
    /// Prey and intermediate predator.
    E3,
    /// Coexistence.
    E4,
}

impl EquilibriumKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::E0 => "E0",
            Self::E1 => "E1",
            Self::E2 => "E2",
            Self::E3 => "E3",
            Self::E4 => "E4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
    NotAssessed,
}

impl Stability {
    pub fn label(self) -> &'static str {
        match self {
            Self::Stable => "stable",
            Self::Unstable => "unstable",
            Self::Marginal => "marginal",
            Self::NotAssessed => "not-assessed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium<T> {
    pub kind: EquilibriumKind,
    /// `None` when the closed form divides by a zero rate.
    pub point: Option<State<T>>,
    pub feasible: bool,
    /// A coordinate that should be positive sits within `1e-12` of zero.
    pub degenerate: bool,
    pub stability: Stability,
}

const DEGENERATE_TOL: f64 = 1e-12;

fn classify_point<T: Scalar>(
    kind: EquilibriumKind,
    point: Option<State<T>>,
    must_be_positive: &[usize],
) -> Equilibrium<T> {
    let tol = T::lit(DEGENERATE_TOL);
    let (feasible, degenerate) = match point {
        None => (false, false),
        Some(s) => {
            let a = s.to_array();
            let finite = a.iter().all(|v| v.is_finite());
            let nonneg = a.iter().all(|&v| v >= -tol);
            let degenerate = must_be_positive.iter().any(|&i| a[i].abs() <= tol);
            (finite && nonneg, degenerate)
        }
    };
    // tiny negative round-off on a degenerate coordinate is pinned to zero
    let point = point.map(|s| {
        State::from_array(
            s.to_array()
                .map(|v| if v.abs() <= tol { T::zero() } else { v }),
        )
    });
    Equilibrium {
        kind,
        point,
        feasible,
        degenerate,
        stability: Stability::NotAssessed,
    }
}

/// Closed-form boundary equilibria E0–E3 (stability not yet assessed).
pub fn boundary_equilibria<T: Scalar>(p: &Params<T>) -> Result<Vec<Equilibrium<T>>> {
    p.validate()?;
    let zero = T::zero();
    let e0 = classify_point(EquilibriumKind::E0, Some(State::new(zero, zero, zero)), &[]);
    let e1 = classify_point(
        EquilibriumKind::E1,
        Some(State::new(p.b1 / p.a11, zero, zero)),
        &[0],
    );
    let e2_point = (p.a31 > zero && p.a13 > zero).then(|| {
        let x2 = p.b3 / p.a31;
        State::new(x2, zero, (p.b1 - p.a11 * x2) / p.a13)
    });
    let e2 = classify_point(EquilibriumKind::E2, e2_point, &[0, 2]);
    let e3_point = (p.a21 > zero && p.a12 > zero).then(|| {
        let x3 = p.b2 / p.a21;
        State::new(x3, (p.b1 - p.a11 * x3) / p.a12, zero)
    });
    let e3 = classify_point(EquilibriumKind::E3, e3_point, &[0, 1]);
    Ok(vec![e0, e1, e2, e3])
}

/// One closed-form stability inequality `lhs <op> rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Inequality<T> {
    pub text: &'static str,
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryStability<T> {
    pub kind: EquilibriumKind,
    pub inequalities: Vec<Inequality<T>>,
    pub eigenvalues: [Complex<T>; 3],
    pub max_real: T,
    /// Decided by the eigenvalues.
    pub stability: Stability,
}

impl<T: Scalar> BoundaryStability<T> {
    pub fn inequalities_hold(&self) -> bool {
        self.inequalities.iter().all(|i| i.holds)
    }
}

/// Eigenvalues of `m` via its characteristic polynomial.
pub fn eigenvalues<T: Scalar>(m: &Mat3<T>) -> [Complex<T>; 3] {
    let [s1, s2, s3] = char_poly(m);
    cardano_roots(s1, s2, s3).roots
}

fn stability_from_spectrum<T: Scalar>(eig: &[Complex<T>; 3]) -> (T, Stability) {
    let max_real = eig.iter().fold(T::neg_infinity(), |a, e| a.max(e.re));
    let scale = eig.iter().fold(T::one(), |a, e| a.max(e.norm()));
    let tol = T::lit(1e-9) * scale;
    let s = if max_real < -tol {
        Stability::Stable
    } else if max_real > tol {
        Stability::Unstable
    } else {
        Stability::Marginal
    };
    (max_real, s)
}

/// Evaluates the closed-form inequality for E1, E2 or E3 together with the
/// Jacobian spectrum at the point.
pub fn boundary_stability<T: Scalar>(
    p: &Params<T>,
    e: &Equilibrium<T>,
) -> Result<BoundaryStability<T>> {
    let point = match (e.feasible, e.point) {
        (true, Some(s)) => s,
        _ => return Err(Error::Domain(format!("{} is not feasible", e.kind.label()))),
    };
    let inequalities = match e.kind {
        EquilibriumKind::E1 => vec![
            Inequality {
                text: "a21*b1 < a11*b2",
                lhs: p.a21 * p.b1,
                rhs: p.a11 * p.b2,
                holds: p.a21 * p.b1 < p.a11 * p.b2,
            },
            Inequality {
                text: "a31*b1 < a11*b3",
                lhs: p.a31 * p.b1,
                rhs: p.a11 * p.b3,
                holds: p.a31 * p.b1 < p.a11 * p.b3,
            },
        ],
        EquilibriumKind::E2 => vec![Inequality {
            text: "a31*b2 > a21*b3",
            lhs: p.a31 * p.b2,
            rhs: p.a21 * p.b3,
            holds: p.a31 * p.b2 > p.a21 * p.b3,
        }],
        EquilibriumKind::E3 => {
            let (x3, y3) = (point.x, point.y);
            let threshold = p.a31 * x3 * x3 / (x3 + p.c * y3) + p.a32 * y3 * y3 / (y3 + p.c * x3);
            vec![Inequality {
                text: "b3 > a31*x3^2/(x3+c*y3) + a32*y3^2/(y3+c*x3)",
                lhs: p.b3,
                rhs: threshold,
                holds: p.b3 > threshold,
            }]
        }
        other => {
            return Err(Error::Domain(format!(
                "boundary stability applies to E1, E2, E3, not {}",
                other.label()
            )))
        }
    };
    let eig = eigenvalues(&jacobian(&point, p)?);
    let (max_real, stability) = stability_from_spectrum(&eig);
    Ok(BoundaryStability {
        kind: e.kind,
        inequalities,
        eigenvalues: eig,
        max_real,
        stability,
    })
}

/// Instability of the origin along the invariant prey axis, where
/// `x' = (b1 − a11 x) x` repels from zero whenever `b1 > 0`.
pub fn origin_stability<T: Scalar>(p: &Params<T>) -> Stability {
    if p.b1 > T::zero() {
        Stability::Unstable
    } else {
        Stability::NotAssessed
    }
}

/// Boundary equilibria with stability filled in where it can be assessed.
pub fn classified_boundary_equilibria<T: Scalar>(p: &Params<T>) -> Result<Vec<Equilibrium<T>>> {
    let mut eqs = boundary_equilibria(p)?;
    for e in eqs.iter_mut() {
        e.stability = match e.kind {
            EquilibriumKind::E0 => origin_stability(p),
            _ if e.feasible => boundary_stability(p, e)?.stability,
            _ => Stability::NotAssessed,
        };
    }
    Ok(eqs)
}

/// Per-capita growth rates `(x'/x, y'/y, z'/z)` and their Jacobian, for
/// strictly positive `x`, `y`.
fn per_capita<T: Scalar>(s: [T; 3], p: &Params<T>) -> ([T; 3], Mat3<T>) {
    let [x, y, z] = s;
    let two = T::lit(2.0);
    let dx = x + p.c * y;
    let dy = y + p.c * x;
    let dx2 = dx * dx;
    let dy2 = dy * dy;
    let f = [
        p.b1 - p.a11 * x - p.a12 * y - p.a13 * x * z / dx,
        -p.b2 + p.a21 * x - p.a23 * y * z / dy,
        -p.b3 + p.a31 * x * x / dx + p.a32 * y * y / dy,
    ];
    // d/dx [x z/(x+cy)] = c y z/(x+cy)²,  d/dy = −c x z/(x+cy)²
    let j = [
        [
            -p.a11 - p.a13 * p.c * y * z / dx2,
            -p.a12 + p.a13 * p.c * x * z / dx2,
            -p.a13 * x / dx,
        ],
        [
            p.a21 + p.a23 * p.c * y * z / dy2,
            -p.a23 * p.c * x * z / dy2,
            -p.a23 * y / dy,
        ],
        [
            p.a31 * x * (x + two * p.c * y) / dx2 - p.a32 * p.c * y * y / dy2,
            -p.a31 * p.c * x * x / dx2 + p.a32 * y * (y + two * p.c * x) / dy2,
            T::zero(),
        ],
    ];
    (f, j)
}

fn residual_ok<T: Scalar>(s: &State<T>, p: &Params<T>, tol: T) -> Option<T> {
    let r = vector_field(s, p).ok()?.norm();
    (r <= tol * (T::one() + s.norm())).then_some(r)
}

fn norm3<T: Scalar>(v: [T; 3]) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Newton settings for the coexistence solver.
#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub step_tol: f64,
    pub residual_tol: f64,
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            max_halvings: 50,
            step_tol: 1e-12,
            residual_tol: 1e-10,
            random_starts: 20,
            seed: 0x5eed_1a7e,
        }
    }
}

/// Damped Newton from `start`. Returns a strictly positive root or `None`.
fn newton<T: Scalar>(p: &Params<T>, start: [T; 3], o: &NewtonOptions) -> Option<State<T>> {
    let floor = T::epsilon() * T::lit(64.0);
    let step_tol = T::lit(o.step_tol).max(floor);
    let res_tol = T::lit(o.residual_tol).max(floor * T::lit(100.0));
    let mut s = start;
    if s.iter().any(|&v| !(v > T::zero()) || !v.is_finite()) {
        return None;
    }
    let (mut f, mut j) = per_capita(s, p);
    let mut fnorm = norm3(f);
    for _ in 0..o.max_iterations {
        if fnorm == T::zero() {
            break;
        }
        let Some(delta) = solve(&j, &f.map(|v| -v)) else {
            break;
        };
        let mut lambda = T::one();
        let mut accepted = None;
        for _ in 0..=o.max_halvings {
            let trial: [T; 3] = std::array::from_fn(|i| s[i] + lambda * delta[i]);
            if trial.iter().all(|&v| v > T::zero() && v.is_finite()) {
                let (ft, jt) = per_capita(trial, p);
                let n = norm3(ft);
                if n.is_finite() && n < fnorm {
                    accepted = Some((trial, ft, jt, n));
                    break;
                }
            }
            lambda = lambda * T::lit(0.5);
        }
        // no decrease: either converged to round-off or stuck
        let Some((trial, ft, jt, n)) = accepted else {
            break;
        };
        let step = norm3(std::array::from_fn(|i| trial[i] - s[i]));
        s = trial;
        f = ft;
        j = jt;
        fnorm = n;
        if step <= step_tol * (T::one() + norm3(s)) {
            break;
        }
    }
    let state = State::from_array(s);
    residual_ok(&state, p, res_tol).map(|_| state)
}

/// Solution of the per-capita system at `c = 0`, where it is linear:
/// `a11 x + a12 y + a13 z = b1`, `a21 x − a23 z = b2`, `a31 x + a32 y = b3`.
pub fn linear_coexistence<T: Scalar>(p: &Params<T>) -> Option<[T; 3]> {
    let zero = T::zero();
    let m = [
        [p.a11, p.a12, p.a13],
        [p.a21, zero, -p.a23],
        [p.a31, p.a32, zero],
    ];
    solve(&m, &[p.b1, p.b2, p.b3])
}

fn finish<T: Scalar>(s: State<T>) -> Equilibrium<T> {
    Equilibrium {
        kind: EquilibriumKind::E4,
        point: Some(s),
        feasible: true,
        degenerate: false,
        stability: Stability::NotAssessed,
    }
}

/// Finds a strictly positive coexistence equilibrium, or `Ok(None)` when the
/// start schedule does not produce one.
///
/// Starts are tried in a fixed order: the caller's guess, the `c = 0` linear
/// solution, the centroid of the feasible boundary equilibria, then
/// log-uniform random points in `[1e-2, 1e2]³` from a fixed seed.
pub fn solve_coexistence<T: Scalar>(
    p: &Params<T>,
    guess: Option<State<T>>,
) -> Result<Option<Equilibrium<T>>> {
    solve_coexistence_with(p, guess, &NewtonOptions::default())
}

pub fn solve_coexistence_with<T: Scalar>(
    p: &Params<T>,
    guess: Option<State<T>>,
    o: &NewtonOptions,
) -> Result<Option<Equilibrium<T>>> {
    p.validate()?;
    let linear = linear_coexistence(p);
    if p.c == T::zero() {
        if let Some(s) = linear {
            let state = State::from_array(s);
            if state.is_strictly_positive() {
                // polish in case the linear solve left round-off
                let polished = newton(p, s, o).unwrap_or(state);
                return Ok(Some(finish(polished)));
            }
            return Ok(None);
        }
    }

    let mut starts: Vec<[T; 3]> = Vec::new();
    if let Some(g) = guess {
        starts.push(g.to_array());
    }
    if let Some(s) = linear_coexistence(&p.with_c(T::zero())) {
        starts.push(s);
    }
    let lift = T::lit(1e-2);
    let boundary: Vec<[T; 3]> = boundary_equilibria(p)?
        .into_iter()
        .filter(|e| e.feasible)
        .filter_map(|e| e.point.map(|s| s.to_array()))
        .collect();
    if !boundary.is_empty() {
        let n = T::lit(boundary.len() as f64);
        let centroid: [T; 3] = std::array::from_fn(|i| {
            (boundary.iter().fold(T::zero(), |a, b| a + b[i]) / n).max(lift)
        });
        starts.push(centroid);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    for _ in 0..o.random_starts {
        starts.push(std::array::from_fn(|_| {
            T::lit(10f64.powf(rng.gen_range(-2.0..=2.0)))
        }));
    }

    for start in starts {
        if let Some(s) = newton(p, start, o) {
            if s.is_strictly_positive() {
                return Ok(Some(finish(s)));
            }
        }
    }
    Ok(None)
}

/// Routh–Hurwitz quantities at the coexistence point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouthHurwitzReport<T> {
    /// `V1 … V8`.
    pub v: [T; 8],
    pub sigma1: T,
    pub sigma2: T,
    pub sigma3: T,
    /// `σ1 > 0 ∧ σ3 > 0 ∧ σ1σ2 > σ3`.
    pub hurwitz: bool,
    /// `(−tr J, Σ principal minors, −det J)` from the analytic Jacobian.
    pub jacobian_sigma: [T; 3],
    /// Largest relative difference between the two routes.
    pub route_discrepancy: T,
}

impl<T: Scalar> RouthHurwitzReport<T> {
    pub fn sigmas(&self) -> [T; 3] {
        [self.sigma1, self.sigma2, self.sigma3]
    }

    pub fn margin(&self) -> T {
        self.sigma1 * self.sigma2 - self.sigma3
    }
}

/// Routh–Hurwitz predicate for `λ³ + s1 λ² + s2 λ + s3`.
pub fn hurwitz_cubic<T: Scalar>(s1: T, s2: T, s3: T) -> bool {
    s1 > T::zero() && s3 > T::zero() && s1 * s2 > s3
}

/// Evaluates `V1 … V8` and `σ1 … σ3` at a strictly positive equilibrium.
pub fn routh_hurwitz<T: Scalar>(p: &Params<T>, e4: &State<T>) -> Result<RouthHurwitzReport<T>> {
    e4.validate()?;
    if !e4.is_strictly_positive() {
        return Err(Error::Domain(
            "Routh-Hurwitz report needs a strictly positive point".into(),
        ));
    }
    let State { x, y, z } = *e4;
    let c = p.c;
    let two = T::lit(2.0);
    let dx = x + c * y;
    let dy = y + c * x;
    let dx2 = dx * dx;
    let dy2 = dy * dy;
    let v1 = p.a11 * x + p.a13 * c * x * y * z / dx2;
    let v2 = -p.a12 * x + p.a13 * c * x * x * z / dx2;
    let v3 = p.a13 * x * x / dx;
    let v4 = p.a21 * y + p.a23 * c * y * y * z / dy2;
    let v5 = p.a23 * c * x * y * z / dy2;
    let v6 = p.a23 * y * y / dy;
    let v7 = (p.a31 * x * x * z + two * p.a31 * c * x * y * z) / dx2 - p.a32 * c * y * y * z / dy2;
    let v8 = -p.a31 * c * x * x * z / dx2 + (p.a32 * y * y * z + two * p.a32 * c * x * y * z) / dy2;
    let sigma1 = v1 + v5;
    let sigma2 = v1 * v5 - v2 * v4 + v3 * v7 + v6 * v8;
    let sigma3 = v1 * v6 * v8 + v2 * v6 * v7 + v3 * v4 * v8 + v3 * v5 * v7;

    let jacobian_sigma = char_poly(&jacobian(e4, p)?);
    let route_discrepancy = [sigma1, sigma2, sigma3]
        .iter()
        .zip(&jacobian_sigma)
        .fold(T::zero(), |acc, (&a, &b)| {
            acc.max((a - b).abs() / (T::one() + a.abs().max(b.abs())))
        });
    Ok(RouthHurwitzReport {
        v: [v1, v2, v3, v4, v5, v6, v7, v8],
        sigma1,
        sigma2,
        sigma3,
        hurwitz: hurwitz_cubic(sigma1, sigma2, sigma3),
        jacobian_sigma,
        route_discrepancy,
    })
}

/// Coexistence equilibrium with its stability assessed from the spectrum.
pub fn classified_coexistence<T: Scalar>(
    p: &Params<T>,
    guess: Option<State<T>>,
) -> Result<Option<(Equilibrium<T>, RouthHurwitzReport<T>)>> {
    let Some(mut e4) = solve_coexistence(p, guess)? else {
        return Ok(None);
    };
    let point = e4.point.expect("coexistence point");
    let report = routh_hurwitz(p, &point)?;
    let eig = eigenvalues(&jacobian(&point, p)?);
    e4.stability = stability_from_spectrum(&eig).1;
    Ok(Some((e4, report)))
}
