//! Adaptive Dormand–Prince 4(5) integration of the model and of its
//! variational (tangent) equation.

use crate::error::{Error, Result};
use crate::linalg::{mat_vec, norm};
use crate::model::{jac, rhs, Params, State};
use crate::scalar::Scalar;

/// Step-control and sampling settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_step: T,
    pub initial_step: T,
    pub max_steps: u64,
    /// Spacing of the dense-output samples stored in a [`Trajectory`].
    pub sample_interval: T,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-8),
            abs_tol: T::lit(1e-10),
            max_step: T::lit(0.1),
            initial_step: T::lit(1e-3),
            max_steps: 10_000_000,
            sample_interval: T::lit(0.01),
        }
    }
}

impl<T: Scalar> SolverOptions<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("initial_step", self.initial_step),
            ("sample_interval", self.sample_interval),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and positive, got {v}"),
                });
            }
        }
        if self.rel_tol < T::lit(1e-14) {
            return Err(Error::InvalidParameter {
                name: "rel_tol",
                reason: "must be at least 1e-14".into(),
            });
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "max_steps",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Autonomous ODE `y' = f(y)` in `N` dimensions. The first
/// [`OdeSystem::NONNEGATIVE`] components are population densities that must
/// stay in the nonnegative orthant.
pub trait OdeSystem<T: Scalar, const N: usize> {
    const NONNEGATIVE: usize;
    fn eval(&self, y: &[T; N]) -> [T; N];
}

/// The model vector field as an ODE system.
pub struct ModelSystem<'a, T>(pub &'a Params<T>);

impl<T: Scalar> OdeSystem<T, 3> for ModelSystem<'_, T> {
    const NONNEGATIVE: usize = 3;
    #[inline]
    fn eval(&self, y: &[T; 3]) -> [T; 3] {
        rhs(*y, self.0)
    }
}

/// State plus one tangent vector: `s' = f(s)`, `v' = J(s) v`.
pub struct TangentSystem<'a, T>(pub &'a Params<T>);

impl<T: Scalar> OdeSystem<T, 6> for TangentSystem<'_, T> {
    const NONNEGATIVE: usize = 3;
    #[inline]
    fn eval(&self, y: &[T; 6]) -> [T; 6] {
        let s = [y[0], y[1], y[2]];
        let f = rhs(s, self.0);
        let dv = mat_vec(&jac(s, self.0), &[y[3], y[4], y[5]]);
        [f[0], f[1], f[2], dv[0], dv[1], dv[2]]
    }
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MIN_STEP: f64 = 1e-14;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

/// Continuous extension of one accepted step, valid on `[t0, t0 + h]`.
pub struct DenseStep<T, const N: usize> {
    pub t0: T,
    pub h: T,
    cont: [[T; N]; 5],
}

impl<T: Scalar, const N: usize> DenseStep<T, N> {
    pub fn t1(&self) -> T {
        self.t0 + self.h
    }

    pub fn eval(&self, t: T) -> [T; N] {
        let s = (t - self.t0) / self.h;
        let s1 = T::one() - s;
        let c = &self.cont;
        std::array::from_fn(|i| {
            c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])))
        })
    }
}

/// Stepper state for one integration run.
pub struct Dopri5<'a, T, S, const N: usize> {
    sys: &'a S,
    opts: SolverOptions<T>,
    t: T,
    y: [T; N],
    k1: [T; N],
    h: T,
    err_old: T,
    steps: u64,
}

#[inline]
fn combine<T: Scalar, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    std::array::from_fn(|i| {
        let mut acc = T::zero();
        for &(a, k) in terms {
            acc = acc + T::lit(a) * k[i];
        }
        y[i] + h * acc
    })
}

impl<'a, T: Scalar, S: OdeSystem<T, N>, const N: usize> Dopri5<'a, T, S, N> {
    pub fn new(sys: &'a S, t0: T, y0: [T; N], opts: SolverOptions<T>) -> Self {
        let k1 = sys.eval(&y0);
        Self {
            sys,
            opts,
            t: t0,
            y: y0,
            k1,
            h: opts.initial_step.min(opts.max_step),
            err_old: T::lit(1e-4),
            steps: 0,
        }
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn y(&self) -> &[T; N] {
        &self.y
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Overwrites the current state (used for tangent renormalization).
    pub fn reset_state(&mut self, y: [T; N]) {
        self.y = y;
        self.k1 = self.sys.eval(&y);
    }

    /// Advances to exactly `t_end`, handing every accepted step to `observer`.
    pub fn advance_to(
        &mut self,
        t_end: T,
        mut observer: impl FnMut(&DenseStep<T, N>),
    ) -> Result<()> {
        let o = self.opts;
        let eps = T::epsilon() * (T::one() + t_end.abs()) * T::lit(8.0);
        while t_end - self.t > eps {
            if self.steps >= o.max_steps {
                return Err(Error::StepBudgetExceeded {
                    t: self.t.as_f64(),
                    max_steps: o.max_steps,
                });
            }
            let mut h = self.h.min(o.max_step);
            let remaining = t_end - self.t;
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h < T::lit(MIN_STEP) && !last {
                return Err(Error::StepUnderflow {
                    t: self.t.as_f64(),
                    h: h.as_f64(),
                });
            }
            let step = self.try_step(h)?;
            match step {
                Attempt::Accepted(dense, h_next) => {
                    self.steps += 1;
                    observer(&dense);
                    self.h = h_next;
                    if last {
                        self.t = t_end;
                    }
                }
                Attempt::Rejected(h_next) => {
                    if h_next < T::lit(MIN_STEP) {
                        return Err(Error::StepUnderflow {
                            t: self.t.as_f64(),
                            h: h_next.as_f64(),
                        });
                    }
                    self.h = h_next;
                }
            }
        }
        Ok(())
    }

    fn try_step(&mut self, h: T) -> Result<Attempt<T, N>> {
        let sys = self.sys;
        let y = &self.y;
        let k1 = &self.k1;
        let k2 = sys.eval(&combine(y, h, &[(A21, k1)]));
        let k3 = sys.eval(&combine(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = sys.eval(&combine(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = sys.eval(&combine(
            y,
            h,
            &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)],
        ));
        let k6 = sys.eval(&combine(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ));
        let mut y_new = combine(
            y,
            h,
            &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let mut k7 = sys.eval(&y_new);

        let o = &self.opts;
        let mut acc = T::zero();
        for i in 0..N {
            let e = h
                * (T::lit(E1) * k1[i]
                    + T::lit(E3) * k3[i]
                    + T::lit(E4) * k4[i]
                    + T::lit(E5) * k5[i]
                    + T::lit(E6) * k6[i]
                    + T::lit(E7) * k7[i]);
            let sc = o.abs_tol + o.rel_tol * y[i].abs().max(y_new[i].abs());
            let r = e / sc;
            acc = acc + r * r;
        }
        let err = (acc / T::lit(N as f64)).sqrt();
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            return if h <= T::lit(MIN_STEP) {
                Err(Error::NonFinite { t: self.t.as_f64() })
            } else {
                Ok(Attempt::Rejected(h * T::lit(FAC_MIN)))
            };
        }

        let expo = T::lit(0.2 - BETA * 0.75);
        let fac11 = err.powf(expo);
        if err > T::one() {
            let shrink = (fac11 / T::lit(SAFETY)).min(T::lit(1.0 / FAC_MIN));
            return Ok(Attempt::Rejected(h / shrink));
        }

        // Populations: clamp tiny undershoots, reject real ones.
        let mut clamped = false;
        for v in y_new.iter_mut().take(S::NONNEGATIVE) {
            if *v < T::zero() {
                if *v >= -o.abs_tol {
                    *v = T::zero();
                    clamped = true;
                } else {
                    return Ok(Attempt::Rejected(h * T::lit(0.5)));
                }
            }
        }

        let ydiff: [T; N] = std::array::from_fn(|i| y_new[i] - y[i]);
        let bspl: [T; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
        let cont = [
            *y,
            ydiff,
            bspl,
            std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
            std::array::from_fn(|i| {
                h * (T::lit(D1) * k1[i]
                    + T::lit(D3) * k3[i]
                    + T::lit(D4) * k4[i]
                    + T::lit(D5) * k5[i]
                    + T::lit(D6) * k6[i]
                    + T::lit(D7) * k7[i])
            }),
        ];
        if clamped {
            k7 = sys.eval(&y_new);
        }

        let fac = (fac11 / self.err_old.powf(T::lit(BETA)) / T::lit(SAFETY))
            .max(T::one() / T::lit(FAC_MAX))
            .min(T::one() / T::lit(FAC_MIN));
        self.err_old = err.max(T::lit(1e-4));
        let dense = DenseStep {
            t0: self.t,
            h,
            cont,
        };
        self.t = self.t + h;
        self.y = y_new;
        self.k1 = k7;
        Ok(Attempt::Accepted(dense, h / fac))
    }
}

enum Attempt<T, const N: usize> {
    Accepted(DenseStep<T, N>, T),
    Rejected(T),
}

/// Uniformly sampled solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<State<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(T, State<T>)> {
        Some((*self.times.last()?, *self.states.last()?))
    }
}

/// Collects samples at `t0 + k·dt` (and at the final time) from dense steps.
struct Sampler<T> {
    t0: T,
    dt: T,
    next: u64,
    from: T,
}

impl<T: Scalar> Sampler<T> {
    fn new(t0: T, dt: T, from: T) -> Self {
        let mut s = Self {
            t0,
            dt,
            next: 0,
            from,
        };
        while s.time(s.next) < from {
            s.next += 1;
        }
        s
    }

    fn time(&self, k: u64) -> T {
        self.t0 + T::lit(k as f64) * self.dt
    }

    fn collect<const N: usize>(&mut self, step: &DenseStep<T, N>, mut push: impl FnMut(T, [T; N])) {
        let t1 = step.t1();
        loop {
            let t = self.time(self.next);
            if t > t1 {
                break;
            }
            if t >= self.from {
                push(t, step.eval(t));
            }
            self.next += 1;
        }
    }
}

fn check_start<T: Scalar>(s0: &State<T>, t_end: T, opts: &SolverOptions<T>) -> Result<()> {
    s0.validate()?;
    opts.validate()?;
    if !(t_end.is_finite() && t_end > T::zero()) {
        return Err(Error::Domain(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    Ok(())
}

fn push_sample<T: Scalar>(traj: &mut Trajectory<T>, t: T, y: [T; 3]) {
    if traj.times.last().is_some_and(|&last| t <= last) {
        return;
    }
    traj.times.push(t);
    // dense output can undershoot zero by rounding; the orthant is invariant
    traj.states
        .push(State::from_array(y.map(|v| v.max(T::zero()))));
}

/// Integrates the model from `s0` over `[0, t_end]`.
pub fn integrate<T: Scalar>(
    p: &Params<T>,
    s0: &State<T>,
    t_end: T,
    opts: &SolverOptions<T>,
) -> Result<Trajectory<T>> {
    integrate_window(p, s0, t_end, T::zero(), opts)
}

/// Like [`integrate`] but only stores samples with `t >= keep_from`.
pub fn integrate_window<T: Scalar>(
    p: &Params<T>,
    s0: &State<T>,
    t_end: T,
    keep_from: T,
    opts: &SolverOptions<T>,
) -> Result<Trajectory<T>> {
    p.validate()?;
    check_start(s0, t_end, opts)?;
    let sys = ModelSystem(p);
    let mut solver = Dopri5::new(&sys, T::zero(), s0.to_array(), *opts);
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
    };
    if keep_from <= T::zero() {
        push_sample(&mut traj, T::zero(), s0.to_array());
    }
    let mut sampler = Sampler::new(T::zero(), opts.sample_interval, keep_from);
    solver.advance_to(t_end, |step| {
        sampler.collect(step, |t, y| push_sample(&mut traj, t, y));
    })?;
    let y_end = *solver.y();
    push_sample(&mut traj, t_end, y_end);
    Ok(traj)
}

/// Result of a joint state/tangent integration.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentRun<T> {
    pub trajectory: Trajectory<T>,
    /// `ln ‖v‖` at the end of each renormalization interval, before rescaling.
    pub log_growth: Vec<T>,
    /// Length of each renormalization interval (the last may be shorter).
    pub intervals: Vec<T>,
}

impl<T: Scalar> TangentRun<T> {
    /// Mean exponential growth rate of the tangent vector over intervals
    /// starting at or after `skip` time units.
    pub fn growth_rate(&self, skip: T) -> Option<T> {
        let mut t = T::zero();
        let mut sum = T::zero();
        let mut span = T::zero();
        for (&log, &dt) in self.log_growth.iter().zip(&self.intervals) {
            if t >= skip {
                sum = sum + log;
                span = span + dt;
            }
            t = t + dt;
        }
        (span > T::zero()).then(|| sum / span)
    }
}

/// Default tangent renormalization interval.
pub const RENORM_INTERVAL: f64 = 1.0;

/// Integrates the state together with `v' = J(s) v`, rescaling `v` to unit
/// length every `renorm` time units.
pub fn integrate_with_tangent<T: Scalar>(
    p: &Params<T>,
    s0: &State<T>,
    v0: [T; 3],
    t_end: T,
    renorm: T,
    opts: &SolverOptions<T>,
) -> Result<TangentRun<T>> {
    p.validate()?;
    check_start(s0, t_end, opts)?;
    let n0 = norm(&v0);
    if !(n0.is_finite() && n0 > T::zero()) {
        return Err(Error::Domain(
            "initial tangent vector must be nonzero".into(),
        ));
    }
    if !(renorm.is_finite() && renorm > T::zero()) {
        return Err(Error::Domain(
            "renormalization interval must be positive".into(),
        ));
    }
    let sys = TangentSystem(p);
    let s = s0.to_array();
    let y0 = [s[0], s[1], s[2], v0[0] / n0, v0[1] / n0, v0[2] / n0];
    let mut solver = Dopri5::new(&sys, T::zero(), y0, *opts);
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
    };
    push_sample(&mut traj, T::zero(), s);
    let mut sampler = Sampler::new(T::zero(), opts.sample_interval, T::zero());
    let mut log_growth = Vec::new();
    let mut intervals = Vec::new();
    let mut k: u64 = 0;
    loop {
        let t_start = solver.t();
        if t_start >= t_end {
            break;
        }
        k += 1;
        let t_next = (T::lit(k as f64) * renorm).min(t_end);
        solver.advance_to(t_next, |step| {
            sampler.collect(step, |t, y| push_sample(&mut traj, t, [y[0], y[1], y[2]]));
        })?;
        let y = *solver.y();
        let v = [y[3], y[4], y[5]];
        let n = norm(&v);
        if !(n.is_finite() && n > T::zero()) {
            return Err(Error::NonFinite { t: t_next.as_f64() });
        }
        log_growth.push(n.ln());
        intervals.push(t_next - t_start);
        solver.reset_state([y[0], y[1], y[2], v[0] / n, v[1] / n, v[2] / n]);
    }
    let y = *solver.y();
    push_sample(&mut traj, t_end, [y[0], y[1], y[2]]);
    Ok(TangentRun {
        trajectory: traj,
        log_growth,
        intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay;
    impl OdeSystem<f64, 1> for Decay {
        const NONNEGATIVE: usize = 1;
        fn eval(&self, y: &[f64; 1]) -> [f64; 1] {
            [-y[0]]
        }
    }

    struct Oscillator;
    impl OdeSystem<f64, 2> for Oscillator {
        const NONNEGATIVE: usize = 0;
        fn eval(&self, y: &[f64; 2]) -> [f64; 2] {
            [y[1], -y[0]]
        }
    }

    #[test]
    fn exponential_decay_accuracy() {
        let opts = SolverOptions::default();
        let mut s = Dopri5::new(&Decay, 0.0, [1.0], opts);
        s.advance_to(5.0, |_| {}).unwrap();
        assert!((s.y()[0] - (-5.0f64).exp()).abs() < 1e-9);
        assert_eq!(s.t(), 5.0);
    }

    #[test]
    fn dense_output_tracks_sine() {
        let opts = SolverOptions {
            max_step: 0.5,
            ..SolverOptions::default()
        };
        let mut s = Dopri5::new(&Oscillator, 0.0, [0.0, 1.0], opts);
        let mut worst = 0.0f64;
        s.advance_to(10.0, |step| {
            let mid = step.t0 + 0.37 * step.h;
            worst = worst.max((step.eval(mid)[0] - mid.sin()).abs());
        })
        .unwrap();
        assert!(worst < 1e-7, "dense error {worst}");
    }

    #[test]
    fn step_budget_reported() {
        let opts = SolverOptions {
            max_steps: 10,
            ..SolverOptions::default()
        };
        let mut s = Dopri5::new(&Decay, 0.0, [1.0], opts);
        let err = s.advance_to(100.0, |_| {}).unwrap_err();
        assert!(matches!(
            err,
            Error::StepBudgetExceeded { max_steps: 10, .. }
        ));
    }

    #[test]
    fn samples_are_uniform_and_increasing() {
        let p = Params::<f64>::reference();
        let traj = integrate(
            &p,
            &State::new(1.0, 1.0, 1.0),
            1.0,
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.len(), 101);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert!((traj.times[50] - 0.5).abs() < 1e-12);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
    }

    #[test]
    fn rejects_nonpositive_end_time() {
        let p = Params::<f64>::reference();
        let s = State::new(1.0, 1.0, 1.0);
        assert!(integrate(&p, &s, 0.0, &SolverOptions::default()).is_err());
    }

    #[test]
    fn rejects_zero_tangent() {
        let p = Params::<f64>::reference();
        let s = State::new(1.0, 1.0, 1.0);
        let r = integrate_with_tangent(&p, &s, [0.0; 3], 1.0, 1.0, &SolverOptions::default());
        assert!(r.is_err());
    }

    #[test]
    fn invalid_options() {
        let o = SolverOptions::<f64> {
            rel_tol: 1e-16,
            ..SolverOptions::default()
        };
        assert!(o.validate().is_err());
    }
}
