//! Bifurcation sweeps, attractor extrema and largest Lyapunov exponents.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrate::{
    integrate_window, integrate_with_tangent, SolverOptions, Trajectory, RENORM_INTERVAL,
};
use crate::model::{Params, State, PARAM_NAMES};
use crate::scalar::Scalar;

/// Differences below `NOISE_FLOOR · (1 + |v|)` between neighbouring samples
/// count as ties, so round-off on a converged trajectory yields no extrema.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Strict local extrema of one variable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VariableExtrema<T> {
    pub maxima: Vec<T>,
    pub minima: Vec<T>,
}

impl<T: Scalar> VariableExtrema<T> {
    pub fn count(&self) -> usize {
        self.maxima.len() + self.minima.len()
    }

    /// `max − min` over all extrema; zero when there are none.
    pub fn spread(&self) -> T {
        let all = self.maxima.iter().chain(&self.minima);
        let (lo, hi) = all.fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        if hi >= lo {
            hi - lo
        } else {
            T::zero()
        }
    }
}

/// Extrema for `x`, `y`, `z`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Extrema<T> {
    pub vars: [VariableExtrema<T>; 3],
}

impl<T: Scalar> Extrema<T> {
    pub fn max_spread(&self) -> T {
        self.vars
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.spread()))
    }
}

pub const VARIABLE_NAMES: [&str; 3] = ["x", "y", "z"];

fn local_extrema<T: Scalar>(values: &[T]) -> VariableExtrema<T> {
    let mut out = VariableExtrema {
        maxima: Vec::new(),
        minima: Vec::new(),
    };
    let floor = T::lit(NOISE_FLOOR);
    for w in values.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        let tol = floor * (T::one() + b.abs());
        if b - a > tol && b - c > tol {
            out.maxima.push(b);
        } else if a - b > tol && c - b > tol {
            out.minima.push(b);
        }
    }
    out
}

/// Strict local maxima and minima of each variable over samples with
/// `t >= transient`.
pub fn attractor_extrema<T: Scalar>(traj: &Trajectory<T>, transient: T) -> Result<Extrema<T>> {
    let start = traj.times.partition_point(|&t| t < transient);
    let window = &traj.states[start..];
    if window.is_empty() {
        return Err(Error::Domain(format!(
            "no samples after transient {transient}"
        )));
    }
    let column = |k: usize| -> Vec<T> { window.iter().map(|s| s.to_array()[k]).collect() };
    Ok(Extrema {
        vars: [
            local_extrema(&column(0)),
            local_extrema(&column(1)),
            local_extrema(&column(2)),
        ],
    })
}

/// Benettin settings for [`largest_lyapunov_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovOptions<T> {
    pub tangent: [T; 3],
    pub renorm_interval: T,
    /// Leading fraction of the run excluded from the average.
    pub discard_fraction: T,
}

impl<T: Scalar> Default for LyapunovOptions<T> {
    fn default() -> Self {
        let u = T::one() / T::lit(3.0).sqrt();
        Self {
            tangent: [u, u, u],
            renorm_interval: T::lit(RENORM_INTERVAL),
            discard_fraction: T::lit(0.2),
        }
    }
}

/// Largest Lyapunov exponent by tangent renormalization, averaged after the
/// first 20% of `total_time`.
pub fn largest_lyapunov<T: Scalar>(
    p: &Params<T>,
    s0: &State<T>,
    total_time: T,
    opts: &SolverOptions<T>,
) -> Result<T> {
    largest_lyapunov_with(p, s0, total_time, opts, &LyapunovOptions::default())
}

pub fn largest_lyapunov_with<T: Scalar>(
    p: &Params<T>,
    s0: &State<T>,
    total_time: T,
    opts: &SolverOptions<T>,
    lo: &LyapunovOptions<T>,
) -> Result<T> {
    if !(lo.discard_fraction >= T::zero() && lo.discard_fraction < T::one()) {
        return Err(Error::Domain("discard fraction must lie in [0, 1)".into()));
    }
    let run = integrate_with_tangent(p, s0, lo.tangent, total_time, lo.renorm_interval, opts)?;
    run.growth_rate(lo.discard_fraction * total_time)
        .ok_or_else(|| {
            Error::Domain("no renormalization interval after the discarded prefix".into())
        })
}

/// Regime of one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    StablePoint,
    Periodic,
    Chaotic,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Self::StablePoint => "stable-point",
            Self::Periodic => "periodic",
            Self::Chaotic => "chaotic",
        }
    }
}

/// Default LLE cut between regimes.
pub const LLE_THRESHOLD: f64 = 0.01;
/// Default extrema spread below which a trajectory counts as converged.
pub const SPREAD_TOLERANCE: f64 = 1e-4;

/// `Chaotic` when `lle > lle_threshold`; `StablePoint` when every variable's
/// extrema spread is below `spread_tol` and `lle < −lle_threshold`;
/// otherwise `Periodic`.
pub fn classify<T: Scalar>(
    extrema: &Extrema<T>,
    lle: T,
    lle_threshold: T,
    spread_tol: T,
) -> Verdict {
    if lle > lle_threshold {
        Verdict::Chaotic
    } else if extrema.max_spread() < spread_tol && lle < -lle_threshold {
        Verdict::StablePoint
    } else {
        Verdict::Periodic
    }
}

/// A one-parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec<T> {
    pub parameter: String,
    pub grid: Vec<T>,
    pub base: Params<T>,
    pub initial: State<T>,
    pub transient: T,
    pub sample: T,
    pub solver: SolverOptions<T>,
    pub lle_threshold: T,
    pub spread_tol: T,
}

impl<T: Scalar> SweepSpec<T> {
    /// Sweep with default spans and thresholds, starting from `(1, 1, 1)`.
    pub fn new(parameter: &str, grid: Vec<T>, base: Params<T>) -> Self {
        Self {
            parameter: parameter.to_owned(),
            grid,
            base,
            initial: State::new(T::one(), T::one(), T::one()),
            transient: T::lit(2000.0),
            sample: T::lit(1000.0),
            solver: SolverOptions::default(),
            lle_threshold: T::lit(LLE_THRESHOLD),
            spread_tol: T::lit(SPREAD_TOLERANCE),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !PARAM_NAMES.contains(&self.parameter.as_str()) {
            return Err(Error::InvalidParameter {
                name: "parameter",
                reason: format!("unknown model parameter `{}`", self.parameter),
            });
        }
        if self.grid.is_empty() {
            return Err(Error::Domain("sweep grid is empty".into()));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "sweep grid must be strictly increasing".into(),
            ));
        }
        if !(self.transient > T::zero() && self.sample > T::zero()) {
            return Err(Error::Domain(
                "transient and sample times must be positive".into(),
            ));
        }
        self.base.validate()?;
        self.initial.validate()?;
        self.solver.validate()
    }

    pub fn total_time(&self) -> T {
        self.transient + self.sample
    }

    /// Uniform grid `start, start + step, …` up to `stop` (inclusive within
    /// half a step). Points are `start + k·step` to avoid accumulated drift.
    pub fn uniform_grid(start: T, stop: T, step: T) -> Result<Vec<T>> {
        if !(step > T::zero()) || !(stop >= start) {
            return Err(Error::Domain(
                "grid needs step > 0 and stop >= start".into(),
            ));
        }
        let n = ((stop - start) / step + T::lit(0.5))
            .floor()
            .to_usize()
            .unwrap_or(0);
        Ok((0..=n).map(|k| start + T::lit(k as f64) * step).collect())
    }
}

/// Analysis of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointAnalysis<T> {
    pub extrema: Extrema<T>,
    pub lle: T,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord<T> {
    pub value: T,
    /// Failures are kept in-line so one bad point does not abort the sweep.
    pub outcome: std::result::Result<PointAnalysis<T>, Error>,
}

impl<T: Scalar> SweepRecord<T> {
    pub fn verdict(&self) -> Option<Verdict> {
        self.outcome.as_ref().ok().map(|a| a.verdict)
    }
}

/// Integrates and classifies the model at `parameter = value`.
pub fn analyze_point<T: Scalar>(spec: &SweepSpec<T>, value: T) -> Result<PointAnalysis<T>> {
    let p = spec.base.with(&spec.parameter, value)?;
    let total = spec.total_time();
    let traj = integrate_window(&p, &spec.initial, total, spec.transient, &spec.solver)?;
    let extrema = attractor_extrema(&traj, spec.transient)?;
    let lle = largest_lyapunov(&p, &spec.initial, total, &spec.solver)?;
    let verdict = classify(&extrema, lle, spec.lle_threshold, spec.spread_tol);
    Ok(PointAnalysis {
        extrema,
        lle,
        verdict,
    })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))
}

/// Runs the sweep on `jobs` workers. Records come back in grid order and do
/// not depend on the worker count.
pub fn sweep<T: Scalar>(spec: &SweepSpec<T>, jobs: usize) -> Result<Vec<SweepRecord<T>>> {
    spec.validate()?;
    let records = pool(jobs)?.install(|| {
        spec.grid
            .par_iter()
            .map(|&value| SweepRecord {
                value,
                outcome: analyze_point(spec, value),
            })
            .collect()
    });
    Ok(records)
}

/// Which verdict change a threshold search brackets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// From `Chaotic` to any other verdict.
    ChaosLoss,
    /// From any non-stable verdict to `StablePoint`.
    StabilityOnset,
}

impl Transition {
    fn before(self, v: Verdict) -> bool {
        match self {
            Self::ChaosLoss => v == Verdict::Chaotic,
            Self::StabilityOnset => v != Verdict::StablePoint,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::ChaosLoss => "chaos-loss",
            Self::StabilityOnset => "stability-onset",
        }
    }
}

/// Bracketing interval of a verdict change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdInterval<T> {
    pub lo: T,
    pub hi: T,
    pub iterations: usize,
}

/// Sweep records with the bracket found on them, if any.
pub type ThresholdRun<T> = (Vec<SweepRecord<T>>, Option<ThresholdInterval<T>>);

/// Default number of bisection steps.
pub const BISECTION_STEPS: usize = 12;

/// Finds the last grid interval where `transition` happens and narrows it by
/// bisection with `classifier`. `Ok(None)` means no such change on the grid.
pub fn locate_transition<T: Scalar>(
    grid: &[T],
    verdicts: &[Option<Verdict>],
    transition: Transition,
    iterations: usize,
    mut classifier: impl FnMut(T) -> Result<Verdict>,
) -> Result<Option<ThresholdInterval<T>>> {
    let pair = grid
        .windows(2)
        .zip(verdicts.windows(2))
        .enumerate()
        .filter_map(|(i, (_, v))| match (v[0], v[1]) {
            (Some(a), Some(b)) if transition.before(a) && !transition.before(b) => Some(i),
            _ => None,
        })
        .last();
    let Some(i) = pair else {
        return Ok(None);
    };
    let (mut lo, mut hi) = (grid[i], grid[i + 1]);
    let mut done = 0;
    for _ in 0..iterations {
        let mid = (lo + hi) * T::lit(0.5);
        if !(mid > lo && mid < hi) {
            break;
        }
        if transition.before(classifier(mid)?) {
            lo = mid;
        } else {
            hi = mid;
        }
        done += 1;
    }
    Ok(Some(ThresholdInterval {
        lo,
        hi,
        iterations: done,
    }))
}

/// Sweeps `spec` and brackets the last `transition` with up to
/// [`BISECTION_STEPS`] bisections. Uses `lle_threshold` in place of the
/// sweep's own cut.
pub fn locate_threshold<T: Scalar>(
    spec: &SweepSpec<T>,
    lle_threshold: T,
    transition: Transition,
    jobs: usize,
) -> Result<ThresholdRun<T>> {
    let spec = SweepSpec {
        lle_threshold,
        ..spec.clone()
    };
    let records = sweep(&spec, jobs)?;
    let interval = threshold_from_records(&spec, &records, transition)?;
    Ok((records, interval))
}

/// Bisection step of [`locate_threshold`] on already computed records.
pub fn threshold_from_records<T: Scalar>(
    spec: &SweepSpec<T>,
    records: &[SweepRecord<T>],
    transition: Transition,
) -> Result<Option<ThresholdInterval<T>>> {
    let verdicts: Vec<Option<Verdict>> = records.iter().map(SweepRecord::verdict).collect();
    locate_transition(&spec.grid, &verdicts, transition, BISECTION_STEPS, |v| {
        analyze_point(spec, v).map(|a| a.verdict)
    })
}
