use igp_core::analysis::{
    analyze_point, attractor_extrema, largest_lyapunov, largest_lyapunov_with, locate_threshold,
    sweep, LyapunovOptions, SweepSpec, Transition, Verdict,
};
use igp_core::equilibria::{
    boundary_equilibria, eigenvalues, routh_hurwitz, solve_coexistence, EquilibriumKind,
};
use igp_core::integrate::{integrate_window, SolverOptions};
use igp_core::model::{jacobian, Params, State};
use igp_core::output::{write_sweep_extrema_csv, write_sweep_summary_csv};
use igp_core::spectral::{cardano_roots, silnikov_check};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reference() -> Params<f64> {
    Params::reference()
}

fn csv_pair(param: &str, spec: &SweepSpec<f64>, jobs: usize) -> (Vec<u8>, Vec<u8>) {
    let records = sweep(spec, jobs).unwrap();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    write_sweep_extrema_csv(&mut a, param, &records).unwrap();
    write_sweep_summary_csv(&mut b, param, &records).unwrap();
    (a, b)
}

#[test]
fn single_point_sweep_is_the_direct_composition() {
    let spec = SweepSpec::new("c", vec![0.4], reference());
    let records = sweep(&spec, 2).unwrap();
    assert_eq!(records.len(), 1);
    let got = records[0].outcome.as_ref().unwrap();

    let p = reference().with_c(0.4);
    let o = SolverOptions::default();
    let traj = integrate_window(&p, &spec.initial, 3000.0, 2000.0, &o).unwrap();
    let extrema = attractor_extrema(&traj, 2000.0).unwrap();
    let lle = largest_lyapunov(&p, &spec.initial, 3000.0, &o).unwrap();
    assert_eq!(got.extrema, extrema);
    assert_eq!(got.lle, lle);
    assert_eq!(*got, analyze_point(&spec, 0.4).unwrap());
}

#[test]
fn output_bytes_do_not_depend_on_worker_count() {
    let grid = SweepSpec::uniform_grid(0.0, 1.0, 0.125).unwrap();
    let spec = SweepSpec::new("c", grid, reference());
    let one = csv_pair("c", &spec, 1);
    for jobs in [2, 4, 8] {
        assert_eq!(one, csv_pair("c", &spec, jobs), "jobs = {jobs}");
    }
}

#[test]
fn failed_points_are_recorded_in_line() {
    // a11 = 0 is rejected by parameter validation at that point only
    let spec = SweepSpec::new("a11", vec![0.0, 0.4], reference());
    let records = sweep(&spec, 2).unwrap();
    assert!(records[0].outcome.is_err());
    assert_eq!(records[1].verdict(), Some(Verdict::StablePoint));
    let mut out = Vec::new();
    write_sweep_summary_csv(&mut out, "a11", &records).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with(",nan,error"));
}

#[test]
fn converged_orbit_has_tight_extrema() {
    let p = reference();
    let traj = integrate_window(
        &p,
        &State::new(1.0, 1.0, 1.0),
        3000.0,
        2000.0,
        &SolverOptions::default(),
    )
    .unwrap();
    let e = attractor_extrema(&traj, 2000.0).unwrap();
    assert!(e.vars[0].spread() < 1e-4);
    assert!(e.vars.iter().all(|v| v.count() <= 1));
}

#[test]
fn exponent_at_stable_equilibrium_matches_linearization() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cases = [
        reference(),
        reference().with_c(0.85),
        reference().with("a13", 1.2).unwrap(),
        reference().with("a11", 0.8).unwrap(),
    ];
    for p in cases {
        let e4 = solve_coexistence(&p, None).unwrap().unwrap().point.unwrap();
        let lead = eigenvalues(&jacobian(&e4, &p).unwrap())
            .iter()
            .map(|r| r.re)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(lead < 0.0);
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let lo = LyapunovOptions {
            tangent: v,
            ..LyapunovOptions::default()
        };
        let lle = largest_lyapunov_with(&p, &e4, 1000.0, &SolverOptions::default(), &lo).unwrap();
        assert!((lle - lead).abs() < 0.02, "c={} lle {lle} vs {lead}", p.c);
    }
}

#[test]
fn exponent_at_stable_boundary_point_matches_linearization() {
    // E1 is a stable node once the predators cannot invade
    let mut p = reference();
    p.b2 = 15.0;
    p.b3 = 10.0;
    let e1 = boundary_equilibria(&p)
        .unwrap()
        .into_iter()
        .find(|e| e.kind == EquilibriumKind::E1)
        .and_then(|e| e.point)
        .unwrap();
    let lle = largest_lyapunov(&p, &e1, 1000.0, &SolverOptions::default()).unwrap();
    assert!((lle + 2.5).abs() < 0.02, "{lle}");
}

#[test]
fn stable_point_verdicts_agree_with_routh_hurwitz() {
    let grid = SweepSpec::uniform_grid(0.85, 1.0, 0.05).unwrap();
    let spec = SweepSpec::new("c", grid, reference());
    for rec in sweep(&spec, 4).unwrap() {
        let a = rec.outcome.as_ref().unwrap();
        assert_eq!(a.verdict, Verdict::StablePoint, "c = {}", rec.value);
        assert!(a.lle < -0.01);
        let p = reference().with_c(rec.value);
        let e4 = solve_coexistence(&p, None).unwrap().unwrap().point.unwrap();
        assert!(routh_hurwitz(&p, &e4).unwrap().hurwitz, "c = {}", rec.value);
    }
}

#[test]
fn chaotic_verdict_without_switching_implies_saddle_focus_certificate() {
    let p = reference().with_c(0.0);
    let e4 = solve_coexistence(&p, None).unwrap().unwrap().point.unwrap();
    let r = routh_hurwitz(&p, &e4).unwrap();
    let cert = silnikov_check(&cardano_roots(r.sigma1, r.sigma2, r.sigma3));
    let spec = SweepSpec::new("c", vec![0.0], reference());
    let verdict = analyze_point(&spec, 0.0).unwrap().verdict;
    if verdict == Verdict::Chaotic {
        assert!(cert.chaotic);
    }
    assert!(cert.chaotic);
}

#[test]
fn without_switching_the_attractor_is_a_limit_cycle() {
    // measured: the orbit settles on a single loop whose exponent is round-off
    // sized, so it falls under the periodic label
    let spec = SweepSpec::new("c", vec![0.0, 0.2], reference());
    for rec in sweep(&spec, 2).unwrap() {
        let a = rec.outcome.unwrap();
        assert_eq!(a.verdict, Verdict::Periodic, "c = {}", rec.value);
        assert!(a.lle.abs() < 0.01, "c = {} lle {}", rec.value, a.lle);
        // one distinct peak height per loop
        let peaks = &a.extrema.vars[0].maxima;
        let hi = peaks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = peaks.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(peaks.len() > 10);
        assert!(hi - lo < 1e-2, "c = {} peak spread {}", rec.value, hi - lo);
    }
}

#[test]
fn no_threshold_near_full_switching() {
    let spec = SweepSpec::new("c", vec![0.95, 1.0, 1.05], reference());
    for t in [Transition::ChaosLoss, Transition::StabilityOnset] {
        let (records, found) = locate_threshold(&spec, 0.01, t, 3).unwrap();
        assert!(records
            .iter()
            .all(|r| r.verdict() == Some(Verdict::StablePoint)));
        assert_eq!(found, None);
    }
}

#[test]
fn stability_onset_is_bracketed_in_switching_sweep() {
    let grid = SweepSpec::uniform_grid(0.6, 0.8, 0.05).unwrap();
    let spec = SweepSpec::new("c", grid, reference());
    let (_, found) = locate_threshold(&spec, 0.01, Transition::StabilityOnset, 4).unwrap();
    let iv = found.expect("onset inside the grid");
    assert!(iv.lo >= 0.6 && iv.hi <= 0.8);
    assert!(iv.hi - iv.lo < 0.05 / 1000.0);
    // the verdict switches only once the focus attracts fast enough to pass
    // the spread cut, so the bracket sits at or after the linear onset
    let lead = |c: f64| {
        let p = reference().with_c(c);
        let e4 = solve_coexistence(&p, None).unwrap().unwrap().point.unwrap();
        eigenvalues(&jacobian(&e4, &p).unwrap())
            .iter()
            .map(|r| r.re)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    assert!(lead(0.6) > 0.0);
    assert!(lead(iv.hi) < 0.0);
}

#[test]
fn top_predator_attack_sweep_loses_stability() {
    let grid = SweepSpec::uniform_grid(1.0, 2.5, 0.25).unwrap();
    let spec = SweepSpec::new("a13", grid, reference());
    let records = sweep(&spec, 4).unwrap();
    let verdicts: Vec<Verdict> = records.iter().map(|r| r.verdict().unwrap()).collect();
    assert_eq!(verdicts[2], Verdict::StablePoint); // a13 = 1.5
    assert_eq!(*verdicts.last().unwrap(), Verdict::Periodic);
    let first_loss = verdicts
        .iter()
        .position(|v| *v != Verdict::StablePoint)
        .unwrap();
    assert!(verdicts[first_loss..]
        .iter()
        .all(|v| *v != Verdict::StablePoint));
}
