use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use igp_core::analysis::{
    largest_lyapunov_with, sweep as run_sweep, threshold_from_records, LyapunovOptions, Transition,
    Verdict,
};
use igp_core::equilibria::{
    boundary_stability, classified_boundary_equilibria, classified_coexistence, eigenvalues,
    Equilibrium, EquilibriumKind, RouthHurwitzReport,
};
use igp_core::integrate::integrate;
use igp_core::model::jacobian;
use igp_core::output::{
    num, write_sweep_extrema_csv, write_sweep_summary_csv, write_trajectory_csv,
};
use igp_core::spectral::{cardano_roots, silnikov_check, RootStructure};
use num_complex::Complex64;

use crate::config::RunConfig;
use crate::CliError;

/// Output directory.
pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_owned(),
        })
    }

    pub fn write(&self, name: &str, text: &str) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), text)?;
        Ok(())
    }

    fn csv(
        &self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        body(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Writes `text` to `name` and echoes it.
    fn report(&self, name: &str, text: &str) -> Result<(), CliError> {
        print!("{text}");
        self.write(name, text)
    }
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.6}", z.re)
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{:.6} {sign} {:.6}i", z.re, z.im.abs())
    }
}

fn spectrum(ev: &[Complex64; 3]) -> String {
    ev.iter()
        .map(|z| fmt_complex(*z))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn simulate(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let traj = integrate(&cfg.params, &cfg.initial, cfg.t_end, &cfg.solver)?;
    out.csv("trajectory.csv", |w| write_trajectory_csv(w, &traj))?;
    if let Some((t, s)) = traj.last() {
        println!(
            "{} samples; t = {t}: x = {:.6}, y = {:.6}, z = {:.6}",
            traj.len(),
            s.x,
            s.y,
            s.z
        );
    }
    Ok(())
}

fn status(e: &Equilibrium<f64>) -> &'static str {
    match (e.point, e.feasible, e.degenerate) {
        (None, _, _) => "undefined",
        (_, false, _) => "infeasible",
        (_, true, true) => "degenerate",
        (_, true, false) => "feasible",
    }
}

fn coordinates(e: &Equilibrium<f64>) -> [String; 3] {
    match e.point {
        Some(s) => s.to_array().map(num),
        None => [(); 3].map(|_| String::new()),
    }
}

pub fn equilibria(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let p = &cfg.params;
    let boundary = classified_boundary_equilibria(p)?;
    let coexistence = classified_coexistence(p, None)?;

    let mut text = String::new();
    for e in &boundary {
        let _ = write!(text, "{}  {}", e.kind.label(), status(e));
        if let Some(s) = e.point {
            let _ = write!(text, "  ({:.6}, {:.6}, {:.6})", s.x, s.y, s.z);
        }
        let _ = writeln!(text, "  {}", e.stability.label());
        if e.feasible && e.kind != EquilibriumKind::E0 {
            let b = boundary_stability(p, e)?;
            for i in &b.inequalities {
                let _ = writeln!(
                    text,
                    "    {}: {:.6} vs {:.6} ({})",
                    i.text,
                    i.lhs,
                    i.rhs,
                    if i.holds { "holds" } else { "fails" }
                );
            }
            let _ = writeln!(text, "    eigenvalues: {}", spectrum(&b.eigenvalues));
        }
    }
    match &coexistence {
        Some((e, r)) => {
            let s = e.point.expect("coexistence point");
            let _ = writeln!(
                text,
                "E4  {}  ({:.6}, {:.6}, {:.6})  {}",
                status(e),
                s.x,
                s.y,
                s.z,
                e.stability.label()
            );
            routh_hurwitz_text(&mut text, r);
            let ev = eigenvalues(&jacobian(&s, p)?);
            let _ = writeln!(text, "    eigenvalues: {}", spectrum(&ev));
        }
        None => {
            let _ = writeln!(text, "E4  not found");
        }
    }

    out.csv("equilibria.csv", |w| {
        writeln!(
            w,
            "kind,status,x,y,z,stability,sigma1,sigma2,sigma3,hurwitz"
        )?;
        for e in &boundary {
            let [x, y, z] = coordinates(e);
            writeln!(
                w,
                "{},{},{x},{y},{z},{},,,,",
                e.kind.label(),
                status(e),
                e.stability.label()
            )?;
        }
        match &coexistence {
            Some((e, r)) => {
                let [x, y, z] = coordinates(e);
                writeln!(
                    w,
                    "E4,{},{x},{y},{z},{},{},{},{},{}",
                    status(e),
                    e.stability.label(),
                    num(r.sigma1),
                    num(r.sigma2),
                    num(r.sigma3),
                    r.hurwitz
                )
            }
            None => writeln!(w, "E4,not-found,,,,,,,,"),
        }
    })?;
    out.report("equilibria.txt", &text)
}

fn routh_hurwitz_text(text: &mut String, r: &RouthHurwitzReport<f64>) {
    let v: Vec<String> = r.v.iter().map(|x| format!("{x:.6}")).collect();
    let _ = writeln!(text, "    V1..V8: {}", v.join(", "));
    let _ = writeln!(
        text,
        "    sigma1 = {:.6}, sigma2 = {:.6}, sigma3 = {:.6}, sigma1*sigma2 - sigma3 = {:.6}",
        r.sigma1,
        r.sigma2,
        r.sigma3,
        r.margin()
    );
    let _ = writeln!(
        text,
        "    Routh-Hurwitz {}",
        if r.hurwitz { "satisfied" } else { "violated" }
    );
}

pub fn silnikov(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let p = &cfg.params;
    let Some((e, r)) = classified_coexistence(p, None)? else {
        return out.report("silnikov.txt", "no coexistence equilibrium\n");
    };
    let s = e.point.expect("coexistence point");
    let a = cardano_roots(r.sigma1, r.sigma2, r.sigma3);
    let v = silnikov_check(&a);

    let mut text = String::new();
    let _ = writeln!(text, "E4 = ({:.6}, {:.6}, {:.6})", s.x, s.y, s.z);
    routh_hurwitz_text(&mut text, &r);
    let _ = writeln!(
        text,
        "A1 = {:.6}, A2 = {:.6}, A3 = {:.6}, H = {:.6}, G = {:.6}",
        a.a1, a.a2, a.a3, a.h, a.g
    );
    let _ = writeln!(text, "roots: {}", spectrum(&a.roots));
    match v.expression {
        Some(x) => {
            let flag = |b: bool| if b { "ok" } else { "fails" };
            let _ = writeln!(text, "Delta = {:.6} ({})", x.delta, flag(x.delta_positive));
            let _ = writeln!(
                text,
                "R + H/R = {:.6} ({})",
                x.r_plus_h_over_r,
                flag(x.r_plus_h_over_r_nonzero)
            );
            let _ = writeln!(
                text,
                "magnitude gap = {:.6} ({})",
                x.magnitude_gap,
                flag(x.magnitude_gap_positive)
            );
            let _ = writeln!(
                text,
                "sign branch R - H/R + 2 A1 = {:.6} against A3 = {:.6} ({})",
                x.sign_branch,
                x.a3,
                flag(x.sign_branch_holds)
            );
        }
        None => {
            let structure = match a.structure {
                RootStructure::OneRealPair => "one real root and a complex pair",
                RootStructure::Repeated => "a repeated real root",
                RootStructure::ThreeReal => "three real roots",
            };
            let _ = writeln!(text, "Delta = {:.6}: {structure}, no saddle focus", a.delta);
        }
    }
    let _ = writeln!(
        text,
        "gamma = {:.6}, alpha = {:.6}, beta = {:.6}",
        v.gamma, v.alpha, v.beta
    );
    let verdict = if v.chaotic {
        "chaotic (saddle-focus conditions hold)"
    } else if v.marginal {
        "not chaotic (marginal: a condition sits at its boundary)"
    } else {
        "not chaotic"
    };
    let _ = writeln!(text, "verdict: {verdict}");
    out.report("silnikov.txt", &text)
}

pub fn sweep(cfg: &RunConfig, out: &Output, jobs: usize) -> Result<(), CliError> {
    let spec = cfg.sweep_spec().map_err(CliError::Usage)?;
    let param = spec.parameter.clone();
    let records = run_sweep(&spec, jobs)?;
    out.csv("sweep_extrema.csv", |w| {
        write_sweep_extrema_csv(w, &param, &records)
    })?;
    out.csv("sweep_summary.csv", |w| {
        write_sweep_summary_csv(w, &param, &records)
    })?;

    let count = |v: Option<Verdict>| records.iter().filter(|r| r.verdict() == v).count();
    let mut text = format!(
        "parameter {param}: {} points, {} stable-point, {} periodic, {} chaotic, {} failed\n",
        records.len(),
        count(Some(Verdict::StablePoint)),
        count(Some(Verdict::Periodic)),
        count(Some(Verdict::Chaotic)),
        count(None)
    );
    for t in [Transition::ChaosLoss, Transition::StabilityOnset] {
        let line = match threshold_from_records(&spec, &records, t)? {
            Some(iv) => format!(
                "[{}, {}] after {} bisections",
                num(iv.lo),
                num(iv.hi),
                iv.iterations
            ),
            None => "no threshold in range".to_owned(),
        };
        let _ = writeln!(text, "{}: {line}", t.label());
    }
    out.report("threshold.txt", &text)
}

pub fn lyapunov(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let l = &cfg.lyapunov;
    let lo = LyapunovOptions {
        renorm_interval: l.renorm_interval,
        discard_fraction: l.discard_fraction,
        ..LyapunovOptions::default()
    };
    let lle = largest_lyapunov_with(&cfg.params, &cfg.initial, l.total_time, &cfg.solver, &lo)?;
    let cut = cfg.sweep.lle_threshold;
    let reading = if lle > cut {
        "above the chaos threshold"
    } else if lle < -cut {
        "below minus the threshold (contracting)"
    } else {
        "within the threshold band"
    };
    out.report(
        "lyapunov.txt",
        &format!("lle = {}\n{reading} ({cut})\n", num(lle)),
    )
}
