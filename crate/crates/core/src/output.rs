//! CSV emission for trajectories and sweeps.
//!
//! Numbers are written in scientific notation with 17 significant digits, so
//! `f64` values round-trip exactly and output bytes are reproducible.

use std::io::{self, Write};

use crate::analysis::{SweepRecord, VARIABLE_NAMES};
use crate::integrate::Trajectory;
use crate::scalar::Scalar;

/// Formats a value with 17 significant digits.
pub fn num<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v.as_f64())
}

/// `t,x,y,z`, one row per sample.
pub fn write_trajectory_csv<T: Scalar, W: Write>(
    w: &mut W,
    traj: &Trajectory<T>,
) -> io::Result<()> {
    writeln!(w, "t,x,y,z")?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        writeln!(w, "{},{},{},{}", num(*t), num(s.x), num(s.y), num(s.z))?;
    }
    Ok(())
}

/// `param,value,variable,extremum_kind,extremum_value`, one row per extremum.
/// Failed grid points contribute no rows.
pub fn write_sweep_extrema_csv<T: Scalar, W: Write>(
    w: &mut W,
    param: &str,
    records: &[SweepRecord<T>],
) -> io::Result<()> {
    writeln!(w, "param,value,variable,extremum_kind,extremum_value")?;
    for rec in records {
        let Ok(a) = &rec.outcome else { continue };
        for (name, var) in VARIABLE_NAMES.iter().zip(&a.extrema.vars) {
            for (kind, values) in [("max", &var.maxima), ("min", &var.minima)] {
                for v in values {
                    writeln!(w, "{param},{},{name},{kind},{}", num(rec.value), num(*v))?;
                }
            }
        }
    }
    Ok(())
}

/// `param,value,lle,verdict`, one row per grid point. Failed points carry
/// `nan` and the verdict `error`.
pub fn write_sweep_summary_csv<T: Scalar, W: Write>(
    w: &mut W,
    param: &str,
    records: &[SweepRecord<T>],
) -> io::Result<()> {
    writeln!(w, "param,value,lle,verdict")?;
    for rec in records {
        match &rec.outcome {
            Ok(a) => writeln!(
                w,
                "{param},{},{},{}",
                num(rec.value),
                num(a.lle),
                a.verdict.label()
            )?,
            Err(_) => writeln!(w, "{param},{},nan,error", num(rec.value))?,
        }
    }
    Ok(())
}
