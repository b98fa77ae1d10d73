//! CSV emission.
//!
//! Every file starts with one comment line `# schema=<id> version=<v>`
//! followed by a header row. Floats use the shortest representation that
//! round-trips, in scientific notation, so identical inputs give identical
//! bytes.

use std::io::Write;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::steady_state::{AnalyticCurve, Branch};
use crate::stochastic::EnsembleCurve;
use crate::sweep::{LaserCurve, Map2D};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CURVE_SCHEMA: &str = "laser_curve";
pub const ANALYTIC_SCHEMA: &str = "laser_curve_analytic";
pub const NOISY_SCHEMA: &str = "laser_curve_noisy";
pub const MAP_SCHEMA: &str = "map2d";
pub const TRAJECTORY_SCHEMA: &str = "trajectory";

pub const CURVE_COLUMNS: [&str; 8] = [
    "omega",
    "I1",
    "I2",
    "Ib",
    "delta_omega_est",
    "converged",
    "branch_class",
    "error",
];
pub const ANALYTIC_COLUMNS: [&str; 5] = ["omega", "I2", "I2_plus", "I2_minus", "zero_stable"];
pub const NOISY_COLUMNS: [&str; 7] = [
    "omega",
    "mean_I1",
    "mean_I2",
    "mean_Ib",
    "stderr_I2",
    "n_realizations",
    "failed",
];
pub const MAP_COLUMNS: [&str; 6] = ["delta_omega1", "omega", "I2", "class", "converged", "error"];
pub const TRAJECTORY_COLUMNS: [&str; 10] = [
    "t", "a1_re", "a1_im", "a2_re", "a2_im", "b_re", "b_im", "I1", "I2", "Ib",
];

/// Shortest round-trip float in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn branch_name(b: Option<Branch>) -> &'static str {
    match b {
        Some(Branch::Zero) => "zero",
        Some(Branch::Plus) => "plus",
        Some(Branch::Minus) => "minus",
        None => "none",
    }
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Output(e.to_string())
}

fn write_table<W: Write, const N: usize>(
    mut out: W,
    schema: &str,
    columns: [&str; N],
    rows: impl IntoIterator<Item = [String; N]>,
) -> Result<()> {
    writeln!(out, "# schema={schema} version={VERSION}").map_err(io)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_curve<W: Write>(out: W, curve: &LaserCurve) -> Result<()> {
    write_table(
        out,
        CURVE_SCHEMA,
        CURVE_COLUMNS,
        curve.points.iter().map(|p| {
            [
                num(p.omega),
                num(p.i1),
                num(p.i2),
                num(p.ib),
                num(p.delta_omega_est),
                p.converged.to_string(),
                branch_name(p.branch_class).to_string(),
                p.error.clone().unwrap_or_default(),
            ]
        }),
    )
}

pub fn write_analytic<W: Write>(out: W, curve: &AnalyticCurve) -> Result<()> {
    let stable = curve.stable_intensity();
    write_table(
        out,
        ANALYTIC_SCHEMA,
        ANALYTIC_COLUMNS,
        curve.rows.iter().zip(stable).map(|(r, s)| {
            [
                num(r.omega),
                num(s),
                opt(r.plus),
                opt(r.minus),
                r.zero_stable.to_string(),
            ]
        }),
    )
}

pub fn write_noisy<W: Write>(out: W, curve: &EnsembleCurve) -> Result<()> {
    write_table(
        out,
        NOISY_SCHEMA,
        NOISY_COLUMNS,
        curve.rows.iter().map(|r| {
            [
                num(r.omega),
                num(r.mean_i1),
                num(r.mean_i2),
                num(r.mean_ib),
                num(r.stderr_i2),
                r.n_realizations.to_string(),
                r.failed.to_string(),
            ]
        }),
    )
}

/// One row per cell, `δω₁` outer and `Ω` inner.
pub fn write_map<W: Write>(out: W, map: &Map2D) -> Result<()> {
    let rows = map.delta_omega1.iter().enumerate().flat_map(|(i, &d1)| {
        map.omega.iter().enumerate().map(move |(j, &omega)| {
            [
                num(d1),
                num(omega),
                num(map.i2[i][j]),
                map.class[i].to_string(),
                map.converged[i][j].to_string(),
                map.errors[i][j].clone().unwrap_or_default(),
            ]
        })
    });
    write_table(out, MAP_SCHEMA, MAP_COLUMNS, rows)
}

pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    write_table(
        out,
        TRAJECTORY_SCHEMA,
        TRAJECTORY_COLUMNS,
        traj.times.iter().zip(&traj.states).map(|(&t, s)| {
            let [i1, i2, ib] = s.intensities();
            [
                num(t),
                num(s.a1.re),
                num(s.a1.im),
                num(s.a2.re),
                num(s.a2.im),
                num(s.b.re),
                num(s.b.im),
                num(i1),
                num(i2),
                num(ib),
            ]
        }),
    )
}
