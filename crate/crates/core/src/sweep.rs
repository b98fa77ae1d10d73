//! Drive sweeps: dynamic laser curves, the `Ω × δω₁` intensity map and
//! forward/backward hysteresis scans.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{settle, IntegratorConfig, SteadyObservables};
use crate::error::{Error, Result};
use crate::model::{ModeState, SystemParams};
use crate::steady_state::{
    excitation_class, linspace, nonzero_branch, omega_ex, omega_th, Branch, ExcitationClass, Sign,
};

/// A grid point closer than this to `Ω_th` shifts the whole grid by half a step.
pub const THRESHOLD_COLLISION: f64 = 1e-12;
/// Number of budget doublings tried before a point is marked unconverged.
pub const MAX_DOUBLINGS: u32 = 2;
/// Settled `|a₂|²` below this counts as the zero branch.
pub const ZERO_INTENSITY: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Every point starts from the seeded zero branch.
    Fresh,
    /// Increasing drive, each point starting from the previous end state.
    ContinueForward,
    /// Decreasing drive, each point starting from the previous end state.
    ContinueBackward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub steps: usize,
    #[serde(default = "default_mode")]
    pub mode: SweepMode,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

fn default_mode() -> SweepMode {
    SweepMode::Fresh
}

impl SweepSpec {
    pub fn new(omega_min: f64, omega_max: f64, steps: usize, mode: SweepMode) -> Self {
        Self {
            omega_min,
            omega_max,
            steps,
            mode,
            integrator: IntegratorConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_range("omega", self.omega_min, self.omega_max, self.steps)?;
        self.integrator.validate()?;
        if self.mode == SweepMode::Fresh && !(self.integrator.seed_amplitude > 0.0) {
            return Err(Error::InvalidParam {
                name: "seed_amplitude",
                value: self.integrator.seed_amplitude,
                reason: "fresh sweeps need a positive seed",
            });
        }
        Ok(())
    }

    /// Drive grid, shifted by half a step if a point would sit on `Ω_th`.
    pub fn grid(&self, params: &SystemParams) -> Vec<f64> {
        let grid = linspace(self.omega_min, self.omega_max, self.steps);
        let th = omega_th(params);
        if grid.iter().any(|o| (o - th).abs() < THRESHOLD_COLLISION) {
            let half = 0.5 * (self.omega_max - self.omega_min) / (self.steps - 1) as f64;
            grid.into_iter().map(|o| o + half).collect()
        } else {
            grid
        }
    }
}

fn validate_range(what: &str, lo: f64, hi: f64, steps: usize) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Range(format!("{what} range [{lo}, {hi}] is empty")));
    }
    if steps < 2 {
        return Err(Error::Range(format!(
            "{what} needs at least 2 steps, got {steps}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub omega: f64,
    pub i1: f64,
    pub i2: f64,
    pub ib: f64,
    pub delta_omega_est: f64,
    pub converged: bool,
    /// Stationary branch the settled intensity lies on, if any.
    pub branch_class: Option<Branch>,
    /// Integration time multiplier that was needed (1, 2 or 4).
    pub budget: u32,
    pub error: Option<String>,
}

/// Settled observables along a drive sweep, in scan order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaserCurve {
    pub mode: SweepMode,
    pub points: Vec<CurvePoint>,
}

impl LaserCurve {
    pub fn omegas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.omega).collect()
    }

    pub fn i2(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.i2).collect()
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }

    /// Largest change of `|a₂|²` between neighbouring drive values.
    pub fn largest_step(&self) -> Option<Jump> {
        largest_step(&self.omegas(), &self.i2())
    }
}

/// Which analytic branch a settled intensity corresponds to, within 5 %.
pub fn classify_intensity(params: &SystemParams, i2: f64) -> Option<Branch> {
    if i2 < ZERO_INTENSITY {
        return Some(Branch::Zero);
    }
    [Sign::Plus, Sign::Minus].into_iter().find_map(|sign| {
        let bp = nonzero_branch(params, sign)?;
        ((i2 - bp.intensity_a2).abs() <= 0.05 * bp.intensity_a2).then_some(bp.branch)
    })
}

/// [`settle`], extending the run by doubling the total time (up to 4×) while
/// the tail is not stationary.
pub fn settle_with_retries(
    params: &SystemParams,
    init: ModeState,
    config: &IntegratorConfig,
) -> Result<(SteadyObservables, u32)> {
    let mut obs = settle(params, init, config)?;
    let mut budget = 1;
    for _ in 0..MAX_DOUBLINGS {
        if obs.converged {
            break;
        }
        let extension = IntegratorConfig {
            t_end: config.t_end * budget as f64,
            ..*config
        };
        obs = settle(params, obs.final_state, &extension)?;
        budget *= 2;
    }
    Ok((obs, budget))
}

fn run_point(
    params: &SystemParams,
    omega: f64,
    init: ModeState,
    config: &IntegratorConfig,
) -> (CurvePoint, Option<ModeState>) {
    let p = params.with_drive(omega);
    match settle_with_retries(&p, init, config) {
        Ok((obs, budget)) => (
            CurvePoint {
                omega,
                i1: obs.i1,
                i2: obs.i2,
                ib: obs.ib,
                delta_omega_est: obs.delta_omega_est,
                converged: obs.converged,
                branch_class: classify_intensity(&p, obs.i2),
                budget,
                error: None,
            },
            Some(obs.final_state),
        ),
        Err(e) => (
            CurvePoint {
                omega,
                i1: f64::NAN,
                i2: f64::NAN,
                ib: f64::NAN,
                delta_omega_est: f64::NAN,
                converged: false,
                branch_class: None,
                budget: 1 << MAX_DOUBLINGS,
                error: Some(e.to_string()),
            },
            None,
        ),
    }
}

/// Dynamic laser curve. A diverging point is recorded with an error marker
/// and the sweep carries on (continuation restarts from the seeded zero
/// branch after a failure).
pub fn laser_curve_dynamic(params: &SystemParams, spec: &SweepSpec) -> Result<LaserCurve> {
    params.validate()?;
    spec.validate()?;
    let cfg = spec.integrator;
    let grid = spec.grid(params);
    let points = match spec.mode {
        SweepMode::Fresh => grid
            .par_iter()
            .map(|&omega| {
                run_point(
                    params,
                    omega,
                    cfg.seeded_start(&params.with_drive(omega)),
                    &cfg,
                )
                .0
            })
            .collect(),
        SweepMode::ContinueForward | SweepMode::ContinueBackward => {
            let order: Vec<f64> = if spec.mode == SweepMode::ContinueForward {
                grid
            } else {
                grid.into_iter().rev().collect()
            };
            let mut points = Vec::with_capacity(order.len());
            let mut carried: Option<ModeState> = None;
            for omega in order {
                let p = params.with_drive(omega);
                let init = match carried {
                    Some(mut s) => {
                        // keep a minimal kick so the zero manifold is never exact
                        if s.b.norm() < cfg.seed_amplitude {
                            s.b.re += cfg.seed_amplitude;
                        }
                        s
                    }
                    None => cfg.seeded_start(&p),
                };
                let (point, end) = run_point(params, omega, init, &cfg);
                carried = end;
                points.push(point);
            }
            points
        }
    };
    Ok(LaserCurve {
        mode: spec.mode,
        points,
    })
}

/// Location and size of the largest change between neighbouring samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jump {
    pub omega_below: f64,
    pub omega_above: f64,
    /// `I2(omega_above) − I2(omega_below)`.
    pub delta_i2: f64,
}

/// Largest `|ΔI2|` between drive-adjacent samples; input order is irrelevant.
pub fn largest_step(omegas: &[f64], values: &[f64]) -> Option<Jump> {
    let mut pairs: Vec<(f64, f64)> = omegas.iter().copied().zip(values.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
        .windows(2)
        .filter(|w| w[0].1.is_finite() && w[1].1.is_finite())
        .map(|w| Jump {
            omega_below: w[0].0,
            omega_above: w[1].0,
            delta_i2: w[1].1 - w[0].1,
        })
        .max_by(|a, b| a.delta_i2.abs().total_cmp(&b.delta_i2.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Map2DSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_steps: usize,
    pub delta_omega1_min: f64,
    pub delta_omega1_max: f64,
    pub delta_omega1_steps: usize,
    /// Each row uses `δω₂ = δω₁ + offset`.
    #[serde(default = "default_offset")]
    pub offset: f64,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

fn default_offset() -> f64 {
    2e-3
}

impl Map2DSpec {
    pub fn validate(&self) -> Result<()> {
        validate_range("omega", self.omega_min, self.omega_max, self.omega_steps)?;
        validate_range(
            "delta_omega1",
            self.delta_omega1_min,
            self.delta_omega1_max,
            self.delta_omega1_steps,
        )?;
        self.integrator.validate()?;
        if !(self.integrator.seed_amplitude > 0.0) {
            return Err(Error::InvalidParam {
                name: "seed_amplitude",
                value: self.integrator.seed_amplitude,
                reason: "map cells start fresh and need a positive seed",
            });
        }
        Ok(())
    }

    pub fn delta_omega1_values(&self) -> Vec<f64> {
        linspace(
            self.delta_omega1_min,
            self.delta_omega1_max,
            self.delta_omega1_steps,
        )
    }

    pub fn omega_values(&self) -> Vec<f64> {
        linspace(self.omega_min, self.omega_max, self.omega_steps)
    }

    /// Parameters of one map row.
    pub fn row_params(&self, base: &SystemParams, delta_omega1: f64) -> SystemParams {
        SystemParams {
            delta_omega1,
            delta_omega2: delta_omega1 + self.offset,
            ..*base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Map2D {
    pub delta_omega1: Vec<f64>,
    pub omega: Vec<f64>,
    /// `i2[row][col]` for `delta_omega1[row]`, `omega[col]`.
    pub i2: Vec<Vec<f64>>,
    pub converged: Vec<Vec<bool>>,
    pub errors: Vec<Vec<Option<String>>>,
    pub class: Vec<ExcitationClass>,
}

impl Map2D {
    pub fn failures(&self) -> usize {
        self.errors.iter().flatten().filter(|e| e.is_some()).count()
    }
}

/// Excitation class of each map row; no dynamics involved.
pub fn class_grid(base: &SystemParams, spec: &Map2DSpec) -> Vec<ExcitationClass> {
    spec.delta_omega1_values()
        .into_iter()
        .map(|d1| excitation_class(&spec.row_params(base, d1)))
        .collect()
}

/// Settled `|a₂|²` over the `δω₁ × Ω` grid, every cell started fresh.
pub fn map2d(base: &SystemParams, spec: &Map2DSpec) -> Result<Map2D> {
    base.validate()?;
    spec.validate()?;
    let rows = spec.delta_omega1_values();
    let cols = spec.omega_values();
    let cfg = spec.integrator;
    let cells: Vec<CurvePoint> = rows
        .par_iter()
        .flat_map_iter(|&d1| {
            let p = spec.row_params(base, d1);
            cols.iter()
                .map(move |&omega| {
                    run_point(&p, omega, cfg.seeded_start(&p.with_drive(omega)), &cfg).0
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let n = cols.len();
    let pick = |f: &dyn Fn(&CurvePoint) -> f64| -> Vec<Vec<f64>> {
        cells.chunks(n).map(|r| r.iter().map(f).collect()).collect()
    };
    Ok(Map2D {
        i2: pick(&|c| c.i2),
        converged: cells
            .chunks(n)
            .map(|r| r.iter().map(|c| c.converged).collect())
            .collect(),
        errors: cells
            .chunks(n)
            .map(|r| r.iter().map(|c| c.error.clone()).collect())
            .collect(),
        class: class_grid(base, spec),
        delta_omega1: rows,
        omega: cols,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HysteresisReport {
    pub forward: LaserCurve,
    pub backward: LaserCurve,
    pub forward_jump: Option<Jump>,
    pub backward_jump: Option<Jump>,
    pub omega_th: f64,
    pub omega_ex: f64,
}

/// Forward and backward continuation sweeps over the same grid.
pub fn hysteresis_scan(params: &SystemParams, spec: &SweepSpec) -> Result<HysteresisReport> {
    let forward = laser_curve_dynamic(
        params,
        &SweepSpec {
            mode: SweepMode::ContinueForward,
            ..*spec
        },
    )?;
    let backward = laser_curve_dynamic(
        params,
        &SweepSpec {
            mode: SweepMode::ContinueBackward,
            ..*spec
        },
    )?;
    Ok(HysteresisReport {
        forward_jump: forward.largest_step(),
        backward_jump: backward.largest_step(),
        forward,
        backward,
        omega_th: omega_th(params),
        omega_ex: omega_ex(params),
    })
}
