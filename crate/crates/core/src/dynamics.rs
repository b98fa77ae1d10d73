//! Deterministic time integration and extraction of stationary observables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rhs, ModeState, SystemParams};
use crate::steady_state::zero_branch;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    /// Fixed RK4 step, units `1/ω₀`.
    pub dt: f64,
    pub t_end: f64,
    /// Initial `|b|` added to the zero branch to leave the invariant manifold.
    pub seed_amplitude: f64,
    /// Fraction of the run used for averaging.
    pub tail_fraction: f64,
    /// Relative drift between the two halves of the tail below which the
    /// run counts as stationary.
    pub stationarity_tol: f64,
    /// Store every `save_stride`-th step in a [`Trajectory`].
    pub save_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_end: 2e4,
            seed_amplitude: 1e-6,
            tail_fraction: 0.25,
            stationarity_tol: 1e-6,
            save_stride: 100,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| {
            Err(Error::InvalidParam {
                name,
                value,
                reason,
            })
        };
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", self.dt, "must be positive");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end", self.t_end, "must be positive");
        }
        if self.t_end < self.dt {
            return bad("t_end", self.t_end, "must be at least one step");
        }
        if !(self.seed_amplitude >= 0.0 && self.seed_amplitude.is_finite()) {
            return bad(
                "seed_amplitude",
                self.seed_amplitude,
                "must be non-negative",
            );
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction < 1.0) {
            return bad("tail_fraction", self.tail_fraction, "must lie in (0, 1)");
        }
        if !(self.stationarity_tol > 0.0) {
            return bad(
                "stationarity_tol",
                self.stationarity_tol,
                "must be positive",
            );
        }
        if self.save_stride == 0 {
            return bad("save_stride", 0.0, "must be at least 1");
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }

    /// Zero-branch amplitudes with `b` kicked to `seed_amplitude`.
    pub fn seeded_start(&self, params: &SystemParams) -> ModeState {
        let mut s = zero_branch(params).state();
        s.b.re += self.seed_amplitude;
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ModeState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, ModeState)> {
        Some((*self.times.last()?, *self.states.last()?))
    }
}

/// Time-averaged intensities over the tail of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyObservables {
    pub i1: f64,
    pub i2: f64,
    pub ib: f64,
    /// `−d arg(b)/dt` from a least-squares line over the tail.
    pub delta_omega_est: f64,
    pub converged: bool,
    /// State at the end of the run, for continuation.
    pub final_state: ModeState,
}

pub fn rk4_step(params: &SystemParams, s: &ModeState, dt: f64) -> ModeState {
    let k1 = rhs(params, s);
    let k2 = rhs(params, &(*s + k1 * (0.5 * dt)));
    let k3 = rhs(params, &(*s + k2 * (0.5 * dt)));
    let k4 = rhs(params, &(*s + k3 * dt));
    *s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Fixed-step RK4 trajectory, sampled every `save_stride` steps and at the end.
pub fn integrate(
    params: &SystemParams,
    init: ModeState,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    let n = config.n_steps();
    let mut traj = Trajectory::default();
    let mut s = init;
    traj.times.push(0.0);
    traj.states.push(s);
    for k in 1..=n {
        s = rk4_step(params, &s, config.dt);
        let t = k as f64 * config.dt;
        if !s.is_finite() {
            return Err(Error::Divergence { t });
        }
        if k % config.save_stride == 0 || k == n {
            traj.times.push(t);
            traj.states.push(s);
        }
    }
    Ok(traj)
}

/// Online accumulator for tail averages and the phase slope of `b`.
#[derive(Debug, Clone)]
pub(crate) struct TailStats {
    split: usize,
    count: [usize; 2],
    sums: [[f64; 3]; 2],
    last_phase: Option<f64>,
    unwrapped: f64,
    n: f64,
    st: f64,
    stt: f64,
    sp: f64,
    stp: f64,
    t0: f64,
}

impl TailStats {
    /// `split` is the number of samples in the first half of the tail.
    pub(crate) fn new(split: usize, t0: f64) -> Self {
        Self {
            split,
            count: [0; 2],
            sums: [[0.0; 3]; 2],
            last_phase: None,
            unwrapped: 0.0,
            n: 0.0,
            st: 0.0,
            stt: 0.0,
            sp: 0.0,
            stp: 0.0,
            t0,
        }
    }

    pub(crate) fn push(&mut self, t: f64, s: &ModeState) {
        let half = usize::from(self.count[0] >= self.split);
        self.count[half] += 1;
        for (acc, v) in self.sums[half].iter_mut().zip(s.intensities()) {
            *acc += v;
        }

        let phase = s.b.arg();
        if let Some(prev) = self.last_phase {
            let mut d = phase - prev;
            d -= std::f64::consts::TAU * (d / std::f64::consts::TAU).round();
            self.unwrapped += d;
        } else {
            self.unwrapped = phase;
        }
        self.last_phase = Some(phase);
        let x = t - self.t0;
        self.n += 1.0;
        self.st += x;
        self.stt += x * x;
        self.sp += self.unwrapped;
        self.stp += x * self.unwrapped;
    }

    pub(crate) fn means(&self) -> [f64; 3] {
        let total = (self.count[0] + self.count[1]).max(1) as f64;
        std::array::from_fn(|i| (self.sums[0][i] + self.sums[1][i]) / total)
    }

    /// Largest relative change of an intensity between the two tail halves.
    pub(crate) fn drift(&self) -> f64 {
        let c0 = self.count[0].max(1) as f64;
        let c1 = self.count[1].max(1) as f64;
        (0..3)
            .map(|i| {
                let m0 = self.sums[0][i] / c0;
                let m1 = self.sums[1][i] / c1;
                (m0 - m1).abs() / (0.5 * (m0 + m1)).max(1e-12)
            })
            .fold(0.0, f64::max)
    }

    pub(crate) fn phase_slope(&self) -> f64 {
        let denom = self.n * self.stt - self.st * self.st;
        if self.n < 2.0 || denom == 0.0 {
            return 0.0;
        }
        (self.n * self.stp - self.st * self.sp) / denom
    }
}

/// Integrates for `t_end` and averages intensities over the tail window.
///
/// Failure to become stationary is reported through `converged`, not as an
/// error; only divergence is an error.
pub fn settle(
    params: &SystemParams,
    init: ModeState,
    config: &IntegratorConfig,
) -> Result<SteadyObservables> {
    config.validate()?;
    let n = config.n_steps();
    let tail_len = ((config.tail_fraction * n as f64).round() as usize).clamp(2, n);
    let tail_start = n - tail_len;
    let mut stats = TailStats::new(tail_len / 2, tail_start as f64 * config.dt);
    let mut s = init;
    for k in 1..=n {
        s = rk4_step(params, &s, config.dt);
        if k > tail_start {
            let t = k as f64 * config.dt;
            if !s.is_finite() {
                return Err(Error::Divergence { t });
            }
            stats.push(t, &s);
        } else if k % 1024 == 0 && !s.is_finite() {
            return Err(Error::Divergence {
                t: k as f64 * config.dt,
            });
        }
    }
    let [i1, i2, ib] = stats.means();
    Ok(SteadyObservables {
        i1,
        i2,
        ib,
        delta_omega_est: -stats.phase_slope(),
        converged: stats.drift() < config.stationarity_tol,
        final_state: s,
    })
}
