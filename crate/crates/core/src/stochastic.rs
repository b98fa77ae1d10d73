//! Langevin integration of the mean-field equations with additive noise.
//!
//! Each mode `x` with damping `γₓ` receives complex white noise with
//! `⟨ξₓ(t) ξₓ*(t′)⟩ = 2γₓnₓ δ(t − t′)`, so an uncoupled, undriven mode
//! relaxes to `⟨|x|²⟩ = nₓ`. The occupations `nₓ` are free parameters.
//!
//! Every realization draws from its own ChaCha stream, selected by
//! `(base_seed, stream index)`, so ensembles are reproducible regardless of
//! how the work is scheduled.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{TailStats, Trajectory};
use crate::error::{Error, Result};
use crate::model::{rhs, ModeState, SystemParams};
use crate::steady_state::zero_branch;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub n1: f64,
    pub n2: f64,
    pub nb: f64,
    pub dt: f64,
    pub t_end: f64,
    pub n_realizations: usize,
    pub base_seed: u64,
    /// Leading fraction of each run discarded before averaging.
    pub transient_fraction: f64,
    pub save_stride: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            n1: 1e-3,
            n2: 1e-3,
            nb: 1e-3,
            dt: 0.005,
            t_end: 2e4,
            n_realizations: 16,
            base_seed: 0,
            transient_fraction: 0.5,
            save_stride: 100,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| {
            Err(Error::InvalidParam {
                name,
                value,
                reason,
            })
        };
        for (name, v) in [("n1", self.n1), ("n2", self.n2), ("nb", self.nb)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(name, v, "occupation must be non-negative");
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", self.dt, "must be positive");
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return bad("t_end", self.t_end, "must be at least one step");
        }
        if self.n_realizations == 0 {
            return bad("n_realizations", 0.0, "must be at least 1");
        }
        if !(self.transient_fraction >= 0.0 && self.transient_fraction < 1.0) {
            return bad(
                "transient_fraction",
                self.transient_fraction,
                "must lie in [0, 1)",
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

    /// Noise configuration with all occupations set to `n`.
    pub fn with_occupation(mut self, n: f64) -> Self {
        self.n1 = n;
        self.n2 = n;
        self.nb = n;
        self
    }
}

/// Standard deviation of each quadrature of the per-step increment:
/// the complex increment is `√(2γn dt)·(ξ_re + iξ_im)/√2`.
fn quadrature_scales(params: &SystemParams, cfg: &NoiseConfig) -> [f64; 3] {
    [
        (params.gamma1 * cfg.n1 * cfg.dt).sqrt(),
        (params.gamma2 * cfg.n2 * cfg.dt).sqrt(),
        (params.gamma_b * cfg.nb * cfg.dt).sqrt(),
    ]
}

pub fn euler_step(params: &SystemParams, s: &ModeState, dt: f64) -> ModeState {
    *s + rhs(params, s) * dt
}

/// RNG for one realization.
pub fn stream_rng(base_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(stream);
    rng
}

struct Stepper {
    params: SystemParams,
    dt: f64,
    scales: [f64; 3],
    rng: ChaCha8Rng,
}

impl Stepper {
    fn new(params: &SystemParams, cfg: &NoiseConfig, stream: u64) -> Self {
        Self {
            params: *params,
            dt: cfg.dt,
            scales: quadrature_scales(params, cfg),
            rng: stream_rng(cfg.base_seed, stream),
        }
    }

    fn kick(&mut self, scale: f64) -> Complex64 {
        let re: f64 = StandardNormal.sample(&mut self.rng);
        let im: f64 = StandardNormal.sample(&mut self.rng);
        Complex64::new(re, im) * scale
    }

    fn step(&mut self, s: &ModeState) -> ModeState {
        let det = euler_step(&self.params, s, self.dt);
        let [s1, s2, sb] = self.scales;
        ModeState::new(
            det.a1 + self.kick(s1),
            det.a2 + self.kick(s2),
            det.b + self.kick(sb),
        )
    }
}

/// Euler–Maruyama trajectory of one realization (`stream` selects the RNG stream).
pub fn integrate_sde(
    params: &SystemParams,
    init: ModeState,
    cfg: &NoiseConfig,
    stream: u64,
) -> Result<Trajectory> {
    cfg.validate()?;
    let n = cfg.n_steps();
    let mut stepper = Stepper::new(params, cfg, stream);
    let mut traj = Trajectory::default();
    let mut s = init;
    traj.times.push(0.0);
    traj.states.push(s);
    for k in 1..=n {
        s = stepper.step(&s);
        let t = k as f64 * cfg.dt;
        if !s.is_finite() {
            return Err(Error::Divergence { t });
        }
        if k % cfg.save_stride == 0 || k == n {
            traj.times.push(t);
            traj.states.push(s);
        }
    }
    Ok(traj)
}

/// Time-averaged intensities `[I1, I2, Ib]` of one realization after the
/// transient.
pub fn time_average(
    params: &SystemParams,
    init: ModeState,
    cfg: &NoiseConfig,
    stream: u64,
) -> Result<[f64; 3]> {
    cfg.validate()?;
    let n = cfg.n_steps();
    let skip = ((cfg.transient_fraction * n as f64).round() as usize).min(n - 1);
    let mut stepper = Stepper::new(params, cfg, stream);
    let mut stats = TailStats::new(usize::MAX, skip as f64 * cfg.dt);
    let mut s = init;
    for k in 1..=n {
        s = stepper.step(&s);
        if k > skip {
            stats.push(k as f64 * cfg.dt, &s);
        }
        if (k % 1024 == 0 || k == n) && !s.is_finite() {
            return Err(Error::Divergence {
                t: k as f64 * cfg.dt,
            });
        }
    }
    Ok(stats.means())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleRow {
    pub omega: f64,
    pub mean_i1: f64,
    pub mean_i2: f64,
    pub mean_ib: f64,
    pub stderr_i2: f64,
    pub n_realizations: usize,
    /// Realizations that diverged and were left out of the averages.
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleCurve {
    pub rows: Vec<EnsembleRow>,
}

impl EnsembleCurve {
    pub fn omegas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.omega).collect()
    }

    pub fn mean_i2(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean_i2).collect()
    }
}

/// Stream index of realization `r` at drive point `k`.
pub fn stream_index(point: usize, realization: usize) -> u64 {
    ((point as u64) << 32) | realization as u64
}

/// Ensemble-averaged laser curve. Every run starts on the zero branch; the
/// noise itself seeds the instability.
pub fn ensemble_curve(
    params: &SystemParams,
    omega_points: &[f64],
    cfg: &NoiseConfig,
) -> Result<EnsembleCurve> {
    params.validate()?;
    cfg.validate()?;
    if omega_points.len() < 2 {
        return Err(Error::Range(format!(
            "need at least 2 drive points, got {}",
            omega_points.len()
        )));
    }
    let jobs: Vec<(usize, usize)> = (0..omega_points.len())
        .flat_map(|k| (0..cfg.n_realizations).map(move |r| (k, r)))
        .collect();
    let results: Vec<Option<[f64; 3]>> = jobs
        .par_iter()
        .map(|&(k, r)| {
            let p = params.with_drive(omega_points[k]);
            time_average(&p, zero_branch(&p).state(), cfg, stream_index(k, r)).ok()
        })
        .collect();

    let rows = omega_points
        .iter()
        .enumerate()
        .map(|(k, &omega)| {
            let chunk = &results[k * cfg.n_realizations..(k + 1) * cfg.n_realizations];
            let ok: Vec<[f64; 3]> = chunk.iter().flatten().copied().collect();
            let n = ok.len();
            let mean = |i: usize| {
                if n == 0 {
                    f64::NAN
                } else {
                    ok.iter().map(|v| v[i]).sum::<f64>() / n as f64
                }
            };
            let mean_i2 = mean(1);
            let stderr_i2 = if n > 1 {
                let var = ok.iter().map(|v| (v[1] - mean_i2).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            EnsembleRow {
                omega,
                mean_i1: mean(0),
                mean_i2,
                mean_ib: mean(2),
                stderr_i2,
                n_realizations: n,
                failed: cfg.n_realizations - n,
            }
        })
        .collect();
    Ok(EnsembleCurve { rows })
}
