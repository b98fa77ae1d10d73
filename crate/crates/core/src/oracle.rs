//! Independent numerical solution of the stationary equations.
//!
//! The three complex stationary equations are solved directly for
//! `(Re a₁, Im a₁, Re a₂, Im a₂, b, δω)` with `b` real (gauge fixing), by
//! damped Newton iteration from many random starts. Nothing here uses the
//! closed-form branch formulas, so agreement between the two is a check on
//! both.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::model::SystemParams;
use crate::steady_state::{all_branches, Branch, BranchPoint};

type Vec6 = SVector<f64, 6>;
type Mat6 = SMatrix<f64, 6, 6>;

const FD_STEP: f64 = 1e-7;
const MAX_ITERATIONS: usize = 200;
const MAX_HALVINGS: usize = 40;
/// Accepted roots satisfy `residual < ACCEPT · max(1, Ω)`.
pub const ACCEPT: f64 = 1e-10;
/// Roots closer than this in gauge-invariant coordinates are one root.
pub const DEDUP_DISTANCE: f64 = 1e-6;
/// Below this `|a₂|` and `b` a root is of zero type, with `δω` undetermined.
pub const ZERO_TYPE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSolution {
    pub a1: Complex64,
    pub a2: Complex64,
    pub b_real: f64,
    pub delta_omega: f64,
    pub residual_norm: f64,
    pub newton_iterations: usize,
}

impl OracleSolution {
    pub fn is_zero_type(&self) -> bool {
        self.a2.norm() < ZERO_TYPE && self.b_real < ZERO_TYPE
    }

    /// `(|a₁|, |a₂|, b, δω, φ)`; `δω` and `φ` are pinned to 0 on zero-type
    /// roots, where they are undetermined.
    pub fn invariants(&self) -> [f64; 5] {
        if self.is_zero_type() {
            [self.a1.norm(), self.a2.norm(), self.b_real, 0.0, 0.0]
        } else {
            [
                self.a1.norm(),
                self.a2.norm(),
                self.b_real,
                self.delta_omega,
                self.a2.arg(),
            ]
        }
    }
}

/// Gauge-invariant coordinates of an analytic branch, comparable with
/// [`OracleSolution::invariants`].
pub fn branch_invariants(bp: &BranchPoint) -> [f64; 5] {
    [bp.a1st.norm(), bp.a2_mod, bp.b_mod, bp.delta_omega, bp.phi]
}

fn wrapped(d: f64) -> f64 {
    d - std::f64::consts::TAU * (d / std::f64::consts::TAU).round()
}

/// Largest coordinate difference; the phase is compared modulo 2π and
/// ignored when either amplitude is too small to define it.
pub fn invariant_distance(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    let mut d: f64 = 0.0;
    for k in 0..4 {
        d = d.max((a[k] - b[k]).abs());
    }
    if a[1] >= ZERO_TYPE && b[1] >= ZERO_TYPE {
        d = d.max(wrapped(a[4] - b[4]).abs());
    }
    d
}

fn residual(params: &SystemParams, x: &Vec6) -> Vec6 {
    let i = Complex64::new(0.0, 1.0);
    let p = params;
    let a1 = Complex64::new(x[0], x[1]);
    let a2 = Complex64::new(x[2], x[3]);
    let b = Complex64::new(x[4], 0.0);
    let delta_omega = x[5];
    let e5 = -(i * p.delta_omega1 + p.gamma1) * a1 - i * p.g * a2 * b - i * p.omega_drive_amp;
    let e6 = -(i * (p.delta_omega2 + delta_omega) + p.gamma2) * a2 - i * p.g * a1 * b.conj();
    let e7 = -(i * (p.omega_b - delta_omega) + p.gamma_b) * b - i * p.g * a1 * a2.conj();
    Vec6::new(e5.re, e5.im, e6.re, e6.im, e7.re, e7.im)
}

fn numerical_jacobian(params: &SystemParams, x: &Vec6) -> Mat6 {
    let mut jac = Mat6::zeros();
    for c in 0..6 {
        let mut xp = *x;
        let mut xm = *x;
        xp[c] += FD_STEP;
        xm[c] -= FD_STEP;
        let col = (residual(params, &xp) - residual(params, &xm)) / (2.0 * FD_STEP);
        jac.set_column(c, &col);
    }
    jac
}

/// Damped Newton from `x0`. Returns the final point, residual and iteration count.
fn newton(params: &SystemParams, x0: Vec6) -> (Vec6, f64, usize) {
    let mut x = x0;
    let mut f = residual(params, &x);
    let mut norm = f.norm();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && norm > 1e-16 {
        iterations += 1;
        let jac = numerical_jacobian(params, &x);
        let svd = jac.svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max();
        let Ok(step) = svd.solve(&(-f), cutoff) else {
            break;
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial = x + step * lambda;
            let ft = residual(params, &trial);
            let nt = ft.norm();
            if nt.is_finite() && nt < norm {
                x = trial;
                f = ft;
                norm = nt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (x, norm, iterations)
}

fn to_solution(x: Vec6, residual_norm: f64, newton_iterations: usize) -> OracleSolution {
    let mut a2 = Complex64::new(x[2], x[3]);
    let mut b = x[4];
    if b < 0.0 {
        // half-turn of the U(1) symmetry keeps a₂b fixed
        a2 = -a2;
        b = -b;
    }
    OracleSolution {
        a1: Complex64::new(x[0], x[1]),
        a2,
        b_real: b,
        delta_omega: x[5],
        residual_norm,
        newton_iterations,
    }
}

/// Distinct stationary solutions found from `n_starts` random starting points.
///
/// Starts draw amplitude components uniformly from `[−2, 2]` and `δω` from
/// `[−ω_b, 2ω_b]`. The result is sorted by `|a₂|`.
pub fn solve_stationary(params: &SystemParams, n_starts: usize, seed: u64) -> Vec<OracleSolution> {
    let accept = ACCEPT * params.omega_drive_amp.max(1.0);
    let span = if params.omega_b > 0.0 {
        params.omega_b
    } else {
        1e-3
    };
    let found: Vec<OracleSolution> = (0..n_starts)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let x0 = Vec6::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-span..2.0 * span),
            );
            let (x, norm, iters) = newton(params, x0);
            (norm < accept).then(|| to_solution(x, norm, iters))
        })
        .collect();

    let mut distinct: Vec<OracleSolution> = Vec::new();
    for sol in found {
        let inv = sol.invariants();
        match distinct
            .iter_mut()
            .find(|d| invariant_distance(&d.invariants(), &inv) < DEDUP_DISTANCE)
        {
            Some(existing) => {
                if sol.residual_norm < existing.residual_norm {
                    *existing = sol;
                }
            }
            None => distinct.push(sol),
        }
    }
    distinct.sort_by(|a, b| {
        a.a2.norm()
            .total_cmp(&b.a2.norm())
            .then(a.a1.norm().total_cmp(&b.a1.norm()))
    });
    distinct
}

/// Result of matching oracle roots against the closed-form branches.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    /// Branch matched by each root, `None` if no branch is within tolerance.
    pub root_branches: Vec<Option<Branch>>,
    /// Analytic branches for which no root was found.
    pub missing: Vec<Branch>,
    /// Largest invariant distance over matched pairs.
    pub max_deviation: f64,
}

impl Comparison {
    pub fn classes(&self) -> usize {
        self.root_branches.len()
    }

    pub fn all_matched(&self, tol: f64) -> bool {
        self.missing.is_empty()
            && self.root_branches.iter().all(Option::is_some)
            && self.max_deviation < tol
    }
}

/// Pairs every root with the nearest existing analytic branch.
pub fn compare_with_analytic(
    params: &SystemParams,
    roots: &[OracleSolution],
    tol: f64,
) -> Comparison {
    let branches = all_branches(params);
    let mut max_deviation: f64 = 0.0;
    let mut hit = vec![false; branches.len()];
    let root_branches = roots
        .iter()
        .map(|r| {
            let inv = r.invariants();
            let (k, d) = branches
                .iter()
                .enumerate()
                .map(|(k, bp)| (k, invariant_distance(&inv, &branch_invariants(bp))))
                .min_by(|a, b| a.1.total_cmp(&b.1))?;
            if d < tol {
                hit[k] = true;
                max_deviation = max_deviation.max(d);
                Some(branches[k].branch)
            } else {
                None
            }
        })
        .collect();
    let missing = branches
        .iter()
        .zip(&hit)
        .filter(|(_, h)| !**h)
        .map(|(bp, _)| bp.branch)
        .collect();
    Comparison {
        root_branches,
        missing,
        max_deviation,
    }
}
