//! Linear stability of stationary solutions.
//!
//! On a nonzero branch `a₂` and `b` rotate at `±δω` in the drive frame, so
//! the solution is a limit cycle there. Counter-rotating `a₂` and `b` by the
//! branch's `δω` turns it into a fixed point of an autonomous system with
//! effective detunings `(δω₁, Δ₂, Δ_b)`, whose Jacobian is analysed here.
//! The U(1) symmetry leaves one eigenvalue at exactly zero on nonzero
//! branches (the Goldstone mode); it is excluded from the verdict.

use nalgebra::{Matrix6, Schur, Vector6};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::steady_state::{max_residual, zero_branch, Branch, BranchPoint};

pub const GOLDSTONE_TOL: f64 = 1e-9;
pub const MARGIN_TOL: f64 = 1e-9;

/// Branches whose stationary residual exceeds this (times `max(1, Ω)`) are
/// rejected by [`jacobian`].
pub const RESIDUAL_LIMIT: f64 = 1e-8;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub branch: Branch,
    pub eigenvalues: Vec<Complex64>,
    pub goldstone_index: Option<usize>,
    /// Largest real part, Goldstone eigenvalue excluded.
    pub max_re_effective: f64,
    pub verdict: Verdict,
}

/// Real 2×2 block of `d(Re f, Im f)/d(Re z, Im z)` from the Wirtinger
/// derivatives `∂f/∂z` and `∂f/∂z*`.
fn real_block(dz: Complex64, dzc: Complex64) -> [[f64; 2]; 2] {
    let s = dz + dzc;
    let d = dz - dzc;
    [[s.re, -d.im], [s.im, d.re]]
}

/// Jacobian of the counter-rotated equations at `branch`, in real
/// coordinates `(Re a₁, Im a₁, Re a₂, Im a₂, Re b, Im b)`.
pub fn jacobian(params: &SystemParams, branch: &BranchPoint) -> Result<Matrix6<f64>> {
    let residual = max_residual(params, branch);
    let limit = RESIDUAL_LIMIT * params.omega_drive_amp.max(1.0);
    if !(residual <= limit) {
        return Err(Error::NotStationary { residual, limit });
    }
    Ok(jacobian_at(params, branch))
}

fn jacobian_at(params: &SystemParams, branch: &BranchPoint) -> Matrix6<f64> {
    let p = params;
    let i = Complex64::new(0.0, 1.0);
    let zero = Complex64::new(0.0, 0.0);
    let s = branch.state();
    let (a1, a2, b) = (s.a1, s.a2, s.b);
    let delta2 = p.delta_omega2 + branch.delta_omega;
    let delta_b = p.omega_b - branch.delta_omega;
    let ig = i * p.g;

    // [row][col] = (∂f_row/∂z_col, ∂f_row/∂z_col*)
    let wirtinger = [
        [
            (-Complex64::new(p.gamma1, p.delta_omega1), zero),
            (-ig * b, zero),
            (-ig * a2, zero),
        ],
        [
            (-ig * b.conj(), zero),
            (-Complex64::new(p.gamma2, delta2), zero),
            (zero, -ig * a1),
        ],
        [
            (-ig * a2.conj(), zero),
            (zero, -ig * a1),
            (-Complex64::new(p.gamma_b, delta_b), zero),
        ],
    ];

    let mut m = Matrix6::zeros();
    for (row, derivs) in wirtinger.iter().enumerate() {
        for (col, &(dz, dzc)) in derivs.iter().enumerate() {
            let blk = real_block(dz, dzc);
            for r in 0..2 {
                for c in 0..2 {
                    m[(2 * row + r, 2 * col + c)] = blk[r][c];
                }
            }
        }
    }
    m
}

/// All six eigenvalues of a real 6×6 matrix via the real Schur form.
pub fn eigenvalues6(matrix: &Matrix6<f64>) -> Result<Vec<Complex64>> {
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNonConvergence {
            matrix: format!("{matrix}"),
        });
    }
    let schur = Schur::try_new(*matrix, SCHUR_EPS, SCHUR_MAX_ITER).ok_or_else(|| {
        Error::EigenNonConvergence {
            matrix: format!("{matrix}"),
        }
    })?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Eigenvector for a (numerically exact) eigenvalue, by inverse iteration.
pub fn eigenvector(matrix: &Matrix6<f64>, lambda: Complex64) -> Option<Vector6<Complex64>> {
    let scale = matrix.abs().max().max(f64::MIN_POSITIVE);
    let shift = lambda + Complex64::new(scale * 1e-10, scale * 1e-10);
    let shifted =
        matrix.map(|v| Complex64::new(v, 0.0)) - nalgebra::Matrix6::<Complex64>::identity() * shift;
    let lu = shifted.lu();
    let mut v = Vector6::from_element(Complex64::new(1.0, 0.3));
    for _ in 0..3 {
        v = lu.solve(&v)?;
        let n = v.norm();
        if !n.is_finite() || n == 0.0 {
            return None;
        }
        v /= Complex64::new(n, 0.0);
    }
    Some(v)
}

/// Eigenvalues and stability verdict for a stationary solution.
pub fn assess(params: &SystemParams, branch: &BranchPoint) -> Result<StabilityReport> {
    let jac = jacobian(params, branch)?;
    let eigenvalues = eigenvalues6(&jac)?;

    let goldstone_index = if branch.branch == Branch::Zero {
        None
    } else {
        eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, l)| l.re.abs() < GOLDSTONE_TOL)
            .min_by(|(_, a), (_, b)| a.norm().total_cmp(&b.norm()))
            .map(|(k, _)| k)
    };
    let max_re_effective = eigenvalues
        .iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != goldstone_index)
        .map(|(_, l)| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let verdict = if max_re_effective < -MARGIN_TOL {
        Verdict::Stable
    } else if max_re_effective > MARGIN_TOL {
        Verdict::Unstable
    } else {
        Verdict::Marginal
    };
    Ok(StabilityReport {
        branch: branch.branch,
        eigenvalues,
        goldstone_index,
        max_re_effective,
        verdict,
    })
}

/// Largest real part of the zero-branch spectrum at the current drive.
pub fn zero_branch_growth_rate(params: &SystemParams) -> Result<f64> {
    let jac = jacobian_at(params, &zero_branch(params));
    Ok(eigenvalues6(&jac)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Drive at which the zero branch loses stability, by bisection on the
/// sign of [`zero_branch_growth_rate`] over `[omega_lo, omega_hi]`.
///
/// Bisection rather than Newton: the largest real part is continuous but
/// has kinks where eigenvalues cross.
pub fn numeric_threshold(params: &SystemParams, omega_lo: f64, omega_hi: f64) -> Result<f64> {
    const WIDTH: f64 = 1e-10;
    let rate = |omega: f64| zero_branch_growth_rate(&params.with_drive(omega));
    let (mut lo, mut hi) = (omega_lo, omega_hi);
    let f_lo = rate(lo)?;
    let f_hi = rate(hi)?;
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    while hi - lo >= WIDTH {
        let mid = 0.5 * (lo + hi);
        if rate(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
