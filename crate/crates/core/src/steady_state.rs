//! Closed-form stationary solutions, thresholds and the soft/hard
//! classification.
//!
//! A stationary solution has constant intensities while `a₂` and `b` rotate
//! at `±δω` in the drive frame: `a₂ = a₂ₛₜ e^{iδωt}`, `b = bₛₜ e^{−iδωt}`.
//! Only the product `a₂ₛₜ bₛₜ` is fixed by the equations; the remaining U(1)
//! freedom is removed by choosing `bₛₜ` real and non-negative.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModeState, SystemParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Absolute tolerance (units `ω₀²`) for the equality case of the
/// hard-excitation inequality.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Zero,
    Plus,
    Minus,
}

/// Sign choice in front of the square root of the nonzero-branch intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExcitationClass {
    Soft,
    Hard,
    Boundary,
}

impl std::fmt::Display for ExcitationClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExcitationClass::Soft => "soft",
            ExcitationClass::Hard => "hard",
            ExcitationClass::Boundary => "boundary",
        })
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Zero => "zero",
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        })
    }
}

/// One stationary solution in the gauge `Im bₛₜ = 0`, `bₛₜ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoint {
    pub branch: Branch,
    pub a1st: Complex64,
    pub a2_mod: f64,
    pub b_mod: f64,
    /// Phase of `a₂ₛₜ bₛₜ` relative to the drive, in `(−π, π]`.
    pub phi: f64,
    /// Generated phonon frequency; 0 by convention on the zero branch.
    pub delta_omega: f64,
    pub delta2: f64,
    pub delta_b: f64,
    pub intensity_a2: f64,
}

impl BranchPoint {
    pub fn a2st(&self) -> Complex64 {
        Complex64::from_polar(self.a2_mod, self.phi)
    }

    pub fn b_st(&self) -> Complex64 {
        Complex64::new(self.b_mod, 0.0)
    }

    /// Stationary amplitudes at `t = 0`.
    pub fn state(&self) -> ModeState {
        ModeState::new(self.a1st, self.a2st(), self.b_st())
    }

    /// The minus branch is reported for completeness but is never a
    /// physical operating point.
    pub fn expected_unstable(&self) -> bool {
        self.branch == Branch::Minus
    }
}

/// Forced oscillation of mode 1 alone: `a₂ = b = 0`.
pub fn zero_branch(params: &SystemParams) -> BranchPoint {
    let a1st = -I * params.omega_drive_amp / Complex64::new(params.gamma1, params.delta_omega1);
    BranchPoint {
        branch: Branch::Zero,
        a1st,
        a2_mod: 0.0,
        b_mod: 0.0,
        phi: 0.0,
        delta_omega: 0.0,
        delta2: params.delta_omega2,
        delta_b: params.omega_b,
        intensity_a2: 0.0,
    }
}

/// Effective mode-2 detuning `Δ₂ = (δω₂ + ω_b) γ₂ / (γ₂ + γ_b)` selected by
/// any nonzero solution.
pub fn delta2_locked(params: &SystemParams) -> f64 {
    (params.delta_omega2 + params.omega_b) * params.gamma2 / (params.gamma2 + params.gamma_b)
}

/// Generated phonon frequency `δω = Δ₂ − δω₂` on the nonzero branches.
pub fn delta_omega_locked(params: &SystemParams) -> f64 {
    delta2_locked(params) - params.delta_omega2
}

fn amplitude_ratio(params: &SystemParams) -> f64 {
    (params.gamma_b / params.gamma2).sqrt()
}

/// `δω₁γ₂ + γ₁Δ₂`, numerator of the phase condition.
fn phase_numerator(params: &SystemParams) -> f64 {
    params.delta_omega1 * params.gamma2 + params.gamma1 * delta2_locked(params)
}

/// `δω₁Δ₂ − γ₁γ₂`, sign of the constant term of the nonzero-branch intensity.
fn amplitude_numerator(params: &SystemParams) -> f64 {
    params.delta_omega1 * delta2_locked(params) - params.gamma1 * params.gamma2
}

/// Existence threshold `Ω_ex`: below it the phase condition `|sin φ| ≤ 1`
/// cannot be met and no nonzero solution exists.
pub fn omega_ex(params: &SystemParams) -> f64 {
    phase_numerator(params).abs() * amplitude_ratio(params) / params.g
}

/// Generation threshold `Ω_th`, where the zero branch loses stability.
pub fn omega_th(params: &SystemParams) -> f64 {
    amplitude_ratio(params) * phase_numerator(params).hypot(amplitude_numerator(params)) / params.g
}

/// `sin φ` implied by the phase condition at drive `Ω`.
pub fn sin_phi(params: &SystemParams) -> f64 {
    phase_numerator(params) * amplitude_ratio(params) / (params.g * params.omega_drive_amp)
}

/// Nonzero stationary solution with the given sign, if it exists.
///
/// Returns `None` when `Ω < Ω_ex` (phase condition violated), when the
/// intensity formula is negative, or for an undriven system.
pub fn nonzero_branch(params: &SystemParams, sign: Sign) -> Option<BranchPoint> {
    let omega = params.omega_drive_amp;
    if omega <= 0.0 || params.g <= 0.0 {
        return None;
    }
    let g = params.g;
    let ratio = amplitude_ratio(params);
    let ratio_sq = params.gamma_b / params.gamma2;
    let ex = omega_ex(params);
    if omega < ex {
        return None;
    }
    let root = (omega * omega - ex * ex).max(0.0).sqrt();
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    let root_term = s * ratio * root / g;
    let const_term = ratio_sq * amplitude_numerator(params) / (g * g);
    let mut intensity = root_term + const_term;
    if intensity < 0.0 {
        // At Ω_th on a soft branch the two terms cancel; absorb round-off.
        // `Ω² − Ω_ex²` loses precision like Ω²/root² near the class boundary.
        let scale = root_term.abs().max(const_term.abs());
        let cond = (omega * omega / (root * root)).min(1e8);
        if intensity < -(1e-12 + 16.0 * f64::EPSILON * cond) * scale {
            return None;
        }
        intensity = 0.0;
    }

    let omega_sin = phase_numerator(params) * ratio / g;
    let omega_cos = amplitude_numerator(params) * ratio / g - g * intensity / ratio;
    let phi = omega_sin.atan2(omega_cos);

    let delta2 = delta2_locked(params);
    let delta_omega = delta2 - params.delta_omega2;
    let a2_mod = intensity.sqrt();
    let b_mod = a2_mod / ratio;
    // a₂ₛₜ / bₛₜ* = (|a₂|/|b|) e^{iφ}; the modulus ratio is fixed even at |b| = 0.
    let a2_over_bconj = Complex64::from_polar(ratio, phi);
    let a1st = -Complex64::new(params.gamma2, delta2) / (I * g) * a2_over_bconj;

    Some(BranchPoint {
        branch: match sign {
            Sign::Plus => Branch::Plus,
            Sign::Minus => Branch::Minus,
        },
        a1st,
        a2_mod,
        b_mod,
        phi,
        delta_omega,
        delta2,
        delta_b: params.omega_b - delta_omega,
        intensity_a2: a2_mod * a2_mod,
    })
}

/// All stationary solutions that exist at the current drive.
pub fn all_branches(params: &SystemParams) -> Vec<BranchPoint> {
    let mut out = vec![zero_branch(params)];
    out.extend(nonzero_branch(params, Sign::Plus));
    out.extend(nonzero_branch(params, Sign::Minus));
    out
}

/// Jump `J` of the plus-branch intensity at `Ω_th`:
/// `J = 2γ_b (δω₁(δω₂ + ω_b)/(γ₂ + γ_b) − γ₁) / g²`.
///
/// Positive only for hard excitation.
pub fn jump_magnitude(params: &SystemParams) -> f64 {
    let p = params;
    2.0 * p.gamma_b
        * (p.delta_omega1 * (p.delta_omega2 + p.omega_b) / (p.gamma2 + p.gamma_b) - p.gamma1)
        / (p.g * p.g)
}

/// Hard iff `δω₁(δω₂ + ω_b) > γ₁(γ₂ + γ_b)`, with equality resolved to
/// [`ExcitationClass::Boundary`] within [`BOUNDARY_TOL`].
pub fn excitation_class(params: &SystemParams) -> ExcitationClass {
    let p = params;
    let margin = p.delta_omega1 * (p.delta_omega2 + p.omega_b) - p.gamma1 * (p.gamma2 + p.gamma_b);
    if margin.abs() <= BOUNDARY_TOL {
        ExcitationClass::Boundary
    } else if margin > 0.0 {
        ExcitationClass::Hard
    } else {
        ExcitationClass::Soft
    }
}

/// Limit of [`jump_magnitude`] as `γ₁, γ₂ → 0`.
pub fn max_jump(params: &SystemParams) -> f64 {
    2.0 * params.delta_omega1 * (params.delta_omega2 + params.omega_b) / (params.g * params.g)
}

/// [`max_jump`] under the resonance `ω₁ = ω₂ + ω_b`, i.e. `δω₁ = δω₂ + ω_b`.
pub fn max_jump_resonant(delta_omega1: f64, g: f64) -> f64 {
    2.0 * delta_omega1 * delta_omega1 / (g * g)
}

/// Residuals of the three complex stationary equations for `bp`, using the
/// branch's own `δω`.
pub fn stationary_residuals(params: &SystemParams, bp: &BranchPoint) -> [Complex64; 3] {
    let (a1, a2, b) = (bp.a1st, bp.a2st(), bp.b_st());
    let p = params;
    let delta2 = p.delta_omega2 + bp.delta_omega;
    let delta_b = p.omega_b - bp.delta_omega;
    [
        -Complex64::new(p.gamma1, p.delta_omega1) * a1 - I * p.g * a2 * b - I * p.omega_drive_amp,
        -Complex64::new(p.gamma2, delta2) * a2 - I * p.g * a1 * b.conj(),
        -Complex64::new(p.gamma_b, delta_b) * b - I * p.g * a1 * a2.conj(),
    ]
}

/// Largest modulus over [`stationary_residuals`].
pub fn max_residual(params: &SystemParams, bp: &BranchPoint) -> f64 {
    stationary_residuals(params, bp)
        .iter()
        .map(|r| r.norm())
        .fold(0.0, f64::max)
}

/// `n` evenly spaced values on `[lo, hi]`, both ends included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| lo + step * k as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticRow {
    pub omega: f64,
    /// The zero branch is linearly stable below `Ω_th`.
    pub zero_stable: bool,
    pub plus: Option<f64>,
    pub minus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticCurve {
    pub omega_ex: f64,
    pub omega_th: f64,
    pub class: ExcitationClass,
    pub rows: Vec<AnalyticRow>,
}

impl AnalyticCurve {
    /// Intensity of the stable solution at each drive: zero below `Ω_th`,
    /// the plus branch above.
    pub fn stable_intensity(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| {
                if r.zero_stable {
                    0.0
                } else {
                    r.plus.unwrap_or(0.0)
                }
            })
            .collect()
    }
}

/// Branch intensities `|a₂|²` over an evenly spaced drive range.
pub fn laser_curve_analytic(
    params: &SystemParams,
    omega_min: f64,
    omega_max: f64,
    n_points: usize,
) -> Result<AnalyticCurve> {
    params.validate()?;
    if !(omega_min >= 0.0 && omega_min < omega_max && omega_max.is_finite()) {
        return Err(Error::Range(format!(
            "need 0 <= omega_min < omega_max, got [{omega_min}, {omega_max}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::Range(format!(
            "need at least 2 points, got {n_points}"
        )));
    }
    let th = omega_th(params);
    let rows = linspace(omega_min, omega_max, n_points)
        .into_iter()
        .map(|omega| {
            let p = params.with_drive(omega);
            AnalyticRow {
                omega,
                zero_stable: omega < th,
                plus: nonzero_branch(&p, Sign::Plus).map(|b| b.intensity_a2),
                minus: nonzero_branch(&p, Sign::Minus).map(|b| b.intensity_a2),
            }
        })
        .collect();
    Ok(AnalyticCurve {
        omega_ex: omega_ex(params),
        omega_th: th,
        class: excitation_class(params),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn zero_branch_values() {
        let mut p = SystemParams::fig1c().with_drive(5e-3);
        p.delta_omega1 = 0.0;
        let z = zero_branch(&p);
        assert_abs_diff_eq!(z.a1st.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z.a1st.im, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(z.a1st.norm_sqr(), 0.25, epsilon = 1e-15);

        assert_eq!(zero_branch(&SystemParams::fig1c()).a1st.norm(), 0.0);

        let z = zero_branch(&SystemParams::fig1c().with_drive(5e-3));
        assert_relative_eq!(z.a1st.norm_sqr(), 2.5e-5 / 1.16e-4, max_relative = 1e-13);
        assert_relative_eq!(z.a1st.norm_sqr(), 0.21551724137931, max_relative = 1e-12);
    }

    #[test]
    fn locked_detuning() {
        let p = SystemParams::fig1c();
        assert_relative_eq!(delta2_locked(&p), 5e-3, max_relative = 1e-14);
        assert_abs_diff_eq!(delta_omega_locked(&p), 0.0, epsilon = 1e-17);

        let mut p = SystemParams::fig1c();
        p.delta_omega2 = 6e-3;
        assert_relative_eq!(delta2_locked(&p), 5.5e-3, max_relative = 1e-14);
        assert_relative_eq!(delta_omega_locked(&p), -5e-4, max_relative = 1e-12);

        let mut p = SystemParams::fig1c();
        p.gamma_b = 1e-12;
        assert_relative_eq!(delta2_locked(&p), 1e-2, max_relative = 1e-8);
    }

    #[test]
    fn thresholds_of_figure_sets() {
        assert_relative_eq!(
            omega_ex(&SystemParams::fig1c()),
            5.4e-3,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            omega_ex(&SystemParams::fig1a()),
            4.6e-3,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            omega_ex(&SystemParams::fig1b()),
            5.2e-3,
            max_relative = 1e-12
        );

        let th = 100.0 * 3.016e-9f64.sqrt();
        assert_relative_eq!(omega_th(&SystemParams::fig1c()), th, max_relative = 1e-12);
        assert_relative_eq!(omega_th(&SystemParams::fig1a()), th, max_relative = 1e-12);
        assert_relative_eq!(
            omega_th(&SystemParams::fig1c()),
            5.4918e-3,
            max_relative = 1e-5
        );
        assert_relative_eq!(
            omega_th(&SystemParams::fig1b()),
            5.2e-3,
            max_relative = 1e-12
        );
    }

    #[test]
    fn vanishing_phase_numerator() {
        // δω₁γ₂ = −γ₁Δ₂ with Δ₂ = 5·10⁻³: δω₁ = −5·10⁻².
        let mut p = SystemParams::fig1c();
        p.delta_omega1 = -5e-2;
        assert_abs_diff_eq!(omega_ex(&p), 0.0, epsilon = 1e-15);
        // γ₁γ₂ = δω₁Δ₂ makes the two thresholds coincide.
        let mut p = SystemParams::fig1c();
        p.delta_omega1 = p.gamma1 * p.gamma2 / delta2_locked(&p);
        assert_relative_eq!(omega_th(&p), omega_ex(&p), max_relative = 1e-12);
    }

    #[test]
    fn plus_branch_fig1c() {
        let p = SystemParams::fig1c().with_drive(6e-3);
        let bp = nonzero_branch(&p, Sign::Plus).unwrap();
        let expected = 100.0 * (3.6e-5f64 - 2.916e-5).sqrt() + 0.1;
        assert_relative_eq!(bp.intensity_a2, expected, max_relative = 1e-12);
        assert_relative_eq!(bp.intensity_a2, 0.36153, max_relative = 1e-4);
        assert_eq!(bp.branch, Branch::Plus);
        assert!(max_residual(&p, &bp) < 1e-12);
        // Minus: 0.1 − 0.2615 < 0, absent.
        assert!(nonzero_branch(&p, Sign::Minus).is_none());
    }

    #[test]
    fn below_existence_threshold_is_absent() {
        let p = SystemParams::fig1c().with_drive(5e-3);
        assert!(nonzero_branch(&p, Sign::Plus).is_none());
        assert!(nonzero_branch(&p, Sign::Minus).is_none());
        assert!(nonzero_branch(&SystemParams::fig1c(), Sign::Plus).is_none());
    }

    #[test]
    fn plus_branch_at_threshold_is_jump() {
        let p = SystemParams::fig1c();
        let bp = nonzero_branch(&p.with_drive(omega_th(&p)), Sign::Plus).unwrap();
        assert_relative_eq!(bp.intensity_a2, 0.2, max_relative = 1e-10);
        assert_relative_eq!(jump_magnitude(&p), 0.2, max_relative = 1e-12);
    }

    #[test]
    fn jump_magnitude_cases() {
        assert_abs_diff_eq!(jump_magnitude(&SystemParams::fig1b()), 0.0, epsilon = 1e-12);
        let mut p = SystemParams::fig1c();
        p.delta_omega1 = 0.0;
        assert_relative_eq!(
            jump_magnitude(&p),
            -2.0 * p.gamma_b * p.gamma1 / (p.g * p.g),
            max_relative = 1e-14
        );
    }

    #[test]
    fn classification_of_figure_sets() {
        assert_eq!(
            excitation_class(&SystemParams::fig1c()),
            ExcitationClass::Hard
        );
        assert_eq!(
            excitation_class(&SystemParams::fig1a()),
            ExcitationClass::Soft
        );
        assert_eq!(
            excitation_class(&SystemParams::fig1b()),
            ExcitationClass::Boundary
        );
    }

    #[test]
    fn max_jump_values() {
        assert_relative_eq!(max_jump(&SystemParams::fig1c()), 0.8, max_relative = 1e-12);
        assert_relative_eq!(max_jump_resonant(1e-2, 1e-2), 2.0, max_relative = 1e-14);
        let mut p = SystemParams::fig1c();
        p.delta_omega1 = 1e-2;
        assert_relative_eq!(
            max_jump(&p),
            max_jump_resonant(1e-2, 1e-2),
            max_relative = 1e-14
        );
        p.delta_omega1 = 0.0;
        assert_eq!(max_jump(&p), 0.0);
        // The γ₁,γ₂ → 0 limit of the jump.
        let mut p = SystemParams::fig1c();
        p.gamma1 = 1e-12;
        p.gamma2 = 1e-12;
        assert_relative_eq!(jump_magnitude(&p), max_jump(&p), max_relative = 1e-6);
    }

    #[test]
    fn analytic_curve_hard_onset() {
        let p = SystemParams::fig1c();
        let ex = omega_ex(&p);
        let curve = laser_curve_analytic(&p, ex, 1e-2, 11).unwrap();
        let first = &curve.rows[0];
        assert_relative_eq!(first.plus.unwrap(), 0.1, max_relative = 1e-9);
        assert_relative_eq!(first.minus.unwrap(), 0.1, max_relative = 1e-9);
        assert!(first.zero_stable);
        assert!(!curve.rows[10].zero_stable);
    }

    #[test]
    fn analytic_curve_soft_onset() {
        let p = SystemParams::fig1a();
        let th = omega_th(&p);
        let curve = laser_curve_analytic(&p, th, 1e-2, 3).unwrap();
        assert_abs_diff_eq!(curve.rows[0].plus.unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(curve.class, ExcitationClass::Soft);
    }

    #[test]
    fn analytic_curve_below_existence() {
        let p = SystemParams::fig1c();
        let curve = laser_curve_analytic(&p, 0.0, 5e-3, 20).unwrap();
        assert!(curve
            .rows
            .iter()
            .all(|r| r.plus.is_none() && r.minus.is_none() && r.zero_stable));
        assert!(curve.stable_intensity().iter().all(|&i| i == 0.0));
    }

    #[test]
    fn analytic_curve_rejects_bad_range() {
        let p = SystemParams::fig1c();
        assert!(matches!(
            laser_curve_analytic(&p, 5e-3, 4e-3, 10),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            laser_curve_analytic(&p, -1.0, 4e-3, 10),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            laser_curve_analytic(&p, 0.0, 4e-3, 1),
            Err(Error::Range(_))
        ));
    }

    fn params() -> impl Strategy<Value = SystemParams> {
        (
            -1e-2..1e-2f64,
            -1e-2..1e-2f64,
            0.0..1e-2f64,
            1e-4..1e-2f64,
            1e-4..1e-2f64,
            1e-4..1e-2f64,
            3e-3..3e-2f64,
        )
            .prop_map(|(d1, d2, wb, g1, g2, gb, g)| SystemParams {
                delta_omega1: d1,
                delta_omega2: d2,
                omega_b: wb,
                gamma1: g1,
                gamma2: g2,
                gamma_b: gb,
                g,
                omega_drive_amp: 0.0,
            })
    }

    proptest! {
        #[test]
        fn threshold_ordering(p in params()) {
            prop_assert!(omega_th(&p) >= omega_ex(&p));
        }

        #[test]
        fn plus_branch_increases(p in params(), a in 1.0001..3.0f64, b in 1.0001..3.0f64) {
            let ex = omega_ex(&p).max(1e-6);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            let i_lo = nonzero_branch(&p.with_drive(lo * ex), Sign::Plus).map(|b| b.intensity_a2);
            let i_hi = nonzero_branch(&p.with_drive(hi * ex), Sign::Plus).map(|b| b.intensity_a2);
            if let (Some(l), Some(h)) = (i_lo, i_hi) {
                prop_assert!(h > l);
            } else {
                // once the plus branch exists it persists
                prop_assert!(i_lo.is_none());
            }
        }

        #[test]
        fn plus_at_threshold_matches_class(p in params()) {
            let th = omega_th(&p);
            let bp = nonzero_branch(&p.with_drive(th), Sign::Plus).unwrap();
            match excitation_class(&p) {
                ExcitationClass::Hard => prop_assert!((bp.intensity_a2 - jump_magnitude(&p)).abs() < 1e-12 * (1.0 + jump_magnitude(&p))),
                ExcitationClass::Soft => prop_assert!(bp.intensity_a2.abs() < 1e-12),
                ExcitationClass::Boundary => {}
            }
        }

        #[test]
        fn branch_invariants(p in params(), scale in 0.5..3.0f64) {
            let p = p.with_drive(scale * omega_th(&p));
            for bp in all_branches(&p) {
                prop_assert_eq!(bp.intensity_a2, bp.a2_mod * bp.a2_mod);
                prop_assert!(((bp.delta2 + bp.delta_b) - (p.delta_omega2 + p.omega_b)).abs() < 1e-15);
                prop_assert!(bp.phi > -std::f64::consts::PI && bp.phi <= std::f64::consts::PI);
                prop_assert!(max_residual(&p, &bp) < 1e-10 * p.omega_drive_amp.max(1.0));
                if bp.branch != Branch::Zero {
                    let lhs = bp.a2_mod.powi(2) * p.gamma2;
                    let rhs = bp.b_mod.powi(2) * p.gamma_b;
                    prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(rhs).max(1e-300));
                    prop_assert!((p.gamma_b * bp.delta2 - p.gamma2 * bp.delta_b).abs() < 1e-15);
                }
            }
        }

        #[test]
        fn class_agrees_with_jump_sign(p in params()) {
            let margin = p.delta_omega1 * (p.delta_omega2 + p.omega_b) - p.gamma1 * (p.gamma2 + p.gamma_b);
            prop_assume!(margin.abs() > BOUNDARY_TOL);
            prop_assert_eq!(excitation_class(&p) == ExcitationClass::Hard, jump_magnitude(&p) > 0.0);
        }

        #[test]
        fn phase_condition_iff_above_existence(p in params(), scale in 0.1..3.0f64) {
            let ex = omega_ex(&p);
            prop_assume!(ex > 0.0 && (scale - 1.0).abs() > 1e-9);
            let p = p.with_drive(scale * ex);
            prop_assert_eq!(sin_phi(&p).abs() <= 1.0, p.omega_drive_amp >= ex);
        }
    }
}
