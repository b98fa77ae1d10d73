//! Model constants, mode amplitudes and the mean-field equations of motion.
//!
//! All frequencies and rates are measured in units of a reference frequency
//! `ω₀ = 1`. Both optical amplitudes are taken in the frame rotating at the
//! drive frequency and the phonon amplitude in the lab frame, so the
//! equations are autonomous:
//!
//! ```text
//! da₁/dt = −(iδω₁ + γ₁) a₁ − i g a₂ b − iΩ
//! da₂/dt = −(iδω₂ + γ₂) a₂ − i g a₁ b*
//! db/dt  = −(iω_b + γ_b) b − i g a₁ a₂*
//! ```

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Model constants, all in units of `ω₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Detuning of optical mode 1 from the drive, `ω₁ − ω`.
    pub delta_omega1: f64,
    /// Detuning of optical mode 2 from the drive, `ω₂ − ω`.
    pub delta_omega2: f64,
    /// Phonon frequency.
    pub omega_b: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma_b: f64,
    /// Optomechanical (Fröhlich) coupling.
    pub g: f64,
    /// Amplitude of the external drive `Ω`; sweeps overwrite it.
    #[serde(default)]
    pub omega_drive_amp: f64,
}

impl SystemParams {
    /// Shared constants of the three laser-curve parameter sets; only
    /// `delta_omega1` differs between them.
    fn fig1_base(delta_omega1: f64) -> Self {
        Self {
            delta_omega1,
            delta_omega2: 5e-3,
            omega_b: 5e-3,
            gamma1: 1e-2,
            gamma2: 1e-3,
            gamma_b: 1e-3,
            g: 1e-2,
            omega_drive_amp: 0.0,
        }
    }

    /// Soft excitation set, `δω₁ = −4·10⁻³`.
    pub fn fig1a() -> Self {
        Self::fig1_base(-4e-3)
    }

    /// Set lying exactly on the soft/hard boundary, `δω₁ = 2·10⁻³`.
    pub fn fig1b() -> Self {
        Self::fig1_base(2e-3)
    }

    /// Hard excitation set, `δω₁ = 4·10⁻³`.
    pub fn fig1c() -> Self {
        Self::fig1_base(4e-3)
    }

    pub fn with_drive(mut self, omega: f64) -> Self {
        self.omega_drive_amp = omega;
        self
    }

    pub fn with_coupling(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    /// Checks finiteness, positive rates and coupling, non-negative drive.
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("delta_omega1", self.delta_omega1),
            ("delta_omega2", self.delta_omega2),
            ("omega_b", self.omega_b),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma_b", self.gamma_b),
            ("g", self.g),
            ("omega_drive_amp", self.omega_drive_amp),
        ];
        for (name, value) in all {
            if !value.is_finite() {
                return Err(Error::InvalidParam {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        for (name, value) in [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma_b", self.gamma_b),
        ] {
            if value <= 0.0 {
                return Err(Error::InvalidParam {
                    name,
                    value,
                    reason: "damping rate must be positive",
                });
            }
        }
        // g = 0 is accepted for decoupled reference runs; the closed-form
        // steady-state formulas divide by g and are not defined there.
        if self.g < 0.0 {
            return Err(Error::InvalidParam {
                name: "g",
                value: self.g,
                reason: "coupling must be non-negative",
            });
        }
        if self.omega_drive_amp < 0.0 {
            return Err(Error::InvalidParam {
                name: "omega_drive_amp",
                value: self.omega_drive_amp,
                reason: "drive amplitude must be non-negative",
            });
        }
        Ok(())
    }
}

/// Complex amplitudes of the two optical modes and the phonon mode.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeState {
    pub a1: Complex64,
    pub a2: Complex64,
    pub b: Complex64,
}

impl ModeState {
    pub const ZERO: ModeState = ModeState {
        a1: Complex64::new(0.0, 0.0),
        a2: Complex64::new(0.0, 0.0),
        b: Complex64::new(0.0, 0.0),
    };

    pub fn new(a1: Complex64, a2: Complex64, b: Complex64) -> Self {
        Self { a1, a2, b }
    }

    pub fn is_finite(&self) -> bool {
        self.a1.is_finite() && self.a2.is_finite() && self.b.is_finite()
    }

    /// `(|a₁|², |a₂|², |b|²)`.
    pub fn intensities(&self) -> [f64; 3] {
        [self.a1.norm_sqr(), self.a2.norm_sqr(), self.b.norm_sqr()]
    }

    /// Largest modulus over the three components.
    pub fn max_abs(&self) -> f64 {
        self.a1.norm().max(self.a2.norm()).max(self.b.norm())
    }

    pub fn to_array(self) -> [Complex64; 3] {
        [self.a1, self.a2, self.b]
    }
}

impl Add for ModeState {
    type Output = ModeState;
    fn add(self, rhs: ModeState) -> ModeState {
        ModeState::new(self.a1 + rhs.a1, self.a2 + rhs.a2, self.b + rhs.b)
    }
}

impl Sub for ModeState {
    type Output = ModeState;
    fn sub(self, rhs: ModeState) -> ModeState {
        ModeState::new(self.a1 - rhs.a1, self.a2 - rhs.a2, self.b - rhs.b)
    }
}

impl Mul<f64> for ModeState {
    type Output = ModeState;
    fn mul(self, k: f64) -> ModeState {
        ModeState::new(self.a1 * k, self.a2 * k, self.b * k)
    }
}

/// Time derivative of the state in the drive rotating frame.
pub fn rhs(params: &SystemParams, s: &ModeState) -> ModeState {
    let SystemParams {
        delta_omega1,
        delta_omega2,
        omega_b,
        gamma1,
        gamma2,
        gamma_b,
        g,
        omega_drive_amp,
    } = *params;
    let da1 =
        -Complex64::new(gamma1, delta_omega1) * s.a1 - I * g * s.a2 * s.b - I * omega_drive_amp;
    let da2 = -Complex64::new(gamma2, delta_omega2) * s.a2 - I * g * s.a1 * s.b.conj();
    let db = -Complex64::new(gamma_b, omega_b) * s.b - I * g * s.a1 * s.a2.conj();
    ModeState::new(da1, da2, db)
}

/// Applies the U(1) symmetry `a₂ → a₂e^{iθ}`, `b → b e^{−iθ}`.
///
/// The equations of motion are equivariant under this map, so the same
/// function also rotates time derivatives.
pub fn phase_rotate(s: &ModeState, theta: f64) -> ModeState {
    let rot = Complex64::from_polar(1.0, theta);
    ModeState::new(s.a1, s.a2 * rot, s.b * rot.conj())
}
