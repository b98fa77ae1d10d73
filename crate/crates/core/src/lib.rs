//! Mean-field model of a laser with two optical modes and one phonon mode.
//!
//! - [`model`]: constants, state and equations of motion
//! - [`steady_state`]: closed-form branches, thresholds, soft/hard class
//! - [`stability`]: Jacobian spectra and the numerical threshold
//! - [`dynamics`], [`sweep`]: time integration, laser curves, maps, hysteresis
//! - [`stochastic`]: Langevin ensembles
//! - [`oracle`]: multi-start Newton check of the closed forms
//! - [`output`]: versioned CSV writers
//!
//! ```
//! use optolaser::model::SystemParams;
//! use optolaser::steady_state::{nonzero_branch, omega_th, Sign};
//!
//! let p = SystemParams::fig1c();
//! let above = p.with_drive(1.1 * omega_th(&p));
//! let plus = nonzero_branch(&above, Sign::Plus).unwrap();
//! assert!(plus.intensity_a2 > 0.2);
//! ```
//!
//! The guide in `book/` explains the model; its snippets run as doctests of
//! this crate.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod model;
pub mod oracle;
pub mod output;
pub mod stability;
pub mod steady_state;
pub mod stochastic;
pub mod sweep;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/steady-states.md")]
    mod steady_states {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
