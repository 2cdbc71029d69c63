//! Small solitary waves of the cubic-quintic NLS
//! `i ψ_t + ψ_xx + |ψ|²ψ + |ψ|⁴ψ = 0`: soliton profiles, linearized
//! operators, the internal mode, golden-rule constants and split-step dynamics.

pub mod acceptance;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fgr_exact;
pub mod grid;
pub mod jet;
pub mod operators;
pub mod profiles;
pub mod spectral;

pub use error::{Error, Result};
