//! Crate-wide error type.
//!
//! Variants are grouped by where they arise: quantum-number domain errors,
//! physical-model validation, protocol preconditions, config parsing, and
//! numerical failures. The CLI maps [`Error::exit_code`] onto process exit
//! status: 1 for validation problems, 2 for numerical ones.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Angular-momentum arguments outside the supported domain.
    #[error("invalid angular momentum arguments: {0}")]
    AngularDomain(String),

    /// Rotational quantum numbers violating |k| <= j, |m| <= j or integrality.
    #[error("invalid rotational ket: {0}")]
    InvalidKet(String),

    /// Rotor constants violating the prolate ordering A > B = C > 0.
    #[error("invalid rotor constants: {0}")]
    InvalidRotorConstants(String),

    /// Dipole component queried across enantiomers or for a forbidden pair.
    #[error("invalid dipole component request: {0}")]
    DipoleComponent(String),

    /// The three working vibrational labels fail a selection-rule requirement.
    #[error("working-state set rejected: {0}")]
    WorkingSet(String),

    /// Drive fields with the wrong helicity assignment or amplitude sign.
    #[error("invalid drive field: {0}")]
    DriveField(String),

    /// Rotational superposition that is empty or not normalized.
    #[error("invalid level superposition: {0}")]
    Superposition(String),

    /// Level frequencies out of order or detunings breaking three-photon resonance.
    #[error("invalid frequency data: {0}")]
    Frequencies(String),

    /// Matrix handed to a Hamiltonian constructor is not Hermitian.
    #[error("matrix is not Hermitian: max asymmetry {asymmetry:e} exceeds {tolerance:e} (relative)")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    /// Adiabatic elimination requested outside its validity assumptions.
    #[error("adiabatic elimination rejected: {0}")]
    Elimination(String),

    /// Protocol design preconditions violated (zero effective coupling, bad integers).
    #[error("protocol design rejected: {0}")]
    Protocol(String),

    /// Config file rejected; carries line and field diagnostics.
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("cannot read config {path}: {source}")]
    ConfigRead { path: String, source: std::io::Error },

    /// Config is syntactically fine but a required field is missing.
    #[error("config field missing: {0}")]
    ConfigMissing(String),

    /// State vector with wrong dimension or zero norm.
    #[error("invalid state vector: {0}")]
    InvalidState(String),

    /// Adaptive integrator drove the step size below resolvable precision.
    #[error("integrator step underflow at t = {t:e} s (step {step:e} s): {context}")]
    StepUnderflow { t: f64, step: f64, context: String },

    /// Eigendecomposition or another numerical kernel failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Output files could not be written.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the CLI should use for this error.
    /// Validation problems map to 1, numerical failures to 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::StepUnderflow { .. } | Error::Numerical(_) => 2,
            _ => 1,
        }
    }
}
