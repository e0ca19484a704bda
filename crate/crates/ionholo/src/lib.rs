//! Simulator and pulse-schedule compiler for nonadiabatic holonomic
//! multiqubit controlled gates in trapped-ion chains.
//!
//! The crate is organized around the life of a gate:
//!
//! * [`gate_targets`] builds the ideal controlled-(n·σ) unitaries and their
//!   bright/dark state pairs.
//! * [`pulse_compiler`] turns a gate specification into a piecewise schedule
//!   of effective two-ion couplings with pulse-area-fixed durations, and
//!   realizes the underlying sideband laser configurations where defined.
//! * [`effective_sim`] propagates the effective schedule exactly (products of
//!   matrix exponentials), verifies the holonomy conditions (cyclicity and
//!   parallel transport), and measures gate error against the ideal target.
//! * [`full_sim`] integrates the full ion-laser-phonon model, unitarily or as
//!   a Lindblad master equation with spontaneous emission from the excited
//!   level, and reports fidelity, leakage and trace error.
//! * [`quantum_core`] supplies the dense complex linear algebra and
//!   Hilbert-space bookkeeping all of the above share.
//!
//! Basis ordering contract, used everywhere and tested in `quantum_core`:
//! ion 1 is the slowest index, the phonon mode (when present) is the fastest,
//! and within an ion the levels order as |0⟩=0, |1⟩=1, |e⟩=2.

pub mod exec;
pub mod quantum_core;
pub mod gate_targets;
pub mod pulse_compiler;
pub mod effective_sim;
pub mod full_sim;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension {dim} exceeds the configured capacity cap {cap}")]
    CapacityExceeded { dim: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("ion index {index} out of range for {num_ions} ions")]
    IonIndexOutOfRange { index: usize, num_ions: usize },
    #[error("operator is not Hermitian, max entrywise deviation {0:.3e}")]
    NotHermitian(f64),
    #[error("layout has no phonon mode")]
    NoMode,
    #[error("no laser realization defined for this interval: {0}")]
    EffectiveOnly(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numeric abort: {0}")]
    NumericAbort(String),
}

pub type Result<T> = std::result::Result<T, Error>;
