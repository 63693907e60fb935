//! Numerical toolkit for controlling cavity-enhanced spontaneous emission
//! with unexcited atoms.
//!
//! One lossy cavity mode and up to eight two-level atoms share a single
//! excitation. The crate builds the non-Hermitian effective matrix that
//! drives the excitation amplitudes, finds its spectrum and exceptional
//! points, propagates the full master equation as an independent oracle, and
//! closes the loop by extracting decay rates from trajectories and checking
//! them against the closed-form predictions.
//!
//! Everything is sized for desk-scale matrices (dimension at most ten), in
//! units of the cavity loss rate, with amplitude-rate conventions throughout:
//! populations decay at twice the quoted rates.

pub mod effective;
pub mod experiments;
pub mod linalg;
pub mod lindblad;
pub mod model;
pub mod parallel;
pub mod poly;
pub mod rates;
pub mod serialize;
pub mod spectra;

pub use effective::{
    build_effective_matrix, characteristic_polynomial, EffectiveMatrix, PolynomialCoefficients,
};
pub use experiments::{
    enhancement_sweep, reproduce_reference_numbers, run_sweep, run_sweep_sequential,
    EnhancementSweep, Observable, ReproduceRow, RunSettings, SweepResult, SweepSpec,
};
pub use lindblad::{
    amplitude_evolve, evolve, liouvillian_apply, step_bound, AmplitudeTrajectory, DensityMatrix,
    Trajectory,
};
pub use model::{
    basis, validate_config, AtomSpec, BasisState, ConfigError, ParamPath, SystemConfig, UnitSystem,
};
pub use rates::{
    closed_form_prediction, cooperativity, decay_report, detuned_rate, enhanced_detuned_rate,
    ep2_rate, ep3_rate, extract_decay_rate, inhibited_rate, purcell_rate, slow_mode_rate,
    three_atom_rate, DecayReport, FormulaTag, RateError, SlowMode,
};
pub use spectra::{
    coalescence, eigenpairs, ep2_coupling, ep2_report, ep3_parameters, ep3_report, polariton_pair,
    splitting_exponent, Ep3Parameters, EpReport, SpectraError, Spectrum,
};
