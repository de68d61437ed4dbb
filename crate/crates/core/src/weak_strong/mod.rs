//! Classical reference solutions, relative-energy traces and the
//! weak-strong refinement study.

mod classical;
mod study;
mod trace;

pub use classical::{ClassicalSolution, ClassicalState};
pub use study::{weak_strong_study, ResolutionTrace, StudyReport, EXACT_FLOOR, RELATIVE_TOLERANCE};
pub use trace::{
    classical_window, default_cutoff, rel_energy_trace, ws_inequality_residual, InequalityResidual,
    RelEnergyTrace,
};
