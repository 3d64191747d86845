//! Fast-forward adiabatic dynamics for XY spin clusters.
//!
//! The pipeline is: build the model Hamiltonian ([`model`]), follow its
//! adiabatic branch in the schedule parameter R ([`spectrum`]), solve for the
//! driving coefficients that keep a fast sweep on that branch
//! ([`regularization`]), then integrate the driven Schrödinger equation and
//! measure fidelity against the branch ([`fastforward`]).

pub mod error;
pub mod fastforward;
pub mod interp;
pub mod model;
pub mod regularization;
pub mod spectrum;
pub mod spin_algebra;

pub use error::{Error, Result};
pub use fastforward::{fidelity, FastForward, FastForwardOptions, FastForwardProfile, TrajectoryRecord};
pub use model::{DrivingCoefficients, Model, ModelKind, ModelSpec};
pub use regularization::{
    closed_form_two_spin, component_form_three_spin, printed_two_spin_amplitude, solve_core,
    CoefficientTable, CoreSolution,
};
pub use spectrum::{
    eigensolve, fix_gauge, gap_at, gap_report, resolve_initial_degeneracy, track_branch, track_from_start,
    spectrum_at, uniform_grid, AdiabaticBranch, BranchSample, GapSample, InitialSelection, RealVector,
    TrackOptions,
};
pub use spin_algebra::{Axis, BasisOrder, ComplexMatrix, Parity, StateVector};
