//! Error and disturbance of qubit measurements: measurement models,
//! estimation procedures, finite-shot simulation and the family of
//! error-disturbance relations.

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod fock;
pub mod instruments;
pub mod linalg;
pub mod qubit;
pub mod sweep;

pub use bounds::{evaluate_all, evaluate_relation, EdrInputs, EdrReport, Relation};
pub use error::{EdrError, Result};
pub use estimators::{
    cascade_distribution, estimate_from_counts, sample_shots, three_state_error, two_state_error,
    weak_joint_probabilities, weak_probe_disturbance, weak_probe_error, weak_value, CascadeAxes, EstimateMode,
    JointDistribution, ShotRecord, WeakProbe,
};
pub use fock::{restrict_to_single_photon, stokes_operator, FockSpace};
pub use instruments::{
    disturbance_direct, error_direct, heisenberg_observables, lund_wiseman_model, vpbs_instrument, IndirectModel,
    Instrument, InstrumentKind, InstrumentSpec, Povm,
};
pub use linalg::{hermitian_eig, partial_trace, tensor_product, ComplexMatrix, EigenPair};
pub use qubit::{DensityState, Observable, ObservableName, QubitPure, StandardState};
pub use sweep::{emit_table, render_table, run_sweep, Method, SweepConfig, SweepRow, TableFormat, ThetaGrid};
