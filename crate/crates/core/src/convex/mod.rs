//! Feasible-set machinery: conic programs, the reference SDP backend,
//! informational-completeness certification and the minimum-entropy estimator.

pub mod feasible;
pub mod icc;
pub mod minent;
pub mod program;
pub mod sdp;
pub mod witness;

pub use feasible::{compile_constraints, DataConstraint, FeasibleSet, FeasibleSetSpec, ObjectKind};
pub use icc::{icc, normalisation_reference, IccResult};
pub use minent::{min_entropy_estimator, MinEntropyConfig, MinEntropyResult};
pub use program::{ConicProgram, ConstraintSet, LinearConstraint, Term};
pub use sdp::{InteriorPoint, SdpBackend, SdpSolution, SolveStatus};
pub use witness::{random_witness, WitnessFunctional};
