//! Quantum objects, dense linear algebra, seeded generators and closed-form benchmarks.

pub mod bounds;
pub mod linalg;
pub mod random;
pub mod types;

pub use bounds::*;
pub use linalg::{c, CMatrix, CVector, C64};
pub use random::{haar_unitary, random_rank_r_povm, random_rank_r_state, rng_from_seed, Rng};
pub use types::*;
