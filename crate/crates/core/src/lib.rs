//! Fitness-level bounds for non-elitist evolutionary algorithms with
//! tournament selection.
//!
//! The crate builds transition-bound matrices for mutation operators,
//! evaluates lower and upper bound recursions on the expected population
//! vector, and checks them against Monte-Carlo runs of the EA family.
//!
//! ```
//! use fitness_levels::bounds::lower_bound_linear;
//! use fitness_levels::kernels::point_mutation_gamma;
//! use fitness_levels::levels::PopulationVector;
//!
//! let gamma = point_mutation_gamma(3, 0.25).unwrap();
//! let bound = lower_bound_linear(&gamma, &PopulationVector::zeros(3), 20).unwrap();
//! let last = bound.trajectory.last().unwrap();
//! assert!(last[2] > 0.0 && last[2] < 1.0);
//! ```

pub mod bounds;
pub mod error;
pub mod experiment;
pub mod kernels;
pub mod levels;
pub mod linalg;
pub mod problems;
pub mod simulator;
pub mod stats;
pub mod svg;
pub mod verify;

pub use error::{Error, Result};
pub use levels::{BoundKind, BoundMatrix, LevelPartition, PopulationVector};
