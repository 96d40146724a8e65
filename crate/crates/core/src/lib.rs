//! Time-optimal unitary gate synthesis in the presence of an uncontrollable
//! background Hamiltonian.
//!
//! The optimal control is the initial control advected by the background
//! field, `H1(t) = e^{-iH0 t} H1(0) e^{iH0 t}`; the library finds `H1(0)` and
//! the transit time `T` either by continuation in the wind strength or by a
//! scalar root solve on the closed-form boundary relation, and checks the
//! result against independent numerical oracles.

pub mod algebra;
pub mod continuation;
pub mod error;
pub mod fixedpoint;
pub mod geodesic;
pub mod geometry;
pub mod json;
pub mod problem;
pub mod quadrature;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
pub use tolerances::Tolerances;
pub use problem::{ControlSolution, NavigationProblem, SolveMethod, SolverOptions};
