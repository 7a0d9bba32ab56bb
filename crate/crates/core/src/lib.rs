//! Solvers for sparse inverse problems over nonnegative measures.
//!
//! The primal program minimizes `L(int Phi(t) x(dt) - y)` over nonnegative
//! measures `x` with total mass at most `tau`. Its Lagrangian dual is a
//! semi-infinite program with one constraint `Re<lambda, Phi(t)> <= alpha`
//! per parameter value. This crate provides
//!
//! - [`cgm`]: fully-corrective conditional gradient on the primal,
//! - [`em`]: the exchange method on the dual,
//! - [`fcsolver`]: the finite restricted subproblems both rely on,
//! - [`analysis`]: recovery metrics, rate-bound certificates and the
//!   equivalence checker comparing the two algorithms,
//! - [`experiment`]: the super-resolution benchmark harness and its file formats.

pub mod analysis;
pub mod cgm;
pub mod cvec;
pub mod dictionary;
pub mod em;
pub mod error;
pub mod experiment;
pub mod fcsolver;
pub mod io;
pub mod loss;
pub mod measure;
pub mod problem;
pub mod trace;

pub use cvec::CVec;
pub use dictionary::{AtomDictionary, AtomTable, Grid};
pub use error::{Error, Result};
pub use loss::{Loss, LossModel};
pub use measure::{Atom, DiscreteMeasure, ParameterDomain};
pub use problem::{synthesize, ProblemInstance};
pub use trace::{Algorithm, RunTrace, SolverConfig, Termination};
