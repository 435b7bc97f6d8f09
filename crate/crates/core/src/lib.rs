//! Structure-preserving finite difference integrators for the BBM equation
//! and the real form of the cubic NLS equation.
//!
//! Every scheme is an implicit one-step (or, for the Preissman box, two-step)
//! relation between consecutive time levels on a periodic lattice. Schemes
//! carry their discrete conservation laws in characteristic form, so the
//! identity `A·Q = D_m F + D_n G` can be checked directly on arbitrary data.

pub mod bbm;
pub mod bench;
pub mod claw;
pub mod grid;
pub mod nls;
pub mod scheme;
pub mod solver;
pub mod stencil;

pub use claw::{ConservationLawDef, IdentityCheck, InvariantTrace, LawKind};
pub use grid::{FieldLevel, GridError, GridSpec, StencilWindow, Trajectory};
pub use scheme::{Equation, Mutation, Scheme, SchemeError, SchemeSpec};
pub use solver::{SolveError, SolverConfig, StepStats};
pub use stencil::Ops;
