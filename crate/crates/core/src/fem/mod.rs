//! Piecewise-linear finite element building blocks.

pub mod assembly;
pub mod dof;
pub mod element;
pub mod field;
pub mod linsolve;
pub mod newton;
pub mod quadrature;
pub mod sparse;

pub use assembly::{Assembled, LocalSystem, PatternBuilder};
pub use dof::{Dof, DofMap, DofSpec, FieldId};
pub use element::{deformation_state, DeformationState, P1Triangle, Tensor2};
pub use field::NodalField;
pub use linsolve::{Factorization, LinearSolver};
pub use newton::{newton_solve, NewtonOptions, NewtonProblem, NewtonReport};
pub use quadrature::{quadrature_rule, QuadratureRule};
pub use sparse::{CsrMatrix, SparseSystem, SparsityPattern};
