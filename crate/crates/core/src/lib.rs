//! Core library of the plaidy proof assistant for differential dynamic
//! logic: syntax, semantics, the proof kernel and tactics.

pub mod arith;
pub mod ast;
pub mod diff;
pub mod env;
pub mod eval;
pub mod fresh;
pub mod kernel;
pub mod oracle;
pub mod script;
pub mod sequent;
pub mod subst;
pub mod syntax;
pub mod tactics;

pub use ast::{AssignmentList, BoolExpr, HybridProgram, OdeSystem, Rational, RealExpr, RelOp, Variable, VarsOf};
pub use env::{env_with, Environment};
pub use sequent::{Position, Sequent, Side};
