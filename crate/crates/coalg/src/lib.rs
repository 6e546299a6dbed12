//! Coalgebras on finite sets: evaluation of set functors built from a small
//! combinator language, four notions of bisimulation between systems, greatest
//! fixpoints and behaviour sequences, and bounded checks of functor
//! preservation properties with replayable witnesses.

pub mod error;
pub mod value;
pub mod finset;
pub mod functor;
pub mod eval;
pub mod text;
pub mod props;
pub mod bisim;
pub mod report;

pub use bisim::CoalgebraPair;
pub use error::{Error, Result};
pub use finset::{Cospan, FinFunction, FinSet, Relation};
pub use functor::{Coalgebra, EvalConfig, FunctorExpr};
pub use value::Value;
