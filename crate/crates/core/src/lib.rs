//! Verification engine for PIDL, a propositional logic of user decisions and
//! rule-driven state changes.
//!
//! A [`Specification`] is explored state by state with a labeled-clause
//! calculus; the resulting state graph feeds the anomaly analyses. The
//! [`dopler`] frontend translates decision models into specifications, and
//! [`session`] runs a model interactively.

pub mod analysis;
pub mod dopler;
pub mod error;
pub mod lexer;
pub mod load;
pub mod logic;
pub mod saturation;
pub mod session;

pub use error::{LoadError, ModelCheckError, OracleError, ParseError, SpecError};
pub use logic::{Clause, Formula, Lit, Specification, State, Transition, TransitionKind, Var, VarTable};
