//! Propositional layer: variables, literals, states, formulas, clauses and
//! specifications.

pub mod clause;
pub mod formula;
pub mod oracle;
pub mod parse;
pub mod random;
pub mod semantics;
pub mod spec;
pub mod state;
pub mod var;

pub use clause::Clause;
pub use formula::{cnf, cnf_of, Formula};
pub use oracle::{entails_oracle, explore_oracle, state_consistent_oracle, OracleExploration, ORACLE_LIMIT};
pub use parse::{parse_formula, parse_spec_json, parse_spec_text, print_spec_json, print_spec_text, SpecDocument};
pub use semantics::{applicable_transitions, is_model, is_rule_terminal, update, Interpretation};
pub use spec::{Specification, Transition, TransitionKind};
pub use state::State;
pub use var::{Lit, Var, VarTable, START};
