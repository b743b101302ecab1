//! DOPLER-style models: decisions, rules, assets, and their translation
//! into PIDL specifications.

pub mod anomalies;
pub mod expr;
pub mod generate;
pub mod model;
pub mod translate;

pub use anomalies::{
    describe_origin, describe_state, detect_anomalies, detect_anomalies_with, findings, minimal_conflict, AnomalyClass,
    AnomalyError, AnomalyReport, Conflict, Finding, ModelVocabulary, SpecVocabulary, Vocabulary,
};
pub use expr::{parse_action, parse_expr, Action, Expr, Names};
pub use generate::{batch_seed, generate_random_model, GenerateError, Ratios};
pub use model::{
    Asset, AssetDoc, Check, CheckDoc, Decision, DecisionDoc, DecisionKind, DecisionType, DoplerModel, ModelDocument,
    ModelError, Rule, RuleDoc,
};
pub use translate::{
    cardinality, enumeration_constraints, translate, translate_expression, Cardinality, DecisionVars, Origin, Step,
    Translation, Value, VarMap,
};
