//! The JSON model format and its validated form.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dopler::expr::{parse_action, parse_expr, Action, Expr, Names};
use crate::error::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionType {
    Boolean,
    Enumeration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionDoc {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: DecisionType,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub options: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<usize>,
    /// Absent means always visible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visibility: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDoc {
    #[serde(rename = "if")]
    pub condition: String,
    pub then: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inclusion: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub includes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excludes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDoc {
    pub name: String,
    pub formula: String,
}

/// A model as written on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub decisions: Vec<DecisionDoc>,
    #[serde(default)]
    pub rules: Vec<RuleDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assets: Vec<AssetDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckDoc>,
}

impl ModelDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid JSON at {line}:{column}: {message}")]
    Json { line: usize, column: usize, message: String },
    /// An expression inside the model failed to parse or type check.
    #[error("{field}: column {}: {}", .error.column, .error.message)]
    Expr { field: String, error: ParseError },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

impl ModelError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> ModelError {
        ModelError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// The JSON path of the offending field, if any.
    pub fn field(&self) -> Option<&str> {
        match self {
            ModelError::Json { .. } => None,
            ModelError::Expr { field, .. } | ModelError::Invalid { field, .. } => Some(field),
        }
    }
}

impl From<serde_json::Error> for ModelError {
    fn from(e: serde_json::Error) -> ModelError {
        ModelError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecisionKind {
    Boolean,
    Enumeration { options: Vec<String>, min: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub name: String,
    pub kind: DecisionKind,
    pub visibility: Expr,
}

impl Decision {
    pub fn options(&self) -> Option<&[String]> {
        match &self.kind {
            DecisionKind::Boolean => None,
            DecisionKind::Enumeration { options, .. } => Some(options),
        }
    }

    pub fn is_boolean(&self) -> bool {
        self.kind == DecisionKind::Boolean
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub condition: Expr,
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Asset {
    pub name: String,
    pub inclusion: Option<Expr>,
    pub includes: Vec<usize>,
    pub excludes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub formula: Expr,
}

/// A validated model: every name resolved, every expression typed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoplerModel {
    pub decisions: Vec<Decision>,
    pub rules: Vec<Rule>,
    pub assets: Vec<Asset>,
    pub constraints: Vec<Expr>,
    pub checks: Vec<Check>,
    /// The source document, kept for echoing expressions in reports.
    pub document: ModelDocument,
}

struct Scope<'a> {
    decisions: HashMap<&'a str, (usize, Option<&'a [String]>)>,
    assets: HashMap<&'a str, usize>,
}

impl Names for Scope<'_> {
    fn decision(&self, name: &str) -> Option<(usize, Option<&[String]>)> {
        self.decisions.get(name).copied()
    }

    fn asset(&self, name: &str) -> Option<usize> {
        self.assets.get(name).copied()
    }
}

fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

const RESERVED: &[&str] = &["true", "false", "isTaken", "containsOnly", "setValue", "start"];

impl DoplerModel {
    pub fn from_json(text: &str) -> Result<DoplerModel, ModelError> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        DoplerModel::from_document(doc)
    }

    pub fn from_document(doc: ModelDocument) -> Result<DoplerModel, ModelError> {
        let mut scope = Scope {
            decisions: HashMap::new(),
            assets: HashMap::new(),
        };
        let name_ok = |field: String, name: &str| -> Result<(), ModelError> {
            if !is_identifier(name) || RESERVED.contains(&name) {
                return Err(ModelError::invalid(field, format!("`{name}` is not a valid name")));
            }
            Ok(())
        };
        for (k, d) in doc.decisions.iter().enumerate() {
            let field = format!("decisions[{k}]");
            name_ok(format!("{field}.name"), &d.name)?;
            let options = match d.kind {
                DecisionType::Boolean => {
                    if !d.options.is_empty() || d.min.is_some() || d.max.is_some() {
                        return Err(ModelError::invalid(field, "boolean decisions take no options, min or max"));
                    }
                    None
                }
                DecisionType::Enumeration => {
                    if d.options.is_empty() {
                        return Err(ModelError::invalid(format!("{field}.options"), "an enumeration needs options"));
                    }
                    for (j, o) in d.options.iter().enumerate() {
                        name_ok(format!("{field}.options[{j}]"), o)?;
                        if d.options[..j].contains(o) {
                            return Err(ModelError::invalid(format!("{field}.options[{j}]"), format!("duplicate option `{o}`")));
                        }
                    }
                    Some(d.options.as_slice())
                }
            };
            if scope.decisions.insert(&d.name, (k, options)).is_some() {
                return Err(ModelError::invalid(format!("{field}.name"), format!("decision `{}` declared twice", d.name)));
            }
        }
        for (k, a) in doc.assets.iter().enumerate() {
            let field = format!("assets[{k}].name");
            name_ok(field.clone(), &a.name)?;
            if scope.decisions.contains_key(a.name.as_str()) {
                return Err(ModelError::invalid(field, format!("`{}` is already a decision", a.name)));
            }
            if scope.assets.insert(&a.name, k).is_some() {
                return Err(ModelError::invalid(field, format!("asset `{}` declared twice", a.name)));
            }
        }
        let expr = |field: String, src: &str| -> Result<Expr, ModelError> {
            parse_expr(&scope, src).map_err(|error| ModelError::Expr { field, error })
        };

        let mut decisions = Vec::with_capacity(doc.decisions.len());
        for (k, d) in doc.decisions.iter().enumerate() {
            let kind = match d.kind {
                DecisionType::Boolean => DecisionKind::Boolean,
                DecisionType::Enumeration => {
                    let (min, max) = (d.min.unwrap_or(0), d.max.unwrap_or(1));
                    if min > max || max == 0 || max > d.options.len() {
                        return Err(ModelError::invalid(
                            format!("decisions[{k}]"),
                            format!("need 0 <= min <= max <= {} and max >= 1, got min {min}, max {max}", d.options.len()),
                        ));
                    }
                    DecisionKind::Enumeration {
                        options: d.options.clone(),
                        min,
                        max,
                    }
                }
            };
            let visibility = match &d.visibility {
                None => Expr::True,
                Some(v) => expr(format!("decisions[{k}].visibility"), v)?,
            };
            decisions.push(Decision {
                name: d.name.clone(),
                kind,
                visibility,
            });
        }

        let mut rules = Vec::with_capacity(doc.rules.len());
        for (k, r) in doc.rules.iter().enumerate() {
            let condition = expr(format!("rules[{k}].if"), &r.condition)?;
            if r.then.is_empty() {
                return Err(ModelError::invalid(format!("rules[{k}].then"), "a rule needs at least one action"));
            }
            let mut actions = Vec::with_capacity(r.then.len());
            for (j, a) in r.then.iter().enumerate() {
                let field = format!("rules[{k}].then[{j}]");
                let action = parse_action(&scope, a).map_err(|error| ModelError::Expr {
                    field: field.clone(),
                    error,
                })?;
                if let Action::SetBool(d, v) = action {
                    if actions.contains(&Action::SetBool(d, !v)) {
                        return Err(ModelError::invalid(field, format!("`{}` is set to both values", doc.decisions[d].name)));
                    }
                }
                actions.push(action);
            }
            rules.push(Rule { condition, actions });
        }

        let asset_ref = |field: String, name: &str| -> Result<usize, ModelError> {
            scope
                .assets
                .get(name)
                .copied()
                .ok_or_else(|| ModelError::invalid(field, format!("unknown asset `{name}`")))
        };
        let mut assets = Vec::with_capacity(doc.assets.len());
        for (k, a) in doc.assets.iter().enumerate() {
            let inclusion = match &a.inclusion {
                None => None,
                Some(s) => Some(expr(format!("assets[{k}].inclusion"), s)?),
            };
            let includes = a
                .includes
                .iter()
                .enumerate()
                .map(|(j, b)| asset_ref(format!("assets[{k}].includes[{j}]"), b))
                .collect::<Result<Vec<_>, _>>()?;
            let excludes = a
                .excludes
                .iter()
                .enumerate()
                .map(|(j, b)| asset_ref(format!("assets[{k}].excludes[{j}]"), b))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(b) = includes.iter().find(|b| excludes.contains(b)) {
                return Err(ModelError::invalid(
                    format!("assets[{k}]"),
                    format!("`{}` both includes and excludes `{}`", a.name, doc.assets[*b].name),
                ));
            }
            assets.push(Asset {
                name: a.name.clone(),
                inclusion,
                includes,
                excludes,
            });
        }

        let constraints = doc
            .constraints
            .iter()
            .enumerate()
            .map(|(k, c)| expr(format!("constraints[{k}]"), c))
            .collect::<Result<_, _>>()?;
        let checks = doc
            .checks
            .iter()
            .enumerate()
            .map(|(k, c)| {
                Ok(Check {
                    name: c.name.clone(),
                    formula: expr(format!("checks[{k}].formula"), &c.formula)?,
                })
            })
            .collect::<Result<_, ModelError>>()?;

        Ok(DoplerModel {
            decisions,
            rules,
            assets,
            constraints,
            checks,
            document: doc,
        })
    }

    pub fn decision_index(&self, name: &str) -> Option<usize> {
        self.decisions.iter().position(|d| d.name == name)
    }
}
