//! Loading models from disk: DOPLER documents, and raw specifications in
//! JSON or text form.

use std::path::Path as FsPath;

use thiserror::Error;

use crate::analysis::{analyze, Analysis, AnalysisOptions, Check};
use crate::dopler::{findings, translate, AnomalyClass, DoplerModel, Finding, ModelError, ModelVocabulary, SpecVocabulary, Translation};
use crate::error::LoadError;
use crate::logic::parse::{parse_spec_json, parse_spec_text};
use crate::logic::spec::Specification;
use crate::saturation::{explore_with, ExplorationResult, ExploreError, ExploreOptions};

#[derive(Debug, Error)]
pub enum ModelLoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spec(#[from] LoadError),
}

/// Either kind of input, with a DOPLER model already translated.
#[derive(Debug, Clone)]
pub enum Model {
    Dopler {
        model: Box<DoplerModel>,
        translation: Box<Translation>,
    },
    Spec(Specification),
}

impl Model {
    /// JSON objects with a `decisions` key are DOPLER models, other JSON
    /// objects raw specifications; anything else is the sectioned text form.
    pub fn parse(text: &str) -> Result<Model, ModelLoadError> {
        if !text.trim_start().starts_with('{') {
            return Ok(Model::Spec(parse_spec_text(text).map_err(LoadError::from)?));
        }
        let value: serde_json::Value = serde_json::from_str(text).map_err(ModelError::from)?;
        if value.get("decisions").is_some() {
            Ok(Model::dopler(DoplerModel::from_json(text)?)?)
        } else {
            Ok(Model::Spec(parse_spec_json(text)?))
        }
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Model, ModelLoadError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelLoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Model::parse(&text)
    }

    pub fn dopler(model: DoplerModel) -> Result<Model, ModelError> {
        let translation = translate(&model)?;
        Ok(Model::Dopler {
            model: Box::new(model),
            translation: Box::new(translation),
        })
    }

    pub fn spec(&self) -> &Specification {
        match self {
            Model::Dopler { translation, .. } => &translation.spec,
            Model::Spec(s) => s,
        }
    }

    pub fn checks(&self) -> Vec<Check> {
        match self {
            Model::Dopler { translation, .. } => translation.checks.clone(),
            Model::Spec(_) => Vec::new(),
        }
    }

    pub fn as_dopler(&self) -> Option<(&DoplerModel, &Translation)> {
        match self {
            Model::Dopler { model, translation } => Some((model, translation)),
            Model::Spec(_) => None,
        }
    }

    /// Explores, analyzes and describes every anomaly.
    pub fn check(&self, opts: &ExploreOptions, cycle_limit: usize) -> Result<Report, ExploreError> {
        let exploration = explore_with(self.spec(), opts)?;
        Ok(self.report(exploration, cycle_limit))
    }

    pub fn report(&self, exploration: ExplorationResult, cycle_limit: usize) -> Report {
        let analysis = analyze(
            self.spec(),
            &exploration,
            &AnalysisOptions {
                checks: self.checks(),
                cycle_limit,
            },
        );
        let findings = match self {
            Model::Dopler { model, translation } => findings(&ModelVocabulary { model, translation }, &analysis),
            Model::Spec(spec) => findings(&SpecVocabulary(spec), &analysis),
        };
        Report {
            exploration,
            analysis,
            findings,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub exploration: ExplorationResult,
    pub analysis: Analysis,
    pub findings: Vec<Finding>,
}

impl Report {
    pub fn count(&self, class: AnomalyClass) -> usize {
        self.findings.iter().filter(|f| f.class == class).count()
    }

    pub fn of(&self, class: AnomalyClass) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(move |f| f.class == class)
    }

    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}
