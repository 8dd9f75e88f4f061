//! Model document to ranked policies in one place, so every front end
//! produces the same reports for the same inputs.

use serde::Serialize;
use thiserror::Error;

use crate::ceu::{compile_auto, CeuError, CompileOptions, ErrorMomentPolicy};
use crate::evaluate::{mc_oracle, score, EvalError, MomentClosure};
use crate::model::{parse_moment_overrides, parse_model, ModelError, MomentTable, SemModel};
use crate::paths::PathError;
use crate::report::{AdequacyDocument, AdequacyView, CeuDocument, OracleDocument, OracleEntry, ScoreDocument};
use crate::separability::{derive_adequacy, AdequacySpec, SeparabilityError};
use crate::CeuReport;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdssError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ceu(#[from] CeuError),
    #[error(transparent)]
    Separability(#[from] SeparabilityError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<PathError> for IdssError {
    fn from(e: PathError) -> Self {
        IdssError::Ceu(CeuError::Path(e))
    }
}

/// Coarse classification used for exit codes and HTTP statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Schema,
    Cycle,
    Ownership,
    MissingValue,
    Unknown,
    NotLinear,
    MissingSummary,
    NegativeVariance,
    OracleUnsupported,
}

impl IdssError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            IdssError::Model(ModelError::Schema(_)) => ErrorKind::Schema,
            IdssError::Model(ModelError::Cycle(_)) => ErrorKind::Cycle,
            IdssError::Model(ModelError::Ownership(_)) | IdssError::Separability(_) => ErrorKind::Ownership,
            IdssError::Model(ModelError::MissingValue(_)) | IdssError::Ceu(CeuError::MissingValue { .. }) => {
                ErrorKind::MissingValue
            }
            IdssError::Model(ModelError::UnknownUtility(_) | ModelError::UnknownPolicy(_))
            | IdssError::Eval(EvalError::UnknownPolicy(_))
            | IdssError::Ceu(CeuError::Path(PathError::UnknownVertex(_))) => ErrorKind::Unknown,
            IdssError::Ceu(CeuError::Path(PathError::NotLinear(_))) => ErrorKind::NotLinear,
            IdssError::Eval(EvalError::MissingSummary { .. }) => ErrorKind::MissingSummary,
            IdssError::Eval(EvalError::NegativeVariance { .. }) => ErrorKind::NegativeVariance,
            IdssError::Eval(EvalError::OracleUnsupported(_)) => ErrorKind::OracleUnsupported,
        }
    }
}

/// A model compiled for one utility class: immutable once built.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub model: SemModel,
    pub errors: ErrorMomentPolicy,
    pub report: CeuReport,
    pub adequacy: AdequacySpec,
}

impl Compiled {
    pub fn new(model: SemModel, utility: Option<&str>, options: CompileOptions) -> Result<Self, IdssError> {
        let spec = model.utility(utility)?;
        let report = compile_auto(&model, spec, options)?;
        let adequacy = derive_adequacy(&report, &model.panels)?;
        Ok(Compiled { errors: options.errors, model, report, adequacy })
    }

    pub fn from_json(text: &str, utility: Option<&str>, options: CompileOptions) -> Result<Self, IdssError> {
        Compiled::new(parse_model(text)?, utility, options)
    }

    pub fn utility(&self) -> &str {
        &self.report.utility
    }

    /// Symbolic CEU, or the numeric CEU of the named policy.
    pub fn ceu(&self, policy: Option<&str>) -> Result<CeuDocument, IdssError> {
        let index = policy.map(|p| self.model.policy_index(p)).transpose()?;
        Ok(CeuDocument::new(&self.report, index))
    }

    pub fn adequacy(&self, view: AdequacyView) -> AdequacyDocument {
        AdequacyDocument::new(self.utility(), &self.adequacy, view)
    }

    /// The document's moment table with `overrides` merged over it.
    pub fn moments(&self, overrides: Option<&serde_json::Value>) -> Result<MomentTable, IdssError> {
        let mut table = self.model.moments.clone();
        if let Some(o) = overrides {
            table.merge(&parse_moment_overrides(o, &self.model)?);
        }
        Ok(table)
    }

    pub fn score(&self, moments: &MomentTable, closure: MomentClosure) -> Result<ScoreDocument, IdssError> {
        let board = score(&self.report, &self.adequacy, &self.model.panels, moments, closure)?;
        Ok(ScoreDocument::new(self.utility(), self.errors, closure, board))
    }

    /// Monte Carlo estimates for the named policy, or for every policy.
    pub fn oracle(
        &self,
        moments: &MomentTable,
        policy: Option<&str>,
        samples: u64,
        seed: u64,
    ) -> Result<OracleDocument, IdssError> {
        let spec = self.model.utility(Some(self.utility()))?;
        let policies: Vec<usize> = match policy {
            Some(p) => vec![self.model.policy_index(p)?],
            None => (0..self.model.policies.len()).collect(),
        };
        let estimates = policies
            .into_iter()
            .map(|d| {
                let estimate = mc_oracle(&self.model, spec, d, moments, samples, seed)?;
                Ok(OracleEntry { policy: self.model.policies[d].clone(), estimate })
            })
            .collect::<Result<_, IdssError>>()?;
        Ok(OracleDocument::new(self.utility(), estimates))
    }
}

/// Every diagnostic for a document, including structural failures that stop
/// the model from being built.
pub fn validate_document(text: &str) -> Vec<crate::model::Diagnostic> {
    use crate::model::{validate_topology, Diagnostic, DiagnosticKind, ModelDocument};
    let single = |e: ModelError| {
        let (kind, message) = match e {
            ModelError::Cycle(m) => (DiagnosticKind::Cycle, m),
            ModelError::Ownership(m) => (DiagnosticKind::Ownership, m),
            ModelError::MissingValue(m) => (DiagnosticKind::MissingValue, m),
            ModelError::Schema(m) => (DiagnosticKind::Schema, m),
            other => (DiagnosticKind::Schema, other.to_string()),
        };
        vec![Diagnostic { kind, message }]
    };
    match ModelDocument::from_json(text).and_then(|d| d.build()) {
        Ok(model) => validate_topology(&model),
        Err(e) => single(e),
    }
}
