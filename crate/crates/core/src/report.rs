//! Fisher-information reports.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::units::UNITS_LABEL;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("Fisher information must be positive and finite, got {0}")]
    InvalidFisher(f64),
}

/// Statistical model behind a Fisher-information value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatModel {
    PoissonContinuum,
    PoissonPixel,
    GaussianPixel,
    ClosedForm,
}

impl StatModel {
    pub fn tag(&self) -> &'static str {
        match self {
            StatModel::PoissonContinuum => "poisson-continuum",
            StatModel::PoissonPixel => "poisson-pixel",
            StatModel::GaussianPixel => "gaussian-pixel",
            StatModel::ClosedForm => "closed-form",
        }
    }
}

/// Fisher information for the excitation position, with the implied
/// Cramér–Rao bound `crb_sigma = F^{-1/2}`.
///
/// In internal units (`xi = 1`) the raw value `fisher` and the scaled
/// `fisher_scaled = F * xi^2` coincide numerically; both are kept so that
/// serialized output is explicit about the convention.
#[derive(Debug, Clone, Serialize)]
pub struct FisherReport {
    pub fisher: f64,
    pub fisher_scaled: f64,
    pub crb_sigma: f64,
    pub model: StatModel,
    pub units: &'static str,
    /// Parameter echo of the inputs that produced this value.
    pub provenance: Value,
    /// Non-fatal conditions noticed during evaluation.
    pub warnings: Vec<String>,
    /// Auxiliary scalars (partial sums, documented constants, diagnostics).
    pub extras: BTreeMap<String, f64>,
}

impl FisherReport {
    pub fn new(fisher: f64, model: StatModel, provenance: Value) -> Result<Self, ReportError> {
        if !(fisher.is_finite() && fisher > 0.0) {
            return Err(ReportError::InvalidFisher(fisher));
        }
        Ok(Self {
            fisher,
            fisher_scaled: fisher,
            crb_sigma: fisher.powf(-0.5),
            model,
            units: UNITS_LABEL,
            provenance,
            warnings: Vec::new(),
            extras: BTreeMap::new(),
        })
    }

    pub fn with_warning(mut self, warning: impl Into<String>) -> Self {
        self.warnings.push(warning.into());
        self
    }

    pub fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extras.insert(key.to_string(), value);
        self
    }
}
