//! Error and violation types shared by every stage of the engine.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::money::{Money, Month};

/// Which structural rule a [`Violation`] breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Schema,
    Version,
    Portfolio,
    Schedule,
    Timeline,
    Generator,
    VirtualPositions,
    SliceCount,
    HorizontalPartition,
    VerticalPartition,
    SeniorReserve,
    Coverage,
    PositionCount,
    FrequencyValue,
    FrequencyCount,
    HorizonDivisibility,
    VerticalRule,
    MultipleRule,
    HorizontalRule,
    GCheck,
    CvaCrossing,
    Optimization,
}

impl Rule {
    /// Compliance verdicts are reported, not fatal; `--enforce` turns them
    /// into a failing exit code.
    pub fn is_compliance(self) -> bool {
        matches!(self, Rule::VerticalRule | Rule::MultipleRule | Rule::HorizontalRule | Rule::GCheck | Rule::CvaCrossing)
    }
}

/// One broken invariant, with a location a human or a UI can point at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub location: String,
    pub message: String,
}

impl Violation {
    pub fn new(rule: Rule, location: impl Into<String>, message: impl Into<String>) -> Self {
        Self { rule, location: location.into(), message: message.into() }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:?}] {}: {}", self.rule, self.location, self.message)
    }
}

#[derive(Debug, Error)]
pub enum PealError {
    #[error("invalid deal: {0}")]
    InvalidDeal(String),

    #[error("{} violation(s): {}", .0.len(), summarize(.0))]
    Violations(Vec<Violation>),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("portfolio {portfolio} mixes exposure durations; the timed scenario count needs one duration per portfolio")]
    MixedDurations { portfolio: usize },

    #[error("unknown event code `{0}`")]
    UnknownEvent(String),

    #[error("event `{code}` is not listed for exposure type {exposure_type}")]
    EventNotInType { code: String, exposure_type: String },

    #[error("return to life at month {rtl} precedes the default at month {default}")]
    ReturnBeforeDefault { rtl: Month, default: Month },

    #[error("design infeasible at month {month}: mean super senior amount {sse} exceeds the senior virtual position {senior}")]
    SeniorReserveExceeded { month: Month, sse: Money, senior: Money },

    #[error("frequency {0} is not one of 1, 2, 3, 4, 6, 12 payments per year")]
    InvalidFrequency(u32),

    #[error("position `{0}` has zero thickness")]
    ZeroThickness(String),

    #[error("no risk weight for component {component} ({quality})")]
    MissingRiskWeight { component: usize, quality: String },

    #[error("the attachment/detachment thickness needs a horizontal design; use the per-position thickness for vertical slices")]
    VerticalDesign,

    #[error("invalid cash flows: {0}")]
    InvalidCashflows(String),

    #[error("at least one scenario is required")]
    NoScenarios,

    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("conservation broken: {0}")]
    Conservation(String),

    #[error("{step}: {source}")]
    Step {
        step: &'static str,
        #[source]
        source: Box<PealError>,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn summarize(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl PealError {
    /// Wrap an error with the pipeline step that raised it.
    pub fn in_step(self, step: &'static str) -> Self {
        PealError::Step { step, source: Box::new(self) }
    }

    /// Violations carried by this error, looking through step context.
    pub fn violations(&self) -> Option<&[Violation]> {
        match self {
            PealError::Violations(v) => Some(v),
            PealError::Step { source, .. } => source.violations(),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, PealError>;

/// Extension for attaching a step name to a `Result`.
pub trait StepContext<T> {
    fn step(self, step: &'static str) -> Result<T>;
}

impl<T> StepContext<T> for Result<T> {
    fn step(self, step: &'static str) -> Result<T> {
        self.map_err(|e| e.in_step(step))
    }
}
