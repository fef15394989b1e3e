//! Deal file schema and validation.
//!
//! A deal file is one JSON document:
//!
//! ```json
//! {
//!   "peal_version": "1.0",
//!   "name": "desk",
//!   "tp": 1,
//!   "portfolios": [
//!     { "pooling_month": 0, "profile": "base",
//!       "exposures": [ { "capital": [0, 100], "interest": [0, 5] } ] }
//!   ],
//!   "design": { "hs": [3,1,1], "h": [0,0.5,0.5,1,1], "vs": [1,1,1,1,1],
//!               "v": [1,1,1,1,1], "costs": [[1,2]], "notes": [[3],[4],[5]] },
//!   "frequencies": 12,
//!   "generator": { "scenarios": 1000, "seed": 7,
//!                  "clusters": { "base": { "events": { "de": { "hazard": 0.01 } } } } }
//! }
//! ```
//!
//! `frequencies` is either one value for every vertical component or a list
//! with one value per component. Optional keys: `islamic`, `exposure_type`,
//! `endowment`, `alpha` (0.95), `eta` (0.02), `risk_weights`, `cpy`,
//! `optimization`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::asset_model::{Deal, Exposure, Portfolio};
use crate::error::{PealError, Result, Rule, Violation};
use crate::features::capital::RiskWeights;
use crate::gross_dimensioning::{validate_frequencies, FrequencySchedule};
use crate::money::{Money, Month};
use crate::optimizer::OptimizationSpec;
use crate::scenario_engine::{ExposureType, GeneratorConfig};
use crate::tranching::Endowment;
use crate::waterfall_design::{validate_design, WaterfallDesign};

pub const PEAL_VERSION: &str = "1.0";

fn default_alpha() -> f64 {
    0.95
}

fn default_eta() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExposureSpec {
    pub capital: Vec<Money>,
    #[serde(default)]
    pub interest: Vec<Money>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioSpec {
    #[serde(default)]
    pub pooling_month: Month,
    pub profile: String,
    pub exposures: Vec<ExposureSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrequencySpec {
    Uniform(u32),
    PerComponent(Vec<u32>),
}

impl FrequencySpec {
    pub fn schedule(&self, d: &WaterfallDesign) -> FrequencySchedule {
        match self {
            FrequencySpec::Uniform(w) => FrequencySchedule::uniform(*w, d.v_count()),
            FrequencySpec::PerComponent(v) => FrequencySchedule { omega: v.clone() },
        }
    }
}

/// The deal file as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DealFile {
    pub peal_version: String,
    #[serde(default)]
    pub name: String,
    pub tp: Month,
    #[serde(default)]
    pub islamic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exposure_type: Option<ExposureType>,
    pub portfolios: Vec<PortfolioSpec>,
    pub design: WaterfallDesign,
    pub frequencies: FrequencySpec,
    #[serde(default)]
    pub endowment: Endowment,
    #[serde(default)]
    pub generator: GeneratorConfig,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub risk_weights: RiskWeights,
    /// Share of the total note price paid for each note; sums to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpy: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimization: Option<OptimizationSpec>,
}

/// A deal file turned into engine objects.
#[derive(Debug, Clone)]
pub struct ParsedDeal {
    pub file: DealFile,
    pub deal: Deal,
    pub design: WaterfallDesign,
    pub frequencies: FrequencySchedule,
    /// Frequency rule verdicts; reported, not fatal.
    pub compliance: Vec<Violation>,
}

impl ParsedDeal {
    /// Canonical JSON of the file, the input to the run hash.
    pub fn canonical_json(&self) -> Vec<u8> {
        serde_json::to_vec(&self.file).expect("deal file serializes")
    }
}

pub fn parse_deal(path: &Path) -> Result<ParsedDeal> {
    let text = std::fs::read_to_string(path)?;
    parse_deal_str(&text)
}

pub fn parse_deal_str(text: &str) -> Result<ParsedDeal> {
    let file: DealFile = serde_json::from_str(text).map_err(|e| {
        PealError::Violations(vec![Violation::new(
            Rule::Schema,
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )])
    })?;
    validate_file(file)
}

/// Validate every part of a deal file, collecting all violations.
pub fn validate_file(file: DealFile) -> Result<ParsedDeal> {
    let mut out = Vec::new();
    if file.peal_version != PEAL_VERSION {
        return Err(PealError::Violations(vec![Violation::new(
            Rule::Version,
            "peal_version",
            format!("unsupported version `{}`; this engine reads {PEAL_VERSION}", file.peal_version),
        )]));
    }

    let mut portfolios = Vec::new();
    for (k, p) in file.portfolios.iter().enumerate() {
        let mut exposures = Vec::new();
        for (n, e) in p.exposures.iter().enumerate() {
            match Exposure::new(e.capital.clone(), e.interest.clone()) {
                Ok(x) => exposures.push(x),
                Err(err) => out.push(Violation::new(
                    Rule::Schedule,
                    format!("portfolios[{k}].exposures[{n}]"),
                    err.to_string(),
                )),
            }
        }
        portfolios.push(Portfolio::new(p.pooling_month, exposures, p.profile.clone()));
    }
    let deal = if out.is_empty() {
        match Deal::new(portfolios, file.tp, file.islamic) {
            Ok(d) => Some(d),
            Err(err) => {
                let rule = if matches!(&err, PealError::InvalidDeal(m) if m.contains("TP")) { Rule::Timeline } else { Rule::Portfolio };
                out.push(Violation::new(rule, "portfolios", err.to_string()));
                None
            }
        }
    } else {
        None
    };

    let design = file.design.clone();
    let design_violations = validate_design(&design);
    let design_ok = design_violations.is_empty();
    out.extend(design_violations);

    let frequencies = file.frequencies.schedule(&design);
    let mut compliance = Vec::new();
    if design_ok {
        for v in validate_frequencies(&design, &frequencies, Some(file.tp)) {
            if v.rule.is_compliance() {
                compliance.push(v);
            } else {
                out.push(v);
            }
        }
    }

    if let Some(deal) = &deal {
        out.extend(file.generator.validate(deal, file.exposure_type));
    }
    if !(file.alpha > 0.0 && file.alpha < 1.0) {
        out.push(Violation::new(Rule::Schema, "alpha", format!("{} must lie strictly between 0 and 1", file.alpha)));
    }
    if !file.eta.is_finite() || file.eta <= -12.0 {
        out.push(Violation::new(Rule::Schema, "eta", format!("{} is not a usable annual rate", file.eta)));
    }
    if file.endowment.base.iter().any(|&z| z < 0) {
        out.push(Violation::new(Rule::Schema, "endowment.base", "endowment amounts must be non-negative"));
    }
    if let Some(cpy) = &file.cpy {
        if cpy.len() != design.notes.len() {
            out.push(Violation::new(
                Rule::Schema,
                "cpy",
                format!("need one share per note ({}), got {}", design.notes.len(), cpy.len()),
            ));
        }
        let sum: f64 = cpy.iter().sum();
        if cpy.iter().any(|&c| !(0.0..=1.0).contains(&c)) || (sum - 1.0).abs() > 1e-9 {
            out.push(Violation::new(Rule::Schema, "cpy", format!("shares must lie in [0, 1] and sum to 100%, got {:.4}%", sum * 100.0)));
        }
    }
    if let Some(opt) = &file.optimization {
        out.extend(opt.validate(&design, file.cpy.is_some()));
    }

    match deal {
        Some(deal) if out.is_empty() => Ok(ParsedDeal { file, deal, design, frequencies, compliance }),
        _ => Err(PealError::Violations(out)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = include_str!("../../deals/fig1_desk.json");

    fn with(f: impl FnOnce(&mut serde_json::Value)) -> String {
        let mut v: serde_json::Value = serde_json::from_str(FIG1).unwrap();
        f(&mut v);
        v.to_string()
    }

    fn violations(text: &str) -> Vec<Violation> {
        match parse_deal_str(text) {
            Err(PealError::Violations(v)) => v,
            other => panic!("expected violations, got {other:?}"),
        }
    }

    #[test]
    fn bundled_reference_deal_parses() {
        let p = parse_deal_str(FIG1).unwrap();
        assert_eq!(p.design.v_count(), 8);
        assert!(p.compliance.is_empty());
    }

    #[test]
    fn short_vertical_partition_names_the_component() {
        let text = with(|v| v["design"]["v"] = serde_json::json!([1, 1, 0.85, 0.05, 0.95, 0.05, 0.95, 0.05]));
        let v = violations(&text);
        assert!(v.iter().any(|x| x.rule == Rule::VerticalPartition && x.location.contains("HC3") && x.message.contains("90.0000%")));
    }

    #[test]
    fn empty_portfolio_list() {
        let v = violations(&with(|v| v["portfolios"] = serde_json::json!([])));
        assert!(v.iter().any(|x| x.message.contains("K ≥ 1 required")));
    }

    #[test]
    fn unknown_version_and_fields() {
        assert_eq!(violations(&with(|v| v["peal_version"] = "2.0".into()))[0].rule, Rule::Version);
        assert_eq!(violations(&with(|v| v["colour"] = "red".into()))[0].rule, Rule::Schema);
    }

    #[test]
    fn frequency_rule_breaches_are_compliance_only() {
        let text = with(|v| v["frequencies"] = serde_json::json!([12, 12, 12, 12, 12, 12, 4, 12]));
        let p = parse_deal_str(&text).unwrap();
        assert!(p.compliance.iter().any(|x| x.rule == Rule::HorizontalRule));
    }
}
