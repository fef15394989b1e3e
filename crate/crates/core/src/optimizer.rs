//! Search over the endowment, design percentages and frequency schedules.
//!
//! Every candidate is checked structurally before it is simulated and is
//! evaluated on the same scenario set, so two equal candidates always score
//! the same. The default strategy is a coordinate grid: each round sweeps
//! one coordinate at a time around the incumbent and then narrows the
//! endowment grid around the best value found.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asset_model::Deal;
use crate::deal_service::pipeline::{
    compliance_violations, design_features, evaluate, infeasibility, structural_violations, PreparedScenarios,
};
use crate::error::{Result, Rule, Violation};
use crate::features::capital::RiskWeights;
use crate::features::irr::IrrOutcome;
use crate::gross_dimensioning::FrequencySchedule;
use crate::money::Money;
use crate::tranching::Endowment;
use crate::waterfall_design::WaterfallDesign;

// ---------------------------------------------------------------------------
// Problem
// ---------------------------------------------------------------------------

/// Feature scalar to optimise. Note indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Objective {
    /// Minimise `Σ_y RCN_y(0)`.
    MinTotalCapital,
    /// Minimise `RCN_y(0)` of one note.
    MinNoteCapital { note: usize },
    /// Maximise the annual net IRR of one note.
    MaxNetIrr { note: usize },
    /// Minimise the mean lifetime total net loss.
    MinTflt,
    /// Minimise the mean lifetime loss summed over all notes.
    MinExpectedLoss,
}

impl Objective {
    fn note(&self) -> Option<usize> {
        match self {
            Objective::MinNoteCapital { note } | Objective::MaxNetIrr { note } => Some(*note),
            _ => None,
        }
    }
}

/// Evenly spaced grid of upfront endowments `z_b(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndowmentRange {
    pub min: Money,
    pub max: Money,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_steps() -> usize {
    5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    H,
    V,
}

/// One decision variable moving a group of percentages together: every
/// component in `set` takes the value `x`, every one in `complement` takes
/// `1 − x`. Components are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TiedWeights {
    pub kind: WeightKind,
    pub set: Vec<usize>,
    #[serde(default)]
    pub complement: Vec<usize>,
    pub values: Vec<f64>,
}

impl TiedWeights {
    fn apply(&self, d: &mut WaterfallDesign, x: f64) {
        let target = match self.kind {
            WeightKind::H => &mut d.h,
            WeightKind::V => &mut d.v,
        };
        for &i in &self.set {
            target[i - 1] = x;
        }
        for &i in &self.complement {
            target[i - 1] = 1.0 - x;
        }
    }
}

fn default_budget() -> usize {
    64
}

fn default_rounds() -> usize {
    3
}

/// The optimisation block of a deal file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizationSpec {
    pub objective: Objective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endowment: Option<EndowmentRange>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<TiedWeights>,
    /// Candidate schedules, one frequency per vertical component each.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frequencies: Vec<Vec<u32>>,
    /// Maximum number of candidate evaluations.
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
}

impl OptimizationSpec {
    /// Problems with the block itself, independent of any candidate.
    pub fn validate(&self, d: &WaterfallDesign, has_cpy: bool) -> Vec<Violation> {
        let mut out = Vec::new();
        let bad = |loc: String, msg: String| Violation::new(Rule::Optimization, loc, msg);
        if let Some(y) = self.objective.note() {
            if y == 0 || y > d.note_count() {
                out.push(bad("optimization.objective.note".into(), format!("N{y} does not exist")));
            }
        }
        if matches!(self.objective, Objective::MaxNetIrr { .. }) && !has_cpy {
            out.push(bad("optimization.objective".into(), "the net IRR needs `cpy` note price shares".into()));
        }
        if let Some(r) = &self.endowment {
            if r.min < 0 || r.max < r.min || r.steps < 1 {
                out.push(bad("optimization.endowment".into(), "need 0 ≤ min ≤ max and steps ≥ 1".into()));
            }
        }
        for (k, w) in self.weights.iter().enumerate() {
            let len = match w.kind {
                WeightKind::H => d.h.len(),
                WeightKind::V => d.v.len(),
            };
            if w.values.is_empty() || w.values.iter().any(|x| !(0.0..=1.0).contains(x)) {
                out.push(bad(format!("optimization.weights[{k}].values"), "need one or more values in [0, 1]".into()));
            }
            if w.set.is_empty() || w.set.iter().chain(&w.complement).any(|&i| i == 0 || i > len) {
                out.push(bad(format!("optimization.weights[{k}]"), format!("components must lie in 1..={len}")));
            }
        }
        if self.budget == 0 {
            out.push(bad("optimization.budget".into(), "need at least one evaluation".into()));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Candidates
// ---------------------------------------------------------------------------

/// One point of the search space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub endowment: Money,
    pub weights: Vec<f64>,
    /// Index into the frequency candidates; `None` keeps the deal's schedule.
    pub frequencies: Option<usize>,
}

impl Candidate {
    fn key(&self) -> String {
        let w: Vec<String> = self.weights.iter().map(|x| format!("{x:.12}")).collect();
        format!("{}|{}|{:?}", self.endowment, w.join(","), self.frequencies)
    }
}

/// Outcome of evaluating one candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateResult {
    pub id: usize,
    pub round: usize,
    pub candidate: Candidate,
    /// The objective in its natural sense; `None` when not simulated or undefined.
    pub objective: Option<f64>,
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl CandidateResult {
    /// Minimisation score.
    fn score(&self, sense: f64) -> f64 {
        self.objective.map_or(f64::INFINITY, |v| sense * v)
    }
}

/// Everything a strategy needs to evaluate candidates.
pub struct Problem<'a> {
    pub deal: &'a Deal,
    pub prepared: &'a PreparedScenarios,
    pub design: &'a WaterfallDesign,
    pub frequencies: &'a FrequencySchedule,
    pub endowment: &'a Endowment,
    pub alpha: f64,
    pub eta: f64,
    pub risk_weights: &'a RiskWeights,
    pub cpy: Option<&'a [f64]>,
    pub spec: &'a OptimizationSpec,
}

impl Problem<'_> {
    fn sense(&self) -> f64 {
        if matches!(self.spec.objective, Objective::MaxNetIrr { .. }) {
            -1.0
        } else {
            1.0
        }
    }

    /// The deal's own values as a candidate.
    pub fn initial(&self) -> Candidate {
        let endowment = match &self.spec.endowment {
            Some(r) => r.min,
            None => self.endowment.base.first().copied().unwrap_or(0),
        };
        let weights = self.spec.weights.iter().map(|w| w.values[0]).collect();
        let frequencies = (!self.spec.frequencies.is_empty()).then_some(0);
        Candidate { endowment, weights, frequencies }
    }

    /// Simulate one candidate on the shared scenario set.
    pub fn evaluate(&self, c: &Candidate) -> Result<(Option<f64>, Vec<Violation>)> {
        let mut design = self.design.clone();
        for (w, &x) in self.spec.weights.iter().zip(&c.weights) {
            w.apply(&mut design, x);
        }
        let frequencies = match c.frequencies {
            Some(i) => FrequencySchedule { omega: self.spec.frequencies[i].clone() },
            None => self.frequencies.clone(),
        };
        let mut endowment = self.endowment.clone();
        if endowment.base.is_empty() {
            endowment.base.push(0);
        }
        endowment.base[0] = c.endowment;

        let structural = structural_violations(&design, &frequencies, self.deal.tp());
        if !structural.is_empty() {
            return Ok((None, structural));
        }
        let ev = match evaluate(self.prepared, &design, &frequencies, &endowment, self.alpha, self.eta, None) {
            Ok(ev) => ev,
            Err(e) => return infeasibility(&e).map(|v| (None, v)).ok_or(e),
        };
        let features = match design_features(self.deal, &design, &ev, self.risk_weights, self.cpy) {
            Ok(f) => f,
            Err(e) => return infeasibility(&e).map(|v| (None, v)).ok_or(e),
        };
        let mut violations = compliance_violations(&ev, &features);
        let objective = match self.spec.objective {
            Objective::MinTotalCapital => Some(features.total_capital()),
            Objective::MinNoteCapital { note } => features.regulatory_capital[note - 1].first().copied(),
            Objective::MinTflt => Some(ev.tranching.margin.tflt),
            Objective::MinExpectedLoss => Some(ev.net.note_loss.iter().sum()),
            Objective::MaxNetIrr { note } => match features.irr.as_ref().map(|i| i.notes[note - 1].nirr) {
                Some(IrrOutcome::Solved(r)) => Some(r.annual),
                _ => {
                    violations.push(Violation::new(Rule::Optimization, format!("N{note}"), "net IRR has no solution"));
                    None
                }
            },
        };
        Ok((objective, violations))
    }

    fn run_batch(&self, batch: Vec<Candidate>, first_id: usize, round: usize) -> Result<Vec<CandidateResult>> {
        let outcomes = batch.par_iter().map(|c| self.evaluate(c)).collect::<Vec<_>>();
        batch
            .into_iter()
            .zip(outcomes)
            .enumerate()
            .map(|(k, (candidate, outcome))| {
                let (objective, violations) = outcome?;
                Ok(CandidateResult {
                    id: first_id + k,
                    round,
                    feasible: violations.is_empty() && objective.is_some(),
                    candidate,
                    objective,
                    violations,
                })
            })
            .collect()
    }
}

/// Whether `a` should replace the incumbent `b`.
fn better(a: &CandidateResult, b: &CandidateResult, sense: f64) -> bool {
    match (a.feasible, b.feasible) {
        (true, false) => true,
        (false, true) => false,
        (true, true) => a.score(sense) < b.score(sense),
        (false, false) => (a.violations.len(), a.score(sense)) < (b.violations.len(), b.score(sense)),
    }
}

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

/// A search strategy returns the evaluation trace in submission order.
pub trait SearchStrategy {
    fn search(&self, problem: &Problem<'_>) -> Result<Vec<CandidateResult>>;
}

/// Coordinate sweeps with endowment grid refinement.
#[derive(Debug, Clone, Copy, Default)]
pub struct CoordinateGrid;

fn grid(lo: Money, hi: Money, steps: usize) -> Vec<Money> {
    if steps <= 1 || hi == lo {
        return vec![lo];
    }
    let mut v: Vec<Money> = (0..steps)
        .map(|k| lo + ((hi - lo) as i128 * k as i128 / (steps - 1) as i128) as Money)
        .collect();
    v.dedup();
    v
}

impl SearchStrategy for CoordinateGrid {
    fn search(&self, problem: &Problem<'_>) -> Result<Vec<CandidateResult>> {
        let spec = problem.spec;
        let sense = problem.sense();
        let mut trace: Vec<CandidateResult> = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();

        let first = problem.initial();
        seen.insert(first.key(), 0);
        trace.extend(problem.run_batch(vec![first], 0, 0)?);
        let mut best = 0usize;
        let mut range = spec.endowment.as_ref().map(|r| (r.min, r.max));

        for round in 1..=spec.rounds.max(1) {
            let before = best;
            let coords = 1 + spec.weights.len() + 1;
            for coord in 0..coords {
                let incumbent = trace[best].candidate.clone();
                let options: Vec<Candidate> = match coord {
                    0 => match (range, &spec.endowment) {
                        (Some((lo, hi)), Some(r)) => grid(lo, hi, r.steps)
                            .into_iter()
                            .map(|z| Candidate { endowment: z, ..incumbent.clone() })
                            .collect(),
                        _ => Vec::new(),
                    },
                    c if c <= spec.weights.len() => spec.weights[c - 1]
                        .values
                        .iter()
                        .map(|&x| {
                            let mut w = incumbent.weights.clone();
                            w[c - 1] = x;
                            Candidate { weights: w, ..incumbent.clone() }
                        })
                        .collect(),
                    _ => (0..spec.frequencies.len())
                        .map(|i| Candidate { frequencies: Some(i), ..incumbent.clone() })
                        .collect(),
                };
                let mut batch = Vec::new();
                for c in options {
                    if trace.len() + batch.len() >= spec.budget {
                        break;
                    }
                    let slot = trace.len() + batch.len();
                    if let Entry::Vacant(e) = seen.entry(c.key()) {
                        e.insert(slot);
                        batch.push(c);
                    }
                }
                if batch.is_empty() {
                    continue;
                }
                let first_id = trace.len();
                trace.extend(problem.run_batch(batch, first_id, round)?);
                for k in first_id..trace.len() {
                    if better(&trace[k], &trace[best], sense) {
                        best = k;
                    }
                }
            }
            let mut narrowed = false;
            if let (Some((lo, hi)), Some(r)) = (range, &spec.endowment) {
                let step = if r.steps > 1 { (hi - lo) / (r.steps as Money - 1) } else { 0 };
                if step > 0 {
                    let z = trace[best].candidate.endowment;
                    range = Some(((z - step).max(r.min), (z + step).min(r.max)));
                    narrowed = true;
                }
            }
            if (best == before && !narrowed) || trace.len() >= spec.budget {
                break;
            }
        }
        Ok(trace)
    }
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    /// Id of the returned candidate in `trace`.
    pub best: usize,
    /// `false` when no evaluated candidate was feasible; `best` is then
    /// the least violating one.
    pub feasible: bool,
    pub trace: Vec<CandidateResult>,
}

impl OptimizationResult {
    pub fn best(&self) -> &CandidateResult {
        &self.trace[self.best]
    }

    /// `id,round,endowment,w1..,frequencies,objective,feasible,violations,first_violation`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let k = self.trace.first().map_or(0, |r| r.candidate.weights.len());
        let mut header: Vec<String> = vec!["id".into(), "round".into(), "endowment".into()];
        header.extend((1..=k).map(|i| format!("w{i}")));
        header.extend(["frequencies", "objective", "feasible", "violations", "first_violation"].map(String::from));
        w.write_record(&header)?;
        for r in &self.trace {
            let mut row = vec![r.id.to_string(), r.round.to_string(), r.candidate.endowment.to_string()];
            row.extend(r.candidate.weights.iter().map(|x| x.to_string()));
            row.push(r.candidate.frequencies.map(|i| (i + 1).to_string()).unwrap_or_default());
            row.push(r.objective.map(|x| x.to_string()).unwrap_or_default());
            row.push(r.feasible.to_string());
            row.push(r.violations.len().to_string());
            row.push(r.violations.first().map(|v| v.to_string()).unwrap_or_default());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run a strategy and pick the returned candidate.
pub fn optimize(problem: &Problem<'_>, strategy: &dyn SearchStrategy) -> Result<OptimizationResult> {
    let trace = strategy.search(problem)?;
    let sense = problem.sense();
    let mut best = 0;
    for k in 1..trace.len() {
        if better(&trace[k], &trace[best], sense) {
            best = k;
        }
    }
    let feasible = trace[best].feasible;
    Ok(OptimizationResult { best, feasible, trace })
}
