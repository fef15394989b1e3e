//! Seeded Monte Carlo sampler.
//!
//! Each enabled event kind gets an independent discrete monthly hazard per
//! exposure; the first occurrence month is drawn by inverting the truncated
//! geometric law. Defaults may optionally share a one-factor Gaussian
//! copula within a cluster. Scenario `id` is drawn from its own ChaCha
//! stream seeded by `hash(master, id)`, so any worker count yields the same
//! set bit for bit.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::catalog::{Affects, Effect, EventCode, ExposureType};
use super::{sort_occurrences, EventOccurrence, Expense, Payload, Scenario, ScenarioSet};
use crate::asset_model::{Deal, ExposureId};
use crate::error::{PealError, Result, Rule, Violation};
use crate::money::{Money, Month};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Spot recovery attached to a gating event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoveryRule {
    /// Lower bound of the recovered fraction of the capital at risk.
    pub rate_min: f64,
    /// Upper bound of the recovered fraction; the draw is uniform.
    pub rate_max: f64,
    /// Months between the event and the recovery.
    pub lag: Month,
    /// Recovery costs as a fraction of the recovered value.
    #[serde(default)]
    pub cost_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRule {
    /// Monthly probability of the event while the exposure is alive.
    pub hazard: f64,
    /// Overrides the legs the event cuts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affects: Option<Affects>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery: Option<RecoveryRule>,
    /// Annual rate shift carried by rate events.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
}

impl EventRule {
    pub fn hazard(hazard: f64) -> Self {
        Self { hazard, affects: None, recovery: None, spread: None }
    }
}

/// Risk profile shared by the exposures of one cluster.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterProfile {
    #[serde(default)]
    pub events: BTreeMap<EventCode, EventRule>,
    /// Asset correlation of default times in a one-factor Gaussian copula.
    #[serde(default)]
    pub default_correlation: f64,
}

/// Excessive cost charged at `month` with the given probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpenseRule {
    pub month: Month,
    pub amount: Money,
    pub probability: f64,
}

/// With `probability`, the scenario endowment arrives `months` late.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndowmentDelayRule {
    pub probability: f64,
    pub months: Month,
}

fn default_scenarios() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    #[serde(default = "default_scenarios")]
    pub scenarios: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub clusters: BTreeMap<String, ClusterProfile>,
    #[serde(default)]
    pub allow_extreme: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expenses: Vec<ExpenseRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endowment_delay: Option<EndowmentDelayRule>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            scenarios: default_scenarios(),
            seed: 0,
            clusters: BTreeMap::new(),
            allow_extreme: false,
            expenses: Vec::new(),
            endowment_delay: None,
        }
    }
}

impl GeneratorConfig {
    /// Config with one cluster profile used by every portfolio named `name`.
    pub fn single(name: &str, profile: ClusterProfile, scenarios: usize, seed: u64) -> Self {
        let mut clusters = BTreeMap::new();
        clusters.insert(name.to_string(), profile);
        Self { scenarios, seed, clusters, ..Self::default() }
    }

    /// Structural problems with the config for `deal`.
    pub fn validate(&self, deal: &Deal, exposure_type: Option<ExposureType>) -> Vec<Violation> {
        let mut out = Vec::new();
        let bad = |loc: String, msg: String| Violation::new(Rule::Generator, loc, msg);
        for (k, p) in deal.portfolios().iter().enumerate() {
            if !self.clusters.contains_key(&p.profile) {
                out.push(bad(
                    format!("portfolios[{k}].profile"),
                    format!("no rate parameters for cluster profile `{}`", p.profile),
                ));
            }
        }
        for (name, profile) in &self.clusters {
            let loc = |s: &str| format!("generator.clusters.{name}{s}");
            if !(0.0..1.0).contains(&profile.default_correlation) {
                out.push(bad(loc(".default_correlation"), "must lie in [0, 1)".into()));
            }
            for (code, rule) in &profile.events {
                let l = |s: &str| loc(&format!(".events.{code}{s}"));
                if let Some(t) = exposure_type {
                    if !t.allows(*code, self.allow_extreme) {
                        let what = if t.extreme_events().contains(code) { "an extreme event not enabled" } else { "not listed" };
                        out.push(bad(l(""), format!("`{code}` is {what} for exposure type {t}")));
                    }
                }
                if !(0.0..=1.0).contains(&rule.hazard) {
                    out.push(bad(l(".hazard"), format!("hazard {} outside [0, 1]", rule.hazard)));
                }
                if let Some(r) = &rule.recovery {
                    if *code == EventCode::Pe {
                        out.push(bad(l(".recovery"), "prepayment always returns the capital at risk".into()));
                    }
                    if !(r.rate_min >= 0.0 && r.rate_min <= r.rate_max) {
                        out.push(bad(l(".recovery"), "need 0 ≤ rate_min ≤ rate_max".into()));
                    }
                    if r.cost_rate < 0.0 {
                        out.push(bad(l(".recovery.cost_rate"), "must be non-negative".into()));
                    }
                }
                if code.kind().effect() == Effect::RateShift && rule.spread.is_none() {
                    out.push(bad(l(".spread"), "rate events need an annual spread".into()));
                }
            }
        }
        for (i, e) in self.expenses.iter().enumerate() {
            if !(0.0..=1.0).contains(&e.probability) || e.amount < 0 {
                out.push(bad(format!("generator.expenses[{i}]"), "need probability in [0,1] and amount ≥ 0".into()));
            }
        }
        if let Some(d) = &self.endowment_delay {
            if !(0.0..=1.0).contains(&d.probability) {
                out.push(bad("generator.endowment_delay".into(), "probability outside [0, 1]".into()));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Per-scenario seed derived from the master seed and the scenario id.
pub fn scenario_seed(master: u64, id: u64) -> u64 {
    splitmix64(master ^ splitmix64(id.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// First month in `1..=horizon` at which a monthly hazard `p` fires, given
/// a uniform draw `u`, or `None` if it never fires within the horizon.
pub fn first_month(u: f64, p: f64, horizon: Month) -> Option<Month> {
    if p <= 0.0 || horizon == 0 {
        return None;
    }
    if p >= 1.0 {
        return Some(1);
    }
    let m = ((1.0 - u).ln() / (1.0 - p).ln()).ceil().max(1.0);
    (m <= horizon as f64).then_some(m as Month)
}

/// Draw the whole scenario set for `deal`.
pub fn generate_scenarios(
    deal: &Deal,
    config: &GeneratorConfig,
    exposure_type: Option<ExposureType>,
) -> Result<ScenarioSet> {
    if config.scenarios == 0 {
        return Err(PealError::NoScenarios);
    }
    let violations = config.validate(deal, exposure_type);
    if !violations.is_empty() {
        return Err(PealError::Violations(violations));
    }
    let scenarios = (0..config.scenarios as u64)
        .into_par_iter()
        .map(|id| generate_scenario(deal, config, id))
        .collect();
    Ok(ScenarioSet::new(config.seed, scenarios))
}

/// Draw scenario `id` alone; the config must already be valid for `deal`.
pub fn generate_scenario(deal: &Deal, config: &GeneratorConfig, id: u64) -> Scenario {
    let seed = scenario_seed(config.seed, id);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::standard();
    let mut occurrences = Vec::new();
    for (k, portfolio) in deal.portfolios().iter().enumerate() {
        let profile = match config.clusters.get(&portfolio.profile) {
            Some(p) => p,
            None => continue,
        };
        let rho = profile.default_correlation;
        let factor: f64 = if rho > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
        for n in 0..portfolio.exposures.len() {
            let id = ExposureId::new(k, n);
            sample_exposure(deal, id, profile, rho, factor, &normal, &mut rng, &mut occurrences);
        }
    }
    let mut expenses = Vec::new();
    for e in &config.expenses {
        if rng.random::<f64>() < e.probability {
            expenses.push(Expense { time: e.month, amount: e.amount });
        }
    }
    let mut endowment_delay = 0;
    if let Some(d) = &config.endowment_delay {
        if rng.random::<f64>() < d.probability {
            endowment_delay = d.months;
        }
    }
    sort_occurrences(&mut occurrences);
    Scenario { id, seed, occurrences, expenses, endowment_delay }
}

#[allow(clippy::too_many_arguments)]
fn sample_exposure(
    deal: &Deal,
    id: ExposureId,
    profile: &ClusterProfile,
    rho: f64,
    factor: f64,
    normal: &Normal,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<EventOccurrence>,
) {
    let offset = deal.pooling_month(id.k);
    let duration = deal.exposure(id).duration();
    let mut drawn: Vec<(EventCode, Month)> = Vec::new();
    for (&code, rule) in &profile.events {
        if code == EventCode::Trl {
            continue;
        }
        let u = if code == EventCode::De && rho > 0.0 {
            let eps: f64 = rng.sample(StandardNormal);
            normal.cdf(rho.sqrt() * factor + (1.0 - rho).sqrt() * eps)
        } else {
            rng.random::<f64>()
        };
        if let Some(m) = first_month(u, rule.hazard, duration) {
            drawn.push((code, offset + m));
        }
    }
    let first_gate = drawn
        .iter()
        .filter(|(c, _)| c.kind().effect() == Effect::Gate)
        .min_by_key(|(c, t)| (*t, *c))
        .copied();

    let mut gate_end = None;
    for &(code, t) in &drawn {
        let rule = &profile.events[&code];
        let affects = rule.affects.unwrap_or(code.kind().affects);
        let mut occ = EventOccurrence::affecting(code, id, t, affects);
        match code.kind().effect() {
            Effect::Gate if first_gate == Some((code, t)) => {
                let at_risk = capital_at_risk(deal, id, t);
                if code == EventCode::Pe {
                    occ = occ.with_recovery(at_risk, t, 0);
                } else if let Some(r) = &rule.recovery {
                    let (value, cost) = draw_recovery(r, at_risk, rng);
                    occ = occ.with_recovery(value, t + r.lag, cost);
                    gate_end = Some(t + r.lag);
                } else {
                    gate_end = Some(offset + duration + 1);
                }
            }
            Effect::RateShift => {
                occ = occ.with_payload(Payload::Spread { annual_rate: rule.spread.unwrap_or(0.0) });
            }
            Effect::Spot => {
                if let Some(r) = &rule.recovery {
                    let (value, cost) = draw_recovery(r, capital_at_risk(deal, id, t), rng);
                    occ = occ.with_recovery(value, t + r.lag, cost);
                }
            }
            _ => {}
        }
        out.push(occ);
    }

    if let (Some((_, t_df)), Some(end), Some(rule)) = (first_gate, gate_end, profile.events.get(&EventCode::Trl)) {
        let window = end.min(deal.exposure_end(id) + 1).saturating_sub(t_df + 1);
        if let Some(m) = first_month(rng.random::<f64>(), rule.hazard, window) {
            out.push(EventOccurrence::new(EventCode::Trl, id, t_df + m));
        }
    }
}

fn draw_recovery(r: &RecoveryRule, at_risk: Money, rng: &mut ChaCha8Rng) -> (Money, Money) {
    let rate = r.rate_min + (r.rate_max - r.rate_min) * rng.random::<f64>();
    let value = (rate * at_risk as f64).round() as Money;
    let cost = (r.cost_rate * value as f64).round() as Money;
    (value, cost)
}

/// Capital still due from month `t` on: `Σ_{τ≥t} C_kn(τ)`.
pub fn capital_at_risk(deal: &Deal, id: ExposureId, t: Month) -> Money {
    let local = t.saturating_sub(deal.pooling_month(id.k));
    deal.exposure(id).capital().iter().skip(local).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::desk_deal;

    fn profile(code: EventCode, hazard: f64) -> ClusterProfile {
        let mut events = BTreeMap::new();
        events.insert(code, EventRule::hazard(hazard));
        ClusterProfile { events, default_correlation: 0.0 }
    }

    #[test]
    fn zero_rates_give_base_scenarios() {
        let cfg = GeneratorConfig::single("base", profile(EventCode::De, 0.0), 50, 7);
        let set = generate_scenarios(&desk_deal(), &cfg, None).unwrap();
        assert_eq!(set.len(), 50);
        assert!(set.scenarios.iter().all(Scenario::is_base));
    }

    #[test]
    fn certain_default_hits_month_one() {
        let cfg = GeneratorConfig::single("base", profile(EventCode::De, 1.0), 20, 7);
        let set = generate_scenarios(&desk_deal(), &cfg, None).unwrap();
        for s in &set.scenarios {
            assert_eq!(s.occurrences.len(), 2);
            assert!(s.occurrences.iter().all(|o| o.code == EventCode::De && o.time == 1));
        }
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let mut p = profile(EventCode::De, 0.2);
        p.events.get_mut(&EventCode::De).unwrap().recovery =
            Some(RecoveryRule { rate_min: 0.2, rate_max: 0.6, lag: 2, cost_rate: 0.1 });
        p.events.insert(EventCode::Trl, EventRule::hazard(0.3));
        p.default_correlation = 0.3;
        let cfg = GeneratorConfig::single("base", p, 200, 99);
        let a = serde_json::to_vec(&generate_scenarios(&desk_deal(), &cfg, None).unwrap()).unwrap();
        let b = serde_json::to_vec(&generate_scenarios(&desk_deal(), &cfg, None).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn returns_stay_inside_the_exposure_life() {
        let mut p = profile(EventCode::De, 0.3);
        p.events.get_mut(&EventCode::De).unwrap().recovery =
            Some(RecoveryRule { rate_min: 0.1, rate_max: 0.5, lag: 30, cost_rate: 0.0 });
        p.events.insert(EventCode::Trl, EventRule::hazard(0.9));
        let deal = desk_deal();
        let set = generate_scenarios(&deal, &GeneratorConfig::single("base", p, 200, 3), None).unwrap();
        for s in &set.scenarios {
            for o in &s.occurrences {
                assert!(o.time <= deal.exposure_end(o.exposure), "{o:?}");
            }
            crate::inbound_blocks::inbound_blocks(&deal, s).unwrap();
        }
    }

    #[test]
    fn first_month_inverts_the_geometric_law() {
        assert_eq!(first_month(0.0, 0.5, 10), Some(1));
        assert_eq!(first_month(0.49, 0.5, 10), Some(1));
        assert_eq!(first_month(0.51, 0.5, 10), Some(2));
        assert_eq!(first_month(0.999, 0.5, 3), None);
        assert_eq!(first_month(0.3, 0.0, 3), None);
        assert_eq!(first_month(0.9, 1.0, 3), Some(1));
    }

    #[test]
    fn prepayment_pays_the_capital_at_risk() {
        let cfg = GeneratorConfig::single("base", profile(EventCode::Pe, 1.0), 1, 1);
        let s = generate_scenario(&desk_deal(), &cfg, 0);
        let e1 = &s.occurrences_of(ExposureId::new(0, 0))[0];
        assert_eq!(e1.payload, Some(Payload::Recovery { value: 100, arrival: 1, cost: 0 }));
    }

    #[test]
    fn validation_catches_type_and_profile_problems() {
        let cfg = GeneratorConfig::single("other", profile(EventCode::Tm, 0.1), 1, 1);
        let v = cfg.validate(&desk_deal(), Some(ExposureType::CL));
        assert_eq!(v.len(), 2);
        assert!(generate_scenarios(&desk_deal(), &cfg, Some(ExposureType::CL)).is_err());
    }
}
