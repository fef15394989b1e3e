//! Event calculus and Monte Carlo scenario generation.
//!
//! A [`Scenario`] lists which events hit which exposure and when. The
//! Base Scenario has no occurrences. [`sampler`] draws scenario sets from
//! per-cluster hazards; [`counting`] gives the closed-form sizes of the
//! scenario space.

pub mod catalog;
pub mod counting;
pub mod sampler;

use serde::{Deserialize, Serialize};

use crate::asset_model::ExposureId;
use crate::money::{Money, Month};

pub use catalog::{Affects, Effect, EventCode, EventKind, ExposureType, Polarity, TemporalClass};
pub use counting::{scenario_count_if, scenario_count_when};
pub use sampler::{generate_scenario, generate_scenarios, scenario_seed, GeneratorConfig};

// ---------------------------------------------------------------------------
// Gating symbols
// ---------------------------------------------------------------------------

/// Kronecker delta: 1 iff `a == b`.
pub fn kronecker(a: i64, b: i64) -> i64 {
    (a == b) as i64
}

/// Heaviside step: 1 iff `a >= b`.
pub fn heaviside(a: i64, b: i64) -> i64 {
    (a >= b) as i64
}

// ---------------------------------------------------------------------------
// Occurrences and scenarios
// ---------------------------------------------------------------------------

/// Magnitude attached to an occurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    /// Spot cash `value` arriving at `arrival`, with recovery costs `cost`
    /// paid at the same month.
    Recovery { value: Money, arrival: Month, cost: Money },
    /// Additive annual rate applied to the outstanding capital from the
    /// occurrence month on.
    Spread { annual_rate: f64 },
}

/// One event hitting one exposure. Times are on the deal clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventOccurrence {
    pub code: EventCode,
    pub exposure: ExposureId,
    pub time: Month,
    /// Month the capital leg is cut from; `None` if untouched.
    pub capital_time: Option<Month>,
    /// Month the interest leg is cut from; `None` if untouched.
    pub interest_time: Option<Month>,
    pub payload: Option<Payload>,
}

impl EventOccurrence {
    /// Occurrence with leg times taken from the event kind.
    pub fn new(code: EventCode, exposure: ExposureId, time: Month) -> Self {
        let kind = code.kind();
        Self::affecting(code, exposure, time, kind.affects)
    }

    /// Occurrence cutting the given legs at `time`.
    pub fn affecting(code: EventCode, exposure: ExposureId, time: Month, affects: Affects) -> Self {
        let gates = matches!(code.kind().effect(), Effect::Gate);
        Self {
            code,
            exposure,
            time,
            capital_time: (gates && affects.capital()).then_some(time),
            interest_time: (gates && affects.interest()).then_some(time),
            payload: None,
        }
    }

    pub fn with_payload(mut self, payload: Payload) -> Self {
        self.payload = Some(payload);
        self
    }

    /// Spot recovery of `value` at `arrival`, costing `cost`.
    pub fn with_recovery(self, value: Money, arrival: Month, cost: Money) -> Self {
        self.with_payload(Payload::Recovery { value, arrival, cost })
    }
}

/// An excessive cost (fine, legal fee) charged to the deal at `time`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expense {
    pub time: Month,
    pub amount: Money,
}

/// One sampled world.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scenario {
    pub id: u64,
    pub seed: u64,
    /// Sorted by exposure, then time, then event code.
    pub occurrences: Vec<EventOccurrence>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expenses: Vec<Expense>,
    /// Months by which the scenario endowment trails the base endowment.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub endowment_delay: Month,
}

fn is_zero(m: &Month) -> bool {
    *m == 0
}

impl Scenario {
    /// The Base Scenario: nothing happens.
    pub fn base() -> Self {
        Self::default()
    }

    pub fn new(id: u64, mut occurrences: Vec<EventOccurrence>) -> Self {
        sort_occurrences(&mut occurrences);
        Self { id, seed: 0, occurrences, expenses: Vec::new(), endowment_delay: 0 }
    }

    pub fn with_expenses(mut self, expenses: Vec<Expense>) -> Self {
        self.expenses = expenses;
        self
    }

    pub fn is_base(&self) -> bool {
        self.occurrences.is_empty() && self.expenses.is_empty() && self.endowment_delay == 0
    }

    /// Occurrences hitting one exposure, in time order.
    pub fn occurrences_of(&self, id: ExposureId) -> &[EventOccurrence] {
        let lo = self.occurrences.partition_point(|o| o.exposure < id);
        let hi = self.occurrences.partition_point(|o| o.exposure <= id);
        &self.occurrences[lo..hi]
    }
}

pub(crate) fn sort_occurrences(occ: &mut [EventOccurrence]) {
    occ.sort_by_key(|o| (o.exposure, o.time, o.code));
}

/// First month any event touches exposure `id`, if any.
pub fn first_event_time(scn: &Scenario, id: ExposureId) -> Option<Month> {
    scn.occurrences_of(id).iter().map(|o| o.time).min()
}

/// A sampled set of scenarios with the seed that regenerates it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub master_seed: u64,
    pub scenarios: Vec<Scenario>,
}

impl ScenarioSet {
    pub fn new(master_seed: u64, scenarios: Vec<Scenario>) -> Self {
        Self { master_seed, scenarios }
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    /// Audit dump: `scenario_id,k,n,event,t,payload` with 1-based `k,n`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> crate::error::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scenario_id", "k", "n", "event", "t", "payload"])?;
        for s in &self.scenarios {
            for o in &s.occurrences {
                let payload = match &o.payload {
                    None => String::new(),
                    Some(Payload::Recovery { value, arrival, cost }) => {
                        format!("recovery={value}@{arrival};cost={cost}")
                    }
                    Some(Payload::Spread { annual_rate }) => format!("spread={annual_rate}"),
                };
                w.write_record([
                    s.id.to_string(),
                    (o.exposure.k + 1).to_string(),
                    (o.exposure.n + 1).to_string(),
                    o.code.to_string(),
                    o.time.to_string(),
                    payload,
                ])?;
            }
            for e in &s.expenses {
                w.write_record([
                    s.id.to_string(),
                    String::new(),
                    String::new(),
                    "expense".into(),
                    e.time.to_string(),
                    e.amount.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gating_symbols() {
        assert_eq!(kronecker(2, 2), 1);
        assert_eq!(kronecker(2, 3), 0);
        assert_eq!(kronecker(0, 0), 1);
        assert_eq!(heaviside(3, 3), 1);
        assert_eq!(heaviside(2, 3), 0);
        assert_eq!(heaviside(5, 3), 1);
    }

    #[test]
    fn first_event_is_the_minimum() {
        let id = ExposureId::new(0, 0);
        let s = Scenario::new(
            1,
            vec![EventOccurrence::new(EventCode::De, id, 5), EventOccurrence::new(EventCode::Pe, id, 3)],
        );
        assert_eq!(first_event_time(&s, id), Some(3));
        assert_eq!(first_event_time(&Scenario::base(), id), None);
        let t = Scenario::new(2, vec![EventOccurrence::new(EventCode::Trl, id, 7)]);
        assert_eq!(first_event_time(&t, id), Some(7));
    }

    #[test]
    fn occurrences_are_grouped_by_exposure() {
        let a = ExposureId::new(0, 0);
        let b = ExposureId::new(0, 1);
        let s = Scenario::new(
            0,
            vec![
                EventOccurrence::new(EventCode::De, b, 2),
                EventOccurrence::new(EventCode::Pe, a, 4),
                EventOccurrence::new(EventCode::De, a, 1),
            ],
        );
        assert_eq!(s.occurrences_of(a).iter().map(|o| o.time).collect::<Vec<_>>(), vec![1, 4]);
        assert_eq!(s.occurrences_of(b).len(), 1);
        assert!(s.occurrences_of(ExposureId::new(1, 0)).is_empty());
    }

    #[test]
    fn leg_times_follow_the_kind() {
        let id = ExposureId::new(0, 0);
        let de = EventOccurrence::new(EventCode::De, id, 2);
        assert_eq!((de.capital_time, de.interest_time), (Some(2), Some(2)));
        let eu = EventOccurrence::new(EventCode::Eu, id, 2);
        assert_eq!((eu.capital_time, eu.interest_time), (None, None));
        let cap = EventOccurrence::affecting(EventCode::De, id, 2, Affects::Capital);
        assert_eq!((cap.capital_time, cap.interest_time), (Some(2), None));
    }
}
