//! Exposure performance: the discounted scenario-minus-base cash of one
//! exposure and the state it puts the exposure in.

use serde::Serialize;

use crate::asset_model::{Deal, ExposureId};
use crate::error::Result;
use crate::inbound_blocks::exposure_flows;
use crate::money::Month;
use crate::scenario_engine::{first_event_time, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerformanceState {
    FullPerforming,
    Performing,
    NonPerforming,
    SuperPerforming,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExposurePerformance {
    pub value: f64,
    pub state: PerformanceState,
}

/// `EP = Σ_{t≤TP} ([R^(s) − R^(b)] + E − [CR + ER]) / (1 + η/12)^t`.
pub fn exposure_performance(deal: &Deal, id: ExposureId, scn: &Scenario, eta: f64) -> Result<ExposurePerformance> {
    let tp = deal.tp();
    let f = exposure_flows(deal, id, scn)?;
    let monthly = 1.0 + eta / 12.0;
    let mut value = 0.0;
    let mut factor = 1.0;
    for t in 0..=tp.min(f.base.len() - 1) {
        let cash = f.realized[t] - f.base[t] + f.recovery[t] - f.recovery_cost[t] - f.excess_recovery[t];
        value += cash as f64 / factor;
        factor *= monthly;
    }
    Ok(ExposurePerformance { value, state: classify(first_event_time(scn, id), tp, value) })
}

fn classify(first_event: Option<Month>, tp: Month, value: f64) -> PerformanceState {
    match first_event {
        None => PerformanceState::FullPerforming,
        Some(t) if t >= tp => PerformanceState::FullPerforming,
        _ if value < 0.0 => PerformanceState::NonPerforming,
        _ if value > 0.0 => PerformanceState::SuperPerforming,
        _ => PerformanceState::Performing,
    }
}

/// Scenario counts per state for one exposure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct StateHistogram {
    pub full_performing: u64,
    pub performing: u64,
    pub non_performing: u64,
    pub super_performing: u64,
}

impl StateHistogram {
    pub fn add(&mut self, s: PerformanceState) {
        match s {
            PerformanceState::FullPerforming => self.full_performing += 1,
            PerformanceState::Performing => self.performing += 1,
            PerformanceState::NonPerforming => self.non_performing += 1,
            PerformanceState::SuperPerforming => self.super_performing += 1,
        }
    }

    pub fn merge(&mut self, o: &StateHistogram) {
        self.full_performing += o.full_performing;
        self.performing += o.performing;
        self.non_performing += o.non_performing;
        self.super_performing += o.super_performing;
    }

    pub fn total(&self) -> u64 {
        self.full_performing + self.performing + self.non_performing + self.super_performing
    }
}
