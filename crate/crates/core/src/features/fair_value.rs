//! Discounted fair value of note positions over the scenario set.

use serde::Serialize;

use crate::money::Money;

/// `FVY^(s)(t) = Σ_{τ≥t} NN^(s)(τ) / (1 + η/12)^τ` for one scenario.
pub fn scenario_fair_value(nn: &[Money], eta: f64) -> Vec<f64> {
    let monthly = 1.0 + eta / 12.0;
    let discounted: Vec<f64> = nn.iter().enumerate().map(|(t, &x)| x as f64 / monthly.powi(t as i32)).collect();
    let mut out = vec![0.0; nn.len()];
    let mut acc = 0.0;
    for t in (0..nn.len()).rev() {
        acc += discounted[t];
        out[t] = acc;
    }
    out
}

/// Fair value distribution of one note.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairValue {
    /// `FVY(t)`, the scenario mean.
    pub mean: Vec<f64>,
    /// Sorted `FVY^(s)(0)` across scenarios.
    #[serde(skip)]
    pub at_zero: Vec<f64>,
    /// `FVY^(s)(0)` quantiles at levels `0, 0.01, …, 1`.
    pub quantiles: Vec<f64>,
}

impl FairValue {
    /// Empirical CDF at `price`: the share of scenarios valued at or below it.
    pub fn quantile_of_price(&self, price: f64) -> f64 {
        if self.at_zero.is_empty() {
            return 0.0;
        }
        let k = self.at_zero.partition_point(|&v| v <= price);
        k as f64 / self.at_zero.len() as f64
    }
}

/// Running sums used to assemble the distribution scenario by scenario.
#[derive(Debug, Clone, Default)]
pub struct FairValueAccumulator {
    sum: Vec<f64>,
    at_zero: Vec<f64>,
}

impl FairValueAccumulator {
    pub fn add(&mut self, per_scenario: &[f64]) {
        if self.sum.len() < per_scenario.len() {
            self.sum.resize(per_scenario.len(), 0.0);
        }
        for (s, &v) in self.sum.iter_mut().zip(per_scenario) {
            *s += v;
        }
        self.at_zero.push(per_scenario.first().copied().unwrap_or(0.0));
    }

    pub fn merge(&mut self, o: FairValueAccumulator) {
        if self.sum.len() < o.sum.len() {
            self.sum.resize(o.sum.len(), 0.0);
        }
        for (s, v) in self.sum.iter_mut().zip(o.sum) {
            *s += v;
        }
        self.at_zero.extend(o.at_zero);
    }

    pub fn finish(mut self) -> FairValue {
        let n = self.at_zero.len().max(1) as f64;
        let mean = self.sum.iter().map(|s| s / n).collect();
        self.at_zero.sort_by(f64::total_cmp);
        let quantiles = quantile_grid(&self.at_zero);
        FairValue { mean, at_zero: self.at_zero, quantiles }
    }
}

fn quantile_grid(sorted: &[f64]) -> Vec<f64> {
    if sorted.is_empty() {
        return vec![0.0; 101];
    }
    let last = sorted.len() - 1;
    (0..=100)
        .map(|k| {
            let idx = ((k as f64 / 100.0) * sorted.len() as f64 + 1e-9).floor() as usize;
            sorted[idx.min(last)]
        })
        .collect()
}

/// Fair value of one note from its per-scenario net series.
pub fn fair_value<'a>(nn: impl IntoIterator<Item = &'a [Money]>, eta: f64) -> FairValue {
    let mut acc = FairValueAccumulator::default();
    for s in nn {
        acc.add(&scenario_fair_value(s, eta));
    }
    acc.finish()
}
