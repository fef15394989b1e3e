//! Embedded positions: the super senior claim of expenses, recovery costs
//! and excessive recoveries, and the super junior buffer.
//!
//! Both are zero in the Base Scenario. The per-scenario series live on
//! [`InboundBlocks`]; this module holds the scalar rules and the
//! cross-scenario mean used to size the first horizontal component.

use crate::inbound_blocks::InboundBlocks;
use crate::money::{mean_rounded, Money};

/// `ER = max(0, RV − OC(t^df) − Σ CR)`.
pub fn excessive_recovery(recovered: Money, at_risk: Money, costs: Money) -> Money {
    (recovered - at_risk - costs).max(0)
}

/// Scenario super senior series `SSE_s(t)`.
pub fn sse(blocks: &InboundBlocks) -> Vec<Money> {
    blocks.sse()
}

/// Scenario buffer `B_s(t) = max(0, A_s(t) − GA(t))`.
pub fn buffer(blocks: &InboundBlocks) -> Vec<Money> {
    blocks.buffer()
}

/// Exact mean of the super senior series over scenarios.
pub fn sse_mean(sse: &[Vec<Money>], months: usize) -> Vec<f64> {
    let n = sse.len().max(1) as f64;
    (0..months).map(|t| column_sum(sse, t) as f64 / n).collect()
}

/// Mean super senior series rounded to whole minor units.
pub fn sse_mean_rounded(sse: &[Vec<Money>], months: usize) -> Vec<Money> {
    if sse.is_empty() {
        return vec![0; months];
    }
    (0..months).map(|t| mean_rounded(column_sum(sse, t), sse.len())).collect()
}

fn column_sum(rows: &[Vec<Money>], t: usize) -> i128 {
    rows.iter().map(|r| r.get(t).copied().unwrap_or(0) as i128).sum()
}
