//! Basic inbound building blocks per scenario.
//!
//! For every exposure the scenario's occurrences are resolved into leg masks
//! (which months still pay capital and interest), an interest rewrite for
//! rate events, and spot recoveries. Summing over exposures gives the gross
//! asset `GA`, the asset `A`, the loss `L = GA − A` and the recoveries `E`,
//! together with the recovery costs `CR`, excessive recoveries `ER` and
//! scenario expenses `EC` that feed the super senior position.

use serde::Serialize;

use crate::asset_model::{Deal, ExposureId};
use crate::error::{PealError, Result};
use crate::money::{Money, Month};
use crate::scenario_engine::sampler::capital_at_risk;
use crate::scenario_engine::{Effect, EventCode, EventOccurrence, Payload, Scenario};

// ---------------------------------------------------------------------------
// Per-exposure flows
// ---------------------------------------------------------------------------

/// Cash flows of one exposure in one scenario, months `0..=T` on the deal clock.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExposureFlows {
    /// Base installment `R^(b) = C + I`.
    pub base: Vec<Money>,
    /// Scenario installment `R^(s)`.
    pub realized: Vec<Money>,
    /// Spot recoveries `p + d`.
    pub recovery: Vec<Money>,
    /// Recovery costs `CR`.
    pub recovery_cost: Vec<Money>,
    /// Excessive recoveries `ER`.
    pub excess_recovery: Vec<Money>,
}

/// Aggregated blocks of one scenario, months `0..=T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InboundBlocks {
    pub ga: Vec<Money>,
    pub a: Vec<Money>,
    pub l: Vec<Money>,
    pub e: Vec<Money>,
    pub cr: Vec<Money>,
    pub er: Vec<Money>,
    pub ec: Vec<Money>,
}

impl InboundBlocks {
    pub fn months(&self) -> usize {
        self.ga.len()
    }

    /// Cumulative loss `Σ_t L(t)`.
    pub fn cumulative_loss(&self) -> Money {
        self.l.iter().sum()
    }

    /// `SSE(t) = EC(t) + Σ [CR + ER](t)`.
    pub fn sse(&self) -> Vec<Money> {
        (0..self.months()).map(|t| self.ec[t] + self.cr[t] + self.er[t]).collect()
    }

    /// Buffer `B(t) = max(0, A(t) − GA(t))`.
    pub fn buffer(&self) -> Vec<Money> {
        self.a.iter().zip(&self.ga).map(|(a, g)| (a - g).max(0)).collect()
    }
}

/// `GA(t) = Σ_k Σ_n C_kn(t) + I_kn(t)`.
pub fn gross_asset(deal: &Deal) -> Vec<Money> {
    let mut ga = vec![0; deal.horizon() + 1];
    for id in deal.exposure_ids() {
        let offset = deal.pooling_month(id.k);
        let e = deal.exposure(id);
        for (i, (c, r)) in e.capital().iter().zip(e.interest()).enumerate() {
            ga[offset + i] += c + r;
        }
    }
    ga
}

/// Scenario installment `R^(s)` of one exposure.
pub fn scenario_installment(deal: &Deal, id: ExposureId, scn: &Scenario) -> Result<Vec<Money>> {
    Ok(exposure_flows(deal, id, scn)?.realized)
}

// ---------------------------------------------------------------------------
// Gating
// ---------------------------------------------------------------------------

#[derive(Debug, Default)]
struct Leg {
    cut_from: Option<Month>,
    permanent: bool,
    off: Vec<(Month, Month)>,
}

impl Leg {
    fn cut(&mut self, t: Month, permanent: bool) {
        if self.permanent {
            return;
        }
        if self.cut_from.is_none() {
            self.cut_from = Some(t);
        }
        self.permanent |= permanent;
    }

    fn restore(&mut self, t: Month) {
        if self.permanent {
            return;
        }
        if let Some(from) = self.cut_from.take() {
            self.off.push((from, t));
        }
    }

    fn mask(mut self, len: usize) -> Vec<bool> {
        if let Some(from) = self.cut_from.take() {
            self.off.push((from, len));
        }
        let mut active = vec![true; len];
        for (a, b) in self.off {
            for x in active.iter_mut().take(b.min(len)).skip(a) {
                *x = false;
            }
        }
        active
    }
}

fn check_occurrence(deal: &Deal, o: &EventOccurrence) -> Result<()> {
    let id = o.exposure;
    if id.k >= deal.portfolio_count() || id.n >= deal.portfolios()[id.k].exposures.len() {
        return Err(PealError::InvalidScenario(format!("exposure {id} does not exist")));
    }
    let (from, to) = (deal.pooling_month(id.k), deal.exposure_end(id));
    if o.time < from || o.time > to {
        return Err(PealError::InvalidScenario(format!(
            "`{}` on {id} at month {} lies outside the exposure life {from}..={to}",
            o.code, o.time
        )));
    }
    Ok(())
}

/// Resolve the occurrences of one exposure into its scenario flows.
pub fn exposure_flows(deal: &Deal, id: ExposureId, scn: &Scenario) -> Result<ExposureFlows> {
    let len = deal.horizon() + 1;
    let capital = deal.capital_series(id);
    let interest = deal.interest_series(id);
    let base: Vec<Money> = capital.iter().zip(&interest).map(|(c, i)| c + i).collect();
    let occ = scn.occurrences_of(id);

    let mut cap = Leg::default();
    let mut int = Leg::default();
    let mut gates: Vec<Month> = Vec::new();
    let mut returns: Vec<Month> = Vec::new();
    for o in occ {
        check_occurrence(deal, o)?;
        match o.code.kind().effect() {
            Effect::Gate => {
                let permanent = o.code == EventCode::Pe;
                if let Some(t) = o.capital_time {
                    cap.cut(t, permanent);
                }
                if let Some(t) = o.interest_time {
                    int.cut(t, permanent);
                }
                gates.push(o.time);
            }
            Effect::Reactivate => {
                if gates.is_empty() {
                    return Err(match occ.iter().find(|g| g.code.kind().effect() == Effect::Gate) {
                        Some(g) => PealError::ReturnBeforeDefault { rtl: o.time, default: g.time },
                        None => PealError::InvalidScenario(format!(
                            "return to life on {id} at month {} without a prior default",
                            o.time
                        )),
                    });
                }
                cap.restore(o.time);
                int.restore(o.time);
                returns.push(o.time);
            }
            Effect::RateShift | Effect::Spot => {}
        }
    }

    let cap_on = cap.mask(len);
    let int_on = int.mask(len);
    let shift = interest_shift(deal, id, occ, len);
    let mut realized = vec![0; len];
    for t in 0..len {
        let i = if shift[t] != 0 && t > deal.pooling_month(id.k) && t <= deal.exposure_end(id) {
            (interest[t] + shift[t]).max(0)
        } else {
            interest[t]
        };
        realized[t] = capital[t] * cap_on[t] as Money + i * int_on[t] as Money;
    }

    let mut recovery = vec![0; len];
    let mut recovery_cost = vec![0; len];
    let mut excess_recovery = vec![0; len];
    for o in occ {
        let Some(Payload::Recovery { value, arrival, cost }) = o.payload else { continue };
        let gate = o.code.kind().effect() == Effect::Gate;
        let cancelled = gate && o.code != EventCode::Pe && returns.iter().any(|&r| r >= o.time && r < arrival);
        if cancelled || arrival >= len {
            continue;
        }
        recovery[arrival] += value;
        recovery_cost[arrival] += cost;
        if gate && o.code != EventCode::Pe {
            let at_risk = capital_at_risk(deal, id, o.time);
            excess_recovery[arrival] += (value - at_risk - cost).max(0);
        }
    }

    Ok(ExposureFlows { base, realized, recovery, recovery_cost, excess_recovery })
}

/// Additive interest from rate events: `round(OC(t−1) · Σ spread / 12)`.
fn interest_shift(deal: &Deal, id: ExposureId, occ: &[EventOccurrence], len: usize) -> Vec<Money> {
    let mut out = vec![0; len];
    let shifts: Vec<(Month, f64)> = occ
        .iter()
        .filter_map(|o| match o.payload {
            Some(Payload::Spread { annual_rate }) => Some((o.time, annual_rate)),
            _ => None,
        })
        .collect();
    if shifts.is_empty() {
        return out;
    }
    for (t, slot) in out.iter_mut().enumerate() {
        let rate: f64 = shifts.iter().filter(|(s, _)| *s <= t).map(|(_, r)| r).sum();
        if rate != 0.0 {
            *slot = (capital_at_risk(deal, id, t) as f64 * rate / 12.0).round() as Money;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

/// All basic blocks of one scenario.
pub fn inbound_blocks(deal: &Deal, scn: &Scenario) -> Result<InboundBlocks> {
    let len = deal.horizon() + 1;
    for o in &scn.occurrences {
        check_occurrence(deal, o)?;
    }
    let ga = gross_asset(deal);
    let mut a = ga.clone();
    let mut e = vec![0; len];
    let mut cr = vec![0; len];
    let mut er = vec![0; len];
    let mut touched = scn.occurrences.iter().map(|o| o.exposure).collect::<Vec<_>>();
    touched.dedup();
    for id in touched {
        let f = exposure_flows(deal, id, scn)?;
        for t in 0..len {
            a[t] += f.realized[t] - f.base[t];
            e[t] += f.recovery[t];
            cr[t] += f.recovery_cost[t];
            er[t] += f.excess_recovery[t];
        }
    }
    let mut ec = vec![0; len];
    for x in &scn.expenses {
        if x.time < len {
            ec[x.time] += x.amount;
        }
    }
    let l = ga.iter().zip(&a).map(|(g, a)| g - a).collect();
    Ok(InboundBlocks { ga, a, l, e, cr, er, ec })
}

/// Asset block `A^(s)`.
pub fn asset_block(deal: &Deal, scn: &Scenario) -> Result<Vec<Money>> {
    Ok(inbound_blocks(deal, scn)?.a)
}

/// Loss block `L^(s) = GA − A^(s)`.
pub fn loss_block(deal: &Deal, scn: &Scenario) -> Result<Vec<Money>> {
    Ok(inbound_blocks(deal, scn)?.l)
}

/// Recovery block `E^(s)`.
pub fn event_recovery(deal: &Deal, scn: &Scenario) -> Result<Vec<Money>> {
    Ok(inbound_blocks(deal, scn)?.e)
}

/// Scenario cumulative loss `Σ_t L^(s)(t)`.
pub fn cumulative_loss(deal: &Deal, scn: &Scenario) -> Result<Money> {
    Ok(inbound_blocks(deal, scn)?.cumulative_loss())
}

/// Loss as `Σ_kn R^(b)(t) · Σ_λ θ(t, t̂^λ)`, summing the step of every gating
/// occurrence. Agrees with [`loss_block`] when each exposure is hit by at
/// most one two-legged gating event.
pub fn loss_block_mece(deal: &Deal, scn: &Scenario) -> Vec<Money> {
    let mut out = vec![0; deal.horizon() + 1];
    for o in scn.occurrences.iter().filter(|o| o.code.kind().effect() == Effect::Gate) {
        let base = deal.capital_series(o.exposure);
        let int = deal.interest_series(o.exposure);
        for t in o.time..out.len() {
            out[t] += base[t] + int[t];
        }
    }
    out
}

/// Per-scenario block dump rows: `t, GA, A, L, E`.
pub fn write_blocks_csv<W: std::io::Write>(w: &mut csv::Writer<W>, scenario: u64, b: &InboundBlocks) -> Result<()> {
    for t in 0..b.months() {
        w.write_record([
            scenario.to_string(),
            t.to_string(),
            b.ga[t].to_string(),
            b.a[t].to_string(),
            b.l[t].to_string(),
            b.e[t].to_string(),
        ])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::desk_deal;
    use crate::scenario_engine::Affects;

    fn e1() -> ExposureId {
        ExposureId::new(0, 0)
    }
    fn e2() -> ExposureId {
        ExposureId::new(0, 1)
    }

    #[test]
    fn gross_asset_of_the_desk_deal() {
        assert_eq!(gross_asset(&desk_deal()), vec![0, 92, 87, 41]);
        assert_eq!(gross_asset(&desk_deal().islamic_variant()), vec![0, 80, 80, 40]);
    }

    #[test]
    fn default_gates_both_legs() {
        let d = desk_deal();
        let s = Scenario::new(0, vec![EventOccurrence::new(EventCode::De, e1(), 2)]);
        assert_eq!(scenario_installment(&d, e1(), &s).unwrap(), vec![0, 60, 0, 0]);
        assert_eq!(scenario_installment(&d, e2(), &s).unwrap(), vec![0, 32, 32, 41]);
        let b = inbound_blocks(&d, &s).unwrap();
        assert_eq!(b.a, vec![0, 92, 32, 41]);
        assert_eq!(b.l, vec![0, 0, 55, 0]);
        assert_eq!(b.cumulative_loss(), 55);
        assert_eq!(loss_block_mece(&d, &s), b.l);
    }

    #[test]
    fn return_to_life_reactivates() {
        let d = desk_deal();
        let s = Scenario::new(
            0,
            vec![EventOccurrence::new(EventCode::De, e2(), 1), EventOccurrence::new(EventCode::Trl, e2(), 3)],
        );
        assert_eq!(scenario_installment(&d, e2(), &s).unwrap(), vec![0, 0, 0, 41]);
        let early = Scenario::new(
            0,
            vec![EventOccurrence::new(EventCode::Trl, e2(), 1), EventOccurrence::new(EventCode::De, e2(), 2)],
        );
        assert!(matches!(
            exposure_flows(&d, e2(), &early),
            Err(PealError::ReturnBeforeDefault { rtl: 1, default: 2 })
        ));
    }

    #[test]
    fn recoveries_and_costs() {
        let d = desk_deal();
        let s = Scenario::new(0, vec![EventOccurrence::new(EventCode::De, e1(), 2).with_recovery(40, 3, 5)]);
        let b = inbound_blocks(&d, &s).unwrap();
        assert_eq!(b.e, vec![0, 0, 0, 40]);
        assert_eq!(b.sse(), vec![0, 0, 0, 5]);
        assert_eq!(b.er, vec![0; 4]);
        let rich = Scenario::new(0, vec![EventOccurrence::new(EventCode::De, e1(), 2).with_recovery(70, 3, 5)]);
        assert_eq!(inbound_blocks(&d, &rich).unwrap().er, vec![0, 0, 0, 15]);
    }

    #[test]
    fn prepayment_pays_the_remaining_capital() {
        let d = desk_deal();
        let s = Scenario::new(0, vec![EventOccurrence::new(EventCode::Pe, e1(), 2).with_recovery(50, 2, 0)]);
        let b = inbound_blocks(&d, &s).unwrap();
        assert_eq!(b.e[2], 50);
        assert_eq!(b.er, vec![0; 4]);
    }

    #[test]
    fn return_to_life_cancels_a_pending_recovery() {
        let d = desk_deal();
        let s = Scenario::new(
            0,
            vec![
                EventOccurrence::new(EventCode::De, e2(), 1).with_recovery(30, 3, 4),
                EventOccurrence::new(EventCode::Trl, e2(), 2),
            ],
        );
        let b = inbound_blocks(&d, &s).unwrap();
        assert_eq!(b.e, vec![0; 4]);
        assert_eq!(b.cr, vec![0; 4]);
        assert_eq!(b.a, vec![0, 60, 87, 41]);
    }

    #[test]
    fn capital_only_gate_keeps_interest() {
        let d = desk_deal();
        let o = EventOccurrence::affecting(EventCode::De, e1(), 2, Affects::Capital);
        let s = Scenario::new(0, vec![o]);
        assert_eq!(scenario_installment(&d, e1(), &s).unwrap(), vec![0, 60, 5, 0]);
    }

    #[test]
    fn rate_shift_raises_interest_and_the_buffer() {
        let d = desk_deal();
        let o = EventOccurrence::new(EventCode::Eu, e2(), 2).with_payload(Payload::Spread { annual_rate: 1.2 });
        let b = inbound_blocks(&d, &Scenario::new(0, vec![o])).unwrap();
        assert_eq!(b.a, vec![0, 92, 94, 45]);
        assert_eq!(b.l, vec![0, 0, -7, -4]);
        assert_eq!(b.buffer(), vec![0, 0, 7, 4]);
        for t in 0..4 {
            assert_eq!(b.a[t] + b.l[t], b.ga[t]);
        }
    }

    #[test]
    fn total_default_leaves_nothing() {
        let d = desk_deal();
        let s = Scenario::new(
            0,
            vec![EventOccurrence::new(EventCode::De, e1(), 0), EventOccurrence::new(EventCode::De, e2(), 0)],
        );
        let b = inbound_blocks(&d, &s).unwrap();
        assert_eq!(b.a, vec![0; 4]);
        assert_eq!(b.l, b.ga);
    }

    #[test]
    fn occurrences_outside_the_life_are_rejected() {
        let d = desk_deal();
        let s = Scenario::new(0, vec![EventOccurrence::new(EventCode::De, e1(), 9)]);
        assert!(matches!(inbound_blocks(&d, &s), Err(PealError::InvalidScenario(_))));
    }
}
