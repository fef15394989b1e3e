//! The structuring pipeline from a parsed deal to features.
//!
//! Scenario flows that do not depend on the design are computed once
//! ([`prepare`]); a design, frequency schedule and endowment are then
//! evaluated against them ([`evaluate`]). Reductions run over fixed-size
//! chunks merged in order, so results do not depend on the thread count.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::asset_model::{Deal, ExposureId};
use crate::embedded_positions::sse_mean_rounded;
use crate::error::{PealError, Result, Rule, StepContext, Violation};
use crate::features::capital::{regulatory_capital, RiskWeights};
use crate::features::cva::{cva, CvaReport};
use crate::features::fair_value::{scenario_fair_value, FairValue, FairValueAccumulator};
use crate::features::irr::{gross_net_irr, total_note_price, IrrOutcome, NoteIrr};
use crate::features::performance::{exposure_performance, StateHistogram};
use crate::features::thickness::{thickness_peal, thickness_regulatory, RegulatoryThickness, Thickness};
use crate::gross_dimensioning::{g_check, gross_dimension, validate_frequencies, FrequencySchedule, GCheck, GrossDimensioning};
use crate::inbound_blocks::{gross_asset, inbound_blocks};
use crate::money::{mean_rounded, Money};
use crate::net_dimensioning::allocate;
use crate::scenario_engine::ScenarioSet;
use crate::tranching::{icf, total_net_loss, tranche, Endowment, Tranching};
use crate::waterfall_design::{evaluate_design, validate_design, DesignSeries, WaterfallDesign};

const CHUNK: usize = 256;

// ---------------------------------------------------------------------------
// Progress
// ---------------------------------------------------------------------------

/// Scenario passes completed, for status reporting.
#[derive(Debug, Default)]
pub struct Progress {
    done: AtomicUsize,
    total: AtomicUsize,
}

impl Progress {
    pub fn fraction(&self) -> f64 {
        let total = self.total.load(Ordering::Relaxed);
        if total == 0 {
            0.0
        } else {
            (self.done.load(Ordering::Relaxed) as f64 / total as f64).min(1.0)
        }
    }

    fn expect(&self, n: usize) {
        self.total.fetch_add(n, Ordering::Relaxed);
    }

    fn tick(&self, n: usize) {
        self.done.fetch_add(n, Ordering::Relaxed);
    }
}

// ---------------------------------------------------------------------------
// Design-independent scenario flows
// ---------------------------------------------------------------------------

/// One scenario's flows on months `0..=TP`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRow {
    /// `A(t) + E(t)`.
    pub ae: Vec<Money>,
    pub sse: Vec<Money>,
    pub endowment_delay: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedScenarios {
    /// Gross asset flow on months `0..=TP`.
    pub ga: Vec<Money>,
    pub rows: Vec<ScenarioRow>,
}

impl PreparedScenarios {
    pub fn months(&self) -> usize {
        self.ga.len()
    }
}

/// Inbound blocks of every scenario, truncated to the liability horizon.
pub fn prepare(deal: &Deal, set: &ScenarioSet, progress: Option<&Progress>) -> Result<PreparedScenarios> {
    if set.is_empty() {
        return Err(PealError::NoScenarios);
    }
    let months = deal.tp() + 1;
    if let Some(p) = progress {
        p.expect(set.len());
    }
    let rows = set
        .scenarios
        .par_iter()
        .map(|s| {
            let b = inbound_blocks(deal, s)?;
            if let Some(p) = progress {
                p.tick(1);
            }
            Ok(ScenarioRow {
                ae: (0..months).map(|t| b.a[t] + b.e[t]).collect(),
                sse: b.sse()[..months].to_vec(),
                endowment_delay: s.endowment_delay,
            })
        })
        .collect::<Result<Vec<_>>>()
        .step("inbound blocks")?;
    let mut ga = gross_asset(deal);
    ga.truncate(months);
    Ok(PreparedScenarios { ga, rows })
}

// ---------------------------------------------------------------------------
// Evaluation of one design
// ---------------------------------------------------------------------------

/// Scenario means of the allocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetSummary {
    pub scenarios: usize,
    /// Mean `NDM_j(t)` rounded to minor units.
    pub ndm: Vec<Vec<Money>>,
    pub nc: Vec<Vec<f64>>,
    pub nn: Vec<Vec<f64>>,
    pub lc: Vec<Vec<f64>>,
    pub ln: Vec<Vec<f64>>,
    /// Mean lifetime loss of each note, `Σ_t LN_y(t)`.
    pub note_loss: Vec<f64>,
    #[serde(skip)]
    pub fair_value: Vec<FairValue>,
}

/// Everything produced from one design over a fixed scenario set.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub endowment_base: Vec<Money>,
    pub tranching: Tranching,
    pub sse_mean: Vec<Money>,
    pub series: DesignSeries,
    pub gross: GrossDimensioning,
    pub g_check: GCheck,
    pub frequency_verdicts: Vec<Violation>,
    pub net: NetSummary,
}

#[derive(Clone)]
struct Partial {
    ndm: Vec<Vec<i128>>,
    nc: Vec<Vec<i128>>,
    nn: Vec<Vec<i128>>,
    fv: Vec<FairValueAccumulator>,
}

impl Partial {
    fn new(h: usize, x: usize, y: usize, months: usize) -> Self {
        Self {
            ndm: vec![vec![0; months]; h],
            nc: vec![vec![0; months]; x],
            nn: vec![vec![0; months]; y],
            fv: vec![FairValueAccumulator::default(); y],
        }
    }

    fn merge(&mut self, o: Partial) {
        for (a, b) in [(&mut self.ndm, o.ndm), (&mut self.nc, o.nc), (&mut self.nn, o.nn)] {
            for (ra, rb) in a.iter_mut().zip(b) {
                for (x, y) in ra.iter_mut().zip(rb) {
                    *x += y;
                }
            }
        }
        for (a, b) in self.fv.iter_mut().zip(o.fv) {
            a.merge(b);
        }
    }
}

fn add_into(acc: &mut [Vec<i128>], rows: &[Vec<Money>]) {
    for (a, r) in acc.iter_mut().zip(rows) {
        for (x, &y) in a.iter_mut().zip(r) {
            *x += y as i128;
        }
    }
}

fn taf_row(row: &ScenarioRow, endowment: &Endowment, months: usize) -> Vec<Money> {
    row.ae.iter().zip(endowment.scenario_series(months, row.endowment_delay)).map(|(a, z)| a + z).collect()
}

/// Step 4 alone: the loss tranches of the scenario set.
pub fn tranching(prepared: &PreparedScenarios, endowment: &Endowment, alpha: f64) -> Result<Tranching> {
    let months = prepared.months();
    let z_b = endowment.base_series(months);
    let icf_series = icf(&prepared.ga, &z_b, months - 1);
    let tnl: Vec<Vec<Money>> = prepared
        .rows
        .par_iter()
        .map(|row| total_net_loss(&icf_series, &taf_row(row, endowment, months), &row.sse))
        .collect();
    tranche(&tnl, &icf_series, alpha).step("tranching")
}

/// Steps 4 to 8 for one design: tranching, slicing, gross and net dimensioning.
pub fn evaluate(
    prepared: &PreparedScenarios,
    design: &WaterfallDesign,
    frequencies: &FrequencySchedule,
    endowment: &Endowment,
    alpha: f64,
    eta: f64,
    progress: Option<&Progress>,
) -> Result<Evaluation> {
    let months = prepared.months();
    let tp = months - 1;
    let z_b = endowment.base_series(months);
    let taf_of = |row: &ScenarioRow| taf_row(row, endowment, months);
    let tranching = tranching(prepared, endowment, alpha)?;

    let sse_rows: Vec<Vec<Money>> = prepared.rows.iter().map(|r| r.sse.clone()).collect();
    let sse_mean = sse_mean_rounded(&sse_rows, months);
    drop(sse_rows);
    let series = evaluate_design(design, &tranching, &sse_mean).step("waterfall design")?;

    let mut frequency_verdicts = Vec::new();
    for v in validate_frequencies(design, frequencies, Some(tp)) {
        if v.rule.is_compliance() {
            frequency_verdicts.push(v);
        } else {
            return Err(PealError::Violations(vec![v]).in_step("gross dimensioning"));
        }
    }
    let gross = gross_dimension(design, frequencies, &series).step("gross dimensioning")?;
    let check = g_check(design, frequencies, &gross);

    let (h, x, y) = (design.h_count(), design.cost_count(), design.note_count());
    if let Some(p) = progress {
        p.expect(prepared.rows.len());
    }
    let partials = prepared
        .rows
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut part = Partial::new(h, x, y, months);
            for row in chunk {
                let taf = taf_of(row);
                let a = allocate(design, &gross, &taf);
                for t in 0..months {
                    let paid: Money = a.matrix.ndm.iter().map(|c| c[t]).sum();
                    if paid != a.net.tnp[t] {
                        return Err(PealError::Conservation(format!("Σ NDM({t}) = {paid} but TNP({t}) = {}", a.net.tnp[t])));
                    }
                }
                let (tnp, inflow): (Money, Money) = (a.net.tnp.iter().sum(), taf.iter().sum());
                if tnp != inflow {
                    return Err(PealError::Conservation(format!("Σ TNP = {tnp} but Σ TAF = {inflow}")));
                }
                add_into(&mut part.ndm, &a.matrix.ndm);
                add_into(&mut part.nc, &a.nc);
                add_into(&mut part.nn, &a.nn);
                for (acc, nn) in part.fv.iter_mut().zip(&a.nn) {
                    acc.add(&scenario_fair_value(nn, eta));
                }
            }
            if let Some(p) = progress {
                p.tick(chunk.len());
            }
            Ok(part)
        })
        .collect::<Result<Vec<_>>>()
        .step("net dimensioning")?;
    let mut total = Partial::new(h, x, y, months);
    for p in partials {
        total.merge(p);
    }

    let s = prepared.rows.len();
    let mean = |rows: &[Vec<i128>]| -> Vec<Vec<f64>> { rows.iter().map(|r| r.iter().map(|&v| v as f64 / s as f64).collect()).collect() };
    let nc = mean(&total.nc);
    let nn = mean(&total.nn);
    let minus = |g: &[Vec<Money>], n: &[Vec<f64>]| -> Vec<Vec<f64>> {
        g.iter().zip(n).map(|(g, n)| g.iter().zip(n).map(|(&a, b)| a as f64 - b).collect()).collect()
    };
    let lc = minus(&gross.gc, &nc);
    let ln = minus(&gross.gn, &nn);
    let note_loss = ln.iter().map(|r| r.iter().sum()).collect();
    let net = NetSummary {
        scenarios: s,
        ndm: total.ndm.iter().map(|r| r.iter().map(|&v| mean_rounded(v, s)).collect()).collect(),
        nc,
        nn,
        lc,
        ln,
        note_loss,
        fair_value: total.fv.into_iter().map(FairValueAccumulator::finish).collect(),
    };

    Ok(Evaluation {
        endowment_base: z_b,
        tranching,
        sse_mean,
        series,
        gross,
        g_check: check,
        frequency_verdicts,
        net,
    })
}

// ---------------------------------------------------------------------------
// Features of an evaluated design
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairValueSummary {
    pub note: String,
    pub mean: Vec<f64>,
    pub quantiles: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrrSummary {
    pub capital: Money,
    pub fair_value_total: f64,
    pub cy0: f64,
    pub notes: Vec<NoteIrr>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignFeatures {
    pub thickness: Thickness,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regulatory_thickness: Option<RegulatoryThickness>,
    pub regulatory_capital: Vec<Vec<f64>>,
    pub cva: CvaReport,
    pub fair_value: Vec<FairValueSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub irr: Option<IrrSummary>,
}

impl DesignFeatures {
    pub fn total_capital(&self) -> f64 {
        self.regulatory_capital.iter().map(|r| r.first().copied().unwrap_or(0.0)).sum()
    }
}

/// Thickness, capital, CVA, fair value and IRR of an evaluated design.
pub fn design_features(
    deal: &Deal,
    design: &WaterfallDesign,
    ev: &Evaluation,
    risk_weights: &RiskWeights,
    cpy: Option<&[f64]>,
) -> Result<DesignFeatures> {
    let thickness = thickness_peal(&ev.gross);
    let regulatory_thickness = if design.is_horizontal() { Some(thickness_regulatory(design, &ev.gross)?) } else { None };
    let regulatory_capital = regulatory_capital(design, &ev.gross, risk_weights).step("regulatory capital")?;
    let gross_positions: Vec<Vec<Money>> = ev.gross.gc.iter().chain(&ev.gross.gn).cloned().collect();
    let net_positions: Vec<Vec<f64>> = ev.net.nc.iter().chain(&ev.net.nn).cloned().collect();
    let cva = cva(design, &gross_positions, &net_positions).step("cva")?;
    let fair_value = ev
        .net
        .fair_value
        .iter()
        .enumerate()
        .map(|(y, fv)| FairValueSummary { note: format!("N{}", y + 1), mean: fv.mean.clone(), quantiles: fv.quantiles.clone() })
        .collect();
    let irr = match cpy {
        None => None,
        Some(cpy) => {
            let capital = deal.capital_total();
            let fair_value_total: f64 = ev.net.fair_value.iter().map(|f| f.mean.first().copied().unwrap_or(0.0)).sum();
            let cy0 = total_note_price(capital as f64, fair_value_total);
            let notes = cpy
                .iter()
                .enumerate()
                .map(|(y, &share)| {
                    let price = share * cy0;
                    if price > 0.0 {
                        let gross: Vec<f64> = ev.gross.gn[y].iter().map(|&v| v as f64).collect();
                        gross_net_irr(&gross, &ev.net.nn[y], price)
                    } else {
                        Ok(NoteIrr { price, girr: IrrOutcome::NoSolution, nirr: IrrOutcome::NoSolution })
                    }
                })
                .collect::<Result<Vec<_>>>()
                .step("irr")?;
            Some(IrrSummary { capital, fair_value_total, cy0, notes })
        }
    };
    Ok(DesignFeatures { thickness, regulatory_thickness, regulatory_capital, cva, fair_value, irr })
}

/// Compliance verdicts of an evaluated design.
pub fn compliance_violations(ev: &Evaluation, features: &DesignFeatures) -> Vec<Violation> {
    let mut out = ev.frequency_verdicts.clone();
    out.extend(ev.g_check.violations.iter().cloned());
    out.extend(features.cva.violations.iter().cloned());
    out
}

// ---------------------------------------------------------------------------
// Exposure performance
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExposurePerformanceSummary {
    /// 1-based `(k,n)`.
    pub exposure: String,
    pub mean: f64,
    pub states: StateHistogram,
}

/// Mean performance and state histogram of every exposure.
pub fn performance(deal: &Deal, set: &ScenarioSet, eta: f64) -> Result<Vec<ExposurePerformanceSummary>> {
    let ids: Vec<ExposureId> = deal.exposure_ids().collect();
    let partials = set
        .scenarios
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut sums = vec![0.0; ids.len()];
            let mut hist = vec![StateHistogram::default(); ids.len()];
            for s in chunk {
                for (i, &id) in ids.iter().enumerate() {
                    let p = exposure_performance(deal, id, s, eta)?;
                    sums[i] += p.value;
                    hist[i].add(p.state);
                }
            }
            Ok((sums, hist))
        })
        .collect::<Result<Vec<_>>>()
        .step("exposure performance")?;
    let mut sums = vec![0.0; ids.len()];
    let mut hist = vec![StateHistogram::default(); ids.len()];
    for (s, h) in partials {
        for i in 0..ids.len() {
            sums[i] += s[i];
            hist[i].merge(&h[i]);
        }
    }
    let n = set.len().max(1) as f64;
    Ok(ids
        .iter()
        .enumerate()
        .map(|(i, id)| ExposurePerformanceSummary { exposure: id.to_string(), mean: sums[i] / n, states: hist[i] })
        .collect())
}

/// Structural violations of a design and frequency schedule, before any simulation.
pub fn structural_violations(design: &WaterfallDesign, frequencies: &FrequencySchedule, tp: usize) -> Vec<Violation> {
    let mut out = validate_design(design);
    if out.is_empty() {
        out.extend(validate_frequencies(design, frequencies, Some(tp)).into_iter().filter(|v| !v.rule.is_compliance()));
    }
    out
}

/// Turn an evaluation error into violations when it reflects an infeasible design.
pub fn infeasibility(err: &PealError) -> Option<Vec<Violation>> {
    match err {
        PealError::Step { source, .. } => infeasibility(source),
        PealError::Violations(v) => Some(v.clone()),
        PealError::SeniorReserveExceeded { .. } => Some(vec![Violation::new(Rule::SeniorReserve, "design", err.to_string())]),
        PealError::ZeroThickness(_) => Some(vec![Violation::new(Rule::Coverage, "design", err.to_string())]),
        _ => None,
    }
}
