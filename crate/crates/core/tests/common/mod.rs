//! Random deal builders shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, RngCore};

use peal::asset_model::{Deal, Exposure, Portfolio};
use peal::gross_dimensioning::{FrequencySchedule, VALID_FREQUENCIES};
use peal::money::{Money, Month};
use peal::scenario_engine::catalog::EventCode;
use peal::scenario_engine::sampler::{
    ClusterProfile, EndowmentDelayRule, EventRule, ExpenseRule, GeneratorConfig, RecoveryRule,
};
use peal::tranching::Endowment;
use peal::waterfall_design::WaterfallDesign;

pub struct RandomDeal {
    pub deal: Deal,
    pub design: WaterfallDesign,
    pub frequencies: FrequencySchedule,
    pub generator: GeneratorConfig,
    pub endowment: Endowment,
}

/// Weights summing to one.
pub fn partition<R: RngCore>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// Per-HC frequencies obeying the vertical and multiple rules.
pub fn frequency_chain<R: RngCore>(rng: &mut R, h: usize) -> Vec<u32> {
    let mut cur = 12;
    let mut out = Vec::with_capacity(h);
    for _ in 0..h {
        if rng.random_bool(0.5) {
            let options: Vec<u32> = VALID_FREQUENCIES.iter().copied().filter(|&w| cur % w == 0).collect();
            cur = options[rng.random_range(0..options.len())];
        }
        out.push(cur);
    }
    out
}

/// A design with at most five horizontal components.
pub fn random_design<R: RngCore>(rng: &mut R, horizontal: bool) -> WaterfallDesign {
    const SHAPES: [[usize; 3]; 4] = [[2, 1, 1], [3, 1, 1], [2, 2, 1], [2, 1, 2]];
    let hs = SHAPES[rng.random_range(0..SHAPES.len())];
    let mut h = vec![0.0];
    h.extend(partition(rng, hs[0] - 1));
    h.extend(partition(rng, hs[1]));
    h.extend(partition(rng, hs[2]));
    let total: usize = hs.iter().sum();
    if horizontal {
        return WaterfallDesign::horizontal(hs, h);
    }
    let mut vs = vec![1];
    vs.extend((1..total).map(|_| rng.random_range(1..=2)));
    let v: Vec<f64> = vs.iter().flat_map(|&n| if n == 1 { vec![1.0] } else { partition(rng, n) }).collect();
    let v_count = v.len();
    let mut costs = vec![vec![1]];
    let mut notes: Vec<Vec<usize>> = Vec::new();
    for i in 2..=v_count {
        match rng.random_range(0..4) {
            0 => costs[0].push(i),
            1 if !notes.is_empty() => {
                let y = rng.random_range(0..notes.len());
                notes[y].push(i);
            }
            _ => notes.push(vec![i]),
        }
    }
    if notes.is_empty() {
        let last = costs[0].pop().expect("at least two components");
        notes.push(vec![last]);
    }
    WaterfallDesign { hs: hs.to_vec(), h, vs, v, costs, notes }
}

fn schedule<R: RngCore>(rng: &mut R, duration: Month) -> Exposure {
    let principal: Money = rng.random_range(1_000..=200_000);
    let mut capital = vec![0; duration + 1];
    if rng.random_bool(0.2) {
        capital[duration] = principal;
    } else {
        let each = principal / duration as Money;
        for c in capital.iter_mut().skip(1) {
            *c = each;
        }
        capital[duration] += principal - each * duration as Money;
    }
    let rate = rng.random_range(0.0..0.01);
    let mut outstanding = principal;
    let interest: Vec<Money> = capital
        .iter()
        .enumerate()
        .map(|(t, &c)| {
            if t == 0 {
                return 0;
            }
            let i = (outstanding as f64 * rate).round() as Money;
            outstanding -= c;
            i
        })
        .collect();
    Exposure::new(capital, interest).expect("valid schedule")
}

fn profile<R: RngCore>(rng: &mut R) -> ClusterProfile {
    let mut events = BTreeMap::new();
    events.insert(
        EventCode::De,
        EventRule {
            recovery: rng.random_bool(0.7).then(|| RecoveryRule {
                rate_min: 0.0,
                rate_max: rng.random_range(0.1..1.3),
                lag: rng.random_range(0..6),
                cost_rate: rng.random_range(0.0..0.1),
            }),
            ..EventRule::hazard(rng.random_range(0.0..0.05))
        },
    );
    events.insert(EventCode::Pe, EventRule::hazard(rng.random_range(0.0..0.02)));
    if rng.random_bool(0.5) {
        events.insert(EventCode::Eu, EventRule { spread: Some(rng.random_range(-0.02..0.03)), ..EventRule::hazard(0.01) });
    }
    if rng.random_bool(0.5) {
        events.insert(EventCode::Trl, EventRule::hazard(rng.random_range(0.0..0.2)));
    }
    ClusterProfile { events, default_correlation: rng.random_range(0.0..0.5) }
}

/// A deal with up to `max_n` exposures, `TP ≤ max_tp` and a valid frequency schedule.
pub fn random_deal<R: RngCore>(rng: &mut R, max_n: usize, max_tp: Month, horizontal: bool, scenarios: usize) -> RandomDeal {
    let design = random_design(rng, horizontal);
    let chain = frequency_chain(rng, design.h_count());
    let frequencies = FrequencySchedule::per_hc(&design, &chain);
    let tau = (12 / chain[chain.len() - 1]) as Month;
    let tp = tau * rng.random_range(1..=(max_tp / tau).max(1));

    let n = rng.random_range(1..=max_n);
    let k_count = rng.random_range(1..=3usize.min(n));
    let mut portfolios = Vec::new();
    let mut clusters = BTreeMap::new();
    for k in 0..k_count {
        let pooling = if k == 0 { 0 } else { rng.random_range(0..=6) };
        let share = if k + 1 == k_count { n - (k_count - 1) } else { 1 };
        let exposures = (0..share)
            .map(|i| {
                let duration = if k == 0 && i == 0 { rng.random_range(tp..=tp + 12) } else { rng.random_range(1..=48) };
                schedule(rng, duration)
            })
            .collect();
        let name = format!("p{k}");
        clusters.insert(name.clone(), profile(rng));
        portfolios.push(Portfolio::new(pooling, exposures, name));
    }
    let deal = Deal::new(portfolios, tp, false).expect("valid deal");

    let expenses = (0..rng.random_range(0..3))
        .map(|_| ExpenseRule { month: rng.random_range(1..=tp), amount: rng.random_range(0..2_000), probability: rng.random_range(0.0..0.3) })
        .collect();
    let endowment = if rng.random_bool(0.5) { Endowment::upfront(rng.random_range(0..50_000)) } else { Endowment::none() };
    let generator = GeneratorConfig {
        scenarios,
        seed: rng.next_u64(),
        clusters,
        allow_extreme: false,
        expenses,
        endowment_delay: rng.random_bool(0.3).then(|| EndowmentDelayRule { probability: 0.2, months: rng.random_range(1..=3) }),
    };
    RandomDeal { deal, design, frequencies, generator, endowment }
}

/// Equal-installment capital-only exposure over `duration` months.
pub fn level_exposure(amount: Money, duration: Month) -> Exposure {
    let mut capital = vec![amount; duration + 1];
    capital[0] = 0;
    Exposure::new(capital, vec![]).expect("valid schedule")
}

/// Single-portfolio deal of level exposures.
pub fn level_deal(n: usize, amount: Money, duration: Month, tp: Month) -> Deal {
    let exposures = (0..n).map(|_| level_exposure(amount, duration)).collect();
    Deal::new(vec![Portfolio::new(0, exposures, "p")], tp, false).expect("valid deal")
}
