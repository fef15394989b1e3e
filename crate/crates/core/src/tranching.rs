//! Composite inbound blocks and the empirical loss tranching.
//!
//! Per scenario the inbound cash flows `ICF`, total available funds `TAF`
//! and total net loss `TNL` are built from the basic blocks. Across the
//! scenario set, each month's `TNL` distribution is cut into the first loss
//! tranche (clamped mean), the second loss tranche (tail mean above the
//! empirical `α`-quantile, less `FLT`) and the complementary tranche.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PealError, Result};
use crate::inbound_blocks::InboundBlocks;
use crate::money::{fit, mean_rounded, Money, Month};

// ---------------------------------------------------------------------------
// Endowment
// ---------------------------------------------------------------------------

/// Lump sum financing the deal, neither reimbursed nor remunerated.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Endowment {
    /// `z_b(t)`; months past the end are zero.
    #[serde(default)]
    pub base: Vec<Money>,
}

impl Endowment {
    pub fn none() -> Self {
        Self::default()
    }

    /// Single payment of `amount` at month 0.
    pub fn upfront(amount: Money) -> Self {
        Self { base: vec![amount] }
    }

    /// `z_b` over `len` months.
    pub fn base_series(&self, len: usize) -> Vec<Money> {
        fit(&self.base, len)
    }

    /// `z_s`: the base endowment arriving `delay` months late.
    pub fn scenario_series(&self, len: usize, delay: Month) -> Vec<Money> {
        let mut out = vec![0; len];
        for (t, &z) in self.base.iter().enumerate() {
            if t + delay < len {
                out[t + delay] += z;
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Composite blocks
// ---------------------------------------------------------------------------

/// `ICF(t) = GA(t) + z_b(t)` for `t ≤ TP`.
pub fn icf(ga: &[Money], z_b: &[Money], tp: Month) -> Vec<Money> {
    (0..=tp).map(|t| ga.get(t).copied().unwrap_or(0) + z_b.get(t).copied().unwrap_or(0)).collect()
}

/// `TAF(t) = A(t) + E(t) + z_s(t)` for `t ≤ TP`.
pub fn taf(blocks: &InboundBlocks, z_s: &[Money], tp: Month) -> Vec<Money> {
    (0..=tp)
        .map(|t| blocks.a.get(t).copied().unwrap_or(0) + blocks.e.get(t).copied().unwrap_or(0) + z_s.get(t).copied().unwrap_or(0))
        .collect()
}

/// `TL(t) = L(t) + [z_b(t) − z_s(t)] + SSE(t)` for `t ≤ TP`.
pub fn total_loss(blocks: &InboundBlocks, z_b: &[Money], z_s: &[Money], sse: &[Money], tp: Month) -> Vec<Money> {
    let at = |v: &[Money], t: usize| v.get(t).copied().unwrap_or(0);
    (0..=tp).map(|t| at(&blocks.l, t) + at(z_b, t) - at(z_s, t) + at(sse, t)).collect()
}

/// `NL(t) = L(t) − E(t)` for `t ≤ TP`.
pub fn net_loss(blocks: &InboundBlocks, tp: Month) -> Vec<Money> {
    (0..=tp).map(|t| blocks.l.get(t).copied().unwrap_or(0) - blocks.e.get(t).copied().unwrap_or(0)).collect()
}

/// `TNL(t) = ICF(t) − TAF(t) + SSE(t)`.
pub fn total_net_loss(icf: &[Money], taf: &[Money], sse: &[Money]) -> Vec<Money> {
    icf.iter()
        .zip(taf)
        .enumerate()
        .map(|(t, (i, a))| i - a + sse.get(t).copied().unwrap_or(0))
        .collect()
}

// ---------------------------------------------------------------------------
// Tranching
// ---------------------------------------------------------------------------

/// Outcome of the substantial margin test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubstantialMargin {
    /// Mean lifetime total net loss.
    pub tflt: f64,
    /// Population standard deviation of the lifetime total net loss.
    pub sigma_tflt: f64,
    /// `Σ FLT / TFLT − 1`; `None` when `TFLT ≤ 0`.
    pub sm: Option<f64>,
    /// `sm ≥ σ / TFLT`; `None` when not applicable.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tranching {
    pub alpha: f64,
    pub icf: Vec<Money>,
    /// Mean `TNL(t)` over scenarios.
    pub mu: Vec<f64>,
    /// Empirical `α`-quantile of `TNL(t)`.
    pub quantile: Vec<Money>,
    /// Mean of `TNL(t)` over scenarios at or above the quantile.
    pub var: Vec<Money>,
    pub flt: Vec<Money>,
    pub slt: Vec<Money>,
    pub clt: Vec<Money>,
    pub margin: SubstantialMargin,
}

impl Tranching {
    pub fn months(&self) -> usize {
        self.icf.len()
    }

    /// Tranching with no losses: everything in `CLT`.
    pub fn loss_free(icf: Vec<Money>, alpha: f64) -> Self {
        let n = icf.len();
        Self {
            alpha,
            mu: vec![0.0; n],
            quantile: vec![0; n],
            var: vec![0; n],
            flt: vec![0; n],
            slt: vec![0; n],
            clt: icf.clone(),
            icf,
            margin: SubstantialMargin { tflt: 0.0, sigma_tflt: 0.0, sm: None, pass: None },
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "icf", "flt", "slt", "clt", "mu", "quantile", "var"])?;
        for t in 0..self.months() {
            w.write_record([
                t.to_string(),
                self.icf[t].to_string(),
                self.flt[t].to_string(),
                self.slt[t].to_string(),
                self.clt[t].to_string(),
                format!("{:.4}", self.mu[t]),
                self.quantile[t].to_string(),
                self.var[t].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Index of the empirical `α`-quantile in a sorted sample of size `n`.
pub fn quantile_index(alpha: f64, n: usize) -> usize {
    (((alpha * n as f64) + 1e-9).floor() as usize).min(n - 1)
}

/// Tranche the per-scenario `TNL` series (rows = scenarios) against `icf`.
pub fn tranche(tnl: &[Vec<Money>], icf: &[Money], alpha: f64) -> Result<Tranching> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(PealError::InvalidAlpha(alpha));
    }
    if tnl.is_empty() {
        return Err(PealError::NoScenarios);
    }
    let months = icf.len();
    let s = tnl.len();
    let per_month: Vec<(f64, Money, Money, Money)> = (0..months)
        .into_par_iter()
        .map(|t| {
            let mut col: Vec<Money> = tnl.iter().map(|row| row.get(t).copied().unwrap_or(0)).collect();
            let sum: i128 = col.iter().map(|&x| x as i128).sum();
            let mu = sum as f64 / s as f64;
            let mean = mean_rounded(sum, s);
            col.sort_unstable();
            let q = col[quantile_index(alpha, s)];
            let lo = col.partition_point(|&x| x < q);
            let tail = &col[lo..];
            let var = mean_rounded(tail.iter().map(|&x| x as i128).sum(), tail.len());
            (mu, mean, q, var)
        })
        .collect();

    let mut out = Tranching::loss_free(icf.to_vec(), alpha);
    for (t, (mu, mean, q, var)) in per_month.into_iter().enumerate() {
        out.mu[t] = mu;
        out.quantile[t] = q;
        out.var[t] = var;
        out.flt[t] = mean.max(0);
        out.slt[t] = (var - out.flt[t]).max(0);
        out.clt[t] = icf[t] - out.flt[t] - out.slt[t];
    }
    out.margin = substantial_margin(tnl, &out.flt);
    Ok(out)
}

/// Substantial margin test of `FLT` against the lifetime loss distribution.
pub fn substantial_margin(tnl: &[Vec<Money>], flt: &[Money]) -> SubstantialMargin {
    let totals: Vec<f64> = tnl.iter().map(|row| row.iter().sum::<Money>() as f64).collect();
    let n = totals.len().max(1) as f64;
    let tflt = totals.iter().sum::<f64>() / n;
    let sigma_tflt = (totals.iter().map(|x| (x - tflt).powi(2)).sum::<f64>() / n).sqrt();
    if tflt <= 0.0 {
        return SubstantialMargin { tflt, sigma_tflt, sm: None, pass: None };
    }
    let sm = flt.iter().sum::<Money>() as f64 / tflt - 1.0;
    SubstantialMargin { tflt, sigma_tflt, sm: Some(sm), pass: Some(sm >= sigma_tflt / tflt) }
}
