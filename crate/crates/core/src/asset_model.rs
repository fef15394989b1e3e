//! Asset side: exposures, portfolios (clusters) and the deal timeline.
//!
//! Each exposure carries explicit monthly capital and interest schedules on
//! its own local clock, where index 0 is the pooling month and is always
//! zero. A portfolio places its exposures on the deal clock at its pooling
//! month `τ̂_k`; the deal shifts all pooling months so the earliest is 0.

use serde::{Deserialize, Serialize};

use crate::error::{PealError, Result};
use crate::money::{tail_sums, Money, Month};

/// Zero-based `(portfolio, exposure)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExposureId {
    pub k: usize,
    pub n: usize,
}

impl ExposureId {
    pub fn new(k: usize, n: usize) -> Self {
        Self { k, n }
    }
}

impl std::fmt::Display for ExposureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.k + 1, self.n + 1)
    }
}

// ---------------------------------------------------------------------------
// Exposure
// ---------------------------------------------------------------------------

/// One income-generating asset with explicit monthly schedules.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exposure {
    capital: Vec<Money>,
    interest: Vec<Money>,
}

/// Totals and outstanding balances of one exposure, on its local clock.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleAggregates {
    pub capital_total: Money,
    pub interest_total: Money,
    pub outstanding_capital: Vec<Money>,
    pub outstanding_interest: Vec<Money>,
}

impl Exposure {
    /// Build an exposure from local schedules (index 0 = pooling month).
    ///
    /// A shorter interest vector is zero-padded; an empty one means a
    /// capital-only exposure.
    pub fn new(capital: Vec<Money>, mut interest: Vec<Money>) -> Result<Self> {
        if capital.len() < 2 {
            return Err(PealError::InvalidDeal(
                "a capital schedule needs month 0 and at least one installment".into(),
            ));
        }
        if interest.len() > capital.len() {
            return Err(PealError::InvalidDeal(format!(
                "interest schedule has {} months but capital has {}",
                interest.len(),
                capital.len()
            )));
        }
        interest.resize(capital.len(), 0);
        if capital[0] != 0 || interest[0] != 0 {
            return Err(PealError::InvalidDeal(
                "schedules must be zero at month 0; the first installment falls due at month 1".into(),
            ));
        }
        if capital.iter().chain(&interest).any(|&x| x < 0) {
            return Err(PealError::InvalidDeal("schedule values must be non-negative".into()));
        }
        Ok(Self { capital, interest })
    }

    /// Amortisation span `T_kn` in months.
    pub fn duration(&self) -> Month {
        self.capital.len() - 1
    }

    pub fn capital(&self) -> &[Money] {
        &self.capital
    }

    pub fn interest(&self) -> &[Money] {
        &self.interest
    }

    pub fn has_interest(&self) -> bool {
        self.interest.iter().any(|&x| x != 0)
    }

    pub fn aggregates(&self) -> ScheduleAggregates {
        ScheduleAggregates {
            capital_total: self.capital.iter().sum(),
            interest_total: self.interest.iter().sum(),
            outstanding_capital: tail_sums(&self.capital),
            outstanding_interest: tail_sums(&self.interest),
        }
    }

    fn without_interest(&self) -> Self {
        Self { capital: self.capital.clone(), interest: vec![0; self.capital.len()] }
    }
}

/// Totals and outstanding balances of a single exposure.
pub fn schedule_aggregates(e: &Exposure) -> ScheduleAggregates {
    e.aggregates()
}

// ---------------------------------------------------------------------------
// Portfolio
// ---------------------------------------------------------------------------

/// A cluster of homogeneous exposures sharing one risk profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Portfolio {
    pub pooling_month: Month,
    pub exposures: Vec<Exposure>,
    pub profile: String,
}

impl Portfolio {
    pub fn new(pooling_month: Month, exposures: Vec<Exposure>, profile: impl Into<String>) -> Self {
        Self { pooling_month, exposures, profile: profile.into() }
    }

    /// Longest exposure span plus the pooling month: `T_k`.
    pub fn horizon(&self) -> Month {
        self.exposures.iter().map(Exposure::duration).max().unwrap_or(0) + self.pooling_month
    }
}

/// Shift pooling months so the earliest becomes month 0.
pub fn normalize_timeline(pooling: &[Month]) -> Vec<Month> {
    let origin = pooling.iter().copied().min().unwrap_or(0);
    pooling.iter().map(|&p| p - origin).collect()
}

// ---------------------------------------------------------------------------
// Deal
// ---------------------------------------------------------------------------

/// The full asset side plus the liability horizon `TP`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deal {
    portfolios: Vec<Portfolio>,
    tp: Month,
    islamic: bool,
    horizon: Month,
}

impl Deal {
    /// Validate and normalise a deal. Islamic deals drop nothing: any
    /// non-zero interest is an error.
    pub fn new(mut portfolios: Vec<Portfolio>, tp: Month, islamic: bool) -> Result<Self> {
        if portfolios.is_empty() {
            return Err(PealError::InvalidDeal("K ≥ 1 required: the deal has no portfolios".into()));
        }
        for (k, p) in portfolios.iter().enumerate() {
            if p.exposures.is_empty() {
                return Err(PealError::InvalidDeal(format!("portfolio {} has no exposures", k + 1)));
            }
            if islamic && p.exposures.iter().any(Exposure::has_interest) {
                return Err(PealError::InvalidDeal(format!(
                    "portfolio {} carries interest in an Islamic deal",
                    k + 1
                )));
            }
        }
        let shifted = normalize_timeline(&portfolios.iter().map(|p| p.pooling_month).collect::<Vec<_>>());
        for (p, m) in portfolios.iter_mut().zip(shifted) {
            p.pooling_month = m;
        }
        let horizon = portfolios.iter().map(Portfolio::horizon).max().unwrap_or(0);
        if tp == 0 || tp > horizon {
            return Err(PealError::InvalidDeal(format!(
                "TP must lie in 1..={horizon} (the last asset month), got {tp}"
            )));
        }
        Ok(Self { portfolios, tp, islamic, horizon })
    }

    /// The same deal with every interest schedule zeroed.
    pub fn islamic_variant(&self) -> Self {
        let portfolios = self
            .portfolios
            .iter()
            .map(|p| Portfolio {
                exposures: p.exposures.iter().map(Exposure::without_interest).collect(),
                ..p.clone()
            })
            .collect();
        Self { portfolios, islamic: true, ..self.clone() }
    }

    pub fn portfolios(&self) -> &[Portfolio] {
        &self.portfolios
    }

    pub fn portfolio_count(&self) -> usize {
        self.portfolios.len()
    }

    /// `N = Σ_k N_k`.
    pub fn exposure_count(&self) -> usize {
        self.portfolios.iter().map(|p| p.exposures.len()).sum()
    }

    /// `T`: last month with any scheduled asset flow.
    pub fn horizon(&self) -> Month {
        self.horizon
    }

    /// `TP`: maximum liability duration.
    pub fn tp(&self) -> Month {
        self.tp
    }

    pub fn islamic(&self) -> bool {
        self.islamic
    }

    /// Rolling iff pooling months differ between portfolios.
    pub fn is_rolling(&self) -> bool {
        let first = self.portfolios[0].pooling_month;
        self.portfolios.iter().any(|p| p.pooling_month != first)
    }

    pub fn exposure(&self, id: ExposureId) -> &Exposure {
        &self.portfolios[id.k].exposures[id.n]
    }

    pub fn pooling_month(&self, k: usize) -> Month {
        self.portfolios[k].pooling_month
    }

    /// All exposure ids in portfolio-then-exposure order.
    pub fn exposure_ids(&self) -> impl Iterator<Item = ExposureId> + '_ {
        self.portfolios
            .iter()
            .enumerate()
            .flat_map(|(k, p)| (0..p.exposures.len()).map(move |n| ExposureId::new(k, n)))
    }

    /// Last deal month at which exposure `id` may be affected: `τ̂_k + T_kn`.
    pub fn exposure_end(&self, id: ExposureId) -> Month {
        self.pooling_month(id.k) + self.exposure(id).duration()
    }

    /// Capital schedule of one exposure on the deal clock, months `0..=T`.
    pub fn capital_series(&self, id: ExposureId) -> Vec<Money> {
        self.place(id, self.exposure(id).capital())
    }

    /// Interest schedule of one exposure on the deal clock, months `0..=T`.
    pub fn interest_series(&self, id: ExposureId) -> Vec<Money> {
        self.place(id, self.exposure(id).interest())
    }

    fn place(&self, id: ExposureId, local: &[Money]) -> Vec<Money> {
        let offset = self.pooling_month(id.k);
        let mut out = vec![0; self.horizon + 1];
        out[offset..offset + local.len()].copy_from_slice(local);
        out
    }

    /// `OB(t) = Σ_k Σ_n OC_kn(t) + OI_kn(t)` on the deal clock.
    pub fn outstanding_balance(&self, t: Month) -> Money {
        self.exposure_ids()
            .map(|id| {
                let offset = self.pooling_month(id.k);
                let e = self.exposure(id);
                let from = (t + 1).saturating_sub(offset);
                e.capital().iter().skip(from).sum::<Money>() + e.interest().iter().skip(from).sum::<Money>()
            })
            .sum()
    }

    /// Total scheduled capital `C`.
    pub fn capital_total(&self) -> Money {
        self.portfolios
            .iter()
            .flat_map(|p| &p.exposures)
            .map(|e| e.capital().iter().sum::<Money>())
            .sum()
    }

    /// Total scheduled interest `I`.
    pub fn interest_total(&self) -> Money {
        self.portfolios
            .iter()
            .flat_map(|p| &p.exposures)
            .map(|e| e.interest().iter().sum::<Money>())
            .sum()
    }
}

/// `N = Σ_k N_k`.
pub fn total_exposure_count(deal: &Deal) -> usize {
    deal.exposure_count()
}

/// `OB(t)` of a deal.
pub fn deal_outstanding_balance(deal: &Deal, t: Month) -> Money {
    deal.outstanding_balance(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::fixtures::desk_deal;

    #[test]
    fn counts_exposures() {
        let d = desk_deal();
        assert_eq!(total_exposure_count(&d), 2);
        let e = || Exposure::new(vec![0, 1], vec![]).unwrap();
        let two = Deal::new(
            vec![Portfolio::new(0, vec![e(), e(), e()], "a"), Portfolio::new(0, vec![e(), e(), e(), e()], "b")],
            1,
            false,
        )
        .unwrap();
        assert_eq!(two.exposure_count(), 7);
    }

    #[test]
    fn aggregates_telescope() {
        let e = Exposure::new(vec![0, 50, 50], vec![0, 10, 5]).unwrap();
        let a = e.aggregates();
        assert_eq!(a.capital_total, 100);
        assert_eq!(a.outstanding_capital, vec![100, 50, 0]);
        assert_eq!(a.interest_total, 15);
        assert_eq!(a.outstanding_interest[1], 5);
        let z = Exposure::new(vec![0, 0], vec![0, 0]).unwrap().aggregates();
        assert_eq!((z.capital_total, z.interest_total), (0, 0));
    }

    #[test]
    fn desk_deal_outstanding_balance() {
        let d = desk_deal();
        assert_eq!(d.outstanding_balance(0), 220);
        assert_eq!(d.outstanding_balance(2), 41);
        assert_eq!(d.outstanding_balance(d.horizon()), 0);
        assert_eq!(d.outstanding_balance(0), d.capital_total() + d.interest_total());
    }

    #[test]
    fn timeline_normalisation() {
        assert_eq!(normalize_timeline(&[3, 5]), vec![0, 2]);
        assert_eq!(normalize_timeline(&[0]), vec![0]);
        assert_eq!(normalize_timeline(&[7, 7]), vec![0, 0]);
        let e = || Exposure::new(vec![0, 1, 1], vec![]).unwrap();
        let d = Deal::new(vec![Portfolio::new(7, vec![e()], "a"), Portfolio::new(7, vec![e()], "b")], 2, false)
            .unwrap();
        assert!(!d.is_rolling());
        assert_eq!(d.pooling_month(0), 0);
        let r = Deal::new(vec![Portfolio::new(3, vec![e()], "a"), Portfolio::new(5, vec![e()], "b")], 4, false)
            .unwrap();
        assert!(r.is_rolling());
        assert_eq!(r.horizon(), 4);
        assert_eq!(r.capital_series(ExposureId::new(1, 0)), vec![0, 0, 0, 1, 1]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Exposure::new(vec![1, 1], vec![]).is_err());
        assert!(Exposure::new(vec![0, -1], vec![]).is_err());
        assert!(Deal::new(vec![], 1, false).is_err());
        let e = Exposure::new(vec![0, 1], vec![0, 1]).unwrap();
        assert!(Deal::new(vec![Portfolio::new(0, vec![e.clone()], "a")], 1, true).is_err());
        assert!(Deal::new(vec![Portfolio::new(0, vec![e], "a")], 2, false).is_err());
    }

    #[test]
    fn islamic_variant_drops_interest() {
        let d = desk_deal().islamic_variant();
        assert!(d.islamic());
        assert_eq!(d.interest_total(), 0);
        assert_eq!(d.capital_total(), 200);
    }
}
