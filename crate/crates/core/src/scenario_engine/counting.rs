//! Size of the scenario space, as exact big integers.

use num_bigint::BigUint;
use num_traits::{One, Pow};

use crate::asset_model::Deal;
use crate::error::{PealError, Result};

/// Scenarios when only *which* events occur matters: `Π_k NE^{N_k}`.
pub fn scenario_count_if(deal: &Deal, ne: u32) -> BigUint {
    deal.portfolios()
        .iter()
        .map(|p| Pow::pow(BigUint::from(ne), p.exposures.len()))
        .fold(BigUint::one(), |acc, x| acc * x)
}

/// Scenarios when *when* an event occurs matters, one event per exposure:
/// `Π_k ((NE−1)·T_k + 1)^{N_k}`.
///
/// Every exposure of a portfolio must share the same duration `T_k`.
pub fn scenario_count_when(deal: &Deal, ne: u32) -> Result<BigUint> {
    let mut total = BigUint::one();
    for (k, p) in deal.portfolios().iter().enumerate() {
        let t_k = p.exposures[0].duration();
        if p.exposures.iter().any(|e| e.duration() != t_k) {
            return Err(PealError::MixedDurations { portfolio: k + 1 });
        }
        total *= when_factor(ne, t_k as u64, p.exposures.len());
    }
    Ok(total)
}

/// `((NE−1)·T + 1)^N` for one homogeneous portfolio.
pub fn when_factor(ne: u32, duration: u64, exposures: usize) -> BigUint {
    let base = BigUint::from(ne.saturating_sub(1) as u64) * BigUint::from(duration) + BigUint::one();
    Pow::pow(base, exposures)
}
