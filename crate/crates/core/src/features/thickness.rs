//! Position thickness.
//!
//! The general form is the outstanding gross balance of a position,
//! `Σ_{τ>t} G(τ)`. The attachment/detachment form works on horizontal
//! designs only; its fractions are kept exact so `OBP · THP_p = OB_p`
//! holds with no rounding.

use num_rational::Ratio;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{PealError, Result};
use crate::gross_dimensioning::GrossDimensioning;
use crate::money::{tail_sums, Money};
use crate::waterfall_design::WaterfallDesign;

/// `THC_x(t)` and `THN_y(t)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Thickness {
    pub costs: Vec<Vec<Money>>,
    pub notes: Vec<Vec<Money>>,
}

/// Outstanding gross balance of every cost and note position.
pub fn thickness_peal(gross: &GrossDimensioning) -> Thickness {
    Thickness {
        costs: gross.gc.iter().map(|s| tail_sums(s)).collect(),
        notes: gross.gn.iter().map(|s| tail_sums(s)).collect(),
    }
}

/// Attachment/detachment measures per GDM column, in waterfall order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegulatoryThickness {
    pub ob: Vec<Vec<Money>>,
    pub obp: Vec<Money>,
    #[serde(skip)]
    pub ap: Vec<Vec<Ratio<i128>>>,
    #[serde(skip)]
    pub dp: Vec<Vec<Ratio<i128>>>,
    #[serde(skip)]
    pub thp: Vec<Vec<Ratio<i128>>>,
    #[serde(skip)]
    pub th: Vec<Vec<Ratio<i128>>>,
}

/// Regulatory thickness of a strictly horizontal design.
pub fn thickness_regulatory(d: &WaterfallDesign, gross: &GrossDimensioning) -> Result<RegulatoryThickness> {
    if !d.is_horizontal() {
        return Err(PealError::VerticalDesign);
    }
    Ok(regulatory_from_columns(&gross.gh))
}

/// Regulatory thickness of arbitrary columns, most senior first.
pub fn regulatory_from_columns(columns: &[Vec<Money>]) -> RegulatoryThickness {
    let ob: Vec<Vec<Money>> = columns.iter().map(|c| tail_sums(c)).collect();
    let months = ob.first().map_or(0, Vec::len);
    let p = ob.len();
    let obp: Vec<Money> = (0..months).map(|t| ob.iter().map(|c| c[t]).sum()).collect();
    let zero = Ratio::zero();
    let mut ap = vec![vec![zero; months]; p];
    let mut dp = vec![vec![zero; months]; p];
    let mut thp = vec![vec![zero; months]; p];
    let mut th = vec![vec![zero; months]; p];
    for t in 0..months {
        if obp[t] == 0 {
            continue;
        }
        let total = obp[t] as i128;
        let mut below: i128 = 0;
        for i in (0..p).rev() {
            ap[i][t] = Ratio::new(below, total);
            below += ob[i][t] as i128;
        }
        for i in 0..p {
            dp[i][t] = if i == 0 { Ratio::from_integer(1) } else { ap[i - 1][t] };
            thp[i][t] = dp[i][t] - ap[i][t];
            th[i][t] = thp[i][t] * Ratio::from_integer(total);
        }
    }
    RegulatoryThickness { ob, obp, ap, dp, thp, th }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_columns() {
        let r = regulatory_from_columns(&[vec![0, 60], vec![0, 40]]);
        assert_eq!(r.obp[0], 100);
        assert_eq!(r.ap[0][0], Ratio::new(40, 100));
        assert_eq!(r.ap[1][0], Ratio::zero());
        assert_eq!(r.dp[0][0], Ratio::from_integer(1));
        assert_eq!(r.dp[1][0], Ratio::new(2, 5));
        assert_eq!(r.thp[0][0], Ratio::new(3, 5));
        assert_eq!(r.thp[1][0], Ratio::new(2, 5));
    }

    #[test]
    fn single_column_is_the_whole_balance() {
        let r = regulatory_from_columns(&[vec![0, 7, 3]]);
        assert_eq!(r.thp[0][0], Ratio::from_integer(1));
        assert_eq!(r.th[0][0], Ratio::from_integer(10));
        assert_eq!(r.th[0][2], Ratio::zero());
    }

    #[test]
    fn thickness_equals_the_outstanding_balance() {
        let cols = vec![vec![0, 13, 7, 1], vec![0, 3, 0, 9], vec![0, 0, 0, 17]];
        let r = regulatory_from_columns(&cols);
        for p in 0..3 {
            for t in 0..4 {
                assert_eq!(r.th[p][t], Ratio::from_integer(r.ob[p][t] as i128));
            }
        }
    }
}
