//! Internal rate of return by bracketed bisection.
//!
//! Rates are monthly, matching the month-indexed cash flows; the annual
//! figure is the compounded `(1 + r)^12 − 1`.

use serde::Serialize;

use crate::error::{PealError, Result};

const LOWER: f64 = -0.99;
const UPPER: f64 = 10.0;
const SCAN_STEPS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Irr {
    pub monthly: f64,
    pub annual: f64,
}

impl Irr {
    fn from_monthly(monthly: f64) -> Self {
        Self { monthly, annual: (1.0 + monthly).powi(12) - 1.0 }
    }
}

/// Outcome of a root search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IrrOutcome {
    Solved(Irr),
    /// No sign change of the pricing error on the search interval.
    NoSolution,
}

impl IrrOutcome {
    pub fn rate(&self) -> Option<Irr> {
        match self {
            IrrOutcome::Solved(r) => Some(*r),
            IrrOutcome::NoSolution => None,
        }
    }
}

/// `Σ_t cf(t) / (1 + r)^t`.
pub fn present_value(cashflows: &[f64], r: f64) -> f64 {
    let d = 1.0 / (1.0 + r);
    let mut factor = 1.0;
    let mut pv = 0.0;
    for &cf in cashflows {
        pv += cf * factor;
        factor *= d;
    }
    pv
}

/// Monthly rate `r` with `Σ_t cf(t) / (1 + r)^t = price`, searched on `(−0.99, 10)`.
pub fn irr(cashflows: &[f64], price: f64) -> Result<IrrOutcome> {
    if !price.is_finite() || price <= 0.0 {
        return Err(PealError::InvalidCashflows(format!("price must be positive, got {price}")));
    }
    if cashflows.iter().all(|&c| c == 0.0) {
        return Err(PealError::InvalidCashflows("all cash flows are zero".into()));
    }
    let f = |r: f64| present_value(cashflows, r) - price;
    if f(0.0) == 0.0 {
        return Ok(IrrOutcome::Solved(Irr::from_monthly(0.0)));
    }
    let (a, b) = (LOWER, UPPER);
    let bracket = if f(a).signum() != f(b).signum() { Some((a, b)) } else { scan_bracket(&f) };
    Ok(match bracket {
        Some((lo, hi)) => IrrOutcome::Solved(Irr::from_monthly(bisect(&f, lo, hi))),
        None => IrrOutcome::NoSolution,
    })
}

/// Bracket around the sign change nearest to zero on a uniform grid.
fn scan_bracket(f: &impl Fn(f64) -> f64) -> Option<(f64, f64)> {
    let step = (UPPER - LOWER) / SCAN_STEPS as f64;
    let mut best: Option<(f64, f64)> = None;
    let mut prev = (LOWER, f(LOWER));
    for k in 1..=SCAN_STEPS {
        let x = LOWER + step * k as f64;
        let y = f(x);
        if y == 0.0 || y.signum() != prev.1.signum() {
            let closer = best.is_none_or(|(lo, hi)| prev.0.abs().min(x.abs()) < lo.abs().min(hi.abs()));
            if closer {
                best = Some((prev.0, x));
            }
        }
        prev = (x, y);
    }
    best
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gross and net rates of one note bought for `price`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoteIrr {
    pub price: f64,
    pub girr: IrrOutcome,
    pub nirr: IrrOutcome,
}

/// `girr` from the gross note flows and `nirr` from the mean net flows.
pub fn gross_net_irr(gross: &[f64], net_mean: &[f64], price: f64) -> Result<NoteIrr> {
    let girr = irr(gross, price).or_else(no_flows)?;
    let nirr = irr(net_mean, price).or_else(no_flows)?;
    Ok(NoteIrr { price, girr, nirr })
}

fn no_flows(e: PealError) -> Result<IrrOutcome> {
    match e {
        PealError::InvalidCashflows(ref m) if m.contains("zero") => Ok(IrrOutcome::NoSolution),
        e => Err(e),
    }
}

/// `CY_0 = min(C_0, Σ_y FVY_y(0))`.
pub fn total_note_price(capital: f64, fair_value_total: f64) -> f64 {
    capital.min(fair_value_total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_percent_closed_form() {
        let mut cf = vec![0.0; 13];
        cf[12] = 110.0;
        let r = irr(&cf, 100.0).unwrap().rate().unwrap();
        assert!((r.monthly - (1.1f64.powf(1.0 / 12.0) - 1.0)).abs() < 1e-12);
        assert!((r.annual - 0.1).abs() / 0.1 < 1e-8);
    }

    #[test]
    fn flat_price_gives_zero() {
        let r = irr(&[100.0], 100.0).unwrap().rate().unwrap();
        assert_eq!(r.monthly, 0.0);
        let r = irr(&[0.0, 50.0, 50.0], 100.0).unwrap().rate().unwrap();
        assert_eq!(r.monthly, 0.0);
    }

    #[test]
    fn overpaying_gives_a_negative_rate() {
        let r = irr(&[0.0, 50.0, 50.0], 120.0).unwrap().rate().unwrap();
        assert!(r.monthly < 0.0);
        assert!((present_value(&[0.0, 50.0, 50.0], r.monthly) - 120.0).abs() < 1e-8);
    }

    #[test]
    fn impossible_prices_have_no_solution() {
        assert_eq!(irr(&[0.0, -5.0], 100.0).unwrap(), IrrOutcome::NoSolution);
        assert!(irr(&[0.0, 0.0], 100.0).is_err());
        assert!(irr(&[1.0], 0.0).is_err());
    }

    #[test]
    fn gross_and_net() {
        let n = gross_net_irr(&[0.0, 0.0, 110.0], &[0.0, 0.0, 0.0], 100.0).unwrap();
        assert!(n.girr.rate().unwrap().monthly > 0.0);
        assert_eq!(n.nirr, IrrOutcome::NoSolution);
        assert_eq!(total_note_price(200.0, 150.0), 150.0);
    }
}
