//! CVA curves and the subordination verdict.
//!
//! `CVA_p(t) = (G_p(t) − mean_s N_p(t)) / TH_p` with `TH_p` the position's
//! thickness at month 0. A position strictly senior to another (all of its
//! columns above all of the other's) must never show the higher curve;
//! positions sharing columns must not cross.

use serde::Serialize;

use crate::error::{PealError, Result, Rule, Violation};
use crate::money::Money;
use crate::waterfall_design::{PositionRef, WaterfallDesign};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvaCurve {
    pub position: PositionRef,
    pub thickness: Money,
    pub curve: Vec<f64>,
}

/// One position's curve from its gross series and mean net series.
pub fn cva_curve(position: PositionRef, gross: &[Money], net_mean: &[f64]) -> Result<CvaCurve> {
    let thickness: Money = gross.iter().skip(1).sum();
    let months = gross.len();
    if thickness == 0 {
        if gross.iter().any(|&g| g != 0) {
            return Err(PealError::ZeroThickness(position.to_string()));
        }
        return Ok(CvaCurve { position, thickness, curve: vec![0.0; months] });
    }
    let th = thickness as f64;
    let curve = (0..months).map(|t| (gross[t] as f64 - net_mean.get(t).copied().unwrap_or(0.0)) / th).collect();
    Ok(CvaCurve { position, thickness, curve })
}

/// All curves plus the verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvaReport {
    pub curves: Vec<CvaCurve>,
    pub violations: Vec<Violation>,
}

impl CvaReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(self.curves.iter().map(|c| c.position.to_string()));
        w.write_record(&header)?;
        let months = self.curves.first().map_or(0, |c| c.curve.len());
        for t in 0..months {
            let mut row = vec![t.to_string()];
            row.extend(self.curves.iter().map(|c| format!("{:.10}", c.curve[t])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn columns(d: &WaterfallDesign, p: PositionRef) -> (usize, usize) {
    let cols = d.components_of(p).iter().map(|&i| d.hc_of_vc(i - 1));
    let lo = cols.clone().min().unwrap_or(0);
    let hi = cols.max().unwrap_or(0);
    (lo, hi)
}

/// Curves of every position and the ordering/crossing verdict.
///
/// `gross` and `net_mean` are indexed like [`WaterfallDesign::positions`]:
/// costs first, then notes.
pub fn cva(d: &WaterfallDesign, gross: &[Vec<Money>], net_mean: &[Vec<f64>]) -> Result<CvaReport> {
    let refs: Vec<PositionRef> = d.positions().map(|(p, _)| p).collect();
    let curves = refs
        .iter()
        .zip(gross.iter().zip(net_mean))
        .map(|(&p, (g, n))| cva_curve(p, g, n))
        .collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    for a in 0..curves.len() {
        for b in a + 1..curves.len() {
            let (ca, cb) = (&curves[a], &curves[b]);
            if ca.thickness == 0 || cb.thickness == 0 {
                continue;
            }
            let (a_lo, a_hi) = columns(d, ca.position);
            let (b_lo, b_hi) = columns(d, cb.position);
            let months = ca.curve.len().min(cb.curve.len());
            let breach = if a_hi < b_lo {
                (1..months).find(|&t| ca.curve[t] > cb.curve[t] + EPS).map(|t| (ca, cb, t))
            } else if b_hi < a_lo {
                (1..months).find(|&t| cb.curve[t] > ca.curve[t] + EPS).map(|t| (cb, ca, t))
            } else {
                crossing(&ca.curve, &cb.curve).map(|t| (ca, cb, t))
            };
            if let Some((senior, junior, t)) = breach {
                violations.push(Violation::new(
                    Rule::CvaCrossing,
                    format!("cva[{},{}]", senior.position, junior.position),
                    format!(
                        "at month {t} CVA {} = {:.6} against {} = {:.6}",
                        senior.position, senior.curve[t], junior.position, junior.curve[t]
                    ),
                ));
            }
        }
    }
    Ok(CvaReport { curves, violations })
}

/// First month at which the sign of `a − b` strictly flips.
fn crossing(a: &[f64], b: &[f64]) -> Option<usize> {
    let mut sign = 0i8;
    for t in 1..a.len().min(b.len()) {
        let d = a[t] - b[t];
        let s = if d > EPS { 1 } else if d < -EPS { -1 } else { 0 };
        if s != 0 {
            if sign != 0 && s != sign {
                return Some(t);
            }
            sign = s;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design() -> WaterfallDesign {
        WaterfallDesign::horizontal([2, 1, 1], vec![0.0, 1.0, 1.0, 1.0])
    }

    #[test]
    fn loss_free_curves_are_flat() {
        let d = design();
        let gross = vec![vec![0, 1, 1], vec![0, 5, 5], vec![0, 2, 2], vec![0, 1, 1]];
        let net: Vec<Vec<f64>> = gross.iter().map(|g| g.iter().map(|&x| x as f64).collect()).collect();
        let r = cva(&d, &gross, &net).unwrap();
        assert!(r.pass());
        assert!(r.curves.iter().all(|c| c.curve.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn junior_above_senior_passes() {
        let d = design();
        let gross = vec![vec![0, 1, 1], vec![0, 5, 5], vec![0, 2, 2], vec![0, 0, 4]];
        let net = vec![vec![0.0, 1.0, 1.0], vec![0.0, 5.0, 5.0], vec![0.0, 2.0, 1.0], vec![0.0, 0.0, 1.0]];
        assert!(cva(&d, &gross, &net).unwrap().pass());
    }

    #[test]
    fn senior_losing_more_is_a_breach() {
        let d = design();
        let gross = vec![vec![0, 1, 1], vec![0, 5, 5], vec![0, 2, 2], vec![0, 2, 2]];
        let net = vec![vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 5.0], vec![0.0, 2.0, 2.0], vec![0.0, 2.0, 2.0]];
        let r = cva(&d, &gross, &net).unwrap();
        assert!(!r.pass());
        assert_eq!(r.violations[0].rule, Rule::CvaCrossing);
    }

    #[test]
    fn zero_thickness_with_flows_is_an_error() {
        assert!(cva_curve(PositionRef::Note(0), &[0, 0], &[0.0, 0.0]).unwrap().curve.iter().all(|&x| x == 0.0));
        assert!(matches!(cva_curve(PositionRef::Note(0), &[5, 0], &[0.0, 0.0]), Err(PealError::ZeroThickness(_))));
    }

    #[test]
    fn strict_sign_change() {
        assert_eq!(crossing(&[0.0, 0.1, 0.1, 0.3], &[0.0, 0.2, 0.1, 0.2]), Some(3));
        assert_eq!(crossing(&[0.0, 0.1, 0.1], &[0.0, 0.1, 0.2]), None);
    }
}
