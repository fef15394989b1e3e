//! Payment frequencies and gross dimensioning.
//!
//! Each vertical component pays `ω` times a year, so every `τ = 12/ω`
//! months it receives the sum of its monthly amounts over the window just
//! closed. Month 0 passes through unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{PealError, Result, Rule, Violation};
use crate::money::{Money, Month};
use crate::waterfall_design::{assemble_positions, DesignSeries, WaterfallDesign};

/// Allowed payments per year.
pub const VALID_FREQUENCIES: [u32; 6] = [1, 2, 3, 4, 6, 12];

/// Months between payments for a frequency `ω`.
pub fn period(omega: u32) -> Result<Month> {
    if VALID_FREQUENCIES.contains(&omega) {
        Ok((12 / omega) as Month)
    } else {
        Err(PealError::InvalidFrequency(omega))
    }
}

/// Payments per year of each vertical component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencySchedule {
    pub omega: Vec<u32>,
}

impl FrequencySchedule {
    pub fn uniform(omega: u32, v_count: usize) -> Self {
        Self { omega: vec![omega; v_count] }
    }

    /// One frequency per horizontal component, repeated over its slices.
    pub fn per_hc(d: &WaterfallDesign, per_hc: &[u32]) -> Self {
        let omega = (0..d.h_count()).flat_map(|j| std::iter::repeat_n(per_hc[j], d.vs[j])).collect();
        Self { omega }
    }

    /// `f(HC_j)`: the highest frequency among its vertical components.
    pub fn hc_frequency(&self, d: &WaterfallDesign, j: usize) -> u32 {
        d.vcs_of_hc(j).map(|i| self.omega[i]).max().unwrap_or(12)
    }

    /// Payment period of each column of the gross dimensioning matrix.
    pub fn column_periods(&self, d: &WaterfallDesign) -> Result<Vec<Month>> {
        (0..d.h_count()).map(|j| period(self.hc_frequency(d, j))).collect()
    }
}

/// Structural and compliance problems with a frequency schedule.
///
/// Invalid values, a wrong count or a horizon not divisible by a period are
/// structural; the vertical, multiple and horizontal rules are compliance
/// verdicts (see [`Rule::is_compliance`]).
pub fn validate_frequencies(d: &WaterfallDesign, fs: &FrequencySchedule, tp: Option<Month>) -> Vec<Violation> {
    let mut out = Vec::new();
    let v = d.v_count();
    if fs.omega.len() != v {
        out.push(Violation::new(
            Rule::FrequencyCount,
            "frequencies",
            format!("need one frequency per vertical component ({v}), got {}", fs.omega.len()),
        ));
        return out;
    }
    let mut structural = false;
    for (i, &w) in fs.omega.iter().enumerate() {
        if !VALID_FREQUENCIES.contains(&w) {
            structural = true;
            out.push(Violation::new(
                Rule::FrequencyValue,
                format!("frequencies[VC{}]", i + 1),
                format!("{w} is not one of 1, 2, 3, 4, 6, 12"),
            ));
        } else if let Some(tp) = tp {
            let tau = (12 / w) as Month;
            if tp % tau != 0 {
                out.push(Violation::new(
                    Rule::HorizonDivisibility,
                    format!("frequencies[VC{}]", i + 1),
                    format!("TP = {tp} is not a multiple of the {tau}-month period"),
                ));
            }
        }
    }
    if structural {
        return out;
    }
    let h = d.h_count();
    for j in 0..h {
        let range = d.vcs_of_hc(j);
        let first = fs.omega[range.start];
        if range.clone().any(|i| fs.omega[i] != first) {
            let list: Vec<String> = range.map(|i| fs.omega[i].to_string()).collect();
            out.push(Violation::new(
                Rule::HorizontalRule,
                format!("frequencies[HC{}]", j + 1),
                format!("vertical components of HC{} pay at different frequencies {{{}}}", j + 1, list.join(",")),
            ));
        }
    }
    for j in 0..h.saturating_sub(1) {
        let (a, b) = (fs.hc_frequency(d, j), fs.hc_frequency(d, j + 1));
        if a < b {
            out.push(Violation::new(
                Rule::VerticalRule,
                format!("frequencies[HC{}..HC{}]", j + 1, j + 2),
                format!("HC{} pays {a}/yr, less often than the junior HC{} at {b}/yr", j + 1, j + 2),
            ));
        }
        if a % b != 0 {
            out.push(Violation::new(
                Rule::MultipleRule,
                format!("frequencies[HC{}..HC{}]", j + 1, j + 2),
                format!("{a}/yr is not a multiple of {b}/yr"),
            ));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Transformation
// ---------------------------------------------------------------------------

/// `𝔽(cf, ω)`: window sums at multiples of `τ`, zero elsewhere.
pub fn freq_transform(cf: &[Money], omega: u32) -> Result<Vec<Money>> {
    let tau = period(omega)?;
    Ok(window_sums(cf, tau))
}

pub(crate) fn window_sums(cf: &[Money], tau: Month) -> Vec<Money> {
    let mut out = vec![0; cf.len()];
    let mut acc = 0;
    for (t, &x) in cf.iter().enumerate() {
        acc += x;
        if t % tau == 0 {
            out[t] = acc;
            acc = 0;
        }
    }
    out
}

/// Gross amounts due under a design and frequency schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrossDimensioning {
    /// `GV_i` per vertical component.
    pub gv: Vec<Vec<Money>>,
    /// `GH_j` per horizontal component: the columns of the GDM.
    pub gh: Vec<Vec<Money>>,
    pub gc: Vec<Vec<Money>>,
    pub gn: Vec<Vec<Money>>,
    /// Payment period of each GDM column.
    pub periods: Vec<Month>,
}

impl GrossDimensioning {
    pub fn months(&self) -> usize {
        self.gh.first().map_or(0, Vec::len)
    }

    /// The gross dimensioning matrix as rows (`t`) of columns (`j`).
    pub fn gdm_rows(&self) -> Vec<Vec<Money>> {
        (0..self.months()).map(|t| self.gh.iter().map(|c| c[t]).collect()).collect()
    }

    pub fn write_gdm_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        write_matrix_csv(out, &self.gh)
    }
}

/// Write month-by-column series as CSV with a `t` column and `GH1..` headers.
pub fn write_matrix_csv<W: std::io::Write>(out: W, columns: &[Vec<Money>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=columns.len()).map(|j| format!("col{j}")));
    w.write_record(&header)?;
    let months = columns.first().map_or(0, Vec::len);
    for t in 0..months {
        let mut row = vec![t.to_string()];
        row.extend(columns.iter().map(|c| c[t].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `GV_i = 𝔽(VC_i, ω_i)`.
pub fn gross_vertical(vc: &[Money], omega: u32) -> Result<Vec<Money>> {
    freq_transform(vc, omega)
}

/// `GH_j = Σ_{i ∈ HC_j} GV_i`.
pub fn gross_horizontals(d: &WaterfallDesign, gv: &[Vec<Money>]) -> Vec<Vec<Money>> {
    let months = gv.first().map_or(0, Vec::len);
    (0..d.h_count())
        .map(|j| {
            let mut col = vec![0; months];
            for i in d.vcs_of_hc(j) {
                for (c, x) in col.iter_mut().zip(&gv[i]) {
                    *c += x;
                }
            }
            col
        })
        .collect()
}

/// Gross dimensioning of evaluated design series.
pub fn gross_dimension(d: &WaterfallDesign, fs: &FrequencySchedule, series: &DesignSeries) -> Result<GrossDimensioning> {
    let gv = series
        .vc
        .iter()
        .zip(&fs.omega)
        .map(|(vc, &w)| gross_vertical(vc, w))
        .collect::<Result<Vec<_>>>()?;
    let gh = gross_horizontals(d, &gv);
    let (gc, gn) = assemble_positions(d, &gv);
    let periods = fs.column_periods(d)?;
    Ok(GrossDimensioning { gv, gh, gc, gn, periods })
}

// ---------------------------------------------------------------------------
// g-check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GCheck {
    /// `g_i(t) = GV_i(t) / GH_j(t)`, or `v_i` where `GH_j(t) = 0`.
    pub g: Vec<Vec<f64>>,
    pub violations: Vec<Violation>,
}

impl GCheck {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compare the payment-month ratios with the vertical percentages.
///
/// Integer apportionment puts each `VC_i(t)` within one minor unit of
/// `v_i · HC_j(t)`, so a window of `τ` months may drift by up to `τ` units;
/// larger gaps are breaches.
pub fn g_check(d: &WaterfallDesign, fs: &FrequencySchedule, gross: &GrossDimensioning) -> GCheck {
    let months = gross.months();
    let mut g = vec![vec![0.0; months]; d.v_count()];
    let mut violations = Vec::new();
    for j in 0..d.h_count() {
        let range = d.vcs_of_hc(j);
        let tolerance = range.clone().map(|i| 12 / fs.omega[i].max(1)).max().unwrap_or(1) as f64;
        let mut breached: Option<(usize, Month)> = None;
        for t in 0..months {
            let gh = gross.gh[j][t];
            for i in range.clone() {
                if gh == 0 {
                    g[i][t] = d.v[i];
                    continue;
                }
                g[i][t] = gross.gv[i][t] as f64 / gh as f64;
                let gap = (gross.gv[i][t] as f64 - d.v[i] * gh as f64).abs();
                if gap > tolerance && breached.is_none() {
                    breached = Some((i, t));
                }
            }
        }
        if let Some((i, t)) = breached {
            violations.push(Violation::new(
                Rule::GCheck,
                format!("gdm[HC{}]", j + 1),
                format!(
                    "g{}({t}) = {:.6} differs from v{} = {:.6}",
                    i + 1,
                    g[i][t],
                    i + 1,
                    d.v[i]
                ),
            ));
        }
    }
    GCheck { g, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waterfall_design::vertical_components;

    fn fig1() -> WaterfallDesign {
        WaterfallDesign::fig1(0.5)
    }

    #[test]
    fn periods() {
        assert_eq!(period(12).unwrap(), 1);
        assert_eq!(period(4).unwrap(), 3);
        assert_eq!(period(1).unwrap(), 12);
        assert!(matches!(period(5), Err(PealError::InvalidFrequency(5))));
    }

    #[test]
    fn rule_respecting_schedule() {
        let d = fig1();
        let fs = FrequencySchedule::per_hc(&d, &[12, 12, 4, 4, 1]);
        assert!(validate_frequencies(&d, &fs, Some(12)).is_empty());
    }

    #[test]
    fn rule_breaches() {
        let d = fig1();
        let fs = FrequencySchedule::per_hc(&d, &[4, 12, 4, 4, 1]);
        assert!(validate_frequencies(&d, &fs, Some(12)).iter().any(|v| v.rule == Rule::VerticalRule));
        let mut fs = FrequencySchedule::per_hc(&d, &[12, 12, 4, 4, 1]);
        fs.omega[3] = 12;
        let v = validate_frequencies(&d, &fs, Some(12));
        assert!(v.iter().any(|v| v.rule == Rule::HorizontalRule && v.location.contains("HC3")));
        let fs = FrequencySchedule::per_hc(&d, &[12, 6, 4, 4, 1]);
        assert!(validate_frequencies(&d, &fs, Some(12)).iter().any(|v| v.rule == Rule::MultipleRule));
        let fs = FrequencySchedule::per_hc(&d, &[12, 12, 4, 4, 1]);
        let v = validate_frequencies(&d, &fs, Some(10));
        assert!(v.iter().all(|v| v.rule == Rule::HorizonDivisibility) && !v.is_empty());
        assert_eq!(validate_frequencies(&d, &FrequencySchedule::uniform(5, 8), None)[0].rule, Rule::FrequencyValue);
    }

    #[test]
    fn window_sums_bulk_the_flows() {
        let cf = [0, 10, 10, 10, 10, 10, 10];
        assert_eq!(freq_transform(&cf, 4).unwrap(), vec![0, 0, 0, 30, 0, 0, 30]);
        assert_eq!(freq_transform(&cf, 12).unwrap(), cf.to_vec());
        assert_eq!(freq_transform(&[0; 5], 4).unwrap(), vec![0; 5]);
        assert_eq!(freq_transform(&[7, 1, 1, 1], 4).unwrap(), vec![7, 0, 0, 3]);
    }

    fn gross_for(d: &WaterfallDesign, fs: &FrequencySchedule, hc: Vec<Vec<Money>>) -> GrossDimensioning {
        let vc = vertical_components(d, &hc);
        let (costs, notes) = assemble_positions(d, &vc);
        let s = DesignSeries { vp: vec![], hc, vc, costs, notes };
        gross_dimension(d, fs, &s).unwrap()
    }

    #[test]
    fn g_check_in_both_directions() {
        let d = fig1();
        let hc: Vec<Vec<Money>> = (0..5).map(|j| (0..13).map(|t| if t == 0 { 0 } else { 1000 * (j as Money + 1) + t as Money }).collect()).collect();
        let fs = FrequencySchedule::per_hc(&d, &[12, 12, 4, 4, 1]);
        let ok = gross_for(&d, &fs, hc.clone());
        let check = g_check(&d, &fs, &ok);
        assert!(check.pass());
        assert!((check.g[2][3] - 0.5).abs() < 1e-3);
        let mut bad = fs.clone();
        bad.omega[2] = 12;
        let broken = gross_for(&d, &bad, hc);
        assert!(!g_check(&d, &bad, &broken).pass());
    }

    #[test]
    fn monthly_everywhere_is_the_identity() {
        let d = fig1();
        let hc: Vec<Vec<Money>> = (0..5).map(|j| vec![0, 10 * j as Money, 7, 3]).collect();
        let fs = FrequencySchedule::uniform(12, 8);
        let g = gross_for(&d, &fs, hc.clone());
        assert_eq!(g.gh, hc);
        assert_eq!(g.gn[3], (0..4).map(|t| g.gv[3][t] + g.gv[5][t] + g.gv[7][t]).collect::<Vec<_>>());
    }
}
