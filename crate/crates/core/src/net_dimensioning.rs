//! Net dimensioning: the payment waterfall of one scenario.
//!
//! Each month the available funds (`TAF` plus cash carried from earlier
//! months) meet the amount due (`TGP` plus arrears). The cash paid out,
//! `TNP`, then runs down the columns of the gross dimensioning matrix in
//! priority order. A month is a payment period when something is due; the
//! last month always settles, paying any residual cash to the last column.
//!
//! Unpaid amounts become arrears (`DBT_j`) that are claimed again at the
//! next payment period, so the column arrears always add up to the global
//! arrears and the columns always share exactly `TNP`.

use serde::Serialize;

use crate::gross_dimensioning::GrossDimensioning;
use crate::money::{apportion, apportion_exact, Money};
use crate::waterfall_design::{assemble_positions, WaterfallDesign};

/// `h(x)`: 1 iff `x > 0`.
pub fn step_indicator(x: Money) -> Money {
    Money::from(x > 0)
}

/// `TGP(t) = Σ_j GDM_j(t)`.
pub fn total_gross_position(gdm: &[Vec<Money>]) -> Vec<Money> {
    let months = gdm.first().map_or(0, Vec::len);
    (0..months).map(|t| gdm.iter().map(|c| c[t]).sum()).collect()
}

/// Global recursion output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NetPosition {
    pub tnp: Vec<Money>,
    pub adv: Vec<Money>,
    pub dbt: Vec<Money>,
    /// Whether each month is a payment period.
    pub pay: Vec<bool>,
}

/// `PAF`, `TAD`, `ADV`, `DBT` and `TNP` month by month.
pub fn total_net_position(taf: &[Money], tgp: &[Money]) -> NetPosition {
    let months = taf.len().min(tgp.len());
    let mut out = NetPosition { tnp: vec![0; months], adv: vec![0; months], dbt: vec![0; months], pay: vec![false; months] };
    let (mut adv_prev, mut dbt_prev) = (0, 0);
    for t in 0..months {
        let last = t + 1 == months;
        let pay = step_indicator(tgp[t]) == 1 || last;
        let paf = taf[t] + adv_prev;
        let tad = tgp[t] + if pay { dbt_prev } else { 0 };
        let mut adv = (paf - tad).max(0);
        let dbt = if pay { (tad - paf).max(0) } else { dbt_prev };
        let mut tnp = paf.min(tad);
        if last {
            tnp += adv;
            adv = 0;
        }
        out.tnp[t] = tnp;
        out.adv[t] = adv;
        out.dbt[t] = dbt;
        out.pay[t] = pay;
        adv_prev = adv;
        dbt_prev = dbt;
    }
    out
}

/// Column recursion output, one series per GDM column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NetMatrix {
    pub ndm: Vec<Vec<Money>>,
    pub dbt: Vec<Vec<Money>>,
    /// Cash left after paying column `j`.
    pub rnp: Vec<Vec<Money>>,
}

/// `NDM_j`, `DBT_j` and `RNP_j`, paying columns left to right.
pub fn net_dimensioning_matrix(net: &NetPosition, gdm: &[Vec<Money>]) -> NetMatrix {
    let h = gdm.len();
    let months = net.tnp.len();
    let mut out = NetMatrix { ndm: vec![vec![0; months]; h], dbt: vec![vec![0; months]; h], rnp: vec![vec![0; months]; h] };
    let mut prev = vec![0; h];
    for t in 0..months {
        let pay = net.pay[t];
        let mut rnp = net.tnp[t];
        for j in 0..h {
            let claim = gdm[j][t] + if pay { prev[j] } else { 0 };
            let paid = claim.min(rnp).max(0);
            out.ndm[j][t] = paid;
            out.dbt[j][t] = if pay { claim - paid } else { prev[j] };
            rnp -= paid;
            out.rnp[j][t] = rnp;
        }
        if rnp > 0 && h > 0 {
            out.ndm[h - 1][t] += rnp;
            out.rnp[h - 1][t] = 0;
        }
        for j in 0..h {
            prev[j] = out.dbt[j][t];
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Net components and positions
// ---------------------------------------------------------------------------

/// Full allocation of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    pub tgp: Vec<Money>,
    pub net: NetPosition,
    pub matrix: NetMatrix,
    pub nv: Vec<Vec<Money>>,
    pub nc: Vec<Vec<Money>>,
    pub nn: Vec<Vec<Money>>,
    pub lc: Vec<Vec<Money>>,
    pub ln: Vec<Vec<Money>>,
}

/// `NV_i(t) = NDM_j(t) · g_i(t)`, split exactly in proportion to `GV_i(t)`
/// (or `v_i` where the column owes nothing).
pub fn net_verticals(d: &WaterfallDesign, ndm: &[Vec<Money>], gross: &GrossDimensioning) -> Vec<Vec<Money>> {
    let months = ndm.first().map_or(0, Vec::len);
    let mut nv = vec![vec![0; months]; d.v_count()];
    for (j, column) in ndm.iter().enumerate() {
        let range = d.vcs_of_hc(j);
        for t in 0..months {
            let parts = if gross.gh[j][t] > 0 {
                let w: Vec<Money> = range.clone().map(|i| gross.gv[i][t]).collect();
                apportion_exact(column[t], &w)
            } else {
                apportion(column[t], &d.v[range.clone()])
            };
            for (i, p) in range.clone().zip(parts) {
                nv[i][t] = p;
            }
        }
    }
    nv
}

fn difference(a: &[Vec<Money>], b: &[Vec<Money>]) -> Vec<Vec<Money>> {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

/// Run the waterfall of one scenario.
pub fn allocate(d: &WaterfallDesign, gross: &GrossDimensioning, taf: &[Money]) -> Allocation {
    let tgp = total_gross_position(&gross.gh);
    let net = total_net_position(taf, &tgp);
    let matrix = net_dimensioning_matrix(&net, &gross.gh);
    let nv = net_verticals(d, &matrix.ndm, gross);
    let (nc, nn) = assemble_positions(d, &nv);
    let lc = difference(&gross.gc, &nc);
    let ln = difference(&gross.gn, &nn);
    Allocation { tgp, net, matrix, nv, nc, nn, lc, ln }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator() {
        assert_eq!(step_indicator(0), 0);
        assert_eq!(step_indicator(-5), 0);
        assert_eq!(step_indicator(1), 1);
        assert_eq!(total_gross_position(&[vec![10], vec![30], vec![40], vec![20]]), vec![100]);
    }

    #[test]
    fn shortfall_then_cure() {
        let n = total_net_position(&[0, 80, 120], &[0, 100, 100]);
        assert_eq!(n.tnp, vec![0, 80, 120]);
        assert_eq!(n.dbt, vec![0, 20, 0]);
        assert_eq!(n.adv, vec![0, 0, 0]);
    }

    #[test]
    fn exact_funding_and_carry() {
        let n = total_net_position(&[0, 50, 50], &[0, 50, 50]);
        assert_eq!((n.tnp, n.adv, n.dbt), (vec![0, 50, 50], vec![0; 3], vec![0; 3]));
        let c = total_net_position(&[0, 50, 0, 0], &[0, 0, 0, 30]);
        assert_eq!(c.tnp[1], 0);
        assert_eq!(c.adv[1], 50);
        assert_eq!(c.tnp[3], 50);
    }

    #[test]
    fn greedy_columns() {
        let gdm = vec![vec![0, 10, 10], vec![0, 30, 30], vec![0, 40, 40], vec![0, 20, 20]];
        let net = total_net_position(&[0, 80, 120], &total_gross_position(&gdm));
        let m = net_dimensioning_matrix(&net, &gdm);
        let col = |t: usize| m.ndm.iter().map(|c| c[t]).collect::<Vec<_>>();
        assert_eq!(col(1), vec![10, 30, 40, 0]);
        assert_eq!(m.dbt[3][1], 20);
        assert_eq!(m.rnp[3][1], 0);
        assert_eq!(col(2), vec![10, 30, 40, 40]);
        assert_eq!(m.dbt[3][2], 0);
    }

    #[test]
    fn residual_cash_goes_to_the_last_column() {
        let gdm = vec![vec![0, 10], vec![0, 20]];
        let net = total_net_position(&[0, 45], &total_gross_position(&gdm));
        let m = net_dimensioning_matrix(&net, &gdm);
        assert_eq!(m.ndm[0][1], 10);
        assert_eq!(m.ndm[1][1], 35);
    }
}
