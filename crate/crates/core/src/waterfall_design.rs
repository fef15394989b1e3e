//! Waterfall superstructure: virtual positions, horizontal and vertical
//! components, and the mapping of vertical components to cost and note
//! positions.
//!
//! The three virtual positions are the complementary, second and first
//! loss tranches, in that order. Each is cut into horizontal components by
//! the `h` percentages, each horizontal component into vertical components
//! by `v`. The first horizontal component is always the mean super senior
//! series; the remaining slices of the first virtual position share what is
//! left in proportion to their `h`.

use serde::{Deserialize, Serialize};

use crate::error::{PealError, Result, Rule, Violation};
use crate::money::{apportion, Money};
use crate::tranching::Tranching;

/// Number of virtual positions.
pub const NP: usize = 3;

const TOLERANCE: f64 = 1e-9;

/// Seniority inherited from the ancestor virtual position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quality {
    Senior,
    Mezzanine,
    Junior,
}

impl Quality {
    pub fn of_virtual_position(p: usize) -> Self {
        match p {
            0 => Quality::Senior,
            1 => Quality::Mezzanine,
            _ => Quality::Junior,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quality::Senior => "senior",
            Quality::Mezzanine => "mezzanine",
            Quality::Junior => "junior",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionKind {
    Cost,
    Note,
}

/// Identifies a cost (`C_x`) or note (`N_y`) position, zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PositionRef {
    Cost(usize),
    Note(usize),
}

impl std::fmt::Display for PositionRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PositionRef::Cost(x) => write!(f, "C{}", x + 1),
            PositionRef::Note(y) => write!(f, "N{}", y + 1),
        }
    }
}

// ---------------------------------------------------------------------------
// Design
// ---------------------------------------------------------------------------

/// Slicing and mapping of one waterfall. Component indices in `costs` and
/// `notes` are 1-based vertical component numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaterfallDesign {
    /// Horizontal slices per virtual position (`HS`).
    pub hs: Vec<usize>,
    /// Horizontal percentage per horizontal component. The first entry is
    /// derived from the super senior mean and its value is ignored.
    pub h: Vec<f64>,
    /// Vertical slices per horizontal component (`VS`).
    pub vs: Vec<usize>,
    /// Vertical percentage per vertical component.
    pub v: Vec<f64>,
    /// Vertical components of each cost position.
    pub costs: Vec<Vec<usize>>,
    /// Vertical components of each note position.
    pub notes: Vec<Vec<usize>>,
}

impl WaterfallDesign {
    /// The reference design: `HS = {3,1,1}`, `VS = {1,1,2,2,2}`, one cost
    /// position over the first two components and a vertical retention note
    /// taking `retention` of every tranche below them.
    pub fn fig1(retention: f64) -> Self {
        let r = retention;
        Self {
            hs: vec![3, 1, 1],
            h: vec![0.0, 0.5, 0.5, 1.0, 1.0],
            vs: vec![1, 1, 2, 2, 2],
            v: vec![1.0, 1.0, 1.0 - r, r, 1.0 - r, r, 1.0 - r, r],
            costs: vec![vec![1, 2]],
            notes: vec![vec![3], vec![5], vec![7], vec![4, 6, 8]],
        }
    }

    /// Purely horizontal design: one cost position on the super senior
    /// component and one note per remaining horizontal component.
    pub fn horizontal(hs: [usize; NP], h: Vec<f64>) -> Self {
        let total: usize = hs.iter().sum();
        Self {
            hs: hs.to_vec(),
            h,
            vs: vec![1; total],
            v: vec![1.0; total],
            costs: vec![vec![1]],
            notes: (2..=total).map(|i| vec![i]).collect(),
        }
    }

    /// Total horizontal components `H`.
    pub fn h_count(&self) -> usize {
        self.hs.iter().sum()
    }

    /// Total vertical components `V`.
    pub fn v_count(&self) -> usize {
        self.vs.iter().sum()
    }

    pub fn cost_count(&self) -> usize {
        self.costs.len()
    }

    pub fn note_count(&self) -> usize {
        self.notes.len()
    }

    pub fn positions(&self) -> impl Iterator<Item = (PositionRef, &Vec<usize>)> {
        self.costs
            .iter()
            .enumerate()
            .map(|(x, c)| (PositionRef::Cost(x), c))
            .chain(self.notes.iter().enumerate().map(|(y, n)| (PositionRef::Note(y), n)))
    }

    pub fn components_of(&self, p: PositionRef) -> &[usize] {
        match p {
            PositionRef::Cost(x) => &self.costs[x],
            PositionRef::Note(y) => &self.notes[y],
        }
    }

    /// Virtual position (0-based) owning horizontal component `j` (0-based).
    pub fn vp_of_hc(&self, j: usize) -> usize {
        let mut acc = 0;
        for (p, &n) in self.hs.iter().enumerate() {
            acc += n;
            if j < acc {
                return p;
            }
        }
        self.hs.len() - 1
    }

    /// Horizontal components (0-based range) of virtual position `p`.
    pub fn hcs_of_vp(&self, p: usize) -> std::ops::Range<usize> {
        let start: usize = self.hs[..p].iter().sum();
        start..start + self.hs[p]
    }

    /// Horizontal component (0-based) owning vertical component `i` (0-based).
    pub fn hc_of_vc(&self, i: usize) -> usize {
        let mut acc = 0;
        for (j, &n) in self.vs.iter().enumerate() {
            acc += n;
            if i < acc {
                return j;
            }
        }
        self.vs.len() - 1
    }

    /// Vertical components (0-based range) of horizontal component `j`.
    pub fn vcs_of_hc(&self, j: usize) -> std::ops::Range<usize> {
        let start: usize = self.vs[..j].iter().sum();
        start..start + self.vs[j]
    }

    pub fn quality_of_vc(&self, i: usize) -> Quality {
        Quality::of_virtual_position(self.vp_of_hc(self.hc_of_vc(i)))
    }

    /// True when every horizontal component has exactly one vertical slice
    /// and every position is one horizontal component.
    pub fn is_horizontal(&self) -> bool {
        self.vs.iter().all(|&n| n == 1) && self.positions().all(|(_, c)| c.len() == 1)
    }

    /// Positions in waterfall order when the design is horizontal.
    pub fn horizontal_order(&self) -> Option<Vec<PositionRef>> {
        if !self.is_horizontal() {
            return None;
        }
        let mut order: Vec<(usize, PositionRef)> = self.positions().map(|(p, c)| (c[0], p)).collect();
        order.sort();
        Some(order.into_iter().map(|(_, p)| p).collect())
    }

    /// Position (if any) holding 1-based vertical component `i`.
    pub fn position_of_vc(&self, i: usize) -> Option<PositionRef> {
        self.positions().find(|(_, c)| c.contains(&i)).map(|(p, _)| p)
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Structural problems with a design; empty iff the design is usable.
pub fn validate_design(d: &WaterfallDesign) -> Vec<Violation> {
    let mut out = Vec::new();
    macro_rules! push {
        ($rule:expr, $loc:expr, $msg:expr $(,)?) => {
            out.push(Violation::new($rule, String::from($loc), String::from($msg)))
        };
    }

    if d.hs.len() != NP {
        push!(Rule::VirtualPositions, "design.hs", format!("need {NP} virtual positions, got {}", d.hs.len()));
        return out;
    }
    for (p, &n) in d.hs.iter().enumerate() {
        let min = if p == 0 { 2 } else { 1 };
        if n < min {
            push!(
                Rule::SliceCount,
                format!("design.hs[VP{}]", p + 1),
                format!("VP{} needs at least {min} horizontal slice(s), got {n}", p + 1),
            );
        }
    }
    let h_count = d.h_count();
    if d.h.len() != h_count {
        push!(Rule::SliceCount, "design.h", format!("need {h_count} horizontal percentages, got {}", d.h.len()));
    }
    if d.vs.len() != h_count {
        push!(Rule::SliceCount, "design.vs", format!("need {h_count} vertical slice counts, got {}", d.vs.len()));
    }
    if !out.is_empty() {
        return out;
    }

    for (j, &x) in d.h.iter().enumerate().skip(1) {
        if !(0.0..=1.0).contains(&x) {
            push!(Rule::HorizontalPartition, format!("design.h[HC{}]", j + 1), format!("{x} outside [0, 1]"));
        }
    }
    for p in 0..NP {
        let range = d.hcs_of_vp(p);
        let skip = usize::from(p == 0);
        let sum: f64 = d.h[range.clone()].iter().skip(skip).sum();
        if (sum - 1.0).abs() > TOLERANCE {
            let what = if p == 0 { "the slices after HC1" } else { "its slices" };
            push!(
                Rule::HorizontalPartition,
                format!("design.h[VP{}]", p + 1),
                format!("percentages of {what} sum to {:.4}%, not 100%", sum * 100.0),
            );
        }
    }

    if d.vs[0] != 1 {
        push!(Rule::SliceCount, "design.vs[HC1]", "the super senior component cannot be subdivided");
    }
    for (j, &n) in d.vs.iter().enumerate() {
        if n == 0 {
            push!(Rule::SliceCount, format!("design.vs[HC{}]", j + 1), "need at least one vertical slice");
        }
    }
    let v_count = d.v_count();
    if d.v.len() != v_count {
        push!(Rule::SliceCount, "design.v", format!("need {v_count} vertical percentages, got {}", d.v.len()));
    } else {
        for (i, &x) in d.v.iter().enumerate() {
            if !(0.0..=1.0).contains(&x) {
                push!(Rule::VerticalPartition, format!("design.v[VC{}]", i + 1), format!("{x} outside [0, 1]"));
            }
        }
        for j in 0..h_count {
            let range = d.vcs_of_hc(j);
            if range.is_empty() {
                continue;
            }
            let sum: f64 = d.v[range].iter().sum();
            if (sum - 1.0).abs() > TOLERANCE {
                push!(
                    Rule::VerticalPartition,
                    format!("design.v[HC{}]", j + 1),
                    format!("vertical percentages of HC{} sum to {:.4}%, not 100%", j + 1, sum * 100.0),
                );
            }
        }
    }

    if d.costs.is_empty() || d.notes.is_empty() {
        push!(
            Rule::PositionCount,
            "design",
            format!("need at least one cost and one note position, got X={} Y={}", d.costs.len(), d.notes.len()),
        );
    }
    let mut seen = vec![0usize; v_count];
    for (p, comps) in d.positions() {
        if comps.is_empty() {
            push!(Rule::Coverage, format!("design.{p}"), format!("{p} maps no vertical component"));
        }
        for &i in comps {
            if i == 0 || i > v_count {
                push!(Rule::Coverage, format!("design.{p}"), format!("VC{i} does not exist (V = {v_count})"));
            } else {
                seen[i - 1] += 1;
            }
        }
    }
    for (i, &n) in seen.iter().enumerate() {
        if n == 0 {
            push!(Rule::Coverage, format!("design.VC{}", i + 1), format!("VC{} is not mapped to any position", i + 1));
        } else if n > 1 {
            push!(Rule::Coverage, format!("design.VC{}", i + 1), format!("VC{} is mapped {n} times", i + 1));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Monthly series of every layer of a design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignSeries {
    pub vp: Vec<Vec<Money>>,
    pub hc: Vec<Vec<Money>>,
    pub vc: Vec<Vec<Money>>,
    pub costs: Vec<Vec<Money>>,
    pub notes: Vec<Vec<Money>>,
}

impl DesignSeries {
    pub fn position(&self, p: PositionRef) -> &[Money] {
        match p {
            PositionRef::Cost(x) => &self.costs[x],
            PositionRef::Note(y) => &self.notes[y],
        }
    }
}

/// `VP₁ = CLT`, `VP₂ = SLT`, `VP₃ = FLT`.
pub fn virtual_positions(tr: &Tranching) -> Vec<Vec<Money>> {
    vec![tr.clt.clone(), tr.slt.clone(), tr.flt.clone()]
}

/// Horizontal components from the virtual positions and the super senior mean.
pub fn horizontal_components(d: &WaterfallDesign, vp: &[Vec<Money>], sse_mean: &[Money]) -> Result<Vec<Vec<Money>>> {
    let months = vp[0].len();
    let mut hc = vec![vec![0; months]; d.h_count()];
    for t in 0..months {
        let senior = sse_mean.get(t).copied().unwrap_or(0);
        if senior > vp[0][t] {
            return Err(PealError::SeniorReserveExceeded { month: t, sse: senior, senior: vp[0][t] });
        }
        for p in 0..NP {
            let range = d.hcs_of_vp(p);
            let (first, total) = if p == 0 { (range.start + 1, vp[0][t] - senior) } else { (range.start, vp[p][t]) };
            if p == 0 {
                hc[range.start][t] = senior;
            }
            for (j, part) in (first..range.end).zip(apportion(total, &d.h[first..range.end])) {
                hc[j][t] = part;
            }
        }
    }
    Ok(hc)
}

/// Vertical components from the horizontal components.
pub fn vertical_components(d: &WaterfallDesign, hc: &[Vec<Money>]) -> Vec<Vec<Money>> {
    let months = hc.first().map_or(0, Vec::len);
    let mut vc = vec![vec![0; months]; d.v_count()];
    for (j, series) in hc.iter().enumerate() {
        let range = d.vcs_of_hc(j);
        for (t, &total) in series.iter().enumerate() {
            for (i, part) in range.clone().zip(apportion(total, &d.v[range.clone()])) {
                vc[i][t] = part;
            }
        }
    }
    vc
}

/// Sum mapped component series into cost and note positions.
pub fn assemble_positions(d: &WaterfallDesign, vc: &[Vec<Money>]) -> (Vec<Vec<Money>>, Vec<Vec<Money>>) {
    let months = vc.first().map_or(0, Vec::len);
    let sum = |comps: &Vec<usize>| {
        let mut out = vec![0; months];
        for &i in comps {
            for (o, x) in out.iter_mut().zip(&vc[i - 1]) {
                *o += x;
            }
        }
        out
    };
    (d.costs.iter().map(sum).collect(), d.notes.iter().map(sum).collect())
}

/// Evaluate every layer of a validated design.
pub fn evaluate_design(d: &WaterfallDesign, tr: &Tranching, sse_mean: &[Money]) -> Result<DesignSeries> {
    let violations = validate_design(d);
    if !violations.is_empty() {
        return Err(PealError::Violations(violations));
    }
    let vp = virtual_positions(tr);
    let hc = horizontal_components(d, &vp, sse_mean)?;
    let vc = vertical_components(d, &hc);
    let (costs, notes) = assemble_positions(d, &vc);
    Ok(DesignSeries { vp, hc, vc, costs, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(icf: Vec<Money>, flt: Vec<Money>, slt: Vec<Money>) -> Tranching {
        let mut t = Tranching::loss_free(icf.clone(), 0.99);
        for m in 0..icf.len() {
            t.flt[m] = flt[m];
            t.slt[m] = slt[m];
            t.clt[m] = icf[m] - flt[m] - slt[m];
        }
        t
    }

    #[test]
    fn fig1_is_valid_with_eight_components() {
        let d = WaterfallDesign::fig1(0.05);
        assert!(validate_design(&d).is_empty());
        assert_eq!(d.h_count(), 5);
        assert_eq!(d.v_count(), 8);
        assert_eq!(d.quality_of_vc(3), Quality::Senior);
        assert_eq!(d.quality_of_vc(5), Quality::Mezzanine);
        assert_eq!(d.quality_of_vc(7), Quality::Junior);
    }

    #[test]
    fn broken_vertical_partition_is_named() {
        let mut d = WaterfallDesign::fig1(0.05);
        d.v[2] = 0.85;
        let v = validate_design(&d);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::VerticalPartition);
        assert!(v[0].location.contains("HC3"));
        assert!(v[0].message.contains("90.0000%"));
    }

    #[test]
    fn unmapped_component_is_a_coverage_violation() {
        let mut d = WaterfallDesign::fig1(0.05);
        d.notes[3] = vec![4, 8];
        let v = validate_design(&d);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::Coverage);
        assert!(v[0].location.contains("VC6"));
    }

    #[test]
    fn layers_partition_the_inbound_flows() {
        let d = WaterfallDesign::fig1(0.05);
        let t = tr(vec![0, 10_000, 8_000, 5_000], vec![0, 300, 700, 900], vec![0, 200, 400, 1_000]);
        let s = evaluate_design(&d, &t, &[0, 50, 0, 120]).unwrap();
        assert_eq!(s.hc.len(), 5);
        assert_eq!(s.vc.len(), 8);
        assert_eq!(s.hc[0], vec![0, 50, 0, 120]);
        assert_eq!(s.hc[3], t.slt);
        assert_eq!(s.hc[4], t.flt);
        for m in 0..4 {
            let total: Money = s.costs.iter().chain(&s.notes).map(|p| p[m]).sum();
            assert_eq!(total, t.icf[m]);
            assert!((s.hc[1][m] - s.hc[2][m]).abs() <= 1);
        }
    }

    #[test]
    fn horizontal_design_positions_equal_components() {
        let d = WaterfallDesign::horizontal([2, 1, 1], vec![0.0, 1.0, 1.0, 1.0]);
        assert!(validate_design(&d).is_empty());
        assert!(d.is_horizontal());
        let t = tr(vec![0, 100, 90], vec![0, 10, 20], vec![0, 5, 5]);
        let s = evaluate_design(&d, &t, &[0, 3, 0]).unwrap();
        assert_eq!(s.costs[0], s.hc[0]);
        for y in 0..3 {
            assert_eq!(s.notes[y], s.hc[y + 1]);
        }
        assert_eq!(
            d.horizontal_order().unwrap(),
            vec![PositionRef::Cost(0), PositionRef::Note(0), PositionRef::Note(1), PositionRef::Note(2)]
        );
    }

    #[test]
    fn super_senior_above_the_senior_tranche_is_infeasible() {
        let d = WaterfallDesign::fig1(0.05);
        let t = tr(vec![0, 100], vec![0, 60], vec![0, 30]);
        assert!(matches!(
            evaluate_design(&d, &t, &[0, 11]),
            Err(PealError::SeniorReserveExceeded { month: 1, sse: 11, senior: 10 })
        ));
    }

    #[test]
    fn loss_free_deal_puts_everything_in_the_senior_tranche() {
        let t = Tranching::loss_free(vec![0, 10, 20], 0.99);
        let vp = virtual_positions(&t);
        assert_eq!(vp.len(), 3);
        assert_eq!(vp[0], vec![0, 10, 20]);
        assert_eq!(vp[1], vec![0; 3]);
        assert_eq!(vp[2], vec![0; 3]);
    }
}
