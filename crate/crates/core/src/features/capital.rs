//! Regulatory capital of note positions.
//!
//! Each vertical component of a note carries the risk weight of its
//! quality, unless overridden per component; cost positions weigh zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{PealError, Result};
use crate::gross_dimensioning::GrossDimensioning;
use crate::money::tail_sums;
use crate::waterfall_design::{Quality, WaterfallDesign};

fn default_car() -> f64 {
    0.08
}

fn default_by_quality() -> BTreeMap<Quality, f64> {
    BTreeMap::from([(Quality::Senior, 0.15), (Quality::Mezzanine, 1.0), (Quality::Junior, 12.5)])
}

/// Risk weight table and capital adequacy ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskWeights {
    #[serde(default = "default_by_quality")]
    pub by_quality: BTreeMap<Quality, f64>,
    /// Per vertical component (1-based) overrides.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<usize, f64>,
    #[serde(default = "default_car")]
    pub car: f64,
}

impl Default for RiskWeights {
    fn default() -> Self {
        Self { by_quality: default_by_quality(), overrides: BTreeMap::new(), car: default_car() }
    }
}

impl RiskWeights {
    /// Weight of 1-based vertical component `i`.
    pub fn weight(&self, d: &WaterfallDesign, i: usize) -> Result<f64> {
        if let Some(&w) = self.overrides.get(&i) {
            return Ok(w);
        }
        let q = d.quality_of_vc(i - 1);
        self.by_quality
            .get(&q)
            .copied()
            .ok_or_else(|| PealError::MissingRiskWeight { component: i, quality: q.as_str().into() })
    }
}

/// `RCN_y(t) = Σ_{i∈y} OB_i(t) · RW_i · CAR`, in minor units.
pub fn regulatory_capital(d: &WaterfallDesign, gross: &GrossDimensioning, rw: &RiskWeights) -> Result<Vec<Vec<f64>>> {
    let months = gross.months();
    d.notes
        .iter()
        .map(|comps| {
            let mut out = vec![0.0; months];
            for &i in comps {
                let w = rw.weight(d, i)? * rw.car;
                for (o, ob) in out.iter_mut().zip(tail_sums(&gross.gv[i - 1])) {
                    *o += ob as f64 * w;
                }
            }
            Ok(out)
        })
        .collect()
}
