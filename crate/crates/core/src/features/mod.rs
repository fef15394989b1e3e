//! Position features computed after allocation: performance, thickness,
//! regulatory capital, CVA, fair value and IRR.

pub mod capital;
pub mod cva;
pub mod fair_value;
pub mod irr;
pub mod performance;
pub mod thickness;
