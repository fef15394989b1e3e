//! Securitization structuring engine.
//!
//! The crate follows a deal from its asset schedules to investor features:
//!
//! 1. [`asset_model`] holds exposures, portfolios and the deal timeline.
//! 2. [`scenario_engine`] samples event scenarios.
//! 3. [`inbound_blocks`] turns a scenario into asset, loss and recovery flows.
//! 4. [`tranching`] derives the loss tranches from the scenario set.
//! 5. [`embedded_positions`] computes the super senior and buffer series.
//! 6. [`waterfall_design`] slices the tranches into cost and note positions.
//! 7. [`gross_dimensioning`] applies payment frequencies.
//! 8. [`net_dimensioning`] runs the payment waterfall per scenario.
//! 9. [`features`] reports performance, thickness, capital, CVA, fair value and IRR.
//! 10. [`optimizer`] searches endowment, percentages and frequencies.
//!
//! [`deal_service`] wires the steps into a reproducible pipeline with CLI
//! and HTTP front ends.

pub mod asset_model;
pub mod deal_service;
pub mod embedded_positions;
pub mod error;
pub mod features;
pub mod gross_dimensioning;
pub mod inbound_blocks;
pub mod money;
pub mod net_dimensioning;
pub mod optimizer;
pub mod scenario_engine;
pub mod tranching;
pub mod waterfall_design;

pub use error::{PealError, Result, Rule, Violation};
pub use money::{Money, Month};
