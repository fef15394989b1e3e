//! Deal files, run orchestration, persistence and the CLI/HTTP front ends.

pub mod deal_file;
pub mod pipeline;
pub mod report;
pub mod runs;
#[cfg(feature = "server")]
pub mod server;

pub use deal_file::{parse_deal, parse_deal_str, DealFile, ParsedDeal};
pub use report::{execute, RunOutput};
pub use runs::{RunConfig, RunRecord, RunStore};

use crate::error::Result;
use pipeline::Progress;

/// Optional overrides of the run settings stored in the deal file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOverrides {
    pub scenarios: Option<usize>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
}

impl RunOverrides {
    pub fn resolve(&self, parsed: &ParsedDeal) -> RunConfig {
        RunConfig {
            scenarios: self.scenarios.unwrap_or(parsed.file.generator.scenarios),
            seed: self.seed.unwrap_or(parsed.file.generator.seed),
            alpha: self.alpha.unwrap_or(parsed.file.alpha),
        }
    }
}

/// Run the full pipeline and persist it under the store's run directory.
pub fn run_pipeline(
    parsed: &ParsedDeal,
    cfg: &RunConfig,
    store: &RunStore,
    dump: bool,
    progress: Option<&Progress>,
) -> Result<(RunRecord, RunOutput)> {
    let started = runs::unix_now();
    let out = execute(parsed, cfg, progress)?;
    let record = report::write_run(&store.run_dir(&out.run_id), parsed, &out, dump, started)?;
    Ok((record, out))
}
