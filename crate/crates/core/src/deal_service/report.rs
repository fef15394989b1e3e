//! Running a parsed deal end to end and writing its reports.
//!
//! Artifacts of a run directory:
//!
//! | file | content |
//! |------|---------|
//! | `tranching.csv`, `tranching.json` | ICF, FLT, SLT, CLT and the loss statistics |
//! | `gdm.csv` | gross dimensioning matrix |
//! | `ndm.csv`, `ndm.json` | scenario mean of the net dimensioning matrix |
//! | `features.json` | performance, thickness, capital, CVA, fair value, IRR |
//! | `cva.csv`, `cva.json` | CVA curves and verdict |
//! | `compliance.json` | every compliance verdict |
//! | `optimization.csv` | search trace, when the deal has an optimisation block |
//! | `scenarios.csv`, `blocks.csv` | only with `dump` |
//! | `run.json` | run record with timestamps and artifact digests |

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::deal_service::deal_file::ParsedDeal;
use crate::deal_service::pipeline::{
    compliance_violations, design_features, evaluate, performance, prepare, DesignFeatures, Evaluation,
    ExposurePerformanceSummary, NetSummary, Progress,
};
use crate::deal_service::runs::{run_id, sha256_hex, unix_now, write_atomic, RunConfig, RunRecord, ENGINE_VERSION};
use crate::error::{Result, StepContext, Violation};
use crate::gross_dimensioning::write_matrix_csv;
use crate::inbound_blocks::{inbound_blocks, write_blocks_csv};
use crate::optimizer::{optimize, CoordinateGrid, OptimizationResult, Problem};
use crate::scenario_engine::{generate_scenarios, GeneratorConfig, ScenarioSet};
use crate::tranching::Tranching;

/// All compliance verdicts of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplianceReport {
    pub pass: bool,
    pub frequency_rules: Vec<Violation>,
    pub g_check: Vec<Violation>,
    pub cva: Vec<Violation>,
    /// Substantial margin test; informative, not part of `pass`.
    pub substantial_margin: Option<bool>,
}

impl ComplianceReport {
    fn new(ev: &Evaluation, f: &DesignFeatures) -> Self {
        Self {
            pass: compliance_violations(ev, f).is_empty(),
            frequency_rules: ev.frequency_verdicts.clone(),
            g_check: ev.g_check.violations.clone(),
            cva: f.cva.violations.clone(),
            substantial_margin: ev.tranching.margin.pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureReport<'a> {
    pub performance: &'a [ExposurePerformanceSummary],
    #[serde(flatten)]
    pub design: &'a DesignFeatures,
    pub cva_pass: bool,
    pub net: &'a NetSummary,
}

/// In-memory result of a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub run_id: String,
    pub config: RunConfig,
    pub scenarios: ScenarioSet,
    pub evaluation: Evaluation,
    pub features: DesignFeatures,
    pub performance: Vec<ExposurePerformanceSummary>,
    pub compliance: ComplianceReport,
    pub optimization: Option<OptimizationResult>,
}

impl RunOutput {
    pub fn tranching(&self) -> &Tranching {
        &self.evaluation.tranching
    }
}

/// Scenario generation plus steps 3 to 9, and step 10 when the deal asks for it.
pub fn execute(parsed: &ParsedDeal, cfg: &RunConfig, progress: Option<&Progress>) -> Result<RunOutput> {
    let file = &parsed.file;
    let generator = GeneratorConfig { scenarios: cfg.scenarios, seed: cfg.seed, ..file.generator.clone() };
    let scenarios = generate_scenarios(&parsed.deal, &generator, file.exposure_type).step("scenario engine")?;
    let prepared = prepare(&parsed.deal, &scenarios, progress)?;
    let evaluation = evaluate(&prepared, &parsed.design, &parsed.frequencies, &file.endowment, cfg.alpha, file.eta, progress)?;
    let features = design_features(&parsed.deal, &parsed.design, &evaluation, &file.risk_weights, file.cpy.as_deref())?;
    let performance = performance(&parsed.deal, &scenarios, file.eta)?;
    let compliance = ComplianceReport::new(&evaluation, &features);
    let optimization = match &file.optimization {
        None => None,
        Some(spec) => {
            let problem = Problem {
                deal: &parsed.deal,
                prepared: &prepared,
                design: &parsed.design,
                frequencies: &parsed.frequencies,
                endowment: &file.endowment,
                alpha: cfg.alpha,
                eta: file.eta,
                risk_weights: &file.risk_weights,
                cpy: file.cpy.as_deref(),
                spec,
            };
            Some(optimize(&problem, &CoordinateGrid).step("optimizer")?)
        }
    };
    Ok(RunOutput {
        run_id: run_id(&parsed.canonical_json(), cfg),
        config: *cfg,
        scenarios,
        evaluation,
        features,
        performance,
        compliance,
        optimization,
    })
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v)?;
    out.push(b'\n');
    Ok(out)
}

/// Every report file of a run, name to bytes, without `run.json`.
pub fn render_reports(parsed: &ParsedDeal, out: &RunOutput, dump: bool) -> Result<BTreeMap<String, Vec<u8>>> {
    let mut files = BTreeMap::new();
    let ev = &out.evaluation;

    let mut buf = Vec::new();
    ev.tranching.write_csv(&mut buf)?;
    files.insert("tranching.csv".into(), buf);
    files.insert("tranching.json".into(), json(&ev.tranching)?);

    let mut buf = Vec::new();
    ev.gross.write_gdm_csv(&mut buf)?;
    files.insert("gdm.csv".into(), buf);

    let mut buf = Vec::new();
    write_matrix_csv(&mut buf, &ev.net.ndm)?;
    files.insert("ndm.csv".into(), buf);
    files.insert("ndm.json".into(), json(&serde_json::json!({ "scenarios": ev.net.scenarios, "ndm": ev.net.ndm }))?);

    let mut buf = Vec::new();
    out.features.cva.write_csv(&mut buf)?;
    files.insert("cva.csv".into(), buf);
    files.insert("cva.json".into(), json(&out.features.cva)?);

    let report = FeatureReport {
        performance: &out.performance,
        design: &out.features,
        cva_pass: out.features.cva.pass(),
        net: &ev.net,
    };
    files.insert("features.json".into(), json(&report)?);
    files.insert("compliance.json".into(), json(&out.compliance)?);

    if let Some(opt) = &out.optimization {
        let mut buf = Vec::new();
        opt.write_csv(&mut buf)?;
        files.insert("optimization.csv".into(), buf);
    }

    if dump {
        let mut buf = Vec::new();
        out.scenarios.write_csv(&mut buf)?;
        files.insert("scenarios.csv".into(), buf);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scenario_id", "t", "ga", "a", "l", "e"])?;
        for s in &out.scenarios.scenarios {
            write_blocks_csv(&mut w, s.id, &inbound_blocks(&parsed.deal, s)?)?;
        }
        files.insert("blocks.csv".into(), w.into_inner().map_err(|e| e.into_error())?);
    }
    Ok(files)
}

/// Write a run's reports into `dir` and return its record.
pub fn write_run(dir: &Path, parsed: &ParsedDeal, out: &RunOutput, dump: bool, started_at: u64) -> Result<RunRecord> {
    let files = render_reports(parsed, out, dump)?;
    let mut artifacts = BTreeMap::new();
    for (name, bytes) in &files {
        write_atomic(dir, name, bytes)?;
        artifacts.insert(name.clone(), sha256_hex(bytes));
    }
    let record = RunRecord {
        run_id: out.run_id.clone(),
        engine_version: ENGINE_VERSION.into(),
        deal_hash: sha256_hex(&parsed.canonical_json()),
        seed: out.config.seed,
        scenarios: out.config.scenarios,
        alpha: out.config.alpha,
        started_at,
        finished_at: unix_now(),
        artifacts,
    };
    write_atomic(dir, "run.json", &json(&record)?)?;
    Ok(record)
}
