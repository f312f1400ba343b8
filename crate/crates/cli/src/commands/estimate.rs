use isothc::resources::{
    estimate_step, motta_estimate, reduction, render_table, MottaParams, Reduction, ResourceReport,
};
use serde::Serialize;

use crate::config::{EstimateConfig, ReportFormat};
use crate::error::{CliError, CliResult};
use crate::output::{Manifest, Sink};

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub rows: Vec<ResourceReport>,
    pub reduction: Option<Reduction>,
    #[serde(skip)]
    pub rendered: String,
}

/// One-step resources for this algorithm, next to the double-factorized
/// reference when its ranks are given.
pub fn run(cfg: &EstimateConfig) -> CliResult<EstimateReport> {
    let mut rows = vec![estimate_step(cfg.n, cfg.m, cfg.spinful, cfg.architecture)?];
    match (cfg.motta_l, cfg.motta_xi) {
        (Some(l), Some(xi)) => rows.push(motta_estimate(MottaParams { n: cfg.n, l, xi })?),
        (None, None) => {}
        _ => {
            return Err(CliError::Config(
                "'motta_l' and 'motta_xi' must be given together".into(),
            ))
        }
    }
    if let Some(eps) = cfg.eps_rot {
        rows = rows
            .into_iter()
            .map(|r| r.with_t_gates(eps))
            .collect::<isothc::Result<_>>()?;
    }
    let reduction = match rows.as_slice() {
        [ours, reference] => Some(reduction(ours, reference)),
        _ => None,
    };
    let mut report = EstimateReport {
        rows,
        reduction,
        rendered: String::new(),
    };
    report.rendered = match cfg.format {
        ReportFormat::Table => render_table(&report.rows),
        ReportFormat::Json => serde_json::to_string_pretty(&report).expect("plain data") + "\n",
    };
    let name = match cfg.format {
        ReportFormat::Table => "resources.txt",
        ReportFormat::Json => "resources.json",
    };
    let mut sink = Sink::new(cfg.out_dir.clone(), Manifest::new("estimate", cfg, None));
    sink.emit(name, &report.rendered, true)?;
    sink.finish()?;
    Ok(report)
}
