use crate::config::{require, FitConfig};
use crate::error::CliResult;
use crate::fit::{fit_loglog, parse_series, FitResult};
use crate::output::{read_text, Manifest, Sink};

/// Log-log least squares over the last `k_last` points of a CSV series.
pub fn run(cfg: &FitConfig) -> CliResult<FitResult> {
    let path = require(&cfg.input, "input")?;
    let text = read_text(path)?;
    let points = parse_series(&text, cfg.x.as_deref(), cfg.y.as_deref()).map_err(|e| match e {
        crate::error::CliError::Domain(inner) => crate::error::CliError::input(path, inner),
        other => other,
    })?;
    let fit = fit_loglog(&points, cfg.k_last.unwrap_or(points.len()))?;
    let mut manifest = Manifest::new("fit", cfg, None);
    manifest.input(path);
    let mut sink = Sink::new(cfg.out_dir.clone(), manifest);
    sink.emit(
        "fit.json",
        &(serde_json::to_string_pretty(&fit).expect("plain data") + "\n"),
        true,
    )?;
    sink.finish()?;
    Ok(fit)
}
