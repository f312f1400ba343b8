use std::path::Path;
use std::time::Instant;

use isothc::hamiltonian::{parse_fcidump, rotate_to_h_eigenbasis};
use isothc::thc::{
    approximation_errors, exact_factorize, isometrize, refine, refine_from_random, Provenance,
    ThcFactorFile, ThcFactorization,
};
use isothc::ElectronicHamiltonian;
use serde::Serialize;

use crate::config::{require, Basis, FactorizeConfig};
use crate::error::{CliError, CliResult};
use crate::output::{csv_string, read_text, Manifest, Sink};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub m: usize,
    pub method: &'static str,
    pub eps_v: f64,
    pub eps_h: Option<f64>,
    pub l1_vtilde: f64,
    pub wall_time_s: f64,
}

const METRICS_HEADER: [&str; 6] = ["m", "method", "eps_v", "eps_h", "l1_vtilde", "wall_time_s"];

#[derive(Debug, Clone)]
pub struct FactorizeReport {
    pub rows: Vec<MetricsRow>,
    pub factorizations: Vec<ThcFactorization>,
    pub manifest: Manifest,
}

pub fn load_hamiltonian(path: &Path) -> CliResult<ElectronicHamiltonian> {
    parse_fcidump(&read_text(path)?).map_err(|e| CliError::input(path, e))
}

fn finish(
    mut thc: ThcFactorization,
    ham: &ElectronicHamiltonian,
    method: &'static str,
    cfg: &FactorizeConfig,
    started: Instant,
) -> CliResult<(MetricsRow, ThcFactorization)> {
    let err = approximation_errors(&thc, ham)?;
    let mut config = serde_json::to_value(cfg).expect("plain data");
    config["method"] = method.into();
    thc.provenance = Some(Provenance {
        eps_v: err.eps_v,
        eps_h: err.eps_h,
        seed: Some(cfg.seed),
        config,
    });
    let row = MetricsRow {
        m: thc.m(),
        method,
        eps_v: err.eps_v,
        eps_h: err.eps_h,
        l1_vtilde: thc.vtilde().iter().map(|x| x.abs()).sum(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    log::info!("M = {}: eps_v = {:.3e} ({method})", row.m, row.eps_v);
    Ok((row, thc))
}

fn ranks(cfg: &FactorizeConfig, n: usize) -> CliResult<Vec<usize>> {
    let mut ms = cfg.m.clone();
    if ms.is_empty() {
        return Err(CliError::Config(
            "'m' is required unless 'exact' or 'factor_file' is set".into(),
        ));
    }
    ms.sort_unstable();
    ms.dedup();
    if let Some(&bad) = ms.iter().find(|&&m| m < n) {
        return Err(CliError::Config(format!("M = {bad} is below N = {n}")));
    }
    Ok(ms)
}

/// Factorizes the Hamiltonian, writing `thc_m<M>.json` per rank and
/// `metrics.csv` (stdout without an output directory).
pub fn run(cfg: &FactorizeConfig) -> CliResult<FactorizeReport> {
    let path = require(&cfg.fcidump, "fcidump")?;
    let refine_cfg = cfg.refine_config()?;
    let mut manifest = Manifest::new("factorize", cfg, Some(cfg.seed));
    manifest.input(path);
    let ham0 = load_hamiltonian(path)?;
    let ham = match cfg.basis {
        Basis::Original => ham0,
        Basis::HEigenbasis => rotate_to_h_eigenbasis(&ham0).0,
    };
    let n = ham.n_orbitals();
    let mut results = Vec::new();
    if cfg.exact {
        if !cfg.m.is_empty() {
            log::warn!("'m' is ignored by the exact construction");
        }
        let started = Instant::now();
        let exact = exact_factorize(&ham)?;
        if exact.rank_deficient() {
            log::warn!("product map has rank {} < N² = {}", exact.rank, n * n);
        }
        results.push(finish(exact.thc, &ham, "exact", cfg, started)?);
    } else if let Some(file) = &cfg.factor_file {
        manifest.input(file);
        let started = Instant::now();
        let factors =
            ThcFactorFile::parse(&read_text(file)?).map_err(|e| CliError::input(file, e))?;
        if factors.x.nrows() != n {
            return Err(CliError::input(
                file,
                isothc::Error::Dimension(format!(
                    "factor file has N = {}, Hamiltonian has {n}",
                    factors.x.nrows()
                )),
            ));
        }
        if !cfg.m.is_empty() && cfg.m != [factors.x.ncols()] {
            return Err(CliError::Config(format!(
                "'m' = {:?} disagrees with the factor file rank {}",
                cfg.m,
                factors.x.ncols()
            )));
        }
        let iso = isometrize(&factors, &cfg.isometrize_config()?)?;
        if let Some(w) = &iso.warning {
            manifest.notes.push(w.clone());
        }
        let start = iso.with_hamiltonian(&ham)?;
        let thc = if refine_cfg.total_rounds() > 0 {
            refine(&start, &ham, &refine_cfg)?.thc
        } else {
            start
        };
        results.push(finish(thc, &ham, "isometrize+refine", cfg, started)?);
    } else {
        for m in ranks(cfg, n)? {
            let started = Instant::now();
            let out = refine_from_random(&ham, m, &refine_cfg)?;
            results.push(finish(out.best.thc, &ham, "random+refine", cfg, started)?);
        }
    }
    let (rows, factorizations): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let mut sink = Sink::new(cfg.out_dir.clone(), manifest);
    if !sink.has_dir() {
        log::warn!("no output directory given; factorizations are not saved");
    }
    for thc in &factorizations {
        sink.emit(&format!("thc_m{}.json", thc.m()), &thc.to_json(), false)?;
    }
    sink.emit("metrics.csv", &csv_string(&rows, &METRICS_HEADER)?, true)?;
    let manifest = sink.finish()?;
    Ok(FactorizeReport {
        rows,
        factorizations,
        manifest,
    })
}
