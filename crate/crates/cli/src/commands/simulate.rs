use std::collections::BTreeMap;

use isothc::algorithm::{hartree_fock_bits, step_count, sweep, AncillaCircuit, SweepRow, Variant};
use isothc::focksim::{FockState, ModeLayout};
use isothc::hamiltonian::{build_many_body_operator, rotate_to_h_eigenbasis};
use isothc::thc::{approximation_errors, ThcFactorization};
use nalgebra::DMatrix;
use serde::Serialize;

use super::factorize::load_hamiltonian;
use crate::config::{require, Basis, SimulateConfig};
use crate::error::{CliError, CliResult};
use crate::fit::{fit_loglog, FitResult};
use crate::output::{csv_string, read_text, Manifest, Sink};

const RESULTS_HEADER: [&str; 4] = ["variant", "tau", "steps", "error"];

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub eps_v: f64,
    pub initial_bits: usize,
    pub fits: BTreeMap<String, FitResult>,
}

#[derive(Debug, Clone)]
pub struct SimulateReport {
    pub rows: Vec<SweepRow>,
    pub summary: SimulateSummary,
    pub manifest: Manifest,
}

/// Drops repeated time steps, keeping the first occurrence.
pub fn dedup_taus(taus: &[f64]) -> (Vec<f64>, usize) {
    let mut out: Vec<f64> = Vec::with_capacity(taus.len());
    for &t in taus {
        if !out.contains(&t) {
            out.push(t);
        }
    }
    let dropped = taus.len() - out.len();
    (out, dropped)
}

fn basis_of(thc: &ThcFactorization, cfg: &SimulateConfig) -> Basis {
    cfg.thc_basis.unwrap_or_else(|| {
        thc.provenance
            .as_ref()
            .and_then(|p| p.config.get("basis"))
            .and_then(|b| serde_json::from_value(b.clone()).ok())
            .unwrap_or(Basis::Original)
    })
}

/// Re-expresses `u` in the orbitals `basis` (columns = new orbitals).
fn rotate_factorization(
    thc: &ThcFactorization,
    basis: &DMatrix<f64>,
) -> CliResult<ThcFactorization> {
    let mut out = ThcFactorization::new(basis.transpose() * thc.u(), thc.vtilde().clone(), None)?;
    out.provenance = thc.provenance.clone();
    Ok(out)
}

fn parse_bits(s: &str, n_modes: usize) -> CliResult<usize> {
    if s.len() != n_modes || !s.chars().all(|c| c == '0' || c == '1') {
        return Err(CliError::Config(format!(
            "initial state '{s}' must be 'hartree_fock' or a 0/1 string of length {n_modes}"
        )));
    }
    Ok(s.chars()
        .enumerate()
        .filter(|(_, c)| *c == '1')
        .map(|(k, _)| 1usize << k)
        .sum())
}

/// Runs every `(variant, τ)` evolution, writing `results.csv` (stdout
/// without an output directory) and `summary.json` with log-log slopes.
pub fn run(cfg: &SimulateConfig) -> CliResult<SimulateReport> {
    let ham_path = require(&cfg.fcidump, "fcidump")?;
    let thc_path = require(&cfg.thc, "thc")?;
    if cfg.taus.is_empty() {
        return Err(CliError::Config(
            "'taus' must list at least one time step".into(),
        ));
    }
    if let Some(bad) = cfg.taus.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(CliError::Config(format!(
            "time step {bad} must be positive"
        )));
    }
    let (taus, dropped) = dedup_taus(&cfg.taus);
    if dropped > 0 {
        log::warn!("dropped {dropped} duplicate time step(s)");
    }
    for &tau in &taus {
        step_count(cfg.t, tau)?;
    }
    let mut manifest = Manifest::new("simulate", cfg, None);
    manifest.input(ham_path);
    manifest.input(thc_path);

    let ham0 = load_hamiltonian(ham_path)?;
    let (ham, basis) = rotate_to_h_eigenbasis(&ham0);
    let thc = ThcFactorization::from_json(&read_text(thc_path)?)
        .map_err(|e| CliError::input(thc_path, e))?;
    let thc = match basis_of(&thc, cfg) {
        Basis::HEigenbasis => thc,
        Basis::Original => rotate_factorization(&thc, &basis)?,
    };
    let n = ham.n_orbitals();
    let circuit = AncillaCircuit::new(&thc, &ham, cfg.spinful)?;
    let exact = build_many_body_operator(&ham, cfg.spinful)?;
    let eps_v = approximation_errors(&thc, &ham)?.eps_v;

    let sys_layout = ModeLayout::system(n, cfg.spinful);
    let bits = if cfg.initial == "hartree_fock" {
        let ne = cfg.n_electrons.or(ham.n_electrons()).ok_or_else(|| {
            CliError::Config("'n_electrons' is required when the FCIDUMP has no NELEC".into())
        })?;
        manifest.notes.push(format!(
            "Hartree-Fock state: {ne} electrons in the lowest h eigenmodes (aufbau)"
        ));
        hartree_fock_bits(n, ne, cfg.spinful)?
    } else {
        parse_bits(&cfg.initial, sys_layout.n_modes())?
    };
    let psi0 = FockState::basis(sys_layout, bits)?;

    let rows = sweep(
        &psi0,
        &circuit,
        &exact,
        cfg.t,
        &taus,
        &cfg.variants,
        cfg.phases,
    )?;
    let mut fits = BTreeMap::new();
    for v in [Variant::Basic, Variant::Improved] {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.variant == v)
            .map(|r| (r.tau, r.error))
            .collect();
        if pts.len() >= 2 && pts.iter().all(|p| p.1 > 0.0) {
            let f = fit_loglog(&pts, pts.len())?;
            log::info!("{v}: slope {:.3}", f.slope);
            fits.insert(v.to_string(), f);
        }
    }
    let summary = SimulateSummary {
        eps_v,
        initial_bits: bits,
        fits,
    };
    let mut sink = Sink::new(cfg.out_dir.clone(), manifest);
    sink.emit("results.csv", &csv_string(&rows, &RESULTS_HEADER)?, true)?;
    sink.emit(
        "summary.json",
        &serde_json::to_string_pretty(&summary).expect("plain data"),
        false,
    )?;
    let manifest = sink.finish()?;
    Ok(SimulateReport {
        rows,
        summary,
        manifest,
    })
}
