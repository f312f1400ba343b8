//! Every checked-in fuzz seed is a valid input for its target.

use std::path::PathBuf;

use isothc::focksim::GivensSequence;
use isothc::hamiltonian::parse_fcidump;
use isothc::thc::ThcFactorFile;
use isothc::{ElectronicHamiltonian, ThcFactorization};
use isothc_cli::config::{EstimateConfig, FactorizeConfig, FitConfig, SimulateConfig};
use isothc_cli::fit::parse_series;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(PathBuf, String)> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn fcidump_seeds_parse() {
    for (path, text) in seeds("fcidump") {
        parse_fcidump(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn json_document_seeds_parse() {
    for (path, text) in seeds("hamiltonian_json") {
        ElectronicHamiltonian::from_json(&text)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
    for (path, text) in seeds("thc_json") {
        ThcFactorization::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
    for (path, text) in seeds("givens_json") {
        GivensSequence::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn factor_file_seeds_parse() {
    for (path, text) in seeds("factor_file") {
        ThcFactorFile::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn fit_csv_seeds_parse() {
    for (path, text) in seeds("fit_csv") {
        let points = parse_series(&text, Some("tau"), Some("error"))
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(points.len() >= 3);
    }
}

#[test]
fn config_seeds_deserialize() {
    for (path, text) in seeds("config_json") {
        let name = path.file_stem().unwrap().to_str().unwrap();
        let ok = match name {
            "factorize" => serde_json::from_str::<FactorizeConfig>(&text).is_ok(),
            "simulate" => serde_json::from_str::<SimulateConfig>(&text).is_ok(),
            "estimate" => serde_json::from_str::<EstimateConfig>(&text).is_ok(),
            "fit" => serde_json::from_str::<FitConfig>(&text).is_ok(),
            other => panic!("unexpected seed {other}"),
        };
        assert!(ok, "{}", path.display());
    }
}
