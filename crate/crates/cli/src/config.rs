//! Per-command run configurations. Each is a flat JSON document; every key
//! can also be set by the matching command-line flag, which wins.

use std::path::{Path, PathBuf};

use isothc::algorithm::{Variant, DEFAULT_PHASES};
use isothc::resources::Architecture;
use isothc::thc::{IsometrizeConfig, RefineConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::read_text;

/// Orbital basis a factorization is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// The orbitals of the FCIDUMP file.
    Original,
    /// Eigenvectors of the one-body matrix `h`.
    HEigenbasis,
}

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = read_text(p)?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

pub fn require<'a, T>(value: &'a Option<T>, key: &str) -> CliResult<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("'{key}' is required")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactorizeConfig {
    pub fcidump: Option<PathBuf>,
    /// THC ranks; more than one runs a sweep.
    pub m: Vec<usize>,
    /// Use the `M = N²` construction instead of optimization.
    pub exact: bool,
    /// Generic THC factors to isometrize before refinement.
    pub factor_file: Option<PathBuf>,
    pub delta: f64,
    pub basis: Basis,
    pub seed: u64,
    pub restarts: usize,
    pub rounds_phase1: usize,
    pub lr_phase1: f64,
    pub rounds_phase2: usize,
    pub lr_phase2: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub out_dir: Option<PathBuf>,
}

impl Default for FactorizeConfig {
    fn default() -> Self {
        let r = RefineConfig::default();
        Self {
            fcidump: None,
            m: Vec::new(),
            exact: false,
            factor_file: None,
            delta: IsometrizeConfig::default().delta,
            basis: Basis::HEigenbasis,
            seed: 0,
            restarts: 10,
            rounds_phase1: r.phases[0].0,
            lr_phase1: r.phases[0].1,
            rounds_phase2: r.phases[1].0,
            lr_phase2: r.phases[1].1,
            adam_beta1: r.beta1,
            adam_beta2: r.beta2,
            adam_eps: r.epsilon,
            out_dir: None,
        }
    }
}

impl FactorizeConfig {
    pub fn refine_config(&self) -> CliResult<RefineConfig> {
        if !(self.lr_phase1 > 0.0 && self.lr_phase2 > 0.0) {
            return Err(CliError::Config("learning rates must be positive".into()));
        }
        Ok(RefineConfig {
            phases: vec![
                (self.rounds_phase1, self.lr_phase1),
                (self.rounds_phase2, self.lr_phase2),
            ],
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_eps,
            seed: self.seed,
            restarts: self.restarts.max(1),
        })
    }

    pub fn isometrize_config(&self) -> CliResult<IsometrizeConfig> {
        if !(self.delta > 0.0) {
            return Err(CliError::Config(format!(
                "delta = {} must be positive",
                self.delta
            )));
        }
        Ok(IsometrizeConfig {
            delta: self.delta,
            ..IsometrizeConfig::default()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub fcidump: Option<PathBuf>,
    pub thc: Option<PathBuf>,
    /// Basis of the factorization; read from its provenance when absent,
    /// and `original` when the provenance does not say.
    pub thc_basis: Option<Basis>,
    pub taus: Vec<f64>,
    pub t: f64,
    pub variants: Vec<Variant>,
    pub phases: [f64; 3],
    /// `hartree_fock`, or a 0/1 string giving the occupation of each system
    /// mode in the h eigenbasis, mode 0 first.
    pub initial: String,
    pub n_electrons: Option<usize>,
    pub spinful: bool,
    pub out_dir: Option<PathBuf>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            fcidump: None,
            thc: None,
            thc_basis: None,
            taus: Vec::new(),
            t: 1.0,
            variants: vec![Variant::Basic, Variant::Improved],
            phases: DEFAULT_PHASES,
            initial: "hartree_fock".into(),
            n_electrons: None,
            spinful: true,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Table,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateConfig {
    pub n: u64,
    pub m: u64,
    pub spinful: bool,
    pub architecture: Architecture,
    pub motta_l: Option<u64>,
    pub motta_xi: Option<u64>,
    pub eps_rot: Option<f64>,
    pub format: ReportFormat,
    pub out_dir: Option<PathBuf>,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            n: 76,
            m: 450,
            spinful: true,
            architecture: Architecture::AllToAll,
            motta_l: None,
            motta_xi: None,
            eps_rot: None,
            format: ReportFormat::Table,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub input: Option<PathBuf>,
    pub x: Option<String>,
    pub y: Option<String>,
    /// Points with the largest `x` to use; all when absent.
    pub k_last: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_json() {
        let c = FactorizeConfig::default();
        let back: FactorizeConfig =
            serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
        let s: SimulateConfig =
            serde_json::from_str(r#"{"taus": [0.1], "variants": ["improved"]}"#).unwrap();
        assert_eq!(s.variants, vec![Variant::Improved]);
        assert_eq!(s.t, 1.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<EstimateConfig>(r#"{"nn": 3}"#).is_err());
        let e: EstimateConfig = serde_json::from_str(r#"{"architecture": "linear"}"#).unwrap();
        assert_eq!(e.architecture, Architecture::Linear);
    }

    #[test]
    fn refine_schedule_follows_keys() {
        let c = FactorizeConfig {
            rounds_phase1: 5,
            lr_phase2: 0.1,
            ..FactorizeConfig::default()
        };
        let r = c.refine_config().unwrap();
        assert_eq!(r.phases, vec![(5, 1e-3), (1000, 0.1)]);
        let bad = FactorizeConfig {
            lr_phase1: 0.0,
            ..FactorizeConfig::default()
        };
        assert!(bad.refine_config().is_err());
    }
}
