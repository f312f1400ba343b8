//! Command-line flags. Each subcommand reads an optional JSON config and
//! then applies any flags on top.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use isothc::algorithm::Variant;
use isothc::resources::Architecture;

use crate::config::{
    load, Basis, EstimateConfig, FactorizeConfig, FitConfig, ReportFormat, SimulateConfig,
};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "isothc",
    version,
    about = "Isometric THC factorization, simulation and resource estimates"
)]
pub struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute an isometric THC factorization of an FCIDUMP Hamiltonian.
    Factorize(FactorizeArgs),
    /// Evolve a state with the ancilla-reset Trotter steps and compare with exact dynamics.
    Simulate(SimulateArgs),
    /// Gate, depth and T-count estimates for one step.
    Estimate(EstimateArgs),
    /// Log-log least-squares fit of a CSV series.
    Fit(FitArgs),
}

macro_rules! set {
    ($cfg:ident, $args:ident, $($field:ident),*) => {
        $( if let Some(v) = $args.$field { $cfg.$field = v; } )*
    };
}

macro_rules! set_opt {
    ($cfg:ident, $args:ident, $($field:ident),*) => {
        $( if let Some(v) = $args.$field { $cfg.$field = Some(v); } )*
    };
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub fcidump: Option<PathBuf>,
    /// THC rank; a comma-separated list runs a sweep.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Use the exact `M = N²` construction.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub factor_file: Option<PathBuf>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_enum)]
    pub basis: Option<Basis>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub rounds_phase1: Option<usize>,
    #[arg(long)]
    pub lr_phase1: Option<f64>,
    #[arg(long)]
    pub rounds_phase2: Option<usize>,
    #[arg(long)]
    pub lr_phase2: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl FactorizeArgs {
    pub fn resolve(self) -> CliResult<FactorizeConfig> {
        let mut cfg: FactorizeConfig = load(self.config.as_deref())?;
        set!(
            cfg,
            self,
            m,
            delta,
            basis,
            seed,
            restarts,
            rounds_phase1,
            lr_phase1,
            rounds_phase2,
            lr_phase2
        );
        set_opt!(cfg, self, fcidump, factor_file, out_dir);
        cfg.exact |= self.exact;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub fcidump: Option<PathBuf>,
    /// Factorization JSON written by `factorize`.
    #[arg(long)]
    pub thc: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub thc_basis: Option<Basis>,
    /// Comma-separated time steps.
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    /// Total evolution time.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub variants: Option<Vec<Variant>>,
    /// Comma-separated ancilla phases of the improved step.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phases: Option<Vec<f64>>,
    /// `hartree_fock` or a 0/1 occupation string.
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long)]
    pub n_electrons: Option<usize>,
    /// Simulate spinless fermions.
    #[arg(long)]
    pub spinless: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn resolve(self) -> CliResult<SimulateConfig> {
        let mut cfg: SimulateConfig = load(self.config.as_deref())?;
        set!(cfg, self, taus, t, variants, initial);
        set_opt!(cfg, self, fcidump, thc, thc_basis, n_electrons, out_dir);
        if let Some(p) = self.phases {
            cfg.phases = p.try_into().map_err(|p: Vec<f64>| {
                crate::error::CliError::Config(format!("need 3 phases, got {}", p.len()))
            })?;
        }
        if self.spinless {
            cfg.spinful = false;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Orbitals.
    #[arg(long)]
    pub n: Option<u64>,
    /// THC rank.
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub spinless: bool,
    #[arg(long, value_parser = parse_architecture)]
    pub architecture: Option<Architecture>,
    /// First-stage rank of the double-factorized reference.
    #[arg(long)]
    pub motta_l: Option<u64>,
    /// Average second-stage rank of the double-factorized reference.
    #[arg(long)]
    pub motta_xi: Option<u64>,
    /// Rotation synthesis precision; adds a T-gate column.
    #[arg(long)]
    pub eps_rot: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn parse_architecture(s: &str) -> Result<Architecture, String> {
    s.parse().map_err(|e: isothc::Error| e.to_string())
}

impl EstimateArgs {
    pub fn resolve(self) -> CliResult<EstimateConfig> {
        let mut cfg: EstimateConfig = load(self.config.as_deref())?;
        set!(cfg, self, n, m, architecture, format);
        set_opt!(cfg, self, motta_l, motta_xi, eps_rot, out_dir);
        if self.spinless {
            cfg.spinful = false;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV file with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Column holding x (default: first).
    #[arg(long)]
    pub x: Option<String>,
    /// Column holding y (default: second).
    #[arg(long)]
    pub y: Option<String>,
    /// Fit only the points with the k largest x.
    #[arg(long)]
    pub k_last: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl FitArgs {
    pub fn resolve(self) -> CliResult<FitConfig> {
        let mut cfg: FitConfig = load(self.config.as_deref())?;
        set_opt!(cfg, self, input, x, y, k_last, out_dir);
        Ok(cfg)
    }
}
