//! Ancilla-reset Trotter steps and their error analysis.
//!
//! One step applies `e^{−ihτ/2} U e^{−ihτ/2}` on the system plus ancillas and
//! then resets the ancillas. The basic variant uses `U = 𝒰† e^{−iDτ} 𝒰`; the
//! improved variant uses
//! `U = 𝒱 e^{iφ₁N_b} 𝒱 e^{iφ₂N_b} 𝒱 e^{iφ₃N_b} 𝒱` with `𝒱 = 𝒰† e^{−iDτ/4} 𝒰`,
//! where `D` is the THC kernel read as a diagonal operator on the c-modes.

mod bounds;

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::focksim::{
    self, apply_basis_rotation, apply_diagonal_one_body, apply_diagonal_two_body,
    complete_isometry, givens_decompose, phase_on_ancillas, reset_ancillas, system_density,
    Direction, FockDensity, FockOps, FockState, GivensSequence, ModeLayout, SpinSector,
};
use crate::hamiltonian::{build_many_body_operator, ElectronicHamiltonian, ManyBodyOperator};
use crate::thc::{projected_interaction, ThcFactorization};

pub use bounds::{
    phase_cancellation_sums, thc_bound, trotter_bound, ErrorBudget, ThcBound, ThcBoundBranch,
};

pub const DEFAULT_PHASES: [f64; 3] = [
    -std::f64::consts::FRAC_PI_2,
    std::f64::consts::PI,
    std::f64::consts::FRAC_PI_2,
];

/// Largest extended mode count for which steps are compiled to a dense unitary.
const COMPILE_MODE_LIMIT: usize = 10;

const ANCILLA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Basic,
    Improved,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Basic => "basic",
            Variant::Improved => "improved",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "basic" => Ok(Variant::Basic),
            "improved" => Ok(Variant::Improved),
            other => Err(Error::Argument(format!("unknown variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSpec {
    pub variant: Variant,
    pub tau: f64,
    pub phases: [f64; 3],
}

impl StepSpec {
    pub fn new(variant: Variant, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Argument(format!("time step {tau} must be positive")));
        }
        Ok(Self {
            variant,
            tau,
            phases: DEFAULT_PHASES,
        })
    }

    pub fn with_phases(mut self, phases: [f64; 3]) -> Self {
        self.phases = phases;
        self
    }
}

/// Everything a step needs from a factorization and a Hamiltonian whose `h`
/// is diagonal: the `𝒰` network, the kernel and the orbital energies.
#[derive(Debug)]
pub struct AncillaCircuit {
    layout: ModeLayout,
    rotation: GivensSequence,
    vtilde: DMatrix<f64>,
    h_diag: Vec<f64>,
    vprime: DMatrix<f64>,
    vprime_op: OnceLock<Result<ManyBodyOperator>>,
}

impl AncillaCircuit {
    pub fn new(thc: &ThcFactorization, ham: &ElectronicHamiltonian, spinful: bool) -> Result<Self> {
        let (n, m) = (thc.n(), thc.m());
        if ham.n_orbitals() != n {
            return Err(Error::Dimension(format!(
                "factorization has N = {n}, Hamiltonian has {}",
                ham.n_orbitals()
            )));
        }
        if !ham.is_h_diagonal(1e-10) {
            return Err(Error::Argument(
                "one-body matrix is not diagonal; rotate to the h eigenbasis first".into(),
            ));
        }
        let layout = ModeLayout::new(n, m - n, spinful);
        if layout.n_modes() > focksim::DENSITY_MODE_CAP {
            return Err(Error::Size {
                what: "ancilla-extended density matrix",
                modes: layout.n_modes(),
                cap: focksim::DENSITY_MODE_CAP,
            });
        }
        // 𝒰 f†_p 𝒰† = Σ_q R_qp f†_q with R = Wᵀ takes c_α to f_α
        let w = complete_isometry(thc.u())?;
        let rotation = givens_decompose(&w, n);
        Ok(Self {
            layout,
            rotation,
            vtilde: thc.vtilde().clone(),
            h_diag: (0..n).map(|i| ham.h()[(i, i)]).collect(),
            vprime: projected_interaction(thc),
            vprime_op: OnceLock::new(),
        })
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn rotation(&self) -> &GivensSequence {
        &self.rotation
    }

    pub fn h_diag(&self) -> &[f64] {
        &self.h_diag
    }

    /// Many-body `V' = ⟨0|Ṽ|0⟩_b` on the system modes.
    pub fn vprime_operator(&self) -> Result<&ManyBodyOperator> {
        self.vprime_op
            .get_or_init(|| {
                let n = self.layout.n_system;
                let ham = ElectronicHamiltonian::new_symmetrized(
                    DMatrix::zeros(n, n),
                    self.vprime.clone(),
                    0.0,
                )?;
                build_many_body_operator(&ham, self.layout.spinful)
            })
            .as_ref()
            .map_err(|e| Error::Argument(e.to_string()))
    }

    /// `𝒰† e^{−iDτ} 𝒰`.
    fn apply_v_block<S: FockOps>(&self, state: &mut S, tau: f64) -> Result<()> {
        apply_basis_rotation(state, &self.rotation, Direction::Forward, SpinSector::Both)?;
        apply_diagonal_two_body(state, &self.vtilde, tau)?;
        apply_basis_rotation(state, &self.rotation, Direction::Inverse, SpinSector::Both)
    }

    /// The extended-space unitary `U` of the step, without the one-body halves.
    pub fn apply_interaction<S: FockOps>(&self, state: &mut S, spec: &StepSpec) -> Result<()> {
        match spec.variant {
            Variant::Basic => self.apply_v_block(state, spec.tau),
            Variant::Improved => {
                let quarter = spec.tau / 4.0;
                // rightmost factor first
                self.apply_v_block(state, quarter)?;
                phase_on_ancillas(state, spec.phases[2]);
                self.apply_v_block(state, quarter)?;
                phase_on_ancillas(state, spec.phases[1]);
                self.apply_v_block(state, quarter)?;
                phase_on_ancillas(state, spec.phases[0]);
                self.apply_v_block(state, quarter)
            }
        }
    }

    /// `e^{−ihτ/2} U e^{−ihτ/2}` without the reset.
    pub fn apply_step_unitary<S: FockOps>(&self, state: &mut S, spec: &StepSpec) -> Result<()> {
        apply_diagonal_one_body(state, &self.h_diag, spec.tau / 2.0)?;
        self.apply_interaction(state, spec)?;
        apply_diagonal_one_body(state, &self.h_diag, spec.tau / 2.0)
    }

    fn check_input(&self, rho: &FockDensity) -> Result<()> {
        if rho.layout() != self.layout {
            return Err(Error::Dimension(format!(
                "state layout {:?} differs from circuit layout {:?}",
                rho.layout(),
                self.layout
            )));
        }
        let weight = rho.ancilla_weight();
        if weight > ANCILLA_TOL {
            return Err(Error::AncillaOccupied { weight });
        }
        Ok(())
    }

    /// One step applied gate by gate.
    pub fn step_channel(&self, rho: &FockDensity, spec: &StepSpec) -> Result<FockDensity> {
        self.check_input(rho)?;
        let mut out = rho.clone();
        self.apply_step_unitary(&mut out, spec)?;
        reset_ancillas(&out)
    }

    /// The step unitary as a dense matrix, for repeated application.
    pub fn compile(&self, spec: &StepSpec) -> Result<CompiledStep> {
        let unitary = focksim::dense_unitary(self.layout, &|psi: &mut FockState| {
            self.apply_step_unitary(psi, spec)
        })?;
        Ok(CompiledStep {
            layout: self.layout,
            unitary,
        })
    }
}

/// Dense `e^{−ihτ/2} U e^{−ihτ/2}` followed by a reset.
#[derive(Debug, Clone)]
pub struct CompiledStep {
    layout: ModeLayout,
    unitary: DMatrix<Complex64>,
}

impl CompiledStep {
    pub fn unitary(&self) -> &DMatrix<Complex64> {
        &self.unitary
    }

    pub fn apply(&self, rho: &FockDensity) -> Result<FockDensity> {
        if rho.layout() != self.layout {
            return Err(Error::Dimension(
                "state layout differs from compiled step".into(),
            ));
        }
        let weight = rho.ancilla_weight();
        if weight > ANCILLA_TOL {
            return Err(Error::AncillaOccupied { weight });
        }
        reset_ancillas(&focksim::conjugate(rho, &self.unitary)?)
    }
}

/// Number of steps for total time `t`; `t` must be a whole multiple of `tau`.
pub fn step_count(t: f64, tau: f64) -> Result<usize> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Argument(format!(
            "total time {t} must be non-negative"
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::Argument(format!("time step {tau} must be positive")));
    }
    let steps = (t / tau).round();
    if (steps * tau - t).abs() > 1e-9 * t.max(1.0) {
        return Err(Error::Argument(format!(
            "t = {t} is not a whole number of steps of {tau}"
        )));
    }
    Ok(steps as usize)
}

#[derive(Debug, Clone)]
pub struct EvolveOutcome {
    /// Final system density (ancillas traced out).
    pub rho_final: FockDensity,
    pub steps: usize,
    pub error_vs_exact: f64,
}

/// Repeats the step `round(t/τ)` times from `psi0` and compares with
/// `e^{−iHt}|ψ₀⟩` for the exact operator `exact` (same orbital basis).
pub fn evolve(
    psi0: &FockState,
    circuit: &AncillaCircuit,
    exact: &ManyBodyOperator,
    t: f64,
    spec: &StepSpec,
) -> Result<EvolveOutcome> {
    let steps = step_count(t, spec.tau)?;
    let sys_layout = circuit.layout().system_layout();
    if psi0.layout() != sys_layout {
        return Err(Error::Dimension(format!(
            "initial state layout {:?} is not the system layout {sys_layout:?}",
            psi0.layout()
        )));
    }
    let mut rho = psi0.embed(circuit.layout())?.to_density()?;
    if steps > 0 {
        if circuit.layout().n_modes() <= COMPILE_MODE_LIMIT {
            let compiled = circuit.compile(spec)?;
            for _ in 0..steps {
                rho = compiled.apply(&rho)?;
            }
        } else {
            for _ in 0..steps {
                rho = circuit.step_channel(&rho, spec)?;
            }
        }
    }
    let rho_final = system_density(&rho)?;
    let target = focksim::exact_evolution(exact, psi0, t)?.to_density()?;
    let error_vs_exact = focksim::trace_distance(&rho_final, &target)?;
    Ok(EvolveOutcome {
        rho_final,
        steps,
        error_vs_exact,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub variant: Variant,
    pub tau: f64,
    pub steps: usize,
    pub error: f64,
}

/// [`evolve`] for every `(variant, τ)` pair, in parallel.
pub fn sweep(
    psi0: &FockState,
    circuit: &AncillaCircuit,
    exact: &ManyBodyOperator,
    t: f64,
    taus: &[f64],
    variants: &[Variant],
    phases: [f64; 3],
) -> Result<Vec<SweepRow>> {
    let jobs: Vec<(Variant, f64)> = variants
        .iter()
        .flat_map(|&v| taus.iter().map(move |&tau| (v, tau)))
        .collect();
    // touch the cached spectrum once before fanning out
    exact.spectrum();
    jobs.par_iter()
        .map(|&(variant, tau)| {
            let spec = StepSpec::new(variant, tau)?.with_phases(phases);
            let out = evolve(psi0, circuit, exact, t, &spec)?;
            Ok(SweepRow {
                variant,
                tau,
                steps: out.steps,
                error: out.error_vs_exact,
            })
        })
        .collect()
}

/// Trace distance between `tr_b(U (ρ ⊗ |0⟩⟨0|_b) U†)` and `e^{−iV'τ} ρ e^{iV'τ}`
/// for the system density `rho`, with `U` the extended interaction of `spec`.
pub fn projection_error_measured(
    circuit: &AncillaCircuit,
    rho: &FockDensity,
    spec: &StepSpec,
) -> Result<f64> {
    let mut ext = rho.embed(circuit.layout())?;
    circuit.apply_interaction(&mut ext, spec)?;
    let reduced = system_density(&ext)?;
    let ideal = focksim::exact_evolution_density(circuit.vprime_operator()?, rho, spec.tau)?;
    focksim::trace_distance(&reduced, &ideal)
}

/// Hartree–Fock reference in the h eigenbasis: the lowest orbitals filled,
/// spin-up before spin-down at each level.
pub fn hartree_fock_bits(n_orbitals: usize, n_electrons: usize, spinful: bool) -> Result<usize> {
    let capacity = if spinful { 2 * n_orbitals } else { n_orbitals };
    if n_electrons > capacity {
        return Err(Error::Argument(format!(
            "{n_electrons} electrons exceed {capacity} spin-orbitals"
        )));
    }
    let mut bits = 0usize;
    for e in 0..n_electrons {
        bits |= if spinful {
            1 << (e / 2 + (e % 2) * n_orbitals)
        } else {
            1 << e
        };
    }
    Ok(bits)
}
