//! Dense Fock-space simulation in the occupation basis.
//!
//! Mode `p` is bit `p` of the basis index and creation operators are ordered
//! by mode index (Jordan–Wigner, lowest mode first). Each spin sector holds
//! the `N` system modes `a` followed by the `M − N` ancilla modes `b`; the
//! spin-down sector, when present, follows the spin-up one.

mod givens;
mod reset;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::ManyBodyOperator;

pub use givens::{
    apply_basis_rotation, complete_isometry, givens_decompose, Direction, GivensRotation,
    GivensSequence, SpinSector,
};
pub use reset::{reset_ancillas, system_density};

pub const DENSITY_MODE_CAP: usize = 14;
pub const PURE_MODE_CAP: usize = 20;

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeLayout {
    pub n_system: usize,
    pub n_ancilla: usize,
    pub spinful: bool,
}

impl ModeLayout {
    pub fn new(n_system: usize, n_ancilla: usize, spinful: bool) -> Self {
        Self {
            n_system,
            n_ancilla,
            spinful,
        }
    }

    /// Layout of the bare system: no ancillas.
    pub fn system(n_system: usize, spinful: bool) -> Self {
        Self::new(n_system, 0, spinful)
    }

    pub fn n_sectors(&self) -> usize {
        if self.spinful {
            2
        } else {
            1
        }
    }

    /// Modes per spin sector (`M`).
    pub fn sector_size(&self) -> usize {
        self.n_system + self.n_ancilla
    }

    pub fn n_modes(&self) -> usize {
        self.n_sectors() * self.sector_size()
    }

    pub fn dim(&self) -> usize {
        1 << self.n_modes()
    }

    /// Global index of local mode `k` (`0..M`) in spin sector `sector`.
    pub fn mode(&self, k: usize, sector: usize) -> usize {
        sector * self.sector_size() + k
    }

    pub fn ancilla_mask(&self) -> usize {
        let mut mask = 0;
        for s in 0..self.n_sectors() {
            for k in self.n_system..self.sector_size() {
                mask |= 1 << self.mode(k, s);
            }
        }
        mask
    }

    /// Same system with the ancillas removed.
    pub fn system_layout(&self) -> ModeLayout {
        Self::system(self.n_system, self.spinful)
    }

    /// Basis index of a system occupation string (system mode `i + σN`) in
    /// this layout with every ancilla empty. No sign arises because the
    /// relative order of the occupied modes is unchanged.
    pub fn embed_system_bits(&self, bits: usize) -> usize {
        let n = self.n_system;
        let mut out = 0;
        for s in 0..self.n_sectors() {
            for i in 0..n {
                if bits >> (i + s * n) & 1 == 1 {
                    out |= 1 << self.mode(i, s);
                }
            }
        }
        out
    }

    /// Inverse of [`embed_system_bits`](Self::embed_system_bits) on the a-modes.
    pub fn system_bits(&self, bits: usize) -> usize {
        let n = self.n_system;
        let mut out = 0;
        for s in 0..self.n_sectors() {
            for i in 0..n {
                if bits >> self.mode(i, s) & 1 == 1 {
                    out |= 1 << (i + s * n);
                }
            }
        }
        out
    }

    fn check_cap(&self, cap: usize, what: &'static str) -> Result<()> {
        if self.n_modes() > cap {
            return Err(Error::Size {
                what,
                modes: self.n_modes(),
                cap,
            });
        }
        Ok(())
    }
}

/// Operations shared by pure states and density matrices.
pub trait FockOps {
    fn layout(&self) -> ModeLayout;

    /// Multiplies basis string `|n⟩` by `phase(n)` (`U = Σ phase(n)|n⟩⟨n|`).
    fn apply_diagonal(&mut self, phase: &dyn Fn(usize) -> Complex64);

    /// Applies the 2×2 unitary `g` on the span of `|1_p 0_q⟩, |0_p 1_q⟩`
    /// (in that order) for every configuration of the other modes.
    fn apply_pair(&mut self, p: usize, q: usize, g: [[Complex64; 2]; 2]);
}

fn pair_indices(dim: usize, p: usize, q: usize) -> impl Iterator<Item = (usize, usize)> {
    let (bp, bq) = (1usize << p, 1usize << q);
    (0..dim)
        .filter(move |&k| k & bp != 0 && k & bq == 0)
        .map(move |k| (k, k ^ bp ^ bq))
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    layout: ModeLayout,
    amplitudes: DVector<Complex64>,
}

impl FockState {
    pub fn basis(layout: ModeLayout, bits: usize) -> Result<Self> {
        layout.check_cap(PURE_MODE_CAP, "pure state")?;
        if bits >= layout.dim() {
            return Err(Error::Argument(format!(
                "basis string {bits:#b} has more than {} modes",
                layout.n_modes()
            )));
        }
        let mut amplitudes = DVector::zeros(layout.dim());
        amplitudes[bits] = Complex64::new(1.0, 0.0);
        Ok(Self { layout, amplitudes })
    }

    pub fn from_amplitudes(layout: ModeLayout, amplitudes: DVector<Complex64>) -> Result<Self> {
        layout.check_cap(PURE_MODE_CAP, "pure state")?;
        if amplitudes.len() != layout.dim() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for {} modes",
                amplitudes.len(),
                layout.n_modes()
            )));
        }
        let norm = amplitudes.norm();
        if !((norm - 1.0).abs() <= NORM_TOL) {
            return Err(Error::Argument(format!("state norm {norm} is not 1")));
        }
        Ok(Self { layout, amplitudes })
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Same occupations with every ancilla of `target` empty.
    pub fn embed(&self, target: ModeLayout) -> Result<Self> {
        check_embed(self.layout, target)?;
        let mut amplitudes = DVector::zeros(target.dim());
        for (bits, &a) in self.amplitudes.iter().enumerate() {
            amplitudes[target.embed_system_bits(bits)] = a;
        }
        Self::from_amplitudes(target, amplitudes)
    }

    pub fn to_density(&self) -> Result<FockDensity> {
        self.layout.check_cap(DENSITY_MODE_CAP, "density matrix")?;
        let matrix = &self.amplitudes * self.amplitudes.adjoint();
        Ok(FockDensity {
            layout: self.layout,
            matrix,
        })
    }

    pub fn to_json(&self) -> String {
        let dump: Vec<[f64; 2]> = self.amplitudes.iter().map(|c| [c.re, c.im]).collect();
        serde_json::json!({ "layout": self.layout, "amplitudes": dump }).to_string()
    }
}

fn check_embed(from: ModeLayout, to: ModeLayout) -> Result<()> {
    if from.n_ancilla != 0 || from.n_system != to.n_system || from.spinful != to.spinful {
        return Err(Error::Dimension(format!(
            "cannot embed {from:?} into {to:?}"
        )));
    }
    Ok(())
}

impl FockOps for FockState {
    fn layout(&self) -> ModeLayout {
        self.layout
    }

    fn apply_diagonal(&mut self, phase: &dyn Fn(usize) -> Complex64) {
        for (bits, a) in self.amplitudes.iter_mut().enumerate() {
            *a *= phase(bits);
        }
    }

    fn apply_pair(&mut self, p: usize, q: usize, g: [[Complex64; 2]; 2]) {
        for (i10, i01) in pair_indices(self.amplitudes.len(), p, q) {
            let (x, y) = (self.amplitudes[i10], self.amplitudes[i01]);
            self.amplitudes[i10] = g[0][0] * x + g[0][1] * y;
            self.amplitudes[i01] = g[1][0] * x + g[1][1] * y;
        }
    }
}

/// Density matrix in the occupation basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    layout: ModeLayout,
    matrix: DMatrix<Complex64>,
}

impl FockDensity {
    pub fn from_matrix(layout: ModeLayout, matrix: DMatrix<Complex64>) -> Result<Self> {
        layout.check_cap(DENSITY_MODE_CAP, "density matrix")?;
        if matrix.shape() != (layout.dim(), layout.dim()) {
            return Err(Error::Dimension(format!(
                "density is {}x{}, layout needs {}",
                matrix.nrows(),
                matrix.ncols(),
                layout.dim()
            )));
        }
        let rho = Self { layout, matrix };
        rho.check_invariants()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(layout: ModeLayout, matrix: DMatrix<Complex64>) -> Self {
        Self { layout, matrix }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Hermitian, unit trace and positive semidefinite within tolerance.
    pub fn check_invariants(&self) -> Result<()> {
        let herm = (&self.matrix - self.matrix.adjoint()).camax();
        if !(herm <= 1e-10) {
            return Err(Error::Argument(format!(
                "density is not Hermitian ({herm:.3e})"
            )));
        }
        let tr = self.trace();
        if !((tr - Complex64::new(1.0, 0.0)).norm() <= 1e-10) {
            return Err(Error::Argument(format!("density trace is {tr}")));
        }
        let lowest = hermitian_eigenvalues(&self.matrix)
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        if !(lowest >= -1e-9) {
            return Err(Error::Argument(format!(
                "density has eigenvalue {lowest:.3e}"
            )));
        }
        Ok(())
    }

    /// Probability weight on basis strings with an occupied ancilla.
    pub fn ancilla_weight(&self) -> f64 {
        let mask = self.layout.ancilla_mask();
        (0..self.matrix.nrows())
            .filter(|&k| k & mask != 0)
            .map(|k| self.matrix[(k, k)].re)
            .sum()
    }

    /// Same density with every ancilla of `target` empty.
    pub fn embed(&self, target: ModeLayout) -> Result<Self> {
        check_embed(self.layout, target)?;
        target.check_cap(DENSITY_MODE_CAP, "density matrix")?;
        let dim = self.matrix.nrows();
        let map: Vec<usize> = (0..dim).map(|b| target.embed_system_bits(b)).collect();
        let mut matrix = DMatrix::zeros(target.dim(), target.dim());
        for c in 0..dim {
            for r in 0..dim {
                matrix[(map[r], map[c])] = self.matrix[(r, c)];
            }
        }
        Ok(Self::from_matrix_unchecked(target, matrix))
    }

    pub fn to_json(&self) -> String {
        let n = self.matrix.nrows();
        let rows: Vec<Vec<[f64; 2]>> = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| [self.matrix[(r, c)].re, self.matrix[(r, c)].im])
                    .collect()
            })
            .collect();
        serde_json::json!({ "layout": self.layout, "matrix": rows }).to_string()
    }
}

impl FockOps for FockDensity {
    fn layout(&self) -> ModeLayout {
        self.layout
    }

    fn apply_diagonal(&mut self, phase: &dyn Fn(usize) -> Complex64) {
        let phases: Vec<Complex64> = (0..self.matrix.nrows()).map(phase).collect();
        for (c, pc) in phases.iter().enumerate() {
            let pc = pc.conj();
            for (r, pr) in phases.iter().enumerate() {
                self.matrix[(r, c)] *= pr * pc;
            }
        }
    }

    fn apply_pair(&mut self, p: usize, q: usize, g: [[Complex64; 2]; 2]) {
        let dim = self.matrix.nrows();
        let pairs: Vec<(usize, usize)> = pair_indices(dim, p, q).collect();
        for &(i10, i01) in &pairs {
            for c in 0..dim {
                let (x, y) = (self.matrix[(i10, c)], self.matrix[(i01, c)]);
                self.matrix[(i10, c)] = g[0][0] * x + g[0][1] * y;
                self.matrix[(i01, c)] = g[1][0] * x + g[1][1] * y;
            }
        }
        let gc = [
            [g[0][0].conj(), g[0][1].conj()],
            [g[1][0].conj(), g[1][1].conj()],
        ];
        for &(i10, i01) in &pairs {
            for r in 0..dim {
                let (x, y) = (self.matrix[(r, i10)], self.matrix[(r, i01)]);
                self.matrix[(r, i10)] = gc[0][0] * x + gc[0][1] * y;
                self.matrix[(r, i01)] = gc[1][0] * x + gc[1][1] * y;
            }
        }
    }
}

fn hermitian_eigenvalues(a: &DMatrix<Complex64>) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    SymmetricEigen::new(a.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// `E(n) = ½ Σ_{(α,σ)≠(β,γ)} Ṽ_αβ n_ασ n_βγ`: every unordered pair of distinct
/// occupied spin-modes contributes `Ṽ_αβ` once.
pub fn diagonal_two_body_energy(layout: &ModeLayout, vtilde: &DMatrix<f64>, bits: usize) -> f64 {
    let m = layout.sector_size();
    let occ: Vec<usize> = (0..layout.n_modes())
        .filter(|&p| bits >> p & 1 == 1)
        .map(|p| p % m)
        .collect();
    let mut e = 0.0;
    for (x, &a) in occ.iter().enumerate() {
        for &b in &occ[x + 1..] {
            e += vtilde[(a, b)];
        }
    }
    e
}

/// `exp(−iτ E(n))` on every basis string, with modes read as c-modes.
pub fn apply_diagonal_two_body<S: FockOps>(
    state: &mut S,
    vtilde: &DMatrix<f64>,
    tau: f64,
) -> Result<()> {
    let layout = state.layout();
    let m = layout.sector_size();
    if vtilde.shape() != (m, m) {
        return Err(Error::Dimension(format!(
            "vtilde is {}x{}, layout has {m} modes per sector",
            vtilde.nrows(),
            vtilde.ncols()
        )));
    }
    let energies: Vec<f64> = (0..layout.dim())
        .map(|b| diagonal_two_body_energy(&layout, vtilde, b))
        .collect();
    state.apply_diagonal(&|b| Complex64::from_polar(1.0, -tau * energies[b]));
    Ok(())
}

/// `exp(−iτ Σ h_k n_k)` with `h_diag` indexed by local mode (`0..M`), applied
/// identically in each spin sector. Entries beyond `h_diag.len()` are zero.
pub fn apply_diagonal_one_body<S: FockOps>(state: &mut S, h_diag: &[f64], tau: f64) -> Result<()> {
    let layout = state.layout();
    let m = layout.sector_size();
    if h_diag.len() > m {
        return Err(Error::Dimension(format!(
            "{} one-body energies for {m} modes",
            h_diag.len()
        )));
    }
    let energies: Vec<f64> = (0..layout.dim())
        .map(|bits| {
            (0..layout.n_modes())
                .filter(|&p| bits >> p & 1 == 1)
                .filter_map(|p| h_diag.get(p % m))
                .sum()
        })
        .collect();
    state.apply_diagonal(&|b| Complex64::from_polar(1.0, -tau * energies[b]));
    Ok(())
}

/// `exp(iφ N_b)`.
pub fn phase_on_ancillas<S: FockOps>(state: &mut S, phi: f64) {
    let mask = state.layout().ancilla_mask();
    state.apply_diagonal(&|b| Complex64::from_polar(1.0, phi * (b & mask).count_ones() as f64));
}

/// `½ Σ|λ(ρ − σ)|`.
pub fn trace_distance(rho: &FockDensity, sigma: &FockDensity) -> Result<f64> {
    if rho.layout != sigma.layout {
        return Err(Error::Dimension(format!(
            "layouts differ: {:?} vs {:?}",
            rho.layout, sigma.layout
        )));
    }
    let diff = &rho.matrix - &sigma.matrix;
    Ok(0.5
        * hermitian_eigenvalues(&diff)
            .iter()
            .map(|v| v.abs())
            .sum::<f64>())
}

fn check_operator(op: &ManyBodyOperator, layout: ModeLayout) -> Result<()> {
    if layout.n_ancilla != 0 || op.n_modes() != layout.n_modes() || op.spinful() != layout.spinful {
        return Err(Error::Dimension(format!(
            "operator on {} modes does not act on {layout:?}",
            op.n_modes()
        )));
    }
    Ok(())
}

/// `e^{−iHt}` as a dense complex matrix, from the cached eigendecomposition.
pub fn propagator(op: &ManyBodyOperator, t: f64) -> DMatrix<Complex64> {
    let (values, vectors) = op.spectrum();
    let q = vectors.map(|x| Complex64::new(x, 0.0));
    let mut left = q.clone();
    for (k, &e) in values.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, -e * t);
        for x in left.column_mut(k).iter_mut() {
            *x *= ph;
        }
    }
    left * q.transpose()
}

/// `e^{−iHt}|ψ⟩`.
pub fn exact_evolution(op: &ManyBodyOperator, state: &FockState, t: f64) -> Result<FockState> {
    check_operator(op, state.layout)?;
    let (values, vectors) = op.spectrum();
    let dim = values.len();
    // c = Qᵀψ, phases, then Q c
    let mut coeff = DVector::<Complex64>::zeros(dim);
    for k in 0..dim {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..dim {
            acc += state.amplitudes[r] * vectors[(r, k)];
        }
        coeff[k] = acc * Complex64::from_polar(1.0, -values[k] * t);
    }
    let mut out = DVector::<Complex64>::zeros(dim);
    for k in 0..dim {
        for r in 0..dim {
            out[r] += coeff[k] * vectors[(r, k)];
        }
    }
    Ok(FockState {
        layout: state.layout,
        amplitudes: out,
    })
}

/// `e^{−iHt} ρ e^{iHt}`.
pub fn exact_evolution_density(
    op: &ManyBodyOperator,
    rho: &FockDensity,
    t: f64,
) -> Result<FockDensity> {
    check_operator(op, rho.layout)?;
    let u = propagator(op, t);
    Ok(FockDensity::from_matrix_unchecked(
        rho.layout,
        &u * &rho.matrix * u.adjoint(),
    ))
}

/// `U ρ U†` for a dense unitary.
pub fn conjugate(rho: &FockDensity, u: &DMatrix<Complex64>) -> Result<FockDensity> {
    if u.shape() != rho.matrix.shape() {
        return Err(Error::Dimension("unitary and density sizes differ".into()));
    }
    Ok(FockDensity::from_matrix_unchecked(
        rho.layout,
        u * &rho.matrix * u.adjoint(),
    ))
}

/// Dense matrix of a sequence of state operations, built column by column
/// from basis states.
pub fn dense_unitary(
    layout: ModeLayout,
    apply: &dyn Fn(&mut FockState) -> Result<()>,
) -> Result<DMatrix<Complex64>> {
    let dim = layout.dim();
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut psi = FockState::basis(layout, col)?;
        apply(&mut psi)?;
        out.set_column(col, psi.amplitudes());
    }
    Ok(out)
}
