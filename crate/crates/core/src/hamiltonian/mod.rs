//! Electronic-structure Hamiltonians `H = Σ h_ij a†_i a_j + ½ Σ V_ijkl a†_i a†_k a_l a_j`.
//!
//! Two-electron integrals use the chemists' convention `(ij|kl)`: the pair
//! `(i, j)` belongs to the first electron, so `V_ijkl` multiplies
//! `a†_i a†_k a_l a_j`. Real orbitals are assumed throughout, giving the
//! 8-fold permutation symmetry
//! `(ij|kl) = (ji|kl) = (ij|lk) = (ji|lk) = (kl|ij) = (lk|ij) = (kl|ji) = (lk|ji)`.
//!
//! The ERI tensor is stored as an `N² × N²` matrix indexed by the flattened
//! pairs `I = i·N + j` and `K = k·N + l`.

mod fcidump;
mod json;
mod many_body;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::thc::ThcFactorization;

pub use fcidump::parse_fcidump;
pub use json::HamiltonianDocument;
pub use many_body::{
    build_many_body_operator, build_many_body_operator_capped, ground_state_energy,
    ground_state_energy_capped, ManyBodyOperator, DEFAULT_MODE_CAP,
};

/// Tolerance for the symmetry invariants of `h` and the ERI tensor.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ElectronicHamiltonian {
    n_orbitals: usize,
    core_energy: f64,
    h: DMatrix<f64>,
    eri: DMatrix<f64>,
    n_electrons: Option<usize>,
    ms2: Option<i64>,
}

impl ElectronicHamiltonian {
    /// Builds a Hamiltonian after checking the symmetry invariants.
    pub fn new(h: DMatrix<f64>, eri: DMatrix<f64>, core_energy: f64) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n {
            return Err(Error::Dimension(format!(
                "h is {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
        if eri.nrows() != n * n || eri.ncols() != n * n {
            return Err(Error::Dimension(format!(
                "eri is {}x{}, expected {}x{}",
                eri.nrows(),
                eri.ncols(),
                n * n,
                n * n
            )));
        }
        let ham = Self {
            n_orbitals: n,
            core_energy,
            h,
            eri,
            n_electrons: None,
            ms2: None,
        };
        let scale = 1.0f64.max(ham.eri.amax()).max(ham.h.amax());
        let (dh, dv) = ham.symmetry_violation();
        if dh > SYMMETRY_TOL * scale {
            return Err(Error::Argument(format!(
                "h is not symmetric (max deviation {dh:.3e})"
            )));
        }
        if dv > SYMMETRY_TOL * scale {
            return Err(Error::Argument(format!(
                "eri lacks 8-fold symmetry (max deviation {dv:.3e})"
            )));
        }
        Ok(ham)
    }

    /// Like [`new`](Self::new) but averages `h` and the ERI tensor over their
    /// symmetry images first. Useful after floating-point transformations.
    pub fn new_symmetrized(h: DMatrix<f64>, eri: DMatrix<f64>, core_energy: f64) -> Result<Self> {
        let n = h.nrows();
        let h = (&h + h.transpose()) * 0.5;
        let eri = symmetrize_eri(&eri, n);
        Self::new(h, eri, core_energy)
    }

    pub fn with_metadata(mut self, n_electrons: Option<usize>, ms2: Option<i64>) -> Self {
        self.n_electrons = n_electrons;
        self.ms2 = ms2;
        self
    }

    /// Random Hamiltonian with Gaussian entries projected onto the symmetric images.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let h = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let eri = DMatrix::from_fn(n * n, n * n, |_, _| {
            0.5 * rng.sample::<f64, _>(StandardNormal)
        });
        Self::new_symmetrized(h, eri, 0.0).expect("symmetrized by construction")
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn core_energy(&self) -> f64 {
        self.core_energy
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// ERI tensor as the `N² × N²` pair matrix.
    pub fn eri_matrix(&self) -> &DMatrix<f64> {
        &self.eri
    }

    #[inline]
    pub fn eri(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n_orbitals;
        self.eri[(i * n + j, k * n + l)]
    }

    pub fn n_electrons(&self) -> Option<usize> {
        self.n_electrons
    }

    pub fn ms2(&self) -> Option<i64> {
        self.ms2
    }

    /// Same Hamiltonian with a replaced two-body tensor (used for `h + V'`).
    pub fn with_eri(&self, eri: DMatrix<f64>) -> Result<Self> {
        Ok(
            Self::new_symmetrized(self.h.clone(), eri, self.core_energy)?
                .with_metadata(self.n_electrons, self.ms2),
        )
    }

    /// One-body part only, no core energy.
    pub fn one_body_part(&self) -> Self {
        let n = self.n_orbitals;
        Self {
            n_orbitals: n,
            core_energy: 0.0,
            h: self.h.clone(),
            eri: DMatrix::zeros(n * n, n * n),
            n_electrons: self.n_electrons,
            ms2: self.ms2,
        }
    }

    /// Two-body part only, no core energy.
    pub fn two_body_part(&self) -> Self {
        let n = self.n_orbitals;
        Self {
            n_orbitals: n,
            core_energy: 0.0,
            h: DMatrix::zeros(n, n),
            eri: self.eri.clone(),
            n_electrons: self.n_electrons,
            ms2: self.ms2,
        }
    }

    pub fn is_h_diagonal(&self, tol: f64) -> bool {
        let n = self.n_orbitals;
        (0..n).all(|i| (0..n).all(|j| i == j || self.h[(i, j)].abs() <= tol))
    }

    fn symmetry_violation(&self) -> (f64, f64) {
        let n = self.n_orbitals;
        let dh = (&self.h - self.h.transpose()).amax();
        let mut dv = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.eri(i, j, k, l);
                        for (a, b, c, d) in images(i, j, k, l) {
                            dv = dv.max((v - self.eri(a, b, c, d)).abs());
                        }
                    }
                }
            }
        }
        (dh, dv)
    }

    /// Unique entries under the 8-fold symmetry, as `(i, j, k, l, value)` with
    /// `i ≥ j`, `k ≥ l`, `ij ≥ kl` (zero-indexed). Zeros are skipped.
    pub fn unique_eri_entries(&self) -> Vec<(usize, usize, usize, usize, f64)> {
        let n = self.n_orbitals;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                let ij = i * (i + 1) / 2 + j;
                for k in 0..n {
                    for l in 0..=k {
                        let kl = k * (k + 1) / 2 + l;
                        if kl > ij {
                            continue;
                        }
                        let v = self.eri(i, j, k, l);
                        if v != 0.0 {
                            out.push((i, j, k, l, v));
                        }
                    }
                }
            }
        }
        out
    }
}

/// The eight index permutations sharing one real ERI value.
pub(crate) fn images(i: usize, j: usize, k: usize, l: usize) -> [(usize, usize, usize, usize); 8] {
    [
        (i, j, k, l),
        (j, i, k, l),
        (i, j, l, k),
        (j, i, l, k),
        (k, l, i, j),
        (l, k, i, j),
        (k, l, j, i),
        (l, k, j, i),
    ]
}

/// Averages a pair matrix over the 8 symmetry images. Every image of an
/// entry receives the bitwise-identical value.
pub(crate) fn symmetrize_eri(eri: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let group = images(i, j, k, l);
                    let s: f64 = group
                        .iter()
                        .map(|&(a, b, c, d)| eri[(a * n + b, c * n + d)])
                        .sum();
                    for (a, b, c, d) in group {
                        out[(a * n + b, c * n + d)] = s / 8.0;
                    }
                }
            }
        }
    }
    out
}

/// Orbital rotation that diagonalizes `h`.
///
/// Eigenvalues come out ascending; each basis column is signed so that its
/// largest-magnitude entry is positive (first such entry on ties). Returns the
/// transformed Hamiltonian and the orthogonal matrix `C` whose columns express
/// the new orbitals in the old ones (`h' = Cᵀ h C`).
pub fn rotate_to_h_eigenbasis(
    ham: &ElectronicHamiltonian,
) -> (ElectronicHamiltonian, DMatrix<f64>) {
    let n = ham.n_orbitals;
    let (values, mut c) = linalg::sorted_symmetric_eigen(&ham.h);
    for col in 0..n {
        let mut best = 0;
        for r in 0..n {
            if c[(r, col)].abs() > c[(best, col)].abs() + 1e-12 {
                best = r;
            }
        }
        if c[(best, col)] < 0.0 {
            c.column_mut(col).neg_mut();
        }
    }
    let kron = c.kronecker(&c);
    let eri = kron.transpose() * &ham.eri * &kron;
    let h = DMatrix::from_diagonal(&values);
    let rotated = ElectronicHamiltonian {
        n_orbitals: n,
        core_energy: ham.core_energy,
        h,
        eri: symmetrize_eri(&eri, n),
        n_electrons: ham.n_electrons,
        ms2: ham.ms2,
    };
    (rotated, c)
}

/// Element-wise and (optionally) exact many-body norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSummary {
    pub l1_h: f64,
    pub l1_v: f64,
    pub l1_vtilde: Option<f64>,
    pub opnorm_h: Option<f64>,
    pub opnorm_v: Option<f64>,
}

/// L1 sums `Σ|h_ij|`, `Σ|V_ijkl|`, `Σ|Ṽ_αβ|`, plus exact operator norms of the
/// many-body `h` and `V` (core energy excluded) when `exact_opnorms` is set.
pub fn norm_summary(
    ham: &ElectronicHamiltonian,
    thc: Option<&ThcFactorization>,
    exact_opnorms: bool,
    spinful: bool,
) -> Result<NormSummary> {
    let l1_h = ham.h.iter().map(|x| x.abs()).sum();
    let l1_v = ham.eri.iter().map(|x| x.abs()).sum();
    let l1_vtilde = thc.map(|t| t.vtilde().iter().map(|x| x.abs()).sum());
    let (opnorm_h, opnorm_v) = if exact_opnorms {
        let hop = build_many_body_operator(&ham.one_body_part(), spinful)?;
        let vop = build_many_body_operator(&ham.two_body_part(), spinful)?;
        (Some(hop.opnorm()), Some(vop.opnorm()))
    } else {
        (None, None)
    };
    Ok(NormSummary {
        l1_h,
        l1_v,
        l1_vtilde,
        opnorm_h,
        opnorm_v,
    })
}
