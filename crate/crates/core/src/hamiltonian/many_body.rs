//! Dense Fock-space matrices of electronic Hamiltonians.
//!
//! Spinless: one mode per orbital. Spinful: `2N` modes with every spin-up
//! orbital first (`i`) and every spin-down orbital after it (`N + i`).

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use super::ElectronicHamiltonian;
use crate::error::{Error, Result};
use crate::fermion::{annihilate, create, occupied_modes, sector_states};
use crate::linalg;

/// Largest mode count for which a dense `2^m × 2^m` operator is built.
pub const DEFAULT_MODE_CAP: usize = 12;

/// Real symmetric Fock-space operator in the occupation basis (mode 0 is the
/// least significant bit). The eigendecomposition is computed lazily once.
#[derive(Debug)]
pub struct ManyBodyOperator {
    n_modes: usize,
    spinful: bool,
    matrix: DMatrix<f64>,
    spectrum: OnceLock<(DVector<f64>, DMatrix<f64>)>,
}

impl Clone for ManyBodyOperator {
    fn clone(&self) -> Self {
        Self::from_matrix(self.n_modes, self.spinful, self.matrix.clone())
    }
}

impl ManyBodyOperator {
    pub fn from_matrix(n_modes: usize, spinful: bool, matrix: DMatrix<f64>) -> Self {
        assert_eq!(matrix.nrows(), 1 << n_modes);
        Self {
            n_modes,
            spinful,
            matrix,
            spectrum: OnceLock::new(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn spinful(&self) -> bool {
        self.spinful
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Ascending eigenvalues and matching eigenvector columns.
    pub fn spectrum(&self) -> &(DVector<f64>, DMatrix<f64>) {
        self.spectrum
            .get_or_init(|| linalg::sorted_symmetric_eigen(&self.matrix))
    }

    /// Largest-magnitude eigenvalue.
    pub fn opnorm(&self) -> f64 {
        self.spectrum().0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn number_operator(n_modes: usize) -> DMatrix<f64> {
        let dim = 1usize << n_modes;
        DMatrix::from_fn(
            dim,
            dim,
            |r, c| if r == c { r.count_ones() as f64 } else { 0.0 },
        )
    }
}

/// Images `H|bits>` as `(target, amplitude)` pairs (unmerged).
fn apply_hamiltonian(
    ham: &ElectronicHamiltonian,
    spinful: bool,
    bits: usize,
    out: &mut Vec<(usize, f64)>,
) {
    let n = ham.n_orbitals();
    let spins: &[usize] = if spinful { &[0, 1] } else { &[0] };
    let mode = |orb: usize, spin: usize| orb + spin * n;

    out.push((bits, ham.core_energy()));
    let h = ham.h();
    for &s in spins {
        for j in 0..n {
            let Some((b1, s1)) = annihilate(bits, mode(j, s)) else {
                continue;
            };
            for i in 0..n {
                let coeff = h[(i, j)];
                if coeff == 0.0 {
                    continue;
                }
                if let Some((b2, s2)) = create(b1, mode(i, s)) {
                    out.push((b2, coeff * s1 * s2));
                }
            }
        }
    }

    // ½ Σ V_ijkl a†_iσ a†_kγ a_lγ a_jσ, applied right to left
    for &sj in spins {
        for j in occupied_modes(bits).filter(|&p| p / n == sj).map(|p| p % n) {
            let (b1, s1) = annihilate(bits, mode(j, sj)).expect("occupied");
            for &sl in spins {
                for l in occupied_modes(b1).filter(|&p| p / n == sl).map(|p| p % n) {
                    let (b2, s2) = annihilate(b1, mode(l, sl)).expect("occupied");
                    for k in 0..n {
                        let Some((b3, s3)) = create(b2, mode(k, sl)) else {
                            continue;
                        };
                        for i in 0..n {
                            let v = ham.eri(i, j, k, l);
                            if v == 0.0 {
                                continue;
                            }
                            if let Some((b4, s4)) = create(b3, mode(i, sj)) {
                                out.push((b4, 0.5 * v * s1 * s2 * s3 * s4));
                            }
                        }
                    }
                }
            }
        }
    }
}

fn mode_count(ham: &ElectronicHamiltonian, spinful: bool) -> usize {
    if spinful {
        2 * ham.n_orbitals()
    } else {
        ham.n_orbitals()
    }
}

pub fn build_many_body_operator(
    ham: &ElectronicHamiltonian,
    spinful: bool,
) -> Result<ManyBodyOperator> {
    build_many_body_operator_capped(ham, spinful, DEFAULT_MODE_CAP)
}

/// Full Fock-space matrix of `ham` including `core_energy · 1`.
pub fn build_many_body_operator_capped(
    ham: &ElectronicHamiltonian,
    spinful: bool,
    cap: usize,
) -> Result<ManyBodyOperator> {
    let m = mode_count(ham, spinful);
    if m > cap {
        return Err(Error::Size {
            what: "many-body operator",
            modes: m,
            cap,
        });
    }
    let dim = 1usize << m;
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut buf = Vec::new();
    for bits in 0..dim {
        buf.clear();
        apply_hamiltonian(ham, spinful, bits, &mut buf);
        for &(target, amp) in &buf {
            matrix[(target, bits)] += amp;
        }
    }
    Ok(ManyBodyOperator::from_matrix(m, spinful, matrix))
}

pub fn ground_state_energy(
    ham: &ElectronicHamiltonian,
    n_electrons: usize,
    spinful: bool,
) -> Result<f64> {
    ground_state_energy_capped(ham, n_electrons, spinful, DEFAULT_MODE_CAP)
}

/// Lowest eigenvalue in the fixed-particle-number sector.
pub fn ground_state_energy_capped(
    ham: &ElectronicHamiltonian,
    n_electrons: usize,
    spinful: bool,
    cap: usize,
) -> Result<f64> {
    let m = mode_count(ham, spinful);
    if m > cap {
        return Err(Error::Size {
            what: "ground-state sector",
            modes: m,
            cap,
        });
    }
    if n_electrons > m {
        return Err(Error::Argument(format!(
            "{n_electrons} electrons do not fit in {m} modes"
        )));
    }
    let states = sector_states(m, n_electrons);
    let index: HashMap<usize, usize> = states.iter().enumerate().map(|(k, &b)| (b, k)).collect();
    let dim = states.len();
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut buf = Vec::new();
    for (col, &bits) in states.iter().enumerate() {
        buf.clear();
        apply_hamiltonian(ham, spinful, bits, &mut buf);
        for &(target, amp) in &buf {
            matrix[(index[&target], col)] += amp;
        }
    }
    let (values, _) = linalg::sorted_symmetric_eigen(&matrix);
    Ok(values[0])
}
