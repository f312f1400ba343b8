//! Dense Jordan–Wigner matrices built from Kronecker products, sharing no
//! code with the library's bit-string operators.

#![allow(dead_code)]

use isothc::ElectronicHamiltonian;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// `a_p` on `m` modes, mode 0 the least significant bit:
/// `1 ⊗ … ⊗ σ⁻ ⊗ Z ⊗ … ⊗ Z` with `p` factors of `Z` on the right.
pub fn annihilators(m: usize) -> Vec<DMatrix<f64>> {
    let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let lower = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let id = DMatrix::<f64>::identity(2, 2);
    (0..m)
        .map(|p| {
            let mut op = DMatrix::<f64>::identity(1, 1);
            for q in (0..m).rev() {
                let f = if q > p {
                    &id
                } else if q == p {
                    &lower
                } else {
                    &z
                };
                op = kron(&op, f);
            }
            op
        })
        .collect()
}

/// `core + Σ h_ij a†_iσ a_jσ + ½ Σ V_ijkl a†_iσ a†_kγ a_lγ a_jσ`, spin-up
/// modes first.
pub fn hamiltonian_matrix(ham: &ElectronicHamiltonian, spinful: bool) -> DMatrix<f64> {
    let n = ham.n_orbitals();
    let spins = if spinful { 2 } else { 1 };
    let m = n * spins;
    let a = annihilators(m);
    let ad: Vec<DMatrix<f64>> = a.iter().map(|x| x.transpose()).collect();
    let dim = 1 << m;
    let mut out = DMatrix::<f64>::identity(dim, dim) * ham.core_energy();
    for s in 0..spins {
        for i in 0..n {
            for j in 0..n {
                out += &ad[i + s * n] * &a[j + s * n] * ham.h()[(i, j)];
            }
        }
    }
    for s in 0..spins {
        for g in 0..spins {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let v = ham.eri(i, j, k, l);
                            if v != 0.0 {
                                out += &ad[i + s * n]
                                    * &ad[k + g * n]
                                    * &a[l + g * n]
                                    * &a[j + s * n]
                                    * (0.5 * v);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// `exp(−i t A)` by scaling and squaring a truncated Taylor series.
pub fn expm_symmetric(a: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    let dim = a.nrows();
    let scale = (t.abs() * a.norm()).max(1e-300);
    let squarings = (scale / 0.25).log2().ceil().max(0.0) as i32;
    let x = to_complex(a) * Complex64::new(0.0, -t / 2f64.powi(squarings));
    let id = DMatrix::<Complex64>::identity(dim, dim);
    let mut out = id.clone();
    let mut term = id;
    for k in 1..=24 {
        term = &term * &x / Complex64::new(k as f64, 0.0);
        out += &term;
    }
    for _ in 0..squarings {
        out = &out * &out;
    }
    out
}

pub fn opnorm(a: &DMatrix<Complex64>) -> f64 {
    a.singular_values().max()
}

pub fn to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|x| Complex64::new(x, 0.0))
}
