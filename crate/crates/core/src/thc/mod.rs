//! Isometric tensor hypercontraction.
//!
//! A factorization approximates the ERI tensor as
//! `V_ijkl ≈ Σ_αβ u_iα u_jα Ṽ_αβ u_kβ u_lβ` with a co-isometry `u` (`u uᵀ = 1`).
//! In pair notation `P_(ij),α = u_iα u_jα` this reads `V ≈ P Ṽ Pᵀ`, and for a
//! fixed `u` the least-squares optimal kernel is `Ṽ = P⁺ V P⁺ᵀ`.

mod io;
mod isometrize;
mod refine;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::ElectronicHamiltonian;
use crate::linalg;

pub use io::{FactorFileDocument, ThcDocument};
pub use isometrize::{isometrize, nullspace_repair, IsometrizeConfig, Isometrized, ThcFactorFile};
pub use refine::{
    loss_gradient, refine, refine_from_random, squared_residual, RefineConfig, RefineOutcome,
    RestartOutcome,
};

/// Tolerance of the co-isometry invariant `u uᵀ = 1`.
pub const COISOMETRY_TOL: f64 = 1e-8;

/// Bookkeeping stored with a serialized factorization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub eps_v: f64,
    #[serde(default)]
    pub eps_h: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThcFactorization {
    u: DMatrix<f64>,
    vtilde: DMatrix<f64>,
    htilde: Option<DVector<f64>>,
    pub provenance: Option<Provenance>,
}

impl ThcFactorization {
    /// Checks that `u` is an `N × M` co-isometry and `Ṽ` a symmetric `M × M` matrix.
    pub fn new(
        u: DMatrix<f64>,
        vtilde: DMatrix<f64>,
        htilde: Option<DVector<f64>>,
    ) -> Result<Self> {
        let (n, m) = u.shape();
        if n == 0 || m < n {
            return Err(Error::Dimension(format!("u is {n}x{m}; need 1 <= N <= M")));
        }
        if vtilde.shape() != (m, m) {
            return Err(Error::Dimension(format!(
                "vtilde is {}x{}, expected {m}x{m}",
                vtilde.nrows(),
                vtilde.ncols()
            )));
        }
        if let Some(ht) = &htilde {
            if ht.len() != m {
                return Err(Error::Dimension(format!(
                    "htilde has length {}, expected {m}",
                    ht.len()
                )));
            }
        }
        let deviation = linalg::coisometry_deviation(&u);
        if !(deviation <= COISOMETRY_TOL) {
            return Err(Error::NotCoIsometry { deviation });
        }
        let asym = (&vtilde - vtilde.transpose()).amax();
        if !(asym <= 1e-12 * 1.0f64.max(vtilde.amax())) {
            return Err(Error::Argument(format!(
                "vtilde is not symmetric ({asym:.3e})"
            )));
        }
        Ok(Self {
            u,
            vtilde,
            htilde,
            provenance: None,
        })
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn m(&self) -> usize {
        self.u.ncols()
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn vtilde(&self) -> &DMatrix<f64> {
        &self.vtilde
    }

    pub fn htilde(&self) -> Option<&DVector<f64>> {
        self.htilde.as_ref()
    }

    /// Factorization with `u` and the least-squares kernels for `ham`.
    pub fn from_u(u: DMatrix<f64>, ham: &ElectronicHamiltonian) -> Result<Self> {
        check_dims(&u, ham)?;
        let (vtilde, htilde) = contract_vtilde(&u, ham);
        Self::new(u, vtilde, Some(htilde))
    }
}

fn check_dims(u: &DMatrix<f64>, ham: &ElectronicHamiltonian) -> Result<()> {
    if u.nrows() != ham.n_orbitals() {
        return Err(Error::Dimension(format!(
            "u has {} rows but the Hamiltonian has {} orbitals",
            u.nrows(),
            ham.n_orbitals()
        )));
    }
    Ok(())
}

/// `P_(ij),α = u_iα u_jα`, an `N² × M` matrix.
pub fn product_matrix(u: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = u.shape();
    DMatrix::from_fn(n * n, m, |r, a| u[(r / n, a)] * u[(r % n, a)])
}

fn vec_h(ham: &ElectronicHamiltonian) -> DVector<f64> {
    let n = ham.n_orbitals();
    DVector::from_fn(n * n, |r, _| ham.h()[(r / n, r % n)])
}

/// Least-squares kernels for a fixed `u`: `Ṽ = P⁺ V P⁺ᵀ` (symmetrized) and
/// `h̃ = P⁺ vec(h)`.
pub fn contract_vtilde(
    u: &DMatrix<f64>,
    ham: &ElectronicHamiltonian,
) -> (DMatrix<f64>, DVector<f64>) {
    let p = product_matrix(u);
    let (pinv, _) = linalg::pseudo_inverse(&p);
    let vt = &pinv * ham.eri_matrix() * pinv.transpose();
    let vt = (&vt + vt.transpose()) * 0.5;
    let ht = &pinv * vec_h(ham);
    (vt, ht)
}

/// Relative element-wise L2 errors of the two-body and one-body reconstructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximationErrors {
    pub eps_v: f64,
    /// `None` when `h` vanishes identically.
    pub eps_h: Option<f64>,
}

pub fn approximation_errors(
    thc: &ThcFactorization,
    ham: &ElectronicHamiltonian,
) -> Result<ApproximationErrors> {
    check_dims(thc.u(), ham)?;
    let vnorm = ham.eri_matrix().norm();
    if vnorm == 0.0 {
        return Err(Error::ZeroNorm("‖V‖₂ = 0 in eps_v"));
    }
    let recon = projected_interaction(thc);
    let eps_v = (ham.eri_matrix() - recon).norm() / vnorm;

    let hvec = vec_h(ham);
    let hnorm = hvec.norm();
    let eps_h = if hnorm == 0.0 {
        None
    } else {
        let p = product_matrix(thc.u());
        let ht = match thc.htilde() {
            Some(ht) => ht.clone(),
            None => linalg::pseudo_inverse(&p).0 * &hvec,
        };
        Some((hvec - p * ht).norm() / hnorm)
    };
    Ok(ApproximationErrors { eps_v, eps_h })
}

/// `V'_ijkl = Σ_αβ u_iα u_jα Ṽ_αβ u_kβ u_lβ`, the two-body tensor of
/// `⟨0|Ṽ|0⟩_b`, returned as an `N² × N²` pair matrix.
pub fn projected_interaction(thc: &ThcFactorization) -> DMatrix<f64> {
    let p = product_matrix(thc.u());
    let v = &p * thc.vtilde() * p.transpose();
    (&v + v.transpose()) * 0.5
}

/// Result of [`exact_factorize`].
#[derive(Debug, Clone)]
pub struct ExactFactorization {
    pub thc: ThcFactorization,
    /// Numerical rank of `P`; below `M` the pseudoinverse was needed.
    pub rank: usize,
}

impl ExactFactorization {
    pub fn rank_deficient(&self) -> bool {
        self.rank < self.thc.m()
    }
}

const EXACT_SEED: u64 = 0x15_0C0A;

fn eri_is_diagonal(ham: &ElectronicHamiltonian) -> bool {
    let n = ham.n_orbitals();
    let v = ham.eri_matrix();
    (0..n * n).all(|r| {
        (0..n * n).all(|c| {
            let diag = r / n == r % n && c / n == c % n;
            diag || v[(r, c)] == 0.0
        })
    })
}

/// Exact factorization at `M = N²` from a fixed generic co-isometry.
///
/// For real orbitals `P` has rank at most `N(N+1)/2`, so the pseudoinverse is
/// always in play and the reported rank shows it. An ERI tensor that is already
/// diagonal (`V_ijkl = d_ik δ_ij δ_kl`) is returned as `u = 1` with `M = N`.
pub fn exact_factorize(ham: &ElectronicHamiltonian) -> Result<ExactFactorization> {
    let n = ham.n_orbitals();
    if eri_is_diagonal(ham) {
        let u = DMatrix::identity(n, n);
        let vtilde = DMatrix::from_fn(n, n, |a, b| ham.eri(a, a, b, b));
        let htilde = DVector::from_fn(n, |a, _| ham.h()[(a, a)]);
        let thc = ThcFactorization::new(u, vtilde, Some(htilde))?;
        return Ok(ExactFactorization { thc, rank: n });
    }
    let m = n * n;
    let mut best: Option<(f64, ExactFactorization)> = None;
    for attempt in 0..8u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(EXACT_SEED + attempt);
        let u = linalg::random_coisometry(n, m, &mut rng);
        let (_, rank) = linalg::pseudo_inverse(&product_matrix(&u));
        let thc = ThcFactorization::from_u(u, ham)?;
        let eps = approximation_errors(&thc, ham)
            .map(|e| e.eps_v)
            .unwrap_or(0.0);
        let candidate = ExactFactorization { thc, rank };
        if eps <= 1e-12 {
            return Ok(candidate);
        }
        if best.as_ref().is_none_or(|(b, _)| eps < *b) {
            best = Some((eps, candidate));
        }
    }
    Ok(best.expect("at least one attempt").1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn single_orbital_is_scalar() {
        let ham = ElectronicHamiltonian::new(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::from_element(1, 1, 0.5),
            0.0,
        )
        .unwrap();
        let ex = exact_factorize(&ham).unwrap();
        assert_eq!(ex.thc.m(), 1);
        assert_eq!(ex.thc.u()[(0, 0)], 1.0);
        assert_eq!(ex.thc.vtilde()[(0, 0)], 0.5);
    }

    #[test]
    fn diagonal_eri_uses_identity() {
        let n = 3;
        let d = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.3, 0.2, 0.8, 0.1, 0.3, 0.1, 0.6]);
        let mut eri = DMatrix::zeros(9, 9);
        for i in 0..n {
            for k in 0..n {
                eri[(i * n + i, k * n + k)] = d[(i, k)];
            }
        }
        let ham = ElectronicHamiltonian::new(DMatrix::identity(3, 3), eri, 0.0).unwrap();
        let ex = exact_factorize(&ham).unwrap();
        assert_eq!(ex.thc.m(), 3);
        assert_eq!(ex.thc.u(), &DMatrix::<f64>::identity(3, 3));
        assert_eq!(ex.thc.vtilde(), &d);
    }

    #[test]
    fn exact_at_n_squared() {
        let ham = ElectronicHamiltonian::random(2, &mut rng(8));
        let ex = exact_factorize(&ham).unwrap();
        assert_eq!(ex.thc.m(), 4);
        assert_eq!(ex.rank, 3);
        assert!(ex.rank_deficient());
        let err = approximation_errors(&ex.thc, &ham).unwrap();
        assert!(err.eps_v <= 1e-10, "{}", err.eps_v);
        assert!(linalg::coisometry_deviation(ex.thc.u()) < 1e-12);
    }

    #[test]
    fn contraction_of_zero_eri_is_zero() {
        let h = DMatrix::identity(2, 2);
        let ham = ElectronicHamiltonian::new(h, DMatrix::zeros(4, 4), 0.0).unwrap();
        let u = linalg::random_coisometry(2, 3, &mut rng(1));
        let (vt, _) = contract_vtilde(&u, &ham);
        assert_eq!(vt.amax(), 0.0);
        assert!(matches!(
            approximation_errors(&ThcFactorization::from_u(u, &ham).unwrap(), &ham),
            Err(Error::ZeroNorm(_))
        ));
    }

    #[test]
    fn identity_h_reconstructed_by_htilde() {
        // N=2, M=3: P has full row rank on symmetric matrices
        let mut eri = DMatrix::zeros(4, 4);
        eri[(0, 0)] = 1.0;
        let ham = ElectronicHamiltonian::new(DMatrix::identity(2, 2), eri, 0.0).unwrap();
        let u = linalg::random_coisometry(2, 3, &mut rng(12));
        let thc = ThcFactorization::from_u(u, &ham).unwrap();
        let p = product_matrix(thc.u());
        let recon = p * thc.htilde().unwrap();
        let ident = [1.0, 0.0, 0.0, 1.0];
        for k in 0..4 {
            assert!((recon[k] - ident[k]).abs() < 1e-10);
        }
        assert!(approximation_errors(&thc, &ham).unwrap().eps_h.unwrap() < 1e-10);
    }

    #[test]
    fn contraction_is_a_projection() {
        let ham = ElectronicHamiltonian::random(3, &mut rng(31));
        let u = linalg::random_coisometry(3, 4, &mut rng(32));
        let (vt1, _) = contract_vtilde(&u, &ham);
        let thc = ThcFactorization::new(u.clone(), vt1.clone(), None).unwrap();
        let again = ham.with_eri(projected_interaction(&thc)).unwrap();
        let (vt2, _) = contract_vtilde(&u, &again);
        assert!((vt1 - vt2).amax() < 1e-10);
    }

    #[test]
    fn projected_interaction_of_zero_kernel() {
        let u = linalg::random_coisometry(2, 3, &mut rng(2));
        let thc = ThcFactorization::new(u, DMatrix::zeros(3, 3), None).unwrap();
        assert_eq!(projected_interaction(&thc).amax(), 0.0);
    }

    #[test]
    fn rejects_non_coisometry() {
        let u = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        assert!(matches!(
            ThcFactorization::new(u, DMatrix::zeros(2, 2), None),
            Err(Error::NotCoIsometry { .. })
        ));
    }

    #[test]
    fn eps_v_invariant_under_signed_permutation() {
        let ham = ElectronicHamiltonian::random(3, &mut rng(40));
        let u = linalg::random_coisometry(3, 5, &mut rng(41));
        let thc = ThcFactorization::from_u(u.clone(), &ham).unwrap();
        let base = approximation_errors(&thc, &ham).unwrap().eps_v;
        let perm = [3usize, 0, 4, 2, 1];
        let signs = [1.0, -1.0, -1.0, 1.0, -1.0];
        let mut q = DMatrix::zeros(5, 5);
        for (col, (&p, &s)) in perm.iter().zip(&signs).enumerate() {
            q[(p, col)] = s;
        }
        let u2 = &u * &q;
        // column signs square away in P, only the permutation reaches Ṽ
        let perm_only = q.abs();
        let vt2 = perm_only.transpose() * thc.vtilde() * &perm_only;
        let thc2 = ThcFactorization::new(u2, vt2, None).unwrap();
        let moved = approximation_errors(&thc2, &ham).unwrap().eps_v;
        assert!((base - moved).abs() < 1e-12);
    }
}
