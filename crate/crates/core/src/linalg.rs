//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Relative singular-value cutoff used by every pseudoinverse in the crate.
pub const PINV_RTOL: f64 = 1e-10;

/// Moore–Penrose pseudoinverse together with the numerical rank.
pub fn pseudo_inverse(a: &DMatrix<f64>) -> (DMatrix<f64>, usize) {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return (DMatrix::zeros(cols, rows), 0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = smax * PINV_RTOL;
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vᵀ");
    let mut pinv = DMatrix::zeros(cols, rows);
    let mut rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            rank += 1;
            // pinv += v_k u_kᵀ / s
            let v = vt.row(k).transpose();
            let uk = u.column(k);
            pinv.ger(1.0 / s, &v, &uk, 1.0);
        }
    }
    (pinv, rank)
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending.
pub fn sorted_symmetric_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Largest |λ| of a symmetric matrix.
pub fn symmetric_opnorm(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(a.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `S^{-1/2}` for a symmetric positive-definite `S`.
pub fn inverse_sqrt_spd(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(s.clone());
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Argument(
            "matrix is not positive definite; rows are linearly dependent".into(),
        ));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Nearest co-isometry in Frobenius norm: `(u uᵀ)^{-1/2} u`.
pub fn retract_coisometry(u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let gram = u * u.transpose();
    Ok(inverse_sqrt_spd(&gram)? * u)
}

/// `max |u uᵀ - I|`.
pub fn coisometry_deviation(u: &DMatrix<f64>) -> f64 {
    let gram = u * u.transpose();
    let n = gram.nrows();
    (gram - DMatrix::<f64>::identity(n, n)).amax()
}

/// Gaussian `n × m` matrix with orthonormalized rows.
pub fn random_coisometry<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> DMatrix<f64> {
    assert!(m >= n, "co-isometry needs m >= n");
    loop {
        let g = DMatrix::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal));
        if let Ok(u) = retract_coisometry(&g) {
            return u;
        }
    }
}

/// Gaussian square orthogonal matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    random_coisometry(n, n, rng)
}

pub fn frobenius(a: &DMatrix<f64>) -> f64 {
    a.norm()
}
