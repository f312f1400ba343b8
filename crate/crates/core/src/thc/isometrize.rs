//! Conversion of a conventional THC factor `X` into a co-isometry.
//!
//! Rescaling every column by `√η_α` leaves the reconstruction unchanged once
//! the kernel absorbs `1/(η_α η_β)`. The scales are chosen so that
//! `Σ_α η_α X_iα X_jα ≈ δ_ij` with `η_α ≥ δ`, after which a polar step removes
//! the residual non-orthogonality.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{product_matrix, ThcFactorization};
use crate::error::{Error, Result};
use crate::hamiltonian::ElectronicHamiltonian;
use crate::linalg;

/// Conventional THC factors: `X` is `N × M`, `W` (optional) is the `M × M` kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ThcFactorFile {
    pub x: DMatrix<f64>,
    pub w: Option<DMatrix<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IsometrizeConfig {
    /// Lower bound on every scale factor.
    pub delta: f64,
    pub max_iter: usize,
    /// Stop when no scale moves by more than this (relative).
    pub tol: f64,
    /// Residual `‖Aη − vec(1)‖₂` above which a warning is attached.
    pub warn_threshold: f64,
}

impl Default for IsometrizeConfig {
    fn default() -> Self {
        Self {
            delta: 0.2,
            max_iter: 200_000,
            tol: 1e-14,
            warn_threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Isometrized {
    pub u: DMatrix<f64>,
    pub eta: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub warning: Option<String>,
    /// `W_αβ / (η_α η_β)` when the file carried a kernel.
    pub vtilde_from_w: Option<DMatrix<f64>>,
}

impl Isometrized {
    /// Factorization with the kernel recontracted against `ham`.
    pub fn with_hamiltonian(&self, ham: &ElectronicHamiltonian) -> Result<ThcFactorization> {
        ThcFactorization::from_u(self.u.clone(), ham)
    }

    /// Factorization with the rescaled file kernel.
    pub fn with_file_kernel(&self) -> Result<ThcFactorization> {
        let vt = self
            .vtilde_from_w
            .clone()
            .ok_or_else(|| Error::Argument("factor file has no W kernel".into()))?;
        let vt = (&vt + vt.transpose()) * 0.5;
        ThcFactorization::new(self.u.clone(), vt, None)
    }
}

fn identity_vec(n: usize) -> DVector<f64> {
    DVector::from_fn(n * n, |r, _| if r / n == r % n { 1.0 } else { 0.0 })
}

/// Solves `min ‖Aη − vec(1)‖²` subject to `η ≥ δ` by accelerated projected
/// gradient with step `1/L` and function-value restarts.
pub fn isometrize(file: &ThcFactorFile, cfg: &IsometrizeConfig) -> Result<Isometrized> {
    let x = &file.x;
    let (n, m) = x.shape();
    if n == 0 || m < n {
        return Err(Error::Dimension(format!("X is {n}x{m}; need 1 <= N <= M")));
    }
    if let Some(w) = &file.w {
        if w.shape() != (m, m) {
            return Err(Error::Dimension(format!(
                "W is {}x{}, expected {m}x{m}",
                w.nrows(),
                w.ncols()
            )));
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("X has non-finite entries".into()));
    }
    if !(cfg.delta > 0.0) {
        return Err(Error::Argument(format!(
            "delta = {} must be positive",
            cfg.delta
        )));
    }
    let a = product_matrix(x);
    let b = identity_vec(n);
    let gram = a.transpose() * &a;
    let atb = a.transpose() * &b;
    let lipschitz = 2.0 * linalg::symmetric_opnorm(&gram);
    if !(lipschitz > 0.0) {
        return Err(Error::ZeroNorm("X has no non-zero column"));
    }
    let objective = |eta: &DVector<f64>| (&a * eta - &b).norm_squared();
    let project = |v: DVector<f64>| v.map(|e| e.max(cfg.delta));

    let (pinv, _) = linalg::pseudo_inverse(&a);
    let mut eta = project(pinv * &b);
    let mut y = eta.clone();
    let mut t = 1.0f64;
    let mut f_eta = objective(&eta);
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let grad = (&gram * &y - &atb) * 2.0;
        let next = project(&y - grad / lipschitz);
        let f_next = objective(&next);
        let step = (&next - &eta).amax();
        if f_next > f_eta {
            // restart momentum from the last iterate
            y = eta.clone();
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &next + (&next - &eta) * ((t - 1.0) / t_next);
        t = t_next;
        eta = next;
        f_eta = f_next;
        if step <= cfg.tol * 1.0f64.max(eta.amax()) {
            break;
        }
    }
    let residual = f_eta.sqrt();
    let warning = (residual > cfg.warn_threshold).then(|| {
        format!(
            "isometrization residual {residual:.3e} exceeds {:.1e}; the polar step will change the factorization",
            cfg.warn_threshold
        )
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }

    let scale = eta.map(f64::sqrt);
    let scaled = DMatrix::from_fn(n, m, |i, al| x[(i, al)] * scale[al]);
    let u = linalg::retract_coisometry(&scaled)?;
    let vtilde_from_w = file
        .w
        .as_ref()
        .map(|w| DMatrix::from_fn(m, m, |al, be| w[(al, be)] / (eta[al] * eta[be])));
    Ok(Isometrized {
        u,
        eta,
        residual,
        iterations,
        warning,
        vtilde_from_w,
    })
}

/// Moves `η` along the near-null space of `A` (right singular vectors with
/// singular value below `threshold`) until every entry is positive.
///
/// The largest attainable minimum entry is found first; the returned vector
/// is the L1-smallest shift reaching half of it (capped at `1`). Fails with
/// [`Error::Infeasible`] when no shift makes every entry positive.
pub fn nullspace_repair(
    x: &DMatrix<f64>,
    eta: &DVector<f64>,
    threshold: f64,
) -> Result<DVector<f64>> {
    let m = x.ncols();
    if eta.len() != m {
        return Err(Error::Dimension(format!(
            "eta has length {}, expected {m}",
            eta.len()
        )));
    }
    if eta.iter().all(|&e| e > 0.0) {
        return Ok(eta.clone());
    }
    let a = product_matrix(x);
    let (values, vectors) = linalg::sorted_symmetric_eigen(&(a.transpose() * &a));
    let null: Vec<usize> = (0..m)
        .filter(|&k| values[k].max(0.0).sqrt() < threshold)
        .collect();
    let current_min = eta.min();
    if null.is_empty() {
        return Err(Error::Infeasible {
            best_min: current_min,
        });
    }
    let z = DMatrix::from_fn(m, null.len(), |r, c| vectors[(r, null[c])]);

    // stage 1: maximize t subject to η + Z c ≥ t, t ≤ 1
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let cvars: Vec<_> = (0..null.len())
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let tvar = lp.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    for al in 0..m {
        let mut row: Vec<_> = cvars
            .iter()
            .enumerate()
            .map(|(k, &v)| (v, z[(al, k)]))
            .collect();
        row.push((tvar, -1.0));
        lp.add_constraint(&row[..], ComparisonOp::Ge, -eta[al]);
    }
    let best_t = match lp.solve() {
        Ok(sol) => sol[tvar],
        Err(_) => {
            return Err(Error::Infeasible {
                best_min: current_min,
            })
        }
    };
    if !(best_t > 1e-12) {
        return Err(Error::Infeasible { best_min: best_t });
    }

    // stage 2: smallest L1 shift reaching half the best margin
    let target = 0.5 * best_t;
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let pos: Vec<_> = (0..null.len())
        .map(|_| lp.add_var(1.0, (0.0, f64::INFINITY)))
        .collect();
    let neg: Vec<_> = (0..null.len())
        .map(|_| lp.add_var(1.0, (0.0, f64::INFINITY)))
        .collect();
    for al in 0..m {
        let mut row = Vec::with_capacity(2 * null.len());
        for k in 0..null.len() {
            row.push((pos[k], z[(al, k)]));
            row.push((neg[k], -z[(al, k)]));
        }
        lp.add_constraint(&row[..], ComparisonOp::Ge, target - eta[al]);
    }
    let sol = lp
        .solve()
        .map_err(|_| Error::Infeasible { best_min: best_t })?;
    let c = DVector::from_fn(null.len(), |k, _| sol[pos[k]] - sol[neg[k]]);
    let repaired = eta + &z * c;
    if repaired.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Infeasible {
            best_min: repaired.min(),
        });
    }
    Ok(repaired)
}
