//! Analytic per-step error bounds.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_many_body_operator, ElectronicHamiltonian, ManyBodyOperator, DEFAULT_MODE_CAP,
};
use crate::linalg;
use crate::thc::{approximation_errors, projected_interaction, ThcFactorization};

/// The three error sources of one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// THC error per unit time.
    pub eps_thc_rate: f64,
    pub eps_tr: f64,
    pub eps_pr: f64,
}

impl ErrorBudget {
    pub fn total(&self, tau: f64) -> f64 {
        self.eps_thc_rate * tau + self.eps_tr + self.eps_pr
    }
}

fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// `τ³/12 ‖[V',[V',h]]‖ + τ³/24 ‖[h,[h,V']]‖` with exact operator norms.
pub fn trotter_bound(
    h_op: &ManyBodyOperator,
    vprime_op: &ManyBodyOperator,
    tau: f64,
) -> Result<f64> {
    if h_op.n_modes() != vprime_op.n_modes() {
        return Err(Error::Dimension(
            "operators act on different mode counts".into(),
        ));
    }
    let (h, v) = (h_op.matrix(), vprime_op.matrix());
    let vvh = commutator(v, &commutator(v, h));
    let hhv = commutator(h, &commutator(h, v));
    // nested commutators of real symmetric matrices are symmetric
    let t3 = tau.powi(3);
    Ok(t3 / 12.0 * linalg::symmetric_opnorm(&vvh) + t3 / 24.0 * linalg::symmetric_opnorm(&hhv))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThcBoundBranch {
    /// Exact many-body operator norm `‖V − V'‖`.
    Exact,
    /// `c N² ‖V‖₂ eps_v`, with `c = 2` for spinful operators.
    ElementL2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThcBound {
    pub value: f64,
    pub branch: ThcBoundBranch,
}

/// `min(‖V − V'‖, c N² ‖V‖₂ eps_v) · t`. The exact branch is used only
/// when the many-body operator fits the mode cap.
pub fn thc_bound(
    ham: &ElectronicHamiltonian,
    thc: &ThcFactorization,
    t: f64,
    spinful: bool,
) -> Result<ThcBound> {
    let n = ham.n_orbitals();
    let vnorm = ham.eri_matrix().norm();
    let eps_v = if vnorm == 0.0 {
        0.0
    } else {
        approximation_errors(thc, ham)?.eps_v
    };
    let spin_factor = if spinful { 2.0 } else { 1.0 };
    let l2 = spin_factor * (n * n) as f64 * vnorm * eps_v;
    let modes = if spinful { 2 * n } else { n };
    if modes <= DEFAULT_MODE_CAP {
        let diff = ham.eri_matrix() - projected_interaction(thc);
        let diff_ham = ElectronicHamiltonian::new_symmetrized(DMatrix::zeros(n, n), diff, 0.0)?;
        let exact = build_many_body_operator(&diff_ham, spinful)?.opnorm();
        if exact <= l2 {
            return Ok(ThcBound {
                value: exact * t,
                branch: ThcBoundBranch::Exact,
            });
        }
    }
    Ok(ThcBound {
        value: l2 * t,
        branch: ThcBoundBranch::ElementL2,
    })
}

/// Moduli of the four phase sums that must vanish for the improved step to
/// cancel the first- and second-order leakage terms.
pub fn phase_cancellation_sums(phases: [f64; 3]) -> [f64; 4] {
    let [p1, p2, p3] = phases;
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let first =
        |k: f64| Complex64::new(1.0, 0.0) + e(k * p1) + e(k * (p1 + p2)) + e(k * (p1 + p2 + p3));
    let second = |k: f64| {
        Complex64::new(2.0, 0.0)
            + e(k * p1)
            + e(k * p2)
            + e(k * p3)
            + e(k * (p1 + p2))
            + e(k * (p2 + p3))
            + e(k * (p1 + p2 + p3))
    };
    [
        first(1.0).norm(),
        first(2.0).norm(),
        second(1.0).norm(),
        second(2.0).norm(),
    ]
}
