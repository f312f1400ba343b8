//! Gradient refinement of `u` on the co-isometry manifold.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{contract_vtilde, product_matrix, ThcFactorization};
use crate::error::{Error, Result};
use crate::hamiltonian::ElectronicHamiltonian;
use crate::linalg;

/// Adam schedule: one `(rounds, learning_rate)` entry per phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineConfig {
    pub phases: Vec<(usize, f64)>,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            phases: vec![(1000, 1e-3), (1000, 5e-4)],
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            restarts: 1,
        }
    }
}

impl RefineConfig {
    pub fn total_rounds(&self) -> usize {
        self.phases.iter().map(|p| p.0).sum()
    }
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub thc: ThcFactorization,
    pub initial_eps_v: f64,
    pub final_eps_v: f64,
    /// Round (0 = the starting point) at which the returned factorization was seen.
    pub best_round: usize,
    /// `eps_v` before every round and after the last.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RestartOutcome {
    pub best: RefineOutcome,
    pub restart_eps_v: Vec<f64>,
}

/// `‖V − P Ṽ Pᵀ‖_F²` for a given `u` and kernel.
pub fn squared_residual(
    u: &DMatrix<f64>,
    vtilde: &DMatrix<f64>,
    ham: &ElectronicHamiltonian,
) -> f64 {
    let p = product_matrix(u);
    (ham.eri_matrix() - &p * vtilde * p.transpose()).norm_squared()
}

fn gradient_at(
    u: &DMatrix<f64>,
    vtilde: &DMatrix<f64>,
    ham: &ElectronicHamiltonian,
) -> (f64, DMatrix<f64>) {
    let (n, m) = u.shape();
    let p = product_matrix(u);
    let r = ham.eri_matrix() - &p * vtilde * p.transpose();
    let q = &r * &p * vtilde;
    let mut grad = DMatrix::zeros(n, m);
    for g in 0..m {
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += (q[(i * n + j, g)] + q[(j * n + i, g)]) * u[(j, g)];
            }
            grad[(i, g)] = -4.0 * acc;
        }
    }
    (r.norm_squared(), grad)
}

/// Gradient of `‖V − P Ṽ Pᵀ‖_F²` with respect to `u`, holding the kernel at
/// its least-squares value for the current `u`.
pub fn loss_gradient(u: &DMatrix<f64>, ham: &ElectronicHamiltonian) -> DMatrix<f64> {
    let (vt, _) = contract_vtilde(u, ham);
    gradient_at(u, &vt, ham).1
}

/// Projects `g` onto the tangent space of the co-isometries at `u`:
/// `g − sym(g uᵀ) u`.
fn tangent_projection(u: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    let a = g * u.transpose();
    let sym = (&a + a.transpose()) * 0.5;
    g - sym * u
}

struct Adam {
    m: DMatrix<f64>,
    v: DMatrix<f64>,
    t: i32,
}

impl Adam {
    fn new(shape: (usize, usize)) -> Self {
        Self {
            m: DMatrix::zeros(shape.0, shape.1),
            v: DMatrix::zeros(shape.0, shape.1),
            t: 0,
        }
    }

    fn step(&mut self, grad: &DMatrix<f64>, lr: f64, cfg: &RefineConfig) -> DMatrix<f64> {
        self.t += 1;
        self.m = &self.m * cfg.beta1 + grad * (1.0 - cfg.beta1);
        self.v = &self.v * cfg.beta2 + grad.component_mul(grad) * (1.0 - cfg.beta2);
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        self.m.zip_map(&self.v, |m, v| {
            -lr * (m / c1) / ((v / c2).sqrt() + cfg.epsilon)
        })
    }
}

/// Adam on `u` with `Ṽ` re-contracted every round and a polar retraction
/// after each update. Returns the best factorization seen.
pub fn refine(
    start: &ThcFactorization,
    ham: &ElectronicHamiltonian,
    cfg: &RefineConfig,
) -> Result<RefineOutcome> {
    let vnorm = ham.eri_matrix().norm();
    if vnorm == 0.0 {
        return Err(Error::ZeroNorm("‖V‖₂ = 0 in refine"));
    }
    let mut u = start.u().clone();
    let mut adam = Adam::new(u.shape());
    let mut history = Vec::with_capacity(cfg.total_rounds() + 1);
    let mut best: Option<(f64, usize, DMatrix<f64>)> = None;
    let schedule = cfg
        .phases
        .iter()
        .flat_map(|&(rounds, lr)| std::iter::repeat_n(lr, rounds))
        .map(Some)
        .chain(std::iter::once(None));
    for (round, lr) in schedule.enumerate() {
        let (vt, _) = contract_vtilde(&u, ham);
        let (loss, grad) = gradient_at(&u, &vt, ham);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite { round, loss });
        }
        let eps = loss.sqrt() / vnorm;
        history.push(eps);
        if best.as_ref().is_none_or(|b| eps < b.0) {
            best = Some((eps, round, u.clone()));
        }
        let Some(lr) = lr else { break };
        let delta = adam.step(&tangent_projection(&u, &grad), lr, cfg);
        u = linalg::retract_coisometry(&(&u + delta)).map_err(|_| Error::NonFinite {
            round,
            loss: f64::NAN,
        })?;
    }
    let (final_eps, best_round, u) = best.expect("at least one evaluation");
    let mut thc = ThcFactorization::from_u(u, ham)?;
    thc.provenance = start.provenance.clone();
    Ok(RefineOutcome {
        thc,
        initial_eps_v: history[0],
        final_eps_v: final_eps,
        best_round,
        history,
    })
}

/// Runs `cfg.restarts` refinements in parallel from random co-isometries
/// seeded by `cfg.seed + r`, keeping the lowest `eps_v`.
pub fn refine_from_random(
    ham: &ElectronicHamiltonian,
    m: usize,
    cfg: &RefineConfig,
) -> Result<RestartOutcome> {
    let n = ham.n_orbitals();
    if m < n {
        return Err(Error::Argument(format!("M = {m} must be at least N = {n}")));
    }
    let restarts = cfg.restarts.max(1);
    let outcomes: Vec<Result<RefineOutcome>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
            let u = linalg::random_coisometry(n, m, &mut rng);
            let start = ThcFactorization::from_u(u, ham)?;
            refine(&start, ham, cfg)
        })
        .collect();
    let mut restart_eps_v = Vec::with_capacity(restarts);
    let mut best: Option<RefineOutcome> = None;
    for outcome in outcomes {
        let outcome = outcome?;
        restart_eps_v.push(outcome.final_eps_v);
        if best
            .as_ref()
            .is_none_or(|b| outcome.final_eps_v < b.final_eps_v)
        {
            best = Some(outcome);
        }
    }
    Ok(RestartOutcome {
        best: best.expect("at least one restart"),
        restart_eps_v,
    })
}
