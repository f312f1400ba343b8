//! Basis rotations as networks of adjacent-mode Givens rotations.
//!
//! A rotation `(p, q = p + 1, θ, φ)` is the Fock-space unitary `G` with
//!
//! ```text
//! G f†_p G† =  cos θ f†_p + e^{iφ} sin θ f†_q
//! G f†_q G† = −e^{−iφ} sin θ f†_p + cos θ f†_q
//! ```
//!
//! On the span of `|1_p 0_q⟩, |0_p 1_q⟩` it acts as
//!
//! ```text
//! [ cos θ          −e^{−iφ} sin θ ]
//! [ e^{iφ} sin θ    cos θ         ]
//! ```
//!
//! and leaves `|0_p 0_q⟩` and `|1_p 1_q⟩` alone, so `θ = π/2` takes
//! `|1_p 0_q⟩` to `+|0_p 1_q⟩`. Modes `p` and `q` are adjacent, so no
//! Jordan–Wigner string is involved.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FockOps;
use crate::error::{Error, Result};
use crate::linalg;
use crate::thc::COISOMETRY_TOL;

const SKIP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GivensRotation {
    pub p: usize,
    pub q: usize,
    pub theta: f64,
    pub phi: f64,
}

impl GivensRotation {
    fn matrix(&self, sign: f64) -> [[Complex64; 2]; 2] {
        let (s, c) = (sign * self.theta).sin_cos();
        let c = Complex64::new(c, 0.0);
        let e = Complex64::from_polar(1.0, self.phi);
        [[c, -e.conj() * s], [e * s, c]]
    }
}

/// Rotation network realizing the single-particle unitary
/// `R = G_1 ⋯ G_K · diag(e^{iφ_k})`, so that `𝒰 f†_p 𝒰† = Σ_q R_qp f†_q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GivensSequence {
    pub n_modes: usize,
    pub rotations: Vec<GivensRotation>,
    pub residual_phases: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinSector {
    Both,
    Up,
    Down,
}

impl GivensSequence {
    pub fn validate(&self) -> Result<()> {
        if self.residual_phases.len() != self.n_modes {
            return Err(Error::Dimension(format!(
                "{} residual phases for {} modes",
                self.residual_phases.len(),
                self.n_modes
            )));
        }
        for g in &self.rotations {
            if g.q != g.p + 1 || g.q >= self.n_modes {
                return Err(Error::Argument(format!(
                    "rotation on modes ({}, {}) is not an adjacent pair below {}",
                    g.p, g.q, self.n_modes
                )));
            }
        }
        Ok(())
    }

    /// The realized single-particle matrix `R`.
    pub fn single_particle_matrix(&self) -> DMatrix<Complex64> {
        let m = self.n_modes;
        let mut r = DMatrix::<Complex64>::identity(m, m);
        for g in &self.rotations {
            let mut gm = DMatrix::<Complex64>::identity(m, m);
            let (s, c) = g.theta.sin_cos();
            let e = Complex64::from_polar(1.0, g.phi);
            gm[(g.p, g.p)] = Complex64::new(c, 0.0);
            gm[(g.q, g.q)] = Complex64::new(c, 0.0);
            gm[(g.q, g.p)] = e * s;
            gm[(g.p, g.q)] = -e.conj() * s;
            r *= gm;
        }
        for (k, &ph) in self.residual_phases.iter().enumerate() {
            let f = Complex64::from_polar(1.0, ph);
            for x in r.column_mut(k).iter_mut() {
                *x *= f;
            }
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let seq: Self = serde_json::from_str(text)?;
        seq.validate()?;
        Ok(seq)
    }
}

/// Extends a co-isometry `u` (`N × M`) to an orthogonal `M × M` matrix whose
/// first `N` rows are `u`. Each new row is the canonical basis vector with
/// the largest component outside the current span (lowest index on ties),
/// orthogonalized twice and normalized.
pub fn complete_isometry(u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, m) = u.shape();
    if m < n {
        return Err(Error::Dimension(format!("u is {n}x{m}; need N <= M")));
    }
    let deviation = linalg::coisometry_deviation(u);
    if !(deviation <= COISOMETRY_TOL) {
        return Err(Error::NotCoIsometry { deviation });
    }
    let mut rows: Vec<Vec<f64>> = (0..n).map(|i| u.row(i).iter().copied().collect()).collect();
    let project_out = |v: &mut Vec<f64>, rows: &[Vec<f64>]| {
        for _ in 0..2 {
            for r in rows {
                let dot: f64 = r.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(r) {
                    *x -= dot * y;
                }
            }
        }
    };
    while rows.len() < m {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for k in 0..m {
            let mut v = vec![0.0; m];
            v[k] = 1.0;
            project_out(&mut v, &rows);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|b| norm > b.0 + 1e-12) {
                best = Some((norm, v));
            }
        }
        let (norm, mut v) = best.expect("m > 0");
        for x in v.iter_mut() {
            *x /= norm;
        }
        project_out(&mut v, &rows);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        rows.push(v.into_iter().map(|x| x / norm).collect());
    }
    Ok(DMatrix::from_fn(m, m, |r, c| rows[r][c]))
}

/// Zeroes the first `n_relevant` rows of `w` from the right with column
/// rotations on adjacent pairs. With `R = wᵀ` restricted to those rows
/// (any completion of the rest), the returned network satisfies
/// `R[:, i] = w[i, :]ᵀ` for `i < n_relevant`, using at most
/// `C(M,2) − C(M−N,2)` rotations.
pub fn givens_decompose(w: &DMatrix<f64>, n_relevant: usize) -> GivensSequence {
    let m = w.ncols();
    let n = n_relevant.min(w.nrows());
    let mut a = w.rows(0, n).into_owned();
    let mut rotations = Vec::new();
    for i in 0..n {
        for j in (i + 1..m).rev() {
            let (x, y) = (a[(i, j - 1)], a[(i, j)]);
            if y.abs() <= SKIP_TOL {
                continue;
            }
            let r = x.hypot(y);
            let (c, s) = (x / r, y / r);
            for row in 0..n {
                let (p, q) = (a[(row, j - 1)], a[(row, j)]);
                a[(row, j - 1)] = c * p + s * q;
                a[(row, j)] = -s * p + c * q;
            }
            rotations.push(GivensRotation {
                p: j - 1,
                q: j,
                theta: y.atan2(x),
                phi: 0.0,
            });
        }
    }
    let residual_phases = (0..m)
        .map(|k| {
            if k < n && a[(k, k)] < 0.0 {
                std::f64::consts::PI
            } else {
                0.0
            }
        })
        .collect();
    GivensSequence {
        n_modes: m,
        rotations,
        residual_phases,
    }
}

/// Applies `𝒰` (forward) or `𝒰†` (inverse) of `seq` in the chosen spin
/// sectors. Local mode `k` of the sequence is mode `k` of each sector.
pub fn apply_basis_rotation<S: FockOps>(
    state: &mut S,
    seq: &GivensSequence,
    direction: Direction,
    sector: SpinSector,
) -> Result<()> {
    seq.validate()?;
    let layout = state.layout();
    if seq.n_modes > layout.sector_size() {
        return Err(Error::Dimension(format!(
            "sequence on {} modes exceeds the sector size {}",
            seq.n_modes,
            layout.sector_size()
        )));
    }
    let sectors: Vec<usize> = match (sector, layout.spinful) {
        (SpinSector::Both, true) => vec![0, 1],
        (SpinSector::Both, false) | (SpinSector::Up, _) => vec![0],
        (SpinSector::Down, true) => vec![1],
        (SpinSector::Down, false) => {
            return Err(Error::Argument("spinless layout has no down sector".into()))
        }
    };
    for s in sectors {
        let phase = |sign: f64| {
            let modes: Vec<(usize, f64)> = seq
                .residual_phases
                .iter()
                .enumerate()
                .filter(|(_, &ph)| ph != 0.0)
                .map(|(k, &ph)| (layout.mode(k, s), sign * ph))
                .collect();
            move |bits: usize| {
                let total: f64 = modes
                    .iter()
                    .filter(|(p, _)| bits >> p & 1 == 1)
                    .map(|(_, ph)| ph)
                    .sum();
                Complex64::from_polar(1.0, total)
            }
        };
        match direction {
            Direction::Forward => {
                state.apply_diagonal(&phase(1.0));
                for g in seq.rotations.iter().rev() {
                    state.apply_pair(layout.mode(g.p, s), layout.mode(g.q, s), g.matrix(1.0));
                }
            }
            Direction::Inverse => {
                for g in &seq.rotations {
                    state.apply_pair(layout.mode(g.p, s), layout.mode(g.q, s), g.matrix(-1.0));
                }
                state.apply_diagonal(&phase(-1.0));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focksim::{FockState, ModeLayout};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn binom2(k: usize) -> usize {
        k * k.saturating_sub(1) / 2
    }

    #[test]
    fn swap_limit() {
        let seq = GivensSequence {
            n_modes: 2,
            rotations: vec![GivensRotation {
                p: 0,
                q: 1,
                theta: std::f64::consts::FRAC_PI_2,
                phi: 0.0,
            }],
            residual_phases: vec![0.0, 0.0],
        };
        let mut psi = FockState::basis(ModeLayout::system(2, false), 0b01).unwrap();
        apply_basis_rotation(&mut psi, &seq, Direction::Forward, SpinSector::Both).unwrap();
        assert!((psi.amplitudes()[0b10] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn completion_of_canonical_block() {
        let u = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(
            complete_isometry(&u).unwrap(),
            DMatrix::<f64>::identity(4, 4)
        );
    }

    #[test]
    fn completion_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = linalg::random_coisometry(2, 3, &mut rng);
        let w = complete_isometry(&u).unwrap();
        assert!((&w * w.transpose() - DMatrix::<f64>::identity(3, 3)).camax() < 1e-10);
        assert_eq!(w.rows(0, 2), u.rows(0, 2));
        let sq = linalg::random_orthogonal(3, &mut rng);
        assert_eq!(complete_isometry(&sq).unwrap(), sq);
        let bad = DMatrix::from_row_slice(1, 2, &[1.0, 0.5]);
        assert!(complete_isometry(&bad).is_err());
    }

    #[test]
    fn rotation_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (n, m) in [(2usize, 3usize), (2, 4), (3, 5), (1, 4), (4, 4)] {
            let u = linalg::random_coisometry(n, m, &mut rng);
            let w = complete_isometry(&u).unwrap();
            let seq = givens_decompose(&w, n);
            assert!(seq.rotations.len() <= binom2(m) - binom2(m - n));
            let r = seq.single_particle_matrix();
            for i in 0..n {
                for k in 0..m {
                    assert!((r[(k, i)] - Complex64::new(u[(i, k)], 0.0)).norm() < 1e-10);
                }
            }
        }
        assert!(givens_decompose(&DMatrix::identity(3, 3), 3)
            .rotations
            .is_empty());
    }

    #[test]
    fn forward_then_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = linalg::random_coisometry(2, 3, &mut rng);
        let seq = givens_decompose(&complete_isometry(&u).unwrap(), 2);
        let layout = ModeLayout::new(2, 1, true);
        let v = DVector::from_fn(layout.dim(), |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let n = v.norm();
        let psi = FockState::from_amplitudes(layout, v / Complex64::new(n, 0.0)).unwrap();
        let mut out = psi.clone();
        apply_basis_rotation(&mut out, &seq, Direction::Forward, SpinSector::Both).unwrap();
        apply_basis_rotation(&mut out, &seq, Direction::Inverse, SpinSector::Both).unwrap();
        assert!((out.amplitudes() - psi.amplitudes()).camax() < 1e-10);
    }

    #[test]
    fn single_particle_amplitudes_follow_r() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = linalg::random_coisometry(3, 4, &mut rng);
        let mut seq = givens_decompose(&complete_isometry(&u).unwrap(), 3);
        for g in seq.rotations.iter_mut() {
            g.phi = rng.gen_range(-3.0..3.0);
        }
        seq.residual_phases[3] = 0.4;
        let r = seq.single_particle_matrix();
        let layout = ModeLayout::system(4, false);
        let x = DVector::from_fn(4, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let x = &x / Complex64::new(x.norm(), 0.0);
        let mut amps = DVector::zeros(16);
        for p in 0..4 {
            amps[1 << p] = x[p];
        }
        let mut psi = FockState::from_amplitudes(layout, amps).unwrap();
        apply_basis_rotation(&mut psi, &seq, Direction::Forward, SpinSector::Both).unwrap();
        let want = &r * &x;
        for q in 0..4 {
            assert!((psi.amplitudes()[1 << q] - want[q]).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_adjacent() {
        let seq = GivensSequence {
            n_modes: 3,
            rotations: vec![GivensRotation {
                p: 0,
                q: 2,
                theta: 0.1,
                phi: 0.0,
            }],
            residual_phases: vec![0.0; 3],
        };
        let mut psi = FockState::basis(ModeLayout::system(3, false), 1).unwrap();
        assert!(
            apply_basis_rotation(&mut psi, &seq, Direction::Forward, SpinSector::Both).is_err()
        );
        assert!(GivensSequence::from_json(&seq.to_json()).is_err());
    }
}
