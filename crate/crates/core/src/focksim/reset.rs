//! Fermionic partial trace over the ancillas.
//!
//! Bringing every ancilla behind every system mode reorders the creation
//! operators of a basis string; the sign of that permutation is
//! `(−1)^{#(b, a) pairs with the occupied b-mode below the occupied a-mode}`.
//! In the reordered basis the usual partial trace applies. This is valid
//! because the traced block is the whole ancilla register and the density
//! matrix has no coherence between states of different total parity, which
//! is checked.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{FockDensity, FockOps, ModeLayout};
use crate::error::{Error, Result};

const PARITY_TOL: f64 = 1e-10;

fn reorder_sign(layout: &ModeLayout, bits: usize) -> f64 {
    let mask = layout.ancilla_mask();
    let system = bits & !mask;
    let mut swaps = 0u32;
    let mut b = bits & mask;
    while b != 0 {
        let p = b.trailing_zeros();
        b &= b - 1;
        swaps += (system >> (p + 1)).count_ones();
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn check_parity(rho: &FockDensity) -> Result<()> {
    let m = rho.matrix();
    let mut worst = 0.0f64;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if (r.count_ones() + c.count_ones()) % 2 == 1 {
                worst = worst.max(m[(r, c)].norm());
            }
        }
    }
    if worst > PARITY_TOL {
        return Err(Error::ParityMix { magnitude: worst });
    }
    Ok(())
}

/// Reduced density of the system modes, `tr_b ρ`, in the bare system layout.
pub fn system_density(rho: &FockDensity) -> Result<FockDensity> {
    check_parity(rho)?;
    let layout = rho.layout();
    let sys = layout.system_layout();
    let mask = layout.ancilla_mask();
    let dim = layout.dim();
    let signs: Vec<f64> = (0..dim).map(|b| reorder_sign(&layout, b)).collect();
    let mut out = DMatrix::<Complex64>::zeros(sys.dim(), sys.dim());
    let m = rho.matrix();
    for c in 0..dim {
        let cb = c & mask;
        let col = layout.system_bits(c);
        for r in (0..dim).filter(|r| r & mask == cb) {
            out[(layout.system_bits(r), col)] += m[(r, c)] * (signs[r] * signs[c]);
        }
    }
    Ok(FockDensity::from_matrix_unchecked(sys, out))
}

/// `tr_b(ρ) ⊗ |0⟩_b⟨0|`.
pub fn reset_ancillas(rho: &FockDensity) -> Result<FockDensity> {
    system_density(rho)?.embed(rho.layout())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focksim::FockState;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mixed(layout: ModeLayout, seed: u64) -> FockDensity {
        // mixture of number-definite pure states
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = layout.dim();
        let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
        let mut total = 0.0;
        for k in 0..4 {
            let particles = 1 + k % 2;
            let v = DVector::from_fn(dim, |b, _| {
                if b.count_ones() as usize == particles {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let v = &v / Complex64::new(v.norm(), 0.0);
            let w: f64 = rng.gen_range(0.1..1.0);
            acc += (&v * v.adjoint()) * Complex64::new(w, 0.0);
            total += w;
        }
        FockDensity::from_matrix(layout, acc / Complex64::new(total, 0.0)).unwrap()
    }

    #[test]
    fn vacuum_supported_state_unchanged() {
        let sys = FockState::basis(ModeLayout::system(2, true), 0b0110).unwrap();
        let rho = sys
            .embed(ModeLayout::new(2, 1, true))
            .unwrap()
            .to_density()
            .unwrap();
        let out = reset_ancillas(&rho).unwrap();
        assert!((out.matrix() - rho.matrix()).camax() < 1e-15);
    }

    #[test]
    fn occupied_ancilla_is_emptied() {
        let layout = ModeLayout::new(1, 1, false);
        let rho = FockState::basis(layout, 0b11)
            .unwrap()
            .to_density()
            .unwrap();
        let out = reset_ancillas(&rho).unwrap();
        assert!((out.matrix()[(0b01, 0b01)].re - 1.0).abs() < 1e-15);
        assert_eq!(out.ancilla_weight(), 0.0);
    }

    #[test]
    fn trace_preserved_and_idempotent() {
        let layout = ModeLayout::new(2, 1, true);
        let rho = random_mixed(layout, 11);
        let once = reset_ancillas(&rho).unwrap();
        assert!((once.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        once.check_invariants().unwrap();
        let twice = reset_ancillas(&once).unwrap();
        assert!((twice.matrix() - once.matrix()).camax() < 1e-15);
    }

    #[test]
    fn sign_of_interleaved_ancilla() {
        let layout = ModeLayout::new(1, 1, true);
        // modes: a↑=0, b↑=1, a↓=2, b↓=3
        assert_eq!(reorder_sign(&layout, 0b0110), -1.0);
        assert_eq!(reorder_sign(&layout, 0b0011), 1.0);
        assert_eq!(reorder_sign(&layout, 0b1010), 1.0);
    }

    #[test]
    fn rejects_parity_coherence() {
        let layout = ModeLayout::new(1, 1, false);
        let h = Complex64::new(0.5, 0.0);
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                h,
                h,
                Complex64::default(),
                Complex64::default(),
                h,
                h,
                Complex64::default(),
                Complex64::default(),
                Complex64::default(),
                Complex64::default(),
                Complex64::default(),
                Complex64::default(),
                Complex64::default(),
                Complex64::default(),
                Complex64::default(),
                Complex64::default(),
            ],
        );
        let rho = FockDensity::from_matrix(layout, m).unwrap();
        assert!(matches!(reset_ancillas(&rho), Err(Error::ParityMix { .. })));
    }
}
