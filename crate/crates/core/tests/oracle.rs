mod common;

use common::{annihilators, expm_symmetric, hamiltonian_matrix, opnorm};
use isothc::focksim::{
    apply_basis_rotation, apply_diagonal_two_body, complete_isometry, dense_unitary,
    givens_decompose, Direction, ModeLayout, SpinSector,
};
use isothc::hamiltonian::build_many_body_operator;
use isothc::linalg::random_coisometry;
use isothc::{ElectronicHamiltonian, ThcFactorization};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn oracle_operators_satisfy_anticommutation() {
    let a = annihilators(4);
    let dim = 16;
    let id = DMatrix::<f64>::identity(dim, dim);
    for p in 0..4 {
        for q in 0..4 {
            let ap_aqd = &a[p] * a[q].transpose() + a[q].transpose() * &a[p];
            let expected = if p == q {
                id.clone()
            } else {
                DMatrix::zeros(dim, dim)
            };
            assert!((ap_aqd - expected).norm() < 1e-14);
            assert!((&a[p] * &a[q] + &a[q] * &a[p]).norm() < 1e-14);
        }
    }
}

#[test]
fn many_body_operator_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for (n, spinful) in [(2, false), (2, true), (3, false), (3, true), (4, false)] {
        let ham = ElectronicHamiltonian::random(n, &mut rng);
        let lib = build_many_body_operator(&ham, spinful).unwrap();
        let oracle = hamiltonian_matrix(&ham, spinful);
        let diff = (lib.matrix() - &oracle).amax();
        assert!(diff < 1e-12, "N = {n}, spinful = {spinful}: {diff}");
    }
}

/// Dense `n_c` operators for `c†_α = Σ_q R_αq f†_q` in every sector.
fn c_number_operators(r: &DMatrix<f64>, layout: &ModeLayout) -> Vec<(usize, DMatrix<f64>)> {
    let m = layout.sector_size();
    let f = annihilators(layout.n_modes());
    let mut out = Vec::new();
    for s in 0..layout.n_sectors() {
        for alpha in 0..m {
            let mut c = DMatrix::zeros(layout.dim(), layout.dim());
            for q in 0..m {
                c += &f[q + s * m] * r[(alpha, q)];
            }
            out.push((alpha, c.transpose() * c));
        }
    }
    out
}

fn diagonal_energy_operator(
    vtilde: &DMatrix<f64>,
    numbers: &[(usize, DMatrix<f64>)],
) -> DMatrix<f64> {
    let dim = numbers[0].1.nrows();
    let mut out = DMatrix::zeros(dim, dim);
    for (x, (a, na)) in numbers.iter().enumerate() {
        for (b, nb) in &numbers[x + 1..] {
            out += na * nb * vtilde[(*a, *b)];
        }
    }
    out
}

fn random_thc(n: usize, m: usize, seed: u64) -> (ElectronicHamiltonian, ThcFactorization) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ham = ElectronicHamiltonian::random(n, &mut rng);
    let u = random_coisometry(n, m, &mut rng);
    let thc = ThcFactorization::from_u(u, &ham).unwrap();
    (ham, thc)
}

/// Random co-isometry with a random symmetric kernel of unit scale.
fn unit_kernel_thc(n: usize, m: usize, seed: u64) -> ThcFactorization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_coisometry(n, m, &mut rng);
    let k = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
    ThcFactorization::new(u, (&k + k.transpose()) * 0.5, None).unwrap()
}

#[test]
fn rotated_diagonal_block_matches_dense_exponential() {
    let tau = 0.37;
    for (n, m, spinful, seed) in [
        (2, 4, false, 1),
        (3, 5, false, 2),
        (2, 3, true, 3),
        (3, 4, true, 4),
    ] {
        let thc = unit_kernel_thc(n, m, seed);
        let w = complete_isometry(thc.u()).unwrap();
        let seq = givens_decompose(&w, n);
        let r = seq.single_particle_matrix();
        assert!(r.iter().all(|z| z.im.abs() < 1e-14));
        let r = r.map(|z| z.re);
        for alpha in 0..m {
            for q in 0..n {
                assert!((r[(alpha, q)] - thc.u()[(q, alpha)]).abs() < 1e-12);
            }
        }
        let layout = ModeLayout::new(n, m - n, spinful);
        let vt = thc.vtilde().clone();
        let lib = dense_unitary(layout, &|psi| {
            apply_basis_rotation(psi, &seq, Direction::Forward, SpinSector::Both)?;
            apply_diagonal_two_body(psi, &vt, tau)?;
            apply_basis_rotation(psi, &seq, Direction::Inverse, SpinSector::Both)
        })
        .unwrap();
        let numbers = c_number_operators(&r, &layout);
        let oracle = expm_symmetric(&diagonal_energy_operator(&vt, &numbers), tau);
        let diff = opnorm(&(lib - oracle));
        assert!(
            diff < 1e-11,
            "N = {n}, M = {m}, spinful = {spinful}: {diff}"
        );
    }
}

fn independent_vprime(thc: &ThcFactorization) -> DMatrix<f64> {
    let (n, m) = (thc.n(), thc.m());
    let (u, vt) = (thc.u(), thc.vtilde());
    DMatrix::from_fn(n * n, n * n, |r, c| {
        let (i, j, k, l) = (r / n, r % n, c / n, c % n);
        let mut s = 0.0;
        for a in 0..m {
            for b in 0..m {
                s += u[(i, a)] * u[(j, a)] * vt[(a, b)] * u[(k, b)] * u[(l, b)];
            }
        }
        s
    })
}

fn system_indices(layout: &ModeLayout) -> Vec<usize> {
    let (n, m) = (layout.n_system, layout.sector_size());
    let k = n * layout.n_sectors();
    (0..1usize << k)
        .map(|bits| {
            let mut out = 0;
            for p in 0..k {
                if bits >> p & 1 == 1 {
                    out |= 1 << (p % n + (p / n) * m);
                }
            }
            out
        })
        .collect()
}

#[test]
fn ancilla_vacuum_block_is_projected_interaction() {
    for (n, m, spinful, seed) in [
        (2, 3, false, 11),
        (3, 5, false, 12),
        (2, 3, true, 13),
        (2, 4, true, 14),
    ] {
        let (_, thc) = random_thc(n, m, seed);
        let layout = ModeLayout::new(n, m - n, spinful);
        let w = complete_isometry(thc.u()).unwrap();
        let numbers = c_number_operators(&w.transpose(), &layout);
        let vt_ext = diagonal_energy_operator(thc.vtilde(), &numbers);
        let idx = system_indices(&layout);
        let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| vt_ext[(idx[r], idx[c])]);
        let vprime = ElectronicHamiltonian::new_symmetrized(
            DMatrix::zeros(n, n),
            independent_vprime(&thc),
            0.0,
        )
        .unwrap();
        let vprime_dense = hamiltonian_matrix(&vprime, spinful);
        assert!((&block - &vprime_dense).amax() < 1e-12, "N = {n}, M = {m}");

        let defect = |tau: f64| {
            let full = expm_symmetric(&vt_ext, tau);
            let proj = DMatrix::from_fn(idx.len(), idx.len(), |r, c| full[(idx[r], idx[c])]);
            opnorm(&(proj - expm_symmetric(&vprime_dense, tau))) / (tau * tau)
        };
        let (d1, d2) = (defect(2e-3), defect(1e-3));
        assert!(d1 > 1e-8, "no leakage at second order");
        assert!((d1 / d2 - 1.0).abs() < 0.02, "{d1} {d2}");
    }
}

#[test]
fn projected_interaction_matches_four_index_sum() {
    let (_, thc) = random_thc(3, 7, 21);
    let lib = isothc::thc::projected_interaction(&thc);
    assert!((lib - independent_vprime(&thc)).amax() < 1e-13);
}
