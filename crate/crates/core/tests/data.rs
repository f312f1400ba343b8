mod common;

use common::hamiltonian_matrix;
use isothc::hamiltonian::{ground_state_energy, parse_fcidump, rotate_to_h_eigenbasis};
use isothc::linalg::random_orthogonal;
use isothc::thc::exact_factorize;
use isothc::{ElectronicHamiltonian, ThcFactorization};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// PySCF FCI energies at the checked-in geometries
const H2_FCI: f64 = -1.1459217373175763;
const H4_FCI: f64 = -2.1652941152103504;

fn load(name: &str) -> ElectronicHamiltonian {
    let path = format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_fcidump(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn sector_ground_energy(dense: &DMatrix<f64>, n_electrons: u32) -> f64 {
    let idx: Vec<usize> = (0..dense.nrows())
        .filter(|b| b.count_ones() == n_electrons)
        .collect();
    let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| dense[(idx[r], idx[c])]);
    SymmetricEigen::new(block).eigenvalues.min()
}

fn rotate(ham: &ElectronicHamiltonian, c: &DMatrix<f64>) -> ElectronicHamiltonian {
    let kron = c.kronecker(c);
    let eri = kron.transpose() * ham.eri_matrix() * &kron;
    ElectronicHamiltonian::new_symmetrized(c.transpose() * ham.h() * c, eri, ham.core_energy())
        .unwrap()
}

#[test]
fn headers_carry_metadata() {
    let h2 = load("h2_sto6g.fcidump");
    assert_eq!(
        (h2.n_orbitals(), h2.n_electrons(), h2.ms2()),
        (2, Some(2), Some(0))
    );
    let h4 = load("h4_chain_sto6g.fcidump");
    assert_eq!(
        (h4.n_orbitals(), h4.n_electrons(), h4.ms2()),
        (4, Some(4), Some(0))
    );
}

#[test]
fn exact_diagonalization_reproduces_fci() {
    for (name, ne, fci) in [
        ("h2_sto6g.fcidump", 2, H2_FCI),
        ("h4_chain_sto6g.fcidump", 4, H4_FCI),
    ] {
        let ham = load(name);
        let oracle = sector_ground_energy(&hamiltonian_matrix(&ham, true), ne as u32);
        let lib = ground_state_energy(&ham, ne, true).unwrap();
        assert!((oracle - fci).abs() < 1e-8, "{name}: {oracle}");
        assert!((lib - oracle).abs() < 1e-10, "{name}: {lib}");
    }
}

#[test]
fn spectrum_is_invariant_under_orbital_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ham = load("h4_chain_sto6g.fcidump");
    let base = ground_state_energy(&ham, 4, true).unwrap();
    for _ in 0..3 {
        let c = random_orthogonal(4, &mut rng);
        let e = ground_state_energy(&rotate(&ham, &c), 4, true).unwrap();
        assert!((e - base).abs() < 1e-10);
    }
    let (eig, _) = rotate_to_h_eigenbasis(&ham);
    assert!(eig.is_h_diagonal(1e-12));
    assert!((ground_state_energy(&eig, 4, true).unwrap() - base).abs() < 1e-10);
}

#[test]
fn text_formats_round_trip() {
    for name in ["h2_sto6g.fcidump", "h4_chain_sto6g.fcidump"] {
        let ham = load(name);
        let again = parse_fcidump(&ham.to_fcidump()).unwrap();
        assert!((again.eri_matrix() - ham.eri_matrix()).amax() < 1e-14);
        assert!((again.h() - ham.h()).amax() < 1e-14);
        assert_eq!(again.core_energy(), ham.core_energy());
        assert_eq!(again.n_electrons(), ham.n_electrons());
        let json = ElectronicHamiltonian::from_json(&ham.to_json()).unwrap();
        assert_eq!(json.eri_matrix(), ham.eri_matrix());
        assert_eq!(json.h(), ham.h());
    }
}

#[test]
fn exact_factorization_of_h4_round_trips_through_json() {
    let ham = rotate_to_h_eigenbasis(&load("h4_chain_sto6g.fcidump")).0;
    let thc = exact_factorize(&ham).unwrap().thc;
    assert_eq!(thc.m(), 16);
    let back = ThcFactorization::from_json(&thc.to_json()).unwrap();
    assert_eq!(back.u(), thc.u());
    assert_eq!(back.vtilde(), thc.vtilde());
    let vprime = isothc::thc::projected_interaction(&back);
    assert!((vprime - ham.eri_matrix()).amax() < 1e-10);
}
