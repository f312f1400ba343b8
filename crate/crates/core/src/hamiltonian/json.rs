use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{images, ElectronicHamiltonian};
use crate::error::{Error, Result};

/// JSON form of a Hamiltonian: row-major `h` and the ERI entries that are
/// unique under the 8-fold symmetry as zero-indexed `[i, j, k, l, value]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianDocument {
    pub n_orbitals: usize,
    pub core_energy: f64,
    pub h: Vec<f64>,
    pub eri: Vec<(usize, usize, usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_electrons: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ms2: Option<i64>,
}

impl From<&ElectronicHamiltonian> for HamiltonianDocument {
    fn from(ham: &ElectronicHamiltonian) -> Self {
        let n = ham.n_orbitals();
        Self {
            n_orbitals: n,
            core_energy: ham.core_energy(),
            h: (0..n * n).map(|k| ham.h()[(k / n, k % n)]).collect(),
            eri: ham.unique_eri_entries(),
            n_electrons: ham.n_electrons(),
            ms2: ham.ms2(),
        }
    }
}

impl TryFrom<HamiltonianDocument> for ElectronicHamiltonian {
    type Error = Error;

    fn try_from(doc: HamiltonianDocument) -> Result<Self> {
        let n = doc.n_orbitals;
        if n == 0 || n > 256 {
            return Err(Error::Argument(format!("n_orbitals = {n} out of range")));
        }
        if doc.h.len() != n * n {
            return Err(Error::Dimension(format!(
                "h has {} entries, expected {}",
                doc.h.len(),
                n * n
            )));
        }
        if !doc.core_energy.is_finite() || doc.h.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument(
                "non-finite value in h or core_energy".into(),
            ));
        }
        let h = DMatrix::from_row_slice(n, n, &doc.h);
        let mut eri: DMatrix<f64> = DMatrix::zeros(n * n, n * n);
        let mut set = vec![false; n * n * n * n];
        for &(i, j, k, l, v) in &doc.eri {
            if i >= n || j >= n || k >= n || l >= n {
                return Err(Error::Argument(format!(
                    "eri index ({i},{j},{k},{l}) out of range"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Argument(format!(
                    "eri ({i},{j},{k},{l}) is not finite"
                )));
            }
            for (a, b, c, d) in images(i, j, k, l) {
                let (r, col) = (a * n + b, c * n + d);
                let flat = r * n * n + col;
                if set[flat] && (eri[(r, col)] - v).abs() > 1e-10 {
                    return Err(Error::Argument(format!(
                        "eri ({i},{j},{k},{l}) conflicts with an earlier entry"
                    )));
                }
                set[flat] = true;
                eri[(r, col)] = v;
            }
        }
        Ok(ElectronicHamiltonian::new(h, eri, doc.core_energy)?
            .with_metadata(doc.n_electrons, doc.ms2))
    }
}

impl ElectronicHamiltonian {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&HamiltonianDocument::from(self)).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: HamiltonianDocument = serde_json::from_str(text)?;
        doc.try_into()
    }
}
