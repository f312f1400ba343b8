//! Serialized forms of factorizations and conventional factor files.
//!
//! Factor files come as JSON (`{"n": .., "m": .., "x": [...], "w": [...]}`,
//! row-major) or as whitespace-separated text: `N` rows of `X`, optionally
//! followed by a blank line and `M` rows of `W`. Lines starting with `#` are
//! comments.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Provenance, ThcFactorFile, ThcFactorization};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThcDocument {
    pub n: usize,
    pub m: usize,
    pub u: Vec<f64>,
    pub vtilde: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub htilde: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

fn row_major(a: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = a.shape();
    (0..r * c).map(|k| a[(k / c, k % c)]).collect()
}

fn matrix_from(name: &str, rows: usize, cols: usize, data: &[f64]) -> Result<DMatrix<f64>> {
    if data.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "{name} has {} entries, expected {rows}x{cols}",
            data.len()
        )));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument(format!("{name} has non-finite entries")));
    }
    Ok(DMatrix::from_row_slice(rows, cols, data))
}

fn check_size(n: usize, m: usize) -> Result<()> {
    if n == 0 || m < n || m > 4096 {
        return Err(Error::Dimension(format!(
            "N = {n}, M = {m}; need 1 <= N <= M <= 4096"
        )));
    }
    Ok(())
}

impl From<&ThcFactorization> for ThcDocument {
    fn from(thc: &ThcFactorization) -> Self {
        Self {
            n: thc.n(),
            m: thc.m(),
            u: row_major(thc.u()),
            vtilde: row_major(thc.vtilde()),
            htilde: thc.htilde().map(|h| h.iter().copied().collect()),
            provenance: thc.provenance.clone(),
        }
    }
}

impl TryFrom<ThcDocument> for ThcFactorization {
    type Error = Error;

    fn try_from(doc: ThcDocument) -> Result<Self> {
        check_size(doc.n, doc.m)?;
        let u = matrix_from("u", doc.n, doc.m, &doc.u)?;
        let vt = matrix_from("vtilde", doc.m, doc.m, &doc.vtilde)?;
        let ht = match doc.htilde {
            Some(h) => Some(DVector::from_column_slice(
                matrix_from("htilde", doc.m, 1, &h)?.as_slice(),
            )),
            None => None,
        };
        let mut thc = ThcFactorization::new(u, vt, ht)?;
        thc.provenance = doc.provenance;
        Ok(thc)
    }
}

impl ThcFactorization {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ThcDocument::from(self)).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ThcDocument = serde_json::from_str(text)?;
        doc.try_into()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorFileDocument {
    pub n: usize,
    pub m: usize,
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
}

impl ThcFactorFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FactorFileDocument = serde_json::from_str(text)?;
        check_size(doc.n, doc.m)?;
        let x = matrix_from("x", doc.n, doc.m, &doc.x)?;
        let w = doc
            .w
            .map(|w| matrix_from("w", doc.m, doc.m, &w))
            .transpose()?;
        Ok(Self { x, w })
    }

    pub fn to_json(&self) -> String {
        let doc = FactorFileDocument {
            n: self.x.nrows(),
            m: self.x.ncols(),
            x: row_major(&self.x),
            w: self.w.as_ref().map(row_major),
        };
        serde_json::to_string_pretty(&doc).expect("plain data")
    }

    /// Parses the whitespace-separated text layout.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut blocks: Vec<Vec<(usize, Vec<f64>)>> = vec![Vec::new()];
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.starts_with('#') {
                continue;
            }
            if line.is_empty() {
                if !blocks.last().expect("non-empty").is_empty() {
                    blocks.push(Vec::new());
                }
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|t| {
                    t.replace(['D', 'd'], "E")
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::parse(idx + 1, format!("invalid number '{t}'")))
                })
                .collect::<Result<Vec<f64>>>()?;
            blocks.last_mut().expect("non-empty").push((idx + 1, row));
        }
        blocks.retain(|b| !b.is_empty());
        if blocks.is_empty() || blocks.len() > 2 {
            return Err(Error::parse(
                1,
                format!("expected 1 or 2 matrix blocks, found {}", blocks.len()),
            ));
        }
        let to_matrix = |block: &[(usize, Vec<f64>)], cols: usize| -> Result<DMatrix<f64>> {
            for (line, row) in block {
                if row.len() != cols {
                    return Err(Error::parse(
                        *line,
                        format!("expected {cols} columns, found {}", row.len()),
                    ));
                }
            }
            let data: Vec<f64> = block.iter().flat_map(|(_, r)| r.iter().copied()).collect();
            Ok(DMatrix::from_row_slice(block.len(), cols, &data))
        };
        let m = blocks[0][0].1.len();
        let x = to_matrix(&blocks[0], m)?;
        check_size(x.nrows(), m).map_err(|e| Error::parse(blocks[0][0].0, e.to_string()))?;
        let w = match blocks.get(1) {
            None => None,
            Some(block) => {
                if block.len() != m {
                    return Err(Error::parse(
                        block[0].0,
                        format!("W needs {m} rows, found {}", block.len()),
                    ));
                }
                Some(to_matrix(block, m)?)
            }
        };
        Ok(Self { x, w })
    }

    /// JSON when the first non-blank character is `{`, text otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_text(text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn factorization_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = linalg::random_coisometry(2, 3, &mut rng);
        let vt = DMatrix::from_fn(3, 3, |a, b| 0.1 * (a + b) as f64 + 0.01);
        let mut thc =
            ThcFactorization::new(u, vt, Some(DVector::from_vec(vec![0.5, -0.25, 1.0 / 3.0])))
                .unwrap();
        thc.provenance = Some(Provenance {
            eps_v: 1e-3,
            eps_h: None,
            seed: Some(5),
            config: serde_json::json!({"rounds": 10}),
        });
        let back = ThcFactorization::from_json(&thc.to_json()).unwrap();
        assert_eq!(back, thc);
    }

    #[test]
    fn text_layout() {
        let text = "# X\n1 0 0\n0 1 0\n\n1 2 3\n2 4 5\n3 5 6\n";
        let f = ThcFactorFile::parse(text).unwrap();
        assert_eq!(f.x.shape(), (2, 3));
        assert_eq!(f.w.as_ref().unwrap()[(2, 1)], 5.0);
        let again = ThcFactorFile::parse(&f.to_json()).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn text_errors_name_the_line() {
        for (text, want) in [
            ("1 0\n0 x\n", 2),
            ("1 0 0\n0 1\n", 2),
            ("1 0\n0 1\n\n1 0\n", 4),
            ("1\n2\n", 1),
        ] {
            match ThcFactorFile::parse(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn json_rejects_wrong_lengths() {
        assert!(ThcFactorFile::from_json(r#"{"n":2,"m":3,"x":[1,2]}"#).is_err());
        assert!(ThcFactorization::from_json(r#"{"n":1,"m":1,"u":[1],"vtilde":[1,2]}"#).is_err());
    }
}
