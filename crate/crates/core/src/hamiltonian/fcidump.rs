//! FCIDUMP reader and writer.
//!
//! Header: `&FCI NORB=n, NELEC=e, MS2=s, ORBSYM=..., ISYM=... &END` (or a
//! terminating `/`), keys case-insensitive and free-form across lines. Body:
//! one `value i j k l` record per line with 1-based indices, where
//! `0 0 0 0` is the core energy, `i j 0 0` a one-body integral, `i 0 0 0` an
//! orbital energy (ignored) and anything else a chemists' `(ij|kl)`.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::{images, ElectronicHamiltonian};
use crate::error::{Error, Result};

/// Entries whose symmetry images disagree by more than this are rejected.
const DUPLICATE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Slot {
    Core,
    One(usize, usize),
    Two(usize, usize, usize, usize),
}

fn canonical_pair(a: usize, b: usize) -> (usize, usize) {
    if a >= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn canonical_eri(i: usize, j: usize, k: usize, l: usize) -> Slot {
    let p = canonical_pair(i, j);
    let q = canonical_pair(k, l);
    let (p, q) = if p >= q { (p, q) } else { (q, p) };
    Slot::Two(p.0, p.1, q.0, q.1)
}

fn parse_real(tok: &str) -> Option<f64> {
    let v: f64 = tok.replace(['D', 'd'], "E").parse().ok()?;
    v.is_finite().then_some(v)
}

/// Removes blanks around `=` so that `NORB = 2` tokenizes like `NORB=2`.
fn glue_assignments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (k, part) in text.split('=').enumerate() {
        if k > 0 {
            out.truncate(out.trim_end().len());
            out.push('=');
            out.push_str(part.trim_start());
        } else {
            out.push_str(part);
        }
    }
    out
}

struct Header {
    norb: usize,
    nelec: Option<usize>,
    ms2: Option<i64>,
    body_start: usize,
}

fn parse_header(lines: &[&str]) -> Result<Header> {
    let first = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::parse(1, "empty input"))?;
    let start_line = lines[first].trim_start();
    if !start_line.to_ascii_uppercase().starts_with("&FCI") {
        return Err(Error::parse(first + 1, "expected '&FCI' header"));
    }

    // (token, 1-based line) pairs between &FCI and &END
    let mut tokens: Vec<(String, usize)> = Vec::new();
    let mut end = None;
    for (idx, raw) in lines.iter().enumerate().skip(first) {
        let mut text = raw.to_string();
        if idx == first {
            text = text.trim_start()[4..].to_string();
        }
        let upper = text.to_ascii_uppercase();
        let (content, done) = if let Some(pos) = upper.find("&END") {
            (&text[..pos], true)
        } else if text.trim() == "/" {
            ("", true)
        } else {
            (text.as_str(), false)
        };
        let content = glue_assignments(content);
        for tok in content.split([',', ' ', '\t']).filter(|t| !t.is_empty()) {
            tokens.push((tok.to_string(), idx + 1));
        }
        if done {
            end = Some(idx);
            break;
        }
    }
    let end = end.ok_or_else(|| Error::parse(first + 1, "header is not terminated by &END"))?;

    let mut fields: HashMap<String, (Vec<String>, usize)> = HashMap::new();
    let mut current: Option<String> = None;
    for (tok, line) in tokens {
        if let Some((key, value)) = tok.split_once('=') {
            let key = key.trim().to_ascii_uppercase();
            if key.is_empty() {
                return Err(Error::parse(line, "header field without a name"));
            }
            let entry = fields.entry(key.clone()).or_insert((Vec::new(), line));
            if !value.is_empty() {
                entry.0.push(value.to_string());
            }
            current = Some(key);
        } else {
            match &current {
                Some(key) => fields.get_mut(key).expect("inserted").0.push(tok),
                None => {
                    return Err(Error::parse(
                        line,
                        format!("unexpected header token '{tok}'"),
                    ))
                }
            }
        }
    }

    let scalar = |name: &str| -> Result<Option<(String, usize)>> {
        match fields.get(name) {
            None => Ok(None),
            Some((vals, line)) if vals.len() == 1 => Ok(Some((vals[0].clone(), *line))),
            Some((_, line)) => Err(Error::parse(*line, format!("{name} must hold one value"))),
        }
    };
    let (norb_text, norb_line) =
        scalar("NORB")?.ok_or_else(|| Error::parse(first + 1, "header lacks NORB"))?;
    let norb: usize = norb_text
        .parse()
        .map_err(|_| Error::parse(norb_line, format!("NORB '{norb_text}' is not an integer")))?;
    if norb == 0 {
        return Err(Error::parse(norb_line, "NORB must be positive"));
    }
    let nelec = match scalar("NELEC")? {
        None => None,
        Some((t, line)) => Some(
            t.parse::<usize>()
                .map_err(|_| Error::parse(line, format!("NELEC '{t}' is not an integer")))?,
        ),
    };
    let ms2 = match scalar("MS2")? {
        None => None,
        Some((t, line)) => Some(
            t.parse::<i64>()
                .map_err(|_| Error::parse(line, format!("MS2 '{t}' is not an integer")))?,
        ),
    };
    Ok(Header {
        norb,
        nelec,
        ms2,
        body_start: end + 1,
    })
}

/// Parses FCIDUMP text into a Hamiltonian with every symmetry image filled.
pub fn parse_fcidump(text: &str) -> Result<ElectronicHamiltonian> {
    let lines: Vec<&str> = text.lines().collect();
    let header = parse_header(&lines)?;
    let n = header.norb;
    // n^4 entries must fit comfortably in memory
    if n > 256 {
        return Err(Error::parse(1, format!("NORB={n} is too large")));
    }

    let mut seen: HashMap<Slot, (f64, usize)> = HashMap::new();
    for (idx, raw) in lines.iter().enumerate().skip(header.body_start) {
        let line_no = idx + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(Error::parse(
                line_no,
                format!("expected 5 fields, found {}", toks.len()),
            ));
        }
        let value = parse_real(toks[0])
            .ok_or_else(|| Error::parse(line_no, format!("invalid number '{}'", toks[0])))?;
        let mut idx4 = [0usize; 4];
        for (slot, tok) in idx4.iter_mut().zip(&toks[1..]) {
            let v: usize = tok
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid index '{tok}'")))?;
            if v > n {
                return Err(Error::parse(line_no, format!("index {v} outside [0, {n}]")));
            }
            *slot = v;
        }
        let slot = match idx4 {
            [0, 0, 0, 0] => Slot::Core,
            [i, 0, 0, 0] if i > 0 => continue,
            [i, j, 0, 0] if i > 0 && j > 0 => {
                let (a, b) = canonical_pair(i - 1, j - 1);
                Slot::One(a, b)
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                canonical_eri(i - 1, j - 1, k - 1, l - 1)
            }
            _ => {
                return Err(Error::parse(
                    line_no,
                    format!("invalid index pattern {:?}", idx4),
                ))
            }
        };
        if let Some(&(prev, prev_line)) = seen.get(&slot) {
            if (prev - value).abs() > DUPLICATE_TOL {
                return Err(Error::parse(
                    line_no,
                    format!("value {value} conflicts with {prev} from line {prev_line}"),
                ));
            }
        } else {
            seen.insert(slot, (value, line_no));
        }
    }

    let mut core = 0.0;
    let mut h = DMatrix::zeros(n, n);
    let mut eri = DMatrix::zeros(n * n, n * n);
    for (slot, (value, _)) in seen {
        match slot {
            Slot::Core => core = value,
            Slot::One(i, j) => {
                h[(i, j)] = value;
                h[(j, i)] = value;
            }
            Slot::Two(i, j, k, l) => {
                for (a, b, c, d) in images(i, j, k, l) {
                    eri[(a * n + b, c * n + d)] = value;
                }
            }
        }
    }
    Ok(ElectronicHamiltonian::new(h, eri, core)?.with_metadata(header.nelec, header.ms2))
}

impl ElectronicHamiltonian {
    /// Writes the Hamiltonian in FCIDUMP form (unique ERI entries, shortest
    /// round-trip float formatting).
    pub fn to_fcidump(&self) -> String {
        let n = self.n_orbitals();
        let mut out = String::new();
        let _ = write!(
            out,
            " &FCI NORB={n},NELEC={},MS2={},\n  ORBSYM=",
            self.n_electrons().unwrap_or(0),
            self.ms2().unwrap_or(0)
        );
        for _ in 0..n {
            out.push_str("1,");
        }
        out.push_str("\n  ISYM=1,\n &END\n");
        for (i, j, k, l, v) in self.unique_eri_entries() {
            let _ = writeln!(out, " {v:e} {} {} {} {}", i + 1, j + 1, k + 1, l + 1);
        }
        for i in 0..n {
            for j in 0..=i {
                let v = self.h()[(i, j)];
                if v != 0.0 {
                    let _ = writeln!(out, " {v:e} {} {} 0 0", i + 1, j + 1);
                }
            }
        }
        let _ = writeln!(out, " {:e} 0 0 0 0", self.core_energy());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_orbital_fields() {
        let text = "&FCI NORB=1,NELEC=1,MS2=1,\n ORBSYM=1,\n ISYM=1,\n&END\n0.5 1 1 1 1\n-1.0 1 1 0 0\n0.7 0 0 0 0\n";
        let ham = parse_fcidump(text).unwrap();
        assert_eq!(ham.n_orbitals(), 1);
        assert_eq!(ham.eri(0, 0, 0, 0), 0.5);
        assert_eq!(ham.h()[(0, 0)], -1.0);
        assert_eq!(ham.core_energy(), 0.7);
        assert_eq!(ham.n_electrons(), Some(1));
        assert_eq!(ham.ms2(), Some(1));
    }

    #[test]
    fn single_entry_fills_all_images() {
        let text = "&FCI NORB=2 &END\n0.25 1 2 1 1\n";
        let ham = parse_fcidump(text).unwrap();
        for (a, b, c, d) in images(0, 1, 0, 0) {
            assert_eq!(ham.eri(a, b, c, d), 0.25);
        }
        assert_eq!(ham.eri(0, 0, 0, 0), 0.0);
        assert_eq!(ham.eri(1, 1, 1, 1), 0.0);
    }

    #[test]
    fn header_variants() {
        let lower = "&fci norb = 2, nelec=2, ms2=0, orbsym=1,1, isym=1\n/\n1.0 2 2 0 0\n";
        let ham = parse_fcidump(lower).unwrap();
        assert_eq!(ham.h()[(1, 1)], 1.0);
        let fortran = " &FCI NORB=1 &END\n 1.5D-01 1 1 1 1\n";
        assert_eq!(parse_fcidump(fortran).unwrap().eri(0, 0, 0, 0), 0.15);
    }

    #[test]
    fn malformed_inputs_name_the_line() {
        let cases = [
            ("NORB=2 &END\n", 1),
            ("&FCI NELEC=2 &END\n", 1),
            ("&FCI NORB=x &END\n", 1),
            ("&FCI NORB=2\n1.0 1 1 1 1\n", 1),
            ("&FCI NORB=2 &END\n1.0 3 1 1 1\n", 2),
            ("&FCI NORB=2 &END\n1.0 1 1\n", 2),
            ("&FCI NORB=2 &END\n\n1.0 1 0 1 1\n", 3),
            ("&FCI NORB=2 &END\n0.3 1 2 1 1\n0.4 2 1 1 1\n", 3),
            ("&FCI NORB=2 &END\nnan 1 1 1 1\n", 2),
        ];
        for (text, want) in cases {
            match parse_fcidump(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn consistent_duplicates_are_accepted() {
        let text = "&FCI NORB=2 &END\n0.3 1 2 1 1\n0.3 1 1 2 1\n";
        assert!(parse_fcidump(text).is_ok());
    }
}
