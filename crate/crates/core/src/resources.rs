//! Closed-form gate counts for one time step.
//!
//! A step of the spinful algorithm on `M` THC modes uses two basis-rotation
//! layers of `2[C(M,2) − C(M−N,2)]` Givens rotations (depth `M + N` each)
//! and one diagonal two-body layer of `C(2M,2)` ZZ rotations. The depth is
//! taken as `2(M + N) + 2M = 4M + 2N` and the single-qubit rotation total as
//! `2M² + 8MN − 4N²`; the component tally is reported next to it.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    AllToAll,
    Linear,
}

impl std::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "all_to_all" => Ok(Architecture::AllToAll),
            "linear" => Ok(Architecture::Linear),
            other => Err(Error::Argument(format!("unknown architecture '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub label: String,
    pub qubits: u64,
    /// Givens rotations in one basis-rotation layer (or one block).
    pub givens_per_layer: u64,
    pub givens_layers: u64,
    pub givens_rotations: u64,
    pub zz_rotations: u64,
    pub swap_gates: u64,
    pub circuit_depth: u64,
    pub single_qubit_rotations: u64,
    /// `2·Givens + ZZ`, for comparison with `single_qubit_rotations`.
    pub component_rotations: u64,
    pub t_gates: Option<u64>,
    pub architecture: Architecture,
    pub spinful: bool,
    pub qubit_scaling: String,
    pub depth_scaling: String,
    pub rotation_scaling: String,
}

impl ResourceReport {
    /// Fills `t_gates` for synthesis precision `eps_rot`.
    pub fn with_t_gates(mut self, eps_rot: f64) -> Result<Self> {
        self.t_gates = Some(t_count(self.single_qubit_rotations, eps_rot)?);
        Ok(self)
    }
}

fn choose2(k: u64) -> u64 {
    k * k.saturating_sub(1) / 2
}

/// Resources of one step of the basic algorithm.
pub fn estimate_step(
    n: u64,
    m: u64,
    spinful: bool,
    architecture: Architecture,
) -> Result<ResourceReport> {
    if n == 0 || m < n {
        return Err(Error::Argument(format!(
            "need 1 <= N <= M, got N = {n}, M = {m}"
        )));
    }
    let per_sector = choose2(m) - choose2(m - n);
    let rot_depth = if per_sector == 0 { 0 } else { m + n };
    let (qubits, givens_per_layer, zz, rotations, scalings) = if spinful {
        let rotations = 2 * m * m + 8 * m * n - 4 * n * n;
        (
            2 * m,
            2 * per_sector,
            choose2(2 * m),
            rotations,
            ("2M", "4M+2N", "2M^2+8MN-4N^2"),
        )
    } else {
        (
            m,
            per_sector,
            choose2(m),
            4 * per_sector + choose2(m),
            ("M", "4M+2N", "4[C(M,2)-C(M-N,2)]+C(M,2)"),
        )
    };
    let givens_layers = 2;
    let givens_rotations = givens_layers * givens_per_layer;
    let swap_gates = match architecture {
        Architecture::AllToAll => 0,
        Architecture::Linear => zz,
    };
    Ok(ResourceReport {
        label: "isometric THC".into(),
        qubits,
        givens_per_layer,
        givens_layers,
        givens_rotations,
        zz_rotations: zz,
        swap_gates,
        circuit_depth: 2 * rot_depth + 2 * m,
        single_qubit_rotations: rotations,
        component_rotations: 2 * givens_rotations + zz,
        t_gates: None,
        architecture,
        spinful,
        qubit_scaling: scalings.0.into(),
        depth_scaling: scalings.1.into(),
        rotation_scaling: scalings.2.into(),
    })
}

/// T gates for `rotations` single-qubit rotations synthesized to `eps_rot`,
/// at `round(1.15 log₂(1/ε) + 9.2)` each.
pub fn t_count(rotations: u64, eps_rot: f64) -> Result<u64> {
    if !(eps_rot > 0.0 && eps_rot < 1.0) {
        return Err(Error::Argument(format!(
            "eps_rot = {eps_rot} must lie in (0, 1)"
        )));
    }
    let per_rotation = (1.15 * (1.0 / eps_rot).log2() + 9.2).round() as u64;
    Ok(rotations * per_rotation)
}

/// Double-factorization parameters: `N` orbitals, `L` first-stage rank,
/// `Ξ` average second-stage rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MottaParams {
    pub n: u64,
    pub l: u64,
    pub xi: u64,
}

/// Resources of one double-factorized Trotter step.
pub fn motta_estimate(p: MottaParams) -> Result<ResourceReport> {
    let MottaParams { n, l, xi } = p;
    if n == 0 || l == 0 || xi == 0 {
        return Err(Error::Argument("N, L and Ξ must be positive".into()));
    }
    if xi > n {
        return Err(Error::Argument(format!("Ξ = {xi} exceeds N = {n}")));
    }
    let givens_per_layer = 2 * choose2(n) - 2 * choose2(n - xi);
    let zz_per_block = choose2(2 * xi);
    Ok(ResourceReport {
        label: "double factorization".into(),
        qubits: 2 * n,
        givens_per_layer,
        givens_layers: l,
        givens_rotations: l * givens_per_layer,
        zz_rotations: l * zz_per_block,
        swap_gates: 0,
        circuit_depth: l * (n + 3 * xi),
        single_qubit_rotations: 4 * l * n * xi,
        component_rotations: 2 * l * givens_per_layer + l * zz_per_block,
        t_gates: None,
        architecture: Architecture::AllToAll,
        spinful: true,
        qubit_scaling: "2N".into(),
        depth_scaling: "L(N+3Xi)".into(),
        rotation_scaling: "4LNXi".into(),
    })
}

/// Ratios `reference / ours` for rotations and depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub rotations: f64,
    pub depth: f64,
}

pub fn reduction(ours: &ResourceReport, reference: &ResourceReport) -> Reduction {
    Reduction {
        rotations: reference.single_qubit_rotations as f64 / ours.single_qubit_rotations as f64,
        depth: reference.circuit_depth as f64 / ours.circuit_depth as f64,
    }
}

/// Aligned text table with qubits, depth and single-qubit rotations.
pub fn render_table(rows: &[ResourceReport]) -> String {
    let cell = |scaling: &str, count: u64| format!("{scaling} = {count}");
    let mut lines: Vec<[String; 5]> = vec![[
        "Method".into(),
        "Qubits".into(),
        "Circuit depth".into(),
        "Single-qubit rotations".into(),
        "T gates".into(),
    ]];
    for r in rows {
        lines.push([
            r.label.clone(),
            cell(&r.qubit_scaling, r.qubits),
            cell(&r.depth_scaling, r.circuit_depth),
            cell(&r.rotation_scaling, r.single_qubit_rotations),
            r.t_gates.map_or_else(|| "-".into(), |t| t.to_string()),
        ]);
    }
    if let [ours, reference] = rows {
        let red = reduction(ours, reference);
        lines.push([
            "Ratio".into(),
            "-".into(),
            format!("{:.1}x", red.depth),
            format!("{:.1}x", red.rotations),
            "-".into(),
        ]);
    }
    let widths: Vec<usize> = (0..5)
        .map(|c| {
            lines
                .iter()
                .map(|l| l[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for l in &lines {
        let cells: Vec<String> = l
            .iter()
            .zip(&widths)
            .map(|(s, &w)| format!("{s:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn femoco_counts() {
        let r = estimate_step(76, 450, true, Architecture::AllToAll).unwrap();
        assert_eq!(r.single_qubit_rotations, 655_496);
        assert_eq!(r.circuit_depth, 1952);
        assert_eq!(r.qubits, 900);
        assert_eq!(r.swap_gates, 0);
        let lin = estimate_step(76, 450, true, Architecture::Linear).unwrap();
        assert_eq!(lin.swap_gates, choose2(900));
    }

    #[test]
    fn motta_counts_and_ratio() {
        let ours = estimate_step(76, 450, true, Architecture::AllToAll).unwrap();
        let df = motta_estimate(MottaParams {
            n: 76,
            l: 394,
            xi: 51,
        })
        .unwrap();
        assert_eq!(df.single_qubit_rotations, 6_108_576);
        assert_eq!(df.circuit_depth, 90_226);
        assert_eq!(df.qubits, 152);
        let red = reduction(&ours, &df);
        assert!(red.rotations > 9.0 && red.depth > 45.0);
        assert!(motta_estimate(MottaParams { n: 4, l: 1, xi: 5 }).is_err());
    }

    #[test]
    fn small_cases() {
        let one = estimate_step(1, 1, false, Architecture::AllToAll).unwrap();
        assert_eq!(one.givens_per_layer, 0);
        assert_eq!(one.circuit_depth, 2);
        assert_eq!(
            estimate_step(2, 3, false, Architecture::AllToAll)
                .unwrap()
                .givens_per_layer,
            3
        );
        assert_eq!(
            estimate_step(3, 3, true, Architecture::AllToAll)
                .unwrap()
                .givens_per_layer,
            6
        );
        assert!(estimate_step(3, 2, false, Architecture::AllToAll).is_err());
    }

    #[test]
    fn t_counts() {
        assert_eq!(t_count(1, 1e-6).unwrap(), 32);
        assert_eq!(t_count(1, 0.5).unwrap(), 10);
        assert_eq!(t_count(0, 1e-3).unwrap(), 0);
        assert!(t_count(1, 1.0).is_err());
        assert!(t_count(1, 0.0).is_err());
    }

    #[test]
    fn monotone_in_n_and_m() {
        for spinful in [false, true] {
            for n in 1..8u64 {
                for m in n..12 {
                    let a = estimate_step(n, m, spinful, Architecture::AllToAll).unwrap();
                    let b = estimate_step(n, m + 1, spinful, Architecture::AllToAll).unwrap();
                    assert!(b.single_qubit_rotations >= a.single_qubit_rotations);
                    assert!(b.circuit_depth >= a.circuit_depth);
                    assert!(b.givens_per_layer >= a.givens_per_layer);
                    if m > n {
                        let c = estimate_step(n + 1, m, spinful, Architecture::AllToAll).unwrap();
                        assert!(c.givens_per_layer >= a.givens_per_layer);
                        assert!(c.circuit_depth >= a.circuit_depth);
                    }
                }
            }
        }
    }

    #[test]
    fn table_has_ratio_row() {
        let ours = estimate_step(76, 450, true, Architecture::AllToAll).unwrap();
        let df = motta_estimate(MottaParams {
            n: 76,
            l: 394,
            xi: 51,
        })
        .unwrap();
        let t = render_table(&[ours, df]);
        assert!(t.contains("Ratio"));
        assert!(t.contains("655496"));
    }
}
