use num_complex::Complex64 as C64;

use super::operator::Operator;
use super::{Pauli, PSD_TOL, STRUCTURAL_TOL};
use crate::{Error, Result};

/// A completely positive trace-preserving map on one or two qubits.
///
/// `Affine1q` and `Depolarizing` have dedicated kernels; [`ChannelAction::kraus`]
/// gives the equivalent operator-sum form for checking.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelAction {
    Kraus {
        ops: Vec<Operator>,
    },
    /// Amplitude damping towards `|0⟩` with probability `p_reset` combined with
    /// scaling of the off-diagonal terms by `dephase`.
    Affine1q {
        p_reset: f64,
        dephase: f64,
    },
    /// `ρ ↦ (1−p)ρ + p·I/d ⊗ Tr_targets ρ`.
    Depolarizing {
        p: f64,
        arity: usize,
    },
    /// Row-stochastic `P(read j | prepared i)`, applied as measure-and-relabel.
    Confusion {
        matrix: [[f64; 2]; 2],
    },
}

impl ChannelAction {
    pub fn kraus(ops: Vec<Operator>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus set".into()))?;
        let d = first.dim();
        if d != 2 && d != 4 {
            return Err(Error::InvalidChannel(format!("Kraus operators of dim {d}")));
        }
        let mut sum = Operator::zeros(d);
        for k in &ops {
            if k.dim() != d {
                return Err(Error::InvalidChannel("mixed Kraus dimensions".into()));
            }
            sum = sum.add(&k.dagger().matmul(k));
        }
        let err = sum.max_abs_diff(&Operator::identity(d));
        if err > PSD_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus completeness violated by {err:.3e}"
            )));
        }
        Ok(ChannelAction::Kraus { ops })
    }

    pub fn affine_1q(p_reset: f64, dephase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_reset) || dephase < 0.0 {
            return Err(Error::InvalidChannel(format!(
                "p_reset={p_reset}, dephase={dephase}"
            )));
        }
        if dephase > (1.0 - p_reset).sqrt() + STRUCTURAL_TOL {
            return Err(Error::InvalidChannel(format!(
                "dephase factor {dephase} exceeds sqrt(1 - p_reset) = {}",
                (1.0 - p_reset).sqrt()
            )));
        }
        Ok(ChannelAction::Affine1q { p_reset, dephase })
    }

    pub fn depolarizing(p: f64, arity: usize) -> Result<Self> {
        if !(1..=2).contains(&arity) {
            return Err(Error::InvalidChannel(format!("depolarizing arity {arity}")));
        }
        let d = (1usize << arity) as f64;
        // complete positivity allows p up to d²/(d²−1); the noise model stays within [0, 1]
        if !(0.0..=d * d / (d * d - 1.0)).contains(&p) {
            return Err(Error::InvalidChannel(format!("depolarizing p={p}")));
        }
        Ok(ChannelAction::Depolarizing { p, arity })
    }

    pub fn confusion(matrix: [[f64; 2]; 2]) -> Result<Self> {
        for row in &matrix {
            if row.iter().any(|&v| !(0.0..=1.0).contains(&v))
                || (row[0] + row[1] - 1.0).abs() > STRUCTURAL_TOL
            {
                return Err(Error::InvalidChannel(format!("confusion row {row:?}")));
            }
        }
        Ok(ChannelAction::Confusion { matrix })
    }

    /// Confusion built from `P(0|1)` and `P(1|0)`.
    pub fn readout(p01: f64, p10: f64) -> Result<Self> {
        Self::confusion([[1.0 - p10, p10], [p01, 1.0 - p01]])
    }

    /// Non-selective Z measurement.
    pub fn z_dephasing() -> Self {
        ChannelAction::Affine1q {
            p_reset: 0.0,
            dephase: 0.0,
        }
    }

    pub fn identity(arity: usize) -> Self {
        ChannelAction::Depolarizing { p: 0.0, arity }
    }

    pub fn arity(&self) -> usize {
        match self {
            ChannelAction::Kraus { ops } => ops[0].dim().trailing_zeros() as usize,
            ChannelAction::Affine1q { .. } | ChannelAction::Confusion { .. } => 1,
            ChannelAction::Depolarizing { arity, .. } => *arity,
        }
    }

    /// Operator-sum representation.
    pub fn kraus_ops(&self) -> Vec<Operator> {
        let z = C64::new(0.0, 0.0);
        let r = |v: f64| C64::new(v, 0.0);
        match self {
            ChannelAction::Kraus { ops } => ops.clone(),
            ChannelAction::Affine1q { p_reset, dephase } => {
                let keep = (1.0 - p_reset).sqrt();
                let mut ops = vec![
                    Operator::from_rows(2, vec![r(1.0), z, z, r(keep)]),
                    Operator::from_rows(2, vec![z, r(p_reset.sqrt()), z, z]),
                ];
                // residual pure dephasing: λ·keep = dephase
                let lambda = if keep > 0.0 { dephase / keep } else { 1.0 };
                let pz = ((1.0 - lambda) / 2.0).max(0.0);
                if pz > 0.0 {
                    let s = (1.0 - pz).sqrt();
                    for op in &mut ops {
                        *op = op.scale(r(s));
                    }
                    let zs = Pauli::Z.matrix().scale(r(pz.sqrt()));
                    ops.push(zs.matmul(&Operator::from_rows(2, vec![r(1.0), z, z, r(keep)])));
                    ops.push(zs.matmul(&Operator::from_rows(2, vec![z, r(p_reset.sqrt()), z, z])));
                }
                ops
            }
            ChannelAction::Depolarizing { p, arity } => {
                let paulis = pauli_strings(*arity);
                let n = paulis.len() as f64;
                paulis
                    .into_iter()
                    .enumerate()
                    .map(|(i, op)| {
                        let w = if i == 0 { 1.0 - p + p / n } else { p / n };
                        op.scale(r(w.max(0.0).sqrt()))
                    })
                    .collect()
            }
            ChannelAction::Confusion { matrix } => {
                let mut ops = Vec::new();
                for (i, row) in matrix.iter().enumerate() {
                    for (j, &pij) in row.iter().enumerate() {
                        let mut op = Operator::zeros(2);
                        op.set(j, i, r(pij.sqrt()));
                        ops.push(op);
                    }
                }
                ops
            }
        }
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`.
    pub fn choi(&self) -> Operator {
        let ops = self.kraus_ops();
        let d = ops[0].dim();
        let mut out = Operator::zeros(d * d);
        for k in &ops {
            for i in 0..d {
                for j in 0..d {
                    for a in 0..d {
                        for b in 0..d {
                            let v = k.get(a, i) * k.get(b, j).conj();
                            let (row, col) = (i * d + a, j * d + b);
                            out.set(row, col, out.get(row, col) + v);
                        }
                    }
                }
            }
        }
        out
    }

    /// Expectation seen through this confusion channel, for any measured basis.
    pub fn confuse_expectation(&self, exact: f64) -> f64 {
        match self {
            ChannelAction::Confusion { matrix } => {
                let q1 = (1.0 - exact) / 2.0;
                let read1 = q1 * matrix[1][1] + (1.0 - q1) * matrix[0][1];
                1.0 - 2.0 * read1
            }
            _ => exact,
        }
    }
}

/// All `4^arity` Pauli strings, identity first.
fn pauli_strings(arity: usize) -> Vec<Operator> {
    let singles = [
        Operator::identity(2),
        Pauli::X.matrix(),
        Pauli::Y.matrix(),
        Pauli::Z.matrix(),
    ];
    let mut out = vec![Operator::identity(1)];
    for _ in 0..arity {
        out = out
            .iter()
            .flat_map(|a| singles.iter().map(move |b| a.kron(b)))
            .collect();
    }
    out
}
