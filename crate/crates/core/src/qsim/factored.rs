use super::channel::ChannelAction;
use super::density::DensityMatrix;
use super::operator::Operator;
use super::{check_targets, Pauli};

/// Upper bound on the total qubit count; each block is still limited to
/// [`super::MAX_QUBITS`].
pub const MAX_FACTORED_QUBITS: usize = 64;
use crate::{Error, Result};

#[derive(Clone, Debug)]
struct Block {
    /// Global qubit ids, most significant first.
    qubits: Vec<usize>,
    rho: DensityMatrix,
}

/// Density matrix kept as a tensor product of independent blocks.
///
/// Blocks are merged when an operation couples them and a qubit can be
/// traced out once nothing acts on it again. The represented state is the
/// same as a single dense matrix; only the storage differs.
#[derive(Clone, Debug)]
pub struct FactoredState {
    num_qubits: usize,
    blocks: Vec<Option<Block>>,
    /// Block index per qubit, `None` once traced out.
    owner: Vec<Option<usize>>,
}

impl FactoredState {
    pub fn new_zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_FACTORED_QUBITS {
            return Err(Error::Capacity(format!(
                "{n} qubits requested, supported range is 1..={MAX_FACTORED_QUBITS}"
            )));
        }
        let blocks = (0..n)
            .map(|q| {
                Some(Block {
                    qubits: vec![q],
                    rho: DensityMatrix::new_zero_state(1).expect("one qubit"),
                })
            })
            .collect();
        Ok(Self {
            num_qubits: n,
            blocks,
            owner: (0..n).map(Some).collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn is_live(&self, qubit: usize) -> bool {
        self.owner.get(qubit).copied().flatten().is_some()
    }

    /// Size of the largest block, in qubits.
    pub fn largest_block(&self) -> usize {
        self.blocks
            .iter()
            .flatten()
            .map(|b| b.qubits.len())
            .max()
            .unwrap_or(0)
    }

    fn live_owner(&self, qubit: usize) -> Result<usize> {
        check_targets(&[qubit], self.num_qubits)?;
        self.owner[qubit].ok_or_else(|| Error::Domain(format!("qubit {qubit} has been traced out")))
    }

    /// Ensures all `targets` share one block and returns it with local indices.
    fn gather(&mut self, targets: &[usize]) -> Result<(usize, Vec<usize>)> {
        check_targets(targets, self.num_qubits)?;
        let mut ids: Vec<usize> = Vec::new();
        for &t in targets {
            let b = self.live_owner(t)?;
            if !ids.contains(&b) {
                ids.push(b);
            }
        }
        let keep = ids[0];
        for &other in &ids[1..] {
            let src = self.blocks[other].take().expect("live block");
            let dst = self.blocks[keep].as_mut().expect("live block");
            dst.rho = dst.rho.kron(&src.rho)?;
            for &q in &src.qubits {
                self.owner[q] = Some(keep);
            }
            dst.qubits.extend(src.qubits);
        }
        let block = self.blocks[keep].as_ref().expect("live block");
        let local = targets
            .iter()
            .map(|t| {
                block
                    .qubits
                    .iter()
                    .position(|q| q == t)
                    .expect("owned qubit")
            })
            .collect();
        Ok((keep, local))
    }

    pub fn apply_unitary(&mut self, u: &Operator, targets: &[usize]) -> Result<()> {
        if u.dim() != 1 << targets.len() || targets.len() > 2 {
            return Err(Error::Arity {
                expected: u.dim().trailing_zeros() as usize,
                got: targets.len(),
            });
        }
        let (b, local) = self.gather(targets)?;
        let block = self.blocks[b].as_mut().expect("live block");
        block.rho.apply_unitary_unchecked(u, &local);
        Ok(())
    }

    pub fn apply_channel(&mut self, channel: &ChannelAction, targets: &[usize]) -> Result<()> {
        if targets.len() != channel.arity() {
            return Err(Error::Arity {
                expected: channel.arity(),
                got: targets.len(),
            });
        }
        if let ChannelAction::Depolarizing { p, .. } = channel {
            if *p == 0.0 {
                return Ok(());
            }
        }
        let (b, local) = self.gather(targets)?;
        self.blocks[b]
            .as_mut()
            .expect("live block")
            .rho
            .apply_channel(channel, &local)
    }

    pub fn expectation(&self, basis: Pauli, qubit: usize) -> Result<f64> {
        let b = self.live_owner(qubit)?;
        let block = self.blocks[b].as_ref().expect("live block");
        let local = block
            .qubits
            .iter()
            .position(|&q| q == qubit)
            .expect("owned");
        Ok(block.rho.expectation_unchecked(basis, local))
    }

    pub fn reduced_state(&self, qubit: usize) -> Result<DensityMatrix> {
        let b = self.live_owner(qubit)?;
        let block = self.blocks[b].as_ref().expect("live block");
        let local = block
            .qubits
            .iter()
            .position(|&q| q == qubit)
            .expect("owned");
        block.rho.reduced_state(local)
    }

    /// Discards a qubit by partial trace. Later operations on it are errors.
    pub fn trace_out(&mut self, qubit: usize) -> Result<()> {
        let b = self.live_owner(qubit)?;
        self.owner[qubit] = None;
        let block = self.blocks[b].as_mut().expect("live block");
        if block.qubits.len() == 1 {
            self.blocks[b] = None;
            return Ok(());
        }
        let local = block
            .qubits
            .iter()
            .position(|&q| q == qubit)
            .expect("owned");
        block.rho = block.rho.trace_out(local)?;
        block.qubits.remove(local);
        Ok(())
    }

    /// Dense matrix over the live qubits in ascending order.
    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        let mut acc: Option<(Vec<usize>, DensityMatrix)> = None;
        for block in self.blocks.iter().flatten() {
            acc = Some(match acc {
                None => (block.qubits.clone(), block.rho.clone()),
                Some((mut qs, rho)) => {
                    let merged = rho.kron(&block.rho)?;
                    qs.extend(&block.qubits);
                    (qs, merged)
                }
            });
        }
        let (qubits, rho) = acc.ok_or_else(|| Error::Domain("no live qubits".into()))?;
        let mut sorted = qubits.clone();
        sorted.sort_unstable();
        let order: Vec<usize> = sorted
            .iter()
            .map(|q| qubits.iter().position(|x| x == q).expect("present"))
            .collect();
        rho.permute(&order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{GateKind, GateUnitary};

    #[test]
    fn matches_dense_simulation() {
        let ops: Vec<(GateKind, f64, Vec<usize>)> = vec![
            (GateKind::Ry, 0.4, vec![0]),
            (GateKind::Ry, 1.2, vec![3]),
            (GateKind::Cx, 0.0, vec![3, 1]),
            (GateKind::Crx, 0.8, vec![2, 0]),
            (GateKind::Ry, -0.5, vec![2]),
            (GateKind::Crz, 1.9, vec![1, 2]),
        ];
        let mut dense = DensityMatrix::new_zero_state(4).unwrap();
        let mut fact = FactoredState::new_zero_state(4).unwrap();
        let noise = ChannelAction::affine_1q(0.05, 0.9).unwrap();
        for (k, t, q) in &ops {
            let g = GateUnitary::new(
                *k,
                if k.num_params() == 1 {
                    vec![*t]
                } else {
                    vec![]
                },
            )
            .unwrap();
            dense.apply_gate(&g, q).unwrap();
            fact.apply_unitary(&g.matrix(), q).unwrap();
            dense.apply_channel(&noise, &q[..1]).unwrap();
            fact.apply_channel(&noise, &q[..1]).unwrap();
        }
        assert!(fact.to_density_matrix().unwrap().max_abs_diff(&dense) < 1e-12);
        for q in 0..4 {
            for p in Pauli::ALL {
                let a = fact.expectation(p, q).unwrap();
                let b = dense.expectation(p, q).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tracing_out_keeps_marginals() {
        let mut fact = FactoredState::new_zero_state(3).unwrap();
        fact.apply_unitary(&GateKind::H.matrix(0.0), &[0]).unwrap();
        fact.apply_unitary(&GateKind::Cx.matrix(0.0), &[0, 1])
            .unwrap();
        fact.apply_unitary(&GateKind::Crx.matrix(0.6), &[1, 2])
            .unwrap();
        let before = fact.reduced_state(2).unwrap();
        fact.trace_out(0).unwrap();
        assert!(!fact.is_live(0));
        assert!(fact.reduced_state(2).unwrap().max_abs_diff(&before) < 1e-12);
        assert!(fact.expectation(Pauli::Z, 0).is_err());
        assert!(fact.apply_unitary(&GateKind::X.matrix(0.0), &[0]).is_err());
        assert_eq!(fact.largest_block(), 2);
    }
}
