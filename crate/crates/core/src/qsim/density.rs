use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::channel::ChannelAction;
use super::gate::GateUnitary;
use super::operator::Operator;
use super::{check_targets, Pauli, MAX_QUBITS, PSD_TOL, STRUCTURAL_TOL};
use crate::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Mixed state of `n` qubits stored as a dense row-major `2ⁿ×2ⁿ` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|` on `n` qubits.
    pub fn new_zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "{n} qubits requested, supported range is 1..={MAX_QUBITS}"
            )));
        }
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        data[0] = C64::new(1.0, 0.0);
        Ok(Self {
            num_qubits: n,
            data,
        })
    }

    /// Builds a state from raw entries, checking the density-matrix invariants.
    pub fn from_entries(num_qubits: usize, data: Vec<C64>) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Capacity(format!("{num_qubits} qubits")));
        }
        let dim = 1usize << num_qubits;
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        let rho = Self { num_qubits, data };
        rho.validate()?;
        Ok(rho)
    }

    /// Projector onto a normalized pure state.
    pub fn from_pure(amplitudes: &[C64]) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::Dimension(format!("state vector length {dim}")));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::Domain("zero state vector".into()));
        }
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = amplitudes[r] * amplitudes[c].conj() / (norm * norm);
            }
        }
        Self::from_entries(dim.trailing_zeros() as usize, data)
    }

    /// `I/2ⁿ`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let mut rho = Self::new_zero_state(n)?;
        let dim = rho.dim();
        rho.data[0] = ZERO;
        for i in 0..dim {
            rho.data[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
        }
        Ok(rho)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    pub fn to_operator(&self) -> Operator {
        Operator::from_rows(self.dim(), self.data.clone())
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.data[r * d + c] - self.data[c * d + r].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |r, c| {
            (self.data[r * d + c] + self.data[c * d + r].conj()) * 0.5
        });
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Checks Hermiticity, unit trace and positive semidefiniteness.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > STRUCTURAL_TOL {
            return Err(Error::Domain(format!(
                "state is not Hermitian ({herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > STRUCTURAL_TOL {
            return Err(Error::Domain(format!("trace is {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::Domain(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &GateUnitary, targets: &[usize]) -> Result<()> {
        if targets.len() != gate.arity() {
            return Err(Error::Arity {
                expected: gate.arity(),
                got: targets.len(),
            });
        }
        check_targets(targets, self.num_qubits)?;
        self.apply_unitary_unchecked(&gate.matrix(), targets);
        Ok(())
    }

    /// `ρ ← UρU†` for a one- or two-qubit operator on `targets`.
    pub fn apply_unitary(&mut self, u: &Operator, targets: &[usize]) -> Result<()> {
        check_targets(targets, self.num_qubits)?;
        if u.dim() != 1 << targets.len() || targets.len() > 2 {
            return Err(Error::Arity {
                expected: u.dim().trailing_zeros() as usize,
                got: targets.len(),
            });
        }
        self.apply_unitary_unchecked(u, targets);
        Ok(())
    }

    pub(crate) fn apply_unitary_unchecked(&mut self, u: &Operator, targets: &[usize]) {
        self.left_multiply(u, targets);
        self.right_multiply_dagger(u, targets);
    }

    pub fn apply_channel(&mut self, channel: &ChannelAction, targets: &[usize]) -> Result<()> {
        if targets.len() != channel.arity() {
            return Err(Error::Arity {
                expected: channel.arity(),
                got: targets.len(),
            });
        }
        check_targets(targets, self.num_qubits)?;
        match channel {
            ChannelAction::Affine1q { p_reset, dephase } => {
                self.affine_1q(targets[0], *p_reset, *dephase)
            }
            ChannelAction::Depolarizing { p, .. } => self.depolarize(targets, *p),
            ChannelAction::Confusion { matrix } => self.confuse(targets[0], matrix),
            ChannelAction::Kraus { ops } => {
                let len = self.data.len();
                let original = std::mem::replace(&mut self.data, vec![ZERO; len]);
                for k in ops {
                    let mut term = Self {
                        num_qubits: self.num_qubits,
                        data: original.clone(),
                    };
                    term.left_multiply(k, targets);
                    term.right_multiply_dagger(k, targets);
                    for (acc, v) in self.data.iter_mut().zip(term.data) {
                        *acc += v;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn expectation(&self, basis: Pauli, qubit: usize) -> Result<f64> {
        check_targets(&[qubit], self.num_qubits)?;
        Ok(self.expectation_unchecked(basis, qubit))
    }

    pub(crate) fn expectation_unchecked(&self, basis: Pauli, qubit: usize) -> f64 {
        let d = self.dim();
        let bit = 1usize << (self.num_qubits - 1 - qubit);
        let mut acc = 0.0;
        for i in 0..d {
            match basis {
                Pauli::Z => {
                    let v = self.data[i * d + i].re;
                    acc += if i & bit == 0 { v } else { -v };
                }
                Pauli::X if i & bit == 0 => acc += 2.0 * self.data[i * d + (i | bit)].re,
                Pauli::Y if i & bit == 0 => acc -= 2.0 * self.data[i * d + (i | bit)].im,
                _ => {}
            }
        }
        acc
    }

    /// Single-qubit marginal.
    pub fn reduced_state(&self, qubit: usize) -> Result<DensityMatrix> {
        self.partial_trace_keep(&[qubit])
    }

    /// Marginal on `keep`, with qubits ordered as listed.
    pub fn partial_trace_keep(&self, keep: &[usize]) -> Result<DensityMatrix> {
        check_targets(keep, self.num_qubits)?;
        if keep.is_empty() {
            return Err(Error::Domain("cannot trace out every qubit".into()));
        }
        let n = self.num_qubits;
        let k = keep.len();
        let kd = 1usize << k;
        let d = self.dim();
        let keep_mask: usize = keep.iter().map(|&q| 1usize << (n - 1 - q)).sum();
        let local = |idx: usize| -> usize {
            keep.iter()
                .fold(0usize, |acc, &q| (acc << 1) | ((idx >> (n - 1 - q)) & 1))
        };
        let mut out = vec![ZERO; kd * kd];
        for r in 0..d {
            let rest = r & !keep_mask;
            let lr = local(r);
            for lc in 0..kd {
                // rebuild the column index sharing the traced bits of r
                let mut c = rest;
                for (i, &q) in keep.iter().enumerate() {
                    if (lc >> (k - 1 - i)) & 1 == 1 {
                        c |= 1 << (n - 1 - q);
                    }
                }
                out[lr * kd + lc] += self.data[r * d + c];
            }
        }
        Ok(DensityMatrix {
            num_qubits: k,
            data: out,
        })
    }

    /// Partial trace over a single qubit; remaining qubits keep their order.
    pub fn trace_out(&self, qubit: usize) -> Result<DensityMatrix> {
        let keep: Vec<usize> = (0..self.num_qubits).filter(|&q| q != qubit).collect();
        self.partial_trace_keep(&keep)
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn kron(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let n = self.num_qubits + other.num_qubits;
        if n > MAX_QUBITS {
            return Err(Error::Capacity(format!("{n} qubits after tensor product")));
        }
        let op = self.to_operator().kron(&other.to_operator());
        Ok(DensityMatrix {
            num_qubits: n,
            data: op.data().to_vec(),
        })
    }

    /// Reorders qubits so that new qubit `i` is old qubit `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<DensityMatrix> {
        let n = self.num_qubits;
        if order.len() != n {
            return Err(Error::Dimension(format!(
                "permutation of length {}",
                order.len()
            )));
        }
        check_targets(order, n)?;
        let d = self.dim();
        let map = |idx: usize| -> usize {
            order
                .iter()
                .fold(0usize, |acc, &q| (acc << 1) | ((idx >> (n - 1 - q)) & 1))
        };
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            let nr = map(r);
            for c in 0..d {
                out[nr * d + map(c)] = self.data[r * d + c];
            }
        }
        Ok(DensityMatrix {
            num_qubits: n,
            data: out,
        })
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn bit_positions(&self, targets: &[usize]) -> ([usize; 4], usize) {
        // offsets[l] is the index displacement for local basis state l
        let k = targets.len();
        let mut offsets = [0usize; 4];
        for (l, off) in offsets.iter_mut().enumerate().take(1 << k) {
            for (i, &t) in targets.iter().enumerate() {
                if (l >> (k - 1 - i)) & 1 == 1 {
                    *off |= 1 << (self.num_qubits - 1 - t);
                }
            }
        }
        let mask = offsets[(1 << k) - 1];
        (offsets, mask)
    }

    fn left_multiply(&mut self, u: &Operator, targets: &[usize]) {
        let d = self.dim();
        let ld = u.dim();
        let (offsets, mask) = self.bit_positions(targets);
        let m = u.data();
        let mut buf = [ZERO; 4];
        for base in (0..d).filter(|i| i & mask == 0) {
            for c in 0..d {
                for l in 0..ld {
                    buf[l] = self.data[(base + offsets[l]) * d + c];
                }
                for r in 0..ld {
                    let mut acc = ZERO;
                    for l in 0..ld {
                        acc += m[r * ld + l] * buf[l];
                    }
                    self.data[(base + offsets[r]) * d + c] = acc;
                }
            }
        }
    }

    fn right_multiply_dagger(&mut self, u: &Operator, targets: &[usize]) {
        let d = self.dim();
        let ld = u.dim();
        let (offsets, mask) = self.bit_positions(targets);
        let m = u.data();
        let mut buf = [ZERO; 4];
        for r in 0..d {
            let row = &mut self.data[r * d..(r + 1) * d];
            for base in (0..d).filter(|i| i & mask == 0) {
                for l in 0..ld {
                    buf[l] = row[base + offsets[l]];
                }
                for j in 0..ld {
                    let mut acc = ZERO;
                    for l in 0..ld {
                        acc += buf[l] * m[j * ld + l].conj();
                    }
                    row[base + offsets[j]] = acc;
                }
            }
        }
    }

    fn affine_1q(&mut self, qubit: usize, p_reset: f64, dephase: f64) {
        let d = self.dim();
        let bit = 1usize << (self.num_qubits - 1 - qubit);
        for r in (0..d).filter(|r| r & bit == 0) {
            for c in (0..d).filter(|c| c & bit == 0) {
                let (r1, c1) = (r | bit, c | bit);
                let p11 = self.data[r1 * d + c1];
                self.data[r * d + c] += p11 * p_reset;
                self.data[r1 * d + c1] = p11 * (1.0 - p_reset);
                self.data[r * d + c1] *= dephase;
                self.data[r1 * d + c] *= dephase;
            }
        }
    }

    fn confuse(&mut self, qubit: usize, m: &[[f64; 2]; 2]) {
        // measure in Z, then relabel the outcome according to the confusion rows
        let d = self.dim();
        let bit = 1usize << (self.num_qubits - 1 - qubit);
        for r in (0..d).filter(|r| r & bit == 0) {
            for c in (0..d).filter(|c| c & bit == 0) {
                let (r1, c1) = (r | bit, c | bit);
                let p00 = self.data[r * d + c];
                let p11 = self.data[r1 * d + c1];
                self.data[r * d + c] = p00 * m[0][0] + p11 * m[1][0];
                self.data[r1 * d + c1] = p00 * m[0][1] + p11 * m[1][1];
                self.data[r * d + c1] = ZERO;
                self.data[r1 * d + c] = ZERO;
            }
        }
    }

    fn depolarize(&mut self, targets: &[usize], p: f64) {
        if p == 0.0 {
            return;
        }
        let d = self.dim();
        let (offsets, mask) = self.bit_positions(targets);
        let ld = 1usize << targets.len();
        let inv = 1.0 / ld as f64;
        for rb in (0..d).filter(|i| i & mask == 0) {
            for cb in (0..d).filter(|i| i & mask == 0) {
                let partial: C64 = offsets
                    .iter()
                    .take(ld)
                    .map(|&off| self.data[(rb + off) * d + cb + off])
                    .sum();
                for &ro in offsets.iter().take(ld) {
                    for &co in offsets.iter().take(ld) {
                        let e = &mut self.data[(rb + ro) * d + cb + co];
                        *e *= 1.0 - p;
                        if ro == co {
                            *e += partial * (p * inv);
                        }
                    }
                }
            }
        }
    }
}
