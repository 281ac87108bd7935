use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::structure::MeasurementPlan;
use crate::qsim::{shot_estimate, ChannelAction, FactoredState, GateKind, Operator, Pauli};
use crate::transpile::{Angle, PhysicalCircuit, PhysicalOp, Symbol};
use crate::{Error, Result};

/// How expectation values are turned into features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecMode {
    Exact,
    Shots { shots: u32, seed: u64 },
}

impl ExecMode {
    pub fn shots(self) -> Option<u32> {
        match self {
            ExecMode::Exact => None,
            ExecMode::Shots { shots, .. } => Some(shots),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecOptions {
    /// Apply the noise of the X/Y basis-change rotation before reading those bases.
    pub basis_rotation_noise: bool,
    /// Trace qubits out once no later operation touches them.
    pub discard_dead_qubits: bool,
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self {
            basis_rotation_noise: false,
            discard_dead_qubits: true,
        }
    }
}

#[derive(Clone, Debug)]
enum Step {
    Fixed {
        op: Operator,
        qubits: Vec<usize>,
    },
    Rotation {
        kind: GateKind,
        angle: Angle,
        qubits: Vec<usize>,
    },
    Channel {
        channel: ChannelAction,
        qubits: Vec<usize>,
    },
    Measure {
        offset: usize,
        qubit: usize,
        bases: Vec<Pauli>,
        readout: Option<ChannelAction>,
        basis_noise: Vec<ChannelAction>,
    },
    Discard {
        qubit: usize,
    },
}

/// Feature values and their derivatives with respect to each parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureGradient {
    pub features: Vec<f64>,
    /// `jacobian[k][i] = ∂featureᵢ/∂p{k}`.
    pub jacobian: Vec<Vec<f64>>,
}

/// A physical circuit compiled for repeated execution with different bindings.
///
/// Only the qubits the circuit touches are simulated, as a factored state.
#[derive(Clone, Debug)]
pub struct Program {
    steps: Vec<Step>,
    num_qubits: usize,
    feature_len: usize,
    num_params: usize,
    num_features: usize,
    options: ExecOptions,
}

impl Program {
    pub fn compile(circuit: &PhysicalCircuit, options: ExecOptions) -> Result<Program> {
        let active = circuit.active_qubits();
        let mut local = vec![usize::MAX; circuit.num_physical()];
        for (i, &q) in active.iter().enumerate() {
            local[q] = i;
        }
        let map = |qs: &[usize]| qs.iter().map(|&q| local[q]).collect::<Vec<_>>();

        let mut sites: Vec<(usize, usize)> = circuit
            .measures()
            .map(|m| (m.site, m.bases.len()))
            .collect();
        sites.sort_unstable();
        for (i, s) in sites.iter().enumerate() {
            if s.0 != i {
                return Err(Error::Dimension(format!(
                    "readout sites are not numbered 0..{}",
                    sites.len()
                )));
            }
        }
        let mut offsets = Vec::with_capacity(sites.len());
        let mut acc = 0;
        for s in &sites {
            offsets.push(acc);
            acc += s.1;
        }

        let mut last_use = vec![usize::MAX; active.len()];
        for (i, op) in circuit.ops().iter().enumerate() {
            for &q in op.qubits() {
                last_use[local[q]] = i;
            }
        }

        let (mut num_params, mut num_features) = (0, 0);
        let mut steps = Vec::new();
        for (i, op) in circuit.ops().iter().enumerate() {
            match op {
                PhysicalOp::Gate(g) => {
                    let qubits = map(&g.inst.qubits);
                    match g.inst.angle() {
                        Some(a) if !a.is_constant() => {
                            for s in a.symbols() {
                                match s {
                                    Symbol::Param(k) => num_params = num_params.max(k + 1),
                                    Symbol::Feature(x) => num_features = num_features.max(x + 1),
                                }
                            }
                            steps.push(Step::Rotation {
                                kind: g.inst.kind,
                                angle: a.clone(),
                                qubits,
                            });
                        }
                        _ => steps.push(Step::Fixed {
                            op: g.inst.matrix(&[], &[])?,
                            qubits,
                        }),
                    }
                    for (ch, qs) in &g.noise {
                        steps.push(Step::Channel {
                            channel: ch.clone(),
                            qubits: map(qs),
                        });
                    }
                }
                PhysicalOp::Measure(m) => steps.push(Step::Measure {
                    offset: offsets[m.site],
                    qubit: local[m.qubit],
                    bases: m.bases.clone(),
                    readout: m.readout.clone(),
                    basis_noise: if options.basis_rotation_noise {
                        m.basis_change_noise.clone()
                    } else {
                        Vec::new()
                    },
                }),
            }
            if options.discard_dead_qubits {
                for &q in op.qubits() {
                    if last_use[local[q]] == i {
                        steps.push(Step::Discard { qubit: local[q] });
                    }
                }
            }
        }
        Ok(Program {
            steps,
            num_qubits: active.len(),
            feature_len: acc,
            num_params,
            num_features,
            options,
        })
    }

    pub fn feature_len(&self) -> usize {
        self.feature_len
    }

    /// Number of parameters referenced (highest index + 1).
    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn num_inputs(&self) -> usize {
        self.num_features
    }

    pub fn options(&self) -> ExecOptions {
        self.options
    }

    /// Number of rotations whose angle depends on a trainable parameter.
    pub fn num_shift_sites(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, Step::Rotation { angle, .. } if has_param(angle)))
            .count()
    }

    fn check_bindings(&self, params: &[f64], inputs: &[f64]) -> Result<()> {
        if params.len() < self.num_params || inputs.len() < self.num_features {
            return Err(Error::Dimension(format!(
                "program needs {} parameters and {} inputs, got {} and {}",
                self.num_params,
                self.num_features,
                params.len(),
                inputs.len()
            )));
        }
        Ok(())
    }

    /// Feature vector in site order.
    pub fn run<R: Rng + ?Sized>(
        &self,
        params: &[f64],
        inputs: &[f64],
        shots: Option<u32>,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        self.check_bindings(params, inputs)?;
        let mut state = FactoredState::new_zero_state(self.num_qubits)?;
        let mut out = vec![f64::NAN; self.feature_len];
        let mut ctx = Run {
            params,
            inputs,
            shots,
            out: &mut out,
        };
        ctx.execute(&self.steps, 0, &mut state, None, None, rng)?;
        Ok(out)
    }

    /// Features plus parameter-shift derivatives.
    ///
    /// The forward pass stores the state in front of every parameterized
    /// rotation; each shifted evaluation restarts from there. Shifted runs
    /// draw fresh shot noise when `shots` is set.
    pub fn run_with_gradient<R: Rng + ?Sized>(
        &self,
        params: &[f64],
        inputs: &[f64],
        shots: Option<u32>,
        rng: &mut R,
    ) -> Result<FeatureGradient> {
        self.check_bindings(params, inputs)?;
        let mut state = FactoredState::new_zero_state(self.num_qubits)?;
        let mut features = vec![f64::NAN; self.feature_len];
        let mut checkpoints = Vec::new();
        Run {
            params,
            inputs,
            shots,
            out: &mut features,
        }
        .execute(
            &self.steps,
            0,
            &mut state,
            None,
            Some(&mut checkpoints),
            rng,
        )?;

        let mut jacobian = vec![vec![0.0; self.feature_len]; params.len()];
        let half_pi = std::f64::consts::FRAC_PI_2;
        let mut plus = vec![f64::NAN; self.feature_len];
        let mut minus = vec![f64::NAN; self.feature_len];
        for (j, snapshot) in checkpoints {
            for (buf, delta) in [(&mut plus, half_pi), (&mut minus, -half_pi)] {
                buf.fill(f64::NAN);
                let mut s = snapshot.clone();
                Run {
                    params,
                    inputs,
                    shots,
                    out: buf,
                }
                .execute(&self.steps, j, &mut s, Some(delta), None, rng)?;
            }
            let Step::Rotation { angle, .. } = &self.steps[j] else {
                unreachable!("checkpoints are taken at rotations");
            };
            for &(sym, coeff) in &angle.terms {
                let Symbol::Param(k) = sym else { continue };
                for i in 0..self.feature_len {
                    // sites read before the shifted rotation are unaffected
                    if !plus[i].is_nan() {
                        jacobian[k][i] += coeff * (plus[i] - minus[i]) / 2.0;
                    }
                }
            }
        }
        Ok(FeatureGradient { features, jacobian })
    }
}

fn has_param(angle: &Angle) -> bool {
    angle.symbols().any(|s| matches!(s, Symbol::Param(_)))
}

struct Run<'a> {
    params: &'a [f64],
    inputs: &'a [f64],
    shots: Option<u32>,
    out: &'a mut [f64],
}

impl Run<'_> {
    /// Executes `steps[start..]`. A shift applies to the rotation at `start`.
    fn execute<R: Rng + ?Sized>(
        &mut self,
        steps: &[Step],
        start: usize,
        state: &mut FactoredState,
        shift: Option<f64>,
        mut checkpoints: Option<&mut Vec<(usize, FactoredState)>>,
        rng: &mut R,
    ) -> Result<()> {
        for (j, step) in steps.iter().enumerate().skip(start) {
            match step {
                Step::Fixed { op, qubits } => state.apply_unitary(op, qubits)?,
                Step::Rotation {
                    kind,
                    angle,
                    qubits,
                } => {
                    if let Some(cp) = checkpoints.as_deref_mut() {
                        if has_param(angle) {
                            cp.push((j, state.clone()));
                        }
                    }
                    let mut theta = angle.eval(self.params, self.inputs)?;
                    if j == start {
                        theta += shift.unwrap_or(0.0);
                    }
                    state.apply_unitary(&kind.matrix(theta), qubits)?;
                }
                Step::Channel { channel, qubits } => state.apply_channel(channel, qubits)?,
                Step::Measure {
                    offset,
                    qubit,
                    bases,
                    readout,
                    basis_noise,
                } => {
                    let reduced = if basis_noise.is_empty() {
                        None
                    } else {
                        let mut r = state.reduced_state(*qubit)?;
                        for ch in basis_noise {
                            r.apply_channel(ch, &[0])?;
                        }
                        Some(r)
                    };
                    for (i, &b) in bases.iter().enumerate() {
                        let mut e = match (&reduced, b) {
                            (Some(r), Pauli::X | Pauli::Y) => r.expectation(b, 0)?,
                            _ => state.expectation(b, *qubit)?,
                        };
                        if let Some(ch) = readout {
                            e = ch.confuse_expectation(e);
                        }
                        self.out[offset + i] = shot_estimate(e.clamp(-1.0, 1.0), self.shots, rng)?;
                    }
                }
                Step::Discard { qubit } => state.trace_out(*qubit)?,
            }
        }
        Ok(())
    }
}

/// Runs `circuit` once and returns the features described by `plan`.
pub fn extract_features(
    circuit: &PhysicalCircuit,
    plan: &MeasurementPlan,
    params: &[f64],
    inputs: &[f64],
    mode: ExecMode,
) -> Result<Vec<f64>> {
    let measured: Vec<_> = circuit.measures().collect();
    if measured.len() != plan.num_sites()
        || measured
            .iter()
            .any(|m| plan.sites.get(m.site).map(|s| &s.bases) != Some(&m.bases))
    {
        return Err(Error::Dimension(
            "circuit readouts do not match the measurement plan".into(),
        ));
    }
    let program = Program::compile(circuit, ExecOptions::default())?;
    let seed = match mode {
        ExecMode::Exact => 0,
        ExecMode::Shots { seed, .. } => seed,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    program.run(params, inputs, mode.shots(), &mut rng)
}
