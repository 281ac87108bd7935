use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::head::{Activation, ClassicalHead};
use super::loss::LossKind;
use crate::ansatz::{template, ExecOptions, HqcnnSpec, MeasurementPlan, Program, Variant};
use crate::data::Task;
use crate::noise::NoiseProfile;
use crate::transpile::{ideal, transpile, PhysicalCircuit};
use crate::{Error, Result};

pub const DEFAULT_SHOTS: u32 = 256;

/// Where the circuit runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Backend {
    /// Noiseless simulation on an all-to-all register.
    Ideal,
    /// Transpiled onto the profile's coupling map with its noise attached.
    Device { profile: Box<NoiseProfile> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecConfig {
    pub backend: Backend,
    /// `None` reads exact expectation values.
    pub shots: Option<u32>,
    #[serde(default)]
    pub options: ExecOptions,
}

impl ExecConfig {
    pub fn ideal() -> Self {
        Self {
            backend: Backend::Ideal,
            shots: None,
            options: ExecOptions::default(),
        }
    }

    pub fn device(profile: NoiseProfile, shots: Option<u32>) -> Self {
        Self {
            backend: Backend::Device {
                profile: Box::new(profile),
            },
            shots,
            options: ExecOptions::default(),
        }
    }
}

/// Everything needed to rebuild a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub num_qubits: usize,
    pub variant: Variant,
    pub task: Task,
    pub quantum: Vec<f64>,
    pub head: Option<ClassicalHead>,
    pub exec: ExecConfig,
}

/// Result of one differentiable evaluation.
#[derive(Clone, Debug)]
pub struct SampleGradient {
    pub prediction: f64,
    pub loss: f64,
    /// Flat gradient, quantum parameters first.
    pub grad: Vec<f64>,
}

/// Quantum feature extractor followed by the classical head, or the direct
/// readout map for the baseline.
#[derive(Clone, Debug)]
pub struct HybridModel {
    spec: HqcnnSpec,
    plan: MeasurementPlan,
    state: ModelState,
    circuit: PhysicalCircuit,
    program: Program,
}

impl HybridModel {
    /// Random initialization: quantum angles Uniform(−π,π), head Uniform(±1/√fan_in).
    pub fn new(
        num_qubits: usize,
        variant: Variant,
        task: Task,
        exec: ExecConfig,
        seed: u64,
    ) -> Result<Self> {
        let spec = HqcnnSpec::new(num_qubits, variant)?;
        let plan = MeasurementPlan::new(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi = std::f64::consts::PI;
        let quantum = (0..spec.num_params())
            .map(|_| rng.gen_range(-pi..pi))
            .collect();
        let head = variant.has_head().then(|| {
            ClassicalHead::random(plan.feature_len(), Activation::for_task(task), &mut rng)
        });
        Self::from_state(ModelState {
            num_qubits,
            variant,
            task,
            quantum,
            head,
            exec,
        })
    }

    pub fn from_state(state: ModelState) -> Result<Self> {
        let (spec, circuit, plan) = template(state.num_qubits, state.variant)?;
        if state.quantum.len() != spec.num_params() {
            return Err(Error::Dimension(format!(
                "{} quantum parameters for a circuit with {}",
                state.quantum.len(),
                spec.num_params()
            )));
        }
        match (&state.head, state.variant.has_head()) {
            (Some(h), true) => {
                if h.inputs() != plan.feature_len() {
                    return Err(Error::Dimension(format!(
                        "head takes {} inputs but the readout gives {}",
                        h.inputs(),
                        plan.feature_len()
                    )));
                }
                if h.activation() != Activation::for_task(state.task) {
                    return Err(Error::Config(
                        "head activation does not match the task".into(),
                    ));
                }
            }
            (None, false) => {}
            (Some(_), false) => {
                return Err(Error::Config("the baseline has no classical head".into()))
            }
            (None, true) => {
                return Err(Error::Config(format!(
                    "{} needs a classical head",
                    state.variant
                )))
            }
        }
        let physical = match &state.exec.backend {
            Backend::Ideal => ideal(&circuit)?,
            Backend::Device { profile } => transpile(&circuit, profile)?,
        };
        let program = Program::compile(&physical, state.exec.options)?;
        Ok(Self {
            spec,
            plan,
            state,
            circuit: physical,
            program,
        })
    }

    pub fn state(&self) -> &ModelState {
        &self.state
    }

    pub fn spec(&self) -> &HqcnnSpec {
        &self.spec
    }

    pub fn plan(&self) -> &MeasurementPlan {
        &self.plan
    }

    pub fn task(&self) -> Task {
        self.state.task
    }

    pub fn variant(&self) -> Variant {
        self.state.variant
    }

    pub fn head(&self) -> Option<&ClassicalHead> {
        self.state.head.as_ref()
    }

    pub fn quantum_params(&self) -> &[f64] {
        &self.state.quantum
    }

    pub fn circuit(&self) -> &PhysicalCircuit {
        &self.circuit
    }

    pub fn loss_kind(&self) -> LossKind {
        LossKind::for_task(self.state.task)
    }

    pub fn num_params(&self) -> usize {
        self.state.quantum.len()
            + self
                .state
                .head
                .as_ref()
                .map_or(0, ClassicalHead::num_weights)
    }

    /// Flat parameter vector, quantum first.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.state.quantum.clone();
        if let Some(h) = &self.state.head {
            p.extend_from_slice(h.weights());
        }
        p
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::Dimension(format!(
                "model has {} parameters, got {}",
                self.num_params(),
                params.len()
            )));
        }
        let nq = self.state.quantum.len();
        self.state.quantum.copy_from_slice(&params[..nq]);
        if let Some(h) = &mut self.state.head {
            h.weights_mut().copy_from_slice(&params[nq..]);
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.spec.n {
            return Err(Error::Dimension(format!(
                "model encodes {} features, got {}",
                self.spec.n,
                x.len()
            )));
        }
        Ok(x.iter()
            .map(|v| v.clamp(0.0, std::f64::consts::PI))
            .collect())
    }

    /// Measured feature vector for input `x`.
    pub fn features<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let x = self.check_input(x)?;
        self.program
            .run(&self.state.quantum, &x, self.state.exec.shots, rng)
    }

    /// Prediction from a feature vector.
    pub fn predict_from_features(&self, f: &[f64]) -> Result<f64> {
        match &self.state.head {
            Some(h) => h.output(f),
            None => Ok(self.readout_map(f)?.0),
        }
    }

    /// Baseline prediction and its derivative in the final ⟨Z⟩.
    fn readout_map(&self, f: &[f64]) -> Result<(f64, f64)> {
        let z = *f
            .first()
            .ok_or_else(|| Error::Dimension("empty feature vector".into()))?;
        Ok(match self.state.task {
            Task::Classification => ((1.0 - z) / 2.0, -0.5),
            Task::Regression => (z, 1.0),
        })
    }

    pub fn forward<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<f64> {
        let f = self.features(x, rng)?;
        self.predict_from_features(&f)
    }

    /// `Σᵢ upstreamᵢ · ∂fᵢ/∂θ_k` by the parameter-shift rule.
    pub fn quantum_grad<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        upstream: &[f64],
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let x = self.check_input(x)?;
        let fg =
            self.program
                .run_with_gradient(&self.state.quantum, &x, self.state.exec.shots, rng)?;
        if upstream.len() != fg.features.len() {
            return Err(Error::Dimension(format!(
                "{} upstream values for {} features",
                upstream.len(),
                fg.features.len()
            )));
        }
        Ok(contract(&fg.jacobian, upstream, self.state.quantum.len()))
    }

    /// Loss at `(x, y)` and its gradient over all parameters.
    pub fn sample_gradient<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        y: f64,
        rng: &mut R,
    ) -> Result<SampleGradient> {
        let x = self.check_input(x)?;
        let loss = self.loss_kind();
        let fg =
            self.program
                .run_with_gradient(&self.state.quantum, &x, self.state.exec.shots, rng)?;
        let f = &fg.features;
        let nq = self.state.quantum.len();
        let (prediction, d_f, head_grad) = match &self.state.head {
            Some(h) => {
                let cache = h.forward(f)?;
                let d_logit = loss.derivative(cache.output, y)
                    * h.activation().derivative_from_output(cache.output);
                let (g, d_f) = h.backward(f, &cache, d_logit);
                (cache.output, d_f, g)
            }
            None => {
                let (p, dp) = self.readout_map(f)?;
                let mut d_f = vec![0.0; f.len()];
                d_f[0] = loss.derivative(p, y) * dp;
                (p, d_f, Vec::new())
            }
        };
        let mut grad = contract(&fg.jacobian, &d_f, nq);
        grad.extend(head_grad);
        Ok(SampleGradient {
            prediction,
            loss: loss.value(prediction, y),
            grad,
        })
    }
}

fn contract(jacobian: &[Vec<f64>], upstream: &[f64], num_params: usize) -> Vec<f64> {
    (0..num_params)
        .map(|k| jacobian[k].iter().zip(upstream).map(|(j, u)| j * u).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::tests_support::line_device;

    fn model(n: usize, variant: Variant, task: Task, seed: u64) -> HybridModel {
        HybridModel::new(n, variant, task, ExecConfig::ideal(), seed).unwrap()
    }

    #[test]
    fn zero_head_predictions() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (task, want) in [(Task::Classification, 0.5), (Task::Regression, 0.0)] {
            let mut m = model(4, Variant::Em, task, 1);
            let mut p = m.params();
            let nq = m.quantum_params().len();
            p[nq..].iter_mut().for_each(|w| *w = 0.0);
            m.set_params(&p).unwrap();
            assert_eq!(m.forward(&[0.3, 1.0, 2.0, 0.1], &mut rng).unwrap(), want);
        }
    }

    #[test]
    fn baseline_all_zero_reads_class_zero() {
        let mut m = model(4, Variant::Baseline, Task::Classification, 2);
        assert!(m.head().is_none());
        let zeros = vec![0.0; m.num_params()];
        m.set_params(&zeros).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(m.forward(&[0.0; 4], &mut rng).unwrap().abs() < 1e-12);
        assert!(m.forward(&[0.0; 3], &mut rng).is_err());
    }

    #[test]
    fn head_width_follows_the_plan() {
        let m = model(8, Variant::Em, Task::Classification, 0);
        assert_eq!(m.head().unwrap().inputs(), 3 * m.plan().num_sites());
        let mut bad = m.state().clone();
        bad.head = None;
        assert!(HybridModel::from_state(bad).is_err());
        let restored = HybridModel::from_state(m.state().clone()).unwrap();
        assert_eq!(restored.params(), m.params());
    }

    #[test]
    fn quantum_grad_matches_finite_differences() {
        let m = model(4, Variant::Ez, Task::Classification, 3);
        let x = [0.4, 2.1, 1.3, 0.7];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let nf = m.plan().feature_len();
        let upstream: Vec<f64> = (0..nf).map(|i| 0.3 + i as f64).collect();
        let g = m.quantum_grad(&x, &upstream, &mut rng).unwrap();
        let h = 1e-5;
        for k in 0..m.quantum_params().len() {
            let mut p = m.clone();
            let mut v = p.params();
            v[k] += h;
            p.set_params(&v).unwrap();
            let up = p.features(&x, &mut rng).unwrap();
            v[k] -= 2.0 * h;
            p.set_params(&v).unwrap();
            let down = p.features(&x, &mut rng).unwrap();
            let fd: f64 = (0..nf)
                .map(|i| upstream[i] * (up[i] - down[i]) / (2.0 * h))
                .sum();
            assert!((fd - g[k]).abs() < 1e-6, "param {k}: {fd} vs {}", g[k]);
        }
    }

    fn joint_check(m: &HybridModel, x: &[f64], y: f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sg = m.sample_gradient(x, y, &mut rng).unwrap();
        let loss = |p: &[f64]| {
            let mut c = m.clone();
            c.set_params(p).unwrap();
            let pred = c.forward(x, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
            c.loss_kind().value(pred, y)
        };
        let base = m.params();
        let scale = sg.grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        let h = 1e-5;
        for k in 0..base.len() {
            let mut p = base.clone();
            p[k] += h;
            let up = loss(&p);
            p[k] -= 2.0 * h;
            let fd = (up - loss(&p)) / (2.0 * h);
            let rel = (fd - sg.grad[k]).abs() / fd.abs().max(1e-2 * scale);
            assert!(rel < 1e-4, "param {k}: {fd} vs {}", sg.grad[k]);
        }
    }

    #[test]
    fn joint_gradient_matches_finite_differences() {
        for (variant, task, seed) in [
            (Variant::Ez, Task::Classification, 4),
            (Variant::Em, Task::Regression, 5),
            (Variant::Baseline, Task::Classification, 6),
            (Variant::Baseline, Task::Regression, 7),
        ] {
            let m = model(4, variant, task, seed);
            let y = if task == Task::Classification {
                1.0
            } else {
                -0.4
            };
            joint_check(&m, &[0.2, 1.9, 2.8, 1.1], y);
        }
    }

    #[test]
    fn noisy_device_joint_gradient() {
        let profile = line_device(4);
        let m = HybridModel::new(
            4,
            Variant::Em,
            Task::Classification,
            ExecConfig::device(profile, None),
            8,
        )
        .unwrap();
        assert!(!m.circuit().is_noiseless());
        joint_check(&m, &[1.0, 0.5, 2.0, 3.0], 0.0);
    }

    #[test]
    fn prediction_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let profile = line_device(4);
        for variant in [Variant::Baseline, Variant::Ez, Variant::Em] {
            let m = HybridModel::new(
                4,
                variant,
                Task::Classification,
                ExecConfig::device(profile.clone(), Some(DEFAULT_SHOTS)),
                10,
            )
            .unwrap();
            for _ in 0..5 {
                let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..3.1)).collect();
                let p = m.forward(&x, &mut rng).unwrap();
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }
}
