use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Output nonlinearity of the head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the output value.
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

/// `act(W2·ReLU(W1·f + b1) + b2)` with a hidden layer three times the input width.
///
/// Weights live in one flat vector `[W1 (row-major, 3m×m) | b1 | W2 | b2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalHead {
    inputs: usize,
    hidden: usize,
    activation: Activation,
    weights: Vec<f64>,
}

/// Hidden activations kept from a forward pass.
#[derive(Clone, Debug)]
pub struct HeadCache {
    pre: Vec<f64>,
    hidden: Vec<f64>,
    pub logit: f64,
    pub output: f64,
}

impl ClassicalHead {
    pub fn zeros(inputs: usize, activation: Activation) -> Self {
        let hidden = 3 * inputs;
        Self {
            inputs,
            hidden,
            activation,
            weights: vec![0.0; hidden * inputs + hidden + hidden + 1],
        }
    }

    /// Uniform(±1/√fan_in) for weights and biases of each layer.
    pub fn random<R: Rng + ?Sized>(inputs: usize, activation: Activation, rng: &mut R) -> Self {
        let mut head = Self::zeros(inputs, activation);
        let (h, m) = (head.hidden, head.inputs);
        let b1 = 1.0 / (m as f64).sqrt();
        let b2 = 1.0 / (h as f64).sqrt();
        for (i, w) in head.weights.iter_mut().enumerate() {
            let bound = if i < h * m + h { b1 } else { b2 };
            *w = rng.gen_range(-bound..bound);
        }
        head
    }

    pub fn from_weights(inputs: usize, activation: Activation, weights: Vec<f64>) -> Result<Self> {
        let mut head = Self::zeros(inputs, activation);
        if weights.len() != head.weights.len() {
            return Err(Error::Dimension(format!(
                "head with {inputs} inputs needs {} weights, got {}",
                head.weights.len(),
                weights.len()
            )));
        }
        head.weights = weights;
        Ok(head)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn num_weights(&self) -> usize {
        self.weights.len()
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let w1 = self.hidden * self.inputs;
        (w1, w1 + self.hidden, w1 + 2 * self.hidden)
    }

    pub fn w1(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.inputs + col]
    }

    pub fn forward(&self, f: &[f64]) -> Result<HeadCache> {
        if f.len() != self.inputs {
            return Err(Error::Dimension(format!(
                "head expects {} features, got {}",
                self.inputs,
                f.len()
            )));
        }
        let (ob1, ow2, ob2) = self.offsets();
        let mut pre = vec![0.0; self.hidden];
        let mut hidden = vec![0.0; self.hidden];
        let mut logit = self.weights[ob2];
        for j in 0..self.hidden {
            let row = &self.weights[j * self.inputs..(j + 1) * self.inputs];
            let a = self.weights[ob1 + j] + row.iter().zip(f).map(|(w, x)| w * x).sum::<f64>();
            pre[j] = a;
            hidden[j] = a.max(0.0);
            logit += self.weights[ow2 + j] * hidden[j];
        }
        Ok(HeadCache {
            pre,
            hidden,
            logit,
            output: self.activation.apply(logit),
        })
    }

    /// Pre-activation output.
    pub fn logit(&self, f: &[f64]) -> Result<f64> {
        Ok(self.forward(f)?.logit)
    }

    pub fn output(&self, f: &[f64]) -> Result<f64> {
        Ok(self.forward(f)?.output)
    }

    /// Gradients of the loss with respect to the weights (same layout as
    /// [`weights`](Self::weights)) and to the input features, given
    /// `dL/d(logit)`.
    pub fn backward(&self, f: &[f64], cache: &HeadCache, d_logit: f64) -> (Vec<f64>, Vec<f64>) {
        let (ob1, ow2, ob2) = self.offsets();
        let mut grad = vec![0.0; self.weights.len()];
        let mut d_f = vec![0.0; self.inputs];
        grad[ob2] = d_logit;
        for j in 0..self.hidden {
            grad[ow2 + j] = d_logit * cache.hidden[j];
            if cache.pre[j] <= 0.0 {
                continue;
            }
            let d_pre = d_logit * self.weights[ow2 + j];
            grad[ob1 + j] = d_pre;
            for i in 0..self.inputs {
                grad[j * self.inputs + i] = d_pre * f[i];
                d_f[i] += d_pre * self.weights[j * self.inputs + i];
            }
        }
        (grad, d_f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_head_outputs() {
        let s = ClassicalHead::zeros(3, Activation::Sigmoid);
        assert_eq!(s.output(&[0.4, -1.0, 2.0]).unwrap(), 0.5);
        let t = ClassicalHead::zeros(3, Activation::Tanh);
        assert_eq!(t.output(&[0.4, -1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(s.num_weights(), 9 * 3 + 9 + 9 + 1);
        assert!(s.forward(&[0.0]).is_err());
    }

    #[test]
    fn init_respects_fan_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let h = ClassicalHead::random(4, Activation::Sigmoid, &mut rng);
        let (ob1, ow2, _) = h.offsets();
        assert!(h.weights()[..ow2].iter().all(|w| w.abs() <= 0.5));
        assert!(h.weights()[ow2..]
            .iter()
            .all(|w| w.abs() <= 1.0 / 12f64.sqrt()));
        assert!(h.weights()[..ob1].iter().any(|w| w.abs() > 0.1));
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = ClassicalHead::random(3, Activation::Sigmoid, &mut rng);
        let f = [0.2, -0.3, 0.9];
        let cache = h.forward(&f).unwrap();
        let (g, df) = h.backward(&f, &cache, 0.0);
        assert!(g.iter().chain(&df).all(|v| *v == 0.0));
    }

    #[test]
    fn linear_region_input_derivative() {
        // single feature, all hidden units active
        let mut h = ClassicalHead::zeros(1, Activation::Sigmoid);
        h.weights_mut()
            .copy_from_slice(&[0.5, 0.2, 0.9, 1.0, 1.0, 1.0, 0.3, -0.7, 0.4, 0.1]);
        let f = [0.6];
        let c = h.forward(&f).unwrap();
        let sig = c.output * (1.0 - c.output);
        let expected = sig * (0.3 * 0.5 - 0.7 * 0.2 + 0.4 * 0.9);
        let (_, df) = h.backward(&f, &c, sig);
        assert!((df[0] - expected).abs() < 1e-12);
        let eps = 1e-6;
        let fd = (h.output(&[0.6 + eps]).unwrap() - h.output(&[0.6 - eps]).unwrap()) / (2.0 * eps);
        assert!((fd - expected).abs() < 1e-6);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for act in [Activation::Sigmoid, Activation::Tanh] {
            let h = ClassicalHead::random(4, act, &mut rng);
            let f: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c = h.forward(&f).unwrap();
            let d_logit = act.derivative_from_output(c.output);
            let (g, df) = h.backward(&f, &c, d_logit);
            let eps = 1e-6;
            for (k, &gk) in g.iter().enumerate() {
                let mut p = h.clone();
                p.weights_mut()[k] += eps;
                let up = p.output(&f).unwrap();
                p.weights_mut()[k] -= 2.0 * eps;
                let down = p.output(&f).unwrap();
                let fd = (up - down) / (2.0 * eps);
                let rel = (fd - gk).abs() / fd.abs().max(1e-3);
                assert!(rel < 1e-5, "{act:?} weight {k}: {fd} vs {gk}");
            }
            for i in 0..4 {
                let mut x = f.clone();
                x[i] += eps;
                let up = h.output(&x).unwrap();
                x[i] -= 2.0 * eps;
                let fd = (up - h.output(&x).unwrap()) / (2.0 * eps);
                assert!((fd - df[i]).abs() / fd.abs().max(1e-3) < 1e-5);
            }
        }
    }
}
