use num_complex::Complex64 as C64;

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<C64>,
}

impl Operator {
    pub fn from_rows(dim: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), dim * dim, "operator data must be dim x dim");
        Self { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C64::new(1.0, 0.0);
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                data[c * d + r] = self.data[r * d + c].conj();
            }
        }
        Self { dim: d, data }
    }

    pub fn matmul(&self, rhs: &Operator) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..d {
                    data[r * d + c] += a * rhs.data[k * d + c];
                }
            }
        }
        Self { dim: d, data }
    }

    /// Tensor product `self ⊗ rhs`; `self` occupies the more significant bits.
    pub fn kron(&self, rhs: &Operator) -> Self {
        let (a, b) = (self.dim, rhs.dim);
        let d = a * b;
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for r1 in 0..a {
            for c1 in 0..a {
                let x = self.data[r1 * a + c1];
                for r2 in 0..b {
                    for c2 in 0..b {
                        data[(r1 * b + r2) * d + c1 * b + c2] = x * rhs.data[r2 * b + c2];
                    }
                }
            }
        }
        Self { dim: d, data }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Operator) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn max_abs_diff(&self, rhs: &Operator) -> f64 {
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        self.dagger()
            .matmul(self)
            .max_abs_diff(&Operator::identity(self.dim))
    }

    /// Distance to `rhs` after removing the best global phase.
    pub fn distance_up_to_phase(&self, rhs: &Operator) -> f64 {
        // phase = <rhs, self> / |<rhs, self>|
        let overlap: C64 = rhs
            .data
            .iter()
            .zip(&self.data)
            .map(|(b, a)| b.conj() * a)
            .sum();
        if overlap.norm() < 1e-300 {
            return f64::INFINITY;
        }
        let phase = overlap / overlap.norm();
        self.max_abs_diff(&rhs.scale(phase))
    }

    /// Embeds an operator acting on `targets` (in order, first = most
    /// significant) into an `n`-qubit space.
    pub fn embed(&self, targets: &[usize], n: usize) -> Self {
        let k = targets.len();
        assert_eq!(1usize << k, self.dim);
        let d = 1usize << n;
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        let local = |idx: usize| -> usize {
            targets
                .iter()
                .fold(0usize, |acc, &q| (acc << 1) | ((idx >> (n - 1 - q)) & 1))
        };
        let mask: usize = targets.iter().map(|&q| 1usize << (n - 1 - q)).sum();
        for r in 0..d {
            for c in 0..d {
                if (r & !mask) != (c & !mask) {
                    continue;
                }
                data[r * d + c] = self.get(local(r), local(c));
            }
        }
        Self { dim: d, data }
    }
}
