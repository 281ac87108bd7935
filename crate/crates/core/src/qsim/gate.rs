use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::operator::Operator;
use crate::{Error, Result};

/// Gate symbols understood by the simulator and transpiler.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Sx,
    X,
    H,
    Cx,
    Ecr,
    Swap,
    Crz,
    Crx,
}

impl GateKind {
    pub const ALL: [GateKind; 11] = [
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Sx,
        GateKind::X,
        GateKind::H,
        GateKind::Cx,
        GateKind::Ecr,
        GateKind::Swap,
        GateKind::Crz,
        GateKind::Crx,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Rx
            | GateKind::Ry
            | GateKind::Rz
            | GateKind::Sx
            | GateKind::X
            | GateKind::H => 1,
            GateKind::Cx | GateKind::Ecr | GateKind::Swap | GateKind::Crz | GateKind::Crx => 2,
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Crz | GateKind::Crx => 1,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Sx => "sx",
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::Cx => "cx",
            GateKind::Ecr => "ecr",
            GateKind::Swap => "swap",
            GateKind::Crz => "crz",
            GateKind::Crx => "crx",
        }
    }

    /// Unitary matrix for a concrete parameter value (ignored by fixed gates).
    pub fn matrix(self, theta: f64) -> Operator {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        match self {
            GateKind::Rx => Operator::from_rows(
                2,
                vec![
                    C64::new(c, 0.0),
                    C64::new(0.0, -s),
                    C64::new(0.0, -s),
                    C64::new(c, 0.0),
                ],
            ),
            GateKind::Ry => Operator::from_rows(
                2,
                vec![
                    C64::new(c, 0.0),
                    C64::new(-s, 0.0),
                    C64::new(s, 0.0),
                    C64::new(c, 0.0),
                ],
            ),
            GateKind::Rz => Operator::from_rows(
                2,
                vec![
                    C64::from_polar(1.0, -theta / 2.0),
                    z,
                    z,
                    C64::from_polar(1.0, theta / 2.0),
                ],
            ),
            GateKind::Sx => Operator::from_rows(
                2,
                vec![
                    C64::new(0.5, 0.5),
                    C64::new(0.5, -0.5),
                    C64::new(0.5, -0.5),
                    C64::new(0.5, 0.5),
                ],
            ),
            GateKind::X => Operator::from_rows(2, vec![z, one, one, z]),
            GateKind::H => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                Operator::from_rows(2, vec![h, h, h, -h])
            }
            GateKind::Cx => Operator::from_rows(
                4,
                vec![
                    one, z, z, z, //
                    z, one, z, z, //
                    z, z, z, one, //
                    z, z, one, z,
                ],
            ),
            GateKind::Ecr => {
                // (X⊗I − Y⊗X)/√2 with the first target as the more significant qubit.
                let h = FRAC_1_SQRT_2;
                let r = C64::new(h, 0.0);
                let ii = C64::new(0.0, h);
                Operator::from_rows(
                    4,
                    vec![
                        z, z, r, ii, //
                        z, z, ii, r, //
                        r, -ii, z, z, //
                        -ii, r, z, z,
                    ],
                )
            }
            GateKind::Swap => Operator::from_rows(
                4,
                vec![
                    one, z, z, z, //
                    z, z, one, z, //
                    z, one, z, z, //
                    z, z, z, one,
                ],
            ),
            GateKind::Crz | GateKind::Crx => {
                let inner = if self == GateKind::Crz {
                    GateKind::Rz.matrix(theta)
                } else {
                    GateKind::Rx.matrix(theta)
                };
                let mut m = Operator::identity(4);
                for r in 0..2 {
                    for col in 0..2 {
                        m.set(2 + r, 2 + col, inner.get(r, col));
                    }
                }
                m
            }
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.to_ascii_lowercase().as_str() {
            "rx" => GateKind::Rx,
            "ry" => GateKind::Ry,
            "rz" => GateKind::Rz,
            "sx" | "sqrtx" => GateKind::Sx,
            "x" => GateKind::X,
            "h" => GateKind::H,
            "cx" | "cnot" => GateKind::Cx,
            "ecr" => GateKind::Ecr,
            "swap" => GateKind::Swap,
            "crz" => GateKind::Crz,
            "crx" => GateKind::Crx,
            other => return Err(Error::Domain(format!("unknown gate '{other}'"))),
        };
        Ok(kind)
    }
}

/// A gate symbol bound to concrete angles.
#[derive(Clone, Debug, PartialEq)]
pub struct GateUnitary {
    kind: GateKind,
    params: Vec<f64>,
}

impl GateUnitary {
    pub fn new(kind: GateKind, params: Vec<f64>) -> Result<Self> {
        if params.len() != kind.num_params() {
            return Err(Error::Domain(format!(
                "gate {kind} takes {} parameters, got {}",
                kind.num_params(),
                params.len()
            )));
        }
        Ok(Self { kind, params })
    }

    pub fn fixed(kind: GateKind) -> Self {
        Self::new(kind, vec![]).expect("gate takes parameters")
    }

    pub fn rotation(kind: GateKind, theta: f64) -> Self {
        Self::new(kind, vec![theta]).expect("gate is not a rotation")
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn arity(&self) -> usize {
        self.kind.arity()
    }

    pub fn matrix(&self) -> Operator {
        self.kind
            .matrix(self.params.first().copied().unwrap_or(0.0))
    }
}
