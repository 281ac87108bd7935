//! Dense density-matrix simulation for up to [`MAX_QUBITS`] qubits.
//!
//! Qubit 0 is the most significant bit of a basis-state index.

mod channel;
mod density;
mod factored;
mod gate;
mod operator;
mod shots;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use channel::ChannelAction;
pub use density::DensityMatrix;
pub use factored::{FactoredState, MAX_FACTORED_QUBITS};
pub use gate::{GateKind, GateUnitary};
pub use num_complex::Complex64 as C64;
pub use operator::Operator;
pub use shots::shot_estimate;

use crate::{Error, Result};

pub const MAX_QUBITS: usize = 12;
/// Tolerance for Hermiticity, trace and completeness checks.
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Slack allowed on the smallest eigenvalue.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Operator {
        use num_complex::Complex64 as C64;
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::X => Operator::from_rows(2, vec![z, one, one, z]),
            Pauli::Y => Operator::from_rows(2, vec![z, -i, i, z]),
            Pauli::Z => Operator::from_rows(2, vec![one, z, z, -one]),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

impl FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Pauli::X),
            "Y" | "y" => Ok(Pauli::Y),
            "Z" | "z" => Ok(Pauli::Z),
            other => Err(Error::Domain(format!("unknown Pauli basis '{other}'"))),
        }
    }
}

pub(crate) fn check_targets(targets: &[usize], num_qubits: usize) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= num_qubits {
            return Err(Error::QubitIndex {
                index: t,
                num_qubits,
            });
        }
        if targets[..i].contains(&t) {
            return Err(Error::Domain(format!("repeated target qubit {t}")));
        }
    }
    Ok(())
}
