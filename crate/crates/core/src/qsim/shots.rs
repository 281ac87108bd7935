use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::{Error, Result};

const CLAMP_TOL: f64 = 1e-6;

/// Finite-shot estimate of a ±1-valued observable, or the exact value when
/// `shots` is `None`.
pub fn shot_estimate<R: Rng + ?Sized>(exact: f64, shots: Option<u32>, rng: &mut R) -> Result<f64> {
    if !exact.is_finite() || exact.abs() > 1.0 + CLAMP_TOL {
        return Err(Error::Domain(format!(
            "expectation {exact} outside [-1, 1]"
        )));
    }
    let exact = exact.clamp(-1.0, 1.0);
    let Some(shots) = shots else {
        return Ok(exact);
    };
    if shots == 0 {
        return Err(Error::Domain("shot count must be at least 1".into()));
    }
    let p = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
    let k = Binomial::new(u64::from(shots), p)
        .map_err(|e| Error::Domain(e.to_string()))?
        .sample(rng);
    Ok(2.0 * k as f64 / f64::from(shots) - 1.0)
}
