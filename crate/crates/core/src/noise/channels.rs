use super::calibration::NoiseProfile;
use crate::qsim::{ChannelAction, GateKind};
use crate::{Error, Result};

/// Zero-temperature amplitude and phase damping over `duration_ns`.
pub fn thermal_relaxation_action(
    t1_us: f64,
    t2_us: f64,
    duration_ns: f64,
) -> Result<ChannelAction> {
    if !(t1_us > 0.0) || !(t2_us > 0.0) || t2_us > 2.0 * t1_us {
        return Err(Error::InvalidChannel(format!(
            "thermal relaxation needs 0 < t2 <= 2·t1, got t1={t1_us}, t2={t2_us}"
        )));
    }
    if !(duration_ns >= 0.0) {
        return Err(Error::InvalidChannel(format!(
            "negative duration {duration_ns}"
        )));
    }
    let t_us = duration_ns * 1e-3;
    let p_reset = -(-t_us / t1_us).exp_m1();
    let dephase = (-t_us / t2_us).exp();
    // t2 ≤ 2·t1 gives dephase ≤ sqrt(1 − p_reset) up to rounding
    ChannelAction::affine_1q(p_reset, dephase.min((1.0 - p_reset).sqrt()))
}

pub fn depolarizing_action(p: f64, arity: usize) -> Result<ChannelAction> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidChannel(format!(
            "depolarizing probability {p}"
        )));
    }
    ChannelAction::depolarizing(p, arity)
}

/// `[[P(0|0), P(1|0)], [P(0|1), P(1|1)]]`.
pub fn readout_confusion(p01: f64, p10: f64) -> Result<[[f64; 2]; 2]> {
    for p in [p01, p10] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("readout flip probability {p}")));
        }
    }
    Ok([[1.0 - p10, p10], [p01, 1.0 - p01]])
}

/// Maps true outcome probabilities `[P(0), P(1)]` to observed ones.
pub fn apply_confusion(confusion: &[[f64; 2]; 2], probs: [f64; 2]) -> Result<[f64; 2]> {
    if probs.iter().any(|p| !(-1e-12..=1.0 + 1e-12).contains(p))
        || (probs[0] + probs[1] - 1.0).abs() > 1e-9
    {
        return Err(Error::Domain(format!("{probs:?} is not a distribution")));
    }
    Ok([
        probs[0] * confusion[0][0] + probs[1] * confusion[1][0],
        probs[0] * confusion[0][1] + probs[1] * confusion[1][1],
    ])
}

/// Process (entanglement) fidelity `Σ|Tr Kᵢ|²/d²` of a channel.
pub fn process_fidelity(channel: &ChannelAction) -> f64 {
    let ops = channel.kraus_ops();
    let d = ops[0].dim() as f64;
    ops.iter().map(|k| k.trace().norm_sqr()).sum::<f64>() / (d * d)
}

/// How a gate's reported error is split between relaxation and depolarizing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateNoiseParameters {
    pub reported_error: f64,
    /// Average infidelity of the relaxation part alone.
    pub thermal_error: f64,
    /// Depolarizing probability `p` of `(1−p)ρ + p·I/d`.
    pub depolarizing: f64,
}

pub fn gate_noise_parameters(
    profile: &NoiseProfile,
    kind: GateKind,
    qubits: &[usize],
) -> Result<Option<GateNoiseParameters>> {
    if kind == GateKind::Rz {
        return Ok(None);
    }
    let cal = profile.gate(kind, qubits).ok_or_else(|| {
        Error::Profile(format!(
            "no calibration for {kind} on {qubits:?} in {}",
            profile.name()
        ))
    })?;
    let d = (1usize << qubits.len()) as f64;
    let mut f_pro = 1.0;
    for &q in qubits {
        let qc = profile.qubit(q)?;
        let th = thermal_relaxation_action(qc.t1_us, qc.t2_us, cal.duration_ns)?;
        if let ChannelAction::Affine1q { p_reset, dephase } = th {
            f_pro *= (2.0 - p_reset + 2.0 * dephase) / 4.0;
        }
    }
    let thermal_error = 1.0 - (d * f_pro + 1.0) / (d + 1.0);
    let e_dep = if thermal_error >= 1.0 {
        0.0
    } else {
        ((cal.error - thermal_error) / (1.0 - thermal_error)).max(0.0)
    };
    let depolarizing = (e_dep * d / (d - 1.0)).min(1.0);
    Ok(Some(GateNoiseParameters {
        reported_error: cal.error,
        thermal_error,
        depolarizing,
    }))
}

/// Channels that follow one physical gate, each with its target qubits:
/// relaxation on every gate qubit, then depolarizing on the gate's support.
pub fn gate_noise(
    profile: &NoiseProfile,
    kind: GateKind,
    qubits: &[usize],
) -> Result<Vec<(ChannelAction, Vec<usize>)>> {
    let Some(params) = gate_noise_parameters(profile, kind, qubits)? else {
        return Ok(Vec::new());
    };
    let cal = profile.gate(kind, qubits).expect("checked above");
    let mut out = Vec::new();
    for &q in qubits {
        let qc = profile.qubit(q)?;
        let th = thermal_relaxation_action(qc.t1_us, qc.t2_us, cal.duration_ns)?;
        if !is_identity(&th) {
            out.push((th, vec![q]));
        }
    }
    if params.depolarizing > 0.0 {
        out.push((
            depolarizing_action(params.depolarizing, qubits.len())?,
            qubits.to_vec(),
        ));
    }
    Ok(out)
}

fn is_identity(ch: &ChannelAction) -> bool {
    matches!(ch, ChannelAction::Affine1q { p_reset, dephase } if *p_reset == 0.0 && *dephase == 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{DensityMatrix, Operator};
    use num_complex::Complex64 as C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn mean_row_profile() -> NoiseProfile {
        let q =
            "{\"t1_us\": 74.779, \"t2_us\": 93.662, \"freq_ghz\": 5.209, \"anharm_ghz\": -0.326, \
                 \"readout\": {\"p01\": 0.0288, \"p10\": 0.006, \"duration_ns\": 5351.11}}";
        let doc = format!(
            "{{\"name\": \"mean\", \"basis_gates\": [\"rz\",\"sx\",\"x\",\"cx\"], \"coupling_map\": [[0,1]], \
              \"qubits\": [{q}, {q}], \"gates\": [\
              {{\"name\": \"sx\", \"qubits\": [0], \"error\": 0.0003312, \"duration_ns\": 35.556}},\
              {{\"name\": \"cx\", \"qubits\": [0,1], \"error\": 0.0103, \"duration_ns\": 386.908}}]}}"
        );
        NoiseProfile::load_str(&doc).unwrap()
    }

    #[test]
    fn thermal_examples() {
        let id = thermal_relaxation_action(50.0, 60.0, 0.0).unwrap();
        assert_eq!(
            id,
            ChannelAction::Affine1q {
                p_reset: 0.0,
                dephase: 1.0
            }
        );
        let deph = thermal_relaxation_action(f64::MAX, 40.0, 100.0).unwrap();
        let ChannelAction::Affine1q { p_reset, dephase } = deph else {
            panic!()
        };
        assert!(p_reset < 1e-300);
        assert!((dephase - (-0.1f64 / 40.0).exp()).abs() < 1e-15);
        let cx = thermal_relaxation_action(74.779, 93.662, 386.908).unwrap();
        let ChannelAction::Affine1q { p_reset, .. } = cx else {
            panic!()
        };
        // Γ₁ = 386.908e-9 / 74.779e-6
        assert!((1.0 - p_reset - 0.994_839_342_739_31).abs() < 1e-12);
        assert!(thermal_relaxation_action(10.0, 25.0, 1.0).is_err());
    }

    #[test]
    fn thermal_fixed_point_is_ground_state() {
        let ch = thermal_relaxation_action(20.0, 30.0, 5_000.0).unwrap();
        let mut rho = DensityMatrix::new_zero_state(1).unwrap();
        rho.apply_unitary(&GateKind::H.matrix(0.0), &[0]).unwrap();
        for _ in 0..400 {
            rho.apply_channel(&ch, &[0]).unwrap();
        }
        assert!(rho.max_abs_diff(&DensityMatrix::new_zero_state(1).unwrap()) < 1e-12);
    }

    #[test]
    fn depolarizing_kraus_completeness() {
        let ch = depolarizing_action(0.0103, 2).unwrap();
        let ops = ch.kraus_ops();
        let mut sum = Operator::zeros(4);
        for k in &ops {
            sum = sum.add(&k.dagger().matmul(k));
        }
        assert!(sum.max_abs_diff(&Operator::identity(4)) < 1e-12);
        assert!(depolarizing_action(1.2, 1).is_err());
    }

    #[test]
    fn confusion_examples() {
        assert_eq!(
            readout_confusion(0.0, 0.0).unwrap(),
            [[1.0, 0.0], [0.0, 1.0]]
        );
        let m = readout_confusion(0.03, 0.0).unwrap();
        assert!((apply_confusion(&m, [0.0, 1.0]).unwrap()[1] - 0.97).abs() < 1e-15);
        let m = readout_confusion(0.0288, 0.006).unwrap();
        assert!((apply_confusion(&m, [0.5, 0.5]).unwrap()[1] - 0.4886).abs() < 1e-12);
        assert!(readout_confusion(-0.1, 0.0).is_err());
        assert!(apply_confusion(&m, [0.7, 0.7]).is_err());
    }

    #[test]
    fn rz_and_zero_calibration_are_noise_free() {
        let p = mean_row_profile();
        assert!(gate_noise(&p, GateKind::Rz, &[0]).unwrap().is_empty());
        assert!(gate_noise(&p.noiseless(), GateKind::Cx, &[1, 0])
            .unwrap()
            .is_empty());
        assert!(gate_noise(&p, GateKind::X, &[1]).is_err());
    }

    /// Haar-averaged fidelity of the composed channel, sampled independently
    /// of the process-fidelity formula used to calibrate it.
    fn monte_carlo_infidelity(channels: &[(ChannelAction, Vec<usize>)], samples: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut acc = 0.0;
        for _ in 0..samples {
            let amps: Vec<C64> = (0..4)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let pure = DensityMatrix::from_pure(&amps).unwrap();
            let mut rho = pure.clone();
            for (ch, t) in channels {
                rho.apply_channel(ch, t).unwrap();
            }
            let f: C64 = pure
                .entries()
                .iter()
                .zip(rho.entries())
                .map(|(a, b)| a.conj() * b)
                .sum();
            acc += f.re;
        }
        1.0 - acc / samples as f64
    }

    #[test]
    fn composed_cx_noise_reproduces_reported_error() {
        let p = mean_row_profile();
        let params = gate_noise_parameters(&p, GateKind::Cx, &[0, 1])
            .unwrap()
            .unwrap();
        assert!((params.thermal_error - 0.005_35).abs() < 1e-4);
        assert!((params.depolarizing - 0.006_64).abs() < 1e-4);
        let chans = gate_noise(&p, GateKind::Cx, &[0, 1]).unwrap();
        assert_eq!(chans.len(), 3);
        let e = monte_carlo_infidelity(&chans, 20_000);
        assert!((e - 0.0103).abs() / 0.0103 < 0.05, "infidelity {e}");
    }

    #[test]
    fn every_constructed_channel_is_cptp() {
        let p = mean_row_profile();
        let mut chans = gate_noise(&p, GateKind::Cx, &[1, 0]).unwrap();
        chans.extend(gate_noise(&p, GateKind::Sx, &[0]).unwrap());
        for (ch, _) in chans {
            let choi = ch.choi();
            let d = ch.kraus_ops()[0].dim();
            let n = 2 * d.trailing_zeros() as usize;
            let scaled = choi.scale(C64::new(1.0 / d as f64, 0.0));
            let rho = DensityMatrix::from_entries(n, scaled.data().to_vec()).unwrap();
            assert!(rho.min_eigenvalue() > -1e-9);
        }
    }

    #[test]
    fn process_fidelity_of_identity_is_one() {
        assert!((process_fidelity(&ChannelAction::identity(2)) - 1.0).abs() < 1e-15);
    }
}
