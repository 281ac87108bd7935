use crate::noise::NoiseProfile;
use crate::{Error, Result};

/// Picks `n` physical qubits forming a simple path on the coupling map with
/// the smallest summed two-qubit error. Logical qubit `i` goes to `path[i]`.
///
/// Paths are enumerated depth-first from the lowest start index, visiting
/// neighbours in ascending order; the first path found at the minimum wins.
pub fn choose_layout(n: usize, profile: &NoiseProfile) -> Result<Vec<usize>> {
    let size = profile.num_qubits();
    if n == 0 || n > size {
        return Err(Error::Transpile(format!(
            "cannot place {n} logical qubits on {size} physical qubits"
        )));
    }
    let mut adj = vec![Vec::new(); size];
    for e in profile.coupling_map() {
        adj[e[0]].push(e[1]);
        adj[e[1]].push(e[0]);
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    let weight = |a: usize, b: usize| profile.edge_error(a, b).unwrap_or(0.0);
    let mut search = Search {
        adj: &adj,
        weight: &weight,
        target: n,
        best: None,
        path: Vec::with_capacity(n),
        used: vec![false; size],
    };
    for start in 0..size {
        search.extend(start, 0.0);
    }
    search.best.map(|(_, p)| p).ok_or_else(|| {
        Error::Transpile(format!(
            "no connected path of {n} qubits in the coupling map"
        ))
    })
}

struct Search<'a, W: Fn(usize, usize) -> f64> {
    adj: &'a [Vec<usize>],
    weight: &'a W,
    target: usize,
    best: Option<(f64, Vec<usize>)>,
    path: Vec<usize>,
    used: Vec<bool>,
}

impl<W: Fn(usize, usize) -> f64> Search<'_, W> {
    fn extend(&mut self, q: usize, cost: f64) {
        // costs only grow, so a partial path already at the best cannot win
        if let Some((b, _)) = &self.best {
            if cost >= *b - 1e-15 {
                return;
            }
        }
        self.path.push(q);
        self.used[q] = true;
        if self.path.len() == self.target {
            self.best = Some((cost, self.path.clone()));
        } else {
            for i in 0..self.adj[q].len() {
                let r = self.adj[q][i];
                if !self.used[r] {
                    let w = (self.weight)(q, r);
                    self.extend(r, cost + w);
                }
            }
        }
        self.used[q] = false;
        self.path.pop();
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::noise::{synth_profile, MetricStat, ProfileStats};
    use crate::qsim::GateKind;

    pub(crate) fn line_profile(errors: &[f64]) -> NoiseProfile {
        let n = errors.len() + 1;
        let edges: Vec<[usize; 2]> = (1..n).map(|i| [i - 1, i]).collect();
        custom_profile(n, &edges, errors)
    }

    pub(crate) fn custom_profile(n: usize, edges: &[[usize; 2]], errors: &[f64]) -> NoiseProfile {
        let stats = ProfileStats {
            name: "test".into(),
            basis_gates: vec![GateKind::Rz, GateKind::Sx, GateKind::X, GateKind::Cx],
            metrics: [
                ("t1_us", 100.0),
                ("t2_us", 100.0),
                ("freq_ghz", 5.0),
                ("anharm_ghz", -0.3),
                ("readout_p01", 0.0),
                ("readout_p10", 0.0),
                ("readout_duration_ns", 0.0),
                ("sq_gate_ns", 0.0),
                ("sx_error", 0.0),
                ("x_error", 0.0),
                ("two_qubit_error", 0.01),
                ("two_qubit_gate_ns", 0.0),
            ]
            .into_iter()
            .map(|(k, mean)| (k.to_string(), MetricStat { mean, std: 0.0 }))
            .collect(),
        };
        let base = synth_profile(&stats, n, edges, 0).unwrap();
        let mut doc: serde_json::Value = serde_json::from_str(&base.to_json().unwrap()).unwrap();
        for g in doc["gates"].as_array_mut().unwrap() {
            if g["name"] == "cx" {
                let q: Vec<usize> = serde_json::from_value(g["qubits"].clone()).unwrap();
                let idx = edges
                    .iter()
                    .position(|e| e[0] == q[0] && e[1] == q[1])
                    .unwrap();
                g["error"] = errors[idx].into();
            }
        }
        NoiseProfile::load_str(&doc.to_string()).unwrap()
    }

    /// Exhaustive oracle: every ordered injective tuple that forms a path.
    fn brute_force(n: usize, p: &NoiseProfile) -> f64 {
        fn rec(p: &NoiseProfile, n: usize, path: &mut Vec<usize>, best: &mut f64, cost: f64) {
            if path.len() == n {
                *best = best.min(cost);
                return;
            }
            for q in 0..p.num_qubits() {
                if path.contains(&q) {
                    continue;
                }
                match path.last() {
                    None => {
                        path.push(q);
                        rec(p, n, path, best, cost);
                        path.pop();
                    }
                    Some(&last) if p.is_coupled(last, q) => {
                        let w = p.edge_error(last, q).unwrap();
                        path.push(q);
                        rec(p, n, path, best, cost + w);
                        path.pop();
                    }
                    _ => {}
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(p, n, &mut Vec::new(), &mut best, 0.0);
        best
    }

    #[test]
    fn prefers_lower_error_edge() {
        let p = line_profile(&[0.02, 0.005]);
        assert_eq!(choose_layout(2, &p).unwrap(), vec![1, 2]);
    }

    #[test]
    fn uniform_errors_pick_lowest_index_path() {
        let p = line_profile(&[0.01, 0.01, 0.01, 0.01]);
        assert_eq!(choose_layout(3, &p).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn too_small_device_is_an_error() {
        let p = line_profile(&[0.01]);
        assert!(choose_layout(3, &p).is_err());
        let star = custom_profile(4, &[[0, 1], [0, 2], [0, 3]], &[0.01, 0.01, 0.01]);
        assert!(choose_layout(4, &star).is_err());
    }

    #[test]
    fn matches_exhaustive_search() {
        let edges = [[0, 1], [1, 2], [1, 3], [3, 4], [2, 4], [4, 5]];
        let errors = [0.011, 0.007, 0.013, 0.006, 0.02, 0.009];
        let p = custom_profile(6, &edges, &errors);
        for n in 2..=5 {
            let layout = choose_layout(n, &p).unwrap();
            let cost: f64 = layout
                .windows(2)
                .map(|w| p.edge_error(w[0], w[1]).unwrap())
                .sum();
            assert!((cost - brute_force(n, &p)).abs() < 1e-15, "n={n}");
            for w in layout.windows(2) {
                assert!(p.is_coupled(w[0], w[1]));
            }
        }
    }
}
