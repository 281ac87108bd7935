use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::qsim::{GateKind, Pauli, MAX_QUBITS};
use crate::transpile::{Angle, Instruction, LogicalCircuit, Op, Symbol};
use crate::{Error, Result};

/// Which qubits are read out and how their values are used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Plain QCNN: the final qubit's ⟨Z⟩ is the prediction.
    #[serde(rename = "baseline")]
    Baseline,
    /// ⟨Z⟩ at every depth-stratified site, fed to a classical head.
    #[serde(rename = "hqcnn-ez")]
    Ez,
    /// ⟨X⟩, ⟨Y⟩, ⟨Z⟩ at every site, fed to a classical head.
    #[serde(rename = "hqcnn-em")]
    Em,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Baseline, Variant::Ez, Variant::Em];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Ez => "hqcnn-ez",
            Variant::Em => "hqcnn-em",
        }
    }

    pub fn has_head(self) -> bool {
        self != Variant::Baseline
    }

    pub fn bases(self) -> Vec<Pauli> {
        match self {
            Variant::Em => vec![Pauli::X, Pauli::Y, Pauli::Z],
            _ => vec![Pauli::Z],
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" | "qcnn" => Ok(Variant::Baseline),
            "hqcnn-ez" | "ez" => Ok(Variant::Ez),
            "hqcnn-em" | "em" => Ok(Variant::Em),
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }
}

/// One convolution + pooling stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// Active qubits entering the layer, ascending.
    pub active: Vec<usize>,
    /// `(trash, survivor)` pairs; the trash qubit is the control.
    pub pairs: Vec<(usize, usize)>,
    /// Trailing qubit of an odd active list.
    pub passthrough: Option<usize>,
}

impl Layer {
    pub fn survivors(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.pairs.iter().map(|p| p.1).collect();
        s.extend(self.passthrough);
        s
    }

    pub fn trash(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.0).collect()
    }
}

/// Structure of the hierarchical circuit for `n` inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HqcnnSpec {
    pub n: usize,
    pub variant: Variant,
    pub layers: Vec<Layer>,
}

pub const PARAMS_PER_LAYER: usize = 4;

impl HqcnnSpec {
    pub fn new(n: usize, variant: Variant) -> Result<Self> {
        if !(2..=MAX_QUBITS).contains(&n) {
            return Err(Error::Capacity(format!(
                "ansatz needs 2..={MAX_QUBITS} qubits, got {n}"
            )));
        }
        let mut layers = Vec::new();
        let mut active: Vec<usize> = (0..n).collect();
        while active.len() > 1 {
            let pairs: Vec<(usize, usize)> = active.chunks_exact(2).map(|c| (c[0], c[1])).collect();
            let passthrough = (active.len() % 2 == 1).then(|| *active.last().expect("non-empty"));
            let layer = Layer {
                active: active.clone(),
                pairs,
                passthrough,
            };
            active = layer.survivors();
            layers.push(layer);
        }
        Ok(Self { n, variant, layers })
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn num_params(&self) -> usize {
        PARAMS_PER_LAYER * self.layers.len()
    }

    pub fn final_qubit(&self) -> usize {
        self.layers.last().map(|l| l.survivors()[0]).unwrap_or(0)
    }

    /// Table index of parameter `slot` (0..4) in `layer`.
    pub fn param_index(layer: usize, slot: usize) -> usize {
        PARAMS_PER_LAYER * layer + slot
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SitePosition {
    /// Right after the pooling of this layer.
    AfterLayer(usize),
    End,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanSite {
    pub qubit: usize,
    pub position: SitePosition,
    pub bases: Vec<Pauli>,
}

/// Readout sites in feature order, shallow to deep with the final qubit last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPlan {
    pub sites: Vec<PlanSite>,
}

impl MeasurementPlan {
    pub fn new(spec: &HqcnnSpec) -> Self {
        let bases = spec.variant.bases();
        let mut sites = Vec::new();
        if spec.variant.has_head() {
            let last = spec.layers.len().saturating_sub(1);
            for (l, layer) in spec.layers.iter().enumerate().take(last) {
                sites.push(PlanSite {
                    qubit: layer.pairs[0].0,
                    position: SitePosition::AfterLayer(l),
                    bases: bases.clone(),
                });
            }
        }
        sites.push(PlanSite {
            qubit: spec.final_qubit(),
            position: SitePosition::End,
            bases,
        });
        Self { sites }
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn feature_len(&self) -> usize {
        self.sites.iter().map(|s| s.bases.len()).sum()
    }

    /// Labels such as `<Z>_0`, indexed by site depth.
    pub fn feature_labels(&self) -> Vec<String> {
        self.sites
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.bases.iter().map(move |b| format!("<{b}>_{i}")))
            .collect()
    }
}

/// Quantum angles plus the template instructions each one feeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterTable {
    pub values: Vec<f64>,
    /// `occurrences[k]` lists op positions in the layer skeleton that use `p{k}`.
    pub occurrences: Vec<Vec<usize>>,
}

impl ParameterTable {
    pub fn new(values: Vec<f64>, skeleton: &LogicalCircuit) -> Result<Self> {
        let mut occurrences = vec![Vec::new(); values.len()];
        for (pos, op) in skeleton.ops().iter().enumerate() {
            if let Op::Gate(g) = op {
                for s in g.params.iter().flat_map(|a| a.symbols()) {
                    if let Symbol::Param(k) = s {
                        occurrences
                            .get_mut(k)
                            .ok_or_else(|| {
                                Error::Dimension(format!(
                                    "p{k} outside a table of {}",
                                    values.len()
                                ))
                            })?
                            .push(pos);
                    }
                }
            }
        }
        Ok(Self {
            values,
            occurrences,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `RY(xᵢ)` on qubit `i`. Values are soft-clamped into [0, π].
pub fn build_encoding(features: &[f64], n: usize) -> Result<Vec<Instruction>> {
    if features.len() != n {
        return Err(Error::Dimension(format!(
            "expected {n} features, got {}",
            features.len()
        )));
    }
    Ok(features
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            Instruction::rotation(
                GateKind::Ry,
                &[i],
                Angle::constant(x.clamp(0.0, std::f64::consts::PI)),
            )
        })
        .collect())
}

/// Symbolic encoding `RY(x{i})`.
pub fn symbolic_encoding(n: usize) -> Vec<Instruction> {
    (0..n)
        .map(|i| Instruction::rotation(GateKind::Ry, &[i], Angle::feature(i)))
        .collect()
}

/// Convolution/pooling layers with shared symbolic angles and readout sites.
pub fn build_layers(
    n: usize,
    variant: Variant,
) -> Result<(HqcnnSpec, LogicalCircuit, MeasurementPlan)> {
    let spec = HqcnnSpec::new(n, variant)?;
    let plan = MeasurementPlan::new(&spec);
    let mut c = LogicalCircuit::new(n);
    for (l, layer) in spec.layers.iter().enumerate() {
        let p = |slot| Angle::param(HqcnnSpec::param_index(l, slot));
        for &(a, b) in &layer.pairs {
            c.gate(Instruction::rotation(GateKind::Ry, &[a], p(0)))?;
            c.gate(Instruction::rotation(GateKind::Ry, &[b], p(1)))?;
            c.gate(Instruction::fixed(GateKind::Cx, &[a, b]))?;
        }
        for &(a, b) in &layer.pairs {
            c.gate(Instruction::rotation(GateKind::Crz, &[a, b], p(2)))?;
            c.gate(Instruction::rotation(GateKind::Crx, &[a, b], p(3)))?;
        }
        for (i, site) in plan.sites.iter().enumerate() {
            if site.position == SitePosition::AfterLayer(l) {
                c.measure(i, site.qubit, site.bases.clone())?;
            }
        }
    }
    for (i, site) in plan.sites.iter().enumerate() {
        if site.position == SitePosition::End {
            c.measure(i, site.qubit, site.bases.clone())?;
        }
    }
    Ok((spec, c, plan))
}

/// Encoding followed by the layer skeleton, with features left symbolic.
pub fn template(
    n: usize,
    variant: Variant,
) -> Result<(HqcnnSpec, LogicalCircuit, MeasurementPlan)> {
    let (spec, skeleton, plan) = build_layers(n, variant)?;
    let mut c = LogicalCircuit::new(n);
    for inst in symbolic_encoding(n) {
        c.gate(inst)?;
    }
    c.extend(&skeleton)?;
    Ok((spec, c, plan))
}

/// Concrete circuit for one sample.
pub fn bind(spec: &HqcnnSpec, table: &ParameterTable, features: &[f64]) -> Result<LogicalCircuit> {
    if table.len() != spec.num_params() {
        return Err(Error::Dimension(format!(
            "parameter table has {} entries, ansatz needs {}",
            table.len(),
            spec.num_params()
        )));
    }
    let (_, skeleton, _) = build_layers(spec.n, spec.variant)?;
    let mut c = LogicalCircuit::new(spec.n);
    for inst in build_encoding(features, spec.n)? {
        c.gate(inst)?;
    }
    c.extend(&skeleton.bind(&table.values, &[])?)?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_counts() {
        for (n, expect) in [
            (2, vec![2]),
            (4, vec![4, 2]),
            (8, vec![8, 4, 2]),
            (10, vec![10, 5, 3, 2]),
        ] {
            let spec = HqcnnSpec::new(n, Variant::Ez).unwrap();
            let counts: Vec<usize> = spec.layers.iter().map(|l| l.active.len()).collect();
            assert_eq!(counts, expect);
            assert_eq!(spec.num_layers(), (n as f64).log2().ceil() as usize);
            assert_eq!(spec.num_params(), 4 * spec.num_layers());
        }
        assert!(HqcnnSpec::new(1, Variant::Ez).is_err());
        assert!(HqcnnSpec::new(13, Variant::Ez).is_err());
    }

    #[test]
    fn measurement_plans() {
        let ez4 = MeasurementPlan::new(&HqcnnSpec::new(4, Variant::Ez).unwrap());
        assert_eq!(
            ez4.sites.iter().map(|s| s.qubit).collect::<Vec<_>>(),
            vec![0, 3]
        );
        assert_eq!(ez4.feature_labels(), vec!["<Z>_0", "<Z>_1"]);
        let em8 = MeasurementPlan::new(&HqcnnSpec::new(8, Variant::Em).unwrap());
        assert_eq!(em8.feature_len(), 9);
        assert_eq!(em8.feature_labels()[..3], ["<X>_0", "<Y>_0", "<Z>_0"]);
        let ez10 = MeasurementPlan::new(&HqcnnSpec::new(10, Variant::Ez).unwrap());
        assert_eq!(
            ez10.sites.iter().map(|s| s.qubit).collect::<Vec<_>>(),
            vec![0, 1, 3, 9]
        );
        let base = MeasurementPlan::new(&HqcnnSpec::new(8, Variant::Baseline).unwrap());
        assert_eq!(base.feature_len(), 1);
        assert_eq!(base.sites[0].position, SitePosition::End);
    }

    #[test]
    fn feature_count_formula() {
        for n in 2..=12 {
            let m = (n as f64).log2().ceil() as usize;
            for (v, len) in [
                (Variant::Ez, m),
                (Variant::Em, 3 * m),
                (Variant::Baseline, 1),
            ] {
                let (_, _, plan) = build_layers(n, v).unwrap();
                assert_eq!(plan.feature_len(), len, "n={n} {v}");
            }
        }
    }

    #[test]
    fn trash_qubits_are_never_reused() {
        for n in 2..=12 {
            let (spec, skeleton, _) = build_layers(n, Variant::Ez).unwrap();
            let mut discarded = vec![false; n];
            let mut layer_of_op = 0;
            let mut pooled = 0;
            for op in skeleton.ops() {
                if let Op::Gate(g) = op {
                    for &q in &g.qubits {
                        assert!(!discarded[q], "n={n}: gate on discarded qubit {q}");
                    }
                    if g.kind == GateKind::Crx {
                        pooled += 1;
                        if pooled == spec.layers[layer_of_op].pairs.len() {
                            for t in spec.layers[layer_of_op].trash() {
                                discarded[t] = true;
                            }
                            layer_of_op += 1;
                            pooled = 0;
                        }
                    }
                }
            }
            assert_eq!(layer_of_op, spec.num_layers());
        }
    }

    #[test]
    fn occurrence_map() {
        let (spec, skeleton, _) = build_layers(8, Variant::Ez).unwrap();
        let table = ParameterTable::new(vec![0.0; spec.num_params()], &skeleton).unwrap();
        assert_eq!(table.occurrences[0].len(), 4);
        assert_eq!(table.occurrences[4].len(), 2);
        assert_eq!(table.occurrences[11].len(), 1);
    }

    #[test]
    fn encoding_checks_length_and_clamps() {
        assert!(build_encoding(&[0.1], 2).is_err());
        let enc = build_encoding(&[4.0, -1.0], 2).unwrap();
        assert_eq!(enc[0].angle().unwrap().offset, std::f64::consts::PI);
        assert_eq!(enc[1].angle().unwrap().offset, 0.0);
    }

    #[test]
    fn bind_checks_table_length() {
        let spec = HqcnnSpec::new(4, Variant::Ez).unwrap();
        let (_, skeleton, _) = build_layers(4, Variant::Ez).unwrap();
        let short = ParameterTable::new(vec![0.0; 4], &skeleton);
        assert!(short.is_err());
        let table = ParameterTable::new(vec![0.0; 8], &skeleton).unwrap();
        assert!(bind(&spec, &table, &[0.0; 3]).is_err());
        let c = bind(&spec, &table, &[0.0; 4]).unwrap();
        assert!(c.gates().all(|g| g.params.iter().all(|a| a.is_constant())));
    }

    #[test]
    fn variant_names() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
    }
}
