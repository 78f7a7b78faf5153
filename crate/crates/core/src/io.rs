//! Versioned JSON documents for graphs, transform sets, transformed graphs
//! and verification reports.
//!
//! Complex entries are `[re, im]` pairs and matrices are lists of rows.
//! Quantum operators use the canonical leg order of their labels; classical
//! tables are indexed in neighbor order, first neighbor most significant.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::classical::{
    ClassicalEdgeTransform, ClassicalFactor, ClassicalFactorGraph, ClassicalVariable,
    TransformedClassicalGraph,
};
use crate::error::{Error, Result};
use crate::linalg::raw::CMat;
use crate::linalg::{canonical_order, LabeledOperator, SpaceId, SpaceLabel};
use crate::qholo::{EdgeTransform, QuantumTransformSet, TransformedQuantumGraph};
use crate::quantum::{QuantumFactor, QuantumFactorGraph, QuantumVariable};
use crate::report::{EdgeMode, HolantReport, Verdict};
use crate::tolerance::Tolerances;

pub const FORMAT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Classical,
    Quantum,
}

pub type ComplexRows = Vec<Vec<Complex64>>;

/// A matrix payload: real rows for classical data, `[re, im]` rows otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Real(Vec<Vec<f64>>),
    Complex(ComplexRows),
}

pub fn complex_rows(m: &CMat) -> ComplexRows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn real_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn square<T: Copy>(rows: &[Vec<T>], what: &str) -> Result<usize> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("{what}: matrix rows must all have length {n}")));
    }
    Ok(n)
}

fn to_cmat(rows: &[Vec<Complex64>], what: &str) -> Result<CMat> {
    let n = square(rows, what)?;
    Ok(CMat::from_fn(n, n, |r, c| rows[r][c]))
}

fn to_real(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = square(rows, what)?;
    Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

impl Payload {
    fn complex(&self, what: &str) -> Result<CMat> {
        match self {
            Payload::Complex(rows) => to_cmat(rows, what),
            Payload::Real(rows) => {
                let m = to_real(rows, what)?;
                Ok(m.map(|x| Complex64::new(x, 0.0)))
            }
        }
    }

    fn real(&self, what: &str) -> Result<DMatrix<f64>> {
        match self {
            Payload::Real(rows) => to_real(rows, what),
            Payload::Complex(_) => Err(Error::Parse(format!("{what}: classical matrices are real"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableEntry {
    pub id: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<ComplexRows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorEntry {
    pub id: String,
    pub neighbors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<ComplexRows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub version: u32,
    pub kind: Kind,
    pub variables: Vec<VariableEntry>,
    pub factors: Vec<FactorEntry>,
}

/// A validated graph of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Graph {
    Classical(ClassicalFactorGraph),
    Quantum(QuantumFactorGraph),
}

impl Graph {
    pub fn kind(&self) -> Kind {
        match self {
            Graph::Classical(_) => Kind::Classical,
            Graph::Quantum(_) => Kind::Quantum,
        }
    }
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported format version {v} (this build reads version {FORMAT_VERSION})"
        )));
    }
    Ok(())
}

impl GraphDocument {
    pub fn from_classical(g: &ClassicalFactorGraph) -> Self {
        Self {
            version: FORMAT_VERSION,
            kind: Kind::Classical,
            variables: g
                .variables()
                .iter()
                .map(|v| VariableEntry {
                    id: v.id.clone(),
                    dim: v.domain(),
                    weights: Some(v.weights.clone()),
                    operator: None,
                })
                .collect(),
            factors: g
                .factors()
                .iter()
                .map(|f| FactorEntry {
                    id: f.id.clone(),
                    neighbors: f.neighbors.clone(),
                    table: Some(f.table.clone()),
                    operator: None,
                })
                .collect(),
        }
    }

    pub fn from_quantum(g: &QuantumFactorGraph) -> Self {
        Self {
            version: FORMAT_VERSION,
            kind: Kind::Quantum,
            variables: g
                .variables()
                .iter()
                .map(|v| VariableEntry {
                    id: v.id.clone(),
                    dim: v.dim,
                    weights: None,
                    operator: Some(complex_rows(v.operator.matrix())),
                })
                .collect(),
            factors: g
                .factors()
                .iter()
                .map(|f| FactorEntry {
                    id: f.id.clone(),
                    neighbors: f.neighbors.clone(),
                    table: None,
                    operator: Some(complex_rows(f.operator.matrix())),
                })
                .collect(),
        }
    }

    pub fn from_graph(g: &Graph) -> Self {
        match g {
            Graph::Classical(c) => Self::from_classical(c),
            Graph::Quantum(q) => Self::from_quantum(q),
        }
    }

    /// Builds and validates the graph the document describes.
    pub fn to_graph(&self, tol: &Tolerances) -> Result<Graph> {
        check_version(self.version)?;
        match self.kind {
            Kind::Classical => {
                let variables = self
                    .variables
                    .iter()
                    .map(|v| {
                        let w = v.weights.clone().ok_or_else(|| {
                            Error::Parse(format!("classical variable {} needs weights", v.id))
                        })?;
                        if w.len() != v.dim {
                            return Err(Error::Parse(format!(
                                "variable {}: {} weights for domain size {}",
                                v.id,
                                w.len(),
                                v.dim
                            )));
                        }
                        Ok(ClassicalVariable::new(v.id.clone(), w))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let factors = self
                    .factors
                    .iter()
                    .map(|f| {
                        let t = f.table.clone().ok_or_else(|| {
                            Error::Parse(format!("classical factor {} needs a table", f.id))
                        })?;
                        Ok(ClassicalFactor::new(f.id.clone(), f.neighbors.clone(), t))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Graph::Classical(ClassicalFactorGraph::new(variables, factors)?))
            }
            Kind::Quantum => {
                let mut dims = BTreeMap::new();
                let variables = self
                    .variables
                    .iter()
                    .map(|v| {
                        let rows = v.operator.as_ref().ok_or_else(|| {
                            Error::Parse(format!("quantum variable {} needs an operator", v.id))
                        })?;
                        let m = to_cmat(rows, &format!("variable {}", v.id))?;
                        if m.nrows() != v.dim {
                            return Err(Error::Parse(format!(
                                "variable {}: operator side {} for dimension {}",
                                v.id,
                                m.nrows(),
                                v.dim
                            )));
                        }
                        dims.insert(v.id.clone(), v.dim);
                        QuantumVariable::new(v.id.clone(), m)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let factors = self
                    .factors
                    .iter()
                    .map(|f| {
                        let rows = f.operator.as_ref().ok_or_else(|| {
                            Error::Parse(format!("quantum factor {} needs an operator", f.id))
                        })?;
                        let m = to_cmat(rows, &format!("factor {}", f.id))?;
                        let mut labels = Vec::new();
                        for n in &f.neighbors {
                            let d = dims.get(n).ok_or_else(|| {
                                Error::Graph(format!("factor {} references unknown variable {n}", f.id))
                            })?;
                            labels.push(SpaceLabel::base(n.clone(), *d));
                        }
                        canonical_order(&mut labels);
                        if labels.windows(2).any(|w| w[0] == w[1]) {
                            return Err(Error::Graph(format!("factor {} repeats a neighbor", f.id)));
                        }
                        let op = LabeledOperator::new(labels, m).map_err(|e| match e {
                            Error::Dimension(s) => Error::Parse(format!("factor {}: {s}", f.id)),
                            other => other,
                        })?;
                        Ok(QuantumFactor::new(f.id.clone(), f.neighbors.clone(), op))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Graph::Quantum(QuantumFactorGraph::new_with(variables, factors, tol)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub variable: String,
    pub factor: String,
    pub mode: EdgeMode,
    /// Classical: the matrix `φ[x, y]`. Quantum: the CJ matrix on `[H_i, Ĥ]`.
    pub phi: Payload,
    /// Classical: `φ̂[y, z]`. Quantum: the CJ matrix on `[Ĥ, H']`.
    pub phi_hat: Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformDocument {
    pub version: u32,
    pub kind: Kind,
    pub edges: Vec<EdgeEntry>,
    /// Per-variable factor order for the product of the `φ`s.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub edge_order: BTreeMap<String, Vec<String>>,
}

/// A transform set of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Transforms {
    Classical(Vec<ClassicalEdgeTransform>),
    Quantum(QuantumTransformSet),
}

impl TransformDocument {
    pub fn from_classical(ts: &[ClassicalEdgeTransform]) -> Self {
        Self {
            version: FORMAT_VERSION,
            kind: Kind::Classical,
            edges: ts
                .iter()
                .map(|t| EdgeEntry {
                    variable: t.variable.clone(),
                    factor: t.factor.clone(),
                    mode: EdgeMode::Classical,
                    phi: Payload::Real(real_rows(&t.phi)),
                    phi_hat: Payload::Real(real_rows(&t.phi_hat)),
                })
                .collect(),
            edge_order: BTreeMap::new(),
        }
    }

    pub fn from_quantum(ts: &QuantumTransformSet) -> Result<Self> {
        Ok(Self {
            version: FORMAT_VERSION,
            kind: Kind::Quantum,
            edges: ts
                .edges()
                .iter()
                .map(|t| {
                    Ok(EdgeEntry {
                        variable: t.variable.clone(),
                        factor: t.factor.clone(),
                        mode: t.mode,
                        phi: Payload::Complex(complex_rows(t.phi_cj()?.matrix())),
                        phi_hat: Payload::Complex(complex_rows(t.phi_hat_cj()?.matrix())),
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            edge_order: ts.edge_orders().clone(),
        })
    }

    pub fn from_transforms(ts: &Transforms) -> Result<Self> {
        match ts {
            Transforms::Classical(c) => Ok(Self::from_classical(c)),
            Transforms::Quantum(q) => Self::from_quantum(q),
        }
    }

    pub fn to_transforms(&self) -> Result<Transforms> {
        check_version(self.version)?;
        match self.kind {
            Kind::Classical => {
                if !self.edge_order.is_empty() {
                    return Err(Error::Parse("edge_order applies to quantum transforms only".into()));
                }
                let ts = self
                    .edges
                    .iter()
                    .map(|e| {
                        if e.mode != EdgeMode::Classical {
                            return Err(Error::Parse(format!(
                                "edge ({}, {}): classical transforms use mode \"classical\"",
                                e.variable, e.factor
                            )));
                        }
                        let site = format!("edge ({}, {})", e.variable, e.factor);
                        Ok(ClassicalEdgeTransform::new(
                            e.variable.clone(),
                            e.factor.clone(),
                            e.phi.real(&site)?,
                            e.phi_hat.real(&site)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Transforms::Classical(ts))
            }
            Kind::Quantum => {
                let edges = self
                    .edges
                    .iter()
                    .map(|e| {
                        let site = format!("edge ({}, {})", e.variable, e.factor);
                        let phi = e.phi.complex(&site)?;
                        let phi_hat = e.phi_hat.complex(&site)?;
                        let q = (phi.nrows() as f64).sqrt().round() as usize;
                        if q * q != phi.nrows() || phi_hat.nrows() != phi.nrows() {
                            return Err(Error::Parse(format!(
                                "{site}: CJ matrices must both have side q*q"
                            )));
                        }
                        let b = SpaceLabel::base(e.variable.clone(), q);
                        let h = SpaceLabel::hat(e.variable.clone(), e.factor.clone(), q);
                        let p = SpaceLabel::prime(e.variable.clone(), e.factor.clone(), q);
                        let phi = LabeledOperator::new(vec![b, h.clone()], phi)?;
                        let phi_hat = LabeledOperator::new(vec![h, p], phi_hat)?;
                        EdgeTransform::from_cj(e.variable.clone(), e.factor.clone(), e.mode, &phi, &phi_hat)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mut set = QuantumTransformSet::new(edges);
                for (v, o) in &self.edge_order {
                    set.set_edge_order(v.clone(), o.clone());
                }
                Ok(Transforms::Quantum(set))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedOperator {
    pub node: String,
    /// Edge spaces `(variable, factor)` in the operator's leg order.
    pub edges: Vec<(String, String)>,
    pub operator: ComplexRows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumTransformedDocument {
    pub version: u32,
    pub kind: Kind,
    pub factors: Vec<TransformedOperator>,
    pub variables: Vec<TransformedOperator>,
    pub z_transformed: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTransformedDocument {
    pub version: u32,
    pub kind: Kind,
    #[serde(flatten)]
    pub graph: TransformedClassicalGraph,
    pub z_transformed: f64,
}

fn transformed_entry(node: &str, op: &LabeledOperator) -> TransformedOperator {
    TransformedOperator {
        node: node.to_string(),
        edges: op
            .labels()
            .iter()
            .map(|l| match &l.id {
                SpaceId::Edge(v, a) => (v.clone(), a.clone()),
                SpaceId::Var(v) => (v.clone(), String::new()),
            })
            .collect(),
        operator: complex_rows(op.matrix()),
    }
}

impl QuantumTransformedDocument {
    pub fn new(t: &TransformedQuantumGraph, z_transformed: Complex64) -> Self {
        Self {
            version: FORMAT_VERSION,
            kind: Kind::Quantum,
            factors: t.factors.iter().map(|(n, o)| transformed_entry(n, o)).collect(),
            variables: t.variables.iter().map(|(n, o)| transformed_entry(n, o)).collect(),
            z_transformed,
        }
    }
}

impl ClassicalTransformedDocument {
    pub fn new(t: &TransformedClassicalGraph, z_transformed: f64) -> Self {
        Self {
            version: FORMAT_VERSION,
            kind: Kind::Classical,
            graph: t.clone(),
            z_transformed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub version: u32,
    pub tool_version: String,
    pub kind: Kind,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    pub tolerances: Tolerances,
    pub report: HolantReport,
}

impl ReportDocument {
    pub fn new(kind: Kind, seed: u64, wall_clock_seconds: f64, tolerances: Tolerances, report: HolantReport) -> Self {
        Self {
            version: FORMAT_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            kind,
            seed,
            wall_clock_seconds,
            tolerances,
            report,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub report: HolantReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub pass: usize,
    pub fail: usize,
    pub exploratory: usize,
}

impl VerdictCounts {
    pub fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Pass => self.pass += 1,
            Verdict::Fail => self.fail += 1,
            Verdict::Exploratory => self.exploratory += 1,
        }
    }
}

/// Reports for a range of generated instances, in seed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReportDocument {
    pub version: u32,
    pub tool_version: String,
    pub family: crate::qholo::Family,
    pub size: crate::qholo::SizeParams,
    pub seeds: (u64, u64),
    pub wall_clock_seconds: f64,
    pub tolerances: Tolerances,
    pub counts: VerdictCounts,
    pub reports: Vec<SeedReport>,
}

/// Parses JSON, reporting line and column on failure.
pub fn from_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        Error::Parse(format!("{what}: {e}"))
    })
}

/// Pretty JSON with a trailing newline; floats use the shortest form that
/// parses back to the same value.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn parse_graph_str(text: &str, tol: &Tolerances) -> Result<Graph> {
    from_json::<GraphDocument>(text, "graph document")?.to_graph(tol)
}

pub fn parse_graph(path: &Path, tol: &Tolerances) -> Result<Graph> {
    let text = read(path)?;
    parse_graph_str(&text, tol).map_err(|e| annotate(path, e))
}

pub fn parse_transforms_str(text: &str) -> Result<Transforms> {
    from_json::<TransformDocument>(text, "transform document")?.to_transforms()
}

pub fn parse_transforms(path: &Path) -> Result<Transforms> {
    let text = read(path)?;
    parse_transforms_str(&text).map_err(|e| annotate(path, e))
}

fn annotate(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse(s) => Error::Parse(format!("{}: {s}", path.display())),
        other => other,
    }
}

pub fn graph_to_json(g: &Graph) -> Result<String> {
    to_json(&GraphDocument::from_graph(g))
}

pub fn transforms_to_json(ts: &Transforms) -> Result<String> {
    to_json(&TransformDocument::from_transforms(ts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qholo::{gen_classical, gen_instance, Family, SizeParams};

    const MINIMAL: &str = r#"{
  "version": 1,
  "kind": "classical",
  "variables": [{"id": "x", "dim": 2, "weights": [1.0, 1.0]}],
  "factors": [{"id": "a", "neighbors": ["x"], "table": [2.0, 3.0]}]
}"#;

    #[test]
    fn minimal_classical_document() {
        match parse_graph_str(MINIMAL, &Tolerances::default()).unwrap() {
            Graph::Classical(g) => assert_eq!(g.partition_function().unwrap(), 5.0),
            _ => panic!("expected a classical graph"),
        }
    }

    #[test]
    fn non_psd_variable_is_named() {
        let text = r#"{"version": 1, "kind": "quantum",
            "variables": [{"id": "q7", "dim": 1, "operator": [[[-1.0, 0.0]]]}],
            "factors": []}"#;
        let e = parse_graph_str(text, &Tolerances::default()).unwrap_err();
        assert!(e.is_invariant_violation());
        assert!(e.to_string().contains("q7"), "{e}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse_graph_str("{\n  \"version\": 1,\n  \"kind\": oops\n}", &Tolerances::default()).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = parse_graph_str(&MINIMAL.replace("\"version\": 1", "\"version\": 9"), &Tolerances::default())
            .unwrap_err();
        assert!(e.to_string().contains("version 9"));
    }

    #[test]
    fn payload_size_mismatch() {
        let text = MINIMAL.replace("[1.0, 1.0]", "[1.0]");
        assert!(matches!(parse_graph_str(&text, &Tolerances::default()), Err(Error::Parse(_))));
    }

    #[test]
    fn quantum_roundtrip_is_byte_identical() {
        let inst = gen_instance(Family::Deg1, &SizeParams::default(), 3).unwrap();
        let g = Graph::Quantum(inst.graph);
        let text = graph_to_json(&g).unwrap();
        let again = graph_to_json(&parse_graph_str(&text, &Tolerances::default()).unwrap()).unwrap();
        assert_eq!(text, again);

        let ts = Transforms::Quantum(inst.transforms);
        let text = transforms_to_json(&ts).unwrap();
        let parsed = parse_transforms_str(&text).unwrap();
        assert_eq!(parsed, ts);
        assert_eq!(transforms_to_json(&parsed).unwrap(), text);
    }

    #[test]
    fn classical_roundtrip_is_byte_identical() {
        let (g, ts) = gen_classical(&SizeParams::default(), 4).unwrap();
        let text = graph_to_json(&Graph::Classical(g)).unwrap();
        let again = graph_to_json(&parse_graph_str(&text, &Tolerances::default()).unwrap()).unwrap();
        assert_eq!(text, again);
        let ts = Transforms::Classical(ts);
        let text = transforms_to_json(&ts).unwrap();
        assert_eq!(parse_transforms_str(&text).unwrap(), ts);
    }

    #[test]
    fn float_formatting_is_shortest_roundtrip() {
        let v: Vec<f64> = vec![0.1 + 0.2, 1.0 / 3.0, 1e-300, 5.0];
        let s = to_json(&v).unwrap();
        let back: Vec<f64> = from_json(&s, "floats").unwrap();
        assert_eq!(back.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), v.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        assert!(s.contains("0.30000000000000004"));
    }
}
