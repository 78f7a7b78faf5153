//! Seeded instance families on which the transformation's preconditions can
//! be met.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{EdgeTransform, QuantumTransformSet};
use crate::cj::SuperOperator;
use crate::classical::{ClassicalEdgeTransform, ClassicalFactor, ClassicalFactorGraph, ClassicalVariable};
use crate::error::{Error, Result};
use crate::linalg::raw::CMat;
use crate::linalg::spectral::hermitize;
use crate::linalg::{LabeledOperator, SpaceLabel};
use crate::quantum::{QuantumFactor, QuantumFactorGraph, QuantumVariable};
use crate::random::{random_invertible_real, random_matrix, random_pd_with_spectrum, random_unitary, seeded, SeededRng};
use crate::tolerance::{Tolerances, MAX_OPERATOR_DIM, MAX_STATE_SPACE};

/// Largest total dimension of the variable spaces, and separately of the
/// transformed edge spaces, of a generated instance.
pub const MAX_GENERATED_DIM: usize = 256;
const MAX_ATTEMPTS: usize = 1000;
const MAX_TRANSFER_CONDITION: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Family {
    /// Diagonal operators and diagonal pairs embedding a classical instance.
    Diagonal,
    /// Every variable on exactly one factor; random invertible maps.
    Deg1,
    /// Commuting Pauli-exponential factors on qubits.
    Pauli,
    /// Any graph with identity transforms.
    Identity,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Diagonal, Family::Deg1, Family::Pauli, Family::Identity];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Family::Diagonal => "DIAGONAL",
            Family::Deg1 => "DEG1",
            Family::Pauli => "PAULI",
            Family::Identity => "IDENTITY",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DIAGONAL" => Ok(Family::Diagonal),
            "DEG1" => Ok(Family::Deg1),
            "PAULI" => Ok(Family::Pauli),
            "IDENTITY" => Ok(Family::Identity),
            _ => Err(Error::Parse(format!(
                "unknown family {s:?}; expected DIAGONAL, DEG1, PAULI or IDENTITY"
            ))),
        }
    }
}

/// Shape of a generated graph: variable and factor counts, the largest
/// variable dimension and the largest factor arity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeParams {
    pub variables: usize,
    pub factors: usize,
    pub max_dim: usize,
    pub max_arity: usize,
}

impl Default for SizeParams {
    fn default() -> Self {
        Self {
            variables: 3,
            factors: 2,
            max_dim: 2,
            max_arity: 2,
        }
    }
}

impl fmt::Display for SizeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "variables={},factors={},dim={},arity={}",
            self.variables, self.factors, self.max_dim, self.max_arity
        )
    }
}

impl FromStr for SizeParams {
    type Err = Error;

    /// Parses `variables=3,factors=2,dim=2,arity=2`; omitted keys keep their
    /// defaults.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = SizeParams::default();
        for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("size entry {part:?} is not key=value")))?;
            let v: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("size entry {part:?} needs a non-negative integer")))?;
            match k.trim() {
                "variables" | "vars" => p.variables = v,
                "factors" => p.factors = v,
                "dim" => p.max_dim = v,
                "arity" => p.max_arity = v,
                other => return Err(Error::Parse(format!("unknown size key {other:?}"))),
            }
        }
        p.validate()?;
        Ok(p)
    }
}

impl SizeParams {
    pub fn validate(&self) -> Result<()> {
        if self.variables == 0 || self.factors == 0 || self.max_dim == 0 || self.max_arity == 0 {
            return Err(Error::Parse(format!("all size parameters must be positive: {self}")));
        }
        Ok(())
    }
}

/// A generated graph, its transforms, and for the diagonal family the
/// classical instance it embeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub family: Family,
    pub seed: u64,
    pub size: SizeParams,
    pub graph: QuantumFactorGraph,
    pub transforms: QuantumTransformSet,
    pub classical: Option<(ClassicalFactorGraph, Vec<ClassicalEdgeTransform>)>,
}

/// Variable dimensions and factor neighborhoods (indices into the variables).
struct Structure {
    dims: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
}

impl Structure {
    fn fits(&self) -> bool {
        let base: usize = self.dims.iter().product();
        let hat: usize = self.neighbors.iter().flatten().map(|&i| self.dims[i]).product();
        if base > MAX_GENERATED_DIM || hat > MAX_GENERATED_DIM {
            return false;
        }
        let factor_ok = self.neighbors.iter().all(|n| {
            let d: usize = n.iter().map(|&i| self.dims[i]).product();
            d * d <= MAX_OPERATOR_DIM
        });
        let var_ok = (0..self.dims.len()).all(|i| {
            let deg = self.neighbors.iter().filter(|n| n.contains(&i)).count();
            self.dims[i].pow(deg as u32 + 1) <= MAX_OPERATOR_DIM
        });
        factor_ok && var_ok
    }

    fn var_id(i: usize) -> String {
        format!("x{i}")
    }

    fn factor_id(a: usize) -> String {
        format!("f{a}")
    }

    fn labels(&self, a: usize) -> Vec<SpaceLabel> {
        self.neighbors[a]
            .iter()
            .map(|&i| SpaceLabel::base(Self::var_id(i), self.dims[i]))
            .collect()
    }

    fn neighbor_ids(&self, a: usize) -> Vec<String> {
        self.neighbors[a].iter().map(|&i| Self::var_id(i)).collect()
    }

    fn factor_dim(&self, a: usize) -> usize {
        self.neighbors[a].iter().map(|&i| self.dims[i]).product()
    }

    /// Edges in stored factor order, as (variable index, factor index).
    fn edges(&self) -> Vec<(usize, usize)> {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(a, n)| n.iter().map(move |&i| (i, a)))
            .collect()
    }
}

fn draw_dim(rng: &mut SeededRng, max_dim: usize) -> usize {
    if max_dim <= 1 {
        1
    } else {
        rng.random_range(2..=max_dim)
    }
}

fn sample_structure(rng: &mut SeededRng, size: &SizeParams, qubits: bool) -> Structure {
    let dims = (0..size.variables)
        .map(|_| if qubits { 2 } else { draw_dim(rng, size.max_dim) })
        .collect();
    let arity_cap = size.max_arity.min(size.variables);
    let neighbors = (0..size.factors)
        .map(|_| {
            let arity = rng.random_range(1..=arity_cap);
            let mut all: Vec<usize> = (0..size.variables).collect();
            all.shuffle(rng);
            all.truncate(arity);
            all
        })
        .collect();
    Structure { dims, neighbors }
}

/// Every variable on exactly one factor.
fn sample_deg1_structure(rng: &mut SeededRng, size: &SizeParams) -> Structure {
    let factors = size.factors.min(size.variables);
    let variables = size.variables.min(factors * size.max_arity);
    let dims = (0..variables).map(|_| draw_dim(rng, size.max_dim)).collect();
    let mut order: Vec<usize> = (0..variables).collect();
    order.shuffle(rng);
    let mut neighbors: Vec<Vec<usize>> = order[..factors].iter().map(|&i| vec![i]).collect();
    for &i in &order[factors..] {
        let open: Vec<usize> = (0..factors).filter(|&a| neighbors[a].len() < size.max_arity).collect();
        let a = open[rng.random_range(0..open.len())];
        neighbors[a].push(i);
    }
    Structure { dims, neighbors }
}

fn structure_for(rng: &mut SeededRng, size: &SizeParams, family: Family) -> Result<Structure> {
    structure_where(rng, size, family, Structure::fits)
}

fn structure_where(
    rng: &mut SeededRng,
    size: &SizeParams,
    family: Family,
    accept: impl Fn(&Structure) -> bool,
) -> Result<Structure> {
    for _ in 0..MAX_ATTEMPTS {
        let s = match family {
            Family::Deg1 => sample_deg1_structure(rng, size),
            Family::Pauli => sample_structure(rng, size, true),
            _ => sample_structure(rng, size, false),
        };
        if accept(&s) {
            return Ok(s);
        }
    }
    Err(Error::TooLarge {
        dim: size.max_dim.saturating_pow(size.variables as u32),
        limit: MAX_GENERATED_DIM,
    })
}

fn uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..=hi)
}

fn pd_variable(rng: &mut SeededRng, i: usize, q: usize) -> Result<QuantumVariable> {
    QuantumVariable::new(Structure::var_id(i), random_pd_with_spectrum(rng, q, 0.1, 1.0))
}

/// Generates one instance. The same `(family, size, seed)` always yields the
/// same instance.
pub fn gen_instance(family: Family, size: &SizeParams, seed: u64) -> Result<Instance> {
    size.validate()?;
    let mut rng = seeded(seed);
    let s = structure_for(&mut rng, size, family)?;
    let (graph, transforms, classical) = match family {
        Family::Diagonal => gen_diagonal(&mut rng, &s)?,
        Family::Deg1 => gen_deg1(&mut rng, &s)?,
        Family::Pauli => gen_pauli(&mut rng, &s)?,
        Family::Identity => gen_identity(&mut rng, &s)?,
    };
    Ok(Instance {
        family,
        seed,
        size: *size,
        graph,
        transforms,
        classical,
    })
}

type Generated = (
    QuantumFactorGraph,
    QuantumTransformSet,
    Option<(ClassicalFactorGraph, Vec<ClassicalEdgeTransform>)>,
);

fn classical_pairs(rng: &mut SeededRng, s: &Structure) -> Result<Vec<ClassicalEdgeTransform>> {
    s.edges()
        .into_iter()
        .map(|(i, a)| {
            let phi = random_invertible_real(rng, s.dims[i]);
            ClassicalEdgeTransform::with_inverse(Structure::var_id(i), Structure::factor_id(a), phi)
        })
        .collect()
}

fn gen_diagonal(rng: &mut SeededRng, s: &Structure) -> Result<Generated> {
    let (cg, pairs) = classical_instance(rng, s)?;
    let graph = QuantumFactorGraph::from_classical(&cg)?;
    let edges = pairs
        .iter()
        .map(|t| EdgeTransform::diagonal_embedding(&t.variable, &t.factor, &t.phi, &t.phi_hat))
        .collect::<Result<Vec<_>>>()?;
    Ok((graph, QuantumTransformSet::new(edges), Some((cg, pairs))))
}

fn classical_instance(
    rng: &mut SeededRng,
    s: &Structure,
) -> Result<(ClassicalFactorGraph, Vec<ClassicalEdgeTransform>)> {
    let variables = s
        .dims
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            ClassicalVariable::new(Structure::var_id(i), (0..q).map(|_| uniform(rng, 0.1, 1.0)).collect())
        })
        .collect();
    let factors = (0..s.neighbors.len())
        .map(|a| {
            let table = (0..s.factor_dim(a)).map(|_| uniform(rng, 0.1, 1.0)).collect();
            ClassicalFactor::new(Structure::factor_id(a), s.neighbor_ids(a), table)
        })
        .collect();
    let cg = ClassicalFactorGraph::new(variables, factors)?;
    let pairs = classical_pairs(rng, s)?;
    Ok((cg, pairs))
}

fn random_edge_map(rng: &mut SeededRng, var: &str, factor: &str, q: usize) -> Result<SuperOperator> {
    let h = SpaceLabel::hat(var, factor, q);
    let b = SpaceLabel::base(var, q);
    loop {
        let t = SuperOperator::from_transfer(vec![h.clone()], vec![b.clone()], random_matrix(rng, q * q))?;
        if t.condition_number() <= MAX_TRANSFER_CONDITION {
            return Ok(t);
        }
    }
}

fn gen_deg1(rng: &mut SeededRng, s: &Structure) -> Result<Generated> {
    let variables = s
        .dims
        .iter()
        .enumerate()
        .map(|(i, &q)| pd_variable(rng, i, q))
        .collect::<Result<Vec<_>>>()?;
    let factors = (0..s.neighbors.len())
        .map(|a| {
            let m = random_pd_with_spectrum(rng, s.factor_dim(a), 0.1, 1.0);
            Ok(QuantumFactor::new(
                Structure::factor_id(a),
                s.neighbor_ids(a),
                LabeledOperator::new(s.labels(a), m)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let graph = QuantumFactorGraph::new(variables, factors)?;
    let tol = Tolerances::default();
    let edges = s
        .edges()
        .into_iter()
        .map(|(i, a)| {
            let (v, f) = (Structure::var_id(i), Structure::factor_id(a));
            let phi = random_edge_map(rng, &v, &f, s.dims[i])?;
            EdgeTransform::with_inverse(v, f, phi, &tol)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((graph, QuantumTransformSet::new(edges), None))
}

/// Single-qubit Pauli matrices indexed I, X, Y, Z.
fn pauli(k: u8) -> CMat {
    let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    match k {
        0 => CMat::from_row_slice(2, 2, &[o, z, z, o]),
        1 => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        _ => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

fn paulis_commute(p: &[u8], q: &[u8]) -> bool {
    p.iter()
        .zip(q)
        .filter(|(a, b)| **a != 0 && **b != 0 && a != b)
        .count()
        % 2
        == 0
}

fn gen_pauli(rng: &mut SeededRng, s: &Structure) -> Result<Generated> {
    let n = s.dims.len();
    for _ in 0..MAX_ATTEMPTS {
        let z_nodes: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let mut strings: Vec<Vec<u8>> = Vec::new();
        for nb in &s.neighbors {
            let mut found = None;
            for _ in 0..100 {
                let mut p = vec![0u8; n];
                for &i in nb {
                    p[i] = if z_nodes[i] { 3 } else { rng.random_range(1..=3) };
                }
                if strings.iter().all(|q| paulis_commute(&p, q)) {
                    found = Some(p);
                    break;
                }
            }
            match found {
                Some(p) => strings.push(p),
                None => break,
            }
        }
        if strings.len() != s.neighbors.len() {
            continue;
        }
        let variables = (0..n)
            .map(|i| pd_variable(rng, i, 2))
            .collect::<Result<Vec<_>>>()?;
        let mut factors = Vec::with_capacity(strings.len());
        for (a, p) in strings.iter().enumerate() {
            let theta = uniform(rng, -1.0, 1.0);
            let mut m = CMat::identity(1, 1);
            for &i in &s.neighbors[a] {
                m = m.kronecker(&pauli(p[i]));
            }
            let d = m.nrows();
            let e = CMat::identity(d, d).scale(theta.cosh()) + m.scale(theta.sinh());
            factors.push(QuantumFactor::new(
                Structure::factor_id(a),
                s.neighbor_ids(a),
                LabeledOperator::new(s.labels(a), hermitize(&e))?,
            ));
        }
        let graph = QuantumFactorGraph::new(variables, factors)?;
        let edges = s
            .edges()
            .into_iter()
            .map(|(i, a)| {
                let (v, f) = (Structure::var_id(i), Structure::factor_id(a));
                if z_nodes[i] {
                    let phi = random_invertible_real(rng, 2);
                    let t = ClassicalEdgeTransform::with_inverse(v, f, phi)?;
                    EdgeTransform::diagonal_embedding(&t.variable, &t.factor, &t.phi, &t.phi_hat)
                } else {
                    EdgeTransform::identity(v, f, 2)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok((graph, QuantumTransformSet::new(edges), None));
    }
    Err(Error::Graph("could not draw a commuting Pauli family for this structure".into()))
}

fn gen_identity(rng: &mut SeededRng, s: &Structure) -> Result<Generated> {
    let unitaries: Vec<CMat> = s.dims.iter().map(|&q| random_unitary(rng, q)).collect();
    let variables = s
        .dims
        .iter()
        .enumerate()
        .map(|(i, &q)| pd_variable(rng, i, q))
        .collect::<Result<Vec<_>>>()?;
    let factors = (0..s.neighbors.len())
        .map(|a| {
            let mut u = CMat::identity(1, 1);
            for &i in &s.neighbors[a] {
                u = u.kronecker(&unitaries[i]);
            }
            let d = u.nrows();
            let diag = DVector::from_fn(d, |_, _| Complex64::new(uniform(rng, 0.1, 1.0), 0.0));
            let m = hermitize(&(&u * CMat::from_diagonal(&diag) * u.adjoint()));
            Ok(QuantumFactor::new(
                Structure::factor_id(a),
                s.neighbor_ids(a),
                LabeledOperator::new(s.labels(a), m)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let graph = QuantumFactorGraph::new(variables, factors)?;
    let transforms = QuantumTransformSet::identity(&graph)?;
    Ok((graph, transforms, None))
}

/// A random classical graph with random invertible real pairs on every edge.
/// Domains are drawn from `2..=max_dim`; only the enumeration guard bounds
/// the joint size.
pub fn gen_classical(
    size: &SizeParams,
    seed: u64,
) -> Result<(ClassicalFactorGraph, Vec<ClassicalEdgeTransform>)> {
    size.validate()?;
    let mut rng = seeded(seed);
    let s = structure_where(&mut rng, size, Family::Diagonal, |s| {
        let states: u128 = s.dims.iter().map(|&q| q as u128).product();
        let edge_states: u128 = s.neighbors.iter().flatten().map(|&i| s.dims[i] as u128).product();
        states <= MAX_STATE_SPACE && edge_states <= MAX_STATE_SPACE
    })?;
    classical_instance(&mut rng, &s)
}
