//! Linear maps between operator spaces, held both as a Choi–Jamiolkowski
//! matrix and as a transfer matrix on row-major vectorized operators.
//!
//! For `T: B(H_A) → B(H_B)` the CJ matrix is `τ = ∑ T(E_kl) ⊗ E_kl` with the
//! codomain legs first, and the transfer matrix satisfies
//! `vec(T(X)) = M vec(X)` with `vec(X)[k·d + l] = X_kl`.

use nalgebra::SVD;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::raw::{self, CMat};
use crate::linalg::{display_labels, total_dim, LabeledOperator, SpaceLabel};
use crate::tolerance::{Tolerances, MAX_OPERATOR_DIM};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    domain: Vec<SpaceLabel>,
    codomain: Vec<SpaceLabel>,
    cj: CMat,
    transfer: CMat,
}

fn sorted(mut labels: Vec<SpaceLabel>) -> Vec<SpaceLabel> {
    labels.sort_by(|a, b| a.key().cmp(&b.key()));
    labels
}

fn guard(da: usize, db: usize) -> Result<()> {
    if da * db > MAX_OPERATOR_DIM {
        return Err(Error::TooLarge {
            dim: da * db,
            limit: MAX_OPERATOR_DIM,
        });
    }
    Ok(())
}

/// Reshuffles between the CJ layout and the transfer layout; the map is its
/// own inverse.
fn reshuffle(m: &CMat, da: usize, db: usize) -> CMat {
    let mut out = CMat::zeros(db * db, da * da);
    for mm in 0..db {
        for n in 0..db {
            for k in 0..da {
                for l in 0..da {
                    out[(mm * db + n, k * da + l)] = m[(mm * da + k, n * da + l)];
                }
            }
        }
    }
    out
}

fn unshuffle(t: &CMat, da: usize, db: usize) -> CMat {
    let mut out = CMat::zeros(db * da, db * da);
    for mm in 0..db {
        for n in 0..db {
            for k in 0..da {
                for l in 0..da {
                    out[(mm * da + k, n * da + l)] = t[(mm * db + n, k * da + l)];
                }
            }
        }
    }
    out
}

fn vectorize(x: &CMat) -> CMat {
    let d = x.nrows();
    CMat::from_fn(d * d, 1, |r, _| x[(r / d, r % d)])
}

fn unvectorize(v: &CMat, d: usize) -> CMat {
    CMat::from_fn(d, d, |r, c| v[(r * d + c, 0)])
}

impl SuperOperator {
    /// Builds `τ = ∑ T(E_kl) ⊗ E_kl` from the images of the matrix units of
    /// the domain. Indices of `action` follow the canonical order of
    /// `domain`, and its images that of `codomain`.
    pub fn from_action(
        domain: Vec<SpaceLabel>,
        codomain: Vec<SpaceLabel>,
        mut action: impl FnMut(usize, usize) -> CMat,
    ) -> Result<Self> {
        let (domain, codomain) = (sorted(domain), sorted(codomain));
        let (da, db) = (total_dim(&domain), total_dim(&codomain));
        guard(da, db)?;
        let mut cj = CMat::zeros(db * da, db * da);
        for k in 0..da {
            for l in 0..da {
                let img = action(k, l);
                if img.shape() != (db, db) {
                    return Err(Error::Dimension(format!(
                        "image of E_({k},{l}) is {:?}, codomain [{}] needs side {db}",
                        img.shape(),
                        display_labels(&codomain)
                    )));
                }
                for m in 0..db {
                    for n in 0..db {
                        cj[(m * da + k, n * da + l)] = img[(m, n)];
                    }
                }
            }
        }
        let transfer = reshuffle(&cj, da, db);
        Ok(Self {
            domain,
            codomain,
            cj,
            transfer,
        })
    }

    /// Wraps a CJ matrix whose legs are the canonical codomain followed by the
    /// canonical domain.
    pub fn from_cj(domain: Vec<SpaceLabel>, codomain: Vec<SpaceLabel>, cj: CMat) -> Result<Self> {
        let (domain, codomain) = (sorted(domain), sorted(codomain));
        let (da, db) = (total_dim(&domain), total_dim(&codomain));
        guard(da, db)?;
        if cj.shape() != (da * db, da * db) {
            return Err(Error::Dimension(format!(
                "CJ matrix is {:?}, expected side {}",
                cj.shape(),
                da * db
            )));
        }
        let transfer = reshuffle(&cj, da, db);
        Ok(Self {
            domain,
            codomain,
            cj,
            transfer,
        })
    }

    pub fn from_transfer(
        domain: Vec<SpaceLabel>,
        codomain: Vec<SpaceLabel>,
        transfer: CMat,
    ) -> Result<Self> {
        let (domain, codomain) = (sorted(domain), sorted(codomain));
        let (da, db) = (total_dim(&domain), total_dim(&codomain));
        guard(da, db)?;
        if transfer.shape() != (db * db, da * da) {
            return Err(Error::Dimension(format!(
                "transfer matrix is {:?}, expected {}x{}",
                transfer.shape(),
                db * db,
                da * da
            )));
        }
        let cj = unshuffle(&transfer, da, db);
        Ok(Self {
            domain,
            codomain,
            cj,
            transfer,
        })
    }

    /// Reads a CJ matrix held as an operator on `codomain ∪ domain`; the
    /// labels not listed in `domain` form the codomain.
    pub fn from_labeled_cj(cj: &LabeledOperator, domain: &[SpaceLabel]) -> Result<Self> {
        for l in domain {
            if !cj.has_label(l) {
                return Err(Error::UnknownLabel(l.to_string()));
            }
        }
        let domain = sorted(domain.to_vec());
        let codomain: Vec<SpaceLabel> = cj
            .labels()
            .iter()
            .filter(|l| !domain.contains(l))
            .cloned()
            .collect();
        let order: Vec<usize> = codomain
            .iter()
            .chain(&domain)
            .map(|l| cj.labels().iter().position(|x| x == l).unwrap())
            .collect();
        let m = raw::permute_legs(cj.matrix(), &cj.dims(), &order);
        Self::from_cj(domain, codomain, m)
    }

    /// The CJ matrix as an operator on `codomain ∪ domain`. Fails when the
    /// two share a space.
    pub fn cj_operator(&self) -> Result<LabeledOperator> {
        let labels: Vec<SpaceLabel> = self.codomain.iter().chain(&self.domain).cloned().collect();
        LabeledOperator::new(labels, self.cj.clone())
    }

    /// `E_kl` on `from` to `E_kl` on `to`; the label lists are matched
    /// position by position and must agree in dimension.
    pub fn identity_relabel(from: &[SpaceLabel], to: &[SpaceLabel]) -> Result<Self> {
        if from.len() != to.len() || from.iter().zip(to).any(|(a, b)| a.dim != b.dim) {
            return Err(Error::Dimension(format!(
                "cannot identify [{}] with [{}]",
                display_labels(from),
                display_labels(to)
            )));
        }
        // index of an E_kl on `from` (canonical) seen through `to` (canonical)
        let perm = pairing_permutation(from, to);
        Self::from_action(from.to_vec(), to.to_vec(), |k, l| {
            let d = total_dim(to);
            raw::matrix_unit(d, perm[k], perm[l])
        })
    }

    pub fn identity(labels: &[SpaceLabel]) -> Result<Self> {
        Self::identity_relabel(labels, labels)
    }

    /// `E_kl ↦ δ_kl E_kk`, carried from `from` to `to`.
    pub fn dephasing_relabel(from: &[SpaceLabel], to: &[SpaceLabel]) -> Result<Self> {
        let id = Self::identity_relabel(from, to)?;
        let d = total_dim(from);
        let mut t = id.transfer.clone();
        for k in 0..d {
            for l in 0..d {
                if k != l {
                    t.column_mut(k * d + l).fill(Complex64::new(0.0, 0.0));
                }
            }
        }
        Self::from_transfer(id.domain, id.codomain, t)
    }

    /// `X ↦ U X U†` with `U` mapping the domain space into the codomain space.
    pub fn conjugation(domain: Vec<SpaceLabel>, codomain: Vec<SpaceLabel>, u: &CMat) -> Result<Self> {
        let (da, db) = (total_dim(&domain), total_dim(&codomain));
        if u.shape() != (db, da) {
            return Err(Error::Dimension(format!(
                "conjugating matrix is {:?}, expected {db}x{da}",
                u.shape()
            )));
        }
        let ud = u.adjoint();
        Self::from_action(domain, codomain, |k, l| {
            CMat::from_fn(db, db, |m, n| u[(m, k)] * ud[(l, n)])
        })
    }

    pub fn domain(&self) -> &[SpaceLabel] {
        &self.domain
    }

    pub fn codomain(&self) -> &[SpaceLabel] {
        &self.codomain
    }

    pub fn domain_dim(&self) -> usize {
        total_dim(&self.domain)
    }

    pub fn codomain_dim(&self) -> usize {
        total_dim(&self.codomain)
    }

    pub fn cj(&self) -> &CMat {
        &self.cj
    }

    pub fn transfer(&self) -> &CMat {
        &self.transfer
    }

    /// `T(E_kl)`, read off the CJ matrix.
    pub fn image_of_unit(&self, k: usize, l: usize) -> CMat {
        let (da, db) = (self.domain_dim(), self.codomain_dim());
        CMat::from_fn(db, db, |m, n| self.cj[(m * da + k, n * da + l)])
    }

    fn check_domain(&self, g: &LabeledOperator) -> Result<()> {
        if g.labels() != self.domain.as_slice() {
            return Err(Error::Dimension(format!(
                "operator on [{}] given to a map with domain [{}]",
                display_labels(g.labels()),
                display_labels(&self.domain)
            )));
        }
        Ok(())
    }

    /// `Tr_A(τ (I_B ⊗ Gᵀ))`, contracted entrywise.
    pub fn apply(&self, g: &LabeledOperator) -> Result<LabeledOperator> {
        self.check_domain(g)?;
        let (da, db) = (self.domain_dim(), self.codomain_dim());
        let gm = g.matrix();
        let out = CMat::from_fn(db, db, |m, n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..da {
                for l in 0..da {
                    acc += self.cj[(m * da + k, n * da + l)] * gm[(k, l)];
                }
            }
            acc
        });
        LabeledOperator::new(self.codomain.clone(), out)
    }

    /// The same partial trace formed literally: `I_B ⊗ Gᵀ`, a product, and a
    /// partial trace over the domain legs.
    pub fn apply_by_partial_trace(&self, g: &LabeledOperator) -> Result<LabeledOperator> {
        self.check_domain(g)?;
        let (da, db) = (self.domain_dim(), self.codomain_dim());
        let ext = CMat::identity(db, db).kronecker(&g.matrix().transpose());
        let prod = &self.cj * ext;
        let out = raw::trace_out(&prod, &[db, da], &[false, true]);
        LabeledOperator::new(self.codomain.clone(), out)
    }

    /// `vec(T(G)) = M vec(G)`.
    pub fn apply_transfer(&self, g: &LabeledOperator) -> Result<LabeledOperator> {
        self.check_domain(g)?;
        let v = &self.transfer * vectorize(g.matrix());
        LabeledOperator::new(self.codomain.clone(), unvectorize(&v, self.codomain_dim()))
    }

    /// `(T ⊗ id)(G)` for an operator carrying the domain legs among others.
    pub fn apply_partial(&self, g: &LabeledOperator) -> Result<LabeledOperator> {
        let labels = g.labels();
        let mut pos = Vec::with_capacity(self.domain.len());
        for l in &self.domain {
            match labels.iter().position(|x| x == l) {
                Some(p) => pos.push(p),
                None => return Err(Error::UnknownLabel(l.to_string())),
            }
        }
        let rest: Vec<usize> = (0..labels.len()).filter(|p| !pos.contains(p)).collect();
        let order: Vec<usize> = pos.iter().chain(&rest).copied().collect();
        let gp = raw::permute_legs(g.matrix(), &g.dims(), &order);
        let (da, db) = (self.domain_dim(), self.codomain_dim());
        let dr: usize = rest.iter().map(|&p| labels[p].dim).product();
        let mut out = CMat::zeros(db * dr, db * dr);
        for k in 0..da {
            for l in 0..da {
                let block = gp.view((k * dr, l * dr), (dr, dr));
                if block.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                    continue;
                }
                for m in 0..db {
                    for n in 0..db {
                        let t = self.cj[(m * da + k, n * da + l)];
                        if t == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let mut dst = out.view_mut((m * dr, n * dr), (dr, dr));
                        dst += block * t;
                    }
                }
            }
        }
        let new_labels: Vec<SpaceLabel> = self
            .codomain
            .iter()
            .cloned()
            .chain(rest.iter().map(|&p| labels[p].clone()))
            .collect();
        LabeledOperator::new(new_labels, out)
    }

    /// The map `T*` with `Tr(B T(A)) = Tr(T*(B) A)` for all `A`, `B`.
    pub fn adjoint(&self) -> Self {
        let (da, db) = (self.domain_dim(), self.codomain_dim());
        let m = &self.transfer;
        let t = CMat::from_fn(da * da, db * db, |r, c| {
            let (k, l) = (r / da, r % da);
            let (mm, n) = (c / db, c % db);
            m[(n * db + mm, l * da + k)]
        });
        Self::from_transfer(self.codomain.clone(), self.domain.clone(), t)
            .expect("adjoint preserves the size guard")
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &SuperOperator) -> Result<Self> {
        if self.domain != inner.codomain {
            return Err(Error::Dimension(format!(
                "cannot compose: outer domain [{}], inner codomain [{}]",
                display_labels(&self.domain),
                display_labels(&inner.codomain)
            )));
        }
        Self::from_transfer(
            inner.domain.clone(),
            self.codomain.clone(),
            &self.transfer * &inner.transfer,
        )
    }

    /// Condition number of the transfer matrix (infinite if not square).
    pub fn condition_number(&self) -> f64 {
        if self.domain_dim() != self.codomain_dim() {
            return f64::INFINITY;
        }
        let s = SVD::new(self.transfer.clone(), false, false).singular_values;
        let max = s.iter().cloned().fold(0.0, f64::max);
        let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
        if min > 0.0 {
            max / min
        } else {
            f64::INFINITY
        }
    }

    pub fn invert(&self) -> Result<Self> {
        self.invert_with(&Tolerances::default())
    }

    /// Inverse map from the codomain back to the domain.
    pub fn invert_with(&self, tol: &Tolerances) -> Result<Self> {
        let cond = self.condition_number();
        if !(cond <= tol.max_condition) {
            return Err(Error::IllConditioned(cond));
        }
        let inv = self
            .transfer
            .clone()
            .try_inverse()
            .ok_or(Error::IllConditioned(f64::INFINITY))?;
        Self::from_transfer(self.codomain.clone(), self.domain.clone(), inv)
    }

    /// Same map, with the domain legs renamed position by position.
    pub fn relabel_domain(&self, to: &[SpaceLabel]) -> Result<Self> {
        self.compose(&Self::identity_relabel(to, &self.domain)?)
    }

    /// Same map, with the codomain legs renamed position by position.
    pub fn relabel_codomain(&self, to: &[SpaceLabel]) -> Result<Self> {
        Self::identity_relabel(&self.codomain, to)?.compose(self)
    }

    /// Relative Frobenius distance between transfer matrices.
    pub fn distance(&self, other: &SuperOperator) -> Result<f64> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::Dimension("maps act between different spaces".into()));
        }
        let diff = raw::frobenius(&(&self.transfer - &other.transfer));
        let scale = raw::frobenius(&other.transfer);
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }
}

/// For each canonical index over `from`, the canonical index over `to` of the
/// basis vector with the same per-position digits.
fn pairing_permutation(from: &[SpaceLabel], to: &[SpaceLabel]) -> Vec<usize> {
    let cf = sorted(from.to_vec());
    let ct = sorted(to.to_vec());
    // digits in the given order, strides in canonical order of each side
    let fpos: Vec<usize> = from.iter().map(|l| cf.iter().position(|x| x == l).unwrap()).collect();
    let tpos: Vec<usize> = to.iter().map(|l| ct.iter().position(|x| x == l).unwrap()).collect();
    let fdims: Vec<usize> = cf.iter().map(|l| l.dim).collect();
    let tdims: Vec<usize> = ct.iter().map(|l| l.dim).collect();
    let (fs, ts) = (raw::strides(&fdims), raw::strides(&tdims));
    let d = total_dim(from);
    (0..d)
        .map(|idx| {
            (0..from.len())
                .map(|j| ((idx / fs[fpos[j]]) % fdims[fpos[j]]) * ts[tpos[j]])
                .sum()
        })
        .collect()
}

/// `(T₁ ⊗̄ T₂ ⊗̄ …)(E₁ ⊗ E₂ ⊗ …) = T₁(E₁) T₂(E₂) …`, the product taken in
/// argument order. All maps share one codomain; their domains must be
/// disjoint.
pub fn bar_otimes(maps: &[&SuperOperator]) -> Result<SuperOperator> {
    let first = maps
        .first()
        .ok_or_else(|| Error::Dimension("empty list of maps".into()))?;
    let codomain = first.codomain.clone();
    for t in maps {
        if t.codomain != codomain {
            return Err(Error::Dimension(format!(
                "codomains differ: [{}] vs [{}]",
                display_labels(&t.codomain),
                display_labels(&codomain)
            )));
        }
    }
    let mut domain: Vec<SpaceLabel> = Vec::new();
    for t in maps {
        domain = LabeledOperator::label_union(&domain, &t.domain)?;
    }
    if domain.len() != maps.iter().map(|t| t.domain.len()).sum::<usize>() {
        return Err(Error::Dimension("domains of the maps overlap".into()));
    }
    let dims: Vec<usize> = domain.iter().map(|l| l.dim).collect();
    let strides = raw::strides(&dims);
    // for each map: (positions of its legs in the union, its own strides)
    let layout: Vec<(Vec<usize>, Vec<usize>)> = maps
        .iter()
        .map(|t| {
            let pos: Vec<usize> = t
                .domain
                .iter()
                .map(|l| domain.iter().position(|x| x == l).unwrap())
                .collect();
            let own: Vec<usize> = t.domain.iter().map(|l| l.dim).collect();
            (pos, raw::strides(&own))
        })
        .collect();
    let local = |idx: usize, (pos, own): &(Vec<usize>, Vec<usize>)| -> usize {
        pos.iter()
            .zip(own)
            .map(|(&p, &s)| ((idx / strides[p]) % dims[p]) * s)
            .sum()
    };
    let db = total_dim(&codomain);
    SuperOperator::from_action(domain.clone(), codomain, |k, l| {
        let mut acc = CMat::identity(db, db);
        for (t, lay) in maps.iter().zip(&layout) {
            acc *= t.image_of_unit(local(k, lay), local(l, lay));
        }
        acc
    })
}

/// `𝔽 = ∑ E_kl ⊗ E_lk` exchanging two spaces of equal dimension.
pub fn swap_operator(a: &SpaceLabel, b: &SpaceLabel) -> Result<LabeledOperator> {
    if a.dim != b.dim {
        return Err(Error::Dimension(format!("cannot swap {a} and {b}")));
    }
    let q = a.dim;
    let m = CMat::from_fn(q * q, q * q, |r, c| {
        let (k, l2) = (r / q, r % q);
        let (l, k2) = (c / q, c % q);
        if k == k2 && l == l2 {
            ONE
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    LabeledOperator::new(vec![a.clone(), b.clone()], m)
}

/// `∑_j E_jj ⊗ E_jj` on two spaces of equal dimension.
pub fn diagonal_witness(a: &SpaceLabel, b: &SpaceLabel) -> Result<LabeledOperator> {
    if a.dim != b.dim {
        return Err(Error::Dimension(format!("cannot pair {a} and {b}")));
    }
    let q = a.dim;
    let m = CMat::from_fn(q * q, q * q, |r, c| {
        if r == c && r / q == r % q {
            ONE
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    LabeledOperator::new(vec![a.clone(), b.clone()], m)
}

/// Residuals of an inverse-pair condition computed two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseResidual {
    /// `‖Tr_Ĥ(φ̂ᵀ φ) − W‖_F / ‖W‖_F` for the mode's witness `W`.
    pub witness: f64,
    /// `‖ΦΦ̂ − R‖_F / ‖R‖_F` on transfer matrices, `R` the mode's reference map.
    pub map: f64,
}

impl InverseResidual {
    pub fn max(&self) -> f64 {
        self.witness.max(self.map)
    }
}

struct PairShape {
    base: SpaceLabel,
    hat: SpaceLabel,
    prime: SpaceLabel,
}

fn pair_shape(phi: &LabeledOperator, phi_hat: &LabeledOperator) -> Result<PairShape> {
    let shared: Vec<&SpaceLabel> = phi.labels().iter().filter(|l| phi_hat.has_label(l)).collect();
    let bad = || {
        Error::Dimension(format!(
            "expected phi on [H, Ĥ] and phi_hat on [Ĥ, H'], got [{}] and [{}]",
            display_labels(phi.labels()),
            display_labels(phi_hat.labels())
        ))
    };
    if phi.labels().len() != 2 || phi_hat.labels().len() != 2 || shared.len() != 1 {
        return Err(bad());
    }
    let hat = shared[0].clone();
    let base = phi.labels().iter().find(|l| **l != hat).unwrap().clone();
    let prime = phi_hat.labels().iter().find(|l| **l != hat).unwrap().clone();
    if base.dim != hat.dim || prime.dim != hat.dim {
        return Err(bad());
    }
    Ok(PairShape { base, hat, prime })
}

fn pair_product(phi: &LabeledOperator, phi_hat: &LabeledOperator, s: &PairShape) -> Result<LabeledOperator> {
    phi_hat
        .transpose()
        .compose(phi)?
        .partial_trace(std::slice::from_ref(&s.hat))
}

fn pair_map(phi: &LabeledOperator, phi_hat: &LabeledOperator, s: &PairShape) -> Result<SuperOperator> {
    let big = SuperOperator::from_labeled_cj(phi, std::slice::from_ref(&s.hat))?;
    let small = SuperOperator::from_labeled_cj(phi_hat, std::slice::from_ref(&s.prime))?;
    big.compose(&small)
}

/// `Tr_Ĥ(φ̂ᵀ φ) = 𝔽`, checked alongside `ΦΦ̂ = id` on transfer matrices.
pub fn check_strong_inverse(phi: &LabeledOperator, phi_hat: &LabeledOperator) -> Result<InverseResidual> {
    let s = pair_shape(phi, phi_hat)?;
    let witness = pair_product(phi, phi_hat, &s)?.relative_distance(&swap_operator(&s.base, &s.prime)?)?;
    let reference = SuperOperator::identity_relabel(
        std::slice::from_ref(&s.prime),
        std::slice::from_ref(&s.base),
    )?;
    let map = pair_map(phi, phi_hat, &s)?.distance(&reference)?;
    Ok(InverseResidual { witness, map })
}

/// `Tr_Ĥ(φ̂ᵀ φ) = ∑_j E_jj ⊗ E_jj`, checked alongside `ΦΦ̂` equal to the
/// dephasing map.
pub fn check_diagonal_inverse(phi: &LabeledOperator, phi_hat: &LabeledOperator) -> Result<InverseResidual> {
    let s = pair_shape(phi, phi_hat)?;
    let witness =
        pair_product(phi, phi_hat, &s)?.relative_distance(&diagonal_witness(&s.base, &s.prime)?)?;
    let reference = SuperOperator::dephasing_relabel(
        std::slice::from_ref(&s.prime),
        std::slice::from_ref(&s.base),
    )?;
    let map = pair_map(phi, phi_hat, &s)?.distance(&reference)?;
    Ok(InverseResidual { witness, map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix, random_unitary, seeded};

    fn q(name: &str, d: usize) -> Vec<SpaceLabel> {
        vec![SpaceLabel::base(name, d)]
    }

    fn random_map(seed: u64, da: usize, db: usize) -> SuperOperator {
        let mut rng = seeded(seed);
        let n = (da * da).max(db * db);
        let big = random_matrix(&mut rng, n);
        let t = big.view((0, 0), (db * db, da * da)).into_owned();
        SuperOperator::from_transfer(q("a", da), q("b", db), t).unwrap()
    }

    fn op(labels: Vec<SpaceLabel>, m: CMat) -> LabeledOperator {
        LabeledOperator::new(labels, m).unwrap()
    }

    #[test]
    fn identity_cj_is_unit_pattern() {
        let id = SuperOperator::identity(&q("a", 2)).unwrap();
        let mut expect = CMat::zeros(4, 4);
        for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            expect[(r, c)] = ONE;
        }
        assert_eq!(id.cj(), &expect);
        assert_eq!(id.transfer(), &CMat::identity(4, 4));
    }

    #[test]
    fn completely_depolarizing_cj() {
        let d = 3;
        let t = SuperOperator::from_action(q("a", d), q("b", d), |k, l| {
            if k == l {
                CMat::identity(d, d).unscale(d as f64)
            } else {
                CMat::zeros(d, d)
            }
        })
        .unwrap();
        assert!(raw::frobenius(&(t.cj() - CMat::identity(9, 9).unscale(3.0))) < 1e-15);
    }

    #[test]
    fn pauli_x_conjugation_flips() {
        let x = CMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0].map(|v| Complex64::new(v, 0.0)));
        let t = SuperOperator::conjugation(q("a", 2), q("a", 2), &x).unwrap();
        let g = op(q("a", 2), raw::matrix_unit(2, 0, 0));
        assert_eq!(t.apply(&g).unwrap().matrix(), &raw::matrix_unit(2, 1, 1));
    }

    #[test]
    fn application_routes_agree() {
        let t = random_map(1, 3, 2);
        let mut rng = seeded(2);
        let g = op(q("a", 3), random_matrix(&mut rng, 3));
        let a = t.apply(&g).unwrap();
        assert!(a.relative_distance(&t.apply_transfer(&g).unwrap()).unwrap() < 1e-13);
        assert!(a.relative_distance(&t.apply_by_partial_trace(&g).unwrap()).unwrap() < 1e-13);
        for k in 0..3 {
            for l in 0..3 {
                let e = op(q("a", 3), raw::matrix_unit(3, k, l));
                assert_eq!(t.apply(&e).unwrap().matrix(), &t.image_of_unit(k, l));
            }
        }
    }

    #[test]
    fn cj_and_transfer_roundtrip() {
        let t = random_map(3, 2, 3);
        let again = SuperOperator::from_cj(q("a", 2), q("b", 3), t.cj().clone()).unwrap();
        assert_eq!(again.transfer(), t.transfer());
        let lab = t.cj_operator().unwrap();
        let back = SuperOperator::from_labeled_cj(&lab, &q("a", 2)).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn adjoint_pairing_and_involution() {
        let t = random_map(4, 2, 3);
        let adj = t.adjoint();
        let mut rng = seeded(5);
        let a = op(q("a", 2), random_matrix(&mut rng, 2));
        let b = op(q("b", 3), random_matrix(&mut rng, 3));
        let lhs = raw::trace_of_product(b.matrix(), t.apply(&a).unwrap().matrix());
        let rhs = raw::trace_of_product(adj.apply(&b).unwrap().matrix(), a.matrix());
        assert!((lhs - rhs).norm() < 1e-12);
        assert_eq!(adj.adjoint(), t);
        let id = SuperOperator::identity(&q("a", 3)).unwrap();
        assert_eq!(id.adjoint(), id);
    }

    #[test]
    fn adjoint_of_conjugation() {
        let mut rng = seeded(6);
        let u = random_unitary(&mut rng, 2);
        let t = SuperOperator::conjugation(q("a", 2), q("a", 2), &u).unwrap();
        let back = SuperOperator::conjugation(q("a", 2), q("a", 2), &u.adjoint()).unwrap();
        assert!(t.adjoint().distance(&back).unwrap() < 1e-13);
    }

    #[test]
    fn compose_invert_identities() {
        let t = random_map(7, 2, 2);
        let id_a = SuperOperator::identity(&q("a", 2)).unwrap();
        let id_b = SuperOperator::identity(&q("b", 2)).unwrap();
        assert!(t.compose(&id_a).unwrap().distance(&t).unwrap() < 1e-15);
        let inv = t.invert().unwrap();
        assert!(inv.compose(&t).unwrap().distance(&id_a).unwrap() < 1e-9);
        assert!(t.compose(&inv).unwrap().distance(&id_b).unwrap() < 1e-9);
        assert!(t.compose(&t).is_err());
        assert_eq!(id_a.invert().unwrap(), id_a);
    }

    #[test]
    fn inverse_of_conjugation_is_dagger() {
        let mut rng = seeded(8);
        let u = random_unitary(&mut rng, 3);
        let t = SuperOperator::conjugation(q("a", 3), q("a", 3), &u).unwrap();
        let back = SuperOperator::conjugation(q("a", 3), q("a", 3), &u.adjoint()).unwrap();
        assert!(t.invert().unwrap().distance(&back).unwrap() < 1e-12);
    }

    #[test]
    fn singular_map_rejected() {
        let t = SuperOperator::dephasing_relabel(&q("a", 2), &q("a", 2)).unwrap();
        assert!(matches!(t.invert(), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn associativity() {
        let a = random_map(9, 2, 2);
        let b = SuperOperator::from_transfer(q("b", 2), q("c", 2), random_map(10, 2, 2).transfer().clone()).unwrap();
        let c = SuperOperator::from_transfer(q("c", 2), q("d", 2), random_map(11, 2, 2).transfer().clone()).unwrap();
        let l = c.compose(&b).unwrap().compose(&a).unwrap();
        let r = c.compose(&b.compose(&a).unwrap()).unwrap();
        assert!(l.distance(&r).unwrap() < 1e-12);
    }

    #[test]
    fn bar_otimes_identity_units() {
        let a = q("a", 2);
        let c = q("c", 2);
        let b = q("b", 2);
        let t1 = SuperOperator::identity_relabel(&a, &b).unwrap();
        let t2 = SuperOperator::identity_relabel(&c, &b).unwrap();
        let bo = bar_otimes(&[&t1, &t2]).unwrap();
        // E_00 ⊗ E_11 has composite index (0,1),(0,1) → E_00 E_11 = 0
        let g = op(vec![a[0].clone(), c[0].clone()], raw::matrix_unit(4, 1, 1));
        assert_eq!(bo.apply(&g).unwrap().frobenius_norm(), 0.0);
        // E_01 ⊗ E_10 → E_01 E_10 = E_00
        let g = op(vec![a[0].clone(), c[0].clone()], raw::matrix_unit(4, 1, 2));
        assert_eq!(bo.apply(&g).unwrap().matrix(), &raw::matrix_unit(2, 0, 0));
    }

    #[test]
    fn bar_otimes_on_products_and_order() {
        let mut rng = seeded(12);
        let a = q("a", 2);
        let c = q("c", 2);
        let t1 = SuperOperator::from_transfer(a.clone(), q("b", 2), random_matrix(&mut rng, 4)).unwrap();
        let t2 = SuperOperator::from_transfer(c.clone(), q("b", 2), random_matrix(&mut rng, 4)).unwrap();
        let v = random_matrix(&mut rng, 2).column(0).into_owned();
        let w = random_matrix(&mut rng, 2).column(0).into_owned();
        let ra = op(a.clone(), &v * v.adjoint());
        let rc = op(c.clone(), &w * w.adjoint());
        let bo = bar_otimes(&[&t1, &t2]).unwrap();
        let lhs = bo.apply(&ra.tensor(&rc).unwrap()).unwrap();
        let rhs = t1.apply(&ra).unwrap().matrix() * t2.apply(&rc).unwrap().matrix();
        assert!(raw::frobenius(&(lhs.matrix() - &rhs)) < 1e-12);
        let swapped = bar_otimes(&[&t2, &t1]).unwrap();
        let other = swapped.apply(&ra.tensor(&rc).unwrap()).unwrap();
        assert!(raw::frobenius(&(lhs.matrix() - other.matrix())) > 1e-3);
        assert!(bar_otimes(&[&t1, &t1]).is_err());
    }

    #[test]
    fn swap_operator_properties() {
        let a = SpaceLabel::base("i", 3);
        let b = SpaceLabel::prime("i", "f", 3);
        let f = swap_operator(&a, &b).unwrap();
        let sq = f.matrix() * f.matrix();
        assert_eq!(sq, CMat::identity(9, 9));
        assert_eq!(f.dagger(), f);
        let t = f.partial_trace(std::slice::from_ref(&a)).unwrap();
        assert_eq!(t.matrix(), &CMat::identity(3, 3));
        let t = f.partial_trace(std::slice::from_ref(&b)).unwrap();
        assert_eq!(t.matrix(), &CMat::identity(3, 3));
    }

    fn edge_labels(q: usize) -> (SpaceLabel, SpaceLabel, SpaceLabel) {
        (
            SpaceLabel::base("i", q),
            SpaceLabel::hat("i", "a", q),
            SpaceLabel::prime("i", "a", q),
        )
    }

    #[test]
    fn identity_pair_is_strong_inverse() {
        let (h, hh, p) = edge_labels(3);
        let phi = SuperOperator::identity_relabel(std::slice::from_ref(&hh), std::slice::from_ref(&h)).unwrap();
        let phi_hat = SuperOperator::identity_relabel(std::slice::from_ref(&p), std::slice::from_ref(&hh)).unwrap();
        let r = check_strong_inverse(&phi.cj_operator().unwrap(), &phi_hat.cj_operator().unwrap()).unwrap();
        assert!(r.witness <= 1e-12 && r.map <= 1e-12);
        let d = check_diagonal_inverse(&phi.cj_operator().unwrap(), &phi_hat.cj_operator().unwrap()).unwrap();
        assert!(d.witness > 0.5);
    }

    #[test]
    fn random_pair_is_strong_inverse() {
        let (h, hh, p) = edge_labels(2);
        let mut rng = seeded(13);
        let phi = SuperOperator::from_transfer(vec![hh.clone()], vec![h.clone()], random_matrix(&mut rng, 4)).unwrap();
        let phi_hat = phi.invert().unwrap().relabel_domain(std::slice::from_ref(&p)).unwrap();
        let r = check_strong_inverse(&phi.cj_operator().unwrap(), &phi_hat.cj_operator().unwrap()).unwrap();
        assert!(r.max() <= 1e-9);
        let zero = LabeledOperator::zeros(vec![hh, p]).unwrap();
        let r = check_strong_inverse(&phi.cj_operator().unwrap(), &zero).unwrap();
        assert_eq!(r.witness, 1.0);
        assert_eq!(r.map, 1.0);
    }

    #[test]
    fn hadamard_pair_is_diagonal_inverse() {
        let (h, hh, p) = edge_labels(2);
        let had = [[1.0, 1.0], [1.0, -1.0]];
        // diagonal CJ matrices carrying the classical pair entry by entry
        let phi = op(
            vec![h.clone(), hh.clone()],
            CMat::from_diagonal(&nalgebra::DVector::from_fn(4, |r, _| {
                Complex64::new(had[r / 2][r % 2], 0.0)
            })),
        );
        let phi_hat = op(
            vec![hh.clone(), p.clone()],
            CMat::from_diagonal(&nalgebra::DVector::from_fn(4, |r, _| {
                Complex64::new(0.5 * had[r / 2][r % 2], 0.0)
            })),
        );
        let r = check_diagonal_inverse(&phi, &phi_hat).unwrap();
        assert!(r.witness <= 1e-10 && r.map <= 1e-10);
    }

    #[test]
    fn one_dimensional_conditions_coincide() {
        let (h, hh, p) = edge_labels(1);
        let phi = op(vec![h, hh.clone()], CMat::from_element(1, 1, Complex64::new(2.0, 0.0)));
        let phi_hat = op(vec![hh, p], CMat::from_element(1, 1, Complex64::new(0.5, 0.0)));
        let s = check_strong_inverse(&phi, &phi_hat).unwrap();
        let d = check_diagonal_inverse(&phi, &phi_hat).unwrap();
        assert_eq!(s, d);
        assert!(s.max() < 1e-15);
    }

    #[test]
    fn apply_partial_matches_tensor_functoriality() {
        let mut rng = seeded(14);
        let (a, b) = (SpaceLabel::prime("x", "f", 2), SpaceLabel::prime("y", "f", 3));
        let (ah, bh) = (SpaceLabel::hat("x", "f", 2), SpaceLabel::hat("y", "f", 3));
        let t1 = SuperOperator::from_transfer(vec![a.clone()], vec![ah.clone()], random_matrix(&mut rng, 4)).unwrap();
        let t2 = SuperOperator::from_transfer(vec![b.clone()], vec![bh.clone()], random_matrix(&mut rng, 9)).unwrap();
        let f = op(vec![a], random_matrix(&mut rng, 2));
        let g = op(vec![b], random_matrix(&mut rng, 3));
        let fg = f.tensor(&g).unwrap();
        let out = t2.apply_partial(&t1.apply_partial(&fg).unwrap()).unwrap();
        let expect = t1.apply(&f).unwrap().tensor(&t2.apply(&g).unwrap()).unwrap();
        assert!(out.relative_distance(&expect).unwrap() < 1e-12);
    }
}
