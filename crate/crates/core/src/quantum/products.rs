//! The ⋆⁽ⁿ⁾ and ⊙ products of PSD operators and their behavior under partial
//! traces.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::raw::{self, CMat};
use crate::linalg::spectral::{
    hermitian_exp, hermitize, matrix_power, pd_log, psd_power, support_projector_matrix,
};
use crate::linalg::{LabeledOperator, SpaceLabel};
use crate::random::{random_pd_with_spectrum, seeded};
use crate::tolerance::Tolerances;

/// Eigenvalue threshold of `2I − P − P'` below which a direction counts as
/// lying in both supports.
const INTERSECTION_TOL: f64 = 1e-9;

/// `(Λ^{1/2n} Λ'^{1/n} Λ^{1/2n})^n` on the union of the operands' labels.
pub fn star_n(a: &LabeledOperator, b: &LabeledOperator, n: u32) -> Result<LabeledOperator> {
    star_n_with(a, b, n, &Tolerances::default())
}

pub fn star_n_with(
    a: &LabeledOperator,
    b: &LabeledOperator,
    n: u32,
    tol: &Tolerances,
) -> Result<LabeledOperator> {
    if n == 0 {
        return Err(Error::Dimension("star product order must be positive".into()));
    }
    let (a, b) = a.aligned(b)?;
    let half = psd_power(a.matrix(), 1.0 / (2.0 * n as f64), tol)?;
    let step = psd_power(b.matrix(), 1.0 / n as f64, tol)?;
    let inner = hermitize(&(&half * step * &half));
    a.with_matrix(hermitize(&matrix_power(&inner, n)))
}

/// `Λ ⋆ Λ' = Λ^{1/2} Λ' Λ^{1/2}`.
pub fn star(a: &LabeledOperator, b: &LabeledOperator) -> Result<LabeledOperator> {
    star_n(a, b, 1)
}

/// `exp(log Λ|_S + log Λ'|_S)` on the intersection `S` of the supports,
/// zero on its complement.
pub fn odot(a: &LabeledOperator, b: &LabeledOperator) -> Result<LabeledOperator> {
    odot_with(a, b, &Tolerances::default())
}

pub fn odot_with(a: &LabeledOperator, b: &LabeledOperator, tol: &Tolerances) -> Result<LabeledOperator> {
    let (a, b) = a.aligned(b)?;
    let n = a.dim();
    let pa = support_projector_matrix(a.matrix(), tol)?;
    let pb = support_projector_matrix(b.matrix(), tol)?;
    let k = hermitize(&(CMat::identity(n, n).scale(2.0) - pa - pb));
    let eig = SymmetricEigen::new(k);
    let basis: Vec<usize> = (0..n)
        .filter(|&j| eig.eigenvalues[j] < INTERSECTION_TOL)
        .collect();
    if basis.is_empty() {
        return a.with_matrix(CMat::zeros(n, n));
    }
    let w = CMat::from_fn(n, basis.len(), |r, c| eig.eigenvectors[(r, basis[c])]);
    let wd = w.adjoint();
    let ra = hermitize(&(&wd * a.matrix() * &w));
    let rb = hermitize(&(&wd * b.matrix() * &w));
    let sum = pd_log(&ra, tol)? + pd_log(&rb, tol)?;
    let e = hermitian_exp(&sum);
    a.with_matrix(hermitize(&(&w * e * wd)))
}

/// Splits two label lists into the `A` / `B` / `C` pattern of a pair of
/// operators overlapping on `B`.
fn overlap_shape(
    ab: &LabeledOperator,
    bc: &LabeledOperator,
) -> Result<(Vec<SpaceLabel>, Vec<SpaceLabel>)> {
    let a: Vec<SpaceLabel> = ab.labels().iter().filter(|l| !bc.has_label(l)).cloned().collect();
    let c: Vec<SpaceLabel> = bc.labels().iter().filter(|l| !ab.has_label(l)).cloned().collect();
    let shared = ab.labels().len() - a.len();
    if a.is_empty() || c.is_empty() || shared == 0 {
        return Err(Error::Dimension(format!(
            "operators must overlap on some spaces and each own private ones; got {} private, {} shared, {} private",
            a.len(),
            shared,
            c.len()
        )));
    }
    Ok((a, c))
}

/// Both sides of a distributivity law and their relative gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributivityGap {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub relative: f64,
}

fn gap(lhs: Complex64, rhs: Complex64) -> DistributivityGap {
    DistributivityGap {
        lhs,
        rhs,
        relative: (lhs - rhs).norm() / lhs.norm().max(1.0),
    }
}

/// `|Tr(Λ_AB ⋆ Λ_BC) − Tr_B(Tr_A Λ_AB ⋆ Tr_C Λ_BC)| / max(1, |lhs|)`.
pub fn check_star_distributivity(ab: &LabeledOperator, bc: &LabeledOperator) -> Result<f64> {
    Ok(star_distributivity_gap(ab, bc)?.relative)
}

pub fn star_distributivity_gap(ab: &LabeledOperator, bc: &LabeledOperator) -> Result<DistributivityGap> {
    let (a, c) = overlap_shape(ab, bc)?;
    let lhs = star(ab, bc)?.trace();
    let rhs = star(&ab.partial_trace(&a)?, &bc.partial_trace(&c)?)?.trace();
    Ok(gap(lhs, rhs))
}

/// The same comparison with ⊙ in place of ⋆.
pub fn odot_distributivity_gap(ab: &LabeledOperator, bc: &LabeledOperator) -> Result<DistributivityGap> {
    let (a, c) = overlap_shape(ab, bc)?;
    let lhs = odot(ab, bc)?.trace();
    let rhs = odot(&ab.partial_trace(&a)?, &bc.partial_trace(&c)?)?.trace();
    let mut g = gap(lhs, rhs);
    g.relative = (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE);
    Ok(g)
}

/// Random operand pairs searched for a ⊙ distributivity failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairFamily {
    /// Full-rank PSD operators in Haar-random eigenbases.
    Random,
    /// Diagonal positive operators, which all commute.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdotWitness {
    pub trial: usize,
    pub ab: LabeledOperator,
    pub bc: LabeledOperator,
    pub gap: DistributivityGap,
}

/// Qubit labels `A`, `B`, `C` used by the product-law harnesses.
pub fn qubit_triple() -> [SpaceLabel; 3] {
    [
        SpaceLabel::base("A", 2),
        SpaceLabel::base("B", 2),
        SpaceLabel::base("C", 2),
    ]
}

fn random_pair<R: rand::Rng>(rng: &mut R, family: PairFamily) -> Result<(LabeledOperator, LabeledOperator)> {
    let [a, b, c] = qubit_triple();
    let draw = |rng: &mut R| -> CMat {
        match family {
            PairFamily::Random => random_pd_with_spectrum(rng, 4, 0.05, 1.0),
            PairFamily::Diagonal => CMat::from_diagonal(&nalgebra::DVector::from_fn(4, |_, _| {
                Complex64::new(rng.random_range(0.05..=1.0), 0.0)
            })),
        }
    };
    let ab = LabeledOperator::new(vec![a, b.clone()], draw(rng))?;
    let bc = LabeledOperator::new(vec![b, c], draw(rng))?;
    Ok((ab, bc))
}

/// Searches random qubit-triple operand pairs for one where ⊙ fails to
/// distribute over the partial trace by more than `1e-3` (relative).
pub fn find_odot_nondistributivity(seed: u64, trials: usize) -> Result<Option<OdotWitness>> {
    find_odot_nondistributivity_in(seed, trials, PairFamily::Random)
}

pub fn find_odot_nondistributivity_in(
    seed: u64,
    trials: usize,
    family: PairFamily,
) -> Result<Option<OdotWitness>> {
    let mut rng = seeded(seed);
    for trial in 0..trials {
        let (ab, bc) = random_pair(&mut rng, family)?;
        let g = odot_distributivity_gap(&ab, &bc)?;
        if g.relative > 1e-3 {
            return Ok(Some(OdotWitness { trial, ab, bc, gap: g }));
        }
    }
    Ok(None)
}

/// Largest star distributivity gap over `trials` random qubit-triple pairs,
/// with the trial index where it occurred.
pub fn max_star_distributivity_gap(seed: u64, trials: usize) -> Result<(f64, usize)> {
    let mut rng = seeded(seed);
    let mut worst = (0.0, 0);
    for trial in 0..trials {
        let (ab, bc) = random_pair(&mut rng, PairFamily::Random)?;
        let g = check_star_distributivity(&ab, &bc)?;
        if g > worst.0 {
            worst = (g, trial);
        }
    }
    Ok(worst)
}

/// Searches random full-rank qubit pairs for one with
/// `‖Λ ⋆ Λ' − Λ' ⋆ Λ‖_F > 1e-6`; returns the trial index and the gap.
pub fn find_star_noncommutativity(seed: u64, trials: usize) -> Result<Option<(usize, f64)>> {
    let mut rng = seeded(seed);
    let l = SpaceLabel::base("A", 2);
    for trial in 0..trials {
        let x = LabeledOperator::new(vec![l.clone()], random_pd_with_spectrum(&mut rng, 2, 0.05, 1.0))?;
        let y = LabeledOperator::new(vec![l.clone()], random_pd_with_spectrum(&mut rng, 2, 0.05, 1.0))?;
        let d = raw::frobenius(&(star(&x, &y)?.matrix() - star(&y, &x)?.matrix()));
        if d > 1e-6 {
            return Ok(Some((trial, d)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral::min_eigenvalue_ratio;

    fn cr(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn q(m: CMat) -> LabeledOperator {
        LabeledOperator::new(vec![SpaceLabel::base("A", 2)], m).unwrap()
    }

    fn diag(a: f64, b: f64) -> LabeledOperator {
        LabeledOperator::diagonal(SpaceLabel::base("A", 2), &[a, b]).unwrap()
    }

    #[test]
    fn commuting_operands_multiply() {
        let x = diag(2.0, 0.5);
        let y = diag(3.0, 7.0);
        for n in [1, 2, 5, 16] {
            let s = star_n(&x, &y, n).unwrap();
            assert!(s.relative_distance(&diag(6.0, 3.5)).unwrap() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn identity_left_operand() {
        let mut rng = seeded(5);
        let y = q(random_pd_with_spectrum(&mut rng, 2, 0.1, 1.0));
        let i = LabeledOperator::identity(y.labels().to_vec()).unwrap();
        for n in [1, 3, 8] {
            assert!(star_n(&i, &y, n).unwrap().relative_distance(&y).unwrap() < 1e-13);
        }
    }

    #[test]
    fn star_against_spectral_oracle() {
        // Λ = [[2,1],[1,1]] has eigenvalues (3 ± √5)/2 with eigenvectors
        // (1, λ − 2); Λ^{1/2} from that closed form, then Λ^{1/2} Λ' Λ^{1/2}.
        let s5 = 5f64.sqrt();
        let (l1, l2) = ((3.0 + s5) / 2.0, (3.0 - s5) / 2.0);
        let v = |l: f64| {
            let (x, y) = (1.0, l - 2.0);
            let n = (x * x + y * y).sqrt();
            (x / n, y / n)
        };
        let (a1, b1) = v(l1);
        let (a2, b2) = v(l2);
        let r = |i: usize, j: usize| {
            let e1 = [a1, b1];
            let e2 = [a2, b2];
            l1.sqrt() * e1[i] * e1[j] + l2.sqrt() * e2[i] * e2[j]
        };
        let root = [[r(0, 0), r(0, 1)], [r(1, 0), r(1, 1)]];
        let lp = [[1.0, 0.0], [0.0, 3.0]];
        let mut expect = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for m in 0..2 {
                        expect[i][j] += root[i][k] * lp[k][m] * root[m][j];
                    }
                }
            }
        }
        let lam = q(CMat::from_row_slice(2, 2, &[cr(2.0), cr(1.0), cr(1.0), cr(1.0)]));
        let got = star(&lam, &diag(1.0, 3.0)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((got.matrix()[(i, j)].re - expect[i][j]).abs() < 1e-13);
                assert!(got.matrix()[(i, j)].im.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn star_output_is_psd() {
        let mut rng = seeded(6);
        for _ in 0..20 {
            let x = q(crate::random::random_psd(&mut rng, 2, 1));
            let y = q(crate::random::random_psd(&mut rng, 2, 2));
            for n in [1, 4] {
                let s = star_n(&x, &y, n).unwrap();
                assert!(min_eigenvalue_ratio(s.matrix()) >= -1e-9);
            }
        }
    }

    #[test]
    fn odot_commuting_full_rank() {
        let s = odot(&diag(2.0, 0.5), &diag(3.0, 7.0)).unwrap();
        assert!(s.relative_distance(&diag(6.0, 3.5)).unwrap() < 1e-13);
    }

    #[test]
    fn odot_disjoint_supports_vanish() {
        let s = odot(&diag(1.0, 0.0), &diag(0.0, 1.0)).unwrap();
        assert_eq!(s.frobenius_norm(), 0.0);
    }

    #[test]
    fn odot_partial_overlap_restricts() {
        // supports {e0, e1} ∩ {e1, e2} = {e1}
        let l = SpaceLabel::base("A", 3);
        let x = LabeledOperator::diagonal(l.clone(), &[2.0, 3.0, 0.0]).unwrap();
        let y = LabeledOperator::diagonal(l.clone(), &[0.0, 5.0, 4.0]).unwrap();
        let s = odot(&x, &y).unwrap();
        let expect = LabeledOperator::diagonal(l, &[0.0, 15.0, 0.0]).unwrap();
        assert!(s.relative_distance(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn trotter_limit_approaches_odot() {
        let mut rng = seeded(7);
        let x = q(random_pd_with_spectrum(&mut rng, 2, 0.2, 1.0));
        let y = q(random_pd_with_spectrum(&mut rng, 2, 0.2, 1.0));
        let target = odot(&x, &y).unwrap();
        let errs: Vec<f64> = [1, 4, 16, 64, 256]
            .iter()
            .map(|&n| {
                raw::frobenius(&(star_n(&x, &y, n).unwrap().matrix() - target.matrix()))
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        assert!(errs[4] < 1e-5);
    }

    #[test]
    fn star_distributivity_cases() {
        let [a, b, c] = qubit_triple();
        let ab = LabeledOperator::identity(vec![a.clone(), b.clone()]).unwrap();
        let bc = LabeledOperator::identity(vec![b.clone(), c.clone()]).unwrap();
        let g = star_distributivity_gap(&ab, &bc).unwrap();
        assert!((g.lhs.re - 8.0).abs() < 1e-14 && (g.rhs.re - 8.0).abs() < 1e-14);
        assert!(g.relative < 1e-14);

        let mut rng = seeded(8);
        let mk = |l: &SpaceLabel, rng: &mut _| {
            LabeledOperator::new(vec![l.clone()], random_pd_with_spectrum(rng, 2, 0.1, 1.0)).unwrap()
        };
        let ab = mk(&a, &mut rng).tensor(&mk(&b, &mut rng)).unwrap();
        let bc = mk(&b, &mut rng).tensor(&mk(&c, &mut rng)).unwrap();
        assert!(check_star_distributivity(&ab, &bc).unwrap() <= 1e-12);

        // A ∩ C overlap shape is required
        assert!(check_star_distributivity(&ab, &ab).is_err());
    }

    #[test]
    fn diagonal_family_never_witnesses() {
        assert!(find_odot_nondistributivity_in(1, 50, PairFamily::Diagonal)
            .unwrap()
            .is_none());
    }

    #[test]
    fn witness_is_reproducible() {
        let w1 = find_odot_nondistributivity(42, 100).unwrap().expect("witness");
        let w2 = find_odot_nondistributivity(42, 100).unwrap().expect("witness");
        assert_eq!(w1, w2);
        let again = odot_distributivity_gap(&w1.ab, &w1.bc).unwrap();
        assert_eq!(again.relative.to_bits(), w1.gap.relative.to_bits());
    }

    #[test]
    fn star_is_not_commutative() {
        assert!(find_star_noncommutativity(3, 100).unwrap().is_some());
    }
}
