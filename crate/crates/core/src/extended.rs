//! Double-double eigendata, multilinear weights and divided differences.
//!
//! Eigenpairs of `H₀` and `H₀ + V` start from the `f64` solver and are
//! refined by the Ogita–Aishima iteration in [`Dd`] arithmetic, with
//! `H₀ + V` formed exactly. Weights are enumerated without pruning.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::divdiff::{binomial, factorial, FunctionSpec, POLE_TOLERANCE};
use crate::error::{Error, Result};
use crate::multimeasure::{NodePattern, SYMMETRY_TOLERANCE};
use crate::operator::{CMatrix, HermitianOperator};
use crate::precision::{cabs, cdd, cpowi, creal, CDd, Dd};

pub type DdMatrix = DMatrix<CDd>;

const REFINE_MAX_ITER: usize = 12;
/// Correction size after which one last update reaches double-double accuracy.
const CONVERGED: f64 = 1e-24;
const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

pub fn dd_matrix(m: &CMatrix) -> DdMatrix {
    m.map(cdd)
}

pub fn to_f64_matrix(m: &DdMatrix) -> CMatrix {
    m.map(crate::precision::to_c64)
}

pub fn adjoint(m: &DdMatrix) -> DdMatrix {
    m.transpose().map(|z| z.conj())
}

fn identity(n: usize) -> DdMatrix {
    DdMatrix::from_fn(n, n, |i, j| if i == j { CDd::one() } else { CDd::zero() })
}

fn frobenius(m: &DdMatrix) -> f64 {
    m.iter().map(|z| cabs(*z).powi(2)).sum::<f64>().sqrt()
}

/// Distinct eigenvalues in double-double with orthonormal eigenspace bases.
#[derive(Debug, Clone)]
pub struct RefinedSpectrum {
    eigenvalues: Vec<Dd>,
    multiplicities: Vec<usize>,
    bases: Vec<DdMatrix>,
    /// Gap below which computed eigenvalues were merged.
    cluster_tol: f64,
}

impl RefinedSpectrum {
    pub fn eigenvalues(&self) -> &[Dd] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn bases(&self) -> &[DdMatrix] {
        &self.bases
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    /// Eigenvalues strictly below `t`, with multiplicity.
    pub fn counting(&self, t: Dd) -> usize {
        self.eigenvalues.iter().zip(&self.multiplicities).filter(|(l, _)| **l < t).map(|(_, m)| m).sum()
    }

    /// `Σ m_i f(λ_i)`.
    pub fn trace_of(&self, f: &FunctionSpec) -> Result<CDd> {
        let mut acc = CDd::zero();
        for (&x, &m) in self.eigenvalues.iter().zip(&self.multiplicities) {
            acc = acc + derivative_dd(f, 0, x)? * creal(Dd::new(m as f64));
        }
        Ok(acc)
    }

    /// `Σ f(λ_i) U_i U_i*`.
    pub fn apply(&self, f: &FunctionSpec) -> Result<DdMatrix> {
        let n = self.bases[0].nrows();
        let mut out = DdMatrix::zeros(n, n);
        for (u, &x) in self.bases.iter().zip(&self.eigenvalues) {
            let c = derivative_dd(f, 0, x)?;
            out += u.map(|a| a * c) * adjoint(u);
        }
        Ok(out)
    }
}

/// Refined eigendecomposition of a Hermitian matrix given in double-double.
pub fn refined_spectrum(a: &DdMatrix) -> Result<RefinedSpectrum> {
    let n = a.nrows();
    let guess = to_f64_matrix(a);
    let eig = guess
        .try_symmetric_eigen(EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenNonConvergence { dim: n, iterations: EIGEN_MAX_ITER })?;
    let mut x = dd_matrix(&eig.eigenvectors);
    let anorm = frobenius(a);
    let eye = identity(n);

    let mut lambda = vec![Dd::ZERO; n];
    let mut delta = 0.0;
    let mut previous = f64::INFINITY;
    for iter in 0..REFINE_MAX_ITER {
        let xh = adjoint(&x);
        let s = &xh * (a * &x);
        let r = &eye - &xh * &x;
        for i in 0..n {
            lambda[i] = s[(i, i)].re / (Dd::ONE - r[(i, i)].re);
        }
        let off = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| if i == j { cabs(s[(i, i)] - creal(lambda[i])) } else { cabs(s[(i, j)]) })
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        delta = 2.0 * (off + anorm * frobenius(&r));
        let half = creal(Dd::new(0.5));
        let e = DdMatrix::from_fn(n, n, |i, j| {
            if i == j {
                return r[(i, i)] * half;
            }
            let gap = lambda[j] - lambda[i];
            if gap.abs().hi() > delta {
                (s[(i, j)] + creal(lambda[j]) * r[(i, j)]) / creal(gap)
            } else {
                r[(i, j)] * half
            }
        });
        let size = e.iter().map(|z| cabs(*z)).fold(0.0, f64::max);
        if iter >= 3 && size >= previous {
            break;
        }
        previous = size;
        let dx = &x * e;
        x += dx;
        // the eigenvalues above are already exact to O(size²)
        if size <= CONVERGED {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| lambda[i].partial_cmp(&lambda[j]).expect("finite eigenvalues"));
    let cluster_tol = delta.max(1e-28 * anorm.max(f64::MIN_POSITIVE));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if (lambda[i] - lambda[*g.last().unwrap()]).hi() <= cluster_tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let mut out = RefinedSpectrum { eigenvalues: Vec::new(), multiplicities: Vec::new(), bases: Vec::new(), cluster_tol };
    for g in groups {
        let sum: Dd = g.iter().map(|&i| lambda[i]).sum();
        out.eigenvalues.push(sum / Dd::new(g.len() as f64));
        out.multiplicities.push(g.len());
        out.bases.push(DdMatrix::from_fn(n, g.len(), |r, c| x[(r, g[c])]));
    }
    Ok(out)
}

/// `H₀ + tV` exactly in double-double, for `f64` entries and `t`.
pub fn coupled(h0: &HermitianOperator, v: &HermitianOperator, t: f64) -> DdMatrix {
    let tt = creal(Dd::new(t));
    dd_matrix(h0.matrix()) + dd_matrix(v.matrix()).map(|z| z * tt)
}

/// Weights summed per node multiset, with the total variation of the atoms.
#[derive(Debug, Clone)]
pub struct GroupedWeights {
    pub order: usize,
    pub pattern: NodePattern,
    pub groups: Vec<(Vec<u32>, CDd)>,
    pub variation: f64,
}

impl GroupedWeights {
    /// Group weights with their imaginary parts checked against the
    /// reversal symmetry.
    pub fn real(&self) -> Result<Vec<(Vec<u32>, Dd)>> {
        let tolerance = SYMMETRY_TOLERANCE * self.variation.max(f64::MIN_POSITIVE);
        self.groups
            .iter()
            .map(|(k, w)| {
                let residue = w.im.hi().abs();
                if residue > tolerance {
                    return Err(Error::SymmetryViolation { residue, tolerance });
                }
                Ok((k.clone(), w.re))
            })
            .collect()
    }

    /// `Σ w`.
    pub fn total(&self) -> CDd {
        self.groups.iter().fold(CDd::zero(), |acc, (_, w)| acc + w)
    }
}

/// Refined eigendata of `H₀` and `H₀ + V` with the blocks `U_a* V U_b`.
#[derive(Debug)]
pub struct ExtendedPair {
    v: DdMatrix,
    initial: RefinedSpectrum,
    perturbed: RefinedSpectrum,
    blocks: Vec<Vec<DdMatrix>>,
}

impl ExtendedPair {
    pub fn new(h0: &HermitianOperator, v: &HermitianOperator) -> Result<Self> {
        let vd = dd_matrix(v.matrix());
        let h0d = dd_matrix(h0.matrix());
        let h1d = &h0d + &vd;
        let initial = refined_spectrum(&h0d)?;
        let perturbed = refined_spectrum(&h1d)?;
        let vu: Vec<DdMatrix> = initial.bases.iter().map(|u| &vd * u).collect();
        let blocks = initial
            .bases
            .iter()
            .map(|ua| {
                let ua_adj = adjoint(ua);
                vu.iter().map(|vub| &ua_adj * vub).collect()
            })
            .collect();
        Ok(ExtendedPair { v: vd, initial, perturbed, blocks })
    }

    pub fn v(&self) -> &DdMatrix {
        &self.v
    }

    pub fn initial(&self) -> &RefinedSpectrum {
        &self.initial
    }

    pub fn perturbed(&self) -> &RefinedSpectrum {
        &self.perturbed
    }

    pub fn blocks(&self) -> &[Vec<DdMatrix>] {
        &self.blocks
    }

    /// Enumerates every cyclic product `trace(B[i₁][i₂] ⋯ B[i_p][i₁])` and
    /// sums it into its node multiset under `pattern`.
    pub fn grouped_weights(&self, order: usize, pattern: NodePattern, budget: u128) -> Result<GroupedWeights> {
        if order == 0 {
            return Err(Error::domain("measure order must be positive"));
        }
        let k = self.initial.len();
        let required = (order as u128).saturating_mul((k as u128).saturating_pow(order as u32));
        if required > budget {
            return Err(Error::Capacity { order, distinct: k, required, budget });
        }
        let parts: Vec<(BTreeMap<Vec<u32>, CDd>, f64)> = (0..k)
            .into_par_iter()
            .map(|first| {
                let mut acc = (BTreeMap::new(), 0.0);
                let m = self.initial.multiplicities[first];
                let mut path = vec![first as u32];
                self.enumerate(order, pattern, &mut path, identity(m), &mut acc);
                acc
            })
            .collect();
        let mut merged: BTreeMap<Vec<u32>, CDd> = BTreeMap::new();
        let mut variation = 0.0;
        for (part, tv) in parts {
            variation += tv;
            for (key, w) in part {
                let slot = merged.entry(key).or_insert_with(CDd::zero);
                *slot = *slot + w;
            }
        }
        Ok(GroupedWeights { order, pattern, groups: merged.into_iter().collect(), variation })
    }

    fn enumerate(
        &self,
        order: usize,
        pattern: NodePattern,
        path: &mut Vec<u32>,
        prefix: DdMatrix,
        acc: &mut (BTreeMap<Vec<u32>, CDd>, f64),
    ) {
        let first = path[0] as usize;
        let last = *path.last().unwrap() as usize;
        if path.len() == order {
            let w = (&prefix * &self.blocks[last][first]).trace();
            if w.is_zero() {
                return;
            }
            acc.1 += cabs(w);
            let mut key = path.clone();
            if pattern == NodePattern::FirstRepeated {
                key.push(path[0]);
            }
            key.sort_unstable();
            let slot = acc.0.entry(key).or_insert_with(CDd::zero);
            *slot = *slot + w;
            return;
        }
        for next in 0..self.blocks.len() {
            let product = &prefix * &self.blocks[last][next];
            path.push(next as u32);
            self.enumerate(order, pattern, path, product, acc);
            path.pop();
        }
    }

    /// The node multiset of a sorted index key.
    pub fn nodes(&self, key: &[u32]) -> DdNodes {
        DdNodes::from_indices(&self.initial.eigenvalues, key)
    }
}

/// A sorted node multiset in double-double; equal nodes are bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct DdNodes {
    distinct: Vec<Dd>,
    multiplicities: Vec<usize>,
}

impl DdNodes {
    /// Nodes `values[i]` for `i` in the sorted index list `key`.
    pub fn from_indices(values: &[Dd], key: &[u32]) -> Self {
        let mut distinct = Vec::new();
        let mut multiplicities: Vec<usize> = Vec::new();
        let mut prev = None;
        for &i in key {
            if prev == Some(i) {
                *multiplicities.last_mut().unwrap() += 1;
            } else {
                distinct.push(values[i as usize]);
                multiplicities.push(1);
                prev = Some(i);
            }
        }
        DdNodes { distinct, multiplicities }
    }

    /// From values that are already sorted, merging exact duplicates.
    pub fn from_sorted(values: &[Dd]) -> Self {
        let mut distinct: Vec<Dd> = Vec::new();
        let mut multiplicities: Vec<usize> = Vec::new();
        for &x in values {
            if distinct.last() == Some(&x) {
                *multiplicities.last_mut().unwrap() += 1;
            } else {
                distinct.push(x);
                multiplicities.push(1);
            }
        }
        DdNodes { distinct, multiplicities }
    }

    pub fn distinct(&self) -> &[Dd] {
        &self.distinct
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// All nodes with repetition, ascending.
    pub fn expanded(&self) -> Vec<Dd> {
        self.distinct.iter().zip(&self.multiplicities).flat_map(|(&x, &m)| std::iter::repeat(x).take(m)).collect()
    }
}

/// `f^{(j)}(x)` in double-double.
pub fn derivative_dd(f: &FunctionSpec, j: u32, x: Dd) -> Result<CDd> {
    match f {
        FunctionSpec::ResolventPower { z, k } => {
            let d = cdd(*z) - creal(x);
            if cabs(d) <= POLE_TOLERANCE {
                return Err(Error::PoleCollision { pole: *z, node: x.hi() });
            }
            let rising: f64 = (0..j).map(|i| (k + i) as f64).product();
            Ok(cpowi(d, -((k + j) as i32)) * creal(Dd::new(rising)))
        }
        FunctionSpec::Polynomial(c) => {
            let xc = creal(x);
            let mut acc = CDd::zero();
            for n in (j as usize..c.len()).rev() {
                let falling: f64 = (0..j).map(|i| n as f64 - i as f64).product();
                acc = acc * xc + cdd(c[n]) * creal(Dd::new(falling));
            }
            Ok(acc)
        }
        FunctionSpec::Exponential { s } => {
            let (sin, cos) = (Dd::new(*s) * x).sin_cos();
            let a = cpowi(CDd::new(Dd::ZERO, Dd::new(*s)), j as i32);
            Ok(a * CDd::new(cos, sin))
        }
        FunctionSpec::TruncatedPower { t, k } => {
            let k = *k;
            let y = x - Dd::new(*t);
            let falling: f64 = (0..j).map(|i| k as f64 - i as f64).product();
            let v = if j > k {
                Dd::ZERO
            } else if j == k {
                if j == 0 || y > Dd::ZERO { Dd::new(falling) } else { Dd::ZERO }
            } else if y >= Dd::ZERO {
                y.powi((k - j) as i32) * Dd::new(falling)
            } else {
                Dd::ZERO
            };
            Ok(creal(v))
        }
        FunctionSpec::Combination(terms) => {
            let mut acc = CDd::zero();
            for (c, g) in terms {
                acc = acc + cdd(*c) * derivative_dd(g, j, x)?;
            }
            Ok(acc)
        }
    }
}

/// `Δ f` over `nodes` in double-double: closed form for resolvent powers,
/// the confluent Newton table otherwise.
pub fn divided_difference_dd(f: &FunctionSpec, nodes: &DdNodes) -> Result<CDd> {
    match f {
        FunctionSpec::ResolventPower { z, k } => resolvent_dd(*z, *k, nodes),
        FunctionSpec::Combination(terms) => {
            let mut acc = CDd::zero();
            for (c, g) in terms {
                acc = acc + cdd(*c) * divided_difference_dd(g, nodes)?;
            }
            Ok(acc)
        }
        _ => newton_dd(f, nodes),
    }
}

pub(crate) fn newton_dd(f: &FunctionSpec, nodes: &DdNodes) -> Result<CDd> {
    let x = nodes.expanded();
    let n = x.len();
    let mut col = x.iter().map(|&xi| derivative_dd(f, 0, xi)).collect::<Result<Vec<_>>>()?;
    for j in 1..n {
        for i in (j..n).rev() {
            col[i] = if x[i] == x[i - j] {
                derivative_dd(f, j as u32, x[i])? / creal(Dd::new(factorial(j)))
            } else {
                (col[i] - col[i - 1]) / creal(x[i] - x[i - j])
            };
        }
    }
    Ok(col[n - 1])
}

/// `Π (z − μ_i)^{-m_i}` differentiated `k − 1` times in `z` through its
/// logarithmic derivative.
fn resolvent_dd(z: Complex64, k: u32, nodes: &DdNodes) -> Result<CDd> {
    let zd = cdd(z);
    let shifts: Vec<(CDd, usize)> = nodes.distinct.iter().zip(&nodes.multiplicities).map(|(&mu, &m)| (zd - creal(mu), m)).collect();
    for (d, _) in &shifts {
        if cabs(*d) <= POLE_TOLERANCE {
            return Err(Error::PoleCollision { pole: z, node: z.re - d.re.hi() });
        }
    }
    let mut g0 = CDd::one();
    for (d, m) in &shifts {
        g0 = g0 * cpowi(*d, -(*m as i32));
    }
    let order = (k - 1) as usize;
    if order == 0 {
        return Ok(g0);
    }
    let log_derivs: Vec<CDd> = (0..order)
        .map(|r| {
            let sign = if r % 2 == 0 { -1.0 } else { 1.0 };
            shifts.iter().fold(CDd::zero(), |acc, (d, m)| {
                acc + cpowi(*d, -(r as i32) - 1) * creal(Dd::new(sign * *m as f64 * factorial(r)))
            })
        })
        .collect();
    let mut g = vec![g0];
    for n in 0..order {
        let next = (0..=n).fold(CDd::zero(), |acc, j| acc + g[j] * log_derivs[n - j] * creal(Dd::new(binomial(n, j))));
        g.push(next);
    }
    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
    Ok(g[order] * creal(Dd::new(sign) / Dd::new(factorial(order))))
}
