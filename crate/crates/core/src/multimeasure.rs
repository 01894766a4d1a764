//! The discrete measure on `p`-tuples of eigenvalues of `H₀` with weights
//! `trace(P_{i₁} V P_{i₂} V ⋯ P_{i_p} V)`.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::divdiff::{
    cumulative_spline_kernel, divided_difference_fast, kernel_pieces_on, FunctionSpec, NodeMultiset, PiecewisePolynomial,
    SplineKind,
};
use crate::error::{Error, Result};
use crate::operator::{CMatrix, HermitianOperator, SpectralDecomposition};

/// Default limit on `p·k^p`, the dense enumeration cost.
pub const DEFAULT_ATOM_BUDGET: u128 = 10_000_000;

/// Relative size below which atoms are dropped, in units of `‖V‖₂^p`.
pub const PRUNE_RELATIVE: f64 = 1e-15;

/// Relative imaginary residue accepted when a symmetrized integral is real.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct MultiSpectralMeasure {
    order: usize,
    eigenvalues: Vec<f64>,
    indices: Vec<u32>,
    weights: Vec<Complex64>,
}

/// Where the divided difference takes its nodes from an atom `(i₁,…,i_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodePattern {
    /// `Δ^{(p−1)} f(λ_{i₁},…,λ_{i_p})`.
    Plain,
    /// `Δ^{(p)} f(λ_{i₁},…,λ_{i_p},λ_{i₁})`.
    FirstRepeated,
}

impl MultiSpectralMeasure {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Distinct eigenvalues of `H₀`, indexed by the atom tuples.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[u32], Complex64)> + '_ {
        self.indices.chunks_exact(self.order.max(1)).zip(self.weights.iter().copied())
    }

    pub fn weight(&self, tuple: &[u32]) -> Complex64 {
        self.atoms()
            .find(|(idx, _)| *idx == tuple)
            .map_or(Complex64::new(0.0, 0.0), |(_, w)| w)
    }

    /// `Σ w`, equal to `trace(V^p)`.
    pub fn total_mass(&self) -> Complex64 {
        self.weights.iter().sum()
    }

    /// `Σ |w|`.
    pub fn total_variation(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }

    /// `max |conj(w(i₁..i_p)) − w(i_p..i₁)|`.
    pub fn reversal_residual(&self) -> f64 {
        let lookup: HashMap<&[u32], Complex64> = self.atoms().collect();
        self.atoms()
            .map(|(idx, w)| {
                let rev: Vec<u32> = idx.iter().rev().copied().collect();
                let wr = lookup.get(rev.as_slice()).copied().unwrap_or_default();
                (w.conj() - wr).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Weights summed over atoms sharing a node multiset under `pattern`.
    fn grouped(&self, pattern: NodePattern) -> Vec<(Vec<u32>, Complex64)> {
        let mut groups: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (idx, w) in self.atoms() {
            let mut key = idx.to_vec();
            if pattern == NodePattern::FirstRepeated {
                key.push(idx[0]);
            }
            key.sort_unstable();
            *groups.entry(key).or_default() += w;
        }
        groups.into_iter().collect()
    }

    fn nodes(&self, key: &[u32]) -> NodeMultiset {
        let idx: Vec<usize> = key.iter().map(|&i| i as usize).collect();
        NodeMultiset::from_indices(&self.eigenvalues, &idx)
    }

    fn checked_real(&self, value: Complex64) -> Result<f64> {
        let tolerance = SYMMETRY_TOLERANCE * self.total_variation().max(f64::MIN_POSITIVE);
        if value.im.abs() > tolerance {
            return Err(Error::SymmetryViolation { residue: value.im.abs(), tolerance });
        }
        Ok(value.re)
    }
}

/// Block `U_a* V U_b` for every pair of eigenspaces.
fn blocks(d: &SpectralDecomposition, v: &HermitianOperator) -> Vec<Vec<CMatrix>> {
    let vu: Vec<CMatrix> = d.bases().iter().map(|u| v.matrix() * u).collect();
    d.bases()
        .iter()
        .map(|ua| {
            let ua_adj = ua.adjoint();
            vu.iter().map(|vub| &ua_adj * vub).collect()
        })
        .collect()
}

pub fn build_measure(d: &SpectralDecomposition, v: &HermitianOperator, p: usize) -> Result<MultiSpectralMeasure> {
    build_measure_with_budget(d, v, p, DEFAULT_ATOM_BUDGET)
}

/// Enumerates all index tuples, forming `trace(B[i₁][i₂] ⋯ B[i_p][i₁])`.
pub fn build_measure_with_budget(
    d: &SpectralDecomposition,
    v: &HermitianOperator,
    p: usize,
    budget: u128,
) -> Result<MultiSpectralMeasure> {
    if p == 0 {
        return Err(Error::domain("measure order must be positive"));
    }
    if d.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), found: v.dim() });
    }
    let k = d.len();
    let required = (p as u128).saturating_mul((k as u128).saturating_pow(p as u32));
    if required > budget {
        return Err(Error::Capacity { order: p, distinct: k, required, budget });
    }
    let b = blocks(d, v);
    let vnorm = v.spectral_norm();
    let threshold = PRUNE_RELATIVE * vnorm.powi(p as i32);
    let sqrt_dim = (d.dim() as f64).sqrt();

    let per_first: Vec<(Vec<u32>, Vec<Complex64>)> = (0..k)
        .into_par_iter()
        .map(|first| {
            let mut idx_out = Vec::new();
            let mut w_out = Vec::new();
            let mut path = vec![first as u32];
            let start = CMatrix::identity(d.multiplicities()[first], d.multiplicities()[first]);
            enumerate(&b, k, p, &mut path, start, threshold, vnorm, sqrt_dim, &mut idx_out, &mut w_out);
            (idx_out, w_out)
        })
        .collect();

    let mut indices = Vec::new();
    let mut weights = Vec::new();
    for (i, w) in per_first {
        indices.extend(i);
        weights.extend(w);
    }
    Ok(MultiSpectralMeasure { order: p, eigenvalues: d.eigenvalues().to_vec(), indices, weights })
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    b: &[Vec<CMatrix>],
    k: usize,
    p: usize,
    path: &mut Vec<u32>,
    prefix: CMatrix,
    threshold: f64,
    vnorm: f64,
    sqrt_dim: f64,
    idx_out: &mut Vec<u32>,
    w_out: &mut Vec<Complex64>,
) {
    let first = path[0] as usize;
    let last = *path.last().unwrap() as usize;
    if path.len() == p {
        let w: Complex64 = (&prefix * &b[last][first]).trace();
        if w.norm() >= threshold && w.norm() > 0.0 {
            idx_out.extend_from_slice(path);
            w_out.push(w);
        }
        return;
    }
    // every completion is bounded by ‖prefix‖_F·√dim·‖V‖^{remaining}
    let remaining = (p - path.len() + 1) as i32;
    if prefix.norm() * sqrt_dim * vnorm.powi(remaining) < threshold {
        return;
    }
    for next in 0..k {
        let product = &prefix * &b[last][next];
        path.push(next as u32);
        enumerate(b, k, p, path, product, threshold, vnorm, sqrt_dim, idx_out, w_out);
        path.pop();
    }
}

/// `Σ_atoms w·Δ f` over the nodes selected by `pattern`.
pub fn integrate_divided_difference(m: &MultiSpectralMeasure, f: &FunctionSpec, pattern: NodePattern) -> Result<Complex64> {
    let groups = m.grouped(pattern);
    let terms = groups
        .par_iter()
        .map(|(key, w)| Ok(w * divided_difference_fast(f, &m.nodes(key))?))
        .collect::<Result<Vec<Complex64>>>()?;
    Ok(terms.iter().sum())
}

/// `Σ_atoms w·Δ^{(p−1)}[(λ−t)_+^{p−1}]`, real by reversal symmetry.
pub fn integrate_cumulative_kernel(m: &MultiSpectralMeasure, t: f64) -> Result<f64> {
    let total: Complex64 = m
        .grouped(NodePattern::Plain)
        .iter()
        .map(|(key, w)| w * cumulative_spline_kernel(&m.nodes(key), t))
        .sum();
    m.checked_real(total)
}

/// Exact piecewise form of [`integrate_cumulative_kernel`] with breakpoints
/// at the eigenvalues of `H₀`.
pub fn kernel_integral_to_piecewise(m: &MultiSpectralMeasure) -> Result<PiecewisePolynomial> {
    let breakpoints = m.eigenvalues.clone();
    let len = m.order;
    let groups = m.grouped(NodePattern::Plain);
    let mut re = vec![vec![0.0; len]; breakpoints.len().saturating_sub(1)];
    for (key, w) in &groups {
        // each multiset class is closed under reversal, so its weight is real
        let w = m.checked_real(*w)?;
        let pieces = kernel_pieces_on(m.nodes(key).nodes(), SplineKind::Cumulative, &breakpoints);
        for (acc, piece) in re.iter_mut().zip(&pieces) {
            for (a, c) in acc.iter_mut().zip(piece) {
                *a += w * c;
            }
        }
    }
    let mass = m.checked_real(m.total_mass())?;
    PiecewisePolynomial::new(breakpoints, re, mass, 0.0)
}
