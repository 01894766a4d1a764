//! Divided differences over node multisets, truncated-power splines, and
//! exact piecewise-polynomial arithmetic.
//!
//! Repeated nodes are handled by the confluent (derivative) branch: nodes are
//! sorted so that equal values are adjacent and the Hermite form of the
//! Newton table reads `f^{(j)}(x)/j!` wherever a column spans a single value.

mod function;
mod piecewise;
mod spline;

pub use function::{truncated_power, FunctionSpec, POLE_TOLERANCE};
pub use piecewise::PiecewisePolynomial;
pub use spline::{basic_spline, cumulative_spline_kernel, spline_to_piecewise, SplineKind};

pub(crate) use function::{binomial, factorial};
pub(crate) use piecewise::rational_moment;
pub(crate) use spline::{kernel_pieces_on, window_polynomial};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extended::{newton_dd, DdNodes};
use crate::precision::{to_c64, Dd};

/// `1e-9·(diameter + 1)`, shared with eigenvalue clustering.
pub fn default_merge_tol(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let diameter = if values.is_empty() { 0.0 } else { hi - lo };
    1e-9 * (diameter + 1.0)
}

/// A sorted multiset of real nodes. Values closer than the merge tolerance
/// are replaced by their mean, so equality between nodes is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMultiset {
    nodes: Vec<f64>,
    distinct: Vec<f64>,
    multiplicities: Vec<usize>,
}

impl NodeMultiset {
    pub fn new(nodes: &[f64]) -> Result<Self> {
        Self::with_tolerance(nodes, default_merge_tol(nodes))
    }

    pub fn with_tolerance(nodes: &[f64], merge_tol: f64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::domain("node multiset must be nonempty"));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("nodes must be finite"));
        }
        if !(merge_tol >= 0.0) {
            return Err(Error::domain("merge tolerance must be nonnegative"));
        }
        let mut sorted = nodes.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));

        let mut distinct = Vec::new();
        let mut multiplicities = Vec::new();
        let mut group: Vec<f64> = Vec::new();
        for &x in &sorted {
            if let Some(&last) = group.last() {
                if x - last > merge_tol {
                    distinct.push(group_mean(&group));
                    multiplicities.push(group.len());
                    group.clear();
                }
            }
            group.push(x);
        }
        distinct.push(group_mean(&group));
        multiplicities.push(group.len());
        Ok(Self::from_groups(distinct, multiplicities))
    }

    /// Builds from already-separated values; no merging is applied.
    pub(crate) fn from_groups(distinct: Vec<f64>, multiplicities: Vec<usize>) -> Self {
        let nodes = distinct
            .iter()
            .zip(&multiplicities)
            .flat_map(|(&x, &m)| std::iter::repeat(x).take(m))
            .collect();
        NodeMultiset { nodes, distinct, multiplicities }
    }

    /// Nodes given by indices into a strictly increasing value list.
    pub(crate) fn from_indices(values: &[f64], indices: &[usize]) -> Self {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        let mut distinct = Vec::new();
        let mut multiplicities: Vec<usize> = Vec::new();
        let mut prev = None;
        for i in idx {
            if prev == Some(i) {
                *multiplicities.last_mut().unwrap() += 1;
            } else {
                distinct.push(values[i]);
                multiplicities.push(1);
                prev = Some(i);
            }
        }
        Self::from_groups(distinct, multiplicities)
    }

    /// Sorted nodes, repeated according to multiplicity.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn distinct(&self) -> &[f64] {
        &self.distinct
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.multiplicities.iter().copied().max().unwrap_or(0)
    }

    pub fn min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn all_equal(&self) -> bool {
        self.distinct.len() == 1
    }
}

/// `Δ^{(n−1)}_{λ_1,…,λ_n}(f)` by the confluent Newton table, carried in
/// double-double and rounded once.
pub fn divided_difference(f: &FunctionSpec, nodes: &NodeMultiset) -> Result<Complex64> {
    let x: Vec<Dd> = nodes.nodes().iter().map(|&v| Dd::new(v)).collect();
    Ok(to_c64(newton_dd(f, &DdNodes::from_sorted(&x))?))
}

/// Mean of a sorted group as an offset from its first value, so equal values
/// reproduce themselves exactly and the result stays inside the group.
fn group_mean(group: &[f64]) -> f64 {
    let first = group[0];
    let offset = group.iter().map(|x| x - first).sum::<f64>() / group.len() as f64;
    (first + offset).clamp(first, group[group.len() - 1])
}

/// Divided difference of `λ ↦ (z − λ)^{-k}` in closed form.
///
/// For `k = 1` this is `Π (z − λ_i)^{-1}` over all nodes; higher powers use
/// `(z−λ)^{-k} = ((−1)^{k−1}/(k−1)!) ∂_z^{k−1} (z−λ)^{-1}` and differentiate
/// the product through its logarithmic derivative.
pub fn divided_difference_resolvent(z: Complex64, k: u32, nodes: &NodeMultiset) -> Result<Complex64> {
    if z.im == 0.0 {
        return Err(Error::domain("resolvent divided difference needs Im z ≠ 0"));
    }
    if k == 0 {
        return Err(Error::domain("resolvent power must be at least 1"));
    }
    let shifts: Vec<(Complex64, f64)> = nodes
        .distinct()
        .iter()
        .zip(nodes.multiplicities())
        .map(|(&mu, &m)| (z - mu, m as f64))
        .collect();
    for (d, _) in &shifts {
        if d.norm() <= POLE_TOLERANCE {
            return Err(Error::PoleCollision { pole: z, node: z.re - d.re });
        }
    }
    let mut g0 = Complex64::new(1.0, 0.0);
    for (d, m) in &shifts {
        g0 *= d.powi(-(*m as i32));
    }
    let order = (k - 1) as usize;
    if order == 0 {
        return Ok(g0);
    }
    // L^{(r)} = −Σ m_i (−1)^r r! (z − μ_i)^{−r−1}
    let log_derivs: Vec<Complex64> = (0..order)
        .map(|r| {
            let sign = if r % 2 == 0 { -1.0 } else { 1.0 };
            shifts.iter().map(|(d, m)| sign * m * factorial(r) * d.powi(-(r as i32) - 1)).sum()
        })
        .collect();
    // g^{(n+1)} = Σ_j C(n, j) g^{(j)} L^{(n−j)}
    let mut g = vec![g0];
    for n in 0..order {
        let next = (0..=n).map(|j| binomial(n, j) * g[j] * log_derivs[n - j]).sum();
        g.push(next);
    }
    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign / factorial(order) * g[order])
}

/// Dispatches to the closed form for resolvent powers and to the Newton
/// table otherwise.
pub(crate) fn divided_difference_fast(f: &FunctionSpec, nodes: &NodeMultiset) -> Result<Complex64> {
    match f {
        FunctionSpec::ResolventPower { z, k } => divided_difference_resolvent(*z, *k, nodes),
        FunctionSpec::Combination(terms) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, g) in terms {
                acc += c * divided_difference_fast(g, nodes)?;
            }
            Ok(acc)
        }
        _ => divided_difference(f, nodes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn merging_uses_the_mean() {
        let n = NodeMultiset::with_tolerance(&[1.0, 0.0, 1e-14], 1e-12).unwrap();
        assert_eq!(n.multiplicities(), &[2, 1]);
        assert!((n.distinct()[0] - 5e-15).abs() < 1e-20);
        assert_eq!(n.max_multiplicity(), 2);
    }

    #[test]
    fn empty_nodes_are_rejected() {
        assert!(NodeMultiset::new(&[]).is_err());
    }

    #[test]
    fn quadratic_over_three_nodes_gives_leading_coefficient() {
        let f = FunctionSpec::monomial(2);
        let n = NodeMultiset::new(&[0.0, 1.0, 2.0]).unwrap();
        assert!((divided_difference(&f, &n).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn confluent_pair_is_the_derivative() {
        let f = FunctionSpec::resolvent(c(0.0, 1.0)).unwrap();
        let n = NodeMultiset::new(&[0.0, 0.0]).unwrap();
        assert!((divided_difference(&f, &n).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn first_order_resolvent_by_hand() {
        // (f(0) − f(1))/(0 − 1) with f = 1/(2i − λ): 1/((2i)(2i−1)) = −0.2 + 0.1i
        let f = FunctionSpec::resolvent(c(0.0, 2.0)).unwrap();
        let n = NodeMultiset::new(&[0.0, 1.0]).unwrap();
        let want = c(-0.2, 0.1);
        assert!((divided_difference(&f, &n).unwrap() - want).norm() < 1e-15);
        assert!((divided_difference_resolvent(c(0.0, 2.0), 1, &n).unwrap() - want).norm() < 1e-15);
    }

    #[test]
    fn resolvent_closed_form_special_cases() {
        let triple = NodeMultiset::new(&[0.0, 0.0, 0.0]).unwrap();
        let got = divided_difference_resolvent(c(0.0, 1.0), 1, &triple).unwrap();
        assert!((got - c(0.0, 1.0)).norm() < 1e-15);
        let single = NodeMultiset::new(&[0.0]).unwrap();
        let got = divided_difference_resolvent(c(0.0, 1.0), 2, &single).unwrap();
        assert!((got - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn resolvent_power_closed_form_matches_table() {
        let n = NodeMultiset::new(&[-0.7, 0.1, 0.1, 1.3, 2.0]).unwrap();
        for k in 1..=3 {
            let z = c(0.4, 0.8);
            let f = FunctionSpec::resolvent_power(z, k).unwrap();
            let table = divided_difference(&f, &n).unwrap();
            let closed = divided_difference_resolvent(z, k, &n).unwrap();
            assert!((table - closed).norm() <= 1e-12 * closed.norm(), "k={k}: {table} vs {closed}");
        }
    }

    #[test]
    fn resolvent_requires_nonreal_z() {
        let n = NodeMultiset::new(&[0.0]).unwrap();
        assert!(divided_difference_resolvent(c(1.0, 0.0), 1, &n).is_err());
    }
}
