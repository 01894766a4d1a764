use serde::{Deserialize, Serialize};

use super::piecewise::horner;
use super::{NodeMultiset, PiecewisePolynomial};
use crate::error::{Error, Result};
use crate::precision::Real;

/// Which truncated-power kernel a node multiset of size `n` defines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplineKind {
    /// `Δ^{(n−1)}[(λ−t)_+^{n−2}]`: nonnegative, supported on the node hull, integral `1/(n−1)`.
    Basic,
    /// `Δ^{(n−1)}[(λ−t)_+^{n−1}]`: nonincreasing from 1 to 0 across the nodes.
    Cumulative,
}

impl SplineKind {
    fn tails(self) -> (f64, f64) {
        match self {
            SplineKind::Basic => (0.0, 0.0),
            SplineKind::Cumulative => (1.0, 0.0),
        }
    }

    /// Polynomial degree of the kernel on `n` nodes.
    pub fn degree(self, n: usize) -> usize {
        match self {
            SplineKind::Basic => n.saturating_sub(2),
            SplineKind::Cumulative => n.saturating_sub(1),
        }
    }
}

/// `Δ^{(p−1)}_{λ_1..λ_p}[(λ−t)_+^{p−1}]`. With all nodes equal this is the
/// indicator of `(−∞, λ_1)`, so the value at `t = λ_1` is 0.
pub fn cumulative_spline_kernel(nodes: &NodeMultiset, t: f64) -> f64 {
    point_value(nodes.nodes(), SplineKind::Cumulative, t)
}

/// `Δ^{(p)}_{λ_1..λ_{p+1}}[(λ−t)_+^{p−1}]`, on `p+1` nodes with at least two
/// distinct values. For two nodes this is the normalized indicator of
/// `[λ_1, λ_2)`.
pub fn basic_spline(nodes: &NodeMultiset, t: f64) -> Result<f64> {
    check_basic(nodes)?;
    Ok(point_value(nodes.nodes(), SplineKind::Basic, t))
}

/// Exact piecewise form with breakpoints at the distinct nodes.
pub fn spline_to_piecewise(nodes: &NodeMultiset, kind: SplineKind) -> Result<PiecewisePolynomial> {
    if kind == SplineKind::Basic {
        check_basic(nodes)?;
    }
    let breakpoints = nodes.distinct().to_vec();
    let pieces = kernel_pieces_on(nodes.nodes(), kind, &breakpoints);
    let (left, right) = kind.tails();
    PiecewisePolynomial::new(breakpoints, pieces, left, right)
}

fn check_basic(nodes: &NodeMultiset) -> Result<()> {
    if nodes.len() < 2 || nodes.all_equal() {
        return Err(Error::DegenerateSpline(nodes.nodes().to_vec()));
    }
    Ok(())
}

fn point_value(x: &[f64], kind: SplineKind, t: f64) -> f64 {
    let (first, last) = (x[0], x[x.len() - 1]);
    if t < first {
        return kind.tails().0;
    }
    if t >= last {
        return kind.tails().1;
    }
    // the interval of consecutive distinct nodes containing t
    let hi_idx = x.partition_point(|&v| v <= t);
    let (lo, hi) = (x[hi_idx - 1], x[hi_idx]);
    horner(&window_polynomial(x, kind, lo, hi), t - lo)
}

/// Kernel pieces over consecutive `breakpoints`, which must contain every
/// node value. Coefficients are in `t − b_k`.
pub(crate) fn kernel_pieces_on(x: &[f64], kind: SplineKind, breakpoints: &[f64]) -> Vec<Vec<f64>> {
    breakpoints.windows(2).map(|w| window_polynomial(x, kind, w[0], w[1])).collect()
}

/// The kernel on `[lo, hi)` as a polynomial in `u = t − lo`, via the
/// two-term recurrence over contiguous windows of the sorted nodes:
///
/// `D(S) = [(x_last − t)·D(S∖x_first) + (t − x_first)·D(S∖x_last)] / (x_last − x_first)`.
///
/// `[lo, hi)` must not contain a node in its interior.
pub(crate) fn window_polynomial<T: Real>(x: &[T], kind: SplineKind, lo: T, hi: T) -> Vec<T> {
    let n = x.len();
    let len = kind.degree(n) + 1;
    let (left, right) = kind.tails();
    let (left, right) = (T::from_f64(left), T::from_f64(right));
    let constant = |c: T| {
        let mut p = vec![T::zero(); len];
        p[0] = c;
        p
    };
    // outside-window value, or None when [lo, hi) lies inside the window hull
    let outside = |a: T, b: T| -> Option<T> {
        if hi <= a {
            Some(left)
        } else if lo >= b {
            Some(right)
        } else {
            None
        }
    };

    let base = match kind {
        SplineKind::Cumulative => 1,
        SplineKind::Basic => 2,
    };
    if n < base {
        return constant(T::zero());
    }
    let mut level: Vec<Vec<T>> = (0..=n - base)
        .map(|i| {
            let (a, b) = (x[i], x[i + base - 1]);
            match outside(a, b) {
                Some(v) => constant(v),
                // only a distinct basic pair can contain [lo, hi)
                None => constant(T::one() / (b - a)),
            }
        })
        .collect();

    for size in base + 1..=n {
        let next: Vec<Vec<T>> = (0..=n - size)
            .map(|i| {
                let (a, b) = (x[i], x[i + size - 1]);
                if let Some(v) = outside(a, b) {
                    return constant(v);
                }
                let without_first = &level[i + 1];
                let without_last = &level[i];
                let span = b - a;
                let (alpha, beta) = (b - lo, lo - a);
                let mut p = vec![T::zero(); len];
                for k in 0..len {
                    let mut c = alpha * without_first[k] + beta * without_last[k];
                    if k > 0 {
                        c += without_last[k - 1] - without_first[k - 1];
                    }
                    p[k] = c / span;
                }
                p
            })
            .collect();
        level = next;
    }
    level.swap_remove(0)
}
