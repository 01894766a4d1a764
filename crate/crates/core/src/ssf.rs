//! Spectral shift densities `ξ = η₁, η₂, …` as exact piecewise polynomials.
//!
//! `ξ(t) = N_{H₀}(t) − N_{H₀+V}(t)` counts eigenvalues strictly below `t`.
//! For `p ≥ 2`,
//!
//! ```text
//! η_p(t) = trace(V^{p−1})/(p−1)! − ν_{p−1}((−∞, t)) − K_{p−1}(t)/(p−1)!
//! ```
//!
//! where `ν_{p−1} = η_{p−1} dt` and `K_{p−1}` integrates the cumulative
//! spline kernel against the order-`(p−1)` multilinear measure. Then
//! `trace R_p(f) = ∫ f^{(p)} η_p`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divdiff::{factorial, window_polynomial, FunctionSpec, PiecewisePolynomial, SplineKind};
use crate::error::{Error, Result};
use crate::extended::ExtendedPair;
use crate::multimeasure::NodePattern;
use crate::operator::HermitianOperator;
use crate::perturbation::Perturbation;
use crate::precision::Dd;

/// Tolerance on the right-tail residual, relative to `max(1, sup |η_p|)`.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Which spectrum a breakpoint comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakpointSource {
    Initial,
    Perturbed,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsfDensity {
    pub order: usize,
    pub density: PiecewisePolynomial,
    /// `∫ density`.
    pub mass: f64,
    /// One tag per breakpoint of `density`.
    pub provenance: Vec<BreakpointSource>,
    /// `trace(V^{p−1})/(p−1)! − ν_{p−1}(ℝ)`, the value the right tail would
    /// take without the structural zero. 0 for `p = 1`.
    pub tail_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub left_limit: f64,
    pub right_limit: f64,
    /// Smallest interval outside which the density vanishes; `None` if it is 0.
    pub support: Option<(f64, f64)>,
    pub tail_residual: f64,
    pub consistent: bool,
}

/// Breakpoints of every `η_p`: the refined eigenvalues of `H₀` and `H₀ + V`.
struct UnionGrid {
    points: Vec<Dd>,
    provenance: Vec<BreakpointSource>,
}

impl UnionGrid {
    fn new(ext: &ExtendedPair) -> Self {
        let mut tagged: Vec<(Dd, BreakpointSource)> = ext
            .initial()
            .eigenvalues()
            .iter()
            .map(|&x| (x, BreakpointSource::Initial))
            .chain(ext.perturbed().eigenvalues().iter().map(|&y| (y, BreakpointSource::Perturbed)))
            .collect();
        tagged.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite eigenvalues"));
        let mut points: Vec<Dd> = Vec::with_capacity(tagged.len());
        let mut provenance: Vec<BreakpointSource> = Vec::with_capacity(tagged.len());
        for (x, tag) in tagged {
            if points.last() == Some(&x) {
                let last = provenance.last_mut().expect("nonempty");
                *last = last.merge(tag);
            } else {
                points.push(x);
                provenance.push(tag);
            }
        }
        UnionGrid { points, provenance }
    }

    fn widths(&self) -> Vec<Dd> {
        self.points.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

impl BreakpointSource {
    fn merge(self, other: BreakpointSource) -> BreakpointSource {
        if self == other { self } else { BreakpointSource::Both }
    }
}

/// A density on the union grid in double-double, zero outside it.
struct ExactDensity {
    order: usize,
    pieces: Vec<Vec<Dd>>,
    tail_residual: Dd,
}

fn horner_dd(p: &[Dd], u: Dd) -> Dd {
    p.iter().rev().fold(Dd::ZERO, |acc, &a| acc * u + a)
}

/// `∫` of each piece over its interval.
fn piece_integrals(pieces: &[Vec<Dd>], widths: &[Dd]) -> Vec<Dd> {
    pieces
        .iter()
        .zip(widths)
        .map(|(p, &h)| {
            let integral: Vec<Dd> = std::iter::once(Dd::ZERO)
                .chain(p.iter().enumerate().map(|(i, &a)| a / Dd::new((i + 1) as f64)))
                .collect();
            horner_dd(&integral, h)
        })
        .collect()
}

impl ExactDensity {
    fn xi(grid: &UnionGrid, ext: &ExtendedPair) -> Self {
        let pieces = grid
            .points
            .windows(2)
            .map(|w| {
                let mid = (w[0] + w[1]) * Dd::new(0.5);
                let n0 = ext.initial().counting(mid) as f64;
                let n1 = ext.perturbed().counting(mid) as f64;
                vec![Dd::new(n0 - n1)]
            })
            .collect();
        ExactDensity { order: 1, pieces, tail_residual: Dd::ZERO }
    }

    /// One step of the recursion with the order-`p − 1` weights.
    fn next(&self, grid: &UnionGrid, ext: &ExtendedPair, weights: &[(Vec<u32>, Dd)]) -> Self {
        let p = self.order + 1;
        let widths = grid.widths();
        let scale = Dd::ONE / Dd::new(factorial(p - 1));

        // ν_{p−1}((−∞, t)) piece by piece
        let mut cumulative = Vec::with_capacity(self.pieces.len());
        let mut running = Dd::ZERO;
        for (piece, &h) in self.pieces.iter().zip(&widths) {
            let mut q = vec![Dd::ZERO; p];
            q[0] = running;
            for (i, &a) in piece.iter().enumerate() {
                q[i + 1] = a / Dd::new((i + 1) as f64);
            }
            running = horner_dd(&q, h);
            cumulative.push(q);
        }

        // K_{p−1}: the cumulative kernel integrated against the weights
        let mut kernel = vec![vec![Dd::ZERO; p]; self.pieces.len()];
        let mut left_tail = Dd::ZERO;
        for (key, w) in weights {
            let nodes = ext.nodes(key).expanded();
            left_tail += *w;
            let first = grid.points.partition_point(|x| *x < nodes[0]);
            let last = grid.points.partition_point(|x| *x < nodes[nodes.len() - 1]);
            for piece in &mut kernel[..first] {
                piece[0] += *w;
            }
            for k in first..last {
                let window = window_polynomial(&nodes, SplineKind::Cumulative, grid.points[k], grid.points[k + 1]);
                for (a, c) in kernel[k].iter_mut().zip(window) {
                    *a += *w * c;
                }
            }
        }
        // the constant is the kernel's left tail, so η_p vanishes on the left exactly
        let constant = left_tail * scale;
        let pieces = cumulative
            .into_iter()
            .zip(kernel)
            .map(|(a, k)| {
                let mut q: Vec<Dd> = a.iter().zip(&k).map(|(&a, &k)| -a - scale * k).collect();
                q[0] += constant;
                q
            })
            .collect();
        ExactDensity { order: p, pieces, tail_residual: constant - running }
    }

    /// Rounds to `f64`, re-expanding each piece about its rounded breakpoint
    /// and dropping intervals that collapse.
    fn round(&self, grid: &UnionGrid) -> Result<SsfDensity> {
        let mass: Dd = piece_integrals(&self.pieces, &grid.widths()).into_iter().sum();
        let mut breakpoints: Vec<f64> = Vec::with_capacity(grid.points.len());
        let mut provenance: Vec<BreakpointSource> = Vec::with_capacity(grid.points.len());
        let mut pieces: Vec<Vec<f64>> = Vec::with_capacity(self.pieces.len());
        for (k, (&x, &tag)) in grid.points.iter().zip(&grid.provenance).enumerate() {
            let b = x.hi();
            if breakpoints.last() == Some(&b) {
                // the interval starting at the previous breakpoint has zero width
                pieces.pop();
                let last = provenance.last_mut().expect("nonempty");
                *last = last.merge(tag);
            } else {
                breakpoints.push(b);
                provenance.push(tag);
            }
            if let Some(piece) = self.pieces.get(k) {
                let shifted = taylor_shift_dd(piece, Dd::new(b) - x);
                pieces.push(shifted.into_iter().map(Dd::hi).collect());
            }
        }
        let density = PiecewisePolynomial::new(breakpoints, pieces, 0.0, 0.0)?;
        Ok(SsfDensity { order: self.order, density, mass: mass.hi(), provenance, tail_residual: self.tail_residual.hi() })
    }
}

/// Coefficients of `u ↦ p(u + δ)`.
fn taylor_shift_dd(p: &[Dd], delta: Dd) -> Vec<Dd> {
    let mut q = p.to_vec();
    if delta == Dd::ZERO {
        return q;
    }
    let n = q.len();
    for i in 0..n {
        for k in (i..n.saturating_sub(1)).rev() {
            let next = q[k + 1];
            q[k] += delta * next;
        }
    }
    q
}

/// Krein's `ξ = N_{H₀} − N_{H₀+V}` as a step function.
pub fn krein_xi(pert: &Perturbation) -> Result<SsfDensity> {
    let ext = pert.extended()?;
    let grid = UnionGrid::new(&ext);
    ExactDensity::xi(&grid, &ext).round(&grid)
}

/// `[ξ, η₂, …, η_{p_max}]`.
///
/// The recursion runs in double-double on the refined eigenvalues of both
/// operators; each density is rounded to `f64` once, at the end.
pub fn ssf_sequence(pert: &Perturbation, p_max: usize) -> Result<Vec<SsfDensity>> {
    if p_max == 0 {
        return Err(Error::domain("order must be positive"));
    }
    let ext = pert.extended()?;
    let grid = UnionGrid::new(&ext);
    let mut exact = ExactDensity::xi(&grid, &ext);
    let mut out = vec![exact.round(&grid)?];
    for p in 2..=p_max {
        let weights = pert.grouped_weights(p - 1, NodePattern::Plain)?.real()?;
        exact = exact.next(&grid, &ext, &weights);
        out.push(exact.round(&grid)?);
    }
    Ok(out)
}

/// `η_p` for `p ≥ 2`, built up from `ξ`.
pub fn eta_recursive(pert: &Perturbation, p: usize) -> Result<SsfDensity> {
    if p < 2 {
        return Err(Error::domain(format!("recursive order must be at least 2, got {p}")));
    }
    Ok(ssf_sequence(pert, p)?.pop().expect("nonempty"))
}

/// `η_p` for any `p ≥ 1` from a Hermitian pair.
pub fn spectral_shift(h0: &HermitianOperator, v: &HermitianOperator, p: usize) -> Result<SsfDensity> {
    let pert = Perturbation::new(h0.clone(), v.clone())?;
    Ok(ssf_sequence(&pert, p)?.pop().expect("nonempty"))
}

/// `ν_p((−∞, t)) = ∫_{−∞}^t η_p`.
pub fn cumulative(s: &SsfDensity, t: f64) -> Result<f64> {
    Ok(s.density.antiderivative()?.evaluate(t))
}

/// `∫ f^{(p)} η_p`.
pub fn trace_formula_rhs(s: &SsfDensity, f: &FunctionSpec) -> Result<Complex64> {
    s.density.integrate_against(f, s.order as u32)
}

pub fn asymptotics_report(s: &SsfDensity) -> AsymptoticsReport {
    let d = &s.density;
    let nonzero: Vec<usize> = d.pieces().iter().enumerate().filter(|(_, p)| p.iter().any(|a| *a != 0.0)).map(|(k, _)| k).collect();
    let support = match (nonzero.first(), nonzero.last()) {
        (Some(&a), Some(&b)) => Some((d.breakpoints()[a], d.breakpoints()[b + 1])),
        _ => None,
    };
    let scale = 1.0_f64.max(d.sup_bound());
    AsymptoticsReport {
        left_limit: d.left_tail(),
        right_limit: d.right_tail(),
        support,
        tail_residual: s.tail_residual,
        consistent: d.left_tail() == 0.0 && d.right_tail() == 0.0 && s.tail_residual.abs() <= TAIL_TOLERANCE * scale,
    }
}
