//! Taylor remainders `R_p(f) = f(H₀+V) − Σ_{j<p} (1/j!) d^j/dt^j f(H₀+tV)|₀`.

mod fd;

pub use fd::{
    analytic_step_scale, default_fd_step, fd_gateaux_trace, fd_gateaux_trace_adaptive, fd_remainder_trace, fd_remainder_trace_adaptive,
    fornberg_weights, FdOracle, ADAPTIVE_STEP_FACTORS, RICHARDSON_RATIO,
};

use std::collections::HashMap;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divdiff::FunctionSpec;
use crate::error::{Error, Result};
use crate::extended::{adjoint, divided_difference_dd, to_f64_matrix, DdMatrix, DdNodes};
use crate::multimeasure::NodePattern;
use crate::operator::{trace, CMatrix};
use crate::perturbation::Perturbation;
use crate::precision::{to_c64, CDd, Dd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Trace of the full remainder operator.
    Spectral,
    /// Traces through the multilinear measures.
    Multilinear,
    /// Finite differences in the coupling parameter.
    FiniteDifference,
}

#[derive(Debug, Clone)]
pub struct RemainderResult {
    pub order: usize,
    pub value_trace: Complex64,
    pub operator: Option<CMatrix>,
    pub method: Method,
}

/// `(1/j!) d^j/dt^j trace f(H₀+tV)` at `t = 0`.
pub fn gateaux_trace(pert: &Perturbation, f: &FunctionSpec, j: usize) -> Result<Complex64> {
    Ok(to_c64(gateaux_trace_dd(pert, f, j)?))
}

fn gateaux_trace_dd(pert: &Perturbation, f: &FunctionSpec, j: usize) -> Result<CDd> {
    if j == 0 {
        return Err(Error::domain("Gateaux order must be positive"));
    }
    if f.derivative_vanishes(j as u32) {
        return Ok(CDd::zero());
    }
    let ext = pert.extended()?;
    let weights = pert.grouped_weights(j, NodePattern::FirstRepeated)?;
    let terms = weights
        .groups
        .par_iter()
        .map(|(key, w)| Ok(*w * divided_difference_dd(f, &ext.nodes(key))?))
        .collect::<Result<Vec<CDd>>>()?;
    Ok(terms.into_iter().fold(CDd::zero(), |a, b| a + b))
}

/// `trace f(H₀+V) − trace f(H₀) − Σ_{j=1}^{p−1} gateaux_trace(j)`.
///
/// Every term is accumulated in double-double before the single rounding,
/// so the cancellation between them costs no `f64` digits.
pub fn remainder_trace(pert: &Perturbation, f: &FunctionSpec, p: usize) -> Result<Complex64> {
    if p == 0 {
        return Err(Error::domain("remainder order must be positive"));
    }
    let ext = pert.extended()?;
    let mut value = ext.perturbed().trace_of(f)? - ext.initial().trace_of(f)?;
    for j in 1..p {
        value = value - gateaux_trace_dd(pert, f, j)?;
    }
    Ok(to_c64(value))
}

/// The remainder as a matrix. The `j`-th Taylor term is
/// `Σ_{i₀..i_j} Δ^{(j)} f(λ_{i₀},…,λ_{i_j}) P_{i₀} V P_{i₁} ⋯ V P_{i_j}`.
pub fn remainder_operator(pert: &Perturbation, f: &FunctionSpec, p: usize) -> Result<CMatrix> {
    if p == 0 {
        return Err(Error::domain("remainder order must be positive"));
    }
    let ext = pert.extended()?;
    let d0 = ext.initial();
    let mut out = ext.perturbed().apply(f)? - d0.apply(f)?;
    let k = d0.len();
    let bases = d0.bases();
    for j in 1..p {
        if f.derivative_vanishes(j as u32) {
            continue;
        }
        let mut walker = Walker { blocks: ext.blocks(), eig: d0.eigenvalues(), f, j, cache: HashMap::new() };
        // sums[a][b] collects Δ·B[a][i₁]⋯B[i_{j−1}][b]
        let mut sums: Vec<Vec<DdMatrix>> = (0..k)
            .map(|a| (0..k).map(|b| DdMatrix::zeros(bases[a].ncols(), bases[b].ncols())).collect())
            .collect();
        for a in 0..k {
            let mut path = vec![a as u32];
            let m = bases[a].ncols();
            let start = DdMatrix::from_fn(m, m, |r, c| if r == c { CDd::one() } else { CDd::zero() });
            walker.walk(&mut path, start, &mut sums)?;
        }
        for a in 0..k {
            for b in 0..k {
                out -= &bases[a] * &sums[a][b] * adjoint(&bases[b]);
            }
        }
    }
    Ok(to_f64_matrix(&out))
}

struct Walker<'a> {
    blocks: &'a [Vec<DdMatrix>],
    eig: &'a [Dd],
    f: &'a FunctionSpec,
    j: usize,
    cache: HashMap<Vec<u32>, CDd>,
}

impl Walker<'_> {
    fn walk(&mut self, path: &mut Vec<u32>, prefix: DdMatrix, sums: &mut [Vec<DdMatrix>]) -> Result<()> {
        let last = *path.last().unwrap() as usize;
        if path.len() == self.j + 1 {
            let mut key = path.clone();
            key.sort_unstable();
            let dd = match self.cache.get(&key) {
                Some(v) => *v,
                None => {
                    let v = divided_difference_dd(self.f, &DdNodes::from_indices(self.eig, &key))?;
                    self.cache.insert(key, v);
                    v
                }
            };
            sums[path[0] as usize][last] += prefix.map(|z| z * dd);
            return Ok(());
        }
        for next in 0..self.blocks.len() {
            let product = &prefix * &self.blocks[last][next];
            path.push(next as u32);
            self.walk(path, product, sums)?;
            path.pop();
        }
        Ok(())
    }
}

/// Runs the requested method.
pub fn remainder(pert: &Perturbation, f: &FunctionSpec, p: usize, method: Method) -> Result<RemainderResult> {
    let (value_trace, operator) = match method {
        Method::Spectral => {
            let op = remainder_operator(pert, f, p)?;
            (trace(&op), Some(op))
        }
        Method::Multilinear => (remainder_trace(pert, f, p)?, None),
        Method::FiniteDifference => {
            (fd_remainder_trace_adaptive(pert.h0(), pert.v(), f, p)?, None)
        }
    };
    Ok(RemainderResult { order: p, value_trace, operator, method })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::HermitianOperator;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar() -> Perturbation {
        Perturbation::new(HermitianOperator::scalar(0.0), HermitianOperator::scalar(1.0)).unwrap()
    }

    #[test]
    fn scalar_gateaux_and_remainder() {
        let pert = scalar();
        let fi = FunctionSpec::resolvent(c(0.0, 1.0)).unwrap();
        assert!((gateaux_trace(&pert, &fi, 2).unwrap() - c(0.0, 1.0)).norm() < 1e-15);

        let f = FunctionSpec::resolvent(c(0.0, 2.0)).unwrap();
        let z = c(0.0, 2.0);
        let want = 1.0 / (z - 1.0) - 1.0 / z - 1.0 / (z * z);
        assert!((remainder_trace(&pert, &f, 2).unwrap() - want).norm() < 1e-15);
        let op = remainder_operator(&pert, &f, 2).unwrap();
        assert!((op[(0, 0)] - want).norm() < 1e-15);
    }

    #[test]
    fn trivial_cases() {
        let h0 = HermitianOperator::from_real(&[vec![0.3, 1.0], vec![1.0, -0.2]]).unwrap();
        let v = HermitianOperator::from_real(&[vec![0.5, 0.1], vec![0.1, 0.2]]).unwrap();
        let pert = Perturbation::new(h0.clone(), v.clone()).unwrap();
        let lin = gateaux_trace(&pert, &FunctionSpec::monomial(1), 1).unwrap();
        assert!((lin - c(0.7, 0.0)).norm() < 1e-14);
        for j in 1..4 {
            assert_eq!(gateaux_trace(&pert, &FunctionSpec::constant(2.0), j).unwrap(), c(0.0, 0.0));
        }
        let cubic = FunctionSpec::polynomial(&[1.0, -1.0, 0.5, 2.0]);
        assert!(remainder_trace(&pert, &cubic, 4).unwrap().norm() < 1e-12);

        let zero = Perturbation::new(h0, HermitianOperator::zeros(2)).unwrap();
        let f = FunctionSpec::resolvent(c(2.0, 1.0)).unwrap();
        assert!(remainder_operator(&zero, &f, 3).unwrap().norm() < 1e-15);
    }

    #[test]
    fn operator_and_measure_paths_agree() {
        let h0 = HermitianOperator::from_real(&[vec![0.3, 1.0, 0.0], vec![1.0, -0.2, 0.4], vec![0.0, 0.4, 1.5]]).unwrap();
        let v = HermitianOperator::from_real(&[vec![0.5, 0.1, -0.2], vec![0.1, 0.2, 0.3], vec![-0.2, 0.3, -0.4]]).unwrap();
        let pert = Perturbation::new(h0, v).unwrap();
        let f = FunctionSpec::resolvent_power(c(2.0, 1.0), 2).unwrap();
        for p in 1..=4 {
            let a = trace(&remainder_operator(&pert, &f, p).unwrap());
            let b = remainder_trace(&pert, &f, p).unwrap();
            assert!((a - b).norm() <= 1e-11 * b.norm(), "p={p}: {a} vs {b}");
        }
    }
}
