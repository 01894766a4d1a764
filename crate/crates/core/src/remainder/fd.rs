use std::collections::BTreeMap;

use num_complex::Complex64;

use num_traits::Zero;

use crate::divdiff::{factorial, FunctionSpec};
use crate::error::{Error, Result};
use crate::extended::{coupled, refined_spectrum};
use crate::operator::HermitianOperator;
use crate::precision::{cabs, creal, to_c64, CDd, Dd, Real};

const STENCIL_HALF_WIDTH: i64 = 4;

/// `1e-2 / (1 + ‖V‖₂)`.
pub fn default_fd_step(v: &HermitianOperator) -> f64 {
    1e-2 / (1.0 + v.spectral_norm())
}

/// Step scale for `t ↦ trace f(H₀ + tV)`: `d / ‖V‖₂`, where `d` is the
/// distance from the poles of `f` to the spectrum of `H₀`, capped at 1 and
/// at `1/|s|` for exponentials.
pub fn analytic_step_scale(h0: &HermitianOperator, v: &HermitianOperator, f: &FunctionSpec) -> Result<f64> {
    let spectrum = h0.eigenvalues()?;
    let d = pole_distance(f, &spectrum).min(1.0 / f.frequency().max(1e-300)).min(1.0);
    let vn = v.spectral_norm();
    if vn == 0.0 {
        return Ok(1.0);
    }
    Ok(d / vn)
}

/// Multiples of [`analytic_step_scale`] tried by the adaptive oracle.
pub const ADAPTIVE_STEP_FACTORS: [f64; 7] = [0.02, 0.025, 0.03, 0.035, 0.04, 0.05, 0.06];

fn pole_distance(f: &FunctionSpec, spectrum: &[f64]) -> f64 {
    match f {
        FunctionSpec::ResolventPower { z, .. } => spectrum.iter().map(|l| (z - l).norm()).fold(f64::INFINITY, f64::min),
        FunctionSpec::Combination(terms) => terms.iter().map(|(_, g)| pole_distance(g, spectrum)).fold(f64::INFINITY, f64::min),
        _ => f64::INFINITY,
    }
}

/// Finite-difference weights for derivatives `0..=m` at `z` over nodes `x`
/// (Fornberg's recurrence). Entry `[k][i]` weights `g(x_i)` for `g^{(k)}(z)`.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let x: Vec<Dd> = x.iter().map(|&v| Dd::new(v)).collect();
    fornberg(Dd::new(z), &x, m).into_iter().map(|row| row.into_iter().map(Dd::hi).collect()).collect()
}

fn fornberg<T: Real>(z: T, x: &[T], m: usize) -> Vec<Vec<T>> {
    let n = x.len();
    let mut c = vec![vec![T::zero(); n]; m + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = T::one();
    let mut c4 = x[0] - z;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (T::from_f64(k as f64) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - T::from_f64(k as f64) * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Step ratio between Richardson levels.
pub const RICHARDSON_RATIO: f64 = std::f64::consts::SQRT_2;

/// `t ↦ trace f(H₀ + tV)` from refined eigenvalues, memoized on the
/// sample point. Stencils and extrapolation stay in double-double.
struct CouplingTrace<'a> {
    h0: &'a HermitianOperator,
    v: &'a HermitianOperator,
    f: &'a FunctionSpec,
    cache: BTreeMap<u64, CDd>,
}

impl CouplingTrace<'_> {
    fn new<'a>(h0: &'a HermitianOperator, v: &'a HermitianOperator, f: &'a FunctionSpec) -> CouplingTrace<'a> {
        CouplingTrace { h0, v, f, cache: BTreeMap::new() }
    }

    fn at(&mut self, t: f64) -> Result<CDd> {
        let key = t.to_bits();
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let value = refined_spectrum(&coupled(self.h0, self.v, t))?.trace_of(self.f)?;
        self.cache.insert(key, value);
        Ok(value)
    }

    /// 9-point central estimate of `g^{(j)}(0)` with step `h`.
    fn central(&mut self, j: usize, h: f64) -> Result<CDd> {
        let offsets: Vec<Dd> = (-STENCIL_HALF_WIDTH..=STENCIL_HALF_WIDTH).map(|i| Dd::new(i as f64)).collect();
        let w = fornberg(Dd::ZERO, &offsets, j);
        let mut acc = CDd::zero();
        for (i, wi) in (-STENCIL_HALF_WIDTH..=STENCIL_HALF_WIDTH).zip(&w[j]) {
            if *wi != Dd::ZERO {
                acc = acc + self.at(i as f64 * h)? * creal(*wi);
            }
        }
        Ok(acc / creal(Dd::new(h).powi(j as i32)))
    }

    /// Two Richardson levels over steps `h, rh, r²h`, with `|r₁ − r₂|` of the
    /// first level as an error estimate.
    fn derivative_with_error(&mut self, j: usize, h: f64) -> Result<(CDd, f64)> {
        if j == 0 {
            return Ok((self.at(0.0)?, 0.0));
        }
        if self.v.is_zero() {
            return Ok((CDd::zero(), 0.0));
        }
        let q = if j <= 2 { 8 } else { 6 };
        let ratio = RICHARDSON_RATIO;
        let d1 = self.central(j, h)?;
        let d2 = self.central(j, h * ratio)?;
        let d4 = self.central(j, h * ratio * ratio)?;
        let r = |fine: CDd, coarse: CDd, order: i32| {
            let a = Dd::new(ratio).powi(order);
            (fine * creal(a) - coarse) / creal(a - Dd::ONE)
        };
        let r1 = r(d1, d2, q);
        let r2 = r(d2, d4, q);
        Ok((r(r1, r2, q + 2), cabs(r1 - r2)))
    }
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::domain(format!("finite-difference step must be positive, got {h}")));
    }
    Ok(())
}

/// Finite-difference oracle for one `(H₀, V, f)`. Samples of
/// `g(t) = trace f(H₀ + tV)` and adaptive derivatives are shared across
/// orders.
pub struct FdOracle<'a> {
    g: CouplingTrace<'a>,
    scale: f64,
    derivatives: BTreeMap<usize, (CDd, f64)>,
}

impl<'a> FdOracle<'a> {
    pub fn new(h0: &'a HermitianOperator, v: &'a HermitianOperator, f: &'a FunctionSpec) -> Result<Self> {
        let scale = analytic_step_scale(h0, v, f)?;
        Ok(FdOracle { g: CouplingTrace::new(h0, v, f), scale, derivatives: BTreeMap::new() })
    }

    /// `g^{(j)}(0)/j!` at the step `c · analytic_step_scale` whose two
    /// Richardson levels agree best over `c` in [`ADAPTIVE_STEP_FACTORS`],
    /// with the chosen step.
    pub fn gateaux(&mut self, j: usize) -> Result<(Complex64, f64)> {
        let (value, h) = self.gateaux_dd(j)?;
        Ok((to_c64(value), h))
    }

    fn gateaux_dd(&mut self, j: usize) -> Result<(CDd, f64)> {
        if let Some(hit) = self.derivatives.get(&j) {
            return Ok(*hit);
        }
        let mut best: Option<(f64, CDd, f64)> = None;
        for c in ADAPTIVE_STEP_FACTORS {
            let h = (c * self.scale).min(0.1);
            let (value, err) = self.g.derivative_with_error(j, h)?;
            if best.map_or(true, |(e, _, _)| err < e) {
                best = Some((err, value, h));
            }
        }
        let (_, value, h) = best.expect("step factors are nonempty");
        let hit = (value / creal(Dd::new(factorial(j))), h);
        self.derivatives.insert(j, hit);
        Ok(hit)
    }

    /// `g(1) − Σ_{j<p} g^{(j)}(0)/j!` with adaptive derivatives.
    pub fn remainder(&mut self, p: usize) -> Result<Complex64> {
        if p == 0 {
            return Err(Error::domain("remainder order must be positive"));
        }
        let mut value = self.g.at(1.0)? - self.g.at(0.0)?;
        for j in 1..p {
            value = value - self.gateaux_dd(j)?.0;
        }
        Ok(to_c64(value))
    }
}

/// `(1/j!) g^{(j)}(0)` for `g(t) = trace f(H₀ + tV)`.
pub fn fd_gateaux_trace(h0: &HermitianOperator, v: &HermitianOperator, f: &FunctionSpec, j: usize, h: f64) -> Result<Complex64> {
    check_step(h)?;
    let mut g = CouplingTrace::new(h0, v, f);
    Ok(to_c64(g.derivative_with_error(j, h)?.0) / factorial(j))
}

/// [`fd_gateaux_trace`] at an adaptively chosen step; see [`FdOracle::gateaux`].
/// Returns the estimate and the chosen step.
pub fn fd_gateaux_trace_adaptive(h0: &HermitianOperator, v: &HermitianOperator, f: &FunctionSpec, j: usize) -> Result<(Complex64, f64)> {
    FdOracle::new(h0, v, f)?.gateaux(j)
}

/// [`fd_remainder_trace`] with each derivative from [`fd_gateaux_trace_adaptive`].
pub fn fd_remainder_trace_adaptive(h0: &HermitianOperator, v: &HermitianOperator, f: &FunctionSpec, p: usize) -> Result<Complex64> {
    FdOracle::new(h0, v, f)?.remainder(p)
}

/// `g(1) − Σ_{j<p} g^{(j)}(0)/j!` from finite differences.
pub fn fd_remainder_trace(h0: &HermitianOperator, v: &HermitianOperator, f: &FunctionSpec, p: usize, h: f64) -> Result<Complex64> {
    check_step(h)?;
    if p == 0 {
        return Err(Error::domain("remainder order must be positive"));
    }
    let mut g = CouplingTrace::new(h0, v, f);
    let mut value = g.at(1.0)?;
    for j in 0..p {
        value = value - g.derivative_with_error(j, h)?.0 / creal(Dd::new(factorial(j)));
    }
    Ok(to_c64(value))
}
