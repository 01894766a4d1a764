use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closest approach of a real node to a complex pole before evaluation is refused.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// A scalar test function `R -> C` with closed-form derivatives of every order.
///
/// Resolvent powers and their linear combinations span the bounded rational
/// functions with non-real poles, which is the class the trace formula is
/// checked on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `λ ↦ (z − λ)^{-k}`, `Im z ≠ 0`, `k ≥ 1`.
    ResolventPower { z: Complex64, k: u32 },
    /// `λ ↦ Σ c_n λ^n`, coefficients in ascending order.
    Polynomial(Vec<Complex64>),
    /// `λ ↦ exp(iλs)`.
    Exponential { s: f64 },
    /// `λ ↦ (λ − t)_+^k`.
    TruncatedPower { t: f64, k: u32 },
    /// `Σ c_i f_i`.
    Combination(Vec<(Complex64, FunctionSpec)>),
}

impl FunctionSpec {
    /// `f_z(λ) = 1/(z − λ)`.
    pub fn resolvent(z: Complex64) -> Result<Self> {
        Self::resolvent_power(z, 1)
    }

    pub fn resolvent_power(z: Complex64, k: u32) -> Result<Self> {
        if z.im == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::domain(format!("resolvent needs a finite non-real z, got {z}")));
        }
        if k == 0 {
            return Err(Error::domain("resolvent power must be at least 1"));
        }
        Ok(FunctionSpec::ResolventPower { z, k })
    }

    pub fn polynomial(coefficients: &[f64]) -> Self {
        FunctionSpec::Polynomial(coefficients.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn monomial(n: usize) -> Self {
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        Self::polynomial(&c)
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(&[c])
    }

    pub fn exponential(s: f64) -> Self {
        FunctionSpec::Exponential { s }
    }

    pub fn truncated_power(t: f64, k: u32) -> Self {
        FunctionSpec::TruncatedPower { t, k }
    }

    pub fn combination(terms: Vec<(Complex64, FunctionSpec)>) -> Self {
        FunctionSpec::Combination(terms)
    }

    /// Value at a real point.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        self.derivative_at(0, x)
    }

    /// `f^{(j)}(x)`.
    ///
    /// For the truncated power the derivative of order `k` is taken as the
    /// left derivative at the kink, `k!·χ_{x>t}`; the value (`j = 0`) keeps
    /// the `0^0 = 1` convention.
    pub fn derivative_at(&self, j: u32, x: f64) -> Result<Complex64> {
        match self {
            FunctionSpec::ResolventPower { z, k } => {
                let d = z - x;
                if d.norm() <= POLE_TOLERANCE {
                    return Err(Error::PoleCollision { pole: *z, node: x });
                }
                let rising = rising_factorial(*k, j);
                Ok(rising * d.powi(-((*k + j) as i32)))
            }
            FunctionSpec::Polynomial(c) => Ok(polynomial_derivative_at(c, j as usize, Complex64::new(x, 0.0))),
            FunctionSpec::Exponential { s } => {
                let a = Complex64::new(0.0, *s);
                Ok(a.powu(j) * (a * x).exp())
            }
            FunctionSpec::TruncatedPower { t, k } => {
                let k = *k;
                let y = x - t;
                let v = if j == 0 {
                    truncated_power(y, k)
                } else if j < k {
                    falling_factorial(k, j) * truncated_power(y, k - j)
                } else if j == k {
                    if y > 0.0 {
                        falling_factorial(k, j)
                    } else {
                        0.0
                    }
                } else {
                    0.0
                };
                Ok(Complex64::new(v, 0.0))
            }
            FunctionSpec::Combination(terms) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, f) in terms {
                    acc += c * f.derivative_at(j, x)?;
                }
                Ok(acc)
            }
        }
    }

    /// Degree when the function is a polynomial (combinations of polynomials included).
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self {
            FunctionSpec::Polynomial(c) => Some(c.iter().rposition(|a| *a != Complex64::new(0.0, 0.0)).unwrap_or(0)),
            FunctionSpec::Combination(terms) => terms
                .iter()
                .map(|(_, f)| f.polynomial_degree())
                .try_fold(0usize, |acc, d| d.map(|d| acc.max(d))),
            _ => None,
        }
    }

    /// Whether `f^{(j)}` vanishes identically.
    pub fn derivative_vanishes(&self, j: u32) -> bool {
        match self {
            FunctionSpec::Polynomial(_) => self.polynomial_degree().map_or(false, |d| (j as usize) > d || self.is_zero_polynomial()),
            FunctionSpec::TruncatedPower { k, .. } => j > *k,
            FunctionSpec::Exponential { s } => *s == 0.0 && j > 0,
            FunctionSpec::ResolventPower { .. } => false,
            FunctionSpec::Combination(terms) => terms.iter().all(|(c, f)| c.norm() == 0.0 || f.derivative_vanishes(j)),
        }
    }

    /// Largest `|s|` over exponential terms, 0 if there are none.
    pub fn frequency(&self) -> f64 {
        match self {
            FunctionSpec::Exponential { s } => s.abs(),
            FunctionSpec::Combination(terms) => terms.iter().map(|(_, f)| f.frequency()).fold(0.0, f64::max),
            _ => 0.0,
        }
    }

    fn is_zero_polynomial(&self) -> bool {
        matches!(self, FunctionSpec::Polynomial(c) if c.iter().all(|a| a.norm() == 0.0))
    }
}

/// `x_+^k`, with `0^0 = 1`.
pub fn truncated_power(x: f64, k: u32) -> f64 {
    if x >= 0.0 {
        x.powi(k as i32)
    } else {
        0.0
    }
}

/// `k (k+1) ⋯ (k+j−1)`.
pub(crate) fn rising_factorial(k: u32, j: u32) -> f64 {
    (0..j).map(|i| (k + i) as f64).product()
}

/// `k (k−1) ⋯ (k−j+1)`.
pub(crate) fn falling_factorial(k: u32, j: u32) -> f64 {
    (0..j).map(|i| k as f64 - i as f64).product()
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub(crate) fn polynomial_derivative_at(c: &[Complex64], j: usize, x: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in (j..c.len()).rev() {
        acc = acc * x + c[n] * falling_factorial(n as u32, j as u32);
    }
    acc
}
