use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::function::{binomial, factorial, falling_factorial, polynomial_derivative_at, rising_factorial, FunctionSpec};
use crate::error::{Error, Result};
use crate::precision::{cabs, cdd, cpowi, creal, to_c64, CDd, Dd};

/// A real piecewise polynomial on left-closed intervals `[b_k, b_{k+1})` with
/// constant tails outside `[b_0, b_K]`.
///
/// Piece `k` stores ascending coefficients in the local variable `t − b_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePolynomial {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<f64>>,
    left_tail: f64,
    right_tail: f64,
}

impl PiecewisePolynomial {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Vec<f64>>, left_tail: f64, right_tail: f64) -> Result<Self> {
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("breakpoints must be strictly increasing"));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::domain("breakpoints must be finite"));
        }
        if pieces.len() != breakpoints.len().saturating_sub(1) {
            return Err(Error::domain(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                pieces.len()
            )));
        }
        if breakpoints.is_empty() && left_tail != right_tail {
            return Err(Error::domain("without breakpoints both tails must agree"));
        }
        Ok(PiecewisePolynomial { breakpoints, pieces, left_tail, right_tail })
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        PiecewisePolynomial { breakpoints: Vec::new(), pieces: Vec::new(), left_tail: c, right_tail: c }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }

    pub fn left_tail(&self) -> f64 {
        self.left_tail
    }

    pub fn right_tail(&self) -> f64 {
        self.right_tail
    }

    /// Highest stored degree over all pieces, ignoring exact zero coefficients.
    pub fn degree(&self) -> usize {
        self.pieces
            .iter()
            .filter_map(|p| p.iter().rposition(|&a| a != 0.0))
            .max()
            .unwrap_or(0)
    }

    /// Both tails are zero, so the function has compact support.
    pub fn is_supported(&self) -> bool {
        self.left_tail == 0.0 && self.right_tail == 0.0
    }

    /// Index of the piece containing `t`, if `t ∈ [b_0, b_K)`.
    fn locate(&self, t: f64) -> Option<usize> {
        if self.breakpoints.len() < 2 || t < self.breakpoints[0] || t >= *self.breakpoints.last().unwrap() {
            return None;
        }
        Some(self.breakpoints.partition_point(|&b| b <= t) - 1)
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        match self.locate(t) {
            Some(k) => horner(&self.pieces[k], t - self.breakpoints[k]),
            None if self.breakpoints.is_empty() || t < self.breakpoints[0] => self.left_tail,
            None => self.right_tail,
        }
    }

    pub fn sample(&self, ts: &[f64]) -> Vec<f64> {
        ts.iter().map(|&t| self.evaluate(t)).collect()
    }

    /// Re-expresses the function over a finer breakpoint set. Every current
    /// breakpoint must appear in `breakpoints`.
    pub fn refine(&self, breakpoints: &[f64]) -> Result<Self> {
        if let Some(b) = self.breakpoints.iter().find(|b| breakpoints.binary_search_by(|x| x.total_cmp(b)).is_err()) {
            return Err(Error::domain(format!("refinement drops breakpoint {b}")));
        }
        let mut pieces = Vec::with_capacity(breakpoints.len().saturating_sub(1));
        for w in breakpoints.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let piece = match self.locate(mid) {
                Some(k) => taylor_shift(&self.pieces[k], w[0] - self.breakpoints[k]),
                None if self.breakpoints.is_empty() || mid < self.breakpoints[0] => vec![self.left_tail],
                None => vec![self.right_tail],
            };
            pieces.push(piece);
        }
        PiecewisePolynomial::new(breakpoints.to_vec(), pieces, self.left_tail, self.right_tail)
    }

    /// `a·self + b·other` over the union of breakpoints.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Self {
        let union = union_breakpoints(&self.breakpoints, &other.breakpoints);
        let lhs = self.refine(&union).expect("union contains all breakpoints");
        let rhs = other.refine(&union).expect("union contains all breakpoints");
        let pieces = lhs
            .pieces
            .iter()
            .zip(&rhs.pieces)
            .map(|(p, q)| {
                let n = p.len().max(q.len());
                (0..n)
                    .map(|i| a * p.get(i).copied().unwrap_or(0.0) + b * q.get(i).copied().unwrap_or(0.0))
                    .collect()
            })
            .collect();
        PiecewisePolynomial {
            breakpoints: union,
            pieces,
            left_tail: a * self.left_tail + b * other.left_tail,
            right_tail: a * self.right_tail + b * other.right_tail,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        PiecewisePolynomial {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| p.iter().map(|a| c * a).collect()).collect(),
            left_tail: c * self.left_tail,
            right_tail: c * self.right_tail,
        }
    }

    /// Returns a copy with the tail values replaced.
    pub fn with_tails(&self, left: f64, right: f64) -> Self {
        PiecewisePolynomial { left_tail: left, right_tail: right, ..self.clone() }
    }

    /// `t ↦ ∫_{−∞}^t self`. Needs a zero left tail; a nonzero right tail is
    /// rejected because the antiderivative would be unbounded.
    pub fn antiderivative(&self) -> Result<Self> {
        if !self.is_supported() {
            return Err(Error::domain("antiderivative needs zero tails"));
        }
        let mut acc = 0.0;
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (k, p) in self.pieces.iter().enumerate() {
            let h = self.breakpoints[k + 1] - self.breakpoints[k];
            let mut q = Vec::with_capacity(p.len() + 1);
            q.push(acc);
            q.extend(p.iter().enumerate().map(|(i, a)| a / (i + 1) as f64));
            acc = horner(&q, h);
            pieces.push(q);
        }
        Ok(PiecewisePolynomial { breakpoints: self.breakpoints.clone(), pieces, left_tail: 0.0, right_tail: acc })
    }

    /// Total integral of a compactly supported function.
    pub fn integral(&self) -> Result<f64> {
        Ok(self.antiderivative()?.right_tail)
    }

    /// Piecewise derivative; jumps at breakpoints are dropped.
    pub fn derivative(&self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| p.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect())
            .collect();
        PiecewisePolynomial { breakpoints: self.breakpoints.clone(), pieces, left_tail: 0.0, right_tail: 0.0 }
    }

    /// Right limit minus left limit of the `order`-th derivative at breakpoint `index`.
    pub fn jump(&self, order: usize, index: usize) -> f64 {
        let left = if index == 0 {
            if order == 0 { self.left_tail } else { 0.0 }
        } else {
            let p = &self.pieces[index - 1];
            let h = self.breakpoints[index] - self.breakpoints[index - 1];
            horner(&derivative_coeffs(p, order), h)
        };
        let right = if index + 1 == self.breakpoints.len() {
            if order == 0 { self.right_tail } else { 0.0 }
        } else {
            derivative_coeffs(&self.pieces[index], order).first().copied().unwrap_or(0.0)
        };
        right - left
    }

    /// Upper bound on `sup |self|` from coefficient magnitudes.
    pub fn sup_bound(&self) -> f64 {
        let interior = self
            .pieces
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let h = self.breakpoints[k + 1] - self.breakpoints[k];
                p.iter().enumerate().map(|(i, a)| a.abs() * h.powi(i as i32)).sum::<f64>()
            })
            .fold(0.0, f64::max);
        interior.max(self.left_tail.abs()).max(self.right_tail.abs())
    }

    /// `∫ f^{(j)}(t) P(t) dt` in closed form, piece by piece.
    ///
    /// Rational and polynomial integrands are accumulated in double-double;
    /// others fall back to `f64`.
    pub fn integrate_against(&self, f: &FunctionSpec, j: u32) -> Result<Complex64> {
        if let Some(v) = self.integrate_against_dd(f, j)? {
            return Ok(to_c64(v));
        }
        self.integrate_against_f64(f, j)
    }

    fn integrate_against_dd(&self, f: &FunctionSpec, j: u32) -> Result<Option<CDd>> {
        let mut acc = CDd::zero();
        for (k, p) in self.pieces.iter().enumerate() {
            let b = Dd::new(self.breakpoints[k]);
            let h = Dd::new(self.breakpoints[k + 1]) - b;
            match piece_moment_dd(p, b, h, f, j)? {
                Some(v) => acc = acc + v,
                None => return Ok(None),
            }
        }
        for (tail, edge, side) in [
            (self.left_tail, self.breakpoints.first(), Side::Left),
            (self.right_tail, self.breakpoints.last(), Side::Right),
        ] {
            if tail == 0.0 {
                continue;
            }
            match tail_moment_dd(f, j, edge.copied(), side)? {
                Some(v) => acc = acc + v * creal(Dd::new(tail)),
                None => return Ok(None),
            }
        }
        Ok(Some(acc))
    }

    fn integrate_against_f64(&self, f: &FunctionSpec, j: u32) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, p) in self.pieces.iter().enumerate() {
            let b = self.breakpoints[k];
            let h = self.breakpoints[k + 1] - b;
            acc += piece_moment(p, b, h, f, j)?;
        }
        if self.left_tail != 0.0 {
            acc += self.left_tail * tail_moment(f, j, self.breakpoints.first().copied(), Side::Left)?;
        }
        if self.right_tail != 0.0 {
            acc += self.right_tail * tail_moment(f, j, self.breakpoints.last().copied(), Side::Right)?;
        }
        Ok(acc)
    }
}

impl Add for &PiecewisePolynomial {
    type Output = PiecewisePolynomial;
    fn add(self, rhs: Self) -> PiecewisePolynomial {
        self.linear_combination(1.0, rhs, 1.0)
    }
}

impl Sub for &PiecewisePolynomial {
    type Output = PiecewisePolynomial;
    fn sub(self, rhs: Self) -> PiecewisePolynomial {
        self.linear_combination(1.0, rhs, -1.0)
    }
}

impl Mul<f64> for &PiecewisePolynomial {
    type Output = PiecewisePolynomial;
    fn mul(self, c: f64) -> PiecewisePolynomial {
        self.scale(c)
    }
}

impl Neg for &PiecewisePolynomial {
    type Output = PiecewisePolynomial;
    fn neg(self) -> PiecewisePolynomial {
        self.scale(-1.0)
    }
}

/// Sorted union with exact duplicates removed.
pub(crate) fn union_breakpoints(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = a.iter().chain(b).copied().collect();
    out.sort_by(|x, y| x.total_cmp(y));
    out.dedup();
    out
}

pub(crate) fn horner(p: &[f64], u: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &a| acc * u + a)
}

fn derivative_coeffs(p: &[f64], order: usize) -> Vec<f64> {
    p.iter()
        .enumerate()
        .skip(order)
        .map(|(i, a)| a * falling_factorial(i as u32, order as u32))
        .collect()
}

/// Coefficients of `u ↦ p(u + δ)`.
pub(crate) fn taylor_shift(p: &[f64], delta: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    if delta == 0.0 {
        return q;
    }
    let n = q.len();
    for i in 0..n {
        for k in (i..n.saturating_sub(1)).rev() {
            q[k] += delta * q[k + 1];
        }
    }
    q
}

/// Polynomial product, complex by real.
fn poly_mul(a: &[Complex64], b: &[f64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `∫_lo^hi Σ c_i u^i du`.
fn poly_integral(c: &[Complex64], lo: f64, hi: f64) -> Complex64 {
    c.iter()
        .enumerate()
        .map(|(i, a)| a * ((hi.powi(i as i32 + 1) - lo.powi(i as i32 + 1)) / (i + 1) as f64))
        .sum()
}

fn piece_moment(q: &[f64], b: f64, h: f64, f: &FunctionSpec, j: u32) -> Result<Complex64> {
    if q.iter().all(|&a| a == 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    match f {
        FunctionSpec::ResolventPower { z, k } => {
            let w = z - b;
            Ok(rising_factorial(*k, j) * rational_moment(q, w, h, k + j))
        }
        FunctionSpec::Polynomial(c) => {
            // Taylor coefficients of f^{(j)} about b
            let g: Vec<Complex64> = (0..c.len())
                .map(|i| polynomial_derivative_at(c, j as usize + i, Complex64::new(b, 0.0)) / factorial(i))
                .collect();
            Ok(poly_integral(&poly_mul(&g, q), 0.0, h))
        }
        FunctionSpec::Exponential { s } => {
            let a = Complex64::new(0.0, *s);
            if *s == 0.0 {
                return Ok(if j == 0 { rational_moment(q, a, h, 0) } else { Complex64::new(0.0, 0.0) });
            }
            Ok(a.powu(j) * (a * b).exp() * exponential_moment(q, a, h))
        }
        FunctionSpec::TruncatedPower { t, k } => {
            let (k, j) = (*k, j);
            if j > k {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let shift = t - b;
            if shift >= h {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let lo = shift.max(0.0);
            let m = (k - j) as usize;
            let coef = falling_factorial(k, j);
            // (u − shift)^m expanded in u
            let g: Vec<Complex64> = (0..=m)
                .map(|i| {
                    let c = binomial(m, i) * (-shift).powi((m - i) as i32);
                    Complex64::new(coef * c, 0.0)
                })
                .collect();
            Ok(poly_integral(&poly_mul(&g, q), lo, h))
        }
        FunctionSpec::Combination(terms) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, g) in terms {
                acc += c * piece_moment(q, b, h, g, j)?;
            }
            Ok(acc)
        }
    }
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

/// `∫ f^{(j)}` over the half-line beyond the outermost breakpoint.
fn tail_moment(f: &FunctionSpec, j: u32, edge: Option<f64>, side: Side) -> Result<Complex64> {
    if f.derivative_vanishes(j) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let edge = edge.ok_or_else(|| Error::domain("constant nonzero function is not integrable"))?;
    match f {
        FunctionSpec::ResolventPower { z, k } if k + j >= 2 => {
            let n = (k + j) as i32;
            let v = (z - edge).powi(1 - n) / (n - 1) as f64 * rising_factorial(*k, j);
            Ok(match side {
                Side::Left => v,
                Side::Right => -v,
            })
        }
        FunctionSpec::Combination(terms) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, g) in terms {
                acc += c * tail_moment(g, j, Some(edge), side)?;
            }
            Ok(acc)
        }
        _ => Err(Error::domain("integrand is not integrable against a nonzero tail")),
    }
}

/// `∫_0^h q(u) (w − u)^{-n} du` in closed form.
///
/// Pieces far from the pole (relative to their half-width) use the
/// convergent expansion of `(w − u)^{-n}` about the piece midpoint; near
/// pieces use repeated integration by parts down to a logarithm.
pub(crate) fn rational_moment(q: &[f64], w: Complex64, h: f64, n: u32) -> Complex64 {
    if q.iter().all(|&a| a == 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    if n == 0 {
        return poly_integral(&poly_mul(&[Complex64::new(1.0, 0.0)], q), 0.0, h);
    }
    let c = 0.5 * h;
    let wc = w - c;
    if c <= 0.5 * wc.norm() {
        far_rational_moment(q, wc, c, n)
    } else {
        near_rational_moment(q, w, h, n)
    }
}

fn far_rational_moment(q: &[f64], wc: Complex64, c: f64, n: u32) -> Complex64 {
    // q(c + c x) in powers of x ∈ [−1, 1]
    let shifted = taylor_shift(q, c);
    let b: Vec<f64> = shifted.iter().enumerate().map(|(i, a)| a * c.powi(i as i32)).collect();
    let moment = |m: usize| -> f64 {
        b.iter()
            .enumerate()
            .filter(|(i, _)| (i + m) % 2 == 0)
            .map(|(i, a)| 2.0 * a / (i + m + 1) as f64)
            .sum()
    };
    let ratio = c / wc;
    let mut factor = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    let scale: f64 = b.iter().map(|a| a.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut small = 0;
    for m in 0..2000 {
        let term = factor * moment(m);
        acc += term;
        if factor.norm() * scale <= 1e-18 * acc.norm().max(f64::MIN_POSITIVE) {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
        factor *= ratio * ((m as f64 + n as f64) / (m as f64 + 1.0));
    }
    acc * c * wc.powi(-(n as i32))
}

fn near_rational_moment(q: &[f64], w: Complex64, h: f64, n: u32) -> Complex64 {
    if q.iter().all(|&a| a == 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    if n == 1 {
        // q(u) = Σ e_i (w − u)^i with e_i = (−1)^i q^{(i)}(w)/i!
        let qc: Vec<Complex64> = q.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        let wh = w - h;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..q.len() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let e = sign * polynomial_derivative_at(&qc, i, w) / factorial(i);
            if i == 0 {
                acc += e * (w.ln() - wh.ln());
            } else {
                acc += e * (w.powi(i as i32) - wh.powi(i as i32)) / i as f64;
            }
        }
        return acc;
    }
    let nf = (n - 1) as f64;
    let e = 1 - n as i32;
    let boundary = (horner(q, h) * (w - h).powi(e) - q[0] * w.powi(e)) / nf;
    let dq: Vec<f64> = q.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect();
    boundary - near_rational_moment(&dq, w, h, n - 1) / nf
}

/// `∫_0^h q(u) e^{a u} du` for `a ≠ 0`.
fn exponential_moment(q: &[f64], a: Complex64, h: f64) -> Complex64 {
    if (a * h).norm() <= 1.0 {
        // e^{au} = Σ (au)^m / m!
        let mut acc = Complex64::new(0.0, 0.0);
        let mut factor = Complex64::new(1.0, 0.0);
        for m in 0..60 {
            let mom: f64 = q
                .iter()
                .enumerate()
                .map(|(i, c)| c * h.powi((i + m + 1) as i32) / (i + m + 1) as f64)
                .sum();
            acc += factor * mom;
            factor *= a / (m + 1) as f64;
            if factor.norm() * h.powi(m as i32 + 2) < 1e-20 {
                break;
            }
        }
        return acc;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut dq = q.to_vec();
    let eh = (a * h).exp();
    let mut sign = 1.0;
    let mut apow = a;
    while !dq.is_empty() {
        acc += sign * (horner(&dq, h) * eh - dq[0]) / apow;
        dq = dq.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect();
        sign = -sign;
        apow *= a;
    }
    acc
}

fn poly_integral_dd(c: &[CDd], h: Dd) -> CDd {
    c.iter().enumerate().rev().fold(CDd::zero(), |acc, (i, a)| acc * creal(h) + *a / creal(Dd::new((i + 1) as f64))) * creal(h)
}

/// Double-double [`piece_moment`]; `None` where only the `f64` form exists.
fn piece_moment_dd(q: &[f64], b: Dd, h: Dd, f: &FunctionSpec, j: u32) -> Result<Option<CDd>> {
    if q.iter().all(|&a| a == 0.0) {
        return Ok(Some(CDd::zero()));
    }
    let q: Vec<Dd> = q.iter().map(|&a| Dd::new(a)).collect();
    match f {
        FunctionSpec::ResolventPower { z, k } => {
            let n = k + j;
            if q.len() + 1 > n as usize {
                return Ok(None);
            }
            let w = cdd(*z) - creal(b);
            Ok(Some(rational_moment_dd(&q, w, h, n) * creal(Dd::new(rising_factorial(*k, j)))))
        }
        FunctionSpec::Polynomial(c) => {
            // Taylor coefficients of f^{(j)} about b, times q
            let g: Vec<CDd> = (0..c.len())
                .map(|i| {
                    let mut acc = CDd::zero();
                    for n in (j as usize + i..c.len()).rev() {
                        acc = acc * creal(b) + cdd(c[n]) * creal(Dd::new(falling_factorial(n as u32, j + i as u32)));
                    }
                    acc / creal(Dd::new(factorial(i)))
                })
                .collect();
            let mut prod = vec![CDd::zero(); g.len() + q.len() - 1];
            for (i, x) in g.iter().enumerate() {
                for (l, y) in q.iter().enumerate() {
                    prod[i + l] = prod[i + l] + *x * creal(*y);
                }
            }
            Ok(Some(poly_integral_dd(&prod, h)))
        }
        FunctionSpec::Combination(terms) => {
            let mut acc = CDd::zero();
            for (c, g) in terms {
                let qf: Vec<f64> = q.iter().map(|a| a.hi()).collect();
                match piece_moment_dd(&qf, b, h, g, j)? {
                    Some(v) => acc = acc + cdd(*c) * v,
                    None => return Ok(None),
                }
            }
            Ok(Some(acc))
        }
        _ => Ok(None),
    }
}

fn tail_moment_dd(f: &FunctionSpec, j: u32, edge: Option<f64>, side: Side) -> Result<Option<CDd>> {
    if f.derivative_vanishes(j) {
        return Ok(Some(CDd::zero()));
    }
    let Some(edge) = edge else {
        return Ok(None);
    };
    match f {
        FunctionSpec::ResolventPower { z, k } if k + j >= 2 => {
            let n = (k + j) as i32;
            let v = cpowi(cdd(*z) - creal(Dd::new(edge)), 1 - n)
                * creal(Dd::new(rising_factorial(*k, j)) / Dd::new((n - 1) as f64));
            Ok(Some(match side {
                Side::Left => v,
                Side::Right => -v,
            }))
        }
        FunctionSpec::Combination(terms) => {
            let mut acc = CDd::zero();
            for (c, g) in terms {
                match tail_moment_dd(g, j, Some(edge), side)? {
                    Some(v) => acc = acc + cdd(*c) * v,
                    None => return Ok(None),
                }
            }
            Ok(Some(acc))
        }
        _ => Ok(None),
    }
}

/// `∫_0^h q(u) (w − u)^{-n} du` in double-double for `deg q ≤ n − 2`,
/// split into far and near pieces as in [`rational_moment`].
fn rational_moment_dd(q: &[Dd], w: CDd, h: Dd, n: u32) -> CDd {
    let c = h * Dd::new(0.5);
    let wc = w - creal(c);
    if c.hi() <= 0.5 * cabs(wc) {
        far_rational_moment_dd(q, wc, c, n)
    } else {
        near_rational_moment_dd(q, w, h, n)
    }
}

fn far_rational_moment_dd(q: &[Dd], wc: CDd, c: Dd, n: u32) -> CDd {
    let mut shifted = q.to_vec();
    let len = shifted.len();
    for i in 0..len {
        for k in (i..len.saturating_sub(1)).rev() {
            let next = shifted[k + 1];
            shifted[k] += c * next;
        }
    }
    let mut cp = Dd::ONE;
    let b: Vec<Dd> = shifted
        .iter()
        .map(|&a| {
            let v = a * cp;
            cp = cp * c;
            v
        })
        .collect();
    let moment = |m: usize| -> Dd {
        b.iter()
            .enumerate()
            .filter(|(i, _)| (i + m) % 2 == 0)
            .fold(Dd::ZERO, |acc, (i, &a)| acc + a * Dd::new(2.0) / Dd::new((i + m + 1) as f64))
    };
    let ratio = creal(c) / wc;
    let scale: f64 = b.iter().map(|a| a.hi().abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut factor = CDd::one();
    let mut acc = CDd::zero();
    let mut small = 0;
    for m in 0..4000 {
        acc = acc + factor * creal(moment(m));
        if cabs(factor) * scale <= 1e-34 * cabs(acc).max(f64::MIN_POSITIVE) {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
        factor = factor * ratio * creal(Dd::new((m + n as usize) as f64) / Dd::new((m + 1) as f64));
    }
    acc * creal(c) * cpowi(wc, -(n as i32))
}

fn near_rational_moment_dd(q: &[Dd], w: CDd, h: Dd, n: u32) -> CDd {
    if q.is_empty() {
        return CDd::zero();
    }
    let nf = creal(Dd::new((n - 1) as f64));
    let e = 1 - n as i32;
    let qh = q.iter().rev().fold(Dd::ZERO, |acc, &a| acc * h + a);
    let boundary = (cpowi(w - creal(h), e) * creal(qh) - cpowi(w, e) * creal(q[0])) / nf;
    let dq: Vec<Dd> = q.iter().enumerate().skip(1).map(|(i, &a)| a * Dd::new(i as f64)).collect();
    boundary - near_rational_moment_dd(&dq, w, h, n - 1) / nf
}
