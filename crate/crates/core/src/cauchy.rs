//! Regularized Cauchy transforms
//! `G_ν(z) = ∫ (1/(z−t) + t/(t²+1)) dν(t)` of atoms plus compactly supported
//! piecewise-polynomial densities, all in closed form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divdiff::{factorial, rational_moment, spline_to_piecewise, FunctionSpec, NodeMultiset, PiecewisePolynomial, SplineKind};
use crate::error::{Error, Result};
use crate::multimeasure::{integrate_divided_difference, NodePattern};
use crate::operator::{resolvent, trace, CMatrix};
use crate::perturbation::Perturbation;

/// A finite real measure: point masses plus an absolutely continuous part.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub atoms: Vec<(f64, f64)>,
    pub density: Option<PiecewisePolynomial>,
}

impl MeasureSpec {
    pub fn zero() -> Self {
        MeasureSpec::default()
    }

    pub fn point_mass(location: f64, weight: f64) -> Self {
        MeasureSpec { atoms: vec![(location, weight)], density: None }
    }

    /// `density·dt`; the density must vanish outside its breakpoints.
    pub fn absolutely_continuous(density: PiecewisePolynomial) -> Result<Self> {
        if !density.is_supported() {
            return Err(Error::domain("density must have zero tails"));
        }
        Ok(MeasureSpec { atoms: Vec::new(), density: Some(density) })
    }

    /// Uniform density `1` on `[a, b)`.
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::absolutely_continuous(PiecewisePolynomial::new(vec![a, b], vec![vec![1.0]], 0.0, 0.0)?)
    }

    pub fn total_mass(&self) -> Result<f64> {
        let ac = match &self.density {
            Some(d) => d.integral()?,
            None => 0.0,
        };
        Ok(self.atoms.iter().map(|(_, w)| w).sum::<f64>() + ac)
    }

    /// Upper bound on `|ν|(ℝ)`: atom weights plus `sup|density|` times its span.
    pub fn variation_bound(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|(_, w)| w.abs()).sum();
        let ac = match &self.density {
            Some(d) => match (d.breakpoints().first(), d.breakpoints().last()) {
                (Some(a), Some(b)) => d.sup_bound() * (b - a),
                _ => 0.0,
            },
            None => 0.0,
        };
        atoms + ac
    }

    /// `t ↦ ν((−∞, t))`.
    pub fn cumulative(&self) -> Result<PiecewisePolynomial> {
        let mut out = match &self.density {
            Some(d) => d.antiderivative()?,
            None => PiecewisePolynomial::zero(),
        };
        for &(a, w) in &self.atoms {
            let step = PiecewisePolynomial::new(vec![a], Vec::new(), 0.0, w)?;
            out = out.linear_combination(1.0, &step, 1.0);
        }
        Ok(out)
    }

    /// `Σ_pieces ∫ q(t) (z − t)^{−n} dt` over the density.
    fn density_moment(&self, z: Complex64, n: u32) -> Complex64 {
        match &self.density {
            Some(d) => piecewise_moment(d, z, n),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `∫ t/(t²+1) dν = −Re ∫ dν/(i − t)`.
    pub fn regularizer(&self) -> f64 {
        let i = Complex64::i();
        let atoms: f64 = self.atoms.iter().map(|(a, w)| w * a / (a * a + 1.0)).sum();
        atoms - self.density_moment(i, 1).re
    }
}

fn piecewise_moment(d: &PiecewisePolynomial, z: Complex64, n: u32) -> Complex64 {
    d.pieces()
        .iter()
        .zip(d.breakpoints().windows(2))
        .map(|(q, w)| rational_moment(q, z - w[0], w[1] - w[0], n))
        .sum()
}

fn check_off_axis(z: Complex64) -> Result<()> {
    if z.im == 0.0 || !z.is_finite() {
        return Err(Error::domain(format!("transform needs Im z != 0, got {z}")));
    }
    Ok(())
}

/// `G_ν(z)`.
pub fn cauchy_transform(m: &MeasureSpec, z: Complex64) -> Result<Complex64> {
    check_off_axis(z)?;
    let atoms: Complex64 = m.atoms.iter().map(|&(a, w)| w / (z - a)).sum();
    Ok(atoms + m.density_moment(z, 1) + m.regularizer())
}

/// `G_ν^{(k)}(z) = (−1)^k k! ∫ (z − t)^{−k−1} dν(t)` for `k ≥ 1`.
pub fn cauchy_derivative(m: &MeasureSpec, z: Complex64, k: u32) -> Result<Complex64> {
    check_off_axis(z)?;
    if k == 0 {
        return cauchy_transform(m, z);
    }
    let n = k + 1;
    let atoms: Complex64 = m.atoms.iter().map(|&(a, w)| w * (z - a).powi(-(n as i32))).sum();
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * factorial(k as usize) * (atoms + m.density_moment(z, n)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionResult {
    /// `−(1/π) Im G(t + iε)` at the smallest `ε`.
    pub value: f64,
    pub eps: Vec<f64>,
    pub estimates: Vec<f64>,
    /// `|estimate_{i+1} − estimate_i|`.
    pub differences: Vec<f64>,
    /// Polynomial extrapolation of the estimates to `ε = 0`.
    pub extrapolated: f64,
    /// At least three levels with non-increasing differences.
    pub converged: bool,
}

/// Stieltjes inversion `−(1/π) lim Im G(t + iε)` along a decreasing schedule.
pub fn stieltjes_invert<G>(g: G, t: f64, eps_schedule: &[f64]) -> Result<InversionResult>
where
    G: Fn(Complex64) -> Result<Complex64>,
{
    let estimates = eps_schedule
        .iter()
        .map(|&e| Ok(-g(Complex64::new(t, e))?.im / std::f64::consts::PI))
        .collect::<Result<Vec<f64>>>()?;
    boundary_values(eps_schedule, estimates)
}

fn boundary_values(eps: &[f64], estimates: Vec<f64>) -> Result<InversionResult> {
    if eps.is_empty() {
        return Err(Error::domain("eps schedule is empty"));
    }
    if eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::domain("eps schedule must be positive and strictly decreasing"));
    }
    let differences: Vec<f64> = estimates.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let converged = estimates.len() >= 3 && differences.windows(2).all(|d| d[1] <= d[0]);
    Ok(InversionResult {
        value: *estimates.last().expect("nonempty"),
        extrapolated: extrapolate_to_zero(eps, &estimates),
        eps: eps.to_vec(),
        estimates,
        differences,
        converged,
    })
}

/// Neville evaluation at 0 of the interpolating polynomial through `(x_i, y_i)`.
pub fn extrapolate_to_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = p.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (x[i], x[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartsCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

/// `G_ν(z) − ∫ t/(t²+1) dν` against
/// `d/dz ∫ (1/(z−t) + t/(t²+1)) ν((−∞, t)) dt = −∫ ν((−∞, t)) (z − t)^{−2} dt`.
pub fn integration_by_parts_check(m: &MeasureSpec, z: Complex64) -> Result<PartsCheck> {
    check_off_axis(z)?;
    let lhs = cauchy_transform(m, z)? - m.regularizer();
    let f = m.cumulative()?;
    let mut integral = piecewise_moment(&f, z, 2);
    if let Some(&last) = f.breakpoints().last() {
        // ∫_last^∞ (z − t)^{−2} dt = −1/(z − last)
        integral -= f.right_tail() / (z - last);
    }
    let rhs = -integral;
    Ok(PartsCheck { lhs, rhs, residual: (lhs - rhs).norm() })
}

/// `J(z) = ∫ log(z − t) Δ^{(n−1)}[(λ−t)_+^{n−2}] dt` over `n` nodes, principal
/// branch, `Im z > 0`.
pub fn log_transform(nodes: &NodeMultiset, z: Complex64) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(Error::domain(format!("log transform needs Im z > 0, got {z}")));
    }
    let kernel = spline_to_piecewise(nodes, SplineKind::Basic)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (q, w) in kernel.pieces().iter().zip(kernel.breakpoints().windows(2)) {
        let (b, h) = (w[0], w[1] - w[0]);
        // ∫ q log(z−b−u) = Q(h) log(z−b−h) + ∫ Q/(z−b−u), Q' = q, Q(0) = 0
        let mut big_q = vec![0.0];
        big_q.extend(q.iter().enumerate().map(|(i, a)| a / (i + 1) as f64));
        let qh: f64 = big_q.iter().rev().fold(0.0, |acc, a| acc * h + a);
        acc += qh * (z - b - h).ln() + rational_moment(&big_q, z - b, h, 1);
    }
    Ok(acc)
}

/// `(1/π) Im J(t + iε)` along a decreasing schedule, with extrapolation to
/// `ε = 0`, where it tends to `cumulative_kernel(t)/(n−1)`.
pub fn log_transform_boundary(nodes: &NodeMultiset, t: f64, eps_schedule: &[f64]) -> Result<InversionResult> {
    let estimates = eps_schedule
        .iter()
        .map(|&e| Ok(log_transform(nodes, Complex64::new(t, e))?.im / std::f64::consts::PI))
        .collect::<Result<Vec<f64>>>()?;
    boundary_values(eps_schedule, estimates)
}

/// `C` with `|−(1/π) Im G(t+iε) − η(t)| ≤ C·ε` for `ν = η dt`, when `t` is not
/// a breakpoint: `C = M₂δ/π + 4S/(πδ)`, with `δ` the distance from `t` to the
/// nearest breakpoint, `M₂` a bound on `|η″|` over the piece holding `t`, and
/// `S` a bound on `|η|`. `None` at a breakpoint.
pub fn poisson_error_constant(density: &PiecewisePolynomial, t: f64) -> Option<f64> {
    let b = density.breakpoints();
    let delta = b.iter().map(|x| (t - x).abs()).fold(f64::INFINITY, f64::min);
    if delta == 0.0 {
        return None;
    }
    let k = b.partition_point(|&x| x <= t);
    let m2 = if k == 0 || k == b.len() {
        0.0
    } else {
        let h = b[k] - b[k - 1];
        let p = &density.pieces()[k - 1];
        p.iter().enumerate().skip(2).map(|(i, a)| (i * (i - 1)) as f64 * a.abs() * h.powi(i as i32 - 2)).sum()
    };
    let s = density.sup_bound();
    let pi = std::f64::consts::PI;
    Some(if delta.is_finite() { m2 * delta / pi + 4.0 * s / (pi * delta) } else { 0.0 })
}

/// `min −Im G(z)` over the sample points; positive for a nonzero positive
/// measure when every `Im z > 0`.
pub fn herglotz_margin(m: &MeasureSpec, zs: &[Complex64]) -> Result<f64> {
    let mut margin = f64::INFINITY;
    for &z in zs {
        if !(z.im > 0.0) {
            return Err(Error::domain(format!("Herglotz samples need Im z > 0, got {z}")));
        }
        margin = margin.min(-cauchy_transform(m, z)?.im);
    }
    Ok(margin)
}

/// `|G(iy)/(iy)|`.
/// `|G(iy)/(iy)|`; bounded by `(|∫t/(t²+1)dν| + |ν|(ℝ)/y)/y`.
pub fn growth_ratio(m: &MeasureSpec, y: f64) -> Result<f64> {
    let z = Complex64::new(0.0, y);
    Ok((cauchy_transform(m, z)? / z).norm())
}

fn resolvent_chain(pert: &Perturbation, z: Complex64) -> Result<(CMatrix, CMatrix)> {
    let r = resolvent(pert.initial(), z, 1)?;
    let rv = &r * pert.v().matrix();
    Ok((r, rv))
}

/// `trace(((zI − H₀)^{-1} V)^p)` by matrix products.
pub fn resolvent_power_trace(pert: &Perturbation, z: Complex64, p: usize) -> Result<Complex64> {
    let (_, rv) = resolvent_chain(pert, z)?;
    let mut acc = CMatrix::identity(pert.dim(), pert.dim());
    for _ in 0..p {
        acc = &acc * &rv;
    }
    Ok(trace(&acc))
}

/// `d/dz trace(((zI − H₀)^{-1} V)^p) = −p·trace((zI − H₀)^{-2} V ((zI − H₀)^{-1} V)^{p−1})`.
pub fn resolvent_power_trace_derivative(pert: &Perturbation, z: Complex64, p: usize) -> Result<Complex64> {
    if p == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (r, rv) = resolvent_chain(pert, z)?;
    let mut acc = &r * &rv;
    for _ in 1..p {
        acc = &acc * &rv;
    }
    Ok(-(p as f64) * trace(&acc))
}

/// The same trace as `Σ_atoms w·Δ^{(p−1)}[λ ↦ (z − λ)^{−1}]` over the order-`p`
/// measure.
pub fn resolvent_power_trace_multilinear(pert: &Perturbation, z: Complex64, p: usize) -> Result<Complex64> {
    let m = pert.measure(p)?;
    integrate_divided_difference(&m, &FunctionSpec::resolvent(z)?, NodePattern::Plain)
}

/// Its exact `z`-derivative, `−Σ_atoms w·Δ^{(p−1)}[λ ↦ (z − λ)^{−2}]`.
pub fn resolvent_power_trace_multilinear_derivative(pert: &Perturbation, z: Complex64, p: usize) -> Result<Complex64> {
    let m = pert.measure(p)?;
    Ok(-integrate_divided_difference(&m, &FunctionSpec::resolvent_power(z, 2)?, NodePattern::Plain)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::HermitianOperator;
    use crate::remainder::remainder_trace;
    use crate::ssf::ssf_sequence;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn transform_examples() {
        let z = c(0.7, 1.3);
        let delta = MeasureSpec::point_mass(0.0, 1.0);
        assert!((cauchy_transform(&delta, z).unwrap() - 1.0 / z).norm() < 1e-15);
        assert!((cauchy_derivative(&delta, z, 1).unwrap() + 1.0 / (z * z)).norm() < 1e-15);

        let uniform = MeasureSpec::uniform(0.0, 1.0).unwrap();
        let want = z.ln() - (z - 1.0).ln() + 0.5 * 2f64.ln();
        assert!((cauchy_transform(&uniform, z).unwrap() - want).norm() < 1e-14);

        let zero = MeasureSpec::zero();
        assert_eq!(cauchy_transform(&zero, z).unwrap(), c(0.0, 0.0));
        assert_eq!(cauchy_derivative(&zero, z, 3).unwrap(), c(0.0, 0.0));
        assert!(cauchy_transform(&zero, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn second_derivative_matches_scalar_remainder() {
        // η₂ = 1 − t on (0, 1) for H₀ = 0, V = 1
        let eta = PiecewisePolynomial::new(vec![0.0, 1.0], vec![vec![1.0, -1.0]], 0.0, 0.0).unwrap();
        let m = MeasureSpec::absolutely_continuous(eta).unwrap();
        let z = c(0.0, 2.0);
        // ∫₀¹ 2(1−t)/(z−t)³ dt = 1/(z−1) − 1/z − 1/z²
        let want = 1.0 / (z - 1.0) - 1.0 / z - 1.0 / (z * z);
        assert!((cauchy_derivative(&m, z, 2).unwrap() - want).norm() < 1e-14);
        let pert = Perturbation::new(HermitianOperator::scalar(0.0), HermitianOperator::scalar(1.0)).unwrap();
        let r = remainder_trace(&pert, &FunctionSpec::resolvent(z).unwrap(), 2).unwrap();
        assert!((r - want).norm() < 1e-14);
    }

    #[test]
    fn inversion_examples() {
        let uniform = MeasureSpec::uniform(0.0, 1.0).unwrap();
        let g = |z| cauchy_transform(&uniform, z);
        let eps = [1e-2, 5e-3, 2.5e-3];
        let inside = stieltjes_invert(g, 0.5, &eps).unwrap();
        assert!((inside.value - 1.0).abs() < 1e-2);
        assert!(inside.converged);
        let outside = stieltjes_invert(g, -5.0, &eps).unwrap();
        assert!(outside.value.abs() < 1e-3);

        let delta = MeasureSpec::point_mass(0.0, 1.0);
        let atom = stieltjes_invert(|z| cauchy_transform(&delta, z), 0.0, &eps).unwrap();
        assert!(!atom.converged);
        assert!((atom.value - 1.0 / (std::f64::consts::PI * 2.5e-3)).abs() < 1e-9);
    }

    #[test]
    fn parts_identity() {
        let delta = MeasureSpec::point_mass(0.0, 1.0);
        assert!(integration_by_parts_check(&delta, c(0.0, 1.0)).unwrap().residual < 1e-12);
        let uniform = MeasureSpec::uniform(0.0, 1.0).unwrap();
        assert!(integration_by_parts_check(&uniform, c(0.0, 2.0)).unwrap().residual < 1e-10);
        let zero = integration_by_parts_check(&MeasureSpec::zero(), c(0.0, 1.0)).unwrap();
        assert_eq!((zero.lhs, zero.rhs), (c(0.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn log_transform_examples() {
        let nodes = NodeMultiset::new(&[0.0, 1.0]).unwrap();
        let z = c(0.3, 0.8);
        // ∫₀¹ log(z−t) dt = z log z − (z−1) log(z−1) − 1
        let want = z * z.ln() - (z - 1.0) * (z - 1.0).ln() - 1.0;
        assert!((log_transform(&nodes, z).unwrap() - want).norm() < 1e-14);
        assert!(log_transform(&nodes, c(0.0, 1.0)).unwrap().im > 0.0);
        let b = log_transform_boundary(&nodes, 0.5, &[1e-3, 5e-4, 2.5e-4]).unwrap();
        assert!((b.extrapolated - 0.5).abs() < 1e-9);
        assert!(log_transform(&nodes, c(0.0, -1.0)).is_err());
        assert!(log_transform(&NodeMultiset::new(&[1.0, 1.0]).unwrap(), z).is_err());
    }

    #[test]
    fn herglotz_and_growth() {
        let m = MeasureSpec { atoms: vec![(0.5, 2.0)], density: MeasureSpec::uniform(-1.0, 1.0).unwrap().density };
        let zs: Vec<Complex64> = [-3.0, 0.0, 0.5, 2.0].iter().flat_map(|&x| [0.1, 1.0, 10.0].map(|y| c(x, y))).collect();
        assert!(herglotz_margin(&m, &zs).unwrap() > 0.0);
        assert!(growth_ratio(&m, 1e4).unwrap() < growth_ratio(&m, 1e3).unwrap());
        // G(iy)·iy → −mass, plus the regularizer as the constant term
        let y = 1e6;
        let z = c(0.0, y);
        let g = cauchy_transform(&m, z).unwrap();
        assert!(((g - m.regularizer()) * z - m.total_mass().unwrap()).norm() < 1e-5);
    }

    #[test]
    fn transform_space_recursion() {
        let h0 = HermitianOperator::from_real(&[vec![0.2, 0.4], vec![0.4, -0.6]]).unwrap();
        let v = HermitianOperator::from_real(&[vec![0.3, -0.2], vec![-0.2, 0.5]]).unwrap();
        let pert = Perturbation::new(h0, v).unwrap();
        let z = c(2.0, 1.0);
        let f = FunctionSpec::resolvent(z).unwrap();
        for (i, s) in ssf_sequence(&pert, 4).unwrap().into_iter().enumerate() {
            let p = i + 1;
            let m = MeasureSpec::absolutely_continuous(s.density).unwrap();
            let lhs = remainder_trace(&pert, &f, p).unwrap() * if p % 2 == 0 { 1.0 } else { -1.0 };
            let rhs = cauchy_derivative(&m, z, p as u32).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm(), "p={p}");
            let a = resolvent_power_trace(&pert, z, p).unwrap();
            let b = resolvent_power_trace_multilinear(&pert, z, p).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm());
            let da = resolvent_power_trace_derivative(&pert, z, p).unwrap();
            let db = resolvent_power_trace_multilinear_derivative(&pert, z, p).unwrap();
            assert!((da - db).norm() <= 1e-12 * da.norm());
        }
    }
}
