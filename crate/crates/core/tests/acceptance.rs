//! Acceptance criteria 1–13 at their pinned tolerances, one line each.
//!
//! Runs without the libtest harness so every line prints on success too.
//! `cargo test --test acceptance -- 4 11` runs a subset.

mod common;

use std::time::Instant;

use common::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_shift::cauchy::{
    cauchy_derivative, cauchy_transform, log_transform_boundary, poisson_error_constant, resolvent_power_trace_multilinear,
    resolvent_power_trace_multilinear_derivative, stieltjes_invert, MeasureSpec,
};
use spectral_shift::divdiff::{
    divided_difference, divided_difference_resolvent, spline_to_piecewise, FunctionSpec, NodeMultiset,
    PiecewisePolynomial, SplineKind,
};
use spectral_shift::ensemble::{random_pairs, wide_spectrum_pairs, Pair};
use spectral_shift::perturbation::Perturbation;
use spectral_shift::remainder::{gateaux_trace, remainder_operator, remainder_trace, FdOracle};
use spectral_shift::ssf::{krein_xi, ssf_sequence, trace_formula_rhs, SsfDensity};

/// Ensemble seed, fixed before any run.
const SEED: u64 = 20_160_815;
const PAIRS: usize = 50;
const ORDERS: usize = 5;
const POINTS: [(f64, f64); 3] = [(0.0, 1.0), (2.0, 1.0), (-3.0, 0.5)];

/// A measured quantity against its tolerance.
struct Check {
    name: &'static str,
    worst: f64,
    tol: f64,
}

impl Check {
    fn new(name: &'static str, tol: f64) -> Self {
        Check { name, worst: 0.0, tol }
    }

    fn see(&mut self, err: f64) {
        // NaN counts as a failure
        if !(err <= self.worst) {
            self.worst = if err.is_nan() { f64::INFINITY } else { err };
        }
    }

    fn pass(&self) -> bool {
        self.worst <= self.tol
    }
}

struct Outcome {
    checks: Vec<Check>,
    note: String,
}

impl Outcome {
    fn of(checks: Vec<Check>) -> Self {
        Outcome { checks, note: String::new() }
    }
}

struct Case {
    pert: Perturbation,
    etas: Vec<SsfDensity>,
}

fn functions() -> Vec<FunctionSpec> {
    POINTS
        .iter()
        .flat_map(|&(re, im)| (1..=3).map(move |k| FunctionSpec::resolvent_power(c(re, im), k).unwrap()))
        .collect()
}

fn cases(pairs: Vec<Pair>) -> Vec<Case> {
    pairs
        .into_iter()
        .map(|p| {
            let pert = Perturbation::new(p.h0, p.v).unwrap();
            let etas = ssf_sequence(&pert, ORDERS).unwrap();
            Case { pert, etas }
        })
        .collect()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// `|lhs − rhs| / (|lhs| + 1e-12)` for the trace formula.
fn trace_formula_errors(cases: &[Case], check: &mut Check) {
    let fs = functions();
    for case in cases {
        for eta in &case.etas {
            for f in &fs {
                let lhs = remainder_trace(&case.pert, f, eta.order).unwrap();
                let rhs = trace_formula_rhs(eta, f).unwrap();
                check.see((lhs - rhs).norm() / (lhs.norm() + 1e-12));
            }
        }
    }
}

fn mass_errors(cases: &[Case], check: &mut Check) {
    for case in cases {
        for eta in &case.etas {
            let target = trace_power(case.pert.v().matrix(), eta.order) / factorial(eta.order);
            check.see((eta.mass - target).abs() / target.abs());
        }
    }
}

fn criterion_1(tf: Check, elapsed: f64) -> Outcome {
    let mut time = Check::new("seconds", 60.0);
    time.see(elapsed);
    Outcome::of(vec![tf, time])
}

fn criterion_2(cases: &[Case]) -> Outcome {
    let mut mass = Check::new("mass rel", 1e-9);
    mass_errors(cases, &mut mass);
    Outcome::of(vec![mass])
}

/// Krein from counting functions alone, Koplienko against the first-order
/// expansion.
fn criterion_3(cases: &[Case]) -> Outcome {
    let mut krein = Check::new("krein rel", 1e-7);
    let mut xi_match = Check::new("xi vs counting", 0.0);
    let mut kop = Check::new("koplienko rel", 1e-7);
    let fs: Vec<(Complex64, u32)> = POINTS.iter().flat_map(|&(re, im)| (1..=3).map(move |k| (c(re, im), k))).collect();
    for case in cases {
        let (l0, u0) = hermitian_eigen(case.pert.h0().matrix());
        let h1 = case.pert.h0().matrix() + case.pert.v().matrix();
        let (l1, _) = hermitian_eigen(&h1);
        let mut grid: Vec<f64> = l0.iter().chain(&l1).copied().collect();
        grid.sort_by(f64::total_cmp);
        let count = |ls: &[f64], t: f64| ls.iter().filter(|&&l| l < t).count() as f64;

        let xi = krein_xi(&case.pert).unwrap();
        for w in grid.windows(2) {
            if w[1] - w[0] > 1e-9 {
                let t = 0.5 * (w[0] + w[1]);
                xi_match.see((xi.density.evaluate(t) - (count(&l0, t) - count(&l1, t))).abs());
            }
        }

        let vd = u0.adjoint() * case.pert.v().matrix() * &u0;
        for &(z, k) in &fs {
            let f = |x: f64| (z - x).powi(-(k as i32));
            let df = |x: f64| (z - x).powi(-(k as i32) - 1) * k as f64;
            // ∫ f′ξ = Σ ξ_j (f(b_j) − f(a_j)) on the counting intervals
            let integral: Complex64 = grid
                .windows(2)
                .map(|w| {
                    let mid = 0.5 * (w[0] + w[1]);
                    (count(&l0, mid) - count(&l1, mid)) * (f(w[1]) - f(w[0]))
                })
                .sum();
            let first = trace_resolvent_power(&l1, z, k) - trace_resolvent_power(&l0, z, k);
            let lib = remainder_trace(&case.pert, &FunctionSpec::resolvent_power(z, k).unwrap(), 1).unwrap();
            krein.see(rel(integral, first));
            krein.see(rel(lib, integral));

            let linear: Complex64 = l0.iter().enumerate().map(|(i, &l)| df(l) * vd[(i, i)]).sum();
            let second = first - linear;
            let rhs = trace_formula_rhs(&case.etas[1], &FunctionSpec::resolvent_power(z, k).unwrap()).unwrap();
            kop.see((second - rhs).norm() / (second.norm() + 1e-12));
        }
    }
    Outcome::of(vec![krein, xi_match, kop])
}

/// Coefficients of `(p−1)·∫_t^∞ B` on the pieces of `b`, with `p` nodes.
fn tail_integral_pieces(b: &PiecewisePolynomial, p: f64) -> Vec<Vec<f64>> {
    let widths: Vec<f64> = b.breakpoints().windows(2).map(|w| w[1] - w[0]).collect();
    let mut acc = 0.0;
    let mut starts = Vec::new();
    for (piece, h) in b.pieces().iter().zip(&widths) {
        starts.push(acc);
        acc += piece.iter().enumerate().map(|(i, a)| a * h.powi(i as i32 + 1) / (i + 1) as f64).sum::<f64>();
    }
    let total = acc;
    b.pieces()
        .iter()
        .zip(starts)
        .map(|(piece, s)| {
            let mut out = vec![(p - 1.0) * (total - s)];
            out.extend(piece.iter().enumerate().map(|(i, a)| -(p - 1.0) * a / (i + 1) as f64));
            out
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let mut nonneg = Check::new("nonnegativity", 1e-12);
    let mut support = Check::new("support", 0.0);
    let mut integral = Check::new("integral 1/p", 1e-10);
    let mut oracle = Check::new("vs Curry-Schoenberg", 1e-10);
    let mut monotone = Check::new("kernel monotone", 1e-12);
    let mut ends = Check::new("kernel ends", 0.0);
    let mut identity = Check::new("cumulative identity", 1e-10);
    let mut smooth = Check::new("smoothness class", 1e-8);
    for knots in node_multisets(&mut rng, 1000, 2..=7) {
        let n = knots.len();
        let (lo, hi) = (knots[0], knots[n - 1]);
        let set = NodeMultiset::new(&knots).unwrap();
        let b = spline_to_piecewise(&set, SplineKind::Basic).unwrap();
        let sup = b.sup_bound().max(1.0);

        let ts: Vec<f64> = (0..=80).map(|i| lo - 0.5 + (hi - lo + 1.0) * i as f64 / 80.0).collect();
        for &t in &ts {
            let v = b.evaluate(t);
            nonneg.see((-v).max(0.0) / sup);
            if t < lo || t >= hi {
                support.see(v.abs());
            }
            if knots.iter().all(|k| (k - t).abs() > 1e-6) {
                oracle.see((v - m_spline(&knots, t) / (n - 1) as f64).abs() / sup);
            }
        }
        support.see(b.left_tail().abs() + b.right_tail().abs());
        support.see(b.breakpoints().iter().map(|x| if *x < lo || *x > hi { 1.0 } else { 0.0 }).sum());

        let widths: Vec<f64> = b.breakpoints().windows(2).map(|w| w[1] - w[0]).collect();
        let exact: f64 = b
            .pieces()
            .iter()
            .zip(&widths)
            .map(|(piece, h)| piece.iter().enumerate().map(|(i, a)| a * h.powi(i as i32 + 1) / (i + 1) as f64).sum::<f64>())
            .sum();
        let p = (n - 1) as f64;
        integral.see((exact - 1.0 / p).abs() * p);

        let k = spline_to_piecewise(&set, SplineKind::Cumulative).unwrap();
        let values = k.sample(&ts);
        for w in values.windows(2) {
            monotone.see((w[1] - w[0]).max(0.0));
        }
        ends.see((k.left_tail() - 1.0).abs() + k.right_tail().abs() + k.evaluate(hi).abs() + (k.evaluate(lo - 1e-9) - 1.0).abs());

        // K = (n−1)·∫_t^∞ B on matching breakpoints
        assert_eq!(k.breakpoints(), b.breakpoints(), "kernel and spline share breakpoints");
        for ((got, want), h) in k.pieces().iter().zip(tail_integral_pieces(&b, n as f64)).zip(&widths) {
            for i in 0..got.len().max(want.len()) {
                let d = got.get(i).copied().unwrap_or(0.0) - want.get(i).copied().unwrap_or(0.0);
                identity.see(d.abs() * h.powi(i as i32));
            }
        }

        // derivatives of K up to order n−1−M are continuous at interior breakpoints
        let m = set.max_multiplicity();
        if m < n {
            let order = n - 1 - m;
            for (j, w) in k.pieces().windows(2).enumerate() {
                let h = widths[j];
                for r in 0..=order {
                    let left: f64 = w[0].iter().enumerate().skip(r).map(|(i, a)| a * falling(i, r) * h.powi((i - r) as i32)).sum();
                    let right = w[1].get(r).copied().unwrap_or(0.0) * factorial(r);
                    smooth.see((left - right).abs() / (1.0 + left.abs().max(right.abs())));
                }
            }
        }
    }
    Outcome::of(vec![nonneg, support, integral, oracle, monotone, ends, identity, smooth])
}

fn falling(i: usize, r: usize) -> f64 {
    (0..r).map(|k| (i - k) as f64).product()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let mut symmetry = Check::new("symmetry", 1e-10);
    let mut monic = Check::new("monic", 1e-12);
    let mut peano = Check::new("peano", 1e-8);
    let mut closed = Check::new("closed form", 1e-12);
    let mut confluent = Check::new("confluent O(delta)", 1.0);

    for knots in node_multisets(&mut rng, 200, 2..=6) {
        let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..1.5));
        let fs = [FunctionSpec::resolvent_power(z, 2).unwrap(), FunctionSpec::exponential(rng.gen_range(-3.0..3.0))];
        let set = NodeMultiset::new(&knots).unwrap();
        let mut perm = knots.clone();
        perm.reverse();
        perm.rotate_left(rng.gen_range(0..knots.len()));
        let permuted = NodeMultiset::new(&perm).unwrap();
        for f in &fs {
            symmetry.see(rel(divided_difference(f, &permuted).unwrap(), divided_difference(f, &set).unwrap()));
        }

        // x^n + lower terms over n+1 nodes
        let n = knots.len() - 1;
        let mut coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        coeffs.push(1.0);
        monic.see((divided_difference(&FunctionSpec::polynomial(&coeffs), &set).unwrap() - 1.0).norm());

        // Δ^{(p)} f = (1/(p−1)!) ∫ f^{(p)} B with p + 1 nodes
        let s = rng.gen_range(-3.0..3.0);
        let p = knots.len() - 1;
        let b = spline_to_piecewise(&set, SplineKind::Basic).unwrap();
        let dp = |t: f64| c(0.0, s).powi(p as i32) * c(0.0, s * t).exp();
        let quad: Complex64 = b
            .breakpoints()
            .windows(2)
            .map(|w| integrate(|t| dp(t) * b.evaluate(t), w[0], w[1], 8))
            .sum::<Complex64>()
            / factorial(p - 1);
        peano.see(rel(quad, divided_difference(&FunctionSpec::exponential(s), &set).unwrap()));

        let distinct = set.distinct();
        let gap = distinct.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if set.max_multiplicity() == 1 && gap >= 1e-2 {
            let product: Complex64 = knots.iter().map(|&x| 1.0 / (z - x)).product();
            let cf = divided_difference_resolvent(z, 1, &set).unwrap();
            closed.see(rel(cf, product));
            closed.see(rel(divided_difference(&FunctionSpec::resolvent(z).unwrap(), &set).unwrap(), cf));
        }
    }

    // Δ(f_z; x₀, …, x, x + δ) → Δ(f_z; x₀, …, x, x): err(δ)/δ settles to a constant
    for _ in 0..50 {
        let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..1.5));
        let f = FunctionSpec::resolvent(z).unwrap();
        let base: Vec<f64> = (0..rng.gen_range(1..4)).map(|_| rng.gen_range(-2.0..-0.5)).collect();
        let x = rng.gen_range(0.0..1.0);
        let mut limit_nodes = base.clone();
        limit_nodes.extend([x, x]);
        let limit = divided_difference(&f, &NodeMultiset::new(&limit_nodes).unwrap()).unwrap();
        let slope = |delta: f64| {
            let mut nodes = base.clone();
            nodes.extend([x, x + delta]);
            (divided_difference(&f, &NodeMultiset::new(&nodes).unwrap()).unwrap() - limit).norm() / delta
        };
        let (s3, s4) = (slope(1e-3), slope(1e-4));
        // first-order convergence: slopes agree to within their O(δ) drift
        confluent.see((s3 / s4 - 1.0).abs() / 0.05);
    }
    Outcome::of(vec![symmetry, monic, peano, closed, confluent])
}

fn small(cases: &[Case]) -> impl Iterator<Item = &Case> {
    cases.iter().filter(|c| c.pert.dim() <= 6)
}

fn criterion_6(cases: &[Case]) -> Outcome {
    let mut recursion = Check::new("recursion residual / scale", 1e-11);
    let mut expansion = Check::new("vs resolvent expansion", 1e-11);
    for case in small(cases) {
        let h0 = case.pert.h0().matrix();
        let v = case.pert.v().matrix();
        let h1 = h0 + v;
        for &(re, im) in &POINTS[..2] {
            let z = c(re, im);
            let f = FunctionSpec::resolvent(z).unwrap();
            let r0 = resolvent(h0, z);
            let r1 = resolvent(&h1, z);
            let rv = &r0 * v;
            // (R₀V)^j R₀ for j = 0, 1, …
            let mut terms = vec![r0.clone()];
            for j in 1..=5 {
                terms.push(&rv * &terms[j - 1]);
            }
            for p in 1..=4 {
                let rp = remainder_operator(&case.pert, &f, p).unwrap();
                let rp1 = remainder_operator(&case.pert, &f, p + 1).unwrap();
                let residual = (&rp1 - (&rp - &terms[p])).norm();
                recursion.see(residual / (rp.norm() + terms[p].norm()));

                let mut direct = r1.clone();
                for t in &terms[..p] {
                    direct -= t;
                }
                let scale: f64 = r1.norm() + terms[..p].iter().map(|t| t.norm()).sum::<f64>();
                expansion.see((&rp - &direct).norm() / scale);
            }
        }
    }
    Outcome::of(vec![recursion, expansion])
}

fn criterion_7(cases: &[Case]) -> Outcome {
    let mut first = Check::new("first line rel", 1e-8);
    let mut second = Check::new("second line rel", 1e-8);
    let mut quad = Check::new("G^(p) vs quadrature", 1e-8);
    for case in small(cases) {
        let h0 = case.pert.h0().matrix();
        let v = case.pert.v().matrix();
        for &(re, im) in &POINTS[..2] {
            let z = c(re, im);
            let f = FunctionSpec::resolvent(z).unwrap();
            let r0 = resolvent(h0, z);
            let rv = &r0 * v;
            for p in 1..=4 {
                let eta = &case.etas[p - 1];
                let m = MeasureSpec::absolutely_continuous(eta.density.clone()).unwrap();
                let g = cauchy_derivative(&m, z, p as u32).unwrap();
                let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                let rp = remainder_trace(&case.pert, &f, p).unwrap();
                first.see(rel(sign * rp, g));

                // d/dz trace (R₀V)^p = −p·trace(R₀² V (R₀V)^{p−1})
                let mut pow = M::identity(v.nrows(), v.nrows());
                for _ in 0..p - 1 {
                    pow = &rv * &pow;
                }
                let deriv = -(p as f64) * mat_trace(&(&r0 * &r0 * v * pow));
                let rp1 = remainder_trace(&case.pert, &f, p + 1).unwrap();
                second.see(rel(-sign * rp1, -g - sign / p as f64 * deriv));

                // G^{(p)}(z) = (−1)^p p! ∫ η(t) (z − t)^{−p−1} dt
                let d = &eta.density;
                let integral: Complex64 = d
                    .breakpoints()
                    .windows(2)
                    .map(|w| integrate(|t| d.evaluate(t) * (z - t).powi(-(p as i32) - 1), w[0], w[1], 8))
                    .sum();
                quad.see(rel(sign * factorial(p) * integral, g));
            }
        }
    }
    Outcome::of(vec![first, second, quad])
}

fn criterion_8(cases: &[Case]) -> Outcome {
    let mut value = Check::new("trace rel", 1e-10);
    let mut deriv = Check::new("z-derivative rel", 1e-10);
    for case in small(cases) {
        let h0 = case.pert.h0().matrix();
        let v = case.pert.v().matrix();
        for &(re, im) in &POINTS[..2] {
            let z = c(re, im);
            let r0 = resolvent(h0, z);
            let rv = &r0 * v;
            let mut pow = M::identity(v.nrows(), v.nrows());
            for p in 1..=4 {
                let prev = pow.clone();
                pow = &rv * &pow;
                let a = mat_trace(&pow);
                value.see(rel(resolvent_power_trace_multilinear(&case.pert, z, p).unwrap(), a));
                let d = -(p as f64) * mat_trace(&(&r0 * &r0 * v * prev));
                deriv.see(rel(resolvent_power_trace_multilinear_derivative(&case.pert, z, p).unwrap(), d));
            }
        }
    }
    Outcome::of(vec![value, deriv])
}

fn criterion_9() -> Outcome {
    const EPS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    let mut boundary = Check::new("extrapolated abs error", 1e-6);
    let mut sets = 0;
    for knots in node_multisets(&mut rng, 200, 2..=6) {
        let (lo, hi) = (knots[0], knots[knots.len() - 1]);
        if hi - lo < 0.5 {
            continue;
        }
        sets += 1;
        let set = NodeMultiset::new(&knots).unwrap();
        let p = (knots.len() - 1) as f64;
        let mut taken = 0;
        while taken < 20 {
            let t = rng.gen_range(lo..hi);
            // the ε³/δ² extrapolation remainder needs distance from the nodes
            if knots.iter().any(|k| (k - t).abs() < 3e-2) {
                continue;
            }
            taken += 1;
            let b = log_transform_boundary(&set, t, &EPS).unwrap();
            boundary.see((b.extrapolated - m_spline_tail(&knots, t) / p).abs());
        }
    }
    Outcome { checks: vec![boundary], note: format!("{sets} node sets") }
}

fn criterion_10(cases: &[Case]) -> Outcome {
    let eps = [1e-3, 5e-4, 2.5e-4];
    let mut error = Check::new("error / (C eps)", 1.0);
    let mut halving = Check::new("|ln(ratio / 0.5)|", 3f64.ln());
    let mut ratios = 0;
    for case in cases.iter().take(20) {
        for eta in &case.etas {
            let d = &eta.density;
            let m = MeasureSpec::absolutely_continuous(d.clone()).unwrap();
            for w in d.breakpoints().windows(2) {
                if w[1] - w[0] < 20.0 * eps[0] {
                    continue;
                }
                let t = 0.5 * (w[0] + w[1]);
                let exact = d.evaluate(t);
                let inv = stieltjes_invert(|z| cauchy_transform(&m, z), t, &eps).unwrap();
                let bound = poisson_error_constant(d, t).unwrap();
                let errs: Vec<f64> = inv.estimates.iter().map(|x| (x - exact).abs()).collect();
                for (err, e) in errs.iter().zip(eps) {
                    error.see(err / (bound * e).max(1e-13));
                }
                for (pair, e) in errs.windows(2).zip(eps) {
                    // only where the first-order term dominates roundoff
                    if pair[0] > 1e-11 * (1.0 + d.sup_bound()) && pair[0] >= 0.05 * bound * e {
                        ratios += 1;
                        halving.see((pair[1] / pair[0] / 0.5).ln().abs());
                    }
                }
            }
        }
    }
    Outcome { checks: vec![error, halving], note: format!("{ratios} halving ratios") }
}

fn criterion_11(cases: &[Case]) -> Outcome {
    let mut rem = Check::new("fd remainder rel", 1e-6);
    let mut gat = Check::new("fd gateaux rel", 1e-6);
    let fs = functions();
    for case in cases {
        for f in &fs {
            let mut oracle = FdOracle::new(case.pert.h0(), case.pert.v(), f).unwrap();
            for j in 1..=4 {
                let (g, _) = oracle.gateaux(j).unwrap();
                gat.see(rel(g, gateaux_trace(&case.pert, f, j).unwrap()));
                rem.see(rel(oracle.remainder(j).unwrap(), remainder_trace(&case.pert, f, j).unwrap()));
            }
        }
    }
    Outcome::of(vec![rem, gat])
}

fn criterion_12(wide: &[Case]) -> Outcome {
    let mut tf = Check::new("trace formula rel", 1e-6);
    trace_formula_errors(wide, &mut tf);
    let mut mass = Check::new("mass rel", 1e-6);
    mass_errors(wide, &mut mass);
    Outcome::of(vec![tf, mass])
}

fn criterion_13(cases: &[Case], wide: &[Case]) -> Outcome {
    let mut tails = Check::new("nonzero tails", 0.0);
    let mut residual = Check::new("tail residual", 1e-10);
    for case in cases.iter().chain(wide) {
        for eta in &case.etas {
            tails.see(eta.density.left_tail().abs() + eta.density.right_tail().abs());
        }
    }
    for case in cases {
        for eta in &case.etas {
            residual.see(eta.tail_residual.abs() / eta.density.sup_bound().max(1.0));
        }
    }
    Outcome::of(vec![tails, residual])
}

const TITLES: [&str; 13] = [
    "higher-order trace formula",
    "mass identity",
    "Krein and Koplienko",
    "spline suite",
    "divided differences",
    "remainder recursion",
    "transform-space recursion",
    "resolvent-power identity",
    "log-transform boundary values",
    "Stieltjes inversion",
    "oracle independence",
    "wide-spectrum robustness",
    "asymptotics",
];

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |k: usize| selected.is_empty() || selected.contains(&k);

    let start = Instant::now();
    let normal = cases(random_pairs(SEED, PAIRS, 2..=8));
    let mut tf = Some(Check::new("trace formula rel", 1e-7));
    trace_formula_errors(&normal, tf.as_mut().unwrap());
    let elapsed = start.elapsed().as_secs_f64();
    let needs_wide = want(12) || want(13);
    let wide = if needs_wide { cases(wide_spectrum_pairs(SEED, PAIRS, 2..=8, 1e4)) } else { Vec::new() };

    let mut failed = 0;
    for k in 1..=13 {
        if !want(k) {
            continue;
        }
        let t = Instant::now();
        let outcome = match k {
            1 => criterion_1(tf.take().unwrap(), elapsed),
            2 => criterion_2(&normal),
            3 => criterion_3(&normal),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => criterion_6(&normal),
            7 => criterion_7(&normal),
            8 => criterion_8(&normal),
            9 => criterion_9(),
            10 => criterion_10(&normal),
            11 => criterion_11(&normal),
            12 => criterion_12(&wide),
            _ => criterion_13(&normal, &wide),
        };
        let pass = outcome.checks.iter().all(Check::pass);
        failed += usize::from(!pass);
        let detail: Vec<String> = outcome.checks.iter().map(|c| format!("{} {:.2e} <= {:.0e}", c.name, c.worst, c.tol)).collect();
        let note = if outcome.note.is_empty() { String::new() } else { format!("; {}", outcome.note) };
        println!(
            "criterion {k:>2} {:<30} {}  ({}{note}; {:.1}s)",
            TITLES[k - 1],
            if pass { "PASS" } else { "FAIL" },
            detail.join(", "),
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
