use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{write_json, JobConfig};
use crate::cauchy::{
    cauchy_derivative, cauchy_transform, growth_ratio, herglotz_margin, integration_by_parts_check, log_transform_boundary,
    poisson_error_constant, resolvent_power_trace, resolvent_power_trace_derivative, resolvent_power_trace_multilinear,
    resolvent_power_trace_multilinear_derivative, stieltjes_invert, MeasureSpec,
};
use crate::divdiff::{
    cumulative_spline_kernel, divided_difference, divided_difference_resolvent, factorial, spline_to_piecewise, FunctionSpec,
    NodeMultiset, PiecewisePolynomial, SplineKind,
};
use crate::ensemble::{random_pairs, rng, wide_spectrum_pairs, Pair};
use crate::error::{Error, Result};
use crate::operator::{resolvent, trace};
use crate::perturbation::Perturbation;
use crate::remainder::{gateaux_trace, FdOracle, remainder_operator, remainder_trace};
use crate::ssf::{asymptotics_report, ssf_sequence, trace_formula_rhs, SsfDensity};

/// Relaxed tolerance floor for `--wide-spectrum` runs.
pub const WIDE_SPECTRUM_TOLERANCE: f64 = 1e-6;

/// Node sets per run for the spline and log-transform families.
const NODE_SETS: usize = 200;

struct Family {
    name: &'static str,
    anchor: &'static str,
    tolerance: f64,
}

const FAMILIES: &[Family] = &[
    Family { name: "asymptotics", anchor: "eta_p -> 0 as t -> -inf; right limit trace(V^{p-1})/(p-1)! - nu_{p-1}(R)", tolerance: 1e-10 },
    Family { name: "degree_structure", anchor: "eta_p piecewise polynomial of degree <= p-1 with breakpoints in spec(H0) u spec(H0+V)", tolerance: 0.0 },
    Family { name: "divdiff_resolvent_closed_form", anchor: "divided differences of (z-x)^{-k}: closed form vs recursion", tolerance: 1e-12 },
    Family { name: "divdiff_symmetry", anchor: "divided differences are symmetric in their nodes", tolerance: 1e-10 },
    Family { name: "fd_gateaux", anchor: "(1/j!) d^j/dt^j trace f(H0+tV) at 0: multilinear vs finite differences", tolerance: 1e-6 },
    Family { name: "fd_remainder", anchor: "trace R_p(f): multilinear vs finite differences", tolerance: 1e-6 },
    Family { name: "growth_normalization", anchor: "|G(iy)/(iy)| <= (|reg| + |nu|/y)/y, decreasing in y", tolerance: 1.0 },
    Family { name: "herglotz", anchor: "-G is Herglotz for a positive measure", tolerance: 0.0 },
    Family { name: "integration_by_parts", anchor: "G(z) - int t/(t^2+1) dnu = d/dz int (1/(z-t) + t/(t^2+1)) nu((-inf,t)) dt", tolerance: 1e-10 },
    Family { name: "koplienko_trace_formula", anchor: "trace R_2(f) = int f'' eta_2", tolerance: 1e-7 },
    Family { name: "krein_trace_formula", anchor: "trace [f(H0+V) - f(H0)] = int f' xi", tolerance: 1e-7 },
    Family { name: "log_transform_boundary", anchor: "(1/pi) Im J(t+i0) = cumulative kernel / (p-1)", tolerance: 1e-6 },
    Family { name: "mass_identity", anchor: "nu_p(R) = trace(V^p)/p!", tolerance: 1e-9 },
    Family { name: "method_agreement", anchor: "trace R_p(f): full operator vs multilinear measure", tolerance: 1e-9 },
    Family { name: "remainder_linearity", anchor: "R_p is linear in f", tolerance: 1e-11 },
    Family { name: "remainder_recursion", anchor: "R_{p+1}(f_z) = R_p(f_z) - ((z-H0)^{-1}V)^p (z-H0)^{-1}", tolerance: 1e-11 },
    Family { name: "resolvent_power_identity", anchor: "trace ((z-H0)^{-1}V)^p = int Delta^{(p-1)} f_z dm_p, and its z-derivative", tolerance: 1e-10 },
    Family { name: "spline_cumulative_identity", anchor: "cumulative kernel = (p-1) int_t^inf basic spline", tolerance: 1e-10 },
    Family { name: "spline_integral", anchor: "basic spline integrates to 1/p", tolerance: 1e-10 },
    Family { name: "spline_shape", anchor: "basic spline >= 0 with support in the node hull; cumulative kernel decreases from 1 to 0", tolerance: 1e-12 },
    Family { name: "stieltjes_halving", anchor: "halving eps halves the inversion error within a factor 3", tolerance: 1.0986122886681098 },
    Family { name: "stieltjes_inversion", anchor: "-(1/pi) Im G(t+i eps) -> density, error <= C eps", tolerance: 1.0 },
    Family { name: "trace_formula", anchor: "trace R_p(f) = int f^{(p)} eta_p", tolerance: 1e-7 },
    Family { name: "transform_recursion", anchor: "(-1)^p trace R_p(f_z) = G^{(p)}_{nu_p}(z), and the order p+1 line", tolerance: 1e-8 },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub family: String,
    pub anchor: String,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub total: usize,
    pub passed: usize,
    pub worst_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub families: BTreeMap<String, FamilySummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub source: String,
    pub seed: u64,
    pub orders: Vec<usize>,
    pub pairs: usize,
    pub summary: Summary,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

/// One comparison; it passes when `error ≤ tolerance·scale`.
#[derive(Debug, Clone, Copy)]
struct Sample {
    lhs: Complex64,
    rhs: Complex64,
    error: f64,
    scale: f64,
}

impl Sample {
    fn relative(lhs: Complex64, rhs: Complex64) -> Self {
        let scale = if rhs.norm() > 0.0 { rhs.norm() } else { 1.0 };
        Sample { lhs, rhs, error: (lhs - rhs).norm(), scale }
    }

    fn scaled(lhs: Complex64, rhs: Complex64, scale: f64) -> Self {
        Sample { lhs, rhs, error: (lhs - rhs).norm(), scale }
    }

    fn real(lhs: f64, rhs: f64, scale: f64) -> Self {
        Self::scaled(Complex64::new(lhs, 0.0), Complex64::new(rhs, 0.0), scale)
    }

    fn rel(&self) -> f64 {
        self.error / self.scale
    }
}

type Samples = BTreeMap<&'static str, Vec<Sample>>;

fn push(samples: &mut Samples, family: &'static str, s: Sample) {
    samples.entry(family).or_default().push(s);
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const POINTS: [(f64, f64); 3] = [(0.0, 1.0), (2.0, 1.0), (-3.0, 0.5)];

fn test_functions() -> Result<Vec<(Complex64, FunctionSpec)>> {
    let mut out = Vec::new();
    for (re, im) in POINTS {
        let z = c(re, im);
        for k in 1..=3 {
            out.push((z, FunctionSpec::resolvent_power(z, k)?));
        }
    }
    Ok(out)
}

/// Every per-pair family on one pair.
fn check_pair(pair: &Pair, orders: &[usize], timings: &mut BTreeMap<&'static str, f64>) -> Result<Samples> {
    let mut samples = Samples::new();
    let pert = Perturbation::new(pair.h0.clone(), pair.v.clone())?;
    let p_max = *orders.last().expect("orders nonempty");
    let mut clock = Instant::now();
    let mut lap = |timings: &mut BTreeMap<&'static str, f64>, family: &'static str| {
        *timings.entry(family).or_default() += clock.elapsed().as_secs_f64();
        clock = Instant::now();
    };
    let seq = ssf_sequence(&pert, p_max + 1)?;
    lap(timings, "ssf_sequence");
    let fs = test_functions()?;
    let vnorm = pert.v().spectral_norm();
    let mut oracles = fs.iter().map(|(_, f)| FdOracle::new(pert.h0(), pert.v(), f)).collect::<Result<Vec<_>>>()?;

    for &p in orders {
        let eta = &seq[p - 1];
        for (_, f) in &fs {
            let lhs = remainder_trace(&pert, f, p)?;
            let rhs = trace_formula_rhs(eta, f)?;
            let s = Sample::scaled(lhs, rhs, lhs.norm() + 1e-12);
            push(&mut samples, "trace_formula", s);
            match p {
                1 => push(&mut samples, "krein_trace_formula", s),
                2 => push(&mut samples, "koplienko_trace_formula", s),
                _ => {}
            }
        }
        lap(timings, "trace_formula");

        let target = pert.v().trace_power(p as u32) / factorial(p);
        let floor = 1e-14 * vnorm.powi(p as i32) / factorial(p);
        push(&mut samples, "mass_identity", Sample::real(eta.mass, target, target.abs().max(floor).max(f64::MIN_POSITIVE)));

        let report = asymptotics_report(eta);
        let worst = report.left_limit.abs().max(report.right_limit.abs()).max(report.tail_residual.abs());
        push(&mut samples, "asymptotics", Sample::real(worst, 0.0, 1.0_f64.max(eta.density.sup_bound())));
        push(&mut samples, "degree_structure", Sample::real(structure_violations(&pert, eta) as f64, 0.0, 1.0));
        lap(timings, "mass_identity");

        if p <= 4 {
            for ((_, f), oracle) in fs.iter().zip(&mut oracles) {
                let multi = remainder_trace(&pert, f, p)?;
                let spectral = trace(&remainder_operator(&pert, f, p)?);
                push(&mut samples, "method_agreement", Sample::relative(spectral, multi));
                let fd = oracle.remainder(p)?;
                push(&mut samples, "fd_remainder", Sample::relative(fd, multi));
                let g = gateaux_trace(&pert, f, p)?;
                let (gfd, _) = oracle.gateaux(p)?;
                push(&mut samples, "fd_gateaux", Sample::relative(gfd, g));
            }
            lap(timings, "fd_remainder");

            for (re, im) in POINTS.iter().take(2) {
                let z = c(*re, *im);
                let fz = FunctionSpec::resolvent(z)?;
                let r = resolvent(pert.initial(), z, 1)?;
                let rv = &r * pert.v().matrix();
                let mut term = r.clone();
                for _ in 0..p {
                    term = &rv * &term;
                }
                let rp = remainder_operator(&pert, &fz, p)?;
                let rp1 = remainder_operator(&pert, &fz, p + 1)?;
                let residual = (&rp1 - (&rp - &term)).norm();
                let scale = rp.norm() + term.norm();
                push(&mut samples, "remainder_recursion", Sample::real(residual, 0.0, scale.max(f64::MIN_POSITIVE)));

                let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                let m = MeasureSpec::absolutely_continuous(eta.density.clone())?;
                let lhs = sign * remainder_trace(&pert, &fz, p)?;
                let rhs = cauchy_derivative(&m, z, p as u32)?;
                push(&mut samples, "transform_recursion", Sample::relative(lhs, rhs));
                let lhs = -sign * remainder_trace(&pert, &fz, p + 1)?;
                let rhs = -cauchy_derivative(&m, z, p as u32)? - sign / p as f64 * resolvent_power_trace_derivative(&pert, z, p)?;
                push(&mut samples, "transform_recursion", Sample::relative(lhs, rhs));

                let a = resolvent_power_trace(&pert, z, p)?;
                let b = resolvent_power_trace_multilinear(&pert, z, p)?;
                push(&mut samples, "resolvent_power_identity", Sample::relative(b, a));
                let a = resolvent_power_trace_derivative(&pert, z, p)?;
                let b = resolvent_power_trace_multilinear_derivative(&pert, z, p)?;
                push(&mut samples, "resolvent_power_identity", Sample::relative(b, a));

                let parts = integration_by_parts_check(&m, z)?;
                push(&mut samples, "integration_by_parts", Sample::scaled(parts.lhs, parts.rhs, parts.rhs.norm().max(1e-300)));

                let fz2 = FunctionSpec::resolvent_power(z, 2)?;
                let fsum = FunctionSpec::combination(vec![(c(1.0, 0.0), fz.clone()), (c(0.5, -1.0), fz2.clone())]);
                let lhs = remainder_trace(&pert, &fsum, p)?;
                let rhs = remainder_trace(&pert, &fz, p)? + c(0.5, -1.0) * remainder_trace(&pert, &fz2, p)?;
                push(&mut samples, "remainder_linearity", Sample::relative(lhs, rhs));
            }
            lap(timings, "transform_recursion");
        }

        stieltjes_samples(eta, &mut samples)?;
        lap(timings, "stieltjes_inversion");
    }

    // the spectral measure of H₀ is positive
    let spectral = MeasureSpec {
        atoms: pert.initial().eigenvalues().iter().zip(pert.initial().multiplicities()).map(|(&l, &m)| (l, m as f64)).collect(),
        density: None,
    };
    let zs: Vec<Complex64> = [-3.0, -0.5, 0.0, 0.7, 2.5].iter().flat_map(|&x| [1e-3, 0.1, 1.0, 10.0].map(|y| c(x, y))).collect();
    let margin = herglotz_margin(&spectral, &zs)?;
    push(&mut samples, "herglotz", Sample::real(if margin > 0.0 { 0.0 } else { 1.0 - margin }, 0.0, 1.0));
    for m in [&spectral, &MeasureSpec::absolutely_continuous(seq[0].density.clone())?] {
        let (r3, r4) = (growth_ratio(m, 1e3)?, growth_ratio(m, 1e4)?);
        let y = 1e4;
        let bound = (m.regularizer().abs() + m.variation_bound() / y) / y;
        push(&mut samples, "growth_normalization", Sample::real(r4, 0.0, bound * (1.0 + 1e-12)));
        let monotone = if r4 < r3 || r3 == 0.0 { 0.0 } else { 1.0 };
        push(&mut samples, "growth_normalization", Sample::real(monotone, 0.0, 0.5));
    }
    lap(timings, "herglotz");
    Ok(samples)
}

/// Breakpoints outside `spec(H₀) ∪ spec(H₀+V)` plus a degree above `p − 1`.
fn structure_violations(pert: &Perturbation, eta: &SsfDensity) -> usize {
    let spectra: Vec<f64> = pert.initial().eigenvalues().iter().chain(pert.perturbed().eigenvalues()).copied().collect();
    let tol = crate::divdiff::default_merge_tol(&spectra);
    let stray = eta.density.breakpoints().iter().filter(|b| !spectra.iter().any(|s| (*b - s).abs() <= tol)).count();
    stray + usize::from(eta.density.degree() >= eta.order)
}

const INVERSION_EPS: f64 = 1e-3;
/// Fraction of the first-order bound `C·ε` the error must reach to enter the halving check.
const HALVING_SIGNIFICANCE: f64 = 0.05;

/// Inversion at interval midpoints at least `10ε` from every breakpoint.
fn stieltjes_samples(eta: &SsfDensity, samples: &mut Samples) -> Result<()> {
    let d = &eta.density;
    let m = MeasureSpec::absolutely_continuous(d.clone())?;
    let eps = [INVERSION_EPS, INVERSION_EPS / 2.0, INVERSION_EPS / 4.0];
    for w in d.breakpoints().windows(2) {
        if w[1] - w[0] < 20.0 * INVERSION_EPS {
            continue;
        }
        let t = 0.5 * (w[0] + w[1]);
        let exact = d.evaluate(t);
        let inv = stieltjes_invert(|z| cauchy_transform(&m, z), t, &eps)?;
        let bound = poisson_error_constant(d, t).expect("midpoint is not a breakpoint");
        for (e, est) in eps.iter().zip(&inv.estimates) {
            push(samples, "stieltjes_inversion", Sample::real(*est, exact, (bound * e).max(1e-13)));
        }
        let errors: Vec<f64> = inv.estimates.iter().map(|x| (x - exact).abs()).collect();
        for (pair, e) in errors.windows(2).zip(eps) {
            // halving only shows once the first-order term dominates, well above roundoff
            if pair[0] > 1e-11 * (1.0 + d.sup_bound()) && pair[0] >= HALVING_SIGNIFICANCE * bound * e {
                let ratio = pair[1] / pair[0];
                let s = Sample { lhs: c(ratio, 0.0), rhs: c(0.5, 0.0), error: (ratio / 0.5).ln().abs(), scale: 1.0 };
                push(samples, "stieltjes_halving", s);
            }
        }
    }
    Ok(())
}

/// Random node multisets of sizes 2–7, with forced repeats in 30% of them.
pub fn random_node_sets(seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut r = rng(seed ^ 0x5eed_5eed);
    (0..count)
        .map(|_| {
            let n = r.gen_range(2..=7);
            let mut nodes: Vec<f64> = (0..n).map(|_| r.gen_range(-2.0..2.0)).collect();
            if r.gen_bool(0.3) {
                let reps = r.gen_range(1..n);
                for i in 0..reps {
                    nodes[i + 1] = nodes[0];
                }
                if nodes.iter().all(|x| *x == nodes[0]) {
                    nodes[n - 1] = nodes[0] + 1.0;
                }
            }
            nodes
        })
        .collect()
}

const BOUNDARY_POINTS: usize = 20;
const BOUNDARY_EPS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];
/// Closer than this the `ε³/δ²` term left after extrapolation exceeds `1e-6`.
const BOUNDARY_MIN_DISTANCE: f64 = 3e-2;

/// `count` points spread over the gaps of `distinct`, each gap receiving a share
/// proportional to its length (largest remainder) at the centres of equal cells.
pub fn gap_points(distinct: &[f64], count: usize) -> Vec<f64> {
    let (Some(lo), Some(hi)) = (distinct.first(), distinct.last()) else { return Vec::new() };
    let width = hi - lo;
    if width <= 0.0 {
        return Vec::new();
    }
    let quotas: Vec<f64> = distinct.windows(2).map(|w| count as f64 * (w[1] - w[0]) / width).collect();
    let mut shares: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b)));
    let missing = count - shares.iter().sum::<usize>();
    for &g in order.iter().take(missing) {
        shares[g] += 1;
    }
    distinct
        .windows(2)
        .zip(shares)
        .flat_map(|(w, m)| (0..m).map(move |k| w[0] + (w[1] - w[0]) * (k as f64 + 0.5) / m as f64))
        .collect()
}

fn check_node_sets(seed: u64) -> Result<Samples> {
    let mut samples = Samples::new();
    let mut r = rng(seed ^ 0xd1ff);
    for nodes in random_node_sets(seed, NODE_SETS) {
        let set = NodeMultiset::new(&nodes)?;
        let n = set.len();
        let p = (n - 1) as f64;
        let basic = spline_to_piecewise(&set, SplineKind::Basic)?;
        push(&mut samples, "spline_integral", Sample::real(basic.integral()?, 1.0 / p, 1.0 / p));

        let (lo, hi) = (set.min(), set.max());
        let ts: Vec<f64> = (0..41).map(|i| lo - 0.5 + (hi - lo + 1.0) * i as f64 / 40.0).collect();
        let scale = basic.sup_bound().max(1.0);
        let mut shape = 0.0_f64;
        for &t in &ts {
            let b = basic.evaluate(t);
            shape = shape.max(-b);
            if t < lo || t >= hi {
                shape = shape.max(b.abs());
            }
        }
        let cum = spline_to_piecewise(&set, SplineKind::Cumulative)?;
        let values = cum.sample(&ts);
        for w in values.windows(2) {
            shape = shape.max(w[1] - w[0]);
        }
        shape = shape.max((cum.left_tail() - 1.0).abs()).max(cum.right_tail().abs());
        push(&mut samples, "spline_shape", Sample::real(shape, 0.0, scale));

        // cum = p·∫_t^∞ basic = p·(mass − ∫_{−∞}^t basic); Σ|Δc_k|·h^k bounds the gap on each piece
        let anti = basic.antiderivative()?;
        let expected = PiecewisePolynomial::constant(p * anti.right_tail()).linear_combination(1.0, &anti, -p);
        let got = cum.refine(expected.breakpoints())?;
        let mut worst = (got.left_tail() - expected.left_tail()).abs();
        for ((a, b), w) in got.pieces().iter().zip(expected.pieces()).zip(expected.breakpoints().windows(2)) {
            let h = w[1] - w[0];
            let gap: f64 = (0..a.len().max(b.len()))
                .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs() * h.powi(i as i32))
                .sum();
            worst = worst.max(gap);
        }
        push(&mut samples, "spline_cumulative_identity", Sample::real(worst, 0.0, 1.0));

        let mut perm = nodes.clone();
        perm.reverse();
        perm.rotate_left(r.gen_range(0..n));
        let f = FunctionSpec::resolvent_power(c(r.gen_range(-1.0..1.0), 0.5 + r.gen_range(0.0..1.0)), 2)?;
        let a = divided_difference(&f, &set)?;
        let b = divided_difference(&f, &NodeMultiset::new(&perm)?)?;
        push(&mut samples, "divdiff_symmetry", Sample::relative(b, a));

        let spread = set.distinct().windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if set.max_multiplicity() == 1 && spread >= 1e-2 {
            let z = c(r.gen_range(-1.0..1.0), 0.5 + r.gen_range(0.0..1.0));
            let closed = divided_difference_resolvent(z, 1, &set)?;
            let recursive = divided_difference(&FunctionSpec::resolvent(z)?, &set)?;
            push(&mut samples, "divdiff_resolvent_closed_form", Sample::relative(recursive, closed));
        }

        if set.distinct().len() >= 2 {
            for t in gap_points(set.distinct(), BOUNDARY_POINTS) {
                if set.distinct().iter().any(|x| (x - t).abs() < BOUNDARY_MIN_DISTANCE) {
                    continue;
                }
                let b = log_transform_boundary(&set, t, &BOUNDARY_EPS)?;
                let want = cumulative_spline_kernel(&set, t) / p;
                push(&mut samples, "log_transform_boundary", Sample::real(b.extrapolated, want, 1.0));
            }
        }
    }
    Ok(samples)
}

fn family(name: &str) -> &'static Family {
    FAMILIES.iter().find(|f| f.name == name).expect("known family")
}

fn tolerance_for(name: &str, overrides: &BTreeMap<String, f64>, wide: bool) -> f64 {
    if let Some(t) = overrides.get(name) {
        return *t;
    }
    let t = family(name).tolerance;
    if wide && t > 0.0 && t < WIDE_SPECTRUM_TOLERANCE {
        WIDE_SPECTRUM_TOLERANCE
    } else {
        t
    }
}

fn record(name: String, family_name: &str, worst: &Sample, tolerance: f64) -> CheckRecord {
    let f = family(family_name);
    CheckRecord {
        name,
        family: f.name.to_string(),
        anchor: f.anchor.to_string(),
        lhs: worst.lhs,
        rhs: worst.rhs,
        abs_error: worst.error,
        rel_error: worst.rel(),
        tolerance,
        pass: worst.rel() <= tolerance,
    }
}

/// Runs the check suite and returns the report with per-family timings.
pub fn run_checks(
    pairs: &[Pair],
    orders: &[usize],
    seed: u64,
    overrides: &BTreeMap<String, f64>,
    wide: bool,
    source: String,
) -> Result<(VerificationReport, BTreeMap<String, f64>)> {
    if let Some(unknown) = overrides.keys().find(|k| !FAMILIES.iter().any(|f| f.name == *k)) {
        return Err(Error::Parse(format!("unknown check family {unknown:?} in --tol")));
    }
    let per_pair: Vec<(Samples, BTreeMap<&'static str, f64>)> = pairs
        .par_iter()
        .map(|pair| {
            let mut timings = BTreeMap::new();
            let s = check_pair(pair, orders, &mut timings)?;
            Ok((s, timings))
        })
        .collect::<Result<_>>()?;
    let start = Instant::now();
    let node_samples = check_node_sets(seed)?;
    let mut timings: BTreeMap<String, f64> = BTreeMap::new();
    timings.insert("node_sets".into(), start.elapsed().as_secs_f64());

    let mut checks = Vec::new();
    let mut add = |name: String, fam: &str, list: &[Sample]| {
        let tol = tolerance_for(fam, overrides, wide);
        let worst = list.iter().max_by(|a, b| (a.rel() - tol).total_cmp(&(b.rel() - tol))).expect("nonempty");
        checks.push(record(name, fam, worst, tol));
    };
    for (i, (samples, t)) in per_pair.iter().enumerate() {
        for (fam, list) in samples {
            add(format!("{fam}/pair_{i:03}"), fam, list);
        }
        for (k, v) in t {
            *timings.entry((*k).to_string()).or_default() += v;
        }
    }
    for (fam, list) in &node_samples {
        add(format!("{fam}/node_sets"), fam, list);
    }
    checks.sort_by(|a, b| a.name.cmp(&b.name));

    let mut families: BTreeMap<String, FamilySummary> = BTreeMap::new();
    for c in &checks {
        let s = families.entry(c.family.clone()).or_default();
        s.total += 1;
        s.passed += usize::from(c.pass);
        s.worst_rel_error = s.worst_rel_error.max(c.rel_error);
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    let summary = Summary { total: checks.len(), passed, failed: checks.len() - passed, families };
    let report = VerificationReport { source, seed, orders: orders.to_vec(), pairs: pairs.len(), summary, checks };
    Ok((report, timings))
}

/// Default ensemble size and dimension for `--wide-spectrum` without `--random`.
pub const DEFAULT_WIDE_ENSEMBLE: (usize, usize) = (20, 6);

/// Builds the pairs for a job: `--random`, `--wide-spectrum`, or `--h0/--v`.
pub fn job_pairs(config: &JobConfig) -> Result<(Vec<Pair>, String)> {
    if let Some(scale) = config.wide_spectrum {
        if !(scale > 0.0) {
            return Err(Error::Parse("--wide-spectrum needs a positive scale".into()));
        }
        let (count, dim) = config.random.unwrap_or(DEFAULT_WIDE_ENSEMBLE);
        return Ok((wide_spectrum_pairs(config.seed, count, dim..=dim, scale), format!("wide_spectrum {count}x{dim} scale {scale:e}")));
    }
    if let Some((count, dim)) = config.random {
        if count == 0 || dim == 0 {
            return Err(Error::Parse("--random needs positive COUNT and DIM".into()));
        }
        return Ok((random_pairs(config.seed, count, dim..=dim), format!("random {count}x{dim}")));
    }
    let (h0, v) = config.load_pair()?;
    Ok((vec![Pair { h0, v }], "files".to_string()))
}

/// Paths written by [`cmd_verify`].
#[derive(Debug, Clone)]
pub struct VerifyOutput {
    pub report: PathBuf,
    pub timings: PathBuf,
}

/// Writes `report.json` and `timings.json` into `config.out`.
pub fn cmd_verify(config: &JobConfig) -> Result<(VerificationReport, VerifyOutput)> {
    let (pairs, source) = job_pairs(config)?;
    let start = Instant::now();
    let (report, mut timings) = run_checks(&pairs, &config.orders, config.seed, &config.tolerances, config.wide_spectrum.is_some(), source)?;
    timings.insert("total".into(), start.elapsed().as_secs_f64());
    std::fs::create_dir_all(&config.out)?;
    let out = VerifyOutput { report: config.out.join("report.json"), timings: config.out.join("timings.json") };
    write_json(&out.report, &report)?;
    write_json(&out.timings, &timings)?;
    Ok((report, out))
}
