//! Oracles computed without the library: quadrature, splines by the
//! Curry–Schoenberg recursion, and resolvent expansions by direct inversion.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

pub type M = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// `∫_a^b g` by 20-point Gauss–Legendre on `cells` equal cells.
pub fn integrate<F: Fn(f64) -> Complex64>(g: F, a: f64, b: f64, cells: usize) -> Complex64 {
    let (x, w) = gauss_legendre(20);
    let h = (b - a) / cells as f64;
    let mut acc = c(0.0, 0.0);
    for k in 0..cells {
        let lo = a + k as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            acc += g(lo + 0.5 * h * (xi + 1.0)) * (0.5 * h * wi);
        }
    }
    acc
}

/// Normalized B-spline (`∫ M = 1`) on sorted knots, by the Curry–Schoenberg
/// recursion; right-continuous, 0 at the last knot.
pub fn m_spline(knots: &[f64], t: f64) -> f64 {
    let n = knots.len();
    // order-1 pieces
    let mut m: Vec<f64> = (0..n - 1)
        .map(|i| {
            let h = knots[i + 1] - knots[i];
            if h > 0.0 && knots[i] <= t && t < knots[i + 1] { 1.0 / h } else { 0.0 }
        })
        .collect();
    for k in 2..n {
        m = (0..n - k)
            .map(|i| {
                let span = knots[i + k] - knots[i];
                if span <= 0.0 {
                    return 0.0;
                }
                k as f64 * ((t - knots[i]) * m[i] + (knots[i + k] - t) * m[i + 1]) / ((k - 1) as f64 * span)
            })
            .collect();
    }
    m[0]
}

/// `∫_t^∞ M` over the sorted knots, by quadrature between knots.
pub fn m_spline_tail(knots: &[f64], t: f64) -> f64 {
    let mut points: Vec<f64> = knots.iter().copied().filter(|&k| k > t).collect();
    points.insert(0, t.max(knots[0]));
    points.dedup();
    points
        .windows(2)
        .map(|w| integrate(|s| c(m_spline(knots, s), 0.0), w[0], w[1], 4).re)
        .sum()
}

pub fn hermitian_eigen(m: &M) -> (Vec<f64>, M) {
    let e = m.clone().symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

pub fn resolvent(h: &M, z: Complex64) -> M {
    let n = h.nrows();
    (M::identity(n, n) * z - h).try_inverse().expect("z is off the spectrum")
}

pub fn mat_trace(m: &M) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn trace_power(v: &M, p: usize) -> f64 {
    let mut acc = M::identity(v.nrows(), v.nrows());
    for _ in 0..p {
        acc = &acc * v;
    }
    mat_trace(&acc).re
}

/// `trace f(H)` with `f = (z − x)^{-k}` from the eigenvalues.
pub fn trace_resolvent_power(eigenvalues: &[f64], z: Complex64, k: u32) -> Complex64 {
    eigenvalues.iter().map(|&l| (z - l).powi(-(k as i32))).sum()
}

/// Node multisets of sizes `sizes`, uniform in [−2, 2], a forced repeat in
/// 30% of them; at least two distinct nodes, sorted.
pub fn node_multisets<R: Rng>(rng: &mut R, count: usize, sizes: std::ops::RangeInclusive<usize>) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| loop {
            let n = rng.gen_range(sizes.clone());
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            if rng.gen_bool(0.3) {
                let reps = rng.gen_range(1..n);
                for i in 1..=reps {
                    x[i] = x[0];
                }
            }
            x.sort_by(f64::total_cmp);
            if x[0] < x[n - 1] {
                break x;
            }
        })
        .collect()
}
