//! Divided differences with repeated nodes, basic splines and cumulative kernels.

use num_complex::Complex64;
use spectral_shift::divdiff::{
    basic_spline, divided_difference, divided_difference_resolvent, spline_to_piecewise, FunctionSpec, NodeMultiset,
    SplineKind,
};

fn main() -> spectral_shift::Result<()> {
    // Δ[x³] over four nodes is the leading coefficient, 1
    let nodes = NodeMultiset::new(&[0.0, 0.5, 1.5, 2.0])?;
    println!("Δ x^3 = {}", divided_difference(&FunctionSpec::monomial(3), &nodes)?);

    // a node repeated three times gives f''/2
    let triple = NodeMultiset::new(&[0.3, 0.3, 0.3])?;
    let e = FunctionSpec::exponential(2.0);
    let want = e.derivative_at(2, 0.3)? / 2.0;
    println!("Δ e^(2ix) at (0.3,0.3,0.3) = {:.12}, f''/2 = {want:.12}", divided_difference(&e, &triple)?);

    let z = Complex64::new(0.2, 0.7);
    let mixed = NodeMultiset::new(&[-1.0, 0.0, 0.0, 1.0])?;
    println!(
        "resolvent: recursion {:.14}, closed form {:.14}",
        divided_difference(&FunctionSpec::resolvent(z)?, &mixed)?,
        divided_difference_resolvent(z, 1, &mixed)?
    );

    let knots = NodeMultiset::new(&[0.0, 1.0, 1.0, 3.0])?;
    let b = spline_to_piecewise(&knots, SplineKind::Basic)?;
    println!("basic spline degree {}, breakpoints {:?}, integral {:.15}", b.degree(), b.breakpoints(), b.integral()?);
    for t in [0.5, 1.0, 2.0] {
        println!("  B({t}) = {:.6} (pointwise {:.6})", b.evaluate(t), basic_spline(&knots, t)?);
    }

    let k = spline_to_piecewise(&knots, SplineKind::Cumulative)?;
    let ts: Vec<f64> = (0..=6).map(|i| -0.5 + 0.6 * i as f64).collect();
    println!("cumulative kernel from {} to {}:", k.left_tail(), k.right_tail());
    for (t, v) in ts.iter().zip(k.sample(&ts)) {
        println!("  K({t:.1}) = {v:.6}");
    }
    Ok(())
}
