//! Discrete multilinear spectral measures and their kernel integrals.

use spectral_shift::divdiff::FunctionSpec;
use spectral_shift::multimeasure::{build_measure, integrate_divided_difference, kernel_integral_to_piecewise, NodePattern};
use spectral_shift::operator::{spectral_decompose_default, HermitianOperator};

fn main() -> spectral_shift::Result<()> {
    let h0 = HermitianOperator::from_diagonal(&[0.0, 1.0]);
    let v = HermitianOperator::from_real(&[vec![1.0, 2.0], vec![2.0, 3.0]])?;
    let d = spectral_decompose_default(&h0)?;

    let m = build_measure(&d, &v, 2)?;
    println!("order {} over eigenvalues {:?}", m.order(), m.eigenvalues());
    for (tuple, w) in m.atoms() {
        println!("  {tuple:?} -> {:.3}", w.re);
    }
    println!("total mass {} = trace V^2 = {}", m.total_mass().re, v.trace_power(2));
    println!("reversal residual {:e}", m.reversal_residual());

    let f = FunctionSpec::monomial(2);
    let plain = integrate_divided_difference(&m, &f, NodePattern::Plain)?;
    println!("∫ Δ[x^2] dm = {:.6}", plain.re);

    // jumps of −1 at 0 and −9 at 1 from the diagonal atoms
    let k = kernel_integral_to_piecewise(&m)?;
    println!("kernel integral: left {} right {}, breakpoints {:?}", k.left_tail(), k.right_tail(), k.breakpoints());
    for t in [-0.5, 0.25, 0.75, 1.5] {
        println!("  ∫ K(t) dm at {t} = {:.6}", k.evaluate(t));
    }
    Ok(())
}
