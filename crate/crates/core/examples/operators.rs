//! Hermitian operators, spectral decompositions and the functional calculus.

use num_complex::Complex64;
use spectral_shift::divdiff::FunctionSpec;
use spectral_shift::operator::{
    apply_function, counting_function, resolvent, schatten_norm, spectral_decompose_default, trace, HermitianOperator,
};

fn main() -> spectral_shift::Result<()> {
    let h = HermitianOperator::from_real(&[vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]])?;
    let d = spectral_decompose_default(&h)?;
    // eigenvalues 1 and 3, the latter twice
    println!("eigenvalues {:?}, multiplicities {:?}", d.eigenvalues(), d.multiplicities());

    let z = Complex64::new(0.5, 1.0);
    let r = resolvent(&d, z, 1)?;
    println!("trace (z - H)^-1 = {:.12}", trace(&r));
    let direct: Complex64 = d.eigenvalues().iter().zip(d.multiplicities()).map(|(l, &m)| m as f64 / (z - l)).sum();
    println!("sum over eigenvalues = {direct:.12}");

    let cube = apply_function(&d, &FunctionSpec::monomial(3))?;
    println!("trace H^3 = {:.6} (trace_power: {:.6})", trace(&cube).re, h.trace_power(3));

    for t in [0.0, 1.0, 2.0, 3.5] {
        println!("N_H({t}) = {}", counting_function(&d, t));
    }
    println!("|H|_2 = {:.6}, Hilbert-Schmidt = {:.6}", h.spectral_norm(), schatten_norm(h.matrix(), 2.0)?);

    match HermitianOperator::from_real(&[vec![0.0, 1.0], vec![0.0, 0.0]]) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
