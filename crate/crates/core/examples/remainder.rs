//! Taylor remainders of the functional calculus by three independent routes.

use num_complex::Complex64;
use spectral_shift::divdiff::FunctionSpec;
use spectral_shift::ensemble::random_pairs;
use spectral_shift::perturbation::Perturbation;
use spectral_shift::remainder::{gateaux_trace, remainder, FdOracle, Method};

fn main() -> spectral_shift::Result<()> {
    let pair = random_pairs(3, 1, 4..=4).remove(0);
    let pert = Perturbation::new(pair.h0, pair.v)?;
    let f = FunctionSpec::resolvent_power(Complex64::new(2.0, 1.0), 2)?;

    let mut fd = FdOracle::new(pert.h0(), pert.v(), &f)?;
    for j in 1..=3 {
        let (g, step) = fd.gateaux(j)?;
        println!("j={j}: multilinear {:.12}  finite differences {g:.12} (step {step:.2e})", gateaux_trace(&pert, &f, j)?);
    }

    for p in 1..=4 {
        let spectral = remainder(&pert, &f, p, Method::Spectral)?;
        let multi = remainder(&pert, &f, p, Method::Multilinear)?;
        println!(
            "p={p}: trace R_p = {:.12} (spectral) {:.12} (multilinear) {:.12} (fd)",
            spectral.value_trace,
            multi.value_trace,
            fd.remainder(p)?
        );
    }
    Ok(())
}
