//! Spectral shift functions η₁…η₅ of a random pair and the trace formula.

use num_complex::Complex64;
use spectral_shift::divdiff::FunctionSpec;
use spectral_shift::ensemble::random_pairs;
use spectral_shift::perturbation::Perturbation;
use spectral_shift::remainder::remainder_trace;
use spectral_shift::ssf::{asymptotics_report, cumulative, ssf_sequence, trace_formula_rhs};

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn main() -> spectral_shift::Result<()> {
    let pair = random_pairs(11, 1, 5..=5).remove(0);
    let pert = Perturbation::new(pair.h0, pair.v)?;
    let etas = ssf_sequence(&pert, 5)?;
    let f = FunctionSpec::resolvent(Complex64::new(-0.5, 0.8))?;

    for eta in &etas {
        let p = eta.order;
        let lhs = remainder_trace(&pert, &f, p)?;
        let rhs = trace_formula_rhs(eta, &f)?;
        let target = pert.v().trace_power(p as u32) / factorial(p);
        let a = asymptotics_report(eta);
        println!(
            "η_{p}: {} pieces, degree {}, mass {:.3e} vs {:.3e}, trace formula rel {:.1e}, tails ({}, {})",
            eta.density.pieces().len(),
            eta.density.degree(),
            eta.mass,
            target,
            (lhs - rhs).norm() / lhs.norm(),
            a.left_limit,
            a.right_limit
        );
    }

    // ξ at the first few breakpoints, and the distribution function of η₂
    let xi = &etas[0].density;
    for (b, src) in xi.breakpoints().iter().zip(&etas[0].provenance).take(4) {
        println!("ξ jumps at {b:.6} ({src:?})");
    }
    let mid = 0.5 * (xi.breakpoints()[0] + xi.breakpoints()[xi.breakpoints().len() - 1]);
    println!("∫_(-∞,{mid:.3}) η₂ = {:.6}", cumulative(&etas[1], mid)?);
    Ok(())
}
