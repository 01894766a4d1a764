//! Cauchy transforms of measures, Stieltjes inversion and the log transform.

use num_complex::Complex64;
use spectral_shift::cauchy::{
    cauchy_transform, herglotz_margin, log_transform_boundary, stieltjes_invert, MeasureSpec,
};
use spectral_shift::divdiff::{cumulative_spline_kernel, NodeMultiset};

fn main() -> spectral_shift::Result<()> {
    let m = MeasureSpec::uniform(-1.0, 1.0)?;
    let z = Complex64::new(0.3, 0.5);
    println!("G(z) = {:.12}", cauchy_transform(&m, z)?);

    let inv = stieltjes_invert(|w| cauchy_transform(&m, w), 0.2, &[1e-2, 5e-3, 2.5e-3])?;
    println!("density at 0.2: estimates {:?}, extrapolated {:.10}", inv.estimates, inv.extrapolated);

    let zs: Vec<Complex64> = [-2.0, 0.0, 2.0].iter().map(|&x| Complex64::new(x, 0.1)).collect();
    println!("Herglotz margin of -G: {:.3e}", herglotz_margin(&m, &zs)?);

    let atoms = MeasureSpec { atoms: vec![(-1.0, 0.5), (2.0, 1.5)], density: None };
    println!("atomic G(i) = {:.12}", cauchy_transform(&atoms, Complex64::new(0.0, 1.0))?);

    // boundary values of the log transform recover the cumulative kernel / (p−1)
    let nodes = NodeMultiset::new(&[0.0, 1.0, 2.5])?;
    for t in [0.4, 1.7] {
        let b = log_transform_boundary(&nodes, t, &[1e-3, 5e-4, 2.5e-4])?;
        println!("t={t}: boundary {:.9}, kernel/2 {:.9}", b.extrapolated, cumulative_spline_kernel(&nodes, t) / 2.0);
    }
    Ok(())
}
