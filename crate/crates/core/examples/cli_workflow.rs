//! The `ssf` subcommands driven in-process: compute, read back, verify.

use std::ffi::OsString;
use std::path::Path;

use clap::Parser;
use spectral_shift::cli::compute::read_densities;
use spectral_shift::cli::config::write_matrix;
use spectral_shift::cli::{run, Cli};
use spectral_shift::operator::HermitianOperator;

fn ssf(args: &[&str], out: &Path) -> i32 {
    let argv = std::iter::once(OsString::from("ssf"))
        .chain(args.iter().map(OsString::from))
        .chain([OsString::from("--out"), out.as_os_str().to_owned()]);
    run(Cli::parse_from(argv))
}

fn main() -> spectral_shift::Result<()> {
    let dir = std::env::temp_dir().join("ssf-cli-workflow");
    std::fs::create_dir_all(&dir)?;
    let h0 = dir.join("h0.json");
    let v = dir.join("v.json");
    write_matrix(&h0, &HermitianOperator::from_diagonal(&[0.0, 1.0]))?;
    write_matrix(&v, &HermitianOperator::from_real(&[vec![1.0, 2.0], vec![2.0, 3.0]])?)?;

    let out = dir.join("compute");
    let (h0, v) = (h0.to_string_lossy(), v.to_string_lossy());
    let code = ssf(&["compute", "--order", "3", "--grid", "-1:5:7", "--h0", &h0, "--v", &v], &out);
    println!("compute exited with {code}");

    let file = read_densities(&out.join("densities.json"))?;
    for eta in &file.densities {
        println!("η_{} mass {:.6}, breakpoints {:?}", eta.order, eta.mass, eta.density.breakpoints());
    }
    print!("{}", std::fs::read_to_string(out.join("masses.csv"))?);

    let code = ssf(&["verify", "--random", "4", "3", "--orders", "1..3", "--seed", "5"], &dir.join("verify"));
    println!("verify exited with {code}");
    Ok(())
}
