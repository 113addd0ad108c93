//! Poisson manufactured-solution check: solve -Lap(u) = f with weighted
//! assembly (stiffness matrix and load vector) and confirm the L2 error
//! decays at order p+1.
//!
//!     cargo run --release --example poisson_convergence

use wquad::export::fmt_g17;
use wquad::validate::{run_poisson_convergence, ManufacturedSolution};

fn main() -> Result<(), wquad::Error> {
    let cases: [(usize, usize, &[usize]); 3] =
        [(1, 2, &[8, 16, 32, 64]), (1, 3, &[8, 16, 32]), (2, 3, &[8, 16, 32])];
    for (d, p, meshes) in cases {
        let tol = if p == 2 { 0.3 } else { 0.4 };
        let report =
            run_poisson_convergence(d, p, meshes, ManufacturedSolution::ProductOfSines, tol)?;
        println!(
            "{d}D p={p} u = product of sines: fitted L2 rate = {:.3} (expected {})",
            report.rate, report.expected_order
        );
        for (h, err) in report.h.iter().zip(&report.errors) {
            println!("    h = {:<10.6} error = {}", h, fmt_g17(*err));
        }
    }
    Ok(())
}
