//! Eigenvalue convergence under mesh refinement with weighted assembly:
//! the relative error of a tracked eigenvalue decays at the theoretical
//! order 2p.
//!
//!     cargo run --release --example eigen_convergence

use wquad::export::fmt_g17;
use wquad::validate::run_eigen_convergence;

fn main() -> Result<(), wquad::Error> {
    let cases: [(usize, usize, usize, &[usize]); 4] = [
        (1, 2, 1, &[8, 16, 32, 64]),
        (1, 3, 1, &[8, 16, 32]),
        (2, 2, 10, &[8, 16, 32]),
        (2, 3, 10, &[8, 16, 32]),
    ];
    for (d, p, index, meshes) in cases {
        let tol = if p == 2 { 0.3 } else { 0.4 };
        let report = run_eigen_convergence(d, p, index, meshes, tol)?;
        println!(
            "{d}D p={p} eigenvalue {index}: fitted rate = {:.3} (expected {})",
            report.rate, report.expected_order
        );
        for (h, err) in report.h.iter().zip(&report.errors) {
            println!("    h = {:<10.6} error = {}", h, fmt_g17(*err));
        }
    }

    // 3D trend at desk scale
    for p in [2usize, 3] {
        let report = run_eigen_convergence(3, p, 10, &[6, 8, 10, 12], f64::INFINITY)?;
        println!(
            "3D p={p} eigenvalue 10: fitted rate = {:.3}, monotone decay = {}",
            report.rate,
            report.monotone_decay()
        );
    }
    Ok(())
}
