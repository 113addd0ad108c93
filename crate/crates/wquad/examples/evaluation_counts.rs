//! Basis-evaluation cost of mass assembly on a 2D 100x100 mesh under the
//! three strategies, with the redundant-evaluation exclusion protocol.
//! The fixed-node weighted baseline costs about 2.08x (quadratics) and
//! 2.44x (cubics) the Gaussian weighted rules; the theoretical node-count
//! ceilings are 25/9 and 49/16.
//!
//!     cargo run --release --example evaluation_counts

use wquad::assemble::{measure_count_ratios, AffineMap, TensorSpace};
use wquad::oracle::RuleKind;

fn main() -> Result<(), wquad::Error> {
    let map = AffineMap::identity(2);
    for p in [2usize, 3] {
        let space = TensorSpace::uniform(p, 2, 100)?;
        let (std_ratio, nc_ratio, counter) = measure_count_ratios(&space, &map, RuleKind::Mass)?;
        println!("p = {p}, 2D 100x100 mass assembly:");
        for (strategy, tally) in counter.tallies() {
            println!(
                "    {:<14} value evals = {:>12}  deriv evals = {:>12}",
                strategy.as_str(),
                tally.value_evals,
                tally.deriv_evals
            );
        }
        let ceiling = ((2 * p + 1) as f64 / (p + 1) as f64).powi(2);
        println!("    standard / gauss-weighted    = {std_ratio:.4}");
        println!("    nc-weighted / gauss-weighted = {nc_ratio:.4}  (ceiling {ceiling:.4})");
    }
    Ok(())
}
