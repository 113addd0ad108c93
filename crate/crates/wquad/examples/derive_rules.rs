//! Derive all weighted Gaussian rules and the fixed-node baselines, print
//! their constants to 17 significant digits, and verify exactness against
//! the integration oracle.
//!
//!     cargo run --release --example derive_rules

use wquad::export::fmt_g17;
use wquad::oracle::RuleKind;
use wquad::rules::{
    cardinal_exactness_residual, cubic_stiffness_rule, newton_cotes_cardinal, rule_table,
    RuleFamily,
};

fn main() -> Result<(), wquad::Error> {
    for p in [2usize, 3] {
        let table = rule_table(p, RuleFamily::GaussWeighted)?;
        for rule in [&table.mass, &table.stiffness] {
            println!(
                "degree {p} {} rule ({} nodes, one per element of the weight support):",
                rule.kind.as_str(),
                rule.len()
            );
            for (k, (&t, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                println!("    tau_{} = {}    omega_{} = {}", k + 1, fmt_g17(t), k + 1, fmt_g17(w));
            }
            println!("    exactness residual vs oracle: {}", fmt_g17(rule.residual_max));
        }

        for kind in [RuleKind::Mass, RuleKind::Stiffness] {
            let nc = newton_cotes_cardinal(p, kind)?;
            println!(
                "degree {p} {} fixed-node baseline: {} nodes at knots and midpoints, residual {}",
                kind.as_str(),
                nc.len(),
                fmt_g17(cardinal_exactness_residual(&nc)?)
            );
        }
        println!();
    }

    println!("cubic stiffness one-parameter family:");
    for w1 in [0.9, 1.0, 1.1] {
        let rule = cubic_stiffness_rule(w1)?;
        println!(
            "    omega_1 = {w1}: tau_1 = {}, tau_2 = {}, omega_2 = {}, residual {}",
            fmt_g17(rule.nodes[0]),
            fmt_g17(rule.nodes[1]),
            fmt_g17(rule.weights[1]),
            fmt_g17(rule.residual_max)
        );
    }
    Ok(())
}
