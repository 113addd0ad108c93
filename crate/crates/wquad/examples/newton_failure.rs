//! Initial-guess sensitivity of the cubic mass exactness system.
//!
//! The system is built under the assumption that each node stays in its
//! own element. An unconstrained full-step Newton iteration does not know
//! that: run from a start that misplaces the second node and it converges
//! to a perfectly valid algebraic root whose second node sits in the wrong
//! element. The bracket filter rejects that root; the damped, projected
//! multi-start solver finds the usable rule.
//!
//!     cargo run --release --example newton_failure

use wquad::export::fmt_g17;
use wquad::rules::cubic_mass_failure_demo;

fn main() -> Result<(), wquad::Error> {
    let demo = cubic_mass_failure_demo()?;

    println!("unconstrained Newton from the published guess (1/3, 5/3, 1, 1):");
    match (&demo.published_guess.rule, demo.published_guess.rejected.first()) {
        (Some(rule), _) => println!("    converged in-bracket: {:?}", rule.nodes),
        (None, Some(rej)) => println!("    rejected root, tau_2 = {}", fmt_g17(rej.nodes[1])),
        (None, None) => println!(
            "    no convergence after {} starts (best residual {}): full steps oscillate",
            demo.published_guess.starts_tried,
            fmt_g17(demo.published_guess.best_residual)
        ),
    }

    println!("unconstrained Newton from the wrong-element start (0.5, 2.5, 1, 1):");
    let rej = demo.wrong_element.rejected.first().expect("converges to the spurious root");
    println!("    converged to a spurious root, rejected: {}", rej.reason);
    for (k, &t) in rej.nodes.iter().enumerate() {
        println!("    tau_{} = {}", k + 1, fmt_g17(t));
    }
    println!("    (the second node left its element (1, 2))");

    let rule = demo.bracketed.rule.as_ref().expect("bracketed solver succeeds");
    println!("bracketed damped multi-start solver:");
    println!(
        "    tau_1 = {}    tau_2 = {}",
        fmt_g17(rule.nodes[0]),
        fmt_g17(rule.nodes[1])
    );
    println!(
        "    omega_1 = {}  omega_2 = {}",
        fmt_g17(rule.weights[0]),
        fmt_g17(rule.weights[1])
    );

    let rescued =
        demo.bracketed_from_published_guess.rule.as_ref().expect("damping rescues the guess");
    println!(
        "bracketed solver from the published guess converges to the same rule: tau_2 = {}",
        fmt_g17(rescued.nodes[1])
    );
    Ok(())
}
