//! Acceptance suite: every release-gating criterion with its tolerance
//! pinned in code, one pass/fail line per criterion.
//!
//! Run with:  cargo test -p wquad --test acceptance -- --nocapture
#![allow(clippy::excessive_precision)]

use wquad::assemble::{
    assemble_mass_rowwise, assemble_stiffness_rowwise, measure_count_ratios, AffineMap,
    EvalCounter, TensorSpace,
};
use wquad::oracle::RuleKind;
use wquad::rules::{
    cardinal_exactness_residual, cubic_mass_failure_demo, cubic_mass_rule, cubic_stiffness_rule,
    newton_cotes_cardinal, quadratic_mass_rule, quadratic_stiffness_rule,
};
use wquad::validate::{
    oracle_max_entry_diff, run_eigen_convergence, run_spectrum_comparison,
};

const EQ23_NODES: [f64; 3] = [0.71241440095955149482, 1.5, 3.0 - 0.71241440095955149482];
const EQ23_WEIGHTS: [f64; 3] =
    [0.79410713110801847176, 0.79595121334251753503, 0.79410713110801847176];
const EQ25_NODES: [f64; 4] = [
    0.72289886179270511319,
    1.58789880583487289415,
    4.0 - 1.58789880583487289415,
    4.0 - 0.72289886179270511319,
];
const EQ25_WEIGHTS: [f64; 4] = [
    0.88863704203309628490,
    0.83494225417405959060,
    0.83494225417405959060,
    0.88863704203309628490,
];
const EQ27: [f64; 4] = [
    0.75698683155927590528,
    2.30382606794266282352,
    1.14740718959367949323,
    0.74428414202245775486,
];
const EQ30_NODES: [f64; 3] = [0.75, 1.5, 2.25];
const EQ30_WEIGHT: f64 = 8.0 / 9.0;
const EQ34_NODES: [f64; 4] = [
    0.24033518882038592858,
    1.16015740029939774803,
    4.0 - 1.16015740029939774803,
    4.0 - 0.24033518882038592858,
];
const EQ34_WEIGHTS: [f64; 4] =
    [1.0, 0.86030876544418464920, 0.86030876544418464920, 1.0];

fn verdict(criterion: usize, pass: bool, detail: &str) {
    println!(
        "criterion {criterion} {}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn max_component_diff(got_nodes: &[f64], got_weights: &[f64], nodes: &[f64], weights: &[f64]) -> f64 {
    let n = got_nodes
        .iter()
        .zip(nodes)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let w = got_weights
        .iter()
        .zip(weights)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    n.max(w)
}

#[test]
fn criterion_1_rule_regression() {
    const TOL: f64 = 1e-12;
    let qm = quadratic_mass_rule().unwrap();
    let cm = cubic_mass_rule().unwrap();
    let qs = quadratic_stiffness_rule().unwrap();
    let cs = cubic_stiffness_rule(1.0).unwrap();
    let worst = [
        max_component_diff(&qm.nodes, &qm.weights, &EQ23_NODES, &EQ23_WEIGHTS),
        max_component_diff(&cm.nodes, &cm.weights, &EQ25_NODES, &EQ25_WEIGHTS),
        max_component_diff(&qs.nodes, &qs.weights, &EQ30_NODES, &[EQ30_WEIGHT; 3]),
        max_component_diff(&cs.nodes, &cs.weights, &EQ34_NODES, &EQ34_WEIGHTS),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    verdict(
        1,
        worst <= TOL,
        &format!("derived rules match published constants, max deviation {worst:.3e} (tol {TOL:.0e})"),
    );
}

#[test]
fn criterion_2_exactness_suite() {
    const TOL: f64 = 1e-12;
    let mut rules = vec![
        ("quadratic mass", quadratic_mass_rule().unwrap()),
        ("cubic mass", cubic_mass_rule().unwrap()),
        ("quadratic stiffness", quadratic_stiffness_rule().unwrap()),
        ("nc mass p=2", newton_cotes_cardinal(2, RuleKind::Mass).unwrap()),
        ("nc mass p=3", newton_cotes_cardinal(3, RuleKind::Mass).unwrap()),
        ("nc stiffness p=2", newton_cotes_cardinal(2, RuleKind::Stiffness).unwrap()),
        ("nc stiffness p=3", newton_cotes_cardinal(3, RuleKind::Stiffness).unwrap()),
    ];
    for w1 in [0.9, 1.0, 1.1] {
        rules.push(("cubic stiffness family", cubic_stiffness_rule(w1).unwrap()));
    }
    let mut worst = 0.0f64;
    let mut worst_name = "";
    for (name, rule) in &rules {
        let r = cardinal_exactness_residual(rule).unwrap();
        if r > worst {
            worst = r;
            worst_name = name;
        }
    }
    verdict(
        2,
        worst <= TOL,
        &format!(
            "{} rules all exact against the oracle, worst residual {worst:.3e} ({worst_name}, tol {TOL:.0e})",
            rules.len()
        ),
    );
}

#[test]
fn criterion_3_matrix_equivalence() {
    const TOL: f64 = 1e-12;
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for p in [2usize, 3] {
        for (d, n_el) in [(1usize, 1000usize), (2, 64)] {
            let space = TensorSpace::uniform(p, d, n_el).unwrap();
            let map = AffineMap::identity(d);
            let rules = wquad::rules::rule_table(p, wquad::rules::RuleFamily::GaussWeighted).unwrap();
            let mut counter = EvalCounter::new();
            let m = assemble_mass_rowwise(&space, &map, &rules, &mut counter).unwrap();
            let k = assemble_stiffness_rowwise(&space, &map, &rules, &mut counter).unwrap();
            let dm = oracle_max_entry_diff(&space, &map, RuleKind::Mass, &m).unwrap();
            let dk = oracle_max_entry_diff(&space, &map, RuleKind::Stiffness, &k).unwrap();
            worst = worst.max(dm).max(dk);
            detail.push_str(&format!("p={p} d={d} n={n_el}: M {dm:.1e} K {dk:.1e}; "));
        }
    }
    verdict(3, worst <= TOL, &format!("weighted vs oracle entries, {detail}tol {TOL:.0e}"));
}

#[test]
fn criterion_4_spectrum_overlay() {
    const TOL_EIG: f64 = 1e-9;
    const TOL_ENTRY: f64 = 1e-12;
    let mut worst_eig = 0.0f64;
    let mut worst_entry = 0.0f64;
    let mut low_mode_ok = true;
    for p in [2usize, 3] {
        let report = run_spectrum_comparison(p, 1000).unwrap();
        worst_eig = worst_eig.max(report.max_relative_disagreement);
        worst_entry = worst_entry
            .max(report.max_mass_entry_diff)
            .max(report.max_stiffness_entry_diff);
        if p == 3 {
            // low modes are fully resolved at this mesh
            low_mode_ok = report.rows[0].error_weighted < 1e-10;
        }
    }
    verdict(
        4,
        worst_eig <= TOL_EIG && worst_entry <= TOL_ENTRY && low_mode_ok,
        &format!(
            "1D N=1000 weighted and standard Gauss eigenvalue curves agree to {worst_eig:.3e} \
             (tol {TOL_EIG:.0e}), max matrix-entry diff {worst_entry:.3e} (tol {TOL_ENTRY:.0e})"
        ),
    );
}

#[test]
fn criterion_5_eigenvalue_convergence() {
    // 1D lambda_1 and 2D lambda_10 at the theoretical order 2p
    let cases = [
        (1usize, 2usize, 1usize, vec![8usize, 16, 32, 64], 0.3),
        (1, 3, 1, vec![8, 16, 32], 0.4),
        (2, 2, 10, vec![8, 16, 32, 64], 0.3),
        (2, 3, 10, vec![8, 16, 32, 64], 0.4),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (d, p, index, meshes, tol) in cases {
        let report = run_eigen_convergence(d, p, index, &meshes, tol).unwrap();
        pass &= report.pass;
        detail.push_str(&format!(
            "{d}D p={p} l{index}: rate {:.2} (want {} +/- {tol}); ",
            report.rate, report.expected_order
        ));
    }
    // 3D trend check: monotone decay and rate >= 2p-1 on meshes 6..12
    for p in [2usize, 3] {
        let report = run_eigen_convergence(3, p, 10, &[6, 8, 10, 12], f64::INFINITY).unwrap();
        let floor = (2 * p - 1) as f64;
        let ok = report.monotone_decay() && report.rate >= floor;
        pass &= ok;
        detail.push_str(&format!(
            "3D p={p} l10 trend: rate {:.2} (>= {floor}), monotone {}; ",
            report.rate,
            report.monotone_decay()
        ));
    }
    verdict(5, pass, &detail);
}

#[test]
fn criterion_6_evaluation_count_ratios() {
    let map = AffineMap::identity(2);
    let mut pass = true;
    let mut detail = String::new();
    for (p, lo, hi, ceiling) in [(2usize, 1.93, 2.23, 25.0 / 9.0), (3, 2.29, 2.59, 49.0 / 16.0)] {
        let space = TensorSpace::uniform(p, 2, 100).unwrap();
        let (_, nc_ratio, _) = measure_count_ratios(&space, &map, RuleKind::Mass).unwrap();
        let ok = nc_ratio >= lo && nc_ratio <= hi && nc_ratio < ceiling;
        pass &= ok;
        detail.push_str(&format!(
            "p={p}: nc/gauss-weighted = {nc_ratio:.4} (want [{lo}, {hi}], ceiling {ceiling:.4}); "
        ));
    }
    verdict(6, pass, &format!("2D 100x100 mass assembly, {detail}"));
}

#[test]
fn criterion_7_failure_mode_reproduction() {
    const TOL: f64 = 1e-9;
    let demo = cubic_mass_failure_demo().unwrap();

    // the published guess: plain full-step Newton does not converge from
    // (1/3, 5/3, 1, 1); this run reports its true outcome
    let published_outcome = match (&demo.published_guess.rule, demo.published_guess.rejected.len())
    {
        (Some(_), _) => "converged in-bracket".to_string(),
        (None, n) if n > 0 => "converged to a rejected root".to_string(),
        _ => {
            format!("no convergence (best residual {:.1e})", demo.published_guess.best_residual)
        }
    };
    println!(
        "criterion 7 note: unconstrained Newton from the published guess: {published_outcome}"
    );

    // the spurious algebraic root is reached from the deterministic
    // wrong-element start and rejected by the bracket filter
    let rej = demo
        .wrong_element
        .rejected
        .first()
        .expect("wrong-element start converges to the spurious root");
    let spurious = [rej.nodes[0], rej.nodes[1], rej.weights[0], rej.weights[1]];
    let diff = spurious
        .iter()
        .zip(&EQ27)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let bracket_violated = !(rej.nodes[1] > 1.0 && rej.nodes[1] < 2.0);
    let rejected = demo.wrong_element.rule.is_none();

    // the bracketed production solver still finds the published rule,
    // including when started from the published guess itself
    let rule = demo.bracketed.rule.as_ref().expect("bracketed solver succeeds");
    let prod_diff = max_component_diff(&rule.nodes, &rule.weights, &EQ25_NODES, &EQ25_WEIGHTS);
    let rescued = demo
        .bracketed_from_published_guess
        .rule
        .as_ref()
        .map(|r| max_component_diff(&r.nodes, &r.weights, &EQ25_NODES, &EQ25_WEIGHTS))
        .unwrap_or(f64::INFINITY);

    let pass = diff <= TOL && bracket_violated && rejected && prod_diff <= 1e-12 && rescued <= 1e-12;
    verdict(
        7,
        pass,
        &format!(
            "unconstrained Newton reaches the spurious root (matches published values to \
             {diff:.3e}, tau_2 = {:.6} outside (1,2), rejected by the bracket filter); \
             bracketed solver returns the published rule to {prod_diff:.3e} and recovers from \
             the published guess to {rescued:.3e}",
            rej.nodes[1]
        ),
    );
}

#[test]
fn criterion_8_quartic_family_check() {
    const TOL: f64 = 1e-12;
    let rule = cubic_stiffness_rule(1.0).unwrap();
    let t = rule.nodes[0];
    let quartic = (30.0 * t.powi(4) - 60.0 * t.powi(3) + 30.0 * t * t - 1.0).abs();
    let closed = 0.5 - (225.0 - 30.0 * 30.0f64.sqrt()).sqrt() / 30.0;
    let diff = (t - closed).abs();
    verdict(
        8,
        quartic <= TOL && diff <= TOL,
        &format!(
            "omega_1 = 1: quartic residual {quartic:.3e} (tol {TOL:.0e}), node matches the \
             radical form to {diff:.3e}"
        ),
    );
}
