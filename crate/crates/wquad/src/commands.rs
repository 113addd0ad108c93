//! Command implementations behind the CLI: rule derivation, assembly with
//! oracle checks and counters, and the validation studies.
//!
//! Exit-code contract: 0 success, 2 validation-tolerance failure, 3 solver
//! failure, 4 configuration error, 1 I/O error.

use crate::assemble::{
    assemble_mass_rowwise, assemble_standard_gauss, assemble_stiffness_rowwise,
    measure_count_ratios, AffineMap, EvalCounter, Strategy, TensorSpace,
};
use crate::config::{CommandKind, KindSelect, RunConfig, StudyKind};
use crate::error::{Error, Result};
use crate::export::{
    convergence_to_csv, convergence_to_json, counter_to_json, fmt_g17, rule_to_json,
    spectrum_to_csv, to_band_json, to_matrix_market,
};
use crate::oracle::RuleKind;
use crate::rules::{
    cubic_mass_failure_demo, cubic_stiffness_rule, rule_table, RuleFamily, SolverOptions,
    CUBIC_MASS_PUBLISHED_GUESS, CUBIC_MASS_WRONG_ELEMENT_GUESS,
};
use crate::validate::{
    oracle_max_entry_diff, run_eigen_convergence, run_poisson_convergence, run_spectrum_comparison,
    ManufacturedSolution,
};
use std::path::Path;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

/// Map an error to the CLI exit code.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidKnots(_) | Error::UnsupportedDegree(_) => EXIT_CONFIG,
        Error::Io(_) | Error::Json(_) => EXIT_IO,
        _ => EXIT_SOLVER,
    }
}

/// Run a validated config; returns the process exit code.
pub fn run(config: &RunConfig) -> i32 {
    let result = match config.command {
        CommandKind::DeriveRules => cmd_derive_rules(config),
        CommandKind::Assemble => cmd_assemble(config),
        CommandKind::Study => cmd_study(config),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Derive the weighted Gaussian rules (and, in unsafe mode, demonstrate
/// the initial-guess failure of the unconstrained iteration).
pub fn cmd_derive_rules(config: &RunConfig) -> Result<i32> {
    config.validate()?;
    let degree = config.degree_checked()?;
    let out = config.out_dir();
    let tol = config.tol_residual.unwrap_or(1e-12);

    if config.unsafe_newton.unwrap_or(false) {
        return cmd_unsafe_newton(config, degree, &out);
    }

    let kinds = match config.kind.unwrap_or(KindSelect::Both) {
        KindSelect::Mass => vec![RuleKind::Mass],
        KindSelect::Stiffness => vec![RuleKind::Stiffness],
        KindSelect::Both => vec![RuleKind::Mass, RuleKind::Stiffness],
    };
    let omega1 = config.omega1.unwrap_or(1.0);

    let mut worst = 0.0f64;
    for kind in kinds {
        let rule = match (kind, degree) {
            (RuleKind::Mass, 2) => crate::rules::quadratic_mass_rule()?,
            (RuleKind::Mass, 3) => crate::rules::cubic_mass_rule()?,
            (RuleKind::Stiffness, 2) => crate::rules::quadratic_stiffness_rule()?,
            (RuleKind::Stiffness, 3) => cubic_stiffness_rule(omega1)?,
            _ => return Err(Error::UnsupportedDegree(degree)),
        };
        println!("{} rule, degree {}:", kind.as_str(), degree);
        for (k, (&t, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            println!("  tau_{} = {}   omega_{} = {}", k + 1, fmt_g17(t), k + 1, fmt_g17(w));
        }
        println!("  residual_max = {}", fmt_g17(rule.residual_max));
        write_file(&out, &format!("rule_p{}_{}.json", degree, kind.as_str()), &rule_to_json(&rule))?;
        worst = worst.max(rule.residual_max);
    }
    if worst > tol {
        eprintln!("rule residual {} exceeds tolerance {}", fmt_g17(worst), fmt_g17(tol));
        return Ok(EXIT_TOLERANCE);
    }
    Ok(EXIT_OK)
}

fn cmd_unsafe_newton(config: &RunConfig, degree: usize, out: &Path) -> Result<i32> {
    if degree != 3 {
        return Err(Error::Config("the unsafe-newton demonstration targets degree 3".into()));
    }
    let start_name = config.start.as_deref().unwrap_or("published");
    let start: Vec<f64> = match start_name {
        "published" => CUBIC_MASS_PUBLISHED_GUESS.to_vec(),
        "wrong-element" => CUBIC_MASS_WRONG_ELEMENT_GUESS.to_vec(),
        other => other
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("invalid start component '{t}'")))
            })
            .collect::<Result<_>>()?,
    };

    let sys = crate::rules::ResidualSystem::cardinal(RuleKind::Mass, 3)?;
    if start.len() != sys.num_unknowns() {
        return Err(Error::Config(format!(
            "start needs {} components (tau1, tau2, omega1, omega2)",
            sys.num_unknowns()
        )));
    }
    let options = SolverOptions::unconstrained();
    let report = crate::rules::solve_residual_system(&sys, &[start.clone()], &options);

    println!("unconstrained Newton from start '{start_name}' = {:?}", start);
    let mut doc = serde_json::Map::new();
    doc.insert("start".into(), serde_json::json!(start));
    match (&report.rule, report.rejected.first()) {
        (Some(rule), _) => {
            println!("  converged to an in-bracket rule (residual {})", fmt_g17(rule.residual_max));
            doc.insert("outcome".into(), serde_json::json!("converged-in-bracket"));
            doc.insert("nodes".into(), serde_json::json!(rule.nodes));
            doc.insert("weights".into(), serde_json::json!(rule.weights));
        }
        (None, Some(rej)) => {
            println!("  converged to a root REJECTED by the bracket filter ({}):", rej.reason);
            for (k, &t) in rej.nodes.iter().enumerate() {
                println!("    tau_{} = {}", k + 1, fmt_g17(t));
            }
            for (k, &w) in rej.weights.iter().enumerate() {
                println!("    omega_{} = {}", k + 1, fmt_g17(w));
            }
            doc.insert("outcome".into(), serde_json::json!("rejected-root"));
            doc.insert("rejected_nodes".into(), serde_json::json!(rej.nodes));
            doc.insert("rejected_weights".into(), serde_json::json!(rej.weights));
            doc.insert("reason".into(), serde_json::json!(rej.reason));
        }
        (None, None) => {
            println!(
                "  did not converge within the iteration cap (best residual {}); \
                 full-step Newton wanders chaotically from this guess. \
                 Try --start wrong-element for the bracket-violating root.",
                fmt_g17(report.best_residual)
            );
            doc.insert("outcome".into(), serde_json::json!("no-convergence"));
            doc.insert("best_residual".into(), serde_json::json!(report.best_residual));
        }
    }

    // the production path for contrast
    let demo = cubic_mass_failure_demo()?;
    let rule = demo.bracketed.rule.as_ref().expect("bracketed solver finds the mass rule");
    println!("bracketed multi-start solver recovers:");
    println!("  tau_1 = {}  tau_2 = {}", fmt_g17(rule.nodes[0]), fmt_g17(rule.nodes[1]));
    doc.insert("bracketed_nodes".into(), serde_json::json!(rule.nodes));
    doc.insert("bracketed_weights".into(), serde_json::json!(rule.weights));

    write_file(
        out,
        "unsafe_newton_report.json",
        &serde_json::to_string_pretty(&serde_json::Value::Object(doc))?,
    )?;
    Ok(EXIT_OK)
}

/// Assemble matrices, optionally check them against the exact-integration
/// oracle, export them, and report counters.
pub fn cmd_assemble(config: &RunConfig) -> Result<i32> {
    config.validate()?;
    let p = config.degree_checked()?;
    let d = config.dimension_checked()?;
    let mesh = config.mesh.expect("validated");
    let strategy = Strategy::parse(config.strategy.as_deref().unwrap_or("gauss-weighted"))?;
    let out = config.out_dir();
    let tol_oracle = config.tol_oracle.unwrap_or(1e-12);
    let band = matches!(config.format.as_deref(), Some("band-json"));

    let space = TensorSpace::uniform(p, d, mesh)?;
    let map = AffineMap::identity(d);
    let mut counter = EvalCounter::new();

    let kinds = match config.kind.unwrap_or(KindSelect::Both) {
        KindSelect::Mass => vec![RuleKind::Mass],
        KindSelect::Stiffness => vec![RuleKind::Stiffness],
        KindSelect::Both => vec![RuleKind::Mass, RuleKind::Stiffness],
    };

    let mut code = EXIT_OK;
    for kind in &kinds {
        let matrix = match strategy {
            Strategy::StandardGauss => assemble_standard_gauss(&space, &map, *kind, &mut counter)?,
            Strategy::GaussWeighted | Strategy::NcWeighted => {
                let family = if strategy == Strategy::GaussWeighted {
                    RuleFamily::GaussWeighted
                } else {
                    RuleFamily::NcWeighted
                };
                let rules = rule_table(p, family)?;
                match kind {
                    RuleKind::Mass => assemble_mass_rowwise(&space, &map, &rules, &mut counter)?,
                    RuleKind::Stiffness => {
                        assemble_stiffness_rowwise(&space, &map, &rules, &mut counter)?
                    }
                }
            }
        };
        println!(
            "{} matrix: n = {}, nnz = {}, strategy = {}",
            kind.as_str(),
            matrix.n(),
            matrix.nnz(),
            strategy.as_str()
        );
        if config.check_oracle.unwrap_or(false) {
            let diff = oracle_max_entry_diff(&space, &map, *kind, &matrix)?;
            println!("  max |entry - oracle| = {}", fmt_g17(diff));
            if diff > tol_oracle {
                eprintln!("  oracle deviation exceeds tolerance {}", fmt_g17(tol_oracle));
                code = EXIT_TOLERANCE;
            }
        }
        let name = format!("{}_p{}_d{}_n{}", kind.as_str(), p, d, mesh);
        if band {
            write_file(&out, &format!("{name}.band.json"), &to_band_json(&matrix)?)?;
        } else {
            write_file(&out, &format!("{name}.mtx"), &to_matrix_market(&matrix))?;
        }
    }

    write_file(&out, "counters.json", &counter_to_json(&counter)?)?;

    if config.ratios.unwrap_or(false) {
        for kind in &kinds {
            let (std_ratio, nc_ratio, full) = measure_count_ratios(&space, &map, *kind)?;
            println!(
                "{} evaluation ratios: standard/gauss-weighted = {}, nc-weighted/gauss-weighted = {}",
                kind.as_str(),
                fmt_g17(std_ratio),
                fmt_g17(nc_ratio)
            );
            write_file(
                &out,
                &format!("ratios_{}_p{}_d{}_n{}.json", kind.as_str(), p, d, mesh),
                &counter_to_json(&full)?,
            )?;
        }
    }
    Ok(code)
}

/// Run a validation study and write its CSV/JSON outputs; the exit code
/// encodes the rate or agreement tolerance.
pub fn cmd_study(config: &RunConfig) -> Result<i32> {
    config.validate()?;
    let p = config.degree_checked()?;
    let out = config.out_dir();
    match config.study.expect("validated") {
        StudyKind::EigConvergence => {
            let d = config.dimension_checked()?;
            let meshes = config.meshes.clone().expect("validated");
            let index = config.eigen_index.unwrap_or(1);
            let tol = config.default_rate_tol(p);
            let report = run_eigen_convergence(d, p, index, &meshes, tol)?;
            println!(
                "eig-convergence d={} p={} lambda_{}: rate = {} (expected {}, tol {})",
                d,
                p,
                index,
                fmt_g17(report.rate),
                report.expected_order,
                tol
            );
            let stem = format!("eig_convergence_d{}_p{}_l{}", d, p, index);
            write_file(&out, &format!("{stem}.csv"), &convergence_to_csv(&report))?;
            write_file(&out, &format!("{stem}.json"), &convergence_to_json(&report)?)?;
            Ok(if report.pass { EXIT_OK } else { EXIT_TOLERANCE })
        }
        StudyKind::Spectrum => {
            let mesh = config.mesh.expect("validated");
            let tol = config.tol_spectrum.unwrap_or(1e-9);
            let report = run_spectrum_comparison(p, mesh)?;
            println!(
                "spectrum p={} mesh={}: max eigenvalue disagreement = {}, max entry diffs = {} / {}",
                p,
                mesh,
                fmt_g17(report.max_relative_disagreement),
                fmt_g17(report.max_mass_entry_diff),
                fmt_g17(report.max_stiffness_entry_diff)
            );
            let stem = format!("spectrum_p{}_n{}", p, mesh);
            write_file(&out, &format!("{stem}.csv"), &spectrum_to_csv(&report))?;
            write_file(&out, &format!("{stem}.json"), &serde_json::to_string_pretty(&report)?)?;
            Ok(if report.max_relative_disagreement <= tol { EXIT_OK } else { EXIT_TOLERANCE })
        }
        StudyKind::Poisson => {
            let d = config.dimension_checked()?;
            let meshes = config.meshes.clone().expect("validated");
            let solution = match config.solution.as_deref() {
                Some(s) => ManufacturedSolution::parse(s)?,
                None => ManufacturedSolution::ProductOfSines,
            };
            // L2 rate p+1; reuse the eigenvalue rate tolerances
            let tol = config.default_rate_tol(p);
            let report = run_poisson_convergence(d, p, &meshes, solution, tol)?;
            println!(
                "poisson d={} p={}: rate = {} (expected {}, tol {})",
                d,
                p,
                fmt_g17(report.rate),
                report.expected_order,
                tol
            );
            let stem = format!("poisson_d{}_p{}", d, p);
            write_file(&out, &format!("{stem}.csv"), &convergence_to_csv(&report))?;
            write_file(&out, &format!("{stem}.json"), &convergence_to_json(&report)?)?;
            Ok(if report.pass { EXIT_OK } else { EXIT_TOLERANCE })
        }
    }
}
