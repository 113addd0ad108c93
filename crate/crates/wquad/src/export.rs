//! File formats: MatrixMarket coordinate export, the compact band JSON
//! format, rule tables, counter reports and CSV emission.
//!
//! Every writer is deterministic byte for byte; floating-point values are
//! printed with 17 significant digits so the published rule constants
//! round-trip without loss.

use crate::assemble::{EvalCounter, SparseMatrix};
use crate::error::Result;
use crate::rules::WeightedRule;
use crate::validate::{ConvergenceReport, SpectrumReport};
use std::fmt::Write as _;

/// 17-significant-digit scientific form, the crate-wide numeric format.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

/// MatrixMarket coordinate format, symmetric: lower triangle, 1-based,
/// row-major order.
pub fn to_matrix_market(m: &SparseMatrix) -> String {
    let mut entries = Vec::new();
    for (r, c, v) in m.entries() {
        if c <= r && v != 0.0 {
            entries.push((r, c, v));
        }
    }
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate real symmetric\n");
    let _ = writeln!(out, "{} {} {}", m.n(), m.n(), entries.len());
    for (r, c, v) in entries {
        let _ = writeln!(out, "{} {} {}", r + 1, c + 1, fmt_g17(v));
    }
    out
}

/// Compact band JSON: {n, p, d, dims, offsets, bands}. Offsets are the
/// lexicographically non-negative half of the stencil (the matrix is
/// symmetric); bands[k][row] holds the entry at (row, row + offset_k),
/// zero-padded where the offset leaves the index set.
pub fn to_band_json(m: &SparseMatrix) -> Result<String> {
    let dims = m.dims().to_vec();
    let d = dims.len();
    let p = m.degree() as isize;

    // multi-offsets in {-p..p}^d that are lexicographically >= 0
    let mut offsets: Vec<Vec<isize>> = Vec::new();
    let radix = vec![(2 * p + 1) as usize; d];
    crate::assemble::for_each_multi_index(&radix, |raw| {
        let off: Vec<isize> = raw.iter().map(|&r| r as isize - p).collect();
        if off.iter().copied().find(|&o| o != 0).map_or(true, |first| first > 0) {
            offsets.push(off);
        }
    });

    let mut bands: Vec<Vec<f64>> = Vec::with_capacity(offsets.len());
    for off in &offsets {
        let mut band = vec![0.0; m.n()];
        let mut row_multi = vec![0usize; d];
        for (row, slot) in band.iter_mut().enumerate() {
            // decode the row multi-index
            let mut rem = row;
            for k in (0..d).rev() {
                row_multi[k] = rem % dims[k];
                rem /= dims[k];
            }
            let mut col_multi = vec![0usize; d];
            let mut valid = true;
            for k in 0..d {
                let c = row_multi[k] as isize + off[k];
                if c < 0 || c as usize >= dims[k] {
                    valid = false;
                    break;
                }
                col_multi[k] = c as usize;
            }
            if valid {
                let col = crate::assemble::lin_index(&col_multi, &dims);
                *slot = m.get(row, col);
            }
        }
        bands.push(band);
    }

    let doc = serde_json::json!({
        "n": m.n(),
        "p": m.degree(),
        "d": d,
        "dims": dims,
        "offsets": offsets,
        "bands": bands,
    });
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Rule table JSON with 17-significant-digit node/weight constants,
/// written by hand so the numeric formatting is exact.
pub fn rule_to_json(rule: &WeightedRule) -> String {
    let join = |v: &[f64]| v.iter().map(|&x| fmt_g17(x)).collect::<Vec<_>>().join(", ");
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"kind\": \"{}\",", rule.kind.as_str());
    let _ = writeln!(out, "  \"degree\": {},", rule.degree);
    let _ = writeln!(out, "  \"family\": \"{}\",", rule.family.as_str());
    let _ = writeln!(out, "  \"nodes\": [{}],", join(&rule.nodes));
    let _ = writeln!(out, "  \"weights\": [{}],", join(&rule.weights));
    let _ = writeln!(out, "  \"effective_weights\": [{}],", join(&rule.effective_weights));
    let _ = writeln!(out, "  \"residual_max\": {}", fmt_g17(rule.residual_max));
    out.push('}');
    out.push('\n');
    out
}

/// Counter report: one JSON object per strategy present.
pub fn counter_to_json(counter: &EvalCounter) -> Result<String> {
    let rows: Vec<serde_json::Value> = counter
        .tallies()
        .map(|(s, t)| {
            serde_json::json!({
                "strategy": s.as_str(),
                "value_evals": t.value_evals,
                "deriv_evals": t.deriv_evals,
            })
        })
        .collect();
    Ok(serde_json::to_string_pretty(&rows)?)
}

/// (h, error) CSV of a convergence report.
pub fn convergence_to_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("h,error\n");
    for (h, e) in report.h.iter().zip(&report.errors) {
        let _ = writeln!(out, "{},{}", fmt_g17(*h), fmt_g17(*e));
    }
    out
}

pub fn convergence_to_json(report: &ConvergenceReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

/// (k/N, weighted error, standard error) CSV of the spectrum overlay.
pub fn spectrum_to_csv(report: &SpectrumReport) -> String {
    let mut out = String::from("mode_fraction,error_weighted,error_standard\n");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_g17(row.mode_fraction),
            fmt_g17(row.error_weighted),
            fmt_g17(row.error_standard)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::{
        assemble_standard_gauss, AffineMap, EvalCounter, TensorSpace,
    };
    use crate::oracle::RuleKind;
    use crate::rules::quadratic_mass_rule;

    #[test]
    fn matrix_market_golden_shape() {
        let space = TensorSpace::uniform(2, 1, 4).unwrap();
        let map = AffineMap::identity(1);
        let mut counter = EvalCounter::new();
        let m = assemble_standard_gauss(&space, &map, RuleKind::Mass, &mut counter).unwrap();
        let text = to_matrix_market(&m);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "%%MatrixMarket matrix coordinate real symmetric");
        let header = lines.next().unwrap();
        let parts: Vec<&str> = header.split_whitespace().collect();
        assert_eq!(parts[0], "6");
        assert_eq!(parts[1], "6");
        let nnz: usize = parts[2].parse().unwrap();
        assert_eq!(text.lines().count(), nnz + 2);
        // entries are lower-triangle, 1-based
        for line in text.lines().skip(2) {
            let f: Vec<&str> = line.split_whitespace().collect();
            let r: usize = f[0].parse().unwrap();
            let c: usize = f[1].parse().unwrap();
            assert!(r >= c && c >= 1);
        }
    }

    #[test]
    fn exports_are_deterministic() {
        let space = TensorSpace::uniform(2, 2, 4).unwrap();
        let map = AffineMap::identity(2);
        let mut counter = EvalCounter::new();
        let m = assemble_standard_gauss(&space, &map, RuleKind::Mass, &mut counter).unwrap();
        assert_eq!(to_matrix_market(&m), to_matrix_market(&m));
        assert_eq!(to_band_json(&m).unwrap(), to_band_json(&m).unwrap());
        assert_eq!(counter_to_json(&counter).unwrap(), counter_to_json(&counter).unwrap());
    }

    #[test]
    fn band_json_roundtrips_entries() {
        let space = TensorSpace::uniform(2, 1, 5).unwrap();
        let map = AffineMap::identity(1);
        let mut counter = EvalCounter::new();
        let m = assemble_standard_gauss(&space, &map, RuleKind::Mass, &mut counter).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&to_band_json(&m).unwrap()).unwrap();
        assert_eq!(doc["n"], 7);
        assert_eq!(doc["p"], 2);
        // offset [0] is the diagonal
        let offsets = doc["offsets"].as_array().unwrap();
        let diag_pos = offsets.iter().position(|o| o[0] == 0).unwrap();
        let diag = doc["bands"][diag_pos].as_array().unwrap();
        for (i, v) in diag.iter().enumerate() {
            approx::assert_abs_diff_eq!(v.as_f64().unwrap(), m.get(i, i), epsilon = 0.0);
        }
    }

    #[test]
    fn rule_json_carries_17_digit_constants() {
        let rule = quadratic_mass_rule().unwrap();
        let text = rule_to_json(&rule);
        // 17 significant digits: mantissa with 16 fractional places
        assert!(text.contains(&fmt_g17(rule.nodes[0])));
        let mantissa = fmt_g17(rule.nodes[0]);
        assert_eq!(mantissa.split('e').next().unwrap().len(), 18); // d.dddddddddddddddd
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        let tau1 = parsed["nodes"][0].as_f64().unwrap();
        assert_eq!(tau1, rule.nodes[0]); // lossless round trip
    }
}
