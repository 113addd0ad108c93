//! Row-wise weighted assembly of tensor-product mass and stiffness
//! matrices, the element-wise standard Gauss baseline, and the
//! basis-evaluation counters behind the cost comparison.
//!
//! Evaluation metric: one evaluation is one (quadrature point, basis
//! function) pair actually computed, i.e. the number of tensor-product
//! basis values requested across all quadrature points. With redundant
//! suppression on (the default), pairs whose value is identically zero --
//! a fixed-node rule evaluating at a knot where a basis function starts --
//! are excluded, which is the counting protocol behind the published
//! reduction ratios. Boundary rows of the weighted strategies fall back to
//! per-element standard Gauss and are tallied under the standard key.

use crate::error::{Error, Result};
use crate::oracle::{GaussLegendreTable, RuleKind};
use crate::rules::{RuleFamily, RuleTable};
use crate::spline::SplineSpace;
use std::collections::BTreeMap;

/// Assembly strategy, which is also the counter key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    StandardGauss,
    NcWeighted,
    GaussWeighted,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::StandardGauss => "standard",
            Strategy::NcWeighted => "nc-weighted",
            Strategy::GaussWeighted => "gauss-weighted",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "standard" | "standard-gauss" => Ok(Strategy::StandardGauss),
            "nc-weighted" => Ok(Strategy::NcWeighted),
            "gauss-weighted" => Ok(Strategy::GaussWeighted),
            other => Err(Error::Config(format!("unknown strategy '{other}'"))),
        }
    }
}

impl From<RuleFamily> for Strategy {
    fn from(f: RuleFamily) -> Self {
        match f {
            RuleFamily::GaussWeighted => Strategy::GaussWeighted,
            RuleFamily::NcWeighted => Strategy::NcWeighted,
        }
    }
}

/// Tensor-product spline space; one univariate space per direction, all of
/// the same degree.
#[derive(Debug, Clone)]
pub struct TensorSpace {
    spaces: Vec<SplineSpace>,
}

impl TensorSpace {
    pub fn new(spaces: Vec<SplineSpace>) -> Result<Self> {
        if spaces.is_empty() || spaces.len() > 3 {
            return Err(Error::Config(format!(
                "tensor space supports 1..=3 directions, got {}",
                spaces.len()
            )));
        }
        let p = spaces[0].degree();
        if spaces.iter().any(|s| s.degree() != p) {
            return Err(Error::Config("all directions must share one degree".into()));
        }
        Ok(Self { spaces })
    }

    /// Uniform space with `n_el` elements in each of `d` directions.
    pub fn uniform(degree: usize, d: usize, n_el: usize) -> Result<Self> {
        Self::new((0..d).map(|_| SplineSpace::uniform(degree, n_el)).collect::<Result<_>>()?)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.dim()).collect()
    }

    pub fn num_dofs(&self) -> usize {
        self.spaces.iter().map(|s| s.dim()).product()
    }

    pub fn d(&self) -> usize {
        self.spaces.len()
    }

    pub fn degree(&self) -> usize {
        self.spaces[0].degree()
    }

    pub fn direction(&self, d: usize) -> &SplineSpace {
        &self.spaces[d]
    }

    pub fn directions(&self) -> &[SplineSpace] {
        &self.spaces
    }

    fn all_uniform(&self) -> bool {
        self.spaces.iter().all(|s| s.knots().is_uniform())
    }

    /// Any direction with fewer than p+1 elements has no interior weight.
    fn degenerate(&self) -> bool {
        self.spaces.iter().any(|s| s.num_elements() < s.degree() + 1)
    }
}

/// Diagonal affine geometry map: x = scale .* x_hat + offset.
#[derive(Debug, Clone)]
pub struct AffineMap {
    scales: Vec<f64>,
    offsets: Vec<f64>,
}

impl AffineMap {
    pub fn new(scales: Vec<f64>, offsets: Vec<f64>) -> Result<Self> {
        if scales.len() != offsets.len() || scales.is_empty() {
            return Err(Error::Config("affine map dimension mismatch".into()));
        }
        if scales.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::Config("affine scales must be positive".into()));
        }
        Ok(Self { scales, offsets })
    }

    pub fn identity(d: usize) -> Self {
        Self { scales: vec![1.0; d], offsets: vec![0.0; d] }
    }

    pub fn d(&self) -> usize {
        self.scales.len()
    }

    pub fn scale(&self, d: usize) -> f64 {
        self.scales[d]
    }

    pub fn offset(&self, d: usize) -> f64 {
        self.offsets[d]
    }

    pub fn det_jacobian(&self) -> f64 {
        self.scales.iter().product()
    }
}

// ---------------------------------------------------------------------------
// Sparse symmetric storage with the tensor band stencil
// ---------------------------------------------------------------------------

/// CSR matrix over the tensor-product index set, with the a-priori
/// stencil |i_d - j_d| <= p in every direction.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    n: usize,
    dims: Vec<usize>,
    degree: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

pub(crate) fn lin_index(idx: &[usize], dims: &[usize]) -> usize {
    let mut lin = 0;
    for (i, n) in idx.iter().zip(dims) {
        lin = lin * n + i;
    }
    lin
}

/// Iterate all multi-indices of `dims` in lexicographic (row-major) order.
pub(crate) fn for_each_multi_index<F: FnMut(&[usize])>(dims: &[usize], mut f: F) {
    let d = dims.len();
    let mut idx = vec![0usize; d];
    loop {
        f(&idx);
        let mut k = d;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

impl SparseMatrix {
    /// Zero matrix with the band stencil preallocated.
    pub fn with_stencil(dims: &[usize], degree: usize) -> Self {
        let n: usize = dims.iter().product();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for_each_multi_index(dims, |row| {
            // column ranges per direction, iterated lexicographically so
            // linear column indices come out sorted
            let ranges: Vec<(usize, usize)> = row
                .iter()
                .zip(dims)
                .map(|(&j, &nd)| (j.saturating_sub(degree), (j + degree).min(nd - 1)))
                .collect();
            let span_dims: Vec<usize> = ranges.iter().map(|&(lo, hi)| hi - lo + 1).collect();
            for_each_multi_index(&span_dims, |off| {
                let col: Vec<usize> =
                    off.iter().zip(&ranges).map(|(&o, &(lo, _))| lo + o).collect();
                col_idx.push(lin_index(&col, dims));
            });
            row_ptr.push(col_idx.len());
        });
        let values = vec![0.0; col_idx.len()];
        Self { n, dims: dims.to_vec(), degree, row_ptr, col_idx, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    fn pos(&self, row: usize, col: usize) -> Option<usize> {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        self.col_idx[lo..hi].binary_search(&col).ok().map(|k| lo + k)
    }

    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        let k = self
            .pos(row, col)
            .unwrap_or_else(|| panic!("entry ({row}, {col}) outside the band stencil"));
        self.values[k] += v;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pos(row, col).map_or(0.0, |k| self.values[k])
    }

    /// Entries of one row as (col, value) pairs.
    pub fn row_entries(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        self.col_idx[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    /// All stored entries as (row, col, value).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| self.row_entries(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn row_sum(&self, row: usize) -> f64 {
        self.row_entries(row).map(|(_, v)| v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Largest |A_ij - A_ji|.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (r, c, v) in self.entries() {
            if c > r {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    /// Replace A by (A + A^T)/2.
    pub fn symmetrize(&mut self) {
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                if c > r {
                    if let Some(km) = self.pos(c, r) {
                        let avg = 0.5 * (self.values[k] + self.values[km]);
                        self.values[k] = avg;
                        self.values[km] = avg;
                    }
                }
            }
        }
    }

    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut worst = 0.0f64;
        for (r, c, v) in self.entries() {
            worst = worst.max((v - other.get(r, c)).abs());
        }
        for (r, c, v) in other.entries() {
            worst = worst.max((v - self.get(r, c)).abs());
        }
        worst
    }

    /// Dense copy of the rows/columns in `keep` (in the given order).
    pub fn to_dense_selected(&self, keep: &[usize]) -> nalgebra::DMatrix<f64> {
        let mut inv = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            inv[old] = new;
        }
        let mut dense = nalgebra::DMatrix::zeros(keep.len(), keep.len());
        for (new_r, &old_r) in keep.iter().enumerate() {
            for (c, v) in self.row_entries(old_r) {
                if inv[c] != usize::MAX {
                    dense[(new_r, inv[c])] = v;
                }
            }
        }
        dense
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let all: Vec<usize> = (0..self.n).collect();
        self.to_dense_selected(&all)
    }
}

// ---------------------------------------------------------------------------
// Evaluation counters
// ---------------------------------------------------------------------------

/// Per-strategy tally of basis evaluations at quadrature points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub value_evals: u64,
    pub deriv_evals: u64,
}

impl Tally {
    pub fn total(&self) -> u64 {
        self.value_evals + self.deriv_evals
    }
}

/// Monotone evaluation tallies keyed by strategy.
#[derive(Debug, Clone)]
pub struct EvalCounter {
    /// When set (default), evaluations that are identically zero are not
    /// counted; clearing it counts the full node-times-window grid.
    pub suppress_redundant: bool,
    tallies: BTreeMap<Strategy, Tally>,
}

impl Default for EvalCounter {
    fn default() -> Self {
        Self::new()
    }
}

impl EvalCounter {
    pub fn new() -> Self {
        Self { suppress_redundant: true, tallies: BTreeMap::new() }
    }

    pub fn reset(&mut self) {
        self.tallies.clear();
    }

    fn add_value(&mut self, s: Strategy, n: u64) {
        self.tallies.entry(s).or_default().value_evals += n;
    }

    fn add_deriv(&mut self, s: Strategy, n: u64) {
        self.tallies.entry(s).or_default().deriv_evals += n;
    }

    pub fn tally(&self, s: Strategy) -> Tally {
        self.tallies.get(&s).copied().unwrap_or_default()
    }

    pub fn tallies(&self) -> impl Iterator<Item = (Strategy, Tally)> + '_ {
        self.tallies.iter().map(|(&s, &t)| (s, t))
    }
}

/// Ratios of total evaluation counts relative to the Gaussian weighted
/// strategy: (standard / gauss-weighted, nc-weighted / gauss-weighted).
/// The counter must hold tallies for all three strategies.
pub fn count_ratio(counter: &EvalCounter) -> Result<(f64, f64)> {
    let get = |s: Strategy| -> Result<u64> {
        let t = counter.tally(s).total();
        if t == 0 {
            return Err(Error::EmptyCounter(s.as_str().into()));
        }
        Ok(t)
    };
    let std = get(Strategy::StandardGauss)? as f64;
    let nc = get(Strategy::NcWeighted)? as f64;
    let wg = get(Strategy::GaussWeighted)? as f64;
    Ok((std / wg, nc / wg))
}

// ---------------------------------------------------------------------------
// Row-wise weighted assembly
// ---------------------------------------------------------------------------

struct RowFactor {
    /// factor[o] for window offset o (i_d = j_d - p + o).
    values: Vec<f64>,
    /// counted (node, function) pairs for this rule application.
    evals: u64,
}

/// Univariate rule application for row weight `j` of one direction. The
/// rule is in cardinal coordinates; nodes are split into (element, local)
/// pairs so the evaluation stays at full precision on fine meshes.
/// Mass factors are integrals (scale h); stiffness factors combine
/// physical derivatives with the h-invariant effective weights.
fn univariate_factor(
    space: &SplineSpace,
    j: usize,
    rule: &crate::rules::WeightedRule,
    h: f64,
    kind: RuleKind,
    suppress: bool,
) -> RowFactor {
    let p = space.degree();
    let window = 2 * p + 1;
    let first = j - p;
    let mut values = vec![0.0; window];
    let mut evals = 0u64;
    for (&tau, &eff) in rule.nodes.iter().zip(&rule.effective_weights) {
        // cardinal node -> (element of the support, local coordinate);
        // integer nodes sit on knots and open the right element
        let fe = tau.floor();
        let t = tau - fe;
        let e = first + fe as usize;
        let span = match kind {
            RuleKind::Mass => space.eval_span_basis_at(e, t),
            RuleKind::Stiffness => space.eval_span_deriv_at(e, t),
        };
        let scale = match kind {
            RuleKind::Mass => h * eff,
            RuleKind::Stiffness => eff,
        };
        for (k, &v) in span.values.iter().enumerate() {
            let i = span.first + k;
            if v != 0.0 {
                values[i - first] += scale * v;
                evals += 1;
            } else if !suppress {
                evals += 1;
            }
        }
        if !suppress {
            // nominal protocol counts the whole interaction window per node
            evals += (window - span.values.len()) as u64;
        }
    }
    RowFactor { values, evals }
}

fn rule_for<'t>(table: &'t RuleTable, kind: RuleKind) -> &'t crate::rules::WeightedRule {
    match kind {
        RuleKind::Mass => &table.mass,
        RuleKind::Stiffness => &table.stiffness,
    }
}

/// Exact spacing for uniform vectors; breakpoint difference otherwise.
fn element_width(sp: &SplineSpace, e: usize) -> f64 {
    match sp.knots().spacing() {
        Ok(h) => h,
        Err(_) => {
            let bp = sp.knots().breakpoints();
            bp[e + 1] - bp[e]
        }
    }
}

fn check_weighted_preconditions(
    space: &TensorSpace,
    map: &AffineMap,
    rules: &RuleTable,
) -> Result<()> {
    if !space.all_uniform() {
        return Err(Error::NonUniformSpace);
    }
    if map.d() != space.d() {
        return Err(Error::Config("map dimension does not match space".into()));
    }
    if rules.degree != space.degree() {
        return Err(Error::MissingRule { degree: space.degree(), kind: "mass+stiffness".into() });
    }
    Ok(())
}

/// Per-element standard Gauss contribution of one row (boundary fallback).
fn boundary_row(
    space: &TensorSpace,
    map: &AffineMap,
    kind: RuleKind,
    row: &[usize],
    matrix: &mut SparseMatrix,
    counter: &mut EvalCounter,
) -> Result<()> {
    let d = space.d();
    let p = space.degree();
    let gl = GaussLegendreTable::new(p + 1)?;
    let det_j = map.det_jacobian();
    let dims = space.dims();
    let m = gl.len();
    let row_lin = lin_index(row, &dims);

    let supports: Vec<_> =
        (0..d).map(|k| space.direction(k).support(row[k])).collect::<Result<Vec<_>>>()?;
    let el_dims: Vec<usize> = supports.iter().map(|s| s.num_elements()).collect();

    let mut failure: Option<Error> = None;
    for_each_multi_index(&el_dims, |eoff| {
        if failure.is_some() {
            return;
        }
        let elems: Vec<usize> =
            eoff.iter().zip(&supports).map(|(&o, s)| s.first_element + o).collect();
        let result = (|| -> Result<()> {
            let mut vals: Vec<Vec<crate::spline::SpanValues>> = Vec::with_capacity(d);
            let mut ders: Vec<Vec<crate::spline::SpanValues>> = Vec::with_capacity(d);
            let mut qw: Vec<Vec<f64>> = Vec::with_capacity(d);
            for k in 0..d {
                let sp = space.direction(k);
                let width = element_width(sp, elems[k]);
                let mut vk = Vec::with_capacity(m);
                let mut dk = Vec::with_capacity(m);
                let mut wk = Vec::with_capacity(m);
                for (t, w) in gl.points() {
                    vk.push(sp.eval_span_basis_at(elems[k], t));
                    if kind == RuleKind::Stiffness {
                        dk.push(sp.eval_span_deriv_at(elems[k], t));
                    }
                    wk.push(w * width);
                }
                vals.push(vk);
                ders.push(dk);
                qw.push(wk);
            }

            let mut row_local = vec![0usize; d];
            for k in 0..d {
                let first = vals[k][0].first;
                if row[k] < first || row[k] > first + p {
                    return Ok(()); // row not alive on this element
                }
                row_local[k] = row[k] - first;
            }

            let point_dims = vec![m; d];
            let fn_dims = vec![p + 1; d];
            let requests_per_point = (p + 1).pow(d as u32) as u64;
            for_each_multi_index(&point_dims, |g| {
                match kind {
                    RuleKind::Mass => counter.add_value(Strategy::StandardGauss, requests_per_point),
                    RuleKind::Stiffness => {
                        counter.add_deriv(Strategy::StandardGauss, requests_per_point)
                    }
                }
                let mut wq = det_j;
                for k in 0..d {
                    wq *= qw[k][g[k]];
                }
                for_each_multi_index(&fn_dims, |loc| {
                    let mut col = vec![0usize; d];
                    for k in 0..d {
                        col[k] = vals[k][g[k]].first + loc[k];
                    }
                    let col_lin = lin_index(&col, &dims);
                    let contrib = match kind {
                        RuleKind::Mass => {
                            let mut prod = wq;
                            for k in 0..d {
                                prod *= vals[k][g[k]].values[row_local[k]]
                                    * vals[k][g[k]].values[loc[k]];
                            }
                            prod
                        }
                        RuleKind::Stiffness => {
                            let mut total = 0.0;
                            for dir in 0..d {
                                let mut prod = wq / (map.scale(dir) * map.scale(dir));
                                for k in 0..d {
                                    prod *= if k == dir {
                                        ders[k][g[k]].values[row_local[k]]
                                            * ders[k][g[k]].values[loc[k]]
                                    } else {
                                        vals[k][g[k]].values[row_local[k]]
                                            * vals[k][g[k]].values[loc[k]]
                                    };
                                }
                                total += prod;
                            }
                            total
                        }
                    };
                    if contrib != 0.0 {
                        matrix.add(row_lin, col_lin, contrib);
                    }
                });
            });
            Ok(())
        })();
        if let Err(e) = result {
            failure = Some(e);
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn assemble_rowwise(
    space: &TensorSpace,
    map: &AffineMap,
    kind: RuleKind,
    rules: &RuleTable,
    counter: &mut EvalCounter,
) -> Result<SparseMatrix> {
    check_weighted_preconditions(space, map, rules)?;
    if space.degenerate() {
        log::warn!(
            "a direction has fewer than p+1 elements, so no interior weights exist; \
             assembling everything with standard Gauss"
        );
        return assemble_standard_gauss(space, map, kind, counter);
    }

    let d = space.d();
    let p = space.degree();
    let dims = space.dims();
    let det_j = map.det_jacobian();
    let strategy = Strategy::from(rules.family);
    let mut matrix = SparseMatrix::with_stencil(&dims, p);
    let spacings: Vec<f64> = (0..d)
        .map(|k| space.direction(k).knots().spacing())
        .collect::<Result<_>>()?;

    let mut failure: Option<Error> = None;
    for_each_multi_index(&dims, |row| {
        if failure.is_some() {
            return;
        }
        let interior = (0..d).all(|k| space.direction(k).is_weight_interior(row[k]));
        if !interior {
            if let Err(e) = boundary_row(space, map, kind, row, &mut matrix, counter) {
                failure = Some(e);
            }
            return;
        }

        let result = (|| -> Result<()> {
            let mut mass_factors = Vec::with_capacity(d);
            for k in 0..d {
                mass_factors.push(univariate_factor(
                    space.direction(k),
                    row[k],
                    rule_for(rules, RuleKind::Mass),
                    spacings[k],
                    RuleKind::Mass,
                    counter.suppress_redundant,
                ));
            }
            let row_lin = lin_index(row, &dims);
            let window = 2 * p + 1;
            let win_dims = vec![window; d];

            match kind {
                RuleKind::Mass => {
                    let mut requests = 1u64;
                    for f in &mass_factors {
                        requests *= f.evals;
                    }
                    counter.add_value(strategy, requests);
                    for_each_multi_index(&win_dims, |off| {
                        let mut col = vec![0usize; d];
                        let mut v = det_j;
                        for k in 0..d {
                            col[k] = row[k] - p + off[k];
                            v *= mass_factors[k].values[off[k]];
                        }
                        if v != 0.0 {
                            matrix.add(row_lin, lin_index(&col, &dims), v);
                        }
                    });
                }
                RuleKind::Stiffness => {
                    let mut stiff_factors = Vec::with_capacity(d);
                    for k in 0..d {
                        stiff_factors.push(univariate_factor(
                            space.direction(k),
                            row[k],
                            rule_for(rules, RuleKind::Stiffness),
                            spacings[k],
                            RuleKind::Stiffness,
                            counter.suppress_redundant,
                        ));
                    }
                    for dir in 0..d {
                        let mut requests = stiff_factors[dir].evals;
                        for (k, f) in mass_factors.iter().enumerate() {
                            if k != dir {
                                requests *= f.evals;
                            }
                        }
                        counter.add_deriv(strategy, requests);
                    }
                    for_each_multi_index(&win_dims, |off| {
                        let mut col = vec![0usize; d];
                        for k in 0..d {
                            col[k] = row[k] - p + off[k];
                        }
                        let mut total = 0.0;
                        for dir in 0..d {
                            let mut v = det_j / (map.scale(dir) * map.scale(dir));
                            for k in 0..d {
                                v *= if k == dir {
                                    stiff_factors[k].values[off[k]]
                                } else {
                                    mass_factors[k].values[off[k]]
                                };
                            }
                            total += v;
                        }
                        if total != 0.0 {
                            matrix.add(row_lin, lin_index(&col, &dims), total);
                        }
                    });
                }
            }
            Ok(())
        })();
        if let Err(e) = result {
            failure = Some(e);
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }

    finalize_symmetry(&mut matrix)?;
    Ok(matrix)
}

fn finalize_symmetry(matrix: &mut SparseMatrix) -> Result<()> {
    let defect = matrix.symmetry_defect();
    let scale = matrix.max_abs().max(1.0);
    if defect > 1e-12 * scale {
        return Err(Error::LinearSolve(format!(
            "assembled matrix symmetry defect {defect:.3e} exceeds tolerance"
        )));
    }
    matrix.symmetrize();
    Ok(())
}

/// Row-wise weighted mass assembly. Interior rows apply the tensor product
/// of the univariate mass rules for their weight indices; rows whose weight
/// support touches the boundary fall back to per-element standard Gauss.
pub fn assemble_mass_rowwise(
    space: &TensorSpace,
    map: &AffineMap,
    rules: &RuleTable,
    counter: &mut EvalCounter,
) -> Result<SparseMatrix> {
    assemble_rowwise(space, map, RuleKind::Mass, rules, counter)
}

/// Row-wise weighted stiffness assembly: direction term `k` pairs the
/// stiffness rule in direction `k` with mass rules elsewhere, scaled by
/// det(J)/s_k^2.
pub fn assemble_stiffness_rowwise(
    space: &TensorSpace,
    map: &AffineMap,
    rules: &RuleTable,
    counter: &mut EvalCounter,
) -> Result<SparseMatrix> {
    assemble_rowwise(space, map, RuleKind::Stiffness, rules, counter)
}

/// Element-wise standard Gauss assembly with (p+1)^d points per element;
/// exact for affine maps and the second independent ground truth.
pub fn assemble_standard_gauss(
    space: &TensorSpace,
    map: &AffineMap,
    kind: RuleKind,
    counter: &mut EvalCounter,
) -> Result<SparseMatrix> {
    if map.d() != space.d() {
        return Err(Error::Config("map dimension does not match space".into()));
    }
    let d = space.d();
    let p = space.degree();
    let dims = space.dims();
    let det_j = map.det_jacobian();
    let gl = GaussLegendreTable::new(p + 1)?;
    let m = gl.len();
    let mut matrix = SparseMatrix::with_stencil(&dims, p);

    let el_dims: Vec<usize> = (0..d).map(|k| space.direction(k).num_elements()).collect();
    let mut failure: Option<Error> = None;
    for_each_multi_index(&el_dims, |elems| {
        if failure.is_some() {
            return;
        }
        let result = (|| -> Result<()> {
            let mut vals: Vec<Vec<crate::spline::SpanValues>> = Vec::with_capacity(d);
            let mut ders: Vec<Vec<crate::spline::SpanValues>> = Vec::with_capacity(d);
            let mut qw: Vec<Vec<f64>> = Vec::with_capacity(d);
            for k in 0..d {
                let sp = space.direction(k);
                let width = element_width(sp, elems[k]);
                let mut vk = Vec::with_capacity(m);
                let mut dk = Vec::with_capacity(m);
                let mut wk = Vec::with_capacity(m);
                for (t, w) in gl.points() {
                    vk.push(sp.eval_span_basis_at(elems[k], t));
                    if kind == RuleKind::Stiffness {
                        dk.push(sp.eval_span_deriv_at(elems[k], t));
                    }
                    wk.push(w * width);
                }
                vals.push(vk);
                ders.push(dk);
                qw.push(wk);
            }

            let point_dims = vec![m; d];
            let fn_dims = vec![p + 1; d];
            let requests_per_point = (p + 1).pow(d as u32) as u64;
            for_each_multi_index(&point_dims, |g| {
                match kind {
                    RuleKind::Mass => {
                        counter.add_value(Strategy::StandardGauss, requests_per_point)
                    }
                    RuleKind::Stiffness => {
                        counter.add_deriv(Strategy::StandardGauss, requests_per_point)
                    }
                }
                let mut wq = det_j;
                for k in 0..d {
                    wq *= qw[k][g[k]];
                }
                for_each_multi_index(&fn_dims, |ra| {
                    let row: Vec<usize> = (0..d).map(|k| vals[k][g[k]].first + ra[k]).collect();
                    let row_lin = lin_index(&row, &dims);
                    for_each_multi_index(&fn_dims, |ca| {
                        let col: Vec<usize> =
                            (0..d).map(|k| vals[k][g[k]].first + ca[k]).collect();
                        let col_lin = lin_index(&col, &dims);
                        let contrib = match kind {
                            RuleKind::Mass => {
                                let mut prod = wq;
                                for k in 0..d {
                                    prod *= vals[k][g[k]].values[ra[k]]
                                        * vals[k][g[k]].values[ca[k]];
                                }
                                prod
                            }
                            RuleKind::Stiffness => {
                                let mut total = 0.0;
                                for dir in 0..d {
                                    let mut prod = wq / (map.scale(dir) * map.scale(dir));
                                    for k in 0..d {
                                        prod *= if k == dir {
                                            ders[k][g[k]].values[ra[k]]
                                                * ders[k][g[k]].values[ca[k]]
                                        } else {
                                            vals[k][g[k]].values[ra[k]]
                                                * vals[k][g[k]].values[ca[k]]
                                        };
                                    }
                                    total += prod;
                                }
                                total
                            }
                        };
                        if contrib != 0.0 {
                            matrix.add(row_lin, col_lin, contrib);
                        }
                    });
                });
            });
            Ok(())
        })();
        if let Err(e) = result {
            failure = Some(e);
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }

    finalize_symmetry(&mut matrix)?;
    Ok(matrix)
}

/// Load vector b_j = integral of f_hat B_j det(J), via the mass-kind rules
/// row by row (standard Gauss on boundary rows). Exact whenever the
/// pull-back of `f` lies in the spline space on the same mesh.
pub fn assemble_load<F: Fn(&[f64]) -> f64>(
    space: &TensorSpace,
    map: &AffineMap,
    f: F,
    rules: &RuleTable,
) -> Result<Vec<f64>> {
    check_weighted_preconditions(space, map, rules)?;
    let d = space.d();
    let p = space.degree();
    let dims = space.dims();
    let det_j = map.det_jacobian();
    let gl = GaussLegendreTable::new(p + 2)?;
    let pts: Vec<(f64, f64)> = gl.points().collect();
    let mut out = vec![0.0; space.num_dofs()];
    let degenerate = space.degenerate();

    let mut failure: Option<Error> = None;
    for_each_multi_index(&dims, |row| {
        if failure.is_some() {
            return;
        }
        let row_lin = lin_index(row, &dims);
        let interior =
            !degenerate && (0..d).all(|k| space.direction(k).is_weight_interior(row[k]));
        let result = (|| -> Result<()> {
            if interior {
                let rule = rule_for(rules, RuleKind::Mass);
                let mut spacings = vec![0.0; d];
                for k in 0..d {
                    spacings[k] = space.direction(k).knots().spacing()?;
                }
                let node_dims = vec![rule.nodes.len(); d];
                let mut total = 0.0;
                for_each_multi_index(&node_dims, |g| {
                    let mut x = vec![0.0; d];
                    let mut w = det_j;
                    for k in 0..d {
                        let tau = rule.nodes[g[k]];
                        x[k] = ((row[k] - p) as f64 + tau) * spacings[k];
                        w *= spacings[k] * rule.effective_weights[g[k]];
                    }
                    total += w * f(&x);
                });
                out[row_lin] = total;
            } else {
                let supports: Vec<_> = (0..d)
                    .map(|k| space.direction(k).support(row[k]))
                    .collect::<Result<Vec<_>>>()?;
                let el_dims: Vec<usize> = supports.iter().map(|s| s.num_elements()).collect();
                let mut total = 0.0;
                for_each_multi_index(&el_dims, |eoff| {
                    let point_dims = vec![pts.len(); d];
                    for_each_multi_index(&point_dims, |g| {
                        let mut w = det_j;
                        let mut x = vec![0.0; d];
                        let mut bj = 1.0;
                        for k in 0..d {
                            let sp = space.direction(k);
                            let bp = sp.knots().breakpoints();
                            let e = supports[k].first_element + eoff[k];
                            let width = element_width(sp, e);
                            let (t, wg) = pts[g[k]];
                            x[k] = bp[e] + width * t;
                            w *= wg * width;
                            bj *= sp.eval_span_basis_at(e, t).get(row[k]);
                        }
                        total += w * bj * f(&x);
                    });
                });
                out[row_lin] = total;
            }
            Ok(())
        })();
        if let Err(e) = result {
            failure = Some(e);
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Run all three strategies for `kind` on the same problem and return
/// (standard/gauss-weighted, nc-weighted/gauss-weighted) evaluation ratios
/// together with the merged counter.
pub fn measure_count_ratios(
    space: &TensorSpace,
    map: &AffineMap,
    kind: RuleKind,
) -> Result<(f64, f64, EvalCounter)> {
    let p = space.degree();
    let gauss = crate::rules::rule_table(p, RuleFamily::GaussWeighted)?;
    let nc = crate::rules::rule_table(p, RuleFamily::NcWeighted)?;
    let mut counter = EvalCounter::new();
    let mut wg_counter = EvalCounter::new();
    let mut nc_counter = EvalCounter::new();
    match kind {
        RuleKind::Mass => {
            assemble_standard_gauss(space, map, kind, &mut counter)?;
            assemble_mass_rowwise(space, map, &gauss, &mut wg_counter)?;
            assemble_mass_rowwise(space, map, &nc, &mut nc_counter)?;
        }
        RuleKind::Stiffness => {
            assemble_standard_gauss(space, map, kind, &mut counter)?;
            assemble_stiffness_rowwise(space, map, &gauss, &mut wg_counter)?;
            assemble_stiffness_rowwise(space, map, &nc, &mut nc_counter)?;
        }
    }
    // merge per-strategy keys; the weighted runs' boundary fallback work
    // stays under their own standard tallies and is not part of the ratio
    counter.tallies.insert(Strategy::GaussWeighted, wg_counter.tally(Strategy::GaussWeighted));
    counter.tallies.insert(Strategy::NcWeighted, nc_counter.tally(Strategy::NcWeighted));
    let (std_ratio, nc_ratio) = count_ratio(&counter)?;
    Ok((std_ratio, nc_ratio, counter))
}
