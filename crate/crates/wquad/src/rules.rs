//! Weighted quadrature rules for uniform B-spline mass and stiffness terms.
//!
//! A rule for weight function W (an interior basis function, or its
//! derivative) holds nodes tau_k and weights omega_k such that
//!
//! ```text
//! integral( D_i(x) W(x) dx ) = sum_k omega_k D_i(tau_k) W(tau_k)
//! ```
//!
//! for every basis function (mass) or basis derivative (stiffness) D_i that
//! interacts with the weight. Gaussian rules carry p+1 nodes, one per
//! element of the weight's support; the Newton-Cotes baseline fixes its
//! nodes at the knots and element midpoints and solves a linear system for
//! the weights.
//!
//! The nonlinear Gaussian systems are solved on the cardinal patch with a
//! damped, bracket-projected Newton iteration over a deterministic start
//! grid. The residual uses the bracket-frozen polynomial pieces, so an
//! unconstrained iteration can converge to algebraic roots whose nodes
//! leave their elements; the bracket filter rejects those.

use crate::error::{Error, Result};
use crate::oracle::{cardinal_moments, exact_moment_vector, RuleKind};
use crate::spline::{CardinalPatch, SplineSpace};
use nalgebra::{DMatrix, DVector};

/// Which weight function a rule belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightId {
    /// Interior cardinal weight; nodes live on the integer-knot support [0, p+1].
    InteriorCardinal,
    /// Weight B_j of a concrete space; nodes live in the space's coordinates.
    SpaceIndex(usize),
}

/// Gaussian rules with free nodes, or the fixed-node Newton-Cotes baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleFamily {
    GaussWeighted,
    NcWeighted,
}

impl RuleFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleFamily::GaussWeighted => "gauss-weighted",
            RuleFamily::NcWeighted => "nc-weighted",
        }
    }
}

/// A weighted quadrature rule.
///
/// `weights` are the omega_k of the product convention above;
/// `effective_weights` are omega_k * W(tau_k), the values assembly applies
/// to plain basis (or derivative) evaluations. Boundary Newton-Cotes rules
/// are solved directly in effective form; there `weights` entries at nodes
/// where W vanishes are zero placeholders.
#[derive(Debug, Clone)]
pub struct WeightedRule {
    pub kind: RuleKind,
    pub degree: usize,
    pub family: RuleFamily,
    pub weight: WeightId,
    /// Weight-support interval in the rule's own coordinates.
    pub support: (f64, f64),
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub effective_weights: Vec<f64>,
    /// Max exactness residual over all interacting constraints.
    pub residual_max: f64,
}

impl WeightedRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Rule nodes/effective weights mapped to a physical row support
/// `[offset, offset + h*(p+1)]` of a uniform mesh with spacing `h`.
///
/// Mass effective weights scale by h; stiffness effective weights are
/// h-invariant because the physical weight derivative carries a 1/h that
/// cancels the node-map Jacobian (the resulting row then scales as 1/h
/// through the evaluated derivative factors).
#[derive(Debug, Clone)]
pub struct ScaledRule {
    pub nodes: Vec<f64>,
    pub effective_weights: Vec<f64>,
}

impl WeightedRule {
    pub fn scaled_to(&self, h: f64, offset: f64) -> ScaledRule {
        let nodes = self.nodes.iter().map(|&t| offset + h * t).collect();
        let eff = match self.kind {
            RuleKind::Mass => self.effective_weights.iter().map(|&w| h * w).collect(),
            RuleKind::Stiffness => self.effective_weights.clone(),
        };
        ScaledRule { nodes, effective_weights: eff }
    }
}

/// Exactness residual of a cardinal-coordinate rule against the oracle
/// moments, using true piecewise evaluation (nodes must lie inside the
/// support).
pub fn cardinal_exactness_residual(rule: &WeightedRule) -> Result<f64> {
    let patch = CardinalPatch::new(rule.degree)?;
    let moments = cardinal_moments(rule.degree, rule.kind)?;
    let p = rule.degree as isize;
    let mut worst = 0.0f64;
    for (c, s) in (-p..=p).enumerate() {
        let mut sum = 0.0;
        for (&x, &eff) in rule.nodes.iter().zip(&rule.effective_weights) {
            let d = match rule.kind {
                RuleKind::Mass => patch.value(x - s as f64),
                RuleKind::Stiffness => patch.deriv(x - s as f64),
            };
            sum += eff * d;
        }
        worst = worst.max((sum - moments[c]).abs());
    }
    Ok(worst)
}

/// Exactness residual of a space-coordinate rule against the oracle
/// moments of its weight index.
pub fn space_exactness_residual(rule: &WeightedRule, space: &SplineSpace) -> Result<f64> {
    let j = match rule.weight {
        WeightId::SpaceIndex(j) => j,
        WeightId::InteriorCardinal => {
            return Err(Error::Config("cardinal rule passed to space residual check".into()))
        }
    };
    let moments = exact_moment_vector(space, j, rule.kind)?;
    let mut worst = 0.0f64;
    for (c, i) in space.interacting_indices(j)?.into_iter().enumerate() {
        let mut sum = 0.0;
        for (&x, &eff) in rule.nodes.iter().zip(&rule.effective_weights) {
            let d = match rule.kind {
                RuleKind::Mass => space.eval_basis(i, x)?,
                RuleKind::Stiffness => space.eval_deriv(i, x)?,
            };
            sum += eff * d;
        }
        worst = worst.max((sum - moments[c]).abs());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Nonlinear exactness systems (cardinal, symmetry-reduced)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum NodeSource {
    /// Reduced unknown index.
    Free(usize),
    /// Mirror of a reduced unknown: (p+1) - u.
    Mirror(usize),
    /// Fixed coordinate (the middle node of an odd rule).
    Fixed(f64),
}

#[derive(Debug, Clone, Copy)]
enum WeightSource {
    Free(usize),
    Fixed(f64),
}

/// Symmetry-reduced exactness system for an interior cardinal weight.
///
/// The residual map is evaluated on bracket-frozen polynomial pieces: node
/// k always uses the piece of its assigned element, extended polynomially
/// outside it. That reproduces the algebraic systems of the quadratic and
/// cubic derivations exactly, including their spurious roots.
#[derive(Debug, Clone)]
pub struct ResidualSystem {
    kind: RuleKind,
    degree: usize,
    patch: CardinalPatch,
    moments: Vec<f64>,
    nodes: Vec<(NodeSource, usize)>, // (source, frozen element)
    weights: Vec<WeightSource>,
    n_unknowns: usize,
}

impl ResidualSystem {
    /// System for the interior cardinal weight with oracle moments.
    pub fn cardinal(kind: RuleKind, degree: usize) -> Result<Self> {
        Self::cardinal_with_fixed_weight(kind, degree, None)
    }

    /// Cubic stiffness family member: the first/last weight is the free
    /// parameter of the one-parameter family and stays fixed.
    pub fn cardinal_with_fixed_weight(
        kind: RuleKind,
        degree: usize,
        fixed_outer_weight: Option<f64>,
    ) -> Result<Self> {
        let moments = cardinal_moments(degree, kind)?;
        Self::with_moments(kind, degree, moments, fixed_outer_weight)
    }

    /// Same layout with explicit (possibly perturbed) moments.
    pub fn with_moments(
        kind: RuleKind,
        degree: usize,
        moments: Vec<f64>,
        fixed_outer_weight: Option<f64>,
    ) -> Result<Self> {
        if moments.len() != 2 * degree + 1 {
            return Err(Error::Config(format!(
                "expected {} moments, got {}",
                2 * degree + 1,
                moments.len()
            )));
        }
        let patch = CardinalPatch::new(degree)?;
        let (nodes, weights, n_unknowns) = match (kind, degree, fixed_outer_weight) {
            (RuleKind::Mass, 2, None) => (
                vec![(NodeSource::Free(0), 0), (NodeSource::Fixed(1.5), 1), (NodeSource::Mirror(0), 2)],
                vec![WeightSource::Free(1), WeightSource::Free(2), WeightSource::Free(1)],
                3,
            ),
            (RuleKind::Mass, 3, None) => (
                vec![
                    (NodeSource::Free(0), 0),
                    (NodeSource::Free(1), 1),
                    (NodeSource::Mirror(1), 2),
                    (NodeSource::Mirror(0), 3),
                ],
                vec![
                    WeightSource::Free(2),
                    WeightSource::Free(3),
                    WeightSource::Free(3),
                    WeightSource::Free(2),
                ],
                4,
            ),
            // The middle stiffness weight multiplies W(1.5) = 0 in every
            // constraint, so it is not an unknown; it is pinned to the
            // shared value afterwards.
            (RuleKind::Stiffness, 2, None) => (
                vec![(NodeSource::Free(0), 0), (NodeSource::Fixed(1.5), 1), (NodeSource::Mirror(0), 2)],
                vec![WeightSource::Free(1), WeightSource::Free(1), WeightSource::Free(1)],
                2,
            ),
            (RuleKind::Stiffness, 3, Some(w1)) => (
                vec![
                    (NodeSource::Free(0), 0),
                    (NodeSource::Free(1), 1),
                    (NodeSource::Mirror(1), 2),
                    (NodeSource::Mirror(0), 3),
                ],
                vec![
                    WeightSource::Fixed(w1),
                    WeightSource::Free(2),
                    WeightSource::Free(2),
                    WeightSource::Fixed(w1),
                ],
                3,
            ),
            (RuleKind::Stiffness, 3, None) => {
                return Err(Error::Config(
                    "cubic stiffness system needs the family parameter omega1".into(),
                ))
            }
            _ => return Err(Error::UnsupportedDegree(degree)),
        };
        Ok(Self { kind, degree, patch, moments, nodes, weights, n_unknowns })
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_unknowns(&self) -> usize {
        self.n_unknowns
    }

    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    /// Expand reduced unknowns into full node and weight vectors.
    pub fn expand(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let width = (self.degree + 1) as f64;
        let nodes = self
            .nodes
            .iter()
            .map(|&(src, _)| match src {
                NodeSource::Free(a) => u[a],
                NodeSource::Mirror(a) => width - u[a],
                NodeSource::Fixed(v) => v,
            })
            .collect();
        let weights = self
            .weights
            .iter()
            .map(|&src| match src {
                WeightSource::Free(a) => u[a],
                WeightSource::Fixed(v) => v,
            })
            .collect();
        (nodes, weights)
    }

    fn basis_frozen(&self, shift: isize, e: usize, x: f64) -> f64 {
        match self.kind {
            RuleKind::Mass => self.patch.shifted_piece_value(shift, e as isize, x),
            RuleKind::Stiffness => self.patch.shifted_piece_deriv(shift, e as isize, x),
        }
    }

    fn basis_frozen_deriv(&self, shift: isize, e: usize, x: f64) -> f64 {
        match self.kind {
            RuleKind::Mass => self.patch.shifted_piece_deriv(shift, e as isize, x),
            RuleKind::Stiffness => self.patch.shifted_piece_deriv2(shift, e as isize, x),
        }
    }

    /// Residual of constraint `c` (shift s = c - p) on frozen pieces.
    fn constraint(&self, c: usize, nodes: &[f64], weights: &[f64]) -> f64 {
        let s = c as isize - self.degree as isize;
        let mut sum = 0.0;
        for (k, &(_, e)) in self.nodes.iter().enumerate() {
            let x = nodes[k];
            sum += weights[k] * self.basis_frozen(s, e, x) * self.basis_frozen(0, e, x);
        }
        sum - self.moments[c]
    }

    /// All 2p+1 constraint residuals on frozen pieces.
    pub fn full_residual(&self, u: &[f64]) -> Vec<f64> {
        let (nodes, weights) = self.expand(u);
        (0..self.moments.len()).map(|c| self.constraint(c, &nodes, &weights)).collect()
    }

    /// The square reduced residual: the first `n_unknowns` constraints
    /// (shifts -p, -p+1, ...); the mirrored and dependent constraints are
    /// implied by symmetry.
    pub fn reduced_residual(&self, u: &[f64]) -> Vec<f64> {
        let (nodes, weights) = self.expand(u);
        (0..self.n_unknowns).map(|c| self.constraint(c, &nodes, &weights)).collect()
    }

    /// Analytic Jacobian of the reduced residual.
    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let (nodes, weights) = self.expand(u);
        let n = self.n_unknowns;
        let mut jac = DMatrix::zeros(n, n);
        for c in 0..n {
            let s = c as isize - self.degree as isize;
            for (k, &(node_src, e)) in self.nodes.iter().enumerate() {
                let x = nodes[k];
                let w = weights[k];
                let bi = self.basis_frozen(s, e, x);
                let bj = self.basis_frozen(0, e, x);
                // d/dx of the product, frozen pieces
                let dprod = self.basis_frozen_deriv(s, e, x) * bj + bi * self.basis_frozen_deriv(0, e, x);
                match node_src {
                    NodeSource::Free(a) => jac[(c, a)] += w * dprod,
                    NodeSource::Mirror(a) => jac[(c, a)] -= w * dprod,
                    NodeSource::Fixed(_) => {}
                }
                if let WeightSource::Free(a) = self.weights[k] {
                    jac[(c, a)] += bi * bj;
                }
            }
        }
        jac
    }

    /// Frozen element bracket of node `k`.
    fn bracket(&self, k: usize) -> (f64, f64) {
        let e = self.nodes[k].1 as f64;
        (e, e + 1.0)
    }

    /// Clamp free node unknowns to their element brackets.
    fn project(&self, u: &mut [f64]) {
        for (k, &(src, _)) in self.nodes.iter().enumerate() {
            if let NodeSource::Free(a) = src {
                let (lo, hi) = self.bracket(k);
                u[a] = u[a].clamp(lo, hi);
            }
        }
    }

    /// True when every node sits strictly inside its assigned element and
    /// the node vector is increasing.
    pub fn respects_brackets(&self, u: &[f64]) -> bool {
        let (nodes, _) = self.expand(u);
        for (k, &(_, e)) in self.nodes.iter().enumerate() {
            let (lo, hi) = (e as f64, e as f64 + 1.0);
            if !(nodes[k] > lo && nodes[k] < hi) {
                return false;
            }
        }
        nodes.windows(2).all(|w| w[1] > w[0])
    }

    /// Deterministic start grid: element midpoints offset by
    /// {0, +0.2, -0.2, +0.35, -0.35} element widths, unit weights, in
    /// lexicographic order over the free nodes.
    pub fn default_starts(&self) -> Vec<Vec<f64>> {
        const OFFSETS: [f64; 5] = [0.0, 0.2, -0.2, 0.35, -0.35];
        let free_nodes: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|&(src, e)| match src {
                NodeSource::Free(_) => Some(e),
                _ => None,
            })
            .collect();
        let n_free = free_nodes.len();
        let n_weights = self.n_unknowns - n_free;
        let mut starts = Vec::new();
        let mut combo = vec![0usize; n_free];
        loop {
            let mut u = Vec::with_capacity(self.n_unknowns);
            for (slot, &e) in free_nodes.iter().enumerate() {
                u.push(e as f64 + 0.5 + OFFSETS[combo[slot]]);
            }
            u.extend(std::iter::repeat(1.0).take(n_weights));
            starts.push(u);
            // odometer increment
            let mut slot = n_free;
            loop {
                if slot == 0 {
                    return starts;
                }
                slot -= 1;
                combo[slot] += 1;
                if combo[slot] < OFFSETS.len() {
                    break;
                }
                combo[slot] = 0;
            }
        }
    }

    fn build_rule(&self, u: &[f64], family: RuleFamily) -> WeightedRule {
        let (nodes, weights) = self.expand(u);
        let eff = nodes
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| {
                let wj = match self.kind {
                    RuleKind::Mass => self.patch.value(x),
                    RuleKind::Stiffness => self.patch.deriv(x),
                };
                w * wj
            })
            .collect();
        let residual_max =
            self.full_residual(u).iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
        WeightedRule {
            kind: self.kind,
            degree: self.degree,
            family,
            weight: WeightId::InteriorCardinal,
            support: (0.0, (self.degree + 1) as f64),
            nodes,
            weights,
            effective_weights: eff,
            residual_max,
        }
    }
}

// ---------------------------------------------------------------------------
// Newton solver
// ---------------------------------------------------------------------------

/// Bracketed mode projects iterates into their elements, damps steps by
/// halving, and is the production path. Unconstrained mode takes full
/// Newton steps with no projection; it exists to demonstrate the
/// guess-sensitivity failure mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Bracketed,
    Unconstrained,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub mode: SolveMode,
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub step_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { mode: SolveMode::Bracketed, max_iterations: 100, residual_tol: 1e-13, step_tol: 1e-14 }
    }
}

impl SolverOptions {
    pub fn unconstrained() -> Self {
        Self { mode: SolveMode::Unconstrained, max_iterations: 200, ..Self::default() }
    }
}

/// A converged root that the bracket filter refused.
#[derive(Debug, Clone)]
pub struct RejectedRoot {
    pub start_index: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub residual: f64,
    pub reason: String,
}

/// Outcome of a multi-start solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub rule: Option<WeightedRule>,
    pub rejected: Vec<RejectedRoot>,
    pub best_residual: f64,
    pub accepted_start: Option<usize>,
    pub iterations: usize,
    pub starts_tried: usize,
}

impl SolveReport {
    pub fn into_rule(self) -> Result<WeightedRule> {
        let starts = self.starts_tried;
        let best = self.best_residual;
        self.rule.ok_or(Error::SolverExhausted { best_residual: best, starts })
    }
}

enum StartOutcome {
    Converged { u: Vec<f64>, iterations: usize, residual: f64 },
    Failed { best_residual: f64 },
}

fn newton_from_start(sys: &ResidualSystem, start: &[f64], options: &SolverOptions) -> StartOutcome {
    let n = sys.num_unknowns();
    assert_eq!(start.len(), n, "start vector length must match unknown count");
    let mut u = start.to_vec();
    if options.mode == SolveMode::Bracketed {
        sys.project(&mut u);
    }
    let mut best_residual = f64::INFINITY;
    let mut last_step = f64::INFINITY;
    for it in 0..options.max_iterations {
        let full = sys.full_residual(&u);
        let full_norm = full.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        best_residual = best_residual.min(full_norm);
        if full_norm <= options.residual_tol && last_step <= options.step_tol {
            return StartOutcome::Converged { u, iterations: it, residual: full_norm };
        }
        let reduced = DVector::from_vec(sys.reduced_residual(&u));
        let reduced_norm = reduced.amax();
        let jac = sys.jacobian(&u);
        let step = match jac.lu().solve(&reduced) {
            Some(s) => -s,
            None => return StartOutcome::Failed { best_residual },
        };
        let alpha = match options.mode {
            SolveMode::Unconstrained => 1.0,
            SolveMode::Bracketed => {
                let mut alpha = 1.0;
                let mut accepted = None;
                for _ in 0..30 {
                    let mut trial: Vec<f64> =
                        u.iter().zip(step.iter()).map(|(&x, &d)| x + alpha * d).collect();
                    sys.project(&mut trial);
                    let trial_norm = sys
                        .reduced_residual(&trial)
                        .iter()
                        .fold(0.0f64, |a, r| a.max(r.abs()));
                    if trial_norm < reduced_norm {
                        accepted = Some(alpha);
                        break;
                    }
                    alpha *= 0.5;
                }
                match accepted {
                    Some(a) => a,
                    None => return StartOutcome::Failed { best_residual },
                }
            }
        };
        last_step = 0.0f64;
        for (x, d) in u.iter_mut().zip(step.iter()) {
            let delta = alpha * d;
            last_step = last_step.max(delta.abs());
            *x += delta;
        }
        if options.mode == SolveMode::Bracketed {
            sys.project(&mut u);
        }
        if !u.iter().all(|x| x.is_finite()) || u.iter().any(|x| x.abs() > 1e9) {
            return StartOutcome::Failed { best_residual };
        }
    }
    // converged residual without a final tiny step still counts when the
    // residual has reached the floor
    let final_norm = sys.full_residual(&u).iter().fold(0.0f64, |a, r| a.max(r.abs()));
    if final_norm <= options.residual_tol && last_step <= 1e-10 {
        return StartOutcome::Converged { u, iterations: options.max_iterations, residual: final_norm };
    }
    StartOutcome::Failed { best_residual }
}

/// Multi-start damped Newton over `starts`, in order; the first root that
/// passes the bracket filter (and positive mass weights) wins. Converged
/// roots that violate a bracket are recorded and the search continues.
pub fn solve_residual_system(
    sys: &ResidualSystem,
    starts: &[Vec<f64>],
    options: &SolverOptions,
) -> SolveReport {
    let mut rejected = Vec::new();
    let mut best_residual = f64::INFINITY;
    for (idx, start) in starts.iter().enumerate() {
        match newton_from_start(sys, start, options) {
            StartOutcome::Converged { u, iterations, residual } => {
                best_residual = best_residual.min(residual);
                let (nodes, weights) = sys.expand(&u);
                if !sys.respects_brackets(&u) {
                    rejected.push(RejectedRoot {
                        start_index: idx,
                        nodes,
                        weights,
                        residual,
                        reason: "node outside its element bracket".into(),
                    });
                    continue;
                }
                if sys.kind() == RuleKind::Mass && weights.iter().any(|&w| w <= 0.0) {
                    rejected.push(RejectedRoot {
                        start_index: idx,
                        nodes,
                        weights,
                        residual,
                        reason: "non-positive mass weight".into(),
                    });
                    continue;
                }
                return SolveReport {
                    rule: Some(sys.build_rule(&u, RuleFamily::GaussWeighted)),
                    rejected,
                    best_residual: residual,
                    accepted_start: Some(idx),
                    iterations,
                    starts_tried: idx + 1,
                };
            }
            StartOutcome::Failed { best_residual: b } => {
                best_residual = best_residual.min(b);
            }
        }
    }
    SolveReport {
        rule: None,
        rejected,
        best_residual,
        accepted_start: None,
        iterations: 0,
        starts_tried: starts.len(),
    }
}

// ---------------------------------------------------------------------------
// The four Gaussian rules
// ---------------------------------------------------------------------------

fn build_cardinal_rule(
    kind: RuleKind,
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
) -> Result<WeightedRule> {
    let patch = CardinalPatch::new(degree)?;
    let eff = nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| {
            w * match kind {
                RuleKind::Mass => patch.value(x),
                RuleKind::Stiffness => patch.deriv(x),
            }
        })
        .collect();
    let mut rule = WeightedRule {
        kind,
        degree,
        family: RuleFamily::GaussWeighted,
        weight: WeightId::InteriorCardinal,
        support: (0.0, (degree + 1) as f64),
        nodes,
        weights,
        effective_weights: eff,
        residual_max: 0.0,
    };
    rule.residual_max = cardinal_exactness_residual(&rule)?;
    Ok(rule)
}

/// Three-node Gaussian mass rule for the quadratic cardinal weight, solved
/// in closed form: symmetry pins the middle node at 3/2, eliminating the
/// weights from the reduced system leaves 26 t^2 - 48 t + 21 = 0 for the
/// first node, and the weights follow by back-substitution.
pub fn quadratic_mass_rule() -> Result<WeightedRule> {
    let tau1 = (24.0 - 30.0f64.sqrt()) / 26.0;
    let w1 = 1.0 / (30.0 * tau1 * tau1 * (1.0 - tau1) * (1.0 - tau1));
    let w2 = (16.0 / 9.0) * (11.0 / 20.0 - 0.5 * w1 * tau1.powi(4));
    build_cardinal_rule(
        RuleKind::Mass,
        2,
        vec![tau1, 1.5, 3.0 - tau1],
        vec![w1, w2, w1],
    )
}

/// Four-node Gaussian mass rule for the cubic cardinal weight. The root is
/// found by the bracketed multi-start Newton solver, not verified from
/// published constants.
pub fn cubic_mass_rule() -> Result<WeightedRule> {
    let sys = ResidualSystem::cardinal(RuleKind::Mass, 3)?;
    let starts = sys.default_starts();
    solve_residual_system(&sys, &starts, &SolverOptions::default()).into_rule()
}

/// Three-node Gaussian stiffness rule for the quadratic cardinal weight:
/// nodes (3/4, 3/2, 9/4), all weights 8/9. The middle weight is
/// unconstrained by the exactness system (the weight derivative vanishes
/// there) and is pinned to the shared value.
pub fn quadratic_stiffness_rule() -> Result<WeightedRule> {
    build_cardinal_rule(
        RuleKind::Stiffness,
        2,
        vec![0.75, 1.5, 2.25],
        vec![8.0 / 9.0, 8.0 / 9.0, 8.0 / 9.0],
    )
}

/// Four-node Gaussian stiffness rule for the cubic cardinal weight; the
/// one-parameter family is indexed by the outer weight `omega1`.
///
/// The first node solves 30 w1 x^2 (1-x)^2 = 1, i.e. the quartic
/// 30 w1 x^4 - 60 w1 x^3 + 30 w1 x^2 - 1 = 0, taking the smaller of the two
/// roots inside (0, 1); the remaining pair (tau2, omega2) follows in closed
/// form from the two off-diagonal constraints.
pub fn cubic_stiffness_rule(omega1: f64) -> Result<WeightedRule> {
    if !(omega1.is_finite() && omega1 > 0.0) {
        return Err(Error::NoAdmissibleNode { omega1 });
    }
    let s = 1.0 / (30.0 * omega1).sqrt();
    let disc = 1.0 - 4.0 * s;
    if disc < 0.0 {
        return Err(Error::NoAdmissibleNode { omega1 });
    }
    let tau1 = 0.5 * (1.0 - disc.sqrt());

    // off-diagonal constraints, signed per the oracle:
    //   a := w2 (tau2 - 2/3)(2 - tau2)^3
    //   b := w2 (tau2 - 2/3)(2 - tau2)^2 (tau2 - 1)
    let a = (4.0 / 3.0) * (0.2 - 0.25 * omega1 * tau1.powi(3) * (4.0 - 3.0 * tau1));
    let b = (1.0 / 3.0)
        * (0.125 - 0.25 * omega1 * tau1 * tau1 * (3.0 * tau1 * tau1 - 2.0 * tau1 - 1.0));
    if a == 0.0 {
        return Err(Error::NoAdmissibleNode { omega1 });
    }
    let ratio = b / a; // = (tau2 - 1) / (2 - tau2)
    let tau2 = (1.0 + 2.0 * ratio) / (1.0 + ratio);
    if !(tau2.is_finite() && tau2 > 1.0 && tau2 < 2.0) {
        return Err(Error::DegenerateNodes {
            index: 1,
            reason: format!("completed node tau2 = {tau2} leaves (1, 2)"),
        });
    }
    let w2 = a / ((tau2 - 2.0 / 3.0) * (2.0 - tau2).powi(3));
    build_cardinal_rule(
        RuleKind::Stiffness,
        3,
        vec![tau1, tau2, 4.0 - tau2, 4.0 - tau1],
        vec![omega1, w2, w2, omega1],
    )
}

/// The published initial guess for the cubic mass system.
pub const CUBIC_MASS_PUBLISHED_GUESS: [f64; 4] = [1.0 / 3.0, 5.0 / 3.0, 1.0, 1.0];

/// Deterministic wrong-element start: node 2 seeded at the midpoint of
/// element 2 instead of element 1. Unconstrained Newton converges from
/// here to the spurious root whose second node violates its bracket.
pub const CUBIC_MASS_WRONG_ELEMENT_GUESS: [f64; 4] = [0.5, 2.5, 1.0, 1.0];

/// Outcome of the guess-sensitivity demonstration for the cubic mass system.
#[derive(Debug, Clone)]
pub struct FailureDemo {
    /// Unconstrained Newton from the published guess. This iteration
    /// does not converge (it wanders chaotically), which is itself the
    /// failure mode brackets and damping guard against.
    pub published_guess: SolveReport,
    /// Unconstrained Newton from the wrong-element start: converges to the
    /// spurious algebraic root with the second node outside (1, 2), which
    /// the bracket filter rejects.
    pub wrong_element: SolveReport,
    /// The bracketed production solve over the default grid.
    pub bracketed: SolveReport,
    /// Bracketed damped solve started from the published guess: damping and
    /// projection recover the correct root.
    pub bracketed_from_published_guess: SolveReport,
}

/// Run the full guess-sensitivity demonstration.
pub fn cubic_mass_failure_demo() -> Result<FailureDemo> {
    let sys = ResidualSystem::cardinal(RuleKind::Mass, 3)?;
    let unconstrained = SolverOptions::unconstrained();
    let published_guess =
        solve_residual_system(&sys, &[CUBIC_MASS_PUBLISHED_GUESS.to_vec()], &unconstrained);
    let wrong_element =
        solve_residual_system(&sys, &[CUBIC_MASS_WRONG_ELEMENT_GUESS.to_vec()], &unconstrained);
    let bracketed =
        solve_residual_system(&sys, &sys.default_starts(), &SolverOptions::default());
    let bracketed_from_published_guess = solve_residual_system(
        &sys,
        &[CUBIC_MASS_PUBLISHED_GUESS.to_vec()],
        &SolverOptions::default(),
    );
    Ok(FailureDemo { published_guess, wrong_element, bracketed, bracketed_from_published_guess })
}

// ---------------------------------------------------------------------------
// Newton-Cotes baseline rules
// ---------------------------------------------------------------------------

fn min_norm_lsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    svd.solve(b, 1e-12)
        .map_err(|e| Error::LinearSolve(e.to_string()))
}

/// Newton-Cotes-type rule for the interior cardinal weight: nodes are the
/// knots and element midpoints of the support at which the weight does not
/// vanish, and the weights solve the (linear) exactness system.
pub fn newton_cotes_cardinal(degree: usize, kind: RuleKind) -> Result<WeightedRule> {
    let patch = CardinalPatch::new(degree)?;
    let moments = cardinal_moments(degree, kind)?;
    let width = degree + 1;

    let mut nodes = Vec::new();
    for e in 0..width {
        nodes.push(e as f64 + 0.5);
        if e + 1 < width {
            nodes.push((e + 1) as f64);
        }
    }
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let wvals: Vec<f64> = nodes
        .iter()
        .map(|&x| match kind {
            RuleKind::Mass => patch.value(x),
            RuleKind::Stiffness => patch.deriv(x),
        })
        .collect();
    let keep: Vec<usize> = (0..nodes.len()).filter(|&k| wvals[k].abs() > 1e-14).collect();
    let nodes: Vec<f64> = keep.iter().map(|&k| nodes[k]).collect();
    let wvals: Vec<f64> = keep.iter().map(|&k| wvals[k]).collect();

    let p = degree as isize;
    let n_con = moments.len();
    let mut a = DMatrix::zeros(n_con, nodes.len());
    for (c, s) in (-p..=p).enumerate() {
        for (k, &x) in nodes.iter().enumerate() {
            let d = match kind {
                RuleKind::Mass => patch.value(x - s as f64),
                RuleKind::Stiffness => patch.deriv(x - s as f64),
            };
            a[(c, k)] = d * wvals[k];
        }
    }
    let omega = min_norm_lsq(&a, &DVector::from_vec(moments.clone()))?;

    let weights: Vec<f64> = omega.iter().copied().collect();
    let eff: Vec<f64> = weights.iter().zip(&wvals).map(|(&w, &v)| w * v).collect();
    let mut rule = WeightedRule {
        kind,
        degree,
        family: RuleFamily::NcWeighted,
        weight: WeightId::InteriorCardinal,
        support: (0.0, width as f64),
        nodes,
        weights,
        effective_weights: eff,
        residual_max: 0.0,
    };
    rule.residual_max = cardinal_exactness_residual(&rule)?;
    if rule.residual_max > 1e-12 {
        return Err(Error::DegenerateNodes {
            index: 0,
            reason: format!("Newton-Cotes system residual {:.3e}", rule.residual_max),
        });
    }
    Ok(rule)
}

/// Newton-Cotes-type rule for weight `j` of a uniform space.
///
/// Interior (cardinal-shaped) weights solve in the product convention over
/// the nodes where the weight is nonzero. Boundary weights solve directly
/// for effective weights over all knot and midpoint nodes of the clipped
/// support; that weight-absorbed form is the only one boundary rules admit.
pub fn newton_cotes_weighted_rule(
    space: &SplineSpace,
    j: usize,
    kind: RuleKind,
) -> Result<WeightedRule> {
    if !space.knots().is_uniform() {
        return Err(Error::NonUniformSpace);
    }
    let supp = space.support(j)?;
    let bp = space.knots().breakpoints();
    let mut nodes = Vec::new();
    for e in supp.first_element..=supp.last_element {
        nodes.push(bp[e]);
        nodes.push(0.5 * (bp[e] + bp[e + 1]));
    }
    nodes.push(bp[supp.last_element + 1]);

    let weight_at = |x: f64| -> Result<f64> {
        match kind {
            RuleKind::Mass => space.eval_basis(j, x),
            RuleKind::Stiffness => space.eval_deriv(j, x),
        }
    };
    let basis_at = |i: usize, x: f64| -> Result<f64> {
        match kind {
            RuleKind::Mass => space.eval_basis(i, x),
            RuleKind::Stiffness => space.eval_deriv(i, x),
        }
    };

    let wvals: Vec<f64> = nodes.iter().map(|&x| weight_at(x)).collect::<Result<_>>()?;
    let wscale = wvals.iter().fold(0.0f64, |a, w| a.max(w.abs()));
    let moments = exact_moment_vector(space, j, kind)?;
    let interacting = space.interacting_indices(j)?;
    let mscale = moments.iter().fold(1.0f64, |a, m| a.max(m.abs()));

    let product_convention = space.is_cardinal_shape(j);
    let (nodes, wvals): (Vec<f64>, Vec<f64>) = if product_convention {
        nodes
            .iter()
            .zip(&wvals)
            .filter(|(_, w)| w.abs() > 1e-12 * wscale)
            .map(|(&x, &w)| (x, w))
            .unzip()
    } else {
        (nodes, wvals)
    };

    let mut a = DMatrix::zeros(interacting.len(), nodes.len());
    for (c, &i) in interacting.iter().enumerate() {
        for (k, &x) in nodes.iter().enumerate() {
            let d = basis_at(i, x)?;
            a[(c, k)] = if product_convention { d * wvals[k] } else { d };
        }
    }
    let sol = min_norm_lsq(&a, &DVector::from_vec(moments.clone()))?;

    let (weights, eff): (Vec<f64>, Vec<f64>) = if product_convention {
        let w: Vec<f64> = sol.iter().copied().collect();
        let e = w.iter().zip(&wvals).map(|(&w, &v)| w * v).collect();
        (w, e)
    } else {
        let e: Vec<f64> = sol.iter().copied().collect();
        let w = e
            .iter()
            .zip(&wvals)
            .map(|(&ew, &v)| if v.abs() > 1e-12 * wscale.max(1e-300) { ew / v } else { 0.0 })
            .collect();
        (w, e)
    };

    let mut rule = WeightedRule {
        kind,
        degree: space.degree(),
        family: RuleFamily::NcWeighted,
        weight: WeightId::SpaceIndex(j),
        support: (supp.lo, supp.hi),
        nodes,
        weights,
        effective_weights: eff,
        residual_max: 0.0,
    };
    rule.residual_max = space_exactness_residual(&rule, space)?;
    if rule.residual_max > 1e-12 * mscale.max(1.0) {
        return Err(Error::DegenerateNodes {
            index: j,
            reason: format!(
                "no exact Newton-Cotes rule on the prescribed nodes (residual {:.3e})",
                rule.residual_max
            ),
        });
    }
    Ok(rule)
}

/// The cardinal rule pair one assembly strategy consumes.
#[derive(Debug, Clone)]
pub struct RuleTable {
    pub degree: usize,
    pub family: RuleFamily,
    pub mass: WeightedRule,
    pub stiffness: WeightedRule,
}

/// Derive the mass and stiffness cardinal rules of a family.
pub fn rule_table(degree: usize, family: RuleFamily) -> Result<RuleTable> {
    let (mass, stiffness) = match family {
        RuleFamily::GaussWeighted => {
            let mass = match degree {
                2 => quadratic_mass_rule()?,
                3 => cubic_mass_rule()?,
                d => return Err(Error::UnsupportedDegree(d)),
            };
            let stiffness = match degree {
                2 => quadratic_stiffness_rule()?,
                3 => cubic_stiffness_rule(1.0)?,
                d => return Err(Error::UnsupportedDegree(d)),
            };
            (mass, stiffness)
        }
        RuleFamily::NcWeighted => (
            newton_cotes_cardinal(degree, RuleKind::Mass)?,
            newton_cotes_cardinal(degree, RuleKind::Stiffness)?,
        ),
    };
    Ok(RuleTable { degree, family, mass, stiffness })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::oracle::cardinal_moments;
    use approx::assert_abs_diff_eq;

    const EQ23: [f64; 4] = [
        0.71241440095955149482,
        0.79410713110801847176,
        1.5,
        0.79595121334251753503,
    ];
    const EQ25: [f64; 4] = [
        0.72289886179270511319,
        1.58789880583487289415,
        0.88863704203309628490,
        0.83494225417405959060,
    ];
    const EQ27: [f64; 4] = [
        0.75698683155927590528,
        2.30382606794266282352,
        1.14740718959367949323,
        0.74428414202245775486,
    ];
    const EQ34: [f64; 4] = [
        0.24033518882038592858,
        1.16015740029939774803,
        1.0,
        0.86030876544418464920,
    ];

    #[test]
    fn quadratic_mass_matches_published_constants() {
        let r = quadratic_mass_rule().unwrap();
        assert_abs_diff_eq!(r.nodes[0], EQ23[0], epsilon = 1e-13);
        assert_abs_diff_eq!(r.weights[0], EQ23[1], epsilon = 1e-13);
        assert_abs_diff_eq!(r.nodes[1], EQ23[2], epsilon = 0.0);
        assert_abs_diff_eq!(r.weights[1], EQ23[3], epsilon = 1e-13);
        assert!(r.residual_max <= 1e-13);
    }

    #[test]
    fn quadratic_mass_partition_identity() {
        let r = quadratic_mass_rule().unwrap();
        // sum_k w_k B_j(tau_k) = integral of B_j = 1
        let total: f64 = r.effective_weights.iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        // spelled out: 2 w1 (tau1^2/2) + w2 (3/4)
        let direct = r.weights[0] * r.nodes[0] * r.nodes[0] + 0.75 * r.weights[1];
        assert_abs_diff_eq!(direct, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mass_rules_have_positive_weights_and_partition_identity() {
        for rule in [
            quadratic_mass_rule().unwrap(),
            cubic_mass_rule().unwrap(),
            newton_cotes_cardinal(2, RuleKind::Mass).unwrap(),
            newton_cotes_cardinal(3, RuleKind::Mass).unwrap(),
        ] {
            assert!(rule.weights.iter().all(|&w| w > 0.0), "{:?}", rule.family);
            let total: f64 = rule.effective_weights.iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cubic_mass_found_by_multistart_newton() {
        let r = cubic_mass_rule().unwrap();
        assert_abs_diff_eq!(r.nodes[0], EQ25[0], epsilon = 1e-12);
        assert_abs_diff_eq!(r.nodes[1], EQ25[1], epsilon = 1e-12);
        assert_abs_diff_eq!(r.weights[0], EQ25[2], epsilon = 1e-12);
        assert_abs_diff_eq!(r.weights[1], EQ25[3], epsilon = 1e-12);
        assert!(r.residual_max <= 1e-13);
    }

    #[test]
    fn quadratic_stiffness_radical_solution() {
        let r = quadratic_stiffness_rule().unwrap();
        assert_eq!(r.nodes, vec![0.75, 1.5, 2.25]);
        for w in &r.weights {
            assert_abs_diff_eq!(*w, 8.0 / 9.0, epsilon = 0.0);
        }
        assert!(r.residual_max <= 1e-14);
        // diagonal check: sum_k w_k B_j'(tau_k)^2 = 1
        let patch = CardinalPatch::new(2).unwrap();
        let diag: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(&x, &w)| w * patch.deriv(x) * patch.deriv(x))
            .sum();
        assert_abs_diff_eq!(diag, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn cubic_stiffness_published_family_member() {
        let r = cubic_stiffness_rule(1.0).unwrap();
        assert_abs_diff_eq!(r.nodes[0], EQ34[0], epsilon = 1e-13);
        assert_abs_diff_eq!(r.nodes[1], EQ34[1], epsilon = 1e-13);
        assert_abs_diff_eq!(r.weights[0], EQ34[2], epsilon = 0.0);
        assert_abs_diff_eq!(r.weights[1], EQ34[3], epsilon = 1e-13);
        assert!(r.residual_max <= 1e-13);
    }

    #[test]
    fn cubic_stiffness_quartic_and_radical() {
        let r = cubic_stiffness_rule(1.0).unwrap();
        let t = r.nodes[0];
        let quartic = 30.0 * t.powi(4) - 60.0 * t.powi(3) + 30.0 * t * t - 1.0;
        assert!(quartic.abs() <= 1e-12, "quartic residual {quartic:e}");
        let closed = 0.5 - (225.0 - 30.0 * 30.0f64.sqrt()).sqrt() / 30.0;
        assert_abs_diff_eq!(t, closed, epsilon = 1e-15);
    }

    #[test]
    fn cubic_stiffness_family_members_exact() {
        for w1 in [0.9, 1.0, 1.1] {
            let r = cubic_stiffness_rule(w1).unwrap();
            assert!(
                r.residual_max <= 1e-13,
                "family member omega1={w1} residual {:.3e}",
                r.residual_max
            );
        }
    }

    #[test]
    fn cubic_stiffness_rejects_small_family_parameter() {
        // quartic has no root in (0,1) for omega1 < 8/15
        assert!(matches!(
            cubic_stiffness_rule(0.5),
            Err(Error::NoAdmissibleNode { .. })
        ));
    }

    #[test]
    fn newton_path_cross_checks_closed_forms() {
        let sys = ResidualSystem::cardinal(RuleKind::Mass, 2).unwrap();
        let solved = solve_residual_system(&sys, &sys.default_starts(), &SolverOptions::default())
            .into_rule()
            .unwrap();
        let closed = quadratic_mass_rule().unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(solved.nodes[k], closed.nodes[k], epsilon = 1e-13);
            assert_abs_diff_eq!(solved.weights[k], closed.weights[k], epsilon = 1e-13);
        }

        // the cubic stiffness quartic has two admissible roots in (0, 1)
        // (two rules per family member); Newton may land on either, and
        // both must satisfy the quartic and the full exactness system
        let sys = ResidualSystem::cardinal_with_fixed_weight(RuleKind::Stiffness, 3, Some(1.0)).unwrap();
        let solved = solve_residual_system(&sys, &sys.default_starts(), &SolverOptions::default())
            .into_rule()
            .unwrap();
        let t = solved.nodes[0];
        let quartic = 30.0 * t.powi(4) - 60.0 * t.powi(3) + 30.0 * t * t - 1.0;
        assert!(quartic.abs() <= 1e-12);
        assert!(solved.residual_max <= 1e-13);
        let smaller = cubic_stiffness_rule(1.0).unwrap().nodes[0];
        let larger = 1.0 - smaller;
        assert!((t - smaller).abs() <= 1e-12 || (t - larger).abs() <= 1e-12);
    }

    #[test]
    fn perturbed_moments_solver_contract() {
        let mut moments = cardinal_moments(3, RuleKind::Mass).unwrap();
        for m in moments.iter_mut() {
            *m += 1e-3;
        }
        let sys = ResidualSystem::with_moments(RuleKind::Mass, 3, moments, None).unwrap();
        let report = solve_residual_system(&sys, &sys.default_starts(), &SolverOptions::default());
        let rule = report.rule.expect("perturbed system solvable");
        // residual against the PERTURBED right-hand side
        assert!(rule.residual_max <= 1e-13);
    }

    #[test]
    fn failure_demo_reproduces_spurious_root() {
        let demo = cubic_mass_failure_demo().unwrap();
        // the published guess does not converge under plain Newton
        assert!(demo.published_guess.rule.is_none());
        // the wrong-element start converges to the spurious root, which the
        // bracket filter rejects
        assert!(demo.wrong_element.rule.is_none());
        let rej = &demo.wrong_element.rejected[0];
        for (got, want) in rej.nodes[..2].iter().chain(&rej.weights[..2]).zip([
            EQ27[0], EQ27[1], EQ27[2], EQ27[3],
        ]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
        assert!(rej.nodes[1] > 2.0, "second node must leave (1,2)");
        // the production path still finds the published rule
        let rule = demo.bracketed.rule.as_ref().unwrap();
        assert_abs_diff_eq!(rule.nodes[0], EQ25[0], epsilon = 1e-12);
        assert_abs_diff_eq!(rule.nodes[1], EQ25[1], epsilon = 1e-12);
        // and damping rescues even the published guess
        let rescued = demo.bracketed_from_published_guess.rule.as_ref().unwrap();
        assert_abs_diff_eq!(rescued.nodes[1], EQ25[1], epsilon = 1e-12);
    }

    #[test]
    fn gaussian_rules_have_one_node_per_element() {
        for rule in [
            quadratic_mass_rule().unwrap(),
            cubic_mass_rule().unwrap(),
            quadratic_stiffness_rule().unwrap(),
            cubic_stiffness_rule(1.0).unwrap(),
        ] {
            assert_eq!(rule.len(), rule.degree + 1);
            for (e, &x) in rule.nodes.iter().enumerate() {
                assert!(x > e as f64 && x < (e + 1) as f64, "node {x} not in element {e}");
            }
        }
    }

    #[test]
    fn interior_rules_are_symmetric() {
        for rule in [
            quadratic_mass_rule().unwrap(),
            cubic_mass_rule().unwrap(),
            quadratic_stiffness_rule().unwrap(),
            cubic_stiffness_rule(1.0).unwrap(),
            newton_cotes_cardinal(2, RuleKind::Mass).unwrap(),
            newton_cotes_cardinal(3, RuleKind::Mass).unwrap(),
        ] {
            let m = rule.len();
            let width = (rule.degree + 1) as f64;
            for k in 0..m {
                assert_abs_diff_eq!(rule.nodes[k] + rule.nodes[m - 1 - k], width, epsilon = 1e-12);
                assert_abs_diff_eq!(rule.weights[k], rule.weights[m - 1 - k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn newton_cotes_node_counts() {
        // mass keeps 2p+1 nodes (support endpoints drop, weight vanishes);
        // stiffness additionally loses the vanishing-derivative midpoint
        for p in [2usize, 3] {
            let mass = newton_cotes_cardinal(p, RuleKind::Mass).unwrap();
            assert_eq!(mass.len(), 2 * p + 1);
            let stiff = newton_cotes_cardinal(p, RuleKind::Stiffness).unwrap();
            assert_eq!(stiff.len(), 2 * p);
            assert!(mass.residual_max <= 1e-12);
            assert!(stiff.residual_max <= 1e-12);
        }
    }

    #[test]
    fn newton_cotes_on_space_reproduces_oracle() {
        for p in [2usize, 3] {
            let space = SplineSpace::uniform(p, 8).unwrap();
            let j = space.dim() / 2;
            for kind in [RuleKind::Mass, RuleKind::Stiffness] {
                let rule = newton_cotes_weighted_rule(&space, j, kind).unwrap();
                assert!(rule.residual_max <= 1e-12, "kind {kind} residual {}", rule.residual_max);
            }
        }
    }

    #[test]
    fn newton_cotes_boundary_reduced_node_set() {
        let space = SplineSpace::uniform(2, 8).unwrap();
        // one-element support: knots and midpoint of a single element
        let rule0 = newton_cotes_weighted_rule(&space, 0, RuleKind::Mass).unwrap();
        assert_eq!(rule0.len(), 3);
        assert!(rule0.residual_max <= 1e-13);
        // two-element support keeps all five candidate nodes (min-norm solve)
        let rule1 = newton_cotes_weighted_rule(&space, 1, RuleKind::Mass).unwrap();
        assert_eq!(rule1.len(), 5);
        assert!(rule1.residual_max <= 1e-13);
        // non-uniform spaces are refused
        let knots = crate::spline::KnotVector::from_breakpoints(2, vec![0.0, 0.4, 0.7, 1.0]).unwrap();
        let nonuniform = SplineSpace::new(knots);
        assert!(matches!(
            newton_cotes_weighted_rule(&nonuniform, 2, RuleKind::Mass),
            Err(Error::NonUniformSpace)
        ));
    }

    #[test]
    fn exactness_against_oracle_all_rules() {
        for p in [2usize, 3] {
            for family in [RuleFamily::GaussWeighted, RuleFamily::NcWeighted] {
                let table = rule_table(p, family).unwrap();
                for rule in [&table.mass, &table.stiffness] {
                    let res = cardinal_exactness_residual(rule).unwrap();
                    assert!(res <= 1e-12, "p={p} {:?} {:?}: {res:e}", family, rule.kind);
                }
            }
        }
    }

    #[test]
    fn scaling_covariance_preserves_exactness() {
        // mapped rule reproduces the exact moments of a scaled uniform mesh
        for p in [2usize, 3] {
            let table = rule_table(p, RuleFamily::GaussWeighted).unwrap();
            for n_el in [5usize, 9, 16] {
                if n_el < 2 * p + 2 {
                    continue;
                }
                let space = SplineSpace::uniform(p, n_el).unwrap();
                let h = 1.0 / n_el as f64;
                let j = space.dim() / 2;
                let offset = (j - p) as f64 * h;
                for (rule, kind) in
                    [(&table.mass, RuleKind::Mass), (&table.stiffness, RuleKind::Stiffness)]
                {
                    let scaled = rule.scaled_to(h, offset);
                    let moments = exact_moment_vector(&space, j, kind).unwrap();
                    let scale = moments.iter().fold(1.0f64, |a, m| a.max(m.abs()));
                    for (c, i) in space.interacting_indices(j).unwrap().into_iter().enumerate() {
                        let q: f64 = scaled
                            .nodes
                            .iter()
                            .zip(&scaled.effective_weights)
                            .map(|(&x, &w)| {
                                w * match kind {
                                    RuleKind::Mass => space.eval_basis(i, x).unwrap(),
                                    RuleKind::Stiffness => space.eval_deriv(i, x).unwrap(),
                                }
                            })
                            .sum();
                        assert_abs_diff_eq!(q, moments[c], epsilon = 1e-12 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn default_start_grid_is_deterministic() {
        let sys = ResidualSystem::cardinal(RuleKind::Mass, 3).unwrap();
        let starts = sys.default_starts();
        assert_eq!(starts.len(), 25);
        assert_eq!(starts[0], vec![0.5, 1.5, 1.0, 1.0]);
        assert_eq!(starts[1], vec![0.5, 1.7, 1.0, 1.0]);
        assert_eq!(starts[5], vec![0.7, 1.5, 1.0, 1.0]);
    }
}
