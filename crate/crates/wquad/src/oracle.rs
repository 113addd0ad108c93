//! Exact integration of spline products on uniform meshes.
//!
//! Per-element Gauss-Legendre with embedded high-precision tables. With
//! `m = p + 1` points per element the mass integrand (degree 2p) and the
//! stiffness integrand (degree 2p-2) are integrated exactly, so these
//! routines serve as the independent ground truth for every derived rule
//! and assembled matrix.

use crate::error::{Error, Result};
use crate::spline::{CardinalPatch, SplineSpace};

/// Which bilinear form a rule or moment vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Mass,
    Stiffness,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::Mass => "mass",
            RuleKind::Stiffness => "stiffness",
        }
    }
}

impl std::fmt::Display for RuleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Gauss-Legendre nodes and weights on the reference element [0, 1].
/// Tables are embedded to 22 significant digits; no runtime rootfinding.
#[derive(Debug, Clone)]
pub struct GaussLegendreTable {
    points: &'static [(f64, f64)],
}

#[rustfmt::skip]
#[allow(clippy::excessive_precision)]
static GL_TABLES: [&[(f64, f64)]; 10] = [
    &[(0.5, 1.0)],
    &[
        (0.2113248654051871177454, 0.5),
        (0.7886751345948128822546, 0.5),
    ],
    &[
        (0.1127016653792583114821, 0.2777777777777777777778),
        (0.5, 0.4444444444444444444444),
        (0.8872983346207416885179, 0.2777777777777777777778),
    ],
    &[
        (0.06943184420297371238803, 0.1739274225687269286865),
        (0.3300094782075718675987, 0.3260725774312730713135),
        (0.6699905217924281324013, 0.3260725774312730713135),
        (0.930568155797026287612, 0.1739274225687269286865),
    ],
    &[
        (0.04691007703066800360119, 0.1184634425280945437571),
        (0.2307653449471584544818, 0.2393143352496832340206),
        (0.5, 0.2844444444444444444444),
        (0.7692346550528415455182, 0.2393143352496832340206),
        (0.9530899229693319963988, 0.1184634425280945437571),
    ],
    &[
        (0.03376524289842398609385, 0.08566224618958517252015),
        (0.1693953067668677431693, 0.1803807865240693037849),
        (0.3806904069584015456847, 0.2339569672863455236949),
        (0.6193095930415984543153, 0.2339569672863455236949),
        (0.8306046932331322568307, 0.1803807865240693037849),
        (0.9662347571015760139062, 0.08566224618958517252015),
    ],
    &[
        (0.02544604382862073773691, 0.06474248308443484663531),
        (0.1292344072003027800681, 0.1398526957446383339507),
        (0.2970774243113014165467, 0.1909150252525594724752),
        (0.5, 0.2089795918367346938776),
        (0.7029225756886985834533, 0.1909150252525594724752),
        (0.8707655927996972199319, 0.1398526957446383339507),
        (0.9745539561713792622631, 0.06474248308443484663531),
    ],
    &[
        (0.01985507175123188415822, 0.05061426814518812957627),
        (0.1016667612931866302042, 0.1111905172266872352722),
        (0.2372337950418355070911, 0.156853322938943643669),
        (0.4082826787521750975303, 0.1813418916891809914826),
        (0.5917173212478249024697, 0.1813418916891809914826),
        (0.7627662049581644929089, 0.156853322938943643669),
        (0.8983332387068133697958, 0.1111905172266872352722),
        (0.9801449282487681158418, 0.05061426814518812957627),
    ],
    &[
        (0.01591988024618695508221, 0.04063719418078720598595),
        (0.08198444633668210285029, 0.09032408034742870202924),
        (0.1933142836497048013456, 0.1303053482014677311594),
        (0.3378732882980955354807, 0.1561735385200014200343),
        (0.5, 0.1651196775006298815823),
        (0.6621267117019044645193, 0.1561735385200014200343),
        (0.8066857163502951986544, 0.1303053482014677311594),
        (0.9180155536633178971497, 0.09032408034742870202924),
        (0.9840801197538130449178, 0.04063719418078720598595),
    ],
    &[
        (0.01304673574141413996102, 0.03333567215434406879678),
        (0.06746831665550774463395, 0.07472567457529029657289),
        (0.1602952158504877968828, 0.1095431812579910219978),
        (0.2833023029353764046004, 0.1346333596549981775456),
        (0.4255628305091843945576, 0.1477621123573764350869),
        (0.5744371694908156054424, 0.1477621123573764350869),
        (0.7166976970646235953996, 0.1346333596549981775456),
        (0.8397047841495122031172, 0.1095431812579910219978),
        (0.932531683344492255366, 0.07472567457529029657289),
        (0.986953264258585860039, 0.03333567215434406879678),
    ],
];

impl GaussLegendreTable {
    /// Table with `m` points, 1 <= m <= 10. The constants are verified
    /// against monomial integrals on construction.
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || m > GL_TABLES.len() {
            return Err(Error::Config(format!("Gauss-Legendre table supports 1..=10 points, got {m}")));
        }
        let table = Self { points: GL_TABLES[m - 1] };
        table.verify()?;
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// (node, weight) pairs on [0, 1].
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied()
    }

    /// Integrate `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let len = b - a;
        self.points.iter().map(|&(x, w)| w * len * f(a + len * x)).sum()
    }

    /// Exactness check: monomials up to degree 2m-1 on [0, 1].
    fn verify(&self) -> Result<()> {
        let m = self.points.len();
        for d in 0..(2 * m) {
            let q: f64 = self.points.iter().map(|&(x, w)| w * x.powi(d as i32)).sum();
            let exact = 1.0 / (d as f64 + 1.0);
            if (q - exact).abs() > 1e-15 * exact.max(1.0) * (d as f64 + 1.0) {
                return Err(Error::Config(format!(
                    "Gauss-Legendre table m={m} fails monomial degree {d}: {q} vs {exact}"
                )));
            }
        }
        for w in self.points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Config(format!("Gauss-Legendre table m={m} nodes not increasing")));
            }
        }
        if self.points.iter().any(|&(x, w)| w <= 0.0 || x <= 0.0 || x >= 1.0) {
            return Err(Error::Config(format!("Gauss-Legendre table m={m} has invalid entries")));
        }
        Ok(())
    }
}

fn gauss_pair_integral(
    space: &SplineSpace,
    i: usize,
    j: usize,
    points: usize,
    derivative: bool,
) -> Result<f64> {
    let dim = space.dim();
    if i >= dim {
        return Err(Error::IndexOutOfRange { index: i, dim });
    }
    if j >= dim {
        return Err(Error::IndexOutOfRange { index: j, dim });
    }
    let si = space.support(i)?;
    let sj = space.support(j)?;
    let lo = si.first_element.max(sj.first_element);
    let hi = si.last_element.min(sj.last_element);
    if lo > hi {
        return Ok(0.0);
    }
    let gl = GaussLegendreTable::new(points)?;
    let bp = space.knots().breakpoints();
    let mut total = 0.0;
    for e in lo..=hi {
        // exact spacing for uniform meshes; breakpoint differences cancel
        // catastrophically on fine meshes
        let width = match space.knots().spacing() {
            Ok(h) => h,
            Err(_) => bp[e + 1] - bp[e],
        };
        let mut acc = 0.0;
        for (t, w) in gl.points() {
            let span = if derivative {
                space.eval_span_deriv_at(e, t)
            } else {
                space.eval_span_basis_at(e, t)
            };
            // product first: entry(i, j) must equal entry(j, i) exactly
            acc += w * (span.get(i) * span.get(j));
        }
        total += width * acc;
    }
    Ok(total)
}

/// Exact integral of B_i B_j over the domain (p+1 Gauss points per element).
pub fn exact_mass_entry(space: &SplineSpace, i: usize, j: usize) -> Result<f64> {
    gauss_pair_integral(space, i, j, space.degree() + 1, false)
}

/// Exact integral of B_i' B_j' over the domain.
pub fn exact_stiffness_entry(space: &SplineSpace, i: usize, j: usize) -> Result<f64> {
    gauss_pair_integral(space, i, j, space.degree() + 1, true)
}

/// The exact moments forming the right-hand side of the exactness system for
/// weight `j`: one entry per interacting index, in ascending index order.
pub fn exact_moment_vector(space: &SplineSpace, j: usize, kind: RuleKind) -> Result<Vec<f64>> {
    space
        .interacting_indices(j)?
        .into_iter()
        .map(|i| match kind {
            RuleKind::Mass => exact_mass_entry(space, i, j),
            RuleKind::Stiffness => exact_stiffness_entry(space, i, j),
        })
        .collect()
}

/// Exact cardinal moments on integer knots: entry `c` is the integral of
/// B(x - s) * B(x) (or of the derivatives) over [0, p+1], with the shift
/// s = c - p running over -p..=p.
pub fn cardinal_moments(degree: usize, kind: RuleKind) -> Result<Vec<f64>> {
    let patch = CardinalPatch::new(degree)?;
    let gl = GaussLegendreTable::new(degree + 1)?;
    let p = degree as isize;
    let mut out = Vec::with_capacity(2 * degree + 1);
    for s in -p..=p {
        let mut total = 0.0;
        for e in 0..=degree as isize {
            total += gl.integrate(e as f64, (e + 1) as f64, |x| match kind {
                RuleKind::Mass => patch.shifted_piece_value(s, e, x) * patch.piece_value(e, x),
                RuleKind::Stiffness => patch.shifted_piece_deriv(s, e, x) * patch.piece_deriv(e, x),
            });
        }
        out.push(total);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Known closed-form cardinal moment fractions (signs oracle-determined).
    pub const MASS_MOMENTS_P2: [f64; 5] = [
        1.0 / 120.0,
        13.0 / 60.0,
        11.0 / 20.0,
        13.0 / 60.0,
        1.0 / 120.0,
    ];
    pub const MASS_MOMENTS_P3: [f64; 7] = [
        1.0 / 5040.0,
        1.0 / 42.0,
        397.0 / 1680.0,
        151.0 / 315.0,
        397.0 / 1680.0,
        1.0 / 42.0,
        1.0 / 5040.0,
    ];
    pub const STIFF_MOMENTS_P2: [f64; 5] = [-1.0 / 6.0, -1.0 / 3.0, 1.0, -1.0 / 3.0, -1.0 / 6.0];
    pub const STIFF_MOMENTS_P3: [f64; 7] = [
        -1.0 / 120.0,
        -1.0 / 5.0,
        -1.0 / 8.0,
        2.0 / 3.0,
        -1.0 / 8.0,
        -1.0 / 5.0,
        -1.0 / 120.0,
    ];

    #[test]
    fn tables_verify() {
        for m in 1..=10 {
            GaussLegendreTable::new(m).unwrap();
        }
        assert!(GaussLegendreTable::new(0).is_err());
        assert!(GaussLegendreTable::new(11).is_err());
    }

    #[test]
    fn table_symmetry() {
        for m in 1..=10 {
            let t = GaussLegendreTable::new(m).unwrap();
            let pts: Vec<_> = t.points().collect();
            for k in 0..pts.len() {
                let (x, w) = pts[k];
                let (xm, wm) = pts[pts.len() - 1 - k];
                assert_abs_diff_eq!(x, 1.0 - xm, epsilon = 1e-15);
                assert_abs_diff_eq!(w, wm, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn cardinal_mass_moments_match_pinned_fractions() {
        let m2 = cardinal_moments(2, RuleKind::Mass).unwrap();
        for (a, b) in m2.iter().zip(MASS_MOMENTS_P2) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let m3 = cardinal_moments(3, RuleKind::Mass).unwrap();
        for (a, b) in m3.iter().zip(MASS_MOMENTS_P3) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn cardinal_stiffness_moments_signed_by_oracle() {
        let s2 = cardinal_moments(2, RuleKind::Stiffness).unwrap();
        for (a, b) in s2.iter().zip(STIFF_MOMENTS_P2) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
        let s3 = cardinal_moments(3, RuleKind::Stiffness).unwrap();
        for (a, b) in s3.iter().zip(STIFF_MOMENTS_P3) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn mass_entries_scale_with_spacing() {
        // entry = h * cardinal, stiffness entry = cardinal / h
        for p in [2usize, 3] {
            let card_m = cardinal_moments(p, RuleKind::Mass).unwrap();
            let card_k = cardinal_moments(p, RuleKind::Stiffness).unwrap();
            for n_el in [4usize, 16, 128] {
                if n_el < 2 * p + 2 {
                    continue;
                }
                let s = SplineSpace::uniform(p, n_el).unwrap();
                let h = 1.0 / n_el as f64;
                let j = s.dim() / 2;
                for (c, i) in s.interacting_indices(j).unwrap().into_iter().enumerate() {
                    let m = exact_mass_entry(&s, i, j).unwrap();
                    let k = exact_stiffness_entry(&s, i, j).unwrap();
                    assert_abs_diff_eq!(m, h * card_m[c], epsilon = 1e-13 * card_m[c].abs().max(1e-3));
                    assert_abs_diff_eq!(k, card_k[c] / h, epsilon = 1e-13 * (card_k[c].abs() / h).max(1e-3));
                }
            }
        }
    }

    #[test]
    fn disjoint_supports_integrate_to_zero() {
        let s = SplineSpace::uniform(2, 10).unwrap();
        assert_eq!(exact_mass_entry(&s, 0, 4).unwrap(), 0.0);
        assert_eq!(exact_stiffness_entry(&s, 1, 9).unwrap(), 0.0);
    }

    #[test]
    fn symmetry_in_indices() {
        let s = SplineSpace::uniform(3, 9).unwrap();
        for i in 0..s.dim() {
            for j in i..s.dim() {
                assert_eq!(
                    exact_mass_entry(&s, i, j).unwrap(),
                    exact_mass_entry(&s, j, i).unwrap()
                );
            }
        }
    }

    #[test]
    fn raising_point_count_changes_nothing() {
        // exactness saturation: m = p+1 already integrates the products
        for p in [2usize, 3] {
            let s = SplineSpace::uniform(p, 8).unwrap();
            let j = s.dim() / 2;
            for i in s.interacting_indices(j).unwrap() {
                let base = gauss_pair_integral(&s, i, j, p + 1, false).unwrap();
                for extra in (p + 2)..=10 {
                    let more = gauss_pair_integral(&s, i, j, extra, false).unwrap();
                    assert_abs_diff_eq!(base, more, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn cardinal_integral_is_one() {
        for p in [2usize, 3] {
            let patch = CardinalPatch::new(p).unwrap();
            let gl = GaussLegendreTable::new(p + 1).unwrap();
            let total: f64 = (0..=p as isize)
                .map(|e| gl.integrate(e as f64, (e + 1) as f64, |x| patch.piece_value(e, x)))
                .sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn moment_vector_on_space_matches_paper_rhs() {
        let s = SplineSpace::uniform(3, 12).unwrap();
        let h = 1.0 / 12.0;
        let j = s.dim() / 2;
        let mv = exact_moment_vector(&s, j, RuleKind::Mass).unwrap();
        for (a, b) in mv.iter().zip(MASS_MOMENTS_P3) {
            assert_abs_diff_eq!(*a, h * b, epsilon = 1e-15);
        }
    }
}
