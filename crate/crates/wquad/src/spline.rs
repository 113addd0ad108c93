//! Univariate B-spline spaces over open knot vectors.
//!
//! Evaluation uses the Cox-de Boor recurrence in its triangular (span) form.
//! Knot evaluation is right-continuous except at the right end of the domain,
//! where the last element owns the point.

use crate::error::{Error, Result};

/// Relative tolerance for the uniform-spacing check.
const UNIFORM_TOL: f64 = 1e-14;

/// Open knot vector of degree `p` over breakpoints spanning [0, 1].
///
/// Endpoints carry multiplicity `p + 1`, interior breakpoints are single
/// knots, so the spline space has maximum continuity `C^{p-1}`.
#[derive(Debug, Clone)]
pub struct KnotVector {
    degree: usize,
    breakpoints: Vec<f64>,
    knots: Vec<f64>,
    uniform: bool,
}

impl KnotVector {
    /// Uniform open knot vector with `n_el` equal elements on [0, 1].
    pub fn uniform(degree: usize, n_el: usize) -> Result<Self> {
        if n_el == 0 {
            return Err(Error::InvalidKnots("element count must be positive".into()));
        }
        let breakpoints = (0..=n_el).map(|i| i as f64 / n_el as f64).collect();
        Self::from_breakpoints(degree, breakpoints)
    }

    /// Open knot vector over explicit breakpoints `0 = xi_0 < ... < xi_n = 1`.
    pub fn from_breakpoints(degree: usize, breakpoints: Vec<f64>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidKnots("degree must be at least 1".into()));
        }
        if breakpoints.len() < 2 {
            return Err(Error::InvalidKnots("need at least two breakpoints".into()));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidKnots("breakpoints must span [0, 1]".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidKnots("breakpoints must be strictly increasing".into()));
        }

        let mut knots = Vec::with_capacity(breakpoints.len() + 2 * degree);
        knots.extend(std::iter::repeat(0.0).take(degree));
        knots.extend_from_slice(&breakpoints);
        knots.extend(std::iter::repeat(1.0).take(degree));

        let h0 = breakpoints[1] - breakpoints[0];
        let uniform = breakpoints
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h0).abs() <= UNIFORM_TOL * h0.max(1.0));

        Ok(Self { degree, breakpoints, knots, uniform })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_elements(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// True when all element widths agree to relative 1e-14.
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Element width of a uniform vector.
    pub fn spacing(&self) -> Result<f64> {
        if !self.uniform {
            return Err(Error::NonUniformSpace);
        }
        Ok(1.0 / self.num_elements() as f64)
    }

    /// Full knot array including endpoint repetitions; length `dim + p + 1`.
    pub fn full_knots(&self) -> &[f64] {
        &self.knots
    }

    /// Element index containing `x`: right-continuous, except `x = 1`
    /// belongs to the last element.
    pub fn element_of(&self, x: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::PointOutOfDomain { x });
        }
        if x >= 1.0 {
            return Ok(self.num_elements() - 1);
        }
        // binary search for the last breakpoint <= x
        let mut lo = 0usize;
        let mut hi = self.num_elements();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.breakpoints[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

/// Support of a basis function, in breakpoint indices and coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub first_element: usize,
    pub last_element: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Support {
    pub fn num_elements(&self) -> usize {
        self.last_element - self.first_element + 1
    }
}

/// Values of the `p + 1` basis functions alive on one element at a point.
#[derive(Debug, Clone)]
pub struct SpanValues {
    /// Index of the first nonzero basis function.
    pub first: usize,
    pub values: Vec<f64>,
}

impl SpanValues {
    /// Value of basis function `i`, zero when `i` is outside the span.
    pub fn get(&self, i: usize) -> f64 {
        if i < self.first || i >= self.first + self.values.len() {
            0.0
        } else {
            self.values[i - self.first]
        }
    }
}

/// Spline space of degree `p` over an open knot vector; dimension `p + n_el`.
#[derive(Debug, Clone)]
pub struct SplineSpace {
    knots: KnotVector,
}

impl SplineSpace {
    pub fn new(knots: KnotVector) -> Self {
        Self { knots }
    }

    /// Uniform space with `n_el` elements.
    pub fn uniform(degree: usize, n_el: usize) -> Result<Self> {
        Ok(Self::new(KnotVector::uniform(degree, n_el)?))
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.knots.degree()
    }

    pub fn num_elements(&self) -> usize {
        self.knots.num_elements()
    }

    pub fn dim(&self) -> usize {
        self.knots.degree() + self.knots.num_elements()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.dim() {
            return Err(Error::IndexOutOfRange { index: i, dim: self.dim() });
        }
        Ok(())
    }

    /// All `p + 1` basis values on the element containing `x`.
    pub fn eval_span_basis(&self, x: f64) -> Result<SpanValues> {
        let e = self.knots.element_of(x)?;
        Ok(self.span_values(e, x))
    }

    /// All `p + 1` basis derivatives on the element containing `x`.
    pub fn eval_span_deriv(&self, x: f64) -> Result<SpanValues> {
        let e = self.knots.element_of(x)?;
        Ok(self.span_derivs(e, x))
    }

    /// Basis values on element `e` at local coordinate `t` in [0, 1].
    ///
    /// For uniform knot vectors the knot distances are formed from exact
    /// integer differences, which keeps full relative precision on fine
    /// meshes where `x - knot` on the global axis would cancel
    /// catastrophically. Assembly and the exact oracle evaluate through
    /// this entry point.
    pub fn eval_span_basis_at(&self, e: usize, t: f64) -> SpanValues {
        if self.knots.is_uniform() {
            self.span_values_local(e, t)
        } else {
            let bp = self.knots.breakpoints();
            self.span_values(e, bp[e] + t * (bp[e + 1] - bp[e]))
        }
    }

    /// Physical basis derivatives on element `e` at local coordinate `t`.
    pub fn eval_span_deriv_at(&self, e: usize, t: f64) -> SpanValues {
        if self.knots.is_uniform() {
            let h = 1.0 / self.num_elements() as f64;
            let mut span = self.span_derivs_local(e, t);
            for v in span.values.iter_mut() {
                *v /= h;
            }
            span
        } else {
            let bp = self.knots.breakpoints();
            self.span_derivs(e, bp[e] + t * (bp[e + 1] - bp[e]))
        }
    }

    /// Knot of the full array in index units (integers; endpoint knots
    /// repeat through clamping). Only meaningful for uniform vectors.
    fn index_knot(&self, i: isize) -> isize {
        let p = self.degree() as isize;
        (i - p).clamp(0, self.num_elements() as isize)
    }

    /// B_i(x) via Cox-de Boor.
    pub fn eval_basis(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.eval_span_basis(x)?.get(i))
    }

    /// B_i'(x).
    pub fn eval_deriv(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.eval_span_deriv(x)?.get(i))
    }

    /// Support [xi_i, xi_{i+p+1}] in breakpoint coordinates.
    pub fn support(&self, i: usize) -> Result<Support> {
        self.check_index(i)?;
        let p = self.degree();
        let n_el = self.num_elements();
        let lo = i.saturating_sub(p).min(n_el);
        let hi = (i + 1).min(n_el);
        Ok(Support {
            first_element: lo,
            last_element: hi - 1,
            lo: self.knots.breakpoints()[lo],
            hi: self.knots.breakpoints()[hi],
        })
    }

    /// Indices whose support overlaps supp(B_j): {j-p, ..., j+p} clipped.
    pub fn interacting_indices(&self, j: usize) -> Result<Vec<usize>> {
        self.check_index(j)?;
        let p = self.degree();
        let lo = j.saturating_sub(p);
        let hi = (j + p).min(self.dim() - 1);
        Ok((lo..=hi).collect())
    }

    /// True when B_j is an interior function whose support stays away from
    /// both domain boundaries (the row classification used by assembly).
    pub fn is_weight_interior(&self, j: usize) -> bool {
        let p = self.degree();
        j >= p + 1 && j + p + 2 <= self.dim()
    }

    /// True when B_j is a translate of the cardinal function (all of its
    /// defining knots are single).
    pub fn is_cardinal_shape(&self, j: usize) -> bool {
        let p = self.degree();
        j >= p && j + p + 1 <= self.dim()
    }

    /// Triangular Cox-de Boor recurrence on element `e`; returns the values
    /// of functions `e..=e+p` at `x`.
    fn span_values(&self, e: usize, x: f64) -> SpanValues {
        let p = self.degree();
        let t = self.knots.full_knots();
        let s = e + p; // span index into the full knot array
        let mut values = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        values[0] = 1.0;
        for k in 1..=p {
            left[k] = x - t[s + 1 - k];
            right[k] = t[s + k] - x;
            let mut saved = 0.0;
            for r in 0..k {
                let tmp = values[r] / (right[r + 1] + left[k - r]);
                values[r] = saved + right[r + 1] * tmp;
                saved = left[k - r] * tmp;
            }
            values[k] = saved;
        }
        SpanValues { first: e, values }
    }

    /// Cox-de Boor on element `e` in knot-index units: position U = e + t,
    /// knot distances assembled as (integer difference) +/- t.
    fn span_values_local(&self, e: usize, t: f64) -> SpanValues {
        let p = self.degree();
        let s = (e + p) as isize;
        let ei = e as isize;
        let mut values = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        values[0] = 1.0;
        for k in 1..=p {
            left[k] = (ei - self.index_knot(s + 1 - k as isize)) as f64 + t;
            right[k] = (self.index_knot(s + k as isize) - ei) as f64 - t;
            let mut saved = 0.0;
            for r in 0..k {
                let tmp = values[r] / (right[r + 1] + left[k - r]);
                values[r] = saved + right[r + 1] * tmp;
                saved = left[k - r] * tmp;
            }
            values[k] = saved;
        }
        SpanValues { first: e, values }
    }

    /// Index-unit first derivatives on element `e` at local `t` (divide by
    /// the spacing for physical derivatives).
    fn span_derivs_local(&self, e: usize, t: f64) -> SpanValues {
        let p = self.degree();
        let s = (e + p) as isize;
        let ei = e as isize;

        let mut low = vec![0.0; p];
        low[0] = 1.0;
        let mut left = vec![0.0; p];
        let mut right = vec![0.0; p];
        for k in 1..p {
            left[k] = (ei - self.index_knot(s + 1 - k as isize)) as f64 + t;
            right[k] = (self.index_knot(s + k as isize) - ei) as f64 - t;
            let mut saved = 0.0;
            for r in 0..k {
                let tmp = low[r] / (right[r + 1] + left[k - r]);
                low[r] = saved + right[r + 1] * tmp;
                saved = left[k - r] * tmp;
            }
            low[k] = saved;
        }

        let pf = p as f64;
        let mut values = vec![0.0; p + 1];
        for r in 0..=p {
            let i = (e + r) as isize;
            let mut d = 0.0;
            if r > 0 {
                let den = (self.index_knot(i + p as isize) - self.index_knot(i)) as f64;
                if den > 0.0 {
                    d += low[r - 1] / den;
                }
            }
            if r < p {
                let den =
                    (self.index_knot(i + p as isize + 1) - self.index_knot(i + 1)) as f64;
                if den > 0.0 {
                    d -= low[r] / den;
                }
            }
            values[r] = pf * d;
        }
        SpanValues { first: e, values }
    }

    /// First derivatives of the span functions on element `e` at `x`, from
    /// degree p-1 values via the standard difference formula.
    fn span_derivs(&self, e: usize, x: f64) -> SpanValues {
        let p = self.degree();
        let t = self.knots.full_knots();
        let s = e + p;

        // degree p-1 values of functions s-p+1 ..= s
        let mut low = vec![0.0; p];
        low[0] = 1.0;
        let mut left = vec![0.0; p];
        let mut right = vec![0.0; p];
        for k in 1..p {
            left[k] = x - t[s + 1 - k];
            right[k] = t[s + k] - x;
            let mut saved = 0.0;
            for r in 0..k {
                let tmp = low[r] / (right[r + 1] + left[k - r]);
                low[r] = saved + right[r + 1] * tmp;
                saved = left[k - r] * tmp;
            }
            low[k] = saved;
        }

        let pf = p as f64;
        let mut values = vec![0.0; p + 1];
        for r in 0..=p {
            let i = e + r;
            let mut d = 0.0;
            if r > 0 {
                let den = t[i + p] - t[i];
                if den > 0.0 {
                    d += low[r - 1] / den;
                }
            }
            if r < p {
                let den = t[i + p + 1] - t[i + 1];
                if den > 0.0 {
                    d -= low[r] / den;
                }
            }
            values[r] = pf * d;
        }
        SpanValues { first: e, values }
    }
}

/// Cardinal B-spline of degree `p` over integer knots `0..=p+1`, stored as
/// per-element polynomial pieces in local coordinates. The pieces are exact
/// rational-coefficient polynomials; evaluating a piece outside its element
/// extends it polynomially, which is what the bracket-frozen exactness
/// systems require.
#[derive(Debug, Clone)]
pub struct CardinalPatch {
    degree: usize,
    /// pieces[e][k] = coefficient of t^k on element [e, e+1], t = x - e.
    pieces: Vec<Vec<f64>>,
}

impl CardinalPatch {
    pub fn new(degree: usize) -> Result<Self> {
        let pieces: Vec<Vec<f64>> = match degree {
            2 => vec![
                vec![0.0, 0.0, 0.5],
                vec![0.5, 1.0, -1.0],
                vec![0.5, -1.0, 0.5],
            ],
            3 => vec![
                vec![0.0, 0.0, 0.0, 1.0 / 6.0],
                vec![1.0 / 6.0, 0.5, 0.5, -0.5],
                vec![2.0 / 3.0, 0.0, -1.0, 0.5],
                vec![1.0 / 6.0, -0.5, 0.5, -1.0 / 6.0],
            ],
            d => return Err(Error::UnsupportedDegree(d)),
        };
        Ok(Self { degree, pieces })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Support is [0, p+1].
    pub fn support_width(&self) -> f64 {
        (self.degree + 1) as f64
    }

    fn horner(coeffs: &[f64], t: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    fn horner_deriv(coeffs: &[f64], t: f64) -> f64 {
        let mut acc = 0.0;
        for k in (1..coeffs.len()).rev() {
            acc = acc * t + coeffs[k] * k as f64;
        }
        acc
    }

    fn horner_deriv2(coeffs: &[f64], t: f64) -> f64 {
        let mut acc = 0.0;
        for k in (2..coeffs.len()).rev() {
            acc = acc * t + coeffs[k] * (k * (k - 1)) as f64;
        }
        acc
    }

    /// Value of the polynomial piece `e` at global coordinate `x`
    /// (extended beyond the element; zero for out-of-range piece indices).
    pub fn piece_value(&self, e: isize, x: f64) -> f64 {
        if e < 0 || e as usize > self.degree {
            return 0.0;
        }
        Self::horner(&self.pieces[e as usize], x - e as f64)
    }

    pub fn piece_deriv(&self, e: isize, x: f64) -> f64 {
        if e < 0 || e as usize > self.degree {
            return 0.0;
        }
        Self::horner_deriv(&self.pieces[e as usize], x - e as f64)
    }

    pub fn piece_deriv2(&self, e: isize, x: f64) -> f64 {
        if e < 0 || e as usize > self.degree {
            return 0.0;
        }
        Self::horner_deriv2(&self.pieces[e as usize], x - e as f64)
    }

    /// B(x) with the true piecewise selection; zero outside (0, p+1).
    pub fn value(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= self.support_width() {
            return 0.0;
        }
        let e = (x.floor() as usize).min(self.degree);
        self.piece_value(e as isize, x)
    }

    /// B'(x), true piecewise selection.
    pub fn deriv(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= self.support_width() {
            return 0.0;
        }
        let e = (x.floor() as usize).min(self.degree);
        self.piece_deriv(e as isize, x)
    }

    /// Value of the shifted copy B(x - shift) on the frozen piece given by
    /// global element `e` (piece index `e - shift`).
    pub fn shifted_piece_value(&self, shift: isize, e: isize, x: f64) -> f64 {
        self.piece_value(e - shift, x - shift as f64)
    }

    pub fn shifted_piece_deriv(&self, shift: isize, e: isize, x: f64) -> f64 {
        self.piece_deriv(e - shift, x - shift as f64)
    }

    pub fn shifted_piece_deriv2(&self, shift: isize, e: isize, x: f64) -> f64 {
        self.piece_deriv2(e - shift, x - shift as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn cardinal_center_values() {
        let c2 = CardinalPatch::new(2).unwrap();
        assert_abs_diff_eq!(c2.value(1.5), 0.75, epsilon = 1e-15);
        let c3 = CardinalPatch::new(3).unwrap();
        assert_abs_diff_eq!(c3.value(2.0), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn cardinal_center_derivatives() {
        let c2 = CardinalPatch::new(2).unwrap();
        assert_abs_diff_eq!(c2.deriv(0.75), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(c2.deriv(1.5), 0.0, epsilon = 1e-15);
        let c3 = CardinalPatch::new(3).unwrap();
        assert_abs_diff_eq!(c3.deriv(2.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn cardinal_pieces_join_continuously() {
        for p in [2usize, 3] {
            let c = CardinalPatch::new(p).unwrap();
            for e in 1..=p {
                let left = c.piece_value(e as isize - 1, e as f64);
                let right = c.piece_value(e as isize, e as f64);
                assert_abs_diff_eq!(left, right, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn endpoint_interpolation() {
        for p in [1usize, 2, 3, 4] {
            let s = SplineSpace::uniform(p, 6).unwrap();
            assert_abs_diff_eq!(s.eval_basis(0, 0.0).unwrap(), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(s.eval_basis(s.dim() - 1, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn support_element_counts() {
        let s3 = SplineSpace::uniform(3, 8).unwrap();
        assert_eq!(s3.support(5).unwrap().num_elements(), 4);
        let s2 = SplineSpace::uniform(2, 8).unwrap();
        assert_eq!(s2.support(0).unwrap().num_elements(), 1);
        assert_eq!(s2.support(1).unwrap().num_elements(), 2);
    }

    #[test]
    fn interacting_counts() {
        let s2 = SplineSpace::uniform(2, 10).unwrap();
        assert_eq!(s2.interacting_indices(5).unwrap().len(), 5);
        assert_eq!(s2.interacting_indices(0).unwrap().len(), 3);
        let s3 = SplineSpace::uniform(3, 10).unwrap();
        assert_eq!(s3.interacting_indices(6).unwrap().len(), 7);
        assert_eq!(s3.interacting_indices(6).unwrap(), (3..=9).collect::<Vec<_>>());
    }

    #[test]
    fn index_and_domain_errors() {
        let s = SplineSpace::uniform(2, 4).unwrap();
        assert!(s.eval_basis(s.dim(), 0.5).is_err());
        assert!(s.eval_basis(0, -0.1).is_err());
        assert!(s.eval_basis(0, 1.5).is_err());
    }

    #[test]
    fn cardinal_agrees_with_cox_de_boor() {
        // interior function of a uniform space is a scaled cardinal copy
        for p in [2usize, 3] {
            let n_el = 8;
            let s = SplineSpace::uniform(p, n_el).unwrap();
            let c = CardinalPatch::new(p).unwrap();
            let h = 1.0 / n_el as f64;
            let j = p + 2; // cardinal-shape interior index
            let left = (j - p) as f64 * h;
            for k in 0..200 {
                let u = (k as f64 + 0.5) / 200.0 * (p + 1) as f64;
                let x = left + u * h;
                if !(0.0..=1.0).contains(&x) {
                    continue;
                }
                assert_abs_diff_eq!(s.eval_basis(j, x).unwrap(), c.value(u), epsilon = 1e-14);
                assert_abs_diff_eq!(s.eval_deriv(j, x).unwrap(), c.deriv(u) / h, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn finite_difference_derivative() {
        let s = SplineSpace::uniform(3, 7).unwrap();
        let eps = 1e-6;
        for &x in &[0.111, 0.273, 0.405, 0.66, 0.893] {
            for i in 0..s.dim() {
                let fd = (s.eval_basis(i, x + eps).unwrap() - s.eval_basis(i, x - eps).unwrap())
                    / (2.0 * eps);
                assert_abs_diff_eq!(s.eval_deriv(i, x).unwrap(), fd, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn local_evaluation_matches_physical() {
        for p in [2usize, 3] {
            let n_el = 9;
            let s = SplineSpace::uniform(p, n_el).unwrap();
            let h = 1.0 / n_el as f64;
            for e in 0..n_el {
                for &t in &[0.0, 0.2, 0.5, 0.77, 1.0 - 1e-9] {
                    let x = (e as f64 + t) * h;
                    let phys = s.span_values(e, x);
                    let loc = s.eval_span_basis_at(e, t);
                    let dphys = s.span_derivs(e, x);
                    let dloc = s.eval_span_deriv_at(e, t);
                    for k in 0..=p {
                        assert_abs_diff_eq!(loc.values[k], phys.values[k], epsilon = 1e-12);
                        assert_abs_diff_eq!(dloc.values[k], dphys.values[k], epsilon = 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn local_evaluation_is_noise_free_on_fine_meshes() {
        // the interior span on a fine mesh matches the cardinal pieces to
        // machine precision, where global-coordinate evaluation loses
        // several digits on the derivatives
        let p = 2;
        let n_el = 1000;
        let s = SplineSpace::uniform(p, n_el).unwrap();
        let c = CardinalPatch::new(p).unwrap();
        let h = 1.0 / n_el as f64;
        let e = 500;
        for &t in &[0.1, 0.25, 0.5, 0.9] {
            let span = s.eval_span_basis_at(e, t);
            let dspan = s.eval_span_deriv_at(e, t);
            for k in 0..=p {
                // function e+k sees local coordinate t shifted by p-k pieces
                let u = (p - k) as f64 + t;
                assert_abs_diff_eq!(span.values[k], c.value(u), epsilon = 1e-15);
                assert_abs_diff_eq!(dspan.values[k], c.deriv(u) / h, epsilon = 1e-15 / h);
            }
        }
    }

    #[test]
    fn uniform_flag() {
        let u = KnotVector::uniform(2, 5).unwrap();
        assert!(u.is_uniform());
        let nu = KnotVector::from_breakpoints(2, vec![0.0, 0.3, 0.5, 1.0]).unwrap();
        assert!(!nu.is_uniform());
        assert!(nu.spacing().is_err());
    }

    proptest! {
        #[test]
        fn partition_of_unity(x in 0.0f64..=1.0, p in 1usize..=4, n_el in 1usize..=12) {
            let s = SplineSpace::uniform(p, n_el).unwrap();
            let sum: f64 = (0..s.dim()).map(|i| s.eval_basis(i, x).unwrap()).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-13);
        }

        #[test]
        fn derivative_sum_vanishes(x in 0.001f64..=0.999, p in 2usize..=4, n_el in 2usize..=12) {
            let s = SplineSpace::uniform(p, n_el).unwrap();
            let sum: f64 = (0..s.dim()).map(|i| s.eval_deriv(i, x).unwrap()).sum();
            prop_assert!(sum.abs() <= 1e-12 * n_el as f64);
        }

        #[test]
        fn non_negativity(x in 0.0f64..=1.0, p in 1usize..=4, n_el in 1usize..=12) {
            let s = SplineSpace::uniform(p, n_el).unwrap();
            for i in 0..s.dim() {
                prop_assert!(s.eval_basis(i, x).unwrap() >= -1e-15);
            }
        }

        #[test]
        fn zero_outside_support(p in 1usize..=4, n_el in 2usize..=10, i in 0usize..14, x in 0.0f64..=1.0) {
            let s = SplineSpace::uniform(p, n_el).unwrap();
            prop_assume!(i < s.dim());
            let supp = s.support(i).unwrap();
            if x < supp.lo - 1e-12 || x > supp.hi + 1e-12 {
                prop_assert!(s.eval_basis(i, x).unwrap() == 0.0);
            }
        }
    }
}
