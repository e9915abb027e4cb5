//! Finite-difference checks for pseudo-holomorphic functions on a chart.
//!
//! `J` is stored per point as `j[k][p] = J_k^p`, the coefficient in
//! `J ∂/∂x_k = J_k^p ∂/∂x_p`. All derivatives are central differences of
//! order `h²`, and every reduction is a sequential fold in point order.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EllipticError {
    #[error("axis {axis} has {points} points; at least 5 are required")]
    GridTooSmall { axis: usize, points: usize },
    #[error("spacing must be positive, got {0}")]
    InvalidSpacing(f64),
    #[error("J² ≠ −1 at point {point} (deviation {deviation:e})")]
    NotAlmostComplex { point: usize, deviation: f64 },
    #[error("coefficient matrix is not positive definite at the center")]
    NotPositiveAtCenter,
    #[error("ball of radius {radius} around {center:?} leaves the usable grid")]
    BallOutOfRange { center: Vec<i64>, radius: f64 },
    #[error("field has {found} values, grid has {expected} points")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("unknown sample `{0}`")]
    UnknownSample(String),
    #[error("grid file: {0}")]
    Parse(String),
}

/// A rectangular grid `x_a = i_a·h`, `i_a ∈ [lo_a, hi_a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartGrid {
    pub dim: usize,
    pub h: f64,
    pub extents: Vec<(i64, i64)>,
}

impl ChartGrid {
    pub fn new(dim: usize, h: f64, extents: Vec<(i64, i64)>) -> Result<Self, EllipticError> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(EllipticError::InvalidSpacing(h));
        }
        if extents.len() != dim {
            return Err(EllipticError::ShapeMismatch { expected: dim, found: extents.len() });
        }
        for (axis, (lo, hi)) in extents.iter().enumerate() {
            let points = (hi - lo + 1).max(0) as usize;
            if points < 5 {
                return Err(EllipticError::GridTooSmall { axis, points });
            }
        }
        Ok(ChartGrid { dim, h, extents })
    }

    /// `[−extent, extent]^dim` with `h = extent / m`, i.e. `m` steps per half-axis.
    pub fn cube(dim: usize, extent: f64, m: i64) -> Result<Self, EllipticError> {
        ChartGrid::new(dim, extent / m as f64, vec![(-m, m); dim])
    }

    pub fn len(&self) -> usize {
        self.extents.iter().map(|(lo, hi)| (hi - lo + 1) as usize).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, multi: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for (a, (lo, hi)) in self.extents.iter().enumerate() {
            let i = multi[a];
            if i < *lo || i > *hi {
                return None;
            }
            idx = idx * (hi - lo + 1) as usize + (i - lo) as usize;
        }
        Some(idx)
    }

    pub fn multi(&self, mut idx: usize) -> Vec<i64> {
        let mut out = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            let (lo, hi) = self.extents[a];
            let n = (hi - lo + 1) as usize;
            out[a] = lo + (idx % n) as i64;
            idx /= n;
        }
        out
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        self.multi(idx).into_iter().map(|i| i as f64 * self.h).collect()
    }

    fn shifted(&self, multi: &[i64], moves: &[(usize, i64)]) -> Option<usize> {
        let mut m = multi.to_vec();
        for (axis, step) in moves {
            m[*axis] += step;
        }
        self.index(&m)
    }

    /// At least `margin` points from every edge.
    pub fn is_interior(&self, idx: usize, margin: i64) -> bool {
        let m = self.multi(idx);
        self.extents.iter().zip(&m).all(|((lo, hi), i)| i - lo >= margin && hi - i >= margin)
    }

    /// Grid points within Euclidean index distance `radius` of `center`.
    pub fn ball(&self, center: &[i64], radius: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|idx| dist(&self.multi(*idx), center) <= radius + 1e-12)
            .collect()
    }

    fn ball_fits(&self, center: &[i64], radius: f64, margin: i64) -> bool {
        let r = radius.floor() as i64;
        self.extents.iter().zip(center).all(|((lo, hi), c)| c - r - margin >= *lo && c + r + margin <= *hi)
    }
}

fn dist(a: &[i64], b: &[i64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| ((x - y) * (x - y)) as f64).sum::<f64>().sqrt()
}

/// Per-point `2n×2n` matrices, row-major `j[k][p]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlmostComplexField {
    pub grid: ChartGrid,
    pub values: Vec<Vec<f64>>,
}

impl AlmostComplexField {
    pub fn from_fn(grid: &ChartGrid, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        AlmostComplexField { grid: grid.clone(), values }
    }

    pub fn standard(grid: &ChartGrid) -> Self {
        let s = standard_block(grid.dim);
        AlmostComplexField::from_fn(grid, |_| s.clone())
    }

    pub fn j(&self, point: usize, k: usize, p: usize) -> f64 {
        self.values[point][k * self.grid.dim + p]
    }

    /// Checks `‖J² + 1‖∞ ≤ tol` everywhere.
    pub fn validate(&self, tol: f64) -> Result<(), EllipticError> {
        let d = self.grid.dim;
        if self.values.len() != self.grid.len() {
            return Err(EllipticError::ShapeMismatch { expected: self.grid.len(), found: self.values.len() });
        }
        for (point, m) in self.values.iter().enumerate() {
            if m.len() != d * d {
                return Err(EllipticError::ShapeMismatch { expected: d * d, found: m.len() });
            }
            let sq = matmul(m, m, d);
            let deviation = (0..d * d)
                .map(|i| (sq[i] + if i / d == i % d { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            if deviation > tol {
                return Err(EllipticError::NotAlmostComplex { point, deviation });
            }
        }
        Ok(())
    }
}

/// `[[0, I], [−I, 0]]` in `j[k][p]` storage.
pub fn standard_block(dim: usize) -> Vec<f64> {
    let n = dim / 2;
    let mut m = vec![0.0; dim * dim];
    for a in 0..n {
        m[a * dim + n + a] = 1.0;
        m[(n + a) * dim + a] = -1.0;
    }
    m
}

fn matmul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for r in 0..d {
        for c in 0..d {
            out[r * d + c] = (0..d).fold(0.0, |s, k| s + a[r * d + k] * b[k * d + c]);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarPairField {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl ScalarPairField {
    pub fn from_fn(grid: &ChartGrid, f: impl Fn(&[f64]) -> (f64, f64)) -> Self {
        let (f, g) = (0..grid.len()).map(|i| f(&grid.coords(i))).unzip();
        ScalarPairField { f, g }
    }
}

fn check_field(grid: &ChartGrid, len: usize) -> Result<(), EllipticError> {
    if len != grid.len() {
        return Err(EllipticError::ShapeMismatch { expected: grid.len(), found: len });
    }
    Ok(())
}

fn d1(grid: &ChartGrid, values: &[f64], multi: &[i64], axis: usize) -> f64 {
    let plus = grid.shifted(multi, &[(axis, 1)]).expect("interior point");
    let minus = grid.shifted(multi, &[(axis, -1)]).expect("interior point");
    (values[plus] - values[minus]) / (2.0 * grid.h)
}

fn d2(grid: &ChartGrid, values: &[f64], multi: &[i64], p: usize, q: usize) -> f64 {
    let h2 = grid.h * grid.h;
    let at = |moves: &[(usize, i64)]| values[grid.shifted(multi, moves).expect("interior point")];
    if p == q {
        (at(&[(p, 1)]) - 2.0 * at(&[]) + at(&[(p, -1)])) / h2
    } else {
        (at(&[(p, 1), (q, 1)]) - at(&[(p, 1), (q, -1)]) - at(&[(p, -1), (q, 1)]) + at(&[(p, -1), (q, -1)])) / (4.0 * h2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RcReport {
    /// Max over interior points.
    pub max: f64,
    /// `None` on boundary points.
    #[serde(skip)]
    pub per_point: Vec<Option<f64>>,
    pub interior_points: usize,
}

/// Residuals of `∂_k f = J_k^p ∂_p g` and `∂_k g = −J_k^p ∂_p f`.
pub fn rc_residual(j: &AlmostComplexField, fg: &ScalarPairField) -> Result<RcReport, EllipticError> {
    let grid = &j.grid;
    check_field(grid, j.values.len())?;
    check_field(grid, fg.f.len())?;
    check_field(grid, fg.g.len())?;
    let d = grid.dim;
    let mut per_point = Vec::with_capacity(grid.len());
    let mut max = 0.0f64;
    let mut interior_points = 0;
    for idx in 0..grid.len() {
        if !grid.is_interior(idx, 1) {
            per_point.push(None);
            continue;
        }
        let m = grid.multi(idx);
        let df: Vec<f64> = (0..d).map(|a| d1(grid, &fg.f, &m, a)).collect();
        let dg: Vec<f64> = (0..d).map(|a| d1(grid, &fg.g, &m, a)).collect();
        let mut worst = 0.0f64;
        for k in 0..d {
            let jg = (0..d).fold(0.0, |s, p| s + j.j(idx, k, p) * dg[p]);
            let jf = (0..d).fold(0.0, |s, p| s + j.j(idx, k, p) * df[p]);
            worst = worst.max((df[k] - jg).abs()).max((dg[k] + jf).abs());
        }
        interior_points += 1;
        max = max.max(worst);
        per_point.push(Some(worst));
    }
    Ok(RcReport { max, per_point, interior_points })
}

/// Which first-order coefficient to use in the operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstOrder {
    /// `Σ_k (J_k^p ∂_p J_k^q + ∂_k J_k^p J_p^q)`, obtained by substituting
    /// `∂_p g = −J_p^q ∂_q f` when differentiating `∂_k f = J_k^p ∂_p g`.
    Derived,
    /// `Σ_k (J_k^p ∂_p J_k^q − ∂_k J_k^p J_p^q)`, the form with the opposite
    /// sign on the divergence term. It does not annihilate pseudo-holomorphic
    /// real parts once `J` varies.
    Stated,
}

/// `a^{pq}` at every point and both first-order coefficients at interior points.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipticCoefficients {
    pub grid: ChartGrid,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Option<Vec<f64>>>,
    pub b_stated: Vec<Option<Vec<f64>>>,
}

impl EllipticCoefficients {
    pub fn first_order(&self, which: FirstOrder) -> &[Option<Vec<f64>>] {
        match which {
            FirstOrder::Derived => &self.b,
            FirstOrder::Stated => &self.b_stated,
        }
    }

    /// Largest `|b − b_stated|` over interior points.
    pub fn first_order_gap(&self) -> f64 {
        self.b
            .iter()
            .zip(&self.b_stated)
            .filter_map(|(x, y)| Some(x.as_ref()?.iter().zip(y.as_ref()?).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))))
            .fold(0.0, f64::max)
    }
}

/// `a^{pq} = δ + Σ_k J_k^p J_k^q` together with both first-order coefficients.
pub fn elliptic_coefficients(j: &AlmostComplexField) -> Result<EllipticCoefficients, EllipticError> {
    let grid = &j.grid;
    check_field(grid, j.values.len())?;
    let d = grid.dim;
    let a = (0..grid.len())
        .map(|idx| {
            let mut m = vec![0.0; d * d];
            for p in 0..d {
                for q in 0..d {
                    let s = (0..d).fold(0.0, |s, k| s + j.j(idx, k, p) * j.j(idx, k, q));
                    m[p * d + q] = s + if p == q { 1.0 } else { 0.0 };
                }
            }
            m
        })
        .collect();
    let component = |k: usize, p: usize| -> Vec<f64> { j.values.iter().map(|m| m[k * d + p]).collect() };
    let comps: Vec<Vec<f64>> = (0..d * d).map(|i| component(i / d, i % d)).collect();
    let first = |sign: f64| -> Vec<Option<Vec<f64>>> {
        (0..grid.len())
            .map(|idx| {
                if !grid.is_interior(idx, 1) {
                    return None;
                }
                let m = grid.multi(idx);
                let dj = |k: usize, p: usize, axis: usize| d1(grid, &comps[k * d + p], &m, axis);
                let mut b = vec![0.0; d];
                for (q, bq) in b.iter_mut().enumerate() {
                    *bq = (0..d).fold(0.0, |s, k| {
                        (0..d).fold(s, |s, p| s + j.j(idx, k, p) * dj(k, q, p) + sign * dj(k, p, k) * j.j(idx, p, q))
                    });
                }
                Some(b)
            })
            .collect()
    };
    Ok(EllipticCoefficients { grid: grid.clone(), a, b: first(1.0), b_stated: first(-1.0) })
}

/// Leading principal minors of a row-major `d×d` matrix, by Gaussian elimination.
pub fn leading_minors(m: &[f64], d: usize) -> Vec<f64> {
    let mut a = m.to_vec();
    let mut minors = Vec::with_capacity(d);
    let mut det = 1.0;
    for k in 0..d {
        let pivot = a[k * d + k];
        det *= pivot;
        minors.push(det);
        if pivot == 0.0 {
            minors.resize(d, 0.0);
            return minors;
        }
        for r in k + 1..d {
            let f = a[r * d + k] / pivot;
            for c in k..d {
                a[r * d + c] -= f * a[k * d + c];
            }
        }
    }
    minors
}

pub fn is_positive_definite(m: &[f64], d: usize) -> bool {
    leading_minors(m, d).iter().all(|x| *x > 0.0)
}

/// Largest integer radius `r` such that every point of the grid ball of
/// radius `r` lies in the grid and carries a positive definite `a`.
pub fn positive_definite_region(grid: &ChartGrid, a: &[Vec<f64>], center: &[i64]) -> Result<usize, EllipticError> {
    check_field(grid, a.len())?;
    let c = grid.index(center).ok_or(EllipticError::BallOutOfRange { center: center.to_vec(), radius: 0.0 })?;
    let d = grid.dim;
    if !is_positive_definite(&a[c], d) {
        return Err(EllipticError::NotPositiveAtCenter);
    }
    let mut bad = f64::INFINITY;
    for idx in 0..grid.len() {
        if !is_positive_definite(&a[idx], d) {
            bad = bad.min(dist(&grid.multi(idx), center));
        }
    }
    let fit = grid.extents.iter().zip(center).map(|((lo, hi), x)| (x - lo).min(hi - x)).min().unwrap_or(0);
    let mut r = fit.max(0) as usize;
    while r as f64 >= bad {
        r -= 1;
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub sup_interior: f64,
    pub sup_boundary: f64,
    pub inf_interior: f64,
    pub inf_boundary: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Splits the grid ball into boundary points (some axis neighbor outside
/// the ball) and interior points and compares extrema.
pub fn max_principle_check(
    grid: &ChartGrid,
    f: &[f64],
    center: &[i64],
    radius: f64,
    tol: f64,
) -> Result<MaxPrincipleReport, EllipticError> {
    check_field(grid, f.len())?;
    if !grid.ball_fits(center, radius, 0) {
        return Err(EllipticError::BallOutOfRange { center: center.to_vec(), radius });
    }
    let inside = |m: &[i64]| dist(m, center) <= radius + 1e-12;
    let (mut si, mut sb, mut ii, mut ib) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::INFINITY);
    for idx in grid.ball(center, radius) {
        let m = grid.multi(idx);
        let on_boundary = (0..grid.dim).any(|a| {
            [-1, 1].iter().any(|s| {
                let mut n = m.clone();
                n[a] += s;
                !inside(&n)
            })
        });
        let v = f[idx];
        if on_boundary {
            sb = sb.max(v);
            ib = ib.min(v);
        } else {
            si = si.max(v);
            ii = ii.min(v);
        }
    }
    let pass = si <= sb + tol && ii >= ib - tol;
    Ok(MaxPrincipleReport { sup_interior: si, sup_boundary: sb, inf_interior: ii, inf_boundary: ib, tol, pass })
}

/// `max |a^{pq} ∂_p∂_q f + b^q ∂_q f|` over the ball.
pub fn operator_residual(j: &AlmostComplexField, f: &[f64], center: &[i64], radius: f64) -> Result<f64, EllipticError> {
    operator_residual_with(j, f, center, radius, FirstOrder::Derived)
}

pub fn operator_residual_with(
    j: &AlmostComplexField,
    f: &[f64],
    center: &[i64],
    radius: f64,
    which: FirstOrder,
) -> Result<f64, EllipticError> {
    let grid = &j.grid;
    check_field(grid, f.len())?;
    if !grid.ball_fits(center, radius, 1) {
        return Err(EllipticError::BallOutOfRange { center: center.to_vec(), radius });
    }
    let coeffs = elliptic_coefficients(j)?;
    let d = grid.dim;
    let mut worst = 0.0f64;
    for idx in grid.ball(center, radius) {
        let m = grid.multi(idx);
        let a = &coeffs.a[idx];
        let b = coeffs.first_order(which)[idx].as_ref().expect("ball keeps a margin");
        let mut l = 0.0;
        for p in 0..d {
            for q in 0..d {
                l += a[p * d + q] * d2(grid, f, &m, p, q);
            }
            l += b[p] * d1(grid, f, &m, p);
        }
        worst = worst.max(l.abs());
    }
    Ok(worst)
}

/// Named sample data on a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sample {
    /// `Re z², Im z²` with standard `J`.
    Z2,
    /// `Re z³, Im z³`.
    Z3,
    /// `Re e^z, Im e^z`.
    Exp,
    /// `(Re z², Im z²) ∘ φ` with `J` pulled back along the diffeomorphism
    /// `φ(x, y) = (x + ε sin y, y + ε sin x)`, `ε = 1/5`.
    WarpedZ2,
    /// `f = x`, `g = 0`.
    Linear,
    /// `f = 1 − |x|²`, `g = 0`.
    Dome,
    /// `f = x²`, `g = 0`.
    Square,
    /// `f = 1`, `g = 2`.
    Constant,
}

pub const ALL_SAMPLES: [Sample; 8] =
    [Sample::Z2, Sample::Z3, Sample::Exp, Sample::WarpedZ2, Sample::Linear, Sample::Dome, Sample::Square, Sample::Constant];

const WARP: f64 = 0.2;

impl Sample {
    pub fn name(self) -> &'static str {
        match self {
            Sample::Z2 => "z2",
            Sample::Z3 => "z3",
            Sample::Exp => "exp",
            Sample::WarpedZ2 => "warped_z2",
            Sample::Linear => "linear",
            Sample::Dome => "dome",
            Sample::Square => "square",
            Sample::Constant => "constant",
        }
    }

    pub fn from_name(s: &str) -> Result<Self, EllipticError> {
        ALL_SAMPLES.into_iter().find(|x| x.name() == s).ok_or_else(|| EllipticError::UnknownSample(s.into()))
    }

    /// True when `f + ig` is pseudo-holomorphic for the sample's `J`.
    pub fn is_pseudo_holomorphic(self) -> bool {
        matches!(self, Sample::Z2 | Sample::Z3 | Sample::Exp | Sample::WarpedZ2 | Sample::Constant)
    }

    pub fn j_field(self, grid: &ChartGrid) -> AlmostComplexField {
        match self {
            Sample::WarpedZ2 => AlmostComplexField::from_fn(grid, |x| warped_j(x, grid.dim)),
            _ => AlmostComplexField::standard(grid),
        }
    }

    /// Values at a point; `z = x_1 + i x_{n+1}`.
    pub fn eval(self, x: &[f64]) -> (f64, f64) {
        let n = x.len() / 2;
        let (u, v) = (x[0], x[n]);
        match self {
            Sample::Z2 => (u * u - v * v, 2.0 * u * v),
            Sample::Z3 => (u * u * u - 3.0 * u * v * v, 3.0 * u * u * v - v * v * v),
            Sample::Exp => (u.exp() * v.cos(), u.exp() * v.sin()),
            Sample::WarpedZ2 => {
                let (a, b) = warp(u, v);
                (a * a - b * b, 2.0 * a * b)
            }
            Sample::Linear => (u, 0.0),
            Sample::Dome => (1.0 - x.iter().map(|t| t * t).sum::<f64>(), 0.0),
            Sample::Square => (u * u, 0.0),
            Sample::Constant => (1.0, 2.0),
        }
    }

    pub fn pair(self, grid: &ChartGrid) -> ScalarPairField {
        ScalarPairField::from_fn(grid, |x| self.eval(x))
    }
}

fn warp(x: f64, y: f64) -> (f64, f64) {
    (x + WARP * y.sin(), y + WARP * x.sin())
}

/// `φ*J_std` on the `(x_1, x_{n+1})` plane, standard elsewhere.
fn warped_j(x: &[f64], dim: usize) -> Vec<f64> {
    let n = dim / 2;
    let (u, v) = (x[0], x[n]);
    // Dφ columns: ∂_x ↦ (1, ε cos x), ∂_y ↦ (ε cos y, 1)
    let (a, b, c, d) = (1.0, WARP * v.cos(), WARP * u.cos(), 1.0);
    let det = a * d - b * c;
    // M = Dφ⁻¹ J0 Dφ acting on columns, J0 = [[0, −1], [1, 0]]
    let j0 = [[0.0, -1.0], [1.0, 0.0]];
    let dphi = [[a, b], [c, d]];
    let inv = [[d / det, -b / det], [-c / det, a / det]];
    let mut m = [[0.0; 2]; 2];
    for r in 0..2 {
        for s in 0..2 {
            m[r][s] = (0..2).fold(0.0, |acc, k| acc + inv[r][k] * (0..2).fold(0.0, |t, l| t + j0[k][l] * dphi[l][s]));
        }
    }
    let mut out = standard_block(dim);
    let axes = [0, n];
    for (k, &ak) in axes.iter().enumerate() {
        for (p, &ap) in axes.iter().enumerate() {
            // j[k][p] = J_k^p = M[p][k]
            out[ak * dim + ap] = m[p][k];
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct GridHeader {
    dim: usize,
    h: f64,
    extents: Vec<(i64, i64)>,
    columns: Vec<String>,
}

/// Named columns over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridData {
    pub grid: ChartGrid,
    pub columns: Vec<String>,
    /// `rows[point][column]`.
    pub rows: Vec<Vec<f64>>,
}

impl GridData {
    /// Columns `f`, `g` and `J{k}{p}`.
    pub fn from_sample(sample: Sample, grid: &ChartGrid) -> Self {
        let d = grid.dim;
        let j = sample.j_field(grid);
        let fg = sample.pair(grid);
        let mut columns = vec!["f".to_string(), "g".to_string()];
        columns.extend((0..d * d).map(|i| format!("J{}{}", i / d, i % d)));
        let rows = (0..grid.len())
            .map(|idx| {
                let mut r = vec![fg.f[idx], fg.g[idx]];
                r.extend(j.values[idx].iter().copied());
                r
            })
            .collect();
        GridData { grid: grid.clone(), columns, rows }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.columns.iter().position(|x| x == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }

    /// `J` from columns `J{k}{p}`, standard when absent.
    pub fn j_field(&self) -> Result<AlmostComplexField, EllipticError> {
        let d = self.grid.dim;
        let idx: Option<Vec<usize>> = (0..d * d)
            .map(|i| self.columns.iter().position(|x| *x == format!("J{}{}", i / d, i % d)))
            .collect();
        match idx {
            None => Ok(AlmostComplexField::standard(&self.grid)),
            Some(cols) => Ok(AlmostComplexField {
                grid: self.grid.clone(),
                values: self.rows.iter().map(|r| cols.iter().map(|c| r[*c]).collect()).collect(),
            }),
        }
    }

    pub fn pair(&self) -> Result<ScalarPairField, EllipticError> {
        let f = self.column("f").ok_or_else(|| EllipticError::Parse("missing column f".into()))?;
        let g = self.column("g").unwrap_or_else(|| vec![0.0; f.len()]);
        Ok(ScalarPairField { f, g })
    }

    /// One JSON header line, then one CSV row per point in index order.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header = GridHeader {
            dim: self.grid.dim,
            h: self.grid.h,
            extents: self.grid.extents.clone(),
            columns: self.columns.clone(),
        };
        writeln!(w, "{}", serde_json::to_string(&header).expect("header serializes"))?;
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self, EllipticError> {
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| EllipticError::Parse("empty file".into()))?
            .map_err(|e| EllipticError::Parse(e.to_string()))?;
        let header: GridHeader = serde_json::from_str(&first).map_err(|e| EllipticError::Parse(e.to_string()))?;
        let grid = ChartGrid::new(header.dim, header.h, header.extents)?;
        let mut rows = Vec::with_capacity(grid.len());
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| EllipticError::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| EllipticError::Parse(format!("row {}: {e}", n + 1)))?;
            if row.len() != header.columns.len() {
                return Err(EllipticError::Parse(format!("row {} has {} values", n + 1, row.len())));
            }
            rows.push(row);
        }
        check_field(&grid, rows.len())?;
        Ok(GridData { grid, columns: header.columns, rows })
    }
}

/// Halving ratios `r(h)/r(h/2)` of a residual sequence.
pub fn halving_ratios(residuals: &[f64]) -> Vec<f64> {
    residuals.windows(2).map(|w| w[0] / w[1]).collect()
}

/// Second-order convergence: every ratio ≥ 3.5, or the residuals are
/// already at rounding level (stencils exact for low-degree polynomials).
pub fn converges_second_order(residuals: &[f64]) -> bool {
    residuals.iter().all(|r| *r <= 1e-9) || halving_ratios(residuals).iter().all(|q| *q >= 3.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(m: i64) -> ChartGrid {
        ChartGrid::cube(2, 1.0, m).unwrap()
    }

    #[test]
    fn grid_indexing() {
        let g = ChartGrid::new(2, 0.5, vec![(-2, 2), (0, 4)]).unwrap();
        assert_eq!(g.len(), 25);
        for i in 0..g.len() {
            assert_eq!(g.index(&g.multi(i)), Some(i));
        }
        assert_eq!(g.coords(0), vec![-1.0, 0.0]);
        assert!(matches!(ChartGrid::new(1, 0.1, vec![(0, 3)]), Err(EllipticError::GridTooSmall { .. })));
        assert!(matches!(ChartGrid::new(1, 0.0, vec![(0, 9)]), Err(EllipticError::InvalidSpacing(_))));
    }

    #[test]
    fn standard_coefficients() {
        for dim in [2, 4] {
            let g = ChartGrid::cube(dim, 1.0, 3).unwrap();
            let c = elliptic_coefficients(&AlmostComplexField::standard(&g)).unwrap();
            for a in &c.a {
                for p in 0..dim {
                    for q in 0..dim {
                        assert_eq!(a[p * dim + q], if p == q { 2.0 } else { 0.0 });
                    }
                }
            }
            assert!(c.b.iter().flatten().all(|b| b.iter().all(|x| *x == 0.0)));
        }
    }

    #[test]
    fn rc_examples() {
        let g = unit(16);
        let j = AlmostComplexField::standard(&g);
        assert!(rc_residual(&j, &Sample::Z2.pair(&g)).unwrap().max < 1e-12);
        let lin = rc_residual(&j, &Sample::Linear.pair(&g)).unwrap().max;
        assert!((lin - 1.0).abs() < 1e-12);
        assert_eq!(rc_residual(&j, &Sample::Constant.pair(&g)).unwrap().max, 0.0);
    }

    #[test]
    fn warped_structure_is_valid_and_converges() {
        let mut rc = Vec::new();
        let mut op = Vec::new();
        for m in [32, 64, 128] {
            let g = unit(m);
            let j = Sample::WarpedZ2.j_field(&g);
            j.validate(1e-9).unwrap();
            let fg = Sample::WarpedZ2.pair(&g);
            rc.push(rc_residual(&j, &fg).unwrap().max);
            op.push(operator_residual(&j, &fg.f, &[0, 0], (m / 2) as f64).unwrap());
        }
        assert!(converges_second_order(&rc), "{rc:?}");
        assert!(converges_second_order(&op), "{op:?}");
        assert!(rc[0] > 1e-9);
    }

    #[test]
    fn stated_first_order_term_misses_varying_j() {
        let g = unit(64);
        let j = Sample::WarpedZ2.j_field(&g);
        let f = Sample::WarpedZ2.pair(&g).f;
        let stated = operator_residual_with(&j, &f, &[0, 0], 32.0, FirstOrder::Stated).unwrap();
        let derived = operator_residual(&j, &f, &[0, 0], 32.0).unwrap();
        assert!(stated > 1e-2 && derived < 1e-4, "{stated} {derived}");
        let c = elliptic_coefficients(&AlmostComplexField::standard(&g)).unwrap();
        assert_eq!(c.first_order_gap(), 0.0);
    }

    #[test]
    fn operator_on_square() {
        let g = unit(16);
        let j = AlmostComplexField::standard(&g);
        let r = operator_residual(&j, &Sample::Square.pair(&g).f, &[0, 0], 8.0).unwrap();
        assert!((r - 4.0).abs() < 1e-9);
        assert!(operator_residual(&j, &Sample::Constant.pair(&g).f, &[0, 0], 8.0).unwrap() < 1e-12);
        assert!(matches!(operator_residual(&j, &Sample::Z2.pair(&g).f, &[0, 0], 16.0), Err(EllipticError::BallOutOfRange { .. })));
    }

    #[test]
    fn maximum_principle_samples() {
        let g = unit(32);
        for s in [Sample::Z3, Sample::Exp, Sample::Z2] {
            let rep = max_principle_check(&g, &s.pair(&g).f, &[0, 0], 32.0, 1e-9).unwrap();
            assert!(rep.pass, "{s:?} {rep:?}");
        }
        let rep = max_principle_check(&g, &Sample::Dome.pair(&g).f, &[0, 0], 32.0, 1e-9).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn definite_region() {
        let g = unit(10);
        let c = elliptic_coefficients(&AlmostComplexField::standard(&g)).unwrap();
        assert_eq!(positive_definite_region(&g, &c.a, &[0, 0]).unwrap(), 10);
        let mut a = c.a.clone();
        for idx in 0..g.len() {
            if dist(&g.multi(idx), &[0, 0]) >= 4.0 {
                a[idx] = vec![1.0, 0.0, 0.0, -1.0];
            }
        }
        assert_eq!(positive_definite_region(&g, &a, &[0, 0]).unwrap(), 3);
        assert_eq!(positive_definite_region(&g, &a, &[9, 9]), Err(EllipticError::NotPositiveAtCenter));
    }

    #[test]
    fn grid_file_round_trip() {
        let g = ChartGrid::cube(2, 1.0, 4).unwrap();
        let data = GridData::from_sample(Sample::WarpedZ2, &g);
        let mut buf = Vec::new();
        data.write(&mut buf).unwrap();
        let back = GridData::read(buf.as_slice()).unwrap();
        assert_eq!(back, data);
    }
}
