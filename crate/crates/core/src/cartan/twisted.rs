//! Twisted cohomology with trust windows, exp(b) transforms, relative groups
//! of pairs, Euler-class multiplication and the formality test.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::complex::{CartanComplex, EquivariantForm, Twisting};
use super::model::{occurrences, CdgaModel, Term};
use super::CartanError;
use crate::dg::{dense_rank, induced_map, six_term_check as dg_six_term, Classes, ConePair, Grading, SixTermReport};
use crate::linalg::{kernel_basis, solve, Rational, SparseMatrix, SparseVec};

#[derive(Clone, Debug, PartialEq)]
pub struct TwistedCohomology {
    pub even: usize,
    pub odd: usize,
    pub representatives: Vec<EquivariantForm>,
    pub window: i32,
    pub poly_cap: u32,
    /// Classes are images in the quotient keeping polynomial degree ≤ this.
    pub trusted_poly: u32,
    /// Always true on success; instability is reported as an error.
    pub stable: bool,
}

impl TwistedCohomology {
    pub fn total(&self) -> usize {
        self.even + self.odd
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradedCohomology {
    pub dims: BTreeMap<i32, usize>,
    pub representatives: Vec<(i32, EquivariantForm)>,
    pub window: i32,
    pub poly_cap: u32,
    pub stable: bool,
}

impl GradedCohomology {
    pub fn total(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn parity_dims(&self) -> (usize, usize) {
        let odd = self.dims.iter().filter(|(n, _)| n.rem_euclid(2) == 1).map(|(_, d)| d).sum();
        (self.total() - odd, odd)
    }
}

fn keep_poly(cap: u32) -> impl Fn(&crate::dg::Cell) -> bool + Copy {
    move |cell| cell.poly <= cap
}

/// Classes of `Q_D` (twisted by `eta` when given) imaged in the quotient that
/// keeps polynomial degree ≤ `keep`.
pub fn windowed_classes(
    c: &CartanComplex,
    eta: Option<&Twisting>,
    grading: Grading,
    keep: u32,
) -> Result<Classes, CartanError> {
    let flat = match eta {
        Some(eta) => c.twisted_complex(eta)?,
        None => c.flat(),
    };
    Ok(flat.windowed_cohomology(grading, keep_poly(keep))?)
}

/// ℤ₂-graded `H(Q_D; d_G + η)` on the trust window, checked against `D + 2`.
pub fn twisted_cohomology(c: &CartanComplex, eta: &Twisting) -> Result<TwistedCohomology, CartanError> {
    let keep = c.trusted_poly();
    let classes = windowed_classes(c, Some(eta), Grading::Parity, keep)?;
    let (even, odd) = classes.parity_dims();
    if c.rank() > 0 {
        let wider = c.with_cap(c.poly_cap() + 2)?;
        let check = windowed_classes(&wider, Some(eta), Grading::Parity, keep)?.parity_dims();
        if check != (even, odd) {
            return Err(CartanError::UnstableWindow { at_cap: (even, odd), at_cap_plus_two: check });
        }
    }
    Ok(TwistedCohomology {
        even,
        odd,
        representatives: classes.representatives().iter().map(|z| c.from_vec(z)).collect(),
        window: c.window(),
        poly_cap: c.poly_cap(),
        trusted_poly: keep,
        stable: true,
    })
}

/// ℤ-graded `H(Q_D; d_G)` on the trust window, checked against `D + 2`.
pub fn equivariant_cohomology(c: &CartanComplex) -> Result<GradedCohomology, CartanError> {
    let keep = c.trusted_poly();
    let classes = windowed_classes(c, None, Grading::Degree, keep)?;
    let dims = classes.dims();
    if c.rank() > 0 {
        let wider = c.with_cap(c.poly_cap() + 2)?;
        let check = windowed_classes(&wider, None, Grading::Degree, keep)?;
        if check.dims() != dims {
            let fold = |d: &BTreeMap<i32, usize>| {
                let odd: usize = d.iter().filter(|(n, _)| n.rem_euclid(2) == 1).map(|(_, v)| v).sum();
                (d.values().sum::<usize>() - odd, odd)
            };
            return Err(CartanError::UnstableWindow { at_cap: fold(&dims), at_cap_plus_two: fold(&check.dims()) });
        }
    }
    Ok(GradedCohomology {
        dims,
        representatives: classes
            .keys()
            .iter()
            .zip(classes.representatives())
            .map(|(k, z)| (*k, c.from_vec(z)))
            .collect(),
        window: c.window(),
        poly_cap: c.poly_cap(),
        stable: true,
    })
}

fn truncate(c: &CartanComplex, f: &EquivariantForm) -> EquivariantForm {
    c.from_vec(&c.to_vec(f))
}

/// `exp(b) = Σ b^k / k!` in `Q_D`; the sum is finite since `b` has degree 2.
pub fn exp_form(c: &CartanComplex, b: &EquivariantForm) -> Result<EquivariantForm, CartanError> {
    if !b.is_zero() && b.degree(c.model()) != Some(2) {
        return Err(CartanError::NotHomogeneous("exp(b) needs b of degree 2".into()));
    }
    let mut acc = EquivariantForm::term(0, vec![0; c.rank()], Rational::from(1));
    let mut term = acc.clone();
    let mut k = 1i64;
    loop {
        term = truncate(c, &term.mul(c.model(), b)).scale(&Rational::new(1, k));
        if term.is_zero() {
            return Ok(acc);
        }
        acc = acc.add(&term);
        k += 1;
    }
}

/// `exp(b) ∧ f` in `Q_D`.
pub fn exp_b_transform(
    c: &CartanComplex,
    b: &EquivariantForm,
    f: &EquivariantForm,
) -> Result<EquivariantForm, CartanError> {
    Ok(truncate(c, &exp_form(c, b)?.mul(c.model(), f)))
}

/// Checks `δ_η ∘ exp(b) = exp(b) ∘ δ_{η + d_G b}` as matrices on `Q_D`.
pub fn conjugation_identity(c: &CartanComplex, eta: &Twisting, b: &EquivariantForm) -> Result<bool, CartanError> {
    let e = c.mult_matrix(&exp_form(c, b)?);
    let lhs = c.twisted_operator(&eta.total()).mul(&e);
    let rhs = e.mul(&c.twisted_operator(&eta.total().add(&b.d_g(c.model()))));
    Ok(lhs == rhs)
}

/// Some `b` with `d_G b = f`, or `None` when `f` is not exact.
pub fn exactness_solve(c: &CartanComplex, f: &EquivariantForm) -> Result<Option<EquivariantForm>, CartanError> {
    if f.is_zero() {
        return Ok(Some(EquivariantForm::zero()));
    }
    let n = f.degree(c.model()).ok_or_else(|| CartanError::NotHomogeneous("exactness needs a homogeneous form".into()))?;
    let cc = ample(c, n)?;
    let rows = cc.cells_of_degree(n as i32);
    let cols = cc.cells_of_degree(n as i32 - 1);
    let a = cc.d_g().select(&rows, &cols);
    let target = cc.to_vec(f);
    let pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
    let rhs = target.filter_map_index(|j| pos.get(&j).copied());
    Ok(solve(&a, &rhs).map(|x| cc.from_vec(&x.filter_map_index(|i| Some(cols[i])))))
}

/// A copy whose cap leaves degree-`n` computations untouched by truncation.
fn ample(c: &CartanComplex, n: u32) -> Result<CartanComplex, CartanError> {
    let need = (n + 2) / 2;
    if c.rank() == 0 || c.poly_cap() >= need {
        Ok(c.clone())
    } else {
        c.with_cap(need)
    }
}

pub fn random_rational(rng: &mut impl Rng) -> Rational {
    let mut num = 0;
    while num == 0 {
        num = rng.gen_range(-5i64..=5);
    }
    Rational::new(num, rng.gen_range(1i64..=3))
}

/// Random combination of all degree-`n` cells of polynomial degree ≤ the cap.
pub fn random_form(c: &CartanComplex, n: u32, rng: &mut impl Rng) -> EquivariantForm {
    let mut f = EquivariantForm::zero();
    for j in c.cells_of_degree(n as i32) {
        if rng.gen_bool(0.7) {
            let (m, a) = c.cell(j);
            f.add_term(m, a.to_vec(), random_rational(rng));
        }
    }
    f
}

/// Random rational combination of a basis of the closed degree-`n` forms.
pub fn random_closed_form(c: &CartanComplex, n: u32, rng: &mut impl Rng) -> Result<EquivariantForm, CartanError> {
    let cc = ample(c, n)?;
    let cols = cc.cells_of_degree(n as i32);
    let rows = cc.cells_of_degree(n as i32 + 1);
    let kernel = kernel_basis(&cc.d_g().select(&rows, &cols));
    let mut f = EquivariantForm::zero();
    for v in kernel.basis() {
        let lifted = v.filter_map_index(|i| Some(cols[i]));
        f = f.add(&cc.from_vec(&lifted).scale(&random_rational(rng)));
    }
    Ok(f)
}

/// Sets every `x_i = 0`: the model element `f(0)`.
pub fn restriction_to_fiber(f: &EquivariantForm) -> SparseVec<Rational> {
    SparseVec::from_pairs(f.terms().filter(|(_, a, _)| a.iter().all(|e| *e == 0)).map(|(m, _, c)| (m, c.clone())))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormalityReport {
    pub formal: bool,
    pub equivariant: (usize, usize),
    pub fiber: (usize, usize),
    pub image_rank: usize,
}

/// Surjectivity of `H_G(M; η) → H(M; η(0))` on windowed classes.
pub fn formality_test(c: &CartanComplex, eta: &Twisting) -> Result<FormalityReport, CartanError> {
    let classes = windowed_classes(c, Some(eta), Grading::Parity, c.trusted_poly())?;
    let fiber_model = c.model().forget_action();
    let fiber = CartanComplex::build(&fiber_model, 0, 0)?;
    let h0 = EquivariantForm::from_model(&restriction_to_fiber(&eta.total()), vec![]);
    let fiber_eta = Twisting::from_form(&fiber_model, &h0)?;
    let fiber_classes = fiber.twisted_complex(&fiber_eta)?.cohomology(Grading::Parity)?;
    let mut columns = Vec::new();
    for z in classes.representatives() {
        let r = restriction_to_fiber(&c.from_vec(z));
        let coords = fiber_classes
            .coordinates(&r)
            .ok_or_else(|| CartanError::NotClosed)?;
        columns.push(coords);
    }
    let image_rank = if columns.is_empty() || fiber_classes.dim() == 0 {
        0
    } else {
        let m = crate::linalg::Dense::from_fn(fiber_classes.dim(), columns.len(), |r, k| columns[k][r].clone());
        dense_rank(&m)
    };
    Ok(FormalityReport {
        formal: image_rank == fiber_classes.dim(),
        equivariant: classes.parity_dims(),
        fiber: fiber_classes.parity_dims(),
        image_rank,
    })
}

/// Highest total degree kept by the total-degree window: `2D − 1`, or the top
/// form degree when r = 0.
pub fn f_window(c: &CartanComplex) -> i32 {
    if c.rank() == 0 {
        c.top_form_degree() as i32
    } else {
        2 * c.poly_cap() as i32 - 1
    }
}

/// Classes of `Q_D` imaged in the quotient keeping total degree ≤ `w`.
pub fn degree_windowed_classes(
    c: &CartanComplex,
    eta: Option<&Twisting>,
    grading: Grading,
    w: i32,
) -> Result<Classes, CartanError> {
    let flat = match eta {
        Some(eta) => c.twisted_complex(eta)?,
        None => c.flat(),
    };
    Ok(flat.windowed_cohomology(grading, move |cell| cell.degree <= w)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EulerReport {
    pub injective: bool,
    pub source_dim: usize,
    pub image_rank: usize,
    pub window: i32,
    pub euler_degree: u32,
}

/// Whether multiplication by the closed form `e` is injective on classes
/// representable in degrees ≤ `window − deg e`.
pub fn euler_mult_injectivity(
    c: &CartanComplex,
    eta: &Twisting,
    e: &EquivariantForm,
    window: i32,
) -> Result<EulerReport, CartanError> {
    if !c.is_closed(e) {
        return Err(CartanError::NotClosed);
    }
    let de = e.degree(c.model()).ok_or_else(|| CartanError::NotHomogeneous("Euler form must be homogeneous".into()))?;
    if window > f_window(c) || window < de as i32 {
        return Err(CartanError::WindowTooSmall(format!(
            "window {window} must lie in [{de}, {}]",
            f_window(c)
        )));
    }
    let src = degree_windowed_classes(c, Some(eta), Grading::Parity, window - de as i32)?;
    let tgt = degree_windowed_classes(c, Some(eta), Grading::Parity, window)?;
    let m = induced_map(&c.mult_matrix(e), &src, &tgt)?;
    let image_rank = if src.dim() == 0 || tgt.dim() == 0 { 0 } else { dense_rank(&m) };
    Ok(EulerReport { injective: image_rank == src.dim(), source_dim: src.dim(), image_rank, window, euler_degree: de })
}

/// A degree-preserving algebra map between models commuting with d and the
/// contractions, given by its values on generators.
#[derive(Clone, Debug)]
pub struct ModelMap {
    source: CdgaModel,
    target: CdgaModel,
    matrix: SparseMatrix<Rational>,
}

impl ModelMap {
    pub fn new(
        source: &CdgaModel,
        target: &CdgaModel,
        images: &BTreeMap<String, Vec<Term>>,
    ) -> Result<Self, CartanError> {
        let r = source.rank().max(target.rank());
        let (source, target) = (source.with_rank(r)?, target.with_rank(r)?);
        let mut gen_images = vec![SparseVec::zero(); source.generators().len()];
        for (name, terms) in images {
            let g = source.generator_index(name)?;
            let v = target.terms(terms)?;
            if target.element_degree(&v).is_some_and(|d| d != source.generators()[g].degree) {
                return Err(CartanError::InvalidMap(format!("image of `{name}` has the wrong degree")));
            }
            gen_images[g] = v;
        }
        let columns: Vec<SparseVec<Rational>> = (0..source.dim())
            .map(|m| {
                occurrences(source.basis_exponents(m))
                    .into_iter()
                    .fold(target.unit(), |acc, g| target.mul(&acc, &gen_images[g]))
            })
            .collect();
        let matrix = SparseMatrix::from_columns(target.dim(), &columns);
        if matrix.mul(source.d()) != target.d().mul(&matrix) {
            return Err(CartanError::InvalidMap("does not commute with d".into()));
        }
        for i in 0..r {
            if matrix.mul(source.iota(i)) != target.iota(i).mul(&matrix) {
                return Err(CartanError::InvalidMap(format!("does not commute with contraction {}", i + 1)));
            }
        }
        for a in 0..source.dim() {
            for b in 0..source.dim() {
                let ab = source.mul(&SparseVec::unit(a), &SparseVec::unit(b));
                if matrix.apply(&ab) != target.mul(&matrix.column(a), &matrix.column(b)) {
                    return Err(CartanError::InvalidMap("not multiplicative".into()));
                }
            }
        }
        Ok(ModelMap { source, target, matrix })
    }

    pub fn source(&self) -> &CdgaModel {
        &self.source
    }

    pub fn target(&self) -> &CdgaModel {
        &self.target
    }

    pub fn matrix(&self) -> &SparseMatrix<Rational> {
        &self.matrix
    }

    /// Applies the map coefficientwise in the polynomial variables.
    pub fn push_form(&self, f: &EquivariantForm) -> EquivariantForm {
        let mut out = EquivariantForm::zero();
        for (m, a, c) in f.terms() {
            for (k, v) in self.matrix.column(m).entries() {
                out.add_term(*k, a.to_vec(), c.clone() * v.clone());
            }
        }
        out
    }
}

/// Cartan complexes of both members of a pair with the restriction map.
#[derive(Clone, Debug)]
pub struct CartanPair {
    map: ModelMap,
    big: CartanComplex,
    small: CartanComplex,
    restriction: SparseMatrix<Rational>,
}

impl CartanPair {
    pub fn build(map: &ModelMap, r: usize, poly_cap: u32) -> Result<Self, CartanError> {
        let big = CartanComplex::build(map.source(), r, poly_cap)?;
        let small = CartanComplex::build(map.target(), r, poly_cap)?;
        let columns: Vec<SparseVec<Rational>> =
            (0..big.len()).map(|j| small.to_vec(&map.push_form(&big.cell_form(j)))).collect();
        let restriction = SparseMatrix::from_columns(small.len(), &columns);
        Ok(CartanPair { map: map.clone(), big, small, restriction })
    }

    pub fn with_cap(&self, poly_cap: u32) -> Result<Self, CartanError> {
        CartanPair::build(&self.map, self.big.rank(), poly_cap)
    }

    pub fn big(&self) -> &CartanComplex {
        &self.big
    }

    pub fn small(&self) -> &CartanComplex {
        &self.small
    }

    pub fn map(&self) -> &ModelMap {
        &self.map
    }

    pub fn restriction(&self) -> &SparseMatrix<Rational> {
        &self.restriction
    }

    pub fn restrict_twisting(&self, eta: &Twisting) -> Twisting {
        Twisting { form_part: self.map.push_form(&eta.form_part), moment_part: self.map.push_form(&eta.moment_part) }
    }

    /// The pair of twisted complexes, `η` on the big member and its
    /// restriction on the small one.
    pub fn cone_pair(&self, eta: &Twisting) -> Result<ConePair, CartanError> {
        let big = self.big.twisted_complex(eta)?;
        let small = self.small.twisted_complex(&self.restrict_twisting(eta))?;
        Ok(ConePair::new(big, small, self.restriction.clone())?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelativeCohomology {
    pub even: usize,
    pub odd: usize,
    pub representatives: Vec<SparseVec<Rational>>,
    pub window: i32,
    pub poly_cap: u32,
    pub stable: bool,
}

/// Twisted cohomology of the mapping cone on the trust window.
pub fn relative_twisted_cohomology(p: &CartanPair, eta: &Twisting) -> Result<RelativeCohomology, CartanError> {
    let keep = p.big.trusted_poly();
    let classes = p.cone_pair(eta)?.mapping_cone().windowed_cohomology(Grading::Parity, keep_poly(keep))?;
    let (even, odd) = classes.parity_dims();
    if p.big.rank() > 0 {
        let wider = p.with_cap(p.big.poly_cap() + 2)?;
        let check = wider.cone_pair(eta)?.mapping_cone().windowed_cohomology(Grading::Parity, keep_poly(keep))?;
        if check.parity_dims() != (even, odd) {
            return Err(CartanError::UnstableWindow { at_cap: (even, odd), at_cap_plus_two: check.parity_dims() });
        }
    }
    Ok(RelativeCohomology {
        even,
        odd,
        representatives: classes.representatives().to_vec(),
        window: p.big.window(),
        poly_cap: p.big.poly_cap(),
        stable: true,
    })
}

/// Untwisted cone cohomology by cone degree on the trust window.
pub fn relative_cohomology_graded(p: &CartanPair) -> Result<Classes, CartanError> {
    let cone = p.cone_pair(&Twisting::zero())?.mapping_cone();
    Ok(cone.windowed_cohomology(Grading::Degree, keep_poly(p.big.trusted_poly()))?)
}

/// The ℤ₂-folded long exact sequence of the pair on classes of polynomial
/// degree ≤ `window`; maps are read one polynomial degree wider, since the
/// connecting map may multiply by `x`. Needs `window < D`.
pub fn six_term_check(p: &CartanPair, eta: &Twisting, window: u32) -> Result<SixTermReport, CartanError> {
    if p.big.rank() > 0 && window >= p.big.poly_cap() {
        return Err(CartanError::WindowTooSmall(format!(
            "window {window} needs polynomial cap above it, have {}",
            p.big.poly_cap()
        )));
    }
    Ok(dg_six_term(&p.cone_pair(eta)?, keep_poly(window), keep_poly(window + 1))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::model::ModelSpec;
    use crate::linalg::q;

    fn circle(k: i64) -> CdgaModel {
        ModelSpec::new("circle").generator("t", 1).contraction(0, "t", &[(q(k, 1), &[])]).build().unwrap()
    }

    fn torus3() -> CdgaModel {
        ModelSpec::new("t3").generator("t1", 1).generator("t2", 1).generator("t3", 1).build().unwrap()
    }

    #[test]
    fn free_circle_is_a_point() {
        for d in [2, 4, 6] {
            let c = CartanComplex::build(&circle(1), 1, d).unwrap();
            let h = equivariant_cohomology(&c).unwrap();
            assert_eq!(h.dims, BTreeMap::from([(0, 1)]));
        }
    }

    #[test]
    fn volume_twist_on_three_torus() {
        let m = torus3();
        let c = CartanComplex::build(&m, 0, 0).unwrap();
        let vol = EquivariantForm::term(7, vec![], q(1, 1));
        let eta = Twisting::from_form(&m, &vol).unwrap();
        let h = twisted_cohomology(&c, &eta).unwrap();
        assert_eq!((h.even, h.odd), (3, 3));
        let h0 = twisted_cohomology(&c, &Twisting::zero()).unwrap();
        assert_eq!((h0.even, h0.odd), (4, 4));
    }

    #[test]
    fn non_closed_twisting_rejected() {
        let m = circle(1);
        let c = CartanComplex::build(&m, 1, 3).unwrap();
        // t ⊗ x is not d_G-closed for the free action: d_G(t x) = −x².
        let f = EquivariantForm::term(1, vec![1], q(1, 1));
        let eta = Twisting::from_form(&m, &f).unwrap();
        assert_eq!(twisted_cohomology(&c, &eta), Err(CartanError::NotClosed));
    }

    #[test]
    fn exp_b_is_invertible() {
        let m = torus3().with_rank(1).unwrap();
        let c = CartanComplex::build(&m, 1, 3).unwrap();
        let b = EquivariantForm::term(4, vec![0], q(2, 3)).add(&EquivariantForm::term(0, vec![1], q(1, 2)));
        let f = EquivariantForm::term(1, vec![1], q(1, 1)).add(&EquivariantForm::term(0, vec![0], q(5, 1)));
        let g = exp_b_transform(&c, &b, &f).unwrap();
        assert_eq!(exp_b_transform(&c, &b.neg(), &g).unwrap(), f);
        assert_eq!(exp_b_transform(&c, &EquivariantForm::zero(), &f).unwrap(), f);
    }

    #[test]
    fn exactness_on_free_circle() {
        let c = CartanComplex::build(&circle(1), 1, 2).unwrap();
        let x = EquivariantForm::term(0, vec![1], q(1, 1));
        let b = exactness_solve(&c, &x).unwrap().unwrap();
        assert_eq!(b.d_g(c.model()), x);
        let one = EquivariantForm::term(0, vec![0], q(1, 1));
        assert_eq!(exactness_solve(&c, &one).unwrap(), None);
    }

    fn rotation_torus_pair(cap: u32) -> CartanPair {
        let spec = |n: usize| {
            let s = (1..=n).fold(ModelSpec::new(&format!("t{n}")), |s, i| s.generator(&format!("t{i}"), 1));
            s.contraction(0, "t1", &[(q(1, 1), &[])]).build().unwrap()
        };
        let images: BTreeMap<String, Vec<Term>> = BTreeMap::from([
            ("t1".to_string(), vec![(q(1, 1), vec!["t1".to_string()])]),
            ("t2".to_string(), vec![(q(1, 1), vec!["t2".to_string()])]),
            ("t3".to_string(), vec![]),
        ]);
        let map = ModelMap::new(&spec(3), &spec(2), &images).unwrap();
        CartanPair::build(&map, 1, cap).unwrap()
    }

    fn weight_pair(k: i64, cap: u32) -> CartanPair {
        let disk = ModelSpec::new("point").rank(1).build().unwrap();
        let map = ModelMap::new(&disk, &circle(k), &BTreeMap::new()).unwrap();
        CartanPair::build(&map, 1, cap).unwrap()
    }

    #[test]
    fn gysin_sequence_of_weight_pairs() {
        for k in 1..=3 {
            for cap in 2..=4u32 {
                let r = six_term_check(&weight_pair(k, cap), &Twisting::zero(), cap - 1).unwrap();
                assert!(r.exact && r.truncated_exact);
                let dims: Vec<usize> = r.nodes.iter().map(|n| n.dim).collect();
                assert_eq!(dims, vec![1, 0, 0, 0, cap as usize, cap as usize]);
            }
        }
    }

    #[test]
    fn six_term_window_must_fit_under_the_cap() {
        let p = weight_pair(1, 3);
        assert!(matches!(six_term_check(&p, &Twisting::zero(), 3), Err(CartanError::WindowTooSmall(_))));
    }

    #[test]
    fn exact_twisting_keeps_the_sequence() {
        use rand::SeedableRng;
        let p = rotation_torus_pair(3);
        let big = p.big();
        let plain = six_term_check(&p, &Twisting::zero(), 2).unwrap();
        assert!(plain.exact);
        for seed in 0..4 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let b = random_form(big, 2, &mut rng);
            let eta = big.from_vec(&big.to_vec(&b.d_g(big.model())));
            let eta = Twisting::from_form(big.model(), &eta).unwrap();
            let twisted = six_term_check(&p, &eta, 2).unwrap();
            assert!(twisted.exact);
            let dims = |r: &SixTermReport| r.nodes.iter().map(|n| n.dim).collect::<Vec<_>>();
            assert_eq!(dims(&twisted), dims(&plain));
        }
    }
}
