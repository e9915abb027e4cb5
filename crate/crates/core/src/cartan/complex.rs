//! The Cartan complex `model ⊗ ℚ[x₁..x_r]` truncated at polynomial degree D.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::model::{CdgaModel, ModelError};
use super::CartanError;
use crate::dg::{Cell, FlatComplex};
use crate::linalg::{Rational, SparseMatrix, SparseVec};

/// Exponent vectors of total degree ≤ `cap` in `r` variables, ordered by total
/// degree, then with higher powers of earlier variables first.
pub fn poly_monomials(r: usize, cap: u32) -> Vec<Vec<u32>> {
    fn rec(r: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == r {
            out.push(prefix.clone());
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(r, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, cap, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.iter().sum::<u32>().cmp(&b.iter().sum::<u32>()).then_with(|| b.cmp(a)));
    out
}

pub fn poly_label(a: &[u32]) -> String {
    let parts: Vec<String> = a
        .iter()
        .enumerate()
        .filter(|(_, e)| **e > 0)
        .map(|(i, e)| if *e == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, e) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// An element of the (untruncated) Cartan complex: finitely many terms
/// `coef · m ⊗ x^a`, keyed by model basis index and exponent vector.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquivariantForm {
    terms: BTreeMap<(usize, Vec<u32>), Rational>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FormTermWire {
    coef: Rational,
    mono: Vec<String>,
    poly: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FormWire {
    terms: Vec<FormTermWire>,
}

impl EquivariantForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(model_idx: usize, poly: Vec<u32>, coef: Rational) -> Self {
        let mut f = Self::zero();
        f.add_term(model_idx, poly, coef);
        f
    }

    /// `v ⊗ x^a` for a model element `v`.
    pub fn from_model(v: &SparseVec<Rational>, poly: Vec<u32>) -> Self {
        let mut f = Self::zero();
        for (i, c) in v.entries() {
            f.add_term(*i, poly.clone(), c.clone());
        }
        f
    }

    pub fn add_term(&mut self, model_idx: usize, poly: Vec<u32>, coef: Rational) {
        let key = (model_idx, poly);
        let v = self.terms.remove(&key).unwrap_or_default() + coef;
        if !num_traits::Zero::is_zero(&v) {
            self.terms.insert(key, v);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &[u32], &Rational)> {
        self.terms.iter().map(|((m, a), c)| (*m, a.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((m, a), c) in &other.terms {
            out.add_term(*m, a.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut out = Self::zero();
        for ((m, a), c) in &self.terms {
            out.add_term(*m, a.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&Rational::from(-1))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn max_poly(&self) -> u32 {
        self.terms.keys().map(|(_, a)| a.iter().sum()).max().unwrap_or(0)
    }

    /// Total degree if homogeneous and nonzero.
    pub fn degree(&self, model: &CdgaModel) -> Option<u32> {
        let mut it = self.terms.keys().map(|(m, a)| model.degree(*m) + 2 * a.iter().sum::<u32>());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Part with polynomial degree exactly `k`.
    pub fn poly_part(&self, k: u32) -> Self {
        EquivariantForm {
            terms: self
                .terms
                .iter()
                .filter(|((_, a), _)| a.iter().sum::<u32>() == k)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Product in the Cartan complex (polynomial variables are even).
    pub fn mul(&self, model: &CdgaModel, other: &Self) -> Self {
        let mut out = Self::zero();
        for ((m, a), c) in &self.terms {
            for ((n, b), e) in &other.terms {
                if let Some((neg, k)) = model.mul_basis(*m, *n) {
                    let v = c.clone() * e.clone();
                    let poly = a.iter().zip(b).map(|(x, y)| x + y).collect();
                    out.add_term(k, poly, if neg { -v } else { v });
                }
            }
        }
        out
    }

    /// `d_G f = d f − Σ ι_i f ⊗ x_i`, computed without truncation.
    pub fn d_g(&self, model: &CdgaModel) -> Self {
        let mut out = Self::zero();
        for ((m, a), c) in &self.terms {
            for (k, v) in model.d().column(*m).entries() {
                out.add_term(*k, a.clone(), c.clone() * v.clone());
            }
            for (i, iota) in model.contractions().iter().enumerate() {
                let mut b = a.clone();
                b[i] += 1;
                for (k, v) in iota.column(*m).entries() {
                    out.add_term(*k, b.clone(), -(c.clone() * v.clone()));
                }
            }
        }
        out
    }

    pub fn to_json(&self, model: &CdgaModel) -> serde_json::Value {
        let terms = self
            .terms
            .iter()
            .map(|((m, a), c)| {
                let mono = model
                    .basis_exponents(*m)
                    .iter()
                    .enumerate()
                    .flat_map(|(g, e)| std::iter::repeat(model.generators()[g].name.clone()).take(*e as usize))
                    .collect();
                FormTermWire { coef: c.clone(), mono, poly: a.clone() }
            })
            .collect();
        serde_json::to_value(FormWire { terms }).expect("serializable")
    }

    pub fn from_json(model: &CdgaModel, rank: usize, value: &serde_json::Value) -> Result<Self, CartanError> {
        let wire: FormWire =
            serde_json::from_value(value.clone()).map_err(|e| CartanError::Malformed(e.to_string()))?;
        let mut out = Self::zero();
        for t in wire.terms {
            if t.poly.len() != rank {
                return Err(CartanError::Malformed(format!(
                    "polynomial exponent {:?} does not have {rank} entries",
                    t.poly
                )));
            }
            let v = model.term(&t.coef, &t.mono)?;
            out = out.add(&Self::from_model(&v, t.poly));
        }
        Ok(out)
    }
}

/// A closed degree-3 element split as `H + α`: `H` has polynomial degree 0 and
/// `α` polynomial degree 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Twisting {
    pub form_part: EquivariantForm,
    pub moment_part: EquivariantForm,
}

impl Twisting {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Splits a degree-3 element; closedness is checked where it is used.
    pub fn from_form(model: &CdgaModel, eta: &EquivariantForm) -> Result<Self, CartanError> {
        if !eta.is_zero() && eta.degree(model) != Some(3) {
            return Err(CartanError::NotDegreeThree);
        }
        Ok(Twisting { form_part: eta.poly_part(0), moment_part: eta.poly_part(1) })
    }

    pub fn total(&self) -> EquivariantForm {
        self.form_part.add(&self.moment_part)
    }

    pub fn is_zero(&self) -> bool {
        self.form_part.is_zero() && self.moment_part.is_zero()
    }
}

/// The truncated Cartan complex `Q_D = (model ⊗ ℚ[x]) / (x)^{D+1}` with `d_G`.
#[derive(Clone, Debug)]
pub struct CartanComplex {
    model: CdgaModel,
    rank: usize,
    poly_cap: u32,
    monomials: Vec<Vec<u32>>,
    cells: Vec<(usize, usize)>,
    index: HashMap<(usize, Vec<u32>), usize>,
    d_g: SparseMatrix<Rational>,
}

impl CartanComplex {
    /// Requires `D ≥ 1` when `r ≥ 1`; a model with fewer contractions than `r`
    /// gets zero contractions in the remaining directions.
    pub fn build(model: &CdgaModel, r: usize, poly_cap: u32) -> Result<Self, CartanError> {
        if r < model.rank() {
            return Err(CartanError::RankMismatch { model: model.rank(), requested: r });
        }
        if r > 0 && poly_cap == 0 {
            return Err(CartanError::WindowTooSmall("polynomial cap must be at least 1".into()));
        }
        let model = model.with_rank(r)?;
        let poly_cap = if r == 0 { 0 } else { poly_cap };
        let monomials = poly_monomials(r, poly_cap);
        let cells: Vec<(usize, usize)> =
            (0..model.dim()).flat_map(|m| (0..monomials.len()).map(move |a| (m, a))).collect();
        let index = cells.iter().enumerate().map(|(i, (m, a))| ((*m, monomials[*a].clone()), i)).collect();
        let mut c = CartanComplex { model, rank: r, poly_cap, monomials, cells, index, d_g: SparseMatrix::zero(0, 0) };
        let columns: Vec<SparseVec<Rational>> = (0..c.cells.len()).map(|j| c.cell_form(j).d_g(&c.model)).map(|f| c.to_vec(&f)).collect();
        c.d_g = SparseMatrix::from_columns(c.cells.len(), &columns);
        if !c.d_g.mul(&c.d_g).is_zero() {
            return Err(CartanError::Model(ModelError::InvalidModel {
                axiom: "d_G² = 0".into(),
                detail: "Cartan differential does not square to zero".into(),
            }));
        }
        Ok(c)
    }

    /// Same model and rank at another polynomial cap.
    pub fn with_cap(&self, poly_cap: u32) -> Result<Self, CartanError> {
        CartanComplex::build(&self.model, self.rank, poly_cap)
    }

    pub fn model(&self) -> &CdgaModel {
        &self.model
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn poly_cap(&self) -> u32 {
        self.poly_cap
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn top_form_degree(&self) -> u32 {
        self.model.top_degree()
    }

    /// Largest total degree reported as trusted: top + 2D − 2, or top when r = 0.
    pub fn window(&self) -> i32 {
        let top = self.top_form_degree() as i32;
        if self.rank == 0 {
            top
        } else {
            top + 2 * self.poly_cap as i32 - 2
        }
    }

    /// Highest polynomial degree kept by windowed computations.
    pub fn trusted_poly(&self) -> u32 {
        if self.rank == 0 {
            0
        } else {
            self.poly_cap - 1
        }
    }

    pub fn cell(&self, j: usize) -> (usize, &[u32]) {
        let (m, a) = self.cells[j];
        (m, &self.monomials[a])
    }

    pub fn cell_degree(&self, j: usize) -> i32 {
        let (m, a) = self.cell(j);
        (self.model.degree(m) + 2 * a.iter().sum::<u32>()) as i32
    }

    pub fn cell_poly(&self, j: usize) -> u32 {
        self.cell(j).1.iter().sum()
    }

    pub fn cell_label(&self, j: usize) -> String {
        let (m, a) = self.cell(j);
        format!("{}⊗{}", self.model.label(m), poly_label(a))
    }

    pub fn cell_index(&self, model_idx: usize, poly: &[u32]) -> Option<usize> {
        self.index.get(&(model_idx, poly.to_vec())).copied()
    }

    pub fn cell_form(&self, j: usize) -> EquivariantForm {
        let (m, a) = self.cell(j);
        EquivariantForm::term(m, a.to_vec(), Rational::from(1))
    }

    pub fn cells_of_degree(&self, n: i32) -> Vec<usize> {
        (0..self.len()).filter(|j| self.cell_degree(*j) == n).collect()
    }

    /// Coordinates of `f` in `Q_D`; terms above the cap are dropped.
    pub fn to_vec(&self, f: &EquivariantForm) -> SparseVec<Rational> {
        SparseVec::from_pairs(f.terms().filter_map(|(m, a, c)| {
            assert_eq!(a.len(), self.rank, "form has the wrong number of polynomial variables");
            self.cell_index(m, a).map(|j| (j, c.clone()))
        }))
    }

    pub fn from_vec(&self, v: &SparseVec<Rational>) -> EquivariantForm {
        let mut f = EquivariantForm::zero();
        for (j, c) in v.entries() {
            let (m, a) = self.cell(*j);
            f.add_term(m, a.to_vec(), c.clone());
        }
        f
    }

    pub fn d_g(&self) -> &SparseMatrix<Rational> {
        &self.d_g
    }

    pub fn is_closed(&self, f: &EquivariantForm) -> bool {
        f.d_g(&self.model).is_zero()
    }

    /// Left multiplication by `f` on `Q_D`.
    pub fn mult_matrix(&self, f: &EquivariantForm) -> SparseMatrix<Rational> {
        let columns: Vec<SparseVec<Rational>> =
            (0..self.len()).map(|j| self.to_vec(&f.mul(&self.model, &self.cell_form(j)))).collect();
        SparseMatrix::from_columns(self.len(), &columns)
    }

    /// `d_G + η∧` on `Q_D`, without any closedness check.
    pub fn twisted_operator(&self, eta: &EquivariantForm) -> SparseMatrix<Rational> {
        self.d_g.add(&self.mult_matrix(eta))
    }

    pub fn flat_cells(&self) -> Vec<Cell> {
        (0..self.len()).map(|j| Cell::new(self.cell_label(j), self.cell_degree(j), self.cell_poly(j))).collect()
    }

    pub fn flat(&self) -> FlatComplex {
        FlatComplex::new(self.flat_cells(), self.d_g.clone()).expect("d_G² = 0 is checked at build")
    }

    pub fn twisted_complex(&self, eta: &Twisting) -> Result<FlatComplex, CartanError> {
        let total = eta.total();
        if !self.is_closed(&total) {
            return Err(CartanError::NotClosed);
        }
        Ok(FlatComplex::new(self.flat_cells(), self.twisted_operator(&total))?)
    }
}
