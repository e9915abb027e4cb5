//! Finite graded-commutative algebras with a differential and torus contractions.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Rational, SparseMatrix, SparseVec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid model: axiom `{axiom}` fails ({detail})")]
    InvalidModel { axiom: String, detail: String },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("malformed model: {0}")]
    Malformed(String),
}

fn axiom(axiom: &str, detail: impl Into<String>) -> ModelError {
    ModelError::InvalidModel { axiom: axiom.into(), detail: detail.into() }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
}

/// A term `coef · g₁ g₂ …` with generators multiplied in the listed order.
pub type Term = (Rational, Vec<String>);

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TermWire {
    coef: Rational,
    mono: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ModelWire {
    name: String,
    generators: Vec<Generator>,
    #[serde(default)]
    even_cap: u32,
    #[serde(default)]
    d: BTreeMap<String, Vec<TermWire>>,
    #[serde(default)]
    contractions: Vec<BTreeMap<String, Vec<TermWire>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
    #[serde(default, rename = "polyCap", skip_serializing_if = "Option::is_none")]
    poly_cap: Option<u32>,
}

/// Declarative description of a model; [`ModelSpec::build`] validates it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub generators: Vec<Generator>,
    pub even_cap: u32,
    pub d: BTreeMap<String, Vec<Term>>,
    pub contractions: Vec<BTreeMap<String, Vec<Term>>>,
    pub rank: Option<usize>,
    pub poly_cap: Option<u32>,
}

impl ModelSpec {
    pub fn new(name: &str) -> Self {
        ModelSpec { name: name.into(), ..Default::default() }
    }

    pub fn generator(mut self, name: &str, degree: u32) -> Self {
        self.generators.push(Generator { name: name.into(), degree });
        self
    }

    pub fn even_cap(mut self, cap: u32) -> Self {
        self.even_cap = cap;
        self
    }

    pub fn d(mut self, gen: &str, terms: &[(Rational, &[&str])]) -> Self {
        self.d.insert(gen.into(), to_terms(terms));
        self
    }

    /// Sets ι_i(gen); contraction slots up to `i` are created as needed.
    pub fn contraction(mut self, i: usize, gen: &str, terms: &[(Rational, &[&str])]) -> Self {
        while self.contractions.len() <= i {
            self.contractions.push(BTreeMap::new());
        }
        self.contractions[i].insert(gen.into(), to_terms(terms));
        self
    }

    /// Declares `r` contractions, padding with zero ones.
    pub fn rank(mut self, r: usize) -> Self {
        while self.contractions.len() < r {
            self.contractions.push(BTreeMap::new());
        }
        self
    }

    pub fn build(&self) -> Result<CdgaModel, ModelError> {
        CdgaModel::from_spec(self)
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, ModelError> {
        let wire: ModelWire = serde_json::from_value(value.clone()).map_err(|e| ModelError::Malformed(e.to_string()))?;
        let conv = |m: BTreeMap<String, Vec<TermWire>>| {
            m.into_iter().map(|(g, ts)| (g, ts.into_iter().map(|t| (t.coef, t.mono)).collect())).collect()
        };
        let mut spec = ModelSpec {
            name: wire.name,
            generators: wire.generators,
            even_cap: wire.even_cap,
            d: conv(wire.d),
            contractions: wire.contractions.into_iter().map(conv).collect(),
            rank: wire.rank,
            poly_cap: wire.poly_cap,
        };
        if let Some(r) = wire.rank {
            if r < spec.contractions.len() {
                return Err(ModelError::Malformed(format!(
                    "rank {r} is smaller than the number of contractions {}",
                    spec.contractions.len()
                )));
            }
            spec = spec.rank(r);
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let conv = |m: &BTreeMap<String, Vec<Term>>| {
            m.iter()
                .map(|(g, ts)| (g.clone(), ts.iter().map(|(c, m)| TermWire { coef: c.clone(), mono: m.clone() }).collect()))
                .collect()
        };
        let wire = ModelWire {
            name: self.name.clone(),
            generators: self.generators.clone(),
            even_cap: self.even_cap,
            d: conv(&self.d),
            contractions: self.contractions.iter().map(conv).collect(),
            rank: self.rank,
            poly_cap: self.poly_cap,
        };
        serde_json::to_value(wire).expect("serializable")
    }
}

fn to_terms(terms: &[(Rational, &[&str])]) -> Vec<Term> {
    terms.iter().map(|(c, m)| (c.clone(), m.iter().map(|s| s.to_string()).collect())).collect()
}

/// A validated finite CDGA with contraction operators ι₁..ι_r.
///
/// The basis is exterior on odd generators and polynomial, truncated at
/// `even_cap`, on even ones; it is ordered by degree, then by the sorted list
/// of generator indices.
#[derive(Clone, Debug)]
pub struct CdgaModel {
    spec: ModelSpec,
    basis: Vec<Vec<u32>>,
    degrees: Vec<u32>,
    index: HashMap<Vec<u32>, usize>,
    d: SparseMatrix<Rational>,
    iota: Vec<SparseMatrix<Rational>>,
}

impl PartialEq for CdgaModel {
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis && self.d == other.d && self.iota == other.iota && self.spec.generators == other.spec.generators
    }
}

impl CdgaModel {
    fn from_spec(spec: &ModelSpec) -> Result<Self, ModelError> {
        let gens = &spec.generators;
        for (i, g) in gens.iter().enumerate() {
            if gens[..i].iter().any(|h| h.name == g.name) {
                return Err(ModelError::Malformed(format!("duplicate generator `{}`", g.name)));
            }
        }
        let mut basis: Vec<Vec<u32>> = vec![Vec::new()];
        for g in gens {
            let top = if g.degree % 2 == 1 { 1 } else { spec.even_cap };
            basis = basis
                .into_iter()
                .flat_map(|m| (0..=top).map(move |e| m.iter().copied().chain([e]).collect::<Vec<u32>>()))
                .collect();
        }
        let degree_of = |m: &Vec<u32>| m.iter().zip(gens).map(|(e, g)| e * g.degree).sum::<u32>();
        basis.sort_by_key(|m| (degree_of(m), occurrences(m)));
        let degrees = basis.iter().map(degree_of).collect();
        let index = basis.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut model = CdgaModel {
            spec: spec.clone(),
            basis,
            degrees,
            index,
            d: SparseMatrix::zero(0, 0),
            iota: Vec::new(),
        };
        for name in spec.d.keys().chain(spec.contractions.iter().flat_map(|c| c.keys())) {
            model.generator_index(name)?;
        }
        let d_gen = model.generator_images(&spec.d, 1, "d raises degree by one")?;
        model.d = model.extend_derivation(&d_gen);
        let mut iota = Vec::new();
        for c in &spec.contractions {
            let images = model.generator_images(c, -1, "contraction lowers degree by one")?;
            iota.push(model.extend_derivation(&images));
        }
        model.iota = iota;
        model.validate()?;
        Ok(model)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn generators(&self) -> &[Generator] {
        &self.spec.generators
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn rank(&self) -> usize {
        self.iota.len()
    }

    pub fn degree(&self, idx: usize) -> u32 {
        self.degrees[idx]
    }

    pub fn top_degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn basis_exponents(&self, idx: usize) -> &[u32] {
        &self.basis[idx]
    }

    pub fn index_of(&self, exponents: &[u32]) -> Option<usize> {
        self.index.get(exponents).copied()
    }

    pub fn d(&self) -> &SparseMatrix<Rational> {
        &self.d
    }

    pub fn iota(&self, i: usize) -> &SparseMatrix<Rational> {
        &self.iota[i]
    }

    pub fn contractions(&self) -> &[SparseMatrix<Rational>] {
        &self.iota
    }

    /// The same algebra with `r ≥ rank` contractions, extra ones zero.
    pub fn with_rank(&self, r: usize) -> Result<Self, ModelError> {
        if r < self.rank() {
            return Err(ModelError::Malformed(format!("cannot lower rank {} to {r}", self.rank())));
        }
        let mut m = self.clone();
        while m.iota.len() < r {
            m.iota.push(SparseMatrix::zero(m.dim(), m.dim()));
        }
        m.spec = m.spec.rank(r);
        Ok(m)
    }

    /// Model with all contractions removed (the underlying algebra).
    pub fn forget_action(&self) -> Self {
        let mut m = self.clone();
        m.iota.clear();
        m.spec.contractions.clear();
        m.spec.rank = None;
        m
    }

    pub fn label(&self, idx: usize) -> String {
        let parts: Vec<String> = self.basis[idx]
            .iter()
            .zip(&self.spec.generators)
            .filter(|(e, _)| **e > 0)
            .map(|(e, g)| if *e == 1 { g.name.clone() } else { format!("{}^{}", g.name, e) })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    pub fn generator_index(&self, name: &str) -> Result<usize, ModelError> {
        self.spec
            .generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| ModelError::UnknownGenerator(name.into()))
    }

    pub fn unit(&self) -> SparseVec<Rational> {
        SparseVec::unit(0)
    }

    pub fn generator_element(&self, g: usize) -> SparseVec<Rational> {
        let mut e = vec![0; self.spec.generators.len()];
        e[g] = 1;
        match self.index_of(&e) {
            Some(i) => SparseVec::unit(i),
            None => SparseVec::zero(),
        }
    }

    /// Product of two basis elements: the sign and the index of the result,
    /// or `None` when it vanishes.
    pub fn mul_basis(&self, a: usize, b: usize) -> Option<(bool, usize)> {
        let (ea, eb) = (&self.basis[a], &self.basis[b]);
        let gens = &self.spec.generators;
        let mut out = ea.clone();
        let mut negative = false;
        for j in 0..gens.len() {
            if eb[j] == 0 {
                continue;
            }
            if gens[j].degree % 2 == 1 {
                if ea[j] > 0 {
                    return None;
                }
                let passed = (j + 1..gens.len()).filter(|&i| gens[i].degree % 2 == 1 && ea[i] > 0).count();
                negative ^= passed % 2 == 1;
            }
            out[j] += eb[j];
        }
        self.index_of(&out).map(|i| (negative, i))
    }

    pub fn mul(&self, x: &SparseVec<Rational>, y: &SparseVec<Rational>) -> SparseVec<Rational> {
        let mut pairs = Vec::new();
        for (a, ca) in x.entries() {
            for (b, cb) in y.entries() {
                if let Some((neg, i)) = self.mul_basis(*a, *b) {
                    let c = ca.clone() * cb.clone();
                    pairs.push((i, if neg { -c } else { c }));
                }
            }
        }
        SparseVec::from_pairs(pairs)
    }

    /// Evaluates `coef · g₁ g₂ …` with the generators multiplied in order.
    pub fn term(&self, coef: &Rational, mono: &[String]) -> Result<SparseVec<Rational>, ModelError> {
        let mut acc = self.unit();
        for name in mono {
            let g = self.generator_index(name)?;
            acc = self.mul(&acc, &self.generator_element(g));
        }
        Ok(acc.scale(coef))
    }

    pub fn terms(&self, terms: &[Term]) -> Result<SparseVec<Rational>, ModelError> {
        let mut acc = SparseVec::zero();
        for (c, m) in terms {
            acc = acc.add(&self.term(c, m)?);
        }
        Ok(acc)
    }

    /// Homogeneous degree of an element, `None` for zero or mixed elements.
    pub fn element_degree(&self, v: &SparseVec<Rational>) -> Option<u32> {
        let mut it = v.entries().iter().map(|(i, _)| self.degrees[*i]);
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    fn generator_images(
        &self,
        images: &BTreeMap<String, Vec<Term>>,
        shift: i32,
        rule: &str,
    ) -> Result<Vec<SparseVec<Rational>>, ModelError> {
        let gens = &self.spec.generators;
        let mut out = vec![SparseVec::zero(); gens.len()];
        for (name, terms) in images {
            let g = self.generator_index(name)?;
            let v = self.terms(terms)?;
            let want = gens[g].degree as i32 + shift;
            if v.entries().iter().any(|(i, _)| self.degrees[*i] as i32 != want) {
                return Err(axiom(rule, format!("image of `{name}` is not of degree {want}")));
            }
            out[g] = v;
        }
        Ok(out)
    }

    /// Matrix of the odd derivation with the given values on generators.
    fn extend_derivation(&self, images: &[SparseVec<Rational>]) -> SparseMatrix<Rational> {
        let gens = &self.spec.generators;
        let columns: Vec<SparseVec<Rational>> = (0..self.dim())
            .map(|m| {
                let occ = occurrences(&self.basis[m]);
                let mut acc = SparseVec::zero();
                for j in 0..occ.len() {
                    let mut prefix = self.unit();
                    for &g in &occ[..j] {
                        prefix = self.mul(&prefix, &self.generator_element(g));
                    }
                    let sign_odd = occ[..j].iter().map(|&g| gens[g].degree).sum::<u32>() % 2 == 1;
                    let mut term = self.mul(&prefix, &images[occ[j]]);
                    for &g in &occ[j + 1..] {
                        term = self.mul(&term, &self.generator_element(g));
                    }
                    acc = if sign_odd { acc.sub(&term) } else { acc.add(&term) };
                }
                acc
            })
            .collect();
        SparseMatrix::from_columns(self.dim(), &columns)
    }

    fn sign(&self, a: usize) -> Rational {
        Rational::from(if self.degrees[a] % 2 == 0 { 1 } else { -1 })
    }

    fn validate(&self) -> Result<(), ModelError> {
        let n = self.dim();
        if !self.d.mul(&self.d).is_zero() {
            return Err(axiom("d² = 0", "d∘d has nonzero entries"));
        }
        let ops: Vec<(&str, &SparseMatrix<Rational>)> = std::iter::once(("Leibniz", &self.d))
            .chain(self.iota.iter().map(|m| ("contraction Leibniz", m)))
            .collect();
        for a in 0..n {
            let ea = SparseVec::unit(a);
            for b in 0..n {
                let eb = SparseVec::unit(b);
                let ab = self.mul(&ea, &eb);
                let ba = self.mul(&eb, &ea);
                let koszul = self.degrees[a] % 2 == 1 && self.degrees[b] % 2 == 1;
                if ab != if koszul { ba.neg() } else { ba } {
                    return Err(axiom(
                        "graded commutativity",
                        format!("{} and {}", self.label(a), self.label(b)),
                    ));
                }
                for (name, op) in &ops {
                    let lhs = op.apply(&ab);
                    let rhs = self.mul(&op.column(a), &eb).add(&self.mul(&ea, &op.column(b)).scale(&self.sign(a)));
                    if lhs != rhs {
                        return Err(axiom(name, format!("on {} · {}", self.label(a), self.label(b))));
                    }
                }
            }
        }
        for (i, ii) in self.iota.iter().enumerate() {
            if !ii.mul(ii).is_zero() {
                return Err(axiom("ι² = 0", format!("contraction {}", i + 1)));
            }
            for (j, jj) in self.iota.iter().enumerate().skip(i + 1) {
                if !ii.mul(jj).add(&jj.mul(ii)).is_zero() {
                    return Err(axiom("ι_iι_j + ι_jι_i = 0", format!("contractions {} and {}", i + 1, j + 1)));
                }
            }
            if !self.d.mul(ii).add(&ii.mul(&self.d)).is_zero() {
                return Err(axiom("dι + ιd = 0", format!("contraction {}", i + 1)));
            }
        }
        Ok(())
    }
}

/// Generator indices of a monomial in canonical order, with repetition.
pub(crate) fn occurrences(m: &[u32]) -> Vec<usize> {
    m.iter().enumerate().flat_map(|(g, e)| std::iter::repeat(g).take(*e as usize)).collect()
}
