//! Cochain complexes, chain maps, mapping cones and cylinders, cohomology.
//!
//! Two representations are used. [`CochainComplex`] is the classical
//! degree-by-degree form. [`FlatComplex`] stores every cell of a (possibly
//! ℤ₂-graded) complex in one list with a single square differential; it also
//! records a polynomial weight per cell so that truncated complexes can be
//! compared with their quotients.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    image_basis, kernel_basis, quotient_dim, rank, Dense, Echelon, LinalgError, Rational, SparseMatrix, SparseVec,
    SubQuotient, TripletEntry,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DgError {
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("invalid chain map: {0}")]
    InvalidChainMap(String),
    #[error("differential is not homogeneous of degree +1")]
    NotHomogeneous,
    #[error("truncation is not a quotient complex: {0}")]
    NotQuotient(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One basis element of a flat complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub label: String,
    pub degree: i32,
    pub poly: u32,
}

impl Cell {
    pub fn new(label: impl Into<String>, degree: i32, poly: u32) -> Self {
        Cell { label: label.into(), degree, poly }
    }
}

/// How classes are grouped when dimensions are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grading {
    Degree,
    Parity,
}

impl Grading {
    pub fn key(self, degree: i32) -> i32 {
        match self {
            Grading::Degree => degree,
            Grading::Parity => degree.rem_euclid(2),
        }
    }
}

/// A finite complex with one square differential; column `j` is `d(cell j)`.
///
/// The differential must square to zero, change degree by an odd amount and
/// never lower the polynomial weight.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatComplex {
    cells: Vec<Cell>,
    d: SparseMatrix<Rational>,
}

impl FlatComplex {
    pub fn new(cells: Vec<Cell>, d: SparseMatrix<Rational>) -> Result<Self, DgError> {
        let n = cells.len();
        if d.rows() != n || d.cols() != n {
            return Err(DgError::InvalidComplex(format!(
                "differential is {}x{} for {} cells",
                d.rows(),
                d.cols(),
                n
            )));
        }
        for (r, c, _) in d.triplets() {
            if (cells[r].degree - cells[c].degree).rem_euclid(2) != 1 {
                return Err(DgError::InvalidComplex(format!(
                    "entry {} -> {} does not change parity",
                    cells[c].label, cells[r].label
                )));
            }
            if cells[r].poly < cells[c].poly {
                return Err(DgError::InvalidComplex(format!(
                    "entry {} -> {} lowers polynomial weight",
                    cells[c].label, cells[r].label
                )));
            }
        }
        if !d.mul(&d).is_zero() {
            return Err(DgError::InvalidComplex("d² ≠ 0".into()));
        }
        Ok(FlatComplex { cells, d })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn differential(&self) -> &SparseMatrix<Rational> {
        &self.d
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// True when every entry of d raises degree by exactly one.
    pub fn is_homogeneous(&self) -> bool {
        self.d.triplets().iter().all(|(r, c, _)| self.cells[*r].degree == self.cells[*c].degree + 1)
    }

    pub fn cohomology(&self, grading: Grading) -> Result<Classes, DgError> {
        self.windowed_cohomology(grading, |_| true)
    }

    /// Image of `H(self)` in `H(self / K)`, where `K` is spanned by the cells
    /// rejected by `keep`. `K` must be a subcomplex.
    pub fn windowed_cohomology(&self, grading: Grading, keep: impl Fn(&Cell) -> bool) -> Result<Classes, DgError> {
        if grading == Grading::Degree && !self.is_homogeneous() {
            return Err(DgError::NotHomogeneous);
        }
        let kept: Vec<bool> = self.cells.iter().map(&keep).collect();
        let mut pos = vec![None; self.cells.len()];
        let mut n_kept = 0;
        for (i, k) in kept.iter().enumerate() {
            if *k {
                pos[i] = Some(n_kept);
                n_kept += 1;
            }
        }
        for (r, c, _) in self.d.triplets() {
            if !kept[c] && kept[r] {
                return Err(DgError::NotQuotient(format!(
                    "{} is dropped but its differential reaches {}",
                    self.cells[c].label, self.cells[r].label
                )));
            }
        }
        let project = |v: &SparseVec<Rational>| v.filter_map_index(|i| pos[i]);
        let cocycles = kernel_basis(&self.d).basis();
        let boundaries: Vec<SparseVec<Rational>> =
            (0..self.len()).filter(|j| kept[*j]).map(|j| project(&self.d.column(j))).collect();
        let den = Echelon::from_vectors(n_kept, &boundaries);
        let numerator: Vec<SparseVec<Rational>> = cocycles.iter().map(project).collect();
        let sq = SubQuotient::new(den, &numerator);
        let reps: Vec<SparseVec<Rational>> = sq.chosen_indices().iter().map(|&i| cocycles[i].clone()).collect();
        let keys = reps
            .iter()
            .map(|z| {
                let (lead, _) = z.leading().expect("nonzero representative");
                grading.key(self.cells[lead].degree)
            })
            .collect();
        Ok(Classes { grading, pos, sq, reps, keys })
    }
}

/// A basis of cohomology classes (possibly windowed) with coordinate access.
#[derive(Clone, Debug)]
pub struct Classes {
    grading: Grading,
    pos: Vec<Option<usize>>,
    sq: SubQuotient<Rational>,
    reps: Vec<SparseVec<Rational>>,
    keys: Vec<i32>,
}

impl Classes {
    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Dimension per grading key; keys with no classes are omitted.
    pub fn dims(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        for k in &self.keys {
            *out.entry(*k).or_insert(0) += 1;
        }
        out
    }

    pub fn dim_at(&self, key: i32) -> usize {
        self.keys.iter().filter(|k| **k == key).count()
    }

    /// (even, odd) dimensions.
    pub fn parity_dims(&self) -> (usize, usize) {
        let odd = self.keys.iter().filter(|k| k.rem_euclid(2) == 1).count();
        (self.keys.len() - odd, odd)
    }

    /// Cocycles of the full complex representing the basis classes.
    pub fn representatives(&self) -> &[SparseVec<Rational>] {
        &self.reps
    }

    pub fn keys(&self) -> &[i32] {
        &self.keys
    }

    pub fn project(&self, v: &SparseVec<Rational>) -> SparseVec<Rational> {
        v.filter_map_index(|i| self.pos[i])
    }

    /// Coordinates of the class of a cocycle `v` of the full complex.
    pub fn coordinates(&self, v: &SparseVec<Rational>) -> Option<Vec<Rational>> {
        self.sq.coordinates(&self.project(v))
    }
}

/// Matrix of the map induced by `f` from `src` classes to `tgt` classes.
pub fn induced_map(f: &SparseMatrix<Rational>, src: &Classes, tgt: &Classes) -> Result<Dense<Rational>, DgError> {
    let mut out = Dense::zeros(tgt.dim(), src.dim());
    for (j, z) in src.representatives().iter().enumerate() {
        let coords = tgt
            .coordinates(&f.apply(z))
            .ok_or_else(|| DgError::InvalidChainMap("image of a cocycle is not a cocycle".into()))?;
        for (i, c) in coords.into_iter().enumerate() {
            out[(i, j)] = c;
        }
    }
    Ok(out)
}

pub fn dense_rank(m: &Dense<Rational>) -> usize {
    rank(&SparseMatrix::from_dense(&m.to_rows()))
}

fn select_keys(m: &Dense<Rational>, row_keys: &[i32], row_key: i32, col_keys: &[i32], col_key: i32) -> Dense<Rational> {
    let rows: Vec<usize> = (0..row_keys.len()).filter(|i| row_keys[*i] == row_key).collect();
    let cols: Vec<usize> = (0..col_keys.len()).filter(|j| col_keys[*j] == col_key).collect();
    Dense::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])].clone())
}

/// Two complexes with a degree-preserving chain map `restriction: big → small`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConePair {
    big: FlatComplex,
    small: FlatComplex,
    restriction: SparseMatrix<Rational>,
}

impl ConePair {
    pub fn new(big: FlatComplex, small: FlatComplex, restriction: SparseMatrix<Rational>) -> Result<Self, DgError> {
        if restriction.rows() != small.len() || restriction.cols() != big.len() {
            return Err(DgError::InvalidChainMap(format!(
                "restriction is {}x{}, expected {}x{}",
                restriction.rows(),
                restriction.cols(),
                small.len(),
                big.len()
            )));
        }
        for (r, c, _) in restriction.triplets() {
            if small.cells[r].degree != big.cells[c].degree || small.cells[r].poly != big.cells[c].poly {
                return Err(DgError::InvalidChainMap(format!(
                    "restriction sends {} to {} with a different degree or weight",
                    big.cells[c].label, small.cells[r].label
                )));
            }
        }
        if restriction.mul(&big.d) != small.d.mul(&restriction) {
            return Err(DgError::InvalidChainMap("restriction does not commute with the differentials".into()));
        }
        Ok(ConePair { big, small, restriction })
    }

    /// Cone of the degree-0 map `f: N → A` in the graded setting.
    pub fn from_chain_map(f: &ChainMap) -> Result<Self, DgError> {
        if f.shift != 0 {
            return Err(DgError::InvalidChainMap("cone pairs need a degree-0 map".into()));
        }
        ConePair::new(f.source.to_flat(), f.target.to_flat(), f.to_flat_matrix())
    }

    pub fn big(&self) -> &FlatComplex {
        &self.big
    }

    pub fn small(&self) -> &FlatComplex {
        &self.small
    }

    pub fn restriction(&self) -> &SparseMatrix<Rational> {
        &self.restriction
    }

    /// Cells `N:*` (degree shifted down by one) followed by `A:*`, with
    /// δ(n, a) = (−d n, d a + i* n).
    pub fn mapping_cone(&self) -> FlatComplex {
        let nb = self.big.len();
        let mut cells: Vec<Cell> = self
            .big
            .cells
            .iter()
            .map(|c| Cell::new(format!("N:{}", c.label), c.degree - 1, c.poly))
            .collect();
        cells.extend(self.small.cells.iter().map(|c| Cell::new(format!("A:{}", c.label), c.degree, c.poly)));
        let mut triplets: Vec<(usize, usize, Rational)> =
            self.big.d.triplets().into_iter().map(|(r, c, v)| (r, c, -v)).collect();
        triplets.extend(self.restriction.triplets().into_iter().map(|(r, c, v)| (nb + r, c, v)));
        triplets.extend(self.small.d.triplets().into_iter().map(|(r, c, v)| (nb + r, nb + c, v)));
        let n = cells.len();
        FlatComplex::new(cells, SparseMatrix::from_triplets(n, n, triplets)).expect("cone of a chain map is a complex")
    }

    /// `a ↦ (0, a)`.
    pub fn inclusion(&self) -> SparseMatrix<Rational> {
        let nb = self.big.len();
        let n = nb + self.small.len();
        SparseMatrix::from_triplets(n, self.small.len(), (0..self.small.len()).map(|i| (nb + i, i, Rational::from(1))))
    }

    /// `(n, a) ↦ n`.
    pub fn projection(&self) -> SparseMatrix<Rational> {
        let nb = self.big.len();
        SparseMatrix::from_triplets(nb, nb + self.small.len(), (0..nb).map(|i| (i, i, Rational::from(1))))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SixTermNode {
    pub name: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SixTermReport {
    /// A⁰ → C⁰ → N¹ → A¹ → C¹ → N⁰ → A⁰, with C the cone.
    pub nodes: Vec<SixTermNode>,
    pub exact_at: Vec<bool>,
    pub exact: bool,
    /// Exactness of the same sequence before windowing.
    pub truncated_exact: bool,
}

/// Verifies the ℤ₂-folded long exact sequence of the cone on classes kept by
/// `keep` (see [`FlatComplex::windowed_cohomology`]). Outgoing maps land in
/// classes kept by `wide`, a window at least as large as `keep`, so that a map
/// pushing a kept class just past `keep` is not mistaken for a zero map.
pub fn six_term_check(
    pair: &ConePair,
    keep: impl Fn(&Cell) -> bool + Copy,
    wide: impl Fn(&Cell) -> bool + Copy,
) -> Result<SixTermReport, DgError> {
    let cone = pair.mapping_cone();
    let (full_dims, full_exact) = six_term_nodes(pair, &cone, |_| true, |_| true)?;
    let (dims, exact_at) = six_term_nodes(pair, &cone, keep, wide)?;
    let truncated_exact = full_exact.iter().all(|b| *b);
    let exact = exact_at.iter().all(|b| *b);
    if !truncated_exact {
        return Err(DgError::InvalidComplex(format!(
            "long exact sequence fails before windowing (dims {full_dims:?})"
        )));
    }
    if !exact {
        return Err(DgError::WindowTooSmall(format!("windowed sequence not exact at nodes {exact_at:?}")));
    }
    let names = ["A^0", "C^0", "N^1", "A^1", "C^1", "N^0"];
    Ok(SixTermReport {
        nodes: names.iter().zip(dims).map(|(n, d)| SixTermNode { name: n.to_string(), dim: d }).collect(),
        exact_at,
        exact,
        truncated_exact,
    })
}

fn six_term_nodes(
    pair: &ConePair,
    cone: &FlatComplex,
    keep: impl Fn(&Cell) -> bool + Copy,
    wide: impl Fn(&Cell) -> bool + Copy,
) -> Result<(Vec<usize>, Vec<bool>), DgError> {
    let classes = |c: &FlatComplex| -> Result<(Classes, Classes), DgError> {
        Ok((c.windowed_cohomology(Grading::Parity, keep)?, c.windowed_cohomology(Grading::Parity, wide)?))
    };
    let (a, a_wide) = classes(&pair.small)?;
    let (n, n_wide) = classes(&pair.big)?;
    let (c, c_wide) = classes(cone)?;
    // every node is windowed by `keep`; each map is read into the wider target
    let incl = induced_map(&pair.inclusion(), &a, &c_wide)?;
    let proj = induced_map(&pair.projection(), &c, &n_wide)?;
    let rest = induced_map(&pair.restriction, &n, &a_wide)?;
    // the same maps into the narrow targets, to compose with the next map
    let incl_in = induced_map(&pair.inclusion(), &a, &c)?;
    let proj_in = induced_map(&pair.projection(), &c, &n)?;
    let rest_in = induced_map(&pair.restriction, &n, &a)?;
    // (wide matrix, narrow matrix, source, source parity, wide target, narrow target, target parity)
    type Arrow<'a> = (&'a Dense<Rational>, &'a Dense<Rational>, &'a Classes, i32, &'a Classes, &'a Classes, i32);
    let maps: [Arrow; 6] = [
        (&incl, &incl_in, &a, 0, &c_wide, &c, 0),
        (&proj, &proj_in, &c, 0, &n_wide, &n, 1),
        (&rest, &rest_in, &n, 1, &a_wide, &a, 1),
        (&incl, &incl_in, &a, 1, &c_wide, &c, 1),
        (&proj, &proj_in, &c, 1, &n_wide, &n, 0),
        (&rest, &rest_in, &n, 0, &a_wide, &a, 0),
    ];
    let outgoing: Vec<Dense<Rational>> =
        maps.iter().map(|(m, _, s, sp, t, _, tp)| select_keys(m, t.keys(), *tp, s.keys(), *sp)).collect();
    let incoming: Vec<Dense<Rational>> =
        maps.iter().map(|(_, m, s, sp, _, t, tp)| select_keys(m, t.keys(), *tp, s.keys(), *sp)).collect();
    let dims: Vec<usize> = maps.iter().map(|(_, _, s, sp, _, _, _)| s.dim_at(*sp)).collect();
    let mut exact = Vec::with_capacity(6);
    for k in 0..6 {
        let incoming = &incoming[(k + 5) % 6];
        let outgoing = &outgoing[k];
        let composite_zero = outgoing.mul(incoming)?.is_zero();
        exact.push(composite_zero && dense_rank(incoming) + dense_rank(outgoing) == dims[k]);
    }
    Ok((dims, exact))
}

/// Basis labels per degree.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GradedSpace {
    labels: BTreeMap<i32, Vec<String>>,
}

impl GradedSpace {
    pub fn new(labels: BTreeMap<i32, Vec<String>>) -> Result<Self, DgError> {
        for (deg, ls) in &labels {
            let unique: BTreeSet<&String> = ls.iter().collect();
            if unique.len() != ls.len() {
                return Err(DgError::InvalidComplex(format!("duplicate labels in degree {deg}")));
            }
        }
        let labels = labels.into_iter().filter(|(_, l)| !l.is_empty()).collect();
        Ok(GradedSpace { labels })
    }

    pub fn dim(&self, degree: i32) -> usize {
        self.labels.get(&degree).map_or(0, Vec::len)
    }

    pub fn labels(&self, degree: i32) -> &[String] {
        self.labels.get(&degree).map_or(&[], Vec::as_slice)
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        self.labels.keys().copied()
    }

    pub fn total_dim(&self) -> usize {
        self.labels.values().map(Vec::len).sum()
    }
}

/// A bounded cochain complex, one differential `d^n: C^n → C^{n+1}` per degree.
#[derive(Clone, Debug, PartialEq)]
pub struct CochainComplex {
    spaces: GradedSpace,
    differentials: BTreeMap<i32, SparseMatrix<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct ComplexWire {
    degrees: Vec<i32>,
    labels: BTreeMap<String, Vec<String>>,
    differentials: BTreeMap<String, Vec<TripletEntry>>,
}

impl CochainComplex {
    pub fn new(spaces: GradedSpace, differentials: BTreeMap<i32, SparseMatrix<Rational>>) -> Result<Self, DgError> {
        for (n, d) in &differentials {
            if d.rows() != spaces.dim(n + 1) || d.cols() != spaces.dim(*n) {
                return Err(DgError::InvalidComplex(format!(
                    "d^{n} is {}x{}, expected {}x{}",
                    d.rows(),
                    d.cols(),
                    spaces.dim(n + 1),
                    spaces.dim(*n)
                )));
            }
        }
        let differentials: BTreeMap<i32, SparseMatrix<Rational>> =
            differentials.into_iter().filter(|(_, d)| !d.is_zero()).collect();
        let c = CochainComplex { spaces, differentials };
        for n in c.differentials.keys() {
            if !c.differential(n + 1).mul(&c.differential(*n)).is_zero() {
                return Err(DgError::InvalidComplex(format!("d^{} ∘ d^{} ≠ 0", n + 1, n)));
            }
        }
        Ok(c)
    }

    pub fn spaces(&self) -> &GradedSpace {
        &self.spaces
    }

    pub fn differential(&self, n: i32) -> SparseMatrix<Rational> {
        self.differentials
            .get(&n)
            .cloned()
            .unwrap_or_else(|| SparseMatrix::zero(self.spaces.dim(n + 1), self.spaces.dim(n)))
    }

    pub fn top_degree(&self) -> Option<i32> {
        self.spaces.degrees().max()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.spaces.degrees().map(|n| if n.rem_euclid(2) == 0 { 1 } else { -1 } * self.spaces.dim(n) as i64).sum()
    }

    fn offsets(&self) -> BTreeMap<i32, usize> {
        let mut off = BTreeMap::new();
        let mut acc = 0;
        for n in self.spaces.degrees() {
            off.insert(n, acc);
            acc += self.spaces.dim(n);
        }
        off
    }

    /// Cells ordered by degree, then by position within the degree.
    pub fn to_flat(&self) -> FlatComplex {
        let off = self.offsets();
        let cells: Vec<Cell> = self
            .spaces
            .degrees()
            .flat_map(|n| self.spaces.labels(n).iter().map(move |l| Cell::new(l.clone(), n, 0)))
            .collect();
        let mut triplets = Vec::new();
        for (n, d) in &self.differentials {
            for (r, c, v) in d.triplets() {
                triplets.push((off[&(n + 1)] + r, off[n] + c, v));
            }
        }
        let len = cells.len();
        FlatComplex::new(cells, SparseMatrix::from_triplets(len, len, triplets)).expect("valid complex")
    }

    /// Regroups a homogeneous flat complex by degree, keeping the cell order.
    pub fn from_flat(flat: &FlatComplex) -> Result<Self, DgError> {
        if !flat.is_homogeneous() {
            return Err(DgError::NotHomogeneous);
        }
        let mut labels: BTreeMap<i32, Vec<String>> = BTreeMap::new();
        let mut local = Vec::with_capacity(flat.len());
        for cell in flat.cells() {
            let ls = labels.entry(cell.degree).or_default();
            local.push(ls.len());
            ls.push(cell.label.clone());
        }
        let mut triplets: BTreeMap<i32, Vec<(usize, usize, Rational)>> = BTreeMap::new();
        for (r, c, v) in flat.differential().triplets() {
            triplets.entry(flat.cells[c].degree).or_default().push((local[r], local[c], v));
        }
        let spaces = GradedSpace::new(labels)?;
        let differentials = triplets
            .into_iter()
            .map(|(n, t)| (n, SparseMatrix::from_triplets(spaces.dim(n + 1), spaces.dim(n), t)))
            .collect();
        CochainComplex::new(spaces, differentials)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let wire = ComplexWire {
            degrees: self.spaces.degrees().collect(),
            labels: self.spaces.labels.iter().map(|(n, l)| (n.to_string(), l.clone())).collect(),
            differentials: self.differentials.iter().map(|(n, d)| (n.to_string(), d.to_wire())).collect(),
        };
        serde_json::to_value(wire).expect("serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, DgError> {
        let wire: ComplexWire =
            serde_json::from_value(value.clone()).map_err(|e| DgError::InvalidComplex(e.to_string()))?;
        let parse = |k: &str| k.parse::<i32>().map_err(|_| DgError::InvalidComplex(format!("bad degree key {k:?}")));
        let mut labels = BTreeMap::new();
        for (k, l) in wire.labels {
            labels.insert(parse(&k)?, l);
        }
        for n in &wire.degrees {
            labels.entry(*n).or_default();
        }
        let spaces = GradedSpace::new(labels)?;
        let mut differentials = BTreeMap::new();
        for (k, entries) in wire.differentials {
            let n = parse(&k)?;
            let d = SparseMatrix::from_wire(spaces.dim(n + 1), spaces.dim(n), &entries)
                .map_err(DgError::InvalidComplex)?;
            differentials.insert(n, d);
        }
        CochainComplex::new(spaces, differentials)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyGroup {
    pub dim: usize,
    /// Cocycles in the coordinates of `C^n`.
    pub representatives: Vec<SparseVec<Rational>>,
}

/// `H^n = ker d^n / im d^{n−1}` in every degree carrying cells.
pub fn cohomology(c: &CochainComplex) -> BTreeMap<i32, CohomologyGroup> {
    c.spaces
        .degrees()
        .map(|n| {
            let z = kernel_basis(&c.differential(n));
            let b = image_basis(&c.differential(n - 1));
            let q = quotient_dim(&b, &z).expect("d² = 0 is checked at construction");
            (n, CohomologyGroup { dim: q.dim, representatives: q.representatives })
        })
        .collect()
}

/// Per-degree maps `source^n → target^{n+shift}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainMap {
    source: CochainComplex,
    target: CochainComplex,
    shift: i32,
    components: BTreeMap<i32, SparseMatrix<Rational>>,
}

impl ChainMap {
    /// Checks `d_T f = (−1)^shift f d_S` in every degree.
    pub fn new(
        source: CochainComplex,
        target: CochainComplex,
        shift: i32,
        components: BTreeMap<i32, SparseMatrix<Rational>>,
    ) -> Result<Self, DgError> {
        for (n, f) in &components {
            if f.rows() != target.spaces.dim(n + shift) || f.cols() != source.spaces.dim(*n) {
                return Err(DgError::InvalidChainMap(format!("component {n} has the wrong shape")));
            }
        }
        let m = ChainMap { source, target, shift, components };
        let degrees: BTreeSet<i32> = m.source.spaces.degrees().flat_map(|n| [n - 1, n]).collect();
        let sign = Rational::from(if shift.rem_euclid(2) == 0 { 1 } else { -1 });
        for n in degrees {
            let lhs = m.target.differential(n + shift).mul(&m.component(n));
            let rhs = m.component(n + 1).mul(&m.source.differential(n)).scale(&sign);
            if lhs != rhs {
                return Err(DgError::InvalidChainMap(format!("does not commute with d in degree {n}")));
            }
        }
        Ok(m)
    }

    pub fn identity(c: &CochainComplex) -> Self {
        let components = c.spaces.degrees().map(|n| (n, SparseMatrix::identity(c.spaces.dim(n)))).collect();
        ChainMap { source: c.clone(), target: c.clone(), shift: 0, components }
    }

    pub fn zero(source: &CochainComplex, target: &CochainComplex) -> Self {
        ChainMap { source: source.clone(), target: target.clone(), shift: 0, components: BTreeMap::new() }
    }

    pub fn source(&self) -> &CochainComplex {
        &self.source
    }

    pub fn target(&self) -> &CochainComplex {
        &self.target
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    pub fn component(&self, n: i32) -> SparseMatrix<Rational> {
        self.components
            .get(&n)
            .cloned()
            .unwrap_or_else(|| SparseMatrix::zero(self.target.spaces.dim(n + self.shift), self.source.spaces.dim(n)))
    }

    /// The map as one matrix between the flat cell lists.
    pub fn to_flat_matrix(&self) -> SparseMatrix<Rational> {
        let so = self.source.offsets();
        let to = self.target.offsets();
        let mut triplets = Vec::new();
        for (n, f) in &self.components {
            for (r, c, v) in f.triplets() {
                triplets.push((to[&(n + self.shift)] + r, so[n] + c, v));
            }
        }
        SparseMatrix::from_triplets(self.target.spaces.total_dim(), self.source.spaces.total_dim(), triplets)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuasiIsoDegree {
    pub degree: i32,
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuasiIsoReport {
    pub per_degree: Vec<QuasiIsoDegree>,
    pub quasi_iso: bool,
}

/// Whether `f` induces isomorphisms `H^n(S) → H^{n+shift}(T)` for all `n ≤ window`.
pub fn is_quasi_iso(f: &ChainMap, window: i32) -> QuasiIsoReport {
    let hs = cohomology(&f.source);
    let degrees: BTreeSet<i32> = f
        .source
        .spaces
        .degrees()
        .chain(f.target.spaces.degrees().map(|n| n - f.shift))
        .filter(|n| *n <= window)
        .collect();
    let mut per_degree = Vec::new();
    for n in degrees {
        let t = n + f.shift;
        let z = kernel_basis(&f.target.differential(t));
        let b = image_basis(&f.target.differential(t - 1));
        let target_classes = SubQuotient::new(b.echelon().clone(), &z.basis());
        let source_reps = hs.get(&n).map_or(Vec::new(), |g| g.representatives.clone());
        let fc = f.component(n);
        let columns: Vec<Vec<Rational>> = source_reps
            .iter()
            .map(|z| target_classes.coordinates(&fc.apply(z)).expect("chain maps send cocycles to cocycles"))
            .collect();
        let rank = if columns.is_empty() || target_classes.dim() == 0 {
            0
        } else {
            let m = Dense::from_fn(target_classes.dim(), columns.len(), |r, c| columns[c][r].clone());
            dense_rank(&m)
        };
        per_degree.push(QuasiIsoDegree { degree: n, source_dim: source_reps.len(), target_dim: target_classes.dim(), rank });
    }
    let quasi_iso = per_degree.iter().all(|d| d.source_dim == d.target_dim && d.rank == d.source_dim);
    QuasiIsoReport { per_degree, quasi_iso }
}

/// Mapping cylinder of a degree-0 map `f: N → A`, with its structure maps.
#[derive(Clone, Debug)]
pub struct Cylinder {
    pub complex: CochainComplex,
    pub include_big: ChainMap,
    pub include_small: ChainMap,
    pub projection: ChainMap,
}

/// `Cyl^n = N^n ⊕ N^{n+1} ⊕ A^n`, `d(x, y, z) = (dx − y, −dy, dz + f y)`.
pub fn mapping_cylinder(f: &ChainMap) -> Result<Cylinder, DgError> {
    if f.shift != 0 {
        return Err(DgError::InvalidChainMap("cylinders need a degree-0 map".into()));
    }
    let (big, small) = (&f.source, &f.target);
    let degrees: BTreeSet<i32> =
        big.spaces.degrees().flat_map(|n| [n - 1, n]).chain(small.spaces.degrees()).collect();
    let mut labels = BTreeMap::new();
    for &n in &degrees {
        let mut ls: Vec<String> = big.spaces.labels(n).iter().map(|l| format!("N:{l}")).collect();
        ls.extend(big.spaces.labels(n + 1).iter().map(|l| format!("N':{l}")));
        ls.extend(small.spaces.labels(n).iter().map(|l| format!("A:{l}")));
        labels.insert(n, ls);
    }
    let spaces = GradedSpace::new(labels)?;
    let one = Rational::from(1);
    let mut differentials = BTreeMap::new();
    for &n in &degrees {
        let (x0, y0, z0) = (big.spaces.dim(n), big.spaces.dim(n + 1), small.spaces.dim(n));
        let (x1, y1) = (big.spaces.dim(n + 1), big.spaces.dim(n + 2));
        let mut t = Vec::new();
        for (r, c, v) in big.differential(n).triplets() {
            t.push((r, c, v));
        }
        for i in 0..y0 {
            t.push((i, x0 + i, -one.clone()));
        }
        for (r, c, v) in big.differential(n + 1).triplets() {
            t.push((x1 + r, x0 + c, -v));
        }
        for (r, c, v) in small.differential(n).triplets() {
            t.push((x1 + y1 + r, x0 + y0 + c, v));
        }
        for (r, c, v) in f.component(n + 1).triplets() {
            t.push((x1 + y1 + r, x0 + c, v));
        }
        differentials.insert(n, SparseMatrix::from_triplets(spaces.dim(n + 1), x0 + y0 + z0, t));
    }
    let complex = CochainComplex::new(spaces, differentials)?;
    let mut inc_big = BTreeMap::new();
    let mut inc_small = BTreeMap::new();
    let mut proj = BTreeMap::new();
    for &n in &degrees {
        let (x0, y0, z0) = (big.spaces.dim(n), big.spaces.dim(n + 1), small.spaces.dim(n));
        let total = x0 + y0 + z0;
        inc_big.insert(n, SparseMatrix::from_triplets(total, x0, (0..x0).map(|i| (i, i, one.clone()))));
        inc_small.insert(n, SparseMatrix::from_triplets(total, z0, (0..z0).map(|i| (x0 + y0 + i, i, one.clone()))));
        let mut t: Vec<(usize, usize, Rational)> = f.component(n).triplets();
        t.extend((0..z0).map(|i| (i, x0 + y0 + i, one.clone())));
        proj.insert(n, SparseMatrix::from_triplets(z0, total, t));
    }
    Ok(Cylinder {
        include_big: ChainMap::new(big.clone(), complex.clone(), 0, inc_big)?,
        include_small: ChainMap::new(small.clone(), complex.clone(), 0, inc_small)?,
        projection: ChainMap::new(complex.clone(), small.clone(), 0, proj)?,
        complex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    fn space(dims: &[(i32, &[&str])]) -> GradedSpace {
        GradedSpace::new(dims.iter().map(|(n, l)| (*n, l.iter().map(|s| s.to_string()).collect())).collect()).unwrap()
    }

    fn exterior2() -> CochainComplex {
        CochainComplex::new(space(&[(0, &["1"]), (1, &["t1", "t2"]), (2, &["t1t2"])]), BTreeMap::new()).unwrap()
    }

    fn identity_complex() -> CochainComplex {
        let d = SparseMatrix::identity(1);
        CochainComplex::new(space(&[(0, &["a"]), (1, &["b"])]), BTreeMap::from([(0, d)])).unwrap()
    }

    fn dims(c: &CochainComplex) -> Vec<(i32, usize)> {
        cohomology(c).into_iter().map(|(n, g)| (n, g.dim)).collect()
    }

    #[test]
    fn exterior_algebra_with_zero_differential() {
        assert_eq!(dims(&exterior2()), vec![(0, 1), (1, 2), (2, 1)]);
    }

    #[test]
    fn identity_two_term_complex_is_acyclic() {
        assert_eq!(dims(&identity_complex()), vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn invalid_complex_rejected() {
        let d0 = SparseMatrix::identity(1);
        let d1 = SparseMatrix::identity(1);
        let r = CochainComplex::new(space(&[(0, &["a"]), (1, &["b"]), (2, &["c"])]), BTreeMap::from([(0, d0), (1, d1)]));
        assert!(matches!(r, Err(DgError::InvalidComplex(_))));
    }

    #[test]
    fn json_round_trip() {
        let c = identity_complex();
        let back = CochainComplex::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let js = serde_json::to_string(&c.to_json()).unwrap();
        assert_eq!(js, r#"{"degrees":[0,1],"differentials":{"0":[[0,0,"1"]]},"labels":{"0":["a"],"1":["b"]}}"#);
    }

    #[test]
    fn flat_and_graded_agree() {
        let c = exterior2();
        let flat = c.to_flat();
        let classes = flat.cohomology(Grading::Degree).unwrap();
        assert_eq!(classes.dims(), BTreeMap::from([(0, 1), (1, 2), (2, 1)]));
        assert_eq!(CochainComplex::from_flat(&flat).unwrap(), c);
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        let c = exterior2();
        let pair = ConePair::from_chain_map(&ChainMap::identity(&c)).unwrap();
        assert_eq!(pair.mapping_cone().cohomology(Grading::Degree).unwrap().dim(), 0);
    }

    #[test]
    fn cone_onto_zero_complex_is_shift() {
        let big = exterior2();
        let empty = CochainComplex::new(GradedSpace::default(), BTreeMap::new()).unwrap();
        let pair = ConePair::from_chain_map(&ChainMap::zero(&big, &empty)).unwrap();
        let cone = CochainComplex::from_flat(&pair.mapping_cone()).unwrap();
        assert_eq!(dims(&cone), vec![(-1, 1), (0, 2), (1, 1)]);
        assert_eq!(cone.euler_characteristic(), empty.euler_characteristic() - big.euler_characteristic());
    }

    #[test]
    fn quasi_iso_examples() {
        let c = exterior2();
        assert!(is_quasi_iso(&ChainMap::identity(&c), 5).quasi_iso);
        assert!(!is_quasi_iso(&ChainMap::zero(&c, &c), 5).quasi_iso);
        let cyl = mapping_cylinder(&ChainMap::identity(&c)).unwrap();
        assert!(is_quasi_iso(&cyl.include_small, 5).quasi_iso);
        assert!(is_quasi_iso(&cyl.projection, 5).quasi_iso);
        assert!(is_quasi_iso(&cyl.include_big, 5).quasi_iso);
    }

    #[test]
    fn chain_map_sign_convention() {
        let c = identity_complex();
        // Degree-1 shift of the identity complex into itself: commutation needs the sign.
        let f = BTreeMap::from([(0, SparseMatrix::identity(1))]);
        assert!(ChainMap::new(c.clone(), c.clone(), 1, f).is_ok());
        let f = BTreeMap::from([(0, SparseMatrix::identity(1)), (-1, SparseMatrix::zero(1, 0))]);
        assert!(ChainMap::new(c.clone(), c, 1, f).is_ok());
    }

    #[test]
    fn windowed_truncation_on_polynomial_line() {
        // ℚ[x] truncated at x^3 with d(θ x^a) = −x^{a+1}: the free circle.
        let mut cells = Vec::new();
        for a in 0..=3u32 {
            cells.push(Cell::new(format!("x^{a}"), 2 * a as i32, a));
            cells.push(Cell::new(format!("t x^{a}"), 2 * a as i32 + 1, a));
        }
        let t = (0..3).map(|a| (2 * (a + 1), 2 * a + 1, q(-1, 1)));
        let d = SparseMatrix::from_triplets(8, 8, t);
        let flat = FlatComplex::new(cells, d).unwrap();
        let full = flat.cohomology(Grading::Degree).unwrap();
        assert_eq!(full.dims(), BTreeMap::from([(0, 1), (7, 1)]));
        let windowed = flat.windowed_cohomology(Grading::Degree, |c| c.poly <= 2).unwrap();
        assert_eq!(windowed.dims(), BTreeMap::from([(0, 1)]));
        assert!(matches!(flat.windowed_cohomology(Grading::Degree, |c| c.poly >= 1), Err(DgError::NotQuotient(_))));
    }

    #[test]
    fn six_term_on_identity_pair() {
        let c = exterior2();
        let pair = ConePair::from_chain_map(&ChainMap::identity(&c)).unwrap();
        let report = six_term_check(&pair, |_| true, |_| true).unwrap();
        assert!(report.exact);
        assert_eq!(report.nodes.iter().map(|n| n.dim).collect::<Vec<_>>(), vec![2, 0, 2, 2, 0, 2]);
    }
}
