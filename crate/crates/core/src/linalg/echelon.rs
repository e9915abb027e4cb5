use std::collections::BTreeMap;

use super::scalar::Scalar;
use super::sparse::{SparseMatrix, SparseVec};
use super::LinalgError;

/// Incrementally maintained reduced row-echelon basis.
///
/// Every stored row has a leading 1 at its pivot and zeros at every other
/// pivot, so the stored basis of a subspace is canonical.
#[derive(Clone, Debug, PartialEq)]
pub struct Echelon<F> {
    dim: usize,
    rows: BTreeMap<usize, SparseVec<F>>,
}

impl<F: Scalar> Echelon<F> {
    pub fn new(dim: usize) -> Self {
        Echelon { dim, rows: BTreeMap::new() }
    }

    pub fn from_vectors<'a>(dim: usize, vectors: impl IntoIterator<Item = &'a SparseVec<F>>) -> Self
    where
        F: 'a,
    {
        let mut e = Echelon::new(dim);
        for v in vectors {
            e.insert(v);
        }
        e
    }

    pub fn ambient(&self) -> usize {
        self.dim
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn basis(&self) -> Vec<SparseVec<F>> {
        self.rows.values().cloned().collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &SparseVec<F>)> {
        self.rows.iter().map(|(p, r)| (*p, r))
    }

    /// Residual of `v` after removing its component along the stored rows.
    /// The residual vanishes at every pivot.
    pub fn reduce(&self, v: &SparseVec<F>) -> SparseVec<F> {
        let mut out = v.clone();
        for (i, coef) in v.entries() {
            if let Some(row) = self.rows.get(i) {
                out = out.axpy(&-coef.clone(), row);
            }
        }
        out
    }

    /// Coefficients of `v` in the stored basis, keyed by pivot, when `v` lies
    /// in the span.
    pub fn coordinates(&self, v: &SparseVec<F>) -> Option<BTreeMap<usize, F>> {
        if !self.reduce(v).is_zero() {
            return None;
        }
        Some(
            v.entries()
                .iter()
                .filter(|(i, _)| self.rows.contains_key(i))
                .map(|(i, c)| (*i, c.clone()))
                .collect(),
        )
    }

    pub fn contains(&self, v: &SparseVec<F>) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` to the span; returns the new pivot when `v` was independent.
    pub fn insert(&mut self, v: &SparseVec<F>) -> Option<usize> {
        let r = self.reduce(v);
        let (pivot, lead) = match r.leading() {
            Some((p, lead)) => (p, lead.clone()),
            None => return None,
        };
        let r = r.scale(&lead.inv());
        for row in self.rows.values_mut() {
            let c = row.get(pivot);
            if !c.is_zero() {
                *row = row.axpy(&-c, &r);
            }
        }
        self.rows.insert(pivot, r);
        Some(pivot)
    }

    /// Number of pivots grouped by `key(pivot)`. For a subspace spanned by
    /// vectors homogeneous with respect to a grading of the coordinates, this
    /// is the graded dimension.
    pub fn count_by<K: Ord>(&self, key: impl Fn(usize) -> K) -> BTreeMap<K, usize> {
        let mut out = BTreeMap::new();
        for p in self.rows.keys() {
            *out.entry(key(*p)).or_insert(0) += 1;
        }
        out
    }
}

/// A linear subspace of `F^ambient` held in canonical echelon form.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<F> {
    ech: Echelon<F>,
}

impl<F: Scalar> Subspace<F> {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ech: Echelon::new(ambient) }
    }

    pub fn full(ambient: usize) -> Self {
        Self::spanned_by(ambient, &(0..ambient).map(SparseVec::unit).collect::<Vec<_>>())
    }

    pub fn spanned_by(ambient: usize, vectors: &[SparseVec<F>]) -> Self {
        Subspace { ech: Echelon::from_vectors(ambient, vectors) }
    }

    pub fn from_echelon(ech: Echelon<F>) -> Self {
        Subspace { ech }
    }

    pub fn ambient(&self) -> usize {
        self.ech.ambient()
    }

    pub fn dim(&self) -> usize {
        self.ech.dim()
    }

    pub fn basis(&self) -> Vec<SparseVec<F>> {
        self.ech.basis()
    }

    pub fn echelon(&self) -> &Echelon<F> {
        &self.ech
    }

    pub fn contains(&self, v: &SparseVec<F>) -> bool {
        self.ech.contains(v)
    }

    pub fn contains_subspace(&self, other: &Subspace<F>) -> bool {
        other.ech.rows().all(|(_, r)| self.contains(r))
    }

    pub fn sum(&self, other: &Subspace<F>) -> Subspace<F> {
        let mut ech = self.ech.clone();
        for (_, r) in other.ech.rows() {
            ech.insert(r);
        }
        Subspace { ech }
    }

    pub fn count_by<K: Ord>(&self, key: impl Fn(usize) -> K) -> BTreeMap<K, usize> {
        self.ech.count_by(key)
    }
}

/// Rank by fraction-free elimination: rows are combined as `a·r − b·p` with no
/// division, then rescaled by [`Scalar::normalize_row`].
pub fn rank<F: Scalar>(m: &SparseMatrix<F>) -> usize {
    let mut rows: Vec<Vec<(usize, F)>> = m
        .row_vecs()
        .iter()
        .filter(|r| !r.is_zero())
        .map(|r| {
            let mut e = r.entries().to_vec();
            F::normalize_row(&mut e);
            e
        })
        .collect();
    let mut rank = 0;
    while !rows.is_empty() {
        let (pos, _) = rows.iter().enumerate().min_by_key(|(_, r)| r[0].0).expect("nonempty");
        let pivot = rows.swap_remove(pos);
        let (col, a) = (pivot[0].0, pivot[0].1.clone());
        let pivot_vec = SparseVec::from_pairs(pivot);
        rank += 1;
        let mut next = Vec::with_capacity(rows.len());
        for r in rows.drain(..) {
            if r[0].0 != col {
                next.push(r);
                continue;
            }
            let b = r[0].1.clone();
            let combined = SparseVec::from_pairs(r).scale(&a).axpy(&-b, &pivot_vec);
            if !combined.is_zero() {
                let mut e = combined.into_entries();
                F::normalize_row(&mut e);
                next.push(e);
            }
        }
        rows = next;
    }
    rank
}

/// Rank through the reduced echelon form; used as an independent check of [`rank`].
pub fn rank_by_rref<F: Scalar>(m: &SparseMatrix<F>) -> usize {
    Echelon::from_vectors(m.cols(), m.row_vecs()).dim()
}

/// Canonical basis of `{v : m·v = 0}`.
pub fn kernel_basis<F: Scalar>(m: &SparseMatrix<F>) -> Subspace<F> {
    let ech = Echelon::from_vectors(m.cols(), m.row_vecs());
    let pivots: Vec<usize> = ech.pivots().collect();
    let mut is_pivot = vec![false; m.cols()];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut vectors = Vec::new();
    for free in (0..m.cols()).filter(|c| !is_pivot[*c]) {
        let mut pairs = vec![(free, F::one())];
        for (p, row) in ech.rows() {
            let c = row.get(free);
            if !c.is_zero() {
                pairs.push((p, -c));
            }
        }
        vectors.push(SparseVec::from_pairs(pairs));
    }
    Subspace::spanned_by(m.cols(), &vectors)
}

/// Canonical basis of the column space of `m`.
pub fn image_basis<F: Scalar>(m: &SparseMatrix<F>) -> Subspace<F> {
    Subspace::spanned_by(m.rows(), &m.columns())
}

/// Result of [`quotient_dim`]: the dimension of `sup / sub` and representatives
/// that extend the basis of `sub` to a basis of `sup`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quotient<F> {
    pub dim: usize,
    pub representatives: Vec<SparseVec<F>>,
}

pub fn quotient_dim<F: Scalar>(sub: &Subspace<F>, sup: &Subspace<F>) -> Result<Quotient<F>, LinalgError> {
    if sub.ambient() != sup.ambient() {
        return Err(LinalgError::DimensionMismatch { expected: sup.ambient(), found: sub.ambient() });
    }
    if !sup.contains_subspace(sub) {
        return Err(LinalgError::NotContained);
    }
    let mut ech = sub.echelon().clone();
    let mut representatives = Vec::new();
    for v in sup.basis() {
        if ech.insert(&v).is_some() {
            representatives.push(v);
        }
    }
    Ok(Quotient { dim: sup.dim() - sub.dim(), representatives })
}

/// A particular solution of `m·x = b`, or `None` when the system is inconsistent.
pub fn solve<F: Scalar>(m: &SparseMatrix<F>, b: &SparseVec<F>) -> Option<SparseVec<F>> {
    let n = m.cols();
    let augmented: Vec<SparseVec<F>> = m
        .row_vecs()
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let rhs = b.get(r);
            if rhs.is_zero() {
                row.clone()
            } else {
                row.add(&SparseVec::from_pairs(vec![(n, rhs)]))
            }
        })
        .collect();
    let ech = Echelon::from_vectors(n + 1, &augmented);
    if ech.pivots().any(|p| p == n) {
        return None;
    }
    Some(SparseVec::from_pairs(ech.rows().map(|(p, row)| (p, row.get(n)))))
}

/// Maintains `numerator / denominator` for nested subspaces, with a basis of
/// the quotient chosen among the numerator vectors.
#[derive(Clone, Debug)]
pub struct SubQuotient<F> {
    dim: usize,
    den: Echelon<F>,
    reps: Vec<SparseVec<F>>,
    chosen: Vec<usize>,
    // Rows are `[reduced combination | coefficients on numerator indices]`.
    tracked: Echelon<F>,
    slot: BTreeMap<usize, usize>,
}

impl<F: Scalar> SubQuotient<F> {
    /// `numerator` vectors need not be independent; those already in the span
    /// of the denominator and earlier ones are skipped.
    pub fn new(den: Echelon<F>, numerator: &[SparseVec<F>]) -> Self {
        let dim = den.ambient();
        let mut tracked = Echelon::new(dim + numerator.len());
        let mut reps = Vec::new();
        let mut chosen = Vec::new();
        let mut slot = BTreeMap::new();
        for (i, v) in numerator.iter().enumerate() {
            let r = den.reduce(v).add(&SparseVec::unit(dim + i));
            let reduced = tracked.reduce(&r);
            if reduced.leading().map_or(true, |(p, _)| p >= dim) {
                continue;
            }
            tracked.insert(&reduced);
            slot.insert(i, reps.len());
            reps.push(v.clone());
            chosen.push(i);
        }
        SubQuotient { dim, den, reps, chosen, tracked, slot }
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Numerator vectors forming a basis of the quotient.
    pub fn representatives(&self) -> &[SparseVec<F>] {
        &self.reps
    }

    /// Positions in the original numerator list of the chosen representatives.
    pub fn chosen_indices(&self) -> &[usize] {
        &self.chosen
    }

    pub fn denominator(&self) -> &Echelon<F> {
        &self.den
    }

    /// Coordinates of the class of `v` in the representative basis, or `None`
    /// when `v` is outside numerator + denominator.
    pub fn coordinates(&self, v: &SparseVec<F>) -> Option<Vec<F>> {
        let r = self.den.reduce(v);
        let mut residual = r.clone();
        let mut out = vec![F::zero(); self.reps.len()];
        for (p, c) in r.entries() {
            let Some(row) = self.tracked.rows.get(p) else { continue };
            residual = residual.axpy(&-c.clone(), &row.filter_map_index(|i| (i < self.dim).then_some(i)));
            for (i, t) in row.entries().iter().filter(|(i, _)| *i >= self.dim) {
                let k = self.slot[&(i - self.dim)];
                out[k] = out[k].clone() + c.clone() * t.clone();
            }
        }
        residual.is_zero().then_some(out)
    }
}
