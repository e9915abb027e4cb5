use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::scalar::{Rational, Scalar};

/// A sparse vector stored as index-sorted `(index, value)` pairs without zeros.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct SparseVec<F> {
    entries: Vec<(usize, F)>,
}

impl<F: Scalar> SparseVec<F> {
    pub fn zero() -> Self {
        SparseVec { entries: Vec::new() }
    }

    pub fn unit(index: usize) -> Self {
        SparseVec { entries: vec![(index, F::one())] }
    }

    /// Builds a vector from arbitrary pairs, summing repeated indices.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, F)>) -> Self {
        let mut acc: BTreeMap<usize, F> = BTreeMap::new();
        for (i, v) in pairs {
            let slot = acc.entry(i).or_insert_with(F::zero);
            *slot = slot.clone() + v;
        }
        SparseVec { entries: acc.into_iter().filter(|(_, v)| !v.is_zero()).collect() }
    }

    pub fn from_dense(values: &[F]) -> Self {
        SparseVec {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect(),
        }
    }

    pub fn to_dense(&self, len: usize) -> Vec<F> {
        let mut out = vec![F::zero(); len];
        for (i, v) in &self.entries {
            out[*i] = v.clone();
        }
        out
    }

    pub fn entries(&self) -> &[(usize, F)] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [(usize, F)] {
        &mut self.entries
    }

    pub fn into_entries(self) -> Vec<(usize, F)> {
        self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> F {
        match self.entries.binary_search_by_key(&index, |(i, _)| *i) {
            Ok(pos) => self.entries[pos].1.clone(),
            Err(_) => F::zero(),
        }
    }

    pub fn leading(&self) -> Option<(usize, &F)> {
        self.entries.first().map(|(i, v)| (*i, v))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    pub fn scale(&self, factor: &F) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        SparseVec {
            entries: self.entries.iter().map(|(i, v)| (*i, v.clone() * factor.clone())).collect(),
        }
    }

    /// `self + factor * other`, merging the two sorted entry lists.
    pub fn axpy(&self, factor: &F, other: &Self) -> Self {
        if factor.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (0, 0);
        while a < self.entries.len() || b < other.entries.len() {
            let ia = self.entries.get(a).map(|e| e.0);
            let ib = other.entries.get(b).map(|e| e.0);
            match (ia, ib) {
                (Some(x), Some(y)) if x == y => {
                    let v = self.entries[a].1.clone() + factor.clone() * other.entries[b].1.clone();
                    if !v.is_zero() {
                        out.push((x, v));
                    }
                    a += 1;
                    b += 1;
                }
                (Some(x), Some(y)) if x < y => {
                    out.push(self.entries[a].clone());
                    a += 1;
                }
                (Some(_), None) => {
                    out.push(self.entries[a].clone());
                    a += 1;
                }
                (_, Some(y)) => {
                    out.push((y, factor.clone() * other.entries[b].1.clone()));
                    b += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        SparseVec { entries: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(&F::one(), other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(&-F::one(), other)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-F::one())
    }

    /// Keeps the entries accepted by `keep`, re-indexed through `reindex`.
    pub fn filter_map_index(&self, mut f: impl FnMut(usize) -> Option<usize>) -> Self {
        let mut pairs: Vec<(usize, F)> =
            self.entries.iter().filter_map(|(i, v)| f(*i).map(|j| (j, v.clone()))).collect();
        pairs.sort_by_key(|p| p.0);
        SparseVec::from_pairs(pairs)
    }

    pub fn shift(&self, offset: usize) -> Self {
        SparseVec { entries: self.entries.iter().map(|(i, v)| (i + offset, v.clone())).collect() }
    }

    pub fn dot_dense(&self, dense: &[F]) -> F {
        self.entries
            .iter()
            .fold(F::zero(), |acc, (i, v)| acc + v.clone() * dense[*i].clone())
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> SparseVec<G> {
        SparseVec::from_pairs(self.entries.iter().map(|(i, v)| (*i, f(v))))
    }
}

/// A sparse matrix stored by rows. Column `j` of the matrix is the image of the
/// `j`-th basis vector when the matrix acts on column vectors.
#[derive(Clone, PartialEq, Debug)]
pub struct SparseMatrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<SparseVec<F>>,
}

impl<F: Scalar> SparseMatrix<F> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, data: vec![SparseVec::zero(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { rows: n, cols: n, data: (0..n).map(SparseVec::unit).collect() }
    }

    /// Builds a matrix from `(row, col, value)` triplets; repeated positions are
    /// summed and zeros dropped, so insertion order never matters.
    pub fn from_triplets(rows: usize, cols: usize, triplets: impl IntoIterator<Item = (usize, usize, F)>) -> Self {
        let mut per_row: Vec<Vec<(usize, F)>> = vec![Vec::new(); rows];
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r},{c}) outside {rows}x{cols}");
            per_row[r].push((c, v));
        }
        SparseMatrix { rows, cols, data: per_row.into_iter().map(SparseVec::from_pairs).collect() }
    }

    pub fn from_rows(cols: usize, rows: Vec<SparseVec<F>>) -> Self {
        for r in &rows {
            if let Some(m) = r.max_index() {
                assert!(m < cols, "row entry beyond column count");
            }
        }
        SparseMatrix { rows: rows.len(), cols, data: rows }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[SparseVec<F>]) -> Self {
        let triplets = columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.entries().iter().map(move |(r, v)| (*r, c, v.clone())));
        Self::from_triplets(rows, columns.len(), triplets)
    }

    pub fn from_dense(values: &[Vec<F>]) -> Self {
        let rows = values.len();
        let cols = values.first().map_or(0, |r| r.len());
        SparseMatrix { rows, cols, data: values.iter().map(|r| SparseVec::from_dense(r)).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &SparseVec<F> {
        &self.data[r]
    }

    pub fn row_vecs(&self) -> &[SparseVec<F>] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> F {
        self.data[r].get(c)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.nnz()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_zero())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, F)> {
        self.data
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.entries().iter().map(move |(c, v)| (r, *c, v.clone())))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.triplets().into_iter().map(|(r, c, v)| (c, r, v)))
    }

    pub fn column(&self, c: usize) -> SparseVec<F> {
        SparseVec::from_pairs(
            self.data
                .iter()
                .enumerate()
                .filter_map(|(r, row)| {
                    let v = row.get(c);
                    (!v.is_zero()).then_some((r, v))
                }),
        )
    }

    pub fn columns(&self) -> Vec<SparseVec<F>> {
        let t = self.transpose();
        t.data
    }

    /// Matrix-vector product with a column vector.
    pub fn apply(&self, v: &SparseVec<F>) -> SparseVec<F> {
        let dense = v.to_dense(self.cols);
        SparseVec::from_pairs(
            self.data
                .iter()
                .enumerate()
                .map(|(r, row)| (r, row.dot_dense(&dense)))
                .filter(|(_, x)| !x.is_zero()),
        )
    }

    /// Product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let data = self
            .data
            .iter()
            .map(|row| {
                let mut acc = SparseVec::zero();
                for (k, v) in row.entries() {
                    acc = acc.axpy(v, &rhs.data[*k]);
                }
                acc
            })
            .collect();
        SparseMatrix { rows: self.rows, cols: rhs.cols, data }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "dimension mismatch in sum");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.add(b)).collect();
        SparseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&-F::one()))
    }

    pub fn scale(&self, factor: &F) -> Self {
        SparseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|r| r.scale(factor)).collect() }
    }

    /// Sub-matrix on the selected rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_pos = vec![usize::MAX; self.cols];
        for (new, &old) in cols.iter().enumerate() {
            col_pos[old] = new;
        }
        let data = rows
            .iter()
            .map(|&r| self.data[r].filter_map_index(|c| (col_pos[c] != usize::MAX).then(|| col_pos[c])))
            .collect();
        SparseMatrix { rows: rows.len(), cols: cols.len(), data }
    }

    /// Block matrix `[[a, b], [c, d]]`.
    pub fn block(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        assert_eq!(a.rows, b.rows);
        assert_eq!(c.rows, d.rows);
        assert_eq!(a.cols, c.cols);
        assert_eq!(b.cols, d.cols);
        let off = a.cols;
        let mut data = Vec::with_capacity(a.rows + c.rows);
        for (ra, rb) in a.data.iter().zip(&b.data) {
            data.push(ra.add(&rb.shift(off)));
        }
        for (rc, rd) in c.data.iter().zip(&d.data) {
            data.push(rc.add(&rd.shift(off)));
        }
        SparseMatrix { rows: a.rows + c.rows, cols: a.cols + b.cols, data }
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> SparseMatrix<G> {
        SparseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|r| r.map(&f)).collect() }
    }

    pub fn to_dense(&self) -> Vec<Vec<F>> {
        self.data.iter().map(|r| r.to_dense(self.cols)).collect()
    }
}

/// Wire form of a rational sparse matrix: `[[row, col, "p/q"], ...]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripletEntry(pub usize, pub usize, pub Rational);

impl SparseMatrix<Rational> {
    pub fn to_wire(&self) -> Vec<TripletEntry> {
        self.triplets().into_iter().map(|(r, c, v)| TripletEntry(r, c, v)).collect()
    }

    pub fn from_wire(rows: usize, cols: usize, entries: &[TripletEntry]) -> Result<Self, String> {
        for TripletEntry(r, c, _) in entries {
            if *r >= rows || *c >= cols {
                return Err(format!("entry ({r},{c}) outside {rows}x{cols}"));
            }
        }
        Ok(Self::from_triplets(rows, cols, entries.iter().map(|TripletEntry(r, c, v)| (*r, *c, v.clone()))))
    }
}
