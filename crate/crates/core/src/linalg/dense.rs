//! Small dense matrices over an exact field.

use super::scalar::Scalar;
use super::LinalgError;

#[derive(Clone, Debug, PartialEq)]
pub struct Dense<F> {
    n_rows: usize,
    n_cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Dense<F> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Dense { n_rows, n_cols, data: vec![F::zero(); n_rows * n_cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self, LinalgError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(LinalgError::DimensionMismatch { expected: n_cols, found: bad.len() });
        }
        Ok(Dense { n_rows, n_cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, f: impl Fn(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in 0..n_rows {
            for c in 0..n_cols {
                data.push(f(r, c));
            }
        }
        Dense { n_rows, n_cols, data }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        self.data.chunks(self.n_cols.max(1)).take(self.n_rows).map(<[F]>::to_vec).collect()
    }

    pub fn row(&self, r: usize) -> &[F] {
        &self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    pub fn column(&self, c: usize) -> Vec<F> {
        (0..self.n_rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n_cols, self.n_rows, |r, c| self[(c, r)].clone())
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.n_cols != rhs.n_rows {
            return Err(LinalgError::DimensionMismatch { expected: self.n_cols, found: rhs.n_rows });
        }
        let mut out = Self::zeros(self.n_rows, rhs.n_cols);
        for r in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.n_cols {
                    let b = &rhs[(k, c)];
                    if !b.is_zero() {
                        out[(r, c)] = out[(r, c)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[F]) -> Result<Vec<F>, LinalgError> {
        if v.len() != self.n_cols {
            return Err(LinalgError::DimensionMismatch { expected: self.n_cols, found: v.len() });
        }
        Ok((0..self.n_rows)
            .map(|r| {
                self.row(r).iter().zip(v).fold(F::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.n_rows, self.n_cols), (rhs.n_rows, rhs.n_cols));
        Self::from_fn(self.n_rows, self.n_cols, |r, c| self[(r, c)].clone() + rhs[(r, c)].clone())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.n_rows, self.n_cols), (rhs.n_rows, rhs.n_cols));
        Self::from_fn(self.n_rows, self.n_cols, |r, c| self[(r, c)].clone() - rhs[(r, c)].clone())
    }

    pub fn scale(&self, s: &F) -> Self {
        Self::from_fn(self.n_rows, self.n_cols, |r, c| self[(r, c)].clone() * s.clone())
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(self.n_rows, self.n_cols, |r, c| -self[(r, c)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Copy of the block with rows `r0..r1` and columns `c0..c1`.
    pub fn sub_block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(r1 - r0, c1 - c0, |r, c| self[(r0 + r, c0 + c)].clone())
    }

    /// `[[a, b], [c, d]]`.
    pub fn block2(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        assert_eq!(a.n_rows, b.n_rows);
        assert_eq!(c.n_rows, d.n_rows);
        assert_eq!(a.n_cols, c.n_cols);
        assert_eq!(b.n_cols, d.n_cols);
        let (top, left) = (a.n_rows, a.n_cols);
        Self::from_fn(a.n_rows + c.n_rows, a.n_cols + b.n_cols, |r, col| match (r < top, col < left) {
            (true, true) => a[(r, col)].clone(),
            (true, false) => b[(r, col - left)].clone(),
            (false, true) => c[(r - top, col)].clone(),
            (false, false) => d[(r - top, col - left)].clone(),
        })
    }

    pub fn determinant(&self) -> Result<F, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare { rows: self.n_rows, cols: self.n_cols });
        }
        let n = self.n_rows;
        let mut m = self.clone();
        let mut det = F::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m[(r, col)].is_zero()) else {
                return Ok(F::zero());
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let pivot = m[(col, col)].clone();
            det = det * pivot.clone();
            let inv = pivot.inv();
            for r in col + 1..n {
                let f = m[(r, col)].clone() * inv.clone();
                if f.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = m[(col, c)].clone();
                    m[(r, c)] = m[(r, c)].clone() - f.clone() * v;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare { rows: self.n_rows, cols: self.n_cols });
        }
        let n = self.n_rows;
        let mut m = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let p = (col..n).find(|&r| !m[(r, col)].is_zero()).ok_or(LinalgError::Singular)?;
            m.swap_rows(p, col);
            inv.swap_rows(p, col);
            let s = m[(col, col)].inv();
            for c in 0..n {
                m[(col, c)] = m[(col, c)].clone() * s.clone();
                inv[(col, c)] = inv[(col, c)].clone() * s.clone();
            }
            for r in (0..n).filter(|&r| r != col) {
                let f = m[(r, col)].clone();
                if f.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let (a, b) = (m[(col, c)].clone(), inv[(col, c)].clone());
                    m[(r, c)] = m[(r, c)].clone() - f.clone() * a;
                    inv[(r, c)] = inv[(r, c)].clone() - f.clone() * b;
                }
            }
        }
        Ok(inv)
    }

    /// Determinants of the leading k×k blocks for k = 1..=n.
    pub fn leading_principal_minors(&self) -> Result<Vec<F>, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare { rows: self.n_rows, cols: self.n_cols });
        }
        (1..=self.n_rows).map(|k| self.sub_block(0, k, 0, k).determinant()).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.n_cols {
            self.data.swap(a * self.n_cols + c, b * self.n_cols + c);
        }
    }
}

use num_traits::Zero;

impl<F> std::ops::Index<(usize, usize)> for Dense<F> {
    type Output = F;
    fn index(&self, (r, c): (usize, usize)) -> &F {
        &self.data[r * self.n_cols + c]
    }
}

impl<F> std::ops::IndexMut<(usize, usize)> for Dense<F> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut F {
        &mut self.data[r * self.n_cols + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::scalar::{q, Rational};

    fn m(rows: &[&[i64]]) -> Dense<Rational> {
        Dense::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x, 1)).collect()).collect()).unwrap()
    }

    #[test]
    fn det_and_inverse() {
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.determinant().unwrap(), q(1, 1));
        let inv = a.inverse().unwrap();
        assert_eq!(inv, m(&[&[1, -1], &[-1, 2]]));
        assert_eq!(a.mul(&inv).unwrap(), Dense::identity(2));
        assert_eq!(m(&[&[1, 2], &[2, 4]]).inverse(), Err(LinalgError::Singular));
        assert_eq!(m(&[&[0, 1], &[1, 0]]).determinant().unwrap(), q(-1, 1));
    }

    #[test]
    fn minors() {
        let a = m(&[&[2, -1, 0], &[-1, 2, -1], &[0, -1, 2]]);
        assert_eq!(a.leading_principal_minors().unwrap(), vec![q(2, 1), q(3, 1), q(4, 1)]);
    }

    #[test]
    fn blocks() {
        let i = Dense::<Rational>::identity(1);
        let z = Dense::<Rational>::zeros(1, 1);
        let b = Dense::block2(&z, &i, &i.neg(), &z);
        assert_eq!(b, m(&[&[0, 1], &[-1, 0]]));
        assert_eq!(b.sub_block(0, 1, 1, 2), i);
    }
}
