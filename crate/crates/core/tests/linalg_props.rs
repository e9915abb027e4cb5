mod common;

use proptest::prelude::*;
use twistcart::linalg::{kernel_basis, rank, rank_by_rref, Rational, SparseMatrix, SparseVec};

fn matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (0usize..7, 0usize..7).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(prop_oneof![3 => Just(0i64), 2 => -4i64..=4], c), r)
    })
}

fn to_sparse(rows: &[Vec<i64>]) -> SparseMatrix<Rational> {
    let cols = rows.first().map_or(0, Vec::len);
    let dense: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&x| Rational::from(x)).collect()).collect();
    if rows.is_empty() {
        SparseMatrix::zero(0, cols)
    } else {
        SparseMatrix::from_dense(&dense)
    }
}

proptest! {
    #[test]
    fn rank_plus_nullity(rows in matrix()) {
        let m = to_sparse(&rows);
        prop_assert_eq!(rank(&m) + kernel_basis(&m).dim(), m.cols());
    }

    #[test]
    fn fraction_free_rank_matches_rref(rows in matrix()) {
        let m = to_sparse(&rows);
        prop_assert_eq!(rank(&m), rank_by_rref(&m));
        prop_assert_eq!(rank(&m), rank(&m.transpose()));
    }

    #[test]
    fn rank_matches_dense_oracle(rows in matrix()) {
        let q: Vec<Vec<common::Q>> = rows.iter().map(|r| r.iter().map(|&x| common::q(x, 1)).collect()).collect();
        prop_assert_eq!(rank(&to_sparse(&rows)), common::rank(&q));
    }

    #[test]
    fn kernel_vectors_are_annihilated(rows in matrix()) {
        let m = to_sparse(&rows);
        for v in kernel_basis(&m).basis() {
            prop_assert!(m.apply(&v).is_zero());
        }
    }

    #[test]
    fn sparse_vector_arithmetic(a in proptest::collection::vec(-5i64..=5, 0..8), b in proptest::collection::vec(-5i64..=5, 0..8)) {
        let n = a.len().max(b.len());
        let va = SparseVec::from_dense(&a.iter().map(|&x| Rational::from(x)).collect::<Vec<_>>());
        let vb = SparseVec::from_dense(&b.iter().map(|&x| Rational::from(x)).collect::<Vec<_>>());
        prop_assert!(va.add(&vb).sub(&vb).sub(&va).is_zero());
        let dense = va.add(&vb).to_dense(n);
        for i in 0..n {
            let want = a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0);
            prop_assert_eq!(dense[i].clone(), Rational::from(want));
        }
    }
}
