//! Brute-force oracles shared by integration tests. Nothing here calls the
//! library's elimination or complex code.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Rank by plain Gaussian elimination on a dense copy.
pub fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let n_cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..n_cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone() / pivot.clone();
                for k in c..n_cols {
                    let v = m[r][k].clone() * f.clone();
                    m[i][k] -= v;
                }
            }
        }
        r += 1;
    }
    r
}

/// Sign of `θ_S ∧ θ_T` for disjoint bitmasks.
fn wedge_sign(s: u32, t: u32) -> i64 {
    let mut swaps = 0;
    for i in 0..32 {
        if s & (1 << i) != 0 {
            swaps += (t & ((1u32 << i) - 1)).count_ones();
        }
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `Λ(θ_1..θ_n) ⊗ ℚ[x]/(x^{D+1})` for a trivial circle action (d = 0, ι = 0)
/// twisted by `η = Σ c θ_S x^k`; returns the (even, odd) dims of the image of
/// `H(Q_D)` in the quotient keeping `x`-degree ≤ D − 1 (everything when D = 0).
pub fn trivial_torus_twisted(n: u32, cap: u32, eta: &[(u32, u32, Q)]) -> (usize, usize) {
    let cells: Vec<(u32, u32)> = (0..1u32 << n).flat_map(|m| (0..=cap).map(move |k| (m, k))).collect();
    let idx = |m: u32, k: u32| cells.iter().position(|c| *c == (m, k)).unwrap();
    let len = cells.len();
    // delta[j] = image of cell j as a dense column
    let delta: Vec<Vec<Q>> = cells
        .iter()
        .map(|&(m, k)| {
            let mut col = vec![Q::zero(); len];
            for (s, j, c) in eta {
                if s & m == 0 && k + j <= cap {
                    col[idx(s | m, k + j)] += c.clone() * q(wedge_sign(*s, m), 1);
                }
            }
            col
        })
        .collect();
    let keep = |(_, k): (u32, u32)| cap == 0 || k < cap;
    let kept: Vec<usize> = (0..len).filter(|&i| keep(cells[i])).collect();
    let mut out = (0, 0);
    for parity in 0..2u32 {
        let in_parity = |i: usize| cells[i].0.count_ones() % 2 == parity;
        let src: Vec<usize> = (0..len).filter(|&i| in_parity(i)).collect();
        // cocycles: kernel of δ restricted to this parity, by brute nullspace
        let rows: Vec<Vec<Q>> = (0..len).map(|r| src.iter().map(|&c| delta[c][r].clone()).collect()).collect();
        let z = nullspace(&rows, src.len());
        let project = |v: &[Q]| kept.iter().filter(|&&i| in_parity(i)).map(|&i| v[i].clone()).collect::<Vec<Q>>();
        let z_full: Vec<Vec<Q>> = z
            .iter()
            .map(|coeffs| {
                let mut v = vec![Q::zero(); len];
                for (t, &c) in src.iter().enumerate() {
                    v[c] = coeffs[t].clone();
                }
                project(&v)
            })
            .collect();
        let b: Vec<Vec<Q>> = kept.iter().filter(|&&i| !in_parity(i)).map(|&i| project(&delta[i])).collect();
        let both: Vec<Vec<Q>> = z_full.iter().chain(b.iter()).cloned().collect();
        let dim = rank(&both) - rank(&b);
        if parity == 0 {
            out.0 = dim;
        } else {
            out.1 = dim;
        }
    }
    out
}

/// Basis of `{v : rows · v = 0}`.
pub fn nullspace(rows: &[Vec<Q>], n_cols: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n_cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = Q::one() / m[r][c].clone();
        for k in 0..n_cols {
            m[r][k] = m[r][k].clone() * inv.clone();
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..n_cols {
                    let v = m[r][k].clone() * f.clone();
                    m[i][k] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..n_cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); n_cols];
            v[free] = Q::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][free].clone();
            }
            v
        })
        .collect()
}

#[test]
fn oracle_self_check() {
    // untwisted T³: Betti numbers 1,3,3,1
    assert_eq!(trivial_torus_twisted(3, 0, &[]), (4, 4));
    assert_eq!(trivial_torus_twisted(3, 0, &[(0b111, 0, q(1, 1))]), (3, 3));
    assert_eq!(trivial_torus_twisted(1, 4, &[(0b1, 1, q(1, 1))]), (0, 1));
}
