//! Pointwise generalized complex linear algebra on `V ⊕ V*`.
//!
//! Vectors are columns `(X; α)` of length `2n`; a structure `J` acts by
//! left multiplication and has blocks `[[A, β], [σ, −Aᵀ]]`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    kernel_basis, q, rank, Dense, GaussianRational, LinalgError, Rational, Scalar, SparseMatrix, SparseVec,
};

type C = GaussianRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GcError {
    #[error("not a generalized complex structure: {}", .0.join("; "))]
    NotGc(Vec<String>),
    #[error("subspace meets its conjugate")]
    NotTransverse,
    #[error("subspace is not maximal isotropic: {0}")]
    NotIsotropic(String),
    #[error("invalid triple: {0}")]
    InvalidTriple(String),
    #[error("structures do not commute")]
    NotCommuting,
    #[error("generalized metric is not positive definite")]
    NotPositive,
    #[error("two-form is not antisymmetric")]
    NotAntisymmetric,
    #[error("not a constant-coefficient torus model: {0}")]
    NotConstantModel(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn check_len(expected: usize, found: usize) -> Result<(), GcError> {
    if expected == found {
        Ok(())
    } else {
        Err(GcError::DimensionMismatch { expected, found })
    }
}

/// `V ⊕ V*` with the pairing `⟨X+α, Y+β⟩ = ½(β(X) + α(Y))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitSpace {
    pub n: usize,
}

impl SplitSpace {
    pub fn new(n: usize) -> Self {
        SplitSpace { n }
    }

    pub fn pairing_matrix(&self) -> Dense<Rational> {
        let n = self.n;
        Dense::from_fn(2 * n, 2 * n, |r, c| if r + n == c || c + n == r { q(1, 2) } else { Rational::zero() })
    }

    pub fn pairing(&self, u: &[Rational], v: &[Rational]) -> Result<Rational, GcError> {
        pairing_generic(self.n, u, v)
    }

    pub fn signature(&self) -> (usize, usize, usize) {
        signature(&self.pairing_matrix())
    }
}

fn pairing_generic<F: Scalar>(n: usize, u: &[F], v: &[F]) -> Result<F, GcError> {
    check_len(2 * n, u.len())?;
    check_len(2 * n, v.len())?;
    let mut s = F::zero();
    for i in 0..n {
        s = s + u[i].clone() * v[n + i].clone() + u[n + i].clone() * v[i].clone();
    }
    Ok(s * (F::one() + F::one()).inv())
}

/// (positive, negative, zero) counts of a symmetric rational matrix via congruence.
pub fn signature(m: &Dense<Rational>) -> (usize, usize, usize) {
    let n = m.n_rows();
    let mut a = m.clone();
    let (mut pos, mut neg) = (0, 0);
    let mut k = 0;
    while k < n {
        if a[(k, k)].is_zero() {
            let j = (k + 1..n).find(|j| !a[(*j, *j)].is_zero());
            let pivot = match j {
                Some(j) => Some((j, false)),
                None => (k + 1..n).find(|j| !a[(k, *j)].is_zero()).map(|j| (j, true)),
            };
            match pivot {
                Some((j, false)) => swap_sym(&mut a, k, j),
                Some((j, true)) => {
                    // row_k += row_j, col_k += col_j: new a_kk = 2 a_kj + a_jj
                    for c in 0..n {
                        let v = a[(k, c)].clone() + a[(j, c)].clone();
                        a[(k, c)] = v;
                    }
                    for r in 0..n {
                        let v = a[(r, k)].clone() + a[(r, j)].clone();
                        a[(r, k)] = v;
                    }
                }
                None => {
                    k += 1;
                    continue;
                }
            }
        }
        let p = a[(k, k)].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for r in k + 1..n {
            let f = a[(r, k)].clone() / p.clone();
            if f.is_zero() {
                continue;
            }
            for c in k..n {
                let v = a[(r, c)].clone() - f.clone() * a[(k, c)].clone();
                a[(r, c)] = v;
            }
            for c in k..n {
                a[(c, r)] = a[(r, c)].clone();
            }
        }
        k += 1;
    }
    (pos, neg, n - pos - neg)
}

fn swap_sym(a: &mut Dense<Rational>, i: usize, j: usize) {
    let n = a.n_rows();
    for c in 0..n {
        let t = a[(i, c)].clone();
        a[(i, c)] = a[(j, c)].clone();
        a[(j, c)] = t;
    }
    for r in 0..n {
        let t = a[(r, i)].clone();
        a[(r, i)] = a[(r, j)].clone();
        a[(r, j)] = t;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GcCheck {
    pub ok: bool,
    pub failed: Vec<String>,
}

/// Checks `J² = −1` and `JᵀPJ = P`.
pub fn is_gc(j: &Dense<Rational>) -> GcCheck {
    let mut failed = Vec::new();
    if !j.is_square() || j.n_rows() % 2 != 0 {
        failed.push(format!("J must be 2n×2n, got {}×{}", j.n_rows(), j.n_cols()));
        return GcCheck { ok: false, failed };
    }
    let n = j.n_rows() / 2;
    let sq = j.mul(j).expect("square");
    if sq != Dense::identity(2 * n).neg() {
        failed.push("J² ≠ −1".into());
    }
    let p = SplitSpace::new(n).pairing_matrix();
    let pulled = j.transpose().mul(&p).and_then(|m| m.mul(j)).expect("square");
    if pulled != p {
        failed.push("J is not orthogonal for the pairing".into());
    }
    GcCheck { ok: failed.is_empty(), failed }
}

/// A validated generalized complex structure.
#[derive(Clone, Debug, PartialEq)]
pub struct GcStructure {
    j: Dense<Rational>,
}

impl GcStructure {
    pub fn new(j: Dense<Rational>) -> Result<Self, GcError> {
        let check = is_gc(&j);
        if check.ok {
            Ok(GcStructure { j })
        } else {
            Err(GcError::NotGc(check.failed))
        }
    }

    /// `[[0, −ω⁻¹], [ω, 0]]` for a nondegenerate antisymmetric `ω`.
    pub fn symplectic(omega: &Dense<Rational>) -> Result<Self, GcError> {
        let inv = omega.inverse()?;
        let n = omega.n_rows();
        GcStructure::new(Dense::block2(&Dense::zeros(n, n), &inv.neg(), omega, &Dense::zeros(n, n)))
    }

    /// `[[I, 0], [0, −Iᵀ]]` for a complex structure `I`.
    pub fn complex(i: &Dense<Rational>) -> Result<Self, GcError> {
        let n = i.n_rows();
        GcStructure::new(Dense::block2(i, &Dense::zeros(n, n), &Dense::zeros(n, n), &i.transpose().neg()))
    }

    pub fn n(&self) -> usize {
        self.j.n_rows() / 2
    }

    pub fn matrix(&self) -> &Dense<Rational> {
        &self.j
    }

    pub fn apply(&self, v: &[Rational]) -> Result<Vec<Rational>, GcError> {
        Ok(self.j.apply(v)?)
    }
}

/// Standard symplectic form on `ℝ^{2m}`: `ω(e_i, e_{m+i}) = 1`.
pub fn standard_symplectic(m: usize) -> Dense<Rational> {
    Dense::from_fn(2 * m, 2 * m, |r, c| {
        if c == r + m {
            Rational::one()
        } else if r == c + m {
            -Rational::one()
        } else {
            Rational::zero()
        }
    })
}

/// Standard complex structure on `ℝ^{2m}`: `e_i ↦ e_{m+i}`, `e_{m+i} ↦ −e_i`.
pub fn standard_complex(m: usize) -> Dense<Rational> {
    standard_symplectic(m).transpose()
}

/// A complex subspace of `(V ⊕ V*)⊗ℂ` given by basis vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropicSubspace {
    pub n: usize,
    pub basis: Vec<Vec<C>>,
}

impl IsotropicSubspace {
    pub fn new(n: usize, basis: Vec<Vec<C>>) -> Result<Self, GcError> {
        for v in &basis {
            check_len(2 * n, v.len())?;
        }
        Ok(IsotropicSubspace { n, basis })
    }

    pub fn dim(&self) -> usize {
        rank(&SparseMatrix::from_dense(&self.basis))
    }

    pub fn conjugate(&self) -> Self {
        IsotropicSubspace { n: self.n, basis: self.basis.iter().map(|v| v.iter().map(C::conj).collect()).collect() }
    }

    /// Complex-bilinear pairing vanishes on all basis pairs.
    pub fn is_isotropic(&self) -> bool {
        self.basis.iter().all(|u| self.basis.iter().all(|v| pairing_generic(self.n, u, v).map_or(false, |p| p.is_zero())))
    }

    pub fn is_maximal_isotropic(&self) -> bool {
        self.dim() == self.n && self.is_isotropic()
    }

    /// `L ∩ L̄ = 0`.
    pub fn is_transverse(&self) -> bool {
        let mut rows = self.basis.clone();
        rows.extend(self.conjugate().basis);
        rank(&SparseMatrix::from_dense(&rows)) == 2 * self.dim()
    }

    pub fn contains(&self, v: &[C]) -> bool {
        let r = rank(&SparseMatrix::from_dense(&self.basis));
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        rank(&SparseMatrix::from_dense(&rows)) == r
    }
}

fn complexify(m: &Dense<Rational>) -> Dense<C> {
    Dense::from_fn(m.n_rows(), m.n_cols(), |r, c| C::from(m[(r, c)].clone()))
}

/// The `+i` eigenspace, as the kernel of `J − i`.
pub fn i_eigenspace(j: &GcStructure) -> Result<IsotropicSubspace, GcError> {
    let n = j.n();
    let shifted = complexify(j.matrix()).sub(&Dense::identity(2 * n).scale(&C::i()));
    let basis: Vec<Vec<C>> = kernel_basis(&SparseMatrix::from_dense(&shifted.to_rows()))
        .basis()
        .into_iter()
        .map(|v| v.to_dense(2 * n))
        .collect();
    let l = IsotropicSubspace { n, basis };
    if !l.is_maximal_isotropic() || !l.is_transverse() {
        return Err(GcError::NotGc(vec!["+i eigenspace is not a transverse maximal isotropic".into()]));
    }
    Ok(l)
}

/// The unique structure acting by `i` on `L` and `−i` on `L̄`.
pub fn gc_from_isotropic(l: &IsotropicSubspace) -> Result<GcStructure, GcError> {
    let n = l.n;
    if l.dim() != n || !l.is_isotropic() {
        return Err(GcError::NotIsotropic(format!("dim {} with n = {n}", l.dim())));
    }
    if !l.is_transverse() {
        return Err(GcError::NotTransverse);
    }
    let mut cols = l.basis.clone();
    cols.extend(l.conjugate().basis);
    let m = Dense::from_rows(cols)?.transpose();
    let eig = Dense::from_fn(2 * n, 2 * n, |r, c| match (r == c, r < n) {
        (false, _) => C::zero(),
        (true, true) => C::i(),
        (true, false) => -C::i(),
    });
    let jc = m.mul(&eig)?.mul(&m.inverse()?)?;
    let mut j = Dense::zeros(2 * n, 2 * n);
    for r in 0..2 * n {
        for c in 0..2 * n {
            let z = &jc[(r, c)];
            if !z.is_real() {
                return Err(GcError::NotGc(vec!["reconstructed J is not real".into()]));
            }
            j[(r, c)] = z.re.clone();
        }
    }
    GcStructure::new(j)
}

pub fn is_antisymmetric(b: &Dense<Rational>) -> bool {
    b.is_square() && b.transpose() == b.neg()
}

fn shear(b: &Dense<Rational>) -> Dense<Rational> {
    let n = b.n_rows();
    Dense::block2(&Dense::identity(n), &Dense::zeros(n, n), b, &Dense::identity(n))
}

/// `(1 0; b 1) J (1 0; −b 1)`.
pub fn b_transform(j: &GcStructure, b: &Dense<Rational>) -> Result<GcStructure, GcError> {
    check_len(j.n(), b.n_rows())?;
    if !is_antisymmetric(b) {
        return Err(GcError::NotAntisymmetric);
    }
    let conj = shear(b).mul(j.matrix())?.mul(&shear(&b.neg()))?;
    GcStructure::new(conj)
}

/// Bi-Hermitian data `(g, I₊, I₋, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GkTriple {
    pub g: Dense<Rational>,
    pub i_plus: Dense<Rational>,
    pub i_minus: Dense<Rational>,
    pub b: Dense<Rational>,
}

impl GkTriple {
    pub fn new(g: Dense<Rational>, i_plus: Dense<Rational>, i_minus: Dense<Rational>) -> Self {
        let n = g.n_rows();
        GkTriple { g, i_plus, i_minus, b: Dense::zeros(n, n) }
    }

    pub fn with_b(mut self, b: Dense<Rational>) -> Self {
        self.b = b;
        self
    }

    pub fn n(&self) -> usize {
        self.g.n_rows()
    }

    pub fn validate(&self) -> Result<(), GcError> {
        let n = self.n();
        let bad = |s: &str| Err(GcError::InvalidTriple(s.into()));
        for m in [&self.g, &self.i_plus, &self.i_minus, &self.b] {
            if m.n_rows() != n || m.n_cols() != n {
                return bad("all blocks must be n×n");
            }
        }
        if self.g.transpose() != self.g {
            return bad("g is not symmetric");
        }
        if !self.g.leading_principal_minors()?.iter().all(Rational::is_positive) {
            return bad("g is not positive definite");
        }
        let minus_one = Dense::identity(n).neg();
        for (name, i) in [("I₊", &self.i_plus), ("I₋", &self.i_minus)] {
            if i.mul(i)? != minus_one {
                return Err(GcError::InvalidTriple(format!("{name}² ≠ −1")));
            }
            if i.transpose().mul(&self.g)?.mul(i)? != self.g {
                return Err(GcError::InvalidTriple(format!("{name} is not g-compatible")));
            }
        }
        if !is_antisymmetric(&self.b) {
            return bad("b is not antisymmetric");
        }
        Ok(())
    }

    pub fn omega_plus(&self) -> Dense<Rational> {
        self.g.mul(&self.i_plus).expect("validated shapes")
    }

    pub fn omega_minus(&self) -> Dense<Rational> {
        self.g.mul(&self.i_minus).expect("validated shapes")
    }
}

/// The generalized Kähler pair `J₁, J₂` built from bi-Hermitian data.
pub fn gk_from_triple(t: &GkTriple) -> Result<(GcStructure, GcStructure), GcError> {
    t.validate()?;
    let half = q(1, 2);
    let wp_inv = t.omega_plus().inverse()?;
    let wm_inv = t.omega_minus().inverse()?;
    let build = |sign: &Rational| -> Result<GcStructure, GcError> {
        let ipm = t.i_plus.add(&t.i_minus.scale(sign));
        let winv = wp_inv.sub(&wm_inv.scale(sign)).neg();
        let w = t.omega_plus().sub(&t.omega_minus().scale(sign));
        let star = t.i_plus.transpose().add(&t.i_minus.transpose().scale(sign)).neg();
        let core = Dense::block2(&ipm, &winv, &w, &star).scale(&half);
        GcStructure::new(shear(&t.b).mul(&core)?.mul(&shear(&t.b.neg()))?)
    };
    Ok((build(&Rational::one())?, build(&-Rational::one())?))
}

/// Bilinear form matrix `M` with `𝒢(A, B) = AᵀMB`, `𝒢(A, B) = ⟨−J₁J₂A, B⟩`.
pub fn generalized_metric(j1: &GcStructure, j2: &GcStructure) -> Result<Dense<Rational>, GcError> {
    let g = j1.matrix().mul(j2.matrix())?.neg();
    Ok(g.transpose().mul(&SplitSpace::new(j1.n()).pairing_matrix())?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GkCheck {
    pub commuting: bool,
    pub g_squared_identity: bool,
    pub symmetric: bool,
    /// Leading principal minors of the generalized metric.
    pub minors: Vec<Rational>,
    pub positive_definite: bool,
}

impl GkCheck {
    pub fn ok(&self) -> bool {
        self.commuting && self.g_squared_identity && self.symmetric && self.positive_definite
    }
}

pub fn gk_check(j1: &GcStructure, j2: &GcStructure) -> Result<GkCheck, GcError> {
    check_len(j1.n(), j2.n())?;
    let a = j1.matrix().mul(j2.matrix())?;
    let b = j2.matrix().mul(j1.matrix())?;
    let g = a.neg();
    let metric = generalized_metric(j1, j2)?;
    let minors = metric.leading_principal_minors()?;
    Ok(GkCheck {
        commuting: a == b,
        g_squared_identity: g.mul(&g)? == Dense::identity(2 * j1.n()),
        symmetric: metric.transpose() == metric,
        positive_definite: minors.iter().all(Rational::is_positive),
        minors,
    })
}

/// Evaluates `𝒢(v, v)`.
pub fn metric_value(j1: &GcStructure, j2: &GcStructure, v: &[Rational]) -> Result<Rational, GcError> {
    let m = generalized_metric(j1, j2)?;
    let mv = m.apply(v)?;
    Ok(v.iter().zip(&mv).fold(Rational::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
}

/// Recovers `(g, I₊, I₋, b)` from a generalized Kähler pair: `C±` are graphs
/// of `b ± g` over `V`, and `I±` is `J₁` transported along them.
pub fn extract_bihermitian(j1: &GcStructure, j2: &GcStructure) -> Result<GkTriple, GcError> {
    let check = gk_check(j1, j2)?;
    if !check.commuting {
        return Err(GcError::NotCommuting);
    }
    if !check.g_squared_identity || !check.positive_definite {
        return Err(GcError::NotPositive);
    }
    let n = j1.n();
    let g = j1.matrix().mul(j2.matrix())?.neg();
    let mut graph = Vec::new();
    for sign in [Rational::one(), -Rational::one()] {
        let shifted = g.sub(&Dense::identity(2 * n).scale(&sign));
        let basis = kernel_basis(&SparseMatrix::from_dense(&shifted.to_rows())).basis();
        if basis.len() != n {
            return Err(GcError::NotPositive);
        }
        let cols: Vec<Vec<Rational>> = basis.iter().map(|v| v.to_dense(2 * n)).collect();
        let m = Dense::from_rows(cols)?.transpose();
        let xs = m.sub_block(0, n, 0, n);
        let alphas = m.sub_block(n, 2 * n, 0, n);
        let phi = alphas.mul(&xs.inverse().map_err(|_| GcError::NotPositive)?)?;
        let lift = Dense::block2(&Dense::identity(n), &Dense::zeros(n, 0), &phi, &Dense::zeros(n, 0));
        let i = j1.matrix().mul(&lift)?.sub_block(0, n, 0, n);
        graph.push((phi, i));
    }
    let (phi_p, i_plus) = graph.remove(0);
    let (phi_m, i_minus) = graph.remove(0);
    let half = q(1, 2);
    let t = GkTriple {
        g: phi_p.sub(&phi_m).scale(&half),
        b: phi_p.add(&phi_m).scale(&half),
        i_plus,
        i_minus,
    };
    t.validate()?;
    Ok(t)
}

/// The `V* → V` block of `J`.
pub fn poisson_bivector(j: &GcStructure) -> Dense<Rational> {
    let n = j.n();
    j.matrix().sub_block(0, n, n, 2 * n)
}

/// Pointwise data of a Hamiltonian action: one entry per torus direction.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianPointData {
    pub j: GcStructure,
    pub dmu: Vec<Vec<Rational>>,
    pub xi_m: Vec<Vec<Rational>>,
    pub alpha: Vec<Vec<Rational>>,
    pub isotropy: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MomentResidual {
    /// `J(0 ⊕ dμ) + (ξ_M ⊕ α)`.
    pub condition: Vec<Rational>,
    /// `−β(dμ) − ξ_M`.
    pub poisson: Vec<Rational>,
}

impl MomentResidual {
    pub fn condition_holds(&self) -> bool {
        self.condition.iter().all(Zero::is_zero)
    }

    pub fn poisson_holds(&self) -> bool {
        self.poisson.iter().all(Zero::is_zero)
    }
}

pub fn moment_residual(h: &HamiltonianPointData) -> Result<Vec<MomentResidual>, GcError> {
    let n = h.j.n();
    check_len(h.dmu.len(), h.xi_m.len())?;
    check_len(h.dmu.len(), h.alpha.len())?;
    let beta = poisson_bivector(&h.j);
    let mut out = Vec::new();
    for ((dmu, xi), alpha) in h.dmu.iter().zip(&h.xi_m).zip(&h.alpha) {
        check_len(n, dmu.len())?;
        check_len(n, xi.len())?;
        check_len(n, alpha.len())?;
        let mut lifted = vec![Rational::zero(); n];
        lifted.extend(dmu.iter().cloned());
        let jd = h.j.apply(&lifted)?;
        let condition = (0..2 * n)
            .map(|k| jd[k].clone() + if k < n { xi[k].clone() } else { alpha[k - n].clone() })
            .collect();
        let bd = beta.apply(dmu)?;
        let poisson = (0..n).map(|k| -bd[k].clone() - xi[k].clone()).collect();
        out.push(MomentResidual { condition, poisson });
    }
    Ok(out)
}

/// `(ω₊⁻¹dμ − ω₋⁻¹dμ, I₊ᵀdμ + I₋ᵀdμ − 2α)`.
pub fn ham_eq_relations(
    t: &GkTriple,
    dmu: &[Rational],
    alpha: &[Rational],
) -> Result<(Vec<Rational>, Vec<Rational>), GcError> {
    t.validate()?;
    check_len(t.n(), dmu.len())?;
    check_len(t.n(), alpha.len())?;
    let a = t.omega_plus().inverse()?.sub(&t.omega_minus().inverse()?).apply(dmu)?;
    let two = Rational::from(2);
    let s = t.i_plus.transpose().add(&t.i_minus.transpose()).apply(dmu)?;
    let b = s.into_iter().zip(alpha).map(|(x, a)| x - two.clone() * a.clone()).collect();
    Ok((a, b))
}

fn kernel_of(m: &Dense<Rational>) -> Vec<SparseVec<Rational>> {
    kernel_basis(&SparseMatrix::from_dense(&m.to_rows())).basis()
}

fn kernel_contained(small: &Dense<Rational>, big: &Dense<Rational>) -> bool {
    kernel_of(small).iter().all(|v| big.apply(&v.to_dense(small.n_cols())).map_or(false, |w| w.iter().all(Zero::is_zero)))
}

/// `A = β·Hess` with the check `ker Hess ⊆ ker A`.
pub fn hessian_identity(beta: &Dense<Rational>, hess: &Dense<Rational>) -> Result<(Dense<Rational>, bool), GcError> {
    let a = beta.mul(hess)?;
    let contained = kernel_contained(hess, &a);
    Ok((a, contained))
}

/// Morse–Bott condition at a zero of `ξ_M`: the kernel of the Hessian equals
/// the kernel of the linearized vector field.
pub fn morse_bott_at_fixed_point(hess: &Dense<Rational>, linear_field: &Dense<Rational>) -> bool {
    hess.transpose() == *hess && kernel_contained(hess, linear_field) && kernel_contained(linear_field, hess)
}

/// `alpha_map` has one column `α(ξ_j)` per Lie-algebra basis vector.
pub fn compatibility_check(alpha_map: &Dense<Rational>, isotropy: &[Vec<Rational>]) -> bool {
    isotropy.iter().all(|xi| alpha_map.apply(xi).map_or(false, |v| v.iter().all(Zero::is_zero)))
}

/// A constant 3-form on a torus, by coefficients on `θ_iθ_jθ_k`, `i < j < k`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ConstThreeForm {
    pub n: usize,
    pub coeffs: BTreeMap<[usize; 3], Rational>,
}

impl ConstThreeForm {
    pub fn new(n: usize) -> Self {
        ConstThreeForm { n, coeffs: BTreeMap::new() }
    }

    /// Adds `c·θ_iθ_jθ_k` for arbitrary distinct indices.
    pub fn term(mut self, idx: [usize; 3], c: Rational) -> Result<Self, GcError> {
        let mut sorted = idx;
        if idx.iter().any(|i| *i >= self.n) {
            return Err(GcError::DimensionMismatch { expected: self.n, found: *idx.iter().max().unwrap() + 1 });
        }
        sorted.sort_unstable();
        if sorted[0] == sorted[1] || sorted[1] == sorted[2] {
            return Ok(self);
        }
        let sign = permutation_sign(&idx);
        let e = self.coeffs.entry(sorted).or_insert_with(Rational::zero);
        *e = e.clone() + if sign { -c } else { c };
        self.coeffs.retain(|_, v| !v.is_zero());
        Ok(self)
    }

    /// Reads a degree-3 element of an exterior algebra on degree-1 closed
    /// generators (a torus model with constant coefficients).
    pub fn from_model(model: &crate::cartan::CdgaModel, element: &SparseVec<Rational>) -> Result<Self, GcError> {
        let gens = model.generators();
        if gens.iter().any(|g| g.degree != 1) {
            return Err(GcError::NotConstantModel("all generators must have degree 1".into()));
        }
        for k in 0..gens.len() {
            if !model.d().apply(&model.generator_element(k)).is_zero() {
                return Err(GcError::NotConstantModel(format!("d{} ≠ 0", gens[k].name)));
            }
        }
        let mut form = ConstThreeForm::new(gens.len());
        for (idx, c) in element.entries() {
            let exps = model.basis_exponents(*idx);
            let on: Vec<usize> = exps.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, _)| i).collect();
            if on.len() != 3 {
                return Err(GcError::NotConstantModel("element is not a 3-form".into()));
            }
            form = form.term([on[0], on[1], on[2]], c.clone())?;
        }
        Ok(form)
    }

    /// `H(e_i, e_j, e_k)` for arbitrary indices.
    pub fn value(&self, i: usize, j: usize, k: usize) -> Rational {
        let idx = [i, j, k];
        let mut sorted = idx;
        sorted.sort_unstable();
        match self.coeffs.get(&sorted) {
            Some(c) if permutation_sign(&idx) => -c.clone(),
            Some(c) => c.clone(),
            None => Rational::zero(),
        }
    }
}

/// True for odd permutations of distinct indices.
fn permutation_sign(idx: &[usize; 3]) -> bool {
    let mut inv = 0;
    for a in 0..3 {
        for b in a + 1..3 {
            if idx[a] > idx[b] {
                inv += 1;
            }
        }
    }
    inv % 2 == 1
}

/// Twisted Courant bracket of constant sections `X+ξ`, `Y+ζ` (length `2n`);
/// only `ι_Yι_X H` survives.
pub fn courant_bracket_const<F: Scalar + From<Rational>>(
    x: &[F],
    y: &[F],
    h: &ConstThreeForm,
) -> Result<Vec<F>, GcError> {
    let n = h.n;
    check_len(2 * n, x.len())?;
    check_len(2 * n, y.len())?;
    let mut out = vec![F::zero(); 2 * n];
    for k in 0..n {
        let mut s = F::zero();
        for i in 0..n {
            for j in 0..n {
                let c = h.value(i, j, k);
                if !c.is_zero() {
                    s = s + F::from(c) * x[i].clone() * y[j].clone();
                }
            }
        }
        out[n + k] = s;
    }
    Ok(out)
}

/// Brackets of all basis pairs of `L` stay in `L`.
pub fn is_involutive(l: &IsotropicSubspace, h: &ConstThreeForm) -> Result<bool, GcError> {
    for u in &l.basis {
        for v in &l.basis {
            if !l.contains(&courant_bracket_const(u, v, h)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Restricts linear data to a subspace `W ⊆ V` (columns of `w`):
/// `L_W = {X + ξ|_W : X + ξ ∈ L, X ∈ W}`.
pub fn restrict_to_subspace(j: &GcStructure, w: &Dense<Rational>) -> Result<GcStructure, GcError> {
    let n = j.n();
    check_len(n, w.n_rows())?;
    let k = w.n_cols();
    let l = i_eigenspace(j)?;
    let wc = complexify(w);
    // annihilator rows a with aᵀW = 0
    let ann: Vec<Vec<C>> = kernel_of(&w.transpose()).iter().map(|v| v.to_dense(n).into_iter().map(C::from).collect()).collect();
    // coefficients c with Σ c_j l_j having V-part in W
    let m = l.basis.len();
    let cond = Dense::from_fn(ann.len(), m, |r, c| {
        (0..n).fold(C::zero(), |acc, i| acc + ann[r][i].clone() * l.basis[c][i].clone())
    });
    let coeffs = kernel_basis(&SparseMatrix::from_dense(&cond.to_rows())).basis();
    let mut basis = Vec::new();
    for c in coeffs {
        let c = c.to_dense(m);
        let v: Vec<C> = (0..2 * n).map(|i| (0..m).fold(C::zero(), |acc, j| acc + c[j].clone() * l.basis[j][i].clone())).collect();
        let x = SparseVec::from_dense(&v[..n]);
        let y = crate::linalg::solve(&SparseMatrix::from_dense(&wc.to_rows()), &x)
            .ok_or_else(|| GcError::NotIsotropic("vector part not in W".into()))?
            .to_dense(k);
        let xi: Vec<C> = (0..k).map(|a| (0..n).fold(C::zero(), |acc, i| acc + wc[(i, a)].clone() * v[n + i].clone())).collect();
        let mut u = y;
        u.extend(xi);
        basis.push(u);
    }
    gc_from_isotropic(&IsotropicSubspace::new(k, basis)?)
}

/// Random antisymmetric matrix with small rational entries.
pub fn random_antisymmetric<R: Rng>(rng: &mut R, n: usize) -> Dense<Rational> {
    let mut b = Dense::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = q(rng.gen_range(-5..=5), rng.gen_range(1..=4));
            b[(i, j)] = v.clone();
            b[(j, i)] = -v;
        }
    }
    b
}

/// Random rational matrix with entries `p/q`, `|p| ≤ 5`, `1 ≤ q ≤ 3`.
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Dense<Rational> {
    let mut m = Dense::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = q(rng.gen_range(-5..=5), rng.gen_range(1..=3));
        }
    }
    m
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> Dense<Rational> {
    let m = random_matrix(rng, n, n);
    m.add(&m.transpose())
}

fn random_invertible<R: Rng>(rng: &mut R, n: usize) -> Dense<Rational> {
    loop {
        let m = random_matrix(rng, n, n);
        if m.determinant().map_or(false, |d| !d.is_zero()) {
            return m;
        }
    }
}

/// Orthogonal complex structures on `ℝ⁴`: left multiplication by `i, j, k`
/// on quaternions in the basis `1, i, j, k`.
fn quaternion_structures() -> [Dense<Rational>; 3] {
    let from = |pairs: [(usize, usize, i64); 4]| {
        let mut m = Dense::zeros(4, 4);
        for (r, c, s) in pairs {
            m[(r, c)] = Rational::from(s);
        }
        m
    };
    [
        from([(1, 0, 1), (0, 1, -1), (3, 2, 1), (2, 3, -1)]),
        from([(2, 0, 1), (0, 2, -1), (1, 3, 1), (3, 1, -1)]),
        from([(3, 0, 1), (0, 3, -1), (2, 1, 1), (1, 2, -1)]),
    ]
}

/// A random valid triple on `ℝ²` (`n = 2`) or `ℝ⁴` (`n = 4`): `g = SᵀS`,
/// `I± = S⁻¹ J± S` for orthogonal complex structures `J±`, random `b`.
pub fn random_gk_triple<R: Rng>(rng: &mut R, n: usize) -> GkTriple {
    let s = random_invertible(rng, n);
    let s_inv = s.inverse().expect("invertible");
    let pool: Vec<Dense<Rational>> = if n == 4 {
        let qs = quaternion_structures();
        qs.iter().flat_map(|m| [m.clone(), m.neg()]).collect()
    } else {
        assert_eq!(n, 2, "random triples are generated for n = 2 or 4");
        vec![standard_complex(1), standard_complex(1).neg()]
    };
    let pick = |rng: &mut R| pool[rng.gen_range(0..pool.len())].clone();
    let conj = |m: Dense<Rational>| s_inv.mul(&m).and_then(|x| x.mul(&s)).expect("square");
    let (jp, jm) = (pick(rng), pick(rng));
    GkTriple {
        g: s.transpose().mul(&s).expect("square"),
        i_plus: conj(jp),
        i_minus: conj(jm),
        b: random_antisymmetric(rng, n),
    }
}

/// Matrices on the wire: row-major arrays of `"p/q"` strings.
pub fn matrix_to_json(m: &Dense<Rational>) -> serde_json::Value {
    serde_json::to_value(m.to_rows()).expect("rationals serialize")
}

pub fn matrix_from_json(v: &serde_json::Value) -> Result<Dense<Rational>, String> {
    let rows: Vec<Vec<Rational>> = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
    if rows.is_empty() {
        return Ok(Dense::zeros(0, 0));
    }
    Dense::from_rows(rows).map_err(|e| e.to_string())
}

/// Wire form of point data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonianPointWire {
    #[serde(rename = "J")]
    pub j: Vec<Vec<Rational>>,
    pub directions: Vec<DirectionWire>,
    #[serde(default)]
    pub isotropy: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirectionWire {
    pub dmu: Vec<Rational>,
    #[serde(rename = "xiM")]
    pub xi_m: Vec<Rational>,
    pub alpha: Vec<Rational>,
}

impl HamiltonianPointData {
    pub fn from_wire(w: HamiltonianPointWire) -> Result<Self, GcError> {
        let j = GcStructure::new(Dense::from_rows(w.j)?)?;
        Ok(HamiltonianPointData {
            j,
            dmu: w.directions.iter().map(|d| d.dmu.clone()).collect(),
            xi_m: w.directions.iter().map(|d| d.xi_m.clone()).collect(),
            alpha: w.directions.iter().map(|d| d.alpha.clone()).collect(),
            isotropy: w.isotropy,
        })
    }

    pub fn to_wire(&self) -> HamiltonianPointWire {
        HamiltonianPointWire {
            j: self.j.matrix().to_rows(),
            directions: (0..self.dmu.len())
                .map(|k| DirectionWire { dmu: self.dmu[k].clone(), xi_m: self.xi_m[k].clone(), alpha: self.alpha[k].clone() })
                .collect(),
            isotropy: self.isotropy.clone(),
        }
    }
}

/// Symplectic sample: `J_ω` on `ℝ^{2m}`, `dμ = ω ξ_M`, `α = 0`.
pub fn symplectic_point_data(m: usize, xi_m: Vec<Vec<Rational>>) -> Result<HamiltonianPointData, GcError> {
    let omega = standard_symplectic(m);
    let j = GcStructure::symplectic(&omega)?;
    let dmu = xi_m.iter().map(|x| omega.apply(x)).collect::<Result<Vec<_>, _>>()?;
    let alpha = vec![vec![Rational::zero(); 2 * m]; xi_m.len()];
    Ok(HamiltonianPointData { j, dmu, xi_m, alpha, isotropy: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn pairing_examples() {
        let s = SplitSpace::new(2);
        let u = vec![r(1), r(0), r(1), r(0)];
        let e1 = vec![r(1), r(0), r(0), r(0)];
        assert_eq!(s.pairing(&u, &e1).unwrap(), q(1, 2));
        let e2 = vec![r(0), r(1), r(0), r(0)];
        assert_eq!(s.pairing(&e1, &e2).unwrap(), r(0));
        assert_eq!(s.signature(), (2, 2, 0));
        assert!(matches!(s.pairing(&e1, &[r(1)]), Err(GcError::DimensionMismatch { .. })));
    }

    #[test]
    fn standard_structures() {
        let jw = GcStructure::symplectic(&standard_symplectic(1)).unwrap();
        assert_eq!(jw.matrix().to_rows(), vec![vec![r(0), r(0), r(0), r(1)], vec![r(0), r(0), r(-1), r(0)], vec![r(0), r(1), r(0), r(0)], vec![r(-1), r(0), r(0), r(0)]]);
        assert!(GcStructure::complex(&standard_complex(1)).is_ok());
        let id = is_gc(&Dense::identity(4));
        assert!(!id.ok);
        assert!(id.failed.iter().any(|f| f == "J² ≠ −1"));
    }

    #[test]
    fn eigenspace_of_symplectic() {
        let jw = GcStructure::symplectic(&standard_symplectic(1)).unwrap();
        let l = i_eigenspace(&jw).unwrap();
        assert_eq!(l.dim(), 2);
        let v = vec![C::from(r(1)), C::zero(), C::zero(), C::i()];
        assert!(l.contains(&v));
        assert_eq!(gc_from_isotropic(&l).unwrap(), jw);
    }

    #[test]
    fn tangent_space_is_rejected() {
        let basis = vec![vec![C::from(r(1)), C::zero(), C::zero(), C::zero()], vec![C::zero(), C::from(r(1)), C::zero(), C::zero()]];
        let l = IsotropicSubspace::new(2, basis).unwrap();
        assert_eq!(gc_from_isotropic(&l), Err(GcError::NotTransverse));
    }

    #[test]
    fn b_transform_group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let j = GcStructure::symplectic(&standard_symplectic(1)).unwrap();
        let b1 = random_antisymmetric(&mut rng, 2);
        let b2 = random_antisymmetric(&mut rng, 2);
        let two_steps = b_transform(&b_transform(&j, &b1).unwrap(), &b2).unwrap();
        assert_eq!(two_steps, b_transform(&j, &b1.add(&b2)).unwrap());
        assert_eq!(b_transform(&b_transform(&j, &b1).unwrap(), &b1.neg()).unwrap(), j);
        assert_eq!(b_transform(&j, &Dense::identity(2)), Err(GcError::NotAntisymmetric));
    }

    #[test]
    fn euclidean_pair() {
        let i = standard_complex(1);
        let t = GkTriple::new(Dense::identity(2), i.clone(), i.clone());
        let (j1, j2) = gk_from_triple(&t).unwrap();
        assert_eq!(j1, GcStructure::complex(&i).unwrap());
        assert_eq!(j2, GcStructure::symplectic(&i).unwrap());
        assert!(gk_check(&j1, &j2).unwrap().ok());
        assert_eq!(extract_bihermitian(&j1, &j2).unwrap(), t);
    }

    #[test]
    fn random_triples_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 4] {
            for _ in 0..4 {
                let t = random_gk_triple(&mut rng, n);
                t.validate().unwrap();
                let (j1, j2) = gk_from_triple(&t).unwrap();
                assert!(gk_check(&j1, &j2).unwrap().ok());
                assert_eq!(extract_bihermitian(&j1, &j2).unwrap(), t);
                let zero_b = t.clone().with_b(Dense::zeros(n, n));
                let (k1, k2) = gk_from_triple(&zero_b).unwrap();
                assert_eq!(b_transform(&k1, &t.b).unwrap(), j1);
                assert_eq!(b_transform(&k2, &t.b).unwrap(), j2);
            }
        }
    }

    #[test]
    fn invalid_triple_names_condition() {
        let t = GkTriple::new(Dense::identity(2), Dense::identity(2), standard_complex(1));
        assert_eq!(t.validate(), Err(GcError::InvalidTriple("I₊² ≠ −1".into())));
    }

    #[test]
    fn poisson_blocks() {
        let w = standard_symplectic(1);
        let jw = GcStructure::symplectic(&w).unwrap();
        assert_eq!(poisson_bivector(&jw), w.inverse().unwrap().neg());
        let ji = GcStructure::complex(&standard_complex(1)).unwrap();
        assert!(poisson_bivector(&ji).is_zero());
    }

    #[test]
    fn symplectic_moment() {
        let h = symplectic_point_data(1, vec![vec![r(1), r(2)]]).unwrap();
        let res = moment_residual(&h).unwrap();
        assert!(res[0].condition_holds() && res[0].poisson_holds());
        let mut bad = h.clone();
        bad.dmu[0][0] = bad.dmu[0][0].clone() + r(1);
        let res = moment_residual(&bad).unwrap();
        let image = h.j.apply(&[r(0), r(0), r(1), r(0)]).unwrap();
        assert_eq!(res[0].condition, image);
    }

    #[test]
    fn ham_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random_gk_triple(&mut rng, 4);
        let dmu = vec![r(1), r(-2), q(1, 3), r(0)];
        let alpha = t.i_plus.transpose().add(&t.i_minus.transpose()).scale(&q(1, 2)).apply(&dmu).unwrap();
        let (_, second) = ham_eq_relations(&t, &dmu, &alpha).unwrap();
        assert!(second.iter().all(Zero::is_zero));
        let same = GkTriple::new(t.g.clone(), t.i_plus.clone(), t.i_plus.clone());
        let (first, _) = ham_eq_relations(&same, &dmu, &alpha).unwrap();
        assert!(first.iter().all(Zero::is_zero));
    }

    #[test]
    fn hessian_and_morse_bott() {
        let beta = standard_symplectic(1);
        let hess = Dense::from_rows(vec![vec![r(1), r(0)], vec![r(0), r(0)]]).unwrap();
        let (a, ok) = hessian_identity(&beta, &hess).unwrap();
        assert!(ok);
        assert!(morse_bott_at_fixed_point(&hess, &a));
        let (z, ok) = hessian_identity(&beta, &Dense::zeros(2, 2)).unwrap();
        assert!(ok && z.is_zero());
    }

    #[test]
    fn compatibility() {
        let alpha = Dense::from_rows(vec![vec![r(1), r(0)], vec![r(0), r(0)]]).unwrap();
        assert!(compatibility_check(&alpha, &[]));
        assert!(compatibility_check(&alpha, &[vec![r(0), r(1)]]));
        assert!(!compatibility_check(&alpha, &[vec![r(1), r(0)]]));
        assert!(compatibility_check(&Dense::zeros(2, 2), &[vec![r(1), r(1)]]));
    }

    #[test]
    fn volume_bracket() {
        let h = ConstThreeForm::new(3).term([0, 1, 2], r(1)).unwrap();
        let x = vec![r(1), r(0), r(0), r(0), r(0), r(0)];
        let y = vec![r(0), r(1), r(0), r(0), r(0), r(0)];
        assert_eq!(courant_bracket_const(&x, &y, &h).unwrap(), vec![r(0), r(0), r(0), r(0), r(0), r(1)]);
        assert_eq!(courant_bracket_const(&y, &x, &h).unwrap()[5], r(-1));
        let zero = ConstThreeForm::new(3);
        assert!(courant_bracket_const(&x, &y, &zero).unwrap().iter().all(Zero::is_zero));
        assert_eq!(h.value(2, 0, 1), r(1));
        assert_eq!(h.value(1, 0, 2), r(-1));
    }

    #[test]
    fn symplectic_eigenspace_is_involutive() {
        let j = GcStructure::symplectic(&standard_symplectic(1)).unwrap();
        let l = i_eigenspace(&j).unwrap();
        assert!(is_involutive(&l, &ConstThreeForm::new(2)).unwrap());
    }

    #[test]
    fn restriction_to_symplectic_plane() {
        let j = GcStructure::symplectic(&standard_symplectic(2)).unwrap();
        // W = span(e1, e3) is a symplectic plane for the standard form
        let w = Dense::from_rows(vec![vec![r(1), r(0)], vec![r(0), r(0)], vec![r(0), r(1)], vec![r(0), r(0)]]).unwrap();
        let jw = restrict_to_subspace(&j, &w).unwrap();
        assert_eq!(jw, GcStructure::symplectic(&standard_symplectic(1)).unwrap());
    }

    #[test]
    fn signature_of_indefinite() {
        let m = Dense::from_rows(vec![vec![r(0), r(1)], vec![r(1), r(0)]]).unwrap();
        assert_eq!(signature(&m), (1, 1, 0));
        let d = Dense::from_rows(vec![vec![r(2), r(0)], vec![r(0), r(0)]]).unwrap();
        assert_eq!(signature(&d), (1, 0, 1));
    }
}
