//! Spectral sequences of the total-degree (F) and polynomial-degree (L)
//! filtrations of a twisted Cartan complex.
//!
//! Pages follow the recipe `E_r^p = Z_r^p / (Z_{r−1}^{p+1} + d Z_{r−1}^{p−r+1})`
//! with `Z_r^p = {x ∈ F^p : dx ∈ F^{p+r}}`, so `E_0` is the associated graded
//! and `d_r: E_r^p → E_r^{p+r}`.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::json;

use crate::cartan::{f_window, twisted_cohomology, CartanComplex, CartanError, Twisting};
use crate::dg::{dense_rank, FlatComplex, Grading};
use crate::linalg::{kernel_basis, Dense, Echelon, Rational, SparseMatrix, SparseVec, SubQuotient, Subspace};

pub use crate::cartan::{formality_test, FormalityReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FiltrationKind {
    /// By total degree.
    F,
    /// By polynomial degree.
    L,
}

impl std::str::FromStr for FiltrationKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "F" | "f" => Ok(FiltrationKind::F),
            "L" | "l" => Ok(FiltrationKind::L),
            other => Err(format!("unknown filtration `{other}` (expected F or L)")),
        }
    }
}

/// A decreasing filtration of the twisted complex `Q_D` by cell levels.
#[derive(Clone, Debug)]
pub struct Filtration {
    kind: FiltrationKind,
    complex: FlatComplex,
    levels: Vec<i32>,
    window: i32,
}

pub fn make_filtration(c: &CartanComplex, eta: &Twisting, kind: FiltrationKind) -> Result<Filtration, CartanError> {
    let complex = c.twisted_complex(eta)?;
    let (levels, window) = match kind {
        FiltrationKind::F => (complex.cells().iter().map(|cell| cell.degree).collect(), f_window(c)),
        FiltrationKind::L => (complex.cells().iter().map(|cell| cell.poly as i32).collect(), c.trusted_poly() as i32),
    };
    Ok(Filtration { kind, complex, levels, window })
}

impl Filtration {
    pub fn kind(&self) -> FiltrationKind {
        self.kind
    }

    pub fn complex(&self) -> &FlatComplex {
        &self.complex
    }

    /// Largest filtration index whose entries are reported.
    pub fn window(&self) -> i32 {
        self.window
    }

    pub fn level(&self, cell: usize) -> i32 {
        self.levels[cell]
    }

    pub fn min_level(&self) -> i32 {
        self.levels.iter().copied().min().unwrap_or(0)
    }

    pub fn max_level(&self) -> i32 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    /// Cells spanning the piece of index `p`.
    pub fn piece(&self, p: i32) -> Vec<usize> {
        (0..self.levels.len()).filter(|j| self.levels[*j] >= p).collect()
    }

    pub fn piece_space(&self, p: i32) -> Subspace<Rational> {
        let basis: Vec<SparseVec<Rational>> = self.piece(p).into_iter().map(SparseVec::unit).collect();
        Subspace::spanned_by(self.levels.len(), &basis)
    }

    /// Checks that pieces decrease and that d maps each piece into itself
    /// (into the next piece for F).
    pub fn is_valid(&self) -> bool {
        let jump = if self.kind == FiltrationKind::F { 1 } else { 0 };
        self.complex.differential().triplets().iter().all(|(r, c, _)| self.levels[*r] >= self.levels[*c] + jump)
    }

    /// `{x ∈ F^p : dx ∈ F^{p+r}}`; `r < 0` gives `F^p`.
    fn z(&self, r: i32, p: i32) -> Vec<SparseVec<Rational>> {
        let cols = self.piece(p);
        if r <= 0 {
            return cols.into_iter().map(SparseVec::unit).collect();
        }
        let rows: Vec<usize> = (0..self.levels.len()).filter(|j| self.levels[*j] < p + r).collect();
        let sub = self.complex.differential().select(&rows, &cols);
        kernel_basis(&sub).basis().into_iter().map(|v| v.filter_map_index(|i| Some(cols[i]))).collect()
    }

    fn entry(&self, r: i32, p: i32) -> SubQuotient<Rational> {
        let d = self.complex.differential();
        let mut den = Echelon::new(self.levels.len());
        for v in self.z(r - 1, p + 1) {
            den.insert(&v);
        }
        for v in self.z(r - 1, p - r + 1) {
            den.insert(&d.apply(&v));
        }
        SubQuotient::new(den, &self.z(r, p))
    }

    fn parity(&self, v: &SparseVec<Rational>) -> i32 {
        let (lead, _) = v.leading().expect("nonzero");
        self.complex.cells()[lead].degree.rem_euclid(2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PageEntry {
    pub dim: usize,
    pub even: usize,
    pub odd: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralPage {
    pub r: i32,
    /// Entries with `p` inside the filtration window.
    pub entries: BTreeMap<i32, PageEntry>,
    /// Rank of `d_r: E_r^p → E_r^{p+r}` for every `p`.
    pub differential_ranks: BTreeMap<i32, usize>,
    #[serde(skip)]
    pub differentials: BTreeMap<i32, Dense<Rational>>,
}

impl SpectralPage {
    pub fn dims(&self) -> BTreeMap<i32, usize> {
        self.entries.iter().map(|(p, e)| (*p, e.dim)).collect()
    }

    pub fn total(&self) -> (usize, usize) {
        self.entries.values().fold((0, 0), |(e, o), x| (e + x.even, o + x.odd))
    }

    /// True when some differential on this page is nonzero.
    pub fn has_nonzero_differential(&self) -> bool {
        self.differential_ranks.values().any(|r| *r > 0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralSequence {
    pub kind: FiltrationKind,
    pub window: i32,
    pub pages: Vec<SpectralPage>,
    /// The page from which nothing changes any more (the E_∞ page).
    pub infinity: SpectralPage,
    /// Smallest `r` with `E_r^p = E_∞^p` for every reported `p`.
    pub collapse_page: i32,
    /// The same page under the labelling one lower (used for the F sequence,
    /// where that labelling calls the first page equal to `H_G` page 1).
    pub collapse_page_shifted: i32,
    /// `E_{r+1} = H(E_r, d_r)` dimensionwise and `d_r² = 0` on every page.
    pub consistent: bool,
}

/// Computes `E_0 .. E_{maxPage}` and the limiting page.
pub fn pages(f: &Filtration, max_page: i32) -> Result<SpectralSequence, CartanError> {
    let (lo, hi) = (f.min_level(), f.max_level());
    let stable_r = (hi - lo + 1).max(1);
    let mut computed: Vec<(SpectralPage, BTreeMap<i32, SubQuotient<Rational>>)> = Vec::new();
    let last = max_page.max(stable_r);
    for r in 0..=last {
        computed.push(page(f, r, lo, hi)?);
    }
    let mut consistent = true;
    for r in 0..last as usize {
        let (cur, _) = &computed[r];
        let (_, next_entries) = &computed[r + 1];
        for p in lo..=hi {
            let in_rank = cur.differential_ranks.get(&(p - r as i32)).copied().unwrap_or(0);
            let out_rank = cur.differential_ranks.get(&p).copied().unwrap_or(0);
            let here = dim_at(&computed[r].1, p);
            if dim_at(next_entries, p) + in_rank + out_rank != here {
                consistent = false;
            }
            if let (Some(a), Some(b)) = (cur.differentials.get(&p), cur.differentials.get(&(p + r as i32))) {
                if !b.mul(a).map(|m| m.is_zero()).unwrap_or(false) {
                    consistent = false;
                }
            }
        }
    }
    let infinity = computed[stable_r as usize].0.clone();
    let collapse_page = (0..=stable_r)
        .find(|r| computed[*r as usize].0.entries == infinity.entries)
        .expect("the stable page matches itself");
    let pages = computed.into_iter().take(max_page as usize + 1).map(|(p, _)| p).collect();
    Ok(SpectralSequence {
        kind: f.kind,
        window: f.window,
        pages,
        infinity,
        collapse_page,
        collapse_page_shifted: collapse_page - 1,
        consistent,
    })
}

fn dim_at(entries: &BTreeMap<i32, SubQuotient<Rational>>, p: i32) -> usize {
    entries.get(&p).map_or(0, SubQuotient::dim)
}

fn page(
    f: &Filtration,
    r: i32,
    lo: i32,
    hi: i32,
) -> Result<(SpectralPage, BTreeMap<i32, SubQuotient<Rational>>), CartanError> {
    let d = f.complex.differential();
    let entries: BTreeMap<i32, SubQuotient<Rational>> = (lo..=hi).map(|p| (p, f.entry(r, p))).collect();
    let mut differentials = BTreeMap::new();
    let mut ranks = BTreeMap::new();
    for p in lo..=hi {
        let src = &entries[&p];
        let Some(tgt) = entries.get(&(p + r)) else { continue };
        if src.dim() == 0 || tgt.dim() == 0 {
            ranks.insert(p, 0);
            continue;
        }
        let mut m = Dense::zeros(tgt.dim(), src.dim());
        for (j, z) in src.representatives().iter().enumerate() {
            let coords = tgt.coordinates(&d.apply(z)).ok_or_else(|| {
                CartanError::WindowTooSmall(format!("d_{r} leaves the page at p = {p}"))
            })?;
            for (i, c) in coords.into_iter().enumerate() {
                m[(i, j)] = c;
            }
        }
        ranks.insert(p, dense_rank(&m));
        differentials.insert(p, m);
    }
    let reported = entries
        .iter()
        .filter(|(p, _)| **p <= f.window)
        .map(|(p, sq)| {
            let odd = sq.representatives().iter().filter(|v| f.parity(v) == 1).count();
            (*p, PageEntry { dim: sq.dim(), even: sq.dim() - odd, odd })
        })
        .collect();
    Ok((SpectralPage { r, entries: reported, differential_ranks: ranks, differentials }, entries))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergenceReport {
    pub kind: FiltrationKind,
    pub window: i32,
    /// Σ of windowed `E_∞` entries, split by parity.
    pub e_infinity: (usize, usize),
    /// Image of `H(Q_D)` in the quotient keeping levels ≤ window.
    pub direct: (usize, usize),
    /// Twisted cohomology on the trust window.
    pub twisted: (usize, usize),
    pub agrees_with_direct: bool,
    pub agrees_with_twisted: bool,
}

pub fn convergence_check(c: &CartanComplex, eta: &Twisting, f: &Filtration) -> Result<ConvergenceReport, CartanError> {
    let seq = pages(f, 0)?;
    let e_infinity = seq.infinity.total();
    let levels = f.levels.clone();
    let window = f.window;
    let direct_classes = f.complex.windowed_cohomology(Grading::Parity, |cell| {
        let idx = f.complex.cells().iter().position(|c| std::ptr::eq(c, cell)).expect("cell of this complex");
        levels[idx] <= window
    })?;
    let direct = direct_classes.parity_dims();
    let t = twisted_cohomology(c, eta)?;
    Ok(ConvergenceReport {
        kind: f.kind,
        window,
        e_infinity,
        direct,
        twisted: (t.even, t.odd),
        agrees_with_direct: e_infinity == direct,
        agrees_with_twisted: e_infinity == (t.even, t.odd),
    })
}

/// Dimension of `H(fiber; η(0)) ⊗ S^p` for each reported `p` versus the
/// computed `E_1^p` of the L sequence.
pub fn l_page_one_check(c: &CartanComplex, eta: &Twisting) -> Result<(bool, BTreeMap<i32, (usize, usize)>), CartanError> {
    let f = make_filtration(c, eta, FiltrationKind::L)?;
    let form = formality_test(c, eta)?;
    let fiber = form.fiber.0 + form.fiber.1;
    let r = c.rank() as u64;
    let mut table = BTreeMap::new();
    let mut ok = true;
    let (_, all) = page(&f, 1, f.min_level(), f.max_level())?;
    for (p, sq) in &all {
        let monomials = if r == 0 { u64::from(*p == 0) } else { binomial(*p as u64 + r - 1, r - 1) };
        let expected = fiber * monomials as usize;
        table.insert(*p, (sq.dim(), expected));
        ok &= sq.dim() == expected;
    }
    Ok((ok, table))
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CofinalityRow {
    pub p: i32,
    pub lower: bool,
    pub upper: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CofinalityReport {
    pub n: i32,
    /// `F^{2p−n} ⊆ L^p ⊆ F^{2p+n}`.
    pub stated: Vec<CofinalityRow>,
    pub stated_holds: bool,
    /// `F^{2p+n} ⊆ L^p ⊆ F^{2p−n}`.
    pub reversed: Vec<CofinalityRow>,
    pub reversed_holds: bool,
}

/// Subspace inclusions between the two filtrations of `Q_D`, `n` the top form degree.
pub fn cofinality(c: &CartanComplex, eta: &Twisting) -> Result<CofinalityReport, CartanError> {
    let f = make_filtration(c, eta, FiltrationKind::F)?;
    let l = make_filtration(c, eta, FiltrationKind::L)?;
    let n = c.top_form_degree() as i32;
    let mut stated = Vec::new();
    let mut reversed = Vec::new();
    for p in 0..=c.poly_cap() as i32 {
        let lp = l.piece_space(p);
        stated.push(CofinalityRow {
            p,
            lower: lp.contains_subspace(&f.piece_space(2 * p - n)),
            upper: f.piece_space(2 * p + n).contains_subspace(&lp),
        });
        reversed.push(CofinalityRow {
            p,
            lower: lp.contains_subspace(&f.piece_space(2 * p + n)),
            upper: f.piece_space(2 * p - n).contains_subspace(&lp),
        });
    }
    let holds = |rows: &[CofinalityRow]| rows.iter().all(|r| r.lower && r.upper);
    Ok(CofinalityReport { n, stated_holds: holds(&stated), reversed_holds: holds(&reversed), stated, reversed })
}

impl SpectralSequence {
    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self.kind {
            FiltrationKind::F => "F",
            FiltrationKind::L => "L",
        };
        let page_json = |p: &SpectralPage| {
            json!({
                "r": p.r,
                "dims": p.entries.iter().map(|(k, e)| (k.to_string(), e.dim)).collect::<BTreeMap<_, _>>(),
                "parity": p.entries.iter().map(|(k, e)| (k.to_string(), [e.even, e.odd])).collect::<BTreeMap<_, _>>(),
                "d_ranks": p.differential_ranks.iter().filter(|(_, r)| **r > 0).map(|(k, r)| (k.to_string(), *r)).collect::<BTreeMap<_, _>>(),
            })
        };
        json!({
            "kind": kind,
            "window": self.window,
            "pages": self.pages.iter().map(page_json).collect::<Vec<_>>(),
            "infinity": page_json(&self.infinity),
            "collapse_page": self.collapse_page,
            "collapse_page_shifted": self.collapse_page_shifted,
            "consistent": self.consistent,
        })
    }
}

/// Pieces of a filtration as a sparse 0/1 selection, for inspection.
pub fn piece_matrix(f: &Filtration, p: i32) -> SparseMatrix<Rational> {
    let cells = f.piece(p);
    SparseMatrix::from_triplets(f.levels.len(), cells.len(), cells.iter().enumerate().map(|(k, j)| (*j, k, Rational::from(1))))
}
