//! Shipped models and sample data.
//!
//! Every file under `corpus/v1` is produced by a builder in this module;
//! loading revalidates each entry with its module's checks.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::cartan::{
    euler_mult_injectivity, f_window, CartanComplex, CartanError, CartanPair, CdgaModel, EquivariantForm, EulerReport,
    ModelError, ModelMap, ModelSpec, Term, Twisting,
};
use crate::gc::{
    standard_complex, standard_symplectic, symplectic_point_data, b_transform, gk_from_triple, ConstThreeForm,
    GcError, GcStructure, GkTriple, HamiltonianPointData, HamiltonianPointWire,
};
use crate::linalg::{q, Dense, Rational, SparseVec};

pub const CORPUS_ENV: &str = "TWISTCART_CORPUS";
pub const CORPUS_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid contraction: {0}")]
    InvalidContraction(String),
    #[error("weight must be nonzero")]
    ZeroWeight,
    #[error("unknown corpus entry `{0}`")]
    UnknownEntry(String),
    #[error("{file}: {message}")]
    Invalid { file: String, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    Gc(#[from] GcError),
}

fn invalid(file: &str, message: impl ToString) -> CorpusError {
    CorpusError::Invalid { file: file.into(), message: message.to_string() }
}

fn one() -> Rational {
    Rational::from(1)
}

/// Exterior algebra on `t1..tn` with `ι_i t_g = value` for each `(i, g, value)`.
pub fn torus_model(name: &str, n: usize, rank: usize, contractions: &[(usize, usize, i64)]) -> Result<CdgaModel, CorpusError> {
    torus_spec(name, n, rank, contractions).build().map_err(|e| match e {
        ModelError::InvalidModel { axiom, detail } => CorpusError::InvalidContraction(format!("{axiom}: {detail}")),
        other => other.into(),
    })
}

fn torus_spec(name: &str, n: usize, rank: usize, contractions: &[(usize, usize, i64)]) -> ModelSpec {
    let mut spec = (1..=n).fold(ModelSpec::new(name), |s, i| s.generator(&format!("t{i}"), 1));
    for (i, g, v) in contractions {
        spec = spec.contraction(*i, &format!("t{}", g + 1), &[(Rational::from(*v), &[])]);
    }
    spec.rank(rank)
}

/// The model of a point with `r` (zero) contractions.
pub fn point_model(rank: usize) -> CdgaModel {
    ModelSpec::new("point").rank(rank).build().expect("the point model is valid")
}

fn circle_spec(name: &str, weight: i64) -> ModelSpec {
    ModelSpec::new(name).generator("t", 1).contraction(0, "t", &[(Rational::from(weight), &[])])
}

/// Heisenberg nilmanifold `dt3 = t1 t2` with the central circle acting, `ι t3 = 1`.
pub fn nil3() -> CdgaModel {
    nil3_spec().build().expect("the nilmanifold model is valid")
}

fn nil3_spec() -> ModelSpec {
    torus_spec("nil3", 3, 1, &[(0, 2, 1)]).d("t3", &[(one(), &["t1", "t2"])])
}

/// Trivial U(1) on S¹ with `η = θ⊗x` at polynomial cap `poly_cap`.
pub fn counterexample(poly_cap: u32) -> Result<(CartanComplex, Twisting), CorpusError> {
    let m = torus_model("s1_trivial", 1, 1, &[])?;
    let c = CartanComplex::build(&m, 1, poly_cap)?;
    let eta = Twisting::from_form(&m, &EquivariantForm::term(1, vec![1], one()))?;
    Ok((c, eta))
}

/// The equivariant Euler class `k·x` of the weight-`k` line, a form on the point.
pub fn euler_class(k: i64) -> EquivariantForm {
    EquivariantForm::term(0, vec![1], Rational::from(k))
}

/// `Ω(pt) → Ω(S¹)` for the circle of a weight-`k` line: the unit sphere bundle
/// of the line over a point, with `ιθ = k`.
pub fn weight_rep_map(k: i64) -> Result<ModelMap, CorpusError> {
    if k == 0 {
        return Err(CorpusError::ZeroWeight);
    }
    let target = circle_spec(&format!("circle_weight_{k}"), k).build()?;
    Ok(ModelMap::new(&point_model(1), &target, &BTreeMap::new())?)
}

pub fn weight_rep_pair(k: i64, poly_cap: u32) -> Result<CartanPair, CorpusError> {
    Ok(CartanPair::build(&weight_rep_map(k)?, 1, poly_cap)?)
}

/// The Thom cocycle `τ·x^q = (k x^{q+1}, θ⊗x^q)` in the mapping cone of a
/// weight pair, as a cone vector (point cells first).
pub fn thom_cocycle(p: &CartanPair, k: i64, q_pow: u32) -> SparseVec<Rational> {
    let big = p.big();
    let small = p.small();
    let n_part = big.to_vec(&EquivariantForm::term(0, vec![q_pow + 1], Rational::from(k)));
    let theta = small.model().index_of(&[1]).expect("θ is a basis element");
    let a_part = small.to_vec(&EquivariantForm::term(theta, vec![q_pow], one()));
    n_part.add(&a_part.shift(big.len()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EulerDiagramRow {
    pub q: u32,
    /// `τ x^q` is a cone cocycle.
    pub thom_closed: bool,
    /// The point part of `τ x^q` equals `e ∪ x^q`.
    pub commutes: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EulerDiagramReport {
    pub k: i64,
    pub rows: Vec<EulerDiagramRow>,
    pub commutes: bool,
}

/// `x^q ↦ τ x^q ↦ (forget the sphere part) ↦ restrict to the zero section`
/// against `x^q ↦ e ∪ x^q` for all `q` with `x^{q+1}` in range.
pub fn euler_diagram(k: i64, poly_cap: u32) -> Result<EulerDiagramReport, CorpusError> {
    let p = weight_rep_pair(k, poly_cap)?;
    let cone = p.cone_pair(&Twisting::zero())?.mapping_cone();
    let big = p.big();
    let e = euler_class(k);
    let mut rows = Vec::new();
    for q_pow in 0..poly_cap {
        let tau = thom_cocycle(&p, k, q_pow);
        let thom_closed = cone.differential().apply(&tau).is_zero();
        let forgotten = tau.filter_map_index(|i| (i < big.len()).then_some(i));
        let cup = big.to_vec(&e.mul(big.model(), &EquivariantForm::term(0, vec![q_pow], one())));
        rows.push(EulerDiagramRow { q: q_pow, thom_closed, commutes: forgotten == cup });
    }
    let commutes = rows.iter().all(|r| r.thom_closed && r.commutes);
    Ok(EulerDiagramReport { k, rows, commutes })
}

/// Euler multiplication on `H_G(pt)` up to the F-window.
pub fn euler_injectivity(k: i64, poly_cap: u32) -> Result<EulerReport, CorpusError> {
    let p = weight_rep_pair(k, poly_cap)?;
    let c = p.big();
    Ok(euler_mult_injectivity(c, &Twisting::zero(), &euler_class(k), f_window(c))?)
}

/// Named pointwise generalized complex data.
#[derive(Clone, Debug)]
pub struct GcExamples {
    pub structures: Vec<(String, GcStructure)>,
    pub triples: Vec<(String, GkTriple)>,
    pub hamiltonian: Vec<(String, HamiltonianPointData)>,
}

fn quaternion_triple() -> GkTriple {
    let entry = |pairs: &[(usize, usize, i64)]| {
        let mut m = Dense::zeros(4, 4);
        for (r, c, s) in pairs {
            m[(*r, *c)] = Rational::from(*s);
        }
        m
    };
    let li = entry(&[(1, 0, 1), (0, 1, -1), (3, 2, 1), (2, 3, -1)]);
    let lj = entry(&[(2, 0, 1), (0, 2, -1), (1, 3, 1), (3, 1, -1)]);
    let b = entry(&[(0, 1, 1), (1, 0, -1), (2, 3, 2), (3, 2, -2)]);
    GkTriple::new(Dense::identity(4), li, lj).with_b(b)
}

pub fn gc_point_examples() -> Result<GcExamples, CorpusError> {
    let mut structures = Vec::new();
    for m in [1, 2] {
        structures.push((format!("j_symplectic_{}", 2 * m), GcStructure::symplectic(&standard_symplectic(m))?));
        structures.push((format!("j_complex_{}", 2 * m), GcStructure::complex(&standard_complex(m))?));
    }
    let b = Dense::from_rows(vec![vec![Rational::from(0), q(1, 2)], vec![q(-1, 2), Rational::from(0)]])
        .expect("square");
    structures.push(("j_symplectic_2_b".into(), b_transform(&structures[0].1, &b)?));
    let euclid = GkTriple::new(Dense::identity(2), standard_complex(1), standard_complex(1));
    let quat = quaternion_triple();
    for t in [&euclid, &quat] {
        gk_from_triple(t)?;
    }
    let ham = symplectic_point_data(1, vec![vec![Rational::from(1), Rational::from(2)], vec![q(-1, 3), Rational::from(0)]])?;
    Ok(GcExamples {
        structures,
        triples: vec![("euclidean_triple".into(), euclid), ("quaternion_triple".into(), quat)],
        hamiltonian: vec![("symplectic_point".into(), ham)],
    })
}

/// `H = θ1θ2θ3` on T³ with `X = ∂1`, `Y = ∂2`.
pub fn bracket_example() -> (ConstThreeForm, Vec<Rational>, Vec<Rational>) {
    let h = ConstThreeForm::new(3).term([0, 1, 2], one()).expect("indices in range");
    let unit = |i: usize| (0..6).map(|j| Rational::from(i64::from(i == j))).collect();
    (h, unit(0), unit(1))
}

/// A (model, twisting) combination exercised by the spectral and window checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEntry {
    pub model: String,
    pub eta: String,
    pub rank: usize,
    #[serde(rename = "polyCap")]
    pub poly_cap: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub kind: String,
    pub file: String,
    /// The construction the entry instantiates.
    pub anchor: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub entries: Vec<ManifestEntry>,
    pub pairs: Vec<PairEntry>,
}

fn model_specs() -> Vec<(ModelSpec, &'static str)> {
    let mut s1_free = circle_spec("s1_free", 1);
    s1_free.poly_cap = Some(4);
    vec![
        (ModelSpec::new("point").rank(1), "equivariant cohomology of a point"),
        (s1_free, "free circle action"),
        (torus_spec("s1_trivial", 1, 1, &[]), "trivial circle action on the circle"),
        (torus_spec("t2_trivial", 2, 1, &[]), "trivial action on a 2-torus"),
        (torus_spec("t2_rotation", 2, 1, &[(0, 0, 1)]), "rotation of the first circle factor of a 2-torus"),
        (torus_spec("t3_trivial", 3, 0, &[]), "3-torus without action"),
        (torus_spec("t3_rotation", 3, 1, &[(0, 0, 1)]), "rotation of the first circle factor of a 3-torus"),
        (nil3_spec(), "Heisenberg nilmanifold with central circle action"),
        (circle_spec("circle_weight_1", 1), "unit circle of the weight-1 line"),
        (circle_spec("circle_weight_2", 2), "unit circle of the weight-2 line"),
        (circle_spec("circle_weight_3", 3), "unit circle of the weight-3 line"),
    ]
}

type EtaBuilder = (&'static str, &'static str, usize, Vec<Term>, Vec<u32>, &'static str);

/// (name, model, rank, form monomial, poly exponent, anchor); coefficient 1.
fn eta_specs() -> Vec<EtaBuilder> {
    let mono = |gs: &[&str]| -> Vec<Term> { vec![(one(), gs.iter().map(|s| s.to_string()).collect())] };
    vec![
        ("zero_r0", "t3_trivial", 0, vec![], vec![], "zero twisting"),
        ("zero_r1", "point", 1, vec![], vec![1], "zero twisting"),
        ("s1_theta_x", "s1_trivial", 1, mono(&["t1"]), vec![1], "closed twisting θ⊗x with nonzero class"),
        ("t2_theta1_x", "t2_trivial", 1, mono(&["t1"]), vec![1], "closed twisting θ1⊗x on the trivial 2-torus"),
        ("t2_theta2_x", "t2_rotation", 1, mono(&["t2"]), vec![1], "closed twisting θ2⊗x on the rotated 2-torus"),
        ("t3_volume", "t3_trivial", 0, mono(&["t1", "t2", "t3"]), vec![], "volume form twisting"),
        ("t3_theta2_x", "t3_rotation", 1, mono(&["t2"]), vec![1], "closed twisting θ2⊗x on the rotated 3-torus"),
        ("nil3_t1_x", "nil3", 1, mono(&["t1"]), vec![1], "closed twisting t1⊗x on the nilmanifold"),
    ]
}

fn pair_specs() -> Vec<PairEntry> {
    let p = |model: &str, eta: &str, rank: usize, cap: u32| PairEntry { model: model.into(), eta: eta.into(), rank, poly_cap: cap };
    vec![
        p("s1_free", "zero_r1", 1, 4),
        p("s1_trivial", "zero_r1", 1, 4),
        p("s1_trivial", "s1_theta_x", 1, 4),
        p("t2_trivial", "zero_r1", 1, 3),
        p("t2_trivial", "t2_theta1_x", 1, 3),
        p("t2_rotation", "zero_r1", 1, 3),
        p("t2_rotation", "t2_theta2_x", 1, 3),
        p("t3_trivial", "zero_r0", 0, 0),
        p("t3_trivial", "t3_volume", 0, 0),
        p("t3_rotation", "zero_r1", 1, 3),
        p("t3_rotation", "t3_theta2_x", 1, 3),
    ]
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

/// Every shipped file, by relative path, with its contents.
pub fn builtin_files() -> Result<BTreeMap<String, String>, CorpusError> {
    let mut files = BTreeMap::new();
    let mut entries = Vec::new();
    let mut models = BTreeMap::new();
    for (spec, anchor) in model_specs() {
        let built = spec.build()?;
        let file = format!("models/{}.json", spec.name);
        files.insert(file.clone(), pretty(&spec.to_json()));
        entries.push(ManifestEntry { name: spec.name.clone(), kind: "cdga".into(), file, anchor: anchor.into() });
        models.insert(spec.name.clone(), built);
    }
    for (name, model, rank, terms, poly, anchor) in eta_specs() {
        let m = models[model].with_rank(rank)?;
        let mut form = EquivariantForm::zero();
        if !terms.is_empty() {
            let v = m.terms(&terms)?;
            form = EquivariantForm::from_model(&v, poly);
        }
        let file = format!("twistings/{name}.json");
        files.insert(file.clone(), pretty(&json!({"model": model, "rank": rank, "form": form.to_json(&m)})));
        entries.push(ManifestEntry { name: name.into(), kind: "twisting".into(), file, anchor: anchor.into() });
    }
    for k in 1..=3 {
        let name = format!("weight_{k}");
        let file = format!("pairs/{name}.json");
        files.insert(
            file.clone(),
            pretty(&json!({"source": "point", "target": format!("circle_weight_{k}"), "images": {}, "weight": k})),
        );
        entries.push(ManifestEntry {
            name,
            kind: "pair".into(),
            file,
            anchor: format!("weight-{k} line over a point: Thom class and Euler class {k}x"),
        });
    }
    let gc = gc_point_examples()?;
    for (name, j) in &gc.structures {
        let file = format!("gc/{name}.json");
        files.insert(file.clone(), pretty(&json!({"J": j.matrix().to_rows()})));
        entries.push(ManifestEntry { name: name.clone(), kind: "gc-point".into(), file, anchor: "generalized complex structure".into() });
    }
    for (name, t) in &gc.triples {
        let file = format!("gc/{name}.json");
        files.insert(
            file.clone(),
            pretty(&json!({"g": t.g.to_rows(), "Iplus": t.i_plus.to_rows(), "Iminus": t.i_minus.to_rows(), "b": t.b.to_rows()})),
        );
        entries.push(ManifestEntry { name: name.clone(), kind: "gc-point".into(), file, anchor: "bi-Hermitian data of a generalized Kähler pair".into() });
    }
    for (name, h) in &gc.hamiltonian {
        let file = format!("gc/{name}.json");
        files.insert(file.clone(), pretty(&serde_json::to_value(h.to_wire()).expect("serializes")));
        entries.push(ManifestEntry { name: name.clone(), kind: "gc-point".into(), file, anchor: "Hamiltonian point data with zero moment one-form".into() });
    }
    let (h, x, y) = bracket_example();
    let terms: Vec<Value> = h.coeffs.iter().map(|(idx, c)| json!({"coef": c, "indices": idx})).collect();
    files.insert("gc/bracket_t3.json".into(), pretty(&json!({"n": 3, "H": terms, "X": x, "Y": y})));
    entries.push(ManifestEntry {
        name: "bracket_t3".into(),
        kind: "gc-point".into(),
        file: "gc/bracket_t3.json".into(),
        anchor: "twisted Courant bracket of constant sections".into(),
    });
    for s in crate::elliptic::ALL_SAMPLES {
        entries.push(ManifestEntry {
            name: s.name().into(),
            kind: "grid".into(),
            file: format!("gen:{}", s.name()),
            anchor: if s.is_pseudo_holomorphic() { "pseudo-holomorphic sample" } else { "non-example control" }.into(),
        });
    }
    let manifest = Manifest { version: CORPUS_VERSION, entries, pairs: pair_specs() };
    files.insert("manifest.json".into(), pretty(&serde_json::to_value(&manifest).expect("serializes")));
    Ok(files)
}

/// Writes every builtin file under `dir`.
pub fn write_files(dir: &Path) -> Result<(), CorpusError> {
    for (rel, contents) in builtin_files()? {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, contents)?;
    }
    Ok(())
}

/// The shipped corpus directory, or `$TWISTCART_CORPUS` when set.
pub fn default_dir() -> PathBuf {
    std::env::var_os(CORPUS_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join("v1"))
}

/// Maps `corpus:<name>` to the shipped file through the manifest of
/// [`default_dir`]; any other string is taken as a path.
pub fn resolve_path(spec: &str) -> Result<PathBuf, CorpusError> {
    let Some(name) = spec.strip_prefix("corpus:") else {
        return Ok(PathBuf::from(spec));
    };
    let dir = default_dir();
    let manifest: Manifest = serde_json::from_value(read_json(&dir.join("manifest.json"))?)
        .map_err(|e| invalid("manifest.json", e))?;
    let e = manifest.entries.iter().find(|e| e.name == name).ok_or_else(|| CorpusError::UnknownEntry(name.into()))?;
    Ok(dir.join(&e.file))
}

/// A loaded and validated corpus.
#[derive(Clone, Debug)]
pub struct Corpus {
    pub dir: PathBuf,
    pub manifest: Manifest,
    models: BTreeMap<String, ModelSpec>,
    twistings: BTreeMap<String, (String, usize, Value)>,
}

pub fn read_json(path: &Path) -> Result<Value, CorpusError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| invalid(&path.display().to_string(), e))
}

impl Corpus {
    pub fn load_default() -> Result<Self, CorpusError> {
        Corpus::load(&default_dir())
    }

    pub fn load(dir: &Path) -> Result<Self, CorpusError> {
        let manifest: Manifest = serde_json::from_value(read_json(&dir.join("manifest.json"))?)
            .map_err(|e| invalid("manifest.json", e))?;
        let mut corpus = Corpus { dir: dir.to_path_buf(), manifest, models: BTreeMap::new(), twistings: BTreeMap::new() };
        for e in corpus.manifest.entries.clone() {
            corpus.validate_entry(&e)?;
        }
        for p in corpus.manifest.pairs.clone() {
            let (c, eta) = corpus.pair(&p)?;
            if !c.is_closed(&eta.total()) {
                return Err(invalid("manifest.json", format!("twisting {} is not closed on {}", p.eta, p.model)));
            }
        }
        Ok(corpus)
    }

    fn validate_entry(&mut self, e: &ManifestEntry) -> Result<(), CorpusError> {
        if e.kind == "grid" {
            let name = e.file.strip_prefix("gen:").ok_or_else(|| invalid(&e.file, "grid entries are generators"))?;
            crate::elliptic::Sample::from_name(name).map_err(|err| invalid(&e.file, err))?;
            return Ok(());
        }
        let v = read_json(&self.dir.join(&e.file))?;
        match e.kind.as_str() {
            "cdga" => {
                let spec = ModelSpec::from_json(&v)?;
                spec.build()?;
                self.models.insert(e.name.clone(), spec);
            }
            "twisting" => {
                let model = v["model"].as_str().ok_or_else(|| invalid(&e.file, "missing model"))?.to_string();
                let rank = v["rank"].as_u64().ok_or_else(|| invalid(&e.file, "missing rank"))? as usize;
                let m = self.model(&model)?.with_rank(rank)?;
                let form = EquivariantForm::from_json(&m, rank, &v["form"])?;
                Twisting::from_form(&m, &form)?;
                self.twistings.insert(e.name.clone(), (model, rank, v["form"].clone()));
            }
            "pair" => {
                let k = v["weight"].as_i64().ok_or_else(|| invalid(&e.file, "missing weight"))?;
                let source = self.model(v["source"].as_str().unwrap_or_default())?;
                let target = self.model(v["target"].as_str().unwrap_or_default())?;
                ModelMap::new(&source, &target, &BTreeMap::new())?;
                if !euler_diagram(k, 3)?.commutes {
                    return Err(invalid(&e.file, "Euler diagram does not commute"));
                }
            }
            "gc-point" => validate_gc(&e.file, &v)?,
            other => return Err(invalid(&e.file, format!("unknown kind `{other}`"))),
        }
        Ok(())
    }

    pub fn model(&self, name: &str) -> Result<CdgaModel, CorpusError> {
        Ok(self.models.get(name).ok_or_else(|| CorpusError::UnknownEntry(name.into()))?.build()?)
    }

    pub fn model_spec(&self, name: &str) -> Result<&ModelSpec, CorpusError> {
        self.models.get(name).ok_or_else(|| CorpusError::UnknownEntry(name.into()))
    }

    pub fn path(&self, name: &str) -> Result<PathBuf, CorpusError> {
        let e = self.manifest.entries.iter().find(|e| e.name == name).ok_or_else(|| CorpusError::UnknownEntry(name.into()))?;
        Ok(self.dir.join(&e.file))
    }

    /// The Cartan complex and twisting of a manifest pair.
    pub fn pair(&self, p: &PairEntry) -> Result<(CartanComplex, Twisting), CorpusError> {
        let m = self.model(&p.model)?;
        let c = CartanComplex::build(&m, p.rank, p.poly_cap)?;
        let (_, rank, form) = self.twistings.get(&p.eta).ok_or_else(|| CorpusError::UnknownEntry(p.eta.clone()))?;
        let form = EquivariantForm::from_json(c.model(), *rank, form)?;
        let eta = Twisting::from_form(c.model(), &form)?;
        Ok((c, eta))
    }

    pub fn pairs(&self) -> &[PairEntry] {
        &self.manifest.pairs
    }
}

fn validate_gc(file: &str, v: &Value) -> Result<(), CorpusError> {
    let matrix = |key: &str| crate::gc::matrix_from_json(&v[key]).map_err(|e| invalid(file, e));
    if v.get("directions").is_some() {
        let wire: HamiltonianPointWire = serde_json::from_value(v.clone()).map_err(|e| invalid(file, e))?;
        let h = HamiltonianPointData::from_wire(wire)?;
        if !crate::gc::moment_residual(&h)?.iter().all(|r| r.condition_holds()) {
            return Err(invalid(file, "moment condition fails"));
        }
    } else if v.get("Iplus").is_some() {
        let t = GkTriple { g: matrix("g")?, i_plus: matrix("Iplus")?, i_minus: matrix("Iminus")?, b: matrix("b")? };
        gk_from_triple(&t)?;
    } else if v.get("H").is_some() {
        parse_bracket(file, v)?;
    } else {
        GcStructure::new(matrix("J")?)?;
    }
    Ok(())
}

/// `{"n", "H": [{"coef", "indices"}], "X", "Y"}`.
pub fn parse_bracket(file: &str, v: &Value) -> Result<(ConstThreeForm, Vec<Rational>, Vec<Rational>), CorpusError> {
    #[derive(Deserialize)]
    struct TermW {
        coef: Rational,
        indices: [usize; 3],
    }
    #[derive(Deserialize)]
    #[serde(rename_all = "UPPERCASE")]
    struct W {
        #[serde(rename = "n")]
        n: usize,
        h: Vec<TermW>,
        x: Vec<Rational>,
        y: Vec<Rational>,
    }
    let w: W = serde_json::from_value(v.clone()).map_err(|e| invalid(file, e))?;
    let mut h = ConstThreeForm::new(w.n);
    for t in w.h {
        h = h.term(t.indices, t.coef)?;
    }
    Ok((h, w.x, w.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{exactness_solve, formality_test, twisted_cohomology};

    #[test]
    fn torus_examples_validate() {
        assert!(torus_model("t3", 3, 0, &[]).is_ok());
        assert!(torus_model("s1", 1, 1, &[(0, 0, 1)]).is_ok());
        assert!(torus_model("t2", 2, 1, &[(0, 0, 1)]).is_ok());
        assert!(nil3().d().nnz() > 0);
    }

    #[test]
    fn counterexample_is_closed_and_not_exact() {
        let (c, eta) = counterexample(4).unwrap();
        assert!(c.is_closed(&eta.total()));
        assert!(exactness_solve(&c, &eta.total()).unwrap().is_none());
        assert!(!formality_test(&c, &eta).unwrap().formal);
        let t = twisted_cohomology(&c, &eta).unwrap();
        assert_eq!((t.even, t.odd), (0, 1));
    }

    #[test]
    fn weight_pairs() {
        assert!(matches!(weight_rep_map(0), Err(CorpusError::ZeroWeight)));
        for k in 1..=3 {
            assert!(euler_diagram(k, 4).unwrap().commutes);
            let rep = euler_injectivity(k, 4).unwrap();
            assert!(rep.injective, "{rep:?}");
        }
    }

    #[test]
    fn gc_examples_validate() {
        let ex = gc_point_examples().unwrap();
        assert_eq!(ex.structures.len(), 5);
        let res = crate::gc::moment_residual(&ex.hamiltonian[0].1).unwrap();
        assert!(res.iter().all(|r| r.condition_holds() && r.poisson_holds()));
    }

    #[test]
    fn shipped_files_match_builders() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join("v1");
        if std::env::var_os("TWISTCART_REGEN").is_some() {
            write_files(&dir).unwrap();
        }
        for (rel, contents) in builtin_files().unwrap() {
            let shipped = std::fs::read_to_string(dir.join(&rel)).unwrap_or_default();
            assert_eq!(shipped, contents, "{rel} is stale; rerun with TWISTCART_REGEN=1");
        }
    }

    #[test]
    fn shipped_corpus_loads() {
        let c = Corpus::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join("v1")).unwrap();
        assert_eq!(c.pairs().len(), 11);
        for p in c.pairs() {
            c.pair(p).unwrap();
        }
    }
}
