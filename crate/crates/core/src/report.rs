//! Schema-versioned reports for the command-line front end.
//!
//! Each command reads its inputs, runs one library operation and returns a
//! [`Report`]. Objects serialize with sorted keys so output is byte-stable.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cartan::{
    equivariant_cohomology, twisted_cohomology, CartanComplex, CartanError, CdgaModel, EquivariantForm, ModelSpec,
    Twisting,
};
use crate::corpus::{parse_bracket, CorpusError};
use crate::elliptic::{
    elliptic_coefficients, is_positive_definite, max_principle_check, positive_definite_region, rc_residual, ChartGrid,
    EllipticError, FirstOrder, GridData, Sample,
};
use crate::gc::{
    courant_bracket_const, extract_bihermitian, gc_from_isotropic, gk_check, gk_from_triple, i_eigenspace, is_gc,
    matrix_from_json, matrix_to_json, moment_residual, GcError, GcStructure, GkTriple, HamiltonianPointData,
    HamiltonianPointWire,
};
use crate::linalg::{Dense, Rational};
use crate::spectral::{cofinality, convergence_check, make_filtration, pages, FiltrationKind};

pub const SCHEMA_VERSION: u32 = 1;

/// Default polynomial cap when neither the flag nor the model sets one.
pub const DEFAULT_POLY_CAP: u32 = 4;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Unstable(String),
}

impl ReportError {
    /// 2 for bad input, 3 for an unstable window.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Input(_) => 2,
            ReportError::Unstable(_) => 3,
        }
    }
}

impl From<CartanError> for ReportError {
    fn from(e: CartanError) -> Self {
        match e {
            CartanError::UnstableWindow { .. } => ReportError::Unstable(e.to_string()),
            other => ReportError::Input(other.to_string()),
        }
    }
}

macro_rules! input_error {
    ($($t:ty),*) => {$(
        impl From<$t> for ReportError {
            fn from(e: $t) -> Self {
                ReportError::Input(e.to_string())
            }
        }
    )*};
}
input_error!(crate::cartan::ModelError, GcError, EllipticError, CorpusError, std::io::Error, serde_json::Error);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InputRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub inputs: Vec<InputRef>,
    pub results: Value,
    /// Degree window and caps the results are trusted on.
    pub window: Value,
    pub stable: Option<bool>,
    pub anchors: Vec<String>,
    pub pass: bool,
    /// Rows for `--table`.
    #[serde(skip)]
    pub table: Vec<(String, String)>,
}

impl Report {
    fn new(command: &str, inputs: Vec<InputRef>, anchor: &str) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            command: command.into(),
            inputs,
            results: Value::Null,
            window: Value::Null,
            stable: None,
            anchors: vec![anchor.into()],
            pass: true,
            table: Vec::new(),
        }
    }

    fn row(&mut self, key: &str, value: impl ToString) {
        self.table.push((key.into(), value.to_string()));
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let width = self.table.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0).max(6);
        let mut out = format!("{:width$}  {}\n", "command", self.command);
        for (k, v) in &self.table {
            out.push_str(&format!("{k:width$}  {v}\n"));
        }
        out.push_str(&format!("{:width$}  {}\n", "result", if self.pass { "pass" } else { "FAIL" }));
        out
    }

    /// 0 on pass, 1 on a failed property.
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read_input(path: &Path) -> Result<(Value, InputRef), ReportError> {
    let bytes = std::fs::read(path).map_err(|e| ReportError::Input(format!("{}: {e}", path.display())))?;
    let value = serde_json::from_slice(&bytes).map_err(|e| ReportError::Input(format!("{}: {e}", path.display())))?;
    Ok((value, InputRef { path: path.display().to_string(), sha256: sha256_hex(&bytes) }))
}

fn load_model(path: &Path) -> Result<(ModelSpec, CdgaModel, InputRef), ReportError> {
    let (v, input) = read_input(path)?;
    let spec = ModelSpec::from_json(&v)?;
    let model = spec.build()?;
    Ok((spec, model, input))
}

/// A twisting file is `{"form": {...}}` (optionally with model and rank) or a bare form.
fn load_eta(path: &Path, c: &CartanComplex) -> Result<(Twisting, InputRef), ReportError> {
    let (v, input) = read_input(path)?;
    let form = v.get("form").unwrap_or(&v);
    let form = EquivariantForm::from_json(c.model(), c.rank(), form)?;
    Ok((Twisting::from_form(c.model(), &form)?, input))
}

/// Options shared by the Cartan-model commands.
#[derive(Clone, Debug, Default)]
pub struct ModelOptions {
    pub rank: Option<usize>,
    pub poly_cap: Option<u32>,
}

fn build_complex(spec: &ModelSpec, model: &CdgaModel, opts: &ModelOptions) -> Result<CartanComplex, ReportError> {
    let rank = opts.rank.or(spec.rank).unwrap_or(model.rank());
    let cap = opts.poly_cap.or(spec.poly_cap).unwrap_or(DEFAULT_POLY_CAP);
    Ok(CartanComplex::build(model, rank, cap)?)
}

fn window_json(c: &CartanComplex) -> Value {
    json!({"rank": c.rank(), "polyCap": c.poly_cap(), "window": c.window(), "trustedPoly": c.trusted_poly()})
}

fn dims_json(d: &std::collections::BTreeMap<i32, usize>) -> Value {
    Value::Object(d.iter().map(|(k, v)| (k.to_string(), json!(v))).collect())
}

/// Graded equivariant cohomology and, with a twisting, the ℤ₂-graded twisted dims.
pub fn cohomology(model_path: &Path, opts: &ModelOptions, eta_path: Option<&Path>) -> Result<Report, ReportError> {
    let (spec, model, input) = load_model(model_path)?;
    let c = build_complex(&spec, &model, opts)?;
    let mut inputs = vec![input];
    let h = equivariant_cohomology(&c)?;
    let (even, odd) = h.parity_dims();
    let mut r = Report::new("cohomology", vec![], "equivariant cohomology of the Cartan model");
    r.row("graded", h.dims.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(" "));
    let mut results = json!({"graded": dims_json(&h.dims), "even": even, "odd": odd, "total": h.total()});
    let mut stable = h.stable;
    if let Some(p) = eta_path {
        let (eta, input) = load_eta(p, &c)?;
        inputs.push(input);
        let t = twisted_cohomology(&c, &eta)?;
        stable &= t.stable;
        results["twisted"] = json!({"even": t.even, "odd": t.odd, "total": t.total()});
        r.anchors.push("twisted cohomology of d_G + η".into());
        r.row("twisted", format!("even {} odd {}", t.even, t.odd));
    }
    r.inputs = inputs;
    r.row("untwisted", format!("even {even} odd {odd}"));
    r.results = results;
    r.window = window_json(&c);
    r.stable = Some(stable);
    Ok(r)
}

fn load_pair(
    model_path: &Path,
    eta_path: Option<&Path>,
    opts: &ModelOptions,
) -> Result<(CartanComplex, Twisting, Vec<InputRef>), ReportError> {
    let (spec, model, input) = load_model(model_path)?;
    let c = build_complex(&spec, &model, opts)?;
    let mut inputs = vec![input];
    let eta = match eta_path {
        Some(p) => {
            let (eta, input) = load_eta(p, &c)?;
            inputs.push(input);
            eta
        }
        None => Twisting::zero(),
    };
    Ok((c, eta, inputs))
}

/// Pages of the chosen filtration plus the convergence comparison.
pub fn spectral(
    model_path: &Path,
    eta_path: Option<&Path>,
    kind: FiltrationKind,
    max_page: i32,
    opts: &ModelOptions,
) -> Result<Report, ReportError> {
    let (c, eta, inputs) = load_pair(model_path, eta_path, opts)?;
    let f = make_filtration(&c, &eta, kind)?;
    let seq = pages(&f, max_page)?;
    let conv = convergence_check(&c, &eta, &f)?;
    let mut r = Report::new("spectral", inputs, "spectral sequences of the degree and polynomial filtrations");
    let mut results = seq.to_json();
    results["convergence"] = serde_json::to_value(&conv)?;
    results["collapsedAtE1"] = json!(seq.collapse_page <= 1);
    for page in &seq.pages {
        r.row(&format!("E{}", page.r), page.dims().iter().map(|(p, d)| format!("{p}:{d}")).collect::<Vec<_>>().join(" "));
    }
    r.row("E∞ total", format!("{:?}", conv.e_infinity));
    r.row("twisted", format!("{:?}", conv.twisted));
    r.row("collapse page", seq.collapse_page);
    r.pass = seq.consistent && conv.agrees_with_twisted;
    r.results = results;
    r.window = window_json(&c);
    r.stable = Some(true);
    Ok(r)
}

/// Inclusions between the two filtrations, in the stated and reversed directions.
pub fn cofinality_report(model_path: &Path, eta_path: Option<&Path>, opts: &ModelOptions) -> Result<Report, ReportError> {
    let (c, eta, inputs) = load_pair(model_path, eta_path, opts)?;
    let rep = cofinality(&c, &eta)?;
    let mut r = Report::new("cofinality", inputs, "cofinality of the degree and polynomial filtrations");
    r.row("F^{2p-n} ⊆ L^p ⊆ F^{2p+n}", rep.stated_holds);
    r.row("F^{2p+n} ⊆ L^p ⊆ F^{2p-n}", rep.reversed_holds);
    r.pass = rep.stated_holds;
    r.results = serde_json::to_value(&rep)?;
    r.window = window_json(&c);
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GcCommand {
    Check,
    Eigen,
    Gk,
    Moment,
    Bracket,
}

impl std::str::FromStr for GcCommand {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "check" => GcCommand::Check,
            "eigen" => GcCommand::Eigen,
            "gk" => GcCommand::Gk,
            "moment" => GcCommand::Moment,
            "bracket" => GcCommand::Bracket,
            other => return Err(ReportError::Input(format!("unknown gc command `{other}`"))),
        })
    }
}

fn matrix(v: &Value, key: &str) -> Result<Dense<Rational>, ReportError> {
    let m = v.get(key).ok_or_else(|| ReportError::Input(format!("missing `{key}`")))?;
    matrix_from_json(m).map_err(|e| ReportError::Input(format!("`{key}`: {e}")))
}

fn triple_json(t: &GkTriple) -> Value {
    json!({"g": matrix_to_json(&t.g), "Iplus": matrix_to_json(&t.i_plus), "Iminus": matrix_to_json(&t.i_minus), "b": matrix_to_json(&t.b)})
}

/// Pointwise generalized complex checks.
pub fn gc(cmd: GcCommand, data_path: &Path) -> Result<Report, ReportError> {
    let (v, input) = read_input(data_path)?;
    let name = match cmd {
        GcCommand::Check => "gc check",
        GcCommand::Eigen => "gc eigen",
        GcCommand::Gk => "gc gk",
        GcCommand::Moment => "gc moment",
        GcCommand::Bracket => "gc bracket",
    };
    let mut r = Report::new(name, vec![input], "generalized complex linear algebra");
    match cmd {
        GcCommand::Check => {
            let chk = is_gc(&matrix(&v, "J")?);
            r.row("failed", if chk.failed.is_empty() { "none".into() } else { chk.failed.join("; ") });
            r.pass = chk.ok;
            r.results = serde_json::to_value(&chk)?;
        }
        GcCommand::Eigen => {
            let chk = is_gc(&matrix(&v, "J")?);
            if !chk.ok {
                r.pass = false;
                r.row("failed", chk.failed.join("; "));
                r.results = serde_json::to_value(&chk)?;
                return Ok(r);
            }
            let j = GcStructure::new(matrix(&v, "J")?)?;
            let l = i_eigenspace(&j)?;
            let back = gc_from_isotropic(&l)?;
            let round_trip = back == j;
            r.anchors.push("+i eigenspace of J".into());
            r.row("dim L", l.dim());
            r.row("round trip", round_trip);
            r.pass = round_trip && l.is_maximal_isotropic() && l.is_transverse();
            r.results = json!({
                "dim": l.dim(),
                "basis": l.basis,
                "maximalIsotropic": l.is_maximal_isotropic(),
                "transverse": l.is_transverse(),
                "roundTrip": round_trip,
            });
        }
        GcCommand::Gk => {
            let (j1, j2, triple) = if v.get("J1").is_some() {
                (GcStructure::new(matrix(&v, "J1")?)?, GcStructure::new(matrix(&v, "J2")?)?, None)
            } else {
                let mut t = GkTriple::new(matrix(&v, "g")?, matrix(&v, "Iplus")?, matrix(&v, "Iminus")?);
                if v.get("b").is_some() {
                    t = t.with_b(matrix(&v, "b")?);
                }
                let (j1, j2) = gk_from_triple(&t)?;
                (j1, j2, Some(t))
            };
            let chk = gk_check(&j1, &j2)?;
            let mut results = json!({"check": chk, "J1": matrix_to_json(j1.matrix()), "J2": matrix_to_json(j2.matrix())});
            let mut pass = chk.ok();
            if chk.ok() {
                let back = extract_bihermitian(&j1, &j2)?;
                results["extracted"] = triple_json(&back);
                if let Some(t) = &triple {
                    let recovered = back == *t;
                    results["recovered"] = json!(recovered);
                    r.row("recovered", recovered);
                    pass &= recovered;
                }
            }
            r.anchors.push("generalized Kähler pair from bi-Hermitian data".into());
            r.row("commuting", chk.commuting);
            r.row("G² = 1", chk.g_squared_identity);
            r.row("positive definite", chk.positive_definite);
            r.pass = pass;
            r.results = results;
        }
        GcCommand::Moment => {
            let wire: HamiltonianPointWire = serde_json::from_value(v)?;
            let h = HamiltonianPointData::from_wire(wire)?;
            let res = moment_residual(&h)?;
            let cond = res.iter().all(|x| x.condition_holds());
            let poisson = res.iter().all(|x| x.poisson_holds());
            r.anchors.push("moment condition and −β(dμ) = ξ_M".into());
            r.row("moment residual zero", cond);
            r.row("−β(dμ) = ξ_M", poisson);
            r.pass = cond && poisson;
            r.results = json!({"residuals": res, "conditionHolds": cond, "poissonHolds": poisson});
        }
        GcCommand::Bracket => {
            let (h, x, y) = parse_bracket(&data_path.display().to_string(), &v)?;
            let br = courant_bracket_const::<Rational>(&x, &y, &h)?;
            r.anchors.push("H-twisted Courant bracket".into());
            r.row("[X, Y]_H", br.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "));
            r.results = json!({"bracket": br});
        }
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EllipticCommand {
    Rc,
    Coeffs,
    MaxCheck,
}

impl std::str::FromStr for EllipticCommand {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "rc" => EllipticCommand::Rc,
            "coeffs" => EllipticCommand::Coeffs,
            "maxcheck" => EllipticCommand::MaxCheck,
            other => return Err(ReportError::Input(format!("unknown elliptic command `{other}`"))),
        })
    }
}

/// How to obtain grid data: a generator `gen:<sample>` or a grid file.
#[derive(Clone, Debug)]
pub struct GridOptions {
    pub spec: String,
    pub h: f64,
    pub extent: f64,
    pub dim: usize,
    pub tol: Option<f64>,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { spec: "gen:z2".into(), h: 1.0 / 32.0, extent: 1.0, dim: 2, tol: None }
    }
}

fn load_grid(opts: &GridOptions) -> Result<(GridData, Vec<InputRef>), ReportError> {
    if let Some(name) = opts.spec.strip_prefix("gen:") {
        let sample = Sample::from_name(name)?;
        let m = (opts.extent / opts.h).round() as i64;
        if m < 1 || ((m as f64) * opts.h - opts.extent).abs() > 1e-9 * opts.extent.max(1.0) {
            return Err(ReportError::Input(format!("extent {} is not a multiple of h = {}", opts.extent, opts.h)));
        }
        let grid = ChartGrid::cube(opts.dim, opts.extent, m)?;
        Ok((GridData::from_sample(sample, &grid), vec![]))
    } else {
        let path = Path::new(&opts.spec);
        let bytes = std::fs::read(path).map_err(|e| ReportError::Input(format!("{}: {e}", path.display())))?;
        let data = GridData::read(std::io::Cursor::new(&bytes))?;
        Ok((data, vec![InputRef { path: path.display().to_string(), sha256: sha256_hex(&bytes) }]))
    }
}

/// Midpoint multi-index and the largest ball radius that fits.
fn center_and_radius(grid: &ChartGrid) -> (Vec<i64>, f64) {
    let center: Vec<i64> = grid.extents.iter().map(|(lo, hi)| (lo + hi).div_euclid(2)).collect();
    let radius = grid.extents.iter().zip(&center).map(|((lo, hi), c)| (c - lo).min(hi - c)).min().unwrap_or(0);
    (center, radius as f64)
}

/// Finite-difference checks of the Cauchy–Riemann system and the elliptic operator.
pub fn elliptic(cmd: EllipticCommand, opts: &GridOptions) -> Result<Report, ReportError> {
    let (data, inputs) = load_grid(opts)?;
    let grid = data.grid.clone();
    let j = data.j_field()?;
    j.validate(1e-9)?;
    let name = match cmd {
        EllipticCommand::Rc => "elliptic rc",
        EllipticCommand::Coeffs => "elliptic coeffs",
        EllipticCommand::MaxCheck => "elliptic maxcheck",
    };
    let mut r = Report::new(name, inputs, "elliptic operator from the Cauchy–Riemann system");
    r.window = json!({"dim": grid.dim, "h": grid.h, "extents": grid.extents, "grid": opts.spec});
    match cmd {
        EllipticCommand::Rc => {
            let rep = rc_residual(&j, &data.pair()?)?;
            let tol = opts.tol.unwrap_or(10.0 * grid.h * grid.h);
            r.row("max residual", format!("{:e}", rep.max));
            r.row("tolerance", format!("{tol:e}"));
            r.pass = rep.max <= tol;
            r.results = json!({"max": rep.max, "interiorPoints": rep.interior_points, "tol": tol});
        }
        EllipticCommand::Coeffs => {
            let co = elliptic_coefficients(&j)?;
            let d = grid.dim;
            let (center, _) = center_and_radius(&grid);
            let ci = grid.index(&center).expect("center lies on the grid");
            let two_i = |p: usize, q: usize| if p == q { 2.0 } else { 0.0 };
            let dev = co
                .a
                .iter()
                .map(|a| (0..d * d).map(|k| (a[k] - two_i(k / d, k % d)).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            let b_max = co
                .first_order(FirstOrder::Derived)
                .iter()
                .flatten()
                .map(|b| b.iter().map(|x| x.abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            let pd = is_positive_definite(&co.a[ci], d);
            let region = if pd { Some(positive_definite_region(&grid, &co.a, &center)?) } else { None };
            r.row("max |a − 2I|", format!("{dev:e}"));
            r.row("max |b|", format!("{b_max:e}"));
            r.row("a positive definite at center", pd);
            r.pass = pd;
            r.results = json!({
                "aCenter": co.a[ci],
                "maxDeviationFrom2I": dev,
                "aEquals2I": dev <= 1e-12,
                "maxFirstOrder": b_max,
                "firstOrderGap": co.first_order_gap(),
                "positiveDefiniteAtCenter": pd,
                "positiveDefiniteRadius": region,
            });
        }
        EllipticCommand::MaxCheck => {
            let f = data.column("f").ok_or_else(|| ReportError::Input("grid has no `f` column".into()))?;
            let (center, radius) = center_and_radius(&grid);
            let tol = opts.tol.unwrap_or(1e-9);
            let rep = max_principle_check(&grid, &f, &center, radius, tol)?;
            r.row("sup interior / boundary", format!("{} / {}", rep.sup_interior, rep.sup_boundary));
            r.row("inf interior / boundary", format!("{} / {}", rep.inf_interior, rep.inf_boundary));
            r.pass = rep.pass;
            r.results = serde_json::to_value(&rep)?;
            r.results["center"] = json!(center);
            r.results["radius"] = json!(radius);
        }
    }
    Ok(r)
}
