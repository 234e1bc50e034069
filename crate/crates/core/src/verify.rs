//! Verification suites and their machine-readable reports.
//!
//! Each [`Check`] produces one or more [`TestReport`] rows plus free-form
//! audit records. A row passes iff its compared error is at most its
//! tolerance; a failing or erroring check never aborts the suite.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::flat::{
    backward_heat_check, flat_unitarity_audit, pistarinv_check, standard_test_set, FlatFunction,
    GaussPoly,
};
use crate::geodesic::{bracket_series, fit_factorial_decay};
use crate::geometry::{
    gamma_density, nu_density, verify_kappa_one_form, zeta, zeta_sq_determinant, FiberPoint,
};
use crate::lie::{AlgebraVector, GroupElement, GroupSpec, C64};
use crate::quadrature::group_rule;
use crate::reduction::{
    measure_limit_check, reduced_transform_check, sample_connections, RegularizedParams, Sampler,
};
use crate::repr::{irrep_matrix, random_function, BandLimitedFunction, IrrepLabel, LabelPart};
use crate::transform::{hl2_norm_sq, inversion_check, unitarity_audit, Measure, UnitarityAudit};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Where a reference value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// A closed form or identity stated for the transform.
    Paper,
    /// Exact by construction (zero, one, a known mass).
    Trivial,
    /// An independent numerical oracle.
    Derived,
}

mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// One report row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test_id: String,
    /// Name of the check that produced the row.
    pub check: String,
    pub inputs: Value,
    pub computed: Value,
    pub reference: Value,
    pub provenance: Provenance,
    #[serde(with = "nonfinite")]
    pub abs_err: f64,
    #[serde(with = "nonfinite")]
    pub rel_err: f64,
    /// The error compared with `tolerance`.
    #[serde(with = "nonfinite")]
    pub err: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub runtime_ms: f64,
}

impl TestReport {
    fn new(
        check: &str,
        test_id: impl Into<String>,
        provenance: Provenance,
        started: Instant,
    ) -> Self {
        Self {
            test_id: test_id.into(),
            check: check.to_string(),
            inputs: Value::Null,
            computed: Value::Null,
            reference: Value::Null,
            provenance,
            abs_err: f64::NAN,
            rel_err: f64::NAN,
            err: f64::NAN,
            tolerance: 0.0,
            pass: false,
            runtime_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }

    fn inputs(mut self, v: Value) -> Self {
        self.inputs = v;
        self
    }

    fn values(mut self, computed: Value, reference: Value) -> Self {
        self.computed = computed;
        self.reference = reference;
        self
    }

    fn errors(mut self, abs: f64, rel: f64) -> Self {
        self.abs_err = abs;
        self.rel_err = rel;
        self
    }

    fn judge(mut self, err: f64, tolerance: f64) -> Self {
        self.err = err;
        self.tolerance = tolerance;
        self.pass = err <= tolerance;
        self
    }

    fn failure(check: &str, e: &Error, started: Instant) -> Self {
        Self::new(
            check,
            format!("{check}.error"),
            Provenance::Trivial,
            started,
        )
        .values(json!({ "error": e.to_string() }), Value::Null)
    }
}

/// Reports and audits from one check.
#[derive(Debug, Clone, Default)]
pub struct CheckOutput {
    pub reports: Vec<TestReport>,
    pub audits: Vec<Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Geometry,
    Transform,
    Geodesic,
    Flat,
    Reduction,
    All,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Geometry,
        Suite::Transform,
        Suite::Geodesic,
        Suite::Flat,
        Suite::Reduction,
        Suite::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Transform => "transform",
            Suite::Geodesic => "geodesic",
            Suite::Flat => "flat",
            Suite::Reduction => "reduction",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

/// A named, independently runnable verification.
#[derive(Clone, Copy)]
pub struct Check {
    pub name: &'static str,
    pub suite: Suite,
    run: fn(&Ctx) -> Result<CheckOutput>,
}

impl Check {
    /// Runs the check with its derived seed. Errors become a failing row.
    pub fn run(&self, cfg: &RunConfig) -> CheckOutput {
        let started = Instant::now();
        let ctx = Ctx {
            cfg,
            name: self.name,
            seed: derive_seed(cfg.seed, self.name),
        };
        match (self.run)(&ctx) {
            Ok(out) => out,
            Err(e) => CheckOutput {
                reports: vec![TestReport::failure(self.name, &e, started)],
                audits: Vec::new(),
            },
        }
    }
}

impl fmt::Debug for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Check({}, {})", self.name, self.suite)
    }
}

/// Every check in execution order.
pub fn checks() -> Vec<Check> {
    use Suite::*;
    let c = |name, suite, run| Check { name, suite, run };
    vec![
        c("zeta_identity", Geometry, zeta_identity),
        c("measure_identity", Geometry, measure_identity),
        c("kappa_one_form", Geometry, kappa_one_form),
        c("oracles", Geometry, oracles),
        c("isometry", Transform, isometry),
        c("pairing_unitarity", Transform, pairing_unitarity),
        c("inversion", Transform, inversion),
        c("geodesic", Geodesic, geodesic),
        c("flat", Flat, flat),
        c("reduction", Reduction, reduction),
        c("measure_limits", Reduction, measure_limits),
    ]
}

pub fn checks_in(suite: Suite) -> Vec<Check> {
    checks()
        .into_iter()
        .filter(|c| suite == Suite::All || c.suite == suite)
        .collect()
}

/// Everything a suite run produces; serialized as the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub schema_version: u32,
    pub suite: Suite,
    pub config: RunConfig,
    pub reports: Vec<TestReport>,
    pub audits: Vec<Value>,
}

impl SuiteOutcome {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TestReport> {
        self.reports.iter().filter(|r| !r.pass)
    }
}

/// Runs the checks of `suite`. With `parallel`, independent checks run
/// concurrently; per-check seeds keep the numbers identical either way.
pub fn run_suite(suite: Suite, cfg: &RunConfig, parallel: bool) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let list = checks_in(suite);
    let outputs = run_checks(&list, cfg, parallel);
    let mut reports = Vec::new();
    let mut audits = Vec::new();
    for o in outputs {
        reports.extend(o.reports);
        audits.extend(o.audits);
    }
    Ok(SuiteOutcome {
        schema_version: SCHEMA_VERSION,
        suite,
        config: cfg.clone(),
        reports,
        audits,
    })
}

pub fn run_checks(list: &[Check], cfg: &RunConfig, parallel: bool) -> Vec<CheckOutput> {
    let task = |r: std::ops::Range<usize>| list[r.start].run(cfg);
    if parallel {
        crate::par::map_chunks(list.len(), 1, task)
    } else {
        crate::par::map_chunks_sequential(list.len(), 1, task)
    }
}

/// FNV-1a of the check name mixed into the base seed.
pub fn derive_seed(base: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    base ^ h
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    name: &'static str,
    seed: u64,
}

impl Ctx<'_> {
    fn tol(&self, key: &str) -> f64 {
        self.cfg.tolerance(key)
    }

    fn row(&self, id: impl fmt::Display, provenance: Provenance, started: Instant) -> TestReport {
        TestReport::new(
            self.name,
            format!("{}.{id}", self.name),
            provenance,
            started,
        )
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

fn spec(s: &str) -> Result<GroupSpec> {
    s.parse()
}

/// `first` followed by the remaining names, without repeats.
fn groups_with(first: &str, rest: &[&str]) -> Vec<String> {
    let mut out = vec![first.to_string()];
    for r in rest {
        if !out.iter().any(|g| g == r) {
            out.push(r.to_string());
        }
    }
    out
}

fn random_ball(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> AlgebraVector {
    let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let r = radius * rng.random::<f64>();
    AlgebraVector(v.iter().map(|x| x * r / norm).collect())
}

fn random_element(g: &GroupSpec, rng: &mut ChaCha8Rng) -> GroupElement {
    let y: Vec<f64> = (0..g.dim()).map(|_| rng.random_range(-PI..PI)).collect();
    g.exp(&AlgebraVector(y))
}

fn cjson(z: C64) -> Value {
    json!([z.re, z.im])
}

fn max(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |a, b| {
        if b.is_nan() || a.is_nan() {
            f64::NAN
        } else {
            a.max(b)
        }
    })
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

// ---------------------------------------------------------------- geometry

fn zeta_identity(ctx: &Ctx) -> Result<CheckOutput> {
    let all = Instant::now();
    let mut rng = ctx.rng();
    let mut out = CheckOutput::default();
    for name in groups_with(&ctx.cfg.group, &["su2", "u1*su2"]) {
        let t = Instant::now();
        let g = spec(&name)?;
        let (mut worst, mut at) = (0.0f64, (0.0, 0.0));
        for _ in 0..100 {
            let y = random_ball(&mut rng, g.dim(), 3.0);
            let z2 = zeta(&g, &y).powi(2);
            let det = zeta_sq_determinant(&g, &y);
            let rel = (z2 - det).abs() / det.abs();
            if rel.is_nan() || rel > worst {
                worst = rel;
                at = (z2, det);
            }
        }
        out.reports.push(
            ctx.row(&name, Provenance::Derived, t)
                .inputs(json!({ "group": name, "points": 100, "max_norm": 3.0 }))
                .values(json!({ "zeta_sq": at.0 }), json!({ "determinant": at.1 }))
                .errors((at.0 - at.1).abs(), worst)
                .judge(worst, ctx.tol("zeta_identity")),
        );
    }
    let ms = elapsed_ms(all);
    out.reports.push(
        ctx.row("runtime_ms", Provenance::Trivial, all)
            .values(json!(ms), Value::Null)
            .errors(ms, f64::NAN)
            .judge(ms, ctx.tol("zeta_identity.runtime_ms")),
    );
    Ok(out)
}

fn measure_identity(ctx: &Ctx) -> Result<CheckOutput> {
    let hbar = ctx.cfg.hbar;
    let mut rng = ctx.rng();
    let mut out = CheckOutput::default();
    for name in groups_with(&ctx.cfg.group, &["su2"]) {
        let t = Instant::now();
        let g = spec(&name)?;
        let n = g.dim() as f64;
        let c = (PI * hbar).powf(-n / 2.0) * (-g.rho_norm_sq() * hbar).exp();
        let mut ratios = Vec::with_capacity(100);
        for _ in 0..100 {
            let p = FiberPoint::new(
                random_element(&g, &mut rng),
                random_ball(&mut rng, g.dim(), 3.0),
            );
            ratios.push(nu_density(&g, &p, hbar) / gamma_density(&g, &p, hbar));
        }
        let worst = ratios
            .iter()
            .copied()
            .max_by(|a, b| (a - c).abs().total_cmp(&(b - c).abs()))
            .unwrap_or(f64::NAN);
        let rel = (worst - c).abs() / c;
        out.reports.push(
            ctx.row(&name, Provenance::Paper, t)
                .inputs(json!({ "group": name, "hbar": hbar, "points": 100, "rho_norm_sq": g.rho_norm_sq() }))
                .values(json!({ "ratio": worst }), json!({ "c_hbar": c }))
                .errors((worst - c).abs(), rel)
                .judge(rel, ctx.tol("measure_identity")),
        );
    }
    Ok(out)
}

fn kappa_one_form(ctx: &Ctx) -> Result<CheckOutput> {
    let mut rng = ctx.rng();
    let mut out = CheckOutput::default();
    let mut cases = vec![("su2".to_string(), "kappa_one_form")];
    for a in groups_with(&ctx.cfg.group, &["u1", "u1*r1"]) {
        let g = spec(&a)?;
        if g.is_abelian() {
            cases.push((a, "kappa_one_form.abelian"));
        } else if a != "su2" {
            cases.push((a, "kappa_one_form"));
        }
    }
    for (name, tol_key) in cases {
        let t = Instant::now();
        let g = spec(&name)?;
        let res = max((0..50).map(|_| {
            let p = FiberPoint::new(
                random_element(&g, &mut rng),
                random_ball(&mut rng, g.dim(), 3.0),
            );
            verify_kappa_one_form(&g, &p)
        }));
        out.reports.push(
            ctx.row(&name, Provenance::Paper, t)
                .inputs(json!({ "group": name, "points": 50 }))
                .values(json!({ "max_residual": res }), json!(0.0))
                .errors(res, f64::NAN)
                .judge(res, ctx.tol(tol_key)),
        );
    }
    Ok(out)
}

/// `Σ_k d²/dt² f(x e^{t e_k})` by central differences.
fn fd_laplacian(g: &GroupSpec, f: &BandLimitedFunction, x: &GroupElement, h: f64) -> C64 {
    let n = g.dim();
    let f0 = f.eval(x);
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = h;
        let plus = f.eval(&x.mul(&g.exp(&AlgebraVector(e.clone()))));
        e[k] = -h;
        let minus = f.eval(&x.mul(&g.exp(&AlgebraVector(e))));
        sum += (plus - f0 * 2.0 + minus) / (h * h);
    }
    sum
}

fn oracles(ctx: &Ctx) -> Result<CheckOutput> {
    let mut rng = ctx.rng();
    let mut out = CheckOutput::default();

    let t = Instant::now();
    let labels = [
        ("u1", IrrepLabel::circle(3)),
        ("su2", IrrepLabel::su2(1)),
        ("su2", IrrepLabel::su2(2)),
        ("su2", IrrepLabel::su2(4)),
        (
            "u1*su2",
            IrrepLabel(vec![LabelPart::Circle(1), LabelPart::Su2(1)]),
        ),
    ];
    let mut worst = 0.0f64;
    for (s, label) in &labels {
        let g = spec(s)?;
        let d = label.dim();
        let f = BandLimitedFunction::entry(&g, label.clone(), 0, d - 1)?;
        for _ in 0..4 {
            let x = random_element(&g, &mut rng);
            let expected = -f.eval(&x) * label.casimir();
            if expected.norm() < 1e-3 {
                continue;
            }
            let lap = fd_laplacian(&g, &f, &x, 1e-4);
            worst = worst.max((lap - expected).norm() / expected.norm());
        }
    }
    out.reports.push(
        ctx.row("casimir", Provenance::Derived, t)
            .inputs(json!({ "labels": labels.iter().map(|(s, l)| format!("{s}:{:?}", l.numbers())).collect::<Vec<_>>(), "step": 1e-4 }))
            .values(json!({ "max_rel_err": worst }), json!("finite-difference Laplacian"))
            .errors(f64::NAN, worst)
            .judge(worst, ctx.tol("oracle.casimir")),
    );

    let t = Instant::now();
    let mut worst = 0.0f64;
    for s in ["su2", "u1*su2"] {
        let g = spec(s)?;
        let n = g.dim();
        for _ in 0..10 {
            let x = random_element(&g, &mut rng);
            let y = random_ball(&mut rng, n, 2.0);
            let p = g.phi_pushforward(&y);
            let dx = random_ball(&mut rng, n, 1.0);
            let dy = random_ball(&mut rng, n, 1.0);
            let v = DVector::from_iterator(2 * n, dx.0.iter().chain(&dy.0).copied());
            let exact = &p * v;
            let fd = g.phi_tangent_fd(&x, &y, &dx, &dy, 1e-5);
            for (a, b) in exact.iter().zip(&fd) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    out.reports.push(
        ctx.row("pushforward", Provenance::Derived, t)
            .inputs(json!({ "groups": ["su2", "u1*su2"], "points": 10, "step": 1e-5 }))
            .values(
                json!({ "max_abs_err": worst }),
                json!("finite-difference tangent of phi"),
            )
            .errors(worst, f64::NAN)
            .judge(worst, ctx.tol("oracle.pushforward")),
    );

    for s in ["u1", "su2", "u1*su2"] {
        let t = Instant::now();
        let g = spec(s)?;
        let rule = group_rule(&g, ctx.cfg.quad_order)?;
        let vol = g.volume()?;
        let rel = (rule.mass() - vol).abs() / vol;
        out.reports.push(
            ctx.row(format!("mass.{s}"), Provenance::Trivial, t)
                .inputs(json!({ "group": s, "order": ctx.cfg.quad_order }))
                .values(json!(rule.mass()), json!(vol))
                .errors((rule.mass() - vol).abs(), rel)
                .judge(rel, ctx.tol("oracle.quadrature")),
        );
    }

    let t = Instant::now();
    let g = spec("su2")?;
    let rule = group_rule(&g, ctx.cfg.quad_order.max(12))?;
    let vol = g.volume()?;
    let mut worst = 0.0f64;
    for two_j in 0..4u32 {
        let label = IrrepLabel::su2(two_j);
        let d = label.dim();
        let mats: Vec<_> = rule.nodes.iter().map(|x| irrep_matrix(&label, x)).collect();
        for m in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let v: C64 = mats
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| p[(m, k)] * p[(m, l)].conj() * *w)
                        .sum();
                    let exact = if k == l { vol / d as f64 } else { 0.0 };
                    worst = worst.max((v - exact).norm() / vol);
                }
            }
        }
    }
    out.reports.push(
        ctx.row("schur.su2", Provenance::Paper, t)
            .inputs(json!({ "order": ctx.cfg.quad_order.max(12), "max_two_j": 3 }))
            .values(
                json!({ "max_err_over_volume": worst }),
                json!("vol/d on the diagonal, 0 off it"),
            )
            .errors(worst * vol, worst)
            .judge(worst, ctx.tol("oracle.quadrature")),
    );
    Ok(out)
}

// --------------------------------------------------------------- transform

fn compact_groups(ctx: &Ctx, rest: &[&str]) -> Result<Vec<GroupSpec>> {
    let mut out = Vec::new();
    for name in groups_with(&ctx.cfg.group, rest) {
        let g = spec(&name)?;
        if g.is_compact() {
            out.push(g);
        }
    }
    Ok(out)
}

fn entries(g: &GroupSpec, label: IrrepLabel) -> Result<Vec<BandLimitedFunction>> {
    let d = label.dim();
    let mut v = vec![BandLimitedFunction::entry(g, label.clone(), 0, 0)?];
    if d > 1 {
        v.push(BandLimitedFunction::entry(g, label, d - 1, 0)?);
    }
    Ok(v)
}

fn isometry(ctx: &Ctx) -> Result<CheckOutput> {
    let all = Instant::now();
    let mut out = CheckOutput::default();
    let u1 = spec("u1")?;
    for hbar in [0.25f64, 1.0, 4.0] {
        let t = Instant::now();
        // |F|² e^{-y²/ℏ} peaks near k√ℏ in Hermite units; the rule must reach
        // several units past it.
        let reach = 5.0 * hbar.sqrt() + 6.0;
        let circle_order = ctx
            .cfg
            .fiber_order
            .max((reach * reach / 2.0).ceil() as usize)
            .next_multiple_of(8);
        let mut fs = Vec::new();
        for k in -5..=5 {
            fs.extend(entries(&u1, IrrepLabel::circle(k))?);
        }
        fs.push(random_function(&u1, 5, 6, ctx.seed)?);
        let (defect, delta) = norm_defects(&fs, hbar, circle_order)?;
        out.reports.push(
            ctx.row(format!("u1.hbar={hbar}"), Provenance::Paper, t)
                .inputs(json!({ "group": "u1", "hbar": hbar, "max_charge": 5, "functions": fs.len(), "fiber_order": circle_order }))
                .values(json!({ "max_defect": defect, "quadrature_delta": delta }), json!(1.0))
                .errors(f64::NAN, defect)
                .judge(defect, ctx.tol("isometry.circle")),
        );
    }
    let su2 = spec("su2")?;
    for hbar in [0.25, 0.5, 1.0] {
        let t = Instant::now();
        let mut fs = Vec::new();
        for two_j in 0..=4 {
            fs.extend(entries(&su2, IrrepLabel::su2(two_j))?);
        }
        fs.push(random_function(&su2, 4, 6, ctx.seed)?);
        let (defect, delta) = norm_defects(&fs, hbar, ctx.cfg.fiber_order)?;
        out.reports.push(
            ctx.row(format!("su2.hbar={hbar}"), Provenance::Paper, t)
                .inputs(json!({ "group": "su2", "hbar": hbar, "max_two_j": 4, "functions": fs.len(), "fiber_order": ctx.cfg.fiber_order }))
                .values(json!({ "max_defect": defect, "quadrature_delta": delta }), json!(1.0))
                .errors(f64::NAN, defect)
                .judge(defect, ctx.tol("isometry.su2")),
        );
    }
    let ms = elapsed_ms(all);
    out.reports.push(
        ctx.row("runtime_ms", Provenance::Trivial, all)
            .values(json!(ms), Value::Null)
            .errors(ms, f64::NAN)
            .judge(ms, ctx.tol("isometry.runtime_ms")),
    );
    Ok(out)
}

/// Largest `|‖C_ℏ f‖_ν / ‖f‖ − 1|` over `fs`, with the largest doubling delta.
fn norm_defects(fs: &[BandLimitedFunction], hbar: f64, order: usize) -> Result<(f64, f64)> {
    let (mut defect, mut delta) = (0.0f64, 0.0f64);
    for f in fs {
        let n2 = f.norm_sq()?;
        // The doubling delta is reported, not enforced; the defect is the test.
        let h = hl2_norm_sq(
            &f.analytic_continue(hbar),
            hbar,
            Measure::Nu,
            order,
            Some(f64::INFINITY),
        )?;
        defect = defect
            .max((h.value / n2).sqrt() - 1.0)
            .max(1.0 - (h.value / n2).sqrt());
        delta = delta.max(h.delta);
    }
    Ok((defect, delta))
}

fn pairing_unitarity(ctx: &Ctx) -> Result<CheckOutput> {
    let mut out = CheckOutput::default();
    let mut grid = vec![0.5, 1.0];
    if !grid.contains(&ctx.cfg.hbar) {
        grid.push(ctx.cfg.hbar);
    }
    let mut audits: Vec<UnitarityAudit> = Vec::new();
    for g in compact_groups(ctx, &["u1", "su2"])? {
        let fs: Vec<_> = (0..10)
            .map(|i| random_function(&g, ctx.cfg.band_limit, 4, ctx.seed.wrapping_add(i)))
            .collect::<Result<_>>()?;
        for &hbar in &grid {
            let t = Instant::now();
            let a = unitarity_audit(&fs, hbar, ctx.cfg.fiber_order, None)?;
            out.reports.push(
                ctx.row(format!("{g}.hbar={hbar}"), Provenance::Paper, t)
                    .inputs(json!({ "group": g.to_string(), "hbar": hbar, "functions": fs.len(), "band_limit": ctx.cfg.band_limit }))
                    .values(json!({ "ratios": a.ratios, "spread": a.spread }), json!("ratios independent of f"))
                    .errors(f64::NAN, a.spread)
                    .judge(a.spread, ctx.tol("pairing_unitarity")),
            );
            audits.push(a);
        }
    }
    let norms: Vec<f64> = audits.iter().map(|a| a.b_ratio_normalized).collect();
    out.audits.push(json!({
        "kind": "pairing_constants",
        "entries": audits,
        "b_ratio_normalized_range": [
            norms.iter().copied().fold(f64::INFINITY, f64::min),
            norms.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ],
    }));
    Ok(out)
}

fn inversion(ctx: &Ctx) -> Result<CheckOutput> {
    let hbar = ctx.cfg.hbar;
    let mut out = CheckOutput::default();
    let u1 = spec("u1")?;
    let su2 = spec("su2")?;
    let mut circle = Vec::new();
    for k in 0..4 {
        circle.push(BandLimitedFunction::entry(
            &u1,
            IrrepLabel::circle(k),
            0,
            0,
        )?);
    }
    circle.push(random_function(&u1, 3, 4, ctx.seed)?);
    circle.push(random_function(&u1, 3, 4, ctx.seed.wrapping_add(1))?);
    let mut su2_fs = Vec::new();
    for two_j in 0..3 {
        su2_fs.extend(entries(&su2, IrrepLabel::su2(two_j))?);
    }
    su2_fs.push(random_function(&su2, ctx.cfg.band_limit, 4, ctx.seed)?);
    su2_fs.push(random_function(
        &su2,
        ctx.cfg.band_limit,
        4,
        ctx.seed.wrapping_add(1),
    )?);

    for (g, fs, key) in [("u1", circle, "circle"), ("su2", su2_fs, "su2")] {
        let t = Instant::now();
        let mut residual = 0.0f64;
        let mut lambdas = Vec::new();
        let mut b_inv_sq = f64::NAN;
        for f in &fs {
            let r = inversion_check(f, hbar, ctx.cfg.fiber_order, None)?;
            residual = residual.max(r.residual);
            lambdas.push(r.constant());
            b_inv_sq = r.b_printed_inv_sq;
        }
        let mean = lambdas.iter().sum::<C64>() / lambdas.len() as f64;
        let spread = max(lambdas.iter().map(|l| (l - mean).norm() / mean.norm()));
        let inputs = json!({ "group": g, "hbar": hbar, "functions": fs.len(), "fiber_order": ctx.cfg.fiber_order });
        out.reports.push(
            ctx.row(format!("{g}.residual"), Provenance::Paper, t)
                .inputs(inputs.clone())
                .values(json!({ "max_residual": residual }), json!(0.0))
                .errors(residual, f64::NAN)
                .judge(residual, ctx.tol(&format!("inversion.{key}"))),
        );
        out.reports.push(
            ctx.row(format!("{g}.constant"), Provenance::Paper, t)
                .inputs(inputs)
                .values(
                    json!({ "lambdas": lambdas.iter().map(|l| cjson(*l)).collect::<Vec<_>>() }),
                    json!({ "mean": cjson(mean) }),
                )
                .errors(f64::NAN, spread)
                .judge(spread, ctx.tol(&format!("inversion_constant.{key}"))),
        );
        out.audits.push(json!({
            "kind": "inversion_constant",
            "group": g,
            "hbar": hbar,
            "lambda": cjson(mean),
            "b_printed_inv_sq": b_inv_sq,
        }));
    }
    Ok(out)
}

// ---------------------------------------------------------------- geodesic

fn geodesic(ctx: &Ctx) -> Result<CheckOutput> {
    let mut rng = ctx.rng();
    let mut out = CheckOutput::default();
    let u1 = spec("u1")?;
    let su2 = spec("su2")?;

    let series_error = |f: &BandLimitedFunction, p: &FiberPoint, n: usize| {
        let r = bracket_series(f, p, n);
        let l = r.limit();
        (r.partial(n) - l).norm() / l.norm().max(1.0)
    };

    let t = Instant::now();
    let mut fs = Vec::new();
    // The N = 30 remainder is about (k|y|)³¹/31!, below 1e-10 only for k|y| ≲ 5.5.
    for k in -2..=2 {
        fs.push(BandLimitedFunction::entry(
            &u1,
            IrrepLabel::circle(k),
            0,
            0,
        )?);
    }
    fs.push(random_function(&u1, 2, 4, ctx.seed)?);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = FiberPoint::new(
            random_element(&u1, &mut rng),
            AlgebraVector(vec![rng.random_range(-2.0..=2.0)]),
        );
        for f in &fs {
            worst = worst.max(series_error(f, &p, 30));
        }
    }
    out.reports.push(
        ctx.row("u1", Provenance::Paper, t)
            .inputs(
                json!({ "group": "u1", "terms": 30, "max_y": 2.0, "max_charge": 2, "points": 20 }),
            )
            .values(json!({ "max_err": worst }), json!("f(x e^{iY})"))
            .errors(f64::NAN, worst)
            .judge(worst, ctx.tol("geodesic.circle")),
    );

    let t = Instant::now();
    let label = IrrepLabel::su2(2);
    let mut fs = vec![BandLimitedFunction::character(&su2, label.clone())?];
    let mut mixed = BandLimitedFunction::zero(&su2);
    for r in 0..3 {
        for c in 0..3 {
            mixed.add_term(
                label.clone(),
                r,
                c,
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            )?;
        }
    }
    fs.push(mixed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = FiberPoint::new(
            random_element(&su2, &mut rng),
            random_ball(&mut rng, 3, 2.0),
        );
        for f in &fs {
            worst = worst.max(series_error(f, &p, 40));
        }
    }
    out.reports.push(
        ctx.row("su2", Provenance::Paper, t)
            .inputs(
                json!({ "group": "su2", "terms": 40, "max_norm": 2.0, "two_j": 2, "points": 20 }),
            )
            .values(json!({ "max_err": worst }), json!("f(x e^{iY})"))
            .errors(f64::NAN, worst)
            .judge(worst, ctx.tol("geodesic.su2")),
    );

    // Characters at the identity have vanishing odd terms; a full block at a
    // generic base point does not.
    let cases = [
        (
            "u1",
            BandLimitedFunction::entry(&u1, IrrepLabel::circle(3), 0, 0)?,
            u1.identity(),
            AlgebraVector(vec![2.0]),
        ),
        (
            "su2",
            fs.pop().expect("mixed block"),
            random_element(&su2, &mut rng),
            AlgebraVector(vec![2.0 / 3f64.sqrt(); 3]),
        ),
    ];
    for (g, f, x, y) in cases {
        let t = Instant::now();
        let r = bracket_series(&f, &FiberPoint::new(x, y), 60);
        let fit = fit_factorial_decay(&r.remainders(), r.roundoff_floor());
        let coef = fit.map(|d| d.log_factorial_coef).unwrap_or(f64::NAN);
        out.reports.push(
            ctx.row(format!("factorial.{g}"), Provenance::Paper, t)
                .inputs(json!({ "group": g, "terms": 60 }))
                .values(json!({ "fit": fit }), json!({ "log_factorial_coef": -1.0 }))
                .errors((coef + 1.0).abs(), (coef + 1.0).abs())
                .judge((coef + 1.0).abs(), ctx.tol("geodesic.factorial")),
        );
    }
    Ok(out)
}

// -------------------------------------------------------------------- flat

fn flat(ctx: &Ctx) -> Result<CheckOutput> {
    let hbar = ctx.cfg.hbar;
    let mut out = CheckOutput::default();

    let t = Instant::now();
    let audit = flat_unitarity_audit(&standard_test_set(), hbar)?;
    out.reports.push(
        ctx.row("unitarity", Provenance::Paper, t)
            .inputs(json!({ "hbar": hbar, "functions": audit.ratios.len() }))
            .values(json!({ "ratios": audit.ratios }), json!(1.0))
            .errors(audit.max_defect, audit.max_defect)
            .judge(audit.max_defect, ctx.tol("flat.unitarity")),
    );
    let mut a = serde_json::to_value(&audit).map_err(|e| Error::Config(e.to_string()))?;
    a["kind"] = json!("flat_constants");
    out.audits.push(a);

    let t = Instant::now();
    let pts: Vec<Vec<f64>> = [-1.3, -0.2, 0.5, 2.0].iter().map(|&q| vec![q]).collect();
    let mut worst = 0.0f64;
    for d in 0..=6 {
        worst = worst.max(pistarinv_check(
            &FlatFunction::monomial(&[d]),
            hbar,
            &pts,
            16,
        )?);
    }
    let pts2 = vec![vec![0.4, -1.1], vec![1.0, 0.9]];
    let f2 = FlatFunction::monomial(&[3, 2]).add(&FlatFunction::monomial(&[0, 4]))?;
    worst = worst.max(pistarinv_check(&f2, hbar, &pts2, 16)?);
    out.reports.push(
        ctx.row("pistarinv", Provenance::Paper, t)
            .inputs(json!({ "hbar": hbar, "max_degree": 6, "order": 16 }))
            .values(json!({ "max_rel_err": worst }), json!("(2πħ)^{n/2} f"))
            .errors(f64::NAN, worst)
            .judge(worst, ctx.tol("flat.pistarinv")),
    );

    let t = Instant::now();
    let pts: Vec<Vec<f64>> = [-1.0, 0.0, 0.7].iter().map(|&q| vec![q]).collect();
    let grid = [0.5, 1.0, 1.5];
    let cases = [
        ("one", FlatFunction::monomial(&[0]), 16),
        ("z^2", FlatFunction::monomial(&[2]), 16),
        ("z^4", FlatFunction::monomial(&[4]), 16),
        (
            "exp(iz)",
            FlatFunction::product(vec![GaussPoly::plane_wave(1.0)]),
            40,
        ),
    ];
    let mut worst = 0.0f64;
    let mut limits = Vec::new();
    for (name, f, order) in &cases {
        let r = backward_heat_check(f, &grid, &pts, 1e-3, *order)?;
        worst = worst.max(r.residual);
        limits.push(json!({ "function": name, "limit_errors": r.limit_errors }));
    }
    out.reports.push(
        ctx.row("backward_heat", Provenance::Paper, t)
            .inputs(json!({ "hbar_grid": grid, "step": 1e-3, "functions": cases.iter().map(|c| c.0).collect::<Vec<_>>() }))
            .values(json!({ "max_residual": worst, "small_hbar": limits }), json!(0.0))
            .errors(worst, f64::NAN)
            .judge(worst, ctx.tol("flat.backward_heat")),
    );
    Ok(out)
}

// --------------------------------------------------------------- reduction

fn reduction(ctx: &Ctx) -> Result<CheckOutput> {
    let all = Instant::now();
    let hbar = ctx.cfg.hbar;
    let mut out = CheckOutput::default();
    let u1 = spec("u1")?;
    for links in [1, 2, 4] {
        for s in [5.0, 10.0] {
            let t = Instant::now();
            let params = RegularizedParams::new(s, hbar)?;
            let pts = sample_connections(
                &u1,
                links,
                &params,
                2,
                ctx.seed ^ (links as u64 * 31 + s as u64),
            )?;
            let mut worst = 0.0f64;
            for k in 1..=3 {
                let phi = BandLimitedFunction::entry(&u1, IrrepLabel::circle(k), 0, 0)?;
                let r = reduced_transform_check(
                    &phi,
                    &params,
                    Sampler::Deterministic { order: 24 },
                    &pts,
                )?;
                worst = worst.max(r.max_rel_err);
            }
            out.reports.push(
                ctx.row(format!("u1.links={links}.s={s}"), Provenance::Paper, t)
                    .inputs(json!({ "group": "u1", "links": links, "s": s, "hbar": hbar, "max_charge": 3, "points": 2, "order": 24 }))
                    .values(json!({ "max_rel_err": worst }), json!("analytic continuation of the heat-evolved φ at the holonomy"))
                    .errors(f64::NAN, worst)
                    .judge(worst, ctx.tol("reduction.circle")),
            );
        }
    }

    let t = Instant::now();
    let su2 = spec("su2")?;
    let params = RegularizedParams::new(ctx.cfg.s, hbar)?;
    let phi = BandLimitedFunction::character(&su2, IrrepLabel::su2(1))?;
    let pts = sample_connections(&su2, ctx.cfg.links, &params, 3, ctx.seed)?;
    let sampler = Sampler::MonteCarlo {
        samples: ctx.cfg.samples,
        seed: ctx.seed,
        substeps: ctx.cfg.substeps,
        extrapolate: true,
    };
    let r = reduced_transform_check(&phi, &params, sampler, &pts)?;
    let inputs = json!({ "group": "su2", "links": ctx.cfg.links, "s": ctx.cfg.s, "hbar": hbar, "sampler": sampler, "points": pts.len() });
    let estimates: Vec<Value> = r
        .points
        .iter()
        .map(|p| json!({ "estimate": p.estimate, "stderr": p.stderr }))
        .collect();
    let references: Vec<Value> = r.points.iter().map(|p| json!(p.reference)).collect();
    out.reports.push(
        ctx.row("su2.z_score", Provenance::Paper, t)
            .inputs(inputs.clone())
            .values(json!(estimates), json!(references))
            .errors(f64::NAN, r.max_rel_err)
            .judge(r.max_z_score, ctx.tol("reduction.su2.z_score")),
    );
    out.reports.push(
        ctx.row("su2.relative_stderr", Provenance::Trivial, t)
            .inputs(inputs)
            .values(
                json!({ "max_relative_stderr": r.max_relative_stderr }),
                Value::Null,
            )
            .errors(f64::NAN, r.max_relative_stderr)
            .judge(
                r.max_relative_stderr,
                ctx.tol("reduction.su2.relative_stderr"),
            ),
    );
    let mut a = serde_json::to_value(&r).map_err(|e| Error::Config(e.to_string()))?;
    a["kind"] = json!("reduction_monte_carlo");
    out.audits.push(a);

    let ms = elapsed_ms(all);
    out.reports.push(
        ctx.row("runtime_ms", Provenance::Trivial, all)
            .values(json!(ms), Value::Null)
            .errors(ms, f64::NAN)
            .judge(ms, ctx.tol("reduction.runtime_ms")),
    );
    Ok(out)
}

fn measure_limits(ctx: &Ctx) -> Result<CheckOutput> {
    let t = Instant::now();
    let s_values = [2.0, 5.0, 20.0, 100.0];
    let r = measure_limit_check(&s_values, ctx.cfg.hbar)?;
    let mut out = CheckOutput::default();
    let inputs = json!({ "group": "u1", "hbar": ctx.cfg.hbar, "s": s_values });
    let tol = ctx.tol("measure_limits");
    let mu = *r.mu_distances.last().unwrap_or(&f64::NAN);
    let rho = *r.rho_distances.last().unwrap_or(&f64::NAN);
    let flag = if r.strictly_decreasing { 0.0 } else { 1.0 };
    out.reports.push(
        ctx.row("mu_to_nu", Provenance::Paper, t)
            .inputs(inputs.clone())
            .values(json!(r.mu_distances), json!(0.0))
            .errors(mu, f64::NAN)
            .judge(mu, tol),
    );
    out.reports.push(
        ctx.row("rho_to_uniform", Provenance::Paper, t)
            .inputs(inputs.clone())
            .values(json!(r.rho_distances), json!(0.0))
            .errors(rho, f64::NAN)
            .judge(rho, tol),
    );
    out.reports.push(
        ctx.row("strictly_decreasing", Provenance::Trivial, t)
            .inputs(inputs)
            .values(json!(r.strictly_decreasing), json!(true))
            .errors(flag, f64::NAN)
            .judge(flag, 0.0),
    );
    Ok(out)
}

/// A single Monte Carlo reduction point, as printed by the `reduce` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducePoint {
    pub group: String,
    pub links: usize,
    pub s: f64,
    pub hbar: f64,
    pub samples: usize,
    pub seed: u64,
    pub substeps: usize,
    pub estimate: (f64, f64),
    pub reference: (f64, f64),
    pub rel_err: f64,
    pub stderr: f64,
    pub z_score: f64,
    pub pass: bool,
}

/// Estimates `S_ℏ(φ∘h)` at one point of `M_{s,ℏ}` for φ the character of
/// the fundamental label (charge 1, spin ½ on every factor). Passes when the
/// estimate is within the z-score tolerance and the relative standard error
/// is within its tolerance.
pub fn reduce_point(cfg: &RunConfig) -> Result<ReducePoint> {
    cfg.validate()?;
    let g = spec(&cfg.group)?;
    if !g.is_compact() {
        return Err(Error::NonCompact);
    }
    let label = IrrepLabel::from_numbers(&g, &vec![1.0; g.factors().len()])?;
    let phi = BandLimitedFunction::character(&g, label)?;
    let params =
        RegularizedParams::new(cfg.s, cfg.hbar).map_err(|e| Error::Config(e.to_string()))?;
    let pts = sample_connections(&g, cfg.links, &params, 1, cfg.seed)?;
    let sampler = Sampler::MonteCarlo {
        samples: cfg.samples,
        seed: cfg.seed,
        substeps: cfg.substeps,
        extrapolate: true,
    };
    let r = reduced_transform_check(&phi, &params, sampler, &pts)?;
    let p = &r.points[0];
    let pass = p.z_score <= cfg.tolerance("reduction.su2.z_score")
        && r.max_relative_stderr <= cfg.tolerance("reduction.su2.relative_stderr");
    Ok(ReducePoint {
        group: g.to_string(),
        links: cfg.links,
        s: cfg.s,
        hbar: cfg.hbar,
        samples: cfg.samples,
        seed: cfg.seed,
        substeps: cfg.substeps,
        estimate: p.estimate,
        reference: p.reference,
        rel_err: p.rel_err,
        stderr: p.stderr,
        z_score: p.z_score,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_partition_checks() {
        let total: usize = Suite::ALL[..5].iter().map(|s| checks_in(*s).len()).sum();
        assert_eq!(total, checks().len());
        assert_eq!(checks_in(Suite::All).len(), checks().len());
        assert_eq!("flat".parse::<Suite>().unwrap(), Suite::Flat);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn seeds_differ_per_check() {
        let a = derive_seed(42, "geodesic");
        assert_ne!(a, derive_seed(42, "flat"));
        assert_eq!(a, derive_seed(42, "geodesic"));
    }

    #[test]
    fn pass_tracks_tolerance() {
        let t = Instant::now();
        let r = TestReport::new("x", "x.y", Provenance::Trivial, t).judge(1e-3, 1e-3);
        assert!(r.pass);
        let r = TestReport::new("x", "x.y", Provenance::Trivial, t).judge(f64::NAN, 1.0);
        assert!(!r.pass);
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["err"].is_null());
        let back: TestReport = serde_json::from_value(v).unwrap();
        assert!(back.err.is_nan() && !back.pass);
    }

    #[test]
    fn geometry_suite_passes_on_defaults() {
        let out = run_suite(Suite::Geometry, &RunConfig::default(), false).unwrap();
        let bad: Vec<_> = out.failures().collect();
        assert!(bad.is_empty(), "{bad:#?}");
        assert!(out
            .reports
            .iter()
            .any(|r| r.test_id.starts_with("zeta_identity")));
    }

    #[test]
    fn reduce_point_small() {
        let mut cfg = RunConfig {
            samples: 20_000,
            substeps: 8,
            ..RunConfig::default()
        };
        let p = reduce_point(&cfg).unwrap();
        assert!(p.z_score < 4.0 && p.stderr > 0.0, "{p:?}");
        cfg.group = "r1".into();
        assert!(reduce_point(&cfg).is_err());
    }

    #[test]
    fn errors_become_failing_rows() {
        let cfg = RunConfig {
            fiber_order: 2,
            ..RunConfig::default()
        };
        let c = checks()
            .into_iter()
            .find(|c| c.name == "inversion")
            .unwrap();
        let out = c.run(&cfg);
        assert_eq!(out.reports.len(), 1);
        assert!(!out.reports[0].pass);
        assert!(run_suite(Suite::Transform, &cfg, false).is_err());
    }
}
