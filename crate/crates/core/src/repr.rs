//! Irreducible representations, band-limited Peter–Weyl sums and the heat
//! operator.
//!
//! The spin-j representation of SU(2) is realized on homogeneous polynomials
//! of degree 2j in `(u, v)` by `(π(g)P)(w) = P(gᵀw)`, with the orthonormal
//! basis `P_b = u^{2j-b} v^b / √((2j-b)! b!)`. Index `b` corresponds to the
//! weight `m = j - b`, and `j = 1/2` reproduces `g` itself. Because the action
//! is polynomial in the entries of `g`, the same code evaluates the holomorphic
//! continuation to SL(2, ℂ).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{ComplexFactorElement, ComplexGroupElement, Factor, GroupElement, GroupSpec, C64};

/// Label of one factor of an irreducible representation.
#[derive(Debug, Clone, Copy)]
pub enum LabelPart {
    /// Character `e^{ikθ}`.
    Circle(i64),
    /// Spin `j = two_j / 2`.
    Su2(u32),
    /// Plane wave `e^{ikx}`. Not square integrable.
    Line(f64),
}

impl LabelPart {
    fn rank(&self) -> u8 {
        match self {
            LabelPart::Circle(_) => 0,
            LabelPart::Su2(_) => 1,
            LabelPart::Line(_) => 2,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LabelPart::Su2(two_j) => *two_j as usize + 1,
            _ => 1,
        }
    }

    pub fn casimir(&self) -> f64 {
        match self {
            LabelPart::Circle(k) => (*k as f64).powi(2),
            LabelPart::Su2(two_j) => {
                let t = f64::from(*two_j);
                t * (t + 2.0) / 2.0
            }
            LabelPart::Line(k) => k * k,
        }
    }

    pub fn factor(&self) -> Factor {
        match self {
            LabelPart::Circle(_) => Factor::Circle,
            LabelPart::Su2(_) => Factor::Su2,
            LabelPart::Line(_) => Factor::Line,
        }
    }

    fn number(&self) -> f64 {
        match self {
            LabelPart::Circle(k) => *k as f64,
            LabelPart::Su2(t) => f64::from(*t),
            LabelPart::Line(k) => *k,
        }
    }
}

impl PartialEq for LabelPart {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for LabelPart {}

impl PartialOrd for LabelPart {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LabelPart {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (LabelPart::Circle(a), LabelPart::Circle(b)) => a.cmp(b),
            (LabelPart::Su2(a), LabelPart::Su2(b)) => a.cmp(b),
            (LabelPart::Line(a), LabelPart::Line(b)) => a.total_cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

/// Label of an irreducible representation of a product group.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IrrepLabel(pub Vec<LabelPart>);

impl IrrepLabel {
    pub fn trivial(spec: &GroupSpec) -> Self {
        Self(
            spec.factors()
                .iter()
                .map(|f| match f {
                    Factor::Circle => LabelPart::Circle(0),
                    Factor::Su2 => LabelPart::Su2(0),
                    Factor::Line => LabelPart::Line(0.0),
                })
                .collect(),
        )
    }

    pub fn circle(k: i64) -> Self {
        Self(vec![LabelPart::Circle(k)])
    }

    pub fn su2(two_j: u32) -> Self {
        Self(vec![LabelPart::Su2(two_j)])
    }

    pub fn dim(&self) -> usize {
        self.0.iter().map(LabelPart::dim).product()
    }

    /// Eigenvalue `λ_π ≥ 0` with `Δ_K π_{ab} = -λ_π π_{ab}`.
    pub fn casimir(&self) -> f64 {
        self.0.iter().map(LabelPart::casimir).sum()
    }

    pub fn is_compact(&self) -> bool {
        !self.0.iter().any(|p| matches!(p, LabelPart::Line(_)))
    }

    pub fn check(&self, spec: &GroupSpec) -> Result<()> {
        let ok = self.0.len() == spec.factors().len()
            && self
                .0
                .iter()
                .zip(spec.factors())
                .all(|(p, f)| p.factor() == *f);
        if ok {
            Ok(())
        } else {
            Err(Error::LabelMismatch(format!("{self:?} for group {spec}")))
        }
    }

    pub fn numbers(&self) -> Vec<f64> {
        self.0.iter().map(LabelPart::number).collect()
    }

    pub fn from_numbers(spec: &GroupSpec, nums: &[f64]) -> Result<Self> {
        if nums.len() != spec.factors().len() {
            return Err(Error::LabelMismatch(format!("{nums:?} for group {spec}")));
        }
        let bad = || Error::LabelMismatch(format!("{nums:?} for group {spec}"));
        spec.factors()
            .iter()
            .zip(nums)
            .map(|(f, &x)| match f {
                Factor::Circle if x.fract() == 0.0 => Ok(LabelPart::Circle(x as i64)),
                Factor::Su2 if x.fract() == 0.0 && x >= 0.0 => Ok(LabelPart::Su2(x as u32)),
                Factor::Line if x.is_finite() => Ok(LabelPart::Line(x)),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    /// All labels with `|k| ≤ cut` on circle factors and `2j ≤ cut` on SU(2)
    /// factors. Errors on Euclidean factors, whose spectrum is continuous.
    pub fn enumerate(spec: &GroupSpec, cut: u32) -> Result<Vec<Self>> {
        let mut out = vec![Vec::new()];
        for f in spec.factors() {
            let parts: Vec<LabelPart> = match f {
                Factor::Circle => (-(cut as i64)..=cut as i64)
                    .map(LabelPart::Circle)
                    .collect(),
                Factor::Su2 => (0..=cut).map(LabelPart::Su2).collect(),
                Factor::Line => return Err(Error::NonCompact),
            };
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<LabelPart>| {
                    parts.iter().map(move |p| {
                        let mut v = prefix.clone();
                        v.push(*p);
                        v
                    })
                })
                .collect();
        }
        Ok(out.into_iter().map(Self).collect())
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n + 1 - k) as f64 / k as f64;
    }
    row
}

/// `(a u + b v)^n` as coefficients of `u^{n-i} v^i`.
fn linear_power(a: C64, b: C64, n: usize) -> Vec<C64> {
    binomial_row(n)
        .into_iter()
        .enumerate()
        .map(|(i, c)| a.powu((n - i) as u32) * b.powu(i as u32) * c)
        .collect()
}

/// Spin `two_j/2` matrix of a 2×2 complex matrix `g`.
pub fn su2_irrep(two_j: u32, g: &Matrix2<C64>) -> DMatrix<C64> {
    let n = two_j as usize;
    let norms: Vec<f64> = (0..=n)
        .map(|b| (factorial(n - b) * factorial(b)).sqrt())
        .collect();
    let mut out = DMatrix::zeros(n + 1, n + 1);
    for b in 0..=n {
        // P_b(gᵀw) with gᵀw = (g00 u + g10 v, g01 u + g11 v)
        let first = linear_power(g[(0, 0)], g[(1, 0)], n - b);
        let second = linear_power(g[(0, 1)], g[(1, 1)], b);
        for (i, x) in first.iter().enumerate() {
            for (k, y) in second.iter().enumerate() {
                let a = i + k;
                out[(a, b)] += x * y * (norms[a] / norms[b]);
            }
        }
    }
    out
}

/// Spin `two_j/2` image of a 2×2 algebra element `x`, the derivative of
/// [`su2_irrep`] at the identity in direction `x`.
pub fn su2_irrep_algebra(two_j: u32, x: &Matrix2<C64>) -> DMatrix<C64> {
    let n = two_j as usize;
    let mut out = DMatrix::zeros(n + 1, n + 1);
    for b in 0..=n {
        let p = (n - b) as f64;
        let q = b as f64;
        out[(b, b)] = x[(0, 0)] * p + x[(1, 1)] * q;
        if b < n {
            out[(b + 1, b)] = x[(1, 0)] * (p * (q + 1.0)).sqrt();
        }
        if b > 0 {
            out[(b - 1, b)] = x[(0, 1)] * (q * (p + 1.0)).sqrt();
        }
    }
    out
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

fn one(z: C64) -> DMatrix<C64> {
    DMatrix::from_element(1, 1, z)
}

/// `π_λ(g)` for a complexified group element.
pub fn irrep_matrix_complex(label: &IrrepLabel, g: &ComplexGroupElement) -> DMatrix<C64> {
    let mut out = one(C64::new(1.0, 0.0));
    for (p, e) in label.0.iter().zip(g.parts()) {
        let block = match (p, e) {
            (LabelPart::Circle(k), ComplexFactorElement::Circle(w)) => {
                one((C64::i() * w * (*k as f64)).exp())
            }
            (LabelPart::Line(k), ComplexFactorElement::Line(z)) => one((C64::i() * z * *k).exp()),
            (LabelPart::Su2(t), ComplexFactorElement::Su2(m)) => su2_irrep(*t, m),
            _ => panic!("label {label:?} does not match group element"),
        };
        out = kron(&out, &block);
    }
    out
}

/// `π_λ(x)` for a point of K; unitary.
pub fn irrep_matrix(label: &IrrepLabel, x: &GroupElement) -> DMatrix<C64> {
    irrep_matrix_complex(label, &x.complexify())
}

/// `dπ_λ(Z)` for a complexified algebra vector `Z`.
pub fn irrep_algebra(spec: &GroupSpec, label: &IrrepLabel, z: &[C64]) -> DMatrix<C64> {
    let d = label.dim();
    let mut out = DMatrix::zeros(d, d);
    let mut left = 1;
    for (i, p) in label.0.iter().enumerate() {
        let r = spec.range(i);
        let block = match p {
            LabelPart::Circle(k) => one(C64::i() * z[r.start] * (*k as f64)),
            LabelPart::Line(k) => one(C64::i() * z[r.start] * *k),
            LabelPart::Su2(t) => su2_irrep_algebra(*t, &crate::lie::su2::algebra(&z[r])),
        };
        let bd = block.nrows();
        let right = d / (left * bd);
        // I_left ⊗ block ⊗ I_right
        let lifted = kron(
            &kron(&DMatrix::identity(left, left), &block),
            &DMatrix::identity(right, right),
        );
        out += lifted;
        left *= bd;
    }
    out
}

/// Key of one term of a Peter–Weyl sum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TermKey {
    pub label: IrrepLabel,
    pub row: usize,
    pub col: usize,
}

/// Finite sum `Σ c · π_λ(x)_{row,col}` on K.
#[derive(Debug, Clone, PartialEq)]
pub struct BandLimitedFunction {
    spec: GroupSpec,
    terms: BTreeMap<TermKey, C64>,
}

/// The holomorphic extension of a Peter–Weyl sum to K_ℂ, evaluated through
/// complexified representation matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphicFunction(BandLimitedFunction);

impl BandLimitedFunction {
    pub fn zero(spec: &GroupSpec) -> Self {
        Self {
            spec: spec.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(spec: &GroupSpec, c: C64) -> Self {
        let mut f = Self::zero(spec);
        f.add_term(IrrepLabel::trivial(spec), 0, 0, c)
            .expect("trivial label");
        f
    }

    /// A single matrix entry `π_λ(x)_{row,col}`.
    pub fn entry(spec: &GroupSpec, label: IrrepLabel, row: usize, col: usize) -> Result<Self> {
        let mut f = Self::zero(spec);
        f.add_term(label, row, col, C64::new(1.0, 0.0))?;
        Ok(f)
    }

    /// The character `χ_λ = tr π_λ`.
    pub fn character(spec: &GroupSpec, label: IrrepLabel) -> Result<Self> {
        let mut f = Self::zero(spec);
        for k in 0..label.dim() {
            f.add_term(label.clone(), k, k, C64::new(1.0, 0.0))?;
        }
        Ok(f)
    }

    pub fn add_term(&mut self, label: IrrepLabel, row: usize, col: usize, c: C64) -> Result<()> {
        label.check(&self.spec)?;
        let d = label.dim();
        if row >= d || col >= d {
            return Err(Error::LabelMismatch(format!(
                "entry ({row}, {col}) outside dimension {d}"
            )));
        }
        *self
            .terms
            .entry(TermKey { label, row, col })
            .or_insert(C64::new(0.0, 0.0)) += c;
        Ok(())
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient matrices grouped by label: `f(x) = Σ_λ tr(Cᵀ π_λ(x))`.
    pub fn coefficient_blocks(&self) -> BTreeMap<IrrepLabel, DMatrix<C64>> {
        let mut out: BTreeMap<IrrepLabel, DMatrix<C64>> = BTreeMap::new();
        for (k, c) in &self.terms {
            let d = k.label.dim();
            out.entry(k.label.clone())
                .or_insert_with(|| DMatrix::zeros(d, d))[(k.row, k.col)] += c;
        }
        out
    }

    /// Largest label component, in the sense of [`IrrepLabel::enumerate`].
    pub fn band_limit(&self) -> f64 {
        self.terms
            .keys()
            .flat_map(|k| k.label.numbers())
            .map(f64::abs)
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, x: &GroupElement) -> C64 {
        self.eval_complex(&x.complexify())
    }

    pub(crate) fn eval_complex(&self, g: &ComplexGroupElement) -> C64 {
        let mut cache: Option<(&IrrepLabel, DMatrix<C64>)> = None;
        let mut sum = C64::new(0.0, 0.0);
        for (k, c) in &self.terms {
            let fresh = !matches!(&cache, Some((l, _)) if *l == &k.label);
            if fresh {
                cache = Some((&k.label, irrep_matrix_complex(&k.label, g)));
            }
            let m = &cache.as_ref().expect("cached matrix").1;
            sum += c * m[(k.row, k.col)];
        }
        sum
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_coefficients(|_, c| c * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            *out.terms.entry(k.clone()).or_insert(C64::new(0.0, 0.0)) += c;
        }
        out
    }

    fn map_coefficients(&self, f: impl Fn(&TermKey, C64) -> C64) -> Self {
        Self {
            spec: self.spec.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), f(k, *c)))
                .collect(),
        }
    }

    /// `e^{ℏΔ_K/2} f`.
    pub fn heat(&self, hbar: f64) -> Self {
        self.map_coefficients(|k, c| c * (-hbar * k.label.casimir() / 2.0).exp())
    }

    /// `C_ℏ f`: heat operator followed by holomorphic continuation.
    pub fn analytic_continue(&self, hbar: f64) -> HolomorphicFunction {
        HolomorphicFunction(self.heat(hbar))
    }

    /// Exact `⟨f, g⟩_{L²(K)} = vol(K) Σ conj(c_f) c_g / dim`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        let vol = self.spec.volume()?;
        let mut sum = C64::new(0.0, 0.0);
        for (k, c) in &self.terms {
            if let Some(d) = other.terms.get(k) {
                sum += c.conj() * d / k.label.dim() as f64;
            }
        }
        Ok(sum * vol)
    }

    pub fn norm_sq(&self) -> Result<f64> {
        Ok(self.inner(self)?.re)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = FunctionDoc {
            group: self.spec.to_string(),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| TermDoc {
                    label: k.label.numbers(),
                    row: k.row,
                    col: k.col,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let doc: FunctionDoc =
            serde_json::from_value(value.clone()).map_err(|e| Error::Config(e.to_string()))?;
        let spec: GroupSpec = doc.group.parse()?;
        let mut f = Self::zero(&spec);
        for t in doc.terms {
            let label = IrrepLabel::from_numbers(&spec, &t.label)?;
            f.add_term(label, t.row, t.col, C64::new(t.re, t.im))?;
        }
        Ok(f)
    }
}

/// A seeded random Peter–Weyl sum with `terms` entries, labels bounded by `cut`.
pub fn random_function(
    spec: &GroupSpec,
    cut: u32,
    terms: usize,
    seed: u64,
) -> Result<BandLimitedFunction> {
    use rand::{Rng, SeedableRng};
    let labels = IrrepLabel::enumerate(spec, cut)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut f = BandLimitedFunction::zero(spec);
    while f.len() < terms.max(1) {
        let label = labels[rng.random_range(0..labels.len())].clone();
        let d = label.dim();
        let (row, col) = (rng.random_range(0..d), rng.random_range(0..d));
        let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        f.add_term(label, row, col, c)?;
    }
    Ok(f)
}

#[derive(Serialize, Deserialize)]
struct FunctionDoc {
    group: String,
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    label: Vec<f64>,
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

impl HolomorphicFunction {
    pub fn from_coefficients(f: BandLimitedFunction) -> Self {
        Self(f)
    }

    pub fn coefficients(&self) -> &BandLimitedFunction {
        &self.0
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.0.spec
    }

    pub fn eval(&self, g: &ComplexGroupElement) -> C64 {
        self.0.eval_complex(g)
    }

    /// Restriction to K.
    pub fn restrict(&self) -> BandLimitedFunction {
        self.0.clone()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.scale(s))
    }
}

/// `Σ_{n > cut} w(n)` for a decreasing tail, summed until negligible.
fn tail_sum(cut: u32, w: impl Fn(u32) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut n = cut + 1;
    loop {
        let t = w(n);
        sum += t;
        if t < 1e-300 || t < 1e-18 * sum || n > cut + 100_000 {
            return sum;
        }
        n += 1;
    }
}

/// `χ_j` at an SU(2) element through Chebyshev polynomials of the second kind
/// in `cos s = tr(U)/2`.
fn su2_character(two_j: u32, u: &Matrix2<C64>) -> f64 {
    let c = (u.trace().re / 2.0).clamp(-1.0, 1.0);
    let (mut prev, mut cur) = (1.0, 2.0 * c);
    if two_j == 0 {
        return 1.0;
    }
    for _ in 1..two_j {
        let next = 2.0 * c * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Heat kernel `ρ_ℏ(x) = vol(K)⁻¹ Σ_λ dim λ · e^{-ℏλ_π/2} χ_λ(x)`, truncated at
/// `|k| ≤ cut`, `2j ≤ cut`. The dropped mass `Σ dim² e^{-ℏλ_π/2}` must stay
/// below `1e-12`.
pub fn heat_kernel(spec: &GroupSpec, x: &GroupElement, hbar: f64, cut: u32) -> Result<f64> {
    if hbar <= 0.0 {
        return Err(Error::InvalidParameter(format!("hbar = {hbar}")));
    }
    let mut kept_total = 1.0;
    let mut full_total = 1.0;
    let mut value = 1.0 / spec.volume()?;
    for (f, part) in spec.factors().iter().zip(x.parts()) {
        let (kept, tail, v) = match (f, part) {
            (Factor::Circle, crate::lie::FactorElement::Circle(theta)) => {
                let w = |k: u32| (-hbar * f64::from(k).powi(2) / 2.0).exp();
                let kept = 1.0 + 2.0 * (1..=cut).map(w).sum::<f64>();
                let v = 1.0
                    + 2.0
                        * (1..=cut)
                            .map(|k| w(k) * (f64::from(k) * theta).cos())
                            .sum::<f64>();
                (kept, 2.0 * tail_sum(cut, w), v)
            }
            (Factor::Su2, crate::lie::FactorElement::Su2(u)) => {
                let w = |t: u32| {
                    let d = f64::from(t + 1);
                    d * d * (-hbar * LabelPart::Su2(t).casimir() / 2.0).exp()
                };
                let kept = (0..=cut).map(w).sum::<f64>();
                let v = (0..=cut)
                    .map(|t| {
                        f64::from(t + 1)
                            * (-hbar * LabelPart::Su2(t).casimir() / 2.0).exp()
                            * su2_character(t, u)
                    })
                    .sum::<f64>();
                (kept, tail_sum(cut, w), v)
            }
            _ => return Err(Error::NonCompact),
        };
        kept_total *= kept;
        full_total *= kept + tail;
        value *= v;
    }
    let tail = full_total - kept_total;
    if tail > 1e-12 {
        return Err(Error::TruncationInsufficient { tail, limit: 1e-12 });
    }
    Ok(value)
}

/// Smallest cut for which [`heat_kernel`] accepts `hbar`.
pub fn heat_kernel_cut(spec: &GroupSpec, hbar: f64) -> Result<u32> {
    let x = spec.identity();
    for cut in 1..10_000 {
        match heat_kernel(spec, &x, hbar, cut) {
            Ok(_) => return Ok(cut),
            Err(Error::TruncationInsufficient { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidParameter(format!("hbar = {hbar} too small")))
}

/// Circle heat kernel through Poisson summation: a wrapped Gaussian of
/// variance `hbar`.
pub fn wrapped_gaussian(theta: f64, variance: f64) -> f64 {
    let mut sum = 0.0;
    let width = (40.0 * variance).sqrt() / (2.0 * PI) + 2.0;
    let m = width.ceil() as i64;
    for w in -m..=m {
        let d = theta + 2.0 * PI * w as f64;
        sum += (-d * d / (2.0 * variance)).exp();
    }
    sum / (2.0 * PI * variance).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{su2, AlgebraVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(s: &str) -> GroupSpec {
        s.parse().unwrap()
    }

    fn random_y(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> AlgebraVector {
        AlgebraVector((0..n).map(|_| rng.random_range(-scale..scale)).collect())
    }

    /// Spin-j generators from ladder operators, `dπ(e_k) = i√2 J_k`.
    fn ladder_generators(two_j: u32) -> [DMatrix<C64>; 3] {
        let n = two_j as usize;
        let j = f64::from(two_j) / 2.0;
        let mut jp = DMatrix::<C64>::zeros(n + 1, n + 1);
        let mut jz = DMatrix::<C64>::zeros(n + 1, n + 1);
        for b in 0..=n {
            let m = j - b as f64;
            jz[(b, b)] = m.into();
            if b > 0 {
                // J₊|m⟩ = √((j−m)(j+m+1)) |m+1⟩, and m+1 sits at index b−1
                jp[(b - 1, b)] = ((j - m) * (j + m + 1.0)).sqrt().into();
            }
        }
        let jm = jp.adjoint();
        let jx = (&jp + &jm) * C64::new(0.5, 0.0);
        let jy = (&jp - &jm) * C64::new(0.0, -0.5);
        let s = C64::new(0.0, std::f64::consts::SQRT_2);
        [jx * s, jy * s, jz * s]
    }

    #[test]
    fn dimensions_and_casimirs() {
        assert_eq!(IrrepLabel::su2(3).dim(), 4);
        assert_eq!(IrrepLabel::su2(1).casimir(), 1.5);
        assert_eq!(IrrepLabel::circle(3).casimir(), 9.0);
        let l = IrrepLabel(vec![LabelPart::Circle(2), LabelPart::Su2(2)]);
        assert_eq!(l.dim(), 3);
        assert_eq!(l.casimir(), 4.0 + 4.0);
        assert_eq!(IrrepLabel::trivial(&spec("u1*su2")).casimir(), 0.0);
    }

    #[test]
    fn spin_half_is_defining_representation() {
        let g = spec("su2");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = random_y(&mut rng, 3, 1.0);
        let x = g.exp(&y);
        let p = g.phi(&x, &y);
        let m = irrep_matrix_complex(&IrrepLabel::su2(1), &p);
        let ComplexFactorElement::Su2(direct) = &p.parts()[0] else {
            unreachable!()
        };
        for r in 0..2 {
            for c in 0..2 {
                assert!((m[(r, c)] - direct[(r, c)]).norm() < 1e-12);
            }
        }
        // against an independent Padé matrix exponential of i·Y
        let e = DMatrix::from_fn(2, 2, |r, c| (su2::algebra(&y.times_i()))[(r, c)]).exp();
        let m0 = irrep_matrix_complex(&IrrepLabel::su2(1), &g.exp_complex(&y.times_i()));
        assert!((m0 - e).iter().map(|c| c.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn symmetric_power_matches_ladder_exponential() {
        let g = spec("su2");
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for two_j in 0..5 {
            let gens = ladder_generators(two_j);
            for _ in 0..5 {
                let z: Vec<C64> = (0..3)
                    .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                let algebra = &gens[0] * z[0] + &gens[1] * z[1] + &gens[2] * z[2];
                let via_algebra = irrep_algebra(&g, &IrrepLabel::su2(two_j), &z);
                assert!(
                    (&algebra - &via_algebra)
                        .iter()
                        .map(|c| c.norm())
                        .fold(0.0, f64::max)
                        < 1e-12
                );
                let oracle = algebra.exp();
                let m = irrep_matrix_complex(&IrrepLabel::su2(two_j), &g.exp_complex(&z));
                let err = (m - oracle).iter().map(|c| c.norm()).fold(0.0, f64::max);
                assert!(err < 1e-10, "2j = {two_j}: {err}");
            }
        }
    }

    #[test]
    fn irreps_are_unitary_homomorphisms() {
        let g = spec("u1*su2");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let label = IrrepLabel(vec![LabelPart::Circle(-2), LabelPart::Su2(3)]);
        for _ in 0..10 {
            let a = g.exp(&random_y(&mut rng, 4, 3.0));
            let b = g.exp(&random_y(&mut rng, 4, 3.0));
            let pa = irrep_matrix(&label, &a);
            let pb = irrep_matrix(&label, &b);
            let pab = irrep_matrix(&label, &a.mul(&b));
            assert!(
                (&pa * &pb - pab)
                    .iter()
                    .map(|c| c.norm())
                    .fold(0.0, f64::max)
                    < 1e-12
            );
            let id = DMatrix::<C64>::identity(4, 4);
            assert!(
                (pa.adjoint() * &pa - id)
                    .iter()
                    .map(|c| c.norm())
                    .fold(0.0, f64::max)
                    < 1e-12
            );
        }
        let trivial = irrep_matrix(
            &IrrepLabel::trivial(&g),
            &g.exp(&random_y(&mut rng, 4, 3.0)),
        );
        assert_eq!(trivial, DMatrix::identity(1, 1));
    }

    #[test]
    fn circle_character() {
        let g = spec("u1");
        let m = irrep_matrix(&IrrepLabel::circle(1), &g.exp(&AlgebraVector(vec![0.7])));
        assert!((m[(0, 0)] - C64::from_polar(1.0, 0.7)).norm() < 1e-15);
    }

    // Σ_k d²/dt² f(x e^{t e_k}) by central differences.
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

    #[test]
    fn casimir_matches_finite_difference_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (s, label) in [
            ("u1", IrrepLabel::circle(3)),
            ("su2", IrrepLabel::su2(1)),
            ("su2", IrrepLabel::su2(2)),
            (
                "u1*su2",
                IrrepLabel(vec![LabelPart::Circle(1), LabelPart::Su2(1)]),
            ),
        ] {
            let g = spec(s);
            let d = label.dim();
            let f = BandLimitedFunction::entry(&g, label.clone(), 0, d - 1).unwrap();
            let x = g.exp(&random_y(&mut rng, g.dim(), 2.0));
            let lap = fd_laplacian(&g, &f, &x, 1e-4);
            let expected = -f.eval(&x) * label.casimir();
            assert!((lap - expected).norm() / expected.norm() < 1e-5, "{s}");
        }
    }

    #[test]
    fn heat_is_diagonal_semigroup() {
        let g = spec("u1*su2");
        let mut f = BandLimitedFunction::zero(&g);
        f.add_term(
            IrrepLabel(vec![LabelPart::Circle(2), LabelPart::Su2(1)]),
            0,
            1,
            C64::new(1.0, -2.0),
        )
        .unwrap();
        f.add_term(IrrepLabel::trivial(&g), 0, 0, C64::new(0.5, 0.0))
            .unwrap();
        let a = f.heat(0.3).heat(0.9);
        let b = f.heat(1.2);
        for ((_, x), (_, y)) in a.terms().zip(b.terms()) {
            assert!((x - y).norm() <= 1e-15 * x.norm().max(1.0));
        }
        let small = f.heat(1e-8);
        let diff = small.add(&f.scale(C64::new(-1.0, 0.0)));
        assert!(diff.norm_sq().unwrap().sqrt() <= 1e-6 * f.norm_sq().unwrap().sqrt());
    }

    #[test]
    fn circle_heat_solves_heat_equation() {
        let g = spec("u1");
        let f = BandLimitedFunction::entry(&g, IrrepLabel::circle(3), 0, 0).unwrap();
        let (t, dt, h) = (0.4, 1e-4, 1e-3);
        for i in 0..8 {
            let theta = i as f64 * 0.7;
            let at = |tt: f64, th: f64| f.heat(tt).eval(&g.exp(&AlgebraVector(vec![th])));
            let dudt = (at(t + dt, theta) - at(t - dt, theta)) / (2.0 * dt);
            let lap = (at(t, theta + h) - at(t, theta) * 2.0 + at(t, theta - h)) / (h * h);
            assert!((dudt - lap / 2.0).norm() < 1e-6);
        }
    }

    #[test]
    fn continuation_restricts_and_matches_closed_form() {
        let g = spec("u1");
        let k = 2;
        let hbar = 0.7;
        let f = BandLimitedFunction::entry(&g, IrrepLabel::circle(k), 0, 0).unwrap();
        let cont = f.analytic_continue(hbar);
        let (theta, y) = (0.4, -1.1);
        let got = cont.eval(&g.phi(&g.exp(&AlgebraVector(vec![theta])), &AlgebraVector(vec![y])));
        let expected =
            (-hbar * (k * k) as f64 / 2.0).exp() * (C64::i() * k as f64 * C64::new(theta, y)).exp();
        assert!((got - expected).norm() < 1e-13);
        let x = g.exp(&AlgebraVector(vec![theta]));
        assert!((cont.restrict().eval(&x) - f.heat(hbar).eval(&x)).norm() < 1e-12);
    }

    #[test]
    fn norm_via_schur_counts_volume() {
        let g = spec("su2");
        let f = BandLimitedFunction::entry(&g, IrrepLabel::su2(1), 0, 0).unwrap();
        assert!((f.norm_sq().unwrap() - g.volume().unwrap() / 2.0).abs() < 1e-12);
        assert_eq!(
            BandLimitedFunction::constant(&spec("r1"), C64::new(1.0, 0.0)).norm_sq(),
            Err(Error::NonCompact)
        );
    }

    #[test]
    fn json_round_trip() {
        let g = spec("u1*su2");
        let mut f = BandLimitedFunction::zero(&g);
        f.add_term(
            IrrepLabel(vec![LabelPart::Circle(-1), LabelPart::Su2(2)]),
            2,
            0,
            C64::new(0.25, 3.0),
        )
        .unwrap();
        f.add_term(IrrepLabel::trivial(&g), 0, 0, C64::new(-1.0, 0.0))
            .unwrap();
        let back = BandLimitedFunction::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        assert!(f
            .clone()
            .add_term(IrrepLabel::su2(1), 0, 0, C64::new(1.0, 0.0))
            .is_err());
    }

    #[test]
    fn heat_kernel_matches_wrapped_gaussian() {
        let g = spec("u1");
        for theta in [0.0, 1.0, 3.0] {
            let v = heat_kernel(&g, &g.exp(&AlgebraVector(vec![theta])), 1.0, 12).unwrap();
            assert!((v - wrapped_gaussian(theta, 1.0)).abs() < 1e-10);
        }
        assert!(matches!(
            heat_kernel(&g, &g.identity(), 0.01, 5),
            Err(Error::TruncationInsufficient { .. })
        ));
    }

    #[test]
    fn heat_kernel_flattens_for_large_time() {
        let g = spec("u1*su2");
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let inv_vol = 1.0 / g.volume().unwrap();
        for _ in 0..5 {
            let x = g.exp(&random_y(&mut rng, 4, 3.0));
            let v = heat_kernel(&g, &x, 60.0, heat_kernel_cut(&g, 60.0).unwrap()).unwrap();
            assert!((v - inv_vol).abs() < 1e-12);
        }
    }

    #[test]
    fn su2_character_matches_trace() {
        let g = spec("su2");
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for two_j in 0..6 {
            let x = g.exp(&random_y(&mut rng, 3, 3.0));
            let crate::lie::FactorElement::Su2(u) = &x.parts()[0] else {
                unreachable!()
            };
            let tr = irrep_matrix(&IrrepLabel::su2(two_j), &x).trace();
            assert!((tr.re - su2_character(two_j, u)).abs() < 1e-11);
            assert!(tr.im.abs() < 1e-11);
        }
    }
}
