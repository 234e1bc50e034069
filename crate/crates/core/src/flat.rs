//! The flat case K = ℝⁿ in closed form.
//!
//! Functions are finite sums of products of one-variable factors
//! `P(q) exp(−a q² + b q + c)` with complex data. The class is closed under
//! the heat flow, analytic continuation and products, and every Gaussian
//! integral that appears is evaluated exactly from Gaussian moments.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::C64;
use crate::quadrature::{hermite_scaled, validate_scaled, Validated};

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

mod poly {
    use super::{zero, C64};

    pub fn eval(p: &[C64], z: C64) -> C64 {
        p.iter().rev().fold(zero(), |acc, c| acc * z + c)
    }

    pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    pub fn add_scaled(acc: &mut Vec<C64>, p: &[C64], s: C64) {
        if acc.len() < p.len() {
            acc.resize(p.len(), zero());
        }
        for (a, c) in acc.iter_mut().zip(p) {
            *a += c * s;
        }
    }

    /// Powers `lin⁰ … linᵈ` of a polynomial.
    pub fn powers(lin: &[C64], d: usize) -> Vec<Vec<C64>> {
        let mut out = vec![vec![C64::new(1.0, 0.0)]];
        for k in 1..=d {
            out.push(mul(&out[k - 1], lin));
        }
        out
    }
}

/// `E[sⁱ]` for a centred Gaussian with (possibly complex) variance `var`.
fn moments(var: C64, d: usize) -> Vec<C64> {
    let mut m = vec![zero(); d + 1];
    m[0] = C64::new(1.0, 0.0);
    for i in (2..=d).step_by(2) {
        m[i] = m[i - 2] * var * (i - 1) as f64;
    }
    m
}

/// `∫_ℝ P(q) exp(−A q² + B q + C) dq`, requiring `Re A > 0`.
pub fn gaussian_integral_1d(p: &[C64], a: C64, b: C64, c: C64) -> Result<C64> {
    if a.re <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Gaussian exponent {a} not integrable"
        )));
    }
    let mean = b / (2.0 * a);
    let mom = moments(C64::new(0.5, 0.0) / a, p.len());
    let mut sum = zero();
    for (j, pj) in p.iter().enumerate() {
        let mut e = zero();
        for (i, m) in mom.iter().enumerate().take(j + 1) {
            e += binomial(j, i) * mean.powu((j - i) as u32) * m;
        }
        sum += pj * e;
    }
    Ok(sum * (c + b * b / (4.0 * a)).exp() * (C64::from(PI) / a).sqrt())
}

/// A polynomial in `(q, p)`, stored as `coef[i][j]` for `qⁱ pʲ`.
type Poly2 = Vec<Vec<C64>>;

/// `P(q + s·i·p)` expanded in `(q, p)`, with `s = ±1`.
fn lift(p: &[C64], s: f64) -> Poly2 {
    let d = p.len();
    let mut out = vec![vec![zero(); d.max(1)]; d.max(1)];
    for (k, pk) in p.iter().enumerate() {
        for j in 0..=k {
            out[k - j][j] += pk * binomial(k, j) * (C64::new(0.0, s)).powu(j as u32);
        }
    }
    out
}

fn mul2(a: &Poly2, b: &Poly2) -> Poly2 {
    let (da, db) = (a.len(), b.len());
    let mut out = vec![vec![zero(); da + db - 1]; da + db - 1];
    for i in 0..da {
        for j in 0..a[i].len() {
            if a[i][j] == zero() {
                continue;
            }
            for k in 0..db {
                for l in 0..b[k].len() {
                    out[i + k][j + l] += a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// `∫_{ℝ²} P(q, p) exp(−wᵀMw + Jᵀw + K) dq dp` for complex symmetric `M` with
/// positive definite real part.
#[allow(clippy::needless_range_loop)]
fn gaussian_integral_2d(p: &Poly2, m: Matrix2<C64>, j: Vector2<C64>, k: C64) -> Result<C64> {
    let re = m.map(|v| v.re);
    if re[(0, 0)] <= 0.0 || re.determinant() <= 0.0 {
        return Err(Error::InvalidParameter(
            "Gaussian form not integrable".into(),
        ));
    }
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("singular form".into()))?;
    let mean = inv * j / C64::from(2.0);
    let cov = inv / C64::from(2.0);
    // Eigenvalues of M have positive real part; the branch of √det follows.
    let half_tr = (m[(0, 0)] + m[(1, 1)]) / 2.0;
    let disc = (half_tr * half_tr - m.determinant()).sqrt();
    let sqrt_det = (half_tr + disc).sqrt() * (half_tr - disc).sqrt();
    let deg = p.len() + p.iter().map(Vec::len).max().unwrap_or(0);
    // Isserlis recursion for E[s₁ᵃ s₂ᵇ].
    let mut mom = vec![vec![zero(); deg + 1]; deg + 1];
    mom[0][0] = C64::new(1.0, 0.0);
    for b in 1..=deg {
        if b >= 2 {
            mom[0][b] = mom[0][b - 2] * cov[(1, 1)] * (b - 1) as f64;
        }
    }
    for a in 1..=deg {
        for b in 0..=deg {
            let mut v = zero();
            if a >= 2 {
                v += mom[a - 2][b] * cov[(0, 0)] * (a - 1) as f64;
            }
            if b >= 1 {
                v += mom[a - 1][b - 1] * cov[(0, 1)] * b as f64;
            }
            mom[a][b] = v;
        }
    }
    let mut sum = zero();
    for (a, row) in p.iter().enumerate() {
        for (b, c) in row.iter().enumerate() {
            if *c == zero() {
                continue;
            }
            let mut e = zero();
            for i in 0..=a {
                for l in 0..=b {
                    e += binomial(a, i)
                        * binomial(b, l)
                        * mean[0].powu((a - i) as u32)
                        * mean[1].powu((b - l) as u32)
                        * mom[i][l];
                }
            }
            sum += c * e;
        }
    }
    let quad = (j.transpose() * inv * j)[(0, 0)] / 4.0;
    Ok(sum * (k + quad).exp() * PI / sqrt_det)
}

/// One-variable factor `P(q) exp(−a q² + b q + c)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussPoly {
    pub poly: Vec<C64>,
    pub a: C64,
    pub b: C64,
    pub c: C64,
}

impl GaussPoly {
    pub fn new(poly: Vec<C64>, a: C64, b: C64, c: C64) -> Self {
        Self { poly, a, b, c }
    }

    pub fn polynomial(poly: Vec<C64>) -> Self {
        Self::new(poly, zero(), zero(), zero())
    }

    pub fn monomial(k: usize) -> Self {
        let mut p = vec![zero(); k + 1];
        p[k] = C64::new(1.0, 0.0);
        Self::polynomial(p)
    }

    /// `qᵏ e^{−(q−μ)²/2v}`.
    pub fn gaussian(k: usize, center: f64, variance: f64) -> Self {
        let a = 1.0 / (2.0 * variance);
        Self::new(
            Self::monomial(k).poly,
            C64::from(a),
            C64::from(2.0 * a * center),
            C64::from(-a * center * center),
        )
    }

    /// `e^{i k q}`.
    pub fn plane_wave(k: f64) -> Self {
        Self::new(vec![C64::new(1.0, 0.0)], zero(), C64::new(0.0, k), zero())
    }

    pub fn eval(&self, z: C64) -> C64 {
        poly::eval(&self.poly, z) * (-self.a * z * z + self.b * z + self.c).exp()
    }

    /// `e^{tΔ/2}` for `t` with `Re(1 + 2ta) > 0`; for `t > 0` this is
    /// convolution with the Gaussian of variance `t`, and for `t < 0` the
    /// algebraic backward flow.
    pub fn heat(&self, t: f64) -> Result<Self> {
        if t == 0.0 {
            return Ok(self.clone());
        }
        let den = 1.0 + 2.0 * t * self.a;
        if den.re <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "heat time {t} leaves the class"
            )));
        }
        // q = m(x) + s with m(x) = (bt + x)/den and Var s = t/den
        let lin = vec![self.b * t / den, C64::new(1.0, 0.0) / den];
        let d = self.poly.len().saturating_sub(1);
        let pw = poly::powers(&lin, d);
        let mom = moments(C64::from(t) / den, d);
        let mut out = Vec::new();
        for (j, pj) in self.poly.iter().enumerate() {
            for i in 0..=j {
                poly::add_scaled(&mut out, &pw[j - i], pj * binomial(j, i) * mom[i]);
            }
        }
        let pref = C64::new(1.0, 0.0) / den.sqrt();
        for v in out.iter_mut() {
            *v *= pref;
        }
        Ok(Self::new(
            out,
            self.a / den,
            self.b / den,
            self.c + self.b * self.b * t / (2.0 * den),
        ))
    }

    /// `∫ conj(self(q)) other(q) dq`.
    pub fn l2_inner(&self, other: &Self) -> Result<C64> {
        let conj: Vec<C64> = self.poly.iter().map(|c| c.conj()).collect();
        gaussian_integral_1d(
            &poly::mul(&conj, &other.poly),
            self.a.conj() + other.a,
            self.b.conj() + other.b,
            self.c.conj() + other.c,
        )
    }

    /// `∫∫ conj(self(q+ip)) other(q+ip) e^{−w_q q² − w_p p²} dq dp`.
    pub fn weighted_inner(&self, other: &Self, w: PlaneWeight) -> Result<C64> {
        let conj: Vec<C64> = self.poly.iter().map(|c| c.conj()).collect();
        let p = mul2(&lift(&conj, -1.0), &lift(&other.poly, 1.0));
        let (a1, a2) = (self.a.conj(), other.a);
        let (b1, b2) = (self.b.conj(), other.b);
        let i = C64::i();
        let m12 = i * (a2 - a1);
        let m = Matrix2::new(a2 + a1 + w.q, m12, m12, -(a2 + a1) + w.p);
        let j = Vector2::new(b2 + b1, i * (b2 - b1));
        gaussian_integral_2d(&p, m, j, self.c.conj() + other.c)
    }
}

/// Gaussian weight `e^{−w_q q² − w_p p²}` on `ℂ ≅ ℝ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWeight {
    pub q: C64,
    pub p: C64,
}

impl PlaneWeight {
    /// `e^{−p²/ℏ}`.
    pub fn kahler(hbar: f64) -> Self {
        Self {
            q: zero(),
            p: C64::from(1.0 / hbar),
        }
    }

    /// `e^{−|z|²/2ℏ}`.
    pub fn conventional(hbar: f64) -> Self {
        let w = C64::from(1.0 / (2.0 * hbar));
        Self { q: w, p: w }
    }
}

/// `coef · Π_k factors[k](q_k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatTerm {
    pub coef: C64,
    pub factors: Vec<GaussPoly>,
}

/// A finite sum of product terms on ℝⁿ, or its holomorphic extension to ℂⁿ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatFunction {
    dim: usize,
    terms: Vec<FlatTerm>,
}

impl FlatFunction {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn product(factors: Vec<GaussPoly>) -> Self {
        Self {
            dim: factors.len(),
            terms: vec![FlatTerm {
                coef: C64::new(1.0, 0.0),
                factors,
            }],
        }
    }

    /// `e^{−|q|²/2v}` on ℝⁿ.
    pub fn gaussian(dim: usize, variance: f64) -> Self {
        Self::product(vec![GaussPoly::gaussian(0, 0.0, variance); dim])
    }

    /// `q^α` on ℝⁿ.
    pub fn monomial(powers: &[usize]) -> Self {
        Self::product(powers.iter().map(|&k| GaussPoly::monomial(k)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[FlatTerm] {
        &self.terms
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self {
            dim: self.dim,
            terms,
        })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| FlatTerm {
                    coef: t.coef * s,
                    factors: t.factors.clone(),
                })
                .collect(),
        }
    }

    pub fn eval(&self, q: &[f64]) -> C64 {
        let z: Vec<C64> = q.iter().map(|&v| C64::from(v)).collect();
        self.eval_complex(&z)
    }

    pub fn eval_complex(&self, z: &[C64]) -> C64 {
        debug_assert_eq!(z.len(), self.dim);
        self.terms
            .iter()
            .map(|t| {
                t.coef
                    * t.factors
                        .iter()
                        .zip(z)
                        .map(|(f, &v)| f.eval(v))
                        .product::<C64>()
            })
            .sum()
    }

    fn map_factors(&self, f: impl Fn(&GaussPoly) -> Result<GaussPoly>) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(FlatTerm {
                    coef: t.coef,
                    factors: t.factors.iter().map(&f).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            dim: self.dim,
            terms,
        })
    }

    /// `e^{tΔ/2} f`.
    pub fn heat(&self, t: f64) -> Result<Self> {
        self.map_factors(|g| g.heat(t))
    }

    fn pair_sum(
        &self,
        other: &Self,
        inner: impl Fn(&GaussPoly, &GaussPoly) -> Result<C64>,
    ) -> Result<C64> {
        let mut sum = zero();
        for s in &self.terms {
            for o in &other.terms {
                let mut v = s.coef.conj() * o.coef;
                for (a, b) in s.factors.iter().zip(&o.factors) {
                    v *= inner(a, b)?;
                }
                sum += v;
            }
        }
        Ok(sum)
    }

    /// Exact `⟨f, g⟩_{L²(ℝⁿ)}`.
    pub fn l2_inner(&self, other: &Self) -> Result<C64> {
        self.pair_sum(other, GaussPoly::l2_inner)
    }

    pub fn l2_norm_sq(&self) -> Result<f64> {
        Ok(self.l2_inner(self)?.re)
    }

    /// Exact `∫_{ℂⁿ} conj(F) G` against a product Gaussian weight.
    pub fn weighted_inner(&self, other: &Self, w: PlaneWeight) -> Result<C64> {
        self.pair_sum(other, |a, b| a.weighted_inner(b, w))
    }

    /// `‖F‖²` in `ℋL²(ℂⁿ, e^{−p²/ℏ} dq dp)`.
    pub fn hl2_norm_sq(&self, hbar: f64) -> Result<f64> {
        Ok(self.weighted_inner(self, PlaneWeight::kahler(hbar))?.re)
    }
}

/// Printed flat constants `a_ℏ = (πℏ)^{−n/2}(2πℏ)^{−n}` and
/// `b_ℏ = (πℏ)^{n/4}(2πℏ)^{n/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatConstants {
    pub a: f64,
    pub b: f64,
}

impl FlatConstants {
    pub fn printed(dim: usize, hbar: f64) -> Self {
        let n = dim as f64;
        Self {
            a: (PI * hbar).powf(-n / 2.0) * (2.0 * PI * hbar).powf(-n),
            b: (PI * hbar).powf(n / 4.0) * (2.0 * PI * hbar).powf(n / 2.0),
        }
    }
}

/// `Π_ℏ f(z) = a_ℏ ∫ e^{−(z−q)²/2ℏ} f(q) dq = a_ℏ (2πℏ)^{n/2} (e^{ℏΔ/2} f)(z)`.
pub fn flat_pairing_forward(f: &FlatFunction, hbar: f64) -> Result<FlatFunction> {
    if hbar <= 0.0 {
        return Err(Error::InvalidParameter(format!("hbar {hbar}")));
    }
    let a = FlatConstants::printed(f.dim(), hbar).a;
    let scale = a * (2.0 * PI * hbar).powf(f.dim() as f64 / 2.0);
    Ok(f.heat(hbar)?.scale(C64::from(scale)))
}

fn adjoint_at_order(f: &FlatFunction, q: &[f64], hbar: f64, order: usize) -> (C64, f64) {
    let n = f.dim();
    let (x, w) = hermite_scaled(order, 2.0 * hbar);
    let mut idx = vec![0usize; n];
    let (mut sum, mut mag) = (zero(), 0.0);
    for _ in 0..order.pow(n as u32) {
        let z: Vec<C64> = (0..n).map(|k| C64::new(q[k], x[idx[k]])).collect();
        let wt: f64 = idx.iter().map(|&i| w[i]).product();
        let v = wt * f.eval_complex(&z);
        sum += v;
        mag += v.norm();
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < order {
                break;
            }
            idx[d] = 0;
        }
    }
    (sum, mag)
}

/// `Π_ℏ* F(q) = ∫ F(q + ip) e^{−p²/2ℏ} dp` by Gauss–Hermite in `p`, checked
/// under order doubling.
pub fn flat_pairing_adjoint(
    f: &FlatFunction,
    q: &[f64],
    hbar: f64,
    order: usize,
    tol: Option<f64>,
) -> Result<Validated<C64>> {
    if q.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: q.len(),
        });
    }
    validate_scaled(order, tol, |o| Ok(adjoint_at_order(f, q, hbar, o)))
}

/// `max_q |Π*(e^{ℏΔ/2} f)_ℂ(q) − (2πℏ)^{n/2} f(q)| / max_q |(2πℏ)^{n/2} f(q)|`.
pub fn pistarinv_check(
    f: &FlatFunction,
    hbar: f64,
    points: &[Vec<f64>],
    order: usize,
) -> Result<f64> {
    let cont = f.heat(hbar)?;
    let c = (2.0 * PI * hbar).powf(f.dim() as f64 / 2.0);
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for q in points {
        let lhs = flat_pairing_adjoint(&cont, q, hbar, order, None)?.value;
        let rhs = f.eval(q) * c;
        err = err.max((lhs - rhs).norm());
        scale = scale.max(rhs.norm());
    }
    Ok(if err == 0.0 {
        0.0
    } else {
        err / scale.max(f64::MIN_POSITIVE)
    })
}

/// Outcome of the backward-heat check.
#[derive(Debug, Clone, Serialize)]
pub struct BackwardHeatReport {
    /// `max |∂f/∂ℏ + ½Δf|` over the grid.
    pub residual: f64,
    /// `(ℏ, max_q |f_ℏ(q) − F(q)|)` for decreasing ℏ.
    pub limit_errors: Vec<(f64, f64)>,
}

/// `f_ℏ(q) = (2πℏ)^{−n/2} ∫ F(q + ip) e^{−p²/2ℏ} dp`.
pub fn backward_heat_profile(f: &FlatFunction, q: &[f64], hbar: f64, order: usize) -> Result<C64> {
    let v = flat_pairing_adjoint(f, q, hbar, order, Some(1e-12))?.value;
    Ok(v * (2.0 * PI * hbar).powf(-(f.dim() as f64) / 2.0))
}

pub fn backward_heat_check(
    f: &FlatFunction,
    hbar_grid: &[f64],
    points: &[Vec<f64>],
    step: f64,
    order: usize,
) -> Result<BackwardHeatReport> {
    if hbar_grid.len() < 3 {
        return Err(Error::InvalidParameter(
            "hbar grid needs at least 3 points".into(),
        ));
    }
    if hbar_grid.iter().any(|&h| h <= step) {
        return Err(Error::InvalidParameter(
            "hbar grid must exceed the step".into(),
        ));
    }
    let n = f.dim();
    let prof = |q: &[f64], h: f64| backward_heat_profile(f, q, h, order);
    let mut residual = 0.0f64;
    for &h in hbar_grid {
        for q in points {
            let dh = (prof(q, h + step)? - prof(q, h - step)?) / (2.0 * step);
            let centre = prof(q, h)?;
            let mut lap = zero();
            for k in 0..n {
                let mut qp = q.clone();
                let mut qm = q.clone();
                qp[k] += step;
                qm[k] -= step;
                lap += (prof(&qp, h)? - 2.0 * centre + prof(&qm, h)?) / (step * step);
            }
            residual = residual.max((dh + 0.5 * lap).norm());
        }
    }
    let mut limit_errors = Vec::new();
    for h in [1e-1, 1e-2, 1e-3, 1e-4] {
        let mut e = 0.0f64;
        for q in points {
            e = e.max((prof(q, h)? - f.eval(q)).norm());
        }
        limit_errors.push((h, e));
    }
    Ok(BackwardHeatReport {
        residual,
        limit_errors,
    })
}

/// `F ↦ e^{z²/4ℏ} F`, from `ℋL²(e^{−p²/ℏ})` to `ℋL²(e^{−|z|²/2ℏ})`.
pub fn to_conventional(f: &FlatFunction, hbar: f64) -> FlatFunction {
    let shift = C64::from(1.0 / (4.0 * hbar));
    f.map_factors(|g| Ok(GaussPoly::new(g.poly.clone(), g.a - shift, g.b, g.c)))
        .expect("pure relabelling")
}

pub fn conventional_norm_sq(f: &FlatFunction, hbar: f64) -> Result<f64> {
    Ok(f.weighted_inner(f, PlaneWeight::conventional(hbar))?.re)
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatUnitarityAudit {
    pub hbar: f64,
    /// `‖b_ℏ Π_ℏ f‖ / ‖f‖` per test function.
    pub ratios: Vec<f64>,
    pub max_defect: f64,
    pub a_printed: f64,
    pub b_printed: f64,
    /// `b_ℏ a_ℏ` from the printed constants.
    pub ab_product: f64,
    /// `(πℏ)^{−n/4}(2πℏ)^{−n/2}`.
    pub ab_expected: f64,
}

pub fn flat_unitarity_audit(test_set: &[FlatFunction], hbar: f64) -> Result<FlatUnitarityAudit> {
    let dim = test_set.first().map(FlatFunction::dim).unwrap_or(1);
    let c = FlatConstants::printed(dim, hbar);
    let mut ratios = Vec::with_capacity(test_set.len());
    for f in test_set {
        let norm = f.l2_norm_sq()?;
        if norm <= 0.0 {
            return Err(Error::InvalidParameter("zero test function".into()));
        }
        let b = FlatConstants::printed(f.dim(), hbar).b;
        let image = flat_pairing_forward(f, hbar)?.scale(C64::from(b));
        ratios.push((image.hl2_norm_sq(hbar)? / norm).sqrt());
    }
    let n = dim as f64;
    Ok(FlatUnitarityAudit {
        hbar,
        max_defect: ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max),
        ratios,
        a_printed: c.a,
        b_printed: c.b,
        ab_product: c.a * c.b,
        ab_expected: (PI * hbar).powf(-n / 4.0) * (2.0 * PI * hbar).powf(-n / 2.0),
    })
}

/// Six closed-form test functions, five on ℝ and one on ℝ².
pub fn standard_test_set() -> Vec<FlatFunction> {
    let one = C64::new(1.0, 0.0);
    let g = |k, mu, v| FlatFunction::product(vec![GaussPoly::gaussian(k, mu, v)]);
    let mut modulated = GaussPoly::gaussian(0, 1.0, 0.5);
    modulated.b += C64::new(0.0, 2.0);
    let hermite2 = FlatFunction::product(vec![GaussPoly::new(
        vec![-one, zero(), C64::from(2.0)],
        C64::from(0.5),
        zero(),
        zero(),
    )]);
    vec![
        g(0, 0.0, 1.0),
        g(1, 0.0, 1.0),
        hermite2,
        FlatFunction::product(vec![modulated]),
        g(0, -1.0, 0.3)
            .add(&g(2, 0.5, 2.0).scale(C64::new(0.5, -1.0)))
            .unwrap(),
        FlatFunction::product(vec![
            GaussPoly::gaussian(1, 0.0, 1.0),
            GaussPoly::gaussian(1, 0.3, 0.7),
        ]),
    ]
}
