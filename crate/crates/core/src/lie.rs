//! Compact-type groups assembled from circle, SU(2) and Euclidean-line factors.
//!
//! The Lie algebra 𝔨 carries a fixed orthonormal basis: the unit vector for
//! each abelian factor and `e_k = iσ_k/√2` for each SU(2) factor, which is
//! orthonormal for `⟨X, Y⟩ = Re tr(X*Y)`. Coordinates of an [`AlgebraVector`]
//! are taken in this basis, factor by factor in the order of the spec.
//!
//! Every operation is computed per factor and assembled blockwise.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matfun::SkewFunctions;

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// One factor of a product group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    Circle,
    Su2,
    Line,
}

impl Factor {
    pub fn dim(self) -> usize {
        match self {
            Factor::Circle | Factor::Line => 1,
            Factor::Su2 => 3,
        }
    }

    pub fn is_compact(self) -> bool {
        !matches!(self, Factor::Line)
    }

    /// Riemannian volume for the fixed inner product. The SU(2) factor is a
    /// 3-sphere of radius √2 (its closed one-parameter subgroups have length
    /// 2π√2), hence `2π²·(√2)³`.
    pub fn volume(self) -> Option<f64> {
        match self {
            Factor::Circle => Some(2.0 * PI),
            Factor::Su2 => Some(4.0 * SQRT_2 * PI * PI),
            Factor::Line => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Factor::Circle => "u1",
            Factor::Su2 => "su2",
            Factor::Line => "r1",
        }
    }
}

/// SU(2) helpers in the basis `e_k = iσ_k/√2`.
pub mod su2 {
    use super::*;

    /// `[e_1, e_2, e_3]` as 2×2 matrices.
    pub fn basis() -> [Matrix2<C64>; 3] {
        let s = 1.0 / SQRT_2;
        let z = C64::new(0.0, 0.0);
        [
            Matrix2::new(z, I * s, I * s, z),
            Matrix2::new(z, C64::new(s, 0.0), C64::new(-s, 0.0), z),
            Matrix2::new(I * s, z, z, -I * s),
        ]
    }

    /// `Σ z_k e_k` for complex coefficients (an element of 𝔰𝔩(2, ℂ)).
    pub fn algebra(z: &[C64]) -> Matrix2<C64> {
        let b = basis();
        b[0] * z[0] + b[1] * z[1] + b[2] * z[2]
    }

    pub fn algebra_real(y: &[f64]) -> Matrix2<C64> {
        algebra(&[y[0].into(), y[1].into(), y[2].into()])
    }

    /// Complex coordinates `z_k = tr(e_k† M)` of a traceless matrix.
    pub fn coords(m: &Matrix2<C64>) -> [C64; 3] {
        let b = basis();
        [0, 1, 2].map(|k| (b[k].adjoint() * m).trace())
    }

    /// Real coordinates of a skew-Hermitian matrix.
    pub fn coords_real(m: &Matrix2<C64>) -> [f64; 3] {
        coords(m).map(|c| c.re)
    }

    /// Matrix exponential of `Σ z_k e_k`. The square of that matrix is
    /// `μ I` with `μ = -Σ z_k²/2`, so `exp = cosh(√μ) I + sinh(√μ)/√μ · X`.
    pub fn exp(z: &[C64]) -> Matrix2<C64> {
        let x = algebra(z);
        let mu = -(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) / 2.0;
        let (c, s) = if mu.norm() < 1e-8 {
            // even series in μ; three terms exhaust double precision here
            (
                1.0 + mu / 2.0 + mu * mu / 24.0,
                1.0 + mu / 6.0 + mu * mu / 120.0,
            )
        } else {
            let r = mu.sqrt();
            (r.cosh(), r.sinh() / r)
        };
        Matrix2::identity() * c + x * s
    }

    /// Principal logarithm of a unitary SU(2) matrix, as real coordinates.
    /// Returns `None` when the rotation half-angle is too close to π for the
    /// branch to be well defined.
    pub fn log(u: &Matrix2<C64>) -> Option<[f64; 3]> {
        let half_trace = (u.trace().re / 2.0).clamp(-1.0, 1.0);
        let s = half_trace.acos();
        if s > PI - 1e-7 {
            return None;
        }
        let skew = (u - u.adjoint()) * C64::from(0.5);
        let factor = if s < 1e-8 { 1.0 } else { s / s.sin() };
        let c = coords_real(&(skew * C64::from(factor)));
        // |Y|/√2 = s for exp(Y)
        Some(c)
    }

    /// Inverse of a unimodular 2×2 matrix (adjugate).
    pub fn inverse_sl2(m: &Matrix2<C64>) -> Matrix2<C64> {
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det
    }
}

/// Element of the Lie algebra 𝔨 in the fixed orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraVector(pub Vec<f64>);

impl AlgebraVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self(self.0.iter().map(|v| v * t).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `i·Y` as a complexified algebra element.
    pub fn times_i(&self) -> Vec<C64> {
        self.0.iter().map(|v| I * v).collect()
    }

    pub fn to_complex(&self) -> Vec<C64> {
        self.0.iter().map(|v| C64::new(*v, 0.0)).collect()
    }
}

impl From<Vec<f64>> for AlgebraVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Component of a group element in one factor.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorElement {
    /// Angle in `[0, 2π)`.
    Circle(f64),
    /// 2×2 unitary matrix with determinant one.
    Su2(Matrix2<C64>),
    Line(f64),
}

/// Component of a complexified group element in one factor.
#[derive(Debug, Clone, PartialEq)]
pub enum ComplexFactorElement {
    /// Complex angle `w`; the point of ℂ* is `e^{iw}`. The real part is kept in `[0, 2π)`.
    Circle(C64),
    /// 2×2 complex matrix with determinant one.
    Su2(Matrix2<C64>),
    Line(C64),
}

fn wrap_angle(t: f64) -> f64 {
    let w = t.rem_euclid(2.0 * PI);
    if w == 2.0 * PI {
        0.0
    } else {
        w
    }
}

fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// A point of K.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement(Vec<FactorElement>);

/// A point of the complexification K_ℂ.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGroupElement(Vec<ComplexFactorElement>);

impl GroupElement {
    pub fn new(parts: Vec<FactorElement>) -> Self {
        Self(
            parts
                .into_iter()
                .map(|p| match p {
                    FactorElement::Circle(t) => FactorElement::Circle(wrap_angle(t)),
                    other => other,
                })
                .collect(),
        )
    }

    pub fn parts(&self) -> &[FactorElement] {
        &self.0
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| match (a, b) {
                    (FactorElement::Circle(x), FactorElement::Circle(y)) => {
                        FactorElement::Circle(x + y)
                    }
                    (FactorElement::Su2(x), FactorElement::Su2(y)) => FactorElement::Su2(x * y),
                    (FactorElement::Line(x), FactorElement::Line(y)) => FactorElement::Line(x + y),
                    _ => panic!("group elements from different specs"),
                })
                .collect(),
        )
    }

    pub fn inverse(&self) -> Self {
        Self::new(
            self.0
                .iter()
                .map(|p| match p {
                    FactorElement::Circle(x) => FactorElement::Circle(-x),
                    FactorElement::Su2(u) => FactorElement::Su2(u.adjoint()),
                    FactorElement::Line(x) => FactorElement::Line(-x),
                })
                .collect(),
        )
    }

    pub fn complexify(&self) -> ComplexGroupElement {
        ComplexGroupElement(
            self.0
                .iter()
                .map(|p| match p {
                    FactorElement::Circle(x) => ComplexFactorElement::Circle((*x).into()),
                    FactorElement::Su2(u) => ComplexFactorElement::Su2(*u),
                    FactorElement::Line(x) => ComplexFactorElement::Line((*x).into()),
                })
                .collect(),
        )
    }

    /// Max-norm distance, with circle angles compared modulo 2π.
    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| match (a, b) {
                (FactorElement::Circle(x), FactorElement::Circle(y)) => angle_distance(*x, *y),
                (FactorElement::Su2(x), FactorElement::Su2(y)) => (x - y).map(|c| c.norm()).max(),
                (FactorElement::Line(x), FactorElement::Line(y)) => (x - y).abs(),
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }
}

impl ComplexGroupElement {
    pub fn new(parts: Vec<ComplexFactorElement>) -> Self {
        Self(
            parts
                .into_iter()
                .map(|p| match p {
                    ComplexFactorElement::Circle(w) => {
                        ComplexFactorElement::Circle(C64::new(wrap_angle(w.re), w.im))
                    }
                    other => other,
                })
                .collect(),
        )
    }

    pub fn parts(&self) -> &[ComplexFactorElement] {
        &self.0
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| match (a, b) {
                    (ComplexFactorElement::Circle(x), ComplexFactorElement::Circle(y)) => {
                        ComplexFactorElement::Circle(x + y)
                    }
                    (ComplexFactorElement::Su2(x), ComplexFactorElement::Su2(y)) => {
                        ComplexFactorElement::Su2(x * y)
                    }
                    (ComplexFactorElement::Line(x), ComplexFactorElement::Line(y)) => {
                        ComplexFactorElement::Line(x + y)
                    }
                    _ => panic!("group elements from different specs"),
                })
                .collect(),
        )
    }

    pub fn inverse(&self) -> Self {
        Self::new(
            self.0
                .iter()
                .map(|p| match p {
                    ComplexFactorElement::Circle(x) => ComplexFactorElement::Circle(-x),
                    ComplexFactorElement::Su2(u) => ComplexFactorElement::Su2(su2::inverse_sl2(u)),
                    ComplexFactorElement::Line(x) => ComplexFactorElement::Line(-x),
                })
                .collect(),
        )
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| match (a, b) {
                (ComplexFactorElement::Circle(x), ComplexFactorElement::Circle(y)) => {
                    angle_distance(x.re, y.re).max((x.im - y.im).abs())
                }
                (ComplexFactorElement::Su2(x), ComplexFactorElement::Su2(y)) => {
                    (x - y).map(|c| c.norm()).max()
                }
                (ComplexFactorElement::Line(x), ComplexFactorElement::Line(y)) => (x - y).norm(),
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }
}

/// Positive roots on the maximal abelian subalgebra 𝔱 spanned by one basis
/// vector per factor (`e_3` for SU(2) factors).
#[derive(Debug, Clone, PartialEq)]
pub struct RootDatum {
    pub positive_roots: Vec<Vec<f64>>,
    pub rho: Vec<f64>,
    pub rho_norm_sq: f64,
}

/// A compact-type group given as an ordered product of factors.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    factors: Vec<Factor>,
    offsets: Vec<usize>,
    dim: usize,
    roots: RootDatum,
}

impl GroupSpec {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidGroup(String::new()));
        }
        let mut offsets = Vec::with_capacity(factors.len());
        let mut dim = 0;
        for f in &factors {
            offsets.push(dim);
            dim += f.dim();
        }
        let rank = factors.len();
        let mut positive_roots = Vec::new();
        for (i, f) in factors.iter().enumerate() {
            if *f == Factor::Su2 {
                // the root's value on e_3, read off the spectrum of ad(e_3)
                let theta = block_root_values(&su2_ad_block(&[0.0, 0.0, 1.0]), 1)[0];
                let mut root = vec![0.0; rank];
                root[i] = theta;
                positive_roots.push(root);
            }
        }
        let mut rho = vec![0.0; rank];
        for r in &positive_roots {
            for (a, b) in rho.iter_mut().zip(r) {
                *a += 0.5 * b;
            }
        }
        let rho_norm_sq = rho.iter().map(|v| v * v).sum();
        Ok(Self {
            factors,
            offsets,
            dim,
            roots: RootDatum {
                positive_roots,
                rho,
                rho_norm_sq,
            },
        })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Total real dimension n.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn root_datum(&self) -> &RootDatum {
        &self.roots
    }

    pub fn rho_norm_sq(&self) -> f64 {
        self.roots.rho_norm_sq
    }

    pub fn is_abelian(&self) -> bool {
        self.roots.positive_roots.is_empty()
    }

    pub fn is_compact(&self) -> bool {
        self.factors.iter().all(|f| f.is_compact())
    }

    /// Coordinate range of factor `i` inside an algebra vector.
    pub fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i] + self.factors[i].dim()
    }

    /// Riemannian volume of K.
    pub fn volume(&self) -> Result<f64> {
        self.factors
            .iter()
            .map(|f| f.volume().ok_or(Error::NonCompact))
            .product()
    }

    fn check(&self, y: &[impl Sized]) -> Result<()> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        Ok(())
    }

    pub fn identity(&self) -> GroupElement {
        self.exp(&AlgebraVector::zeros(self.dim))
    }

    pub fn inner(&self, a: &AlgebraVector, b: &AlgebraVector) -> f64 {
        a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum()
    }

    /// Group exponential, factor by factor.
    pub fn exp(&self, y: &AlgebraVector) -> GroupElement {
        self.check(&y.0).expect("algebra vector dimension");
        GroupElement::new(
            self.factors
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let c = &y.0[self.range(i)];
                    match f {
                        Factor::Circle => FactorElement::Circle(c[0]),
                        Factor::Line => FactorElement::Line(c[0]),
                        Factor::Su2 => {
                            FactorElement::Su2(su2::exp(&[c[0].into(), c[1].into(), c[2].into()]))
                        }
                    }
                })
                .collect(),
        )
    }

    /// Exponential of a complexified algebra element `z ∈ 𝔨_ℂ`.
    pub fn exp_complex(&self, z: &[C64]) -> ComplexGroupElement {
        self.check(z).expect("algebra vector dimension");
        ComplexGroupElement::new(
            self.factors
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let c = &z[self.range(i)];
                    match f {
                        Factor::Circle => ComplexFactorElement::Circle(c[0]),
                        Factor::Line => ComplexFactorElement::Line(c[0]),
                        Factor::Su2 => ComplexFactorElement::Su2(su2::exp(c)),
                    }
                })
                .collect(),
        )
    }

    /// `Φ(x, Y) = x e^{iY}`.
    pub fn phi(&self, x: &GroupElement, y: &AlgebraVector) -> ComplexGroupElement {
        x.complexify().mul(&self.exp_complex(&y.times_i()))
    }

    /// `Ad_x Y`.
    pub fn adjoint_action(&self, x: &GroupElement, y: &AlgebraVector) -> AlgebraVector {
        let mut out = y.0.clone();
        for (i, part) in x.0.iter().enumerate() {
            if let FactorElement::Su2(u) = part {
                let r = self.range(i);
                let m = u * su2::algebra_real(&y.0[r.clone()]) * u.adjoint();
                out[r].copy_from_slice(&su2::coords_real(&m));
            }
        }
        AlgebraVector(out)
    }

    /// Matrix of `ad Y = [Y, ·]` in the orthonormal basis; block diagonal.
    pub fn ad_matrix(&self, y: &AlgebraVector) -> DMatrix<f64> {
        self.check(&y.0).expect("algebra vector dimension");
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (i, f) in self.factors.iter().enumerate() {
            if *f == Factor::Su2 {
                let r = self.range(i);
                let block = su2_ad_block(&y.0[r.clone()]);
                out.view_mut((r.start, r.start), (3, 3)).copy_from(&block);
            }
        }
        out
    }

    /// `{|α(Y')| : α ∈ R⁺}` with `Y'` conjugate to `Y` in 𝔱, read off as the
    /// positive imaginary parts of the spectrum of `ad Y`.
    pub fn root_values(&self, y: &AlgebraVector) -> Vec<f64> {
        self.check(&y.0).expect("algebra vector dimension");
        let mut out = Vec::new();
        for (i, f) in self.factors.iter().enumerate() {
            if *f == Factor::Su2 {
                let block = su2_ad_block(&y.0[self.range(i)]);
                out.extend(block_root_values(&block, 1));
            }
        }
        out
    }

    /// Differential of Φ at `(x, Y)` in left-trivialized frames, as the
    /// 2n×2n block matrix `[[cos adY, (1−cos adY)/adY], [−sin adY, sin adY/adY]]`.
    /// Rows: (real, imaginary) parts in 𝔨_ℂ = 𝔨 + i𝔨; columns: (δx, δY).
    pub fn phi_pushforward(&self, y: &AlgebraVector) -> DMatrix<f64> {
        self.check(&y.0).expect("algebra vector dimension");
        let n = self.dim;
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        for (i, f) in self.factors.iter().enumerate() {
            let r = self.range(i);
            let d = f.dim();
            let block = match f {
                Factor::Su2 => su2_ad_block(&y.0[r.clone()]),
                _ => DMatrix::zeros(d, d),
            };
            let fun = SkewFunctions::new(&block);
            let s = r.start;
            out.view_mut((s, s), (d, d)).copy_from(&fun.cos);
            out.view_mut((s, n + s), (d, d)).copy_from(&fun.versinc);
            out.view_mut((n + s, s), (d, d)).copy_from(&(-fun.sin));
            out.view_mut((n + s, n + s), (d, d)).copy_from(&fun.sinc);
        }
        out
    }

    /// Central-difference tangent of `t ↦ Φ(x e^{t δx}, Y + t δY)` at `t = 0`,
    /// left-trivialized as `g⁻¹ dg` and split into (real, imaginary) parts.
    /// Independent of [`GroupSpec::phi_pushforward`]; used as its oracle.
    pub fn phi_tangent_fd(
        &self,
        x: &GroupElement,
        y: &AlgebraVector,
        dx: &AlgebraVector,
        dy: &AlgebraVector,
        h: f64,
    ) -> Vec<f64> {
        let n = self.dim;
        let at = |t: f64| self.phi(&x.mul(&self.exp(&dx.scaled(t))), &y.add(&dy.scaled(t)));
        let g = self.phi(x, y);
        let (plus, minus) = (at(h), at(-h));
        let mut out = vec![0.0; 2 * n];
        for (i, part) in g.0.iter().enumerate() {
            let r = self.range(i);
            match (part, &plus.0[i], &minus.0[i]) {
                (
                    ComplexFactorElement::Circle(_),
                    ComplexFactorElement::Circle(p),
                    ComplexFactorElement::Circle(m),
                ) => {
                    let mut dre = (p.re - m.re).rem_euclid(2.0 * PI);
                    if dre > PI {
                        dre -= 2.0 * PI;
                    }
                    out[r.start] = dre / (2.0 * h);
                    out[n + r.start] = (p.im - m.im) / (2.0 * h);
                }
                (
                    ComplexFactorElement::Line(_),
                    ComplexFactorElement::Line(p),
                    ComplexFactorElement::Line(m),
                ) => {
                    let d = (p - m) / (2.0 * h);
                    out[r.start] = d.re;
                    out[n + r.start] = d.im;
                }
                (
                    ComplexFactorElement::Su2(g0),
                    ComplexFactorElement::Su2(p),
                    ComplexFactorElement::Su2(m),
                ) => {
                    let t = su2::inverse_sl2(g0) * (p - m) / C64::from(2.0 * h);
                    let u = (t - t.adjoint()) * C64::from(0.5);
                    let v = (t + t.adjoint()) * (-I * 0.5);
                    out[r.clone()].copy_from_slice(&su2::coords_real(&u));
                    out[n + r.start..n + r.end].copy_from_slice(&su2::coords_real(&v));
                }
                _ => panic!("group elements from different specs"),
            }
        }
        out
    }
}

/// ad-matrix of `Σ y_k e_k` on su(2), computed from 2×2 commutators.
fn su2_ad_block(y: &[f64]) -> DMatrix<f64> {
    let b = su2::basis();
    let x = su2::algebra_real(y);
    let mut m = DMatrix::zeros(3, 3);
    for col in 0..3 {
        let comm = x * b[col] - b[col] * x;
        let c = su2::coords_real(&comm);
        for row in 0..3 {
            m[(row, col)] = c[row];
        }
    }
    m
}

/// Pairs the eigenvalues of `AᵀA` (each rotation angle θ appears twice) and
/// returns the `count` largest θ.
fn block_root_values(a: &DMatrix<f64>, count: usize) -> Vec<f64> {
    let gram = a.transpose() * a;
    let gram = (&gram + gram.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0))
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    (0..count)
        .map(|k| (0.5 * (ev[2 * k] + ev[2 * k + 1])).sqrt())
        .collect()
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .split('*')
            .map(|tok| match tok.trim().to_ascii_lowercase().as_str() {
                "u1" | "circle" => Ok(Factor::Circle),
                "su2" => Ok(Factor::Su2),
                "r1" | "r" | "line" => Ok(Factor::Line),
                _ => Err(Error::InvalidGroup(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        GroupSpec::new(factors).map_err(|_| Error::InvalidGroup(s.to_string()))
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let toks: Vec<&str> = self.factors.iter().map(|f| f.token()).collect();
        write!(f, "{}", toks.join("*"))
    }
}
