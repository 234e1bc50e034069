//! Lattice connections over the circle, holonomy, based gauge
//! transformations and the reduced Segal–Bargmann transform.
//!
//! A connection is piecewise constant on `N` links with values `A_j` (so the
//! continuum norm is `Σ|A_j|²/N`). Orthonormal coordinates are
//! `x_j = A_j/√N`; the Gaussian measures act on those coordinates.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{nu_density, FiberPoint};
use crate::lie::{
    su2, AlgebraVector, ComplexFactorElement, ComplexGroupElement, Factor, FactorElement,
    GroupElement, GroupSpec, C64,
};
use crate::quadrature::{
    gaussian_stream, group_rule, hermite_scaled, monte_carlo, validate_scaled, Estimate, Validated,
};
use crate::repr::{heat_kernel, heat_kernel_cut, wrapped_gaussian, BandLimitedFunction};

/// Real lattice connection `(A_1, …, A_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeConnection {
    values: Vec<AlgebraVector>,
}

/// Complex lattice connection `Z_j = A_j + i B_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexLatticeConnection {
    values: Vec<Vec<C64>>,
}

fn check_links<T>(spec: &GroupSpec, values: &[T], len: impl Fn(&T) -> usize) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(
            "a lattice needs at least one link".into(),
        ));
    }
    for v in values {
        if len(v) != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: len(v),
            });
        }
    }
    Ok(())
}

impl LatticeConnection {
    pub fn new(spec: &GroupSpec, values: Vec<AlgebraVector>) -> Result<Self> {
        check_links(spec, &values, AlgebraVector::len)?;
        Ok(Self { values })
    }

    /// `A_j = √N x_j` from orthonormal coordinates laid out link by link.
    pub fn from_orthonormal(spec: &GroupSpec, links: usize, x: &[f64]) -> Result<Self> {
        let n = spec.dim();
        if x.len() != n * links {
            return Err(Error::DimensionMismatch {
                expected: n * links,
                got: x.len(),
            });
        }
        let r = (links as f64).sqrt();
        Self::new(
            spec,
            x.chunks(n)
                .map(|c| AlgebraVector(c.iter().map(|v| v * r).collect()))
                .collect(),
        )
    }

    pub fn links(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[AlgebraVector] {
        &self.values
    }

    pub fn complexify(&self) -> ComplexLatticeConnection {
        ComplexLatticeConnection {
            values: self.values.iter().map(AlgebraVector::to_complex).collect(),
        }
    }
}

impl ComplexLatticeConnection {
    pub fn new(spec: &GroupSpec, values: Vec<Vec<C64>>) -> Result<Self> {
        check_links(spec, &values, Vec::len)?;
        Ok(Self { values })
    }

    pub fn from_orthonormal(spec: &GroupSpec, links: usize, z: &[C64]) -> Result<Self> {
        let n = spec.dim();
        if z.len() != n * links {
            return Err(Error::DimensionMismatch {
                expected: n * links,
                got: z.len(),
            });
        }
        let r = (links as f64).sqrt();
        Self::new(
            spec,
            z.chunks(n)
                .map(|c| c.iter().map(|v| v * r).collect())
                .collect(),
        )
    }

    pub fn orthonormal(&self) -> Vec<C64> {
        let r = (self.links() as f64).sqrt();
        self.values.iter().flatten().map(|v| v / r).collect()
    }

    pub fn links(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Vec<C64>] {
        &self.values
    }
}

/// Running ordered product in K_ℂ, one accumulator per factor.
#[derive(Clone)]
enum Acc {
    Angle(C64),
    Matrix(Matrix2<C64>),
    Shift(C64),
}

struct Holonomy<'a> {
    spec: &'a GroupSpec,
    acc: Vec<Acc>,
}

impl<'a> Holonomy<'a> {
    fn new(spec: &'a GroupSpec) -> Self {
        let acc = spec
            .factors()
            .iter()
            .map(|f| match f {
                Factor::Circle => Acc::Angle(C64::new(0.0, 0.0)),
                Factor::Su2 => Acc::Matrix(Matrix2::identity()),
                Factor::Line => Acc::Shift(C64::new(0.0, 0.0)),
            })
            .collect();
        Self { spec, acc }
    }

    /// Right-multiplies by `exp(w)`.
    fn step(&mut self, w: &[C64]) {
        for (i, a) in self.acc.iter_mut().enumerate() {
            let c = &w[self.spec.range(i)];
            match a {
                Acc::Angle(t) | Acc::Shift(t) => *t += c[0],
                Acc::Matrix(m) => *m *= su2::exp(c),
            }
        }
    }

    fn finish(self) -> ComplexGroupElement {
        ComplexGroupElement::new(
            self.acc
                .into_iter()
                .map(|a| match a {
                    Acc::Angle(t) => ComplexFactorElement::Circle(t),
                    Acc::Matrix(m) => ComplexFactorElement::Su2(m),
                    Acc::Shift(t) => ComplexFactorElement::Line(t),
                })
                .collect(),
        )
    }
}

fn to_real(g: &ComplexGroupElement) -> GroupElement {
    GroupElement::new(
        g.parts()
            .iter()
            .map(|p| match p {
                ComplexFactorElement::Circle(t) => FactorElement::Circle(t.re),
                ComplexFactorElement::Su2(m) => FactorElement::Su2(*m),
                ComplexFactorElement::Line(t) => FactorElement::Line(t.re),
            })
            .collect(),
    )
}

/// `h(A) = exp(A_1/N) exp(A_2/N) ⋯ exp(A_N/N)`.
pub fn holonomy(spec: &GroupSpec, a: &LatticeConnection) -> GroupElement {
    to_real(&complex_holonomy(spec, &a.complexify()))
}

/// `h_ℂ(Z)`, the same ordered product in K_ℂ.
pub fn complex_holonomy(spec: &GroupSpec, z: &ComplexLatticeConnection) -> ComplexGroupElement {
    let inv = 1.0 / z.links() as f64;
    let mut h = Holonomy::new(spec);
    let mut w = vec![C64::new(0.0, 0.0); spec.dim()];
    for zj in &z.values {
        for (o, v) in w.iter_mut().zip(zj) {
            *o = v * inv;
        }
        h.step(&w);
    }
    h.finish()
}

/// Based lattice gauge transformation `(l_0, …, l_N)` with `l_0 = l_N = e`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeTransform {
    l: Vec<GroupElement>,
}

impl GaugeTransform {
    pub fn new(spec: &GroupSpec, l: Vec<GroupElement>) -> Result<Self> {
        let e = spec.identity();
        if l.len() < 2 || l[0] != e || l[l.len() - 1] != e {
            return Err(Error::InvalidParameter(
                "gauge transform must be based: l_0 = l_N = e".into(),
            ));
        }
        Ok(Self { l })
    }

    pub fn identity(spec: &GroupSpec, links: usize) -> Self {
        Self {
            l: vec![spec.identity(); links + 1],
        }
    }

    pub fn links(&self) -> usize {
        self.l.len() - 1
    }

    pub fn values(&self) -> &[GroupElement] {
        &self.l
    }
}

/// Factor-wise principal logarithm; `None` outside the branch domain.
pub fn group_log(spec: &GroupSpec, x: &GroupElement) -> Option<AlgebraVector> {
    let mut out = vec![0.0; spec.dim()];
    for (i, p) in x.parts().iter().enumerate() {
        let r = spec.range(i);
        match p {
            FactorElement::Circle(t) => {
                let w = if *t > PI { t - 2.0 * PI } else { *t };
                out[r.start] = w;
            }
            FactorElement::Line(t) => out[r.start] = *t,
            FactorElement::Su2(u) => out[r].copy_from_slice(&su2::log(u)?),
        }
    }
    Some(AlgebraVector(out))
}

/// Link transcription of the gauge action: `u_j ↦ l_{j−1} u_j l_j⁻¹`, and the
/// new `A_j` is `N log` of the new link.
pub fn gauge_action(
    spec: &GroupSpec,
    l: &GaugeTransform,
    a: &LatticeConnection,
) -> Result<LatticeConnection> {
    let n = a.links();
    if l.links() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: l.links(),
        });
    }
    let scale = n as f64;
    let mut out = Vec::with_capacity(n);
    for (j, aj) in a.values.iter().enumerate() {
        let u = spec.exp(&aj.scaled(1.0 / scale));
        let v = l.l[j].mul(&u).mul(&l.l[j + 1].inverse());
        let log = group_log(spec, &v).ok_or(Error::LogBranchViolation { link: j })?;
        out.push(log.scaled(scale));
    }
    LatticeConnection::new(spec, out)
}

/// Regularization `s > ℏ/2` with `r = 2(s − ℏ/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularizedParams {
    pub s: f64,
    pub hbar: f64,
    pub r: f64,
}

impl RegularizedParams {
    pub fn new(s: f64, hbar: f64) -> Result<Self> {
        if hbar.is_nan() || hbar <= 0.0 || s.is_nan() || s <= hbar / 2.0 || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need s > ℏ/2 > 0, got s = {s}, ℏ = {hbar}"
            )));
        }
        Ok(Self {
            s,
            hbar,
            r: 2.0 * (s - hbar / 2.0),
        })
    }
}

fn tensor_hermite_sum<F>(f: &F, z: &[C64], hbar: f64, order: usize) -> (C64, f64)
where
    F: Fn(&[C64]) -> C64,
{
    let d = z.len();
    let (x, w) = hermite_scaled(order, 2.0 * hbar);
    let norm = (2.0 * PI * hbar).powf(-(d as f64) / 2.0);
    let mut idx = vec![0usize; d];
    let mut pt = z.to_vec();
    let (mut sum, mut mag) = (C64::new(0.0, 0.0), 0.0);
    for _ in 0..order.pow(d as u32) {
        let mut wt = norm;
        for k in 0..d {
            pt[k] = z[k] + x[idx[k]];
            wt *= w[idx[k]];
        }
        let v = f(&pt) * wt;
        sum += v;
        mag += v.norm();
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < order {
                break;
            }
            idx[k] = 0;
        }
    }
    (sum, mag)
}

/// `S_ℏf(z) = (2πℏ)^{−d/2} ∫ e^{−(z−x)²/2ℏ} f(x) dx` on ℝ^d, where `f` is
/// supplied through its entire extension and the contour is shifted to
/// `x ↦ z + x`. Tensor Gauss–Hermite, checked under order doubling.
pub fn finite_sb_transform<F>(
    f: F,
    z: &[C64],
    hbar: f64,
    order: usize,
    tol: Option<f64>,
) -> Result<Validated<C64>>
where
    F: Fn(&[C64]) -> C64,
{
    if hbar <= 0.0 {
        return Err(Error::InvalidParameter(format!("hbar = {hbar}")));
    }
    validate_scaled(order, tol, |o| Ok(tensor_hermite_sum(&f, z, hbar, o)))
}

/// Monte Carlo version of [`finite_sb_transform`]: the mean of `f(z + √ℏ ξ)`.
pub fn finite_sb_monte_carlo<F>(
    f: F,
    z: &[C64],
    hbar: f64,
    samples: usize,
    seed: u64,
) -> Result<Estimate>
where
    F: Fn(&[C64]) -> C64 + Sync + Send,
{
    let s = hbar.sqrt();
    monte_carlo(seed, samples, z.len(), |xi| {
        let p: Vec<C64> = z.iter().zip(xi).map(|(a, b)| a + s * b).collect();
        f(&p)
    })
}

/// `h_ℂ(Z + √ℏ W)` with the noise resolved on `substeps` sub-links per link;
/// `xi` holds `dim·N·substeps` standard normals. With `coarsen`, consecutive
/// pairs of normals are merged into one sub-link of twice the length, which
/// gives the coupled half-resolution path.
fn noisy_holonomy(
    spec: &GroupSpec,
    z: &ComplexLatticeConnection,
    hbar: f64,
    substeps: usize,
    xi: &[f64],
    coarsen: bool,
) -> ComplexGroupElement {
    let n = spec.dim();
    let (steps, group) = if coarsen {
        (substeps / 2, 2)
    } else {
        (substeps, 1)
    };
    let fine = (z.links() * steps) as f64;
    let sigma = (hbar / fine).sqrt();
    let merge = 1.0 / (group as f64).sqrt();
    let mut h = Holonomy::new(spec);
    let mut w = vec![C64::new(0.0, 0.0); n];
    for (j, zj) in z.values.iter().enumerate() {
        for m in 0..steps {
            for k in 0..n {
                let mut e = 0.0;
                for g in 0..group {
                    e += xi[(j * substeps + m * group + g) * n + k];
                }
                w[k] = zj[k] / fine + sigma * merge * e;
            }
            h.step(&w);
        }
    }
    h.finish()
}

/// One Monte Carlo sample of `φ_ℂ` along the noisy holonomy; with
/// `extrapolate`, the Richardson combination `2φ(fine) − φ(coarse)` on coupled
/// paths, which cancels the first-order discretization bias.
fn mc_sample<F>(
    spec: &GroupSpec,
    z: &ComplexLatticeConnection,
    hbar: f64,
    substeps: usize,
    extrapolate: bool,
    xi: &[f64],
    f: &F,
) -> C64
where
    F: Fn(&ComplexGroupElement) -> C64,
{
    let fine = f(&noisy_holonomy(spec, z, hbar, substeps, xi, false));
    if extrapolate {
        2.0 * fine - f(&noisy_holonomy(spec, z, hbar, substeps, xi, true))
    } else {
        fine
    }
}

/// How the lattice Gaussian integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Sampler {
    /// Tensor Gauss–Hermite over the `dim·N` orthonormal coordinates.
    Deterministic { order: usize },
    /// Monte Carlo with the link noise refined into `substeps` sub-links,
    /// optionally Richardson-extrapolated against the half-resolution path.
    MonteCarlo {
        samples: usize,
        seed: u64,
        substeps: usize,
        extrapolate: bool,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionPoint {
    pub estimate: (f64, f64),
    pub reference: (f64, f64),
    pub rel_err: f64,
    /// Zero for deterministic rules.
    pub stderr: f64,
    /// `|estimate − reference| / stderr`, zero for deterministic rules.
    pub z_score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    pub group: String,
    pub links: usize,
    pub params: RegularizedParams,
    pub sampler: Sampler,
    pub points: Vec<ReductionPoint>,
    pub max_rel_err: f64,
    pub max_z_score: f64,
    /// `max stderr / |reference|`.
    pub max_relative_stderr: f64,
}

fn check_substeps(substeps: usize, extrapolate: bool) -> Result<usize> {
    if substeps == 0 || (extrapolate && substeps % 2 == 1) {
        return Err(Error::InvalidParameter(format!(
            "substeps = {substeps} (extrapolation needs an even count)"
        )));
    }
    Ok(substeps)
}

/// Points of `𝒜_ℂ` drawn from `M_{s,ℏ}`: real and imaginary orthonormal
/// coordinates are centred Gaussians of variance `r/2` and `ℏ/2`.
pub fn sample_connections(
    spec: &GroupSpec,
    links: usize,
    params: &RegularizedParams,
    count: usize,
    seed: u64,
) -> Result<Vec<ComplexLatticeConnection>> {
    let d = spec.dim() * links;
    let mut re = gaussian_stream(seed, d, params.r / 2.0)?;
    let mut im = gaussian_stream(seed.wrapping_add(1), d, params.hbar / 2.0)?;
    (0..count)
        .map(|_| {
            let (a, b) = (re.next_vec(), im.next_vec());
            let z: Vec<C64> = a.iter().zip(&b).map(|(x, y)| C64::new(*x, *y)).collect();
            ComplexLatticeConnection::from_orthonormal(spec, links, &z)
        })
        .collect()
}

/// Compares `S_ℏ(φ∘h)(Z)` with `(e^{ℏΔ/2}φ)_ℂ(h_ℂ(Z))` at the given points.
pub fn reduced_transform_check(
    phi: &BandLimitedFunction,
    params: &RegularizedParams,
    sampler: Sampler,
    points: &[ComplexLatticeConnection],
) -> Result<ReductionReport> {
    let spec = phi.spec().clone();
    let links = points
        .first()
        .map(ComplexLatticeConnection::links)
        .unwrap_or(1);
    let continued = phi.analytic_continue(params.hbar);
    let holo = crate::repr::HolomorphicFunction::from_coefficients(phi.clone());
    let mut out = Vec::with_capacity(points.len());
    for z in points {
        let reference = continued.eval(&complex_holonomy(&spec, z));
        let (est, stderr) = match sampler {
            Sampler::Deterministic { order } => {
                let f = |x: &[C64]| {
                    let c = ComplexLatticeConnection::from_orthonormal(&spec, z.links(), x)
                        .expect("shape");
                    holo.eval(&complex_holonomy(&spec, &c))
                };
                (
                    finite_sb_transform(f, &z.orthonormal(), params.hbar, order, Some(1e-9))?.value,
                    0.0,
                )
            }
            Sampler::MonteCarlo {
                samples,
                seed,
                substeps,
                extrapolate,
            } => {
                let m = check_substeps(substeps, extrapolate)?;
                let dim = spec.dim() * z.links() * m;
                let e = monte_carlo(seed, samples, dim, |xi| {
                    mc_sample(&spec, z, params.hbar, m, extrapolate, xi, &|g| holo.eval(g))
                })?;
                (e.mean, e.stderr)
            }
        };
        let diff = (est - reference).norm();
        out.push(ReductionPoint {
            estimate: (est.re, est.im),
            reference: (reference.re, reference.im),
            rel_err: diff / reference.norm(),
            stderr,
            z_score: if stderr > 0.0 { diff / stderr } else { 0.0 },
        });
    }
    Ok(ReductionReport {
        group: spec.to_string(),
        links,
        params: *params,
        sampler,
        max_rel_err: out.iter().map(|p| p.rel_err).fold(0.0, f64::max),
        max_z_score: out.iter().map(|p| p.z_score).fold(0.0, f64::max),
        max_relative_stderr: out
            .iter()
            .map(|p| p.stderr / C64::new(p.reference.0, p.reference.1).norm())
            .fold(0.0, f64::max),
        points: out,
    })
}

/// `∫|φ(h(A))|² dP_s` against `∫_K |φ|² dρ_s`.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeNormReport {
    pub lattice: f64,
    pub group: f64,
    pub rel_err: f64,
    pub stderr: f64,
}

pub fn lattice_norm_check(
    phi: &BandLimitedFunction,
    links: usize,
    s: f64,
    sampler: Sampler,
    group_order: usize,
) -> Result<LatticeNormReport> {
    let spec = phi.spec().clone();
    if s <= 0.0 {
        return Err(Error::InvalidParameter(format!("s = {s}")));
    }
    let (lattice, stderr) = match sampler {
        Sampler::Deterministic { order } => {
            let f = |x: &[C64]| {
                let re: Vec<f64> = x.iter().map(|v| v.re).collect();
                let a = LatticeConnection::from_orthonormal(&spec, links, &re).expect("shape");
                C64::from(phi.eval(&holonomy(&spec, &a)).norm_sqr())
            };
            let zero = vec![C64::new(0.0, 0.0); spec.dim() * links];
            (
                finite_sb_transform(f, &zero, s, order, Some(1e-9))?
                    .value
                    .re,
                0.0,
            )
        }
        Sampler::MonteCarlo {
            samples,
            seed,
            substeps,
            extrapolate,
        } => {
            let m = check_substeps(substeps, extrapolate)?;
            let zero = ComplexLatticeConnection::new(
                &spec,
                vec![vec![C64::new(0.0, 0.0); spec.dim()]; links],
            )?;
            let e = monte_carlo(seed, samples, spec.dim() * links * m, |xi| {
                mc_sample(&spec, &zero, s, m, extrapolate, xi, &|g| {
                    C64::from(phi.eval(&to_real(g)).norm_sqr())
                })
            })?;
            (e.mean.re, e.stderr)
        }
    };
    let cut = heat_kernel_cut(&spec, s)?;
    let rule = group_rule(&spec, group_order)?;
    let mut group = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        group += w * phi.eval(x).norm_sqr() * heat_kernel(&spec, x, s, cut)?;
    }
    Ok(LatticeNormReport {
        lattice,
        group,
        rel_err: (lattice - group).abs() / group,
        stderr,
    })
}

/// Circle push-forwards of the regularized measures against their limits.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureLimitReport {
    pub hbar: f64,
    pub s_values: Vec<f64>,
    /// `sup |2π·μ_{s,ℏ} − ν_ℏ|` over `(θ, y)`.
    pub mu_distances: Vec<f64>,
    /// `sup |ρ_s − 1/2π|` over θ.
    pub rho_distances: Vec<f64>,
    /// `sup_y |∫μ_{s,ℏ} dθ − (πℏ)^{−1/2}e^{−y²/ℏ}|`, worst over s.
    pub marginal_error: f64,
    pub strictly_decreasing: bool,
}

/// Density of `μ_{s,ℏ}` on the circle's `T*(K)` in `(θ, y)` coordinates:
/// wrapped Gaussian of variance `r/2` in θ times Gaussian of variance `ℏ/2`.
pub fn circle_mu_density(theta: f64, y: f64, params: &RegularizedParams) -> f64 {
    wrapped_gaussian(theta, params.r / 2.0) * (-y * y / params.hbar).exp()
        / (PI * params.hbar).sqrt()
}

pub fn measure_limit_check(s_list: &[f64], hbar: f64) -> Result<MeasureLimitReport> {
    let spec: GroupSpec = "u1".parse()?;
    let thetas: Vec<f64> = (0..256).map(|i| 2.0 * PI * i as f64 / 256.0).collect();
    let ys: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.1 * hbar.sqrt()).collect();
    let (mut mu_d, mut rho_d) = (Vec::new(), Vec::new());
    let mut marginal = 0.0f64;
    for &s in s_list {
        let p = RegularizedParams::new(s, hbar)?;
        let mut dmu = 0.0f64;
        for &t in &thetas {
            let x = spec.exp(&AlgebraVector(vec![t]));
            for &y in &ys {
                let nu = nu_density(
                    &spec,
                    &FiberPoint::new(x.clone(), AlgebraVector(vec![y])),
                    hbar,
                );
                dmu = dmu.max((2.0 * PI * circle_mu_density(t, y, &p) - nu).abs());
            }
        }
        for &y in &ys {
            let m: f64 = thetas
                .iter()
                .map(|&t| circle_mu_density(t, y, &p))
                .sum::<f64>()
                * 2.0
                * PI
                / 256.0;
            marginal = marginal.max((m - (-y * y / hbar).exp() / (PI * hbar).sqrt()).abs());
        }
        let drho = thetas
            .iter()
            .map(|&t| (wrapped_gaussian(t, s) - 1.0 / (2.0 * PI)).abs())
            .fold(0.0, f64::max);
        mu_d.push(dmu);
        rho_d.push(drho);
    }
    let dec = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    Ok(MeasureLimitReport {
        hbar,
        s_values: s_list.to_vec(),
        strictly_decreasing: dec(&mu_d) && dec(&rho_d),
        mu_distances: mu_d,
        rho_distances: rho_d,
        marginal_error: marginal,
    })
}
