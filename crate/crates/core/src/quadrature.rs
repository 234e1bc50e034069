//! Deterministic rules over K and 𝔨, and seeded Gaussian Monte Carlo.
//!
//! SU(2) is parametrized by Euler angles
//! `U = e^{-iφσ₃/2} e^{-iθσ₂/2} e^{-iψσ₃/2}` with `φ ∈ [0, 2π)`,
//! `θ ∈ [0, π]`, `ψ ∈ [0, 4π)`, which covers the group once. Haar measure is
//! proportional to `sin θ dθ dφ dψ`, whose total mass is `16π²`. The rule is
//! trapezoidal in both azimuths and Gauss–Legendre in `cos θ`.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, Factor, FactorElement, GroupElement, GroupSpec, C64};
use crate::par;

/// Default group-rule order.
pub const DEFAULT_GROUP_ORDER: usize = 32;
/// Default Gauss–Hermite points per fiber axis.
pub const DEFAULT_FIBER_ORDER: usize = 24;

/// Gauss–Hermite nodes and weights for the weight `e^{-x²}` on ℝ.
///
/// Newton iteration on the orthonormal Hermite recurrence, seeded with the
/// usual asymptotic guesses.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "order must be positive");
    let n = order;
    let nf = n as f64;
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    // ascending order
    x.reverse();
    w.reverse();
    (x, w)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "order must be positive");
    let n = order;
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleTarget {
    Group,
    Fiber,
}

/// Nodes and positive weights; integrals are `Σ w_i f(node_i)`.
#[derive(Debug, Clone)]
pub struct QuadratureRule<P> {
    pub nodes: Vec<P>,
    pub weights: Vec<f64>,
    pub order: usize,
    pub target: RuleTarget,
    /// `s` in the weight `e^{-|Y|²/s}` carried by fiber rules.
    pub gaussian_scale: Option<f64>,
}

impl<P: Sync> QuadratureRule<P> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ w_i f(node_i)` with a chunked deterministic reduction.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&P) -> f64 + Sync + Send,
    {
        par::map_chunks(self.len(), par::CHUNK, |r| {
            r.map(|i| self.weights[i] * f(&self.nodes[i])).sum::<f64>()
        })
        .into_iter()
        .sum()
    }

    pub fn integrate_complex<F>(&self, f: F) -> C64
    where
        F: Fn(&P) -> C64 + Sync + Send,
    {
        self.integrate_complex_abs(f).0
    }

    /// `Σ w_i f(node_i)` together with `Σ w_i |f(node_i)|`.
    pub fn integrate_complex_abs<F>(&self, f: F) -> (C64, f64)
    where
        F: Fn(&P) -> C64 + Sync + Send,
    {
        par::map_chunks(self.len(), par::CHUNK, |r| {
            r.fold((C64::new(0.0, 0.0), 0.0), |(s, m), i| {
                let v = f(&self.nodes[i]) * self.weights[i];
                (s + v, m + v.norm())
            })
        })
        .into_iter()
        .fold((C64::new(0.0, 0.0), 0.0), |(s, m), (a, b)| (s + a, m + b))
    }
}

fn su2_euler(phi: f64, theta: f64, psi: f64) -> Matrix2<C64> {
    let rz = |a: f64| {
        Matrix2::new(
            C64::from_polar(1.0, -a / 2.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::from_polar(1.0, a / 2.0),
        )
    };
    let (s, c) = (theta / 2.0).sin_cos();
    let ry = Matrix2::new(
        C64::new(c, 0.0),
        C64::new(-s, 0.0),
        C64::new(s, 0.0),
        C64::new(c, 0.0),
    );
    rz(phi) * ry * rz(psi)
}

/// One-factor rule as (element, weight) pairs.
fn factor_rule(f: Factor, order: usize) -> Result<Vec<(FactorElement, f64)>> {
    match f {
        Factor::Circle => Ok((0..order)
            .map(|i| {
                (
                    FactorElement::Circle(2.0 * PI * i as f64 / order as f64),
                    2.0 * PI / order as f64,
                )
            })
            .collect()),
        Factor::Su2 => {
            let vol = f.volume().expect("compact");
            let (cx, cw) = gauss_legendre(order);
            let n = order as f64;
            let base = vol / (16.0 * PI * PI) * (2.0 * PI / n) * (4.0 * PI / n);
            let mut out = Vec::with_capacity(order * order * order);
            for a in 0..order {
                let phi = 2.0 * PI * a as f64 / n;
                for (c, wc) in cx.iter().zip(&cw) {
                    let theta = c.clamp(-1.0, 1.0).acos();
                    for b in 0..order {
                        let psi = 4.0 * PI * b as f64 / n;
                        out.push((FactorElement::Su2(su2_euler(phi, theta, psi)), base * wc));
                    }
                }
            }
            Ok(out)
        }
        Factor::Line => Err(Error::NonCompact),
    }
}

/// Product rule over a compact group, normalized to total mass `vol(K)`.
pub fn group_rule(spec: &GroupSpec, order: usize) -> Result<QuadratureRule<GroupElement>> {
    if order < 2 {
        return Err(Error::InvalidParameter(format!("group order {order} < 2")));
    }
    let mut nodes: Vec<(Vec<FactorElement>, f64)> = vec![(Vec::new(), 1.0)];
    for f in spec.factors() {
        let rule = factor_rule(*f, order)?;
        nodes = nodes
            .into_iter()
            .flat_map(|(prefix, w)| {
                rule.iter().map(move |(e, we)| {
                    let mut p = prefix.clone();
                    p.push(e.clone());
                    (p, w * we)
                })
            })
            .collect();
    }
    let (nodes, weights) = nodes
        .into_iter()
        .map(|(p, w)| (GroupElement::new(p), w))
        .unzip();
    Ok(QuadratureRule {
        nodes,
        weights,
        order,
        target: RuleTarget::Group,
        gaussian_scale: None,
    })
}

/// One-dimensional Gauss–Hermite rule for the weight `e^{-y²/s}`.
pub fn hermite_scaled(order: usize, s: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_hermite(order);
    let r = s.sqrt();
    (
        x.iter().map(|v| v * r).collect(),
        w.iter().map(|v| v * r).collect(),
    )
}

/// Tensor Gauss–Hermite rule for the weight `e^{-|Y|²/s}` on 𝔨 ≅ ℝⁿ.
/// The weights include the Gaussian, so integrands are supplied without it.
pub fn fiber_rule(spec: &GroupSpec, s: f64, order: usize) -> Result<QuadratureRule<AlgebraVector>> {
    if s <= 0.0 || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("fiber scale {s}")));
    }
    if order < 4 {
        return Err(Error::InvalidParameter(format!("fiber order {order} < 4")));
    }
    let n = spec.dim();
    let (x, w) = hermite_scaled(order, s);
    let total = order.pow(n as u32);
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        nodes.push(AlgebraVector(idx.iter().map(|&i| x[i]).collect()));
        weights.push(idx.iter().map(|&i| w[i]).product());
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < order {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        order,
        target: RuleTarget::Fiber,
        gaussian_scale: Some(s),
    })
}

/// Result of a quadrature evaluated at `order` and re-evaluated at `2·order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validated<T> {
    pub value: T,
    /// Relative change under order doubling.
    pub delta: f64,
}

/// Default relative tolerance for [`validate`].
pub const DOUBLING_TOLERANCE: f64 = 1e-6;

/// Evaluates at `order` and `2·order`; fails when the relative change exceeds
/// `tol`.
pub fn validate<F>(order: usize, tol: Option<f64>, eval: F) -> Result<Validated<C64>>
where
    F: Fn(usize) -> Result<C64>,
{
    validate_scaled(order, tol, |o| eval(o).map(|v| (v, 0.0)))
}

/// Like [`validate`], with `eval` also returning `∫|integrand|`. The change is
/// measured relative to the larger of the value and that magnitude, so
/// integrals that cancel to zero are judged against their natural scale.
pub fn validate_scaled<F>(order: usize, tol: Option<f64>, eval: F) -> Result<Validated<C64>>
where
    F: Fn(usize) -> Result<(C64, f64)>,
{
    let limit = tol.unwrap_or(DOUBLING_TOLERANCE);
    let (base, m1) = eval(order)?;
    let (fine, m2) = eval(2 * order)?;
    let diff = (fine - base).norm();
    let scale = base.norm().max(fine.norm()).max(m1).max(m2);
    let delta = if diff == 0.0 { 0.0 } else { diff / scale };
    if delta > limit || !delta.is_finite() {
        return Err(Error::QuadratureUnderResolved {
            order,
            delta,
            limit,
        });
    }
    Ok(Validated { value: base, delta })
}

/// Reproducible source of scaled standard-normal vectors.
#[derive(Debug, Clone)]
pub struct MonteCarloStream {
    rng: ChaCha8Rng,
    seed: u64,
    dim: usize,
    scale: f64,
}

/// A stream of `N(0, scale·I)` vectors in dimension `dim`.
pub fn gaussian_stream(seed: u64, dim: usize, scale: f64) -> Result<MonteCarloStream> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension 0".into()));
    }
    if scale <= 0.0 {
        return Err(Error::InvalidParameter(format!("scale {scale}")));
    }
    Ok(MonteCarloStream {
        rng: ChaCha8Rng::seed_from_u64(seed),
        seed,
        dim,
        scale,
    })
}

impl MonteCarloStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Per-axis variance.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        let sd = self.scale.sqrt();
        for v in out.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            *v = z * sd;
        }
    }

    pub fn next_vec(&mut self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        self.fill(&mut v);
        v
    }
}

/// Mean and standard error of a complex Monte Carlo estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: C64,
    pub stderr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: C64,
    sum_abs2: f64,
}

/// Samples per Monte Carlo batch; each batch has its own stream.
pub const BATCH: usize = 16_384;

/// Averages `f` over `n` draws. Batch `b` uses a stream seeded with
/// `seed ^ b`; batch partials are combined in batch order, so the result
/// is identical for any thread count.
pub fn monte_carlo<F>(seed: u64, n: usize, dim: usize, f: F) -> Result<Estimate>
where
    F: Fn(&[f64]) -> C64 + Sync + Send,
{
    if n < 2 {
        return Err(Error::InvalidParameter(format!("{n} samples")));
    }
    let batches = n.div_ceil(BATCH);
    let parts = par::map_chunks(batches, 1, |r| {
        let mut m = Moments::default();
        for b in r {
            let count = BATCH.min(n - b * BATCH);
            let mut stream = gaussian_stream(seed ^ b as u64, dim, 1.0).expect("valid stream");
            let mut xi = vec![0.0; dim];
            for _ in 0..count {
                stream.fill(&mut xi);
                let v = f(&xi);
                m.n += 1;
                m.sum += v;
                m.sum_abs2 += v.norm_sqr();
            }
        }
        m
    });
    let total = parts.into_iter().fold(Moments::default(), |a, b| Moments {
        n: a.n + b.n,
        sum: a.sum + b.sum,
        sum_abs2: a.sum_abs2 + b.sum_abs2,
    });
    let nf = total.n as f64;
    let mean = total.sum / nf;
    let var = ((total.sum_abs2 - nf * mean.norm_sqr()) / (nf - 1.0)).max(0.0);
    Ok(Estimate {
        mean,
        stderr: (var / nf).sqrt(),
        n: total.n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::{irrep_matrix, BandLimitedFunction, IrrepLabel, LabelPart};
    use rand::Rng;

    fn spec(s: &str) -> GroupSpec {
        s.parse().unwrap()
    }

    #[test]
    fn hermite_small_orders_match_tables() {
        let (x, w) = gauss_hermite(2);
        assert!((x[1] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - PI.sqrt() / 2.0).abs() < 1e-15);
        let (x, w) = gauss_hermite(3);
        assert!((x[2] - 1.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(x[1], 0.0);
        assert!((w[1] - 2.0 * PI.sqrt() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hermite_integrates_moments_exactly() {
        // ∫x^{2k} e^{-x²} = Γ(k + 1/2)
        for order in [8, 24, 48] {
            let (x, w) = gauss_hermite(order);
            let mut gamma = PI.sqrt();
            for k in 0..order {
                let m: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(x, w)| w * x.powi(2 * k as i32))
                    .sum();
                assert!((m - gamma).abs() < 1e-12 * gamma, "order {order}, k {k}");
                gamma *= k as f64 + 0.5;
            }
        }
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for k in 0..14 {
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 0 {
                2.0 / (k as f64 + 1.0)
            } else {
                0.0
            };
            assert!((m - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn fiber_rule_masses() {
        let g = spec("su2");
        let r = fiber_rule(&g, 1.0, 12).unwrap();
        assert!((r.mass() - PI.powf(1.5)).abs() < 1e-12);
        let m2 = r.integrate(|y| y.norm_sq());
        assert!((m2 - 1.5 * PI.powf(1.5)).abs() < 1e-12);
        for k in 0..3 {
            assert!(r.integrate(|y| y.0[k]).abs() < 1e-15);
        }
        let s = 0.37;
        let r = fiber_rule(&spec("u1*su2"), s, 6).unwrap();
        assert!(((r.mass() - (PI * s).powi(2)) / (PI * s).powi(2)).abs() < 1e-12);
        assert!(fiber_rule(&g, -1.0, 8).is_err());
        assert!(fiber_rule(&g, 1.0, 3).is_err());
    }

    #[test]
    fn group_rule_mass_and_orthogonality() {
        for s in ["u1", "su2", "u1*su2"] {
            let g = spec(s);
            let r = group_rule(&g, 8).unwrap();
            let vol = g.volume().unwrap();
            assert!((r.mass() - vol).abs() < 1e-12 * vol);
        }
        let g = spec("u1");
        let r = group_rule(&g, 16).unwrap();
        for k in 1..16 {
            let f = BandLimitedFunction::entry(&g, IrrepLabel::circle(k), 0, 0).unwrap();
            assert!(r.integrate_complex(|x| f.eval(x)).norm() < 1e-13);
        }
        assert!(group_rule(&spec("r1"), 8).is_err());
        assert!(group_rule(&g, 1).is_err());
    }

    #[test]
    fn su2_euler_nodes_are_special_unitary() {
        let r = group_rule(&spec("su2"), 4).unwrap();
        for x in &r.nodes {
            let FactorElement::Su2(u) = &x.parts()[0] else {
                unreachable!()
            };
            assert!(
                (u.adjoint() * u - Matrix2::identity())
                    .map(|c| c.norm())
                    .max()
                    < 1e-14
            );
            assert!((u.determinant() - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn su2_schur_orthogonality() {
        let g = spec("su2");
        let r = group_rule(&g, 12).unwrap();
        let vol = g.volume().unwrap();
        for two_j in 0..4u32 {
            let label = IrrepLabel(vec![LabelPart::Su2(two_j)]);
            let d = label.dim();
            let mats: Vec<_> = r.nodes.iter().map(|x| irrep_matrix(&label, x)).collect();
            for m in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let v: C64 = mats
                            .iter()
                            .zip(&r.weights)
                            .map(|(p, w)| p[(m, k)] * p[(m, l)].conj() * *w)
                            .sum();
                        let exact = if k == l { vol / d as f64 } else { 0.0 };
                        assert!((v - exact).norm() < 1e-10 * vol);
                    }
                }
            }
        }
    }

    #[test]
    fn group_rule_is_left_invariant() {
        let g = spec("su2");
        let r = group_rule(&g, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shift = g.exp(&AlgebraVector(
            (0..3).map(|_| rng.random_range(-2.0..2.0)).collect(),
        ));
        let f = BandLimitedFunction::entry(&g, IrrepLabel::su2(2), 0, 1)
            .unwrap()
            .add(&BandLimitedFunction::entry(&g, IrrepLabel::su2(2), 1, 1).unwrap());
        let h = |x: &GroupElement| f.eval(x).norm_sqr();
        let a = r.integrate(h);
        let b = r.integrate(|x| h(&shift.mul(x)));
        assert!((a - b).abs() < 1e-10 * a);
    }

    #[test]
    fn stream_is_reproducible() {
        let mut a = gaussian_stream(42, 3, 2.0).unwrap();
        let mut b = gaussian_stream(42, 3, 2.0).unwrap();
        for _ in 0..1000 {
            assert_eq!(a.next_vec(), b.next_vec());
        }
        assert!(gaussian_stream(1, 0, 1.0).is_err());
    }

    #[test]
    fn stream_moments() {
        let n = 1_000_000;
        let scale = 2.5;
        let mut s = gaussian_stream(7, 2, scale).unwrap();
        let (mut m, mut v) = ([0.0; 2], [0.0; 2]);
        for _ in 0..n {
            let x = s.next_vec();
            for k in 0..2 {
                m[k] += x[k];
                v[k] += x[k] * x[k];
            }
        }
        let nf = n as f64;
        for k in 0..2 {
            assert!((m[k] / nf).abs() < 4.0 * scale.sqrt() / nf.sqrt());
            assert!((v[k] / nf - scale).abs() < 0.01 * scale);
        }
    }

    #[test]
    fn monte_carlo_is_deterministic_and_calibrated() {
        let f = |x: &[f64]| C64::new(x[0] * x[0], 0.0);
        let a = monte_carlo(11, 100_000, 1, f).unwrap();
        let b = monte_carlo(11, 100_000, 1, f).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n, 100_000);
        assert!((a.mean.re - 1.0).abs() < 4.0 * a.stderr);
        // Var(x²) = 2 for a standard normal
        assert!((a.stderr - (2.0f64 / 1e5).sqrt()).abs() < 0.05 * a.stderr);
    }

    #[test]
    fn validate_reports_doubling_delta() {
        let ok = validate(8, None, |n| Ok(C64::new(1.0 + 1e-9 / n as f64, 0.0))).unwrap();
        assert!(ok.delta < 1e-9);
        assert_eq!(ok.value, C64::new(1.0 + 1e-9 / 8.0, 0.0));
        let bad = validate(8, Some(1e-6), |n| Ok(C64::new(1.0 / n as f64, 0.0)));
        assert!(matches!(bad, Err(Error::QuadratureUnderResolved { .. })));
    }
}
