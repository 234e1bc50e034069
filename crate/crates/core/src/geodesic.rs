//! Geodesic flow on T*(K) and its imaginary-time continuation.
//!
//! For a matrix entry `f(x) = tr(Cᵀ π(x))` the n-fold Poisson bracket with
//! `κ` reduces to a derivative along the flow,
//! `{…{f∘π, κ}…, κ}ₙ(x, Y) = 2ⁿ (d/dt)ⁿ f(x e^{tY})|₀ = 2ⁿ tr(Cᵀ π(x) dπ(Y)ⁿ)`,
//! so the series `Σ (i/2)ⁿ/n! {…}ₙ` is the exponential series of
//! `π(x) e^{i dπ(Y)}`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::geometry::FiberPoint;
use crate::lie::{GroupSpec, C64};
use crate::repr::{irrep_algebra, irrep_matrix, BandLimitedFunction, HolomorphicFunction};

/// `Γ_t(x, Y) = (x e^{tY}, Y)`.
pub fn geodesic_flow(spec: &GroupSpec, p: &FiberPoint, t: f64) -> FiberPoint {
    FiberPoint::new(p.x.mul(&spec.exp(&p.y.scaled(t))), p.y.clone())
}

/// `f_ℂ(x, Y) = f(x e^{iY})`, the holomorphic extension evaluated at `Φ(x, Y)`.
pub fn imaginary_time_continuation(f: &BandLimitedFunction, p: &FiberPoint) -> C64 {
    HolomorphicFunction::from_coefficients(f.clone()).eval(&f.spec().phi(&p.x, &p.y))
}

/// Partial sums of the bracket series at one point.
#[derive(Debug, Clone, Serialize)]
pub struct FlowSeriesResult {
    /// `partial_sums[N] = Σ_{n ≤ N}` term n.
    pub partial_sums: Vec<(f64, f64)>,
    pub limit: (f64, f64),
    pub terms_used: usize,
}

impl FlowSeriesResult {
    pub fn partial(&self, n: usize) -> C64 {
        let (re, im) = self.partial_sums[n];
        C64::new(re, im)
    }

    pub fn limit(&self) -> C64 {
        C64::new(self.limit.0, self.limit.1)
    }

    /// `|S_N − limit|` for every N.
    pub fn remainders(&self) -> Vec<f64> {
        let l = self.limit();
        (0..self.partial_sums.len())
            .map(|n| (self.partial(n) - l).norm())
            .collect()
    }

    /// Cancellation floor below which remainders are roundoff.
    pub fn roundoff_floor(&self) -> f64 {
        let peak = (0..self.partial_sums.len())
            .map(|n| self.partial(n).norm())
            .fold(self.limit().norm(), f64::max);
        1e3 * f64::EPSILON * peak.max(f64::MIN_POSITIVE)
    }
}

/// The individual terms `(i/2)ⁿ/n! {…{f∘π, κ}…, κ}ₙ(p)` for `n = 0..=n_max`.
pub fn bracket_terms(f: &BandLimitedFunction, p: &FiberPoint, n_max: usize) -> Vec<C64> {
    let spec = f.spec();
    let mut terms = vec![C64::new(0.0, 0.0); n_max + 1];
    let y = p.y.to_complex();
    for (label, c) in f.coefficient_blocks() {
        let d = irrep_algebra(spec, &label, &y) * C64::i();
        // P_n = π(x) (i dπ(Y))ⁿ / n!
        let mut pn = irrep_matrix(&label, &p.x);
        for (n, term) in terms.iter_mut().enumerate() {
            if n > 0 {
                pn = pn * &d / C64::from(n as f64);
            }
            *term += (c.transpose() * &pn).trace();
        }
    }
    terms
}

pub fn bracket_series(f: &BandLimitedFunction, p: &FiberPoint, n_max: usize) -> FlowSeriesResult {
    let n_max = n_max.max(1);
    let terms = bracket_terms(f, p, n_max);
    let mut sum = C64::new(0.0, 0.0);
    let partial_sums = terms
        .iter()
        .map(|t| {
            sum += t;
            (sum.re, sum.im)
        })
        .collect();
    let limit = imaginary_time_continuation(f, p);
    FlowSeriesResult {
        partial_sums,
        limit: (limit.re, limit.im),
        terms_used: n_max + 1,
    }
}

/// Least-squares fit `log R_N ≈ c₀ + c₁ N + c₂ log (N+1)!` over remainders
/// above the roundoff floor. Factorial decay shows up as `c₂ ≈ −1`.
///
/// Only the upper half of the resolved range enters the fit: for small N the
/// remainder still carries the `1 + r/(N+2) + …` tail factor, which biases
/// `c₂` upward.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    pub intercept: f64,
    /// `c₁ = log R`, the geometric rate.
    pub log_rate: f64,
    /// `c₂`, the coefficient of `log (N+1)!`.
    pub log_factorial_coef: f64,
    pub points: usize,
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

pub fn fit_factorial_decay(remainders: &[f64], floor: f64) -> Option<DecayFit> {
    let pts: Vec<(usize, f64)> = remainders
        .iter()
        .enumerate()
        .filter(|(_, r)| **r > floor)
        .map(|(n, r)| (n, r.ln()))
        .collect();
    let last = pts.last().map(|p| p.0).unwrap_or(0);
    let pts: Vec<(usize, f64)> = pts.into_iter().filter(|p| 2 * p.0 >= last).collect();
    if pts.len() < 4 {
        return None;
    }
    let a = DMatrix::from_fn(pts.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => pts[i].0 as f64,
        _ => ln_factorial(pts[i].0 + 1),
    });
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
    Some(DecayFit {
        intercept: sol[0],
        log_rate: sol[1],
        log_factorial_coef: sol[2],
        points: pts.len(),
    })
}

/// `{g, h} = Σ_k ∂g/∂q_k ∂h/∂p_k − ∂g/∂p_k ∂h/∂q_k` by central differences in
/// canonical coordinates `(q, p)` of length `2n`. Valid as a Poisson bracket
/// on abelian factors, where `(θ, y)` are global Darboux coordinates.
pub fn poisson_bracket_fd<G, H>(g: G, h: H, q: &[f64], p: &[f64], step: f64) -> C64
where
    G: Fn(&[f64], &[f64]) -> C64,
    H: Fn(&[f64], &[f64]) -> C64,
{
    let n = q.len();
    let d = |f: &dyn Fn(&[f64], &[f64]) -> C64, k: usize, in_q: bool| {
        let (mut qa, mut pa) = (q.to_vec(), p.to_vec());
        let (mut qb, mut pb) = (q.to_vec(), p.to_vec());
        if in_q {
            qa[k] += step;
            qb[k] -= step;
        } else {
            pa[k] += step;
            pb[k] -= step;
        }
        (f(&qa, &pa) - f(&qb, &pb)) / (2.0 * step)
    };
    (0..n)
        .map(|k| d(&g, k, true) * d(&h, k, false) - d(&g, k, false) * d(&h, k, true))
        .sum()
}
