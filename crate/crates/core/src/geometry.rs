//! Kähler potential, half-form densities and the measures on T*(K) ≅ K_ℂ.
//!
//! Densities are taken with respect to `dx dY` in left-trivialized
//! coordinates. Covectors at a fiber point are length-2n vectors in the
//! coframe `{α_k, dy_k}`, where the `α_k` are the left-invariant forms dual to
//! the orthonormal basis of 𝔨.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::lie::{AlgebraVector, Factor, GroupElement, GroupSpec, C64};
use crate::matfun::{sinhc, SkewFunctions};

/// A point `(x, Y)` of T*(K).
#[derive(Debug, Clone, PartialEq)]
pub struct FiberPoint {
    pub x: GroupElement,
    pub y: AlgebraVector,
}

impl FiberPoint {
    pub fn new(x: GroupElement, y: AlgebraVector) -> Self {
        Self { x, y }
    }
}

/// `κ(Y) = |Y|²`.
pub fn kahler_potential(y: &AlgebraVector) -> f64 {
    y.norm_sq()
}

/// `η(Y) = Π_{α∈R⁺} sinh α(Y) / α(Y)`.
pub fn eta(spec: &GroupSpec, y: &AlgebraVector) -> f64 {
    spec.root_values(y).into_iter().map(sinhc).product()
}

/// `ζ(Y) = Π_{α∈R⁺} sinh(α(Y)/2) / (α(Y)/2)`.
pub fn zeta(spec: &GroupSpec, y: &AlgebraVector) -> f64 {
    spec.root_values(y)
        .into_iter()
        .map(|a| sinhc(a / 2.0))
        .product()
}

/// `det[sin adY/adY + i (cos adY − 1)/adY]`, evaluated per factor block from
/// matrix functions of `ad Y`. Equals `ζ(Y)²`.
pub fn zeta_sq_determinant(spec: &GroupSpec, y: &AlgebraVector) -> f64 {
    let ad = spec.ad_matrix(y);
    let mut det = C64::new(1.0, 0.0);
    for (i, f) in spec.factors().iter().enumerate() {
        if *f != Factor::Su2 {
            continue;
        }
        let r = spec.range(i);
        let block = ad.view((r.start, r.start), (r.len(), r.len())).into_owned();
        let fun = SkewFunctions::new(&block);
        let m = DMatrix::from_fn(r.len(), r.len(), |a, b| {
            C64::new(fun.sinc[(a, b)], -fun.versinc[(a, b)])
        });
        det *= m.determinant();
    }
    debug_assert!(det.im.abs() <= 1e-8 * det.norm());
    det.re
}

/// `(πℏ)^{-n/2} e^{-|ρ|²ℏ}`, the ratio between `ν_ℏ` and `γ_ℏ`.
pub fn c_hbar(spec: &GroupSpec, hbar: f64) -> f64 {
    let n = spec.dim() as f64;
    (PI * hbar).powf(-n / 2.0) * (-spec.rho_norm_sq() * hbar).exp()
}

/// `γ_ℏ = e^{-|Y|²/ℏ} η(Y)` relative to `dx dY`.
pub fn gamma_density(spec: &GroupSpec, p: &FiberPoint, hbar: f64) -> f64 {
    (-kahler_potential(&p.y) / hbar).exp() * eta(spec, &p.y)
}

/// `ν_ℏ = (πℏ)^{-n/2} e^{-|ρ|²ℏ} e^{-|Y|²/ℏ} η(Y)` relative to `dx dY`.
pub fn nu_density(spec: &GroupSpec, p: &FiberPoint, hbar: f64) -> f64 {
    fiber_heat_density(spec, &p.y, hbar)
}

/// Heat kernel of K_ℂ/K at time `t`: `(πt)^{-n/2} e^{-|Y|²/t} η(Y) e^{-|ρ|²t}`.
pub fn fiber_heat_density(spec: &GroupSpec, y: &AlgebraVector, t: f64) -> f64 {
    let n = spec.dim() as f64;
    (PI * t).powf(-n / 2.0)
        * (-kahler_potential(y) / t).exp()
        * eta(spec, y)
        * (-spec.rho_norm_sq() * t).exp()
}

/// One row of the measure comparison.
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub point_id: usize,
    pub gamma: f64,
    pub nu: f64,
    pub ratio: f64,
    pub c_theoretical: f64,
    pub rel_err: f64,
}

pub fn density_report(spec: &GroupSpec, id: usize, p: &FiberPoint, hbar: f64) -> DensityReport {
    let gamma = gamma_density(spec, p, hbar);
    let nu = nu_density(spec, p, hbar);
    let ratio = nu / gamma;
    let c = c_hbar(spec, hbar);
    DensityReport {
        point_id: id,
        gamma,
        nu,
        ratio,
        c_theoretical: c,
        rel_err: (ratio - c).abs() / c,
    }
}

/// `Im ∂̄κ − θ` at `p`, as a max-norm residual.
///
/// `dκ = 2 Σ y_k dy_k` is transported to K_ℂ by the inverse transpose of
/// `Φ_*`, split into its (0,1) part with respect to multiplication by `i` on
/// `g⁻¹ dg`, pulled back by `Φ_*ᵀ`, and compared with `θ = Σ y_k α_k`.
pub fn verify_kappa_one_form(spec: &GroupSpec, p: &FiberPoint) -> f64 {
    let n = spec.dim();
    let pushforward = spec.phi_pushforward(&p.y);
    let mut dkappa = DVector::zeros(2 * n);
    for k in 0..n {
        dkappa[n + k] = 2.0 * p.y.0[k];
    }
    let beta = pushforward
        .transpose()
        .lu()
        .solve(&dkappa)
        .expect("Φ is a diffeomorphism");
    // β^{0,1} = (β + i β∘J)/2 with J(u, v) = (−v, u)
    let c: Vec<C64> = (0..n)
        .map(|k| C64::new(beta[k], beta[n + k]) / 2.0)
        .collect();
    let dbar = DVector::from_fn(
        2 * n,
        |i, _| {
            if i < n {
                c[i]
            } else {
                -C64::i() * c[i - n]
            }
        },
    );
    let pulled = pushforward.map(|v| C64::new(v, 0.0)).transpose() * dbar;
    (0..2 * n)
        .map(|i| {
            let theta = if i < n { p.y.0[i] } else { 0.0 };
            (pulled[i].im - theta).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::SQRT_2;

    fn spec(s: &str) -> GroupSpec {
        s.parse().unwrap()
    }

    fn random_y(rng: &mut ChaCha8Rng, n: usize, max_norm: f64) -> AlgebraVector {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = rng.random_range(0.0..max_norm);
        AlgebraVector(v.into_iter().map(|x| x * r / norm).collect())
    }

    #[test]
    fn kahler_potential_values() {
        assert_eq!(kahler_potential(&AlgebraVector(vec![0.0; 3])), 0.0);
        assert_eq!(kahler_potential(&AlgebraVector(vec![0.0, 1.0, 0.0])), 1.0);
    }

    #[test]
    fn eta_and_zeta_known_values() {
        let g = spec("su2");
        let y = AlgebraVector(vec![0.0, 0.0, 1.0 / SQRT_2]);
        assert!((eta(&g, &y) - 1.0f64.sinh()).abs() < 1e-12);
        assert!((zeta(&g, &y) - 2.0 * 0.5f64.sinh()).abs() < 1e-12);
        assert_eq!(eta(&g, &AlgebraVector::zeros(3)), 1.0);
        assert_eq!(zeta(&g, &AlgebraVector::zeros(3)), 1.0);
        let ab = spec("u1*r1");
        assert_eq!(eta(&ab, &AlgebraVector(vec![3.0, -2.0])), 1.0);
        assert_eq!(
            zeta_sq_determinant(&ab, &AlgebraVector(vec![3.0, -2.0])),
            1.0
        );
    }

    #[test]
    fn zeta_squared_matches_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in ["su2", "u1*su2", "su2*su2"] {
            let g = spec(s);
            for _ in 0..100 {
                let y = random_y(&mut rng, g.dim(), 3.0);
                let z2 = zeta(&g, &y).powi(2);
                let d = zeta_sq_determinant(&g, &y);
                assert!((z2 - d).abs() <= 1e-10 * z2, "{s}: {z2} vs {d}");
            }
        }
    }

    #[test]
    fn densities_are_ad_invariant_and_eta_at_least_one() {
        let g = spec("u1*su2");
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let y = random_y(&mut rng, 4, 3.0);
            let x = g.exp(&random_y(&mut rng, 4, 5.0));
            let ay = g.adjoint_action(&x, &y);
            assert!((eta(&g, &y) - eta(&g, &ay)).abs() <= 1e-10 * eta(&g, &y));
            assert!((zeta(&g, &y) - zeta(&g, &ay)).abs() <= 1e-10 * zeta(&g, &y));
            assert!((kahler_potential(&y) - kahler_potential(&ay)).abs() < 1e-12);
            assert!(eta(&g, &y) >= 1.0);
        }
    }

    #[test]
    fn measure_constants() {
        let c = spec("u1");
        assert!((c_hbar(&c, 1.0) - PI.powf(-0.5)).abs() < 1e-15);
        let p = FiberPoint::new(c.identity(), AlgebraVector(vec![0.0]));
        assert!((nu_density(&c, &p, 1.0) - PI.powf(-0.5)).abs() < 1e-15);
        let g = spec("su2");
        assert!((c_hbar(&g, 2.0) - (2.0 * PI).powf(-1.5) * (-1.0f64).exp()).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = FiberPoint::new(
                g.exp(&random_y(&mut rng, 3, 5.0)),
                random_y(&mut rng, 3, 3.0),
            );
            let r = density_report(&g, 0, &p, 0.7);
            assert!(r.rel_err < 1e-13);
            assert!(r.gamma > 0.0 && r.nu > 0.0);
        }
    }

    #[test]
    fn gamma_does_not_depend_on_x() {
        let g = spec("su2");
        let y = AlgebraVector(vec![0.3, -0.2, 0.9]);
        let a = FiberPoint::new(g.identity(), y.clone());
        let b = FiberPoint::new(g.exp(&AlgebraVector(vec![1.0, 2.0, 0.5])), y);
        assert_eq!(gamma_density(&g, &a, 0.5), gamma_density(&g, &b, 0.5));
    }

    #[test]
    fn kappa_one_form_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ab = spec("u1*r1");
        for _ in 0..20 {
            let p = FiberPoint::new(
                ab.exp(&random_y(&mut rng, 2, 3.0)),
                random_y(&mut rng, 2, 3.0),
            );
            assert!(verify_kappa_one_form(&ab, &p) <= 1e-14);
        }
        for s in ["su2", "u1*su2"] {
            let g = spec(s);
            for _ in 0..50 {
                let p = FiberPoint::new(
                    g.exp(&random_y(&mut rng, g.dim(), 3.0)),
                    random_y(&mut rng, g.dim(), 2.0),
                );
                assert!(verify_kappa_one_form(&g, &p) <= 1e-8);
            }
        }
        let g = spec("su2");
        assert_eq!(
            verify_kappa_one_form(&g, &FiberPoint::new(g.identity(), AlgebraVector::zeros(3))),
            0.0
        );
    }
}
