use proptest::prelude::*;

use sbq_core::config::RunConfig;
use sbq_core::flat::GaussPoly;
use sbq_core::geodesic::geodesic_flow;
use sbq_core::geometry::{
    eta, gamma_density, kahler_potential, nu_density, zeta, zeta_sq_determinant, FiberPoint,
};
use sbq_core::reduction::{gauge_action, holonomy, GaugeTransform, LatticeConnection};
use sbq_core::repr::random_function;
use sbq_core::transform::pairing_forward;
use sbq_core::{AlgebraVector, GroupSpec, C64};

fn spec(s: &str) -> GroupSpec {
    s.parse().unwrap()
}

fn vec_in(n: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, n)
}

/// Vectors of norm at most `r`.
fn ball(n: usize, r: f64) -> impl Strategy<Value = AlgebraVector> {
    vec_in(n, r).prop_map(move |v| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > r {
            AlgebraVector(v.iter().map(|x| x * r / norm).collect())
        } else {
            AlgebraVector(v)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_of_negative_inverts(y in ball(4, 3.0)) {
        let g = spec("u1*su2");
        let e = g.exp(&y).mul(&g.exp(&y.scaled(-1.0)));
        prop_assert!(e.distance(&g.identity()) <= 1e-12);
    }

    #[test]
    fn ad_matrix_is_skew(y in ball(4, 3.0)) {
        let a = spec("u1*su2").ad_matrix(&y);
        prop_assert!((&a + a.transpose()).norm() <= 1e-12);
    }

    #[test]
    fn product_spec_factors_blockwise(c in -3.0..3.0f64, v in ball(3, 3.0)) {
        let prod = spec("u1*su2");
        let su2 = spec("su2");
        let mut y = vec![c];
        y.extend_from_slice(&v.0);
        let y = AlgebraVector(y);
        prop_assert_eq!(eta(&prod, &y), eta(&su2, &v));
        prop_assert_eq!(zeta(&prod, &y), zeta(&su2, &v));
        prop_assert_eq!(prod.rho_norm_sq(), su2.rho_norm_sq());
    }

    #[test]
    fn invariants_are_ad_invariant(x in vec_in(3, 3.0), y in ball(3, 3.0), z in ball(3, 3.0)) {
        let g = spec("su2");
        let k = g.exp(&AlgebraVector(x));
        let (ay, az) = (g.adjoint_action(&k, &y), g.adjoint_action(&k, &z));
        prop_assert!((g.inner(&ay, &az) - g.inner(&y, &z)).abs() <= 1e-12);
        prop_assert!((eta(&g, &ay) - eta(&g, &y)).abs() <= 1e-10 * eta(&g, &y));
        prop_assert!((zeta(&g, &ay) - zeta(&g, &y)).abs() <= 1e-10 * zeta(&g, &y));
        prop_assert!((kahler_potential(&ay) - kahler_potential(&y)).abs() <= 1e-10 * kahler_potential(&y).max(1.0));
    }

    #[test]
    fn eta_at_least_one(y in ball(3, 3.0)) {
        prop_assert!(eta(&spec("su2"), &y) >= 1.0 - 1e-15);
    }

    #[test]
    fn zeta_squared_is_determinant(y in ball(4, 3.0)) {
        let g = spec("u1*su2");
        let (z2, d) = (zeta(&g, &y).powi(2), zeta_sq_determinant(&g, &y));
        prop_assert!((z2 - d).abs() <= 1e-10 * d.abs());
    }

    #[test]
    fn measure_ratio_is_constant(x in vec_in(3, 3.0), y in ball(3, 3.0), hbar in 0.1..4.0f64) {
        let g = spec("su2");
        let p = FiberPoint::new(g.exp(&AlgebraVector(x)), y);
        let ratio = nu_density(&g, &p, hbar) / gamma_density(&g, &p, hbar);
        let origin = FiberPoint::new(g.identity(), AlgebraVector::zeros(3));
        let r0 = nu_density(&g, &origin, hbar) / gamma_density(&g, &origin, hbar);
        prop_assert!((ratio - r0).abs() <= 1e-13 * r0);
    }

    #[test]
    fn heat_is_a_semigroup(seed in 0u64..1000, s in 0.0..2.0f64, t in 0.0..2.0f64) {
        let f = random_function(&spec("u1*su2"), 2, 5, seed).unwrap();
        let a = f.heat(s).heat(t);
        let b = f.heat(s + t);
        for ((ka, va), (kb, vb)) in a.terms().zip(b.terms()) {
            prop_assert_eq!(ka, kb);
            prop_assert!((va - vb).norm() <= 1e-14 * va.norm().max(1e-300));
        }
    }

    #[test]
    fn pairing_is_linear(s1 in 0u64..500, s2 in 500u64..1000, re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let g = spec("su2");
        let (f, h) = (random_function(&g, 2, 4, s1).unwrap(), random_function(&g, 2, 4, s2).unwrap());
        let c = C64::new(re, im);
        let lhs = pairing_forward(&f.scale(c).add(&h), 0.5);
        let rhs = pairing_forward(&f, 0.5).scale(c).coefficients().add(pairing_forward(&h, 0.5).coefficients());
        for ((_, a), (_, b)) in lhs.coefficients().terms().zip(rhs.terms()) {
            prop_assert!((a - b).norm() <= 1e-13 * a.norm().max(1.0));
        }
    }

    #[test]
    fn geodesic_flow_is_a_group_and_conserves_energy(x in vec_in(3, 3.0), y in ball(3, 2.0), s in -2.0..2.0f64, t in -2.0..2.0f64) {
        let g = spec("su2");
        let p = FiberPoint::new(g.exp(&AlgebraVector(x)), y);
        let two = geodesic_flow(&g, &geodesic_flow(&g, &p, s), t);
        let one = geodesic_flow(&g, &p, s + t);
        prop_assert!(two.x.distance(&one.x) <= 1e-12);
        prop_assert_eq!(kahler_potential(&two.y), kahler_potential(&p.y));
    }

    #[test]
    fn holonomy_is_gauge_invariant(a in vec_in(9, 2.0), l in vec_in(6, 0.3)) {
        let g = spec("su2");
        let conn = LatticeConnection::from_orthonormal(&g, 3, &a).unwrap();
        let mut ls = vec![g.identity()];
        ls.push(g.exp(&AlgebraVector(l[..3].to_vec())));
        ls.push(g.exp(&AlgebraVector(l[3..].to_vec())));
        ls.push(g.identity());
        let gauge = GaugeTransform::new(&g, ls).unwrap();
        if let Ok(moved) = gauge_action(&g, &gauge, &conn) {
            prop_assert!(holonomy(&g, &moved).distance(&holonomy(&g, &conn)) <= 1e-10);
        }
    }

    #[test]
    fn flat_heat_is_a_semigroup(center in -1.0..1.0f64, var in 0.2..2.0f64, s in 0.01..1.0f64, t in 0.01..1.0f64, q in -2.0..2.0f64) {
        let f = GaussPoly::gaussian(2, center, var);
        let a = f.heat(s).unwrap().heat(t).unwrap();
        let b = f.heat(s + t).unwrap();
        let z = C64::new(q, 0.3);
        prop_assert!((a.eval(z) - b.eval(z)).norm() <= 1e-12 * b.eval(z).norm().max(1e-12));
    }

    #[test]
    fn config_text_round_trips(hbar in 0.01..10.0f64, seed in any::<u64>(), order in 4usize..64) {
        let c = RunConfig { hbar, seed, fiber_order: order, ..RunConfig::default() };
        let mut d = RunConfig::default();
        d.apply_text(&c.to_text()).unwrap();
        prop_assert_eq!(c, d);
    }
}
