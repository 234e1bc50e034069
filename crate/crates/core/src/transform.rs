//! Pairing maps between the vertical and Kähler-polarized Hilbert spaces.
//!
//! `Π_ℏ = a_ℏ C_ℏ` is exact on Peter–Weyl sums. Fiber integrals use tensor
//! Gauss–Hermite rules; every quadrature result is re-evaluated at doubled
//! order and the relative change is reported.
//!
//! For a band-limited `F = Σ_λ tr(C_λᵀ π_λ)`, the integral over K of
//! `|F(x e^{iY})|²` is contracted exactly by Schur orthogonality:
//! `Σ_λ vol(K)/dim λ · ‖C_λ M_λ(Y)ᵀ‖²_F` with `M_λ(Y) = π_λ(e^{iY})`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{c_hbar, eta, zeta};
use crate::lie::{AlgebraVector, GroupElement, GroupSpec, C64};
use crate::quadrature::{fiber_rule, group_rule, validate, validate_scaled, Validated};
use crate::repr::{
    irrep_matrix, irrep_matrix_complex, BandLimitedFunction, HolomorphicFunction, IrrepLabel,
};

/// Which measure on K_ℂ defines the holomorphic L² norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Gamma,
    Nu,
}

/// The printed constants `a_ℏ = (2πℏ)^{n/2} e^{-|ρ|²ℏ/2}` and
/// `b_ℏ = (4πℏ)^{-n/4}`, with `c_ℏ` for reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairingConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub hbar: f64,
}

impl PairingConstants {
    pub fn printed(spec: &GroupSpec, hbar: f64) -> Self {
        let n = spec.dim() as f64;
        Self {
            a: (2.0 * PI * hbar).powf(n / 2.0) * (-spec.rho_norm_sq() * hbar / 2.0).exp(),
            b: (4.0 * PI * hbar).powf(-n / 4.0),
            c: c_hbar(spec, hbar),
            hbar,
        }
    }

    /// The value of `a_ℏ` that would make `Π_ℏ*` the Hilbert-space adjoint of
    /// `Π_ℏ` with respect to `γ_ℏ`: `2^{n/2} e^{-|ρ|²ℏ/2}`.
    pub fn adjoint_consistent_a(spec: &GroupSpec, hbar: f64) -> f64 {
        let n = spec.dim() as f64;
        2f64.powf(n / 2.0) * (-spec.rho_norm_sq() * hbar / 2.0).exp()
    }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("hbar = {hbar}")))
    }
}

/// `Π_ℏ f = a_ℏ C_ℏ f`.
pub fn pairing_forward(f: &BandLimitedFunction, hbar: f64) -> HolomorphicFunction {
    let a = PairingConstants::printed(f.spec(), hbar).a;
    f.analytic_continue(hbar).scale(C64::new(a, 0.0))
}

/// `π_λ(e^{iY})` for every label.
fn fiber_matrices(spec: &GroupSpec, labels: &[IrrepLabel], y: &AlgebraVector) -> Vec<DMatrix<C64>> {
    let g = spec.exp_complex(&y.times_i());
    labels.iter().map(|l| irrep_matrix_complex(l, &g)).collect()
}

fn hl2_norm_sq_at(
    f: &HolomorphicFunction,
    hbar: f64,
    measure: Measure,
    order: usize,
) -> Result<f64> {
    let spec = f.spec();
    let vol = spec.volume()?;
    let blocks = f.coefficients().coefficient_blocks();
    let labels: Vec<IrrepLabel> = blocks.keys().cloned().collect();
    let coeffs: Vec<&DMatrix<C64>> = blocks.values().collect();
    let rule = fiber_rule(spec, hbar, order)?;
    let prefactor = match measure {
        Measure::Gamma => 1.0,
        Measure::Nu => c_hbar(spec, hbar),
    };
    let sum = rule.integrate(|y| {
        let mats = fiber_matrices(spec, &labels, y);
        let k_integral: f64 = coeffs
            .iter()
            .zip(&mats)
            .zip(&labels)
            .map(|((c, m), l)| vol / l.dim() as f64 * (*c * m.transpose()).norm_squared())
            .sum();
        k_integral * eta(spec, y)
    });
    Ok(prefactor * sum)
}

/// `‖F‖² = ∫_𝔨 ∫_K |F(x e^{iY})|² density(Y) dx dY`, with the K-integral
/// contracted by Schur orthogonality and the fiber integral by Gauss–Hermite.
pub fn hl2_norm_sq(
    f: &HolomorphicFunction,
    hbar: f64,
    measure: Measure,
    order: usize,
    tol: Option<f64>,
) -> Result<Validated<f64>> {
    check_hbar(hbar)?;
    let v = validate(order, tol, |o| {
        hl2_norm_sq_at(f, hbar, measure, o).map(C64::from)
    })?;
    Ok(Validated {
        value: v.value.re,
        delta: v.delta,
    })
}

/// `Π_ℏ* F(x) = ∫_𝔨 F(x e^{iY}) e^{-|Y|²/2ℏ} ζ(Y) dY`, by direct quadrature
/// at the single point `x`.
pub fn pairing_adjoint(
    f: &HolomorphicFunction,
    x: &GroupElement,
    hbar: f64,
    order: usize,
    tol: Option<f64>,
) -> Result<Validated<C64>> {
    check_hbar(hbar)?;
    let spec = f.spec();
    let xc = x.complexify();
    validate_scaled(order, tol, |o| {
        let rule = fiber_rule(spec, 2.0 * hbar, o)?;
        Ok(rule.integrate_complex_abs(|y| {
            let g = xc.mul(&spec.exp_complex(&y.times_i()));
            f.eval(&g) * zeta(spec, y)
        }))
    })
}

/// The fiber moments `S_λ = ∫_𝔨 π_λ(e^{iY}) e^{-|Y|²/2ℏ} ζ(Y) dY`, which turn
/// `Π_ℏ*` into a coefficient map: `Π_ℏ* F` has coefficients `C_λ S_λᵀ`.
#[derive(Debug, Clone)]
pub struct AdjointKernel {
    pub hbar: f64,
    pub blocks: BTreeMap<IrrepLabel, DMatrix<C64>>,
    /// Largest relative change of any block under order doubling.
    pub delta: f64,
}

impl AdjointKernel {
    pub fn new(
        spec: &GroupSpec,
        labels: &[IrrepLabel],
        hbar: f64,
        order: usize,
        tol: Option<f64>,
    ) -> Result<Self> {
        check_hbar(hbar)?;
        let moments = |o: usize| -> Result<Vec<DMatrix<C64>>> {
            let rule = fiber_rule(spec, 2.0 * hbar, o)?;
            let zero: Vec<DMatrix<C64>> = labels
                .iter()
                .map(|l| DMatrix::zeros(l.dim(), l.dim()))
                .collect();
            let parts = crate::par::map_chunks(rule.len(), crate::par::CHUNK, |r| {
                let mut acc = zero.clone();
                for i in r {
                    let y = &rule.nodes[i];
                    let w = rule.weights[i] * zeta(spec, y);
                    for (a, m) in acc.iter_mut().zip(fiber_matrices(spec, labels, y)) {
                        *a += m * C64::from(w);
                    }
                }
                acc
            });
            Ok(parts.into_iter().fold(zero.clone(), |mut acc, p| {
                for (a, b) in acc.iter_mut().zip(p) {
                    *a += b;
                }
                acc
            }))
        };
        let base = moments(order)?;
        let fine = moments(2 * order)?;
        let mut delta: f64 = 0.0;
        for (b, f) in base.iter().zip(&fine) {
            let scale = b.norm().max(f.norm());
            if scale > 0.0 {
                delta = delta.max((b - f).norm() / scale);
            }
        }
        let limit = tol.unwrap_or(crate::quadrature::DOUBLING_TOLERANCE);
        if delta > limit {
            return Err(Error::QuadratureUnderResolved {
                order,
                delta,
                limit,
            });
        }
        Ok(Self {
            hbar,
            blocks: labels.iter().cloned().zip(base).collect(),
            delta,
        })
    }

    /// `Π_ℏ* F` as a Peter–Weyl sum.
    pub fn apply(&self, f: &HolomorphicFunction) -> Result<BandLimitedFunction> {
        let mut out = BandLimitedFunction::zero(f.spec());
        for (label, c) in f.coefficients().coefficient_blocks() {
            let s = self
                .blocks
                .get(&label)
                .ok_or_else(|| Error::LabelMismatch(format!("{label:?} not in kernel")))?;
            let m = c * s.transpose();
            for r in 0..m.nrows() {
                for col in 0..m.ncols() {
                    if m[(r, col)] != C64::new(0.0, 0.0) {
                        out.add_term(label.clone(), r, col, m[(r, col)])?;
                    }
                }
            }
        }
        Ok(out)
    }
}

fn labels_of(f: &BandLimitedFunction) -> Vec<IrrepLabel> {
    f.coefficient_blocks().into_keys().collect()
}

/// `Π_ℏ* F` as a Peter–Weyl sum through the fiber-moment kernel.
pub fn pairing_adjoint_function(
    f: &HolomorphicFunction,
    hbar: f64,
    order: usize,
    tol: Option<f64>,
) -> Result<(BandLimitedFunction, f64)> {
    let labels = labels_of(f.coefficients());
    let kernel = AdjointKernel::new(f.spec(), &labels, hbar, order, tol)?;
    Ok((kernel.apply(f)?, kernel.delta))
}

/// `∬ conj(F(x e^{iY})) f(x) e^{-|Y|²/2ℏ} ζ(Y) dx dY` by nested group and
/// fiber quadrature. The group order is raised if needed so that the rule is
/// exact for the band limits involved; the fiber order is validated by
/// doubling.
pub fn pairing_sesquilinear(
    big_f: &HolomorphicFunction,
    f: &BandLimitedFunction,
    hbar: f64,
    group_order: usize,
    fiber_order: usize,
    tol: Option<f64>,
) -> Result<Validated<C64>> {
    check_hbar(hbar)?;
    let spec = f.spec();
    let band = big_f.coefficients().band_limit().max(f.band_limit());
    let order = group_order.max(2 * band as usize + 2);
    let grule = group_rule(spec, order)?;
    let big_blocks = big_f.coefficients().coefficient_blocks();
    let labels: Vec<IrrepLabel> = big_blocks.keys().cloned().collect();
    // π_λ(x) and f(x) at every group node
    let at_x: Vec<(Vec<DMatrix<C64>>, C64)> = grule
        .nodes
        .iter()
        .map(|x| {
            (
                labels.iter().map(|l| irrep_matrix(l, x)).collect(),
                f.eval(x),
            )
        })
        .collect();
    validate_scaled(fiber_order, tol, |o| {
        let frule = fiber_rule(spec, 2.0 * hbar, o)?;
        // value and ∬|integrand|, so exact cancellations are judged against
        // the size of the integrand rather than roundoff
        let parts = crate::par::map_chunks(frule.len(), crate::par::CHUNK, |r| {
            let mut acc = (C64::new(0.0, 0.0), 0.0);
            for i in r {
                let y = &frule.nodes[i];
                let mats = fiber_matrices(spec, &labels, y);
                let wy = frule.weights[i] * zeta(spec, y);
                for ((px, fx), wx) in at_x.iter().zip(&grule.weights) {
                    let val: C64 = big_blocks
                        .values()
                        .zip(px)
                        .zip(&mats)
                        .map(|((c, p), m)| (c.transpose() * (p * m)).trace())
                        .sum();
                    let term = val.conj() * fx * (wx * wy);
                    acc.0 += term;
                    acc.1 += term.norm();
                }
            }
            acc
        });
        Ok(parts
            .into_iter()
            .fold((C64::new(0.0, 0.0), 0.0), |a, b| (a.0 + b.0, a.1 + b.1)))
    })
}

/// Ratios `‖Π_ℏ f‖_γ / ‖f‖` and the constant they imply.
#[derive(Debug, Clone, Serialize)]
pub struct UnitarityAudit {
    pub group: String,
    pub hbar: f64,
    pub ratios: Vec<f64>,
    /// `(max − min) / mean` of the ratios.
    pub spread: f64,
    pub b_derived: f64,
    pub b_printed: f64,
    pub b_ratio: f64,
    pub a_printed: f64,
    pub c_hbar: f64,
    /// `b_ratio · (πℏ)^{n/2}`, which is 1 when the only discrepancy is the
    /// factor predicted by the printed constants.
    pub b_ratio_normalized: f64,
    pub max_quadrature_delta: f64,
}

pub fn unitarity_audit(
    test_set: &[BandLimitedFunction],
    hbar: f64,
    order: usize,
    tol: Option<f64>,
) -> Result<UnitarityAudit> {
    let spec = test_set
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty test set".into()))?
        .spec()
        .clone();
    let consts = PairingConstants::printed(&spec, hbar);
    let mut ratios = Vec::with_capacity(test_set.len());
    let mut max_delta: f64 = 0.0;
    for f in test_set {
        let norm_f = f.norm_sq()?.sqrt();
        if norm_f == 0.0 {
            return Err(Error::InvalidParameter("zero test function".into()));
        }
        let h = hl2_norm_sq(&pairing_forward(f, hbar), hbar, Measure::Gamma, order, tol)?;
        max_delta = max_delta.max(h.delta);
        ratios.push(h.value.sqrt() / norm_f);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let b_derived = 1.0 / mean;
    let b_ratio = b_derived / consts.b;
    let n = spec.dim() as f64;
    Ok(UnitarityAudit {
        group: spec.to_string(),
        hbar,
        ratios,
        spread: (max - min) / mean,
        b_derived,
        b_printed: consts.b,
        b_ratio,
        a_printed: consts.a,
        c_hbar: consts.c,
        b_ratio_normalized: b_ratio * (PI * hbar).powf(n / 2.0),
        max_quadrature_delta: max_delta,
    })
}

/// Outcome of fitting `Π_ℏ* Π_ℏ f ≈ λ f` on a sample grid.
#[derive(Debug, Clone, Serialize)]
pub struct InversionResult {
    pub constant_re: f64,
    pub constant_im: f64,
    /// `‖g − λ f‖ / ‖f‖` over the grid.
    pub residual: f64,
    /// `b_ℏ^{-2}` from the printed constant, for comparison.
    pub b_printed_inv_sq: f64,
    pub quadrature_delta: f64,
}

impl InversionResult {
    pub fn constant(&self) -> C64 {
        C64::new(self.constant_re, self.constant_im)
    }
}

/// Seeded sample points on K.
pub fn sample_points(spec: &GroupSpec, count: usize, seed: u64) -> Vec<GroupElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let y: Vec<f64> = (0..spec.dim()).map(|_| rng.random_range(-PI..PI)).collect();
            spec.exp(&AlgebraVector(y))
        })
        .collect()
}

/// Computes `g = Π_ℏ*(Π_ℏ f)` on a grid of sample points and fits the scalar
/// `λ` minimizing `‖g − λ f‖`.
pub fn inversion_check(
    f: &BandLimitedFunction,
    hbar: f64,
    order: usize,
    tol: Option<f64>,
) -> Result<InversionResult> {
    let spec = f.spec();
    let (g, delta) = pairing_adjoint_function(&pairing_forward(f, hbar), hbar, order, tol)?;
    let grid = sample_points(spec, 64, 0x5eed);
    let fv: Vec<C64> = grid.iter().map(|x| f.eval(x)).collect();
    let gv: Vec<C64> = grid.iter().map(|x| g.eval(x)).collect();
    let ff: f64 = fv.iter().map(|v| v.norm_sqr()).sum();
    if ff == 0.0 {
        return Err(Error::InvalidParameter(
            "f vanishes on the sample grid".into(),
        ));
    }
    let lambda: C64 = fv.iter().zip(&gv).map(|(a, b)| a.conj() * b).sum::<C64>() / ff;
    let res: f64 = fv
        .iter()
        .zip(&gv)
        .map(|(a, b)| (b - lambda * a).norm_sqr())
        .sum();
    let b = PairingConstants::printed(spec, hbar).b;
    Ok(InversionResult {
        constant_re: lambda.re,
        constant_im: lambda.im,
        residual: (res / ff).sqrt(),
        b_printed_inv_sq: b.powi(-2),
        quadrature_delta: delta,
    })
}
