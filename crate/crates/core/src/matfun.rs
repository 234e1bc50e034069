//! Scalar and matrix functions with removable singularities at zero.
//!
//! Matrix functions of a real skew-symmetric `A` are power series in `A`,
//! evaluated through the symmetric eigendecomposition of `AᵀA = -A²`. Its
//! eigenvalues are `θ²` where `±iθ` is the spectrum of `A`, so `cos A` acts
//! as `cosh θ` and `sin A / A` as `sinh θ / θ` on each invariant plane.

use nalgebra::{DMatrix, SymmetricEigen};

/// Below this magnitude the closed forms are replaced by Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-4;

/// `sinh(x)/x`, series through `x⁶` near zero.
pub fn sinhc(x: f64) -> f64 {
    if x.abs() < SERIES_THRESHOLD {
        let x2 = x * x;
        1.0 + x2 / 6.0 + x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0
    } else {
        x.sinh() / x
    }
}

/// `(cosh(x) - 1)/x²`, series through `x⁶` near zero.
pub fn coshm1c2(x: f64) -> f64 {
    if x.abs() < SERIES_THRESHOLD {
        let x2 = x * x;
        0.5 + x2 / 24.0 + x2 * x2 / 720.0 + x2 * x2 * x2 / 40320.0
    } else {
        // 2 sinh²(x/2) avoids cancellation
        2.0 * (x / 2.0).sinh().powi(2) / (x * x)
    }
}

/// The four real matrix functions of `ad Y` that appear in the differential
/// of `(x, Y) ↦ x e^{iY}`.
#[derive(Debug, Clone)]
pub struct SkewFunctions {
    /// `cos A`
    pub cos: DMatrix<f64>,
    /// `sin A`
    pub sin: DMatrix<f64>,
    /// `sin A / A`
    pub sinc: DMatrix<f64>,
    /// `(1 - cos A) / A`
    pub versinc: DMatrix<f64>,
}

impl SkewFunctions {
    /// Evaluates the functions of a skew-symmetric matrix `a`.
    pub fn new(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "matrix must be square");
        if n == 0 || a.iter().all(|v| *v == 0.0) {
            let id = DMatrix::identity(n, n);
            return Self {
                cos: id.clone(),
                sin: DMatrix::zeros(n, n),
                sinc: id,
                versinc: DMatrix::zeros(n, n),
            };
        }
        let gram = a.transpose() * a;
        let gram = (&gram + gram.transpose()) * 0.5;
        let eig = SymmetricEigen::new(gram);
        let q = &eig.eigenvectors;
        let thetas: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
        let spectral = |f: &dyn Fn(f64) -> f64| {
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                thetas.iter().map(|t| f(*t)),
            ));
            q * d * q.transpose()
        };
        let cos = spectral(&f64::cosh);
        let sinc = spectral(&sinhc);
        let sin = a * &sinc;
        let versinc = a * spectral(&coshm1c2);
        Self {
            cos,
            sin,
            sinc,
            versinc,
        }
    }
}
