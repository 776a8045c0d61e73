use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::IsingModel;
use crate::error::{invalid, Error, Result};

/// Sign class of an eigenvalue; zeros within tolerance count as nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenSign {
    Negative,
    Nonnegative,
}

/// `A = √D·Q` with `J = QᵀDQ`, eigenvalues ascending.
///
/// Rows of `A` for negative eigenvalues are purely imaginary, so the plain
/// (non-conjugating) product `AᵀA` reproduces `J`.
#[derive(Debug, Clone)]
pub struct SpectralTransform {
    a: DMatrix<Complex64>,
    eigenvalues: Vec<f64>,
    q: DMatrix<f64>,
    sign_mask: Vec<EigenSign>,
}

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// Eigen-decomposes `J`. `zero_tol = None` uses `1e-12·max|λ|`.
pub fn spectral_transform(model: &IsingModel, zero_tol: Option<f64>) -> Result<SpectralTransform> {
    let n = model.n();
    let eig = SymmetricEigen::try_new(model.couplings().clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    let max_abs = eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = match zero_tol {
        Some(t) if t < 0.0 || !t.is_finite() => return Err(invalid("zero_tol must be finite and >= 0")),
        Some(t) => t,
        None => 1e-12 * max_abs,
    };

    let q = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(c, order[r])]);
    let mut sign_mask = Vec::with_capacity(n);
    let mut a = DMatrix::zeros(n, n);
    for (r, &lam) in eigenvalues.iter().enumerate() {
        let (sign, coef) = if lam < 0.0 && lam.abs() > tol {
            (EigenSign::Negative, Complex64::new(0.0, (-lam).sqrt()))
        } else {
            (EigenSign::Nonnegative, Complex64::new(lam.max(0.0).sqrt(), 0.0))
        };
        sign_mask.push(sign);
        for c in 0..n {
            a[(r, c)] = coef * q[(r, c)];
        }
    }
    Ok(SpectralTransform { a, eigenvalues, q, sign_mask })
}

impl SpectralTransform {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<Complex64> {
        &self.a
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Rows are eigenvectors.
    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn sign_mask(&self) -> &[EigenSign] {
        &self.sign_mask
    }

    pub fn negative_count(&self) -> usize {
        self.sign_mask.iter().filter(|s| **s == EigenSign::Negative).count()
    }

    /// `AᵀA` (plain transpose), real part.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        (self.a.transpose() * &self.a).map(|z| z.re)
    }
}
