use nalgebra::DMatrix;

use crate::error::{dim, Error, Result};

/// `|xᵀy| / (‖x‖‖y‖)`.
pub fn fidelity_vector(i_exp: &[f64], i_theo: &[f64]) -> Result<f64> {
    if i_exp.len() != i_theo.len() {
        return Err(dim(format!("fidelity of vectors with lengths {} and {}", i_exp.len(), i_theo.len())));
    }
    normalized_inner(i_exp.iter().copied(), i_theo.iter().copied())
}

/// Frobenius-normalized inner product of two intensity matrices.
pub fn fidelity_matrix(i_theo: &DMatrix<f64>, i_exp: &DMatrix<f64>) -> Result<f64> {
    if i_theo.shape() != i_exp.shape() {
        return Err(dim(format!("fidelity of matrices {:?} and {:?}", i_theo.shape(), i_exp.shape())));
    }
    normalized_inner(i_exp.iter().copied(), i_theo.iter().copied())
}

fn normalized_inner(x: impl Iterator<Item = f64>, y: impl Iterator<Item = f64>) -> Result<f64> {
    let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for (a, b) in x.zip(y) {
        xy += a * b;
        xx += a * a;
        yy += b * b;
    }
    if xx == 0.0 || yy == 0.0 {
        return Err(Error::UndefinedFidelity("zero-norm intensity"));
    }
    Ok((xy.abs() / (xx.sqrt() * yy.sqrt())).min(1.0))
}

/// Mean and sample standard deviation of `h_exp/h_theo`, skipping `h_theo == 0`.
pub fn normalization_coefficient(h_exp: &[f64], h_theo: &[f64]) -> Result<(f64, f64)> {
    if h_exp.len() != h_theo.len() {
        return Err(dim("h_exp and h_theo must pair up"));
    }
    let k: Vec<f64> = h_exp
        .iter()
        .zip(h_theo)
        .filter(|(_, t)| t.abs() > 1e-12)
        .map(|(e, t)| e / t)
        .collect();
    if k.is_empty() {
        return Err(Error::InvalidValue("no pairs with nonzero theoretical Hamiltonian".into()));
    }
    let mean = k.iter().sum::<f64>() / k.len() as f64;
    let std = if k.len() > 1 {
        (k.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok((mean, std))
}
