use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{dim, invalid, Result};

/// Symmetric, zero-diagonal coupling matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    j: DMatrix<f64>,
}

impl IsingModel {
    /// Builds a model from an arbitrary square matrix: `J = (raw + rawᵀ)/2`, diagonal zeroed.
    pub fn symmetrize(raw: &DMatrix<f64>) -> Result<Self> {
        if raw.nrows() != raw.ncols() {
            return Err(dim(format!("coupling matrix is {}x{}", raw.nrows(), raw.ncols())));
        }
        let n = raw.nrows();
        if n < 2 {
            return Err(invalid(format!("need at least 2 spins, got {n}")));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(invalid("coupling matrix has non-finite entries"));
        }
        let mut j = DMatrix::zeros(n, n);
        for r in 0..n {
            for c in (r + 1)..n {
                let v = 0.5 * (raw[(r, c)] + raw[(c, r)]);
                j[(r, c)] = v;
                j[(c, r)] = v;
            }
        }
        Ok(Self { j })
    }

    /// Row-major nested vectors, symmetrized.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(dim("coupling rows must all have length n"));
        }
        let raw = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
        Self::symmetrize(&raw)
    }

    pub fn n(&self) -> usize {
        self.j.nrows()
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.j.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn hamiltonian(&self, s: &SpinState) -> Result<f64> {
        hamiltonian_exact(self, s)
    }
}

/// `H(σ) = −½ σᵀJσ`.
pub fn hamiltonian_exact(model: &IsingModel, s: &SpinState) -> Result<f64> {
    let n = model.n();
    if s.len() != n {
        return Err(dim(format!("spin state has {} entries, model has {n}", s.len())));
    }
    let j = model.couplings();
    let mut acc = 0.0;
    for r in 0..n {
        let mut row = 0.0;
        for c in (r + 1)..n {
            row += j[(r, c)] * f64::from(s.spins[c]);
        }
        acc += f64::from(s.spins[r]) * row;
    }
    Ok(-acc)
}

/// Vector of ±1 spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinState {
    spins: Vec<i8>,
}

impl SpinState {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&v| v != 1 && v != -1) {
            return Err(invalid("spins must be +1 or -1"));
        }
        Ok(Self { spins })
    }

    pub fn all_up(n: usize) -> Self {
        Self { spins: vec![1; n] }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            spins: (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect(),
        }
    }

    /// State number `bits` read as little-endian bits, bit set meaning spin −1.
    pub fn from_index(n: usize, bits: u64) -> Self {
        Self {
            spins: (0..n).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn get(&self, i: usize) -> i8 {
        self.spins[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.spins[i] = -self.spins[i];
    }

    pub fn flipped(&self) -> Self {
        Self {
            spins: self.spins.iter().map(|v| -v).collect(),
        }
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.spins.iter().map(|&v| f64::from(v)).collect()
    }
}

impl TryFrom<Vec<i8>> for SpinState {
    type Error = crate::Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SpinState> for Vec<i8> {
    fn from(s: SpinState) -> Self {
        s.spins
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrize_two_by_two() {
        let raw = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        let m = IsingModel::symmetrize(&raw).unwrap();
        assert_eq!(m.to_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn symmetric_input_is_fixed_point() {
        let rows = vec![vec![0.0, 1.5, -2.0], vec![1.5, 0.0, 0.25], vec![-2.0, 0.25, 0.0]];
        let m = IsingModel::from_rows(&rows).unwrap();
        assert_eq!(m.to_rows(), rows);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(IsingModel::symmetrize(&DMatrix::zeros(2, 3)).is_err());
        assert!(IsingModel::symmetrize(&DMatrix::zeros(1, 1)).is_err());
        let mut raw = DMatrix::zeros(3, 3);
        raw[(0, 1)] = f64::NAN;
        assert!(IsingModel::symmetrize(&raw).is_err());
        assert!(SpinState::new(vec![1, 0, -1]).is_err());
    }

    #[test]
    fn two_spin_hamiltonian() {
        let m = IsingModel::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(hamiltonian_exact(&m, &SpinState::all_up(2)).unwrap(), -1.0);
        assert!(hamiltonian_exact(&m, &SpinState::all_up(3)).is_err());
    }

    #[test]
    fn spin_state_serde_validates() {
        let s: SpinState = serde_json::from_str("[1,-1,1]").unwrap();
        assert_eq!(s.spins(), &[1, -1, 1]);
        assert!(serde_json::from_str::<SpinState>("[1,2]").is_err());
    }
}
