use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::IsingModel;
use crate::error::{invalid, Result};

/// On-disk problem: an edge list or a dense matrix.
///
/// Each edge `[i, j, w]` adds `w` to both `J_ij` and `J_ji`; repeated edges sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemFile {
    Edges { n: usize, edges: Vec<(usize, usize, f64)> },
    Dense { matrix: Vec<Vec<f64>> },
}

impl ProblemFile {
    pub fn to_model(&self) -> Result<IsingModel> {
        match self {
            ProblemFile::Dense { matrix } => IsingModel::from_rows(matrix),
            ProblemFile::Edges { n, edges } => {
                let mut raw = DMatrix::zeros(*n, *n);
                for &(i, j, w) in edges {
                    if i >= *n || j >= *n {
                        return Err(invalid(format!("edge ({i}, {j}) out of range for n = {n}")));
                    }
                    if i != j {
                        raw[(i, j)] += w;
                        raw[(j, i)] += w;
                    }
                }
                IsingModel::symmetrize(&raw)
            }
        }
    }

    pub fn from_model(model: &IsingModel) -> Self {
        ProblemFile::Dense { matrix: model.to_rows() }
    }

    pub fn load(path: &Path) -> Result<IsingModel> {
        let text = std::fs::read_to_string(path)?;
        let file: ProblemFile = serde_json::from_str(&text)?;
        file.to_model()
    }
}

/// Möbius ladder on `n` (even, ≥ 4) spins: ring edges `i–i+1` plus rungs
/// `i–i+n/2`, all antiferromagnetic (`J = −1`).
pub fn mobius_ladder(n: usize) -> Result<IsingModel> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(invalid(format!("Möbius ladder needs an even n >= 4, got {n}")));
    }
    let mut raw = DMatrix::zeros(n, n);
    for i in 0..n {
        for k in [(i + 1) % n, (i + n / 2) % n] {
            raw[(i, k)] = -1.0;
            raw[(k, i)] = -1.0;
        }
    }
    IsingModel::symmetrize(&raw)
}

/// Fully connected glass with `J_ij ∈ {−1, +1}` uniform, reproducible from `seed`.
pub fn random_glass(n: usize, seed: u64) -> Result<IsingModel> {
    if n < 2 {
        return Err(invalid(format!("need at least 2 spins, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = DMatrix::zeros(n, n);
    for i in 0..n {
        for k in (i + 1)..n {
            let w = if rng.random::<bool>() { 1.0 } else { -1.0 };
            raw[(i, k)] = w;
            raw[(k, i)] = w;
        }
    }
    IsingModel::symmetrize(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_sum_duplicates() {
        let p: ProblemFile = serde_json::from_str(r#"{"n": 3, "edges": [[0, 1, 1.0], [1, 0, 0.5], [1, 2, -2]]}"#).unwrap();
        let m = p.to_model().unwrap();
        assert_eq!(m.couplings()[(0, 1)], 1.5);
        assert_eq!(m.couplings()[(2, 1)], -2.0);
        assert_eq!(m.couplings()[(0, 2)], 0.0);
    }

    #[test]
    fn dense_matrix_loads() {
        let p: ProblemFile = serde_json::from_str(r#"{"matrix": [[0, 1], [3, 0]]}"#).unwrap();
        assert_eq!(p.to_model().unwrap().couplings()[(0, 1)], 2.0);
    }

    #[test]
    fn edge_out_of_range() {
        let p = ProblemFile::Edges { n: 2, edges: vec![(0, 2, 1.0)] };
        assert!(p.to_model().is_err());
    }

    #[test]
    fn mobius_degree_three() {
        let m = mobius_ladder(20).unwrap();
        for r in 0..20 {
            let deg = m.couplings().row(r).iter().filter(|v| **v != 0.0).count();
            assert_eq!(deg, 3);
        }
        assert!(mobius_ladder(5).is_err());
    }

    #[test]
    fn glass_is_reproducible() {
        assert_eq!(random_glass(12, 7).unwrap(), random_glass(12, 7).unwrap());
        assert_ne!(random_glass(12, 7).unwrap(), random_glass(12, 8).unwrap());
        let m = random_glass(12, 7).unwrap();
        assert!(m.couplings().iter().enumerate().all(|(k, v)| (k % 13 == 0 && *v == 0.0) || v.abs() == 1.0));
    }
}
