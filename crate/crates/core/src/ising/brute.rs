use rayon::prelude::*;

use super::{hamiltonian_exact, IsingModel, SpinState};
use crate::error::{Error, Result};

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 24;

/// Exhaustive ground state with the default cap of 24 spins.
pub fn brute_force_ground(model: &IsingModel) -> Result<(SpinState, f64)> {
    brute_force_ground_capped(model, DEFAULT_BRUTE_FORCE_CAP)
}

/// Enumerates the `2^(n−1)` states with spin 0 fixed to +1 (global flip symmetry).
///
/// The free spins are split into independent chunks by their top bits; each
/// chunk walks a Gray code, updating the local fields `h_k = Σ_j J_kj σ_j`.
/// Ties resolve to the first state in chunk order.
pub fn brute_force_ground_capped(model: &IsingModel, cap: usize) -> Result<(SpinState, f64)> {
    let n = model.n();
    if n > cap || n > 63 {
        return Err(Error::Capacity {
            what: "brute-force enumeration",
            requested: n,
            maximum: cap.min(63),
        });
    }
    let free = n - 1;
    let chunk_bits = free.min(6);
    let inner_bits = free - chunk_bits;
    let j = model.couplings();

    let best = (0u64..(1u64 << chunk_bits))
        .into_par_iter()
        .map(|chunk| {
            let mut spins = vec![1.0_f64; n];
            for b in 0..chunk_bits {
                if chunk >> b & 1 == 1 {
                    spins[1 + inner_bits + b] = -1.0;
                }
            }
            let mut field: Vec<f64> = (0..n)
                .map(|k| (0..n).map(|c| j[(k, c)] * spins[c]).sum())
                .collect();
            let mut h = -0.5 * spins.iter().zip(&field).map(|(s, f)| s * f).sum::<f64>();
            let mut best_h = h;
            let mut best_gray = 0u64;
            for step in 1u64..(1u64 << inner_bits) {
                let k = 1 + step.trailing_zeros() as usize;
                // flipping spin k changes H by 2·σ_k·h_k
                h += 2.0 * spins[k] * field[k];
                let delta = -2.0 * spins[k];
                spins[k] = -spins[k];
                for (r, f) in field.iter_mut().enumerate() {
                    *f += j[(r, k)] * delta;
                }
                if h < best_h {
                    best_h = h;
                    best_gray = step ^ (step >> 1);
                }
            }
            (chunk, best_gray, best_h)
        })
        .reduce(
            || (u64::MAX, 0, f64::INFINITY),
            |a, b| {
                if b.2 < a.2 || (b.2 == a.2 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );

    let (chunk, gray, _) = best;
    let bits = (gray | chunk << inner_bits) << 1;
    let state = SpinState::from_index(n, bits);
    let h = hamiltonian_exact(model, &state)?;
    Ok((state, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ferromagnet_four_spins() {
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|r| (0..4).map(|c| if r == c { 0.0 } else { 1.0 }).collect())
            .collect();
        let m = IsingModel::from_rows(&rows).unwrap();
        let (s, h) = brute_force_ground(&m).unwrap();
        assert_eq!(h, -6.0);
        assert_eq!(s, SpinState::all_up(4));
    }

    #[test]
    fn cap_is_enforced() {
        let m = IsingModel::symmetrize(&nalgebra::DMatrix::zeros(5, 5)).unwrap();
        match brute_force_ground_capped(&m, 4) {
            Err(Error::Capacity { maximum, .. }) => assert_eq!(maximum, 4),
            other => panic!("expected capacity error, got {other:?}"),
        }
    }
}
