use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Row-then-column 2-D FFT; the inverse is normalized by `1/(rows·cols)`.
pub(crate) struct Fft2 {
    rows: usize,
    cols: usize,
    fwd_row: Arc<dyn Fft<f64>>,
    fwd_col: Arc<dyn Fft<f64>>,
    inv_row: Arc<dyn Fft<f64>>,
    inv_col: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({}x{})", self.rows, self.cols)
    }
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            rows,
            cols,
            fwd_row: planner.plan_fft_forward(cols),
            fwd_col: planner.plan_fft_forward(rows),
            inv_row: planner.plan_fft_inverse(cols),
            inv_col: planner.plan_fft_inverse(rows),
        }
    }

    pub fn forward(&self, a: &mut Array2<Complex64>) {
        self.apply(a, &self.fwd_row, &self.fwd_col);
    }

    pub fn inverse(&self, a: &mut Array2<Complex64>) {
        self.apply(a, &self.inv_row, &self.inv_col);
        let s = 1.0 / (self.rows * self.cols) as f64;
        a.mapv_inplace(|v| v * s);
    }

    fn apply(&self, a: &mut Array2<Complex64>, row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
        assert_eq!(a.dim(), (self.rows, self.cols));
        if !a.is_standard_layout() {
            *a = a.as_standard_layout().into_owned();
        }
        lines(a.as_slice_mut().expect("standard layout"), self.cols, row);
        let mut t = a.t().as_standard_layout().into_owned();
        lines(t.as_slice_mut().expect("standard layout"), self.rows, col);
        a.assign(&t.t());
    }
}

fn lines(buf: &mut [Complex64], len: usize, fft: &Arc<dyn Fft<f64>>) {
    let per_task = len * (4096 / len).max(1);
    buf.par_chunks_mut(per_task).for_each(|chunk| fft.process(chunk));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_dc() {
        let (r, c) = (6, 10);
        let a = Array2::from_shape_fn((r, c), |(i, j)| Complex64::new(i as f64 * 0.3 - j as f64, (i * j) as f64 * 0.1));
        let mut b = a.clone();
        let f = Fft2::new(r, c);
        f.forward(&mut b);
        let sum: Complex64 = a.iter().sum();
        assert!((b[[0, 0]] - sum).norm() < 1e-10);
        f.inverse(&mut b);
        assert!(a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() < 1e-12));
    }
}
