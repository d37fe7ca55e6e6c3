//! Thin wrapper over `rustfft` with the coefficient convention used across
//! the crate: `forward` returns Fourier coefficients (scaled by `1/N`), so
//! `inverse` is the plain trigonometric sum
//! `f(s_j) = sum_xi c_xi exp(2 pi i xi (s_j - s_a) / L)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct Fourier {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

impl Clone for Fourier {
    fn clone(&self) -> Self {
        Fourier {
            n: self.n,
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
            scratch: vec![Complex64::default(); self.scratch.len()],
        }
    }
}

impl Fourier {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "transform length must be positive");
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Fourier {
            n,
            forward,
            inverse,
            scratch: vec![Complex64::default(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Samples to coefficients, in place.
    pub fn forward(&mut self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.forward.process_with_scratch(buf, &mut self.scratch);
        let scale = 1.0 / self.n as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
    }

    /// Coefficients to samples, in place.
    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.inverse.process_with_scratch(buf, &mut self.scratch);
    }

    pub fn forward_real(&mut self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Spectral derivative of periodic real samples on a period of `length`.
    pub fn derivative(&mut self, values: &[f64], length: f64) -> Vec<f64> {
        let mut buf = self.forward_real(values);
        for (j, c) in buf.iter_mut().enumerate() {
            *c *= Complex64::new(0.0, angular_wavenumber(j, self.n, length));
        }
        self.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// Signed mode index in `-N/2 ..= N/2 - 1` for position `j` of an FFT buffer.
pub fn mode_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// `2 pi xi / L` for buffer position `j`.
pub fn angular_wavenumber(j: usize, n: usize, length: f64) -> f64 {
    2.0 * PI * mode_index(j, n) as f64 / length
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_indices_cover_symmetric_range() {
        let idx: Vec<i64> = (0..8).map(|j| mode_index(j, 8)).collect();
        assert_eq!(idx, vec![0, 1, 2, 3, -4, -3, -2, -1]);
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let n = 64;
        let length = 7.0;
        let mut f = Fourier::new(n);
        let s: Vec<f64> = (0..n).map(|j| j as f64 * length / n as f64).collect();
        let w = 2.0 * PI * 3.0 / length;
        let vals: Vec<f64> = s.iter().map(|x| (w * x).sin()).collect();
        let d = f.derivative(&vals, length);
        for (x, dv) in s.iter().zip(&d) {
            assert!((dv - w * (w * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_inverse_round_trip() {
        let mut f = Fourier::new(16);
        let vals: Vec<f64> = (0..16).map(|j| (j as f64 * 0.37).sin() + 0.1 * j as f64).collect();
        let mut buf = f.forward_real(&vals);
        f.inverse(&mut buf);
        for (a, b) in vals.iter().zip(&buf) {
            assert!((a - b.re).abs() < 1e-13 && b.im.abs() < 1e-13);
        }
    }
}
