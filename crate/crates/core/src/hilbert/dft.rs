//! Centered unitary discrete Fourier transform between the position grid
//! `q_k = k` and the momentum grid `p_l = 2 pi l / (2N+1)`, `k, l in -N..=N`.
//!
//! Kernel: `exp(-i 2 pi k l / (2N+1)) / sqrt(2N+1)`. The `2 pi` keeps `q` and
//! `p` canonically conjugate, so a phase `exp(i p0 q)` moves the momentum
//! distribution by exactly `p0` in these units.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Momentum value of grid index `l` (`-N..=N`) for a grid of odd length `len`.
pub fn momentum(l: i64, len: usize) -> f64 {
    2.0 * PI * l as f64 / len as f64
}

/// Momentum grid `p_l`, `l = -N..=N`, for odd `len = 2N+1`.
pub fn momentum_grid(len: usize) -> Vec<f64> {
    let n = (len / 2) as i64;
    (-n..=n).map(|l| momentum(l, len)).collect()
}

pub fn dft_q_to_p(amps: &[Complex64]) -> Result<Vec<Complex64>> {
    centered(amps, FftDirection::Forward)
}

pub fn dft_p_to_q(amps: &[Complex64]) -> Result<Vec<Complex64>> {
    centered(amps, FftDirection::Inverse)
}

fn centered(amps: &[Complex64], direction: FftDirection) -> Result<Vec<Complex64>> {
    let len = amps.len();
    if len.is_multiple_of(2) {
        return Err(Error::EvenLength(len));
    }
    let n = len / 2;
    // Index k = -N..=N sits at slot k + N; rotate so k = 0 lands in slot 0.
    let mut buf: Vec<Complex64> = amps[n..].iter().chain(&amps[..n]).copied().collect();
    let fft = FftPlanner::new().plan_fft(len, direction);
    fft.process(&mut buf);
    let norm = 1.0 / (len as f64).sqrt();
    // Undo the rotation: slot m holds l = m (m <= N) or l = m - len.
    let out = buf[n + 1..].iter().chain(&buf[..=n]).map(|z| z * norm).collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Direct O(n^2) evaluation of the centered kernel.
    fn direct(amps: &[Complex64]) -> Vec<Complex64> {
        let len = amps.len();
        let n = (len / 2) as i64;
        let norm = 1.0 / (len as f64).sqrt();
        (-n..=n)
            .map(|l| {
                (-n..=n)
                    .map(|k| {
                        let phase = -2.0 * PI * (k * l) as f64 / len as f64;
                        amps[(k + n) as usize] * Complex64::from_polar(1.0, phase)
                    })
                    .sum::<Complex64>()
                    * norm
            })
            .collect()
    }

    #[test]
    fn matches_direct_sum() {
        let amps: Vec<Complex64> = (0..21)
            .map(|i| c((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let fast = dft_q_to_p(&amps).unwrap();
        let slow = direct(&amps);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn uniform_maps_to_zero_momentum() {
        let len = 9;
        let amps = vec![c(1.0 / 3.0, 0.0); len];
        let p = dft_q_to_p(&amps).unwrap();
        for (i, z) in p.iter().enumerate() {
            let expected = if i == len / 2 { 1.0 } else { 0.0 };
            assert!((z - c(expected, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn round_trip() {
        let amps: Vec<Complex64> = (0..33).map(|i| c(i as f64, -(i as f64).sqrt())).collect();
        let back = dft_p_to_q(&dft_q_to_p(&amps).unwrap()).unwrap();
        for (a, b) in amps.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn even_length_rejected() {
        assert_eq!(dft_q_to_p(&[c(1.0, 0.0); 4]).unwrap_err(), Error::EvenLength(4));
    }

    #[test]
    fn discrete_gaussian_momentum_variance() {
        // N = 32, Delta = 2: |psi(p)|^2 should be Gaussian with variance 1/(4 Delta^2).
        let (n, delta) = (32i64, 2.0f64);
        let amps: Vec<Complex64> = (-n..=n)
            .map(|k| c((-(k * k) as f64 / (4.0 * delta * delta)).exp(), 0.0))
            .collect();
        let p = dft_q_to_p(&amps).unwrap();
        let grid = momentum_grid(amps.len());
        let w: Vec<f64> = p.iter().map(|z| z.norm_sqr()).collect();
        let total: f64 = w.iter().sum();
        let mean: f64 = w.iter().zip(&grid).map(|(w, p)| w * p).sum::<f64>() / total;
        let var: f64 = w.iter().zip(&grid).map(|(w, p)| w * (p - mean).powi(2)).sum::<f64>() / total;
        let expected = 1.0 / (4.0 * delta * delta);
        assert!(mean.abs() < 1e-14);
        assert!((var - expected).abs() / expected < 1e-3, "var = {var}");
    }

    #[test]
    fn phase_ramp_shifts_momentum() {
        let (n, delta, p0) = (64i64, 4.0f64, 0.05f64);
        let amps: Vec<Complex64> = (-n..=n)
            .map(|k| {
                let q = k as f64;
                Complex64::from_polar((-(q * q) / (4.0 * delta * delta)).exp(), p0 * q)
            })
            .collect();
        let p = dft_q_to_p(&amps).unwrap();
        let grid = momentum_grid(amps.len());
        let w: Vec<f64> = p.iter().map(|z| z.norm_sqr()).collect();
        let mean: f64 = w.iter().zip(&grid).map(|(w, p)| w * p).sum::<f64>() / w.iter().sum::<f64>();
        assert!((mean - p0).abs() < 1e-10, "mean = {mean}");
    }
}
