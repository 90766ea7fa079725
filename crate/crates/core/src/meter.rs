//! Discrete Gaussian pointer on the grid `q_k = k`, `k = -N..=N`, plus the
//! continuous-limit moments it should approach.
//!
//! Momenta are in grid units `p_l = 2 pi l / (2N+1)` (see [`crate::hilbert::momentum`]).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hilbert::{c64, dft_q_to_p, momentum_grid, Ket, Operator, SpaceSignature};

/// Largest `Delta / N` for which the truncated tail stays negligible.
pub const TRUNCATION_RATIO: f64 = 0.2;
/// Relative slack on `var_q var_p >= 1/4`. On the periodic grid aliasing and
/// truncation pull the product below the continuum bound by up to ~1.3e-5 at
/// `Delta = N/5`.
pub const HEISENBERG_SLACK: f64 = 5e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGaussianMeter {
    n: usize,
    delta: f64,
    amps: Vec<Complex64>,
}

/// Normalized amplitudes proportional to `exp(-q_k^2 / 4 Delta^2)`.
pub fn make_meter(n: usize, delta: f64) -> Result<DiscreteGaussianMeter> {
    DiscreteGaussianMeter::new(n, delta)
}

impl DiscreteGaussianMeter {
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "grid half-width must be at least 1"));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(invalid("delta", format!("must be positive and finite, got {delta}")));
        }
        if delta > TRUNCATION_RATIO * n as f64 {
            log::warn!(
                "meter width delta = {delta} exceeds N/5 = {}; grid truncation is no longer negligible",
                n as f64 * TRUNCATION_RATIO
            );
        }
        let raw: Vec<f64> = grid(n).map(|q| (-q * q / (4.0 * delta * delta)).exp()).collect();
        let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
        let amps = raw.into_iter().map(|a| c64(a / norm, 0.0)).collect();
        let meter = Self { n, delta, amps };
        let product = meter.uncertainty_product();
        if product < 0.25 * (1.0 - HEISENBERG_SLACK) {
            log::warn!("meter (N = {n}, delta = {delta}) has var_q var_p = {product:.6e} < 1/4");
        }
        Ok(meter)
    }

    /// `var_q * var_p` in grid units.
    pub fn uncertainty_product(&self) -> f64 {
        let q = moments(&self.amps, Representation::Q).expect("normalized meter");
        let p = moments(&self.amps, Representation::P).expect("normalized meter");
        q.variance * p.variance
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        2 * self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn q_grid(&self) -> Vec<f64> {
        grid(self.n).collect()
    }

    pub fn signature(&self) -> SpaceSignature {
        SpaceSignature::meter(self.n)
    }

    pub fn as_ket(&self) -> Ket {
        Ket::new(self.signature(), self.amps.clone()).expect("meter amplitudes match signature")
    }

    pub fn p_amplitudes(&self) -> Vec<Complex64> {
        dft_q_to_p(&self.amps).expect("meter grid has odd length")
    }
}

fn grid(n: usize) -> impl Iterator<Item = f64> {
    let n = n as i64;
    (-n..=n).map(|k| k as f64)
}

/// Diagonal position operator on the meter grid.
pub fn position_operator(n: usize) -> Operator {
    let q: Vec<f64> = grid(n).collect();
    Operator::diagonal(SpaceSignature::meter(n), &q).expect("grid length matches signature")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Q,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of the normalized state on the q grid or, via the
/// centered DFT, on the p grid.
pub fn moments(amps: &[Complex64], representation: Representation) -> Result<Moments> {
    if amps.len().is_multiple_of(2) {
        return Err(Error::EvenLength(amps.len()));
    }
    let weights: Vec<f64> = match representation {
        Representation::Q => amps.iter().map(|a| a.norm_sqr()).collect(),
        Representation::P => dft_q_to_p(amps)?.iter().map(|a| a.norm_sqr()).collect(),
    };
    let values: Vec<f64> = match representation {
        Representation::Q => grid(amps.len() / 2).collect(),
        Representation::P => momentum_grid(amps.len()),
    };
    let total: f64 = weights.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::ZeroState);
    }
    let mean = weights.iter().zip(&values).map(|(w, x)| w * x).sum::<f64>() / total;
    let variance = weights
        .iter()
        .zip(&values)
        .map(|(w, x)| w * (x - mean).powi(2))
        .sum::<f64>()
        / total;
    Ok(Moments { mean, variance })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeterReadout {
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    /// Squared norm of the (unnormalized) post-selected meter.
    pub success_probability: f64,
}

pub fn readout(amps: &[Complex64]) -> Result<MeterReadout> {
    let q = moments(amps, Representation::Q)?;
    let p = moments(amps, Representation::P)?;
    Ok(MeterReadout {
        mean_q: q.mean,
        mean_p: p.mean,
        var_q: q.variance,
        var_p: p.variance,
        success_probability: amps.iter().map(|a| a.norm_sqr()).sum(),
    })
}

/// Continuous-meter moments of `exp(i g q A) exp(-q^2 / 4 Delta^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousReference {
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
}

/// The p distribution is centred at `g Re A` with variance `1/(4 Delta^2)`;
/// `Im A` tilts the envelope, moving the q mean by `-2 g Delta^2 Im A`.
pub fn continuous_reference(delta: f64, g: f64, a_w: Complex64) -> Result<ContinuousReference> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(invalid("delta", format!("must be positive and finite, got {delta}")));
    }
    let d2 = delta * delta;
    Ok(ContinuousReference {
        mean_q: -2.0 * g * d2 * a_w.im,
        mean_p: g * a_w.re,
        var_q: d2,
        var_p: 1.0 / (4.0 * d2),
    })
}

/// `exp(i g q_k A)` applied pointwise to the meter.
pub fn kicked_amplitudes(meter: &DiscreteGaussianMeter, g: f64, a: Complex64) -> Vec<Complex64> {
    meter
        .amplitudes()
        .iter()
        .zip(grid(meter.n()))
        .map(|(phi, q)| phi * (c64(0.0, g * q) * a).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn small_grid_amplitudes() {
        let m = make_meter(2, 1.0).unwrap();
        let raw = [
            (-1.0f64).exp(),
            (-0.25f64).exp(),
            1.0,
            (-0.25f64).exp(),
            (-1.0f64).exp(),
        ];
        let ratio = m.amplitudes()[2].re / raw[2];
        for (a, r) in m.amplitudes().iter().zip(raw) {
            assert!((a.re - r * ratio).abs() < 1e-15);
            assert_eq!(a.im, 0.0);
        }
        assert!((m.as_ket().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fresh_meter_is_centred() {
        for (n, d) in [(3, 0.7), (20, 2.5), (64, 4.0)] {
            let r = readout(make_meter(n, d).unwrap().amplitudes()).unwrap();
            assert!(r.mean_q.abs() < 1e-14);
            assert!(r.mean_p.abs() < 1e-14);
            assert!((r.success_probability - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn position_variance_matches_integral() {
        // |psi|^2 ~ exp(-q^2 / 2 Delta^2): variance Delta^2 in the continuum.
        let m = make_meter(64, 4.0).unwrap();
        let v = moments(m.amplitudes(), Representation::Q).unwrap().variance;
        assert!((v - 16.0).abs() / 16.0 < 1e-6, "var_q = {v}");
    }

    #[test]
    fn recentred_meter_mean() {
        let m = make_meter(40, 3.0).unwrap();
        let shift = 5usize;
        let mut amps = vec![c64(0.0, 0.0); m.len()];
        for (i, a) in m.amplitudes().iter().enumerate().take(m.len() - shift) {
            amps[i + shift] = *a;
        }
        let q = moments(&amps, Representation::Q).unwrap();
        assert!((q.mean - shift as f64).abs() < 1e-9);
    }

    #[test]
    fn phase_kick_shifts_momentum() {
        let m = make_meter(64, 4.0).unwrap();
        let (g, a) = (0.01, 0.7);
        let kicked = kicked_amplitudes(&m, g, c64(a, 0.0));
        let p = moments(&kicked, Representation::P).unwrap();
        assert!((p.mean - g * a).abs() < 1e-10);
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(
            moments(&[c64(0.0, 0.0); 5], Representation::Q).unwrap_err(),
            Error::ZeroState
        );
    }

    #[test]
    fn bad_parameters() {
        assert!(make_meter(0, 1.0).is_err());
        assert!(make_meter(4, 0.0).is_err());
        assert!(make_meter(4, f64::NAN).is_err());
    }

    #[test]
    fn continuous_reference_values() {
        let r = continuous_reference(4.0, 0.01, c64(1.0, 0.0)).unwrap();
        assert!((r.mean_p - 0.01).abs() < 1e-15);
        assert_eq!(r.mean_q, 0.0);
        let t = (PI / 4.0).tan();
        let r = continuous_reference(4.0, 0.01, c64(0.0, t)).unwrap();
        assert!((r.mean_q + 0.32).abs() < 1e-12);
    }

    #[test]
    fn q_shift_oracle_by_quadrature() {
        // Integrate |exp(i g q A) exp(-q^2/4 Delta^2)|^2 by the trapezoid rule.
        let (delta, g, a) = (4.0f64, 0.01, c64(0.3, 1.0));
        let (lo, hi, steps) = (-80.0f64, 80.0f64, 160_000);
        let h = (hi - lo) / steps as f64;
        let (mut z, mut m1) = (0.0, 0.0);
        for i in 0..=steps {
            let q = lo + i as f64 * h;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            let amp = (c64(0.0, g * q) * a).exp() * (-q * q / (4.0 * delta * delta)).exp();
            z += w * amp.norm_sqr();
            m1 += w * q * amp.norm_sqr();
        }
        let r = continuous_reference(delta, g, a).unwrap();
        assert!((m1 / z - r.mean_q).abs() < 1e-9);
    }

    #[test]
    fn heisenberg_product() {
        for n in [10usize, 32, 64] {
            let mut d = 1.0;
            while d <= n as f64 * TRUNCATION_RATIO {
                let product = make_meter(n, d).unwrap().uncertainty_product();
                assert!(product >= 0.25 * (1.0 - HEISENBERG_SLACK), "n={n} d={d}");
                d += 0.5;
            }
        }
    }
}
