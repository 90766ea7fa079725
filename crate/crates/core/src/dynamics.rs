//! System-meter couplings, their exact and second-order evolution, post-selection
//! of the meter and extraction of the effective weak value from its shape.
//!
//! Every coupling is `kick + static`: an instantaneous kick `exp(+i G)` with
//! `G = sum_j S_j (x) M_j` (`M_j` the meter identity or `q`) applied at
//! `kick_time`, and a system-only static Hamiltonian acting for the whole
//! duration `t`. Because each kick term is diagonal in `q`, the joint unitary
//! splits into one small system matrix per grid point.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hilbert::{c64, exp_hermitian, mat_exp, Ket, Operator, SpaceSignature};
use crate::meter::{self, position_operator, DiscreteGaussianMeter, MeterReadout};
use crate::optics::{self, StateName, StateParams};
use crate::weakvalue::{l_x, l_z, projector_l, projector_r, sigma_x, sigma_z, ObservableCatalog, ObservableId};

/// Post-selected meters with a smaller norm count as annihilated.
pub const ANNIHILATION_NORM: f64 = 1e-14;
/// Grid points whose reference amplitude is below this are left out of the fit.
pub const FIT_AMPLITUDE_FLOOR: f64 = 1e-8;
/// Weighted RMS log-residual above which a fit is rejected.
pub const FIT_RESIDUAL_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CouplingVariant {
    /// `-g delta(t) A (x) q`, no noise.
    NoiselessKick,
    /// `sigma_z` kick plus static `g' L_x (x) sigma_x`.
    SpinOrbit,
    /// `sigma_z` kick plus static `g' L_x (x) sigma_z`.
    Parallel1,
    /// `sigma_z` kick plus static `g' L_z (x) sigma_z`.
    Parallel2,
    /// `-g delta(t) (sigma_z - L_x (x) sigma_x) (x) q`.
    ThreeBody,
    MeasureSigmaZR,
    MeasureSigmaZRNoisy,
    MeasureSigmaZLNoisy,
    MeasureLxSxL,
    MeasureLxSxR,
}

impl CouplingVariant {
    pub const ALL: [CouplingVariant; 10] = [
        CouplingVariant::NoiselessKick,
        CouplingVariant::SpinOrbit,
        CouplingVariant::Parallel1,
        CouplingVariant::Parallel2,
        CouplingVariant::ThreeBody,
        CouplingVariant::MeasureSigmaZR,
        CouplingVariant::MeasureSigmaZRNoisy,
        CouplingVariant::MeasureSigmaZLNoisy,
        CouplingVariant::MeasureLxSxL,
        CouplingVariant::MeasureLxSxR,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CouplingVariant::NoiselessKick => "noiseless_kick",
            CouplingVariant::SpinOrbit => "spin_orbit",
            CouplingVariant::Parallel1 => "parallel_1",
            CouplingVariant::Parallel2 => "parallel_2",
            CouplingVariant::ThreeBody => "three_body",
            CouplingVariant::MeasureSigmaZR => "measure_sigma_zR",
            CouplingVariant::MeasureSigmaZRNoisy => "measure_sigma_zR_noisy",
            CouplingVariant::MeasureSigmaZLNoisy => "measure_sigma_zL_noisy",
            CouplingVariant::MeasureLxSxL => "measure_LxSx_L",
            CouplingVariant::MeasureLxSxR => "measure_LxSx_R",
        }
    }

    pub fn default_noise(self) -> Noise {
        match self {
            CouplingVariant::SpinOrbit
            | CouplingVariant::MeasureSigmaZRNoisy
            | CouplingVariant::MeasureSigmaZLNoisy => Noise::SpinOrbit,
            CouplingVariant::Parallel1 => Noise::Parallel1,
            CouplingVariant::Parallel2 => Noise::Parallel2,
            _ => Noise::Off,
        }
    }

    /// The `L_x sigma_x` measurements couple with integrated strength `g' t`.
    pub fn measures_noise_term(self) -> bool {
        matches!(self, CouplingVariant::MeasureLxSxL | CouplingVariant::MeasureLxSxR)
    }
}

impl fmt::Display for CouplingVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CouplingVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CouplingVariant::ALL
            .iter()
            .copied()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::UnknownVariant(s.to_string()))
    }
}

/// Static system Hamiltonian (per unit `g'`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Noise {
    Off,
    /// `L_x (x) sigma_x`
    SpinOrbit,
    /// `L_x (x) sigma_z`
    Parallel1,
    /// `L_z (x) sigma_z`
    Parallel2,
}

impl Noise {
    pub const ALL: [Noise; 4] = [Noise::Off, Noise::SpinOrbit, Noise::Parallel1, Noise::Parallel2];

    pub fn as_str(self) -> &'static str {
        match self {
            Noise::Off => "off",
            Noise::SpinOrbit => "spin_orbit",
            Noise::Parallel1 => "parallel_1",
            Noise::Parallel2 => "parallel_2",
        }
    }

    pub fn operator(self) -> Option<Operator> {
        let op = match self {
            Noise::Off => return None,
            Noise::SpinOrbit => l_x().tensor(&sigma_x()),
            Noise::Parallel1 => l_x().tensor(&sigma_z()),
            Noise::Parallel2 => l_z().tensor(&sigma_z()),
        };
        Some(op.expect("orbital and polarization labels are distinct"))
    }
}

impl fmt::Display for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Noise {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Noise::ALL
            .iter()
            .copied()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::UnknownVariant(s.to_string()))
    }
}

/// `Standard` exponentiates `H = -g delta(t) A (x) q` to `exp(+i g A q)`;
/// `Published` uses `exp(-i g A q)`, the sign shown in the published expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum KickSign {
    #[default]
    Standard,
    Published,
}

impl KickSign {
    pub fn as_str(self) -> &'static str {
        match self {
            KickSign::Standard => "standard",
            KickSign::Published => "published",
        }
    }

    fn factor(self) -> Complex64 {
        match self {
            KickSign::Standard => c64(0.0, 1.0),
            KickSign::Published => c64(0.0, -1.0),
        }
    }
}

impl FromStr for KickSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(KickSign::Standard),
            "published" => Ok(KickSign::Published),
            _ => Err(Error::UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSpec {
    pub variant: CouplingVariant,
    pub g: f64,
    pub g_prime: f64,
    pub t: f64,
    pub kick_time: f64,
    /// Kicked observable of `noiseless_kick`; ignored elsewhere.
    pub observable: ObservableId,
    /// Overrides the variant's default static term.
    pub noise: Option<Noise>,
    pub sign: KickSign,
}

impl CouplingSpec {
    pub fn new(variant: CouplingVariant) -> Self {
        Self {
            variant,
            g: 1e-3,
            g_prime: 1e-3,
            t: 1.0,
            kick_time: 0.0,
            observable: ObservableId::SigmaZ,
            noise: None,
            sign: KickSign::Standard,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("g", self.g), ("g_prime", self.g_prime)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(invalid("t", format!("must be finite and > 0, got {}", self.t)));
        }
        if !(self.kick_time >= 0.0 && self.kick_time <= self.t) {
            return Err(invalid(
                "kick_time",
                format!("must lie in [0, t], got {}", self.kick_time),
            ));
        }
        Ok(())
    }

    pub fn effective_noise(&self) -> Noise {
        self.noise.unwrap_or_else(|| self.variant.default_noise())
    }

    /// Coupling constant multiplying `q` in the kick; the slope the fit divides by.
    pub fn meter_coupling(&self) -> f64 {
        if self.variant.measures_noise_term() {
            self.g_prime * self.t
        } else {
            self.g
        }
    }

    /// `g/g' << t << sqrt(g)/g'`, each `<<` taken as a factor of 10.
    pub fn in_regime(&self) -> bool {
        self.g_prime > 0.0 && 10.0 * self.g / self.g_prime <= self.t && self.t <= self.g.sqrt() / (10.0 * self.g_prime)
    }

    /// Factors the coupling acts on when no larger space is imposed.
    pub fn natural_signature(&self) -> SpaceSignature {
        let path = SpaceSignature::path();
        let orb = SpaceSignature::orbital();
        let pol = SpaceSignature::polarization();
        match self.variant {
            CouplingVariant::NoiselessKick => self.observable.native_signature(),
            CouplingVariant::SpinOrbit
            | CouplingVariant::Parallel1
            | CouplingVariant::Parallel2
            | CouplingVariant::ThreeBody => orb.concat(&pol).unwrap(),
            CouplingVariant::MeasureSigmaZR if self.effective_noise() == Noise::Off => path.concat(&pol).unwrap(),
            _ => SpaceSignature::product(&[&path, &orb, &pol]).unwrap(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeterFactor {
    Identity,
    Position,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KickTerm {
    pub system: Operator,
    pub meter: MeterFactor,
}

/// Kick generator and static Hamiltonian, both on the system factors only.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingHamiltonian {
    pub kick: Vec<KickTerm>,
    pub static_h: Operator,
    pub sign: KickSign,
}

impl CouplingHamiltonian {
    pub fn system_signature(&self) -> &SpaceSignature {
        self.static_h.signature()
    }

    /// Kick generator restricted to grid point `q`.
    fn kick_block(&self, q: f64) -> DMatrix<Complex64> {
        let d = self.static_h.dim();
        let mut m = DMatrix::zeros(d, d);
        for term in &self.kick {
            let w = match term.meter {
                MeterFactor::Identity => 1.0,
                MeterFactor::Position => q,
            };
            m += term.system.matrix() * c64(w, 0.0);
        }
        m
    }

    /// Dense kick generator on `system (x) meter`.
    pub fn kick_operator(&self, n: usize) -> Result<Operator> {
        let meter_sig = SpaceSignature::meter(n);
        let sig = self.system_signature().concat(&meter_sig)?;
        let mut acc = Operator::zeros(sig);
        for term in &self.kick {
            let m = match term.meter {
                MeterFactor::Identity => Operator::identity(meter_sig.clone()),
                MeterFactor::Position => position_operator(n),
            };
            acc = acc.add(&term.system.tensor(&m)?)?;
        }
        Ok(acc)
    }

    pub fn static_operator(&self, n: usize) -> Result<Operator> {
        self.static_h.tensor(&Operator::identity(SpaceSignature::meter(n)))
    }
}

fn arm_split(arm: Operator, other: Operator, local: Operator, strength: f64) -> Result<Vec<KickTerm>> {
    Ok(vec![
        KickTerm {
            system: other.tensor(&local)?.scaled_re(strength),
            meter: MeterFactor::Identity,
        },
        KickTerm {
            system: arm.tensor(&local)?.scaled_re(strength),
            meter: MeterFactor::Position,
        },
    ])
}

/// Kick terms and static Hamiltonian of `spec`, extended to `system`.
pub fn build_hamiltonian(spec: &CouplingSpec, system: &SpaceSignature) -> Result<CouplingHamiltonian> {
    spec.validate()?;
    if system.contains(crate::hilbert::labels::METER) {
        return Err(invalid("system", "signature must not contain the meter factor"));
    }
    let g = spec.g;
    let orb_id = Operator::identity(SpaceSignature::orbital());
    let position = |op: Operator| KickTerm {
        system: op,
        meter: MeterFactor::Position,
    };
    let sz_full = || orb_id.tensor(&sigma_z()).unwrap();
    let with_orbital = |op: Operator| -> Result<Operator> {
        if system.contains(crate::hilbert::labels::ORBITAL) {
            orb_id.tensor(&op)
        } else {
            Ok(op)
        }
    };
    let lxsx = || l_x().tensor(&sigma_x()).unwrap();

    let kick: Vec<KickTerm> = match spec.variant {
        CouplingVariant::NoiselessKick => {
            vec![position(
                ObservableCatalog::default().operator(spec.observable).scaled_re(g),
            )]
        }
        CouplingVariant::SpinOrbit | CouplingVariant::Parallel1 | CouplingVariant::Parallel2 => {
            vec![position(sz_full().scaled_re(g))]
        }
        CouplingVariant::ThreeBody => vec![position(sz_full().sub(&lxsx())?.scaled_re(g))],
        CouplingVariant::MeasureSigmaZR | CouplingVariant::MeasureSigmaZRNoisy => {
            arm_split(projector_r(), projector_l(), with_orbital(sigma_z())?, g)?
        }
        CouplingVariant::MeasureSigmaZLNoisy => arm_split(projector_l(), projector_r(), with_orbital(sigma_z())?, g)?,
        CouplingVariant::MeasureLxSxL => arm_split(projector_l(), projector_r(), lxsx(), spec.meter_coupling())?,
        CouplingVariant::MeasureLxSxR => arm_split(projector_r(), projector_l(), lxsx(), spec.meter_coupling())?,
    };

    let kick = kick
        .into_iter()
        .map(|k| {
            Ok(KickTerm {
                system: k.system.extend(system)?,
                meter: k.meter,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let static_h = match spec.effective_noise().operator() {
        Some(op) if spec.g_prime != 0.0 => op.scaled_re(spec.g_prime).extend(system)?,
        _ => Operator::zeros(system.clone()),
    };
    Ok(CouplingHamiltonian {
        kick,
        static_h,
        sign: spec.sign,
    })
}

/// Per-grid-point system unitaries `U_k = exp(-i S (t - tau)) exp(+-i G_k) exp(-i S tau)`.
fn exact_blocks(spec: &CouplingSpec, h: &CouplingHamiltonian, q: &[f64]) -> Vec<DMatrix<Complex64>> {
    let s = h.static_h.matrix();
    let before = exp_hermitian(s, c64(0.0, -spec.kick_time));
    let after = exp_hermitian(s, c64(0.0, -(spec.t - spec.kick_time)));
    let sign = h.sign.factor();
    q.iter()
        .map(|&qk| &after * exp_hermitian(&h.kick_block(qk), sign) * &before)
        .collect()
}

/// Which second-order terms the truncated propagator keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DysonTerms {
    /// Drops the kick-squared term, as the published expansion does.
    #[default]
    Published,
    /// Every term through second order.
    Full,
}

/// Second-order time-ordered expansion of the same product as [`exact_blocks`].
/// With `A = -i (t - tau) S`, `B = +-i G_k`, `C = -i tau S`:
/// `1 + A + B + C + (A^2 + B^2 + C^2)/2 + AB + AC + BC`.
fn dyson_blocks(spec: &CouplingSpec, h: &CouplingHamiltonian, q: &[f64], terms: DysonTerms) -> Vec<DMatrix<Complex64>> {
    let s = h.static_h.matrix();
    let d = s.nrows();
    let id: DMatrix<Complex64> = DMatrix::identity(d, d);
    let a = s * c64(0.0, -(spec.t - spec.kick_time));
    let c = s * c64(0.0, -spec.kick_time);
    let half = c64(0.5, 0.0);
    let static_part = &id + &a + &c + (&a * &a + &c * &c) * half + &a * &c;
    let sign = h.sign.factor();
    q.iter()
        .map(|&qk| {
            let b = h.kick_block(qk) * sign;
            let mut u = &static_part + &b + &a * &b + &b * &c;
            if terms == DysonTerms::Full {
                u += &b * &b * half;
            }
            u
        })
        .collect()
}

fn apply_blocks(blocks: &[DMatrix<Complex64>], pre: &Ket, meter: &DiscreteGaussianMeter) -> Result<Ket> {
    let len = meter.len();
    let sys_dim = pre.dim();
    let psi = DVector::from_column_slice(pre.amplitudes());
    let mut amps = vec![c64(0.0, 0.0); sys_dim * len];
    for (k, (block, phi)) in blocks.iter().zip(meter.amplitudes()).enumerate() {
        let out = block * &psi;
        for s in 0..sys_dim {
            amps[s * len + k] = out[s] * phi;
        }
    }
    Ket::new(pre.signature().concat(&meter.signature())?, amps)
}

/// Joint state after the coupling, computed block by block in `q`.
pub fn evolve_exact(spec: &CouplingSpec, pre_system: &Ket, meter: &DiscreteGaussianMeter) -> Result<Ket> {
    let h = build_hamiltonian(spec, pre_system.signature())?;
    let blocks = exact_blocks(spec, &h, &meter.q_grid());
    apply_blocks(&blocks, pre_system, meter)
}

/// Same as [`evolve_exact`] but exponentiating the dense joint operators.
/// Quadratic in the meter size; meant for cross-checks on small grids.
pub fn evolve_exact_dense(spec: &CouplingSpec, pre_system: &Ket, meter: &DiscreteGaussianMeter) -> Result<Ket> {
    let h = build_hamiltonian(spec, pre_system.signature())?;
    let kick = h.kick_operator(meter.n())?;
    let stat = h.static_operator(meter.n())?;
    let before = mat_exp(&stat, c64(0.0, -spec.kick_time))?;
    let after = mat_exp(&stat, c64(0.0, -(spec.t - spec.kick_time)))?;
    let u = after.compose(&mat_exp(&kick, h.sign.factor())?)?.compose(&before)?;
    u.apply(&pre_system.tensor(&meter.as_ket())?)
}

pub fn evolve_dyson2(
    spec: &CouplingSpec,
    pre_system: &Ket,
    meter: &DiscreteGaussianMeter,
    terms: DysonTerms,
) -> Result<Ket> {
    if !spec.in_regime() {
        log::warn!(
            "coupling g = {}, g' = {}, t = {} is outside g/g' << t << sqrt(g)/g'",
            spec.g,
            spec.g_prime,
            spec.t
        );
    }
    let h = build_hamiltonian(spec, pre_system.signature())?;
    let blocks = dyson_blocks(spec, &h, &meter.q_grid(), terms);
    apply_blocks(&blocks, pre_system, meter)
}

/// Spectral norm of `U_exact - U_dyson2` on `system (x) meter(n)`. Both are
/// block diagonal in `q`, so this is the largest block norm.
pub fn dyson_operator_error(spec: &CouplingSpec, system: &SpaceSignature, n: usize, terms: DysonTerms) -> Result<f64> {
    let h = build_hamiltonian(spec, system)?;
    let q: Vec<f64> = (-(n as i64)..=n as i64).map(|k| k as f64).collect();
    let exact = exact_blocks(spec, &h, &q);
    let dyson = dyson_blocks(spec, &h, &q, terms);
    Ok(exact
        .iter()
        .zip(&dyson)
        .map(|(e, d)| (e - d).singular_values().max())
        .fold(0.0, f64::max))
}

/// Partial inner product with `post_system`; the squared norm of the result is
/// the post-selection probability.
pub fn post_select_meter(joint: &Ket, post_system: &Ket) -> Result<Ket> {
    if post_system.signature().contains(crate::hilbert::labels::METER) {
        return Err(invalid("post_system", "must act on system factors only"));
    }
    let meter = post_system.contract(joint)?;
    let norm = meter.norm();
    if norm < ANNIHILATION_NORM {
        return Err(Error::Annihilated { norm });
    }
    Ok(meter)
}

/// `final_k ~ exp(a) exp(i g q_k A) reference_k`. `a` absorbs `<f|i>` as well as
/// the non-shifting part of the effective weak value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct EffectiveWeakValueFit {
    pub a_fit: Complex64,
    pub A_fit: Complex64,
    /// Weighted RMS of the complex log residuals.
    pub residual: f64,
}

impl EffectiveWeakValueFit {
    pub fn value(&self) -> Complex64 {
        self.A_fit
    }
}

/// Weighted least squares of `log(final_k / reference_k) = a + i g q_k A`
/// with weights `|reference_k|^2`. Phases are unwrapped outward from the
/// heaviest grid point.
pub fn fit_effective_weak_value(
    final_meter: &[Complex64],
    reference: &DiscreteGaussianMeter,
    g: f64,
) -> Result<EffectiveWeakValueFit> {
    if !(g.is_finite() && g > 0.0) {
        return Err(invalid("g", format!("fit needs a positive coupling, got {g}")));
    }
    if final_meter.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            found: final_meter.len(),
        });
    }
    let q = reference.q_grid();
    let refs = reference.amplitudes();
    let usable: Vec<usize> = (0..refs.len())
        .filter(|&k| refs[k].norm() > FIT_AMPLITUDE_FLOOR)
        .collect();
    if usable.iter().any(|&k| final_meter[k].norm() == 0.0) {
        return Err(Error::IllConditionedFit(
            "final meter vanishes inside the fit window".into(),
        ));
    }
    if usable.len() < 2 {
        return Err(Error::IllConditionedFit(format!(
            "{} usable grid point(s)",
            usable.len()
        )));
    }

    let logs: Vec<Complex64> = usable.iter().map(|&k| (final_meter[k] / refs[k]).ln()).collect();
    let weights: Vec<f64> = usable.iter().map(|&k| refs[k].norm_sqr()).collect();
    let qs: Vec<f64> = usable.iter().map(|&k| q[k]).collect();

    let centre = (0..weights.len())
        .max_by(|&i, &j| weights[i].total_cmp(&weights[j]))
        .unwrap();
    let mut phase: Vec<f64> = logs.iter().map(|l| l.im).collect();
    for i in centre + 1..phase.len() {
        phase[i] = unwrap_step(phase[i - 1], phase[i]);
    }
    for i in (0..centre).rev() {
        phase[i] = unwrap_step(phase[i + 1], phase[i]);
    }
    let modulus: Vec<f64> = logs.iter().map(|l| l.re).collect();

    let w_sum: f64 = weights.iter().sum();
    let q_mean = weighted_mean(&weights, &qs);
    let sqq: f64 = weights.iter().zip(&qs).map(|(w, x)| w * (x - q_mean).powi(2)).sum();
    if sqq <= 1e-12 * w_sum {
        return Err(Error::IllConditionedFit(
            "all weight sits on a single grid point".into(),
        ));
    }
    let line = |y: &[f64]| {
        let y_mean = weighted_mean(&weights, y);
        let sxy: f64 = weights
            .iter()
            .zip(&qs)
            .zip(y)
            .map(|((w, x), v)| w * (x - q_mean) * (v - y_mean))
            .sum();
        let slope = sxy / sqq;
        (y_mean - slope * q_mean, slope)
    };
    let (re0, re1) = line(&modulus);
    let (im0, im1) = line(&phase);

    let a_fit = c64(re0, im0);
    let big_a = c64(im1 / g, -re1 / g);
    let ss: f64 = (0..qs.len())
        .map(|i| {
            let model = a_fit + c64(0.0, g * qs[i]) * big_a;
            weights[i] * (c64(modulus[i], phase[i]) - model).norm_sqr()
        })
        .sum();
    Ok(EffectiveWeakValueFit {
        a_fit,
        A_fit: big_a,
        residual: (ss / w_sum).sqrt(),
    })
}

fn weighted_mean(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() / w.iter().sum::<f64>()
}

fn unwrap_step(prev: f64, cur: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut d = (cur - prev) % TAU;
    if d > PI {
        d -= TAU;
    } else if d < -PI {
        d += TAU;
    }
    prev + d
}

/// Readout and fit of one pre-select / couple / post-select run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub readout: MeterReadout,
    pub fit: EffectiveWeakValueFit,
    /// `<post|pre>` of the system states alone.
    pub overlap: Complex64,
}

/// Full meter-dynamics run: evolve, post-select, read out, fit. The fit is
/// rejected when its residual exceeds [`FIT_RESIDUAL_LIMIT`].
pub fn measure(
    spec: &CouplingSpec,
    pre: &Ket,
    post: &Ket,
    meter: &DiscreteGaussianMeter,
) -> Result<MeasurementOutcome> {
    pre.signature().ensure_eq(post.signature())?;
    let overlap = post.inner(pre)?;
    let normalized = overlap.norm() / (pre.norm() * post.norm());
    if normalized <= crate::weakvalue::DEFAULT_OVERLAP_THRESHOLD {
        return Err(Error::DegeneratePostSelection { overlap: normalized });
    }
    let joint = evolve_exact(spec, pre, meter)?;
    let final_meter = post_select_meter(&joint, post)?;
    let readout = meter::readout(final_meter.amplitudes())?;
    let fit = fit_effective_weak_value(final_meter.amplitudes(), meter, spec.meter_coupling())?;
    if fit.residual > FIT_RESIDUAL_LIMIT {
        return Err(Error::IllConditionedFit(format!(
            "residual {:.3e} exceeds {FIT_RESIDUAL_LIMIT}",
            fit.residual
        )));
    }
    Ok(MeasurementOutcome { readout, fit, overlap })
}

/// What the disembodiment run couples to the meter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DisembodiedTarget {
    SigmaZR,
    SigmaZL,
    LxSxL,
    LxSxR,
}

impl DisembodiedTarget {
    pub fn variant(self) -> CouplingVariant {
        match self {
            DisembodiedTarget::SigmaZR => CouplingVariant::MeasureSigmaZRNoisy,
            DisembodiedTarget::SigmaZL => CouplingVariant::MeasureSigmaZLNoisy,
            DisembodiedTarget::LxSxL => CouplingVariant::MeasureLxSxL,
            DisembodiedTarget::LxSxR => CouplingVariant::MeasureLxSxR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisembodimentSetup {
    pub theta: f64,
    pub alpha: f64,
    pub target: DisembodiedTarget,
    pub g: f64,
    pub g_prime: f64,
    pub t: f64,
    pub kick_time: f64,
    /// Static term present during the measurement; `None` keeps the variant default.
    pub noise: Option<Noise>,
    pub sign: KickSign,
}

impl DisembodimentSetup {
    pub fn new(theta: f64, alpha: f64, target: DisembodiedTarget) -> Self {
        Self {
            theta,
            alpha,
            target,
            g: 1e-3,
            g_prime: 1e-3,
            t: 1.0,
            kick_time: 0.0,
            noise: None,
            sign: KickSign::Standard,
        }
    }

    pub fn coupling(&self) -> CouplingSpec {
        CouplingSpec {
            variant: self.target.variant(),
            g: self.g,
            g_prime: self.g_prime,
            t: self.t,
            kick_time: self.kick_time,
            observable: ObservableId::SigmaZ,
            noise: self.noise,
            sign: self.sign,
        }
    }
}

/// Pre-select `disembody_in(theta)`, couple, post-select `disembody_f(alpha)`.
pub fn disembodied_measurement(
    setup: &DisembodimentSetup,
    meter: &DiscreteGaussianMeter,
) -> Result<MeasurementOutcome> {
    let pre = optics::prepare_state(StateName::DisembodyIn, &StateParams::theta(setup.theta))?;
    let post = optics::prepare_state(StateName::DisembodyF, &StateParams::alpha(setup.alpha))?;
    measure(&setup.coupling(), &pre, &post, meter)
}
