//! Optical elements and the states they prepare.
//!
//! Basis conventions: path `(L, R)`, orbital `(v_a, v_b)`, polarization in the
//! circular `(+, -)` basis with `|H> = (|+> + |->)/sqrt2` and
//! `|V> = (|+> - |->)/(i sqrt2)`. The path input port `L'` of the first
//! polarizing beam splitter is the same spatial mode as `L`.
//!
//! The orbital factor is the two-dimensional span of
//! `v_a = (1, 0, 1)/sqrt2` and `v_b = (0, -i, 0)` in the `L_z` eigenbasis
//! `(m = +1, 0, -1)`; the third direction is excluded.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hilbert::{c64, labels, Ket, Operator, SpaceSignature};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn ket(sig: SpaceSignature, amps: &[Complex64]) -> Ket {
    Ket::new(sig, amps.to_vec()).expect("literal ket has the right length")
}

// --- elementary kets -------------------------------------------------------

pub fn left() -> Ket {
    ket(SpaceSignature::path(), &[ONE, ZERO])
}

pub fn right() -> Ket {
    ket(SpaceSignature::path(), &[ZERO, ONE])
}

pub fn v_a() -> Ket {
    ket(SpaceSignature::orbital(), &[ONE, ZERO])
}

pub fn v_b() -> Ket {
    ket(SpaceSignature::orbital(), &[ZERO, ONE])
}

pub fn plus() -> Ket {
    ket(SpaceSignature::polarization(), &[ONE, ZERO])
}

pub fn minus() -> Ket {
    ket(SpaceSignature::polarization(), &[ZERO, ONE])
}

pub fn horizontal() -> Ket {
    let s = c64(FRAC_1_SQRT_2, 0.0);
    ket(SpaceSignature::polarization(), &[s, s])
}

pub fn vertical() -> Ket {
    let s = c64(0.0, -FRAC_1_SQRT_2);
    ket(SpaceSignature::polarization(), &[s, -s])
}

/// `cos(a)|H> + sin(a)|V>`.
pub fn linear_polarization(angle: f64) -> Ket {
    horizontal()
        .scaled(c64(angle.cos(), 0.0))
        .add(&vertical().scaled(c64(angle.sin(), 0.0)))
        .expect("same signature")
}

/// Output of the L-splitter, `(|v_a> + i|v_b>)/sqrt2`.
pub fn l_splitter_mode() -> Ket {
    let s = FRAC_1_SQRT_2;
    ket(SpaceSignature::orbital(), &[c64(s, 0.0), c64(0.0, s)])
}

/// Documented three-component forms of `v_a`, `v_b` in the `L_z` eigenbasis.
pub fn orbital_embedding() -> [[Complex64; 2]; 3] {
    let s = FRAC_1_SQRT_2;
    [[c64(s, 0.0), ZERO], [ZERO, c64(0.0, -1.0)], [c64(s, 0.0), ZERO]]
}

/// Operator on the polarization factor from its matrix in the `(H, V)` basis.
pub fn polarization_from_hv(m: [[Complex64; 2]; 2]) -> Operator {
    let basis = [horizontal(), vertical()];
    let sig = SpaceSignature::polarization();
    let mut out = Operator::zeros(sig);
    for (i, bi) in basis.iter().enumerate() {
        for (j, bj) in basis.iter().enumerate() {
            if m[i][j] != ZERO {
                let term = Operator::outer(bi, bj).expect("same signature").scaled(m[i][j]);
                out = out.add(&term).expect("same signature");
            }
        }
    }
    out
}

// --- components ------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    Left,
    Right,
}

impl Arm {
    fn projector(self) -> Operator {
        let d = match self {
            Arm::Left => [1.0, 0.0],
            Arm::Right => [0.0, 1.0],
        };
        Operator::diagonal(SpaceSignature::path(), &d).expect("2x2")
    }

    fn other(self) -> Arm {
        match self {
            Arm::Left => Arm::Right,
            Arm::Right => Arm::Left,
        }
    }
}

impl FromStr for Arm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" | "left" => Ok(Arm::Left),
            "R" | "right" => Ok(Arm::Right),
            other => Err(invalid("arm", format!("`{other}` is not L or R"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    /// Transmits `H` (path unchanged) and reflects `V` (path swapped).
    PolarizingBeamSplitter,
    /// Swaps `H <-> V` on one arm, times the Jones phase `exp(i jones_phase)`.
    HalfWavePlate { arm: Arm, jones_phase: f64 },
    /// Multiplies one arm by `exp(i phase)`.
    PhaseShifter { arm: Arm, phase: f64 },
    /// Transmission `cos^2(alpha)`, reflection `sin^2(alpha)`, symmetric convention.
    BeamSplitter { alpha: f64 },
    /// Imprints `(|v_a> + i|v_b>)/sqrt2` on the input orbital mode `|v_a>`.
    LSplitter,
    /// Passes only the `|v_a>` orbital component (a projector, not a unitary).
    LPrimeSplitter,
    /// Rotates linear polarization: `|H> -> cos a|H> + sin a|V>`.
    PolarizationRotator { angle: f64 },
}

impl Component {
    /// Build from a kind name and a parameter map (`arm` is 0 for L, 1 for R).
    pub fn from_params(kind: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |k: &'static str| {
            params
                .get(k)
                .copied()
                .ok_or_else(|| invalid(k, format!("required by component `{kind}`")))
        };
        let arm = |v: f64| if v == 0.0 { Arm::Left } else { Arm::Right };
        Ok(match kind {
            "PBS" => Component::PolarizingBeamSplitter,
            "HWP" => Component::HalfWavePlate {
                arm: arm(get("arm")?),
                jones_phase: params.get("jones_phase").copied().unwrap_or(0.0),
            },
            "PhaseShifter" => Component::PhaseShifter {
                arm: arm(get("arm")?),
                phase: get("phase")?,
            },
            "BS" => Component::BeamSplitter { alpha: get("alpha")? },
            "LSplitter" => Component::LSplitter,
            "LPrimeSplitter" => Component::LPrimeSplitter,
            "PolRotator" => Component::PolarizationRotator { angle: get("angle")? },
            other => return Err(Error::UnknownComponent(other.to_string())),
        })
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, Component::LPrimeSplitter)
    }

    /// Factors the component acts on.
    pub fn native_signature(&self) -> SpaceSignature {
        match self {
            Component::PolarizingBeamSplitter | Component::HalfWavePlate { .. } => SpaceSignature::path()
                .concat(&SpaceSignature::polarization())
                .expect("distinct"),
            Component::PhaseShifter { .. } | Component::BeamSplitter { .. } => SpaceSignature::path(),
            Component::LSplitter | Component::LPrimeSplitter => SpaceSignature::orbital(),
            Component::PolarizationRotator { .. } => SpaceSignature::polarization(),
        }
    }

    fn native_operator(&self) -> Operator {
        let path = SpaceSignature::path();
        let pol_id = Operator::identity(SpaceSignature::polarization());
        match *self {
            Component::PolarizingBeamSplitter => {
                let h_proj = polarization_from_hv([[ONE, ZERO], [ZERO, ZERO]]);
                let v_proj = polarization_from_hv([[ZERO, ZERO], [ZERO, ONE]]);
                let swap = Operator::from_rows(path.clone(), &[&[ZERO, ONE], &[ONE, ZERO]]).unwrap();
                let transmit = Operator::identity(path).tensor(&h_proj).unwrap();
                let reflect = swap.tensor(&v_proj).unwrap();
                transmit.add(&reflect).unwrap()
            }
            Component::HalfWavePlate { arm, jones_phase } => {
                let flip =
                    polarization_from_hv([[ZERO, ONE], [ONE, ZERO]]).scaled(Complex64::from_polar(1.0, jones_phase));
                let on = arm.projector().tensor(&flip).unwrap();
                let off = arm.other().projector().tensor(&pol_id).unwrap();
                on.add(&off).unwrap()
            }
            Component::PhaseShifter { arm, phase } => arm
                .projector()
                .scaled(Complex64::from_polar(1.0, phase))
                .add(&arm.other().projector())
                .unwrap(),
            Component::BeamSplitter { alpha } => {
                let (c, s) = (alpha.cos(), alpha.sin());
                Operator::from_rows(path, &[&[c64(c, 0.0), c64(0.0, s)], &[c64(0.0, s), c64(c, 0.0)]]).unwrap()
            }
            Component::LSplitter => {
                let s = FRAC_1_SQRT_2;
                Operator::from_rows(
                    SpaceSignature::orbital(),
                    &[&[c64(s, 0.0), c64(0.0, s)], &[c64(0.0, s), c64(s, 0.0)]],
                )
                .unwrap()
            }
            Component::LPrimeSplitter => Operator::outer(&v_a(), &v_a()).unwrap(),
            Component::PolarizationRotator { angle } => {
                let (c, s) = (c64(angle.cos(), 0.0), c64(angle.sin(), 0.0));
                polarization_from_hv([[c, -s], [s, c]])
            }
        }
    }
}

/// The component's operator, extended by identities to `sig`.
pub fn component_unitary(component: &Component, sig: &SpaceSignature) -> Result<Operator> {
    component.native_operator().extend(sig)
}

/// Ordered list of components acting on one composite space.
#[derive(Debug, Clone)]
pub struct Pipeline {
    signature: SpaceSignature,
    stages: Vec<Component>,
}

impl Pipeline {
    pub fn new(signature: SpaceSignature, stages: Vec<Component>) -> Result<Self> {
        for stage in &stages {
            signature.embed_positions(&stage.native_signature())?;
        }
        Ok(Self { signature, stages })
    }

    pub fn signature(&self) -> &SpaceSignature {
        &self.signature
    }

    pub fn stages(&self) -> &[Component] {
        &self.stages
    }

    pub fn run(&self, input: &Ket) -> Result<Ket> {
        self.stages.iter().try_fold(input.clone(), |state, stage| {
            component_unitary(stage, &self.signature)?.apply(&state)
        })
    }

    /// Net operator of the whole pipeline (last stage leftmost).
    pub fn operator(&self) -> Result<Operator> {
        self.stages
            .iter()
            .try_fold(Operator::identity(self.signature.clone()), |acc, stage| {
                component_unitary(stage, &self.signature)?.compose(&acc)
            })
    }
}

/// Source, PBS_1, HWP_1 on the right arm and the pi phase shifter.
///
/// The half-wave plate carries the symmetric-convention Jones phase `i`;
/// together with the `e^{i pi}` shifter the right arm picks up `-i`.
fn preselection_stages(theta: f64, with_orbital: bool) -> Vec<Component> {
    let mut stages = vec![
        Component::PolarizationRotator { angle: theta / 2.0 },
        Component::PolarizingBeamSplitter,
        Component::HalfWavePlate {
            arm: Arm::Right,
            jones_phase: FRAC_PI_2,
        },
        Component::PhaseShifter {
            arm: Arm::Right,
            phase: PI,
        },
    ];
    if with_orbital {
        stages.push(Component::LSplitter);
    }
    stages
}

fn path_pol() -> SpaceSignature {
    SpaceSignature::path().concat(&SpaceSignature::polarization()).unwrap()
}

fn orb_pol() -> SpaceSignature {
    SpaceSignature::orbital()
        .concat(&SpaceSignature::polarization())
        .unwrap()
}

fn path_orb_pol() -> SpaceSignature {
    SpaceSignature::product(&[
        &SpaceSignature::path(),
        &SpaceSignature::orbital(),
        &SpaceSignature::polarization(),
    ])
    .unwrap()
}

/// Runs the preselection pipeline on `|L'>|H>` and returns
/// `cos(theta/2)|L>|H> - i sin(theta/2)|R>|H>`.
pub fn prepare_preselected(theta: f64) -> Result<Ket> {
    if !(theta > -PI && theta < PI) {
        return Err(invalid("theta", format!("{theta} outside (-pi, pi)")));
    }
    let input = left().tensor(&horizontal())?;
    Pipeline::new(path_pol(), preselection_stages(theta, false))?.run(&input)
}

/// Pipeline version of the disembodiment pre-selection (adds the L-splitter).
pub fn prepare_disembody_preselected(theta: f64) -> Result<Ket> {
    let input = left().tensor(&v_a())?.tensor(&horizontal())?;
    Pipeline::new(path_orb_pol(), preselection_stages(theta, true))?.run(&input)
}

/// 50:50 beam splitter fed from the right port with `|H>`: `(i|L> + |R>)|H>/sqrt2`.
pub fn prepare_cheshire_preselected() -> Result<Ket> {
    let input = right().tensor(&horizontal())?;
    Pipeline::new(
        path_pol(),
        vec![Component::BeamSplitter {
            alpha: std::f64::consts::FRAC_PI_4,
        }],
    )?
    .run(&input)
}

/// Projector onto a post-selected ket (post-selection optics as one element).
pub fn post_selection_projector(post: &Ket) -> Result<Operator> {
    let n = post.normalized()?;
    Operator::outer(&n, &n)
}

// --- named states ------------------------------------------------------------

/// Named pre- and post-selected states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateName {
    CheshireIn,
    CheshireF,
    AmpIn,
    AmpF,
    NoisyIn,
    NoisyF,
    DisembodyIn,
    DisembodyF,
}

impl StateName {
    pub const ALL: [StateName; 8] = [
        StateName::CheshireIn,
        StateName::CheshireF,
        StateName::AmpIn,
        StateName::AmpF,
        StateName::NoisyIn,
        StateName::NoisyF,
        StateName::DisembodyIn,
        StateName::DisembodyF,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StateName::CheshireIn => "cheshire_in",
            StateName::CheshireF => "cheshire_f",
            StateName::AmpIn => "amp_in",
            StateName::AmpF => "amp_f",
            StateName::NoisyIn => "noisy_in",
            StateName::NoisyF => "noisy_f",
            StateName::DisembodyIn => "disembody_in",
            StateName::DisembodyF => "disembody_f",
        }
    }

    /// Which angle parameter the state needs, if any.
    pub fn required_param(self) -> Option<&'static str> {
        match self {
            StateName::AmpIn | StateName::DisembodyIn => Some("theta"),
            StateName::NoisyF | StateName::DisembodyF => Some("alpha"),
            _ => None,
        }
    }

    pub fn signature(self) -> SpaceSignature {
        match self {
            StateName::CheshireIn | StateName::CheshireF | StateName::AmpIn | StateName::AmpF => path_pol(),
            StateName::NoisyIn | StateName::NoisyF => orb_pol(),
            StateName::DisembodyIn | StateName::DisembodyF => path_orb_pol(),
        }
    }
}

impl fmt::Display for StateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StateName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StateName::ALL
            .iter()
            .copied()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::UnknownState(s.to_string()))
    }
}

/// Angles (radians) for parametrized states.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StateParams {
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
}

impl StateParams {
    pub fn theta(theta: f64) -> Self {
        Self {
            theta: Some(theta),
            alpha: None,
        }
    }

    pub fn alpha(alpha: f64) -> Self {
        Self {
            theta: None,
            alpha: Some(alpha),
        }
    }
}

fn require(value: Option<f64>, name: &'static str, state: StateName) -> Result<f64> {
    let v = value.ok_or_else(|| invalid(name, format!("required by state `{state}`")))?;
    if !v.is_finite() {
        return Err(invalid(name, "must be finite"));
    }
    Ok(v)
}

/// Closed forms of the named states.
pub fn prepare_state(name: StateName, params: &StateParams) -> Result<Ket> {
    let half = c64(FRAC_1_SQRT_2, 0.0);
    let h = horizontal();
    let v = vertical();
    let ket = match name {
        StateName::CheshireIn => left().scaled(I).add(&right())?.scaled(half).tensor(&h)?,
        StateName::CheshireF | StateName::AmpF => left().tensor(&h)?.add(&right().tensor(&v)?)?.scaled(half),
        StateName::AmpIn => {
            let theta = require(params.theta, "theta", name)?;
            amp_path(theta).tensor(&h)?
        }
        StateName::NoisyIn => l_splitter_mode().tensor(&h)?,
        StateName::NoisyF => {
            let alpha = require(params.alpha, "alpha", name)?;
            v_a().tensor(&linear_polarization(alpha))?
        }
        StateName::DisembodyIn => {
            let theta = require(params.theta, "theta", name)?;
            amp_path(theta).tensor(&l_splitter_mode())?.tensor(&h)?
        }
        StateName::DisembodyF => {
            let alpha = require(params.alpha, "alpha", name)?;
            let lh = left().tensor(&v_a())?.tensor(&h)?;
            let rv = right().tensor(&v_a())?.tensor(&v)?;
            lh.scaled(c64(alpha.cos(), 0.0))
                .add(&rv.scaled(c64(alpha.sin(), 0.0)))?
        }
    };
    debug_assert_eq!(ket.signature(), &name.signature());
    Ok(ket)
}

fn amp_path(theta: f64) -> Ket {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    ket(SpaceSignature::path(), &[c64(c, 0.0), c64(0.0, -s)])
}

/// Factor label of each basis digit, for display.
pub fn basis_label(label: &str, digit: usize) -> &'static str {
    match (label, digit) {
        (labels::PATH, 0) => "L",
        (labels::PATH, 1) => "R",
        (labels::ORBITAL, 0) => "v_a",
        (labels::ORBITAL, 1) => "v_b",
        (labels::POLARIZATION, 0) => "+",
        (labels::POLARIZATION, 1) => "-",
        _ => "?",
    }
}
