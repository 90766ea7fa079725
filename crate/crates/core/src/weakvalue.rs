//! Observable catalog and weak values `A_w = <f|A|i> / <f|i>`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{c64, Ket, Operator, SpaceSignature};
use crate::optics::{self, StateName, StateParams};

/// Normalized overlaps `|<f|i>| / (|f| |i|)` at or below this are degenerate.
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObservableId {
    PiL,
    PiR,
    SigmaZ,
    SigmaX,
    SigmaZL,
    SigmaZR,
    SigmaXL,
    SigmaXR,
    Lx,
    Lz,
    LxSx,
    LxSxL,
    LxSxR,
    /// `sigma_z + i g't L_x (x) sigma_x sigma_z`
    APrime,
    /// `sigma_z + i g't L_x (x) I`
    APrime1,
    /// `sigma_z + i g't L_z (x) I`
    APrime2,
    /// `sigma_z - L_x (x) sigma_x`
    APrime3,
}

impl ObservableId {
    pub const ALL: [ObservableId; 17] = [
        ObservableId::PiL,
        ObservableId::PiR,
        ObservableId::SigmaZ,
        ObservableId::SigmaX,
        ObservableId::SigmaZL,
        ObservableId::SigmaZR,
        ObservableId::SigmaXL,
        ObservableId::SigmaXR,
        ObservableId::Lx,
        ObservableId::Lz,
        ObservableId::LxSx,
        ObservableId::LxSxL,
        ObservableId::LxSxR,
        ObservableId::APrime,
        ObservableId::APrime1,
        ObservableId::APrime2,
        ObservableId::APrime3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObservableId::PiL => "Pi_L",
            ObservableId::PiR => "Pi_R",
            ObservableId::SigmaZ => "sigma_z",
            ObservableId::SigmaX => "sigma_x",
            ObservableId::SigmaZL => "sigma_z_L",
            ObservableId::SigmaZR => "sigma_z_R",
            ObservableId::SigmaXL => "sigma_x_L",
            ObservableId::SigmaXR => "sigma_x_R",
            ObservableId::Lx => "L_x",
            ObservableId::Lz => "L_z",
            ObservableId::LxSx => "LxSx",
            ObservableId::LxSxL => "LxSx_L",
            ObservableId::LxSxR => "LxSx_R",
            ObservableId::APrime => "A_prime",
            ObservableId::APrime1 => "A_prime_1",
            ObservableId::APrime2 => "A_prime_2",
            ObservableId::APrime3 => "A_prime_3",
        }
    }

    /// Factors the observable acts on natively.
    pub fn native_signature(self) -> SpaceSignature {
        use ObservableId::*;
        let path = SpaceSignature::path();
        let orb = SpaceSignature::orbital();
        let pol = SpaceSignature::polarization();
        match self {
            PiL | PiR => path,
            SigmaZ | SigmaX => pol,
            SigmaZL | SigmaZR | SigmaXL | SigmaXR => path.concat(&pol).unwrap(),
            Lx | Lz => orb,
            LxSx | APrime | APrime1 | APrime2 | APrime3 => orb.concat(&pol).unwrap(),
            LxSxL | LxSxR => SpaceSignature::product(&[&path, &orb, &pol]).unwrap(),
        }
    }

    /// Whether the observable is defined on states with this signature.
    pub fn fits(self, sig: &SpaceSignature) -> bool {
        self.native_signature()
            .factors()
            .iter()
            .all(|f| sig.factor_dim(&f.label) == Some(f.dim))
    }

    /// `A'` is Hermitian because `i sigma_x sigma_z = sigma_y`; `A'_1` and
    /// `A'_2` carry an anti-Hermitian noise part.
    pub fn is_hermitian(self) -> bool {
        !matches!(self, ObservableId::APrime1 | ObservableId::APrime2)
    }
}

impl fmt::Display for ObservableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObservableId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ObservableId::ALL
            .iter()
            .copied()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::UnknownObservable(s.to_string()))
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn projector_l() -> Operator {
    Operator::diagonal(SpaceSignature::path(), &[1.0, 0.0]).unwrap()
}

pub fn projector_r() -> Operator {
    Operator::diagonal(SpaceSignature::path(), &[0.0, 1.0]).unwrap()
}

/// `|+><+| - |-><-|`.
pub fn sigma_z() -> Operator {
    Operator::diagonal(SpaceSignature::polarization(), &[1.0, -1.0]).unwrap()
}

/// `|+><-| + |-><+|`.
pub fn sigma_x() -> Operator {
    let m = DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    Operator::hermitian(SpaceSignature::polarization(), m).unwrap()
}

/// `-i(|v_a><v_b| - |v_b><v_a|)`.
pub fn l_x() -> Operator {
    let m = DMatrix::from_row_slice(2, 2, &[ZERO, c64(0.0, -1.0), c64(0.0, 1.0), ZERO]);
    Operator::hermitian(SpaceSignature::orbital(), m).unwrap()
}

/// `L_z = diag(1, 0, -1)` compressed onto span{v_a, v_b}: `P^dag L_z P` with
/// the columns of `P` the three-component forms of `v_a`, `v_b`.
///
/// `L_z v_a = (1, 0, -1)/sqrt2` is orthogonal to both basis vectors and
/// `L_z v_b = 0`, so the compression is the zero matrix.
pub fn l_z() -> Operator {
    let emb = optics::orbital_embedding();
    let lz3 = [1.0, 0.0, -1.0];
    let mut m = DMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = (0..3).map(|k| emb[k][i].conj() * lz3[k] * emb[k][j]).sum::<Complex64>();
        }
    }
    Operator::hermitian(SpaceSignature::orbital(), m).unwrap()
}

/// Builds catalog members. The effective observables depend on `g' t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableCatalog {
    pub gprime_t: f64,
}

impl Default for ObservableCatalog {
    fn default() -> Self {
        Self { gprime_t: 0.0 }
    }
}

impl ObservableCatalog {
    pub fn new(gprime_t: f64) -> Self {
        Self { gprime_t }
    }

    pub fn operator(&self, id: ObservableId) -> Operator {
        use ObservableId::*;
        let orb_id = Operator::identity(SpaceSignature::orbital());
        let pol_id = Operator::identity(SpaceSignature::polarization());
        let igt = c64(0.0, self.gprime_t);
        let sz_op = || orb_id.tensor(&sigma_z()).unwrap();
        match id {
            PiL => projector_l(),
            PiR => projector_r(),
            SigmaZ => sigma_z(),
            SigmaX => sigma_x(),
            SigmaZL => projector_l().tensor(&sigma_z()).unwrap(),
            SigmaZR => projector_r().tensor(&sigma_z()).unwrap(),
            SigmaXL => projector_l().tensor(&sigma_x()).unwrap(),
            SigmaXR => projector_r().tensor(&sigma_x()).unwrap(),
            Lx => l_x(),
            Lz => l_z(),
            LxSx => l_x().tensor(&sigma_x()).unwrap(),
            LxSxL => projector_l().tensor(&l_x()).unwrap().tensor(&sigma_x()).unwrap(),
            LxSxR => projector_r().tensor(&l_x()).unwrap().tensor(&sigma_x()).unwrap(),
            APrime => {
                let sxsz = sigma_x().compose(&sigma_z()).unwrap();
                let noise = l_x().tensor(&sxsz).unwrap().scaled(igt);
                sz_op().add(&noise).unwrap()
            }
            APrime1 => sz_op().add(&l_x().tensor(&pol_id).unwrap().scaled(igt)).unwrap(),
            APrime2 => sz_op().add(&l_z().tensor(&pol_id).unwrap().scaled(igt)).unwrap(),
            APrime3 => sz_op().sub(&l_x().tensor(&sigma_x()).unwrap()).unwrap(),
        }
    }

    /// Catalog member extended by identities to `sig`.
    pub fn operator_on(&self, id: ObservableId, sig: &SpaceSignature) -> Result<Operator> {
        self.operator(id).extend(sig)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakValue {
    pub value: Complex64,
    /// `<post|pre>`
    pub overlap: Complex64,
}

pub fn weak_value(pre: &Ket, post: &Ket, observable: &Operator) -> Result<WeakValue> {
    weak_value_with_threshold(pre, post, observable, DEFAULT_OVERLAP_THRESHOLD)
}

/// Weak value with an explicit degeneracy threshold on the normalized overlap.
/// An observable defined on a subset of the factors is extended by identities.
pub fn weak_value_with_threshold(pre: &Ket, post: &Ket, observable: &Operator, threshold: f64) -> Result<WeakValue> {
    pre.signature().ensure_eq(post.signature())?;
    let overlap = post.inner(pre)?;
    let scale = pre.norm() * post.norm();
    if scale == 0.0 {
        return Err(Error::ZeroState);
    }
    let normalized = overlap.norm() / scale;
    if normalized <= threshold {
        return Err(Error::DegeneratePostSelection { overlap: normalized });
    }
    let a = observable.extend(pre.signature())?;
    let numerator = a.sandwich(post, pre)?;
    Ok(WeakValue {
        value: numerator / overlap,
        overlap,
    })
}

/// One row of a weak-value table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakValueResult {
    pub observable: ObservableId,
    pub pre: StateName,
    pub post: StateName,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub value: Complex64,
    pub overlap: Complex64,
}

fn table(
    pre: (StateName, StateParams),
    post: (StateName, StateParams),
    observables: &[ObservableId],
    catalog: &ObservableCatalog,
) -> Result<Vec<WeakValueResult>> {
    let pre_ket = optics::prepare_state(pre.0, &pre.1)?;
    let post_ket = optics::prepare_state(post.0, &post.1)?;
    observables
        .iter()
        .map(|&id| {
            let wv = weak_value(&pre_ket, &post_ket, &catalog.operator(id))?;
            Ok(WeakValueResult {
                observable: id,
                pre: pre.0,
                post: post.0,
                theta: pre.1.theta.or(post.1.theta),
                alpha: pre.1.alpha.or(post.1.alpha),
                value: wv.value,
                overlap: wv.overlap,
            })
        })
        .collect()
}

pub const CHESHIRE_QUARTET: [ObservableId; 4] = [
    ObservableId::PiL,
    ObservableId::PiR,
    ObservableId::SigmaZL,
    ObservableId::SigmaZR,
];

pub const AMPLIFICATION_SET: [ObservableId; 6] = [
    ObservableId::PiL,
    ObservableId::PiR,
    ObservableId::SigmaZL,
    ObservableId::SigmaZR,
    ObservableId::SigmaXL,
    ObservableId::SigmaXR,
];

pub const DISEMBODIMENT_SET: [ObservableId; 4] = [
    ObservableId::SigmaZL,
    ObservableId::SigmaZR,
    ObservableId::LxSxL,
    ObservableId::LxSxR,
];

/// Weak values of the photon position and its circular polarization for the
/// balanced Cheshire pre/post-selection.
pub fn cheshire_quartet() -> Result<Vec<WeakValueResult>> {
    table(
        (StateName::CheshireIn, StateParams::default()),
        (StateName::CheshireF, StateParams::default()),
        &CHESHIRE_QUARTET,
        &ObservableCatalog::default(),
    )
}

/// The six amplification-setup weak values for each requested `theta`.
pub fn cheshire_table(thetas: &[f64]) -> Result<Vec<WeakValueResult>> {
    let mut out = Vec::with_capacity(thetas.len() * AMPLIFICATION_SET.len());
    for &theta in thetas {
        out.extend(table(
            (StateName::AmpIn, StateParams::theta(theta)),
            (StateName::AmpF, StateParams::default()),
            &AMPLIFICATION_SET,
            &ObservableCatalog::default(),
        )?);
    }
    Ok(out)
}

pub fn disembodiment_table(theta: f64, alpha: f64) -> Result<Vec<WeakValueResult>> {
    table(
        (StateName::DisembodyIn, StateParams::theta(theta)),
        (StateName::DisembodyF, StateParams::alpha(alpha)),
        &DISEMBODIMENT_SET,
        &ObservableCatalog::default(),
    )
}

/// Noise models for the single-path noisy measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisyVariant {
    SpinOrbit,
    ThreeBody,
    Parallel1,
    Parallel2,
}

impl NoisyVariant {
    pub fn effective_observable(self) -> ObservableId {
        match self {
            NoisyVariant::SpinOrbit => ObservableId::APrime,
            NoisyVariant::ThreeBody => ObservableId::APrime3,
            NoisyVariant::Parallel1 => ObservableId::APrime1,
            NoisyVariant::Parallel2 => ObservableId::APrime2,
        }
    }
}

/// Weak value of the variant's effective observable between `noisy_in` and
/// `noisy_f(alpha)`, computed directly from the definition.
pub fn noisy_effective_weak_value(variant: NoisyVariant, alpha: f64, gprime_t: f64) -> Result<Complex64> {
    let pre = optics::prepare_state(StateName::NoisyIn, &StateParams::default())?;
    let post = optics::prepare_state(StateName::NoisyF, &StateParams::alpha(alpha))?;
    let op = ObservableCatalog::new(gprime_t).operator(variant.effective_observable());
    Ok(weak_value(&pre, &post, &op)?.value)
}

/// Closed-form effective weak values as published, where one is given:
/// `(g't + i) tan(alpha)` for spin-orbit noise and `1 + i tan(alpha)` for the
/// three-body coupling.
pub fn published_effective_weak_value(variant: NoisyVariant, alpha: f64, gprime_t: f64) -> Option<Complex64> {
    match variant {
        NoisyVariant::SpinOrbit => Some(c64(gprime_t, 1.0) * alpha.tan()),
        NoisyVariant::ThreeBody => Some(c64(1.0, alpha.tan())),
        NoisyVariant::Parallel1 | NoisyVariant::Parallel2 => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TOL: f64 = 1e-12;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= TOL
    }

    #[test]
    fn catalog_hermitian_members() {
        let cat = ObservableCatalog::new(0.1);
        for id in ObservableId::ALL {
            let op = cat.operator(id);
            if id == ObservableId::APrime2 {
                // The L_z compression vanishes, leaving plain sigma_z.
                assert!(op.is_hermitian(TOL));
                continue;
            }
            assert_eq!(op.is_hermitian(TOL), id.is_hermitian(), "{id}");
            assert_eq!(op.signature(), &id.native_signature());
        }
    }

    #[test]
    fn projectors_complete_and_sigma_z_diagonal() {
        let sum = projector_l().add(&projector_r()).unwrap();
        assert!(sum.max_abs_diff(&Operator::identity(SpaceSignature::path())).unwrap() < TOL);
        let sz = sigma_z();
        assert_eq!(sz.matrix()[(0, 0)], c64(1.0, 0.0));
        assert_eq!(sz.matrix()[(1, 1)], c64(-1.0, 0.0));
    }

    #[test]
    fn l_x_eigenvector_is_l_splitter_mode() {
        let m = optics::l_splitter_mode();
        let out = l_x().apply(&m).unwrap();
        assert!(out.max_abs_diff(&m).unwrap() < TOL);
    }

    #[test]
    fn l_x_matches_spin_one_compression() {
        // L_x = (1/sqrt2)[[0,1,0],[1,0,1],[0,1,0]] compressed onto span{v_a, v_b}.
        let s = 1.0 / 2f64.sqrt();
        let lx3 = [[0.0, s, 0.0], [s, 0.0, s], [0.0, s, 0.0]];
        let emb = optics::orbital_embedding();
        let lx = l_x();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = c64(0.0, 0.0);
                for a in 0..3 {
                    for b in 0..3 {
                        acc += emb[a][i].conj() * lx3[a][b] * emb[b][j];
                    }
                }
                assert!(close(acc, lx.matrix()[(i, j)]));
            }
        }
    }

    #[test]
    fn l_z_compression_vanishes() {
        assert!(l_z().max_abs() < TOL);
    }

    #[test]
    fn cheshire_quartet_values() {
        let rows = cheshire_quartet().unwrap();
        let expected = [1.0, 0.0, 0.0, 1.0];
        for (row, e) in rows.iter().zip(expected) {
            assert!(close(row.value, c64(e, 0.0)), "{:?}", row);
        }
        // <Psi_f|Psi_in> = i/2
        assert!(close(rows[0].overlap, c64(0.0, 0.5)));
    }

    #[test]
    fn amplification_rows() {
        for theta in [PI / 2.0, 2.0 * PI / 3.0, 0.9 * PI] {
            let rows = cheshire_table(&[theta]).unwrap();
            let t = (theta / 2.0).tan();
            let expected = [1.0, 0.0, 0.0, t, 1.0, 0.0];
            for (row, e) in rows.iter().zip(expected) {
                assert!(close(row.value, c64(e, 0.0)), "{:?}", row);
            }
        }
        let rows = cheshire_table(&[2.0 * PI / 3.0]).unwrap();
        assert!(close(rows[3].value, c64(3f64.sqrt(), 0.0)));
        let rows = cheshire_table(&[0.9 * PI]).unwrap();
        assert!((rows[3].value.re - 6.313751514675).abs() < 1e-9);
        assert!(rows[3].value.re > 1.0);
    }

    #[test]
    fn amplification_small_theta_limit() {
        let rows = cheshire_table(&[1e-9]).unwrap();
        assert!(rows[3].value.norm() < 1e-9);
    }

    #[test]
    fn identity_weak_value_is_one() {
        let pre = optics::prepare_state(StateName::AmpIn, &StateParams::theta(0.7)).unwrap();
        let post = optics::prepare_state(StateName::AmpF, &StateParams::default()).unwrap();
        let id = Operator::identity(pre.signature().clone());
        assert!(close(weak_value(&pre, &post, &id).unwrap().value, c64(1.0, 0.0)));
    }

    #[test]
    fn degenerate_postselection() {
        let pre = optics::prepare_state(StateName::NoisyIn, &StateParams::default()).unwrap();
        let post = optics::prepare_state(StateName::NoisyF, &StateParams::alpha(PI / 2.0)).unwrap();
        let err = weak_value(&pre, &post, &sigma_z()).unwrap_err();
        assert!(matches!(err, Error::DegeneratePostSelection { overlap } if overlap < 1e-10));
    }

    #[test]
    fn spin_orbit_effective_value_formula() {
        let v = noisy_effective_weak_value(NoisyVariant::SpinOrbit, PI / 4.0, 0.1).unwrap();
        assert!(close(v, c64(0.1, 1.0)));
        let v0 = noisy_effective_weak_value(NoisyVariant::SpinOrbit, 0.0, 0.1).unwrap();
        assert!(close(v0, c64(0.0, 0.0)));
        for alpha in [PI / 6.0, PI / 3.0, -0.4] {
            let v = noisy_effective_weak_value(NoisyVariant::SpinOrbit, alpha, 0.05).unwrap();
            let p = published_effective_weak_value(NoisyVariant::SpinOrbit, alpha, 0.05).unwrap();
            assert!((v - p).norm() < 1e-12);
        }
    }

    #[test]
    fn three_body_direct_differs_from_published() {
        let alpha = PI / 4.0;
        let direct = noisy_effective_weak_value(NoisyVariant::ThreeBody, alpha, 0.0).unwrap();
        // By hand: (sigma_z)_w = i tan(alpha), (L_x sigma_x)_w = 1.
        assert!(close(direct, c64(-1.0, 1.0)));
        let published = published_effective_weak_value(NoisyVariant::ThreeBody, alpha, 0.0).unwrap();
        assert!(close(published, c64(1.0, 1.0)));
    }

    #[test]
    fn parallel_effective_values_by_hand() {
        let (alpha, gt) = (0.6f64, 0.05);
        let v1 = noisy_effective_weak_value(NoisyVariant::Parallel1, alpha, gt).unwrap();
        assert!(close(v1, c64(0.0, alpha.tan() + gt)));
        let v2 = noisy_effective_weak_value(NoisyVariant::Parallel2, alpha, gt).unwrap();
        assert!(close(v2, c64(0.0, alpha.tan())));
    }

    #[test]
    fn disembodiment_values() {
        let rows = disembodiment_table(PI / 2.0, PI / 4.0).unwrap();
        for (row, e) in rows.iter().zip([0.0, 1.0, 1.0, 0.0]) {
            assert!(close(row.value, c64(e, 0.0)), "{:?}", row);
        }
        let rows = disembodiment_table(2.0 * PI / 3.0, PI / 3.0).unwrap();
        assert!((rows[1].value - c64(3.0, 0.0)).norm() < 1e-12);
        let rows = disembodiment_table(1.3, 0.0).unwrap();
        assert!(close(rows[1].value, c64(0.0, 0.0)));
    }

    #[test]
    fn unknown_observable() {
        assert_eq!(
            "sigma_y_R".parse::<ObservableId>().unwrap_err(),
            Error::UnknownObservable("sigma_y_R".into())
        );
    }
}
