//! Shared fixtures for the criterion benches.

use cheshire_core::dynamics::{CouplingSpec, CouplingVariant};
use cheshire_core::meter::{make_meter, DiscreteGaussianMeter};
use cheshire_core::optics::{prepare_state, StateName, StateParams};
use cheshire_core::Ket;

/// Spin-orbit coupling with the noisy L-splitter pre-selection.
pub fn spin_orbit_fixture(n: usize, delta: f64) -> (CouplingSpec, Ket, DiscreteGaussianMeter) {
    let mut spec = CouplingSpec::new(CouplingVariant::SpinOrbit);
    spec.g_prime = 0.1;
    let pre = prepare_state(StateName::NoisyIn, &StateParams::default()).expect("noisy_in needs no parameters");
    (spec, pre, make_meter(n, delta).expect("valid meter"))
}
