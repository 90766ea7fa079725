//! Property tests over random states, operators and parameters.

use cheshire_core::dynamics::{evolve_exact, CouplingSpec, CouplingVariant};
use cheshire_core::hilbert::{dft_p_to_q, dft_q_to_p, mat_exp};
use cheshire_core::meter::{kicked_amplitudes, make_meter, moments, Representation};
use cheshire_core::scenario::{bundle, parse_scenario};
use cheshire_core::weakvalue::weak_value;
use cheshire_core::{c64, Complex64, Ket, Operator, SpaceSignature};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| c64(re, im))
}

fn amps(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(complex(), n).prop_filter("non-zero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
}

fn ket(sig: SpaceSignature) -> impl Strategy<Value = Ket> {
    amps(sig.dim()).prop_map(move |a| Ket::new(sig.clone(), a).unwrap().normalized().unwrap())
}

fn operator(sig: SpaceSignature) -> impl Strategy<Value = Operator> {
    let d = sig.dim();
    prop::collection::vec(complex(), d * d)
        .prop_map(move |v| Operator::new(sig.clone(), DMatrix::from_row_slice(d, d, &v)).unwrap())
}

fn hermitian(sig: SpaceSignature) -> impl Strategy<Value = Operator> {
    operator(sig).prop_map(|a| {
        let h = a.matrix() + a.matrix().adjoint();
        Operator::hermitian(a.signature().clone(), h * c64(0.5, 0.0)).unwrap()
    })
}

fn path_pol() -> SpaceSignature {
    SpaceSignature::path().concat(&SpaceSignature::polarization()).unwrap()
}

fn full() -> SpaceSignature {
    SpaceSignature::product(&[
        &SpaceSignature::path(),
        &SpaceSignature::orbital(),
        &SpaceSignature::polarization(),
    ])
    .unwrap()
}

fn non_degenerate(pre: &Ket, post: &Ket) -> bool {
    post.inner(pre).unwrap().norm() > 1e-2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weak_value_is_linear(
        pre in ket(path_pol()), post in ket(path_pol()),
        a in operator(path_pol()), b in operator(path_pol()),
        x in complex(), y in complex(),
    ) {
        prop_assume!(non_degenerate(&pre, &post));
        let combo = a.scaled(x).add(&b.scaled(y)).unwrap();
        let lhs = weak_value(&pre, &post, &combo).unwrap().value;
        let rhs = x * weak_value(&pre, &post, &a).unwrap().value + y * weak_value(&pre, &post, &b).unwrap().value;
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn weak_value_ignores_state_scale(
        pre in ket(path_pol()), post in ket(path_pol()), a in operator(path_pol()),
        s1 in complex(), s2 in complex(),
    ) {
        prop_assume!(non_degenerate(&pre, &post) && s1.norm() > 0.1 && s2.norm() > 0.1);
        let w = weak_value(&pre, &post, &a).unwrap().value;
        let v = weak_value(&pre.scaled(s1), &post.scaled(s2), &a).unwrap().value;
        prop_assert!((w - v).norm() <= 1e-9 * (1.0 + w.norm()));
    }

    /// Averaging weak values over a complete post-selection basis, weighted
    /// by the outcome probabilities, returns the expectation value.
    #[test]
    fn weak_values_average_to_expectation(pre in ket(path_pol()), a in hermitian(path_pol())) {
        let sig = path_pol();
        let expectation = a.sandwich(&pre, &pre).unwrap();
        let mut total = c64(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                let f = Ket::basis(sig.clone(), &[i, j]).unwrap();
                let overlap = f.inner(&pre).unwrap();
                if overlap.norm() > 1e-6 {
                    total += overlap.norm_sqr() * weak_value(&pre, &f, &a).unwrap().value;
                } else {
                    total += f.inner(&a.apply(&pre).unwrap()).unwrap() * overlap.conj();
                }
            }
        }
        prop_assert!((total - expectation).norm() < 1e-9);
    }

    #[test]
    fn kronecker_is_associative(
        a in ket(SpaceSignature::path()),
        b in ket(SpaceSignature::orbital()),
        c in ket(SpaceSignature::polarization()),
    ) {
        let left = a.tensor(&b).unwrap().tensor(&c).unwrap();
        let right = a.tensor(&b.tensor(&c).unwrap()).unwrap();
        prop_assert_eq!(left.signature(), right.signature());
        prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-15);
    }

    #[test]
    fn extend_is_a_homomorphism(a in operator(path_pol()), b in operator(path_pol())) {
        let target = full();
        let ab = a.compose(&b).unwrap().extend(&target).unwrap();
        let ea_eb = a.extend(&target).unwrap().compose(&b.extend(&target).unwrap()).unwrap();
        prop_assert!(ab.max_abs_diff(&ea_eb).unwrap() < 1e-12);
    }

    #[test]
    fn exp_of_hermitian_is_unitary(h in hermitian(path_pol()), t in -3.0f64..3.0) {
        let u = mat_exp(&h, c64(0.0, t)).unwrap();
        prop_assert!(u.is_unitary(1e-10));
        let back = mat_exp(&h, c64(0.0, -t)).unwrap();
        let id = Operator::identity(path_pol());
        prop_assert!(u.compose(&back).unwrap().max_abs_diff(&id).unwrap() < 1e-10);
    }

    #[test]
    fn exact_evolution_preserves_norm(
        pre in ket(full()),
        g in 1e-4f64..1e-2,
        g_prime in 0.0f64..0.2,
        kick in 0.0f64..1.0,
    ) {
        let m = make_meter(12, 2.0).unwrap();
        for variant in [CouplingVariant::SpinOrbit, CouplingVariant::MeasureSigmaZRNoisy, CouplingVariant::MeasureLxSxR] {
            let spec = CouplingSpec { g, g_prime, kick_time: kick, ..CouplingSpec::new(variant) };
            let sys = if variant == CouplingVariant::SpinOrbit {
                Ket::new(
                    SpaceSignature::orbital().concat(&SpaceSignature::polarization()).unwrap(),
                    pre.amplitudes()[..4].to_vec(),
                ).unwrap().normalized().unwrap()
            } else {
                pre.clone()
            };
            let joint = evolve_exact(&spec, &sys, &m).unwrap();
            prop_assert!((joint.norm() - 1.0).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn centred_dft_is_unitary(half in 0usize..=255, seed in any::<u64>()) {
        let n = 2 * half + 1;
        let v: Vec<Complex64> = (0..n)
            .map(|k| {
                let x = (seed.wrapping_add(k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 11) as f64 / (1u64 << 53) as f64;
                c64(x - 0.5, (x * 7.0).fract() - 0.5)
            })
            .collect();
        let p = dft_q_to_p(&v).unwrap();
        let norm_q: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let norm_p: f64 = p.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm_q - norm_p).abs() <= 1e-12 * norm_q.max(1.0));
        let back = dft_p_to_q(&p).unwrap();
        let err = v.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn real_kick_shifts_mean_momentum(delta in 1.5f64..4.0, g in 1e-4f64..1e-2, a in -3.0f64..3.0) {
        let n = (16.0 * delta * delta).ceil() as usize;
        let m = make_meter(n, delta).unwrap();
        let p = moments(&kicked_amplitudes(&m, g, c64(a, 0.0)), Representation::P).unwrap();
        prop_assert!((p.mean - g * a).abs() <= 1e-9 * g.max(1e-3));
    }

    #[test]
    fn scenario_print_parse_round_trip(theta in 0.05f64..0.95, alpha in 0.05f64..0.45, g in 1e-5f64..1e-2) {
        let mut doc = parse_scenario(bundle("disembodiment").unwrap()).unwrap();
        doc.set("theta", &theta.to_string()).unwrap();
        doc.set("alpha", &alpha.to_string()).unwrap();
        doc.set("coupling.g", &g.to_string()).unwrap();
        let again = parse_scenario(&doc.print()).unwrap();
        prop_assert_eq!(&again, &doc);
        prop_assert_eq!(again.provenance_hash(), doc.provenance_hash());
    }
}
