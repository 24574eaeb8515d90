use curv4::berger::berger_form;
use curv4::duality::{to_blocks, weyl_halves, DualityReport};
use curv4::io::{curvature_from_json, curvature_to_json};
use curv4::models::{random_einstein, random_so4, random_tensor};
use curv4::quadratic::{b_symmetry_defect, b_tensor, cm_expansion_check, q_weyl_pairing};
use curv4::tensor::{standard_decompose, AlgCurvature4};
use nalgebra::Matrix4;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn generic(seed: u64) -> AlgCurvature4 {
    random_tensor(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn einstein(seed: u64) -> AlgCurvature4 {
    random_einstein(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn reflection() -> Matrix4<f64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_recomposes(seed in any::<u64>()) {
        let t = generic(seed);
        let d = standard_decompose(&t);
        prop_assert!(d.recompose().tensor().max_abs_diff(t.tensor()) < 1e-14);
        prop_assert!(d.weyl.ricci().0.abs().max() < 1e-14);
    }

    #[test]
    fn rotation_keeps_spectra(seed in any::<u64>()) {
        let t = generic(seed);
        let f = random_so4(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let a = DualityReport::new(&t);
        let b = DualityReport::new(&t.in_frame(&f));
        for i in 0..3 {
            prop_assert!((a.w_plus.eigs[i] - b.w_plus.eigs[i]).abs() < 1e-12);
            prop_assert!((a.w_minus.eigs[i] - b.w_minus.eigs[i]).abs() < 1e-12);
        }
        prop_assert!((a.cross_norm - b.cross_norm).abs() < 1e-12);
    }

    #[test]
    fn reflection_swaps_halves(seed in any::<u64>()) {
        let t = generic(seed);
        let (p, m) = weyl_halves(&t);
        let (p2, m2) = weyl_halves(&t.in_frame(&reflection()));
        for i in 0..3 {
            prop_assert!((p.eigenvalues[i] - m2.eigenvalues[i]).abs() < 1e-12);
            prop_assert!((m.eigenvalues[i] - p2.eigenvalues[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_trace_is_half_scalar(seed in any::<u64>()) {
        let t = generic(seed);
        let b = to_blocks(&t);
        prop_assert!((b.m_plus.trace() - t.scalar() / 4.0).abs() < 1e-12);
        prop_assert!((b.m_minus.trace() - t.scalar() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_identities(seed in any::<u64>()) {
        let t = generic(seed);
        prop_assert!(b_symmetry_defect(&b_tensor(&t)) < 1e-14);
        prop_assert!(cm_expansion_check(&t) < 1e-13);
        let e = einstein(seed);
        prop_assert!(q_weyl_pairing(&e).unwrap().rel_disagreement(e.norm()) < 1e-12);
        prop_assert!(q_weyl_pairing(&t).is_err());
    }

    #[test]
    fn berger_form_scales(seed in any::<u64>(), s in 0.1f64..10.0) {
        let e = einstein(seed);
        let a = berger_form(&e).unwrap();
        let b = berger_form(&e.scale(s)).unwrap();
        for i in 0..3 {
            prop_assert!((b.a[i] - s * a.a[i]).abs() < 1e-10 * s);
        }
        prop_assert!(b.block_residual < 1e-8 * s);
    }

    #[test]
    fn component_json_round_trips(seed in any::<u64>()) {
        let t = generic(seed);
        let back = curvature_from_json(&curvature_to_json(&t)).unwrap();
        prop_assert!(back.tensor().max_abs_diff(t.tensor()) < 1e-14 * t.norm().max(1.0));
    }
}
