//! Closed-form algebraic curvature tensors of the model spaces, synthetic
//! Einstein tensors with prescribed Weyl spectra, and seeded random
//! generators used by the property sweeps.

use nalgebra::{Matrix3, Matrix4, Matrix6, Quaternion, UnitQuaternion};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::duality::tensor_from_duality_matrix;
use crate::error::{Error, Result};
use crate::tensor::{AlgCurvature4, Tensor4};

/// A named model space with its size parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name")]
pub enum ModelSpec {
    /// Round sphere of radius `r`.
    S4 { r: f64 },
    /// Hyperbolic space of curvature `−1/r²`.
    H4 { r: f64 },
    R4,
    /// Fubini–Study, normalized by its scalar curvature (24 gives pinching `[1,4]`).
    CP2 { scalar: f64 },
    /// Product of two spheres of equal radius.
    S2xS2 { r: f64 },
    /// Product of spheres with radii `a` and `b` (Gauss curvatures `1/a²`, `1/b²`).
    S2aXS2b { a: f64, b: f64 },
}

impl ModelSpec {
    /// Parses a model name plus optional parameters (`r`, `a`, `b`, `scalar`).
    pub fn from_name(name: &str, params: &std::collections::BTreeMap<String, f64>) -> Result<Self> {
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        let spec = match name.to_ascii_uppercase().as_str() {
            "S4" => ModelSpec::S4 { r: get("r", 1.0) },
            "H4" => ModelSpec::H4 { r: get("r", 1.0) },
            "R4" | "FLAT" => ModelSpec::R4,
            "CP2" | "FS" => ModelSpec::CP2 {
                scalar: get("scalar", 24.0),
            },
            "S2XS2" => ModelSpec::S2xS2 { r: get("r", 1.0) },
            "S2AXS2B" => ModelSpec::S2aXS2b {
                a: get("a", 1.0),
                b: get("b", std::f64::consts::SQRT_2),
            },
            other => return Err(Error::BadSpec(format!("unknown model {other}"))),
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::BadSpec(format!("{what} must be positive, got {v}")))
            }
        };
        match *self {
            ModelSpec::S4 { r } | ModelSpec::H4 { r } | ModelSpec::S2xS2 { r } => positive(r, "r"),
            ModelSpec::R4 => Ok(()),
            ModelSpec::CP2 { scalar } => positive(scalar, "scalar"),
            ModelSpec::S2aXS2b { a, b } => positive(a, "a").and(positive(b, "b")),
        }
    }

    /// Whether the model's Ricci tensor is a multiple of the metric.
    pub fn is_einstein(&self) -> bool {
        match *self {
            ModelSpec::S2aXS2b { a, b } => a == b,
            _ => true,
        }
    }
}

fn constant_curvature(k: f64) -> Tensor4 {
    Tensor4::from_fn(|i, j, kk, l| {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        k * (d(i, kk) * d(j, l) - d(i, l) * d(j, kk))
    })
}

fn product_of_surfaces(k1: f64, k2: f64) -> Tensor4 {
    let mut t = Tensor4::zeros();
    for (i, j, k) in [(0, 1, k1), (2, 3, k2)] {
        t.set(i, j, i, j, k);
        t.set(j, i, j, i, k);
        t.set(i, j, j, i, -k);
        t.set(j, i, i, j, -k);
    }
    t
}

/// The pointwise curvature tensor of a homogeneous model space.
pub fn model_tensor(spec: &ModelSpec) -> Result<AlgCurvature4> {
    spec.check()?;
    let t = match *spec {
        ModelSpec::S4 { r } => constant_curvature(1.0 / (r * r)),
        ModelSpec::H4 { r } => constant_curvature(-1.0 / (r * r)),
        ModelSpec::R4 => Tensor4::zeros(),
        ModelSpec::CP2 { scalar } => {
            return synth_einstein(
                [-scalar / 12.0, -scalar / 12.0, scalar / 6.0],
                [0.0; 3],
                scalar,
            )
        }
        ModelSpec::S2xS2 { r } => product_of_surfaces(1.0 / (r * r), 1.0 / (r * r)),
        ModelSpec::S2aXS2b { a, b } => product_of_surfaces(1.0 / (a * a), 1.0 / (b * b)),
    };
    Ok(AlgCurvature4::from_trusted(t))
}

/// Einstein tensor whose duality blocks are `R/12·I + diag(w±)` in the
/// standard frame.
pub fn synth_einstein(w_plus: [f64; 3], w_minus: [f64; 3], scalar: f64) -> Result<AlgCurvature4> {
    for w in [w_plus, w_minus] {
        let scale = w.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if (w[0] + w[1] + w[2]).abs() > 1e-12 * scale {
            return Err(Error::NotTraceFree(w));
        }
    }
    let mut m = Matrix6::zeros();
    for a in 0..3 {
        m[(a, a)] = scalar / 12.0 + w_plus[a];
        m[(a + 3, a + 3)] = scalar / 12.0 + w_minus[a];
    }
    Ok(AlgCurvature4::from_trusted(tensor_from_duality_matrix(&m)))
}

/// Tensor from arbitrary duality blocks; the traces are equalized so the
/// first Bianchi identity holds.
pub fn tensor_from_blocks(m_plus: &Matrix3<f64>, m_minus: &Matrix3<f64>, cross: &Matrix3<f64>) -> AlgCurvature4 {
    let mut m = Matrix6::zeros();
    let shift = (m_plus.trace() - m_minus.trace()) / 6.0;
    let sym = |x: &Matrix3<f64>| (x + x.transpose()) * 0.5;
    m.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(sym(m_plus) - Matrix3::identity() * shift));
    m.fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&(sym(m_minus) + Matrix3::identity() * shift));
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(cross);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&cross.transpose());
    AlgCurvature4::from_trusted(tensor_from_duality_matrix(&m))
}

/// The rotation `x ↦ p·x·q̄` of ℝ⁴ ≅ ℍ with `e₁=1, e₂=i, e₃=j, e₄=k`.
///
/// It acts on Λ⁺ by the rotation of `p` and on Λ⁻ by the rotation of `q`
/// (in the standard duality bases).
pub fn so4_from_quaternions(p: UnitQuaternion<f64>, q: UnitQuaternion<f64>) -> Matrix4<f64> {
    let qc = q.conjugate();
    let basis = [
        Quaternion::new(1.0, 0.0, 0.0, 0.0),
        Quaternion::new(0.0, 1.0, 0.0, 0.0),
        Quaternion::new(0.0, 0.0, 1.0, 0.0),
        Quaternion::new(0.0, 0.0, 0.0, 1.0),
    ];
    let mut m = Matrix4::zeros();
    for (c, e) in basis.iter().enumerate() {
        let r = p.quaternion() * e * qc.quaternion();
        m[(0, c)] = r.w;
        m[(1, c)] = r.i;
        m[(2, c)] = r.j;
        m[(3, c)] = r.k;
    }
    m
}

pub fn random_unit_quaternion<R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion<f64> {
    loop {
        let q = Quaternion::new(
            gaussian(rng),
            gaussian(rng),
            gaussian(rng),
            gaussian(rng),
        );
        if q.norm() > 1e-6 {
            return UnitQuaternion::from_quaternion(q);
        }
    }
}

/// Haar-distributed element of SO(4).
pub fn random_so4<R: Rng + ?Sized>(rng: &mut R) -> Matrix4<f64> {
    let p = random_unit_quaternion(rng);
    let q = random_unit_quaternion(rng);
    so4_from_quaternions(p, q)
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_zero_sum<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let v = [gaussian(rng), gaussian(rng), gaussian(rng)];
    let mean = (v[0] + v[1] + v[2]) / 3.0;
    let out = v.map(|x| x - mean);
    // exact zero sum after rounding
    [out[0], out[1], -out[0] - out[1]]
}

/// Random Einstein tensor in a random oriented frame, normalized to `‖T‖ = 1`.
pub fn random_einstein<R: Rng + ?Sized>(rng: &mut R) -> AlgCurvature4 {
    let t = synth_einstein(random_zero_sum(rng), random_zero_sum(rng), 4.0 * gaussian(rng))
        .expect("zero-sum triples");
    let frame = random_so4(rng);
    let t = t.in_frame(&frame);
    t.scale(1.0 / t.norm())
}

/// Random algebraic curvature tensor (generically non-Einstein), `‖T‖ = 1`.
pub fn random_tensor<R: Rng + ?Sized>(rng: &mut R) -> AlgCurvature4 {
    let mut blocks = [Matrix3::zeros(); 3];
    for b in blocks.iter_mut() {
        *b = Matrix3::from_fn(|_, _| gaussian(rng));
    }
    let t = tensor_from_blocks(&blocks[0], &blocks[1], &blocks[2]);
    t.scale(1.0 / t.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::{to_blocks, weyl_halves};
    use crate::tensor::standard_decompose;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn models_validate() {
        for spec in [
            ModelSpec::S4 { r: 1.0 },
            ModelSpec::H4 { r: 2.0 },
            ModelSpec::R4,
            ModelSpec::CP2 { scalar: 24.0 },
            ModelSpec::S2xS2 { r: 1.0 },
            ModelSpec::S2aXS2b {
                a: 1.0,
                b: std::f64::consts::SQRT_2,
            },
        ] {
            let t = model_tensor(&spec).unwrap();
            AlgCurvature4::validate(*t.tensor()).unwrap();
            let tr = standard_decompose(&t).traceless_ricci.0.norm();
            assert_eq!(tr < 1e-12, spec.is_einstein(), "{spec:?}");
        }
    }

    #[test]
    fn sphere_scalar() {
        let t = model_tensor(&ModelSpec::S4 { r: 1.0 }).unwrap();
        assert_eq!(t.scalar(), 12.0);
        assert_eq!(t.get(0, 2, 0, 2), 1.0);
    }

    #[test]
    fn unequal_product_ricci() {
        let t = model_tensor(&ModelSpec::S2aXS2b {
            a: 1.0,
            b: std::f64::consts::SQRT_2,
        })
        .unwrap();
        let ric = t.ricci().0;
        let d = [ric[(0, 0)], ric[(1, 1)], ric[(2, 2)], ric[(3, 3)]];
        for (v, e) in d.iter().zip([1.0, 1.0, 0.5, 0.5]) {
            assert!((v - e).abs() < 1e-15);
        }
    }

    #[test]
    fn bad_spec() {
        assert!(matches!(
            model_tensor(&ModelSpec::S4 { r: -1.0 }),
            Err(Error::BadSpec(_))
        ));
        assert!(ModelSpec::from_name("K3", &Default::default()).is_err());
    }

    #[test]
    fn synth_sphere_and_cp2() {
        let s = synth_einstein([0.0; 3], [0.0; 3], 12.0).unwrap();
        let direct = model_tensor(&ModelSpec::S4 { r: 1.0 }).unwrap();
        assert!(s.tensor().max_abs_diff(direct.tensor()) < 1e-14);
        assert!(matches!(
            synth_einstein([1.0, 0.0, 0.0], [0.0; 3], 1.0),
            Err(Error::NotTraceFree(_))
        ));
    }

    #[test]
    fn synth_round_trips_through_weyl_halves() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let wp = random_zero_sum(&mut rng);
            let wm = random_zero_sum(&mut rng);
            let r = gaussian(&mut rng) * 5.0;
            let t = synth_einstein(wp, wm, r).unwrap();
            let (hp, hm) = weyl_halves(&t);
            let mut sp = wp;
            sp.sort_by(f64::total_cmp);
            let mut sm = wm;
            sm.sort_by(f64::total_cmp);
            for a in 0..3 {
                assert!((hp.eigenvalues[a] - sp[a]).abs() < 1e-12);
                assert!((hm.eigenvalues[a] - sm[a]).abs() < 1e-12);
            }
            assert!((t.scalar() - r).abs() < 1e-12);
            assert!(to_blocks(&t).cross_norm() < 1e-14);
        }
    }

    #[test]
    fn quaternion_pair_acts_on_each_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_unit_quaternion(&mut rng);
        let q = random_unit_quaternion(&mut rng);
        let f = so4_from_quaternions(p, q);
        assert!((f.transpose() * f - Matrix4::identity()).abs().max() < 1e-14);
        assert!((f.determinant() - 1.0).abs() < 1e-14);
        let basis0 = crate::duality::duality_basis(&Matrix4::identity()).unwrap();
        let basis1 = crate::duality::duality_basis(&f).unwrap();
        let rp = p.to_rotation_matrix().into_inner();
        let rq = q.to_rotation_matrix().into_inner();
        for a in 0..3 {
            for b in 0..3 {
                let plus = crate::duality::bivector_inner(&basis0[a], &basis1[b]);
                let minus = crate::duality::bivector_inner(&basis0[a + 3], &basis1[b + 3]);
                assert!((plus - rp[(a, b)]).abs() < 1e-13);
                assert!((minus - rq[(a, b)]).abs() < 1e-13);
                assert!(crate::duality::bivector_inner(&basis0[a], &basis1[b + 3]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn random_generators_are_normalized_and_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let e = random_einstein(&mut rng);
            assert!((e.norm() - 1.0).abs() < 1e-12);
            AlgCurvature4::validate(*e.tensor()).unwrap();
            assert!(standard_decompose(&e).traceless_ricci.0.norm() < 1e-12);
            let t = random_tensor(&mut rng);
            AlgCurvature4::validate(*t.tensor()).unwrap();
            assert!(standard_decompose(&t).traceless_ricci.0.norm() > 1e-6);
        }
    }
}
