//! Hodge-star eigenspace machinery on Λ² of an oriented four-space.
//!
//! The duality basis is
//! `ω₁± = (e₁∧e₂ ± e₃∧e₄)/√2`, `ω₂± = (e₁∧e₃ ± e₄∧e₂)/√2`,
//! `ω₃± = (e₁∧e₄ ± e₂∧e₃)/√2`, and the curvature operator has entries
//! `T(ω_a, ω_b)` for unit bivectors, so the unit sphere gives the identity.

use nalgebra::{Matrix3, Matrix4, Matrix6, SymmetricEigen, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::{AlgCurvature4, Tensor4};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// The pairs `(i j)` with `i < j`, in the order used by [`pair_matrix`].
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// The involution `(12)↔(34)`, `(13)↔(42)`, `(14)↔(23)` on ordered index pairs:
/// `(i j i' j')` is always an even permutation of `(1 2 3 4)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DualPairMap;

impl DualPairMap {
    /// Dual of an ordered pair of distinct 0-based indices.
    pub fn dual(i: usize, j: usize) -> (usize, usize) {
        debug_assert!(i != j && i < 4 && j < 4);
        let mut rest = (0..4).filter(|&m| m != i && m != j);
        let (k, l) = (rest.next().unwrap(), rest.next().unwrap());
        if permutation_sign([i, j, k, l]) > 0.0 {
            (k, l)
        } else {
            (l, k)
        }
    }
}

pub(crate) fn permutation_sign(p: [usize; 4]) -> f64 {
    let mut inv = 0;
    for a in 0..4 {
        for b in a + 1..4 {
            if p[a] > p[b] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A bivector as an antisymmetric 4×4 matrix; `⟨A,B⟩ = ½ Σ A_ij B_ij`.
pub type Bivector = Matrix4<f64>;

pub fn wedge(u: &Vector4<f64>, v: &Vector4<f64>) -> Bivector {
    u * v.transpose() - v * u.transpose()
}

pub fn bivector_inner(a: &Bivector, b: &Bivector) -> f64 {
    0.5 * a.component_mul(b).sum()
}

/// `(⋆A)_ij = ½ ε_ijkl A_kl`.
pub fn hodge_star(a: &Bivector) -> Bivector {
    let mut out = Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let (k, l) = DualPairMap::dual(i, j);
            // ε_ijkl = +1 for the dual pair, and A antisymmetric
            out[(i, j)] = a[(k, l)];
        }
    }
    out
}

fn frame_gram_defect(frame: &Matrix4<f64>) -> f64 {
    (frame.transpose() * frame - Matrix4::identity()).abs().max()
}

/// `[ω₁⁺, ω₂⁺, ω₃⁺, ω₁⁻, ω₂⁻, ω₃⁻]` for the frame given by the columns of `frame`.
pub fn duality_basis(frame: &Matrix4<f64>) -> Result<[Bivector; 6]> {
    let defect = frame_gram_defect(frame);
    if defect > 1e-10 {
        return Err(Error::NonOrthonormalFrame(defect));
    }
    let e: Vec<Vector4<f64>> = (0..4).map(|c| frame.column(c).into_owned()).collect();
    let w = |a: usize, b: usize| wedge(&e[a], &e[b]);
    let plus = [w(0, 1) + w(2, 3), w(0, 2) + w(3, 1), w(0, 3) + w(1, 2)];
    let minus = [w(0, 1) - w(2, 3), w(0, 2) - w(3, 1), w(0, 3) - w(1, 2)];
    Ok([
        plus[0] * FRAC_1_SQRT_2,
        plus[1] * FRAC_1_SQRT_2,
        plus[2] * FRAC_1_SQRT_2,
        minus[0] * FRAC_1_SQRT_2,
        minus[1] * FRAC_1_SQRT_2,
        minus[2] * FRAC_1_SQRT_2,
    ])
}

/// `T(α, β)` for bivectors, extended bilinearly: `¼ Σ T_ijkl α_ij β_kl`.
pub fn eval_on_bivectors(t: &Tensor4, a: &Bivector, b: &Bivector) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let aij = a[(i, j)];
            if aij == 0.0 {
                continue;
            }
            for k in 0..4 {
                for l in 0..4 {
                    s += aij * b[(k, l)] * t.get(i, j, k, l);
                }
            }
        }
    }
    0.25 * s
}

/// Components `T(e_i∧e_j, e_k∧e_l)` in the pair basis [`PAIRS`].
pub fn pair_matrix(t: &Tensor4) -> Matrix6<f64> {
    Matrix6::from_fn(|p, q| {
        let (i, j) = PAIRS[p];
        let (k, l) = PAIRS[q];
        t.get(i, j, k, l)
    })
}

/// Columns express the standard duality basis in the pair basis [`PAIRS`].
fn pair_to_duality() -> Matrix6<f64> {
    let c = FRAC_1_SQRT_2;
    // rows: (12),(13),(14),(23),(24),(34); ω₂± uses e₄∧e₂ = −e₂∧e₄
    #[rustfmt::skip]
    let m = Matrix6::new(
        c,   0.0, 0.0, c,   0.0, 0.0,
        0.0, c,   0.0, 0.0, c,   0.0,
        0.0, 0.0, c,   0.0, 0.0, c,
        0.0, 0.0, c,   0.0, 0.0, -c,
        0.0, -c,  0.0, 0.0, c,   0.0,
        c,   0.0, 0.0, -c,  0.0, 0.0,
    );
    m
}

/// The 6×6 curvature operator in the standard duality basis.
pub fn duality_matrix(t: &Tensor4) -> Matrix6<f64> {
    let b = pair_to_duality();
    b.transpose() * pair_matrix(t) * b
}

/// Rebuilds the (0,4) tensor whose duality matrix is `m`.
pub fn tensor_from_duality_matrix(m: &Matrix6<f64>) -> Tensor4 {
    let basis = duality_basis(&Matrix4::identity()).expect("identity frame");
    let mut t = Tensor4::zeros();
    for a in 0..6 {
        for b in 0..6 {
            let mab = m[(a, b)];
            if mab == 0.0 {
                continue;
            }
            for i in 0..4 {
                for j in 0..4 {
                    let x = basis[a][(i, j)];
                    if x == 0.0 {
                        continue;
                    }
                    for k in 0..4 {
                        for l in 0..4 {
                            let y = basis[b][(k, l)];
                            if y != 0.0 {
                                t.0[crate::tensor::idx(i, j, k, l)] += mab * x * y;
                            }
                        }
                    }
                }
            }
        }
    }
    t
}

/// Curvature operator split along Λ² = Λ⁺ ⊕ Λ⁻.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityBlocks {
    /// `R/12·I + W⁺` in the basis ω⁺.
    pub m_plus: Matrix3<f64>,
    /// `R/12·I + W⁻` in the basis ω⁻.
    pub m_minus: Matrix3<f64>,
    /// Λ⁻ → Λ⁺ block, carried by the traceless Ricci tensor.
    pub m_cross: Matrix3<f64>,
    pub scalar: f64,
}

impl DualityBlocks {
    pub fn assembled(&self) -> Matrix6<f64> {
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.m_plus);
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.m_minus);
        m.fixed_view_mut::<3, 3>(0, 3).copy_from(&self.m_cross);
        m.fixed_view_mut::<3, 3>(3, 0)
            .copy_from(&self.m_cross.transpose());
        m
    }

    pub fn cross_norm(&self) -> f64 {
        self.m_cross.norm()
    }

    /// Ascending eigenvalues of the full 6×6 operator.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues6(&self.assembled())
    }
}

pub fn to_blocks(t: &AlgCurvature4) -> DualityBlocks {
    let m = duality_matrix(t.tensor());
    let m_plus = m.fixed_view::<3, 3>(0, 0).into_owned();
    let m_minus = m.fixed_view::<3, 3>(3, 3).into_owned();
    DualityBlocks {
        m_plus: (m_plus + m_plus.transpose()) * 0.5,
        m_minus: (m_minus + m_minus.transpose()) * 0.5,
        m_cross: m.fixed_view::<3, 3>(0, 3).into_owned(),
        // trace(m_plus) + trace(m_minus) = R/2
        scalar: 2.0 * (m_plus.trace() + m_minus.trace()),
    }
}

/// Ascending eigenvalues and matching orthonormal eigenvectors (columns).
pub fn sym_eigen3(m: &Matrix3<f64>) -> ([f64; 3], Matrix3<f64>) {
    let eig = SymmetricEigen::new(*m);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.map(|i| eig.eigenvalues[i]);
    let vecs = Matrix3::from_fn(|r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

pub fn sorted_eigenvalues6(m: &Matrix6<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(*m).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Self-dual or anti-self-dual Weyl curvature as a 3×3 traceless operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylHalf {
    pub matrix: Matrix3<f64>,
    pub eigenvalues: [f64; 3],
    pub det: f64,
    pub norm_sq: f64,
}

impl WeylHalf {
    pub fn from_matrix(matrix: Matrix3<f64>) -> Self {
        let (eigenvalues, _) = sym_eigen3(&matrix);
        WeylHalf {
            matrix,
            eigenvalues,
            det: eigenvalues[0] * eigenvalues[1] * eigenvalues[2],
            norm_sq: eigenvalues.iter().map(|v| v * v).sum(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }
}

/// `(W⁺, W⁻)` extracted as `ℛ± − (R/12)·I`.
pub fn weyl_halves(t: &AlgCurvature4) -> (WeylHalf, WeylHalf) {
    let b = to_blocks(t);
    let shift = Matrix3::identity() * (b.scalar / 12.0);
    (
        WeylHalf::from_matrix(b.m_plus - shift),
        WeylHalf::from_matrix(b.m_minus - shift),
    )
}

/// `T±_ijkl = ¼(T_ijkl ± T_ijk'l' ± T_i'j'kl + T_i'j'k'l')`.
///
/// Rejects tensors lacking antisymmetry in each pair or pair exchange.
pub fn pm_project(t: &Tensor4) -> Result<(Tensor4, Tensor4)> {
    let defect = t.pair_symmetry_defect();
    if defect > 1e-12 * t.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotPairSymmetric(defect));
    }
    Ok(pm_project_unchecked(t))
}

pub(crate) fn pm_project_unchecked(t: &Tensor4) -> (Tensor4, Tensor4) {
    let mut plus = Tensor4::zeros();
    let mut minus = Tensor4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let (ip, jp) = DualPairMap::dual(i, j);
            for k in 0..4 {
                for l in 0..4 {
                    if k == l {
                        continue;
                    }
                    let (kp, lp) = DualPairMap::dual(k, l);
                    let a = t.get(i, j, k, l) + t.get(ip, jp, kp, lp);
                    let b = t.get(i, j, kp, lp) + t.get(ip, jp, k, l);
                    plus.set(i, j, k, l, 0.25 * (a + b));
                    minus.set(i, j, k, l, 0.25 * (a - b));
                }
            }
        }
    }
    (plus, minus)
}

/// The same projection through the operator picture `T±(α,β) = T(α±, β±)`.
pub fn pm_project_operator(t: &Tensor4) -> (Tensor4, Tensor4) {
    let m = duality_matrix(t);
    let mut plus = Matrix6::zeros();
    let mut minus = Matrix6::zeros();
    plus.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&m.fixed_view::<3, 3>(0, 0));
    minus
        .fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&m.fixed_view::<3, 3>(3, 3));
    (
        tensor_from_duality_matrix(&plus),
        tensor_from_duality_matrix(&minus),
    )
}

/// `¼ A_ipkl B_iqkl v_p v_q`, the pairing of the insertions `ι_v A` and `ι_v B`.
pub fn insertion_inner(a: &Tensor4, b: &Tensor4, v: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for p in 0..4 {
            if v[p] == 0.0 {
                continue;
            }
            for q in 0..4 {
                if v[q] == 0.0 {
                    continue;
                }
                let mut c = 0.0;
                for k in 0..4 {
                    for l in 0..4 {
                        c += a.get(i, p, k, l) * b.get(i, q, k, l);
                    }
                }
                s += c * v[p] * v[q];
            }
        }
    }
    0.25 * s
}

/// JSON shape of a duality report.
#[derive(Debug, Clone, Serialize)]
pub struct HalfReport {
    pub eigs: [f64; 3],
    pub det: f64,
    pub norm_sq: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    #[serde(rename = "R")]
    pub scalar: f64,
    #[serde(rename = "Wplus")]
    pub w_plus: HalfReport,
    #[serde(rename = "Wminus")]
    pub w_minus: HalfReport,
    pub cross_norm: f64,
}

impl DualityReport {
    pub fn new(t: &AlgCurvature4) -> Self {
        let blocks = to_blocks(t);
        let (wp, wm) = weyl_halves(t);
        let half = |w: &WeylHalf| HalfReport {
            eigs: w.eigenvalues,
            det: w.det,
            norm_sq: w.norm_sq,
        };
        DualityReport {
            scalar: blocks.scalar,
            w_plus: half(&wp),
            w_minus: half(&wm),
            cross_norm: blocks.cross_norm(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{model_tensor, ModelSpec};
    use crate::tensor::inner_product;

    #[test]
    fn dual_pairs() {
        assert_eq!(DualPairMap::dual(0, 1), (2, 3));
        assert_eq!(DualPairMap::dual(0, 2), (3, 1));
        assert_eq!(DualPairMap::dual(0, 3), (1, 2));
        assert_eq!(DualPairMap::dual(1, 0), (3, 2));
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    let (k, l) = DualPairMap::dual(i, j);
                    assert_eq!(permutation_sign([i, j, k, l]), 1.0);
                    assert_eq!(DualPairMap::dual(k, l), (i, j));
                }
            }
        }
    }

    #[test]
    fn standard_basis_components() {
        let b = duality_basis(&Matrix4::identity()).unwrap();
        let c = FRAC_1_SQRT_2;
        assert_eq!(b[0][(0, 1)], c);
        assert_eq!(b[0][(2, 3)], c);
        assert_eq!(b[1][(3, 1)], c);
        assert_eq!(b[4][(3, 1)], -c);
    }

    #[test]
    fn hodge_star_eigenvalues() {
        let b = duality_basis(&Matrix4::identity()).unwrap();
        for (a, w) in b.iter().enumerate() {
            let sign = if a < 3 { 1.0 } else { -1.0 };
            assert!((hodge_star(w) - w * sign).abs().max() < 1e-15);
        }
    }

    #[test]
    fn gram_is_identity_for_rotated_frame() {
        let f = crate::models::so4_from_quaternions(
            nalgebra::UnitQuaternion::from_euler_angles(0.3, -1.1, 0.7),
            nalgebra::UnitQuaternion::from_euler_angles(-0.4, 0.2, 2.0),
        );
        let b = duality_basis(&f).unwrap();
        for x in 0..6 {
            for y in 0..6 {
                let expect = if x == y { 1.0 } else { 0.0 };
                assert!((bivector_inner(&b[x], &b[y]) - expect).abs() < 1e-12);
            }
        }
        let skew = Matrix4::identity() * 1.1;
        assert!(matches!(
            duality_basis(&skew),
            Err(Error::NonOrthonormalFrame(_))
        ));
    }

    #[test]
    fn matrix_matches_direct_bivector_evaluation() {
        let t = model_tensor(&ModelSpec::S2aXS2b { a: 1.0, b: 1.7 }).unwrap();
        let basis = duality_basis(&Matrix4::identity()).unwrap();
        let m = duality_matrix(t.tensor());
        for a in 0..6 {
            for b in 0..6 {
                let direct = eval_on_bivectors(t.tensor(), &basis[a], &basis[b]);
                assert!((m[(a, b)] - direct).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sphere_blocks() {
        let t = model_tensor(&ModelSpec::S4 { r: 1.0 }).unwrap();
        let b = to_blocks(&t);
        assert!((b.m_plus - Matrix3::identity()).abs().max() < 1e-14);
        assert!((b.m_minus - Matrix3::identity()).abs().max() < 1e-14);
        assert!(b.m_cross.abs().max() < 1e-14);
        let (wp, wm) = weyl_halves(&t);
        assert!(wp.norm_sq < 1e-28 && wm.norm_sq < 1e-28);
    }

    #[test]
    fn product_of_spheres_spectrum() {
        let t = model_tensor(&ModelSpec::S2xS2 { r: 1.0 }).unwrap();
        let mut expect = vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0];
        expect.sort_by(f64::total_cmp);
        let got = to_blocks(&t).eigenvalues();
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn cp2_blocks() {
        let t = model_tensor(&ModelSpec::CP2 { scalar: 24.0 }).unwrap();
        let b = to_blocks(&t);
        let (vals, _) = sym_eigen3(&b.m_plus);
        for (v, e) in vals.iter().zip([0.0, 0.0, 6.0]) {
            assert!((v - e).abs() < 1e-12);
        }
        assert!((b.m_minus - Matrix3::identity() * 2.0).abs().max() < 1e-12);
        let (wp, wm) = weyl_halves(&t);
        for (v, e) in wp.eigenvalues.iter().zip([-2.0, -2.0, 4.0]) {
            assert!((v - e).abs() < 1e-12);
        }
        assert!((wp.det - 16.0).abs() < 1e-11);
        assert!((wp.norm_sq - 24.0).abs() < 1e-11);
        assert!(wm.norm_sq < 1e-24);
    }

    #[test]
    fn projection_routes_agree_and_split_weyl() {
        let t = model_tensor(&ModelSpec::CP2 { scalar: 24.0 }).unwrap();
        let (p, m) = pm_project(t.tensor()).unwrap();
        let (po, mo) = pm_project_operator(t.tensor());
        assert!(p.max_abs_diff(&po) < 1e-12);
        assert!(m.max_abs_diff(&mo) < 1e-12);
        // idempotence
        let (pp, pm) = pm_project(&p).unwrap();
        assert!(pp.max_abs_diff(&p) < 1e-12);
        assert!(pm.max_abs() < 1e-12);
        assert!(inner_product(&p, &m).abs() < 1e-12);
    }

    #[test]
    fn projection_rejects_non_pair_symmetric() {
        let mut t = Tensor4::zeros();
        t.set(0, 1, 2, 3, 1.0);
        assert!(matches!(pm_project(&t), Err(Error::NotPairSymmetric(_))));
    }

    #[test]
    fn insertion_with_zero_vector() {
        let t = model_tensor(&ModelSpec::CP2 { scalar: 24.0 }).unwrap();
        assert_eq!(insertion_inner(t.tensor(), t.tensor(), &[0.0; 4]), 0.0);
    }
}
