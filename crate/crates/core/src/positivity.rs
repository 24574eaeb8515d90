//! Positivity cones of the curvature operator and the half-PIC functional.

use nalgebra::{DMatrix, Matrix3, Matrix4, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::duality::{to_blocks, weyl_halves, WeylHalf};
use crate::error::{Error, Result};
use crate::models::random_so4;
use crate::so4opt::{self, DescentBudget};
use crate::tensor::AlgCurvature4;

/// Which half of `Λ² = Λ⁺ ⊕ Λ⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Plus, Side::Minus];

    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Sum of the `k` smallest eigenvalues of a symmetric matrix.
pub fn k_sum(m: &DMatrix<f64>, k: usize) -> Result<f64> {
    let n = m.nrows();
    if k == 0 || k > n {
        return Err(Error::BadK { k, dim: n });
    }
    let mut eigs: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    Ok(eigs[..k].iter().sum())
}

fn dyn3(m: &Matrix3<f64>) -> DMatrix<f64> {
    DMatrix::from_iterator(3, 3, m.iter().copied())
}

/// The half operator `ℛ±` of a tensor.
pub fn half_operator(t: &AlgCurvature4, side: Side) -> Matrix3<f64> {
    let b = to_blocks(t);
    match side {
        Side::Plus => b.m_plus,
        Side::Minus => b.m_minus,
    }
}

/// `(k_sum(ℛ⁺, 2), k_sum(ℛ⁻, 2))`; both positive means half two-positive on each side.
pub fn half_two_positive(t: &AlgCurvature4) -> (f64, f64) {
    let b = to_blocks(t);
    let two = |m: &Matrix3<f64>| k_sum(&dyn3(m), 2).expect("k = 2 ≤ 3");
    (two(&b.m_plus), two(&b.m_minus))
}

/// `K₁₃ + K₁₄ + K₂₃ + K₂₄ ∓ 2R₁₂₃₄` in the frame given by the columns of `p`.
pub fn isotropic_curvature(t: &AlgCurvature4, p: &Matrix4<f64>, side: Side) -> f64 {
    let e: [Vector4<f64>; 4] = std::array::from_fn(|c| p.column(c).into_owned());
    let r = |a: &Vector4<f64>, b: &Vector4<f64>, c: &Vector4<f64>, d: &Vector4<f64>| {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let ab = a[i] * b[j];
                for k in 0..4 {
                    let abc = ab * c[k];
                    for l in 0..4 {
                        s += t.get(i, j, k, l) * abc * d[l];
                    }
                }
            }
        }
        s
    };
    let k = |a: usize, b: usize| r(&e[a], &e[b], &e[a], &e[b]);
    k(0, 2) + k(0, 3) + k(1, 2) + k(1, 3) - 2.0 * side.sign() * r(&e[0], &e[1], &e[2], &e[3])
}

/// Search configuration for [`min_isotropic`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IsotropicSearch {
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for IsotropicSearch {
    fn default() -> Self {
        IsotropicSearch {
            starts: 4,
            seed: 0x1507,
            max_iters: 300,
            grad_tol: 1e-10,
        }
    }
}

/// Minimum of the isotropic curvature expression over oriented orthonormal
/// frames, by multi-start descent on SO(4).
pub fn min_isotropic(t: &AlgCurvature4, side: Side, search: &IsotropicSearch) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    let budget = DescentBudget {
        max_iters: search.max_iters,
        grad_tol: search.grad_tol,
    };
    let objective = |p: &Matrix4<f64>| isotropic_curvature(t, p, side);
    let mut best = f64::INFINITY;
    for s in 0..search.starts.max(1) {
        let start = if s == 0 {
            Matrix4::identity()
        } else {
            random_so4(&mut rng)
        };
        let (_, v) = so4opt::minimize(&objective, start, budget);
        best = best.min(v);
    }
    best
}

/// `R|W±|² − 36 det W±`.
pub fn halfpic_functional(t: &AlgCurvature4, side: Side) -> f64 {
    let (hp, hm) = weyl_halves(t);
    let h = match side {
        Side::Plus => hp,
        Side::Minus => hm,
    };
    halfpic_from_half(t.scalar(), &h)
}

pub fn halfpic_from_half(scalar: f64, h: &WeylHalf) -> f64 {
    scalar * h.norm_sq - 36.0 * h.det
}

/// The functional on a zero-sum spectrum `x ≤ y ≤ z`.
pub fn halfpic_on_spectrum(scalar: f64, s: [f64; 3]) -> f64 {
    scalar * (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]) - 36.0 * s[0] * s[1] * s[2]
}

/// `(3/2) z² (R − 6z)`, the functional along `x = y = −z/2`.
pub fn reduced_form_z(scalar: f64, z: f64) -> f64 {
    1.5 * z * z * (scalar - 6.0 * z)
}

/// `6c²(2 − 3c)`, the reduced form quoted for the normalization `Ric = g`.
pub fn reduced_form_c_quoted(c: f64) -> f64 {
    6.0 * c * c * (2.0 - 3.0 * c)
}

/// `3c²(2 − 3c)`, what `4|W|² − 36 det W` actually equals along `a = b = −c/2`.
pub fn reduced_form_c(c: f64) -> f64 {
    3.0 * c * c * (2.0 - 3.0 * c)
}

/// Grid sizes for [`lemma31_min_oracle`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridBudget {
    pub coarse: usize,
    pub refinements: usize,
}

impl Default for GridBudget {
    fn default() -> Self {
        GridBudget {
            coarse: 400,
            refinements: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub scalar: f64,
    pub min: f64,
    /// Ascending spectrum attaining the minimum found by the grid.
    pub argmin: [f64; 3],
    /// Distinct spectra whose value lies within `1e-9·(1+R³)` of the minimum.
    pub near_minimizers: Vec<[f64; 3]>,
    /// Max deviation of the functional from `(3/2)z²(R−6z)` along `x = −z/2`.
    pub reduced_z_residual: f64,
}

/// Brute-force minimum of `R(x²+y²+z²) − 36xyz` over zero-sum spectra
/// `x ≤ y ≤ z` with `x + y + R/6 ≥ 0`.
///
/// The region is parametrized by `z ∈ [0, R/6]` and `x ∈ [−2z, −z/2]`.
pub fn lemma31_min_oracle(scalar: f64, budget: &GridBudget) -> OracleResult {
    let zmax = (scalar / 6.0).max(0.0);
    let eval = |u: f64, v: f64| {
        let z = u * zmax;
        let x = -2.0 * z + v * 1.5 * z;
        let s = [x, -x - z, z];
        (halfpic_on_spectrum(scalar, s), s)
    };
    let n = budget.coarse.max(2);
    let mut samples: Vec<(f64, [f64; 3], f64, f64)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
            let (f, s) = eval(u, v);
            samples.push((f, s, u, v));
        }
    }
    let best = samples
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .copied()
        .expect("grid is nonempty");
    let (mut fbest, mut sbest, mut ub, mut vb) = best;
    let mut width = 1.0 / (n - 1) as f64;
    for _ in 0..budget.refinements {
        let (u0, v0) = (ub, vb);
        let m = 21;
        for i in 0..m {
            for j in 0..m {
                let u = (u0 + width * (2.0 * i as f64 / (m - 1) as f64 - 1.0)).clamp(0.0, 1.0);
                let v = (v0 + width * (2.0 * j as f64 / (m - 1) as f64 - 1.0)).clamp(0.0, 1.0);
                let (f, s) = eval(u, v);
                if f < fbest {
                    (fbest, sbest, ub, vb) = (f, s, u, v);
                }
            }
        }
        width /= 10.0;
    }

    let tol = 1e-9 * (1.0 + scalar.abs().powi(3));
    let mut near: Vec<[f64; 3]> = Vec::new();
    let cluster = 1e-2 * zmax.max(1e-12);
    for (f, s, _, _) in &samples {
        if *f <= fbest + tol {
            let dup = near
                .iter()
                .any(|q| q.iter().zip(s).all(|(a, b)| (a - b).abs() <= cluster));
            if !dup {
                near.push(*s);
            }
        }
    }

    let mut reduced_z_residual: f64 = 0.0;
    for i in 0..=1000 {
        let z = zmax * i as f64 / 1000.0;
        let f = halfpic_on_spectrum(scalar, [-z / 2.0, -z / 2.0, z]);
        reduced_z_residual = reduced_z_residual.max((f - reduced_form_z(scalar, z)).abs());
    }

    OracleResult {
        scalar,
        min: fbest,
        argmin: sbest,
        near_minimizers: near,
        reduced_z_residual,
    }
}

/// Residuals of the two reduced forms along `a = b = −c/2` for the
/// normalization `Ric = g` (so `R = 4`), sampled on `c ∈ [0, 2/3]`:
/// `(quoted 6c²(2−3c), recomputed 3c²(2−3c))`.
pub fn reduced_c_residuals() -> (f64, f64) {
    let mut quoted: f64 = 0.0;
    let mut derived: f64 = 0.0;
    for i in 0..=1000 {
        let c = (2.0 / 3.0) * i as f64 / 1000.0;
        let a = -c / 2.0;
        let f = 8.0 * (a * a + a * c + c * c) + 36.0 * a * c * (a + c);
        quoted = quoted.max((f - reduced_form_c_quoted(c)).abs());
        derived = derived.max((f - reduced_form_c(c)).abs());
    }
    (quoted, derived)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    HalfConformallyFlatPlus,
    HalfConformallyFlatMinus,
    KahlerTypePlus,
    KahlerTypeMinus,
    Indefinite,
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub scalar: f64,
    pub sums_k_plus: [f64; 3],
    pub sums_k_minus: [f64; 3],
    pub sums_k_full: [f64; 6],
    pub half_two_margin_plus: f64,
    pub half_two_margin_minus: f64,
    pub min_isotropic_plus: f64,
    pub min_isotropic_minus: f64,
    pub halfpic_plus: f64,
    pub halfpic_minus: f64,
    pub classification: Vec<Label>,
}

fn prefix_sums<const N: usize>(mut eigs: Vec<f64>) -> [f64; N] {
    eigs.sort_by(f64::total_cmp);
    let mut out = [0.0; N];
    let mut acc = 0.0;
    for (o, e) in out.iter_mut().zip(eigs) {
        acc += e;
        *o = acc;
    }
    out
}

fn is_kahler_spectrum(h: &WeylHalf, scalar: f64, norm: f64) -> bool {
    if scalar <= 1e-10 * norm {
        return false;
    }
    let target = [-scalar / 12.0, -scalar / 12.0, scalar / 6.0];
    h.eigenvalues
        .iter()
        .zip(target)
        .all(|(a, b)| (a - b).abs() <= 1e-8 * scalar)
}

/// Pointwise labels and margins for a curvature tensor.
pub fn classify_point(t: &AlgCurvature4, search: &IsotropicSearch) -> PositivityReport {
    let blocks = to_blocks(t);
    let (hp, hm) = weyl_halves(t);
    let scalar = blocks.scalar;
    let norm = t.norm();
    let eig3 = |m: &Matrix3<f64>| m.symmetric_eigen().eigenvalues.iter().copied().collect::<Vec<_>>();
    let sums_k_plus: [f64; 3] = prefix_sums(eig3(&blocks.m_plus));
    let sums_k_minus: [f64; 3] = prefix_sums(eig3(&blocks.m_minus));
    let sums_k_full: [f64; 6] = prefix_sums(blocks.eigenvalues());

    let flat_tol = 1e-10 * norm;
    let mut labels = Vec::new();
    if hp.norm() <= flat_tol {
        labels.push(Label::HalfConformallyFlatPlus);
    }
    if hm.norm() <= flat_tol {
        labels.push(Label::HalfConformallyFlatMinus);
    }
    if is_kahler_spectrum(&hp, scalar, norm) {
        labels.push(Label::KahlerTypePlus);
    }
    if is_kahler_spectrum(&hm, scalar, norm) {
        labels.push(Label::KahlerTypeMinus);
    }
    let margin_tol = 1e-10 * norm;
    if sums_k_plus[1] < -margin_tol && sums_k_minus[1] < -margin_tol {
        labels.push(Label::Indefinite);
    }
    if labels.is_empty() {
        labels.push(Label::None);
    }
    // kahler labels sort before flatness labels in the output for readability
    labels.sort_by_key(|l| match l {
        Label::KahlerTypePlus | Label::KahlerTypeMinus => 0,
        _ => 1,
    });

    PositivityReport {
        scalar,
        sums_k_plus,
        sums_k_minus,
        sums_k_full,
        half_two_margin_plus: sums_k_plus[1],
        half_two_margin_minus: sums_k_minus[1],
        min_isotropic_plus: min_isotropic(t, Side::Plus, search),
        min_isotropic_minus: min_isotropic(t, Side::Minus, search),
        halfpic_plus: halfpic_from_half(scalar, &hp),
        halfpic_minus: halfpic_from_half(scalar, &hm),
        classification: labels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{model_tensor, random_tensor, random_zero_sum, synth_einstein, ModelSpec};

    fn model(spec: ModelSpec) -> AlgCurvature4 {
        model_tensor(&spec).unwrap()
    }

    #[test]
    fn k_sums() {
        let cp2 = model(ModelSpec::CP2 { scalar: 24.0 });
        let m = dyn3(&half_operator(&cp2, Side::Plus));
        assert!(k_sum(&m, 2).unwrap().abs() < 1e-12);
        let s4 = model(ModelSpec::S4 { r: 1.0 });
        assert!((k_sum(&dyn3(&half_operator(&s4, Side::Plus)), 2).unwrap() - 2.0).abs() < 1e-12);
        let p = model(ModelSpec::S2xS2 { r: 1.0 });
        let full = to_blocks(&p).assembled();
        let full = DMatrix::from_iterator(6, 6, full.iter().copied());
        // spectrum {0,0,0,0,1,1}: four-nonnegative with zero margin
        assert!(k_sum(&full, 4).unwrap().abs() < 1e-12);
        assert!((k_sum(&full, 5).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(k_sum(&full, 0), Err(Error::BadK { k: 0, dim: 6 })));
        assert!(matches!(k_sum(&full, 7), Err(Error::BadK { .. })));
    }

    #[test]
    fn half_two_margins() {
        let (p, m) = half_two_positive(&model(ModelSpec::CP2 { scalar: 24.0 }));
        assert!(p.abs() < 1e-12 && (m - 4.0).abs() < 1e-12);
        let (p, m) = half_two_positive(&model(ModelSpec::S4 { r: 1.0 }));
        assert!((p - 2.0).abs() < 1e-12 && (m - 2.0).abs() < 1e-12);
        let (p, m) = half_two_positive(&model(ModelSpec::H4 { r: 1.0 }));
        assert!((p + 2.0).abs() < 1e-12 && (m + 2.0).abs() < 1e-12);
    }

    #[test]
    fn isotropic_models() {
        let search = IsotropicSearch::default();
        let s4 = model(ModelSpec::S4 { r: 1.0 });
        assert!((min_isotropic(&s4, Side::Plus, &search) - 4.0).abs() < 1e-10);
        let r4 = model(ModelSpec::R4);
        assert!(min_isotropic(&r4, Side::Minus, &search).abs() < 1e-12);
        // ℛ⁺ of CP² is two-nonnegative with zero margin, ℛ⁻ = 2·I
        let cp2 = model(ModelSpec::CP2 { scalar: 24.0 });
        assert!(min_isotropic(&cp2, Side::Plus, &search).abs() < 1e-8);
        assert!((min_isotropic(&cp2, Side::Minus, &search) - 8.0).abs() < 1e-8);
    }

    #[test]
    fn isotropic_sign_matches_margin() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let search = IsotropicSearch::default();
        for _ in 0..20 {
            let t = random_tensor(&mut rng);
            let (mp, mm) = half_two_positive(&t);
            for (side, margin) in [(Side::Plus, mp), (Side::Minus, mm)] {
                let v = min_isotropic(&t, side, &search);
                assert!((v - 2.0 * margin).abs() < 1e-7, "{v} vs {margin}");
            }
        }
    }

    #[test]
    fn halfpic_values() {
        let cp2 = model(ModelSpec::CP2 { scalar: 24.0 });
        assert!(halfpic_functional(&cp2, Side::Plus).abs() < 1e-9);
        let s4 = model(ModelSpec::S4 { r: 1.0 });
        assert!(halfpic_functional(&s4, Side::Plus).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        for _ in 0..200 {
            let t = random_tensor(&mut rng);
            let (mp, mm) = half_two_positive(&t);
            if mp >= 0.0 {
                assert!(halfpic_functional(&t, Side::Plus) >= -1e-10 * t.norm().powi(3));
            }
            if mm >= 0.0 {
                assert!(halfpic_functional(&t, Side::Minus) >= -1e-10 * t.norm().powi(3));
            }
        }
    }

    #[test]
    fn oracle_minimum() {
        let r = lemma31_min_oracle(12.0, &GridBudget::default());
        assert!(r.min.abs() < 1e-10, "{}", r.min);
        assert!(r.reduced_z_residual < 1e-10);
        let has = |s: [f64; 3]| {
            r.near_minimizers
                .iter()
                .any(|q| q.iter().zip(s).all(|(a, b)| (a - b).abs() < 1e-3))
        };
        assert!(has([0.0, 0.0, 0.0]) && has([-1.0, -1.0, 2.0]), "{:?}", r.near_minimizers);
        let r0 = lemma31_min_oracle(0.0, &GridBudget::default());
        assert_eq!(r0.min, 0.0);
        assert_eq!(r0.argmin, [0.0; 3]);
    }

    #[test]
    fn reduced_c_forms() {
        let (quoted, derived) = reduced_c_residuals();
        assert!(derived < 1e-12);
        // the quoted form is off by a factor of two away from c = 0
        assert!(quoted > 0.1);
        assert_eq!(reduced_form_c(2.0 / 3.0), 0.0);
    }

    #[test]
    fn classification() {
        let search = IsotropicSearch {
            starts: 1,
            ..Default::default()
        };
        let cp2 = classify_point(&model(ModelSpec::CP2 { scalar: 24.0 }), &search);
        assert_eq!(
            cp2.classification,
            vec![Label::KahlerTypePlus, Label::HalfConformallyFlatMinus]
        );
        let s4 = classify_point(&model(ModelSpec::S4 { r: 1.0 }), &search);
        assert_eq!(
            s4.classification,
            vec![Label::HalfConformallyFlatPlus, Label::HalfConformallyFlatMinus]
        );
        let t = synth_einstein([-3.0, 1.0, 2.0], [-1.0, 0.0, 1.0], 12.0).unwrap();
        assert_eq!(classify_point(&t, &search).classification, vec![Label::None]);
        let h4 = synth_einstein([-1.0, 0.0, 1.0], [1.0, 0.0, -1.0], -12.0).unwrap();
        assert_eq!(classify_point(&h4, &search).classification, vec![Label::Indefinite]);
    }

    #[test]
    fn scale_and_frame_behaviour() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let search = IsotropicSearch::default();
        let w = random_zero_sum(&mut rng);
        let t = synth_einstein(w, [0.0; 3], 2.0).unwrap();
        let base = classify_point(&t, &search);
        let scaled = classify_point(&t.scale(3.0), &search);
        assert_eq!(base.classification, scaled.classification);
        assert!((scaled.halfpic_plus - 27.0 * base.halfpic_plus).abs() < 1e-9 * (1.0 + base.halfpic_plus.abs()));
        assert!((scaled.half_two_margin_plus - 3.0 * base.half_two_margin_plus).abs() < 1e-12);
        let rotated = classify_point(&t.in_frame(&random_so4(&mut rng)), &search);
        assert_eq!(base.classification, rotated.classification);
        assert!((rotated.halfpic_plus - base.halfpic_plus).abs() < 1e-10);
    }
}
