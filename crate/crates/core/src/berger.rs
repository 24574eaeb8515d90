//! Berger normal form of Einstein-type curvature tensors.
//!
//! In a suitable oriented orthonormal frame the curvature operator, written
//! in the pair basis `(12),(13),(14),(34),(42),(23)`, is `[[A,B],[B,A]]` with
//! `A = diag(a₁,a₂,a₃)` and `B = diag(b₁,b₂,b₃)`. The frame is obtained from
//! the eigenbases of `ℛ±` through the double cover `SO(4) → SO(3)×SO(3)`.

use nalgebra::{Matrix3, Matrix4, Matrix6, Rotation3, UnitQuaternion, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::duality::{sym_eigen3, to_blocks, DualPairMap};
use crate::error::{Error, Result};
use crate::models::{random_so4, so4_from_quaternions};
use crate::so4opt::{self, DescentBudget};
use crate::tensor::{standard_decompose, AlgCurvature4};

/// Einstein-type precondition: traceless Ricci at most this times `‖T‖`.
pub const EINSTEIN_REL_TOL: f64 = 1e-9;
/// Block-form postcondition relative to `‖T‖`.
pub const BLOCK_REL_TOL: f64 = 1e-8;

/// Pairs of the Berger basis `(12),(13),(14),(34),(42),(23)`, 0-based.
pub const BERGER_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2)];

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BergerForm {
    /// Columns are `e₁..e₄`; orthogonal with determinant +1.
    pub frame: Matrix4<f64>,
    /// Ascending sectional data `a₁ ≤ a₂ ≤ a₃`.
    pub a: [f64; 3],
    pub b: [f64; 3],
    /// Max deviation from `[[A,B],[B,A]]` in the recovered frame.
    pub block_residual: f64,
    /// Which construction produced the frame.
    pub method: FrameMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameMethod {
    QuaternionLift,
    QuaternionLiftAlternate,
    Descent,
}

pub(crate) fn berger_pair_matrix(t: &AlgCurvature4) -> Matrix6<f64> {
    Matrix6::from_fn(|p, q| {
        let (i, j) = BERGER_PAIRS[p];
        let (k, l) = BERGER_PAIRS[q];
        t.get(i, j, k, l)
    })
}

/// `max |M − [[A,B],[B,A]]|` for the tensor expressed in `frame`.
pub fn block_residual(t: &AlgCurvature4, frame: &Matrix4<f64>, a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let m = berger_pair_matrix(&t.in_frame(frame));
    let mut target = Matrix6::zeros();
    for i in 0..3 {
        target[(i, i)] = a[i];
        target[(i + 3, i + 3)] = a[i];
        target[(i, i + 3)] = b[i];
        target[(i + 3, i)] = b[i];
    }
    (m - target).abs().max()
}

fn traceless_ricci_norm(t: &AlgCurvature4) -> f64 {
    standard_decompose(t).traceless_ricci.0.norm()
}

pub(crate) fn require_einstein(t: &AlgCurvature4) -> Result<()> {
    let residual = traceless_ricci_norm(t);
    let tolerance = EINSTEIN_REL_TOL * t.norm();
    if residual > tolerance {
        return Err(Error::NotEinstein {
            residual,
            tolerance,
        });
    }
    Ok(())
}

fn oriented(mut u: Matrix3<f64>) -> Matrix3<f64> {
    if u.determinant() < 0.0 {
        u.column_mut(2).neg_mut();
    }
    u
}

fn lift(u: &Matrix3<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*u))
}

/// Computes the Berger normal form of an Einstein-type tensor.
pub fn berger_form(t: &AlgCurvature4) -> Result<BergerForm> {
    require_einstein(t)?;
    let blocks = to_blocks(t);
    let (alpha, up) = sym_eigen3(&blocks.m_plus);
    let (beta, um) = sym_eigen3(&blocks.m_minus);
    let a = [0, 1, 2].map(|i| 0.5 * (alpha[i] + beta[i]));
    let b = [0, 1, 2].map(|i| 0.5 * (alpha[i] - beta[i]));
    let tol = BLOCK_REL_TOL * t.norm();

    let p = lift(&oriented(up));
    let q = lift(&oriented(um));
    let candidates = [
        (p, q, FrameMethod::QuaternionLift),
        (p.conjugate(), q, FrameMethod::QuaternionLiftAlternate),
        (p, q.conjugate(), FrameMethod::QuaternionLiftAlternate),
        (p.conjugate(), q.conjugate(), FrameMethod::QuaternionLiftAlternate),
    ];
    let mut best: Option<BergerForm> = None;
    for (pp, qq, method) in candidates {
        let frame = so4_from_quaternions(pp, qq);
        let block_residual = block_residual(t, &frame, &a, &b);
        let bf = BergerForm {
            frame,
            a,
            b,
            block_residual,
            method,
        };
        if block_residual <= tol {
            return Ok(bf);
        }
        if best.is_none_or(|cur| block_residual < cur.block_residual) {
            best = Some(bf);
        }
    }

    let seed = best.expect("four candidates evaluated");
    let objective = |f: &Matrix4<f64>| {
        let m = berger_pair_matrix(&t.in_frame(f));
        let mut s = 0.0;
        for r in 0..6 {
            for c in 0..6 {
                let target = if r == c {
                    a[r % 3]
                } else if (r + 3 == c) || (c + 3 == r) {
                    b[r % 3]
                } else {
                    0.0
                };
                s += (m[(r, c)] - target).powi(2);
            }
        }
        s
    };
    let (frame, _) = so4opt::minimize(
        &objective,
        seed.frame,
        DescentBudget {
            max_iters: 2000,
            grad_tol: 1e-14,
        },
    );
    let residual = block_residual(t, &frame, &a, &b);
    if residual <= tol {
        return Ok(BergerForm {
            frame,
            a,
            b,
            block_residual: residual,
            method: FrameMethod::Descent,
        });
    }
    Err(Error::FrameRecoveryFailure {
        residual,
        tolerance: tol,
    })
}

/// `R(X,Y,X,Y) / (|X|²|Y|² − ⟨X,Y⟩²)`.
pub fn sectional(t: &AlgCurvature4, x: &Vector4<f64>, y: &Vector4<f64>) -> Result<f64> {
    let area2 = x.norm_squared() * y.norm_squared() - x.dot(y).powi(2);
    let scale = x.norm_squared() * y.norm_squared();
    if !(area2 > 1e-14 * scale) {
        return Err(Error::DegeneratePlane);
    }
    Ok(curvature_xyxy(t, x, y) / area2)
}

pub(crate) fn curvature_xyxy(t: &AlgCurvature4, x: &Vector4<f64>, y: &Vector4<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let xy = x[i] * y[j];
            if xy == 0.0 {
                continue;
            }
            for k in 0..4 {
                for l in 0..4 {
                    s += t.get(i, j, k, l) * xy * x[k] * y[l];
                }
            }
        }
    }
    s
}

/// Search configuration for [`extremal_plane`].
#[derive(Debug, Clone, Copy)]
pub struct PlaneSearch {
    /// Best grid planes refined by descent.
    pub grid_starts: usize,
    /// Additional random starting frames.
    pub random_starts: usize,
    pub seed: u64,
    pub descent: DescentBudget,
}

impl Default for PlaneSearch {
    fn default() -> Self {
        PlaneSearch {
            grid_starts: 3,
            random_starts: 2,
            seed: 0x5eed,
            descent: DescentBudget {
                max_iters: 300,
                grad_tol: 1e-9,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExtremalPlane {
    pub x: Vector4<f64>,
    pub y: Vector4<f64>,
    pub value: f64,
}

fn grid_directions() -> Vec<Vector4<f64>> {
    // nonzero vectors with entries in {−1, 0, 1}, one of each ± pair
    let mut out = Vec::new();
    for code in 1..81 {
        let mut c = code;
        let mut v = Vector4::zeros();
        for i in 0..4 {
            v[i] = (c % 3) as f64 - 1.0;
            c /= 3;
        }
        let first = v.iter().find(|x| **x != 0.0).copied();
        if first == Some(1.0) {
            out.push(v.normalize());
        }
    }
    out
}

fn complete_frame(x: &Vector4<f64>, y: &Vector4<f64>) -> Matrix4<f64> {
    let mut cols = vec![x.normalize()];
    let y = (y - cols[0] * cols[0].dot(y)).normalize();
    cols.push(y);
    for e in 0..4 {
        if cols.len() == 4 {
            break;
        }
        let mut v = Vector4::zeros();
        v[e] = 1.0;
        for c in &cols {
            v -= c * c.dot(&v);
        }
        if v.norm() > 1e-6 {
            cols.push(v.normalize());
        }
    }
    let mut m = Matrix4::from_columns(&cols);
    if m.determinant() < 0.0 {
        m.column_mut(3).neg_mut();
    }
    m
}

/// Minimizes the sectional curvature over the Grassmannian of 2-planes by
/// a coarse grid of planes followed by multi-start descent.
pub fn extremal_plane(t: &AlgCurvature4, search: &PlaneSearch) -> ExtremalPlane {
    let dirs = grid_directions();
    let mut grid: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..dirs.len() {
        for b in a + 1..dirs.len() {
            if let Ok(k) = sectional(t, &dirs[a], &dirs[b]) {
                grid.push((k, a, b));
            }
        }
    }
    grid.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut starts: Vec<Matrix4<f64>> = grid
        .iter()
        .take(search.grid_starts)
        .map(|&(_, a, b)| complete_frame(&dirs[a], &dirs[b]))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    starts.extend((0..search.random_starts).map(|_| random_so4(&mut rng)));

    let objective = |f: &Matrix4<f64>| {
        curvature_xyxy(t, &f.column(0).into_owned(), &f.column(1).into_owned())
    };
    let mut best = ExtremalPlane {
        x: dirs[grid[0].1],
        y: dirs[grid[0].2],
        value: grid[0].0,
    };
    for s in starts {
        let (f, v) = so4opt::minimize(&objective, s, search.descent);
        if v < best.value {
            best = ExtremalPlane {
                x: f.column(0).into_owned(),
                y: f.column(1).into_owned(),
                value: v,
            };
        }
    }
    best
}

/// Max over dual pairs of `|K(e_i,e_j) − K(e_i',e_j')|` and over all
/// components of `|R_ijkl − R_i'j'k'l'|`, in the given frame.
pub fn berger_lemma_check(t: &AlgCurvature4, frame: &Matrix4<f64>) -> f64 {
    let r = t.in_frame(frame);
    let mut worst = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let (ip, jp) = DualPairMap::dual(i, j);
            worst = worst.max((r.get(i, j, i, j) - r.get(ip, jp, ip, jp)).abs());
            for k in 0..4 {
                for l in 0..4 {
                    if k == l {
                        continue;
                    }
                    let (kp, lp) = DualPairMap::dual(k, l);
                    worst = worst.max((r.get(i, j, k, l) - r.get(ip, jp, kp, lp)).abs());
                }
            }
        }
    }
    worst
}

/// The twelve components that vanish in a Berger frame, with 1-based labels.
pub const VARIATIONAL_COMPONENTS: [[usize; 4]; 12] = [
    [1, 3, 2, 3],
    [1, 3, 1, 2],
    [1, 3, 4, 3],
    [1, 3, 1, 4],
    [2, 1, 2, 4],
    [2, 3, 2, 4],
    [4, 1, 4, 2],
    [4, 2, 4, 3],
    [1, 2, 1, 4],
    [2, 1, 2, 3],
    [3, 4, 3, 2],
    [4, 3, 4, 1],
];

/// The twelve first-variation components in the Berger frame.
pub fn variational_conditions(t: &AlgCurvature4, bf: &BergerForm) -> [([usize; 4], f64); 12] {
    let r = t.in_frame(&bf.frame);
    VARIATIONAL_COMPONENTS.map(|c| (c, r.get(c[0] - 1, c[1] - 1, c[2] - 1, c[3] - 1)))
}

/// The appendix inequalities `|R₁₃₄₂ − R₁₄₂₃| ≤ R₁₄₁₄ − R₁₃₁₃` and its two
/// companions, returned as `(rhs − lhs)` margins (nonnegative when they hold).
pub fn appendix_inequality_margins(t: &AlgCurvature4, bf: &BergerForm) -> [f64; 3] {
    let r = t.in_frame(&bf.frame);
    let g = |i: usize, j: usize, k: usize, l: usize| r.get(i - 1, j - 1, k - 1, l - 1);
    [
        (g(1, 4, 1, 4) - g(1, 3, 1, 3)) - (g(1, 3, 4, 2) - g(1, 4, 2, 3)).abs(),
        (g(1, 3, 1, 3) - g(1, 2, 1, 2)) - (g(1, 2, 3, 4) - g(1, 3, 4, 2)).abs(),
        (g(1, 4, 1, 4) - g(1, 2, 1, 2)) - (g(1, 4, 2, 3) - g(1, 2, 3, 4)).abs(),
    ]
}

impl BergerForm {
    /// Margins of `|b₂−b₁| ≤ a₂−a₁`, `|b₃−b₁| ≤ a₃−a₁`, `|b₃−b₂| ≤ a₃−a₂`.
    pub fn property3_margins(&self) -> [f64; 3] {
        let (a, b) = (self.a, self.b);
        [
            (a[1] - a[0]) - (b[1] - b[0]).abs(),
            (a[2] - a[0]) - (b[2] - b[0]).abs(),
            (a[2] - a[1]) - (b[2] - b[1]).abs(),
        ]
    }

    /// Sectional curvatures `K(e₁,e₂), K(e₃,e₄), K(e₁,e₃), K(e₂,e₄), K(e₁,e₄), K(e₂,e₃)`
    /// read off in the Berger frame.
    pub fn frame_sectionals(&self, t: &AlgCurvature4) -> [f64; 6] {
        let r = t.in_frame(&self.frame);
        [(0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2)].map(|(i, j)| r.get(i, j, i, j))
    }
}

/// Runs [`berger_form`] over a batch in parallel, preserving order.
pub fn berger_forms(ts: &[AlgCurvature4]) -> Vec<Result<BergerForm>> {
    ts.par_iter().map(berger_form).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{model_tensor, random_einstein, random_tensor, ModelSpec};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn sphere_form() {
        let t = model_tensor(&ModelSpec::S4 { r: 1.0 }).unwrap();
        let bf = berger_form(&t).unwrap();
        assert!(close(&bf.a, &[1.0; 3], 1e-12));
        assert!(close(&bf.b, &[0.0; 3], 1e-12));
    }

    #[test]
    fn cp2_form() {
        let t = model_tensor(&ModelSpec::CP2 { scalar: 24.0 }).unwrap();
        let bf = berger_form(&t).unwrap();
        assert!(close(&bf.a, &[1.0, 1.0, 4.0], 1e-12), "{:?}", bf.a);
        assert!(close(&bf.b, &[-1.0, -1.0, 2.0], 1e-12), "{:?}", bf.b);
        assert!((bf.a.iter().sum::<f64>() - 6.0).abs() < 1e-12);
        let k = bf.frame_sectionals(&t);
        assert!((k[0] - 1.0).abs() < 1e-12);
        assert!((k[4] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn product_form() {
        let t = model_tensor(&ModelSpec::S2xS2 { r: 1.0 }).unwrap();
        let bf = berger_form(&t).unwrap();
        assert!(close(&bf.a, &[0.0, 0.0, 1.0], 1e-12));
        assert!(close(&bf.b, &[0.0; 3], 1e-12));
    }

    #[test]
    fn non_einstein_rejected() {
        let t = model_tensor(&ModelSpec::S2aXS2b { a: 1.0, b: 2.0 }).unwrap();
        assert!(matches!(berger_form(&t), Err(Error::NotEinstein { .. })));
    }

    #[test]
    fn sectional_values() {
        let s4 = model_tensor(&ModelSpec::S4 { r: 1.0 }).unwrap();
        let x = Vector4::new(1.0, 2.0, 0.0, -1.0);
        let y = Vector4::new(0.0, 1.0, 3.0, 1.0);
        assert!((sectional(&s4, &x, &y).unwrap() - 1.0).abs() < 1e-14);
        let p = model_tensor(&ModelSpec::S2xS2 { r: 1.0 }).unwrap();
        let e = |i: usize| Vector4::from_fn(|r, _| if r == i { 1.0 } else { 0.0 });
        assert_eq!(sectional(&p, &e(0), &e(2)).unwrap(), 0.0);
        assert_eq!(sectional(&p, &e(0), &e(1)).unwrap(), 1.0);
        assert!(matches!(
            sectional(&p, &x, &(x * 2.0)),
            Err(Error::DegeneratePlane)
        ));
    }

    #[test]
    fn extremal_plane_models() {
        let search = PlaneSearch::default();
        let s4 = model_tensor(&ModelSpec::S4 { r: 1.0 }).unwrap();
        assert!((extremal_plane(&s4, &search).value - 1.0).abs() < 1e-12);
        let cp2 = model_tensor(&ModelSpec::CP2 { scalar: 24.0 }).unwrap();
        assert!((extremal_plane(&cp2, &search).value - 1.0).abs() < 1e-8);
        let p = model_tensor(&ModelSpec::S2xS2 { r: 1.0 }).unwrap();
        assert!(extremal_plane(&p, &search).value.abs() < 1e-12);
    }

    #[test]
    fn lemma_check_einstein_vs_not() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = random_einstein(&mut rng);
        for _ in 0..100 {
            let f = random_so4(&mut rng);
            assert!(berger_lemma_check(&e, &f) <= 1e-10);
        }
        let t = random_tensor(&mut rng);
        assert!(berger_lemma_check(&t, &Matrix4::identity()) > 1e-3);
    }

    #[test]
    fn random_einstein_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let t = random_einstein(&mut rng);
            let bf = berger_form(&t).unwrap();
            assert!(bf.block_residual <= 1e-8);
            assert!((bf.frame.determinant() - 1.0).abs() < 1e-12);
            assert!(bf.property3_margins().iter().all(|m| *m >= -1e-12));
            for (_, v) in variational_conditions(&t, &bf) {
                assert!(v.abs() <= 1e-8);
            }
            assert!(appendix_inequality_margins(&t, &bf).iter().all(|m| *m >= -1e-10));
            let lambda = t.ricci().0[(0, 0)];
            assert!((bf.a.iter().sum::<f64>() - lambda).abs() < 1e-12);
        }
    }
}
