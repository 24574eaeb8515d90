//! Algebraic (0,4) tensors at a point of a four-dimensional inner-product
//! space, always expressed in an orthonormal frame.
//!
//! Sign conventions: `R_ijkl = g_hk R^h_ijl`, so the sectional curvature of
//! the plane `e_i ∧ e_j` is `R_ijij` and the round unit sphere has
//! `R_ijij = 1` for `i != j`. Contractions are `R_ik = Σ_j R_ijkj` and
//! `R = Σ_i R_ii`.

use nalgebra::Matrix4;
use serde::Serialize;

use crate::error::{Error, Identity, Result};

/// Relative tolerance used by [`AlgCurvature4::validate`].
pub const SYMMETRY_REL_TOL: f64 = 1e-12;

#[inline]
pub(crate) const fn idx(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * 4 + j) * 4 + k) * 4 + l
}

/// A raw (0,4) tensor with no symmetry guarantees.
#[derive(Clone, Copy, PartialEq)]
pub struct Tensor4(pub [f64; 256]);

impl std::fmt::Debug for Tensor4 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Tensor4 {{ max_abs: {:e} }}", self.max_abs())
    }
}

impl Default for Tensor4 {
    fn default() -> Self {
        Self::zeros()
    }
}

impl Tensor4 {
    pub const fn zeros() -> Self {
        Tensor4([0.0; 256])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        t.0[idx(i, j, k, l)] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.0[idx(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.0[idx(i, j, k, l)] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `sqrt(⟨T,T⟩)` with the quarter-weighted inner product.
    pub fn norm(&self) -> f64 {
        inner_product(self, self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        out.0.iter_mut().zip(other.0.iter()).for_each(|(a, b)| *a += b);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = *self;
        out.0.iter_mut().zip(other.0.iter()).for_each(|(a, b)| *a -= b);
        out
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        self.0.iter_mut().zip(x.0.iter()).for_each(|(y, x)| *y += a * x);
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Components in the frame whose vectors are the columns of `frame`:
    /// `T'_abcd = Σ F_ia F_jb F_kc F_ld T_ijkl`.
    pub fn in_frame(&self, frame: &Matrix4<f64>) -> Self {
        let mut cur = self.0;
        // contract one slot at a time; the slot being contracted is rotated
        // to the last position so each pass is the same loop
        for _ in 0..4 {
            let mut next = [0.0; 256];
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for a in 0..4 {
                            let mut s = 0.0;
                            for l in 0..4 {
                                s += frame[(l, a)] * cur[idx(i, j, k, l)];
                            }
                            // new layout: (a, i, j, k)
                            next[idx(a, i, j, k)] = s;
                        }
                    }
                }
            }
            cur = next;
        }
        Tensor4(cur)
    }

    /// Largest violation of the three curvature identities, with the
    /// identity and the 0-based index where it occurs.
    pub fn worst_symmetry_defect(&self) -> (Identity, [usize; 4], f64) {
        let mut worst = (Identity::Antisymmetry, [0; 4], 0.0);
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let v = self.get(i, j, k, l);
                        let checks = [
                            (Identity::Antisymmetry, (v + self.get(j, i, k, l)).abs()),
                            (Identity::Antisymmetry, (v + self.get(i, j, l, k)).abs()),
                            (Identity::PairSymmetry, (v - self.get(k, l, i, j)).abs()),
                            (
                                Identity::FirstBianchi,
                                (v + self.get(i, k, l, j) + self.get(i, l, j, k)).abs(),
                            ),
                        ];
                        for (id, mag) in checks {
                            if mag > worst.2 {
                                worst = (id, [i, j, k, l], mag);
                            }
                        }
                    }
                }
            }
        }
        worst
    }

    /// Largest deviation from antisymmetry in each pair and pair exchange.
    pub fn pair_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let v = self.get(i, j, k, l);
                        worst = worst
                            .max((v + self.get(j, i, k, l)).abs())
                            .max((v + self.get(i, j, l, k)).abs())
                            .max((v - self.get(k, l, i, j)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// `⟨S,T⟩ = ¼ Σ S_ijkl T_ijkl` in an orthonormal frame.
pub fn inner_product(s: &Tensor4, t: &Tensor4) -> f64 {
    0.25 * s.0.iter().zip(t.0.iter()).map(|(a, b)| a * b).sum::<f64>()
}

/// Symmetric bilinear form on the tangent space (metric, Ricci, Hessians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymBilinear4(pub Matrix4<f64>);

impl SymBilinear4 {
    pub fn identity() -> Self {
        SymBilinear4(Matrix4::identity())
    }

    /// Symmetrizes the input; callers that need a check use [`Self::asymmetry`].
    pub fn from_matrix(m: Matrix4<f64>) -> Self {
        SymBilinear4((m + m.transpose()) * 0.5)
    }

    pub fn asymmetry(m: &Matrix4<f64>) -> f64 {
        (m - m.transpose()).abs().max()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }
}

/// Kulkarni–Nomizu product
/// `(a∘b)_ijkl = a_ik b_jl + a_jl b_ik − a_il b_jk − a_jk b_il`.
///
/// Accepts arbitrary (not necessarily symmetric) matrices so that
/// expressions like `∇λ⊗∇f ∘ g` can be formed with the same index pattern.
pub fn kulkarni_nomizu(a: &Matrix4<f64>, b: &Matrix4<f64>) -> Tensor4 {
    Tensor4::from_fn(|i, j, k, l| {
        a[(i, k)] * b[(j, l)] + a[(j, l)] * b[(i, k)] - a[(i, l)] * b[(j, k)] - a[(j, k)] * b[(i, l)]
    })
}

/// An algebraic curvature tensor: antisymmetric in each pair, symmetric under
/// pair exchange, and satisfying the first Bianchi identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgCurvature4 {
    comps: Tensor4,
}

impl AlgCurvature4 {
    /// Accepts `t` iff every identity holds within `1e-12·‖t‖∞`.
    pub fn validate(t: Tensor4) -> Result<Self> {
        Self::validate_rel(t, SYMMETRY_REL_TOL)
    }

    pub fn validate_rel(t: Tensor4, rel_tol: f64) -> Result<Self> {
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        if !t.get(i, j, k, l).is_finite() {
                            return Err(Error::NonFinite([i + 1, j + 1, k + 1, l + 1]));
                        }
                    }
                }
            }
        }
        let tol = rel_tol * t.max_abs();
        let (identity, index, magnitude) = t.worst_symmetry_defect();
        if magnitude > tol {
            return Err(Error::SymmetryViolation {
                identity,
                index: index.map(|v| v + 1),
                magnitude,
            });
        }
        Ok(AlgCurvature4 { comps: t })
    }

    /// Wraps without checking; for tensors built from constructions that
    /// satisfy the identities by design.
    pub(crate) fn from_trusted(t: Tensor4) -> Self {
        AlgCurvature4 { comps: t }
    }

    /// Projects an arbitrary tensor onto the algebraic curvature tensors
    /// (antisymmetrize, pair-symmetrize, then remove the Bianchi part).
    pub fn project(t: &Tensor4) -> Self {
        let s = Tensor4::from_fn(|i, j, k, l| {
            0.125
                * (t.get(i, j, k, l) - t.get(j, i, k, l) - t.get(i, j, l, k)
                    + t.get(j, i, l, k)
                    + t.get(k, l, i, j)
                    - t.get(l, k, i, j)
                    - t.get(k, l, j, i)
                    + t.get(l, k, j, i))
        });
        // the totally antisymmetric part is exactly the Bianchi defect
        let b = Tensor4::from_fn(|i, j, k, l| {
            (s.get(i, j, k, l) + s.get(i, k, l, j) + s.get(i, l, j, k)) / 3.0
        });
        AlgCurvature4 { comps: s.sub(&b) }
    }

    pub fn tensor(&self) -> &Tensor4 {
        &self.comps
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.comps.get(i, j, k, l)
    }

    pub fn norm(&self) -> f64 {
        self.comps.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        AlgCurvature4 {
            comps: self.comps.scale(s),
        }
    }

    /// The same tensor expressed in another (oriented) orthonormal frame.
    pub fn in_frame(&self, frame: &Matrix4<f64>) -> Self {
        AlgCurvature4 {
            comps: self.comps.in_frame(frame),
        }
    }

    pub fn ricci(&self) -> SymBilinear4 {
        ricci(self)
    }

    pub fn scalar(&self) -> f64 {
        scalar(self)
    }
}

/// `R_ik = Σ_j R_ijkj`.
pub fn ricci(t: &AlgCurvature4) -> SymBilinear4 {
    SymBilinear4::from_matrix(contract_ricci(t.tensor()))
}

pub(crate) fn contract_ricci(t: &Tensor4) -> Matrix4<f64> {
    Matrix4::from_fn(|i, k| (0..4).map(|j| t.get(i, j, k, j)).sum())
}

pub fn scalar(t: &AlgCurvature4) -> f64 {
    ricci(t).trace()
}

/// Scalar, traceless Ricci and Weyl parts of a curvature tensor.
#[derive(Debug, Clone, Copy)]
pub struct CurvDecomposition {
    pub scalar: f64,
    pub traceless_ricci: SymBilinear4,
    pub weyl: AlgCurvature4,
}

impl CurvDecomposition {
    /// `Rm = −R/12 g∘g + ½ Ric∘g + W`.
    pub fn recompose(&self) -> AlgCurvature4 {
        let g = Matrix4::identity();
        let ric = self.traceless_ricci.0 + g * (self.scalar / 4.0);
        let mut t = kulkarni_nomizu(&g, &g).scale(-self.scalar / 12.0);
        t.axpy(0.5, &kulkarni_nomizu(&ric, &g));
        AlgCurvature4::from_trusted(t.add(self.weyl.tensor()))
    }

    pub fn ricci(&self) -> SymBilinear4 {
        SymBilinear4(self.traceless_ricci.0 + Matrix4::identity() * (self.scalar / 4.0))
    }
}

/// Splits `Rm = −R/(2(n−1)(n−2)) g∘g + 1/(n−2) Ric∘g + W` at `n = 4`.
pub fn standard_decompose(t: &AlgCurvature4) -> CurvDecomposition {
    let g = Matrix4::identity();
    let ric = ricci(t);
    let r = ric.trace();
    let mut w = *t.tensor();
    w.axpy(r / 12.0, &kulkarni_nomizu(&g, &g));
    w.axpy(-0.5, &kulkarni_nomizu(&ric.0, &g));
    CurvDecomposition {
        scalar: r,
        traceless_ricci: SymBilinear4(ric.0 - g * (r / 4.0)),
        weyl: AlgCurvature4::from_trusted(w),
    }
}
