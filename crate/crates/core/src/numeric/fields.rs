//! Curvature, its covariant derivatives, and potential data at a point.
//!
//! Coordinate components are exact at every stencil point; the only
//! discretization error comes from differencing them.

use nalgebra::Matrix4;

use super::chart::{Chart, PointGeometry};
use super::fd::{differentiate, Derivs, DiffConfig};
use super::structure::{PotentialAt, QuasiEinsteinStructure};
use crate::duality::{pm_project_unchecked, weyl_halves, WeylHalf};
use crate::error::{Error, Result};
use crate::tensor::{standard_decompose, AlgCurvature4, Tensor4};

/// Algebraic curvature data at a point, orthonormal frame.
#[derive(Debug, Clone)]
pub struct CurvatureFields {
    pub geometry: PointGeometry,
    pub rm: AlgCurvature4,
    pub ricci: Matrix4<f64>,
    pub scalar: f64,
    pub weyl: Tensor4,
    pub weyl_plus: Tensor4,
    pub weyl_minus: Tensor4,
    pub half_plus: WeylHalf,
    pub half_minus: WeylHalf,
}

pub fn curvature_at(chart: &Chart, x: &[f64; 4]) -> Result<CurvatureFields> {
    let geometry = PointGeometry::at(chart, x)?;
    let rm = geometry.rm_orth();
    let dec = standard_decompose(&rm);
    let weyl = *dec.weyl.tensor();
    let (weyl_plus, weyl_minus) = pm_project_unchecked(&weyl);
    let (half_plus, half_minus) = weyl_halves(&rm);
    Ok(CurvatureFields {
        ricci: rm.ricci().0,
        scalar: dec.scalar,
        geometry,
        rm,
        weyl,
        weyl_plus,
        weyl_minus,
        half_plus,
        half_minus,
    })
}

// layout of the sampled vector
const RM: usize = 0;
const W: usize = 256;
const WP2: usize = 512;
const WM2: usize = 513;
const RIC: usize = 514;
const SCAL: usize = 530;
const LAM: usize = 531;

fn sample(chart: &Chart, structure: Option<&QuasiEinsteinStructure>, x: &[f64; 4]) -> Result<Vec<f64>> {
    let c = curvature_at(chart, x)?;
    let pg = &c.geometry;
    let mut v = Vec::with_capacity(LAM + 1);
    v.extend_from_slice(&pg.rm.0);
    v.extend_from_slice(&pg.coord4(&c.weyl).0);
    v.push(c.half_plus.norm_sq);
    v.push(c.half_minus.norm_sq);
    v.extend(pg.ricci_coord().transpose().iter().copied());
    v.push(c.scalar);
    if let Some(s) = structure {
        v.push(s.potential_at(pg).lambda);
    }
    Ok(v)
}

/// `out[a] = Σ_slots Σ_m coef(m, a_s) t[a with a_s → m]` for a rank-`r` tensor
/// stored with the first index most significant.
fn slot_action(t: &[f64], rank: usize, coef: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let n = t.len();
    let mut out = vec![0.0; n];
    for s in 0..rank {
        let stride = 4usize.pow((rank - 1 - s) as u32);
        for (idx, o) in out.iter_mut().enumerate() {
            let a = (idx / stride) % 4;
            let base = idx - a * stride;
            let mut acc = 0.0;
            for m in 0..4 {
                acc += coef(m, a) * t[base + m * stride];
            }
            *o += acc;
        }
    }
    out
}

/// Components of a rank-`r` covariant tensor in the frame whose vectors are the columns of `e`.
pub fn to_frame(t: &[f64], rank: usize, e: &Matrix4<f64>) -> Vec<f64> {
    let mut cur = t.to_vec();
    for s in 0..rank {
        let stride = 4usize.pow((rank - 1 - s) as u32);
        let mut next = vec![0.0; cur.len()];
        for (idx, v) in cur.iter().enumerate() {
            if *v == 0.0 {
                continue;
            }
            let a = (idx / stride) % 4;
            let base = idx - a * stride;
            for b in 0..4 {
                next[base + b * stride] += e[(a, b)] * v;
            }
        }
        cur = next;
    }
    cur
}

/// First covariant derivative `(∇T)_{p a…}` of a rank-`r` coordinate tensor.
pub fn cov1(pg: &PointGeometry, t: &[f64], dt: &[Vec<f64>; 4], rank: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(4 * t.len());
    for p in 0..4 {
        let corr = slot_action(t, rank, |m, a| pg.gamma[m][p][a]);
        out.extend(dt[p].iter().zip(&corr).map(|(d, c)| d - c));
    }
    out
}

/// Rough Laplacian `g^{pq} ∇_q∇_p T` of a rank-`r` coordinate tensor.
pub fn laplacian(pg: &PointGeometry, t: &[f64], dt: &[Vec<f64>; 4], ddt: &[[Vec<f64>; 4]; 4], rank: usize) -> Vec<f64> {
    let n = t.len();
    let nab = cov1(pg, t, dt, rank);
    let slice = |p: usize| &nab[p * n..(p + 1) * n];
    let mut out = vec![0.0; n];
    for q in 0..4 {
        for p in 0..4 {
            let w = pg.ginv[(p, q)];
            if w == 0.0 {
                continue;
            }
            // ∂_q(∇_p T)
            let a = slot_action(t, rank, |m, s| pg.dgamma[q][m][p][s]);
            let b = slot_action(&dt[q], rank, |m, s| pg.gamma[m][p][s]);
            // Γ^m_{q a_s} (∇_p T)_{…m…}
            let c = slot_action(slice(p), rank, |m, s| pg.gamma[m][q][s]);
            for i in 0..n {
                let mut v = ddt[q][p][i] - a[i] - b[i] - c[i];
                for m in 0..4 {
                    v -= pg.gamma[m][q][p] * slice(m)[i];
                }
                out[i] += w * v;
            }
        }
    }
    out
}

fn scalar_parts(pg: &PointGeometry, d: &Derivs, c: usize) -> ([f64; 4], f64, Matrix4<f64>) {
    let grad: [f64; 4] = std::array::from_fn(|i| d.d1[i][c]);
    let hess = Matrix4::from_fn(|i, j| {
        let mut s = d.d2[i][j][c];
        for k in 0..4 {
            s -= pg.gamma[k][i][j] * grad[k];
        }
        s
    });
    let lap = (pg.ginv * hess).trace();
    (grad, lap, hess)
}

/// Derivative data of the potential and of `λ`, orthonormal frame.
#[derive(Debug, Clone)]
pub struct PotentialFields {
    pub at: PotentialAt,
    pub inv_m: f64,
    pub grad_lambda: [f64; 4],
    pub hess_lambda: Matrix4<f64>,
    /// `Δ_f Rm = ΔRm − ∇_{∇f} Rm`.
    pub drift_lap_rm: Tensor4,
    /// `Δ_f |W±|²`.
    pub drift_lap_w_norm_sq: [f64; 2],
}

/// Everything the identity checks consume at one point. Tensors are in the
/// orthonormal frame of `curvature.geometry`; index `[0]` is `+`, `[1]` is `−`.
#[derive(Debug, Clone)]
pub struct PointwiseFields {
    pub curvature: CurvatureFields,
    pub cfg: DiffConfig,
    /// `∇_p R_ijkl`, flattened with `p` first.
    pub nabla_rm: Vec<f64>,
    pub lap_rm: Tensor4,
    /// `∇_p W_ijkl`.
    pub nabla_w: Vec<f64>,
    pub nabla_w_norm_sq: [f64; 2],
    /// `δW±_jkl = ∇_i W±_ijkl`.
    pub delta_w: [Vec<f64>; 2],
    pub delta_w_norm_sq: [f64; 2],
    pub w_norm_sq: [f64; 2],
    pub grad_w_norm_sq: [[f64; 4]; 2],
    pub lap_w_norm_sq: [f64; 2],
    /// `∇_p R_jk`.
    pub nabla_ric: Vec<f64>,
    pub grad_scalar: [f64; 4],
    pub potential: Option<PotentialFields>,
}

impl PointwiseFields {
    pub fn compute(chart: &Chart, structure: Option<&QuasiEinsteinStructure>, x: &[f64; 4], cfg: &DiffConfig) -> Result<Self> {
        let curvature = curvature_at(chart, x)?;
        let reach = cfg.scheme.reach() as f64 * cfg.h;
        for i in 0..4 {
            for s in [-reach, reach] {
                let mut y = *x;
                y[i] += s;
                if !chart.in_domain(&y) {
                    return Err(Error::StencilOutOfDomain(y));
                }
            }
        }
        let d = differentiate(&|y: &[f64; 4]| sample(chart, structure, y), x, cfg, true)?;
        let pg = &curvature.geometry;
        let e = &pg.frame;

        let sl = |v: &Vec<f64>, a: usize, b: usize| v[a..b].to_vec();
        let part = |a: usize, b: usize| -> (Vec<f64>, [Vec<f64>; 4], [[Vec<f64>; 4]; 4]) {
            (
                sl(&d.value, a, b),
                std::array::from_fn(|i| sl(&d.d1[i], a, b)),
                std::array::from_fn(|i| std::array::from_fn(|j| sl(&d.d2[i][j], a, b))),
            )
        };

        let (rm, drm, ddrm) = part(RM, RM + 256);
        let nabla_rm = to_frame(&cov1(pg, &rm, &drm, 4), 5, e);
        let lap_rm = Tensor4(to_frame(&laplacian(pg, &rm, &drm, &ddrm, 4), 4, e).try_into().expect("256 entries"));

        let (w, dw, _) = part(W, W + 256);
        let nabla_w = to_frame(&cov1(pg, &w, &dw, 4), 5, e);
        let mut nabla_w_norm_sq = [0.0; 2];
        let mut delta_w = [vec![0.0; 64], vec![0.0; 64]];
        for p in 0..4 {
            let slice = Tensor4(nabla_w[p * 256..(p + 1) * 256].try_into().expect("256 entries"));
            let (plus, minus) = pm_project_unchecked(&slice);
            for (side, t) in [plus, minus].iter().enumerate() {
                nabla_w_norm_sq[side] += 0.25 * t.0.iter().map(|v| v * v).sum::<f64>();
                // contract the derivative index with the first slot
                for r in 0..64 {
                    delta_w[side][r] += t.0[p * 64 + r];
                }
            }
        }
        let delta_w_norm_sq = [0, 1].map(|s| 0.5 * delta_w[s].iter().map(|v| v * v).sum::<f64>());

        let wp = scalar_parts(pg, &d, WP2);
        let wm = scalar_parts(pg, &d, WM2);
        let w_norm_sq = [d.value[WP2], d.value[WM2]];
        let grad_w_norm_sq = [pg.orth1(&wp.0), pg.orth1(&wm.0)];
        let lap_w_norm_sq = [wp.1, wm.1];

        let (ric, dric, _) = part(RIC, RIC + 16);
        let nabla_ric = to_frame(&cov1(pg, &ric, &dric, 2), 3, e);
        let grad_scalar = pg.orth1(&std::array::from_fn(|i| d.d1[i][SCAL]));

        let potential = structure.map(|s| {
            let at = s.potential_at(pg);
            let (gl, _, hl) = scalar_parts(pg, &d, LAM);
            let mut drift = lap_rm;
            for p in 0..4 {
                for i in 0..256 {
                    drift.0[i] -= at.df[p] * nabla_rm[p * 256 + i];
                }
            }
            let drift_w = [0, 1].map(|side| lap_w_norm_sq[side] - dot(&at.df, &grad_w_norm_sq[side]));
            PotentialFields {
                at,
                inv_m: s.inv_m(),
                grad_lambda: pg.orth1(&gl),
                hess_lambda: pg.orth2(&hl),
                drift_lap_rm: drift,
                drift_lap_w_norm_sq: drift_w,
            }
        });

        Ok(PointwiseFields {
            curvature,
            cfg: *cfg,
            nabla_rm,
            lap_rm,
            nabla_w,
            nabla_w_norm_sq,
            delta_w,
            delta_w_norm_sq,
            w_norm_sq,
            grad_w_norm_sq,
            lap_w_norm_sq,
            nabla_ric,
            grad_scalar,
            potential,
        })
    }

    /// `|∇Rm|² = ¼ Σ (∇_p R_ijkl)²`.
    pub fn nabla_rm_norm_sq(&self) -> f64 {
        0.25 * self.nabla_rm.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn nabla_w_full_norm_sq(&self) -> f64 {
        0.25 * self.nabla_w.iter().map(|v| v * v).sum::<f64>()
    }
}

pub(crate) fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `∇W`, `|∇W±|²` and `δW±` at a point.
pub fn cov_deriv_weyl(chart: &Chart, x: &[f64; 4], cfg: &DiffConfig) -> Result<(Vec<f64>, [f64; 2], [Vec<f64>; 2])> {
    let f = PointwiseFields::compute(chart, None, x, cfg)?;
    Ok((f.nabla_w, f.nabla_w_norm_sq, f.delta_w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::fd::Scheme;

    fn cfg() -> DiffConfig {
        DiffConfig::new(0.02, Scheme::Central4, 1).unwrap()
    }

    #[test]
    fn symmetric_spaces_are_parallel() {
        for chart in [
            Chart::Sphere { r: 1.0 },
            Chart::FubiniStudy { scalar: 24.0 },
            Chart::SpherePair { a: 1.0, b: 1.0 },
        ] {
            let f = PointwiseFields::compute(&chart, None, &[0.2, -0.1, 0.3, 0.15], &cfg()).unwrap();
            assert!(f.nabla_rm_norm_sq() < 1e-14, "{chart:?} {}", f.nabla_rm_norm_sq());
            assert!(f.lap_rm.max_abs() < 1e-6, "{chart:?} {}", f.lap_rm.max_abs());
        }
    }

    #[test]
    fn kahler_product_is_harmonic() {
        let chart = Chart::SpherePair {
            a: 1.0,
            b: std::f64::consts::SQRT_2,
        };
        let (_, _, delta) = cov_deriv_weyl(&chart, &[0.1, 0.3, -0.2, 0.25], &cfg()).unwrap();
        assert!(delta[0].iter().all(|v| v.abs() < 1e-7));
    }

    #[test]
    fn laplacian_of_scalar_matches_closed_form() {
        // on the round sphere, the function x1/(1+|x|²)·2 is a first eigenfunction: Δφ = −4φ
        let chart = Chart::Sphere { r: 1.0 };
        let x = [0.3, -0.2, 0.1, 0.4];
        let phi = |y: &[f64; 4]| -> Result<Vec<f64>> {
            let r2: f64 = y.iter().map(|v| v * v).sum();
            Ok(vec![2.0 * y[0] / (1.0 + r2)])
        };
        let d = differentiate(&phi, &x, &cfg(), true).unwrap();
        let pg = PointGeometry::at(&chart, &x).unwrap();
        let (_, lap, _) = scalar_parts(&pg, &d, 0);
        assert!((lap + 4.0 * d.value[0]).abs() < 1e-8, "{lap}");
    }

    #[test]
    fn frame_conversion_matches_tensor4() {
        let pg = PointGeometry::at(&Chart::FubiniStudy { scalar: 24.0 }, &[0.2, 0.1, -0.3, 0.4]).unwrap();
        let a = to_frame(&pg.rm.0, 4, &pg.frame);
        let b = pg.rm.in_frame(&pg.frame);
        assert!(a.iter().zip(b.0.iter()).all(|(x, y)| (x - y).abs() < 1e-12));
    }
}
