//! Coordinate charts with analytic metrics, and the curvature they carry.

use nalgebra::Matrix4;
use serde_json::{json, Value};

use super::expr::Expr;
use super::jet::{Jet2, Scalar};
use crate::error::{Error, Result};
use crate::tensor::{AlgCurvature4, Tensor4};

/// A metric on an open box of ℝ⁴ given by closed-form component functions.
#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    Flat,
    /// Stereographic round sphere of radius `r`: `4r⁴/(r²+|x|²)² δ`.
    Sphere { r: f64 },
    /// Fubini–Study metric on the affine chart `z = (x1 + i x2, x3 + i x4)`,
    /// scaled so the scalar curvature is `scalar`.
    FubiniStudy { scalar: f64 },
    /// Product of stereographic spheres of radii `a` (x1,x2) and `b` (x3,x4).
    SpherePair { a: f64, b: f64 },
    /// Eguchi–Hanson metric with bolt radius `a`, defined for `|x| > a`:
    /// `δ + (1/F − 1) x xᵀ/r² + (F − 1) Jx Jxᵀ/r²`, `F = 1 − a⁴/r⁴`.
    EguchiHanson { a: f64 },
    /// `e^f · base`.
    Conformal { base: Box<Chart>, f: Expr },
    /// Pullback of `base` under the linear map `x = A y`.
    Linear { base: Box<Chart>, a: Matrix4<f64> },
}

/// Half-width of the coordinate box on which every chart is defined.
pub const DOMAIN_HALF_WIDTH: f64 = 50.0;

fn sq_norm<S: Scalar>(x: &[S]) -> S {
    x.iter().fold(S::cst(0.0), |acc, v| acc + *v * *v)
}

fn stereographic_factor<S: Scalar>(x: &[S], r: f64) -> S {
    let r2 = S::cst(r * r);
    let d = r2 + sq_norm(x);
    S::cst(4.0 * r.powi(4)) / (d * d)
}

impl Chart {
    /// Metric components `g_ij(x)`.
    pub fn metric<S: Scalar>(&self, x: &[S; 4]) -> [[S; 4]; 4] {
        let zero = S::cst(0.0);
        let mut g = [[zero; 4]; 4];
        match self {
            Chart::Flat => {
                for (i, row) in g.iter_mut().enumerate() {
                    row[i] = S::cst(1.0);
                }
            }
            Chart::Sphere { r } => {
                let c = stereographic_factor(x, *r);
                for (i, row) in g.iter_mut().enumerate() {
                    row[i] = c;
                }
            }
            Chart::FubiniStudy { scalar } => {
                // holomorphic sectional curvature 4 gives R = 24
                let s = S::cst(24.0 / scalar);
                let one_r2 = S::cst(1.0) + sq_norm(x);
                let denom = one_r2 * one_r2;
                let jx = [-x[1], x[0], -x[3], x[2]];
                for i in 0..4 {
                    for j in 0..4 {
                        let delta = if i == j { one_r2 } else { zero };
                        g[i][j] = s * (delta - x[i] * x[j] - jx[i] * jx[j]) / denom;
                    }
                }
            }
            Chart::SpherePair { a, b } => {
                let ca = stereographic_factor(&x[..2], *a);
                let cb = stereographic_factor(&x[2..], *b);
                g[0][0] = ca;
                g[1][1] = ca;
                g[2][2] = cb;
                g[3][3] = cb;
            }
            Chart::EguchiHanson { a } => {
                let r2 = sq_norm(x);
                let big_f = S::cst(1.0) - S::cst(a.powi(4)) / (r2 * r2);
                let radial = (S::cst(1.0) / big_f - S::cst(1.0)) / r2;
                let fibre = (big_f - S::cst(1.0)) / r2;
                let jx = [-x[1], x[0], -x[3], x[2]];
                for i in 0..4 {
                    for j in 0..4 {
                        let delta = if i == j { S::cst(1.0) } else { zero };
                        g[i][j] = delta + radial * x[i] * x[j] + fibre * jx[i] * jx[j];
                    }
                }
            }
            Chart::Conformal { base, f } => {
                let ef = f.eval(x).exp();
                g = base.metric(x);
                for row in g.iter_mut() {
                    for v in row.iter_mut() {
                        *v = ef * *v;
                    }
                }
            }
            Chart::Linear { base, a } => {
                let ax: [S; 4] = std::array::from_fn(|i| {
                    (0..4).fold(zero, |acc, k| acc + S::cst(a[(i, k)]) * x[k])
                });
                let gb = base.metric(&ax);
                for i in 0..4 {
                    for j in 0..4 {
                        let mut s = zero;
                        for k in 0..4 {
                            for l in 0..4 {
                                s = s + S::cst(a[(k, i)] * a[(l, j)]) * gb[k][l];
                            }
                        }
                        g[i][j] = s;
                    }
                }
            }
        }
        g
    }

    pub fn in_domain(&self, x: &[f64; 4]) -> bool {
        let boxed = x.iter().all(|v| v.abs() < DOMAIN_HALF_WIDTH);
        match self {
            Chart::EguchiHanson { a } => boxed && x.iter().map(|v| v * v).sum::<f64>() > a * a * (1.0 + 1e-6),
            Chart::Conformal { base, .. } | Chart::Linear { base, .. } => boxed && base.in_domain(x),
            _ => boxed,
        }
    }

    /// Builds a chart from a name (`flat`, `s4`, `fs`, `s2xs2`, `fs-perturbed`)
    /// or from the chart JSON format.
    pub fn from_spec(spec: &str) -> Result<Chart> {
        let trimmed = spec.trim();
        if trimmed.starts_with('{') {
            let v: Value = serde_json::from_str(trimmed).map_err(|e| Error::Input(e.to_string()))?;
            return Chart::from_json(&v);
        }
        match trimmed.to_ascii_lowercase().as_str() {
            "flat" | "r4" => Ok(Chart::Flat),
            "s4" | "sphere" => Ok(Chart::Sphere { r: 1.0 }),
            "fs" | "cp2" => Ok(Chart::FubiniStudy { scalar: 24.0 }),
            "s2xs2" => Ok(Chart::SpherePair { a: 1.0, b: 1.0 }),
            "s2xs2b" => Ok(Chart::SpherePair {
                a: 1.0,
                b: std::f64::consts::SQRT_2,
            }),
            "fs-perturbed" => Ok(perturbed_fs()),
            "eh" => Ok(Chart::EguchiHanson { a: 1.0 }),
            other => Err(Error::BadSpec(format!("unknown chart '{other}'"))),
        }
    }

    pub fn from_json(v: &Value) -> Result<Chart> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::BadSpec("chart needs a string 'kind'".into()))?;
        let param = |name: &str, default: f64| -> Result<f64> {
            match v.get("params").and_then(|p| p.get(name)) {
                None => Ok(default),
                Some(x) => x
                    .as_f64()
                    .filter(|x| *x > 0.0 && x.is_finite())
                    .ok_or_else(|| Error::BadSpec(format!("parameter '{name}' must be a positive number"))),
            }
        };
        let expr = |key: &str| -> Result<Expr> {
            let s = v
                .get(key)
                .and_then(Value::as_str)
                .ok_or_else(|| Error::BadSpec(format!("chart needs a string '{key}'")))?;
            Expr::parse(s)
        };
        match kind {
            "model" => {
                let name = v
                    .get("name")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::BadSpec("model chart needs 'name'".into()))?;
                match name {
                    "R4" => Ok(Chart::Flat),
                    "S4" => Ok(Chart::Sphere { r: param("r", 1.0)? }),
                    "CP2" => Ok(Chart::FubiniStudy {
                        scalar: param("scalar", 24.0)?,
                    }),
                    "S2xS2" => {
                        let r = param("r", 1.0)?;
                        Ok(Chart::SpherePair { a: r, b: r })
                    }
                    "S2axS2b" => Ok(Chart::SpherePair {
                        a: param("a", 1.0)?,
                        b: param("b", 1.0)?,
                    }),
                    "EH" => Ok(Chart::EguchiHanson { a: param("a", 1.0)? }),
                    other => Err(Error::BadSpec(format!("no chart for model '{other}'"))),
                }
            }
            "conformal_flat" => {
                if v.get("u").is_some() {
                    // e^{2u} δ
                    let u = expr("u")?;
                    let f = Expr::parse(&format!("2*({})", u.source()))?;
                    Ok(Chart::Conformal {
                        base: Box::new(Chart::Flat),
                        f,
                    })
                } else {
                    Ok(Chart::Conformal {
                        base: Box::new(Chart::Flat),
                        f: expr("f")?,
                    })
                }
            }
            "conformal" => {
                let base = v
                    .get("base")
                    .ok_or_else(|| Error::BadSpec("conformal chart needs 'base'".into()))?;
                Ok(Chart::Conformal {
                    base: Box::new(Chart::from_json(base)?),
                    f: expr("f")?,
                })
            }
            other => Err(Error::BadSpec(format!("unknown chart kind '{other}'"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Chart::Flat => json!({"kind": "model", "name": "R4"}),
            Chart::Sphere { r } => json!({"kind": "model", "name": "S4", "params": {"r": r}}),
            Chart::FubiniStudy { scalar } => {
                json!({"kind": "model", "name": "CP2", "params": {"scalar": scalar}})
            }
            Chart::SpherePair { a, b } => {
                json!({"kind": "model", "name": "S2axS2b", "params": {"a": a, "b": b}})
            }
            Chart::EguchiHanson { a } => json!({"kind": "model", "name": "EH", "params": {"a": a}}),
            Chart::Conformal { base, f } => {
                json!({"kind": "conformal", "base": base.to_json(), "f": f.source()})
            }
            Chart::Linear { base, a } => {
                let rows: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| a[(i, j)]).collect()).collect();
                json!({"kind": "linear", "base": base.to_json(), "matrix": rows})
            }
        }
    }
}

/// A non-Einstein conformal perturbation of the Fubini–Study chart.
pub fn perturbed_fs() -> Chart {
    Chart::Conformal {
        base: Box::new(Chart::FubiniStudy { scalar: 24.0 }),
        f: Expr::parse("0.2*exp(-(x1^2+x2^2+x3^2+x4^2))*(1+0.5*x1-0.3*x3)").expect("literal parses"),
    }
}

/// Metric, Christoffel symbols and curvature at one point, all exact up to
/// floating-point roundoff.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub x: [f64; 4],
    pub g: Matrix4<f64>,
    pub ginv: Matrix4<f64>,
    /// `dg[i][(j,k)] = ∂_i g_jk`.
    pub dg: [Matrix4<f64>; 4],
    /// `gamma[h][j][l] = Γ^h_jl`.
    pub gamma: [[[f64; 4]; 4]; 4],
    /// `dgamma[i][h][j][l] = ∂_i Γ^h_jl`.
    pub dgamma: [[[[f64; 4]; 4]; 4]; 4],
    /// Coordinate components `R_ijkl = g_hk R^h_ijl`.
    pub rm: Tensor4,
    /// Columns are the coordinate components of an oriented orthonormal frame.
    pub frame: Matrix4<f64>,
    /// Inverse of `frame`; rows are the dual coframe.
    pub coframe: Matrix4<f64>,
}

impl PointGeometry {
    pub fn at(chart: &Chart, x: &[f64; 4]) -> Result<Self> {
        if !chart.in_domain(x) {
            return Err(Error::StencilOutOfDomain(*x));
        }
        let jets = chart.metric(&Jet2::point(x));
        let g = Matrix4::from_fn(|i, j| jets[i][j].v);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMetric(*x));
        }
        let ginv = g.try_inverse().ok_or(Error::SingularMetric(*x))?;
        let dg: [Matrix4<f64>; 4] = std::array::from_fn(|i| Matrix4::from_fn(|j, k| jets[j][k].g[i]));
        // ddg[i][m][(j,k)] = ∂_i ∂_m g_jk
        let ddg = |i: usize, m: usize, j: usize, k: usize| jets[j][k].h[i][m];

        // first-kind symbols [jl, m] = ½(∂_j g_ml + ∂_l g_mj − ∂_m g_jl)
        let mut first = [[[0.0; 4]; 4]; 4];
        let mut dfirst = [[[[0.0; 4]; 4]; 4]; 4];
        for m in 0..4 {
            for j in 0..4 {
                for l in 0..4 {
                    first[m][j][l] = 0.5 * (dg[j][(m, l)] + dg[l][(m, j)] - dg[m][(j, l)]);
                    for i in 0..4 {
                        dfirst[i][m][j][l] = 0.5 * (ddg(i, j, m, l) + ddg(i, l, m, j) - ddg(i, m, j, l));
                    }
                }
            }
        }
        // ∂_i g^hm = −g^ha ∂_i g_ab g^bm
        let dginv: [Matrix4<f64>; 4] = std::array::from_fn(|i| -(ginv * dg[i] * ginv));
        let mut gamma = [[[0.0; 4]; 4]; 4];
        let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
        for h in 0..4 {
            for j in 0..4 {
                for l in 0..4 {
                    let mut s = 0.0;
                    for m in 0..4 {
                        s += ginv[(h, m)] * first[m][j][l];
                    }
                    gamma[h][j][l] = s;
                    for i in 0..4 {
                        let mut d = 0.0;
                        for m in 0..4 {
                            d += dginv[i][(h, m)] * first[m][j][l] + ginv[(h, m)] * dfirst[i][m][j][l];
                        }
                        dgamma[i][h][j][l] = d;
                    }
                }
            }
        }
        // R^h_ijl = ∂_i Γ^h_jl − ∂_j Γ^h_il + Γ^h_im Γ^m_jl − Γ^h_jm Γ^m_il
        let mut rup = [[[[0.0; 4]; 4]; 4]; 4];
        for h in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    for l in 0..4 {
                        let mut s = dgamma[i][h][j][l] - dgamma[j][h][i][l];
                        for m in 0..4 {
                            s += gamma[h][i][m] * gamma[m][j][l] - gamma[h][j][m] * gamma[m][i][l];
                        }
                        rup[h][i][j][l] = s;
                    }
                }
            }
        }
        let rm = Tensor4::from_fn(|i, j, k, l| (0..4).map(|h| g[(h, k)] * rup[h][i][j][l]).sum());

        let frame = gram_schmidt(&g).ok_or(Error::SingularMetric(*x))?;
        let coframe = frame.try_inverse().ok_or(Error::SingularMetric(*x))?;
        Ok(PointGeometry {
            x: *x,
            g,
            ginv,
            dg,
            gamma,
            dgamma,
            rm,
            frame,
            coframe,
        })
    }

    /// Curvature tensor in the orthonormal frame.
    pub fn rm_orth(&self) -> AlgCurvature4 {
        AlgCurvature4::project(&self.rm.in_frame(&self.frame))
    }

    /// Coordinate Ricci tensor `R_ik = g^jl R_ijkl`.
    pub fn ricci_coord(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, k| {
            let mut s = 0.0;
            for j in 0..4 {
                for l in 0..4 {
                    s += self.ginv[(j, l)] * self.rm.get(i, j, k, l);
                }
            }
            s
        })
    }

    pub fn scalar(&self) -> f64 {
        (self.ginv * self.ricci_coord()).trace()
    }

    /// Orthonormal components of a coordinate (0,2) tensor.
    pub fn orth2(&self, t: &Matrix4<f64>) -> Matrix4<f64> {
        self.frame.transpose() * t * self.frame
    }

    /// Orthonormal components of a coordinate covector.
    pub fn orth1(&self, v: &[f64; 4]) -> [f64; 4] {
        std::array::from_fn(|a| (0..4).map(|i| self.frame[(i, a)] * v[i]).sum())
    }

    /// Coordinate components of an orthonormal-frame (0,4) tensor.
    pub fn coord4(&self, t: &Tensor4) -> Tensor4 {
        t.in_frame(&self.coframe)
    }
}

/// Gram–Schmidt of the coordinate basis with respect to `g`; columns are the
/// frame vectors, so `Fᵀ g F = I` and `F` is upper triangular with positive diagonal.
pub fn gram_schmidt(g: &Matrix4<f64>) -> Option<Matrix4<f64>> {
    let mut f = Matrix4::<f64>::identity();
    for c in 0..4 {
        for p in 0..c {
            let proj = (f.column(c).transpose() * g * f.column(p))[(0, 0)];
            let prev = f.column(p).into_owned();
            let mut col = f.column_mut(c);
            col -= prev * proj;
        }
        let n2 = (f.column(c).transpose() * g * f.column(c))[(0, 0)];
        if !(n2 > 0.0) {
            return None;
        }
        f.column_mut(c).scale_mut(1.0 / n2.sqrt());
    }
    Some(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::weyl_halves;
    use crate::models::{model_tensor, ModelSpec};

    #[test]
    fn sphere_metric_and_curvature() {
        let s = Chart::Sphere { r: 1.0 };
        let pg = PointGeometry::at(&s, &[0.0; 4]).unwrap();
        assert!((pg.g - Matrix4::identity() * 4.0).abs().max() < 1e-15);
        let pg = PointGeometry::at(&s, &[0.3, 0.0, 0.0, 0.0]).unwrap();
        let t = pg.rm_orth();
        let model = model_tensor(&ModelSpec::S4 { r: 1.0 }).unwrap();
        assert!(t.tensor().max_abs_diff(model.tensor()) < 1e-12);
        assert!((pg.frame.transpose() * pg.g * pg.frame - Matrix4::identity()).abs().max() < 1e-14);
    }

    #[test]
    fn flat_is_flat() {
        let pg = PointGeometry::at(&Chart::Flat, &[0.1, 2.0, -3.0, 0.5]).unwrap();
        assert_eq!(pg.rm.max_abs(), 0.0);
    }

    #[test]
    fn fubini_study_normalization() {
        let pg = PointGeometry::at(&Chart::FubiniStudy { scalar: 24.0 }, &[0.3, -0.2, 0.1, 0.4]).unwrap();
        let t = pg.rm_orth();
        assert!((t.scalar() - 24.0).abs() < 1e-11);
        let (wp, wm) = weyl_halves(&t);
        assert!(wm.norm() < 1e-11);
        for (a, b) in wp.eigenvalues.iter().zip([-2.0, -2.0, 4.0]) {
            assert!((a - b).abs() < 1e-11);
        }
        let ric = t.ricci().0;
        assert!((ric - Matrix4::identity() * 6.0).abs().max() < 1e-11);
    }

    #[test]
    fn sphere_pair_ricci() {
        let c = Chart::SpherePair {
            a: 1.0,
            b: std::f64::consts::SQRT_2,
        };
        let pg = PointGeometry::at(&c, &[0.2, 0.1, -0.3, 0.4]).unwrap();
        let ric = pg.rm_orth().ricci().0;
        let want = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 0.5, 0.5));
        assert!((ric - want).abs().max() < 1e-12);
    }

    #[test]
    fn linear_pullback_preserves_invariants() {
        let a = Matrix4::new(
            1.0, 0.2, 0.0, 0.1, //
            0.0, 0.9, 0.3, 0.0, //
            0.1, 0.0, 1.1, 0.0, //
            0.0, -0.2, 0.0, 1.0,
        );
        let base = Chart::FubiniStudy { scalar: 24.0 };
        let y = [0.1, 0.2, -0.1, 0.3];
        let x: [f64; 4] = std::array::from_fn(|i| (0..4).map(|k| a[(i, k)] * y[k]).sum());
        let lin = Chart::Linear {
            base: Box::new(base.clone()),
            a,
        };
        let p1 = PointGeometry::at(&lin, &y).unwrap();
        let p0 = PointGeometry::at(&base, &x).unwrap();
        assert!((p1.scalar() - p0.scalar()).abs() < 1e-11);
    }

    #[test]
    fn eguchi_hanson_is_ricci_flat_and_half_flat() {
        let c = Chart::EguchiHanson { a: 1.0 };
        let pg = PointGeometry::at(&c, &[1.2, 0.3, -0.4, 0.5]).unwrap();
        let t = pg.rm_orth();
        assert!(t.ricci().0.abs().max() < 1e-11);
        let (wp, wm) = weyl_halves(&t);
        assert!(wp.norm().min(wm.norm()) < 1e-11);
        assert!(wp.norm().max(wm.norm()) > 0.1);
        assert!(!c.in_domain(&[0.5, 0.0, 0.0, 0.0]));
        assert!(matches!(PointGeometry::at(&c, &[0.5, 0.0, 0.0, 0.0]), Err(Error::StencilOutOfDomain(_))));
    }

    #[test]
    fn chart_specs() {
        assert_eq!(Chart::from_spec("fs").unwrap(), Chart::FubiniStudy { scalar: 24.0 });
        let c = Chart::from_spec(r#"{"kind":"model","name":"S4","params":{"r":2.0}}"#).unwrap();
        assert_eq!(c, Chart::Sphere { r: 2.0 });
        let c = Chart::from_spec(r#"{"kind":"conformal_flat","f":"0.1*x1"}"#).unwrap();
        assert!(matches!(c, Chart::Conformal { .. }));
        assert!(Chart::from_spec(r#"{"kind":"model","name":"H4"}"#).is_err());
        assert!(Chart::from_spec("nope").is_err());
        let round = Chart::from_json(&c.to_json()).unwrap();
        assert_eq!(round, c);
        assert!(matches!(
            PointGeometry::at(&Chart::Flat, &[100.0, 0.0, 0.0, 0.0]),
            Err(Error::StencilOutOfDomain(_))
        ));
    }
}
