//! Generalized quasi-Einstein structures `Ric + ∇²f − (1/m) df⊗df = λ g`.

use nalgebra::Matrix4;
use serde_json::{json, Value};

use super::chart::{Chart, PointGeometry};
use super::expr::Expr;
use super::fd::{differentiate, DiffConfig};
use super::jet::Jet2;
use crate::error::{Error, Result};

/// How `λ` is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Lambda {
    Constant(f64),
    /// `λ = ¼ tr_g(Ric + ∇²f − (1/m) df⊗df)` pointwise.
    Derived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiEinsteinStructure {
    pub chart: Chart,
    pub f: Expr,
    /// `None` stands for `m = ∞`.
    pub m: Option<f64>,
    pub lambda: Lambda,
}

/// Potential data at a point, in the orthonormal frame of the geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialAt {
    pub f: f64,
    /// Coordinate partials `∂_i f`.
    pub df_coord: [f64; 4],
    /// Coordinate Hessian `∇²f_ij = ∂_i∂_j f − Γ^k_ij ∂_k f`.
    pub hess_coord: Matrix4<f64>,
    pub df: [f64; 4],
    pub hess: Matrix4<f64>,
    pub lambda: f64,
}

/// Relative size of the traceless residual that marks a convention error.
pub const TRACELESS_REL_TOL: f64 = 1e-8;

fn einstein_base(base: &Chart) -> Result<()> {
    match base {
        Chart::Flat | Chart::Sphere { .. } | Chart::FubiniStudy { .. } => Ok(()),
        Chart::SpherePair { a, b } if a == b => Ok(()),
        other => Err(Error::BadSpec(format!(
            "conformal_to_einstein needs an Einstein base chart, got {}",
            other.to_json()
        ))),
    }
}

/// Flat space with `f = (λ/2)|x|²`, a steady, shrinking or expanding Gaussian soliton.
pub fn gaussian_soliton(lambda: f64) -> QuasiEinsteinStructure {
    let f = Expr::parse(&format!("({lambda:?}/2)*(x1^2+x2^2+x3^2+x4^2)")).expect("generated expression parses");
    QuasiEinsteinStructure {
        chart: Chart::Flat,
        f,
        m: None,
        lambda: Lambda::Constant(lambda),
    }
}

/// `g = e^f ḡ` over an Einstein chart `ḡ`, with `m = −2`.
pub fn conformal_to_einstein(base: Chart, f: Expr) -> Result<QuasiEinsteinStructure> {
    einstein_base(&base)?;
    let s = QuasiEinsteinStructure {
        chart: Chart::Conformal {
            base: Box::new(base),
            f: f.clone(),
        },
        f,
        m: Some(-2.0),
        lambda: Lambda::Derived,
    };
    for x in [[0.0; 4], [0.2, -0.1, 0.15, 0.05], [-0.3, 0.25, -0.1, 0.2]] {
        let (res, scale) = s.traceless_residual(&x)?;
        if res > TRACELESS_REL_TOL * scale.max(1.0) {
            return Err(Error::TracelessResidualTooLarge { point: x, residual: res });
        }
    }
    Ok(s)
}

/// The bump structure `e^{ε exp(−|x|²)} δ` used throughout the tests.
pub fn flat_bump(eps: f64) -> QuasiEinsteinStructure {
    let f = Expr::parse(&format!("{eps:?}*exp(-(x1^2+x2^2+x3^2+x4^2))")).expect("generated expression parses");
    conformal_to_einstein(Chart::Flat, f).expect("flat base is Einstein")
}

/// A non-centred bump over Fubini–Study; its Weyl tensor is nonzero.
pub fn fs_bump(eps: f64) -> QuasiEinsteinStructure {
    let f = Expr::parse(&format!(
        "{eps:?}*exp(-((x1-0.1)^2+x2^2+(x3+0.2)^2+x4^2))*(1+0.3*x2)"
    ))
    .expect("generated expression parses");
    conformal_to_einstein(Chart::FubiniStudy { scalar: 24.0 }, f).expect("Fubini–Study is Einstein")
}

impl QuasiEinsteinStructure {
    /// `1/m`, with `1/∞ = 0`.
    pub fn inv_m(&self) -> f64 {
        match self.m {
            None => 0.0,
            Some(m) => 1.0 / m,
        }
    }

    /// Builds a structure from a name (`gaussian`, `bump`, `linear`, `fs-bump`)
    /// or from JSON.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let trimmed = spec.trim();
        if trimmed.starts_with('{') {
            let v: Value = serde_json::from_str(trimmed).map_err(|e| Error::Input(e.to_string()))?;
            return Self::from_json(&v);
        }
        match trimmed {
            "gaussian" => Ok(gaussian_soliton(1.0)),
            "bump" => Ok(flat_bump(0.1)),
            "linear" => conformal_to_einstein(Chart::Flat, Expr::parse("0.1*x1")?),
            "fs-bump" => Ok(fs_bump(0.1)),
            other => Err(Error::BadSpec(format!("unknown structure '{other}'"))),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::BadSpec("structure needs a string 'kind'".into()))?;
        match kind {
            "gaussian_soliton" => {
                let l = v
                    .get("lambda")
                    .and_then(Value::as_f64)
                    .ok_or_else(|| Error::BadSpec("gaussian_soliton needs numeric 'lambda'".into()))?;
                Ok(gaussian_soliton(l))
            }
            "conformal_to_einstein" => {
                let base = match v.get("base") {
                    None => Chart::Flat,
                    Some(Value::String(s)) => Chart::from_spec(s)?,
                    Some(b) => Chart::from_json(b)?,
                };
                let f = v
                    .get("f")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::BadSpec("conformal_to_einstein needs a string 'f'".into()))?;
                conformal_to_einstein(base, Expr::parse(f)?)
            }
            other => Err(Error::BadSpec(format!("unknown structure kind '{other}'"))),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "chart": self.chart.to_json(),
            "f": self.f.source(),
            "m": self.m,
            "lambda": match self.lambda {
                Lambda::Constant(l) => json!(l),
                Lambda::Derived => json!("derived"),
            },
        })
    }

    /// `f`, `df`, `∇²f` and `λ` at the point of `pg`, all from exact derivatives.
    pub fn potential_at(&self, pg: &PointGeometry) -> PotentialAt {
        let j = self.f.eval(&Jet2::point(&pg.x));
        let df_coord = j.g;
        let hess_coord = Matrix4::from_fn(|a, b| {
            let mut s = j.h[a][b];
            for k in 0..4 {
                s -= pg.gamma[k][a][b] * df_coord[k];
            }
            s
        });
        self.finish(pg, j.v, df_coord, hess_coord)
    }

    fn finish(&self, pg: &PointGeometry, f: f64, df_coord: [f64; 4], hess_coord: Matrix4<f64>) -> PotentialAt {
        let df = pg.orth1(&df_coord);
        let hess = pg.orth2(&hess_coord);
        let lambda = match self.lambda {
            Lambda::Constant(l) => l,
            Lambda::Derived => {
                let ric = pg.orth2(&pg.ricci_coord());
                let dd: f64 = df.iter().map(|v| v * v).sum();
                0.25 * ((ric + hess).trace() - self.inv_m() * dd)
            }
        };
        PotentialAt {
            f,
            df_coord,
            hess_coord,
            df,
            hess,
            lambda,
        }
    }

    pub fn lambda_at(&self, x: &[f64; 4]) -> Result<f64> {
        let pg = PointGeometry::at(&self.chart, x)?;
        Ok(self.potential_at(&pg).lambda)
    }

    fn defect(&self, pg: &PointGeometry, p: &PotentialAt) -> (f64, f64) {
        let ric = pg.orth2(&pg.ricci_coord());
        let dd = Matrix4::from_fn(|a, b| p.df[a] * p.df[b]);
        let lhs = ric + p.hess - dd * self.inv_m();
        let res = (lhs - Matrix4::identity() * p.lambda).abs().max();
        let scale = ric.abs().max().max(p.hess.abs().max()).max((dd * self.inv_m()).abs().max());
        (res, scale)
    }

    /// `max|Ric + ∇²f − (1/m)df⊗df − λg|` in an orthonormal frame, and the
    /// size of the largest term. With derived `λ` this is the traceless part.
    pub fn traceless_residual(&self, x: &[f64; 4]) -> Result<(f64, f64)> {
        let pg = PointGeometry::at(&self.chart, x)?;
        let p = self.potential_at(&pg);
        Ok(self.defect(&pg, &p))
    }

    /// The same residual with `∂f` and `∂∂f` replaced by finite differences
    /// of `f`; it converges at the order of the scheme.
    pub fn traceless_residual_fd(&self, x: &[f64; 4], cfg: &DiffConfig) -> Result<f64> {
        let pg = PointGeometry::at(&self.chart, x)?;
        let chart = &self.chart;
        let d = differentiate(
            &|y: &[f64; 4]| {
                if !chart.in_domain(y) {
                    return Err(Error::StencilOutOfDomain(*y));
                }
                Ok(vec![self.f.eval(y)])
            },
            x,
            cfg,
            true,
        )?;
        let df_coord: [f64; 4] = std::array::from_fn(|i| d.d1[i][0]);
        let hess_coord = Matrix4::from_fn(|a, b| {
            let mut s = d.d2[a][b][0];
            for k in 0..4 {
                s -= pg.gamma[k][a][b] * df_coord[k];
            }
            s
        });
        let p = self.finish(&pg, d.value[0], df_coord, hess_coord);
        Ok(self.defect(&pg, &p).0)
    }

    /// Fails with [`Error::InvalidStructure`] when the defining equation is
    /// violated at `x` beyond `rel_tol` of its largest term.
    pub fn check_valid(&self, x: &[f64; 4], rel_tol: f64) -> Result<()> {
        let (res, scale) = self.traceless_residual(x)?;
        if res > rel_tol * scale.max(1.0) {
            return Err(Error::InvalidStructure { point: *x, residual: res });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::fd::Scheme;

    #[test]
    fn gaussian_is_exact() {
        let s = gaussian_soliton(1.0);
        let pg = PointGeometry::at(&s.chart, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let p = s.potential_at(&pg);
        assert!((p.hess - Matrix4::identity()).abs().max() < 1e-15);
        assert_eq!(s.traceless_residual(&[1.0, 0.0, 0.0, 0.0]).unwrap().0, 0.0);
        assert_eq!(gaussian_soliton(0.0).traceless_residual(&[0.3; 4]).unwrap().0, 0.0);
    }

    #[test]
    fn zero_potential_on_flat_base() {
        let s = conformal_to_einstein(Chart::Flat, Expr::zero()).unwrap();
        assert_eq!(s.lambda_at(&[0.1, 0.2, 0.3, 0.4]).unwrap(), 0.0);
    }

    #[test]
    fn conformal_structures_are_valid() {
        for s in [flat_bump(0.1), fs_bump(0.1), QuasiEinsteinStructure::from_spec("linear").unwrap()] {
            for x in [[0.1, 0.2, -0.3, 0.05], [0.4, -0.2, 0.0, 0.3]] {
                let (r, scale) = s.traceless_residual(&x).unwrap();
                assert!(r < 1e-12 * scale.max(1.0), "{r}");
            }
        }
        // λ varies for the bump
        let s = flat_bump(0.1);
        let a = s.lambda_at(&[0.0; 4]).unwrap();
        let b = s.lambda_at(&[0.5, 0.0, 0.0, 0.0]).unwrap();
        assert!((a - b).abs() > 1e-3);
    }

    #[test]
    fn wrong_exponent_is_caught() {
        // e^{2f} ḡ would need m = −1, not −2
        let f = Expr::parse("0.3*exp(-(x1^2+x2^2+x3^2+x4^2))").unwrap();
        let s = QuasiEinsteinStructure {
            chart: Chart::Conformal {
                base: Box::new(Chart::Flat),
                f: Expr::parse("0.6*exp(-(x1^2+x2^2+x3^2+x4^2))").unwrap(),
            },
            f,
            m: Some(-2.0),
            lambda: Lambda::Derived,
        };
        assert!(matches!(
            s.check_valid(&[0.2, 0.1, 0.0, 0.0], 1e-8),
            Err(Error::InvalidStructure { .. })
        ));
        assert!(conformal_to_einstein(Chart::SpherePair { a: 1.0, b: 2.0 }, Expr::zero()).is_err());
    }

    #[test]
    fn fd_residual_converges() {
        let s = flat_bump(0.1);
        let x = [0.2, -0.1, 0.3, 0.1];
        let cfg = DiffConfig::new(0.02, Scheme::Central2, 0).unwrap();
        let a = s.traceless_residual_fd(&x, &cfg).unwrap();
        let b = s.traceless_residual_fd(&x, &cfg.with_h(0.01)).unwrap();
        assert!((a / b - 4.0).abs() < 1.0, "{a} {b}");
    }
}
