//! Central finite differences of vector-valued functions on ℝ⁴.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Central2,
    Central4,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::Central2 => 2,
            Scheme::Central4 => 4,
        }
    }

    pub fn from_order(order: u32) -> Result<Scheme> {
        match order {
            2 => Ok(Scheme::Central2),
            4 => Ok(Scheme::Central4),
            o => Err(Error::BadSpec(format!("order must be 2 or 4, got {o}"))),
        }
    }

    // (offset, weight) for d/dx and d²/dx² on a unit grid
    fn first(self) -> &'static [(i32, f64)] {
        match self {
            Scheme::Central2 => &[(-1, -0.5), (1, 0.5)],
            Scheme::Central4 => &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
        }
    }

    fn second(self) -> &'static [(i32, f64)] {
        match self {
            Scheme::Central2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
            Scheme::Central4 => &[
                (-2, -1.0 / 12.0),
                (-1, 16.0 / 12.0),
                (0, -30.0 / 12.0),
                (1, 16.0 / 12.0),
                (2, -1.0 / 12.0),
            ],
        }
    }

    /// Largest stencil offset in units of `h`.
    pub fn reach(self) -> i32 {
        match self {
            Scheme::Central2 => 1,
            Scheme::Central4 => 2,
        }
    }
}

/// Step size, stencil and Richardson levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffConfig {
    pub h: f64,
    pub scheme: Scheme,
    pub richardson: u32,
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig {
            h: 1e-2,
            scheme: Scheme::Central4,
            richardson: 1,
        }
    }
}

impl DiffConfig {
    pub fn new(h: f64, scheme: Scheme, richardson: u32) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::BadSpec(format!("step must be positive, got {h}")));
        }
        if richardson > 2 {
            return Err(Error::BadSpec(format!("at most 2 Richardson levels, got {richardson}")));
        }
        Ok(DiffConfig { h, scheme, richardson })
    }

    /// Leading error order of the combined estimate.
    pub fn effective_order(&self) -> u32 {
        self.scheme.order() + 2 * self.richardson
    }

    pub fn with_h(&self, h: f64) -> Self {
        DiffConfig { h, ..*self }
    }
}

/// Value, gradient and Hessian of each component of a vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivs {
    pub value: Vec<f64>,
    /// `d1[i][c] = ∂_i F_c`.
    pub d1: [Vec<f64>; 4],
    /// `d2[i][j][c] = ∂_i ∂_j F_c`.
    pub d2: [[Vec<f64>; 4]; 4],
}

fn offset_point(x: &[f64; 4], off: &[i32; 4], h: f64) -> [f64; 4] {
    std::array::from_fn(|i| x[i] + off[i] as f64 * h)
}

fn single_level<F>(f: &F, x: &[f64; 4], h: f64, scheme: Scheme, second: bool) -> Result<Derivs>
where
    F: Fn(&[f64; 4]) -> Result<Vec<f64>>,
{
    let mut cache: BTreeMap<[i32; 4], Vec<f64>> = BTreeMap::new();
    let mut eval = |off: [i32; 4]| -> Result<Vec<f64>> {
        if let Some(v) = cache.get(&off) {
            return Ok(v.clone());
        }
        let v = f(&offset_point(x, &off, h))?;
        cache.insert(off, v.clone());
        Ok(v)
    };
    let value = eval([0; 4])?;
    let n = value.len();
    let zero = || vec![0.0; n];
    let mut d1: [Vec<f64>; 4] = std::array::from_fn(|_| zero());
    let mut d2: [[Vec<f64>; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| zero()));

    for i in 0..4 {
        for &(o, w) in scheme.first() {
            let mut off = [0; 4];
            off[i] = o;
            let v = eval(off)?;
            for c in 0..n {
                d1[i][c] += w * v[c] / h;
            }
        }
        if !second {
            continue;
        }
        for &(o, w) in scheme.second() {
            let mut off = [0; 4];
            off[i] = o;
            let v = eval(off)?;
            for c in 0..n {
                d2[i][i][c] += w * v[c] / (h * h);
            }
        }
        for j in 0..i {
            let mut acc = zero();
            for &(oi, wi) in scheme.first() {
                for &(oj, wj) in scheme.first() {
                    let mut off = [0; 4];
                    off[i] = oi;
                    off[j] = oj;
                    let v = eval(off)?;
                    for c in 0..n {
                        acc[c] += wi * wj * v[c] / (h * h);
                    }
                }
            }
            d2[j][i] = acc.clone();
            d2[i][j] = acc;
        }
    }
    Ok(Derivs { value, d1, d2 })
}

fn combine(fine: &Derivs, coarse: &Derivs, order: u32) -> Derivs {
    let k = 2f64.powi(order as i32);
    let mix = |a: &Vec<f64>, b: &Vec<f64>| -> Vec<f64> {
        a.iter().zip(b).map(|(f, c)| (k * f - c) / (k - 1.0)).collect()
    };
    Derivs {
        value: fine.value.clone(),
        d1: std::array::from_fn(|i| mix(&fine.d1[i], &coarse.d1[i])),
        d2: std::array::from_fn(|i| std::array::from_fn(|j| mix(&fine.d2[i][j], &coarse.d2[i][j]))),
    }
}

/// First and second partial derivatives of `f` at `x`.
///
/// With `second == false` the Hessian is left at zero and fewer points are sampled.
pub fn differentiate<F>(f: &F, x: &[f64; 4], cfg: &DiffConfig, second: bool) -> Result<Derivs>
where
    F: Fn(&[f64; 4]) -> Result<Vec<f64>>,
{
    let p = cfg.scheme.order();
    let mut table: Vec<Derivs> = (0..=cfg.richardson)
        .map(|l| single_level(f, x, cfg.h / 2f64.powi(l as i32), cfg.scheme, second))
        .collect::<Result<_>>()?;
    // Richardson tableau: column c removes the h^(p+2(c-1)) term
    for c in 1..=cfg.richardson as usize {
        let order = p + 2 * (c as u32 - 1);
        table = table.windows(2).map(|w| combine(&w[1], &w[0], order)).collect();
    }
    Ok(table.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(x: &[f64; 4]) -> Result<Vec<f64>> {
        Ok(vec![
            (x[0] * x[1]).sin() + x[2].exp() * x[3],
            x[0].powi(5) - x[3] * x[3] * x[1],
        ])
    }

    fn exact_d2(x: &[f64; 4]) -> [[f64; 4]; 4] {
        let s = (x[0] * x[1]).sin();
        let c = (x[0] * x[1]).cos();
        let mut h = [[0.0; 4]; 4];
        h[0][0] = -x[1] * x[1] * s;
        h[1][1] = -x[0] * x[0] * s;
        h[0][1] = c - x[0] * x[1] * s;
        h[1][0] = h[0][1];
        h[2][2] = x[2].exp() * x[3];
        h[2][3] = x[2].exp();
        h[3][2] = h[2][3];
        h
    }

    fn err(cfg: &DiffConfig) -> f64 {
        let x = [0.3, 0.8, -0.2, 0.5];
        let d = differentiate(&field, &x, cfg, true).unwrap();
        let ex = exact_d2(&x);
        let mut e: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                e = e.max((d.d2[i][j][0] - ex[i][j]).abs());
            }
        }
        let g1 = x[1] * (x[0] * x[1]).cos();
        e.max((d.d1[0][0] - g1).abs())
    }

    #[test]
    fn nominal_orders() {
        for (scheme, want) in [(Scheme::Central2, 4.0), (Scheme::Central4, 16.0)] {
            let a = err(&DiffConfig::new(0.04, scheme, 0).unwrap());
            let b = err(&DiffConfig::new(0.02, scheme, 0).unwrap());
            let r = a / b;
            assert!((r / want - 1.0).abs() < 0.2, "{scheme:?} ratio {r}");
        }
    }

    #[test]
    fn richardson_improves() {
        let plain = err(&DiffConfig::new(0.02, Scheme::Central2, 0).unwrap());
        let rich = err(&DiffConfig::new(0.02, Scheme::Central2, 1).unwrap());
        assert!(rich < plain * 1e-2, "{plain} {rich}");
        assert!(err(&DiffConfig::default()) < 1e-9);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(DiffConfig::new(0.0, Scheme::Central2, 0).is_err());
        assert!(DiffConfig::new(0.1, Scheme::Central2, 3).is_err());
        assert!(Scheme::from_order(3).is_err());
    }
}
