//! Second-order forward-mode differentiation in four variables.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic needed by metric and potential formulas.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
}

/// Value, gradient and Hessian of a function of `(x1, x2, x3, x4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; 4],
    pub h: [[f64; 4]; 4],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 {
            v,
            g: [0.0; 4],
            h: [[0.0; 4]; 4],
        }
    }

    /// The coordinate function `x_i` evaluated at `v`.
    pub fn variable(i: usize, v: f64) -> Self {
        let mut j = Jet2::constant(v);
        j.g[i] = 1.0;
        j
    }

    pub fn point(x: &[f64; 4]) -> [Jet2; 4] {
        std::array::from_fn(|i| Jet2::variable(i, x[i]))
    }

    /// Chain rule for `φ(self)` given `φ, φ', φ''` at the value.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet2::constant(f0);
        for i in 0..4 {
            out.g[i] = f1 * self.g[i];
            for j in 0..4 {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, o: Jet2) -> Jet2 {
        self.v += o.v;
        for i in 0..4 {
            self.g[i] += o.g[i];
            for j in 0..4 {
                self.h[i][j] += o.h[i][j];
            }
        }
        self
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(mut self) -> Jet2 {
        self.v = -self.v;
        for i in 0..4 {
            self.g[i] = -self.g[i];
            for j in 0..4 {
                self.h[i][j] = -self.h[i][j];
            }
        }
        self
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut out = Jet2::constant(self.v * o.v);
        for i in 0..4 {
            out.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for j in 0..4 {
                out.h[i][j] = self.v * o.h[i][j]
                    + o.v * self.h[i][j]
                    + self.g[i] * o.g[j]
                    + o.g[i] * self.g[j];
            }
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        let inv = o.v.recip();
        self * o.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}

impl Scalar for Jet2 {
    fn cst(v: f64) -> Self {
        Jet2::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let v = self.v;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }
    fn powf(self, p: f64) -> Self {
        let v = self.v;
        self.chain(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f<S: Scalar>(x: &[S; 4]) -> S {
        (x[0] * x[1]).exp() / (S::cst(1.0) + x[2] * x[2]) + x[3].sin() * x[0].powf(3.0) + x[1].sqrt().ln()
    }

    #[test]
    fn matches_finite_differences() {
        let x = [0.3, 0.7, -0.4, 1.1];
        let j = f(&Jet2::point(&x));
        assert!((j.v - f(&x)).abs() < 1e-15);
        let h = 1e-4;
        let shift = |i: usize, s: f64| {
            let mut y = x;
            y[i] += s;
            y
        };
        for i in 0..4 {
            let d = (f(&shift(i, h)) - f(&shift(i, -h))) / (2.0 * h);
            assert!((j.g[i] - d).abs() < 1e-7);
            for k in 0..4 {
                let mut pp = shift(i, h);
                pp[k] += h;
                let mut pm = shift(i, h);
                pm[k] -= h;
                let mut mp = shift(i, -h);
                mp[k] += h;
                let mut mm = shift(i, -h);
                mm[k] -= h;
                let d2 = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h);
                assert!((j.h[i][k] - d2).abs() < 1e-5, "{i}{k}");
            }
        }
    }
}
