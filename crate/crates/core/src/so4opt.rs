//! Local descent on SO(4) with a Cayley retraction.

use nalgebra::{Matrix4, Matrix6, Vector6};

/// Iteration limits for [`minimize`].
#[derive(Debug, Clone, Copy)]
pub struct DescentBudget {
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for DescentBudget {
    fn default() -> Self {
        DescentBudget {
            max_iters: 400,
            grad_tol: 1e-11,
        }
    }
}

fn generator(a: usize, b: usize) -> Matrix4<f64> {
    let mut e = Matrix4::zeros();
    e[(a, b)] = 1.0;
    e[(b, a)] = -1.0;
    e
}

const GEN: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// `(I − A/2)⁻¹ (I + A/2)` for antisymmetric `A`; orthogonal with det +1.
pub fn cayley(a: &Matrix4<f64>) -> Matrix4<f64> {
    let i = Matrix4::identity();
    let m = i - a * 0.5;
    m.try_inverse().expect("I − A/2 is invertible for antisymmetric A") * (i + a * 0.5)
}

/// Re-orthonormalizes by Gram–Schmidt, keeping the orientation of the columns.
pub fn reorthonormalize(p: &Matrix4<f64>) -> Matrix4<f64> {
    let mut q = *p;
    for c in 0..4 {
        for prev in 0..c {
            let proj = q.column(c).dot(&q.column(prev));
            let col_prev = q.column(prev).into_owned();
            let mut col = q.column_mut(c);
            col -= col_prev * proj;
        }
        let n = q.column(c).norm();
        q.column_mut(c).scale_mut(1.0 / n);
    }
    q
}

fn algebra(t: &[f64; 6]) -> Matrix4<f64> {
    let mut a = Matrix4::zeros();
    for (c, &(i, j)) in t.iter().zip(GEN.iter()) {
        a += generator(i, j) * *c;
    }
    a
}

/// Gradient and Hessian of `t ↦ f(P·cayley(Σ t_a E_a))` at `t = 0`.
fn local_model(f: &dyn Fn(&Matrix4<f64>) -> f64, p: &Matrix4<f64>, f0: f64) -> ([f64; 6], Matrix6<f64>) {
    let at = |t: [f64; 6]| f(&(p * cayley(&algebra(&t))));
    let unit = |a: usize, s: f64| {
        let mut t = [0.0; 6];
        t[a] = s;
        t
    };
    let h1 = 1e-6;
    let h2 = 1e-4;
    let grad = std::array::from_fn(|a| (at(unit(a, h1)) - at(unit(a, -h1))) / (2.0 * h1));
    let mut hess = Matrix6::zeros();
    for a in 0..6 {
        hess[(a, a)] = (at(unit(a, h2)) - 2.0 * f0 + at(unit(a, -h2))) / (h2 * h2);
        for b in 0..a {
            let mut v = 0.0;
            for (sa, sb, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                let mut t = [0.0; 6];
                t[a] = sa * h2;
                t[b] = sb * h2;
                v += w * at(t);
            }
            hess[(a, b)] = v / (4.0 * h2 * h2);
            hess[(b, a)] = hess[(a, b)];
        }
    }
    (grad, hess)
}

/// Minimizes `f` over SO(4) starting at `start`; returns the final point and value.
///
/// Newton steps in the Cayley chart at the current point; directions of
/// non-positive curvature take a gradient step instead.
pub fn minimize(f: &dyn Fn(&Matrix4<f64>) -> f64, start: Matrix4<f64>, budget: DescentBudget) -> (Matrix4<f64>, f64) {
    let mut p = start;
    let mut fp = f(&p);
    for _ in 0..budget.max_iters {
        let (grad, hess) = local_model(f, &p, fp);
        let g = Vector6::from_column_slice(&grad);
        if g.norm() < budget.grad_tol {
            break;
        }
        let eig = hess.symmetric_eigen();
        let scale = eig.eigenvalues.amax().max(1e-12);
        let mut dir = Vector6::zeros();
        for k in 0..6 {
            let v = eig.eigenvectors.column(k);
            let lam = eig.eigenvalues[k];
            let gv = v.dot(&g);
            let coef = if lam > 1e-8 * scale { -gv / lam } else { -gv / scale };
            dir += v * coef;
        }
        let slope = dir.dot(&g);
        // backtracking with Armijo condition
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let step: [f64; 6] = std::array::from_fn(|a| dir[a] * t);
            let cand = p * cayley(&algebra(&step));
            let fc = f(&cand);
            if fc <= fp + 1e-4 * t * slope {
                p = reorthonormalize(&cand);
                let prev = fp;
                fp = f(&p);
                // progress below roundoff: the gradient is FD noise from here on
                accepted = prev - fp > 1e-15 * (1.0 + fp.abs());
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (p, fp)
}
