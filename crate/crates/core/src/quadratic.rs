//! Hamilton's quadratic curvature term `Q(Rm)` and related identities.

use nalgebra::{Matrix4, Matrix6};
use serde::Serialize;

use crate::berger::{berger_form, berger_pair_matrix, require_einstein, BergerForm};
use crate::duality::{pm_project_unchecked, weyl_halves};
use crate::error::Result;
use crate::tensor::{inner_product, kulkarni_nomizu, standard_decompose, AlgCurvature4, Tensor4};

/// `B_ijkl = Σ_{m,p} R_imjp R_kmlp`.
pub fn b_tensor(t: &AlgCurvature4) -> Tensor4 {
    b_of(t.tensor())
}

fn b_of(r: &Tensor4) -> Tensor4 {
    // M[(i,j)][(m,p)] = R_imjp; B = M Mᵀ
    let mut m = [[0.0; 16]; 16];
    for i in 0..4 {
        for j in 0..4 {
            for mm in 0..4 {
                for p in 0..4 {
                    m[i * 4 + j][mm * 4 + p] = r.get(i, mm, j, p);
                }
            }
        }
    }
    Tensor4::from_fn(|i, j, k, l| {
        let (a, b) = (&m[i * 4 + j], &m[k * 4 + l]);
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    })
}

/// `Q_ijkl = B_ijkl − B_ijlk + B_ikjl − B_iljk`.
pub fn q_tensor(t: &AlgCurvature4) -> Tensor4 {
    q_of(t.tensor())
}

pub(crate) fn q_of(r: &Tensor4) -> Tensor4 {
    let b = b_of(r);
    Tensor4::from_fn(|i, j, k, l| b.get(i, j, k, l) - b.get(i, j, l, k) + b.get(i, k, j, l) - b.get(i, l, j, k))
}

/// Largest violation of `B_ijkl = B_jilk = B_klij`.
pub fn b_symmetry_defect(b: &Tensor4) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let v = b.get(i, j, k, l);
                    worst = worst
                        .max((v - b.get(j, i, l, k)).abs())
                        .max((v - b.get(k, l, i, j)).abs());
                }
            }
        }
    }
    worst
}

/// Values predicted for `Q` in a Berger frame, as a matrix in the Berger
/// pair basis `(12),(13),(14),(34),(42),(23)`.
pub fn q_table(a: &[f64; 3], b: &[f64; 3]) -> Matrix6<f64> {
    let diag = [
        a[0] * a[0] + b[0] * b[0] + 2.0 * a[1] * a[2] + 2.0 * b[1] * b[2],
        a[1] * a[1] + b[1] * b[1] + 2.0 * a[0] * a[2] + 2.0 * b[0] * b[2],
        a[2] * a[2] + b[2] * b[2] + 2.0 * a[0] * a[1] + 2.0 * b[0] * b[1],
    ];
    let dual = [
        2.0 * a[0] * b[0] + 2.0 * a[1] * b[2] + 2.0 * a[2] * b[1],
        2.0 * a[1] * b[1] + 2.0 * a[0] * b[2] + 2.0 * a[2] * b[0],
        2.0 * a[2] * b[2] + 2.0 * a[0] * b[1] + 2.0 * a[1] * b[0],
    ];
    let mut m = Matrix6::zeros();
    for i in 0..3 {
        m[(i, i)] = diag[i];
        m[(i + 3, i + 3)] = diag[i];
        m[(i, i + 3)] = dual[i];
        m[(i + 3, i)] = dual[i];
    }
    m
}

/// Max deviation of `Q(T)` in the Berger frame from the component table
/// (including the vanishing of every `Q_ijik`).
pub fn q_table_check(t: &AlgCurvature4, bf: &BergerForm) -> f64 {
    let q = AlgCurvature4::from_trusted(q_tensor(t)).in_frame(&bf.frame);
    (berger_pair_matrix(&q) - q_table(&bf.a, &bf.b)).abs().max()
}

/// `⟨Q(Rm)±, W±⟩` computed by projection, and `9 det W±` from the duality blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylPairing {
    pub projected: [f64; 2],
    pub nine_det: [f64; 2],
}

impl WeylPairing {
    /// Largest disagreement between the two routes, relative to `‖T‖³`.
    pub fn rel_disagreement(&self, norm: f64) -> f64 {
        let scale = norm.powi(3).max(f64::MIN_POSITIVE);
        (0..2)
            .map(|s| (self.projected[s] - self.nine_det[s]).abs() / scale)
            .fold(0.0, f64::max)
    }
}

pub fn q_weyl_pairing(t: &AlgCurvature4) -> Result<WeylPairing> {
    require_einstein(t)?;
    let q = q_tensor(t);
    let (q_plus, q_minus) = pm_project_unchecked(&q);
    let w = standard_decompose(t).weyl;
    let (w_plus, w_minus) = pm_project_unchecked(w.tensor());
    let (hp, hm) = weyl_halves(t);
    Ok(WeylPairing {
        projected: [inner_product(&q_plus, &w_plus), inner_product(&q_minus, &w_minus)],
        nine_det: [9.0 * hp.det, 9.0 * hm.det],
    })
}

/// Right-hand side of the expansion of `2Q(Rm)` through `Q(W)`, Ricci and
/// scalar curvature in dimension four.
pub fn cm_expansion(t: &AlgCurvature4) -> Tensor4 {
    let dec = standard_decompose(t);
    let w = dec.weyl.tensor();
    let ric = dec.ricci().0;
    let r = dec.scalar;
    let g = Matrix4::identity();
    let ric2 = ric * ric;
    let ric_norm2 = ric.norm_squared();

    let mut out = q_of(w).scale(2.0);
    out.axpy((6.0 * ric_norm2 - 2.0 * r * r) / 24.0, &kulkarni_nomizu(&g, &g));
    out.axpy(-0.5, &kulkarni_nomizu(&ric2, &g));
    out.axpy(r / 6.0, &kulkarni_nomizu(&ric, &g));
    // W_ipkq R^pq contracted against the metric
    let mut wr_m = [[0.0; 4]; 4];
    for (i, row) in wr_m.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            for p in 0..4 {
                for q in 0..4 {
                    *v += w.get(i, p, k, q) * ric[(p, q)];
                }
            }
        }
    }
    let wr = |i: usize, k: usize| wr_m[i][k];
    let extra = Tensor4::from_fn(|i, j, k, l| {
        (ric[(i, k)] * ric[(l, j)] - ric[(i, l)] * ric[(j, k)])
            + wr(i, k) * g[(j, l)]
            - wr(j, k) * g[(i, l)]
            + wr(j, l) * g[(i, k)]
            - wr(i, l) * g[(j, k)]
    });
    out.add(&extra)
}

/// `max |2Q(Rm) − expansion|`.
pub fn cm_expansion_check(t: &AlgCurvature4) -> f64 {
    q_tensor(t).scale(2.0).max_abs_diff(&cm_expansion(t))
}

/// Everything the `quadratic` command reports.
#[derive(Debug, Clone, Serialize)]
pub struct QuadraticReport {
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    pub b_symmetry_defect: f64,
    pub cm_expansion_residual: f64,
    /// Berger-frame Q values: `[Q1212, Q1313, Q1414, Q1234, Q1342, Q1423]`.
    pub q_table: Option<[f64; 6]>,
    pub q_table_residual: Option<f64>,
    pub pairing_plus: Option<f64>,
    pub pairing_minus: Option<f64>,
    pub nine_det_plus: Option<f64>,
    pub nine_det_minus: Option<f64>,
}

impl QuadraticReport {
    /// `B` and `Q` are flattened row-major over `(i,j,k,l)`.
    pub fn new(t: &AlgCurvature4) -> Self {
        let b = b_tensor(t);
        let q = q_tensor(t);
        let mut report = QuadraticReport {
            b: b.0.to_vec(),
            q: q.0.to_vec(),
            b_symmetry_defect: b_symmetry_defect(&b),
            cm_expansion_residual: cm_expansion_check(t),
            q_table: None,
            q_table_residual: None,
            pairing_plus: None,
            pairing_minus: None,
            nine_det_plus: None,
            nine_det_minus: None,
        };
        if let Ok(bf) = berger_form(t) {
            let qf = AlgCurvature4::from_trusted(q).in_frame(&bf.frame);
            let g = |i: usize, j: usize, k: usize, l: usize| qf.get(i - 1, j - 1, k - 1, l - 1);
            report.q_table = Some([
                g(1, 2, 1, 2),
                g(1, 3, 1, 3),
                g(1, 4, 1, 4),
                g(1, 2, 3, 4),
                g(1, 3, 4, 2),
                g(1, 4, 2, 3),
            ]);
            report.q_table_residual = Some(q_table_check(t, &bf));
        }
        if let Ok(p) = q_weyl_pairing(t) {
            report.pairing_plus = Some(p.projected[0]);
            report.pairing_minus = Some(p.projected[1]);
            report.nine_det_plus = Some(p.nine_det[0]);
            report.nine_det_minus = Some(p.nine_det[1]);
        }
        report
    }
}
