//! Residuals of the differential curvature identities and their behaviour
//! under step refinement.

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::chart::Chart;
use super::fd::{DiffConfig, Scheme};
use super::fields::{dot, PointwiseFields};
use super::structure::QuasiEinsteinStructure;
use crate::berger::EINSTEIN_REL_TOL;
use crate::duality::{insertion_inner, pm_project_unchecked};
use crate::error::{Error, Result};
use crate::quadratic::q_of;
use crate::tensor::{inner_product, kulkarni_nomizu, Tensor4};

/// One scalar residual at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    /// Size of the largest term entering the identity.
    pub scale: f64,
    /// False when the identity's hypothesis does not hold for the input.
    pub applies: bool,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, scale: f64) -> Self {
        Check {
            name: name.into(),
            residual,
            scale,
            applies: true,
        }
    }

    fn scalar(name: impl Into<String>, lhs: f64, rhs_terms: &[f64]) -> Self {
        let rhs: f64 = rhs_terms.iter().sum();
        let scale = rhs_terms.iter().fold(lhs.abs(), |m, v| m.max(v.abs()));
        Check::new(name, (lhs - rhs).abs(), scale)
    }

    fn when(mut self, applies: bool) -> Self {
        self.applies = applies;
        self
    }
}

fn max_abs_of(ts: &[&Tensor4]) -> f64 {
    ts.iter().fold(0.0, |m, t| m.max(t.max_abs()))
}

fn orth_identity() -> Matrix4<f64> {
    Matrix4::identity()
}

fn outer(a: &[f64; 4], b: &[f64; 4]) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| a[i] * b[j])
}

const SIDES: [&str; 2] = ["plus", "minus"];

fn require_einstein(pf: &PointwiseFields) -> Result<()> {
    let c = &pf.curvature;
    let traceless = c.ricci - orth_identity() * (c.scalar / 4.0);
    let residual = traceless.norm();
    if residual > EINSTEIN_REL_TOL * c.rm.norm() {
        return Err(Error::NotEinsteinChart {
            point: c.geometry.x,
            residual,
        });
    }
    Ok(())
}

/// `ΔRm + 2Q(Rm) − 2λRm` with `λ = R/4`.
pub fn hamilton_residual(pf: &PointwiseFields) -> Result<Vec<Check>> {
    require_einstein(pf)?;
    let c = &pf.curvature;
    let rm = c.rm.tensor();
    let q2 = q_of(rm).scale(2.0);
    let lam_rm = rm.scale(2.0 * c.scalar / 4.0);
    let mut r = pf.lap_rm;
    r.axpy(1.0, &q2);
    r.axpy(-1.0, &lam_rm);
    Ok(vec![Check::new("hamilton", r.max_abs(), max_abs_of(&[&pf.lap_rm, &q2, &lam_rm]))])
}

fn weitzenbock_einstein_checks(pf: &PointwiseFields) -> Vec<Check> {
    let c = &pf.curvature;
    let lam = c.scalar / 4.0;
    [&c.half_plus, &c.half_minus]
        .iter()
        .enumerate()
        .map(|(s, h)| {
            Check::scalar(
                format!("weitzenbock_{}", SIDES[s]),
                pf.lap_w_norm_sq[s],
                &[2.0 * pf.nabla_w_norm_sq[s], 4.0 * lam * pf.w_norm_sq[s], -36.0 * h.det],
            )
        })
        .collect()
}

/// `Δ|W±|² − (2|∇W±|² + 4λ|W±|² − 36 det W±)` for both signs.
pub fn weitzenbock_einstein_residual(pf: &PointwiseFields) -> Result<Vec<Check>> {
    require_einstein(pf)?;
    Ok(weitzenbock_einstein_checks(pf))
}

/// The same residuals with `λ := R/4` and no Einstein check; used to show
/// that the identity fails when its hypothesis does.
pub fn weitzenbock_einstein_unchecked(pf: &PointwiseFields) -> Vec<Check> {
    weitzenbock_einstein_checks(pf)
        .into_iter()
        .map(|c| c.when(false))
        .collect()
}

/// `2|∇W±|² − 8|δW±|² + R|W±|² − 36 det W±` for both signs.
pub fn cgy_integrand(pf: &PointwiseFields) -> [f64; 2] {
    let c = &pf.curvature;
    [&c.half_plus, &c.half_minus]
        .iter()
        .enumerate()
        .map(|(s, h)| 2.0 * pf.nabla_w_norm_sq[s] - 8.0 * pf.delta_w_norm_sq[s] + c.scalar * pf.w_norm_sq[s] - 36.0 * h.det)
        .collect::<Vec<_>>()
        .try_into()
        .expect("two sides")
}

fn cgy_checks(pf: &PointwiseFields) -> Vec<Check> {
    let c = &pf.curvature;
    let v = cgy_integrand(pf);
    (0..2)
        .map(|s| {
            let h = if s == 0 { &c.half_plus } else { &c.half_minus };
            let scale = [
                2.0 * pf.nabla_w_norm_sq[s],
                8.0 * pf.delta_w_norm_sq[s],
                c.scalar.abs() * pf.w_norm_sq[s],
                36.0 * h.det.abs(),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            Check::new(format!("cgy_{}", SIDES[s]), v[s].abs(), scale)
        })
        .collect()
}

fn potential(pf: &PointwiseFields) -> &super::fields::PotentialFields {
    pf.potential.as_ref().expect("structure fields requested")
}

/// Prop. 3.2 as printed, and with the `∇λ⊗∇f ∘ g` term negated or removed.
pub fn prop32_residual(pf: &PointwiseFields) -> Vec<Check> {
    let c = &pf.curvature;
    let p = potential(pf);
    let (im, lam, df) = (p.inv_m, p.at.lambda, p.at.df);
    let rm = c.rm.tensor();
    let g = orth_identity();
    let ric_l = c.ricci - g * lam;

    let mut base = rm.scale(2.0 * lam);
    let q2 = q_of(rm).scale(2.0);
    base.axpy(-1.0, &q2);
    let hl = kulkarni_nomizu(&p.hess_lambda, &g);
    base.axpy(1.0, &hl);
    let rh = kulkarni_nomizu(&ric_l, &p.at.hess).scale(im);
    base.axpy(1.0, &rh);
    let rd = kulkarni_nomizu(&ric_l, &outer(&df, &df)).scale(im * im);
    base.axpy(1.0, &rd);
    let ins = Tensor4::from_fn(|i, j, k, l| {
        let mut s = 0.0;
        for q in 0..4 {
            s += df[q]
                * (rm.get(i, q, k, l) * df[j] + rm.get(i, j, k, q) * df[l]
                    - rm.get(j, q, k, l) * df[i]
                    - rm.get(i, j, l, q) * df[k]);
        }
        im * s
    });
    base.axpy(1.0, &ins);
    let nl = kulkarni_nomizu(&outer(&p.grad_lambda, &df), &g).scale(im);
    let lhs = &p.drift_lap_rm;
    let scale = max_abs_of(&[lhs, &q2, &hl, &rh, &rd, &ins, &nl, &rm.scale(2.0 * lam)]);

    let variant = |sign: f64| {
        let mut r = *lhs;
        r.axpy(-1.0, &base);
        r.axpy(-sign, &nl);
        r.max_abs()
    };
    vec![
        Check::new("prop32_printed", variant(1.0), scale),
        Check::new("prop32_grad_lambda_negated", variant(-1.0), scale),
        Check::new("prop32_grad_lambda_omitted", variant(0.0), scale),
    ]
}

/// Both identities of Lemma 3.1, the traced one with its printed and corrected
/// `∇λ` coefficient, and the algebraic trace consistency of each.
pub fn lemma31_residual(pf: &PointwiseFields) -> Vec<Check> {
    let c = &pf.curvature;
    let p = potential(pf);
    let (im, lam, df, gl) = (p.inv_m, p.at.lambda, p.at.df, p.grad_lambda);
    let ric = &c.ricci;
    let rm = c.rm.tensor();
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let nric = |i: usize, j: usize, k: usize| pf.nabla_ric[i * 16 + j * 4 + k];

    let rhs1 = |i: usize, j: usize, k: usize| {
        let mut s = gl[i] * d(j, k) - gl[j] * d(i, k);
        for l in 0..4 {
            s -= rm.get(i, j, k, l) * df[l];
        }
        s + im * (lam * d(i, k) * df[j] - lam * d(j, k) * df[i] + ric[(j, k)] * df[i] - ric[(i, k)] * df[j])
    };
    let mut res1: f64 = 0.0;
    let mut scale1: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let lhs = nric(i, j, k) - nric(j, i, k);
                let r = rhs1(i, j, k);
                res1 = res1.max((lhs - r).abs());
                scale1 = scale1.max(lhs.abs()).max(r.abs());
            }
        }
    }

    let n = 4.0;
    let rdf: [f64; 4] = std::array::from_fn(|i| (0..4).map(|j| ric[(i, j)] * df[j]).sum());
    let rhs2 = |coef: f64, i: usize| {
        coef * gl[i] + 2.0 * rdf[i] - 2.0 * im * rdf[i] + 2.0 * im * (c.scalar - (n - 1.0) * lam) * df[i]
    };
    let traced = |coef: f64| {
        let mut res: f64 = 0.0;
        let mut cons: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..4 {
            let r = rhs2(coef, i);
            res = res.max((pf.grad_scalar[i] - r).abs());
            let tr: f64 = 2.0 * (0..4).map(|j| rhs1(i, j, j)).sum::<f64>();
            cons = cons.max((tr - r).abs());
            scale = scale.max(pf.grad_scalar[i].abs()).max(r.abs()).max(tr.abs());
        }
        (res, cons, scale)
    };
    let (res_p, cons_p, scale_p) = traced(n - 1.0);
    let (res_c, cons_c, scale_c) = traced(2.0 * (n - 1.0));
    vec![
        Check::new("lemma31_first", res1, scale1),
        Check::new("lemma31_traced_printed", res_p, scale_p),
        Check::new("lemma31_traced_corrected", res_c, scale_c),
        Check::new("lemma31_trace_consistency_printed", cons_p, scale_p),
        Check::new("lemma31_trace_consistency_corrected", cons_c, scale_c),
    ]
}

fn pm_pair(x: &Tensor4, w: &Tensor4, side: usize) -> f64 {
    let (p, m) = pm_project_unchecked(x);
    inner_product(if side == 0 { &p } else { &m }, w)
}

/// Every recorded form of the Weitzenböck formula for `W±` on a generalized
/// quasi-Einstein manifold, the full-Weyl intermediate formula, and the two
/// corollary specializations.
pub fn weitzenbock_gqe_residual(pf: &PointwiseFields, m: Option<f64>) -> Vec<Check> {
    let c = &pf.curvature;
    let p = potential(pf);
    let (im, lam, df) = (p.inv_m, p.at.lambda, p.at.df);
    let dd = dot(&df, &df);
    let ric = &c.ricci;
    let rr = kulkarni_nomizu(ric, ric);
    let rh = kulkarni_nomizu(ric, &p.at.hess);
    let rd = kulkarni_nomizu(ric, &outer(&df, &df));
    let hh = kulkarni_nomizu(&p.at.hess, &p.at.hess);
    let is_m2 = m.is_some_and(|v| (v + 2.0).abs() < 1e-12);
    let is_inf = m.is_none();

    let mut out = Vec::new();
    for (s, half) in [&c.half_plus, &c.half_minus].iter().enumerate() {
        let w = if s == 0 { &c.weyl_plus } else { &c.weyl_minus };
        let lhs = p.drift_lap_w_norm_sq[s];
        let n2 = 2.0 * pf.nabla_w_norm_sq[s];
        let w2 = pf.w_norm_sq[s];
        let det = -36.0 * half.det;
        let name = |form: &str| format!("{form}_{}", SIDES[s]);
        let ins = 8.0 * im * insertion_inner(w, &c.weyl, &df);
        out.push(Check::scalar(
            name("statement"),
            lhs,
            &[n2, (4.0 * lam + 2.0 * im * dd) * w2, det, -(1.0 + 2.0 * im) * pm_pair(&hh, w, s)],
        ));
        out.push(Check::scalar(
            name("pre_substitution"),
            lhs,
            &[
                n2,
                4.0 * lam * w2,
                det,
                -pm_pair(&rr, w, s),
                2.0 * im * pm_pair(&rh, w, s),
                (2.0 * im + 2.0 * im * im) * pm_pair(&rd, w, s),
                ins,
            ],
        ));
        out.push(Check::scalar(
            name("proof_final"),
            lhs,
            &[
                n2,
                4.0 * lam * w2,
                det,
                (1.0 + 2.0 * im) * pm_pair(&rr, w, s),
                (2.0 + 4.0 * im) * pm_pair(&rh, w, s),
                ins,
            ],
        ));
        out.push(Check::scalar(name("cor14"), lhs, &[n2, (4.0 * lam - dd) * w2, det]).when(is_m2));
        out.push(Check::scalar(name("cor15"), lhs, &[n2, 4.0 * lam * w2, det, -pm_pair(&rr, w, s)]).when(is_inf));
    }

    let w = &c.weyl;
    let lhs = p.drift_lap_w_norm_sq[0] + p.drift_lap_w_norm_sq[1];
    out.push(Check::scalar(
        "eq31_full",
        lhs,
        &[
            2.0 * pf.nabla_w_full_norm_sq(),
            4.0 * lam * inner_product(w, w),
            -4.0 * inner_product(w, &q_of(w)),
            -inner_product(&rr, w),
            8.0 * im * insertion_inner(w, w, &df),
            2.0 * im * inner_product(&rh, w),
            (2.0 * im * im + 2.0 * im) * inner_product(&rd, w),
        ],
    ));
    out
}

/// Which identity to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityKind {
    Hamilton,
    WeitzenbockEinstein,
    /// Weitzenböck residuals without the Einstein check (negative control).
    WeitzenbockUnchecked,
    Prop32,
    WeitzenbockGqe,
    Lemma31,
    Cgy,
    /// Defining equation of the structure with a differenced Hessian of `f`.
    Validity,
}

impl IdentityKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "hamilton" => IdentityKind::Hamilton,
            "weitzenbock-einstein" => IdentityKind::WeitzenbockEinstein,
            "weitzenbock-unchecked" => IdentityKind::WeitzenbockUnchecked,
            "prop32" => IdentityKind::Prop32,
            "weitzenbock-gqe" => IdentityKind::WeitzenbockGqe,
            "lemma31" => IdentityKind::Lemma31,
            "cgy" => IdentityKind::Cgy,
            "validity" => IdentityKind::Validity,
            other => return Err(Error::BadSpec(format!("unknown identity '{other}'"))),
        })
    }

    pub fn needs_structure(self) -> bool {
        matches!(
            self,
            IdentityKind::Prop32 | IdentityKind::WeitzenbockGqe | IdentityKind::Lemma31 | IdentityKind::Validity
        )
    }
}

/// What an identity is evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Chart(Chart),
    Structure(QuasiEinsteinStructure),
}

impl Target {
    pub fn chart(&self) -> &Chart {
        match self {
            Target::Chart(c) => c,
            Target::Structure(s) => &s.chart,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Target::Chart(c) => json!({"chart": c.to_json()}),
            Target::Structure(s) => json!({"structure": s.to_json()}),
        }
    }
}

/// Relative tolerance on the structure equation before structure identities run.
pub const STRUCTURE_REL_TOL: f64 = 1e-8;

/// All residuals of `kind` at `x`.
pub fn check_point(kind: IdentityKind, target: &Target, x: &[f64; 4], cfg: &DiffConfig) -> Result<Vec<Check>> {
    let structure = match (kind.needs_structure(), target) {
        (true, Target::Structure(s)) => {
            s.check_valid(x, STRUCTURE_REL_TOL)?;
            Some(s)
        }
        (true, Target::Chart(_)) => {
            return Err(Error::BadSpec(format!("{kind:?} needs a quasi-Einstein structure")));
        }
        (false, _) => None,
    };
    if kind == IdentityKind::Validity {
        let s = structure.expect("checked above");
        let (_, scale) = s.traceless_residual(x)?;
        let r = s.traceless_residual_fd(x, cfg)?;
        return Ok(vec![Check::new("validity", r, scale)]);
    }
    let pf = PointwiseFields::compute(target.chart(), structure, x, cfg)?;
    Ok(match kind {
        IdentityKind::Hamilton => hamilton_residual(&pf)?,
        IdentityKind::WeitzenbockEinstein => weitzenbock_einstein_residual(&pf)?,
        IdentityKind::WeitzenbockUnchecked => weitzenbock_einstein_unchecked(&pf),
        IdentityKind::Cgy => cgy_checks(&pf),
        IdentityKind::Prop32 => prop32_residual(&pf),
        IdentityKind::Lemma31 => lemma31_residual(&pf),
        IdentityKind::WeitzenbockGqe => weitzenbock_gqe_residual(&pf, structure.and_then(|s| s.m)),
        IdentityKind::Validity => unreachable!(),
    })
}

pub fn verify_hamilton(chart: &Chart, x: &[f64; 4], cfg: &DiffConfig) -> Result<f64> {
    Ok(check_point(IdentityKind::Hamilton, &Target::Chart(chart.clone()), x, cfg)?[0].residual)
}

/// `(residual⁺, residual⁻)`.
pub fn verify_weitzenbock_einstein(chart: &Chart, x: &[f64; 4], cfg: &DiffConfig) -> Result<(f64, f64)> {
    let c = check_point(IdentityKind::WeitzenbockEinstein, &Target::Chart(chart.clone()), x, cfg)?;
    Ok((c[0].residual, c[1].residual))
}

pub fn verify_prop32(s: &QuasiEinsteinStructure, x: &[f64; 4], cfg: &DiffConfig) -> Result<Vec<Check>> {
    check_point(IdentityKind::Prop32, &Target::Structure(s.clone()), x, cfg)
}

pub fn verify_lemma31(s: &QuasiEinsteinStructure, x: &[f64; 4], cfg: &DiffConfig) -> Result<Vec<Check>> {
    check_point(IdentityKind::Lemma31, &Target::Structure(s.clone()), x, cfg)
}

pub fn verify_weitzenbock_gqe(s: &QuasiEinsteinStructure, x: &[f64; 4], cfg: &DiffConfig) -> Result<Vec<Check>> {
    check_point(IdentityKind::WeitzenbockGqe, &Target::Structure(s.clone()), x, cfg)
}

/// How a residual behaves as the step halves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceClass {
    /// Decreases by `2^order` per halving, within the band.
    Converges,
    /// Decreases at least as fast as `2^order`, and faster on some halving.
    Superconvergent,
    /// At roundoff level on every step.
    Exact,
    /// Levels off at a nonzero value.
    NonConvergent,
    Irregular,
}

impl ConvergenceClass {
    pub fn vanishes(self) -> bool {
        matches!(
            self,
            ConvergenceClass::Converges | ConvergenceClass::Superconvergent | ConvergenceClass::Exact
        )
    }
}

/// Residuals below `FLOOR_REL · scale` (or `FLOOR_ABS`) count as roundoff.
pub const FLOOR_REL: f64 = 1e-8;
pub const FLOOR_ABS: f64 = 1e-13;

pub fn ratio_band(order: u32) -> f64 {
    if order <= 2 {
        0.25
    } else {
        0.40
    }
}

pub fn floor_for(scale: f64) -> f64 {
    (FLOOR_REL * scale).max(FLOOR_ABS)
}

/// Classifies residuals at steps `h, h/2, h/4, …`.
pub fn classify(residuals: &[f64], floor: f64, order: u32) -> ConvergenceClass {
    if residuals.iter().all(|r| *r <= floor) {
        return ConvergenceClass::Exact;
    }
    let target = 2f64.powi(order as i32);
    let band = ratio_band(order);
    let pair_ok = |coarse: f64, fine: f64| fine <= floor || ((coarse / fine) / target - 1.0).abs() <= band;
    if residuals.windows(2).all(|w| pair_ok(w[0], w[1])) {
        return ConvergenceClass::Converges;
    }
    let at_least = |coarse: f64, fine: f64| fine <= floor || (coarse / fine) / target >= 1.0 - band;
    if residuals.windows(2).all(|w| at_least(w[0], w[1])) {
        return ConvergenceClass::Superconvergent;
    }
    let first = residuals[0];
    let last = *residuals.last().expect("nonempty");
    if last > floor && last >= 0.5 * first {
        return ConvergenceClass::NonConvergent;
    }
    ConvergenceClass::Irregular
}

/// Refinement study settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudyConfig {
    pub scheme: Scheme,
    pub h0: f64,
    pub levels: usize,
    pub points: usize,
    pub seed: u64,
    /// Points are drawn uniformly from `center + [−radius, radius]⁴`.
    pub radius: f64,
    pub center: [f64; 4],
    /// Richardson levels applied at every step; raises the expected order by 2 each.
    pub richardson: u32,
}

impl StudyConfig {
    pub fn new(scheme: Scheme, points: usize, seed: u64) -> Self {
        StudyConfig {
            scheme,
            h0: match scheme {
                Scheme::Central2 => 0.02,
                Scheme::Central4 => 0.04,
            },
            levels: 3,
            points,
            seed,
            radius: 0.4,
            center: [0.0; 4],
            richardson: 0,
        }
    }

    /// A sampling box suited to `chart`: charts with a hole get an offset box.
    pub fn for_chart(scheme: Scheme, points: usize, seed: u64, chart: &Chart) -> Self {
        let mut c = StudyConfig::new(scheme, points, seed);
        if let Chart::EguchiHanson { a } = chart {
            c.center = [1.5 * a, 0.5 * a, -0.5 * a, 0.5 * a];
            c.radius = 0.25 * a;
        }
        c
    }

    pub fn order(&self) -> u32 {
        self.scheme.order() + 2 * self.richardson
    }

    pub fn steps(&self) -> Vec<f64> {
        (0..self.levels).map(|l| self.h0 / 2f64.powi(l as i32)).collect()
    }
}

pub fn sample_points(n: usize, seed: u64, radius: f64, center: &[f64; 4]) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| std::array::from_fn(|i| center[i] + rng.random_range(-radius..radius)))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckStudy {
    pub name: String,
    pub applies: bool,
    /// `residuals[point][level]`.
    pub residuals: Vec<Vec<f64>>,
    pub scales: Vec<f64>,
    pub observed_orders: Vec<Option<f64>>,
    pub classes: Vec<ConvergenceClass>,
    pub overall: ConvergenceClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub identity: IdentityKind,
    pub target: Value,
    pub order: u32,
    pub steps: Vec<f64>,
    pub points: Vec<[f64; 4]>,
    pub checks: Vec<CheckStudy>,
}

impl ConvergenceStudy {
    pub fn check(&self, name: &str) -> Option<&CheckStudy> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn overall(classes: &[ConvergenceClass]) -> ConvergenceClass {
    use ConvergenceClass::*;
    if classes.iter().all(|c| *c == Exact) {
        Exact
    } else if classes.iter().all(|c| matches!(c, Converges | Exact)) {
        Converges
    } else if classes.iter().all(|c| c.vanishes()) {
        Superconvergent
    } else if classes.iter().all(|c| *c == NonConvergent) {
        NonConvergent
    } else {
        Irregular
    }
}

fn observed_order(res: &[f64], floor: f64) -> Option<f64> {
    let n = res.len();
    if n < 2 || res[n - 1] <= floor || res[n - 2] <= floor {
        return None;
    }
    Some((res[n - 2] / res[n - 1]).log2())
}

/// Evaluates `kind` at seeded points on every refinement level (in parallel
/// over points) and classifies each residual.
pub fn convergence_study(kind: IdentityKind, target: &Target, cfg: &StudyConfig) -> Result<ConvergenceStudy> {
    use rayon::prelude::*;
    let points = sample_points(cfg.points, cfg.seed, cfg.radius, &cfg.center);
    let steps = cfg.steps();
    let per_point: Vec<Vec<Vec<Check>>> = points
        .par_iter()
        .map(|x| {
            steps
                .iter()
                .map(|h| check_point(kind, target, x, &DiffConfig::new(*h, cfg.scheme, cfg.richardson)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let order = cfg.order();
    let names: Vec<(String, bool)> = per_point[0][0].iter().map(|c| (c.name.clone(), c.applies)).collect();
    let checks = names
        .into_iter()
        .enumerate()
        .map(|(ci, (name, applies))| {
            let residuals: Vec<Vec<f64>> = per_point
                .iter()
                .map(|levels| levels.iter().map(|l| l[ci].residual).collect())
                .collect();
            let scales: Vec<f64> = per_point
                .iter()
                .map(|levels| levels.iter().fold(0.0, |m: f64, l| m.max(l[ci].scale)))
                .collect();
            let classes: Vec<ConvergenceClass> = residuals
                .iter()
                .zip(&scales)
                .map(|(r, s)| classify(r, floor_for(*s), order))
                .collect();
            let observed_orders = residuals
                .iter()
                .zip(&scales)
                .map(|(r, s)| observed_order(r, floor_for(*s)))
                .collect();
            CheckStudy {
                name,
                applies,
                overall: overall(&classes),
                residuals,
                scales,
                observed_orders,
                classes,
            }
        })
        .collect();
    Ok(ConvergenceStudy {
        identity: kind,
        target: target.to_json(),
        order,
        steps,
        points,
        checks,
    })
}

/// Form-by-form outcome of the Weitzenböck study on one structure.
#[derive(Debug, Clone, Serialize)]
pub struct AdjudicationEntry {
    pub structure: String,
    pub weyl_norm: f64,
    pub forms: Vec<(String, bool, ConvergenceClass)>,
}

/// Runs every Weitzenböck form on each named structure and records which ones
/// vanish under refinement.
pub fn adjudicate(structures: &[(&str, QuasiEinsteinStructure)], cfg: &StudyConfig) -> Result<Value> {
    let mut entries = Vec::new();
    for (label, s) in structures {
        let study = convergence_study(IdentityKind::WeitzenbockGqe, &Target::Structure(s.clone()), cfg)?;
        let weyl_norm = study
            .points
            .iter()
            .map(|x| super::fields::curvature_at(&s.chart, x).map(|c| inner_product(&c.weyl, &c.weyl).sqrt()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        entries.push(AdjudicationEntry {
            structure: label.to_string(),
            weyl_norm,
            forms: study
                .checks
                .iter()
                .map(|c| (c.name.clone(), c.applies, c.overall))
                .collect(),
        });
    }
    let scope = if entries.iter().any(|e| e.weyl_norm > 1e-6) {
        "includes a structure with nonzero Weyl curvature"
    } else {
        "adjudication limited to Weyl-flat structures"
    };
    Ok(json!({
        "order": cfg.order(),
        "steps": cfg.steps(),
        "points": cfg.points,
        "seed": cfg.seed,
        "scope": scope,
        "entries": entries,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::chart::perturbed_fs;
    use crate::numeric::structure::{flat_bump, gaussian_soliton};

    #[test]
    fn classification_rules() {
        assert_eq!(classify(&[1e-3, 2.5e-4, 6.3e-5], 1e-12, 2), ConvergenceClass::Converges);
        assert_eq!(classify(&[1e-15, 2e-15, 1e-15], 1e-12, 2), ConvergenceClass::Exact);
        assert_eq!(classify(&[0.3, 0.3, 0.29], 1e-12, 2), ConvergenceClass::NonConvergent);
        assert_eq!(classify(&[1e-3, 5e-4, 1e-4], 1e-12, 2), ConvergenceClass::Irregular);
        assert_eq!(classify(&[4e-4, 2.7e-5, 1.7e-6], 1e-12, 2), ConvergenceClass::Superconvergent);
        assert_eq!(classify(&[1.6e-3, 1e-4, 1e-13], 1e-12, 4), ConvergenceClass::Converges);
    }

    #[test]
    fn flat_things_vanish() {
        let cfg = DiffConfig::default();
        assert_eq!(verify_hamilton(&Chart::Flat, &[0.1; 4], &cfg).unwrap(), 0.0);
        for c in verify_prop32(&gaussian_soliton(1.0), &[0.3, 0.1, 0.0, -0.2], &cfg).unwrap() {
            assert!(c.residual < 1e-9, "{c:?}");
        }
    }

    #[test]
    fn non_einstein_chart_is_rejected() {
        let r = verify_hamilton(&perturbed_fs(), &[0.1; 4], &DiffConfig::default());
        assert!(matches!(r, Err(Error::NotEinsteinChart { .. })));
        let r = check_point(IdentityKind::Prop32, &Target::Chart(Chart::Flat), &[0.0; 4], &DiffConfig::default());
        assert!(matches!(r, Err(Error::BadSpec(_))));
    }

    #[test]
    fn bump_lemma31_first_identity() {
        let cfg = DiffConfig::default();
        let c = verify_lemma31(&flat_bump(0.1), &[0.2, -0.1, 0.3, 0.1], &cfg).unwrap();
        assert!(c[0].residual < 1e-8 * c[0].scale, "{:?}", c[0]);
        assert!(c[4].residual < 1e-12 * c[4].scale.max(1.0), "{:?}", c[4]);
    }
}
