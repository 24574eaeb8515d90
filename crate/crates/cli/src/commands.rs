use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use curv4::berger::{
    appendix_inequality_margins, berger_form, berger_lemma_check, variational_conditions, BERGER_PAIRS,
};
use curv4::duality::{sorted_eigenvalues6, to_blocks, DualityReport};
use curv4::io::{curvature_from_str, curvature_to_json};
use curv4::models::{model_tensor, ModelSpec};
use curv4::numeric::chart::Chart;
use curv4::numeric::fd::Scheme;
use curv4::numeric::structure::QuasiEinsteinStructure;
use curv4::numeric::verify::{convergence_study, ConvergenceStudy, IdentityKind, StudyConfig, Target};
use curv4::positivity::{classify_point, IsotropicSearch};
use curv4::quadratic::QuadraticReport;
use curv4::tensor::{standard_decompose, AlgCurvature4};
use curv4::Error;
use nalgebra::Matrix4;
use serde_json::{json, Value};

use crate::manifest::{render, resolve_timestamp, RunManifest};
use crate::suite;

#[derive(Debug, Parser)]
#[command(name = "curv4", version, about = "Curvature algebra and Weitzenbock identity checks in dimension four")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Manifest timestamp in Unix seconds (default: SOURCE_DATE_EPOCH, else 0).
    #[arg(long, global = true)]
    pub timestamp: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Duality and standard decomposition of a curvature tensor.
    Decompose(TensorArgs),
    /// Berger normal form of an Einstein-type tensor.
    Berger(TensorArgs),
    /// The quadratic term Q(Rm) and its checks.
    Quadratic(TensorArgs),
    /// Positivity margins and pointwise labels.
    Classify(ClassifyArgs),
    /// Refinement study of a differential identity on a chart or structure.
    Verify(VerifyArgs),
    /// Runs the acceptance suite.
    Suite(SuiteArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["model", "tensor"])))]
pub struct TensorArgs {
    /// Model name: S4, H4, R4, CP2, S2xS2, S2axS2b.
    #[arg(long)]
    pub model: Option<String>,
    /// Model parameter as key=value (repeatable), e.g. --param r=2.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// Component-list JSON file, or `-` for stdin.
    #[arg(long)]
    pub tensor: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: TensorArgs,
    /// Starting frames for the isotropic-curvature search.
    #[arg(long, default_value_t = 4)]
    pub samples: usize,
    #[arg(long, default_value_t = 0x1507)]
    pub seed: u64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("target").required(true).args(["chart", "structure"])))]
pub struct VerifyArgs {
    /// hamilton, weitzenbock-einstein, weitzenbock-unchecked, prop32, weitzenbock-gqe, lemma31, cgy or validity.
    #[arg(long)]
    pub identity: String,
    /// Chart name (flat, s4, fs, s2xs2, s2xs2b, eh, fs-perturbed), inline JSON or a JSON file.
    #[arg(long)]
    pub chart: Option<String>,
    /// Structure name (gaussian, bump, linear, fs-bump), inline JSON or a JSON file.
    #[arg(long)]
    pub structure: Option<String>,
    #[arg(long, default_value_t = 5)]
    pub points: usize,
    /// Coarsest step (default 0.02 at order 2, 0.04 at order 4).
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, default_value_t = 4)]
    pub order: u32,
    #[arg(long, default_value_t = 0)]
    pub richardson: u32,
    /// Number of step halvings plus one.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Also write the per-point residual table to this CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Print the CSV table on stdout instead of the JSON summary.
    #[arg(long)]
    pub table: bool,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Emit a single JSON document instead of one line per criterion.
    #[arg(long)]
    pub json: bool,
    /// Run only these criteria (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u32>,
    /// Directory for archived reports (suite.json, thm13_adjudication.json).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("parameter {k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad input, schema or precondition: exit 2.
    Input(Error),
    Io(String),
    /// Acceptance failure: exit 1.
    Acceptance,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn read_source(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
    }
}

/// Loads the tensor and describes where it came from.
pub fn load_tensor(args: &TensorArgs) -> Result<(AlgCurvature4, Value), Failure> {
    if let Some(name) = &args.model {
        let params: BTreeMap<String, f64> = args.params.iter().cloned().collect();
        let spec = ModelSpec::from_name(name, &params)?;
        let t = model_tensor(&spec)?;
        let desc = serde_json::to_value(spec).expect("model spec serializes");
        return Ok((t, json!({"model": desc})));
    }
    let path = args.tensor.as_ref().expect("clap enforces one source");
    let text = read_source(path)?;
    let t = curvature_from_str(&text)?;
    Ok((t, json!({"tensor": path.display().to_string(), "components": curvature_to_json(&t)})))
}

fn rows(m: &Matrix4<f64>) -> Vec<[f64; 4]> {
    (0..4).map(|i| std::array::from_fn(|j| m[(i, j)])).collect()
}

fn columns(m: &Matrix4<f64>) -> Vec<[f64; 4]> {
    (0..4).map(|j| std::array::from_fn(|i| m[(i, j)])).collect()
}

pub fn decompose_report(t: &AlgCurvature4) -> Value {
    let dec = standard_decompose(t);
    let blocks = to_blocks(t);
    json!({
        "duality": DualityReport::new(t),
        "operator_eigenvalues": sorted_eigenvalues6(&blocks.assembled()),
        "standard": {
            "R": dec.scalar,
            "ricci": rows(&t.ricci().0),
            "traceless_ricci": rows(&dec.traceless_ricci.0),
            "weyl": curvature_to_json(&dec.weyl),
            "recompose_residual": dec.recompose().tensor().max_abs_diff(t.tensor()),
        },
    })
}

pub fn berger_report(t: &AlgCurvature4) -> Result<Value, Failure> {
    let bf = berger_form(t)?;
    let variational: Vec<Value> = variational_conditions(t, &bf)
        .iter()
        .map(|(c, v)| json!({"component": c, "value": v}))
        .collect();
    Ok(json!({
        "a": bf.a,
        "b": bf.b,
        "frame": columns(&bf.frame),
        "pairs": BERGER_PAIRS.map(|(i, j)| [i + 1, j + 1]),
        "method": bf.method,
        "block_residual": bf.block_residual,
        "lambda_residual": (bf.a.iter().sum::<f64>() - t.scalar() / 4.0).abs(),
        "frame_sectionals": bf.frame_sectionals(t),
        "property3_margins": bf.property3_margins(),
        "appendix_margins": appendix_inequality_margins(t, &bf),
        "berger_lemma_residual": berger_lemma_check(t, &bf.frame),
        "variational": variational,
    }))
}

fn load_target(args: &VerifyArgs) -> Result<(Target, Value), Failure> {
    let spec_text = |s: &str| -> Result<String, Failure> {
        let p = Path::new(s);
        if !s.trim_start().starts_with('{') && p.is_file() {
            read_source(p)
        } else {
            Ok(s.to_string())
        }
    };
    if let Some(c) = &args.chart {
        let chart = Chart::from_spec(&spec_text(c)?)?;
        let desc = json!({"chart": chart.to_json()});
        return Ok((Target::Chart(chart), desc));
    }
    let s = args.structure.as_ref().expect("clap enforces one target");
    let st = QuasiEinsteinStructure::from_spec(&spec_text(s)?)?;
    let desc = json!({"structure": st.to_json()});
    Ok((Target::Structure(st), desc))
}

fn study_config(args: &VerifyArgs, target: &Target) -> Result<StudyConfig, Failure> {
    let scheme = Scheme::from_order(args.order)?;
    let mut cfg = StudyConfig::for_chart(scheme, args.points, args.seed, target.chart());
    if let Some(h) = args.h {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::BadSpec(format!("--h must be positive, got {h}")).into());
        }
        cfg.h0 = h;
    }
    if args.points == 0 || args.levels < 2 {
        return Err(Error::BadSpec("need at least one point and two levels".into()).into());
    }
    if args.richardson > 2 {
        return Err(Error::BadSpec(format!("at most 2 Richardson levels, got {}", args.richardson)).into());
    }
    cfg.levels = args.levels;
    cfg.richardson = args.richardson;
    Ok(cfg)
}

pub fn study_summary(study: &ConvergenceStudy) -> Value {
    let checks: Vec<Value> = study
        .checks
        .iter()
        .map(|c| {
            let orders: Vec<f64> = c.observed_orders.iter().flatten().copied().collect();
            let mean = if orders.is_empty() {
                None
            } else {
                Some(orders.iter().sum::<f64>() / orders.len() as f64)
            };
            json!({
                "name": c.name,
                "applies": c.applies,
                "overall": c.overall,
                "vanishes": c.overall.vanishes(),
                "mean_observed_order": mean,
                "max_residual_finest": c.residuals.iter().map(|r| *r.last().unwrap_or(&0.0)).fold(0.0, f64::max),
            })
        })
        .collect();
    json!({
        "identity": study.identity,
        "nominal_order": study.order,
        "steps": study.steps,
        "points": study.points,
        "summary": checks,
        "checks": study.checks,
    })
}

pub fn residual_csv(study: &ConvergenceStudy) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(["point", "x1", "x2", "x3", "x4", "check", "applies", "level", "h", "residual", "scale"])
        .map_err(io)?;
    for c in &study.checks {
        for (p, x) in study.points.iter().enumerate() {
            for (l, h) in study.steps.iter().enumerate() {
                let fields = [
                    p.to_string(),
                    x[0].to_string(),
                    x[1].to_string(),
                    x[2].to_string(),
                    x[3].to_string(),
                    c.name.clone(),
                    c.applies.to_string(),
                    l.to_string(),
                    h.to_string(),
                    c.residuals[p][l].to_string(),
                    c.scales[p].to_string(),
                ];
                w.write_record(&fields).map_err(io)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn suite_report(only: &[u32]) -> Result<(Vec<suite::Outcome>, bool), Failure> {
    let ids: Vec<u32> = if only.is_empty() { (1..=10).collect() } else { only.to_vec() };
    let mut outcomes = Vec::new();
    for id in ids {
        outcomes.push(suite::run(id)?);
    }
    let pass = outcomes.iter().all(|o| o.pass);
    Ok((outcomes, pass))
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>) -> Result<(), Failure> {
    let ts = resolve_timestamp(cli.timestamp);
    let config_base = json!({"jobs": cli.jobs});
    match &cli.command {
        Command::Decompose(a) => {
            let (t, input) = load_tensor(a)?;
            let m = RunManifest::new("decompose", input, config_base, ts);
            out.write_all(render(&m, &decompose_report(&t)).as_bytes())?;
        }
        Command::Berger(a) => {
            let (t, input) = load_tensor(a)?;
            let m = RunManifest::new("berger", input, json!({"einstein_rel_tol": curv4::berger::EINSTEIN_REL_TOL}), ts);
            out.write_all(render(&m, &berger_report(&t)?).as_bytes())?;
        }
        Command::Quadratic(a) => {
            let (t, input) = load_tensor(a)?;
            let m = RunManifest::new("quadratic", input, config_base, ts);
            out.write_all(render(&m, &QuadraticReport::new(&t)).as_bytes())?;
        }
        Command::Classify(a) => {
            let (t, input) = load_tensor(&a.input)?;
            let search = IsotropicSearch {
                starts: a.samples.max(1),
                seed: a.seed,
                ..Default::default()
            };
            let m = RunManifest::new("classify", input, serde_json::to_value(search).expect("serializes"), ts);
            out.write_all(render(&m, &classify_point(&t, &search)).as_bytes())?;
        }
        Command::Verify(a) => {
            let kind = IdentityKind::parse(&a.identity)?;
            let (target, input) = load_target(a)?;
            let cfg = study_config(a, &target)?;
            let study = convergence_study(kind, &target, &cfg)?;
            let csv = residual_csv(&study)?;
            if let Some(p) = &a.csv {
                std::fs::write(p, &csv).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            }
            if a.table {
                out.write_all(csv.as_bytes())?;
            } else {
                let m = RunManifest::new("verify", input, serde_json::to_value(cfg).expect("serializes"), ts);
                out.write_all(render(&m, &study_summary(&study)).as_bytes())?;
            }
        }
        Command::Suite(a) => {
            let (outcomes, pass) = suite_report(&a.only)?;
            let m = RunManifest::new(
                "suite",
                json!({"criteria": outcomes.iter().map(|o| o.id).collect::<Vec<_>>()}),
                json!({
                    "seed": suite::SEED,
                    "algebra_samples": suite::ALGEBRA_SAMPLES,
                    "halfpic_samples": suite::HALFPIC_SAMPLES,
                    "study_points": suite::STUDY_POINTS,
                    "study_seed": suite::STUDY_SEED,
                }),
                ts,
            );
            let doc = json!({"pass": pass, "criteria": outcomes});
            let rendered = render(&m, &doc);
            if let Some(dir) = &a.out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("suite.json"), &rendered)?;
                if let Some(o) = outcomes.iter().find(|o| o.id == 10) {
                    let adj = RunManifest::new("suite", json!({"criteria": [10]}), m.config.clone(), ts);
                    std::fs::write(
                        dir.join("thm13_adjudication.json"),
                        render(&adj, &o.details["adjudication"]),
                    )?;
                }
            }
            if a.json {
                out.write_all(rendered.as_bytes())?;
            } else {
                for o in &outcomes {
                    writeln!(out, "criterion {:>2} [{}] {}: {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.name, o.summary)?;
                }
            }
            if !pass {
                return Err(Failure::Acceptance);
            }
        }
    }
    Ok(())
}

fn error_json(kind: &str, message: &str) -> String {
    json!({"error": kind, "message": message}).to_string()
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = writeln!(err, "{}", error_json("usage", e.to_string().trim()));
            return 2;
        }
    };
    let mut buf = Vec::new();
    let result = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut buf)),
            Err(e) => Err(Failure::Io(e.to_string())),
        },
        None => dispatch(&cli, &mut buf),
    };
    if let Err(e) = out.write_all(&buf).and_then(|_| out.flush()) {
        let _ = writeln!(err, "{}", error_json("io", &e.to_string()));
        return 2;
    }
    match result {
        Ok(()) => 0,
        Err(Failure::Acceptance) => 1,
        Err(Failure::Input(e)) => {
            let _ = writeln!(err, "{}", error_json(e.kind(), &e.to_string()));
            2
        }
        Err(Failure::Io(m)) => {
            let _ = writeln!(err, "{}", error_json("io", &m));
            2
        }
    }
}
