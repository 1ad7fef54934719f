//! Command-line front end for `geofusion`.
//!
//! Every subcommand writes its outputs as `<out>/<name>.<suffix>` and then a
//! single `<out>/<name>.manifest.json`.

pub mod manifest;
pub mod svg;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use geofusion::embedding::WindowIndexPlan;
use geofusion::geomtools::{classical_mds, compare, Comparison};
use geofusion::ingest::{load_motionsense, TrialSpec, DEFAULT_MAX_ROWS};
use geofusion::io;
use geofusion::orthofuse::{jde_matrix, jdl_matrix, per_sensor_matrices};
use geofusion::persistence::{rips_persistence_with, RipsOptions, Threshold, DEFAULT_SIMPLEX_BUDGET};
use geofusion::snf::{full_kernel, snf_fuse, to_similarity, SnfConfig, UpdateOrder};
use geofusion::synth::{make_experiment_with, ExperimentKind, TorusCurveParams};
use geofusion::types::{
    validate_dissimilarity, Boundary, DelayParams, DissimilarityMatrix, MultiTimeSeries, ProjectionScope, Seed,
    SquareMatrix,
};

use manifest::Recorder;

#[derive(Debug, Parser)]
#[command(name = "geofusion", version, about = "Fuse multi-sensor time series into one geometry")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic torus-curve experiment.
    #[command(args_override_self = true)]
    Synth(SynthArgs),
    /// Fuse the channels of a time series into one matrix.
    #[command(args_override_self = true)]
    Fuse(FuseArgs),
    /// Score a fused matrix against a ground-truth distance matrix.
    #[command(args_override_self = true)]
    Eval(EvalArgs),
    /// Classical multidimensional scaling of a distance matrix.
    #[command(args_override_self = true)]
    Mds(MdsArgs),
    /// Vietoris-Rips persistence diagram of a distance matrix.
    #[command(args_override_self = true)]
    Persistence(PersistenceArgs),
    /// Extract channels from a MotionSense DeviceMotion trial.
    #[command(args_override_self = true)]
    Ingest(IngestArgs),
    /// Run a whole experiment: data, all fusions, scores and figures.
    #[command(args_override_self = true)]
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// File name stem for outputs.
    #[arg(long)]
    pub name: Option<String>,
    /// Suppress progress output.
    #[arg(long)]
    pub quiet: bool,
    /// `key = value` file of flags; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Jde,
    Jdl,
    Snf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    /// Project only still-unmarked vectors.
    Unmarked,
    /// Project every other vector, marked or not.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    Truncate,
    Wrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Distance,
    Similarity,
}

impl MatrixKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixKind::Distance => "distance",
            MatrixKind::Similarity => "similarity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Exp1,
    Exp2,
    Exp3,
    Motionsense,
}

#[derive(Debug, Clone, Args)]
pub struct DelayArgs {
    /// Delay between window entries.
    #[arg(long, default_value_t = 1)]
    pub tau: usize,
    /// Window length.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Orthogonalization strength in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = ScopeArg::Unmarked)]
    pub scope: ScopeArg,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Truncate)]
    pub boundary: BoundaryArg,
}

impl DelayArgs {
    pub fn params(&self) -> Result<DelayParams> {
        Ok(DelayParams::new(self.tau, self.d, self.lambda)?
            .with_scope(match self.scope {
                ScopeArg::Unmarked => ProjectionScope::UnmarkedOnly,
                ScopeArg::All => ProjectionScope::AllVectors,
            })
            .with_boundary(match self.boundary {
                BoundaryArg::Truncate => Boundary::Truncate,
                BoundaryArg::Wrap => Boundary::Wrap,
            }))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SnfArgs {
    /// Kernel bandwidth scale.
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Neighbourhood fraction in (0, 1].
    #[arg(long, default_value_t = 0.1)]
    pub kappa: f64,
    #[arg(long, default_value_t = 20)]
    pub iterations: usize,
    /// Update every view from the previous step instead of in ascending order.
    #[arg(long)]
    pub synchronous: bool,
    /// Symmetrize each view after every step.
    #[arg(long)]
    pub symmetrize: bool,
}

impl SnfArgs {
    pub fn config(&self) -> Result<SnfConfig> {
        let cfg = SnfConfig {
            beta: self.beta,
            kappa: self.kappa,
            iterations: self.iterations,
            symmetrize_each_step: self.symmetrize,
            update_order: if self.synchronous { UpdateOrder::Synchronous } else { UpdateOrder::Sequential },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct PersistenceOpts {
    /// Highest homology dimension (0, 1 or 2).
    #[arg(long, default_value_t = 1)]
    pub max_dim: usize,
    /// `enclosing` or a number; dimension 2 needs a number.
    #[arg(long, value_parser = parse_threshold, default_value = "enclosing")]
    pub threshold: Threshold,
    /// Maximum number of simplices.
    #[arg(long, default_value_t = DEFAULT_SIMPLEX_BUDGET)]
    pub budget: usize,
}

impl PersistenceOpts {
    fn options(&self) -> RipsOptions {
        RipsOptions { max_dim: self.max_dim, threshold: self.threshold, simplex_budget: self.budget }
    }
}

fn parse_threshold(s: &str) -> std::result::Result<Threshold, String> {
    if s == "enclosing" {
        return Ok(Threshold::Enclosing);
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite() && *v >= 0.0)
        .map(Threshold::Value)
        .ok_or_else(|| format!("expected `enclosing` or a non-negative number, got `{s}`"))
}

fn threshold_json(t: Threshold) -> Value {
    match t {
        Threshold::Enclosing => json!("enclosing"),
        Threshold::Value(v) => json!(v),
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    /// 1: projections, 2: basepoint distances, 3: two of each.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub kind: u8,
    /// Number of curve samples.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FuseArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Channels CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub delay: DelayArgs,
    #[command(flatten)]
    pub snf: SnfArgs,
    /// Give jdl and snf per-sensor windowed distances instead of raw sample distances.
    #[arg(long)]
    pub windowed: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Fused matrix CSV.
    #[arg(long)]
    pub fused: PathBuf,
    /// Ground-truth distance matrix CSV.
    #[arg(long)]
    pub truth: PathBuf,
    /// Matrix kind; read from the fused matrix's manifest when omitted.
    #[arg(long, value_enum)]
    pub kind: Option<MatrixKind>,
    /// Method label for the report; read from the manifest when omitted.
    #[arg(long)]
    pub method: Option<String>,
    #[command(flatten)]
    pub snf: SnfArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MdsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Distance matrix CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Embedding dimension.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PersistenceArgs {
    #[command(flatten)]
    pub common: Common,
    /// Distance matrix CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub opts: PersistenceOpts,
}

#[derive(Debug, Clone, Args)]
pub struct TrialArgs {
    /// A single DeviceMotion CSV file.
    #[arg(long, conflicts_with = "data_root")]
    pub file: Option<PathBuf>,
    /// Extracted dataset root holding `A_DeviceMotion_data/`.
    #[arg(long)]
    pub data_root: Option<PathBuf>,
    #[arg(long, default_value = "wlk_8")]
    pub activity: String,
    #[arg(long, default_value_t = 1)]
    pub subject: u32,
    /// Number of leading rows to keep.
    #[arg(long, default_value_t = DEFAULT_MAX_ROWS)]
    pub rows: usize,
    /// Standardize each channel to mean 0 and standard deviation 1.
    #[arg(long)]
    pub standardize: bool,
}

impl TrialArgs {
    fn spec(&self) -> TrialSpec {
        TrialSpec { max_rows: self.rows, standardize: self.standardize, ..TrialSpec::new(&self.activity, self.subject) }
    }

    fn path(&self) -> Result<PathBuf> {
        match (&self.file, &self.data_root) {
            (Some(f), _) => Ok(f.clone()),
            (None, Some(root)) => Ok(self.spec().path_in(root)),
            (None, None) => bail!("a MotionSense trial needs --file or --data-root"),
        }
    }

    fn load(&self) -> Result<(PathBuf, MultiTimeSeries)> {
        let path = self.path()?;
        let ts = load_motionsense(&path, &self.spec()).with_context(|| format!("loading {}", path.display()))?;
        Ok((path, ts))
    }

    fn record(&self, rec: &mut Recorder) {
        rec.param("activity", self.activity.clone());
        rec.param("subject", self.subject);
        rec.param("rows", self.rows);
        rec.param("standardize", self.standardize);
    }
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub trial: TrialArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(value_enum)]
    pub experiment: Experiment,
    #[arg(long, default_value_t = 1)]
    pub tau: usize,
    #[command(flatten)]
    pub snf: SnfArgs,
    #[command(flatten)]
    pub trial: TrialArgs,
    #[command(flatten)]
    pub persistence: PersistenceOpts,
    /// MDS embedding dimension for the motionsense figures.
    #[arg(long, default_value_t = 3)]
    pub mds_dim: usize,
}

/// Splices flags from a `--config` file in front of the command-line flags.
///
/// Each non-blank, non-`#` line is `key = value`; `key = true` becomes a bare
/// `--key`, `key = false` is dropped. The spliced flags come right after the
/// subcommand name, so later command-line occurrences override them.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {}", path.display()))?;
    let mut extra: Vec<OsString> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", path.display(), n + 1))?;
        let key = key.trim().trim_start_matches("--");
        match value.trim() {
            "true" => extra.push(format!("--{key}").into()),
            "false" => {}
            v => {
                extra.push(format!("--{key}").into());
                extra.push(v.into());
            }
        }
    }
    let sub = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 2)
        .unwrap_or(args.len());
    let mut out = args[..sub.min(args.len())].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[sub.min(args.len())..]);
    Ok(out)
}

fn say(common: &Common, msg: impl AsRef<str>) {
    if !common.quiet {
        println!("{}", msg.as_ref());
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a).map(|_| ()),
        Command::Fuse(a) => cmd_fuse(&a).map(|_| ()),
        Command::Eval(a) => cmd_eval(&a).map(|_| ()),
        Command::Mds(a) => cmd_mds(&a).map(|_| ()),
        Command::Persistence(a) => cmd_persistence(&a).map(|_| ()),
        Command::Ingest(a) => cmd_ingest(&a).map(|_| ()),
        Command::Pipeline(a) => cmd_pipeline(&a).map(|_| ()),
    }
}

fn recorder(sub: &str, common: &Common, default_stem: &str) -> Result<Recorder> {
    let stem = common.name.clone().unwrap_or_else(|| default_stem.to_string());
    Recorder::new(sub, common.seed, &common.out, &stem, common.config.as_deref())
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into())
}

fn save_matrix_figure(rec: &mut Recorder, label: &str, m: &SquareMatrix, kind: MatrixKind) -> Result<()> {
    let prefix = if label.is_empty() { String::new() } else { format!("{label}.") };
    let csv = rec.path(&format!("{prefix}csv"));
    io::save_matrix(&csv, m)?;
    let map = svg::heatmap(m, if label.is_empty() { kind.as_str() } else { label });
    let fig = rec.path(&format!("{prefix}svg"));
    std::fs::write(&fig, &map.svg).with_context(|| format!("writing {}", fig.display()))?;
    rec.output(&csv, "matrix", Some(kind.as_str()), None);
    rec.output(&fig, "heatmap", None, Some([map.scale_min, map.scale_max]));
    Ok(())
}

fn delay_json(p: &DelayParams) -> Value {
    json!({
        "tau": p.tau(),
        "d": p.d(),
        "lambda": p.lambda(),
        "scope": match p.scope() { ProjectionScope::UnmarkedOnly => "unmarked", ProjectionScope::AllVectors => "all" },
        "boundary": match p.boundary() { Boundary::Truncate => "truncate", Boundary::Wrap => "wrap" },
    })
}

fn snf_json(c: &SnfConfig) -> Value {
    json!({
        "beta": c.beta,
        "kappa": c.kappa,
        "iterations": c.iterations,
        "symmetrize_each_step": c.symmetrize_each_step,
        "update_order": match c.update_order { UpdateOrder::Sequential => "sequential", UpdateOrder::Synchronous => "synchronous" },
    })
}

fn extend(rec: &mut Recorder, v: Value) {
    if let Value::Object(m) = v {
        rec.manifest.params.extend(m);
    }
}

pub fn cmd_synth(a: &SynthArgs) -> Result<PathBuf> {
    let kind = ExperimentKind::from_index(a.kind)?;
    let mut rec = recorder("synth", &a.common, &format!("exp{}", a.kind))?;
    let curve = TorusCurveParams { samples: a.samples, ..Default::default() };
    let e = make_experiment_with(kind, Seed(a.common.seed), &curve)?;
    rec.param("kind", a.kind);
    rec.param("samples", a.samples);
    rec.param(
        "sensors",
        e.sensors.iter().map(|s| json!({"type": s.label(), "vector": s.vector()})).collect::<Vec<_>>(),
    );
    let ch = rec.path("channels.csv");
    io::save_channels(&ch, &e.series)?;
    rec.output(&ch, "channels", None, None);
    let pts = rec.path("points.csv");
    io::save_points(&pts, &e.points)?;
    rec.output(&pts, "points", None, None);
    let truth = rec.path("truth.csv");
    io::save_matrix(&truth, e.truth.matrix())?;
    rec.output(&truth, "truth", Some("distance"), None);
    let manifest = rec.finish()?;
    say(&a.common, format!("wrote {}", manifest.display()));
    Ok(manifest)
}

/// Window start times used by every method for one parameter set.
fn fusion_starts(ts: &MultiTimeSeries, delay: &DelayParams) -> Result<Vec<usize>> {
    Ok(WindowIndexPlan::new(delay, ts.len())?.starts())
}

pub fn fuse(
    ts: &MultiTimeSeries,
    method: Method,
    delay: &DelayParams,
    snf: &SnfConfig,
    windowed: bool,
) -> Result<(SquareMatrix, MatrixKind)> {
    let starts = fusion_starts(ts, delay)?;
    let views = || per_sensor_matrices(ts, &starts, windowed.then_some(delay));
    Ok(match method {
        Method::Jde => (jde_matrix(ts, delay, &starts)?.matrix().clone(), MatrixKind::Distance),
        Method::Jdl => (jdl_matrix(&views()?)?.matrix().clone(), MatrixKind::Distance),
        Method::Snf => (snf_fuse(&views()?, snf)?.into_matrix(), MatrixKind::Similarity),
    })
}

pub fn method_label(method: Method, delay: &DelayParams) -> String {
    match method {
        Method::Jde => format!("jde_d{}_l{}", delay.d(), delay.lambda()),
        Method::Jdl => "jdl".into(),
        Method::Snf => "snf".into(),
    }
}

pub fn cmd_fuse(a: &FuseArgs) -> Result<PathBuf> {
    let delay = a.delay.params()?;
    let snf = a.snf.config()?;
    let ts = io::load_channels(&a.input).with_context(|| format!("loading {}", a.input.display()))?;
    let mut rec = recorder("fuse", &a.common, &method_label(a.method, &delay))?;
    rec.input(&a.input);
    rec.param("method", format!("{:?}", a.method).to_lowercase());
    extend(&mut rec, delay_json(&delay));
    if a.method == Method::Snf {
        extend(&mut rec, snf_json(&snf));
    }
    rec.param("windowed", a.windowed);
    let (m, kind) = fuse(&ts, a.method, &delay, &snf, a.windowed)?;
    save_matrix_figure(&mut rec, "", &m, kind)?;
    let manifest = rec.finish()?;
    say(&a.common, format!("wrote {}", manifest.display()));
    Ok(manifest)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EvalReport {
    pub method: String,
    pub params: Map<String, Value>,
    pub scale_aligned_error: f64,
    pub pearson: f64,
    pub spearman: f64,
    pub negative_mass: Option<f64>,
}

/// Scores against the truth; similarities are compared with the full kernel
/// of the truth's own affinity.
pub fn evaluate(
    fused: &SquareMatrix,
    kind: MatrixKind,
    truth: &DissimilarityMatrix,
    snf: &SnfConfig,
) -> Result<(Comparison, Option<f64>)> {
    match kind {
        MatrixKind::Distance => {
            let d = validate_dissimilarity(fused.clone())?;
            let neg = classical_mds(&d, 3.min(d.n().saturating_sub(1)).max(1))?.negative_mass;
            Ok((compare(d.matrix(), truth.matrix())?, Some(neg)))
        }
        MatrixKind::Similarity => {
            let reference = full_kernel(&to_similarity(truth, snf.beta, snf.kappa))?;
            Ok((compare(fused, reference.matrix())?, None))
        }
    }
}

fn report(method: &str, params: Map<String, Value>, c: Comparison, neg: Option<f64>) -> EvalReport {
    EvalReport {
        method: method.to_string(),
        params,
        scale_aligned_error: c.scale_aligned_error,
        pearson: c.pearson,
        spearman: c.spearman,
        negative_mass: neg,
    }
}

pub fn cmd_eval(a: &EvalArgs) -> Result<PathBuf> {
    let snf = a.snf.config()?;
    let fused = io::load_matrix(&a.fused).with_context(|| format!("loading {}", a.fused.display()))?;
    let truth = validate_dissimilarity(io::load_matrix(&a.truth).with_context(|| format!("loading {}", a.truth.display()))?)?;
    let found = manifest::find_entry(&a.fused);
    let kind = match (a.kind, found.as_ref().and_then(|(_, o)| o.kind.as_deref())) {
        (Some(k), _) => k,
        (None, Some("similarity")) => MatrixKind::Similarity,
        _ => MatrixKind::Distance,
    };
    let (method, mut params) = match &found {
        Some((m, _)) => (
            m.params.get("method").and_then(Value::as_str).unwrap_or("unknown").to_string(),
            m.params.clone(),
        ),
        None => ("unknown".to_string(), Map::new()),
    };
    let method = a.method.clone().unwrap_or(method);
    params.insert("kind".into(), json!(kind.as_str()));
    if kind == MatrixKind::Similarity {
        params.insert("reference_beta".into(), json!(snf.beta));
        params.insert("reference_kappa".into(), json!(snf.kappa));
    }
    let (c, neg) = evaluate(&fused, kind, &truth, &snf)?;
    let mut rec = recorder("eval", &a.common, &format!("{}.eval", file_stem(&a.fused)))?;
    rec.input(&a.fused);
    rec.input(&a.truth);
    rec.param("kind", kind.as_str());
    rec.param("method", method.clone());
    let r = report(&method, params, c, neg);
    rec.write_text("json", "report", &(serde_json::to_string_pretty(&r)? + "\n"))?;
    let manifest = rec.finish()?;
    say(&a.common, format!("pearson {:.4}  spearman {:.4}  error {:.4}", r.pearson, r.spearman, r.scale_aligned_error));
    Ok(manifest)
}

fn load_distance(path: &Path) -> Result<DissimilarityMatrix> {
    let m = io::load_matrix(path).with_context(|| format!("loading {}", path.display()))?;
    validate_dissimilarity(m).with_context(|| format!("{} is not a distance matrix", path.display()))
}

fn mds_outputs(rec: &mut Recorder, label: &str, d: &DissimilarityMatrix, k: usize) -> Result<()> {
    let res = classical_mds(d, k)?;
    let prefix = if label.is_empty() { String::new() } else { format!("{label}.") };
    let csv = rec.path(&format!("{prefix}csv"));
    io::save_coordinates(&csv, &res.coordinates)?;
    rec.output(&csv, "mds_coordinates", None, None);
    rec.write_text(&format!("{prefix}svg"), "mds_scatter", &svg::scatter(&res.coordinates, label))?;
    rec.param(&format!("{prefix}eigenvalues").replace('.', "_"), res.eigenvalues.clone());
    rec.param(&format!("{prefix}negative_mass").replace('.', "_"), res.negative_mass);
    Ok(())
}

pub fn cmd_mds(a: &MdsArgs) -> Result<PathBuf> {
    let d = load_distance(&a.input)?;
    let mut rec = recorder("mds", &a.common, &format!("{}.mds", file_stem(&a.input)))?;
    rec.input(&a.input);
    rec.param("k", a.k);
    mds_outputs(&mut rec, "", &d, a.k)?;
    let manifest = rec.finish()?;
    say(&a.common, format!("wrote {}", manifest.display()));
    Ok(manifest)
}

fn persistence_outputs(rec: &mut Recorder, label: &str, d: &DissimilarityMatrix, opts: &RipsOptions) -> Result<()> {
    let dg = rips_persistence_with(d, opts)?;
    let prefix = if label.is_empty() { String::new() } else { format!("{label}.") };
    let csv = rec.path(&format!("{prefix}csv"));
    io::save_diagram(&csv, &dg)?;
    rec.output(&csv, "diagram", None, None);
    rec.write_text(&format!("{prefix}svg"), "diagram_plot", &svg::diagram(&dg.points, label))?;
    Ok(())
}

pub fn cmd_persistence(a: &PersistenceArgs) -> Result<PathBuf> {
    let d = load_distance(&a.input)?;
    let mut rec = recorder("persistence", &a.common, &format!("{}.diagram", file_stem(&a.input)))?;
    rec.input(&a.input);
    rec.param("max_dim", a.opts.max_dim);
    rec.param("threshold", threshold_json(a.opts.threshold));
    rec.param("budget", a.opts.budget);
    persistence_outputs(&mut rec, "", &d, &a.opts.options())?;
    let manifest = rec.finish()?;
    say(&a.common, format!("wrote {}", manifest.display()));
    Ok(manifest)
}

pub fn cmd_ingest(a: &IngestArgs) -> Result<PathBuf> {
    let (path, ts) = a.trial.load()?;
    let default = match &a.trial.file {
        Some(f) => file_stem(f),
        None => format!("{}_sub{}", a.trial.activity, a.trial.subject),
    };
    let mut rec = recorder("ingest", &a.common, &default)?;
    rec.input(&path);
    a.trial.record(&mut rec);
    let ch = rec.path("channels.csv");
    io::save_channels(&ch, &ts)?;
    rec.output(&ch, "channels", None, None);
    let manifest = rec.finish()?;
    say(&a.common, format!("wrote {}", manifest.display()));
    Ok(manifest)
}

struct Job {
    label: String,
    method: Method,
    delay: DelayParams,
}

fn run_jobs(ts: &MultiTimeSeries, jobs: &[Job], snf: &SnfConfig) -> Result<Vec<(SquareMatrix, MatrixKind)>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|j| s.spawn(move || fuse(ts, j.method, &j.delay, snf, false).with_context(|| j.label.clone())))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().map_err(|_| anyhow!("fusion worker panicked"))?)
            .collect()
    })
}

pub fn cmd_pipeline(a: &PipelineArgs) -> Result<PathBuf> {
    let name = format!("{:?}", a.experiment).to_lowercase();
    let mut rec = recorder("pipeline", &a.common, &name)?;
    rec.param("experiment", name.clone());
    rec.param("tau", a.tau);
    let snf = a.snf.config()?;
    extend(&mut rec, json!({ "snf": snf_json(&snf) }));
    let lam = |d: usize, l: f64, b: Boundary| -> Result<DelayParams> {
        Ok(DelayParams::new(a.tau, d, l)?.with_boundary(b))
    };
    match a.experiment {
        Experiment::Exp1 | Experiment::Exp2 | Experiment::Exp3 => {
            let kind = ExperimentKind::from_index(match a.experiment {
                Experiment::Exp1 => 1,
                Experiment::Exp2 => 2,
                _ => 3,
            })?;
            let e = make_experiment_with(kind, Seed(a.common.seed), &TorusCurveParams::default())?;
            let ch = rec.path("channels.csv");
            io::save_channels(&ch, &e.series)?;
            rec.output(&ch, "channels", None, None);
            let pts = rec.path("points.csv");
            io::save_points(&pts, &e.points)?;
            rec.output(&pts, "points", None, None);
            save_matrix_figure(&mut rec, "truth", e.truth.matrix(), MatrixKind::Distance)?;
            let raw = lam(1, 0.0, Boundary::Wrap)?;
            let mut jobs = vec![
                Job { label: "jdl".into(), method: Method::Jdl, delay: raw },
                Job { label: "snf".into(), method: Method::Snf, delay: raw },
            ];
            for d in [10, 20] {
                for l in [0.0, 1.0] {
                    let delay = lam(d, l, Boundary::Wrap)?;
                    jobs.push(Job { label: method_label(Method::Jde, &delay), method: Method::Jde, delay });
                }
            }
            let fused = run_jobs(&e.series, &jobs, &snf)?;
            let mut reports = Vec::new();
            for (job, (m, kind)) in jobs.iter().zip(&fused) {
                save_matrix_figure(&mut rec, &job.label, m, *kind)?;
                let (c, neg) = evaluate(m, *kind, &e.truth, &snf)?;
                let params = match job.method {
                    Method::Snf => snf_json(&snf),
                    _ => delay_json(&job.delay),
                };
                let params = if let Value::Object(p) = params { p } else { Map::new() };
                reports.push(report(&job.label, params, c, neg));
            }
            for r in &reports {
                say(&a.common, format!("{:<12} pearson {:.4}  spearman {:.4}  error {:.4}", r.method, r.pearson, r.spearman, r.scale_aligned_error));
            }
            rec.write_text("report.json", "report", &(serde_json::to_string_pretty(&reports)? + "\n"))?;
        }
        Experiment::Motionsense => {
            let (path, ts) = a.trial.load()?;
            rec.input(&path);
            a.trial.record(&mut rec);
            rec.param("max_dim", a.persistence.max_dim);
            rec.param("threshold", threshold_json(a.persistence.threshold));
            rec.param("mds_dim", a.mds_dim);
            let ch = rec.path("channels.csv");
            io::save_channels(&ch, &ts)?;
            rec.output(&ch, "channels", None, None);
            let mut jobs = Vec::new();
            for l in [0.0, 1.0] {
                let delay = lam(20, l, Boundary::Truncate)?;
                jobs.push(Job { label: method_label(Method::Jde, &delay), method: Method::Jde, delay });
            }
            // raw distances at the same 181 start times
            jobs.insert(0, Job { label: "jdl".into(), method: Method::Jdl, delay: lam(20, 0.0, Boundary::Truncate)? });
            let fused = run_jobs(&ts, &jobs, &snf)?;
            let opts = a.persistence.options();
            for (job, (m, kind)) in jobs.iter().zip(&fused) {
                save_matrix_figure(&mut rec, &job.label, m, *kind)?;
                let d = validate_dissimilarity(m.clone())?;
                mds_outputs(&mut rec, &format!("{}.mds", job.label), &d, a.mds_dim)?;
                persistence_outputs(&mut rec, &format!("{}.diagram", job.label), &d, &opts)
                    .with_context(|| format!("persistence of {}", job.label))?;
                say(&a.common, format!("{}: {}x{}", job.label, m.n(), m.n()));
            }
        }
    }
    let manifest = rec.finish()?;
    say(&a.common, format!("wrote {}", manifest.display()));
    Ok(manifest)
}
