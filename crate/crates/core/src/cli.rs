//! Command-line front end. Everything here is reachable through [`run`],
//! which takes the argument list and output sinks and returns the exit code,
//! so the binary stays a one-liner and the commands are testable in-process.
//!
//! Exit codes: 0 ok, 1 usage or schema error, 2 indeterminate classification,
//! 3 root-system validation failure, 4 runtime failure.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::classifier::{self, FaceVerdict};
use crate::error::{Error, Result};
use crate::integrator::{self, Scheme, SimConfig, Trajectory};
use crate::models::{ModelConfig, PolyhedralModel};
use crate::montecarlo::{self, EnsembleReport};
use crate::rootsys::{self, Family, RootSystem};

/// Version stamped into every emitted document.
pub const FORMAT_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

const DEFAULT_DT: f64 = 1e-4;
const DEFAULT_HORIZON: f64 = 4.0;
const DEFAULT_ENSEMBLE: u64 = 500;

#[derive(Debug, Parser)]
#[command(name = "chamber", version, about = "Reflected and repelled Brownian motion in convex polyhedra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify every face as Weak, Middle or Strong.
    Classify(CommonArgs),
    /// Simulate trajectories and write them as CSV or JSON.
    Simulate(CommonArgs),
    /// Run an ensemble and compare hit fractions with the classification.
    Ensemble(CommonArgs),
    /// Check the root-system axioms for a standard family or a root file.
    ValidateRoots(RootArgs),
    /// List the model kinds and their parameters.
    ListModels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of trajectories.
    #[arg(long)]
    pub n: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long = "hit-eps")]
    pub hit_eps: Option<f64>,
    #[arg(long = "edge-eps")]
    pub edge_eps: Option<f64>,
    #[arg(long = "escape-radius")]
    pub escape_radius: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RootArgs {
    /// A, B, D or I2.
    #[arg(long)]
    pub family: Option<String>,
    /// Rank, or `m` for I2.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Multiplicities per orbit, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<f64>,
    /// Root system JSON file, instead of a standard family.
    #[arg(long)]
    pub roots: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Simulation settings in a run configuration; command-line flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub hit_eps: Option<f64>,
    #[serde(default)]
    pub edge_eps: Option<f64>,
    #[serde(default)]
    pub escape_radius: Option<f64>,
    #[serde(default)]
    pub record_stride: Option<u64>,
    #[serde(default)]
    pub occupation_levels: Option<Vec<f64>>,
}

/// Run configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub format_version: Option<u32>,
    pub model: ModelConfig,
    #[serde(default)]
    pub sim: SimSettings,
    #[serde(default)]
    pub n: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        if let Some(v) = cfg.format_version {
            if v != FORMAT_VERSION {
                return Err(Error::Config(format!("unsupported format_version {v}, expected {FORMAT_VERSION}")));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Folds command-line overrides in.
    pub fn apply(&mut self, a: &CommonArgs) {
        let s = &mut self.sim;
        s.seed = a.seed.or(s.seed);
        s.dt = a.dt.or(s.dt);
        s.horizon = a.horizon.or(s.horizon);
        s.hit_eps = a.hit_eps.or(s.hit_eps);
        s.edge_eps = a.edge_eps.or(s.edge_eps);
        s.escape_radius = a.escape_radius.or(s.escape_radius);
        self.n = a.n.or(self.n);
        self.out = a.out.clone().or(self.out.take());
        self.format = a.format.or(self.format);
    }

    /// Simulation config; the seed must be given explicitly.
    pub fn sim_config(&self) -> Result<SimConfig> {
        let s = &self.sim;
        let seed = s.seed.ok_or_else(|| Error::Config("a seed is required (--seed or sim.seed)".into()))?;
        let mut c = SimConfig::new(s.dt.unwrap_or(DEFAULT_DT), s.horizon.unwrap_or(DEFAULT_HORIZON), seed);
        if let Some(v) = s.scheme {
            c.scheme = v;
        }
        if let Some(v) = s.hit_eps {
            c.hit_eps = v;
        }
        if let Some(v) = s.edge_eps {
            c.edge_eps = v;
        }
        c.escape_radius = s.escape_radius;
        if let Some(v) = s.record_stride {
            c.record_stride = v;
        }
        if let Some(v) = &s.occupation_levels {
            c.occupation_levels = v.clone();
        }
        c.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(c)
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Indeterminate { .. } => EXIT_INDETERMINATE,
        Error::NonConvergence { .. } | Error::NonFiniteState { .. } | Error::Trajectory { .. } | Error::Io(_) => {
            EXIT_RUNTIME
        }
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Classify(a) => cmd_classify(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Ensemble(a) => cmd_ensemble(a, out),
        Command::ValidateRoots(a) => cmd_validate_roots(a, out),
        Command::ListModels => cmd_list_models(out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(a: &CommonArgs) -> Result<RunConfig> {
    let path = a.config.as_ref().ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    cfg.apply(a);
    Ok(cfg)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn emit<W: Write + ?Sized>(out: &mut W, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn classification_document(cfg: &RunConfig, model: &PolyhedralModel, rows: &[FaceVerdict]) -> serde_json::Value {
    json!({
        "format_version": FORMAT_VERSION,
        "config": cfg,
        "model": model.name(),
        "faces": rows,
    })
}

fn classification_table(model: &PolyhedralModel, rows: &[FaceVerdict]) -> String {
    let mut s = format!("model {}\n", model.name());
    let _ = writeln!(s, "{:<4} {:<16} {:<8} {:>8} {:<11} prediction", "face", "label", "class", "gamma", "method");
    for r in rows {
        let gamma = r.classification.exponent.map_or("-".to_string(), |g| format!("{g:.4}"));
        let method = format!("{:?}", r.classification.method).to_lowercase();
        let _ = writeln!(
            s,
            "{:<4} {:<16} {:<8} {:>8} {:<11} {}",
            r.face, r.label, r.classification.class, gamma, method, r.prediction
        );
        if let Some(n) = &r.note {
            let _ = writeln!(s, "     note: {n}");
        }
    }
    s
}

pub fn cmd_classify(a: &CommonArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(a)?;
    let model = cfg.model.build()?;
    let rows = classifier::classify_model(&model)?;
    let doc = classification_document(&cfg, &model, &rows);
    match cfg.format {
        Some(OutputFormat::Json) => emit(out, &to_json(&doc))?,
        _ => emit(out, &classification_table(&model, &rows))?,
    }
    if let Some(dir) = &cfg.out {
        write_file(dir, "classification.json", &to_json(&doc))?;
    }
    Ok(EXIT_OK)
}

/// Trajectory as CSV: a `#` header line carrying the config, then columns
/// `t, x_1..x_d, gap_1..gap_m, L_1..L_m`.
pub fn trajectory_csv(cfg_json: &str, model: &PolyhedralModel, tr: &Trajectory) -> String {
    let d = model.dimension();
    let m = model.num_faces();
    let mut s = format!("# chamber trajectory format_version={FORMAT_VERSION} index={} config={cfg_json}\n", tr.index);
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=d).map(|k| format!("x_{k}")));
    cols.extend((1..=m).map(|k| format!("gap_{k}")));
    cols.extend((1..=m).map(|k| format!("L_{k}")));
    s.push_str(&cols.join(","));
    s.push('\n');
    for r in &tr.records {
        let mut row = vec![format!("{}", r.t)];
        row.extend(r.x.iter().map(|v| format!("{v}")));
        row.extend(r.gaps.iter().map(|v| format!("{v}")));
        row.extend(r.local_time.iter().map(|v| format!("{v}")));
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct TrajectorySummary<'a> {
    index: u64,
    steps: u64,
    final_time: f64,
    final_state: &'a [f64],
    termination: integrator::Termination,
    min_gap: &'a [f64],
    local_time: &'a [f64],
    first_hit: &'a [Option<integrator::FaceHit>],
    subset_min_distance: &'a [f64],
    subset_first_hit: &'a [Option<f64>],
    singular_drift_sum: f64,
    retries: u64,
}

impl<'a> From<&'a Trajectory> for TrajectorySummary<'a> {
    fn from(t: &'a Trajectory) -> Self {
        Self {
            index: t.index,
            steps: t.steps,
            final_time: t.final_time,
            final_state: &t.final_state,
            termination: t.termination,
            min_gap: &t.min_gap,
            local_time: &t.local_time,
            first_hit: &t.first_hit,
            subset_min_distance: &t.subset_min_distance,
            subset_first_hit: &t.subset_first_hit,
            singular_drift_sum: t.singular_drift_sum,
            retries: t.retries,
        }
    }
}

pub fn cmd_simulate(a: &CommonArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(a)?;
    let model = cfg.model.build()?;
    let sim = cfg.sim_config()?;
    let n = cfg.n.unwrap_or(1);
    if n == 0 {
        return Err(Error::Config("--n must be at least 1".into()));
    }
    let format = cfg.format.unwrap_or(OutputFormat::Csv);
    let cfg_json = serde_json::to_string(&cfg)?;
    let mut trajectories = Vec::new();
    for i in 0..n {
        let tr = integrator::simulate_indexed(&model, &sim, i)
            .map_err(|e| Error::Trajectory { index: i, seed: sim.seed, source: Box::new(e) })?;
        trajectories.push(tr);
    }
    let summary = json!({
        "format_version": FORMAT_VERSION,
        "config": cfg,
        "model": model.name(),
        "trajectories": trajectories.iter().map(TrajectorySummary::from).collect::<Vec<_>>(),
    });
    match &cfg.out {
        Some(dir) => {
            for tr in &trajectories {
                match format {
                    OutputFormat::Csv => {
                        write_file(dir, &format!("trajectory_{}.csv", tr.index), &trajectory_csv(&cfg_json, &model, tr))?
                    }
                    OutputFormat::Json => write_file(
                        dir,
                        &format!("trajectory_{}.json", tr.index),
                        &to_json(&json!({"format_version": FORMAT_VERSION, "config": cfg, "trajectory": tr})),
                    )?,
                }
            }
            write_file(dir, "summary.json", &to_json(&summary))?;
            let _ = writeln!(out, "wrote {} trajectories to {}", n, dir.display());
        }
        None => match format {
            OutputFormat::Csv => {
                for tr in &trajectories {
                    emit(out, &trajectory_csv(&cfg_json, &model, tr))?;
                }
            }
            OutputFormat::Json => emit(out, &to_json(&summary))?,
        },
    }
    Ok(EXIT_OK)
}

/// Log-spaced thresholds used for hit-fraction curves.
pub fn eps_grid() -> Vec<f64> {
    (0..=12).map(|k| 10f64.powf(-0.5 * k as f64)).collect()
}

fn hit_curve_csv(cfg_json: &str, model: &PolyhedralModel, trs: &[Trajectory]) -> String {
    let mut s = format!("# chamber hit-fraction curve format_version={FORMAT_VERSION} config={cfg_json}\n");
    let mut cols = vec!["eps".to_string()];
    cols.extend(model.faces().iter().enumerate().map(|(i, _)| format!("face_{}", i + 1)));
    s.push_str(&cols.join(","));
    s.push('\n');
    for eps in eps_grid() {
        let mut row = vec![format!("{eps:e}")];
        row.extend((0..model.num_faces()).map(|i| format!("{}", montecarlo::hit_fraction_at(trs, i, eps))));
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn min_gap_histogram_csv(cfg_json: &str, model: &PolyhedralModel, trs: &[Trajectory]) -> String {
    let mut s = format!("# chamber min-gap histogram format_version={FORMAT_VERSION} config={cfg_json}\n");
    s.push_str("face,bin_lo,bin_hi,count\n");
    let edges: Vec<f64> = std::iter::once(0.0).chain((-12..=2).map(|k| 10f64.powi(k))).collect();
    for i in 0..model.num_faces() {
        for w in edges.windows(2) {
            let c = trs.iter().filter(|t| t.min_gap[i] >= w[0] && t.min_gap[i] < w[1]).count();
            let _ = writeln!(s, "{},{:e},{:e},{}", i + 1, w[0], w[1], c);
        }
        let last = edges[edges.len() - 1];
        let c = trs.iter().filter(|t| t.min_gap[i] >= last || t.min_gap[i] < 0.0).count();
        let _ = writeln!(s, "{},{:e},inf,{}", i + 1, last, c);
    }
    s
}

pub fn cmd_ensemble(a: &CommonArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(a)?;
    let n = cfg.n.unwrap_or(DEFAULT_ENSEMBLE);
    if n == 0 {
        return Err(Error::Config("--n must be at least 1".into()));
    }
    let model = cfg.model.build()?;
    let sim = cfg.sim_config()?;
    let start = std::time::Instant::now();
    let trs = montecarlo::run_trajectories(&model, &sim, n)?;
    let mut report = EnsembleReport::from_trajectories(&model, &sim, &trs);
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    let verdicts = montecarlo::verdicts(&model, &report)?;
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "config": cfg,
        "report": report,
        "verdicts": verdicts,
    });

    let mut text = format!("model {}  N={}  T={}  dt={}  hit_eps={}\n", model.name(), n, sim.horizon, sim.dt, sim.hit_eps);
    for (f, v) in report.faces.iter().zip(&verdicts) {
        let _ = writeln!(
            text,
            "face {:<3} {:<16} {:<7} hit {:.4} [{:.4}, {:.4}]  q01 {:.3e}  L {:.4e}  {}",
            f.face,
            f.label,
            v.class,
            f.hit_fraction,
            f.hit_ci95.0,
            f.hit_ci95.1,
            f.min_gap_q01,
            f.local_time.mean,
            v.word()
        );
    }
    for s in &report.subsets {
        let _ = writeln!(
            text,
            "edge {:?} hit {:.4} [{:.4}, {:.4}]  q01 {:.3e}",
            s.faces, s.hit_fraction, s.hit_ci95.0, s.hit_ci95.1, s.min_distance_q01
        );
    }
    match cfg.format {
        Some(OutputFormat::Json) => emit(out, &to_json(&doc))?,
        _ => emit(out, &text)?,
    }
    if let Some(dir) = &cfg.out {
        let cfg_json = serde_json::to_string(&cfg)?;
        write_file(dir, "report.json", &to_json(&doc))?;
        write_file(dir, "hit_fraction_curve.csv", &hit_curve_csv(&cfg_json, &model, &trs))?;
        write_file(dir, "min_gap_histogram.csv", &min_gap_histogram_csv(&cfg_json, &model, &trs))?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_validate_roots(a: &RootArgs, out: &mut dyn Write) -> Result<i32> {
    let rs: RootSystem = match (&a.roots, &a.family) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)?
        }
        (None, Some(fam)) => {
            let family: Family = fam.parse()?;
            let rank = a.rank.ok_or_else(|| Error::Config("--rank is required with --family".into()))?;
            let k = if a.k.is_empty() {
                let orbits = match family {
                    Family::B => 2,
                    Family::I2 if rank % 2 == 0 => 2,
                    _ => 1,
                };
                vec![1.0; orbits]
            } else {
                a.k.clone()
            };
            rootsys::standard_root_system(family, rank, &k)?
        }
        _ => return Err(Error::Config("give either --family/--rank or --roots".into())),
    };
    let report = rootsys::validate(&rs);
    let doc = json!({ "format_version": FORMAT_VERSION, "root_system": rs, "report": report });
    match a.format {
        Some(OutputFormat::Json) => emit(out, &to_json(&doc))?,
        _ => {
            let mut s = format!(
                "{}: {} roots, {} positive, {} simple, rank {}, {} orbit(s)\n",
                report.label, report.num_roots, report.num_positive, report.num_simple, report.rank, report.orbits
            );
            if report.is_valid() {
                s.push_str("valid\n");
            } else {
                for f in &report.failures {
                    let _ = writeln!(s, "FAIL {:?} roots {:?}: {}", f.axiom, f.roots, f.detail);
                }
                s.push_str("invalid\n");
            }
            emit(out, &s)?;
        }
    }
    if let Some(dir) = &a.out {
        write_file(dir, "root_validation.json", &to_json(&doc))?;
    }
    Ok(if report.is_valid() { EXIT_OK } else { EXIT_INVALID })
}

pub fn cmd_list_models(out: &mut dyn Write) -> Result<i32> {
    let text = "\
rost_vares  {\"kind\":\"rost_vares\",\"n\":3,\"phi\":{\"kind\":\"log\",\"gamma\":0.5}}
wishart     {\"kind\":\"wishart\",\"n\":2,\"delta\":3.0}
dunkl       {\"kind\":\"dunkl\",\"family\":\"A\",\"rank\":2,\"k\":[0.75]}
trig        {\"kind\":\"trig\",\"n\":3,\"gamma\":0.5}
hyperbolic  {\"kind\":\"hyperbolic\",\"n\":3,\"gamma\":0.7}
custom      {\"kind\":\"custom\",\"dimension\":1,\"faces\":[{\"normal\":[1.0],\"potential\":{\"kind\":\"log\",\"gamma\":1.5}}],\"initial_point\":[1.0]}

potentials: zero | log{gamma} | shifted_log{gamma,c} | trig_log_sin{gamma,scale} | hyp_log_sinh{gamma} | scaled{factor,inner}
any model accepts \"initial_point\": [..] to override the canonical start
";
    emit(out, text)?;
    Ok(EXIT_OK)
}
