//! `touchgrid`: validate, analyze, decompose, render and search.
//!
//! Exit codes: 0 ok, 2 violations, 3 parse or schema error, 4 not
//! realizable, 5 input contradicts a lemma, 6 witness found, 7 budget
//! exhausted (checkpoint written).

mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use touchgrid::format::FamilyFile;
use touchgrid::geometry::{self, GeometryError};
use touchgrid::quasigrid::{decompose_all, DecomposeError};
use touchgrid::{
    build_arrangement, contract_endpoints, validate_family, Arrangement, ArrangementError,
    CombinatorialFamily, CurveId, GeometricMeeting64, Polyline64,
};
use touchgrid_lab::search::{Checkpoint, RunManifest, SearchLimits};
use touchgrid_lab::{probe_bounds, run_search, Budget, RunResult, SearchSpec};

const CACHE_ENV: &str = "TOUCHGRID_CACHE_DIR";

#[derive(Parser)]
#[command(name = "touchgrid", version, about = "Pseudo-segment families: touchings, faces and quasi-grids")]
struct Cli {
    /// JSON file with defaults for search limits and geometry options.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct InputArgs {
    /// Family file: JSON (combinatorial or geometric) or an SVG of M/L paths.
    path: PathBuf,
    /// Geometric tolerance; default 1e-9 of the bounding-box diagonal.
    #[arg(long)]
    eps: Option<f64>,
    /// Perturb geometric input with this seed before ingesting.
    #[arg(long)]
    jitter: Option<u64>,
    /// Largest jitter offset per coordinate.
    #[arg(long, default_value_t = 1e-6)]
    jitter_magnitude: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Check the pseudo-segment property.
    Validate {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Trace faces and report counts, t_C and optional extras.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Add touching-count ratios.
        #[arg(long)]
        probe: bool,
        /// Also decompose the curves touching this one.
        #[arg(long)]
        g: Option<usize>,
    },
    /// Split the curves touching `g` into quasi-grids.
    Decompose {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        g: usize,
    },
    /// Draw the family as SVG.
    Render {
        #[command(flatten)]
        input: InputArgs,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive counterexample search.
    Search(SearchArgs),
}

#[derive(clap::Args)]
struct SearchArgs {
    /// 41 or 42.
    #[arg(long)]
    lemma: Option<u32>,
    /// Size of H (lemma 42); defaults to max-curves minus 2.
    #[arg(long)]
    h: Option<usize>,
    /// Lemma 41 control run without the quasi-grid requirement.
    #[arg(long)]
    relaxed: bool,
    #[arg(long)]
    max_curves: Option<usize>,
    #[arg(long)]
    max_meetings: Option<usize>,
    /// Continue from a checkpoint; the search it names is rerun.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Where to write the checkpoint on pause.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Pause after expanding this many states.
    #[arg(long)]
    max_expansions: Option<u64>,
    /// Pause after this many seconds.
    #[arg(long)]
    budget_secs: Option<f64>,
    /// Directory for witnesses, manifest and checkpoint.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    max_curves: Option<usize>,
    max_meetings: Option<usize>,
    max_expansions: Option<u64>,
    budget_secs: Option<f64>,
    out: Option<PathBuf>,
    eps: Option<f64>,
}

/// A failure with its exit code.
struct Fail {
    code: u8,
    message: String,
    detail: Option<Value>,
}

impl Fail {
    fn new(code: u8, message: impl ToString) -> Self {
        Fail { code, message: message.to_string(), detail: None }
    }
}

type Res<T> = Result<T, Fail>;

struct Loaded {
    sha: String,
    family: CombinatorialFamily,
    geometry: Option<(Vec<Polyline64>, Vec<GeometricMeeting64>)>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn geometry_fail(e: GeometryError) -> Fail {
    let code = match e {
        GeometryError::NonFiniteIntersection { .. } | GeometryError::SelfIntersection { .. } => 2,
        _ => 3,
    };
    Fail::new(code, e)
}

fn load(input: &InputArgs, config: &Config) -> Res<Loaded> {
    let bytes = std::fs::read(&input.path).map_err(|e| Fail::new(3, format!("{}: {e}", input.path.display())))?;
    let sha = sha256_hex(&bytes);
    let text = String::from_utf8(bytes).map_err(|e| Fail::new(3, e))?;
    let file = FamilyFile::parse(&text).map_err(|e| Fail::new(3, e))?;
    match file {
        FamilyFile::Combinatorial(f) => {
            let family = f.to_family().map_err(|e| Fail::new(3, e))?;
            Ok(Loaded { sha, family, geometry: None })
        }
        FamilyFile::Geometric(f) => {
            let mut curves = f.polylines();
            if let Some(seed) = input.jitter {
                curves = geometry::jitter(&curves, seed, input.jitter_magnitude);
            }
            let eps = input.eps.or(f.tolerance.map(|t| t.0)).or(config.eps);
            let (mut family, meetings) = geometry::ingest(&curves, eps).map_err(geometry_fail)?;
            family.containment = f.containment.clone();
            family.outer = f.outer;
            Ok(Loaded { sha, family, geometry: Some((curves, meetings)) })
        }
    }
}

fn validate(loaded: &Loaded) -> Res<touchgrid::ValidationReport> {
    validate_family(&loaded.family).map_err(|e| Fail::new(3, e))
}

fn arrangement(family: &CombinatorialFamily) -> Res<Arrangement> {
    build_arrangement(family).map_err(|e| match e {
        ArrangementError::NotRealizable { .. } => Fail::new(4, e),
        ArrangementError::Structural(_) => Fail::new(3, e),
        ArrangementError::BadContainment { .. } => Fail::new(3, e),
    })
}

fn decompose(family: &CombinatorialFamily, g: usize) -> Res<Value> {
    if g >= family.len() {
        return Err(Fail::new(2, format!("no curve {g}")));
    }
    match decompose_all(CurveId(g), family) {
        Ok(r) => Ok(serde_json::to_value(r).expect("report serializes")),
        Err(e @ DecomposeError::InputContradictsLemma { .. }) => {
            let DecomposeError::InputContradictsLemma { ref curves, .. } = e else { unreachable!() };
            let (sub, _) = family.subfamily(curves);
            let mut f = Fail::new(5, &e);
            f.detail = Some(json!({
                "curves": curves,
                "witness": touchgrid::format::CombinatorialFileV1::from_family(&sub),
            }));
            Err(f)
        }
        Err(e @ DecomposeError::Precondition { .. }) => Err(Fail::new(2, e)),
        Err(e @ DecomposeError::Structural(_)) => Err(Fail::new(3, e)),
    }
}

fn render(loaded: &Loaded, arr: &Arrangement) -> String {
    let geometry = loaded.geometry.as_ref().map(|(c, m)| (c.as_slice(), m.as_slice()));
    svg::render(&loaded.family, arr, geometry)
}

fn write(path: &Path, text: &str) -> Res<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Fail::new(3, format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| Fail::new(3, format!("{}: {e}", path.display())))
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cmd_validate(input: &InputArgs, config: &Config) -> Res<(Value, u8)> {
    let loaded = load(input, config)?;
    let report = validate(&loaded)?;
    let code = if report.is_pseudo_segment { 0 } else { 2 };
    Ok((json!({ "version": 1, "input_sha256": loaded.sha, "validation": report }), code))
}

fn cmd_analyze(
    input: &InputArgs,
    config: &Config,
    svg_out: Option<&Path>,
    probe: bool,
    g: Option<usize>,
) -> Res<(Value, u8)> {
    let loaded = load(input, config)?;
    let report = validate(&loaded)?;
    if !report.is_pseudo_segment {
        let mut f = Fail::new(2, "not a pseudo-segment family");
        f.detail = Some(serde_json::to_value(&report).unwrap());
        return Err(f);
    }
    let arr = arrangement(&loaded.family)?;
    let counts = loaded.family.count_meetings();
    let contraction = contract_endpoints(&loaded.family, &arr);
    let mut out = json!({
        "version": 1,
        "input_sha256": loaded.sha,
        "mode": if loaded.geometry.is_some() { "geometric" } else { "combinatorial" },
        "validation": report,
        "arrangement": arr.summary(),
        "counts": { "touchings": counts.touchings, "crossings": counts.crossings },
        "t_c": arr.t_c,
        "contraction": { "s": contraction.s, "t": contraction.t },
    });
    if probe {
        let p = probe_bounds(&loaded.family).map_err(|e| Fail::new(4, e))?;
        out["probe"] = serde_json::to_value(p).unwrap();
    }
    if let Some(g) = g {
        out["decomposition"] = decompose(&loaded.family, g)?;
    }
    if let Some(path) = svg_out {
        write(path, &render(&loaded, &arr))?;
        out["svg"] = json!(path.display().to_string());
    }
    Ok((out, 0))
}

fn cmd_decompose(input: &InputArgs, config: &Config, g: usize) -> Res<(Value, u8)> {
    let loaded = load(input, config)?;
    arrangement(&loaded.family)?;
    let report = decompose(&loaded.family, g)?;
    Ok((json!({ "version": 1, "input_sha256": loaded.sha, "decomposition": report }), 0))
}

fn cmd_render(input: &InputArgs, config: &Config, out: Option<&Path>) -> Res<Option<(Value, u8)>> {
    let loaded = load(input, config)?;
    let arr = arrangement(&loaded.family)?;
    let text = render(&loaded, &arr);
    match out {
        Some(path) => {
            write(path, &text)?;
            Ok(Some((json!({ "version": 1, "input_sha256": loaded.sha, "svg": path.display().to_string() }), 0)))
        }
        None => {
            print!("{text}");
            Ok(None)
        }
    }
}

fn cmd_search(args: &SearchArgs, config: &Config) -> Res<(Value, u8)> {
    let resume: Option<(Checkpoint, String)> = match &args.resume {
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| Fail::new(3, format!("{}: {e}", p.display())))?;
            let cp: Checkpoint = serde_json::from_slice(&bytes).map_err(|e| Fail::new(3, e))?;
            Some((cp, sha256_hex(&bytes)))
        }
        None => None,
    };
    let spec = match &resume {
        Some((cp, _)) => cp.spec.clone(),
        None => {
            let lemma = args.lemma.ok_or_else(|| Fail::new(3, "--lemma is required unless resuming"))?;
            let max_curves = args.max_curves.or(config.max_curves);
            let max_meetings = args.max_meetings.or(config.max_meetings).unwrap_or(25);
            match lemma {
                41 => {
                    let limits = SearchLimits { max_curves: max_curves.unwrap_or(5), max_meetings };
                    SearchSpec::lemma41(args.relaxed, limits)
                }
                42 => {
                    let h = match (args.h, max_curves) {
                        (Some(h), _) => h,
                        (None, Some(n)) if n >= 3 => n - 2,
                        (None, Some(n)) => return Err(Fail::new(3, format!("--max-curves {n} leaves no room for H"))),
                        (None, None) => 5,
                    };
                    let limits = SearchLimits { max_curves: max_curves.unwrap_or(h + 2), max_meetings };
                    SearchSpec::lemma42(h, limits)
                }
                other => return Err(Fail::new(3, format!("unknown lemma {other}; use 41 or 42"))),
            }
        }
    };
    let budget = Budget {
        max_expansions: args.max_expansions.or(config.max_expansions),
        wall: args.budget_secs.or(config.budget_secs).map(Duration::from_secs_f64),
    };
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.out.clone())
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let resumed = resume.is_some();
    let input_sha = resume.as_ref().map(|(_, s)| s.clone());
    let started = Instant::now();
    let result = run_search(&spec, budget, resume.map(|(cp, _)| cp)).map_err(|e| Fail::new(3, e))?;
    match result {
        RunResult::Paused(cp) => {
            let path = args.checkpoint.clone().unwrap_or_else(|| out_dir.join("checkpoint.json"));
            write(&path, &pretty(&cp))?;
            eprintln!("budget exhausted; checkpoint written to {}", path.display());
            let out = json!({
                "version": 1,
                "input_sha256": input_sha,
                "status": "paused",
                "checkpoint": path.display().to_string(),
                "task": cp.task,
                "level": cp.level,
            });
            Ok((out, 7))
        }
        RunResult::Done(outcome) => {
            let manifest = RunManifest {
                spec: spec.clone(),
                budget,
                seed: 0,
                searched: outcome.searched,
                witnesses: outcome.witnesses.len(),
                tasks: outcome.tasks.clone(),
                wall_ms: started.elapsed().as_millis() as u64,
                resumed,
            };
            let manifest_path = out_dir.join("manifest.json");
            write(&manifest_path, &pretty(&manifest))?;
            let mut files = Vec::new();
            for (i, w) in outcome.witnesses.iter().enumerate() {
                let path = out_dir.join(format!("witness-{i:04}.json"));
                write(&path, &FamilyFile::Combinatorial(w.family.clone()).to_canonical_string())?;
                files.push(path.display().to_string());
            }
            let code = if outcome.witnesses.is_empty() { 0 } else { 6 };
            let out = json!({
                "version": 1,
                "input_sha256": input_sha,
                "status": "done",
                "spec": outcome.spec,
                "searched": outcome.searched,
                "tasks": outcome.tasks,
                "witnesses": outcome.witnesses.len(),
                "witness_files": files,
                "manifest": manifest_path.display().to_string(),
            });
            Ok((out, code))
        }
    }
}

fn load_config(path: Option<&Path>) -> Res<Config> {
    let Some(path) = path else { return Ok(Config::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| Fail::new(3, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Fail::new(3, format!("config: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load_config(cli.config.as_deref()).and_then(|config| match &cli.command {
        Command::Validate { input } => cmd_validate(input, &config).map(Some),
        Command::Analyze { input, svg, probe, g } => {
            cmd_analyze(input, &config, svg.as_deref(), *probe, *g).map(Some)
        }
        Command::Decompose { input, g } => cmd_decompose(input, &config, *g).map(Some),
        Command::Render { input, out } => cmd_render(input, &config, out.as_deref()),
        Command::Search(args) => cmd_search(args, &config).map(Some),
    });
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some((value, code))) => {
            print!("{}", pretty(&value));
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            if let Some(detail) = f.detail {
                print!("{}", pretty(&json!({ "version": 1, "error": f.message, "exit_code": f.code, "detail": detail })));
            }
            ExitCode::from(f.code)
        }
    }
}
