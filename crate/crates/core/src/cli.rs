use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use delone_core::address::{
    build_address_map, linear_fit, lipschitz_constant, meyer_residual,
    path_displacement_distribution,
};
use delone_core::atlas::{compute_atlas, entropy_probe, patch_count_profile, WindowPolicy};
use delone_core::contfrac::ContinuedFraction;
use delone_core::ergodic::{
    density_profile, patch_census, PointCountWeight, VolumeWeight, WeightDistribution,
    WhiteCountWeight,
};
use delone_core::generators::{Construction, TwoColoring};
use delone_core::pointset::{delone_constants, read_point_set, AnyPointSet};
use delone_core::repetitivity::{growth_classification, repetitivity_function, repetitivity_prime};
use delone_core::spectral::{autocorrelation, detect_peaks, diffraction_estimate, WaveGrid};
use delone_core::verify::{self, Suite};
use delone_core::{Error, ExactPointSet, PointCloud, PointSetSource, Region};

const EXIT_CONFIG: i32 = 1;
const EXIT_BUDGET: i32 = 2;
const EXIT_IO: i32 = 3;
const EXIT_CHECKS: i32 = 4;

/// Relative intensity below which spectrum maxima are not reported.
const PEAK_THRESHOLD: f64 = 0.25;

#[derive(Parser, Debug)]
#[command(
    name = "delone-lab",
    version,
    about = "Delone-set constructions and finite-window order invariants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// zn, fibonacci, beatty, cut-project, deleted-lines, two-color, product or descriptor.
    #[arg(long, global = true)]
    set: Option<String>,
    /// JSON object of construction parameters (the whole descriptor for `--set descriptor`).
    #[arg(long, global = true)]
    params: Option<String>,
    /// Dimension for zn
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Continued fraction: golden, silver, cf:1,2,[3], or a decimal.
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// Long gap length for beatty (default: golden ratio)
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Patch radii, comma-separated
    #[arg(long = "T", global = true, value_delimiter = ',')]
    t: Vec<f64>,
    /// Box sides for wdist, comma-separated
    #[arg(long = "U", global = true, value_delimiter = ',')]
    u: Vec<f64>,
    /// Half-side of the centered window (initial window for growing searches).
    #[arg(long, global = true)]
    window: Option<f64>,
    /// Seed for sampled estimates
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Point-set file to analyse instead of a generator.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    weight: Option<WeightKind>,
    /// Axis (1-based) of the path-displacement weight.
    #[arg(long, global = true)]
    axis: Option<usize>,
    /// Upper end of the diffraction wave-vector grid
    #[arg(long, global = true)]
    kmax: Option<f64>,
    /// Spacing of the diffraction wave-vector grid
    #[arg(long, global = true)]
    pitch: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
enum Command {
    /// Materialize the set on the window.
    Generate,
    /// Patch-class counts N(T).
    Atlas,
    /// Repetitivity brackets M(T) and a growth verdict.
    Repetitivity,
    /// Patch census and frequencies.
    Frequencies,
    /// Upper, lower and median densities of a weight distribution.
    Wdist,
    /// Autocorrelation and its cosine transform.
    Diffraction,
    /// Address map, Lipschitz ratio and linear fit.
    Address,
    /// Run a named check suite.
    Verify { suite: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
enum WeightKind {
    #[default]
    Count,
    Volume,
    White,
    Path,
}

/// Everything that determines a run; embedded in every output.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    #[serde(default)]
    command: Option<String>,
    #[serde(default)]
    suite: Option<String>,
    #[serde(default)]
    generator: Option<PointSetSource>,
    #[serde(default)]
    input: Option<String>,
    #[serde(default)]
    t: Vec<f64>,
    #[serde(default)]
    u: Vec<f64>,
    #[serde(default)]
    window: Option<f64>,
    #[serde(default)]
    policy: WindowPolicy,
    #[serde(default)]
    weight: WeightKind,
    #[serde(default)]
    axis: Option<usize>,
    #[serde(default)]
    kmax: Option<f64>,
    #[serde(default)]
    pitch: Option<f64>,
    #[serde(default)]
    out: Option<String>,
    #[serde(default)]
    format: Format,
    #[serde(default)]
    seed: u64,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) => EXIT_IO,
            Error::BudgetExhausted(_)
            | Error::ResourceLimit(_)
            | Error::InsufficientWindow(_)
            | Error::WindowIncomplete(_)
            | Error::WindowTooSmall(_) => EXIT_BUDGET,
            _ => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: msg.into(),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Ok(v) = std::env::var("DELONE_LAB_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
            _ => {
                eprintln!("error: DELONE_LAB_THREADS must be a positive integer, got {v:?}");
                return EXIT_CONFIG;
            }
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Generate => "generate",
        Command::Atlas => "atlas",
        Command::Repetitivity => "repetitivity",
        Command::Frequencies => "frequencies",
        Command::Wdist => "wdist",
        Command::Diffraction => "diffraction",
        Command::Address => "address",
        Command::Verify { .. } => "verify",
    }
}

fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn build_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => RunConfig {
            command: None,
            suite: None,
            generator: None,
            input: None,
            t: vec![],
            u: vec![],
            window: None,
            policy: WindowPolicy::default(),
            weight: WeightKind::default(),
            axis: None,
            kmax: None,
            pitch: None,
            out: None,
            format: Format::default(),
            seed: 0,
        },
    };
    let name = command_name(&cli.command);
    if let Some(c) = &cfg.command {
        if c != name {
            return Err(config_error(format!(
                "config is for command {c:?}, invoked {name:?}"
            )));
        }
    }
    cfg.command = Some(name.to_string());
    if let Command::Verify { suite } = &cli.command {
        cfg.suite = Some(suite.clone());
    }
    if let Some(set) = &cli.set {
        cfg.generator = Some(build_generator(set, cli)?);
    } else if cli.params.is_some() || cli.alpha.is_some() || cli.tau.is_some() || cli.n.is_some() {
        return Err(config_error("--params, --alpha, --tau and --n need --set"));
    }
    if let Some(p) = &cli.input {
        cfg.input = Some(p.display().to_string());
    }
    if !cli.t.is_empty() {
        cfg.t = cli.t.clone();
    }
    if !cli.u.is_empty() {
        cfg.u = cli.u.clone();
    }
    if cli.window.is_some() {
        cfg.window = cli.window;
    }
    if let Some(w) = cfg.window {
        if !(w > 0.0) {
            return Err(config_error("--window must be positive"));
        }
        cfg.policy.initial = Some(w);
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.display().to_string());
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(w) = cli.weight {
        cfg.weight = w;
    }
    if cli.axis.is_some() {
        cfg.axis = cli.axis;
    }
    if cli.kmax.is_some() {
        cfg.kmax = cli.kmax;
    }
    if cli.pitch.is_some() {
        cfg.pitch = cli.pitch;
    }
    if let Some(g) = &cfg.generator {
        // deserialized descriptors skip the constructor checks
        cfg.generator = Some(PointSetSource::new(g.construction().clone())?);
    }
    Ok(cfg)
}

fn parse_alpha(s: &str) -> CliResult<ContinuedFraction> {
    s.parse::<ContinuedFraction>()
        .map_err(|e| config_error(format!("--alpha: {e}")))
}

fn build_generator(set: &str, cli: &Cli) -> CliResult<PointSetSource> {
    let params: Option<Value> = match &cli.params {
        Some(p) => {
            Some(serde_json::from_str(p).map_err(|e| config_error(format!("--params: {e}")))?)
        }
        None => None,
    };
    let from_params = |tag: &str| -> CliResult<PointSetSource> {
        let mut obj = match params.clone() {
            Some(Value::Object(m)) => m,
            Some(_) => return Err(config_error("--params must be a JSON object")),
            None => return Err(config_error(format!("--set {set} needs --params"))),
        };
        obj.insert("construction".into(), Value::String(tag.into()));
        serde_json::from_value(Value::Object(obj))
            .map_err(|e| config_error(format!("--params: {e}")))
    };
    let golden_tau = (1.0 + 5f64.sqrt()) / 2.0;
    let src = match set {
        "zn" | "integer-lattice" => {
            let n = cli.n.unwrap_or(1);
            match &params {
                Some(_) => {
                    let mut s = from_params("integer-lattice")?;
                    if let Construction::IntegerLattice { n: m, .. } = s.construction() {
                        if cli.n.is_some_and(|k| k != *m) {
                            return Err(config_error("--n disagrees with --params"));
                        }
                        s = PointSetSource::new(s.construction().clone())?;
                    }
                    s
                }
                None => PointSetSource::integer_lattice(n, vec![])?,
            }
        }
        "fibonacci" => PointSetSource::fibonacci(),
        "beatty" => {
            let a = parse_alpha(
                cli.alpha
                    .as_deref()
                    .ok_or_else(|| config_error("--set beatty needs --alpha"))?,
            )?;
            PointSetSource::beatty(a, cli.tau.unwrap_or(golden_tau))?
        }
        "cut-project" => {
            let a = parse_alpha(
                cli.alpha
                    .as_deref()
                    .ok_or_else(|| config_error("--set cut-project needs --alpha"))?,
            )?;
            PointSetSource::cut_project(a)?
        }
        "deleted-lines" | "two-color" | "product" => from_params(set)?,
        "descriptor" => match params {
            Some(v) => {
                serde_json::from_value(v).map_err(|e| config_error(format!("--params: {e}")))?
            }
            None => return Err(config_error("--set descriptor needs --params")),
        },
        other => return Err(config_error(format!("unknown set {other:?}"))),
    };
    Ok(src)
}

/// Result of one command: JSON payload and CSV table (without the tag column header).
struct Output {
    json: Value,
    header: Vec<String>,
    rows: Vec<(Vec<String>, &'static str)>,
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn run(cli: Cli) -> CliResult<i32> {
    let cfg = build_config(&cli)?;
    let (out, code) = match &cli.command {
        Command::Generate => (generate(&cfg)?, 0),
        Command::Atlas => (atlas(&cfg)?, 0),
        Command::Repetitivity => (repetitivity(&cfg)?, 0),
        Command::Frequencies => (frequencies(&cfg)?, 0),
        Command::Wdist => (wdist(&cfg)?, 0),
        Command::Diffraction => (diffraction(&cfg)?, 0),
        Command::Address => (address(&cfg)?, 0),
        Command::Verify { suite } => verify_cmd(&cfg, suite)?,
    };
    emit(&cfg, out)?;
    Ok(code)
}

fn emit(cfg: &RunConfig, out: Output) -> CliResult<()> {
    let cfg_json = serde_json::to_value(cfg).expect("config serializes");
    let text = match cfg.format {
        Format::Json => {
            let mut doc = out.json;
            if let Value::Object(m) = &mut doc {
                // point-set documents carry the config in their meta block
                if !m.contains_key("config") && !m.contains_key("meta") {
                    m.insert("config".into(), cfg_json);
                }
            }
            let mut s = serde_json::to_string_pretty(&doc).expect("output serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = format!(
                "# {}\n",
                serde_json::to_string(&cfg_json).expect("config serializes")
            );
            s.push_str(&out.header.join(","));
            s.push_str(",tag\n");
            for (row, tag) in &out.rows {
                s.push_str(&row.join(","));
                s.push(',');
                s.push_str(tag);
                s.push('\n');
            }
            s
        }
    };
    match &cfg.out {
        Some(p) => {
            let p = Path::new(p);
            std::fs::write(p, text).map_err(|e| io_error(p, e))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn source(cfg: &RunConfig) -> CliResult<&PointSetSource> {
    cfg.generator
        .as_ref()
        .ok_or_else(|| config_error("this command needs --set (or a generator in --config)"))
}

fn read_input(path: &str) -> CliResult<AnyPointSet> {
    let p = Path::new(path);
    let text = std::fs::read_to_string(p).map_err(|e| io_error(p, e))?;
    read_point_set(&text).map_err(|e| match e {
        Error::Json(j) => config_error(format!("{path}: {j}")),
        other => Failure::from(other).with_prefix(path),
    })
}

impl Failure {
    fn with_prefix(mut self, p: &str) -> Self {
        self.message = format!("{p}: {}", self.message);
        self
    }
}

/// The set to analyse: an exact input file, or the generator on the centered
/// window (default `50 R`).
fn exact_set(cfg: &RunConfig, margin: f64) -> CliResult<ExactPointSet> {
    if let Some(p) = &cfg.input {
        return match read_input(p)? {
            AnyPointSet::Exact(s) => Ok(s),
            AnyPointSet::Float(_) => Err(config_error(format!(
                "{p}: float point sets carry no addresses; only `generate --input` accepts them"
            ))),
        };
    }
    let src = source(cfg)?;
    let half = match cfg.window {
        Some(w) => w,
        None => cfg.policy.initial_half(src)?,
    };
    Ok(src.materialize(&Region::centered_cube(src.dimension(), half + margin)?)?)
}

fn ts(cfg: &RunConfig) -> CliResult<&[f64]> {
    if cfg.t.is_empty() {
        return Err(config_error("this command needs --T"));
    }
    Ok(&cfg.t)
}

fn generate(cfg: &RunConfig) -> CliResult<Output> {
    let meta = json!({"config": cfg});
    let (doc, header, rows, constants) = if let Some(p) = &cfg.input {
        match read_input(p)? {
            AnyPointSet::Exact(s) => exact_rows(&s),
            AnyPointSet::Float(f) => {
                let n = f.dimension();
                let rows = (0..f.len())
                    .map(|i| (f.position(i).iter().map(|x| num(*x)).collect(), "sampled"))
                    .collect();
                let c = delone_constants(&f).ok();
                (
                    f.to_document(),
                    (0..n).map(|k| format!("x{k}")).collect(),
                    rows,
                    c,
                )
            }
        }
    } else {
        let src = source(cfg)?;
        let half = cfg.window.unwrap_or(10.0);
        let set = src.materialize(&Region::centered_cube(src.dimension(), half)?)?;
        exact_rows(&set)
    };
    let json = serde_json::to_value(doc.with_meta(json!({
        "config": meta["config"],
        "count": rows.len(),
        "delone_constants": constants,
    })))
    .expect("document serializes");
    Ok(Output { json, header, rows })
}

type Rows = Vec<(Vec<String>, &'static str)>;

fn exact_rows(
    s: &ExactPointSet,
) -> (
    delone_core::pointset::PointSetDocument,
    Vec<String>,
    Rows,
    Option<delone_core::pointset::DeloneConstants>,
) {
    let mut header: Vec<String> = (0..s.rank()).map(|k| format!("a{k}")).collect();
    header.extend((0..s.dimension()).map(|k| format!("x{k}")));
    let rows = (0..s.len())
        .map(|i| {
            let mut r: Vec<String> = s.address(i).iter().map(|a| a.to_string()).collect();
            r.extend(s.position(i).iter().map(|x| num(*x)));
            (r, "exact")
        })
        .collect();
    (s.to_document(), header, rows, delone_constants(s).ok())
}

fn atlas(cfg: &RunConfig) -> CliResult<Output> {
    let ts = ts(cfg)?;
    let header = ["T", "n_lower", "stabilized", "half_side", "flagged"]
        .map(String::from)
        .to_vec();
    if cfg.input.is_some() {
        let set = exact_set(cfg, 0.0)?;
        let mut rows = vec![];
        let mut results = vec![];
        for &t in ts {
            let a = compute_atlas(&set, t)?;
            rows.push((
                vec![
                    num(t),
                    a.count().to_string(),
                    "false".into(),
                    String::new(),
                    a.is_flagged().to_string(),
                ],
                "certified-bracket",
            ));
            results.push(json!({"t": t, "n_lower": a.count(), "flagged": a.is_flagged(), "centers": a.center_count()}));
        }
        return Ok(Output {
            json: json!({"command": "atlas", "result": results}),
            header,
            rows,
        });
    }
    let src = source(cfg)?;
    let profile = patch_count_profile(src, ts, &cfg.policy)?;
    let entropy = entropy_probe(&profile, src.dimension());
    let rows = profile
        .iter()
        .map(|e| {
            (
                vec![
                    num(e.t),
                    e.n_lower.to_string(),
                    e.stabilized.to_string(),
                    num(e.half_side),
                    e.flagged.to_string(),
                ],
                "certified-bracket",
            )
        })
        .collect();
    Ok(Output {
        json: json!({"command": "atlas", "result": profile, "entropy": entropy}),
        header,
        rows,
    })
}

fn bracket_tag(lo: f64, hi: f64) -> &'static str {
    if lo == hi {
        "exact"
    } else {
        "certified-bracket"
    }
}

fn repetitivity(cfg: &RunConfig) -> CliResult<Output> {
    let ts = ts(cfg)?;
    let header = [
        "T",
        "m_lower",
        "m_upper",
        "m_prime_lower",
        "m_prime_upper",
        "n_lower",
        "half_side",
        "stabilized",
    ]
    .map(String::from)
    .to_vec();
    if cfg.input.is_some() {
        let set = exact_set(cfg, 0.0)?;
        let mut rows = vec![];
        let mut results = vec![];
        for &t in ts {
            let r = repetitivity_function(&set, t, None)?;
            let (a, b) = repetitivity_prime(&r);
            rows.push((
                vec![
                    num(t),
                    num(r.m_lower),
                    num(r.m_upper),
                    num(a),
                    num(b),
                    r.n_lower.to_string(),
                    String::new(),
                    "false".into(),
                ],
                bracket_tag(r.m_lower, r.m_upper),
            ));
            results.push(json!({"t": t, "m_lower": r.m_lower, "m_upper": r.m_upper, "n_lower": r.n_lower, "resolution": r.resolution, "flagged": r.flagged}));
        }
        return Ok(Output {
            json: json!({"command": "repetitivity", "result": results}),
            header,
            rows,
        });
    }
    let report = growth_classification(source(cfg)?, ts, &cfg.policy)?;
    let rows = report
        .points
        .iter()
        .map(|p| {
            (
                vec![
                    num(p.t),
                    num(p.m_lower),
                    num(p.m_upper),
                    num(p.m_lower + p.t),
                    num(p.m_upper + p.t),
                    p.n_lower.to_string(),
                    num(p.half_side),
                    p.stabilized.to_string(),
                ],
                bracket_tag(p.m_lower, p.m_upper),
            )
        })
        .collect();
    Ok(Output {
        json: json!({"command": "repetitivity", "result": report}),
        header,
        rows,
    })
}

fn frequencies(cfg: &RunConfig) -> CliResult<Output> {
    let ts = ts(cfg)?;
    let tmax = ts.iter().copied().fold(0.0, f64::max);
    let set = exact_set(cfg, tmax)?;
    let mut rows = vec![];
    let mut results = vec![];
    for &t in ts {
        let region = set.region().eroded(t).ok_or_else(|| {
            Failure::from(Error::WindowTooSmall(format!(
                "window does not survive erosion by T = {t}"
            )))
        })?;
        let census = patch_census(&set, t, &region)?;
        let volume = region.volume();
        let total: usize = census.iter().map(|c| c.1).sum();
        let mut classes = vec![];
        for (idx, (key, count)) in census.iter().enumerate() {
            rows.push((
                vec![
                    num(t),
                    idx.to_string(),
                    count.to_string(),
                    total.to_string(),
                    num(volume),
                    num(*count as f64 / volume),
                ],
                "exact",
            ));
            classes.push(json!({"key": key, "count": count, "frequency": *count as f64 / volume}));
        }
        results.push(json!({"t": t, "region": region, "centers": total, "classes": classes}));
    }
    let header = ["T", "class", "count", "centers", "volume", "frequency"]
        .map(String::from)
        .to_vec();
    Ok(Output {
        json: json!({"command": "frequencies", "result": results}),
        header,
        rows,
    })
}

fn wdist(cfg: &RunConfig) -> CliResult<Output> {
    if cfg.u.is_empty() {
        return Err(config_error("wdist needs --U"));
    }
    let umax = cfg.u.iter().copied().fold(0.0, f64::max);
    let weight: Box<dyn WeightDistribution>;
    let window: Region;
    match cfg.weight {
        WeightKind::Volume => {
            let n = match (&cfg.generator, &cfg.input) {
                (Some(g), _) => g.dimension(),
                (None, Some(_)) => exact_set(cfg, 0.0)?.dimension(),
                _ => return Err(config_error("wdist needs --set or --input")),
            };
            let half = cfg.window.unwrap_or(16.0 * umax);
            weight = Box::new(VolumeWeight { n });
            window = Region::centered_cube(n, half)?;
        }
        WeightKind::Count => {
            let set = exact_set(cfg, 0.0)?;
            window = set.region().clone();
            weight = Box::new(PointCountWeight::new(set)?);
        }
        WeightKind::White => {
            let Some(Construction::TwoColor(p)) = cfg.generator.as_ref().map(|g| g.construction())
            else {
                return Err(config_error("--weight white needs --set two-color"));
            };
            let coloring = TwoColoring::new(p)?;
            let half = cfg.window.unwrap_or(16.0 * umax);
            window = Region::centered_cube(coloring.dimension(), half)?;
            weight = Box::new(WhiteCountWeight { coloring });
        }
        WeightKind::Path => {
            let set = exact_set(cfg, 0.0)?;
            let map = build_address_map(&set)?;
            let axis = cfg.axis.unwrap_or(1);
            if axis == 0 {
                return Err(config_error("--axis is 1-based"));
            }
            let p = path_displacement_distribution(&set, &map, axis - 1)?;
            window = p.safe_window().ok_or_else(|| {
                Failure::from(Error::WindowTooSmall(
                    "window does not survive erosion by R".into(),
                ))
            })?;
            weight = Box::new(p);
        }
    }
    let profile = density_profile(weight.as_ref(), &window, &cfg.u, cfg.seed)?;
    let mut rows = vec![];
    for r in &profile.rows {
        for c in 0..r.f_zero.len() {
            rows.push((
                vec![
                    num(r.u),
                    c.to_string(),
                    num(r.f_minus[c]),
                    num(r.f_zero[c]),
                    num(r.f_plus[c]),
                    num(r.delta[c]),
                    r.samples.to_string(),
                ],
                "sampled",
            ));
        }
    }
    let header = [
        "U",
        "component",
        "f_minus",
        "f_zero",
        "f_plus",
        "delta",
        "samples",
    ]
    .map(String::from)
    .to_vec();
    Ok(Output {
        json: json!({"command": "wdist", "window": window, "constants": weight.constants(), "result": profile}),
        header,
        rows,
    })
}

fn diffraction(cfg: &RunConfig) -> CliResult<Output> {
    let t = *ts(cfg)?.first().expect("nonempty");
    let set = if cfg.input.is_some() {
        exact_set(cfg, 0.0)?
    } else {
        let src = source(cfg)?;
        let half = cfg.window.unwrap_or(t + 1.0).max(t + 1.0);
        src.materialize(&Region::centered_cube(src.dimension(), half)?)?
    };
    let n = set.dimension();
    let ac = autocorrelation(&set, t, None, None)?;
    let kmax = cfg.kmax.unwrap_or(2.0);
    let pitch = cfg.pitch.unwrap_or(if n == 1 { 0.01 } else { 0.05 });
    let grid = WaveGrid::covering(vec![0.0; n], &vec![kmax; n], pitch)?;
    let est = diffraction_estimate(&ac, &grid)?;
    let peaks = detect_peaks(&est, PEAK_THRESHOLD);
    let mut header: Vec<String> = (0..n).map(|k| format!("k{k}")).collect();
    header.push("intensity".into());
    let rows = (0..grid.len())
        .map(|f| {
            let mut r: Vec<String> = grid.point(f).iter().map(|x| num(*x)).collect();
            r.push(num(est.intensity[f]));
            (r, "exact")
        })
        .collect();
    Ok(Output {
        json: json!({
            "command": "diffraction",
            "t": t,
            "points": ac.points,
            "atoms": ac.atoms.len(),
            "grid": grid,
            "intensity": est.intensity,
            "max_imaginary": est.max_imaginary,
            "peak_threshold": PEAK_THRESHOLD,
            "peaks": peaks,
        }),
        header,
        rows,
    })
}

fn address(cfg: &RunConfig) -> CliResult<Output> {
    let set = exact_set(cfg, 0.0)?;
    let map = build_address_map(&set)?;
    let lip = lipschitz_constant(&set, &map, cfg.seed)?;
    let fit = linear_fit(&set, &map)?;
    let meyer = match meyer_residual(&fit) {
        Ok(m) => json!(m),
        Err(e) => json!({"unavailable": e.to_string()}),
    };
    let rows = fit
        .annuli
        .iter()
        .map(|a| {
            (
                vec![
                    num(a.inner),
                    num(a.outer),
                    a.count.to_string(),
                    num(a.max_residual),
                ],
                "exact",
            )
        })
        .collect();
    let header = ["inner", "outer", "count", "max_residual"]
        .map(String::from)
        .to_vec();
    Ok(Output {
        json: json!({
            "command": "address",
            "points": set.len(),
            "rank": map.rank,
            "point_rank": map.point_rank,
            "basis": map.basis,
            "degeneracy": map.degeneracy,
            "l": fit.l,
            "pi_l_error": fit.pi_l_error,
            "lipschitz": lip,
            "annuli": fit.annuli,
            "exponent": fit.exponent,
            "exponent_stderr": fit.exponent_stderr,
            "residuals_identically_zero": fit.identically_zero,
            "meyer": meyer,
        }),
        header,
        rows,
    })
}

fn verify_cmd(cfg: &RunConfig, suite: &str) -> CliResult<(Output, i32)> {
    let suite: Suite = suite.parse()?;
    let report = verify::run(suite, cfg.seed)?;
    let lines = report.lines();
    // the summary goes to stderr when the report itself is written to stdout
    for l in &lines {
        if cfg.out.is_some() {
            println!("{l}");
        } else {
            eprintln!("{l}");
        }
    }
    let rows = report
        .checks()
        .map(|(s, c)| {
            (
                vec![s.suite.to_string(), c.name.clone(), c.passed.to_string()],
                "exact",
            )
        })
        .collect();
    let header = ["suite", "check", "passed"].map(String::from).to_vec();
    let code = if report.passed() { 0 } else { EXIT_CHECKS };
    Ok((
        Output {
            json: json!({"command": "verify", "passed": report.passed(), "result": report}),
            header,
            rows,
        },
        code,
    ))
}
