//! Command-line front end.
//!
//! Exit codes: `0` success, `1` invalid input (one JSON line on stderr naming
//! the flag and the violated constraint), `2` internal numeric failure or a
//! failed `oracle-check`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{Args, Parser, Subcommand, ValueEnum};

use selbound_core::bounds::bound_report;
use selbound_core::extrema::{
    candidate_set, max_entropy_distribution, min_entropy, piecewise_curve,
};
use selbound_core::oracle::{summarize, SweepConfig};
use selbound_core::{
    entropy, make_distribution_with, transform::transform, BoundOptions, Error, Limits,
    SortedDistribution, SystemShape, TransformKind, TransformLimits, DEFAULT_EPS,
};

use crate::error::{BlameFlag, CliError};
use crate::report::{
    curve_csv_row, sweep_csv_row, transform_csv, BoundReportJson, CandidateJson, CurveJson,
    CurveSampleJson, DistributionJson, ScenarioJson, SweepRecordJson, SweepSummaryJson,
    TransformJson, CURVE_CSV_HEADER, SWEEP_CSV_HEADER,
};
use crate::{input, par};

#[derive(Debug, Parser)]
#[command(
    name = "selbound",
    version,
    about = "Entropy-based bounds on the error and merit probability of selecting M of N objects"
)]
pub struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads; 0 uses all logical cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Tolerance for bound and normalization checks.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS)]
    pub tolerance: f64,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Unique,
    Repeated,
}

impl From<Mode> for TransformKind {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Unique => TransformKind::Unique,
            Mode::Repeated => TransformKind::Repeated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Max,
    Min,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bounds on π and ψ from the entropy: maximum-entropy relaxation (lower),
    /// inverted Ω minimum-entropy bound (upper), and tight numeric inversions.
    /// With --k > 1 the set transformation is applied first.
    Bounds(BoundsArgs),
    /// Maximum-entropy (two-level) or minimum-entropy (candidate-set vertex)
    /// distribution for a given tail mass π.
    Extrema(ExtremaArgs),
    /// Piecewise-concave entropy curve H(p̂) of the minimum-entropy vertex
    /// family, with candidate-set junctions marked.
    Curve(CurveArgs),
    /// Set transformation of a distribution to k-subsets (unique) or
    /// k-multisets (repeated).
    Transform(TransformArgs),
    /// Monte Carlo check that every sampled distribution's π lies inside the
    /// entropy bounds.
    Sweep(SweepArgs),
    /// Cache prefetch or opportunistic scheduling scenario with exact and
    /// empirical rates.
    Scenario(ScenarioArgs),
    /// Compare exact results against brute-force oracles.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: usize,
    /// Entropy in bits; computed from --dist when that is given.
    #[arg(long, conflicts_with = "dist")]
    pub entropy: Option<f64>,
    /// Performance requirement; values above 1 need --dist and --mode.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Distribution file (text or JSON); weights are normalized.
    #[arg(long)]
    pub dist: Option<PathBuf>,
    /// Also report the uncorrected lower bound.
    #[arg(long)]
    pub compare_flawed: bool,
    /// Grid points for the tight upper inversion.
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct ExtremaArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub pi: f64,
    #[arg(long, value_enum, default_value_t = Which::Min)]
    pub which: Which,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub pi: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum)]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// key=value sweep file (shapes, scenarios_per_shape, samplers, ...).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in preset of eight reference (N, M) configurations, 100 scenarios each.
    #[arg(long = "paper-figs", conflicts_with = "config")]
    pub reference_shapes: bool,
    /// Override the number of scenarios per shape.
    #[arg(long)]
    pub scenarios: Option<usize>,
    /// Write the summary JSON here; otherwise it goes to stderr (CSV output)
    /// or into the JSON output.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// key=value scenario file.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Exact minimum entropy vs randomized local search and the Ω bound.
    #[arg(long)]
    pub min_entropy: bool,
    /// Transform probabilities vs enumeration of ordered tuples.
    #[arg(long, conflicts_with = "min_entropy")]
    pub transform: bool,
    /// Largest N checked (default 8 for --min-entropy, 6 for --transform).
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub k_max: usize,
    /// π grid points per shape.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    #[arg(long, default_value_t = 100)]
    pub restarts: usize,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    /// Random distributions per (N, k).
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

/// Output of a successful command.
pub struct Output {
    pub body: String,
    pub exit_code: i32,
}

impl Output {
    fn ok(body: String) -> Self {
        Output { body, exit_code: 0 }
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// its output. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => return report_parse_error(e),
    };
    match execute(&cli).and_then(|out| emit(&cli, &out).map(|()| out.exit_code)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            e.exit_code()
        }
    }
}

fn report_parse_error(e: clap::Error) -> i32 {
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            let _ = e.print();
            0
        }
        _ => {
            let flag = match e.get(ContextKind::InvalidArg) {
                Some(ContextValue::String(s)) => s.clone(),
                _ => match e.get(ContextKind::InvalidSubcommand) {
                    Some(ContextValue::String(s)) => s.clone(),
                    _ => String::from("(arguments)"),
                },
            };
            let rendered = e.render().to_string();
            let constraint = rendered
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ")
                .to_string();
            eprintln!("{}", CliError::invalid(&flag, constraint).to_json_line());
            1
        }
    }
}

fn emit(cli: &Cli, out: &Output) -> Result<(), CliError> {
    let mut body = out.body.clone();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match &cli.out {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::io("--out", path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::io("--out", Path::new("<stdout>"), e))
        }
    }
}

/// Runs the parsed command inside a pool of `--threads` workers.
pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    if !(cli.tolerance >= 0.0 && cli.tolerance.is_finite()) {
        return Err(CliError::invalid("--tolerance", "must be finite and >= 0"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::invalid("--threads", e.to_string()))?;
    let caps = Caps::from_env()?;
    pool.install(|| match &cli.command {
        Command::Bounds(a) => bounds_cmd(cli, &caps, a),
        Command::Extrema(a) => extrema_cmd(cli, a),
        Command::Curve(a) => curve_cmd(cli, a),
        Command::Transform(a) => transform_cmd(cli, &caps, a),
        Command::Sweep(a) => sweep_cmd(cli, a),
        Command::Scenario(a) => scenario_cmd(cli, &caps, a),
        Command::OracleCheck(a) => oracle_cmd(cli, a),
    })
}

/// Size caps, overridable through `SELBOUND_MAX_*` environment variables.
#[derive(Debug, Clone, Copy)]
pub struct Caps {
    pub limits: Limits,
    pub transform: TransformLimits,
}

impl Caps {
    pub fn from_env() -> Result<Self, CliError> {
        fn var<T: std::str::FromStr>(name: &str) -> Result<Option<T>, CliError> {
            match std::env::var(name) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map(Some)
                    .map_err(|_| CliError::invalid(name, format!("`{v}` is not a valid count"))),
                Err(_) => Ok(None),
            }
        }
        let mut caps = Caps {
            limits: Limits::default(),
            transform: TransformLimits::default(),
        };
        if let Some(v) = var("SELBOUND_MAX_STATES")? {
            caps.limits.max_states = v;
        }
        if let Some(v) = var("SELBOUND_MAX_COMPOSITES")? {
            caps.transform.max_composites = v;
        }
        if let Some(v) = var("SELBOUND_MAX_UNIQUE_K")? {
            caps.transform.max_unique_k = v;
        }
        if let Some(v) = var("SELBOUND_MAX_REPEATED_K")? {
            caps.transform.max_repeated_k = v;
        }
        Ok(caps)
    }
}

/// Flag most likely responsible for a core error in the flag-driven commands.
fn flag_for(e: &Error) -> &'static str {
    match e {
        Error::BadM { .. } => "--m",
        Error::Infeasible { .. } | Error::BadPHat { .. } => "--pi",
        Error::BadEntropy { .. } => "--entropy",
        Error::BadK { .. } | Error::TooLarge { .. } | Error::InsufficientSupport { .. } => "--k",
        Error::AllZero
        | Error::InvalidEntry { .. }
        | Error::Empty
        | Error::NotNormalized { .. }
        | Error::Unsorted { .. }
        | Error::ZeroDenominator { .. }
        | Error::DuplicateId(_)
        | Error::BadId { .. } => "--dist",
        Error::BadConfig(_) | Error::Numeric(_) => "(computation)",
    }
}

fn blame<T>(r: selbound_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| {
        let flag = flag_for(&e);
        CliError::core(flag, e)
    })
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

fn read_dist(path: &Path, caps: &Caps, eps: f64) -> Result<SortedDistribution, CliError> {
    let weights = input::read_weights(path, "--dist")?;
    let limits = Limits { eps, ..caps.limits };
    make_distribution_with(&weights, &limits).blame("--dist")
}

fn bound_opts(grid: usize) -> Result<BoundOptions, CliError> {
    if grid < 2 {
        return Err(CliError::invalid("--grid", "need at least 2 points"));
    }
    Ok(BoundOptions {
        grid,
        ..BoundOptions::default()
    })
}

fn bounds_cmd(cli: &Cli, caps: &Caps, a: &BoundsArgs) -> Result<Output, CliError> {
    let opts = bound_opts(a.grid)?;
    if a.k == 0 {
        return Err(CliError::invalid("--k", "must be >= 1"));
    }
    if a.k > 1 && a.mode.is_none() {
        return Err(CliError::invalid("--mode", "required when --k > 1"));
    }
    let json = match &a.dist {
        Some(path) => {
            let d = read_dist(path, caps, cli.tolerance)?;
            if let Some(n) = a.n {
                if n != d.len() {
                    return Err(CliError::invalid(
                        "--n",
                        format!("{n} does not match the {} entries of --dist", d.len()),
                    ));
                }
            }
            if a.k == 1 {
                let h = entropy(&d).bits();
                let r = blame(bound_report(d.len(), a.m, h, &opts))?;
                let mut j = BoundReportJson::new(&r);
                j.pi_observed = Some(blame(d.tail_probability(a.m))?);
                if a.compare_flawed {
                    j = j.with_flawed(&r);
                }
                j
            } else {
                let kind = a.mode.expect("checked above").into();
                let sys = blame(transform(&d, a.m, a.k, kind, &caps.transform))?;
                let r = blame(sys.bound_report(&opts))?;
                let mut j = BoundReportJson::new(&r);
                j.pi_observed = Some(sys.optimal_pi());
                j.pi_membership = Some(sys.membership_pi());
                j.selection_mismatch = Some(sys.selection_mismatch(cli.tolerance));
                if a.compare_flawed {
                    j = j.with_flawed(&r);
                }
                j
            }
        }
        None => {
            let n =
                a.n.ok_or_else(|| CliError::invalid("--n", "required without --dist"))?;
            let h = a
                .entropy
                .ok_or_else(|| CliError::invalid("--entropy", "required without --dist"))?;
            if a.k > 1 {
                return Err(CliError::invalid("--k", "values above 1 need --dist"));
            }
            let r = blame(bound_report(n, a.m, h, &opts))?;
            let j = BoundReportJson::new(&r);
            if a.compare_flawed {
                j.with_flawed(&r)
            } else {
                j
            }
        }
    };
    Ok(Output::ok(match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json),
        Format::Csv => format!("{}\n{}", BoundReportJson::CSV_HEADER, json.csv_row()),
    }))
}

fn shape_of(n: usize, m: usize, pi: f64, eps: f64) -> Result<SystemShape, CliError> {
    if n == 0 {
        return Err(CliError::invalid("--n", "must be >= 1"));
    }
    blame(SystemShape::with_eps(n, m, pi, eps))
}

fn extrema_cmd(cli: &Cli, a: &ExtremaArgs) -> Result<Output, CliError> {
    let shape = shape_of(a.n, a.m, a.pi, cli.tolerance)?;
    let json = match a.which {
        Which::Max => {
            let d = blame(max_entropy_distribution(&shape))?;
            DistributionJson {
                which: "max",
                n: a.n,
                m: a.m,
                pi: shape.pi(),
                entropy_bits: entropy(&d).bits(),
                distribution: d.probs().to_vec(),
                p_hat: None,
                y: None,
                candidates: Vec::new(),
            }
        }
        Which::Min => {
            let r = blame(min_entropy(&shape))?;
            let best = r.argmin();
            DistributionJson {
                which: "min",
                n: a.n,
                m: a.m,
                pi: shape.pi(),
                entropy_bits: r.min_entropy_bits,
                distribution: best.distribution.probs().to_vec(),
                p_hat: Some(best.p_hat),
                y: Some(r.y),
                candidates: CandidateJson::all(&r),
            }
        }
    };
    Ok(Output::ok(match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json),
        Format::Csv => {
            let mut s = String::from("position,probability\n");
            for (i, p) in json.distribution.iter().enumerate() {
                s.push_str(&format!("{i},{}\n", crate::fmt::sig12(*p)));
            }
            s
        }
    }))
}

fn curve_cmd(cli: &Cli, a: &CurveArgs) -> Result<Output, CliError> {
    let shape = shape_of(a.n, a.m, a.pi, cli.tolerance)?;
    let samples = piecewise_curve(&shape, a.samples).map_err(|e| match e {
        Error::BadConfig(msg) if msg.starts_with("samples") => CliError::invalid("--samples", msg),
        Error::BadConfig(msg) => CliError::invalid("--pi", msg),
        Error::BadM { .. } => CliError::invalid("--m", "the curve needs 2 <= M < N"),
        e => CliError::core(flag_for(&e), e),
    })?;
    Ok(Output::ok(match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = format!("{CURVE_CSV_HEADER}\n");
            for p in &samples {
                s.push_str(&curve_csv_row(p));
                s.push('\n');
            }
            s
        }
        Format::Json => to_json(&CurveJson {
            n: a.n,
            m: a.m,
            pi: shape.pi(),
            y: shape.interior_count(),
            candidates: blame(candidate_set(&shape))?,
            samples: samples.iter().map(CurveSampleJson::from).collect(),
        }),
    }))
}

fn transform_cmd(cli: &Cli, caps: &Caps, a: &TransformArgs) -> Result<Output, CliError> {
    let d = read_dist(&a.dist, caps, cli.tolerance)?;
    let sys = blame(transform(&d, a.m, a.k, a.mode.into(), &caps.transform))?;
    Ok(Output::ok(match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => transform_csv(&sys, cli.tolerance),
        Format::Json => to_json(&TransformJson::new(&sys, cli.tolerance)),
    }))
}

fn sweep_cmd(cli: &Cli, a: &SweepArgs) -> Result<Output, CliError> {
    let (mut cfg, flag) = match &a.config {
        Some(path) => (
            input::sweep_config(
                &input::read_text(path, "--config")?,
                cli.seed,
                cli.tolerance,
            )?,
            "--config",
        ),
        None if !a.reference_shapes => {
            return Err(CliError::invalid(
                "--config",
                "one of --config or --paper-figs is required",
            ));
        }
        None => {
            let mut cfg = SweepConfig::reference(cli.seed);
            cfg.eps = cli.tolerance;
            (cfg, "--paper-figs")
        }
    };
    if let Some(s) = a.scenarios {
        if s == 0 {
            return Err(CliError::invalid("--scenarios", "must be >= 1"));
        }
        cfg.scenarios_per_shape = s;
    }
    let records = par::run_sweep(&cfg).blame(flag)?;
    let summary = SweepSummaryJson::from(&summarize(&records));
    let summary_line = serde_json::to_string(&summary).expect("summary serializes");
    if let Some(path) = &a.summary {
        std::fs::write(path, format!("{summary_line}\n"))
            .map_err(|e| CliError::io("--summary", path, e))?;
    }
    let body = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            if a.summary.is_none() {
                eprintln!("{summary_line}");
            }
            let mut s = String::with_capacity(records.len() * 128);
            s.push_str(SWEEP_CSV_HEADER);
            s.push('\n');
            for r in &records {
                s.push_str(&sweep_csv_row(r));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Sweep<'a> {
                summary: &'a SweepSummaryJson,
                records: Vec<SweepRecordJson>,
            }
            to_json(&Sweep {
                summary: &summary,
                records: records.iter().map(SweepRecordJson::from).collect(),
            })
        }
    };
    Ok(Output::ok(body))
}

fn scenario_cmd(cli: &Cli, caps: &Caps, a: &ScenarioArgs) -> Result<Output, CliError> {
    let text = input::read_text(&a.config, "--config")?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let cfg = input::scenario_config(&text, base, cli.seed)?;
    let report =
        par::run_scenario(&cfg, &BoundOptions::default(), &caps.transform).blame("--config")?;
    let json = ScenarioJson::from(&report);
    Ok(Output::ok(match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json),
        Format::Csv => format!(
            "{},empirical_rate,exact_rate,optimal_rate,within_bounds\n{},{},{},{},{}",
            BoundReportJson::CSV_HEADER,
            json.bounds.csv_row(),
            crate::fmt::sig12(json.empirical_rate),
            crate::fmt::sig12(json.exact_rate),
            crate::fmt::sig12(json.optimal_rate),
            crate::fmt::bool01(json.within_bounds),
        ),
    }))
}

fn oracle_cmd(cli: &Cli, a: &OracleArgs) -> Result<Output, CliError> {
    if cli.format == Some(Format::Csv) {
        return Err(CliError::invalid(
            "--format",
            "oracle-check only emits json",
        ));
    }
    if !a.min_entropy && !a.transform {
        return Err(CliError::invalid(
            "--min-entropy",
            "one of --min-entropy or --transform is required",
        ));
    }
    let (body, pass) = if a.min_entropy {
        let n_max = a.n_max.unwrap_or(8);
        if n_max == 0 || n_max > 32 {
            return Err(CliError::invalid(
                "--n-max",
                "must be in 1..=32 for --min-entropy",
            ));
        }
        if a.grid < 2 {
            return Err(CliError::invalid("--grid", "need at least 2 points"));
        }
        let r = par::min_entropy_check(n_max, a.grid, a.restarts, a.iters, cli.seed, cli.tolerance);
        (to_json(&r), r.pass)
    } else {
        let n_max = a.n_max.unwrap_or(6);
        if n_max == 0 || n_max > 6 {
            return Err(CliError::invalid(
                "--n-max",
                "must be in 1..=6 for --transform",
            ));
        }
        if a.k_max == 0 || a.k_max > 3 {
            return Err(CliError::invalid("--k-max", "must be in 1..=3"));
        }
        let r =
            par::transform_check(n_max, a.k_max, a.trials, cli.seed, 1e-12).blame("--transform")?;
        (to_json(&r), r.pass)
    };
    Ok(Output {
        body,
        exit_code: if pass { 0 } else { 2 },
    })
}
