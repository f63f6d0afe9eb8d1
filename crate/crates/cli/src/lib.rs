//! `glove` command implementations. `main.rs` only forwards process
//! arguments to [`run`] and turns the result into an exit code.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use flexglove::ingest::{read_session_file, session_file_name, write_session_file};
use flexglove::pipeline::{ring_sweep, stability_trace};
use flexglove::report;
use flexglove::sim::CohortPlan;
use flexglove::{analyze, Diameter, Error, ProfileTable, SensorConfig, Simulator};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 42;
pub const MANIFEST_FILE: &str = "manifest.json";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ARGUMENT: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "glove",
    version,
    about = "Flex-sensor glove simulation and analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bench ring sweep (22 cm down to 5 cm) and a 1000-sample stability trace.
    Characterize(CharacterizeArgs),
    /// Simulate a grasp cohort and write one session file per (user, object).
    Simulate(SimulateArgs),
    /// Cohort statistics, line fits, discriminability and centroids.
    Analyze(AnalyzeArgs),
    /// Classify one session against a centroid file.
    Classify(ClassifyArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct CharacterizeArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Sensor configuration (TOML). Built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Per-finger hand mapping table (CSV). Built-in table when omitted.
    #[arg(long)]
    pub profile_table: Option<PathBuf>,
    #[arg(long, default_value_t = flexglove::sim::default_users(flexglove::Shape::Sphere))]
    pub users_sphere: usize,
    #[arg(long, default_value_t = flexglove::sim::default_users(flexglove::Shape::Cylinder))]
    pub users_cylinder: usize,
    /// Comma-separated diameters in cm, used for both shapes. Defaults to
    /// 6..16 for spheres and 6..16 without 10 for cylinders.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub diameters: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Directory of `.session` files.
    pub sessions: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    pub session: PathBuf,
    /// Centroid file written by `analyze`.
    #[arg(long)]
    pub centroids: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write to this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Written next to every output set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub cohort: Option<CohortPlan>,
    pub config: Option<String>,
    pub profile_table: Option<String>,
    pub input: Option<String>,
    pub out: String,
    pub outputs: Vec<String>,
}

/// A failed command: process exit code plus the message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn from_error(err: Error, context: Option<&Path>) -> Self {
        let code = exit_code(&err);
        let message = match context {
            Some(p) => format!("{}: {err}", p.display()),
            None => err.to_string(),
        };
        Self { code, message }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Argument(_) => EXIT_ARGUMENT,
        Error::Parse(_) | Error::Schema(_) => EXIT_PARSE,
        Error::Precondition(_)
        | Error::DegenerateRange(_)
        | Error::OutOfRange(_)
        | Error::Domain(_) => EXIT_PRECONDITION,
        Error::Io(_) => EXIT_IO,
    }
}

type CmdResult = std::result::Result<String, Failure>;

fn with_path<T>(result: flexglove::Result<T>, path: &Path) -> std::result::Result<T, Failure> {
    result.map_err(|e| Failure::from_error(e, Some(path)))
}

fn plain<T>(result: flexglove::Result<T>) -> std::result::Result<T, Failure> {
    result.map_err(|e| Failure::from_error(e, None))
}

/// Parse `args` (without the program name) and execute. On success returns
/// what should go to stdout.
pub fn run<I, T>(args: I) -> CmdResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let echoed: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let cli = match Cli::try_parse_from(std::iter::once(OsString::from("glove")).chain(args)) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_ARGUMENT
            } else {
                EXIT_OK
            };
            return Err(Failure::new(code, e.render().to_string()));
        }
    };
    match cli.command {
        Command::Characterize(a) => characterize(a, echoed),
        Command::Simulate(a) => simulate(a, echoed),
        Command::Analyze(a) => analyze_cmd(a, echoed),
        Command::Classify(a) => classify(a),
        Command::Replay(a) => replay(a),
    }
}

fn load_sensor(path: &Option<PathBuf>) -> std::result::Result<SensorConfig, Failure> {
    match path {
        Some(p) => with_path(SensorConfig::load(p), p),
        None => Ok(SensorConfig::default()),
    }
}

fn path_string(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.display().to_string())
}

fn prepare_out(dir: &Path) -> std::result::Result<(), Failure> {
    with_path(fs::create_dir_all(dir).map_err(Error::from), dir)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> std::result::Result<(), Failure> {
    let path = dir.join(name);
    with_path(fs::write(&path, contents).map_err(Error::from), &path)
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> std::result::Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Failure::new(EXIT_IO, format!("manifest: {e}")))?;
    text.push('\n');
    write_out(dir, MANIFEST_FILE, &text)
}

fn manifest(command: &str, args: Vec<String>, out: &Path) -> RunManifest {
    RunManifest {
        tool: "glove".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        args,
        seed: None,
        cohort: None,
        config: None,
        profile_table: None,
        input: None,
        out: out.display().to_string(),
        outputs: Vec::new(),
    }
}

fn characterize(a: CharacterizeArgs, echoed: Vec<String>) -> CmdResult {
    let sensor = load_sensor(&a.config)?;
    let sweep = plain(ring_sweep(&sensor, a.seed))?;
    let trace = plain(stability_trace(&sensor, a.seed))?;
    prepare_out(&a.out)?;
    write_out(&a.out, "sweep.csv", &report::sweep_csv(&sweep))?;
    write_out(&a.out, "stability.csv", &report::stability_csv(&trace))?;
    let mut m = manifest("characterize", echoed, &a.out);
    m.seed = Some(a.seed);
    m.config = path_string(&a.config);
    m.outputs = vec!["stability.csv".into(), "sweep.csv".into()];
    write_manifest(&a.out, &m)?;
    Ok(format!(
        "wrote {} sweep rows and {} stability samples to {}\n",
        sweep.len(),
        trace.len(),
        a.out.display()
    ))
}

fn simulate(a: SimulateArgs, echoed: Vec<String>) -> CmdResult {
    if a.users_sphere == 0 || a.users_cylinder == 0 {
        return Err(Failure::new(
            EXIT_ARGUMENT,
            "ArgumentError: user counts must be at least 1",
        ));
    }
    let mut plan = CohortPlan {
        users_sphere: a.users_sphere,
        users_cylinder: a.users_cylinder,
        ..CohortPlan::default()
    };
    if let Some(ds) = &a.diameters {
        if ds.is_empty() {
            return Err(Failure::new(
                EXIT_ARGUMENT,
                "ArgumentError: --diameters is empty",
            ));
        }
        for &d in ds {
            plain(Diameter::new(d))?;
        }
        let mut ds = ds.clone();
        ds.sort_by(f64::total_cmp);
        ds.dedup();
        plan.sphere_diameters = ds.clone();
        plan.cylinder_diameters = ds;
    }
    let sensor = load_sensor(&a.config)?;
    let table = match &a.profile_table {
        Some(p) => with_path(ProfileTable::load(p), p)?,
        None => ProfileTable::default(),
    };
    let sim = Simulator {
        sensor,
        table,
        ..Simulator::default()
    };
    let sessions = plain(plan.simulate(&sim, a.seed))?;

    prepare_out(&a.out)?;
    let mut outputs = Vec::with_capacity(sessions.len());
    for s in &sessions {
        let name = session_file_name(s);
        let path = a.out.join(&name);
        with_path(write_session_file(s, &path), &path)?;
        outputs.push(name);
    }
    outputs.sort();
    let mut m = manifest("simulate", echoed, &a.out);
    m.seed = Some(a.seed);
    m.cohort = Some(plan);
    m.config = path_string(&a.config);
    m.profile_table = path_string(&a.profile_table);
    m.outputs = outputs;
    write_manifest(&a.out, &m)?;
    Ok(format!(
        "wrote {} sessions to {}\n",
        sessions.len(),
        a.out.display()
    ))
}

/// `.session` files in a directory, sorted by name.
pub fn session_files(dir: &Path) -> std::result::Result<Vec<PathBuf>, Failure> {
    let entries = with_path(fs::read_dir(dir).map_err(Error::from), dir)?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = with_path(entry.map_err(Error::from), dir)?;
        let path = entry.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "session") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn analyze_cmd(a: AnalyzeArgs, echoed: Vec<String>) -> CmdResult {
    let files = session_files(&a.sessions)?;
    if files.is_empty() {
        return Err(Failure::new(
            EXIT_ARGUMENT,
            format!(
                "ArgumentError: no .session files in {}",
                a.sessions.display()
            ),
        ));
    }
    let sessions = files
        .iter()
        .map(|p| with_path(read_session_file(p), p))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let analysis = plain(analyze(&sessions))?;

    prepare_out(&a.out)?;
    let mut outputs = vec!["centroids.csv", "cohort.csv", "regression.csv"];
    write_out(&a.out, "cohort.csv", &report::cohort_csv(&analysis.table))?;
    write_out(
        &a.out,
        "regression.csv",
        &report::regression_csv(&analysis.fits),
    )?;
    write_out(
        &a.out,
        "centroids.csv",
        &report::centroids_csv(&analysis.centroids, &analysis.context),
    )?;
    if let Some(d) = &analysis.discriminability {
        write_out(
            &a.out,
            "discriminability.csv",
            &report::discriminability_csv(d),
        )?;
        outputs.push("discriminability.csv");
    }
    outputs.sort();
    let mut m = manifest("analyze", echoed, &a.out);
    m.input = Some(a.sessions.display().to_string());
    m.outputs = outputs.into_iter().map(String::from).collect();
    write_manifest(&a.out, &m)?;
    Ok(format!(
        "analyzed {} sessions; wrote {}\n",
        sessions.len(),
        a.out.display()
    ))
}

fn classify(a: ClassifyArgs) -> CmdResult {
    let classifier = with_path(report::read_centroids_file(&a.centroids), &a.centroids)?;
    let session = with_path(read_session_file(&a.session), &a.session)?;
    let c = with_path(classifier.classify_session(&session), &a.session)?;
    Ok(format!(
        "shape={} diameter_cm={} distance={:.6}\n",
        c.shape, c.diameter, c.distance
    ))
}

/// Recorded arguments with the `--out` value swapped.
fn override_out(args: &[String], out: &Path) -> Vec<String> {
    let out = out.display().to_string();
    let mut result = Vec::with_capacity(args.len());
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        if arg == "--out" {
            result.push(arg.clone());
            iter.next();
            result.push(out.clone());
        } else if arg.starts_with("--out=") {
            result.push(format!("--out={out}"));
        } else {
            result.push(arg.clone());
        }
    }
    result
}

fn replay(a: ReplayArgs) -> CmdResult {
    let text = with_path(
        fs::read_to_string(&a.manifest).map_err(Error::from),
        &a.manifest,
    )?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| {
        Failure::new(
            EXIT_PARSE,
            format!("{}: MalformedConfig: {e}", a.manifest.display()),
        )
    })?;
    if m.command == "replay" || m.args.first().map(String::as_str) != Some(m.command.as_str()) {
        return Err(Failure::new(
            EXIT_PARSE,
            format!(
                "{}: MalformedConfig: manifest does not record a runnable command",
                a.manifest.display()
            ),
        ));
    }
    let args = match &a.out {
        Some(out) => override_out(&m.args, out),
        None => m.args.clone(),
    };
    run(args)
}
