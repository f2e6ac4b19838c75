//! `tsamp`: scenario-driven front end for the tensor-sampling library.
//!
//! Exit codes: 0 success, 1 input error, 2 a factor fails its frame
//! condition, 3 a measured error exceeds the tolerance.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use tensor_sampling::scenario::emit::{self, Csv, Format};
use tensor_sampling::scenario::{parse_scenario, Built, Scenario, ScenarioError};
use tensor_sampling::tensor::{Analysis, Axis, FactorVerdict};
use tensor_sampling::{Case, Error, Factor, IndexRange, ReconstructionKit64, SampleGrid64, TensorScheme64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_FRAME: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tsamp", version, about = "Generalized sampling in tensor products of unitary-invariant subspaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Frame tests for both factors and the tensor frame bounds.
    Analyze(CommonArgs),
    /// Design the reconstruction kit and write `kit.json`.
    Design(CommonArgs),
    /// Sample the scenario signal and write the sample grid.
    Sample(CommonArgs),
    /// Reconstruct from samples and report the error against the scenario signal.
    Reconstruct(ReconstructArgs),
    /// Interpolation, brute-force and round-trip checks.
    Verify(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Scenario document (JSON).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Directory for written artifacts.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Overrides the scenario tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Include wall-clock timings in the report (makes output non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Sample grid written by `sample` (`.csv` or `.json`); sampled in-process when omitted.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Kit written by `design`; designed in-process when omitted.
    #[arg(long)]
    pub kit: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorReport {
    pub factor: usize,
    pub kind: String,
    pub is_frame: bool,
    pub condition: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Optimal frame bounds of the factor's sampling vectors.
    pub bounds: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub scenario_digest: String,
    pub case: String,
    pub factors: Vec<FactorReport>,
    pub tensor_bounds: [f64; 2],
    pub frame_ok: bool,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_reconstruction_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpolation_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brute_force_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brute_force_bounds: Option<[f64; 2]>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
    pub exit_code: i32,
}

impl Csv for RunReport {
    fn to_csv(&self) -> String {
        let mut rows = vec![
            ("command".to_string(), self.command.clone()),
            ("scenario_digest".into(), self.scenario_digest.clone()),
            ("case".into(), self.case.clone()),
        ];
        for f in &self.factors {
            let key = |name: &str| format!("factor{}.{name}", f.factor);
            rows.push((key("kind"), f.kind.clone()));
            rows.push((key("is_frame"), f.is_frame.to_string()));
            rows.push((key("condition"), format!("\"{}\"", f.condition)));
            if let Some(rank) = f.rank {
                rows.push((key("rank"), rank.to_string()));
            }
            if let Some(alpha) = f.alpha {
                rows.push((key("alpha"), emit::float(alpha)));
            }
            if let Some(beta) = f.beta {
                rows.push((key("beta"), emit::float(beta)));
            }
            rows.push((key("lower_bound"), emit::float(f.bounds[0])));
            rows.push((key("upper_bound"), emit::float(f.bounds[1])));
        }
        rows.push(("tensor.lower_bound".into(), emit::float(self.tensor_bounds[0])));
        rows.push(("tensor.upper_bound".into(), emit::float(self.tensor_bounds[1])));
        rows.push(("frame_ok".into(), self.frame_ok.to_string()));
        rows.push(("tolerance".into(), emit::float(self.tolerance)));
        let optional = [
            ("max_reconstruction_error", self.max_reconstruction_error),
            ("interpolation_deviation", self.interpolation_deviation),
            ("brute_force_error", self.brute_force_error),
        ];
        for (name, value) in optional {
            if let Some(v) = value {
                rows.push((name.into(), emit::float(v)));
            }
        }
        if let Some([lo, hi]) = self.brute_force_bounds {
            rows.push(("brute_force.lower_bound".into(), emit::float(lo)));
            rows.push(("brute_force.upper_bound".into(), emit::float(hi)));
        }
        for (i, note) in self.notes.iter().enumerate() {
            rows.push((format!("note{}", i + 1), format!("\"{note}\"")));
        }
        if let Some(t) = &self.timings_ms {
            for (k, v) in t {
                rows.push((format!("timing_ms.{k}"), emit::float(*v)));
            }
        }
        rows.push(("exit_code".into(), self.exit_code.to_string()));
        let mut out = String::from("key,value\n");
        for (k, v) in rows {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }
}

/// Failure carrying its exit code and a message for standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::FactorNotAFrame { .. } | Error::NotAFrame(_) => EXIT_FRAME,
            Error::IdentityViolated { .. } => EXIT_TOLERANCE,
            _ => EXIT_INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

/// Result of one command: the report (when one was produced) and the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<RunReport>,
    pub message: Option<String>,
}

struct Session {
    args: CommonArgs,
    scenario: Scenario,
    built: Built,
    digest: String,
    tolerance: f64,
    timings: BTreeMap<String, f64>,
}

impl Session {
    fn open(args: &CommonArgs) -> Result<Self, Failure> {
        let start = Instant::now();
        let text = fs::read_to_string(&args.scenario)
            .map_err(|e| Failure::input(format!("cannot read {}: {e}", args.scenario.display())))?;
        let mut scenario = parse_scenario(&text)?;
        if let Some(seed) = args.seed {
            scenario.seed = seed;
        }
        let tolerance = args.tolerance.unwrap_or(scenario.tolerance);
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Failure::input("--tolerance must be a positive number"));
        }
        let built = scenario.build()?;
        let digest = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        let mut timings = BTreeMap::new();
        timings.insert("load".to_string(), start.elapsed().as_secs_f64() * 1e3);
        Ok(Self { args: args.clone(), scenario, built, digest, tolerance, timings })
    }

    fn time<R>(&mut self, label: &str, f: impl FnOnce(&Self) -> R) -> R {
        let start = Instant::now();
        let out = f(self);
        self.timings.insert(label.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }

    fn report(&self, command: &str, analysis: &Analysis<f64>) -> RunReport {
        RunReport {
            command: command.to_string(),
            scenario_digest: self.digest.clone(),
            case: self.scenario.case.name().to_string(),
            factors: analysis.verdicts.iter().enumerate().map(|(i, v)| factor_report(i + 1, v)).collect(),
            tensor_bounds: [analysis.tensor_bounds.lambda_min, analysis.tensor_bounds.lambda_max],
            frame_ok: analysis.is_frame(),
            tolerance: self.tolerance,
            ..Default::default()
        }
    }

    fn kit(&self) -> Result<ReconstructionKit64, Failure> {
        let [o1, o2] = &self.built.options;
        Ok(self.built.scheme.design_kit(o1, o2)?)
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        fs::create_dir_all(&self.args.out)
            .map_err(|e| Failure::input(format!("cannot create {}: {e}", self.args.out.display())))?;
        let path = self.args.out.join(name);
        fs::write(&path, contents).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
    }

    fn render<V: Serialize + Csv>(&self, value: &V) -> String {
        match self.args.format {
            OutputFormat::Csv => value.to_csv(),
            OutputFormat::Json => emit::to_json(value),
        }
    }

    fn finish(&self, mut report: RunReport, code: i32) -> Result<Outcome, Failure> {
        report.exit_code = code;
        if self.args.timings {
            report.timings_ms = Some(self.timings.clone());
        }
        self.write(&format!("report.{}", self.args.format.extension()), &self.render(&report))?;
        Ok(Outcome { code, report: Some(report), message: None })
    }
}

fn factor_report(factor: usize, verdict: &FactorVerdict<f64>) -> FactorReport {
    let bounds = verdict.bounds();
    let mut report = FactorReport {
        factor,
        kind: String::new(),
        is_frame: verdict.is_frame(),
        condition: verdict.condition(),
        rank: None,
        dimension: None,
        alpha: None,
        beta: None,
        bounds: [bounds.lambda_min, bounds.lambda_max],
    };
    match verdict {
        FactorVerdict::Continuous { constants, .. } => {
            report.kind = "continuous".into();
            report.alpha = Some(constants.alpha);
            report.beta = Some(constants.beta);
        }
        FactorVerdict::Periodic { n, test } => {
            report.kind = "periodic".into();
            report.rank = Some(test.rank);
            report.dimension = Some(*n);
        }
    }
    report
}

fn frame_failures(report: &RunReport) -> Vec<String> {
    report
        .factors
        .iter()
        .filter(|f| !f.is_frame)
        .map(|f| format!("factor {} fails its frame condition: {}", f.factor, f.condition))
        .collect()
}

fn analyze(session: &mut Session) -> Result<Outcome, Failure> {
    let analysis = session.time("analyze", |s| s.built.scheme.analyze());
    let mut report = session.report("analyze", &analysis);
    report.notes = frame_failures(&report);
    let code = if report.frame_ok { EXIT_OK } else { EXIT_FRAME };
    session.finish(report, code)
}

fn design(session: &mut Session) -> Result<Outcome, Failure> {
    let analysis = session.built.scheme.analyze();
    let mut report = session.report("design", &analysis);
    if !report.frame_ok {
        report.notes = frame_failures(&report);
        return session.finish(report, EXIT_FRAME);
    }
    let kit = session.time("design", Session::kit)?;
    session.write("kit.json", &emit::to_json(&kit))?;
    if session.args.format == OutputFormat::Csv {
        session.write("kit.csv", &kit.to_csv())?;
    }
    session.finish(report, EXIT_OK)
}

fn sample(session: &mut Session) -> Result<Outcome, Failure> {
    let analysis = session.built.scheme.analyze();
    let report = session.report("sample", &analysis);
    let grid = session.time("sample", |s| s.built.scheme.sample(&s.built.signal))?;
    session.write(&format!("samples.{}", session.args.format.extension()), &session.render(&grid))?;
    session.finish(report, EXIT_OK)
}

fn reconstruct(session: &mut Session, samples: Option<&Path>, kit: Option<&Path>) -> Result<Outcome, Failure> {
    let analysis = session.built.scheme.analyze();
    let mut report = session.report("reconstruct", &analysis);
    let kit = match kit {
        Some(path) => read_json::<ReconstructionKit64>(path)?,
        None => {
            if !report.frame_ok {
                report.notes = frame_failures(&report);
                return session.finish(report, EXIT_FRAME);
            }
            session.kit()?
        }
    };
    let grid = match samples {
        Some(path) => read_grid(path, session)?,
        None => session.built.scheme.sample(&session.built.signal)?,
    };
    let coeffs = session.time("reconstruct", |s| s.built.scheme.reconstruct(&grid, &kit))?;
    let error = coeffs.max_abs_diff(&session.built.signal);
    report.max_reconstruction_error = Some(error);
    session.write(&format!("coefficients.{}", session.args.format.extension()), &session.render(&coeffs))?;
    let code = if error <= session.tolerance { EXIT_OK } else { EXIT_TOLERANCE };
    if code == EXIT_TOLERANCE {
        report.notes.push(format!("reconstruction error {error:e} exceeds tolerance {:e}", session.tolerance));
    }
    session.finish(report, code)
}

fn verify(session: &mut Session) -> Result<Outcome, Failure> {
    let analysis = session.built.scheme.analyze();
    let mut report = session.report("verify", &analysis);
    if !report.frame_ok {
        report.notes = frame_failures(&report);
        return session.finish(report, EXIT_FRAME);
    }
    let kit = session.time("design", Session::kit)?;
    let scheme = &session.built.scheme;
    let start = Instant::now();
    if scheme.is_square() {
        report.interpolation_deviation = Some(scheme.verify_interpolation(&kit)?.max_deviation);
    } else {
        report.notes.push(format!(
            "interpolation check skipped: not square (channels {:?}, strides {:?})",
            scheme.channels(),
            scheme.strides()
        ));
    }
    if scheme.case() == Case::FiniteFinite {
        let bf = scheme.brute_force_check(&kit)?;
        report.brute_force_error = Some(bf.max_error);
        report.brute_force_bounds = Some([bf.frame_bounds.lambda_min, bf.frame_bounds.lambda_max]);
    }
    let back = scheme.reconstruct(&scheme.sample(&session.built.signal)?, &kit)?;
    report.max_reconstruction_error = Some(back.max_abs_diff(&session.built.signal));
    session.timings.insert("verify".into(), start.elapsed().as_secs_f64() * 1e3);

    let checks = [
        ("interpolation deviation", report.interpolation_deviation),
        ("brute-force error", report.brute_force_error),
        ("reconstruction error", report.max_reconstruction_error),
    ];
    let mut code = EXIT_OK;
    for (name, value) in checks {
        if let Some(v) = value {
            if v.is_nan() || v > session.tolerance {
                report.notes.push(format!("{name} {v:e} exceeds tolerance {:e}", session.tolerance));
                code = EXIT_TOLERANCE;
            }
        }
    }
    session.finish(report, code)
}

fn read_json<D: serde::de::DeserializeOwned>(path: &Path) -> Result<D, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    emit::from_json(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Reads a grid written by `sample`; CSV axes are recovered from the
/// indices present and the periodicity of each factor.
fn read_grid(path: &Path, session: &Session) -> Result<SampleGrid64, Failure> {
    if path.extension().is_some_and(|e| e == "json") {
        return read_json(path);
    }
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    grid_from_csv(&text, &session.built.scheme).map_err(|m| Failure::input(format!("{}: {m}", path.display())))
}

type Cell = (usize, usize, i64, i64, Complex<f64>);

pub fn grid_from_csv(text: &str, scheme: &TensorScheme64) -> Result<SampleGrid64, String> {
    let mut lines = text.lines();
    if lines.next() != Some(emit::GRID_HEADER) {
        return Err(format!("expected header `{}`", emit::GRID_HEADER));
    }
    let mut cells = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let bad = || format!("line {}: malformed row", i + 2);
        if fields.len() != 6 {
            return Err(bad());
        }
        let j: usize = fields[0].parse().map_err(|_| bad())?;
        let jp: usize = fields[1].parse().map_err(|_| bad())?;
        let n: i64 = fields[2].parse().map_err(|_| bad())?;
        let m: i64 = fields[3].parse().map_err(|_| bad())?;
        let re: f64 = fields[4].parse().map_err(|_| bad())?;
        let im: f64 = fields[5].parse().map_err(|_| bad())?;
        if j == 0 || jp == 0 {
            return Err(bad());
        }
        cells.push((j - 1, jp - 1, n, m, Complex::new(re, im)));
    }
    let channels = scheme.channels();
    let span = |pick: fn(&Cell) -> i64| {
        let lo = cells.iter().map(pick).min();
        let hi = cells.iter().map(pick).max();
        match (lo, hi) {
            (Some(lo), Some(hi)) => IndexRange::inclusive(lo, hi),
            _ => IndexRange::new(0, 0),
        }
    };
    let mut axes = [Axis::infinite(span(|c| c.2)), Axis::infinite(span(|c| c.3))];
    for (i, axis) in axes.iter_mut().enumerate() {
        if let Factor::Periodic(p) = scheme.factor(i) {
            *axis = Axis::periodic(p.ell());
        }
    }
    let expected = channels[0] * channels[1] * axes[0].range.len * axes[1].range.len;
    if cells.len() != expected {
        return Err(format!("expected {expected} rows, found {}", cells.len()));
    }
    let grid = SampleGrid64 { channels, axes, values: cells.iter().map(|c| c.4).collect() };
    for (cell, (j, jp, n, m, _)) in cells.iter().zip(grid.cells()) {
        if (cell.0, cell.1, cell.2, cell.3) != (j, jp, n, m) {
            return Err("rows are not in the order written by `sample`".into());
        }
    }
    Ok(grid)
}

/// Runs one command; the report is also written under `--out`.
pub fn execute(command: &Command) -> Outcome {
    let result = (|| {
        let (args, extra) = match command {
            Command::Analyze(a) | Command::Design(a) | Command::Sample(a) | Command::Verify(a) => (a, None),
            Command::Reconstruct(r) => (&r.common, Some(r)),
        };
        let mut session = Session::open(args)?;
        match command {
            Command::Analyze(_) => analyze(&mut session),
            Command::Design(_) => design(&mut session),
            Command::Sample(_) => sample(&mut session),
            Command::Verify(_) => verify(&mut session),
            Command::Reconstruct(_) => {
                let r = extra.expect("reconstruct args");
                reconstruct(&mut session, r.samples.as_deref(), r.kit.as_deref())
            }
        }
    })();
    match result {
        Ok(outcome) => outcome,
        Err(f) => Outcome { code: f.code, report: None, message: Some(f.message) },
    }
}

/// Entry point used by the binary: prints diagnostics and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let format = match &cli.command {
        Command::Analyze(a) | Command::Design(a) | Command::Sample(a) | Command::Verify(a) => a.format,
        Command::Reconstruct(r) => r.common.format,
    };
    let outcome = execute(&cli.command);
    if let Some(message) = &outcome.message {
        eprintln!("tsamp: {message}");
    }
    if let Some(report) = &outcome.report {
        for note in &report.notes {
            eprintln!("tsamp: {note}");
        }
        if format == OutputFormat::Json {
            print!("{}", emit::to_json(report));
        } else {
            eprintln!("tsamp: {} {} (exit {})", report.command, report.case, outcome.code);
        }
    }
    outcome.code
}
