//! Command-line front end for `bubqkd`.
//!
//! [`run`] parses arguments, merges an optional JSON config file (flags take
//! precedence) and returns the process exit code: 0 when every check passes,
//! 1 on a check failure, 2 on a usage, configuration or output error.

pub mod breidbart;
pub mod output;
pub mod verify;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;
use std::io::Write;
use std::path::{Path, PathBuf};

use bubqkd::collective::{self, CollectiveParams};
use bubqkd::intercept::{self, InterceptParams};
use bubqkd::montecarlo::{FrequencyReport, Scenario, TrialBatch};
use bubqkd::{Provenance, SweepResult};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Worker-count override for every parallel section.
pub const WORKERS_ENV: &str = "BUBQKD_WORKERS";

pub const DEFAULT_IR_POINTS: usize = 720;
pub const DEFAULT_GRID: usize = 200;
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;
/// Collective-attack point used when `mc --scenario collective` gets no angles.
pub const DEFAULT_COLLECTIVE: (f64, f64) = (1.30, 0.990);

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Output(String),
    #[error(transparent)]
    Model(#[from] bubqkd::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Honest,
    Ir,
    Collective,
}

#[derive(Debug, Parser)]
#[command(name = "bubqkd", version, about = "Eavesdropping analysis of the ABL key-distribution protocol")]
pub struct Cli {
    /// JSON file with default values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invariant suite of every module.
    Verify,
    /// Intercept-resend sweep over alpha on the symmetric branch.
    IrSweep {
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form table at (0, pi/4) and (pi, pi/4).
    Breidbart,
    /// Collective-attack grid over (a, b).
    CollectiveSweep {
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        mmax: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo frequency report.
    Mc(McArgs),
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Contents of `--config`; keys mirror the long flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub format: Option<Format>,
    pub points: Option<usize>,
    pub nmax: Option<usize>,
    pub mmax: Option<usize>,
    pub out: Option<PathBuf>,
    pub scenario: Option<ScenarioKind>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Task {
    Verify,
    IrSweep { points: usize, out: PathBuf },
    Breidbart,
    CollectiveSweep { nmax: usize, mmax: usize, out: PathBuf },
    Mc { scenario: Scenario, trials: u64, seed: u64, out: PathBuf },
}

/// Fully resolved invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub task: Task,
    pub format: Format,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn command_name(&self) -> &'static str {
        match self.task {
            Task::Verify => "verify",
            Task::IrSweep { .. } => "ir-sweep",
            Task::Breidbart => "breidbart",
            Task::CollectiveSweep { .. } => "collective-sweep",
            Task::Mc { .. } => "mc",
        }
    }

    /// Every resolved value, as written into provenance blocks.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("command".into(), self.command_name().into());
        m.insert("format".into(), format!("{:?}", self.format).to_lowercase());
        m.insert("workers".into(), self.workers.map_or("default".into(), |w| w.to_string()));
        match &self.task {
            Task::Verify | Task::Breidbart => {}
            Task::IrSweep { points, out } => {
                m.insert("points".into(), points.to_string());
                m.insert("out".into(), out.display().to_string());
            }
            Task::CollectiveSweep { nmax, mmax, out } => {
                m.insert("nmax".into(), nmax.to_string());
                m.insert("mmax".into(), mmax.to_string());
                m.insert("out".into(), out.display().to_string());
            }
            Task::Mc { scenario, trials, seed, out } => {
                m.insert("scenario".into(), scenario.label().into());
                match scenario {
                    Scenario::Honest => {}
                    Scenario::InterceptResend(p) => {
                        m.insert("alpha".into(), output::fmt_sig(p.alpha));
                        m.insert("beta".into(), output::fmt_sig(p.beta));
                    }
                    Scenario::Collective(p) => {
                        m.insert("a".into(), output::fmt_sig(p.a));
                        m.insert("b".into(), output::fmt_sig(p.b));
                    }
                }
                m.insert("trials".into(), trials.to_string());
                m.insert("seed".into(), seed.to_string());
                m.insert("out".into(), out.display().to_string());
            }
        }
        m
    }

    fn provenance(&self) -> Provenance {
        let seed = match self.task {
            Task::Mc { seed, .. } => Some(seed),
            _ => None,
        };
        Provenance { seed, config: self.echo(), ..Provenance::default() }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn required_out(flag: Option<PathBuf>, cfg: &ConfigFile) -> Result<PathBuf, CliError> {
    flag.or_else(|| cfg.out.clone()).ok_or_else(|| usage("--out is required"))
}

pub fn parse_workers(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(usage(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Merges flags over the config file and validates the result.
pub fn resolve(cli: Cli, workers: Option<usize>) -> Result<RunConfig, CliError> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let format = cli.format.or(cfg.format).unwrap_or(Format::Csv);
    let task = match cli.command {
        Command::Verify => Task::Verify,
        Command::Breidbart => Task::Breidbart,
        Command::IrSweep { points, out } => {
            let points = points.or(cfg.points).unwrap_or(DEFAULT_IR_POINTS);
            if points < 2 {
                return Err(usage(format!("--points must be at least 2, got {points}")));
            }
            Task::IrSweep { points, out: required_out(out, &cfg)? }
        }
        Command::CollectiveSweep { nmax, mmax, out } => {
            let nmax = nmax.or(cfg.nmax).unwrap_or(DEFAULT_GRID);
            let mmax = mmax.or(cfg.mmax).unwrap_or(DEFAULT_GRID);
            if nmax < 1 || mmax < 1 {
                return Err(usage(format!("--nmax and --mmax must be at least 1, got {nmax} and {mmax}")));
            }
            Task::CollectiveSweep { nmax, mmax, out: required_out(out, &cfg)? }
        }
        Command::Mc(m) => {
            let kind = m.scenario.or(cfg.scenario).ok_or_else(|| usage("--scenario is required"))?;
            let alpha = m.alpha.or(cfg.alpha);
            let beta = m.beta.or(cfg.beta);
            let a = m.a.or(cfg.a);
            let b = m.b.or(cfg.b);
            let ir_given = alpha.is_some() || beta.is_some();
            let col_given = a.is_some() || b.is_some();
            let scenario = match kind {
                ScenarioKind::Honest if ir_given || col_given => {
                    return Err(usage("the honest scenario takes no attack angles"));
                }
                ScenarioKind::Honest => Scenario::Honest,
                ScenarioKind::Ir if col_given => return Err(usage("--a/--b belong to the collective scenario")),
                ScenarioKind::Ir => Scenario::InterceptResend(
                    InterceptParams::from_angles(alpha.unwrap_or(0.0), beta.unwrap_or(FRAC_PI_4))
                        .map_err(|e| usage(e.to_string()))?,
                ),
                ScenarioKind::Collective if ir_given => {
                    return Err(usage("--alpha/--beta belong to the ir scenario"));
                }
                ScenarioKind::Collective => {
                    let (a, b) = (a.unwrap_or(DEFAULT_COLLECTIVE.0), b.unwrap_or(DEFAULT_COLLECTIVE.1));
                    let p = CollectiveParams::from_angles(a, b)
                        .map_err(|e| usage(e.to_string()))?
                        .ok_or_else(|| usage(format!("fidelity is undefined at (a, b) = ({a}, {b})")))?;
                    Scenario::Collective(p)
                }
            };
            let trials = m.trials.or(cfg.trials).unwrap_or(DEFAULT_TRIALS);
            if trials < 1 {
                return Err(usage("--trials must be at least 1"));
            }
            let seed = m.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
            Task::Mc { scenario, trials, seed, out: required_out(m.out, &cfg)? }
        }
    };
    Ok(RunConfig { task, format, workers })
}

#[derive(Serialize)]
struct SweepSidecar<'a> {
    provenance: &'a Provenance,
    axis_labels: &'a [String],
    columns: &'a [String],
    grid_step: &'a [f64],
    rows: usize,
    invalid_rows: usize,
    argmax: &'a [bubqkd::ArgmaxRecord],
    #[serde(skip_serializing_if = "Option::is_none")]
    invalid_cells: Option<&'a [(usize, usize)]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slice_argmax: Option<&'a [bubqkd::ArgmaxRecord]>,
}

fn sidecar<'a>(s: &'a SweepResult, invalid_cells: Option<&'a [(usize, usize)]>, slice: Option<&'a SweepResult>) -> SweepSidecar<'a> {
    SweepSidecar {
        provenance: &s.provenance,
        axis_labels: &s.axis_labels,
        columns: &s.columns,
        grid_step: &s.grid_step,
        rows: s.rows.len(),
        invalid_rows: s.invalid_count(),
        argmax: &s.argmax,
        invalid_cells,
        slice_argmax: slice.map(|s| s.argmax.as_slice()),
    }
}

#[derive(Serialize)]
struct McDocument<'a> {
    provenance: &'a Provenance,
    report: &'a FrequencyReport,
}

fn mc_cells_table(r: &FrequencyReport) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["axis", "bob", "eve", "r", "count", "observed", "expected", "sigma_deviation"].map(String::from).to_vec();
    let rows = r
        .cells
        .iter()
        .map(|c| {
            vec![
                c.key.axis.to_string(),
                c.key.bob.to_string(),
                c.key.eve.map_or("-".into(), |e| e.to_string()),
                c.key.r_index.to_string(),
                c.count.to_string(),
                output::fmt_sig(c.observed),
                output::fmt_sig(c.expected),
                output::fmt_sig(c.sigma_deviation),
            ]
        })
        .collect();
    (header, rows)
}

fn execute(cfg: &RunConfig, stdout: &mut (dyn Write + Send)) -> Result<i32, CliError> {
    let provenance = cfg.provenance();
    let say = |w: &mut dyn Write, s: &str| w.write_all(s.as_bytes()).map_err(|e| CliError::Output(e.to_string()));
    match &cfg.task {
        Task::Verify => {
            let report = verify::run_verify();
            match cfg.format {
                Format::Json => say(stdout, &(serde_json::to_string_pretty(&report).expect("serializable") + "\n"))?,
                Format::Csv => say(stdout, &report.to_text())?,
            }
            Ok(if report.all_pass() { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Task::Breidbart => {
            let report = breidbart::breidbart_report();
            match cfg.format {
                Format::Json => say(stdout, &(serde_json::to_string_pretty(&report).expect("serializable") + "\n"))?,
                Format::Csv => say(stdout, &report.to_text())?,
            }
            Ok(EXIT_OK)
        }
        Task::IrSweep { points, out } => {
            let mut sweep = intercept::sweep_ir(*points)?;
            sweep.provenance = provenance;
            match cfg.format {
                Format::Json => output::write_json(out, &sweep)?,
                Format::Csv => {
                    let (header, rows) = output::sweep_table(&sweep, &[]);
                    output::write_csv(out, &sweep.provenance, &header, &rows)?;
                    output::write_json(&output::sibling(out, ".json"), &sidecar(&sweep, None, None))?;
                }
            }
            for a in &sweep.argmax {
                say(stdout, &format!("max {} = {} at alpha = {}\n", a.column, output::fmt_sig(a.value), output::fmt_sig(a.coords[0])))?;
            }
            Ok(EXIT_OK)
        }
        Task::CollectiveSweep { nmax, mmax, out } => {
            let mut sw = collective::sweep_collective(*nmax, *mmax)?;
            sw.grid.provenance = provenance.clone();
            sw.slice.provenance = provenance;
            match cfg.format {
                Format::Json => output::write_json(out, &sw)?,
                Format::Csv => {
                    let (header, rows) = output::sweep_table(&sw.grid, &["n", "m"]);
                    output::write_csv(out, &sw.grid.provenance, &header, &rows)?;
                    let (header, rows) = output::sweep_table(&sw.slice, &[]);
                    output::write_csv(&output::sibling(out, "_slice.csv"), &sw.slice.provenance, &header, &rows)?;
                    output::write_json(
                        &output::sibling(out, ".json"),
                        &sidecar(&sw.grid, Some(&sw.invalid_cells), Some(&sw.slice)),
                    )?;
                }
            }
            if let Some(a) = sw.grid.argmax_of("p_e") {
                say(
                    stdout,
                    &format!(
                        "max p_e = {} at (n, m) = ({}, {}), (a, b) = ({}, {})\n",
                        output::fmt_sig(a.value),
                        a.coords[0],
                        a.coords[1],
                        output::fmt_sig(a.coords[2]),
                        output::fmt_sig(a.coords[3])
                    ),
                )?;
            }
            Ok(EXIT_OK)
        }
        Task::Mc { scenario, trials, seed, out } => {
            let report = match TrialBatch::new(*scenario, *trials, *seed)?.run() {
                Ok(r) => r,
                // Honest runs refuse to produce a report that breaks Table 1.
                Err(bubqkd::Error::Table1Violation(msg)) => {
                    say(stdout, &format!("table-1 violation: {msg}\n"))?;
                    return Ok(EXIT_CHECK_FAILED);
                }
                Err(e) => return Err(e.into()),
            };
            let doc = McDocument { provenance: &provenance, report: &report };
            match cfg.format {
                Format::Json => output::write_json(out, &doc)?,
                Format::Csv => {
                    let (header, rows) = mc_cells_table(&report);
                    output::write_csv(out, &provenance, &header, &rows)?;
                    output::write_json(&output::sibling(out, ".json"), &doc)?;
                }
            }
            for c in &report.checks {
                say(
                    stdout,
                    &format!(
                        "{}: {} (observed {}, expected {}, {:.2} sigma)\n",
                        c.name,
                        if c.pass { "PASS" } else { "FAIL" },
                        output::fmt_sig(c.observed),
                        output::fmt_sig(c.expected),
                        c.sigma_deviation
                    ),
                )?;
            }
            Ok(if report.all_checks_pass() { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

/// Runs one invocation. `workers` normally comes from [`WORKERS_ENV`].
pub fn run<I, T>(args: I, workers: Option<&str>, stdout: &mut (dyn Write + Send), stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = parse_workers(workers).and_then(|w| resolve(cli, w)).and_then(|cfg| {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cfg.workers {
            pool = pool.num_threads(n);
        }
        let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;
        pool.install(|| execute(&cfg, stdout))
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "bubqkd: {e}");
            match e {
                CliError::Model(_) => EXIT_CHECK_FAILED,
                _ => EXIT_USAGE,
            }
        }
    }
}
