//! Command-line front end.
//!
//! Every command expands its flags into the cartesian product of the listed
//! values and prints one `key=value` line per point to stdout, or one JSON
//! object per line with `--json`. A short summary goes to stderr. With
//! `--out` the points are also written as CSV (the errata command writes
//! its text report there instead).
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 validation.

pub mod config;
pub mod csv;
pub mod errata;
pub mod figures;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::analytic::{ber_psa, ber_sa, objective_sa, ratio_u};
use crate::cardano::{optimal_n_bruteforce, optimal_n_closed_form};
use crate::dinkelbach::{bisection_solve, DinkelbachConfig, PowerBox};
use crate::model::{ensure_valid, Allocation, SystemParams, DEFAULT_POWER_BUDGET};
use crate::simulator::{estimate_ber, Mode, SimConfig, DEFAULT_CONFIDENCE, DEFAULT_SHARDS};

use config::{read_config_file, ExperimentConfig};
use csv::CsvRow;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

const DEFAULT_TRIALS: u64 = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("invalid: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "dcsk-alloc", version, about = "Reference and power allocation for multi-user OFDM-DCSK")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic BER at each point.
    Ber(Common),
    /// Closed-form optimal number of references.
    OptimalN(Common),
    /// Joint reference and power allocation.
    JointOpt(Common),
    /// Monte Carlo BER estimate.
    Simulate(Common),
    /// Reproduce one figure as CSV (ids 4 to 11).
    Figure {
        id: String,
        #[command(flatten)]
        common: Common,
    },
    /// Discrepancy report between the printed formulas.
    Errata(Common),
}

/// Flags shared by all commands. Swept quantities accept lists and ranges
/// (see [`config`]).
#[derive(Debug, Clone, Default, Args)]
struct Common {
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long = "ebn0-db", allow_hyphen_values = true)]
    ebn0_db: Option<String>,
    #[arg(long)]
    n0: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    ct: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    shards: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    config: Option<String>,
    /// sa or psa.
    #[arg(long)]
    mode: Option<String>,
    /// complex or real.
    #[arg(long)]
    noise: Option<String>,
    /// numeric or kkt-verbatim.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    confidence: Option<String>,
}

impl Common {
    fn into_config(self) -> Result<ExperimentConfig, CliError> {
        let mut pairs: Vec<(String, String)> = match &self.config {
            Some(path) => read_config_file(Path::new(path))?,
            None => Vec::new(),
        };
        let flags = [
            ("m", self.m),
            ("beta", self.beta),
            ("p", self.p),
            ("ebn0-db", self.ebn0_db),
            ("n0", self.n0),
            ("n", self.n),
            ("a", self.a),
            ("b", self.b),
            ("ct", self.ct),
            ("trials", self.trials),
            ("seed", self.seed),
            ("shards", self.shards),
            ("out", self.out),
            ("mode", self.mode),
            ("noise", self.noise),
            ("method", self.method),
            ("confidence", self.confidence),
        ];
        pairs.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
        if self.json {
            pairs.push(("json".into(), "true".into()));
        }
        ExperimentConfig::from_pairs(pairs)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Ber(c) => cmd_ber(&c.into_config()?, out, err),
        Command::OptimalN(c) => cmd_optimal_n(&c.into_config()?, out, err),
        Command::JointOpt(c) => cmd_joint_opt(&c.into_config()?, out, err),
        Command::Simulate(c) => cmd_simulate(&c.into_config()?, out, err),
        Command::Figure { id, common } => {
            let id = figures::parse_figure_id(&id)?;
            cmd_figure(id, &common.into_config()?, out, err)
        }
        Command::Errata(c) => cmd_errata(&c.into_config()?, out, err),
    }
}

/// A point of the scenario grid with its requested Eb/N0.
struct Point {
    params: SystemParams,
    db: f64,
}

fn points(cfg: &ExperimentConfig) -> Result<Vec<Point>, CliError> {
    let n0 = cfg.n0.unwrap_or(1.0);
    let mut out = Vec::new();
    for &m in cfg.m.as_deref().unwrap_or(&[64]) {
        for &beta in cfg.beta.as_deref().unwrap_or(&[128]) {
            for &p in cfg.p.as_deref().unwrap_or(&[1]) {
                for &db in cfg.ebn0_db.as_deref().unwrap_or(&[10.0]) {
                    out.push(Point { params: SystemParams::from_ebn0_db(m, beta, p, db, n0)?, db });
                }
            }
        }
    }
    Ok(out)
}

/// Allocations at one scenario: every (N, a, b) combination. Without `--n`
/// the closed-form optimum is used.
fn allocations(cfg: &ExperimentConfig, params: &SystemParams) -> Result<Vec<Allocation>, CliError> {
    let refs = match &cfg.n {
        Some(n) => n.clone(),
        None => vec![optimal_n_closed_form(params)?.0],
    };
    let mut out = Vec::new();
    for &n in &refs {
        for &a in cfg.a.as_deref().unwrap_or(&[1.0]) {
            for &b in cfg.b.as_deref().unwrap_or(&[1.0]) {
                let alloc = Allocation::new(n, a, b);
                ensure_valid(params, &alloc, None)?;
                out.push(alloc);
            }
        }
    }
    Ok(out)
}

fn mode_of(cfg: &ExperimentConfig) -> Mode {
    cfg.mode.unwrap_or(if cfg.a.is_some() || cfg.b.is_some() { Mode::Psa } else { Mode::Sa })
}

fn sim_config(cfg: &ExperimentConfig) -> SimConfig {
    SimConfig {
        shards: cfg.shards.unwrap_or(DEFAULT_SHARDS),
        confidence: cfg.confidence.unwrap_or(DEFAULT_CONFIDENCE),
        noise: cfg.noise.unwrap_or_default(),
        ..Default::default()
    }
}

fn budget(cfg: &ExperimentConfig) -> Result<f64, CliError> {
    let ct = cfg.ct.unwrap_or(DEFAULT_POWER_BUDGET);
    if ct.is_finite() && ct > 0.0 {
        Ok(ct)
    } else {
        Err(CliError::Validation(format!("C_T must be positive, got {ct}")))
    }
}

/// Ordered key/value record printed for one point.
struct Record(Vec<(&'static str, Value)>);

impl Record {
    fn new() -> Self {
        Record(Vec::new())
    }

    fn put(mut self, key: &'static str, v: impl Into<Value>) -> Self {
        self.0.push((key, v.into()));
        self
    }

    fn scenario(self, pt: &Point) -> Self {
        self.put("m", pt.params.m).put("beta", pt.params.beta).put("p", pt.params.users).put("ebn0_db", pt.db)
    }

    fn line(&self) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect();
        parts.join(" ")
    }

    fn json(&self) -> String {
        let map: Map<String, Value> = self.0.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        Value::Object(map).to_string()
    }
}

fn emit(cfg: &ExperimentConfig, out: &mut dyn Write, records: &[Record]) -> Result<(), CliError> {
    for r in records {
        let text = if cfg.json { r.json() } else { r.line() };
        writeln!(out, "{text}").map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn write_csv(cfg: &ExperimentConfig, rows: &[CsvRow]) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => write_file(path, &csv::render(rows)),
        None => Ok(()),
    }
}

fn row(id: &str, pt: &Point, alloc: &Allocation) -> CsvRow {
    CsvRow {
        figure_id: id.to_string(),
        m: pt.params.m,
        beta: pt.params.beta,
        p: pt.params.users,
        ebn0_db: pt.db,
        n: alloc.n(),
        a: alloc.a(),
        b: alloc.b(),
        power_sum: alloc.power_sum(pt.params.m),
        ber_analytic: None,
        ber_mc: None,
        ci_low: None,
        ci_high: None,
        bits: None,
        seed: None,
    }
}

fn summary(err: &mut dyn Write, text: &str) {
    let _ = writeln!(err, "{text}");
}

pub fn cmd_ber(cfg: &ExperimentConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mode = mode_of(cfg);
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for pt in points(cfg)? {
        for alloc in allocations(cfg, &pt.params)? {
            let alloc = crate::simulator::effective_alloc(&alloc, mode);
            let ber = match mode {
                Mode::Sa => ber_sa(&pt.params, alloc.n())?,
                Mode::Psa => ber_psa(&pt.params, &alloc)?,
            };
            let mut r = Record::new().put("ber_analytic", ber).put("mode", format!("{mode:?}").to_lowercase());
            r = r.scenario(&pt).put("n", alloc.n()).put("a", alloc.a()).put("b", alloc.b());
            if mode == Mode::Sa {
                r = r.put("objective", objective_sa(&pt.params, alloc.n())?);
            } else {
                r = r.put("ratio_u", ratio_u(&pt.params, &alloc)?);
            }
            records.push(r);
            let mut csv_row = row("ber", &pt, &alloc);
            csv_row.ber_analytic = Some(ber);
            rows.push(csv_row);
        }
    }
    emit(cfg, out, &records)?;
    write_csv(cfg, &rows)?;
    summary(err, &format!("evaluated {} point(s)", records.len()));
    Ok(())
}

pub fn cmd_optimal_n(cfg: &ExperimentConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for pt in points(cfg)? {
        let n_star = optimal_n_closed_form(&pt.params)?.0;
        let brute = optimal_n_bruteforce(&pt.params)?.0;
        let ber = ber_sa(&pt.params, n_star)?;
        records.push(
            Record::new()
                .put("n_star", n_star)
                .scenario(&pt)
                .put("n_bruteforce", brute)
                .put("objective", objective_sa(&pt.params, n_star)?)
                .put("ber_analytic", ber),
        );
        let mut csv_row = row("optimal-n", &pt, &Allocation::equal_power(n_star));
        csv_row.ber_analytic = Some(ber);
        rows.push(csv_row);
    }
    emit(cfg, out, &records)?;
    write_csv(cfg, &rows)?;
    summary(err, &format!("closed-form optimum for {} scenario(s)", records.len()));
    Ok(())
}

pub fn cmd_joint_opt(cfg: &ExperimentConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let dink = DinkelbachConfig {
        power: PowerBox::new(budget(cfg)?),
        method: cfg.method.unwrap_or_default(),
        ..Default::default()
    };
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for pt in points(cfg)? {
        let res = bisection_solve(&pt.params, &dink)?;
        let alloc = res.alloc_star;
        let u = ratio_u(&pt.params, &alloc)?;
        let ber = ber_psa(&pt.params, &alloc)?;
        records.push(
            Record::new()
                .put("n_star", alloc.n())
                .put("a_star", alloc.a())
                .put("b_star", alloc.b())
                .put("q_star", res.q_star)
                .put("ratio_u", u)
                .put("ber_analytic", ber)
                .scenario(&pt)
                .put("ct", dink.power.budget)
                .put("power_sum", alloc.power_sum(pt.params.m))
                .put("f_residual", res.v_residual)
                .put("iterations", res.outer_iterations)
                .put("converged", res.converged)
                .put("method", res.inner_method.to_string())
                .put("fallbacks", res.fallbacks),
        );
        let mut csv_row = row("joint-opt", &pt, &alloc);
        csv_row.ber_analytic = Some(ber);
        rows.push(csv_row);
    }
    emit(cfg, out, &records)?;
    write_csv(cfg, &rows)?;
    summary(err, &format!("joint allocation for {} scenario(s)", records.len()));
    Ok(())
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mode = mode_of(cfg);
    let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
    let seed = cfg.seed.unwrap_or(figures::DEFAULT_SEED);
    let sim = sim_config(cfg);
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for pt in points(cfg)? {
        for alloc in allocations(cfg, &pt.params)? {
            let alloc = crate::simulator::effective_alloc(&alloc, mode);
            let res = estimate_ber(&pt.params, &alloc, trials, seed, mode, &sim)?;
            let ber = match mode {
                Mode::Sa => ber_sa(&pt.params, alloc.n())?,
                Mode::Psa => ber_psa(&pt.params, &alloc)?,
            };
            let est = res.pooled;
            let per_user: Vec<Value> =
                res.per_user.iter().map(|u| json!({"bit_errors": u.bit_errors, "ber": u.ber})).collect();
            let mut r = Record::new()
                .put("ber_mc", est.ber)
                .put("ci_low", est.ci_low)
                .put("ci_high", est.ci_high)
                .put("bit_errors", est.bit_errors)
                .put("bits", est.bits)
                .put("ber_analytic", ber)
                .scenario(&pt)
                .put("n", alloc.n())
                .put("a", alloc.a())
                .put("b", alloc.b())
                .put("mode", format!("{mode:?}").to_lowercase())
                .put("trials", trials)
                .put("seed", seed)
                .put("shards", sim.shards);
            if cfg.json {
                r = r.put("per_user", per_user);
            }
            records.push(r);
            let mut csv_row = row("simulate", &pt, &alloc);
            csv_row.ber_analytic = Some(ber);
            csv_row.ber_mc = Some(est.ber);
            csv_row.ci_low = Some(est.ci_low);
            csv_row.ci_high = Some(est.ci_high);
            csv_row.bits = Some(est.bits);
            csv_row.seed = Some(seed);
            rows.push(csv_row);
        }
    }
    emit(cfg, out, &records)?;
    write_csv(cfg, &rows)?;
    summary(err, &format!("simulated {} point(s), {trials} frames each", records.len()));
    Ok(())
}

pub fn cmd_figure(id: u32, cfg: &ExperimentConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let rows = figures::figure_rows(id, cfg)?;
    let text = csv::render(&rows);
    let record = match &cfg.out {
        Some(path) => {
            write_file(path, &text)?;
            Record::new().put("figure", id).put("rows", rows.len()).put("out", path.display().to_string())
        }
        None => {
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
            summary(err, &format!("figure {id}: {} rows", rows.len()));
            return Ok(());
        }
    };
    emit(cfg, out, &[record])?;
    summary(err, &format!("figure {id}: {} rows", rows.len()));
    Ok(())
}

pub fn cmd_errata(cfg: &ExperimentConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let report = errata::errata_report()?;
    match &cfg.out {
        Some(path) => {
            write_file(path, &report)?;
            emit(cfg, out, &[Record::new().put("errata", "written").put("out", path.display().to_string())])?;
        }
        None if cfg.json => {
            writeln!(out, "{}", json!({ "report": report })).map_err(|e| CliError::Io(e.to_string()))?;
        }
        None => out.write_all(report.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
    }
    summary(err, "errata report done");
    Ok(())
}
