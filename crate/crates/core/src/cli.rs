//! The `lst` command line.
//!
//! Every subcommand reads an optional JSON config (`--config`) whose fields
//! mirror the flags; flags given on the command line win. Exit codes: 0 on
//! success, 1 on usage, configuration or I/O errors, 2 when `oracle-check`
//! finds a failing check.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::codes::{LogicalStatePrep, StabilizerCode};
use crate::estimator::{lst_expectation, EstimatorConfig};
use crate::experiments::{
    self, code_size_sweep, logical_scaling_sweep, oracle_check, threshold_sweep, CodeSizeConfig,
    LogicalScalingConfig, OracleCheckConfig, ThresholdConfig,
};
use crate::noise::NoiseSpec;
use crate::pauli::PauliSum;
use crate::shadow::{self, ShotSimulator};

#[derive(Debug, Parser)]
#[command(name = "lst", version, about = "Logical shadow tomography experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a noisy encoded state and record a shadow ensemble.
    Sample(Common),
    /// Estimate a logical observable from a recorded ensemble.
    Estimate(EstimateArgs),
    /// LST infidelity of |0̄⟩ against the bare-qubit curve over a p-grid.
    ThresholdSweep(Common),
    /// Fidelity estimates of |0̄⟩ for several codes and shot budgets.
    CodeSizeSweep(Common),
    /// Spread of ⟨X̄…X̄⟩ on GHZ states over k code blocks.
    LogicalScalingSweep(Common),
    /// Randomized cross-checks against dense linear algebra.
    OracleCheck(Common),
}

/// Flags shared by all subcommands; each overrides the matching config field.
#[derive(Debug, Args, Default)]
pub struct Common {
    /// JSON file with any of the fields below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in code name or code file; repeat for several sectors or codes.
    #[arg(long = "code")]
    pub code: Vec<String>,
    /// Logical state: zero, plus, ghz, or a generator list like +XX,+ZZ.
    #[arg(long)]
    pub prep: Option<String>,
    /// Depolarizing rate, or a comma-separated p-grid for threshold sweeps.
    #[arg(long)]
    pub p: Option<String>,
    /// Shot count; comma-separated budgets for code-size sweeps.
    #[arg(long)]
    pub shots: Option<String>,
    /// Power m of f(ρ) = ρ^m.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bootstrap resamples.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Logical-qubit counts for logical-scaling sweeps.
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    /// Also write a gnuplot script plotting the CSV output.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Ensemble file written by `lst sample`.
    pub ensemble: PathBuf,
    /// Logical observable as a Pauli sum, e.g. "0.5*I, 0.5*Z" (default Z…Z).
    #[arg(long)]
    pub observable: Option<String>,
    /// Coefficients c_1..c_m of f(ρ) = Σ c_p ρ^p; overrides --m.
    #[arg(long, value_delimiter = ',')]
    pub coefficients: Option<Vec<f64>>,
    /// Per-block numerator/denominator samples as CSV.
    #[arg(long)]
    pub samples_csv: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

/// Config file contents; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub code: Vec<String>,
    pub prep: Option<String>,
    pub p: Option<f64>,
    pub p_grid: Option<Vec<f64>>,
    pub shots: Option<u64>,
    pub shot_budgets: Option<Vec<u64>>,
    pub m: Option<usize>,
    pub coefficients: Option<Vec<f64>>,
    pub ks: Option<Vec<usize>>,
    pub observable: Option<String>,
    pub seed: Option<u64>,
    pub bootstrap: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub gnuplot: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Run(String),
}

fn run_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Run(e.to_string())
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad {what} value `{}`", s.trim())))
        })
        .collect()
}

impl ExperimentConfig {
    /// The config file, if any, overridden by flags.
    pub fn from_flags(c: &Common) -> Result<Self, CliError> {
        let mut cfg = match &c.config {
            Some(path) => {
                let f = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                serde_json::from_reader(BufReader::new(f))
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
            }
            None => ExperimentConfig::default(),
        };
        if !c.code.is_empty() {
            cfg.code = c.code.clone();
        }
        if let Some(p) = &c.p {
            let grid: Vec<f64> = parse_list(p, "p")?;
            if grid.len() == 1 {
                cfg.p = Some(grid[0]);
            }
            cfg.p_grid = Some(grid);
        }
        if let Some(s) = &c.shots {
            let budgets: Vec<u64> = parse_list(s, "shots")?;
            cfg.shots = budgets.last().copied();
            cfg.shot_budgets = Some(budgets);
        }
        macro_rules! over {
            ($($f:ident),*) => { $( if c.$f.is_some() { cfg.$f = c.$f.clone(); } )* };
        }
        over!(prep, m, seed, bootstrap, out, threads, ks, gnuplot);
        for p in cfg.p.iter().chain(cfg.p_grid.iter().flatten()) {
            if !(0.0..=1.0).contains(p) {
                return Err(CliError::Usage(format!("p = {p} outside [0, 1]")));
            }
        }
        Ok(cfg)
    }

    fn codes(&self) -> Result<Vec<StabilizerCode>, CliError> {
        if self.code.is_empty() {
            return Ok(vec![StabilizerCode::five_qubit()]);
        }
        self.code
            .iter()
            .map(|s| StabilizerCode::resolve(s).map_err(|e| CliError::Usage(e.to_string())))
            .collect()
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn bootstrap(&self) -> usize {
        self.bootstrap.unwrap_or(500)
    }

    fn out(&self) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Usage("--out is required".into()))
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(run_err)?;
    for r in rows {
        w.serialize(r).map_err(run_err)?;
    }
    w.flush().map_err(run_err)
}

/// Writes a gnuplot script drawing columns `ys` against column `x` of `csv`.
fn write_gnuplot(script: &Path, csv: &Path, x: &str, ys: &[&str], logscale: bool) -> Result<(), CliError> {
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\n");
    if logscale {
        s.push_str("set logscale xy\n");
    }
    s.push_str(&format!("set xlabel '{x}'\nplot "));
    let plots: Vec<String> = ys
        .iter()
        .map(|y| format!("'{}' using '{x}':'{y}' with linespoints", csv.display()))
        .collect();
    s.push_str(&plots.join(", \\\n     "));
    s.push('\n');
    std::fs::write(script, s).map_err(run_err)
}

fn cmd_sample(c: &Common) -> Result<(), CliError> {
    let cfg = ExperimentConfig::from_flags(c)?;
    let codes = cfg.codes()?;
    let k: usize = codes.iter().map(|c| c.k_logical()).sum();
    let prep = LogicalStatePrep::parse(cfg.prep.as_deref().unwrap_or("zero"), k)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let shots = cfg.shots.unwrap_or(1000);
    if shots == 0 {
        return Err(CliError::Usage("shots must be positive".into()));
    }
    let noise = NoiseSpec::new(cfg.p.unwrap_or(0.0), cfg.seed());
    let sim = ShotSimulator::new(&codes, &prep, noise).map_err(|e| CliError::Usage(e.to_string()))?;
    let ens = sim.acquire(shots);
    let bytes = shadow::encode_ensemble(&ens);
    let out = cfg.out()?;
    std::fs::write(out, &bytes).map_err(run_err)?;
    let m = &ens.metadata;
    println!(
        "{}: {} snapshots, codes [{}], {} x {} qubits, prep {}, p = {}, seed {}, sha256 {}",
        out.display(),
        ens.len(),
        m.code_names.join(", "),
        m.sectors,
        m.sector_qubits,
        m.prep,
        m.noise.p,
        m.master_seed,
        shadow::sha256_hex(&bytes)
    );
    Ok(())
}

fn cmd_estimate(a: &EstimateArgs) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::from_flags(&a.common)?;
    if a.observable.is_some() {
        cfg.observable = a.observable.clone();
    }
    if a.coefficients.is_some() {
        cfg.coefficients = a.coefficients.clone();
    }
    let f = File::open(&a.ensemble).map_err(|e| CliError::Run(format!("{}: {e}", a.ensemble.display())))?;
    let ens = shadow::read_ensemble(BufReader::new(f)).map_err(run_err)?;
    let codes = if cfg.code.is_empty() {
        ens.metadata
            .code_names
            .iter()
            .map(|n| StabilizerCode::resolve(n).map_err(|e| CliError::Usage(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        cfg.codes()?
    };
    let names: Vec<String> = codes.iter().map(|c| c.name().to_string()).collect();
    let m = &ens.metadata;
    if names != m.code_names || codes.iter().any(|c| c.n_physical() != m.sector_qubits) {
        return Err(CliError::Run(format!(
            "codes [{}] do not match the ensemble's [{}] ({} x {} qubits)",
            names.join(", "),
            m.code_names.join(", "),
            m.sectors,
            m.sector_qubits
        )));
    }
    let code = StabilizerCode::tensor(&codes).map_err(run_err)?;
    let k = code.k_logical();
    let observable = match &cfg.observable {
        Some(text) => PauliSum::parse(text).map_err(|e| CliError::Usage(e.to_string()))?,
        None => PauliSum::single("Z".repeat(k).parse().expect("valid Pauli string")),
    };
    let coefficients = match (&cfg.coefficients, cfg.m) {
        (Some(c), _) => c.clone(),
        (None, m) => EstimatorConfig::power(m.unwrap_or(1).max(1)).coefficients,
    };
    let ecfg = EstimatorConfig {
        coefficients,
        bootstrap: cfg.bootstrap(),
        bootstrap_seed: cfg.seed(),
        ..EstimatorConfig::default()
    };
    let report = lst_expectation(&ens, &code, &observable, &ecfg).map_err(run_err)?;
    let json = serde_json::to_string_pretty(&report).map_err(run_err)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, json + "\n").map_err(run_err)?,
        None => println!("{json}"),
    }
    if let Some(path) = &a.samples_csv {
        let f = File::create(path).map_err(run_err)?;
        report.write_samples_csv(BufWriter::new(f)).map_err(run_err)?;
    }
    if report.degenerate_denominator {
        eprintln!("warning: denominator mean is within 5 bootstrap deviations of zero");
    }
    Ok(())
}

fn cmd_threshold(c: &Common) -> Result<(), CliError> {
    let cfg = ExperimentConfig::from_flags(c)?;
    let code = cfg.codes()?.remove(0);
    let tc = ThresholdConfig {
        p_grid: cfg.p_grid.clone().unwrap_or_else(experiments::default_p_grid),
        shots: cfg.shots.unwrap_or(3000),
        seed: cfg.seed(),
        bootstrap: cfg.bootstrap(),
    };
    let rows = threshold_sweep(&code, &tc).map_err(|e| CliError::Usage(e.to_string()))?;
    let out = cfg.out()?;
    write_csv(out, &rows)?;
    if let Some(g) = &cfg.gnuplot {
        write_gnuplot(g, out, "p", &["physical_infidelity", "lst_m1", "lst_m2", "dense_m1", "dense_m2"], true)?;
    }
    Ok(())
}

fn cmd_code_size(c: &Common) -> Result<(), CliError> {
    let cfg = ExperimentConfig::from_flags(c)?;
    let codes = cfg.codes()?;
    let defaults = CodeSizeConfig::default();
    let cc = CodeSizeConfig {
        p: cfg.p.unwrap_or(defaults.p),
        shot_budgets: cfg.shot_budgets.clone().unwrap_or(defaults.shot_budgets),
        seed: cfg.seed(),
        bootstrap: cfg.bootstrap(),
    };
    let rows = code_size_sweep(&codes, &cc).map_err(|e| CliError::Usage(e.to_string()))?;
    let out = cfg.out()?;
    write_csv(out, &rows)?;
    if let Some(g) = &cfg.gnuplot {
        write_gnuplot(g, out, "shots", &["bootstrap_std"], true)?;
    }
    Ok(())
}

fn cmd_logical_scaling(c: &Common) -> Result<(), CliError> {
    let cfg = ExperimentConfig::from_flags(c)?;
    let code = cfg.codes()?.remove(0);
    let defaults = LogicalScalingConfig::default();
    let lc = LogicalScalingConfig {
        ks: cfg.ks.clone().unwrap_or(defaults.ks),
        p: cfg.p.unwrap_or(defaults.p),
        shots: cfg.shots.unwrap_or(defaults.shots),
        seed: cfg.seed(),
        bootstrap: cfg.bootstrap(),
    };
    let rows = logical_scaling_sweep(&code, &lc).map_err(|e| CliError::Usage(e.to_string()))?;
    let out = cfg.out()?;
    write_csv(out, &rows)?;
    if let Some(g) = &cfg.gnuplot {
        write_gnuplot(g, out, "k", &["std"], false)?;
    }
    Ok(())
}

/// Returns whether every check passed.
fn cmd_oracle_check(c: &Common) -> Result<bool, CliError> {
    let cfg = ExperimentConfig::from_flags(c)?;
    let defaults = OracleCheckConfig::default();
    let oc = OracleCheckConfig {
        seed: cfg.seed(),
        shots: cfg.shots.unwrap_or(defaults.shots),
        ..defaults
    };
    let results = oracle_check(&oc).map_err(run_err)?;
    let mut sink: Box<dyn Write> = match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(run_err)?)),
        None => Box::new(std::io::stdout()),
    };
    for r in &results {
        writeln!(sink, "{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)
            .map_err(run_err)?;
    }
    Ok(results.iter().all(|r| r.passed))
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let common = match &cli.command {
        Command::Estimate(a) => &a.common,
        Command::Sample(c)
        | Command::ThresholdSweep(c)
        | Command::CodeSizeSweep(c)
        | Command::LogicalScalingSweep(c)
        | Command::OracleCheck(c) => c,
    };
    if let Some(n) = common.threads {
        // Fails only if a pool already exists, as in repeated in-process runs.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match &cli.command {
        Command::Sample(c) => cmd_sample(c).map(|_| 0),
        Command::Estimate(a) => cmd_estimate(a).map(|_| 0),
        Command::ThresholdSweep(c) => cmd_threshold(c).map(|_| 0),
        Command::CodeSizeSweep(c) => cmd_code_size(c).map(|_| 0),
        Command::LogicalScalingSweep(c) => cmd_logical_scaling(c).map(|_| 0),
        Command::OracleCheck(c) => cmd_oracle_check(c).map(|ok| if ok { 0 } else { 2 }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"p": 0.2, "shots": 10, "seed": 4}"#).unwrap();
        let c = Common {
            config: Some(path),
            shots: Some("30".into()),
            ..Common::default()
        };
        let cfg = ExperimentConfig::from_flags(&c).unwrap();
        assert_eq!((cfg.p, cfg.shots, cfg.seed), (Some(0.2), Some(30), Some(4)));
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let c = Common {
            p: Some("1.5".into()),
            ..Common::default()
        };
        assert!(matches!(ExperimentConfig::from_flags(&c), Err(CliError::Usage(_))));
        assert_eq!(run(["lst", "sample", "--shots", "0", "--out", "/dev/null"]), 1);
        assert_eq!(run(["lst", "no-such-command"]), 1);
    }
}
