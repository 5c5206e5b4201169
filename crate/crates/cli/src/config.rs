use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use t3_core::ledger::{ChristoffelBound, Criterion, InverseBound, LedgerConfig};
use t3_core::metric::PerturbationKind;
use t3_core::one_form::SolverOptions;
use t3_core::verify::Suite;

use crate::CliError;

/// Environment variable that overrides the output directory of a config file.
pub const OUTPUT_DIR_ENV: &str = "T3EST_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Ledger,
    Verify,
    OneForm,
    SolveDelta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Md,
}

/// Everything a run depends on. Artifacts embed it, and feeding it back via
/// `t3est run --config` reproduces them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub grid_n: usize,
    pub seed: u64,
    pub delta: f64,
    pub kind: PerturbationKind,
    pub suites: Vec<Suite>,
    /// where artifacts go; not part of the embedded config or its hash
    #[serde(skip_serializing_if = "path_is_empty")]
    pub output_dir: PathBuf,
    pub format: Format,
    pub n_cases: usize,
    pub cutoff_samples: usize,
    pub criteria: Vec<Criterion>,
    pub solver: SolverOptions,
    pub axis: usize,
    pub dump_field: bool,
    pub ledger: LedgerConfig,
}

/// Suites run when none are named. The gating nonflat suite is left out: it
/// is only defined below the absorption threshold and must be asked for.
pub const DEFAULT_SUITES: [Suite; 7] = [
    Suite::FlatInjectivity,
    Suite::Schauder,
    Suite::NonflatExploratory,
    Suite::LaplacianComparison,
    Suite::NormComparison,
    Suite::Auxiliary,
    Suite::Cutoff,
];

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Ledger,
            grid_n: 32,
            seed: 0,
            delta: 1e-2,
            kind: PerturbationKind::Conformal,
            suites: DEFAULT_SUITES.to_vec(),
            output_dir: PathBuf::from("t3est-out"),
            format: Format::Json,
            n_cases: 20,
            cutoff_samples: 301,
            criteria: vec![Criterion::Absorption, Criterion::OneForm],
            solver: SolverOptions::default(),
            axis: 0,
            dump_field: false,
            ledger: LedgerConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.grid_n < 4 || !self.grid_n.is_multiple_of(2) {
            return bad(format!("grid_n must be even and at least 4, got {}", self.grid_n));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return bad(format!("delta must be a finite non-negative number, got {}", self.delta));
        }
        if self.n_cases == 0 {
            return bad("n_cases must be positive".into());
        }
        if self.suites.is_empty() {
            return bad("no suites selected".into());
        }
        if self.criteria.is_empty() {
            return bad("no solve-delta criteria selected".into());
        }
        if self.axis > 2 {
            return bad(format!("axis must be 0, 1 or 2, got {}", self.axis));
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return bad("solver tol and max_iter must be positive".into());
        }
        if self.command == Command::Verify && self.suites.contains(&Suite::Cutoff) && self.cutoff_samples < 300 {
            return bad(format!("cutoff_samples must be at least 300, got {}", self.cutoff_samples));
        }
        Ok(())
    }

    /// The config without its output location, as embedded in artifacts.
    pub fn canonical(&self) -> Self {
        Self { output_dir: PathBuf::new(), ..self.clone() }
    }

    /// sha256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.canonical()).expect("config serializes");
        hex(&Sha256::digest(bytes))
    }
}

fn path_is_empty(p: &Path) -> bool {
    p.as_os_str().is_empty()
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn parse_kind(s: &str) -> Result<PerturbationKind, String> {
    s.parse().map_err(|e: t3_core::Error| e.to_string())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: t3_core::Error| e.to_string())
}

fn parse_criterion(s: &str) -> Result<Criterion, String> {
    match s {
        "absorption" => Ok(Criterion::Absorption),
        "one-form" | "one_form" => Ok(Criterion::OneForm),
        _ => Err(format!("unknown criterion `{s}` (absorption, one-form)")),
    }
}

fn parse_christoffel(s: &str) -> Result<ChristoffelBound, String> {
    match s {
        "quadratic" => Ok(ChristoffelBound::Quadratic),
        "linear" => Ok(ChristoffelBound::Linear),
        _ => Err(format!("unknown Christoffel bound `{s}` (quadratic, linear)")),
    }
}

fn parse_inverse(s: &str) -> Result<InverseBound, String> {
    match s {
        "stated" => Ok(InverseBound::Stated),
        "derived" => Ok(InverseBound::Derived),
        _ => Err(format!("unknown inverse bound `{s}` (stated, derived)")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "t3est", version, about = "Constant ledger, estimate verification and harmonic 1-forms on perturbed tori")]
struct Cli {
    /// JSON run config; flags and the environment override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args)]
struct Common {
    /// grid points per axis
    #[arg(long = "grid", global = true)]
    grid_n: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// nominal C¹ size of the metric perturbation
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// conformal, offdiag or random_seeded
    #[arg(long, global = true, value_parser = parse_kind)]
    kind: Option<PerturbationKind>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Christoffel bound in the ledger chain: quadratic or linear
    #[arg(long, global = true, value_parser = parse_christoffel)]
    christoffel: Option<ChristoffelBound>,
    /// inverse-metric bound in the ledger chain: stated or derived
    #[arg(long, global = true, value_parser = parse_inverse)]
    inverse: Option<InverseBound>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Evaluate and export the constant ledger
    Ledger,
    /// Run verification suites
    Verify {
        /// suite names, repeatable or comma separated
        #[arg(long = "suite", value_delimiter = ',', value_parser = parse_suite)]
        suites: Vec<Suite>,
        /// random band-limited test functions per suite
        #[arg(long = "cases")]
        n_cases: Option<usize>,
        #[arg(long)]
        cutoff_samples: Option<usize>,
    },
    /// Build and certify the harmonic 1-form
    OneForm {
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        axis: Option<usize>,
        /// also write ω and g as binary snapshots
        #[arg(long)]
        dump_field: bool,
    },
    /// Bisect for the largest admissible δ
    SolveDelta {
        /// absorption or one-form, repeatable or comma separated
        #[arg(long, value_delimiter = ',', value_parser = parse_criterion)]
        criterion: Vec<Criterion>,
    },
    /// Execute the command recorded in --config
    Run,
}

/// Builds the run config from defaults, the optional config file, the
/// output-directory environment override and flags, in increasing priority.
pub fn parse_config<I, T>(args: I, env_output_dir: Option<PathBuf>) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = env_output_dir {
        cfg.output_dir = dir;
    }
    let c = cli.common;
    macro_rules! set {
        ($($src:expr => $dst:expr),* $(,)?) => {$(if let Some(v) = $src { $dst = v; })*};
    }
    set!(
        c.grid_n => cfg.grid_n,
        c.seed => cfg.seed,
        c.delta => cfg.delta,
        c.kind => cfg.kind,
        c.output_dir => cfg.output_dir,
        c.format => cfg.format,
        c.christoffel => cfg.ledger.christoffel,
        c.inverse => cfg.ledger.inverse,
    );
    match cli.command {
        Cmd::Ledger => cfg.command = Command::Ledger,
        Cmd::Verify { suites, n_cases, cutoff_samples } => {
            cfg.command = Command::Verify;
            if !suites.is_empty() {
                cfg.suites = suites;
            }
            set!(n_cases => cfg.n_cases, cutoff_samples => cfg.cutoff_samples);
        }
        Cmd::OneForm { tol, max_iter, axis, dump_field } => {
            cfg.command = Command::OneForm;
            set!(tol => cfg.solver.tol, max_iter => cfg.solver.max_iter, axis => cfg.axis);
            cfg.dump_field |= dump_field;
        }
        Cmd::SolveDelta { criterion } => {
            cfg.command = Command::SolveDelta;
            if !criterion.is_empty() {
                cfg.criteria = criterion;
            }
        }
        Cmd::Run => {
            if cli.config.is_none() {
                return Err(CliError::Config("`run` needs --config".into()));
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
