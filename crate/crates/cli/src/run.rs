use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use t3_core::field::GridSpec;
use t3_core::ledger::{max_admissible_delta, Ledger, DEFAULT_EXPORT_DELTAS};
use t3_core::metric::perturbation_family;
use t3_core::one_form::{harmonic_one_form, write_one_form_snapshot, Regime};
use t3_core::verify::{run_suite, summarize, SuiteOptions, SuiteParams, SuiteSummary, VerificationRecord};

use crate::config::{hex, Command, Format, RunConfig};
use crate::CliError;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_GATING_FAILURE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

pub const MANIFEST: &str = "run.json";

/// Provenance block embedded in every artifact.
#[derive(Clone, Debug, Serialize)]
pub struct Stamp {
    pub tool_version: &'static str,
    pub ledger_version: String,
    pub config_hash: String,
    pub config: RunConfig,
}

/// A module error that stopped one unit of work, rendered for machines.
#[derive(Clone, Debug, Serialize)]
pub struct Diagnostic {
    pub scope: String,
    pub error: String,
    pub message: String,
}

impl Diagnostic {
    fn new(scope: &str, e: &t3_core::Error) -> Self {
        let debug = format!("{e:?}");
        let error = debug.split([' ', '(', '{']).next().unwrap_or_default().to_string();
        Self { scope: scope.into(), error, message: e.to_string() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub output_dir: PathBuf,
    pub artifacts: Vec<ArtifactEntry>,
    pub diagnostics: Vec<Diagnostic>,
    /// human-readable summary for the terminal
    pub report: String,
}

struct Writer {
    dir: PathBuf,
    artifacts: Vec<ArtifactEntry>,
}

impl Writer {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(self.dir.join(name), bytes)?;
        self.artifacts.push(ArtifactEntry { file: name.into(), sha256: hex(&Sha256::digest(bytes)) });
        Ok(())
    }

    fn put_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.put(name, &bytes)
    }

    /// Registers a file written by another routine.
    fn adopt(&mut self, name: &str) -> Result<(), CliError> {
        let bytes = fs::read(self.dir.join(name))?;
        self.artifacts.push(ArtifactEntry { file: name.into(), sha256: hex(&Sha256::digest(bytes)) });
        Ok(())
    }
}

/// `#`-prefixed provenance lines for text artifacts.
fn comment_header(stamp: &Stamp, prefix: &str) -> Result<String, CliError> {
    Ok(format!(
        "{prefix} tool_version: {}\n{prefix} ledger_version: {}\n{prefix} config_hash: {}\n{prefix} config: {}\n",
        stamp.tool_version,
        stamp.ledger_version,
        stamp.config_hash,
        serde_json::to_string(&stamp.config)?
    ))
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let ledger = Ledger::new(cfg.ledger);
    let stamp = Stamp {
        tool_version: env!("CARGO_PKG_VERSION"),
        ledger_version: ledger.version_hash(),
        config_hash: cfg.hash(),
        config: cfg.canonical(),
    };
    let mut w = Writer { dir: cfg.output_dir.clone(), artifacts: Vec::new() };
    let mut diagnostics = Vec::new();
    let mut report = String::new();
    let gating_ok = match cfg.command {
        Command::Ledger => ledger_cmd(cfg, &ledger, &stamp, &mut w, &mut report)?,
        Command::Verify => verify_cmd(cfg, &ledger, &stamp, &mut w, &mut diagnostics, &mut report)?,
        Command::OneForm => one_form_cmd(cfg, &ledger, &stamp, &mut w, &mut diagnostics, &mut report)?,
        Command::SolveDelta => solve_delta_cmd(cfg, &ledger, &stamp, &mut w, &mut diagnostics, &mut report)?,
    };
    let exit_code = if !diagnostics.is_empty() {
        EXIT_ERROR
    } else if gating_ok {
        EXIT_PASS
    } else {
        EXIT_GATING_FAILURE
    };
    let mut hasher = Sha256::new();
    hasher.update(stamp.config_hash.as_bytes());
    for a in &w.artifacts {
        hasher.update(a.file.as_bytes());
        hasher.update(a.sha256.as_bytes());
    }
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = json!({
        "stamp": stamp,
        "exit_code": exit_code,
        "artifacts": w.artifacts,
        "content_hash": hex(&hasher.finalize()),
        "diagnostics": diagnostics,
        "timestamp_unix": timestamp,
    });
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    fs::write(cfg.output_dir.join(MANIFEST), bytes)?;
    let _ = writeln!(report, "exit code {exit_code}; artifacts in {}", cfg.output_dir.display());
    Ok(Outcome { exit_code, output_dir: cfg.output_dir.clone(), artifacts: w.artifacts, diagnostics, report })
}

fn ledger_cmd(cfg: &RunConfig, ledger: &Ledger, stamp: &Stamp, w: &mut Writer, report: &mut String) -> Result<bool, CliError> {
    let mut deltas = DEFAULT_EXPORT_DELTAS.to_vec();
    if !deltas.contains(&cfg.delta) {
        deltas.push(cfg.delta);
    }
    let rows = ledger.rows(&deltas);
    match cfg.format {
        Format::Json => w.put_json("ledger.json", &json!({ "stamp": stamp, "rows": rows }))?,
        Format::Csv => {
            let mut bytes = comment_header(stamp, "#")?.into_bytes();
            ledger.write_csv(&rows, &mut bytes)?;
            w.put("ledger.csv", &bytes)?;
        }
        Format::Md => {
            let text = format!("# Constant ledger\n\n```\n{}```\n\n{}", comment_header(stamp, "")?, ledger.render_markdown(&rows));
            w.put("ledger.md", text.as_bytes())?;
        }
    }
    let flagged = rows.iter().filter(|r| r.discrepancy_flag).count();
    let errors = rows.iter().filter(|r| r.error.is_some()).count();
    let _ = writeln!(report, "ledger: {} rows, {flagged} flagged discrepant, {errors} outside their domain", rows.len());
    Ok(true)
}

fn record_lines(stamp: &Stamp, records: &[VerificationRecord]) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec(&json!({ "stamp": stamp }))?;
    out.push(b'\n');
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    Ok(out)
}

fn summary_csv(stamp: &Stamp, summary: Option<&SuiteSummary>, suite: &str, error: Option<&Diagnostic>) -> Result<Vec<u8>, CliError> {
    let mut out = comment_header(stamp, "#")?.into_bytes();
    {
        let mut wr = csv::Writer::from_writer(&mut out);
        wr.write_record([
            "suite",
            "status",
            "records",
            "gating",
            "passed",
            "failed",
            "gating_failures",
            "max_ratio",
            "median_ratio",
            "error",
        ])?;
        match summary {
            Some(s) => {
                let status = if s.gating_failures == 0 { "pass" } else { "fail" };
                wr.write_record([
                    s.suite.clone(),
                    status.into(),
                    s.records.to_string(),
                    s.gating.to_string(),
                    s.passed.to_string(),
                    s.failed.to_string(),
                    s.gating_failures.to_string(),
                    format!("{:e}", s.max_ratio),
                    format!("{:e}", s.median_ratio),
                    String::new(),
                ])?;
            }
            None => {
                let msg = error.map(|d| d.message.clone()).unwrap_or_default();
                wr.write_record([suite, "error", "", "", "", "", "", "", "", &msg])?;
            }
        }
        wr.flush()?;
    }
    Ok(out)
}

fn verify_cmd(
    cfg: &RunConfig,
    ledger: &Ledger,
    stamp: &Stamp,
    w: &mut Writer,
    diagnostics: &mut Vec<Diagnostic>,
    report: &mut String,
) -> Result<bool, CliError> {
    let opts = SuiteOptions {
        params: SuiteParams::new(GridSpec::new(cfg.grid_n)?, cfg.seed, cfg.n_cases),
        delta: cfg.delta,
        kind: cfg.kind,
        cutoff_samples: cfg.cutoff_samples,
    };
    let mut ok = true;
    for &suite in &cfg.suites {
        let name = suite.name();
        match run_suite(ledger, suite, &opts) {
            Ok(records) => {
                let s = summarize(name, &records);
                ok &= s.gating_failures == 0;
                w.put(&format!("{name}.jsonl"), &record_lines(stamp, &records)?)?;
                w.put(&format!("{name}.summary.csv"), &summary_csv(stamp, Some(&s), name, None)?)?;
                let _ = writeln!(
                    report,
                    "{name}: {}/{} passed, {} gating failures, max ratio {:.6e}",
                    s.passed, s.records, s.gating_failures, s.max_ratio
                );
            }
            Err(e) => {
                let d = Diagnostic::new(name, &e);
                w.put(&format!("{name}.summary.csv"), &summary_csv(stamp, None, name, Some(&d))?)?;
                let _ = writeln!(report, "{name}: error: {}", d.message);
                diagnostics.push(d);
            }
        }
    }
    Ok(ok)
}

/// The nowhere-vanishing bound is certified, but the metric differs from the
/// flat one below what double precision resolves in the certified quantities.
const THEOREM_REGIME_NOTE: &str = "epsilon bound in force; at this delta the metric is numerically indistinguishable \
     from flat at double precision, so residual, period and positivity checks carry the evidence";

fn one_form_cmd(
    cfg: &RunConfig,
    ledger: &Ledger,
    stamp: &Stamp,
    w: &mut Writer,
    diagnostics: &mut Vec<Diagnostic>,
    report: &mut String,
) -> Result<bool, CliError> {
    let grid = GridSpec::new(cfg.grid_n)?;
    let result = perturbation_family(cfg.delta, cfg.kind, grid, cfg.seed)
        .and_then(|g| harmonic_one_form(ledger, &g, cfg.axis, cfg.solver).map(|(omega, cert)| (g, omega, cert)));
    let (g, omega, cert) = match result {
        Ok(v) => v,
        Err(e) => {
            let d = Diagnostic::new("one-form", &e);
            let _ = writeln!(report, "one-form: error: {}", d.message);
            w.put_json("one_form.json", &json!({ "stamp": stamp, "error": d }))?;
            diagnostics.push(d);
            return Ok(false);
        }
    };
    let note: Value = match cert.regime {
        Regime::Theorem => THEOREM_REGIME_NOTE.into(),
        _ => Value::Null,
    };
    w.put_json("one_form.json", &json!({ "stamp": stamp, "certificate": cert, "note": note }))?;
    if cfg.dump_field {
        write_one_form_snapshot(&w.dir.join("omega"), &omega, Some(cfg.seed))?;
        g.write_snapshot(&w.dir.join("metric"), Some(cfg.seed))?;
        for f in ["omega.bin", "omega.json", "metric.bin", "metric.json"] {
            w.adopt(f)?;
        }
    }
    let eps = cert.epsilon_bound.value.map(|v| format!("{:.6e}", v.lo())).unwrap_or_else(|| "undefined".into());
    let _ = writeln!(
        report,
        "one-form: {} ({:?}); min|w|_g = {:.15}, eps.lo = {eps}, d*w relative residual {:.3e}, {} iterations, sign {:?}",
        if cert.pass { "pass" } else { "fail" },
        cert.regime,
        cert.min_pointwise_norm,
        cert.residual_codifferential_relative,
        cert.solver_iterations,
        cert.sign,
    );
    Ok(cert.pass)
}

fn solve_delta_cmd(
    cfg: &RunConfig,
    ledger: &Ledger,
    stamp: &Stamp,
    w: &mut Writer,
    diagnostics: &mut Vec<Diagnostic>,
    report: &mut String,
) -> Result<bool, CliError> {
    let mut results = Vec::new();
    let mut ok = true;
    for &criterion in &cfg.criteria {
        match max_admissible_delta(ledger, criterion) {
            Ok(d) => {
                ok &= d.certified();
                let _ = writeln!(
                    report,
                    "{criterion:?}: delta* = {:.6e} in [{:.6e}, {:.6e}], certified {}",
                    d.delta_star,
                    d.good,
                    d.bad,
                    d.certified()
                );
                results.push(serde_json::to_value(&d)?);
            }
            Err(e) => {
                let d = Diagnostic::new(&format!("{criterion:?}"), &e);
                let _ = writeln!(report, "{criterion:?}: error: {}", d.message);
                diagnostics.push(d);
            }
        }
    }
    w.put_json("delta_star.json", &json!({ "stamp": stamp, "results": results }))?;
    Ok(ok)
}

/// Reads the manifest of a finished run.
pub fn read_manifest(dir: &Path) -> Result<Value, CliError> {
    Ok(serde_json::from_slice(&fs::read(dir.join(MANIFEST))?)?)
}
