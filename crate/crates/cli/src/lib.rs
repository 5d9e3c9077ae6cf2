//! Subcommands of the `wifisynth` binary. Each returns a [`CommandOutcome`]
//! and writes its human-readable summary to the given sink, so the binary
//! and the tests share one code path.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use wifisynth::fidelity::{fidelity_report, pca_shared_projection, FidelityOptions};
use wifisynth::generator::DEFAULT_MAX_ATTEMPTS_PER_ROW;
use wifisynth::{
    check, decode_csv, encode_csv, generate, lint_ruleset, parse_ruleset, Dataset, GenerateError,
    GenerationConfig, Label, RuleId, Ruleset,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_VIOLATIONS: i32 = 4;
pub const EXIT_LINT: i32 = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub report_paths: Vec<PathBuf>,
    pub diagnostics: Vec<String>,
}

impl CommandOutcome {
    fn ok(report_paths: Vec<PathBuf>, diagnostics: Vec<String>) -> Self {
        CommandOutcome {
            exit_code: EXIT_OK,
            report_paths,
            diagnostics,
        }
    }

    fn fail(exit_code: i32, message: impl Display) -> Self {
        CommandOutcome {
            exit_code,
            report_paths: Vec::new(),
            diagnostics: vec![message.to_string()],
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wifisynth",
    version,
    about = "Rule-strict synthetic 802.11 frame records"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset from a ruleset.
    Generate(GenerateArgs),
    /// Run the hard-constraint check over every row of a CSV.
    Check(CheckArgs),
    /// Compare a synthetic CSV against a real one.
    Compare(CompareArgs),
    /// Write a shared PCA projection of two CSVs.
    Pca(PcaArgs),
    /// Report rules that can never be satisfied together.
    #[command(name = "ruleset-lint", alias = "lint")]
    RulesetLint(LintArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub ruleset: PathBuf,
    /// Total rows; defaults to the ruleset's label-count sum.
    #[arg(long)]
    pub rows: Option<u64>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Shuffle the output row order (seeded).
    #[arg(long)]
    pub shuffle: bool,
    /// Rescale label counts to --rows (largest remainder).
    #[arg(long)]
    pub scale: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS_PER_ROW)]
    pub max_attempts: u64,
    /// Skip the lint gate; unsatisfiable rules then surface as exit 3.
    #[arg(long)]
    pub no_lint: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub ruleset: PathBuf,
    pub csv: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub real: PathBuf,
    #[arg(long)]
    pub synthetic: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub sample_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub top_k: usize,
    /// Also summarize a shared PCA with this many components.
    #[arg(long)]
    pub pca_components: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PcaArgs {
    #[arg(long)]
    pub real: PathBuf,
    #[arg(long)]
    pub synthetic: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub components: usize,
    #[arg(long, default_value_t = 1000)]
    pub sample_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct LintArgs {
    pub ruleset: PathBuf,
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> CommandOutcome {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Pca(a) => cmd_pca(a, out),
        Command::RulesetLint(a) => cmd_ruleset_lint(a, out),
    }
}

fn load_ruleset(path: &Path) -> Result<Ruleset, CommandOutcome> {
    let text = fs::read_to_string(path)
        .map_err(|e| CommandOutcome::fail(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    parse_ruleset(&text)
        .map_err(|e| CommandOutcome::fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load_csv(path: &Path) -> Result<Dataset, CommandOutcome> {
    let file = File::open(path)
        .map_err(|e| CommandOutcome::fail(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    decode_csv(BufReader::new(file))
        .map_err(|e| CommandOutcome::fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), CommandOutcome> {
    let fail = |e: io::Error| CommandOutcome::fail(EXIT_INPUT, format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(fail)?);
    body(&mut w).map_err(fail)?;
    w.flush().map_err(fail)
}

/// `{out}.stats.json` next to the generated CSV.
pub fn stats_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".stats.json");
    PathBuf::from(s)
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> CommandOutcome {
    match generate_inner(args, out) {
        Ok(o) | Err(o) => o,
    }
}

fn generate_inner(
    args: &GenerateArgs,
    out: &mut dyn Write,
) -> Result<CommandOutcome, CommandOutcome> {
    let mut rs = load_ruleset(&args.ruleset)?;
    let lint = if args.no_lint {
        Vec::new()
    } else {
        lint_ruleset(&rs)
    };
    if !lint.is_empty() {
        return Err(CommandOutcome {
            exit_code: EXIT_LINT,
            report_paths: Vec::new(),
            diagnostics: lint.iter().map(ToString::to_string).collect(),
        });
    }
    let rows = args.rows.unwrap_or_else(|| rs.total_rows());
    if args.scale {
        rs = rs.with_counts(rs.rescaled_counts(rows));
    } else if rows != rs.total_rows() {
        return Err(CommandOutcome::fail(
            EXIT_INPUT,
            format!(
                "--rows {rows} does not match the ruleset's label counts (sum {}); pass --scale to rescale",
                rs.total_rows()
            ),
        ));
    }

    let mut cfg = GenerationConfig::new(rs, args.seed);
    cfg.shuffle = args.shuffle;
    cfg.max_attempts_per_row = args.max_attempts;
    let (ds, stats) = generate(&cfg).map_err(|e| {
        let code = match e {
            GenerateError::Infeasible { .. } | GenerateError::PostQuotaViolation { .. } => {
                EXIT_INFEASIBLE
            }
            _ => EXIT_INPUT,
        };
        CommandOutcome::fail(code, e)
    })?;

    write_file(&args.out, |w| {
        encode_csv(&ds, w).map_err(|e| io::Error::other(e.to_string()))?;
        Ok(())
    })?;
    let sidecar = stats_path(&args.out);
    let stats_json = serde_json::to_string_pretty(&stats).expect("stats serialize");
    write_file(&sidecar, |w| writeln!(w, "{stats_json}"))?;

    let rs = &cfg.ruleset;
    let _ = writeln!(out, "wrote {} rows to {}", ds.len(), args.out.display());
    for label in Label::ALL {
        let _ = writeln!(
            out,
            "  {} {:<14} {}",
            label.id(),
            rs.class_name(label),
            ds.count_label(label)
        );
    }
    for d in &stats.quota_diagnostics {
        let _ = writeln!(out, "quota shortfall: {d}");
    }
    Ok(CommandOutcome::ok(
        vec![args.out.clone(), sidecar],
        stats.quota_diagnostics.clone(),
    ))
}

/// How many violating rows are listed individually.
const LISTED_VIOLATIONS: usize = 20;

pub fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> CommandOutcome {
    let rs = match load_ruleset(&args.ruleset) {
        Ok(rs) => rs,
        Err(o) => return o,
    };
    let ds = match load_csv(&args.csv) {
        Ok(ds) => ds,
        Err(o) => return o,
    };
    if ds.is_empty() {
        let _ = writeln!(out, "0 rows checked (header only)");
        return CommandOutcome::ok(Vec::new(), vec!["no data rows".into()]);
    }
    let mut histogram: BTreeMap<RuleId, usize> = RuleId::ALL.iter().map(|r| (*r, 0)).collect();
    let mut bad_rows = 0;
    let mut listed = Vec::new();
    for (i, r) in ds.rows.iter().enumerate() {
        let rep = check(&rs, r);
        if rep.valid() {
            continue;
        }
        bad_rows += 1;
        for v in &rep.violations {
            *histogram.get_mut(&v.rule).unwrap() += 1;
            if listed.len() < LISTED_VIOLATIONS {
                // Line 1 is the header.
                listed.push(format!("line {}: {} {}", i + 2, v.rule, v.detail));
            }
        }
    }
    let _ = writeln!(out, "{} rows checked, {} violating", ds.len(), bad_rows);
    for (rule, n) in &histogram {
        let _ = writeln!(out, "  {:<28} {n}", rule.to_string());
    }
    if bad_rows == 0 {
        CommandOutcome::ok(Vec::new(), Vec::new())
    } else {
        CommandOutcome {
            exit_code: EXIT_VIOLATIONS,
            report_paths: Vec::new(),
            diagnostics: listed,
        }
    }
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> CommandOutcome {
    let (real, synthetic) = match (load_csv(&args.real), load_csv(&args.synthetic)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(o), _) | (_, Err(o)) => return o,
    };
    let opts = FidelityOptions {
        sample_size: args.sample_size,
        seed: args.seed,
        top_k: args.top_k,
        pca_components: args.pca_components,
    };
    let report = match fidelity_report(&real, &synthetic, &opts) {
        Ok((r, _)) => r,
        Err(e) => return CommandOutcome::fail(EXIT_INPUT, e),
    };
    let json = report.to_json();
    if let Err(o) = write_file(&args.out, |w| w.write_all(json.as_bytes())) {
        return o;
    }
    let _ = write!(out, "{}", report.to_text());
    let mut diagnostics = Vec::new();
    if report.cosine_skipped_zero_norm > 0 {
        diagnostics.push(format!(
            "{} zero-norm pairs skipped for cosine",
            report.cosine_skipped_zero_norm
        ));
    }
    CommandOutcome::ok(vec![args.out.clone()], diagnostics)
}

pub fn cmd_pca(args: &PcaArgs, out: &mut dyn Write) -> CommandOutcome {
    let (real, synthetic) = match (load_csv(&args.real), load_csv(&args.synthetic)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(o), _) | (_, Err(o)) => return o,
    };
    let table = match pca_shared_projection(
        &real,
        &synthetic,
        args.components,
        args.sample_size,
        args.seed,
    ) {
        Ok(t) => t,
        Err(e) => return CommandOutcome::fail(EXIT_INPUT, e),
    };
    if let Err(o) = write_file(&args.out, |w| table.write_csv(w)) {
        return o;
    }
    let m = &table.model;
    let _ = writeln!(
        out,
        "wrote {} projected rows to {}",
        table.rows.len(),
        args.out.display()
    );
    let _ = writeln!(
        out,
        "{}",
        json!({
            "explained_variance_ratio": m.explained_variance_ratio,
            "dropped": m.dropped,
        })
    );
    CommandOutcome::ok(vec![args.out.clone()], Vec::new())
}

pub fn cmd_ruleset_lint(args: &LintArgs, out: &mut dyn Write) -> CommandOutcome {
    let rs = match load_ruleset(&args.ruleset) {
        Ok(rs) => rs,
        Err(o) => return o,
    };
    let diags = lint_ruleset(&rs);
    for d in &diags {
        let _ = writeln!(out, "{d}");
    }
    if diags.is_empty() {
        let _ = writeln!(out, "{}: no diagnostics", args.ruleset.display());
        CommandOutcome::ok(Vec::new(), Vec::new())
    } else {
        CommandOutcome {
            exit_code: EXIT_LINT,
            report_paths: Vec::new(),
            diagnostics: diags.iter().map(ToString::to_string).collect(),
        }
    }
}
