//! `soilfuzz`: batch HRB soil classification from CSV.

mod input;
mod report;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use soilfuzz::dsl::{self, ParseErrors};
use soilfuzz::fuzzy::{Variables, VariablesError};
use soilfuzz::hrb::{self, HrbOptions, PiSource, PresetKind, Subgroup};
use soilfuzz::induce::{induce_rules, InductionConfig, InductionError};
use soilfuzz::round4;
use soilfuzz::rules::{Aggregator, RuleBase};
use thiserror::Error;

use input::{InputError, RowError, Samples};
use report::{ClassifyRecord, Format, InductionReport, MembershipTable};

const PRESET_DIR_ENV: &str = "SOILFUZZ_PRESET_DIR";

#[derive(Parser, Debug)]
#[command(name = "soilfuzz", version, about = "Fuzzy HRB (AASHTO M145) soil classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify every sample of a CSV file.
    Classify {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        io: IoArgs,
        /// Use the crisp M145 procedure instead of the rule base.
        #[arg(long)]
        crisp: bool,
    },
    /// Dump membership degrees per variable.
    Memberships {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        io: IoArgs,
        /// Only this variable (p2mm, p425, p075, ll or pi).
        #[arg(long)]
        variable: Option<String>,
    },
    /// Check a rule base and print it in canonical form (JSON with `--format json`).
    Rules {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Output file (default stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Induce a rule base from labeled samples.
    Induce {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long, default_value_t = 1)]
        rules_per_class: usize,
    },
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Built-in rule base.
    #[arg(long, default_value = "paper", conflicts_with = "rules")]
    preset: PresetKind,
    /// Rule file in `.frules` format.
    #[arg(long, value_name = "FILE")]
    rules: Option<PathBuf>,
    /// Variables file replacing the built-in partitions.
    #[arg(long, value_name = "FILE")]
    vars: Option<PathBuf>,
    #[arg(long, default_value = "mean")]
    agg: Aggregator,
    #[arg(long, default_value = "pi")]
    pi_source: PiSource,
}

#[derive(Args, Debug)]
struct IoArgs {
    /// Input CSV (default stdin).
    input: Option<PathBuf>,
    /// Output file (default stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Report bad rows on stderr and go on with the rest.
    #[arg(long)]
    skip_bad_rows: bool,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{}", render_diagnostics(path, errors))]
    Rules { path: String, errors: ParseErrors },
    #[error("{path}: {source}")]
    Vars { path: String, source: VariablesError },
    #[error("{path}: {source}")]
    Input { path: String, source: InputError },
    #[error("{}", render_rows(.0))]
    Rows(Vec<RowError>),
    #[error("{0}")]
    Induction(InductionError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Rules { .. } | CliError::Vars { .. } => 3,
            CliError::Input { source: InputError::Header(_), .. } => 2,
            CliError::Input { .. } | CliError::Rows(_) | CliError::Induction(_) => 4,
        }
    }
}

fn render_diagnostics(path: &str, errors: &ParseErrors) -> String {
    let lines: Vec<String> = errors.diagnostics.iter().map(|d| format!("{path}:{d}")).collect();
    lines.join("\n")
}

fn render_rows(errors: &[RowError]) -> String {
    let mut lines: Vec<String> = errors.iter().map(ToString::to_string).collect();
    lines.push(format!("{} invalid row(s)", errors.len()));
    lines.join("\n")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Classify { model, io, crisp } => cmd_classify(&model, &io, crisp),
        Command::Memberships { model, io, variable } => cmd_memberships(&model, &io, variable.as_deref()),
        Command::Rules { model, format, output } => {
            let (_, rb) = load_model(&model)?;
            let bytes = match format {
                Format::Csv => dsl::serialize(&rb).into_bytes(),
                Format::Json => report::json(&rb),
            };
            write_output(output.as_deref(), &bytes)
        }
        Command::Induce { model, io, seed, iters, rules_per_class } => {
            cmd_induce(&model, &io, InductionConfig {
                rules_per_class,
                iterations: iters,
                seed,
                aggregator: model.agg,
                classes: None,
            })
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn preset_dir_file(name: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(PRESET_DIR_ENV)?;
    let path = Path::new(&dir).join(name);
    path.exists().then_some(path)
}

fn load_vars(model: &ModelArgs) -> Result<Variables, CliError> {
    let path = model.vars.clone().or_else(|| preset_dir_file("hrb.vars"));
    let Some(path) = path else {
        return Ok(hrb::variables());
    };
    let shown = path.display().to_string();
    let bytes = read_file(&path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Vars { path: shown.clone(), source: VariablesError::Syntax { line: 1, message: "invalid UTF-8".into() } })?;
    let vars = Variables::parse(&text).map_err(|source| CliError::Vars { path: shown.clone(), source })?;
    for name in [hrb::P2MM, hrb::P425, hrb::P075, hrb::LL, hrb::PI] {
        if vars.get(name).is_none() {
            return Err(CliError::Vars {
                path: shown,
                source: VariablesError::Syntax { line: 1, message: format!("variable `{name}` is not defined") },
            });
        }
    }
    Ok(vars)
}

/// Variables plus the selected rule base. `SOILFUZZ_PRESET_DIR` replaces a
/// built-in file when the directory holds one of the same name.
fn load_model(model: &ModelArgs) -> Result<(Variables, RuleBase), CliError> {
    let vars = load_vars(model)?;
    let file = model.rules.clone().or_else(|| preset_dir_file(model.preset.file_name()));
    let (shown, bytes) = match file {
        Some(path) => (path.display().to_string(), read_file(&path)?),
        None => (format!("<{}>", model.preset.file_name()), model.preset.source().as_bytes().to_vec()),
    };
    let rb = dsl::parse_bytes(&bytes, &vars).map_err(|errors| CliError::Rules { path: shown, errors })?;
    Ok((vars, rb))
}

fn load_samples(io: &IoArgs) -> Result<Samples, CliError> {
    let (shown, bytes) = match &io.input {
        Some(path) if path.as_os_str() != "-" => (path.display().to_string(), read_file(path)?),
        _ => {
            let mut buf = Vec::new();
            io::stdin()
                .read_to_end(&mut buf)
                .map_err(|source| CliError::Io { path: "<stdin>".into(), source })?;
            ("<stdin>".to_string(), buf)
        }
    };
    let samples = input::read_samples(bytes.as_slice()).map_err(|source| CliError::Input { path: shown, source })?;
    check_rows(samples.errors.clone(), io.skip_bad_rows)?;
    Ok(samples)
}

/// Fails on row errors unless they are to be skipped, in which case they
/// are reported as warnings.
fn check_rows(errors: Vec<RowError>, skip: bool) -> Result<(), CliError> {
    if errors.is_empty() {
        return Ok(());
    }
    if !skip {
        return Err(CliError::Rows(errors));
    }
    for e in &errors {
        eprintln!("warning: skipped {e}");
    }
    Ok(())
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, bytes).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

/// Splits per-row results into values and row errors, keeping input order.
fn partition<T>(results: Vec<Result<T, RowError>>, skip: bool) -> Result<Vec<T>, CliError> {
    let mut ok = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => errors.push(e),
        }
    }
    check_rows(errors, skip)?;
    Ok(ok)
}

fn row_error(row: &input::Row, e: impl ToString) -> RowError {
    RowError { line: row.line, id: Some(row.id.clone()), message: e.to_string() }
}

fn cmd_classify(model: &ModelArgs, io: &IoArgs, crisp: bool) -> Result<(), CliError> {
    let (vars, rb) = load_model(model)?;
    let samples = load_samples(io)?;
    let opts = HrbOptions { aggregator: model.agg, pi_source: model.pi_source };

    let results: Vec<Result<ClassifyRecord, RowError>> = samples
        .rows
        .par_iter()
        .map(|row| {
            let s = &row.sample;
            if crisp {
                return Ok(ClassifyRecord::crisp(&row.id, hrb::crisp_classify(s), s.ll(), s.pi()));
            }
            hrb::classify_hrb_with(&vars, s, &rb, opts)
                .map(|rep| ClassifyRecord::fuzzy(&row.id, &rep))
                .map_err(|e| row_error(row, e))
        })
        .collect();
    let records = partition(results, io.skip_bad_rows)?;

    let bytes = match io.format {
        Format::Json => report::json(&records),
        Format::Csv => {
            let classes: &[String] = if crisp { &[] } else { rb.class_order() };
            report::classify_csv(&records, classes).map_err(csv_io)?
        }
    };
    write_output(io.output.as_deref(), &bytes)
}

fn csv_io(e: csv::Error) -> CliError {
    CliError::Io { path: "<output>".into(), source: io::Error::other(e) }
}

fn cmd_memberships(model: &ModelArgs, io: &IoArgs, variable: Option<&str>) -> Result<(), CliError> {
    let vars = load_vars(model)?;
    let names: Vec<String> = match variable {
        Some(v) if vars.get(v).is_none() => {
            let known: Vec<&str> = vars.iter().map(|v| v.name()).collect();
            return Err(CliError::Usage(format!("unknown variable `{v}` (expected one of {})", known.join(", "))));
        }
        Some(v) => vec![v.to_string()],
        None => vars.iter().map(|v| v.name().to_string()).collect(),
    };
    let samples = load_samples(io)?;

    let results: Vec<_> = samples
        .rows
        .par_iter()
        .map(|row| hrb::fuzzify_sample_with(&vars, &row.sample, model.pi_source).map_err(|e| row_error(row, e)))
        .collect();
    let rows: Vec<_> = samples.rows.iter().zip(results).map(|(row, r)| r.map(|m| (row, m))).collect();
    let rows = partition(rows, io.skip_bad_rows)?;

    let mut tables: Vec<MembershipTable> = names.iter().map(|n| MembershipTable::new(&vars, n)).collect();
    for (row, m) in &rows {
        for t in &mut tables {
            t.push(&row.id, m.get(&t.variable).expect("fuzzified over all variables"));
        }
    }
    let bytes = match io.format {
        Format::Json => report::json(&tables),
        Format::Csv => report::memberships_csv(&tables).map_err(csv_io)?,
    };
    write_output(io.output.as_deref(), &bytes)
}

/// Rule classes are learnt, so A-7-5 and A-7-6 labels both train the A-7 rules.
fn rule_label(class: &str) -> String {
    match class.parse::<Subgroup>() {
        Ok(g) => g.rule_class().to_string(),
        Err(_) => class.to_string(),
    }
}

fn cmd_induce(model: &ModelArgs, io: &IoArgs, cfg: InductionConfig) -> Result<(), CliError> {
    let vars = load_vars(model)?;
    let samples = load_samples(io)?;
    if !samples.has_class {
        return Err(CliError::Input { path: input_name(io), source: InputError::MissingColumn("class") });
    }
    let results: Vec<_> = samples
        .rows
        .par_iter()
        .map(|row| {
            let class = row.class.as_deref().ok_or_else(|| row_error(row, "empty class cell"))?;
            let m = hrb::fuzzify_sample_with(&vars, &row.sample, model.pi_source).map_err(|e| row_error(row, e))?;
            Ok((m, rule_label(class)))
        })
        .collect();
    let labeled = partition(results, io.skip_bad_rows)?;

    let run = induce_rules(&labeled, &vars, &cfg).map_err(CliError::Induction)?;
    let summary = InductionReport {
        seed: cfg.seed,
        iterations: cfg.iterations,
        rules_per_class: cfg.rules_per_class,
        aggregator: cfg.aggregator.as_str(),
        samples: labeled.len(),
        accuracy: round4(run.score),
        initial_accuracy: round4(run.initial_score),
        accepted: run.accepted,
        rules: dsl::serialize(&run.rulebase),
    };
    eprintln!("training accuracy {:.4} on {} samples", summary.accuracy, summary.samples);
    let bytes = match io.format {
        Format::Json => report::json(&summary),
        Format::Csv => summary.frules().into_bytes(),
    };
    write_output(io.output.as_deref(), &bytes)
}

fn input_name(io: &IoArgs) -> String {
    match &io.input {
        Some(p) if p.as_os_str() != "-" => p.display().to_string(),
        _ => "<stdin>".to_string(),
    }
}
