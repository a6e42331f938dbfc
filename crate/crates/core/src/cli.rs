//! Command-line front end. Each subcommand renders to a string so it can be
//! tested without spawning a process.
//!
//! Exit codes: 0 on success, 1 on I/O, parse or validation errors, 2 when
//! `graph-check` finds a non-permutation shift (and for usage errors).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::ProtocolFile;
use crate::error::{Error, Result};
use crate::graphshift::{audit_shift, builtin_graph, EdgeLabeledGraph, ShiftAudit, ShiftVariant};
use crate::hilbert::{StateVector, ZERO_PROBABILITY};
use crate::protocol::{
    aggregate, paper_protocol, run_input, seeded_inputs, OutcomeAggregate, ProtocolRun,
    ProtocolSpec,
};
use crate::report::{format_amps, format_ket};
use crate::verify::{audit_paper_with, sanity_protocol, ClaimReport, ClaimStatus, DEFAULT_SAMPLES, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_PERMUTATION: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Original,
    Rearranged,
    Completed,
}

impl From<VariantArg> for ShiftVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Original => ShiftVariant::Original,
            VariantArg::Rearranged => ShiftVariant::Rearranged,
            VariantArg::Completed => ShiftVariant::Completed,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Two-coin quantum walk teleportation simulator and verifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Audit the published claims of the built-in scenario.
    VerifyPaper {
        #[arg(long, value_enum, default_value = "rearranged")]
        variant: VariantArg,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Random inputs used for recovery fidelity statistics.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a protocol and print the per-outcome ledger.
    Run {
        /// `paper`, `paper:<variant>`, `sanity`, or a protocol JSON file.
        #[arg(long, default_value = "paper")]
        protocol: String,
        /// Shift listing for `--protocol paper` (default rearranged).
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        /// Comma-separated complex amplitudes such as `1,0,0` or
        /// `0.6,0.8i,0`, or `random`.
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        /// Number of random inputs.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, requires = "outcome")]
        position: Option<usize>,
        #[arg(long, requires = "position")]
        outcome: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check whether a graph's conditional shift is a permutation.
    GraphCheck {
        /// Builtin name (`paper:original`, `cycle:10`, `path:5`, ...) or a
        /// graph JSON file.
        graph: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Rendered command result.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutput {
    pub code: i32,
    pub text: String,
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

// verify-paper

pub fn verify_paper(variant: ShiftVariant, seed: u64, samples: usize, format: Format) -> Result<String> {
    let report = audit_paper_with(variant, seed, samples)?;
    Ok(match format {
        Format::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
        Format::Text => render_report(&report),
    })
}

pub fn render_report(report: &ClaimReport) -> String {
    let m = &report.metadata;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "claim audit: variant {}, seed {}, samples {}, tolerance {:e}",
        m.variant, m.seed, m.samples, m.tolerance
    );
    for c in &report.claims {
        let _ = writeln!(s, "{:<3} {:<13} {}", c.claim_id, c.status.as_str(), c.paper_location);
        for line in c.detail.lines() {
            let _ = writeln!(s, "    {line}");
        }
    }
    let count = |st: ClaimStatus| report.claims.iter().filter(|c| c.status == st).count();
    let _ = writeln!(
        s,
        "summary: {} match, {} mismatch, {} infeasible, {} not-checkable",
        count(ClaimStatus::Match),
        count(ClaimStatus::Mismatch),
        count(ClaimStatus::Infeasible),
        count(ClaimStatus::NotCheckable)
    );
    s
}

// run

#[derive(Clone, Debug, PartialEq)]
pub enum InputMode {
    Explicit(Vec<Complex64>),
    Random { count: usize, seed: u64 },
}

/// Parses `--input`. `count` and `seed` only apply to `random`.
pub fn parse_input(input: &str, count: Option<usize>, seed: Option<u64>) -> Result<InputMode> {
    if input.trim() == "random" {
        let count = count.unwrap_or(DEFAULT_SAMPLES);
        if count == 0 {
            return Err(Error::InvalidInput("--count must be at least 1".into()));
        }
        return Ok(InputMode::Random {
            count,
            seed: seed.unwrap_or(DEFAULT_SEED),
        });
    }
    if count.is_some() || seed.is_some() {
        return Err(Error::InvalidInput(
            "--count and --seed only apply to --input random".into(),
        ));
    }
    input
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<Complex64>()
                .map_err(|_| Error::InvalidInput(format!("cannot parse amplitude {tok:?}")))
        })
        .collect::<Result<Vec<_>>>()
        .map(InputMode::Explicit)
}

pub fn resolve_protocol(name: &str, variant: Option<ShiftVariant>) -> Result<ProtocolSpec> {
    let reject_variant = |what: &str| -> Result<()> {
        match variant {
            Some(_) => Err(Error::InvalidInput(format!(
                "--variant only applies to --protocol paper, not {what}"
            ))),
            None => Ok(()),
        }
    };
    if name == "paper" {
        return Ok(paper_protocol(variant.unwrap_or(ShiftVariant::Rearranged)));
    }
    if let Some(v) = name.strip_prefix("paper:") {
        reject_variant(name)?;
        return Ok(paper_protocol(v.parse()?));
    }
    if name == "sanity" {
        reject_variant(name)?;
        return sanity_protocol();
    }
    reject_variant(name)?;
    let text = read_file(Path::new(name))?;
    ProtocolFile::parse(&text)?.to_spec(name)
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub protocol: String,
    pub coin1_basis: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub runs: Vec<ProtocolRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<Vec<OutcomeAggregate>>,
}

pub fn run_protocol(
    spec: &ProtocolSpec,
    input: &InputMode,
    select: Option<(usize, usize)>,
) -> Result<RunReport> {
    if let Some((p, j)) = select {
        if p >= spec.positions() || j >= spec.input_dim() {
            return Err(Error::InvalidInput(format!(
                "outcome ({p}, {j}) out of range for {} positions and {} coin outcomes",
                spec.positions(),
                spec.input_dim()
            )));
        }
    }
    let (inputs, seed) = match input {
        InputMode::Explicit(a) => (vec![a.clone()], None),
        InputMode::Random { count, seed } => {
            (seeded_inputs(*seed, *count, spec.input_dim()), Some(*seed))
        }
    };
    let mut runs = inputs
        .iter()
        .map(|a| run_input(spec, a))
        .collect::<Result<Vec<_>>>()?;
    let aggregate = seed.map(|_| aggregate(&runs));
    let aggregate = aggregate.map(|agg| match select {
        Some(sel) => agg
            .into_iter()
            .filter(|o| (o.position_outcome, o.coin1_outcome_index) == sel)
            .collect(),
        None => agg,
    });
    if let Some(sel) = select {
        for r in &mut runs {
            r.outcomes
                .retain(|o| (o.position_outcome, o.coin1_outcome_index) == sel);
        }
    }
    Ok(RunReport {
        protocol: spec.name.clone(),
        coin1_basis: spec.coin1_basis_name.clone(),
        seed,
        runs,
        aggregate,
    })
}

fn state_text(s: &Option<StateVector>) -> String {
    match s {
        Some(v) => format_amps(v.amps().as_slice()),
        None => "-".into(),
    }
}

fn opt_f64(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.6}"))
}

pub fn render_run(report: &RunReport, select: Option<(usize, usize)>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "protocol {} (coin1 basis {})", report.protocol, report.coin1_basis);
    if let (Some(agg), Some(seed)) = (&report.aggregate, report.seed) {
        let _ = writeln!(s, "random inputs: {} (seed {seed})", report.runs.len());
        let norms: Vec<f64> = report.runs.iter().map(|r| r.norm_after_walk).collect();
        let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(s, "norm after walk: min {lo:.6}, max {hi:.6}");
        let _ = writeln!(s, "{:>4} {:>3}  {:>12}  {:>13}  {:>12}", "pos", "j", "mean prob", "mean fidelity", "min fidelity");
        let mut omitted = 0;
        for o in agg {
            if o.mean_probability <= ZERO_PROBABILITY && select.is_none() {
                omitted += 1;
                continue;
            }
            let _ = writeln!(
                s,
                "{:>4} {:>3}  {:>12.6}  {:>13}  {:>12}",
                o.position_outcome,
                o.coin1_outcome_index,
                o.mean_probability,
                opt_f64(o.mean_fidelity),
                opt_f64(o.min_fidelity)
            );
        }
        if omitted > 0 {
            let _ = writeln!(s, "({omitted} impossible outcomes omitted)");
        }
        return s;
    }
    for run in &report.runs {
        let _ = writeln!(s, "input {}", format_amps(&run.input));
        let _ = writeln!(s, "norm after walk: {:.6}", run.norm_after_walk);
        let mut omitted = 0;
        for o in &run.outcomes {
            if !o.possible && select.is_none() {
                omitted += 1;
                continue;
            }
            let _ = writeln!(
                s,
                "outcome {} f{}: probability {:.6}",
                format_ket(&[o.position_outcome]),
                o.coin1_outcome_index,
                o.probability
            );
            if !o.possible {
                let _ = writeln!(s, "    impossible");
                continue;
            }
            let _ = writeln!(s, "    bob state  {}", state_text(&o.bob_state));
            if o.has_recovery {
                let unitary = match o.recovery_unitary {
                    Some(true) => "unitary",
                    _ => "not unitary",
                };
                let _ = writeln!(s, "    recovered  {} ({unitary})", state_text(&o.recovered_state));
                let _ = writeln!(s, "    fidelity   {}", opt_f64(o.fidelity_vs_input));
            } else {
                let _ = writeln!(s, "    no recovery tabulated");
            }
        }
        if omitted > 0 {
            let _ = writeln!(s, "({omitted} impossible outcomes omitted)");
        }
    }
    s
}

// graph-check

#[derive(Debug, Serialize)]
pub struct GraphCheckReport {
    pub graph: String,
    pub n_vertices: usize,
    pub n_labels: usize,
    pub n_edges: usize,
    pub audit: ShiftAudit,
}

/// A path that exists on disk wins over a builtin name.
pub fn load_graph(source: &str) -> Result<EdgeLabeledGraph> {
    let path = Path::new(source);
    if path.is_file() {
        return EdgeLabeledGraph::from_json(&read_file(path)?);
    }
    builtin_graph(source).map_err(|e| match e {
        Error::UnknownBuiltin(_) => Error::InvalidInput(format!(
            "{source:?} is neither a builtin graph nor a readable file"
        )),
        other => other,
    })
}

pub fn graph_check(source: &str) -> Result<GraphCheckReport> {
    let g = load_graph(source)?;
    Ok(GraphCheckReport {
        graph: source.to_string(),
        n_vertices: g.n_vertices(),
        n_labels: g.n_labels(),
        n_edges: g.edges().len(),
        audit: audit_shift(&g),
    })
}

fn slots(v: &[(usize, usize)]) -> String {
    if v.is_empty() {
        return "none".into();
    }
    v.iter()
        .map(|(a, b)| format!("({a},{b})"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render_graph_check(r: &GraphCheckReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "graph {}: {} vertices, {} labels, {} edges",
        r.graph, r.n_vertices, r.n_labels, r.n_edges
    );
    let a = &r.audit;
    let _ = writeln!(s, "permutation: {}", if a.is_permutation { "yes" } else { "no" });
    let _ = writeln!(s, "missing (vertex,label): {}", slots(&a.missing));
    let _ = writeln!(s, "colliding out: {}", slots(&a.colliding_out));
    let _ = writeln!(s, "colliding in: {}", slots(&a.colliding_in));
    s
}

// dispatch

pub fn execute(command: &Command) -> Result<CommandOutput> {
    let ok = |text| CommandOutput { code: EXIT_OK, text };
    match command {
        Command::VerifyPaper { variant, seed, samples, format, .. } => {
            if *samples == 0 {
                return Err(Error::InvalidInput("--samples must be at least 1".into()));
            }
            verify_paper((*variant).into(), *seed, *samples, *format).map(ok)
        }
        Command::Run {
            protocol,
            variant,
            input,
            count,
            seed,
            position,
            outcome,
            format,
            ..
        } => {
            let spec = resolve_protocol(protocol, variant.map(Into::into))?;
            let mode = parse_input(input, *count, *seed)?;
            let select = position.zip(*outcome);
            let report = run_protocol(&spec, &mode, select)?;
            Ok(ok(match format {
                Format::Json => to_json(&report),
                Format::Text => render_run(&report, select),
            }))
        }
        Command::GraphCheck { graph, format, .. } => {
            let report = graph_check(graph)?;
            let text = match format {
                Format::Json => to_json(&report),
                Format::Text => render_graph_check(&report),
            };
            let code = if report.audit.is_permutation { EXIT_OK } else { EXIT_NOT_PERMUTATION };
            Ok(CommandOutput { code, text })
        }
    }
}

fn out_path(command: &Command) -> Option<&Path> {
    match command {
        Command::VerifyPaper { out, .. } | Command::Run { out, .. } | Command::GraphCheck { out, .. } => {
            out.as_deref()
        }
    }
}

/// Parses `args`, runs the command, writes its output and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = execute(&cli.command).and_then(|out| {
        match out_path(&cli.command) {
            Some(path) => std::fs::write(path, &out.text).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?,
            None => print!("{}", out.text),
        }
        Ok(out.code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
