//! The `jiuchan` command-line driver.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::analysis::AnalysisConfig;
use crate::emit::{emit_graph, per_point_json, pretty, OutputFormat};
use crate::frontend::{parse_str, resolve_references, Diagnostic, Diagnostics};
use crate::graphs::build_graphs;
use crate::normalize::{flatten_program, ClassicalValue, LowerOptions, DEFAULT_MAX_UNROLL};
use crate::oracle::{program_qubits, verify_analysis};
use crate::{analyze_resolved, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_VIOLATIONS: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "jiuchan", version, about = "Static entanglement analysis for a subset of Q#")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze one source file and print its exit entanglement graph.
    Analyze(RunConfig),
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunConfig {
    /// Q# source file.
    pub input: PathBuf,
    /// Operation to analyze instead of the @EntryPoint().
    #[arg(long)]
    pub entry: Option<String>,
    /// Output format for the graph and any reports.
    #[arg(long, value_enum, default_value_t = OutputFormat::Dot)]
    pub format: OutputFormat,
    /// Also print the state before and after every entry line.
    #[arg(long)]
    pub per_point: bool,
    /// `name=value`: binds an entry parameter, or fixes a condition atom to 0/1.
    #[arg(long = "assume", value_name = "ATOM=VALUE")]
    pub assumptions: Vec<String>,
    /// Largest loop trip count or repeat retry count to unroll.
    #[arg(long, default_value_t = DEFAULT_MAX_UNROLL, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    pub max_unroll: usize,
    /// Check the result against exhaustive simulation.
    #[arg(long)]
    pub verify: bool,
    /// Print the interprocedural control-flow graph as DOT before the result.
    #[arg(long)]
    pub dump_icfg: bool,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            entry: None,
            format: OutputFormat::Dot,
            per_point: false,
            assumptions: Vec::new(),
            max_unroll: DEFAULT_MAX_UNROLL,
            verify: false,
            dump_icfg: false,
        }
    }
}

fn parse_truth(v: &str) -> Option<bool> {
    match v {
        "0" | "false" => Some(false),
        "1" | "true" => Some(true),
        _ => None,
    }
}

fn render(file: &str, diags: &Diagnostics) -> String {
    diags.0.iter().map(|d| d.render(file) + "\n").collect()
}

/// Run the pipeline, writing artifacts to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match run_inner(cfg, out, err) {
        Ok(code) => code,
        Err(msg) => {
            let _ = err.write_all(msg.as_bytes());
            EXIT_DIAGNOSTICS
        }
    }
}

fn run_inner(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let file = cfg.input.display().to_string();
    let plain = |e: &dyn std::fmt::Display| format!("{file}: error: {e}\n");
    let text = std::fs::read_to_string(&cfg.input).map_err(|source| plain(&format!("cannot read file: {source}")))?;

    let parsed = parse_str(&text).map_err(|d| render(&file, &d))?;
    let warn = |w: &Diagnostic, err: &mut dyn Write| {
        let _ = writeln!(err, "{}", w.render(&file));
    };
    for w in &parsed.warnings {
        warn(w, err);
    }
    let resolved = resolve_references(parsed.namespace, cfg.entry.as_deref()).map_err(|d| render(&file, &d))?;
    for w in &resolved.warnings {
        warn(w, err);
    }

    let mut opts = LowerOptions { max_unroll: cfg.max_unroll, ..LowerOptions::default() };
    let mut acfg = AnalysisConfig::default();
    let entry_params: Vec<&str> = resolved.entry_decl().params.iter().map(|p| p.name.as_str()).collect();
    for a in &cfg.assumptions {
        let (name, value) = a
            .rsplit_once('=')
            .map(|(n, v)| (n.trim(), v.trim()))
            .ok_or_else(|| plain(&format!("assumption `{a}` is not of the form name=value")))?;
        if entry_params.contains(&name) {
            let v = ClassicalValue::parse(value)
                .ok_or_else(|| plain(&format!("cannot parse value `{value}` for `{name}`")))?;
            opts.bindings.insert(name.to_string(), v);
        } else {
            let v = parse_truth(value).ok_or_else(|| plain(&format!("atom `{name}` needs 0 or 1, found `{value}`")))?;
            acfg.assumptions.insert(name.replace(' ', ""), v);
        }
    }

    let analyzed = analyze_resolved(&resolved, &opts, &acfg).map_err(|e| match e {
        Error::Lower(l) => l.to_diagnostic().render(&file) + "\n",
        Error::Diagnostics(d) => render(&file, &d),
        other => plain(&other),
    })?;
    for w in &analyzed.analysis.result.warnings {
        let _ = writeln!(err, "{file}: warning: {w}");
    }

    let io = |e: std::io::Error| plain(&e);
    if cfg.dump_icfg {
        let (_, _, icfg) = build_graphs(&analyzed.program).map_err(|e| plain(&e))?;
        out.write_all(icfg.to_dot().as_bytes()).map_err(io)?;
    }
    let flat = flatten_program(&analyzed.program).map_err(|e| plain(&e))?;
    let universe = program_qubits(&flat);
    let result = &analyzed.analysis.result;
    out.write_all(emit_graph(&result.exit, &universe, cfg.format).as_bytes()).map_err(io)?;
    if cfg.per_point {
        out.write_all(per_point_json(result, &universe).as_bytes()).map_err(io)?;
    }
    if cfg.verify {
        let report = verify_analysis(&analyzed.program, &result.exit, &acfg.assumptions).map_err(|e| plain(&e))?;
        out.write_all(pretty(&report).as_bytes()).map_err(io)?;
        if !report.is_sound() {
            let _ = writeln!(err, "{file}: error: {} separability violation(s)", report.violations.len());
            return Ok(EXIT_VIOLATIONS);
        }
    }
    Ok(EXIT_OK)
}

/// Parse `argv` and run. Used by the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_DIAGNOSTICS } else { EXIT_OK };
        }
    };
    let Command::Analyze(cfg) = cli.command;
    run(&cfg, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// Assumption strings as an atom map, ignoring entry bindings. Exposed for
/// callers that bypass [`run`].
pub fn atom_assumptions(items: &[String]) -> BTreeMap<String, bool> {
    items
        .iter()
        .filter_map(|a| a.rsplit_once('='))
        .filter_map(|(n, v)| Some((n.trim().replace(' ', ""), parse_truth(v.trim())?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_file_exits_one() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(&RunConfig::new("/nonexistent/missing.qs"), &mut out, &mut err);
        assert_eq!(code, EXIT_DIAGNOSTICS);
        let msg = String::from_utf8(err).unwrap();
        assert!(msg.starts_with("/nonexistent/missing.qs: error:"), "{msg}");
        assert!(out.is_empty());
    }

    #[test]
    fn args_parse() {
        let cli =
            Cli::try_parse_from(["jiuchan", "analyze", "f.qs", "--format", "json", "--assume", "a=1", "--verify"])
                .unwrap();
        let Command::Analyze(cfg) = cli.command;
        assert_eq!(cfg.format, OutputFormat::Json);
        assert_eq!(cfg.assumptions, ["a=1"]);
        assert!(cfg.verify && !cfg.per_point);
        assert!(Cli::try_parse_from(["jiuchan", "analyze", "f.qs", "--max-unroll", "0"]).is_err());
    }

    #[test]
    fn atoms_from_strings() {
        let m = atom_assumptions(&["a == 1=0".into(), "b=1".into(), "c=x".into()]);
        assert_eq!(m, BTreeMap::from([("a==1".to_string(), false), ("b".to_string(), true)]));
    }
}
