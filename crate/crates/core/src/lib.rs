//! Static entanglement analysis for a subset of Q#.
//!
//! The pipeline runs parse → resolve → lower → graphs → summaries →
//! analysis → emit. A small state-vector simulator in [`oracle`] checks the
//! analysis's separability claims on desk-scale programs.

pub mod analysis;
pub mod cli;
pub mod emit;
pub mod frontend;
pub mod graphs;
pub mod normalize;
pub mod oracle;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Diagnostics(#[from] frontend::Diagnostics),
    #[error(transparent)]
    Lower(#[from] normalize::LowerError),
    #[error(transparent)]
    Graph(#[from] graphs::GraphError),
    #[error(transparent)]
    Analysis(#[from] analysis::AnalysisError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// A lowered program together with its analysis.
#[derive(Debug, Clone)]
pub struct Analyzed {
    pub program: normalize::LoweredProgram,
    pub analysis: analysis::ProgramAnalysis,
}

/// Lower and analyze an already resolved program.
pub fn analyze_resolved(
    resolved: &frontend::ResolvedProgram,
    opts: &normalize::LowerOptions,
    cfg: &analysis::AnalysisConfig,
) -> Result<Analyzed, Error> {
    let program = normalize::lower_program_with_library(resolved, &cfg.library, opts)?;
    graphs::build_call_graph(&program)?.check_acyclic()?;
    let analysis = analysis::analyze_program(&program, cfg)?;
    Ok(Analyzed { program, analysis })
}

/// Run the whole pipeline on source text.
pub fn analyze_source(
    text: &str,
    entry: Option<&str>,
    opts: &normalize::LowerOptions,
    cfg: &analysis::AnalysisConfig,
) -> Result<Analyzed, Error> {
    let parsed = frontend::parse_str(text)?;
    let resolved = frontend::resolve_with_library(parsed.namespace, entry, &cfg.library)?;
    analyze_resolved(&resolved, opts, cfg)
}
