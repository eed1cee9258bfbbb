//! Python bindings. Results cross the boundary as JSON or DOT text.

use std::collections::BTreeMap;

use jiuchan::analysis::AnalysisConfig;
use jiuchan::emit::{graph_dot, graph_json, per_point_json, pretty};
use jiuchan::normalize::{flatten_program, ClassicalValue, LowerOptions};
use jiuchan::oracle::{program_qubits, verify_analysis};
use jiuchan::{analyze_source, Analyzed};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

/// Split `name -> value` pairs into entry bindings and atom assumptions.
/// Integer-valued names that appear in `params` are bindings.
fn configure(params: &[String], assume: &BTreeMap<String, i64>) -> (LowerOptions, AnalysisConfig) {
    let mut opts = LowerOptions::default();
    let mut cfg = AnalysisConfig::default();
    for (name, &v) in assume {
        if params.contains(name) {
            opts.bindings.insert(name.clone(), ClassicalValue::Int(v));
        } else {
            cfg.assumptions.insert(name.replace(' ', ""), v != 0);
        }
    }
    (opts, cfg)
}

fn entry_params(source: &str, entry: Option<&str>) -> Result<Vec<String>, String> {
    let parsed = jiuchan::frontend::parse_str(source).map_err(|d| d.to_string())?;
    let resolved = jiuchan::frontend::resolve_references(parsed.namespace, entry).map_err(|d| d.to_string())?;
    Ok(resolved.entry_decl().params.iter().map(|p| p.name.clone()).collect())
}

fn run(
    source: &str,
    entry: Option<&str>,
    assume: &BTreeMap<String, i64>,
) -> Result<(Analyzed, AnalysisConfig), String> {
    let params = entry_params(source, entry)?;
    let (opts, cfg) = configure(&params, assume);
    let analyzed = analyze_source(source, entry, &opts, &cfg).map_err(|e| e.to_string())?;
    Ok((analyzed, cfg))
}

pub fn analyze_text(
    source: &str,
    entry: Option<&str>,
    assume: &BTreeMap<String, i64>,
    json: bool,
) -> Result<String, String> {
    let (a, _) = run(source, entry, assume)?;
    let exit = &a.analysis.result.exit;
    if json {
        let flat = flatten_program(&a.program).map_err(|e| e.to_string())?;
        Ok(graph_json(exit, &program_qubits(&flat)))
    } else {
        Ok(graph_dot(&exit.graph))
    }
}

pub fn per_point_text(source: &str, entry: Option<&str>, assume: &BTreeMap<String, i64>) -> Result<String, String> {
    let (a, _) = run(source, entry, assume)?;
    let flat = flatten_program(&a.program).map_err(|e| e.to_string())?;
    Ok(per_point_json(&a.analysis.result, &program_qubits(&flat)))
}

pub fn verify_text(source: &str, entry: Option<&str>, assume: &BTreeMap<String, i64>) -> Result<String, String> {
    let (a, cfg) = run(source, entry, assume)?;
    let report = verify_analysis(&a.program, &a.analysis.result.exit, &cfg.assumptions).map_err(|e| e.to_string())?;
    Ok(pretty(&report))
}

fn py_err(e: String) -> PyErr {
    PyValueError::new_err(e)
}

/// Exit entanglement graph as JSON (`format="json"`) or DOT.
#[pyfunction]
#[pyo3(signature = (source, entry=None, assume=None, format="json"))]
fn analyze(source: &str, entry: Option<&str>, assume: Option<BTreeMap<String, i64>>, format: &str) -> PyResult<String> {
    let json = match format {
        "json" => true,
        "dot" => false,
        other => return Err(PyValueError::new_err(format!("unknown format `{other}`"))),
    };
    analyze_text(source, entry, &assume.unwrap_or_default(), json).map_err(py_err)
}

/// Before/after snapshots of every entry line, as a JSON array.
#[pyfunction]
#[pyo3(signature = (source, entry=None, assume=None))]
fn per_point(source: &str, entry: Option<&str>, assume: Option<BTreeMap<String, i64>>) -> PyResult<String> {
    per_point_text(source, entry, &assume.unwrap_or_default()).map_err(py_err)
}

/// Simulation-backed soundness report as JSON.
#[pyfunction]
#[pyo3(signature = (source, entry=None, assume=None))]
fn verify(source: &str, entry: Option<&str>, assume: Option<BTreeMap<String, i64>>) -> PyResult<String> {
    verify_text(source, entry, &assume.unwrap_or_default()).map_err(py_err)
}

#[pymodule]
fn pyjiuchan(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(per_point, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_bind_and_others_assume() {
        let assume = BTreeMap::from([("a".to_string(), 2), ("b == 1".to_string(), 0)]);
        let (opts, cfg) = configure(&["a".to_string()], &assume);
        assert_eq!(opts.bindings.get("a"), Some(&ClassicalValue::Int(2)));
        assert_eq!(cfg.assumptions.get("b==1"), Some(&false));
        assert_eq!(cfg.assumptions.len(), 1);
    }
}
