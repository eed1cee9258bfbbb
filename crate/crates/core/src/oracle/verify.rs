//! Exhaustive check of an exit graph against simulation.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::purity::{reduced_purity, SEPARABLE_TOLERANCE};
use super::sim::{program_qubits, simulate, MAX_QUBITS};
use super::OracleError;
use crate::analysis::{AnalysisState, Edge};
use crate::normalize::{flatten_program, LabeledLine, LoweredProgram, QubitRef};

pub const MAX_ATOMS: usize = 8;

/// A component that the simulated state does not split off.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub assignment: BTreeMap<String, bool>,
    pub component: Vec<QubitRef>,
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub assignments_checked: usize,
    pub violations: Vec<Violation>,
    /// Graph edges whose endpoints were never both entangled with the rest
    /// of the register; these are false positives, which are permitted.
    pub never_entangled_edges: Vec<Edge>,
}

impl VerifyReport {
    pub fn is_sound(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Flatten `program`, then check the partition induced by `exit` under
/// every assignment of the atoms not fixed by `assumptions`.
pub fn verify_analysis(
    program: &LoweredProgram,
    exit: &AnalysisState,
    assumptions: &BTreeMap<String, bool>,
) -> Result<VerifyReport, OracleError> {
    let flat = flatten_program(program)?;
    let qubits = program_qubits(&flat);
    let components = exit.partition(&qubits);
    verify_components(&flat, &qubits, &components, exit.graph.edges(), assumptions)
}

/// Core of [`verify_analysis`] over explicit components. Components may
/// mention qubits outside `qubits`; those are ignored.
pub fn verify_components(
    lines: &[LabeledLine],
    qubits: &[QubitRef],
    components: &[Vec<QubitRef>],
    edges: &BTreeSet<Edge>,
    assumptions: &BTreeMap<String, bool>,
) -> Result<VerifyReport, OracleError> {
    if qubits.len() > MAX_QUBITS {
        return Err(OracleError::TooManyQubits(qubits.len()));
    }
    let atoms: Vec<String> = lines
        .iter()
        .flat_map(|l| l.line.control.condition.atoms())
        .map(|a| a.text)
        .filter(|t| !assumptions.contains_key(t))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if atoms.len() > MAX_ATOMS {
        return Err(OracleError::TooManyAtoms(atoms.len()));
    }
    let index: BTreeMap<&QubitRef, usize> = qubits.iter().enumerate().map(|(i, q)| (q, i)).collect();
    let parts: Vec<(Vec<QubitRef>, Vec<usize>)> = components
        .iter()
        .map(|c| {
            let idx: Vec<usize> = c.iter().filter_map(|q| index.get(q).copied()).collect();
            (c.clone(), idx)
        })
        .filter(|(_, idx)| !idx.is_empty() && idx.len() < qubits.len())
        .collect();

    let mut violations = Vec::new();
    let mut entangled_somewhere: BTreeSet<&Edge> = BTreeSet::new();
    let count = 1usize << atoms.len();
    for mask in 0..count {
        let mut assign = assumptions.clone();
        for (i, a) in atoms.iter().enumerate() {
            assign.insert(a.clone(), mask & (1 << i) != 0);
        }
        let sv = simulate(lines, qubits, &assign)?;
        for (comp, idx) in &parts {
            let p = reduced_purity(&sv, idx)?;
            if p < 1.0 - SEPARABLE_TOLERANCE {
                violations.push(Violation { assignment: assign.clone(), component: comp.clone(), purity: p });
            }
        }
        let single = |q: &QubitRef| -> Result<bool, OracleError> {
            match index.get(q) {
                Some(&i) if qubits.len() > 1 => Ok(reduced_purity(&sv, &[i])? < 1.0 - SEPARABLE_TOLERANCE),
                _ => Ok(false),
            }
        };
        for e in edges {
            if !entangled_somewhere.contains(e) && single(&e.a)? && single(&e.b)? {
                entangled_somewhere.insert(e);
            }
        }
    }
    let never_entangled_edges = edges.iter().filter(|e| !entangled_somewhere.contains(e)).cloned().collect();
    Ok(VerifyReport { assignments_checked: count, violations, never_entangled_edges })
}
