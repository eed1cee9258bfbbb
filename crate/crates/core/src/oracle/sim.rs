//! Dense state-vector simulation. Qubit 0 is the most significant bit of the
//! amplitude index.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::OracleError;
use crate::normalize::{LabeledLine, OperationLine, QubitRef, Truth};

pub const MAX_QUBITS: usize = 12;

pub type Matrix2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `n` qubits.
    pub fn zero(n: usize) -> Result<Self, OracleError> {
        if n > MAX_QUBITS {
            return Err(OracleError::TooManyQubits(n));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amps(amps: Vec<Complex64>) -> Result<Self, OracleError> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n {
            return Err(OracleError::BadLength(amps.len()));
        }
        if n > MAX_QUBITS {
            return Err(OracleError::TooManyQubits(n));
        }
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn bit(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    /// Apply `u` to `target` on the subspace where every control is 1.
    pub fn apply(&mut self, u: &Matrix2, target: usize, controls: &[usize]) {
        let tb = self.bit(target);
        let cmask: usize = controls.iter().map(|&c| self.bit(c)).fold(0, |a, b| a | b);
        for i in 0..self.amps.len() {
            if i & tb != 0 || i & cmask != cmask {
                continue;
            }
            let j = i | tb;
            let (a, b) = (self.amps[i], self.amps[j]);
            self.amps[i] = u[0][0] * a + u[0][1] * b;
            self.amps[j] = u[1][0] * a + u[1][1] * b;
        }
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn diag(a: Complex64, b: Complex64) -> Matrix2 {
    [[a, c(0.0, 0.0)], [c(0.0, 0.0), b]]
}

pub fn dagger(u: &Matrix2) -> Matrix2 {
    [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]]
}

/// Unitary of a library gate.
pub fn gate_matrix(name: &str, params: &[f64]) -> Result<Matrix2, OracleError> {
    let theta = || params.first().copied().ok_or_else(|| OracleError::UnsupportedGate(format!("{name} without angle")));
    Ok(match name {
        "X" => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        "Y" => [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
        "Z" => diag(c(1.0, 0.0), c(-1.0, 0.0)),
        "H" => {
            let h = FRAC_1_SQRT_2;
            [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]
        }
        "S" => diag(c(1.0, 0.0), c(0.0, 1.0)),
        "T" => diag(c(1.0, 0.0), Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
        "R1" => diag(c(1.0, 0.0), Complex64::from_polar(1.0, theta()?)),
        "Rz" => {
            let t = theta()?;
            diag(Complex64::from_polar(1.0, -t / 2.0), Complex64::from_polar(1.0, t / 2.0))
        }
        "Rx" => {
            let t = theta()? / 2.0;
            [[c(t.cos(), 0.0), c(0.0, -t.sin())], [c(0.0, -t.sin()), c(t.cos(), 0.0)]]
        }
        "Ry" => {
            let t = theta()? / 2.0;
            [[c(t.cos(), 0.0), c(-t.sin(), 0.0)], [c(t.sin(), 0.0), c(t.cos(), 0.0)]]
        }
        _ => return Err(OracleError::UnsupportedGate(name.to_string())),
    })
}

/// Unitary of a gate line including its Adjoint functor.
pub fn line_matrix(line: &OperationLine) -> Result<Matrix2, OracleError> {
    let mut params = Vec::new();
    for p in &line.params {
        params.push(p.to_f64().ok_or_else(|| OracleError::SymbolicParameter(p.to_string()))?);
    }
    let u = gate_matrix(&line.op, &params)?;
    Ok(if line.functor.is_adjoint() { dagger(&u) } else { u })
}

/// Qubits in order of first mention.
pub fn program_qubits(lines: &[LabeledLine]) -> Vec<QubitRef> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for l in lines {
        for q in l.line.qubits() {
            if seen.insert(q.clone()) {
                out.push(q.clone());
            }
        }
    }
    out
}

/// Run gate lines from |0…0⟩. Lines whose condition is false are skipped;
/// every atom of the remaining lines must be assigned.
pub fn simulate(
    lines: &[LabeledLine],
    qubits: &[QubitRef],
    assign: &BTreeMap<String, bool>,
) -> Result<StateVector, OracleError> {
    let mut sv = StateVector::zero(qubits.len())?;
    let index: HashMap<&QubitRef, usize> = qubits.iter().enumerate().map(|(i, q)| (q, i)).collect();
    let idx = |q: &QubitRef| index.get(q).copied().ok_or_else(|| OracleError::UnknownQubit(q.to_string()));
    for l in lines {
        let line = &l.line;
        if line.is_alloc() {
            continue;
        }
        if line.callee().is_some() {
            return Err(OracleError::UnsupportedGate(format!("call to `{}` (inline first)", line.op)));
        }
        match line.control.condition.eval(assign) {
            Truth::False => continue,
            Truth::Unknown => return Err(OracleError::UndecidedCondition(line.control.condition.to_string())),
            Truth::True => {}
        }
        let u = line_matrix(line)?;
        let controls = line.control.qcontrol.iter().map(idx).collect::<Result<Vec<_>, _>>()?;
        sv.apply(&u, idx(line.target())?, &controls);
    }
    Ok(sv)
}
