//! The extensible library of fundamental operations.
//!
//! The built-in table is a TOML data file compiled into the binary; callers
//! can load their own with [`GateLibrary::from_toml`].

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Deserialize;
use thiserror::Error;

pub const ALLOC: &str = "Alloc";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InverseKind {
    #[serde(rename = "self")]
    SelfInverse,
    Adjoint,
    Negate,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct GateSpec {
    pub name: String,
    pub magnitude: bool,
    pub inverse: InverseKind,
    #[serde(default)]
    pub params: usize,
    #[serde(default)]
    pub flip: bool,
    #[serde(default)]
    pub phase_on_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct GateAlias {
    pub name: String,
    pub gate: String,
    pub controls: usize,
}

#[derive(Debug, Deserialize)]
struct LibraryFile {
    #[serde(default)]
    gate: Vec<GateSpec>,
    #[serde(default)]
    alias: Vec<GateAlias>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GateError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("invalid gate library: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default)]
pub struct GateLibrary {
    gates: BTreeMap<String, GateSpec>,
    aliases: BTreeMap<String, GateAlias>,
}

const BUILTIN: &str = include_str!("gates.toml");

impl GateLibrary {
    pub fn builtin() -> &'static GateLibrary {
        static LIB: OnceLock<GateLibrary> = OnceLock::new();
        LIB.get_or_init(|| GateLibrary::from_toml(BUILTIN).expect("built-in gate library is valid"))
    }

    pub fn from_toml(text: &str) -> Result<Self, GateError> {
        let file: LibraryFile = toml::from_str(text).map_err(|e| GateError::Invalid(e.to_string()))?;
        let mut lib = GateLibrary::default();
        for g in file.gate {
            if lib.gates.insert(g.name.clone(), g.clone()).is_some() {
                return Err(GateError::Invalid(format!("gate `{}` defined twice", g.name)));
            }
        }
        for a in file.alias {
            if !lib.gates.contains_key(&a.gate) {
                return Err(GateError::Invalid(format!("alias `{}` targets unknown gate `{}`", a.name, a.gate)));
            }
            lib.aliases.insert(a.name.clone(), a);
        }
        Ok(lib)
    }

    pub fn get(&self, name: &str) -> Option<&GateSpec> {
        self.gates.get(name)
    }

    pub fn alias(&self, name: &str) -> Option<&GateAlias> {
        self.aliases.get(name)
    }

    /// True for library gates, their aliases, and the allocation pseudo-op.
    pub fn contains(&self, name: &str) -> bool {
        name == ALLOC || self.gates.contains_key(name) || self.aliases.contains_key(name)
    }

    pub fn is_magnitude(&self, name: &str) -> Result<bool, GateError> {
        if let Some(g) = self.gates.get(name) {
            return Ok(g.magnitude);
        }
        if let Some(a) = self.aliases.get(name) {
            return Ok(self.gates[&a.gate].magnitude);
        }
        Err(GateError::UnknownGate(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.gates.keys().map(String::as_str)
    }
}
