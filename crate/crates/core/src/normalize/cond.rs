//! Classical conditions: conjunctions of canonical atoms.

use std::collections::BTreeMap;
use std::fmt;

/// Canonical text of a classical boolean expression, with a polarity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CondAtom {
    pub text: String,
    pub positive: bool,
}

impl CondAtom {
    pub fn new(text: impl Into<String>, positive: bool) -> Self {
        Self { text: text.into(), positive }
    }

    pub fn negated(&self) -> Self {
        Self { text: self.text.clone(), positive: !self.positive }
    }
}

impl fmt::Display for CondAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            f.write_str(&self.text)
        } else {
            write!(f, "¬{}", self.text)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

/// A conjunction of atoms. The empty conjunction is unconditional; a
/// conjunction holding an atom and its negation is dead.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Condition {
    atoms: BTreeMap<String, bool>,
    dead: bool,
}

impl Condition {
    pub fn always() -> Self {
        Self::default()
    }

    pub fn never() -> Self {
        Self { atoms: BTreeMap::new(), dead: true }
    }

    pub fn is_dead(&self) -> bool {
        self.dead
    }

    pub fn is_unconditional(&self) -> bool {
        !self.dead && self.atoms.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = CondAtom> + '_ {
        self.atoms.iter().map(|(t, p)| CondAtom::new(t.clone(), *p))
    }

    pub fn with(mut self, atom: &CondAtom) -> Self {
        if self.dead {
            return self;
        }
        match self.atoms.get(&atom.text) {
            Some(p) if *p != atom.positive => {
                self.atoms.clear();
                self.dead = true;
            }
            Some(_) => {}
            None => {
                self.atoms.insert(atom.text.clone(), atom.positive);
            }
        }
        self
    }

    pub fn and(&self, other: &Condition) -> Condition {
        if other.dead {
            return Condition::never();
        }
        other.atoms().fold(self.clone(), |c, a| c.with(&a))
    }

    /// Evaluate under a partial assignment of atom texts.
    pub fn eval(&self, assign: &BTreeMap<String, bool>) -> Truth {
        if self.dead {
            return Truth::False;
        }
        let mut unknown = false;
        for (text, positive) in &self.atoms {
            match assign.get(text) {
                Some(v) if v != positive => return Truth::False,
                Some(_) => {}
                None => unknown = true,
            }
        }
        if unknown {
            Truth::Unknown
        } else {
            Truth::True
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dead {
            return f.write_str("false");
        }
        let parts: Vec<String> = self.atoms().map(|a| a.to_string()).collect();
        f.write_str(&parts.join("∧"))
    }
}
