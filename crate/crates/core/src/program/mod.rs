//! Disjunctive logic programs: syntax tree, parser, and naive Herbrand grounder.
//!
//! A [`Program`] is what the user wrote (possibly with variables). Grounding
//! turns it into a [`GroundProgram`], which interns every ground atom into a
//! dense index so that interpretations can be represented as bitmasks
//! ([`AtomSet`]). Everything downstream works over ground programs.

mod atoms;
mod ground;
mod parser;

pub use atoms::{AtomId, AtomSet, Interpretation, MAX_ATOMS};
pub use ground::{ground, GroundConfig, GroundProgram, GroundRule, Origin, DEFAULT_ATOM_CAP};
pub use parser::parse_program;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while parsing or grounding a program.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate rule label `{label}` at line {line}")]
    DuplicateLabel { label: String, line: usize },
    #[error("unsafe rule `{rule}`: variable {variable} does not occur in the positive body")]
    UnsafeRule { rule: String, variable: String },
    #[error("grounding exceeds the atom cap of {cap} ground atoms")]
    AtomCap { cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Variable(String),
    Constant(String),
}

impl Term {
    /// Classifies an identifier by its first character: uppercase starts a
    /// variable, anything else is a constant.
    pub fn from_name(name: &str) -> Term {
        if name.starts_with(|c: char| c.is_ascii_uppercase()) {
            Term::Variable(name.to_string())
        } else {
            Term::Constant(name.to_string())
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Variable(n) | Term::Constant(n) => n,
        }
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Atom {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    /// A propositional atom (no arguments).
    pub fn prop(predicate: impl Into<String>) -> Atom {
        Atom::new(predicate, Vec::new())
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_variable())
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Variable(v) => Some(v.as_str()),
            Term::Constant(_) => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A source rule `h1 | ... | hl :- b1, ..., bm, not bm+1, ..., not bn.`
///
/// Head and body parts are duplicate-free and keep their source order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub head: Vec<Atom>,
    pub pos_body: Vec<Atom>,
    pub neg_body: Vec<Atom>,
}

impl Rule {
    pub fn is_constraint(&self) -> bool {
        self.head.is_empty()
    }

    pub fn is_fact(&self) -> bool {
        self.pos_body.is_empty() && self.neg_body.is_empty()
    }

    /// Variables in order of first occurrence (head, positive body, negative body).
    pub fn variables(&self) -> Vec<String> {
        let mut seen = Vec::<String>::new();
        for atom in self.head.iter().chain(&self.pos_body).chain(&self.neg_body) {
            for v in atom.variables() {
                if !seen.iter().any(|s| s == v) {
                    seen.push(v.to_string());
                }
            }
        }
        seen
    }

    /// The first variable that occurs in the head or negative body but not in
    /// the positive body.
    pub fn unsafe_variable(&self) -> Option<String> {
        let bound: BTreeSet<&str> = self.pos_body.iter().flat_map(|a| a.variables()).collect();
        self.head
            .iter()
            .chain(&self.neg_body)
            .flat_map(|a| a.variables())
            .find(|v| !bound.contains(v))
            .map(str::to_string)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        let head: Vec<String> = self.head.iter().map(ToString::to_string).collect();
        f.write_str(&head.join(" | "))?;
        let body: Vec<String> = self
            .pos_body
            .iter()
            .map(ToString::to_string)
            .chain(self.neg_body.iter().map(|a| format!("not {a}")))
            .collect();
        if !body.is_empty() {
            if !head.is_empty() {
                f.write_str(" ")?;
            }
            write!(f, ":- {}", body.join(", "))?;
        }
        f.write_str(".")
    }
}

/// A parsed program. Rules listed in `background` were declared correct by
/// the user (everything after a `#background.` directive).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub background: BTreeSet<String>,
}

impl Program {
    /// Constants occurring anywhere in the program, sorted.
    pub fn constants(&self) -> BTreeSet<String> {
        self.rules
            .iter()
            .flat_map(|r| r.head.iter().chain(&r.pos_body).chain(&r.neg_body))
            .flat_map(|a| a.args.iter())
            .filter_map(|t| match t {
                Term::Constant(c) => Some(c.clone()),
                Term::Variable(_) => None,
            })
            .collect()
    }
}

impl fmt::Display for Program {
    /// Background rules are printed last, under a `#background.` directive.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (bg, regular): (Vec<&Rule>, Vec<&Rule>) = self
            .rules
            .iter()
            .partition(|r| self.background.contains(&r.id));
        for rule in regular {
            writeln!(f, "{rule}")?;
        }
        if !bg.is_empty() {
            writeln!(f, "#background.")?;
            for rule in bg {
                writeln!(f, "{rule}")?;
            }
        }
        Ok(())
    }
}
