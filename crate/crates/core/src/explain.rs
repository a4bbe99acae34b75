//! Error-indicating explanations of why an interpretation is not an answer set.
//!
//! Four kinds of error atoms explain a non-answer-set interpretation `I`:
//! `unsatisfied(r)` for an applicable rule with no true head atom,
//! `violated(c)` for an applicable constraint, `unsupported(a)` for a true atom
//! without support, and `ufLoop(a)` for the atoms of an unfounded loop.
//!
//! A set of error atoms `D` *explains* `I` when `I` is admissible (no
//! background rule is blamed), `I` is not an answer set, every error of `I`
//! is in `D`, and, if `I` has no such errors at all, the atoms of one of its
//! unfounded loops are in `D`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::program::{AtomSet, GroundProgram, Interpretation};
use crate::semantics::{
    check_enumerable, is_answer_set, is_applicable, is_supported, unfounded_loops_with,
    DependencyGraph, SemanticsError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplainError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("error atom {0} is not in the error universe")]
    OutOfUniverse(ErrorAtom),
    #[error("unknown background rule `{0}`")]
    UnknownRule(String),
    #[error("malformed error atom `{0}`; expected `kind:target`")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorKind {
    #[serde(rename = "unsatisfied")]
    Unsatisfied,
    #[serde(rename = "violated")]
    Violated,
    #[serde(rename = "unsupported")]
    Unsupported,
    #[serde(rename = "ufLoop")]
    UfLoop,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Unsatisfied => "unsatisfied",
            ErrorKind::Violated => "violated",
            ErrorKind::Unsupported => "unsupported",
            ErrorKind::UfLoop => "ufLoop",
        }
    }

    pub fn targets_rule(self) -> bool {
        matches!(self, ErrorKind::Unsatisfied | ErrorKind::Violated)
    }
}

impl FromStr for ErrorKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "unsatisfied" => Ok(ErrorKind::Unsatisfied),
            "violated" => Ok(ErrorKind::Violated),
            "unsupported" => Ok(ErrorKind::Unsupported),
            "ufLoop" => Ok(ErrorKind::UfLoop),
            _ => Err(()),
        }
    }
}

/// One error-indicating atom. The target is a rule id for
/// `unsatisfied`/`violated` and an atom name for `unsupported`/`ufLoop`.
///
/// The derived order (kind first, then target) is the canonical order used
/// for deterministic enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "ErrorAtomRepr", try_from = "ErrorAtomRepr")]
pub struct ErrorAtom {
    pub kind: ErrorKind,
    pub target: String,
}

impl ErrorAtom {
    pub fn new(kind: ErrorKind, target: impl Into<String>) -> ErrorAtom {
        ErrorAtom {
            kind,
            target: target.into(),
        }
    }

    pub fn unsatisfied(rule: impl Into<String>) -> ErrorAtom {
        ErrorAtom::new(ErrorKind::Unsatisfied, rule)
    }

    pub fn violated(rule: impl Into<String>) -> ErrorAtom {
        ErrorAtom::new(ErrorKind::Violated, rule)
    }

    pub fn unsupported(atom: impl Into<String>) -> ErrorAtom {
        ErrorAtom::new(ErrorKind::Unsupported, atom)
    }

    pub fn uf_loop(atom: impl Into<String>) -> ErrorAtom {
        ErrorAtom::new(ErrorKind::UfLoop, atom)
    }

    /// The `kind:target` key used in priors files.
    pub fn key(&self) -> String {
        format!("{}:{}", self.kind.as_str(), self.target)
    }
}

impl fmt::Display for ErrorAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind.as_str(), self.target)
    }
}

impl FromStr for ErrorAtom {
    type Err = ExplainError;

    /// Parses a `kind:target` key.
    fn from_str(s: &str) -> Result<Self, ExplainError> {
        let malformed = || ExplainError::Malformed(s.to_string());
        let (kind, target) = s.split_once(':').ok_or_else(malformed)?;
        let kind = kind.trim().parse::<ErrorKind>().map_err(|_| malformed())?;
        let target = target.trim();
        if target.is_empty() {
            return Err(malformed());
        }
        Ok(ErrorAtom::new(kind, target))
    }
}

#[derive(Serialize, Deserialize)]
struct ErrorAtomRepr {
    kind: ErrorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atom: Option<String>,
}

impl From<ErrorAtom> for ErrorAtomRepr {
    fn from(e: ErrorAtom) -> Self {
        let (rule, atom) = if e.kind.targets_rule() {
            (Some(e.target), None)
        } else {
            (None, Some(e.target))
        };
        ErrorAtomRepr {
            kind: e.kind,
            rule,
            atom,
        }
    }
}

impl TryFrom<ErrorAtomRepr> for ErrorAtom {
    type Error = String;

    fn try_from(r: ErrorAtomRepr) -> Result<Self, String> {
        let target = if r.kind.targets_rule() { r.rule } else { r.atom };
        let field = if r.kind.targets_rule() { "rule" } else { "atom" };
        target
            .map(|t| ErrorAtom::new(r.kind, t))
            .ok_or_else(|| format!("{} error atom needs a `{field}` field", r.kind.as_str()))
    }
}

/// `Er(D[P,B])`: every error atom constructible over the program, minus
/// `unsatisfied`/`violated` atoms of background rules. Indexed canonically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorUniverse {
    atoms: Vec<ErrorAtom>,
    index: HashMap<ErrorAtom, usize>,
    /// Universe slot of the `unsatisfied`/`violated` atom of each rule.
    rule_slot: Vec<Option<usize>>,
    unsupported_slot: Vec<usize>,
    uf_loop_slot: Vec<usize>,
}

impl ErrorUniverse {
    pub fn new(gp: &GroundProgram, background: &BTreeSet<String>) -> ErrorUniverse {
        let mut atoms: Vec<ErrorAtom> = Vec::new();
        for r in gp.rules() {
            if background.contains(&r.id) {
                continue;
            }
            atoms.push(if r.is_constraint() {
                ErrorAtom::violated(&r.id)
            } else {
                ErrorAtom::unsatisfied(&r.id)
            });
        }
        for a in gp.atoms() {
            atoms.push(ErrorAtom::unsupported(a.to_string()));
            atoms.push(ErrorAtom::uf_loop(a.to_string()));
        }
        atoms.sort();
        atoms.dedup();
        let index: HashMap<ErrorAtom, usize> =
            atoms.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let rule_slot = gp
            .rules()
            .iter()
            .map(|r| {
                let e = if r.is_constraint() {
                    ErrorAtom::violated(&r.id)
                } else {
                    ErrorAtom::unsatisfied(&r.id)
                };
                index.get(&e).copied()
            })
            .collect();
        let slot = |e: ErrorAtom| index[&e];
        let unsupported_slot = gp
            .atoms()
            .iter()
            .map(|a| slot(ErrorAtom::unsupported(a.to_string())))
            .collect();
        let uf_loop_slot = gp
            .atoms()
            .iter()
            .map(|a| slot(ErrorAtom::uf_loop(a.to_string())))
            .collect();
        ErrorUniverse {
            atoms,
            index,
            rule_slot,
            unsupported_slot,
            uf_loop_slot,
        }
    }

    pub fn atoms(&self) -> &[ErrorAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn slot(&self, e: &ErrorAtom) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn encode<'a, I>(&self, errors: I) -> Result<FixedBitSet, ExplainError>
    where
        I: IntoIterator<Item = &'a ErrorAtom>,
    {
        let mut bits = FixedBitSet::with_capacity(self.atoms.len());
        for e in errors {
            let slot = self
                .slot(e)
                .ok_or_else(|| ExplainError::OutOfUniverse(e.clone()))?;
            bits.insert(slot);
        }
        Ok(bits)
    }

    pub fn decode(&self, bits: &FixedBitSet) -> BTreeSet<ErrorAtom> {
        bits.ones().map(|i| self.atoms[i].clone()).collect()
    }
}

/// The error atoms of `I` itself: unsatisfied rules, violated constraints
/// and unsupported atoms. Background rules are not excluded here.
pub fn error_base(gp: &GroundProgram, i: Interpretation) -> BTreeSet<ErrorAtom> {
    let mut out = BTreeSet::new();
    for r in gp.rules() {
        if is_applicable(r, i) && r.head.is_disjoint(i) {
            out.insert(if r.is_constraint() {
                ErrorAtom::violated(&r.id)
            } else {
                ErrorAtom::unsatisfied(&r.id)
            });
        }
    }
    for a in i.iter() {
        if !is_supported(gp, a, i) {
            out.insert(ErrorAtom::unsupported(gp.atom(a).to_string()));
        }
    }
    out
}

/// No background rule is unsatisfied or violated under `I`.
pub fn is_admissible(gp: &GroundProgram, background: &BTreeSet<String>, i: Interpretation) -> bool {
    gp.rules()
        .iter()
        .filter(|r| background.contains(&r.id))
        .all(|r| !is_applicable(r, i) || !r.head.is_disjoint(i))
}

pub fn error_universe(gp: &GroundProgram, background: &BTreeSet<String>) -> Vec<ErrorAtom> {
    ErrorUniverse::new(gp, background).atoms
}

fn loop_atoms(gp: &GroundProgram, l: AtomSet) -> impl Iterator<Item = ErrorAtom> + '_ {
    l.iter().map(|a| ErrorAtom::uf_loop(gp.atom(a).to_string()))
}

/// Whether the error atoms `d` explain why `I` is not an answer set.
pub fn explains(
    gp: &GroundProgram,
    background: &BTreeSet<String>,
    d: &BTreeSet<ErrorAtom>,
    i: Interpretation,
) -> bool {
    if !is_admissible(gp, background, i) || is_answer_set(gp, i) {
        return false;
    }
    let base = error_base(gp, i);
    if !base.is_subset(d) {
        return false;
    }
    if !base.is_empty() {
        return true;
    }
    let graph = DependencyGraph::new(gp);
    unfounded_loops_with(gp, &graph, i)
        .into_iter()
        .any(|l| loop_atoms(gp, l.atoms()).all(|e| d.contains(&e)))
}

/// `Int(D[P,B,D])`: every interpretation explained by `d`, in increasing
/// bitmask order.
pub fn interpretations_of(
    gp: &GroundProgram,
    background: &BTreeSet<String>,
    d: &BTreeSet<ErrorAtom>,
) -> Result<Vec<Interpretation>, ExplainError> {
    let table = ExplanationTable::build(gp, background)?;
    let bits = table.universe().encode(d)?;
    Ok(table.interpretations_of(&bits).collect())
}

/// Why one admissible, non-answer-set interpretation fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Explanation {
    pub interpretation: Interpretation,
    /// `error_base(I)` encoded in the universe.
    pub base: FixedBitSet,
    /// `ufLoop` atoms of each unfounded loop; only computed when `base` is empty.
    pub loops: Vec<FixedBitSet>,
}

impl Explanation {
    pub fn explained_by(&self, d: &FixedBitSet) -> bool {
        self.base.is_subset(d)
            && (!self.base.is_clear() || self.loops.iter().any(|l| l.is_subset(d)))
    }
}

/// Explanations for every admissible non-answer-set interpretation of a
/// program, computed once. Checking a candidate diagnosis against it reduces
/// to bitset containment.
#[derive(Debug, Clone)]
pub struct ExplanationTable {
    universe: ErrorUniverse,
    entries: Vec<Explanation>,
}

impl ExplanationTable {
    pub fn build(
        gp: &GroundProgram,
        background: &BTreeSet<String>,
    ) -> Result<ExplanationTable, ExplainError> {
        check_enumerable(gp)?;
        if let Some(unknown) = background.iter().find(|id| gp.rule(id).is_none()) {
            return Err(ExplainError::UnknownRule(unknown.clone()));
        }
        let universe = ErrorUniverse::new(gp, background);
        let graph = DependencyGraph::new(gp);
        let protected: Vec<bool> = gp.rules().iter().map(|r| background.contains(&r.id)).collect();
        let mut entries = Vec::new();

        'interp: for i in AtomSet::all(gp.atom_count()) {
            let mut base = FixedBitSet::with_capacity(universe.len());
            for (k, r) in gp.rules().iter().enumerate() {
                if is_applicable(r, i) && r.head.is_disjoint(i) {
                    if protected[k] {
                        continue 'interp;
                    }
                    if let Some(slot) = universe.rule_slot[k] {
                        base.insert(slot);
                    }
                }
            }
            for a in i.iter() {
                if !is_supported(gp, a, i) {
                    base.insert(universe.unsupported_slot[a]);
                }
            }
            let mut loops = Vec::new();
            if base.is_clear() {
                if is_answer_set(gp, i) {
                    continue;
                }
                for l in unfounded_loops_with(gp, &graph, i) {
                    let mut bits = FixedBitSet::with_capacity(universe.len());
                    for a in l.atoms().iter() {
                        bits.insert(universe.uf_loop_slot[a]);
                    }
                    loops.push(bits);
                }
            }
            entries.push(Explanation {
                interpretation: i,
                base,
                loops,
            });
        }
        Ok(ExplanationTable { universe, entries })
    }

    pub fn universe(&self) -> &ErrorUniverse {
        &self.universe
    }

    /// One entry per admissible non-answer-set interpretation, in increasing
    /// bitmask order.
    pub fn entries(&self) -> &[Explanation] {
        &self.entries
    }

    pub fn interpretations_of<'a>(
        &'a self,
        d: &'a FixedBitSet,
    ) -> impl Iterator<Item = Interpretation> + 'a {
        self.entries
            .iter()
            .filter(move |e| e.explained_by(d))
            .map(|e| e.interpretation)
    }

    /// Error atoms that occur in some explanation. A cardinality-minimal
    /// diagnosis never contains any other atom: dropping it changes no
    /// explained interpretation.
    pub fn relevant(&self) -> FixedBitSet {
        let mut bits = FixedBitSet::with_capacity(self.universe.len());
        for e in &self.entries {
            bits.union_with(&e.base);
            for l in &e.loops {
                bits.union_with(l);
            }
        }
        bits
    }
}
