//! Diagnosis problem instances and the search for cardinality-minimal diagnoses.
//!
//! A DPI bundles a ground program, its background rules, and two sets of
//! test cases over signed atoms. A set of error atoms `D` is a diagnosis when
//! it explains at least one interpretation, every explained interpretation
//! satisfies every positive test case, and every negative test case is
//! satisfied by at least one explained interpretation.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explain::{ErrorAtom, ExplainError, ExplanationTable};
use crate::program::{AtomSet, GroundProgram, Interpretation};

pub const DEFAULT_MAX_CARDINALITY: usize = 4;
pub const DEFAULT_MAX_DIAGNOSES: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagnosisError {
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error("test case is contradictory: atoms {0:?} are both required true and false")]
    Contradictory(AtomSet),
    #[error("test case mentions atoms outside the program")]
    OutsideUniverse,
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
}

/// A test case: atoms required true (`int(a)`) and false (`int̄(a)`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignedAtomSet {
    positive: AtomSet,
    negative: AtomSet,
}

impl SignedAtomSet {
    pub fn new(positive: AtomSet, negative: AtomSet) -> Result<SignedAtomSet, DiagnosisError> {
        let clash = positive.intersection(negative);
        if !clash.is_empty() {
            return Err(DiagnosisError::Contradictory(clash));
        }
        Ok(SignedAtomSet { positive, negative })
    }

    pub fn positive_only(atoms: AtomSet) -> SignedAtomSet {
        SignedAtomSet {
            positive: atoms,
            negative: AtomSet::EMPTY,
        }
    }

    pub fn negative_only(atoms: AtomSet) -> SignedAtomSet {
        SignedAtomSet {
            positive: AtomSet::EMPTY,
            negative: atoms,
        }
    }

    pub fn positive(&self) -> AtomSet {
        self.positive
    }

    pub fn negative(&self) -> AtomSet {
        self.negative
    }

    pub fn complement(&self) -> SignedAtomSet {
        SignedAtomSet {
            positive: self.negative,
            negative: self.positive,
        }
    }

    pub fn atoms(&self) -> AtomSet {
        self.positive.union(self.negative)
    }

    pub fn satisfied_by(&self, i: Interpretation) -> bool {
        self.positive.is_subset(i) && self.negative.is_disjoint(i)
    }
}

/// Name-based rendering of a test case: `{"pos":["a"],"neg":["b"]}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCaseJson {
    #[serde(default)]
    pub pos: Vec<String>,
    #[serde(default)]
    pub neg: Vec<String>,
}

impl TestCaseJson {
    pub fn resolve(&self, gp: &GroundProgram) -> Result<SignedAtomSet, DiagnosisError> {
        let lookup = |names: &[String]| {
            gp.atom_set(names.iter().map(String::as_str))
                .map_err(DiagnosisError::UnknownAtom)
        };
        SignedAtomSet::new(lookup(&self.pos)?, lookup(&self.neg)?)
    }

    pub fn render(t: &SignedAtomSet, gp: &GroundProgram) -> TestCaseJson {
        TestCaseJson {
            pos: gp.names(t.positive),
            neg: gp.names(t.negative),
        }
    }
}

pub fn complement(t: &SignedAtomSet) -> SignedAtomSet {
    t.complement()
}

/// `I ⊨ t`: all positive atoms true, all negative atoms false.
pub fn meta_satisfies(i: Interpretation, t: &SignedAtomSet) -> bool {
    t.satisfied_by(i)
}

/// Folds the four reasoning-task test sets into positive and negative cases:
/// `P = Tc+ ∪ {t̄ | t ∈ Tb-}` and `N = Tb+ ∪ {t̄ | t ∈ Tc-}`.
pub fn normalize_tests(
    cautious_true: &[SignedAtomSet],
    cautious_false: &[SignedAtomSet],
    brave_true: &[SignedAtomSet],
    brave_false: &[SignedAtomSet],
) -> (BTreeSet<SignedAtomSet>, BTreeSet<SignedAtomSet>) {
    let positive = cautious_true
        .iter()
        .copied()
        .chain(brave_false.iter().map(SignedAtomSet::complement))
        .collect();
    let negative = brave_true
        .iter()
        .copied()
        .chain(cautious_false.iter().map(SignedAtomSet::complement))
        .collect();
    (positive, negative)
}

/// A set of error atoms accepted as an explanation of the fault.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Diagnosis {
    pub errors: BTreeSet<ErrorAtom>,
}

impl Diagnosis {
    pub fn new(errors: impl IntoIterator<Item = ErrorAtom>) -> Diagnosis {
        Diagnosis {
            errors: errors.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    /// Comma-joined `kind:target` keys; stable identifier in API payloads.
    pub fn key(&self) -> String {
        self.errors.iter().map(ErrorAtom::key).join(",")
    }
}

impl fmt::Display for Diagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.errors.iter().join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosisOptions {
    /// Stop after this many diagnoses.
    pub max_diagnoses: usize,
    /// Largest candidate cardinality tried.
    pub max_cardinality: usize,
}

impl Default for DiagnosisOptions {
    fn default() -> Self {
        DiagnosisOptions {
            max_diagnoses: DEFAULT_MAX_DIAGNOSES,
            max_cardinality: DEFAULT_MAX_CARDINALITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    /// Every diagnosis of minimal cardinality was returned.
    Complete,
    /// More minimal diagnoses exist than were requested.
    Truncated,
    /// No diagnosis up to the cardinality cap; larger ones may exist.
    CardinalityCapReached,
    /// The search space was exhausted: the DPI has no diagnosis.
    NoDiagnosis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosisReport {
    pub diagnoses: Vec<Diagnosis>,
    pub status: SearchStatus,
    /// Cardinality of the returned diagnoses, if any were found.
    pub cardinality: Option<usize>,
}

/// A diagnosis problem instance `⟨D[P,B], P, N⟩`.
///
/// Immutable; updates return a new instance sharing the program and its
/// precomputed explanation table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DpiData", into = "DpiData")]
pub struct Dpi {
    program: Arc<GroundProgram>,
    background: BTreeSet<String>,
    positive: BTreeSet<SignedAtomSet>,
    negative: BTreeSet<SignedAtomSet>,
    table: Arc<ExplanationTable>,
}

#[derive(Serialize, Deserialize)]
struct DpiData {
    program: Arc<GroundProgram>,
    background: BTreeSet<String>,
    positive: Vec<TestCaseJson>,
    negative: Vec<TestCaseJson>,
}

impl TryFrom<DpiData> for Dpi {
    type Error = DiagnosisError;

    fn try_from(d: DpiData) -> Result<Self, DiagnosisError> {
        let resolve = |ts: &[TestCaseJson]| {
            ts.iter()
                .map(|t| t.resolve(&d.program))
                .collect::<Result<BTreeSet<_>, _>>()
        };
        let positive = resolve(&d.positive)?;
        let negative = resolve(&d.negative)?;
        Dpi::with_background(d.program, d.background)?.with_tests(positive, negative)
    }
}

impl From<Dpi> for DpiData {
    fn from(d: Dpi) -> Self {
        let render = |ts: &BTreeSet<SignedAtomSet>| {
            ts.iter()
                .map(|t| TestCaseJson::render(t, &d.program))
                .collect()
        };
        DpiData {
            positive: render(&d.positive),
            negative: render(&d.negative),
            background: d.background.clone(),
            program: d.program.clone(),
        }
    }
}

impl PartialEq for Dpi {
    fn eq(&self, other: &Self) -> bool {
        self.program == other.program
            && self.background == other.background
            && self.positive == other.positive
            && self.negative == other.negative
    }
}

impl Eq for Dpi {}

impl Dpi {
    /// A DPI using the program's own background section and no test cases.
    pub fn new(program: impl Into<Arc<GroundProgram>>) -> Result<Dpi, DiagnosisError> {
        let program = program.into();
        let background = program.background().clone();
        Dpi::with_background(program, background)
    }

    pub fn with_background(
        program: impl Into<Arc<GroundProgram>>,
        background: BTreeSet<String>,
    ) -> Result<Dpi, DiagnosisError> {
        let program = program.into();
        let table = ExplanationTable::build(&program, &background)?;
        Ok(Dpi {
            program,
            background,
            positive: BTreeSet::new(),
            negative: BTreeSet::new(),
            table: Arc::new(table),
        })
    }

    pub fn with_tests(
        mut self,
        positive: BTreeSet<SignedAtomSet>,
        negative: BTreeSet<SignedAtomSet>,
    ) -> Result<Dpi, DiagnosisError> {
        let universe = self.program.atom_universe();
        if positive.iter().chain(&negative).any(|t| !t.atoms().is_subset(universe)) {
            return Err(DiagnosisError::OutsideUniverse);
        }
        self.positive = positive;
        self.negative = negative;
        Ok(self)
    }

    pub fn add_positive(&self, t: SignedAtomSet) -> Dpi {
        let mut next = self.clone();
        next.positive.insert(t);
        next
    }

    pub fn add_negative(&self, t: SignedAtomSet) -> Dpi {
        let mut next = self.clone();
        next.negative.insert(t);
        next
    }

    pub fn program(&self) -> &GroundProgram {
        &self.program
    }

    pub fn background(&self) -> &BTreeSet<String> {
        &self.background
    }

    pub fn positive(&self) -> &BTreeSet<SignedAtomSet> {
        &self.positive
    }

    pub fn negative(&self) -> &BTreeSet<SignedAtomSet> {
        &self.negative
    }

    pub fn table(&self) -> &ExplanationTable {
        &self.table
    }

    pub fn error_universe(&self) -> &[ErrorAtom] {
        self.table.universe().atoms()
    }

    /// `Int(D[P,B,D])` for a diagnosis of this DPI's debugging program.
    pub fn interpretations(&self, d: &Diagnosis) -> Result<Vec<Interpretation>, DiagnosisError> {
        let bits = self.table.universe().encode(&d.errors)?;
        Ok(self.table.interpretations_of(&bits).collect())
    }

    fn checker(&self) -> Checker<'_> {
        Checker::new(self)
    }

    pub fn verify(&self, d: &Diagnosis) -> Result<bool, DiagnosisError> {
        let bits = self.table.universe().encode(&d.errors)?;
        Ok(self.checker().verify(&bits))
    }

    /// Whether any diagnosis can exist: some explained interpretation
    /// satisfies every positive case, and each negative case is satisfiable
    /// together with the positive ones.
    pub fn feasible(&self) -> bool {
        let checker = self.checker();
        let mut covered = FixedBitSet::with_capacity(checker.negatives);
        let mut any = false;
        for (k, _) in self.table.entries().iter().enumerate() {
            if checker.p_ok[k] {
                any = true;
                covered.union_with(&checker.n_sat[k]);
            }
        }
        any && covered.count_ones(..) == checker.negatives
    }

    /// Cardinality-minimal diagnoses in canonical order.
    ///
    /// Candidates are enumerated level by level in lexicographic order over
    /// the canonical error-atom order, restricted to atoms that occur in
    /// some explanation. The search stops at the first level with a hit.
    pub fn compute_diagnoses(&self, options: &DiagnosisOptions) -> DiagnosisReport {
        let checker = self.checker();
        let relevant: Vec<usize> = self.table.relevant().ones().collect();
        let universe = self.table.universe();
        let limit = options.max_diagnoses;

        for k in 1..=options.max_cardinality.min(relevant.len()) {
            let mut found = Vec::new();
            let mut bits = FixedBitSet::with_capacity(universe.len());
            for combo in relevant.iter().copied().combinations(k) {
                bits.clear();
                combo.iter().for_each(|&i| bits.insert(i));
                if checker.verify(&bits) {
                    found.push(Diagnosis {
                        errors: universe.decode(&bits),
                    });
                    if found.len() > limit {
                        break;
                    }
                }
            }
            if !found.is_empty() {
                let status = if found.len() > limit {
                    found.truncate(limit);
                    SearchStatus::Truncated
                } else {
                    SearchStatus::Complete
                };
                return DiagnosisReport {
                    diagnoses: found,
                    status,
                    cardinality: Some(k),
                };
            }
        }
        let status = if options.max_cardinality >= relevant.len() {
            SearchStatus::NoDiagnosis
        } else {
            SearchStatus::CardinalityCapReached
        };
        DiagnosisReport {
            diagnoses: Vec::new(),
            status,
            cardinality: None,
        }
    }
}

/// Per-entry test-case verdicts, computed once per DPI.
struct Checker<'a> {
    table: &'a ExplanationTable,
    p_ok: Vec<bool>,
    n_sat: Vec<FixedBitSet>,
    negatives: usize,
}

impl<'a> Checker<'a> {
    fn new(dpi: &'a Dpi) -> Checker<'a> {
        let negatives: Vec<&SignedAtomSet> = dpi.negative.iter().collect();
        let entries = dpi.table.entries();
        let p_ok = entries
            .iter()
            .map(|e| dpi.positive.iter().all(|p| p.satisfied_by(e.interpretation)))
            .collect();
        let n_sat = entries
            .iter()
            .map(|e| {
                let mut s = FixedBitSet::with_capacity(negatives.len());
                for (j, n) in negatives.iter().enumerate() {
                    s.set(j, n.satisfied_by(e.interpretation));
                }
                s
            })
            .collect();
        Checker {
            table: &dpi.table,
            p_ok,
            n_sat,
            negatives: negatives.len(),
        }
    }

    fn verify(&self, d: &FixedBitSet) -> bool {
        let mut covered = FixedBitSet::with_capacity(self.negatives);
        let mut any = false;
        for (k, e) in self.table.entries().iter().enumerate() {
            if e.explained_by(d) {
                if !self.p_ok[k] {
                    return false;
                }
                any = true;
                covered.union_with(&self.n_sat[k]);
            }
        }
        any && covered.count_ones(..) == self.negatives
    }
}

pub fn verify_diagnosis(dpi: &Dpi, d: &Diagnosis) -> Result<bool, DiagnosisError> {
    dpi.verify(d)
}

pub fn feasible(dpi: &Dpi) -> bool {
    dpi.feasible()
}

/// Up to `n` cardinality-minimal diagnoses with the default cardinality cap.
pub fn compute_diagnoses(dpi: &Dpi, n: usize) -> DiagnosisReport {
    dpi.compute_diagnoses(&DiagnosisOptions {
        max_diagnoses: n,
        ..DiagnosisOptions::default()
    })
}
