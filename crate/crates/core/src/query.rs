//! Queries that discriminate between diagnoses, answer application and
//! query-selection strategies.
//!
//! A query is a set of atoms the oracle is asked to confirm as true in the
//! intended answer set. Each candidate query splits the current diagnoses into
//! those predicting it (`dx`), those predicting its negation (`dnx`), and
//! those making no prediction (`dz`).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnosis::{Diagnosis, DiagnosisError, Dpi, SignedAtomSet};
use crate::explain::ErrorAtom;
use crate::program::{AtomSet, GroundProgram};

/// Likelihood of either answer for a diagnosis that predicts neither.
pub const INDIFFERENT_LIKELIHOOD: f64 = 0.5;
/// Fault probability for error atoms missing from a priors file.
pub const DEFAULT_FAULT_PROB: f64 = 0.01;
/// Subset enumeration is exponential; refuse beyond this many diagnoses.
pub const MAX_PARTITION_INPUT: usize = 20;

const SCORE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error(transparent)]
    Diagnosis(#[from] DiagnosisError),
    #[error("no diagnoses given")]
    NoDiagnoses,
    #[error("no partitions to select from")]
    NoPartitions,
    #[error("too many diagnoses for partition search: {0} (max {MAX_PARTITION_INPUT})")]
    TooManyDiagnoses(usize),
    #[error("query must contain at least one atom")]
    EmptyQuery,
    #[error("the answer contradicts every remaining diagnosis")]
    Inconsistent,
    #[error("fault probability for `{0}` must lie strictly between 0 and 1, got {1}")]
    InvalidProbability(String, f64),
    #[error("invalid priors file: {0}")]
    PriorsFormat(String),
}

/// A non-empty set of ground atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Query {
    atoms: AtomSet,
}

impl Query {
    pub fn new(atoms: AtomSet) -> Result<Query, QueryError> {
        if atoms.is_empty() {
            return Err(QueryError::EmptyQuery);
        }
        Ok(Query { atoms })
    }

    pub fn atoms(&self) -> AtomSet {
        self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn names(&self, gp: &GroundProgram) -> Vec<String> {
        gp.names(self.atoms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Class {
    /// Every interpretation makes all query atoms true.
    X,
    /// Every interpretation makes all query atoms false.
    NotX,
    /// Neither.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub query: Query,
    pub dx: Vec<Diagnosis>,
    pub dnx: Vec<Diagnosis>,
    pub dz: Vec<Diagnosis>,
}

impl Partition {
    pub fn diagnoses(&self) -> impl Iterator<Item = &Diagnosis> {
        self.dx.iter().chain(&self.dnx).chain(&self.dz)
    }
}

pub type PriorMap = BTreeMap<Diagnosis, f64>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    Split,
    Entropy,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "split" => Ok(Strategy::Split),
            "entropy" => Ok(Strategy::Entropy),
            _ => Err(format!("unknown strategy `{s}`; expected split or entropy")),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Split => "split",
            Strategy::Entropy => "entropy",
        })
    }
}

/// Oracle answers. `Yes`/`No` are the binary mode; the other four name the
/// reasoning task the oracle evaluated the query under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
    CautiouslyTrue,
    CautiouslyFalse,
    BravelyTrue,
    BravelyFalse,
}

impl Answer {
    pub const ALL: [Answer; 6] = [
        Answer::Yes,
        Answer::No,
        Answer::CautiouslyTrue,
        Answer::CautiouslyFalse,
        Answer::BravelyTrue,
        Answer::BravelyFalse,
    ];

    /// Whether this answer counts as evidence for the query atoms being true.
    pub fn affirms(self) -> bool {
        matches!(self, Answer::Yes | Answer::CautiouslyTrue | Answer::BravelyTrue)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::CautiouslyTrue => "cautiously_true",
            Answer::CautiouslyFalse => "cautiously_false",
            Answer::BravelyTrue => "bravely_true",
            Answer::BravelyFalse => "bravely_false",
        }
    }
}

impl FromStr for Answer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "y" => return Ok(Answer::Yes),
            "n" => return Ok(Answer::No),
            _ => {}
        }
        Answer::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown answer `{s}`"))
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Atoms true, resp. false, in every interpretation of one diagnosis.
#[derive(Debug, Clone, Copy)]
struct Profile {
    always_true: AtomSet,
    always_false: AtomSet,
}

impl Profile {
    fn of(dpi: &Dpi, d: &Diagnosis) -> Result<Profile, QueryError> {
        let universe = dpi.program().atom_universe();
        let mut p = Profile {
            always_true: universe,
            always_false: universe,
        };
        for i in dpi.interpretations(d)? {
            p.always_true = p.always_true.intersection(i);
            p.always_false = p.always_false.difference(i);
        }
        Ok(p)
    }

    fn classify(&self, q: AtomSet) -> Class {
        if q.is_subset(self.always_true) {
            Class::X
        } else if q.is_subset(self.always_false) {
            Class::NotX
        } else {
            Class::Zero
        }
    }
}

/// Signed atoms shared by every interpretation of every diagnosis in `ds`.
pub fn common_atoms(dpi: &Dpi, ds: &[Diagnosis]) -> Result<SignedAtomSet, QueryError> {
    if ds.is_empty() {
        return Err(QueryError::NoDiagnoses);
    }
    let universe = dpi.program().atom_universe();
    let (mut pos, mut neg) = (universe, universe);
    for d in ds {
        let p = Profile::of(dpi, d)?;
        pos = pos.intersection(p.always_true);
        neg = neg.intersection(p.always_false);
    }
    Ok(SignedAtomSet::new(pos, neg)?)
}

pub fn classify(dpi: &Dpi, d: &Diagnosis, q: &Query) -> Result<Class, QueryError> {
    Ok(Profile::of(dpi, d)?.classify(q.atoms))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSearch {
    pub partitions: Vec<Partition>,
    /// Non-empty seed subsets examined (`2^n - 1`).
    pub seeds_examined: u64,
}

/// Candidate queries for every non-empty subset of `ds`.
///
/// For a seed `S`, the first candidate is the set of atoms true in every
/// interpretation of `S`. That set alone often cannot separate nested
/// interpretation chains (all atoms a seed agrees on are also shared by the
/// seeds above it), so a second candidate keeps only those atoms which are
/// additionally false in every interpretation outside `S`. Each candidate is
/// classified against all of `ds`; it is kept when both `dx` and `dnx` are
/// non-empty. Results are deduplicated by query, first seed (in increasing
/// subset-bitmask order) winning.
pub fn find_partitions(dpi: &Dpi, ds: &[Diagnosis]) -> Result<PartitionSearch, QueryError> {
    let profiles = profiles(dpi, ds)?;
    let universe = dpi.program().atom_universe();
    let mut seen = std::collections::HashSet::new();
    let mut partitions = Vec::new();
    let mut seeds_examined = 0u64;

    for seed in 1u64..(1u64 << ds.len()) {
        seeds_examined += 1;
        for q in seed_queries(&profiles, universe, seed) {
            if !seen.insert(q) {
                continue;
            }
            partitions.extend(partition_of(ds, &profiles, q));
        }
    }
    Ok(PartitionSearch {
        partitions,
        seeds_examined,
    })
}

/// Partitions contributed by one seed, given as indices into `ds`.
pub fn seed_partitions(dpi: &Dpi, ds: &[Diagnosis], seed: &[usize]) -> Result<Vec<Partition>, QueryError> {
    let profiles = profiles(dpi, ds)?;
    let mask = seed.iter().fold(0u64, |m, &k| m | 1 << k);
    Ok(seed_queries(&profiles, dpi.program().atom_universe(), mask)
        .into_iter()
        .filter_map(|q| partition_of(ds, &profiles, q))
        .collect())
}

fn profiles(dpi: &Dpi, ds: &[Diagnosis]) -> Result<Vec<Profile>, QueryError> {
    if ds.len() > MAX_PARTITION_INPUT {
        return Err(QueryError::TooManyDiagnoses(ds.len()));
    }
    ds.iter().map(|d| Profile::of(dpi, d)).collect()
}

fn seed_queries(profiles: &[Profile], universe: AtomSet, seed: u64) -> Vec<AtomSet> {
    let (mut inside, mut outside_false) = (universe, universe);
    for (k, p) in profiles.iter().enumerate() {
        if seed >> k & 1 == 1 {
            inside = inside.intersection(p.always_true);
        } else {
            outside_false = outside_false.intersection(p.always_false);
        }
    }
    let refined = inside.intersection(outside_false);
    let mut out = Vec::with_capacity(2);
    for q in [inside, refined] {
        if !q.is_empty() && !out.contains(&q) {
            out.push(q);
        }
    }
    out
}

fn partition_of(ds: &[Diagnosis], profiles: &[Profile], q: AtomSet) -> Option<Partition> {
    let mut part = Partition {
        query: Query { atoms: q },
        dx: Vec::new(),
        dnx: Vec::new(),
        dz: Vec::new(),
    };
    for (d, p) in ds.iter().zip(profiles) {
        match p.classify(q) {
            Class::X => part.dx.push(d.clone()),
            Class::NotX => part.dnx.push(d.clone()),
            Class::Zero => part.dz.push(d.clone()),
        }
    }
    (!part.dx.is_empty() && !part.dnx.is_empty()).then_some(part)
}

/// Adds the test case implied by `answer` to the DPI.
///
/// `yes`/`cautiously_true` require the query atoms in every interpretation;
/// `no`/`cautiously_false` require one interpretation with all of them false;
/// `bravely_true` requires one interpretation with all of them true;
/// `bravely_false` forbids any of them in every interpretation.
pub fn apply_answer(dpi: &Dpi, q: &Query, answer: Answer) -> Dpi {
    let atoms = q.atoms;
    match answer {
        Answer::Yes | Answer::CautiouslyTrue => dpi.add_positive(SignedAtomSet::positive_only(atoms)),
        Answer::No | Answer::CautiouslyFalse => dpi.add_negative(SignedAtomSet::negative_only(atoms)),
        Answer::BravelyTrue => dpi.add_negative(SignedAtomSet::positive_only(atoms)),
        Answer::BravelyFalse => dpi.add_positive(SignedAtomSet::negative_only(atoms)),
    }
}

pub fn score_split(p: &Partition) -> f64 {
    (p.dx.len().abs_diff(p.dnx.len()) + p.dz.len()) as f64
}

fn mass<'a>(ds: impl IntoIterator<Item = &'a Diagnosis>, pr: &PriorMap) -> f64 {
    ds.into_iter().map(|d| pr.get(d).copied().unwrap_or(0.0)).sum()
}

/// `(p_yes, p_no)`; a non-predicting diagnosis contributes half its mass to each.
pub fn query_probability(p: &Partition, pr: &PriorMap) -> (f64, f64) {
    let yes = mass(&p.dx, pr) + INDIFFERENT_LIKELIHOOD * mass(&p.dz, pr);
    (yes, 1.0 - yes)
}

fn plog2p(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

/// Lower is better; 0 for an evenly split query with no indifferent diagnoses.
pub fn score_entropy(p: &Partition, pr: &PriorMap) -> f64 {
    let (yes, no) = query_probability(p, pr);
    plog2p(yes) + plog2p(no) + mass(&p.dz, pr) + 1.0
}

pub fn score(p: &Partition, strategy: Strategy, pr: &PriorMap) -> f64 {
    match strategy {
        Strategy::Split => score_split(p),
        Strategy::Entropy => score_entropy(p, pr),
    }
}

fn tie_key(p: &Partition) -> (usize, Vec<usize>) {
    (p.query.len(), p.query.atoms.iter().collect())
}

/// The best-scoring partition; ties go to the smaller query, then to the
/// lexicographically smaller atom list (atoms are indexed in name order).
pub fn select_query<'a>(
    ps: &'a [Partition],
    strategy: Strategy,
    pr: &PriorMap,
) -> Result<&'a Partition, QueryError> {
    let mut best: Option<(&Partition, f64)> = None;
    for p in ps {
        let s = score(p, strategy, pr);
        best = match best {
            None => Some((p, s)),
            Some((b, bs)) => {
                let better = s < bs - SCORE_EPS
                    || ((s - bs).abs() <= SCORE_EPS && tie_key(p) < tie_key(b));
                Some(if better { (p, s) } else { (b, bs) })
            }
        };
    }
    best.map(|(p, _)| p).ok_or(QueryError::NoPartitions)
}

/// Probability of `answer` given a diagnosis of the given class.
pub fn likelihood(class: Class, answer: Answer) -> f64 {
    match (class, answer.affirms()) {
        (Class::Zero, _) => INDIFFERENT_LIKELIHOOD,
        (Class::X, true) | (Class::NotX, false) => 1.0,
        _ => 0.0,
    }
}

/// Posterior over the partition's diagnoses after `answer`.
pub fn bayes_update(pr: &PriorMap, p: &Partition, answer: Answer) -> Result<PriorMap, QueryError> {
    let classes = [(Class::X, &p.dx), (Class::NotX, &p.dnx), (Class::Zero, &p.dz)];
    let mut post = PriorMap::new();
    for (class, ds) in classes {
        for d in ds {
            let prior = pr.get(d).copied().unwrap_or(0.0);
            post.insert(d.clone(), prior * likelihood(class, answer));
        }
    }
    normalize(post)
}

/// Rescales to sum 1; fails when all mass is zero.
pub fn normalize(mut pr: PriorMap) -> Result<PriorMap, QueryError> {
    let total: f64 = pr.values().sum();
    if total.is_nan() || total <= 0.0 || !total.is_finite() {
        return Err(QueryError::Inconsistent);
    }
    pr.values_mut().for_each(|v| *v /= total);
    Ok(pr)
}

/// Per-error-atom fault probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultProbs {
    #[serde(rename = "fault_probs", with = "keyed")]
    pub probs: BTreeMap<ErrorAtom, f64>,
    #[serde(default = "default_fault_prob")]
    pub default: f64,
}

fn default_fault_prob() -> f64 {
    DEFAULT_FAULT_PROB
}

mod keyed {
    use super::*;
    use serde::{de::Error as _, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<ErrorAtom, f64>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(m.iter().map(|(e, p)| (e.key(), p)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<ErrorAtom, f64>, D::Error> {
        let raw = BTreeMap::<String, f64>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, p)| Ok((k.parse::<ErrorAtom>().map_err(D::Error::custom)?, p)))
            .collect()
    }
}

impl Default for FaultProbs {
    fn default() -> Self {
        FaultProbs {
            probs: BTreeMap::new(),
            default: DEFAULT_FAULT_PROB,
        }
    }
}

impl FaultProbs {
    pub fn uniform(p: f64) -> Result<FaultProbs, QueryError> {
        let f = FaultProbs {
            probs: BTreeMap::new(),
            default: p,
        };
        f.validate()?;
        Ok(f)
    }

    /// Parses a priors file: `{"fault_probs": {"kind:target": p}, "default": p}`.
    pub fn from_json(text: &str) -> Result<FaultProbs, QueryError> {
        let f: FaultProbs =
            serde_json::from_str(text).map_err(|e| QueryError::PriorsFormat(e.to_string()))?;
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        let bad = |p: f64| !(p > 0.0 && p < 1.0);
        if bad(self.default) {
            return Err(QueryError::InvalidProbability("default".into(), self.default));
        }
        match self.probs.iter().find(|(_, &p)| bad(p)) {
            Some((e, &p)) => Err(QueryError::InvalidProbability(e.key(), p)),
            None => Ok(()),
        }
    }

    pub fn prob(&self, e: &ErrorAtom) -> f64 {
        self.probs.get(e).copied().unwrap_or(self.default)
    }
}

/// Unnormalized prior: faulty atoms in `d`, every other universe atom sound.
pub fn diagnosis_prior(
    fault_probs: &FaultProbs,
    d: &Diagnosis,
    universe: &[ErrorAtom],
) -> Result<f64, QueryError> {
    fault_probs.validate()?;
    Ok(universe
        .iter()
        .map(|e| {
            let p = fault_probs.prob(e);
            if d.errors.contains(e) {
                p
            } else {
                1.0 - p
            }
        })
        .product())
}

/// Normalized priors over `ds`; uniform without fault probabilities.
pub fn initial_priors(
    ds: &[Diagnosis],
    fault_probs: Option<&FaultProbs>,
    universe: &[ErrorAtom],
) -> Result<PriorMap, QueryError> {
    let mut pr = PriorMap::new();
    for d in ds {
        let w = match fault_probs {
            Some(f) => diagnosis_prior(f, d, universe)?,
            None => 1.0,
        };
        pr.insert(d.clone(), w);
    }
    normalize(pr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnosis::compute_diagnoses;
    use crate::program::GroundConfig;

    const P_E: &str = "a :- not d.\nb :- a.\nc :- b.\nd :- c.\n#background.\n:- d.\n";

    fn dpi() -> Dpi {
        Dpi::new(GroundProgram::from_source(P_E, &GroundConfig::default()).unwrap()).unwrap()
    }

    fn set(d: &Dpi, names: &str) -> AtomSet {
        d.program().atom_set(names.split(',')).unwrap()
    }

    fn q(d: &Dpi, names: &str) -> Query {
        Query::new(set(d, names)).unwrap()
    }

    fn diag(k: usize) -> Diagnosis {
        Diagnosis::new([ErrorAtom::unsatisfied(format!("r{k}"))])
    }

    fn ds(ks: &[usize]) -> Vec<Diagnosis> {
        ks.iter().map(|&k| diag(k)).collect()
    }

    fn part(d: &Dpi, query: &str, dx: &[usize], dnx: &[usize], dz: &[usize]) -> Partition {
        Partition {
            query: q(d, query),
            dx: ds(dx),
            dnx: ds(dnx),
            dz: ds(dz),
        }
    }

    fn uniform(n: usize) -> PriorMap {
        (1..=n).map(|k| (diag(k), 1.0 / n as f64)).collect()
    }

    #[test]
    fn common_atoms_examples() {
        let d = dpi();
        let c = common_atoms(&d, &ds(&[2, 3])).unwrap();
        assert_eq!((c.positive(), c.negative()), (set(&d, "a"), set(&d, "c,d")));
        let c = common_atoms(&d, &ds(&[1, 2])).unwrap();
        assert_eq!((c.positive(), c.negative()), (AtomSet::EMPTY, set(&d, "b,c,d")));
        let c = common_atoms(&d, &ds(&[4])).unwrap();
        assert_eq!((c.positive(), c.negative()), (set(&d, "a,b,c"), set(&d, "d")));
        assert_eq!(common_atoms(&d, &[]), Err(QueryError::NoDiagnoses));
    }

    #[test]
    fn classify_examples() {
        let d = dpi();
        assert_eq!(classify(&d, &diag(1), &q(&d, "a")).unwrap(), Class::NotX);
        assert_eq!(classify(&d, &diag(4), &q(&d, "a")).unwrap(), Class::X);
        assert_eq!(classify(&d, &diag(2), &q(&d, "a,b")).unwrap(), Class::Zero);
        assert_eq!(Query::new(AtomSet::EMPTY), Err(QueryError::EmptyQuery));
    }

    #[test]
    fn partitions_of_running_example() {
        let d = dpi();
        let search = find_partitions(&d, &ds(&[1, 2, 3, 4])).unwrap();
        assert_eq!(search.seeds_examined, 15);
        let ps = &search.partitions;
        assert!(ps.contains(&part(&d, "a", &[2, 3, 4], &[1], &[])));
        assert!(ps.contains(&part(&d, "b", &[3, 4], &[1, 2], &[])));
        assert!(ps.contains(&part(&d, "a,b", &[3, 4], &[1], &[2])));
        // D1 and D2 share no true atom
        assert!(seed_partitions(&d, &ds(&[1, 2, 3, 4]), &[0, 1]).unwrap().is_empty());
        assert_eq!(
            seed_partitions(&d, &ds(&[1, 2, 3, 4]), &[2, 3]).unwrap(),
            [part(&d, "a,b", &[3, 4], &[1], &[2]), part(&d, "b", &[3, 4], &[1, 2], &[])]
        );
        let queries: std::collections::HashSet<_> = ps.iter().map(|p| p.query).collect();
        assert_eq!(queries.len(), ps.len());
        for p in ps {
            assert!(!p.dx.is_empty() && !p.dnx.is_empty());
            assert_eq!(p.diagnoses().count(), 4);
        }
    }

    #[test]
    fn apply_answer_examples() {
        let d = dpi();
        let after = |query: &str, a| compute_diagnoses(&apply_answer(&d, &q(&d, query), a), 9).diagnoses;
        assert_eq!(after("c", Answer::Yes), ds(&[4]));
        assert_eq!(after("b", Answer::No), ds(&[1, 2]));
        assert_eq!(after("b", Answer::Yes), ds(&[3, 4]));
        assert_eq!(after("c", Answer::CautiouslyTrue), ds(&[4]));
        assert!(!after("c", Answer::BravelyFalse).contains(&diag(4)));

        let bf = apply_answer(&d, &q(&d, "c"), Answer::BravelyFalse);
        assert!(bf.positive().contains(&SignedAtomSet::negative_only(set(&d, "c"))));
        let bt = apply_answer(&d, &q(&d, "a"), Answer::BravelyTrue);
        assert!(bt.negative().contains(&SignedAtomSet::positive_only(set(&d, "a"))));
        assert_eq!(bt.program(), d.program());
    }

    #[test]
    fn split_scores() {
        let d = dpi();
        assert_eq!(score_split(&part(&d, "b", &[3, 4], &[1, 2], &[])), 0.0);
        assert_eq!(score_split(&part(&d, "a", &[2, 3, 4], &[1], &[])), 2.0);
        assert_eq!(score_split(&part(&d, "a,b", &[3, 4], &[1], &[2])), 2.0);
    }

    #[test]
    fn probabilities_and_entropy() {
        let d = dpi();
        let pr = uniform(4);
        let pb = part(&d, "b", &[3, 4], &[1, 2], &[]);
        let pa = part(&d, "a", &[2, 3, 4], &[1], &[]);
        assert_eq!(query_probability(&pb, &pr), (0.5, 0.5));
        assert_eq!(query_probability(&pa, &pr), (0.75, 0.25));
        assert!(score_entropy(&pb, &pr).abs() < 1e-12);
        assert!((score_entropy(&pa, &pr) - 0.18872).abs() < 1e-5);
        let point: PriorMap = [(diag(3), 1.0)].into();
        assert_eq!(query_probability(&pb, &point), (1.0, 0.0));
        assert_eq!(score_entropy(&pb, &point), 1.0);
    }

    #[test]
    fn selection() {
        let d = dpi();
        let ps = find_partitions(&d, &ds(&[1, 2, 3, 4])).unwrap().partitions;
        let pr = uniform(4);
        assert_eq!(select_query(&ps, Strategy::Split, &pr).unwrap().query, q(&d, "b"));
        assert_eq!(select_query(&ps, Strategy::Entropy, &pr).unwrap().query, q(&d, "b"));
        let single = [part(&d, "a", &[2, 3, 4], &[1], &[])];
        assert_eq!(select_query(&single, Strategy::Split, &pr).unwrap(), &single[0]);
        assert_eq!(select_query(&[], Strategy::Split, &pr), Err(QueryError::NoPartitions));
    }

    #[test]
    fn bayes_examples() {
        let d = dpi();
        let pb = part(&d, "b", &[3, 4], &[1, 2], &[]);
        let post = bayes_update(&uniform(4), &pb, Answer::Yes).unwrap();
        assert_eq!(post[&diag(3)], 0.5);
        assert_eq!(post[&diag(4)], 0.5);
        assert_eq!(post[&diag(1)], 0.0);
        assert_eq!(post[&diag(2)], 0.0);

        let skewed: PriorMap = [(diag(1), 0.7), (diag(2), 0.1), (diag(3), 0.1), (diag(4), 0.1)].into();
        let post = bayes_update(&skewed, &pb, Answer::No).unwrap();
        assert!((post[&diag(1)] - 0.875).abs() < 1e-12);
        assert!((post[&diag(2)] - 0.125).abs() < 1e-12);
        assert_eq!(post[&diag(3)] + post[&diag(4)], 0.0);

        let only_yes: PriorMap = [(diag(3), 1.0)].into();
        assert_eq!(bayes_update(&only_yes, &pb, Answer::No), Err(QueryError::Inconsistent));
    }

    #[test]
    fn priors_from_fault_probabilities() {
        let d = dpi();
        let universe = d.error_universe();
        assert_eq!(universe.len(), 12);
        let f = FaultProbs::uniform(0.1).unwrap();
        let p = diagnosis_prior(&f, &diag(2), universe).unwrap();
        assert!((p - 0.1 * 0.9f64.powi(11)).abs() < 1e-15);
        assert!(FaultProbs::uniform(1.0).is_err());
        let pr = initial_priors(&ds(&[1, 2]), Some(&f), universe).unwrap();
        assert!((pr[&diag(1)] - 0.5).abs() < 1e-12);
        assert!((pr[&diag(2)] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn priors_file_format() {
        let f = FaultProbs::from_json(r#"{"fault_probs": {"unsatisfied:r2": 0.1, "unsupported:a": 0.05}}"#)
            .unwrap();
        assert_eq!(f.prob(&ErrorAtom::unsatisfied("r2")), 0.1);
        assert_eq!(f.prob(&ErrorAtom::unsupported("a")), 0.05);
        assert_eq!(f.prob(&ErrorAtom::unsatisfied("r1")), DEFAULT_FAULT_PROB);
        assert!(FaultProbs::from_json(r#"{"fault_probs": {"bogus:r2": 0.1}}"#).is_err());
        assert!(matches!(
            FaultProbs::from_json(r#"{"fault_probs": {"unsatisfied:r2": 1.5}}"#),
            Err(QueryError::InvalidProbability(..))
        ));
        let back = FaultProbs::from_json(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn answer_names() {
        for a in Answer::ALL {
            assert_eq!(a.as_str().parse::<Answer>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{a}\""));
        }
        assert!("maybe".parse::<Answer>().is_err());
    }
}
