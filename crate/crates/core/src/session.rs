//! The interactive debugging loop.
//!
//! A session owns a DPI and repeatedly computes minimal diagnoses, picks the
//! best discriminating query and folds the oracle's answer back into the
//! DPI as a new test case, until one diagnosis is left. Sessions are
//! immutable values: every answer produces a new session.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnosis::{
    Diagnosis, DiagnosisError, DiagnosisOptions, Dpi, SearchStatus, TestCaseJson,
    DEFAULT_MAX_CARDINALITY, DEFAULT_MAX_DIAGNOSES,
};
use crate::program::{GroundConfig, GroundProgram, Interpretation, ProgramError, DEFAULT_ATOM_CAP};
use crate::query::{
    apply_answer, classify, find_partitions, initial_priors, likelihood, normalize, select_query,
    Answer, FaultProbs, Partition, PriorMap, Query, QueryError, Strategy, MAX_PARTITION_INPUT,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Diagnosis(#[from] DiagnosisError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(
        "no diagnosis exists: no explained interpretation meets every positive test case \
         together with each negative one"
    )]
    Infeasible,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no pending query; the session is {0:?}")]
    NoPendingQuery(Status),
    #[error("the answers given are inconsistent: no diagnosis agrees with all of them")]
    OracleInconsistent { history: Vec<HistoryEntry> },
    #[error("unsupported session format version {found} (expected {FORMAT_VERSION})")]
    Version { found: u64 },
    #[error("malformed session data: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Diagnoses considered for query generation.
    pub n: usize,
    pub k_max: usize,
    pub strategy: Strategy,
    pub atom_cap: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            n: DEFAULT_MAX_DIAGNOSES,
            k_max: DEFAULT_MAX_CARDINALITY,
            strategy: Strategy::Split,
            atom_cap: DEFAULT_ATOM_CAP,
        }
    }
}

impl SessionConfig {
    fn validate(&self) -> Result<(), SessionError> {
        if self.n == 0 || self.n > MAX_PARTITION_INPUT {
            return Err(SessionError::Config(format!(
                "n must be between 1 and {MAX_PARTITION_INPUT}"
            )));
        }
        if self.k_max == 0 {
            return Err(SessionError::Config("k_max must be positive".into()));
        }
        Ok(())
    }

    fn diagnosis_options(&self) -> DiagnosisOptions {
        DiagnosisOptions {
            max_diagnoses: self.n,
            max_cardinality: self.k_max,
        }
    }
}

/// Optional extras for starting a session.
#[derive(Debug, Clone, Default)]
pub struct StartOptions {
    pub fault_probs: Option<FaultProbs>,
    pub positive: Vec<TestCaseJson>,
    pub negative: Vec<TestCaseJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    AwaitingAnswer,
    /// At most one diagnosis left.
    Done,
    /// Several diagnoses remain but no query separates them.
    Undiscriminable,
    /// No diagnosis within the cardinality cap.
    NoDiagnoses,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub query: Query,
    pub answer: Answer,
    pub timestamp_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    id: String,
    config: SessionConfig,
    fault_probs: Option<FaultProbs>,
    initial: Dpi,
    dpi: Dpi,
    live: Vec<Diagnosis>,
    search_status: SearchStatus,
    #[serde(with = "prior_pairs")]
    priors: PriorMap,
    pending: Option<Partition>,
    history: Vec<HistoryEntry>,
    status: Status,
}

mod prior_pairs {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(pr: &PriorMap, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(pr.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<PriorMap, D::Error> {
        Ok(Vec::<(Diagnosis, f64)>::deserialize(d)?.into_iter().collect())
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl Session {
    pub fn start(source: &str, config: SessionConfig) -> Result<Session, SessionError> {
        Session::start_with(source, config, StartOptions::default())
    }

    pub fn start_with(
        source: &str,
        config: SessionConfig,
        options: StartOptions,
    ) -> Result<Session, SessionError> {
        config.validate()?;
        if let Some(f) = &options.fault_probs {
            f.validate()?;
        }
        let gp = GroundProgram::from_source(
            source,
            &GroundConfig {
                atom_cap: config.atom_cap,
            },
        )?;
        let resolve = |ts: &[TestCaseJson]| {
            ts.iter()
                .map(|t| t.resolve(&gp))
                .collect::<Result<_, _>>()
        };
        let positive = resolve(&options.positive)?;
        let negative = resolve(&options.negative)?;
        let dpi = Dpi::new(gp.clone())?.with_tests(positive, negative)?;
        if !dpi.feasible() {
            return Err(SessionError::Infeasible);
        }
        Session::from_dpi(
            uuid::Uuid::new_v4().to_string(),
            dpi,
            config,
            options.fault_probs,
        )
    }

    /// A fresh session over an already built DPI.
    pub fn from_dpi(
        id: String,
        dpi: Dpi,
        config: SessionConfig,
        fault_probs: Option<FaultProbs>,
    ) -> Result<Session, SessionError> {
        config.validate()?;
        let mut s = Session {
            id,
            config,
            fault_probs,
            initial: dpi.clone(),
            dpi,
            live: Vec::new(),
            search_status: SearchStatus::Complete,
            priors: PriorMap::new(),
            pending: None,
            history: Vec::new(),
            status: Status::Done,
        };
        s.refresh()?;
        Ok(s)
    }

    fn refresh(&mut self) -> Result<(), SessionError> {
        let report = self.dpi.compute_diagnoses(&self.config.diagnosis_options());
        self.live = report.diagnoses;
        self.search_status = report.status;
        self.priors = self.posterior()?;
        self.pending = None;
        self.status = match self.live.len() {
            0 => Status::NoDiagnoses,
            1 => Status::Done,
            _ => {
                let partitions = find_partitions(&self.dpi, &self.live)?.partitions;
                match select_query(&partitions, self.config.strategy, &self.priors) {
                    Ok(p) => {
                        self.pending = Some(p.clone());
                        Status::AwaitingAnswer
                    }
                    Err(_) => Status::Undiscriminable,
                }
            }
        };
        Ok(())
    }

    /// Prior of every live diagnosis, updated by each recorded answer and
    /// renormalized. Diagnoses that only surface after earlier ones are
    /// eliminated get the same treatment, so they are scored consistently.
    fn posterior(&self) -> Result<PriorMap, SessionError> {
        if self.live.is_empty() {
            return Ok(PriorMap::new());
        }
        let mut pr = initial_priors(&self.live, self.fault_probs.as_ref(), self.dpi.error_universe())?;
        for d in &self.live {
            let mut w = pr[d];
            for h in &self.history {
                w *= likelihood(classify(&self.dpi, d, &h.query)?, h.answer);
            }
            pr.insert(d.clone(), w);
        }
        normalize(pr).map_err(|_| SessionError::OracleInconsistent {
            history: self.history.clone(),
        })
    }

    pub fn submit_answer(&self, answer: Answer) -> Result<Session, SessionError> {
        self.submit_answer_at(answer, now_ms())
    }

    /// Like [`Session::submit_answer`] with an explicit timestamp.
    pub fn submit_answer_at(&self, answer: Answer, timestamp_ms: u64) -> Result<Session, SessionError> {
        let pending = self
            .pending
            .as_ref()
            .ok_or(SessionError::NoPendingQuery(self.status))?;
        self.answer_query(pending.query, answer, timestamp_ms)
    }

    fn answer_query(&self, query: Query, answer: Answer, timestamp_ms: u64) -> Result<Session, SessionError> {
        let mut history = self.history.clone();
        history.push(HistoryEntry {
            query,
            answer,
            timestamp_ms,
        });
        let dpi = apply_answer(&self.dpi, &query, answer);
        if !dpi.feasible() {
            return Err(SessionError::OracleInconsistent { history });
        }
        let mut next = Session {
            dpi,
            history,
            ..self.clone()
        };
        next.refresh()?;
        Ok(next)
    }

    /// Rebuilds the session from its initial DPI by re-applying the history.
    pub fn replay(&self) -> Result<Session, SessionError> {
        let mut s = Session::from_dpi(
            self.id.clone(),
            self.initial.clone(),
            self.config,
            self.fault_probs.clone(),
        )?;
        for h in &self.history {
            s = s.answer_query(h.query, h.answer, h.timestamp_ms)?;
        }
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn dpi(&self) -> &Dpi {
        &self.dpi
    }

    pub fn program(&self) -> &GroundProgram {
        self.dpi.program()
    }

    pub fn live_diagnoses(&self) -> &[Diagnosis] {
        &self.live
    }

    pub fn search_status(&self) -> SearchStatus {
        self.search_status
    }

    pub fn priors(&self) -> &PriorMap {
        &self.priors
    }

    pub fn pending(&self) -> Option<&Partition> {
        self.pending.as_ref()
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn status(&self) -> Status {
        self.status
    }

    /// The unique remaining diagnosis once the session is done.
    pub fn diagnosis(&self) -> Option<&Diagnosis> {
        match (self.status, self.live.as_slice()) {
            (Status::Done, [d]) => Some(d),
            _ => None,
        }
    }

    pub fn serialize(&self) -> String {
        serde_json::to_string(&Envelope {
            version: FORMAT_VERSION as u64,
            session: self,
        })
        .expect("session serializes")
    }

    pub fn deserialize(text: &str) -> Result<Session, SessionError> {
        let raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| SessionError::Format(e.to_string()))?;
        let found = raw
            .get("version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| SessionError::Format("missing version".into()))?;
        if found != FORMAT_VERSION as u64 {
            return Err(SessionError::Version { found });
        }
        let env: Envelope<Session> =
            serde_json::from_value(raw).map_err(|e| SessionError::Format(e.to_string()))?;
        Ok(env.session)
    }

    pub fn view(&self) -> SessionView {
        SessionView::of(self)
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope<S> {
    version: u64,
    session: S,
}

/// Answers queries on behalf of a user.
pub trait Oracle {
    fn answer(&mut self, program: &GroundProgram, query: &Query) -> Answer;
}

/// Answers `yes` exactly when every query atom is in a fixed target
/// interpretation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulatedOracle {
    pub target: Interpretation,
}

impl SimulatedOracle {
    pub fn new(target: Interpretation) -> SimulatedOracle {
        SimulatedOracle { target }
    }

    /// Resolves a comma-separated atom list against the program.
    pub fn parse(program: &GroundProgram, target: &str) -> Result<SimulatedOracle, SessionError> {
        let target = program
            .atom_set(target.split(','))
            .map_err(DiagnosisError::UnknownAtom)?;
        Ok(SimulatedOracle { target })
    }
}

impl Oracle for SimulatedOracle {
    fn answer(&mut self, _program: &GroundProgram, query: &Query) -> Answer {
        if query.atoms().is_subset(self.target) {
            Answer::Yes
        } else {
            Answer::No
        }
    }
}

impl<F: FnMut(&GroundProgram, &Query) -> Answer> Oracle for F {
    fn answer(&mut self, program: &GroundProgram, query: &Query) -> Answer {
        self(program, query)
    }
}

/// Answers pending queries until the session stops asking.
pub fn run_with_oracle(session: &Session, oracle: &mut dyn Oracle) -> Result<Session, SessionError> {
    let mut s = session.clone();
    while let Some(p) = s.pending() {
        let answer = oracle.answer(s.program(), &p.query);
        s = s.submit_answer(answer)?;
    }
    Ok(s)
}

/// JSON snapshot of a session for clients, with every identifier rendered
/// by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub status: Status,
    pub strategy: Strategy,
    pub search_status: SearchStatus,
    pub diagnoses: Vec<Diagnosis>,
    /// Keyed by diagnosis key; each interpretation is a list of true atoms.
    pub interpretations: BTreeMap<String, Vec<Vec<String>>>,
    pub query: Option<QueryView>,
    pub partition: Option<PartitionView>,
    pub probabilities: BTreeMap<String, f64>,
    pub history: Vec<HistoryView>,
    pub positive: Vec<TestCaseJson>,
    pub negative: Vec<TestCaseJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryView {
    pub atoms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionView {
    pub dx: Vec<String>,
    pub dnx: Vec<String>,
    pub dz: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryView {
    pub query: Vec<String>,
    pub answer: Answer,
    pub timestamp_ms: u64,
}

impl SessionView {
    fn of(s: &Session) -> SessionView {
        let gp = s.program();
        let keys = |ds: &[Diagnosis]| ds.iter().map(Diagnosis::key).collect();
        let interpretations = s
            .live
            .iter()
            .map(|d| {
                let is = s.dpi.interpretations(d).unwrap_or_default();
                (d.key(), is.into_iter().map(|i| gp.names(i)).collect())
            })
            .collect();
        SessionView {
            id: s.id.clone(),
            status: s.status,
            strategy: s.config.strategy,
            search_status: s.search_status,
            diagnoses: s.live.clone(),
            interpretations,
            query: s.pending.as_ref().map(|p| QueryView {
                atoms: p.query.names(gp),
            }),
            partition: s.pending.as_ref().map(|p| PartitionView {
                dx: keys(&p.dx),
                dnx: keys(&p.dnx),
                dz: keys(&p.dz),
            }),
            probabilities: s.priors.iter().map(|(d, p)| (d.key(), *p)).collect(),
            history: s
                .history
                .iter()
                .map(|h| HistoryView {
                    query: h.query.names(gp),
                    answer: h.answer,
                    timestamp_ms: h.timestamp_ms,
                })
                .collect(),
            positive: s.dpi.positive().iter().map(|t| TestCaseJson::render(t, gp)).collect(),
            negative: s.dpi.negative().iter().map(|t| TestCaseJson::render(t, gp)).collect(),
        }
    }
}
