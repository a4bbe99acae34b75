//! Terminal front ends over the core library. Every command writes to a
//! caller-supplied sink so it can be driven from tests.

use std::io::{BufRead, Write};

use anyhow::{bail, Context, Result};
use aspdebug_core::diagnosis::{DiagnosisOptions, Dpi, SearchStatus};
use aspdebug_core::program::{GroundConfig, GroundProgram, Interpretation};
use aspdebug_core::query::{Answer, FaultProbs};
use aspdebug_core::session::{Oracle, Session, SessionConfig, SimulatedOracle, StartOptions, Status};

/// Settings shared by the session-based commands.
#[derive(Debug, Clone)]
pub struct SessionArgs {
    pub config: SessionConfig,
    pub priors: Option<FaultProbs>,
}

pub fn load_priors(path: &std::path::Path) -> Result<FaultProbs> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FaultProbs::from_json(&text)?)
}

fn count(n: usize, adjective: &str) -> String {
    let noun = if n == 1 { "diagnosis" } else { "diagnoses" };
    if adjective.is_empty() {
        format!("{n} {noun}")
    } else {
        format!("{n} {adjective} {noun}")
    }
}

fn status_note(status: SearchStatus) -> &'static str {
    match status {
        SearchStatus::Complete => "complete",
        SearchStatus::Truncated => "truncated: more minimal diagnoses exist",
        SearchStatus::CardinalityCapReached => "none up to the cardinality cap",
        SearchStatus::NoDiagnosis => "no diagnosis exists",
    }
}

/// A 0/1 grid, one row per interpretation, one column per atom.
fn write_grid(
    out: &mut dyn Write,
    gp: &GroundProgram,
    rows: &[(String, Interpretation)],
) -> Result<()> {
    let label_width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
    write!(out, "  {:label_width$}", "")?;
    for a in gp.atoms() {
        write!(out, " {a}")?;
    }
    writeln!(out)?;
    for (label, i) in rows {
        write!(out, "  {label:label_width$}")?;
        for (id, a) in gp.atoms().iter().enumerate() {
            let cell = if i.contains(id) { "1" } else { "0" };
            write!(out, " {cell:>w$}", w = a.to_string().len())?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Minimal diagnoses of a program file with their interpretation table.
pub fn diagnose(
    source: &str,
    options: &DiagnosisOptions,
    atom_cap: usize,
    json: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let gp = GroundProgram::from_source(source, &GroundConfig { atom_cap })?;
    let dpi = Dpi::new(gp)?;
    let report = dpi.compute_diagnoses(options);
    let gp = dpi.program();
    if json {
        let diagnoses: Vec<_> = report
            .diagnoses
            .iter()
            .map(|d| {
                let interpretations: Vec<Vec<String>> = dpi
                    .interpretations(d)
                    .unwrap_or_default()
                    .into_iter()
                    .map(|i| gp.names(i))
                    .collect();
                serde_json::json!({ "errors": d.errors, "interpretations": interpretations })
            })
            .collect();
        let doc = serde_json::json!({
            "status": report.status,
            "cardinality": report.cardinality,
            "diagnoses": diagnoses,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        return Ok(());
    }
    writeln!(out, "{} ({})", count(report.diagnoses.len(), ""), status_note(report.status))?;
    let mut rows = Vec::new();
    for (k, d) in report.diagnoses.iter().enumerate() {
        let label = format!("D{}", k + 1);
        writeln!(out, "  {label}: {d}")?;
        for i in dpi.interpretations(d)? {
            rows.push((label.clone(), i));
        }
    }
    if !rows.is_empty() {
        writeln!(out, "interpretations:")?;
        write_grid(out, gp, &rows)?;
    }
    Ok(())
}

/// Starts a session from program text.
pub fn start(source: &str, args: &SessionArgs) -> Result<Session> {
    let opts = StartOptions {
        fault_probs: args.priors.clone(),
        ..StartOptions::default()
    };
    Ok(Session::start_with(source, args.config, opts)?)
}

fn write_state(out: &mut dyn Write, s: &Session) -> Result<()> {
    let gp = s.program();
    for d in s.live_diagnoses() {
        let p = s.priors().get(d).copied().unwrap_or(0.0);
        let is: Vec<String> = s
            .dpi()
            .interpretations(d)?
            .into_iter()
            .map(|i| gp.show(i))
            .collect();
        writeln!(out, "  {p:>6.3}  {d}  {}", is.join(" "))?;
    }
    Ok(())
}

fn write_outcome(out: &mut dyn Write, s: &Session) -> Result<()> {
    match s.status() {
        Status::Done => match s.diagnosis() {
            Some(d) => writeln!(out, "diagnosis: {d}")?,
            None => writeln!(out, "no diagnosis remains")?,
        },
        Status::Undiscriminable => {
            writeln!(out, "no query separates the remaining diagnoses:")?;
            write_state(out, s)?;
        }
        Status::NoDiagnoses => writeln!(out, "no diagnosis within the cardinality cap")?,
        Status::AwaitingAnswer => {}
    }
    Ok(())
}

fn query_text(s: &Session) -> Option<String> {
    s.pending()
        .map(|p| format!("{{{}}}", p.query.names(s.program()).join(", ")))
}

/// Terminal question-and-answer loop. Returns the session as it stood when
/// the loop ended, whether finished or stopped with `quit`.
pub fn interactive(mut s: Session, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<Session> {
    writeln!(out, "{}:", count(s.live_diagnoses().len(), "candidate"))?;
    write_state(out, &s)?;
    while let Some(q) = query_text(&s) {
        write!(out, "are all of {q} true in the intended answer set? [yes/no/...] ")?;
        out.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            bail!("input ended before the session finished");
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if matches!(line, "q" | "quit" | "exit") {
            writeln!(out, "stopped with {} left", count(s.live_diagnoses().len(), ""))?;
            return Ok(s);
        }
        let answer: Answer = match line.parse() {
            Ok(a) => a,
            Err(e) => {
                writeln!(
                    out,
                    "{e}; use yes, no, cautiously_true, cautiously_false, bravely_true, bravely_false or quit"
                )?;
                continue;
            }
        };
        s = s.submit_answer(answer)?;
        writeln!(out, "{}:", count(s.live_diagnoses().len(), "candidate"))?;
        write_state(out, &s)?;
    }
    write_outcome(out, &s)?;
    Ok(s)
}

/// Runs a session against the simulated oracle and prints every step.
pub fn oracle_sim(source: &str, args: &SessionArgs, target: &str, out: &mut dyn Write) -> Result<Session> {
    let mut s = start(source, args)?;
    let mut oracle = SimulatedOracle::parse(s.program(), target)?;
    writeln!(
        out,
        "target {}, strategy {}",
        s.program().show(oracle.target),
        s.config().strategy
    )?;
    writeln!(out, "{}:", count(s.live_diagnoses().len(), "candidate"))?;
    write_state(out, &s)?;
    let mut step = 0;
    while let Some(p) = s.pending().cloned() {
        step += 1;
        let answer = oracle.answer(s.program(), &p.query);
        writeln!(out, "query {step}: {} -> {answer}", query_text(&s).unwrap_or_default())?;
        s = s.submit_answer(answer)?;
        write_state(out, &s)?;
    }
    writeln!(out, "{step} queries")?;
    write_outcome(out, &s)?;
    Ok(s)
}
