//! Event-sourced sessions: one writer runs utterances through the pipeline
//! and appends the resulting events; snapshots and replay derive from them.

mod config;
mod events;
mod pipeline;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use config::{LoopConfig, SessionConfig};
pub use events::{check_dense, parse_log, read_log, write_log, EventBatch, EventKind, SessionEvent};
pub use pipeline::{synthesize, SynthesizedMeaning};

use crate::canonical;
use crate::context::ContextState;
use crate::error::{Error, Result};
use crate::graph::{compare_images, converged, image_elements, to_dot, Direction, ImageDelta, MentalImageKind, ProcessGraph};
use crate::icn::{Channel, Element, ElementSet};
use crate::ingest::{extract_ideas, Lexicon, Utterance};
use crate::metrics::{self, delta_report, DecisionRecord, MetricsReport};

/// Everything a session knows; cloned per utterance so a failure leaves
/// the committed state untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SessionState {
    problem_statement: String,
    problem_elements: ElementSet,
    graph: ProcessGraph,
    context: ContextState,
    history: Vec<DecisionRecord>,
    metrics: MetricsReport,
    top_down: ImageDelta,
    bottom_up: ImageDelta,
    last_utterance: Option<u64>,
    last_t: Option<u64>,
    utterance_count: u64,
    idea_count: u64,
}

/// Immutable view of a session after its last appended event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub problem_statement: String,
    pub problem_image: ElementSet,
    pub graph: ProcessGraph,
    pub context: ContextState,
    pub history: Vec<DecisionRecord>,
    pub metrics: MetricsReport,
    pub top_down: ImageDelta,
    pub bottom_up: ImageDelta,
    pub converged: bool,
    pub utterance_count: u64,
    pub last_seq: u64,
}

impl Snapshot {
    /// Canonical JSON, the byte-comparable form.
    pub fn to_json(&self) -> String {
        canonical::to_string_pretty(self).expect("snapshot serializes")
    }

    pub fn to_dot(&self) -> String {
        to_dot(&self.graph)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Events of one utterance under construction.
pub(crate) struct Batch {
    next_seq: u64,
    utterance: u64,
    events: Vec<SessionEvent>,
}

impl Batch {
    pub(crate) fn push(&mut self, kind: EventKind, payload: Value) {
        self.events.push(SessionEvent { seq: self.next_seq, kind, utterance: Some(self.utterance), payload: canonical::to_value(&payload) });
        self.next_seq += 1;
    }
}

pub struct Session {
    config: SessionConfig,
    lexicon: Arc<Lexicon>,
    state: SessionState,
    log: Vec<SessionEvent>,
}

/// Non-verb lemmas of the statement's ideas, as target elements.
fn statement_elements(statement: &str, lex: &Lexicon) -> ElementSet {
    let u = Utterance::new(0, "", 0, statement);
    let ideas = extract_ideas(&u, lex).unwrap_or_default();
    ideas
        .iter()
        .flat_map(|i| i.targets().chain(i.modifiers.iter().map(String::as_str)).map(str::to_string).collect::<Vec<_>>())
        .map(|l| Element::new(Channel::Target, lex.canonical(&l).to_string()))
        .collect()
}

fn deltas(st: &SessionState, lex: &Lexicon) -> (ImageDelta, ImageDelta) {
    let problem = metrics::problem_image(&st.graph, &st.problem_elements);
    let solution = metrics::solution_image(&st.graph);
    let expected = image_elements(&st.graph, &[MentalImageKind::ExpectedBehavior]);
    let observed = image_elements(&st.graph, &[MentalImageKind::ObservedBehavior]);
    (
        compare_images(&problem, &solution, lex, Direction::TopDown),
        compare_images(&expected, &observed, lex, Direction::BottomUp),
    )
}

pub fn open_session(config: SessionConfig, lexicon: Arc<Lexicon>, problem_statement: &str) -> Result<Session> {
    config.validate()?;
    let mut context = ContextState::new(config.context.clone());
    context.set_problem(problem_statement, &lexicon);
    let problem_elements = statement_elements(problem_statement, &lexicon);
    let mut state = SessionState {
        problem_statement: problem_statement.to_string(),
        problem_elements,
        graph: ProcessGraph::new(),
        context,
        history: Vec::new(),
        metrics: MetricsReport::default(),
        top_down: ImageDelta { delta: vec![], meaning: crate::graph::DeltaMeaning::None, direction: Direction::TopDown },
        bottom_up: ImageDelta { delta: vec![], meaning: crate::graph::DeltaMeaning::None, direction: Direction::BottomUp },
        last_utterance: None,
        last_t: None,
        utterance_count: 0,
        idea_count: 0,
    };
    (state.top_down, state.bottom_up) = deltas(&state, &lexicon);
    state.metrics = metrics::compute(&state.graph, &state.problem_elements, &[], &lexicon, &config.metrics, 0);
    let opened = SessionEvent {
        seq: 1,
        kind: EventKind::SessionOpened,
        utterance: None,
        payload: canonical::to_value(&json!({ "problem_statement": problem_statement, "config": config })),
    };
    Ok(Session { config, lexicon, state, log: vec![opened] })
}

impl Session {
    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn lexicon(&self) -> &Arc<Lexicon> {
        &self.lexicon
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.log
    }

    /// Events with `seq >= from`.
    pub fn events_from(&self, from: u64) -> &[SessionEvent] {
        let start = (from.max(1) - 1).min(self.log.len() as u64) as usize;
        &self.log[start..]
    }

    pub fn last_seq(&self) -> u64 {
        self.log.len() as u64
    }

    pub fn utterance_count(&self) -> u64 {
        self.state.utterance_count
    }

    pub fn metrics(&self) -> &MetricsReport {
        &self.state.metrics
    }

    pub fn graph(&self) -> &ProcessGraph {
        &self.state.graph
    }

    pub fn history(&self) -> &[DecisionRecord] {
        &self.state.history
    }

    pub fn problem_image(&self) -> ElementSet {
        metrics::problem_image(&self.state.graph, &self.state.problem_elements)
    }

    pub fn snapshot(&self) -> Snapshot {
        let st = &self.state;
        Snapshot {
            problem_statement: st.problem_statement.clone(),
            problem_image: self.problem_image(),
            graph: st.graph.clone(),
            context: st.context.clone(),
            history: st.history.clone(),
            metrics: st.metrics.clone(),
            top_down: st.top_down.clone(),
            bottom_up: st.bottom_up.clone(),
            converged: converged(&st.top_down, &st.bottom_up, self.config.session.eps),
            utterance_count: st.utterance_count,
            last_seq: self.last_seq(),
        }
    }

    fn admissible(&self, u: &Utterance) -> Result<()> {
        if let Some(last) = self.state.last_utterance {
            if u.id <= last {
                return Err(Error::StaleUtterance { id: u.id, last });
            }
        }
        if let Some(last_t) = self.state.last_t {
            if u.t < last_t {
                return Err(Error::TimeRegression { id: u.id, t_ms: u.t, last_t_ms: last_t });
            }
        }
        Ok(())
    }

    /// Run one utterance through the pipeline and append its events as one
    /// batch. A stale or time-reversed utterance only appends an
    /// `utterance_rejected` event and is returned as an error.
    pub fn process_utterance(&mut self, u: &Utterance) -> Result<EventBatch> {
        if let Err(e) = self.admissible(u) {
            let rejected = SessionEvent {
                seq: self.last_seq() + 1,
                kind: EventKind::UtteranceRejected,
                utterance: None,
                payload: canonical::to_value(&json!({ "utterance": u, "reason": e.to_string() })),
            };
            self.log.push(rejected);
            return Err(e);
        }
        let lex = Arc::clone(&self.lexicon);
        let mut st = self.state.clone();
        let mut batch = Batch { next_seq: self.last_seq() + 1, utterance: u.id, events: Vec::new() };
        batch.push(EventKind::UtteranceReceived, json!({ "utterance": u }));
        st.last_utterance = Some(u.id);
        st.last_t = Some(u.t);
        st.utterance_count += 1;

        match extract_ideas(u, &lex) {
            Err(e) => batch.push(EventKind::ExtractionFailed, json!({ "message": e.to_string() })),
            Ok(ideas) => {
                batch.push(EventKind::IdeasExtracted, json!({ "ideas": ideas }));
                for idea in &ideas {
                    pipeline::process_idea(&mut st, idea, &self.config, &lex, &mut batch)?;
                }
                let (td, bu) = deltas(&st, &lex);
                if td != st.top_down || bu != st.bottom_up {
                    let done = converged(&td, &bu, self.config.session.eps);
                    batch.push(EventKind::DeltaComputed, json!({ "top_down": td, "bottom_up": bu, "converged": done }));
                    st.top_down = td;
                    st.bottom_up = bu;
                }
                let report = metrics::compute(&st.graph, &st.problem_elements, &st.history, &lex, &self.config.metrics, u.id);
                let delta = delta_report(&st.metrics, &report)?;
                batch.push(EventKind::MetricsUpdated, json!({ "report": report, "delta": delta }));
                st.metrics = report;
                st.graph.check().map_err(Error::Invariant)?;
                let size = metrics::problem_image(&st.graph, &st.problem_elements).len();
                st.metrics.check(size).map_err(Error::Invariant)?;
            }
        }

        self.state = st;
        self.log.extend(batch.events.iter().cloned());
        Ok(EventBatch { utterance: u.id, events: batch.events })
    }
}

fn utterance_of(e: &SessionEvent) -> Result<Utterance> {
    let u = e.payload.get("utterance").ok_or_else(|| Error::EventLog(format!("seq {} has no utterance", e.seq)))?;
    Ok(serde_json::from_value(u.clone())?)
}

/// Rebuild a session by re-feeding the logged utterances and check that it
/// regenerates the log event for event.
pub fn replay_session(log: &[SessionEvent], config: SessionConfig, lexicon: Arc<Lexicon>) -> Result<Session> {
    check_dense(log)?;
    let Some(first) = log.first() else {
        return open_session(config, lexicon, "");
    };
    if first.kind != EventKind::SessionOpened {
        return Err(Error::EventLog("log does not start with session_opened".into()));
    }
    let statement = first.payload.get("problem_statement").and_then(Value::as_str).unwrap_or_default();
    let mut session = open_session(config, lexicon, statement)?;
    for e in log.iter() {
        let outcome = match e.kind {
            EventKind::UtteranceReceived => session.process_utterance(&utterance_of(e)?).is_ok(),
            EventKind::UtteranceRejected => session.process_utterance(&utterance_of(e)?).is_err(),
            _ => continue,
        };
        if !outcome {
            return Err(Error::ReplayDivergence { seq: e.seq });
        }
    }
    let regenerated = session.events();
    for (i, e) in log.iter().enumerate() {
        if regenerated.get(i) != Some(e) {
            return Err(Error::ReplayDivergence { seq: e.seq });
        }
    }
    if regenerated.len() > log.len() {
        return Err(Error::ReplayDivergence { seq: log.len() as u64 + 1 });
    }
    Ok(session)
}

pub fn replay(log: &[SessionEvent], config: SessionConfig, lexicon: Arc<Lexicon>) -> Result<Snapshot> {
    Ok(replay_session(log, config, lexicon)?.snapshot())
}
