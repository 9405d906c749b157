use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    SessionOpened,
    UtteranceReceived,
    UtteranceRejected,
    ExtractionFailed,
    IdeasExtracted,
    ContextAdjusted,
    AdjustmentIteration,
    IcnCreated,
    IcnJoined,
    EdgeAdded,
    ImageTagged,
    DeltaComputed,
    MetricsUpdated,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(v.as_str().unwrap_or_default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub seq: u64,
    pub kind: EventKind,
    /// utterance the event belongs to; absent for session-level events
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utterance: Option<u64>,
    pub payload: Value,
}

impl SessionEvent {
    pub fn to_line(&self) -> String {
        canonical::to_string(self).expect("event serializes")
    }
}

/// Events produced by one utterance, appended as a unit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventBatch {
    pub utterance: u64,
    pub events: Vec<SessionEvent>,
}

impl EventBatch {
    pub fn kinds(&self) -> Vec<EventKind> {
        self.events.iter().map(|e| e.kind).collect()
    }

    pub fn first_seq(&self) -> Option<u64> {
        self.events.first().map(|e| e.seq)
    }

    pub fn last_seq(&self) -> Option<u64> {
        self.events.last().map(|e| e.seq)
    }
}

/// Sequence numbers must run 1, 2, 3, ... without gaps.
pub fn check_dense(events: &[SessionEvent]) -> Result<()> {
    for (i, e) in events.iter().enumerate() {
        let expected = i as u64 + 1;
        if e.seq != expected {
            return Err(Error::SeqGap { expected, found: e.seq });
        }
    }
    Ok(())
}

pub fn parse_log(reader: impl Read) -> Result<Vec<SessionEvent>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ev: SessionEvent =
            serde_json::from_str(&line).map_err(|e| Error::EventLog(format!("line {}: {e}", i + 1)))?;
        out.push(ev);
    }
    check_dense(&out)?;
    Ok(out)
}

pub fn read_log(path: impl AsRef<Path>) -> Result<Vec<SessionEvent>> {
    parse_log(std::fs::File::open(path)?)
}

/// One canonical JSON event per line, LF-terminated.
pub fn write_log(mut out: impl Write, events: &[SessionEvent]) -> Result<()> {
    for e in events {
        out.write_all(e.to_line().as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
