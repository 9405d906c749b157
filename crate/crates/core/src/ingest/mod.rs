//! Transcript ingestion: utterances in, normalized idea triples out.

mod extract;
mod lexicon;
mod nature;
mod transcript;

use serde::{Deserialize, Serialize};

pub use extract::{detect_cues, extract_ideas, tokenize_content};
pub use lexicon::{load_lexicon, Lexicon, RelationTemplate};
pub use nature::{classify_nature, NatureLabel};
pub use transcript::{parse_transcript, read_transcript};

pub(crate) use lexicon::normalize_phrase;
pub(crate) use nature::problem_overlap;

/// One line of a discussion transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub id: u64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub session: String,
    #[serde(default)]
    pub speaker: String,
    #[serde(rename = "t_ms", default)]
    pub t: u64,
    #[serde(default)]
    pub text: String,
    #[serde(rename = "triples", default, skip_serializing_if = "Option::is_none")]
    pub pre_annotation: Option<Vec<IdeaTriple>>,
}

impl Utterance {
    pub fn new(id: u64, speaker: impl Into<String>, t: u64, text: impl Into<String>) -> Self {
        Utterance {
            id,
            session: String::new(),
            speaker: speaker.into(),
            t,
            text: text.into(),
            pre_annotation: None,
        }
    }

    pub fn with_triples(mut self, triples: Vec<IdeaTriple>) -> Self {
        self.pre_annotation = Some(triples);
        self
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// A noun-verb-noun idea. `verb` is empty only for assertion-only triples.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdeaTriple {
    #[serde(default)]
    pub verb: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noun1: Option<String>,
    #[serde(default)]
    pub noun2: Vec<String>,
    #[serde(default)]
    pub modifiers: Vec<String>,
    #[serde(default)]
    pub source_utterance: u64,
    #[serde(default)]
    pub ordinal: u32,
    #[serde(default, skip_serializing_if = "is_false")]
    pub assertion_only: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub out_of_lexicon: Vec<String>,
    /// Cue patterns found in the source text, sorted.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cues: Vec<String>,
}

impl IdeaTriple {
    pub fn new(verb: &str, noun2: &[&str], modifiers: &[&str]) -> Self {
        IdeaTriple {
            verb: verb.to_string(),
            noun2: noun2.iter().map(|s| s.to_string()).collect(),
            modifiers: modifiers.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn with_noun1(mut self, noun1: &str) -> Self {
        self.noun1 = Some(noun1.to_string());
        self
    }

    /// Nouns the action is performed on, subject first.
    pub fn targets(&self) -> impl Iterator<Item = &str> {
        self.noun1.as_deref().into_iter().chain(self.noun2.iter().map(String::as_str))
    }

    /// Every lemma the triple carries.
    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        (!self.verb.is_empty())
            .then_some(self.verb.as_str())
            .into_iter()
            .chain(self.targets())
            .chain(self.modifiers.iter().map(String::as_str))
    }

    /// The lemma that opens the concept network: subject, else first object,
    /// else the verb.
    pub fn trigger(&self) -> Option<&str> {
        self.noun1
            .as_deref()
            .or_else(|| self.noun2.first().map(String::as_str))
            .or_else(|| (!self.verb.is_empty()).then_some(self.verb.as_str()))
            .or_else(|| self.modifiers.first().map(String::as_str))
    }

    pub fn has_cue(&self, pattern: &str) -> bool {
        self.cues.iter().any(|c| c == pattern)
    }
}
