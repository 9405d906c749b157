use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ingest::{IdeaTriple, Lexicon};

/// Slot an element occupies. Matching never crosses channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Verb,
    Target,
    Output,
    Modifier,
}

impl Channel {
    /// Priority order used by the matcher.
    pub const ALL: [Channel; 4] = [Channel::Verb, Channel::Target, Channel::Output, Channel::Modifier];

    /// Similarity weight in fifths: verb and target 0.4, output and modifier 0.2.
    pub fn weight_fifths(self) -> u32 {
        match self {
            Channel::Verb | Channel::Target => 2,
            Channel::Output | Channel::Modifier => 1,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Channel::Verb => "verb",
            Channel::Target => "target",
            Channel::Output => "output",
            Channel::Modifier => "modifier",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Channel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Channel::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown channel `{s}`"))
    }
}

/// A lemma in a channel. Serialized as `channel:lemma`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    pub channel: Channel,
    pub lemma: String,
}

impl Element {
    pub fn new(channel: Channel, lemma: impl Into<String>) -> Self {
        Element { channel, lemma: lemma.into() }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.channel, self.lemma)
    }
}

impl FromStr for Element {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (c, l) = s.split_once(':').ok_or_else(|| format!("element `{s}` lacks a channel"))?;
        Ok(Element { channel: c.parse()?, lemma: l.to_string() })
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Elements grouped by channel.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementSet {
    pub verbs: BTreeSet<String>,
    pub targets: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
    pub modifiers: BTreeSet<String>,
}

impl ElementSet {
    pub fn from_triple(t: &IdeaTriple) -> Self {
        let mut s = ElementSet::default();
        if !t.verb.is_empty() {
            s.verbs.insert(t.verb.clone());
        }
        s.targets.extend(t.targets().map(String::from));
        s.modifiers.extend(t.modifiers.iter().cloned());
        s
    }

    pub fn channel(&self, c: Channel) -> &BTreeSet<String> {
        match c {
            Channel::Verb => &self.verbs,
            Channel::Target => &self.targets,
            Channel::Output => &self.outputs,
            Channel::Modifier => &self.modifiers,
        }
    }

    pub fn channel_mut(&mut self, c: Channel) -> &mut BTreeSet<String> {
        match c {
            Channel::Verb => &mut self.verbs,
            Channel::Target => &mut self.targets,
            Channel::Output => &mut self.outputs,
            Channel::Modifier => &mut self.modifiers,
        }
    }

    pub fn insert(&mut self, e: Element) {
        self.channel_mut(e.channel).insert(e.lemma);
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.channel(e.channel).contains(&e.lemma)
    }

    pub fn iter(&self) -> impl Iterator<Item = Element> + '_ {
        Channel::ALL
            .into_iter()
            .flat_map(move |c| self.channel(c).iter().map(move |l| Element::new(c, l.clone())))
    }

    pub fn len(&self) -> usize {
        Channel::ALL.iter().map(|c| self.channel(*c).len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lemmas(&self) -> BTreeSet<String> {
        self.iter().map(|e| e.lemma).collect()
    }

    pub fn union(&self, other: &ElementSet) -> ElementSet {
        let mut out = self.clone();
        for e in other.iter() {
            out.insert(e);
        }
        out
    }

    /// Replace every lemma with its synonym-set representative.
    pub fn canonical(&self, lex: &Lexicon) -> ElementSet {
        let mut out = ElementSet::default();
        for e in self.iter() {
            let lemma = lex.canonical(&e.lemma).to_string();
            out.insert(Element::new(e.channel, lemma));
        }
        out
    }
}

impl FromIterator<Element> for ElementSet {
    fn from_iter<I: IntoIterator<Item = Element>>(iter: I) -> Self {
        let mut s = ElementSet::default();
        for e in iter {
            s.insert(e);
        }
        s
    }
}
