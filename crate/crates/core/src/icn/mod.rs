//! Idea Cluster Nodes: groups of similar ideas with their typical elements
//! (shared by a majority of members) and expected variation (the rest).

mod assign;
mod elements;
mod matching;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use assign::{assign, Assignment, Decision, IdeaProfile, IcnConfig};
pub use elements::{Channel, Element, ElementSet};
pub use matching::{match_sets, match_triples, similarity, MatchResult, MatchedPair};


use crate::graph::MentalImageKind;
use crate::ingest::NatureLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IcnId(pub u32);

impl fmt::Display for IcnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ICN#{}", self.0)
    }
}

/// One idea as stored in a cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub utterance: u64,
    pub ordinal: u32,
    /// 1-based position of the idea in the session
    pub idea_index: u64,
    /// canonical elements, including the synthesized output
    pub elements: ElementSet,
    pub goal: Option<String>,
    pub nature: NatureLabel,
    pub hint: MentalImageKind,
}

/// Multisets of the processing slots.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slots {
    pub verbs: BTreeMap<String, u32>,
    pub targets: BTreeMap<String, u32>,
    pub expected_outputs: BTreeMap<String, u32>,
}

impl Slots {
    fn add(&mut self, e: &ElementSet) {
        for v in &e.verbs {
            *self.verbs.entry(v.clone()).or_default() += 1;
        }
        for t in &e.targets {
            *self.targets.entry(t.clone()).or_default() += 1;
        }
        for o in &e.outputs {
            *self.expected_outputs.entry(o.clone()).or_default() += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Icn {
    pub id: IcnId,
    pub members: Vec<Member>,
    pub slots: Slots,
    pub te: BTreeSet<Element>,
    pub ev: BTreeSet<Element>,
    pub image: MentalImageKind,
    /// utterance id that opened the cluster
    pub created_at: u64,
}

impl Icn {
    pub fn new(id: IcnId, first: Member) -> Self {
        let created_at = first.utterance;
        let image = first.hint;
        let icn = Icn {
            id,
            members: Vec::new(),
            slots: Slots::default(),
            te: BTreeSet::new(),
            ev: BTreeSet::new(),
            image,
            created_at,
        };
        update_te_ev(icn, first)
    }

    pub fn te_set(&self) -> ElementSet {
        self.te.iter().cloned().collect()
    }

    pub fn elements(&self) -> ElementSet {
        self.te.iter().chain(self.ev.iter()).cloned().collect()
    }

    pub fn te_lemmas(&self) -> BTreeSet<String> {
        self.te.iter().map(|e| e.lemma.clone()).collect()
    }

    pub fn goals(&self) -> BTreeSet<&str> {
        self.members.iter().filter_map(|m| m.goal.as_deref()).collect()
    }

    pub fn utterances(&self) -> BTreeSet<u64> {
        self.members.iter().map(|m| m.utterance).collect()
    }

    pub fn last_idea_index(&self) -> u64 {
        self.members.last().map(|m| m.idea_index).unwrap_or(0)
    }

    /// Majority threshold: an element is typical when at least this many
    /// members carry it.
    pub fn majority(&self) -> usize {
        self.members.len().div_ceil(2)
    }

    /// How many members carry each element.
    pub fn element_counts(&self) -> BTreeMap<Element, usize> {
        let mut counts = BTreeMap::new();
        for m in &self.members {
            for e in m.elements.iter() {
                *counts.entry(e).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Checks the structural invariants; returns the first violation.
    pub fn check(&self) -> Result<(), String> {
        if self.members.is_empty() {
            return Err(format!("{} has no members", self.id));
        }
        if let Some(e) = self.te.intersection(&self.ev).next() {
            return Err(format!("{}: {e} is in both te and ev", self.id));
        }
        let counts = self.element_counts();
        let need = self.majority();
        for e in &self.te {
            match counts.get(e) {
                Some(&n) if n >= need => {}
                _ => return Err(format!("{}: te element {e} is not carried by a majority", self.id)),
            }
        }
        for e in &self.ev {
            if !counts.contains_key(e) {
                return Err(format!("{}: ev element {e} is not carried by any member", self.id));
            }
        }
        if counts.len() != self.te.len() + self.ev.len() {
            return Err(format!("{}: te and ev do not cover the member elements", self.id));
        }
        Ok(())
    }
}

/// Add a member and recompute typical elements and expected variation.
pub fn update_te_ev(mut icn: Icn, member: Member) -> Icn {
    icn.slots.add(&member.elements);
    icn.members.push(member);
    let need = icn.majority();
    let (te, ev): (Vec<_>, Vec<_>) = icn.element_counts().into_iter().partition(|(_, n)| *n >= need);
    icn.te = te.into_iter().map(|(e, _)| e).collect();
    icn.ev = ev.into_iter().map(|(e, _)| e).collect();
    icn
}
