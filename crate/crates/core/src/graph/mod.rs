//! Process graph of idea clusters, typed edges between them, and the
//! mental-image view over the clusters.

mod export;
mod images;
mod space;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use export::{to_dot, GraphDocument};
pub use images::{compare_images, converged, image_elements, member_hint, tag_image, DeltaMeaning, Direction, ImageDelta};
pub use space::{solution_space_map, SpaceMap, SpacePair};

use crate::error::{Error, Result};
use crate::icn::{Element, Icn, IcnId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MentalImageKind {
    Problem,
    DesiredSolution,
    ExistingSolution,
    ExpectedBehavior,
    ObservedBehavior,
    CausalityOfDifferences,
    NeededSolutionChanges,
    NeededProblemChanges,
}

impl MentalImageKind {
    pub const ALL: [MentalImageKind; 8] = [
        MentalImageKind::Problem,
        MentalImageKind::DesiredSolution,
        MentalImageKind::ExistingSolution,
        MentalImageKind::ExpectedBehavior,
        MentalImageKind::ObservedBehavior,
        MentalImageKind::CausalityOfDifferences,
        MentalImageKind::NeededSolutionChanges,
        MentalImageKind::NeededProblemChanges,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MentalImageKind::Problem => "problem",
            MentalImageKind::DesiredSolution => "desired_solution",
            MentalImageKind::ExistingSolution => "existing_solution",
            MentalImageKind::ExpectedBehavior => "expected_behavior",
            MentalImageKind::ObservedBehavior => "observed_behavior",
            MentalImageKind::CausalityOfDifferences => "causality_of_differences",
            MentalImageKind::NeededSolutionChanges => "needed_solution_changes",
            MentalImageKind::NeededProblemChanges => "needed_problem_changes",
        }
    }

    /// Images that describe the solution side.
    pub fn is_solution(self) -> bool {
        matches!(self, MentalImageKind::DesiredSolution | MentalImageKind::ExistingSolution)
    }
}

impl fmt::Display for MentalImageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MentalImageKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MentalImageKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown image kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Detailing,
    Exploration,
    Causality,
    Generalization,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Detailing => "detailing",
            EdgeKind::Exploration => "exploration",
            EdgeKind::Causality => "causality",
            EdgeKind::Generalization => "generalization",
        }
    }

    /// Edges that make their target a non-root.
    pub fn is_structural(self) -> bool {
        matches!(self, EdgeKind::Detailing | EdgeKind::Exploration)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: IcnId,
    pub to: IcnId,
    pub kind: EdgeKind,
    /// detailing: the parent's elements being elaborated
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub elements: Vec<Element>,
    /// exploration: the cluster that sets the shared context
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<IcnId>,
    /// causality: the cue that produced the edge
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cue: Option<String>,
}

impl Edge {
    pub fn detailing(parent: IcnId, child: IcnId, elements: Vec<Element>) -> Self {
        Edge { from: parent, to: child, kind: EdgeKind::Detailing, elements, context: None, cue: None }
    }

    pub fn exploration(context: IcnId, alternative: IcnId) -> Self {
        Edge { from: context, to: alternative, kind: EdgeKind::Exploration, elements: vec![], context: Some(context), cue: None }
    }

    pub fn causality(cause: IcnId, effect: IcnId, cue: &str) -> Self {
        Edge { from: cause, to: effect, kind: EdgeKind::Causality, elements: vec![], context: None, cue: Some(cue.to_string()) }
    }

    pub fn generalization(specific: IcnId, general: IcnId) -> Self {
        Edge { from: specific, to: general, kind: EdgeKind::Generalization, elements: vec![], context: None, cue: None }
    }

    pub fn detailed_lemmas(&self) -> BTreeSet<&str> {
        self.elements.iter().map(|e| e.lemma.as_str()).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "GraphDocument", from = "GraphDocument")]
pub struct ProcessGraph {
    pub icns: BTreeMap<IcnId, Icn>,
    pub edges: Vec<Edge>,
    next_id: u32,
}

impl ProcessGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_id(&mut self) -> IcnId {
        self.next_id += 1;
        IcnId(self.next_id)
    }

    pub fn insert(&mut self, icn: Icn) {
        self.next_id = self.next_id.max(icn.id.0);
        self.icns.insert(icn.id, icn);
    }

    pub fn get(&self, id: IcnId) -> Option<&Icn> {
        self.icns.get(&id)
    }

    pub fn is_empty(&self) -> bool {
        self.icns.is_empty()
    }

    pub fn roots(&self) -> Vec<IcnId> {
        let fed: BTreeSet<IcnId> =
            self.edges.iter().filter(|e| e.kind.is_structural()).map(|e| e.to).collect();
        self.icns.keys().filter(|id| !fed.contains(id)).copied().collect()
    }

    pub fn outgoing(&self, id: IcnId, kind: EdgeKind) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == id && e.kind == kind)
    }

    pub fn incoming(&self, id: IcnId, kind: EdgeKind) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.to == id && e.kind == kind)
    }

    /// The cluster that sets the context an alternative would explore:
    /// the source of the cluster's own exploration edge, else itself.
    pub fn context_of(&self, id: IcnId) -> IcnId {
        self.incoming(id, EdgeKind::Exploration).map(|e| e.from).next().unwrap_or(id)
    }

    fn detailing_reaches(&self, from: IcnId, to: IcnId) -> bool {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([from]);
        while let Some(n) = queue.pop_front() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                queue.extend(self.outgoing(n, EdgeKind::Detailing).map(|e| e.to));
            }
        }
        false
    }

    /// Add an edge. Detailing edges that would close a cycle are rejected.
    pub fn add_edge(&mut self, edge: Edge) -> Result<()> {
        for id in [edge.from, edge.to] {
            if !self.icns.contains_key(&id) {
                return Err(Error::Invariant(format!("edge endpoint {id} does not exist")));
            }
        }
        if edge.kind == EdgeKind::Detailing && self.detailing_reaches(edge.to, edge.from) {
            return Err(Error::DetailingCycle { from: edge.from.0, to: edge.to.0 });
        }
        self.edges.push(edge);
        Ok(())
    }

    /// Remove a cluster and every edge touching it.
    pub fn remove_icn(&mut self, id: IcnId) -> Option<Icn> {
        self.edges.retain(|e| e.from != id && e.to != id);
        self.icns.remove(&id)
    }

    /// Every cluster that carries a given idea.
    pub fn icn_of(&self, utterance: u64, ordinal: u32) -> Option<IcnId> {
        self.icns
            .values()
            .find(|i| i.members.iter().any(|m| m.utterance == utterance && m.ordinal == ordinal))
            .map(|i| i.id)
    }

    /// Structural invariants: cluster invariants, detailing acyclicity,
    /// reachability from roots, and one cluster per idea.
    pub fn check(&self) -> Result<(), String> {
        for icn in self.icns.values() {
            icn.check()?;
        }
        for e in self.edges.iter().filter(|e| e.kind == EdgeKind::Detailing) {
            if self.detailing_reaches(e.to, e.from) {
                return Err(format!("detailing cycle through {} -> {}", e.from, e.to));
            }
            if e.elements.is_empty() {
                return Err(format!("detailing edge {} -> {} has no elements", e.from, e.to));
            }
        }
        for e in self.edges.iter().filter(|e| e.kind == EdgeKind::Exploration) {
            if e.context != Some(e.from) {
                return Err(format!("exploration edge {} -> {} lost its context", e.from, e.to));
            }
        }
        let mut reached: BTreeSet<IcnId> = BTreeSet::new();
        let mut queue: VecDeque<IcnId> = self.roots().into();
        while let Some(n) = queue.pop_front() {
            if reached.insert(n) {
                queue.extend(self.edges.iter().filter(|e| e.from == n && e.kind.is_structural()).map(|e| e.to));
            }
        }
        if let Some(id) = self.icns.keys().find(|id| !reached.contains(id)) {
            return Err(format!("{id} is not reachable from any root"));
        }
        let mut seen = BTreeSet::new();
        for icn in self.icns.values() {
            for m in &icn.members {
                if !seen.insert((m.utterance, m.ordinal)) {
                    return Err(format!("idea {}.{} sits in more than one cluster", m.utterance, m.ordinal));
                }
            }
        }
        Ok(())
    }
}
