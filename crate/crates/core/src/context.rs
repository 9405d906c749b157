//! Three-tier working context: a decaying window of recent ideas, the
//! typical elements of live clusters, and the lexicon as long-term memory.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::ProcessGraph;
use crate::icn::IcnId;
use crate::ingest::{tokenize_content, IdeaTriple, Lexicon, RelationTemplate};

pub const TRIGGER_WEIGHT: f64 = 1.0;
pub const SYNONYM_WEIGHT: f64 = 0.8;
pub const RELATION_WEIGHT: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContextConfig {
    pub window: usize,
    pub decay: f64,
    pub evict_threshold: f64,
}

impl Default for ContextConfig {
    fn default() -> Self {
        ContextConfig { window: 5, decay: 0.7, evict_threshold: 0.1 }
    }
}

impl ContextConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.window == 0 {
            return Err("context.window must be at least 1".into());
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err("context.decay must be in (0, 1)".into());
        }
        if !(0.0..1.0).contains(&self.evict_threshold) {
            return Err("context.evict_threshold must be in [0, 1)".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmediateEntry {
    pub idea: IdeaTriple,
    pub icn: Option<IcnId>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumEntry {
    pub icn: IcnId,
    /// lemmas of the cluster's typical elements
    pub te: BTreeSet<String>,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConceptActivation {
    pub activated: BTreeMap<String, f64>,
    pub source: String,
}

impl ConceptActivation {
    pub fn weight(&self, lemma: &str) -> f64 {
        self.activated.get(lemma).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.activated.contains_key(lemma)
    }

    fn raise(&mut self, lemma: &str, w: f64) {
        let e = self.activated.entry(lemma.to_string()).or_insert(0.0);
        if w > *e {
            *e = w;
        }
    }

    /// Copy with extra lemmas raised to at least `w`.
    pub fn with_focus<'a>(&self, lemmas: impl IntoIterator<Item = &'a str>, w: f64) -> Self {
        let mut out = self.clone();
        for l in lemmas {
            out.raise(l, w);
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSet {
    pub relations: Vec<RelationTemplate>,
}

impl RelationSet {
    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextState {
    pub config: ContextConfig,
    pub immediate: VecDeque<ImmediateEntry>,
    pub medium: Vec<MediumEntry>,
    pub activation: ConceptActivation,
    /// content lemmas of the problem statement
    pub problem_lemmas: BTreeSet<String>,
}

impl ContextState {
    pub fn new(config: ContextConfig) -> Self {
        ContextState {
            config,
            immediate: VecDeque::new(),
            medium: Vec::new(),
            activation: ConceptActivation::default(),
            problem_lemmas: BTreeSet::new(),
        }
    }

    pub fn set_problem(&mut self, statement: &str, lex: &Lexicon) {
        self.problem_lemmas = tokenize_content(statement, lex).into_iter().collect();
    }

    pub fn window_lemmas(&self) -> BTreeSet<&str> {
        self.immediate.iter().flat_map(|e| e.idea.lemmas()).collect()
    }

    /// Clusters referenced by the immediate window, most recent first.
    pub fn window_icns(&self) -> Vec<IcnId> {
        let mut out = Vec::new();
        for e in self.immediate.iter().rev() {
            if let Some(id) = e.icn {
                if !out.contains(&id) {
                    out.push(id);
                }
            }
        }
        out
    }

    /// Append an idea to the window, dropping the oldest past capacity.
    pub fn advance(&mut self, idea: &IdeaTriple, icn: Option<IcnId>) {
        self.immediate.push_back(ImmediateEntry { idea: idea.clone(), icn, weight: 1.0 });
        while self.immediate.len() > self.config.window {
            self.immediate.pop_front();
        }
    }

    /// Bring the medium tier in line with the graph's live clusters.
    pub fn sync_medium(&mut self, graph: &ProcessGraph) {
        self.medium.retain(|m| graph.icns.contains_key(&m.icn));
        for (id, icn) in &graph.icns {
            let te = icn.te_lemmas();
            match self.medium.iter_mut().find(|m| m.icn == *id) {
                Some(m) => m.te = te,
                None => self.medium.push(MediumEntry { icn: *id, te, score: 0.0 }),
            }
        }
        self.rerank_medium();
    }

    /// Drop every reference to a cluster that left the graph.
    pub fn forget_icn(&mut self, id: IcnId) {
        self.medium.retain(|m| m.icn != id);
        for e in self.immediate.iter_mut() {
            if e.icn == Some(id) {
                e.icn = None;
            }
        }
    }

    fn rerank_medium(&mut self) {
        for m in self.medium.iter_mut() {
            m.score = m.te.iter().map(|l| self.activation.weight(l)).sum();
        }
        self.medium
            .sort_by(|a, b| b.score.total_cmp(&a.score).then(a.icn.cmp(&b.icn)));
    }

    /// The `k` best-ranked medium clusters.
    pub fn top_medium(&self, k: usize) -> Vec<IcnId> {
        self.medium.iter().take(k).map(|m| m.icn).collect()
    }

    fn boost(&mut self) {
        let act = &self.activation;
        for e in self.immediate.iter_mut() {
            if e.idea.lemmas().any(|l| act.contains(l)) {
                e.weight = 1.0;
            }
        }
    }

    /// Re-focus on a new activation without aging the window; used inside
    /// the adjustment loop.
    pub fn refocus(&self, act: &ConceptActivation) -> ContextState {
        let mut next = self.clone();
        next.activation = act.clone();
        next.boost();
        next.rerank_medium();
        next
    }
}

/// Activate the concept network around a trigger lemma: the trigger itself,
/// its synonyms, and every lemma that shares a relation template with them.
pub fn activate_concepts(trigger: &str, lex: &Lexicon) -> ConceptActivation {
    let mut act = ConceptActivation { activated: BTreeMap::new(), source: trigger.to_string() };
    act.raise(trigger, TRIGGER_WEIGHT);
    let mut closure: BTreeSet<&str> = BTreeSet::from([trigger]);
    for s in lex.synonyms(trigger) {
        act.raise(s, SYNONYM_WEIGHT);
        closure.insert(s.as_str());
    }
    for rel in lex.verb_relations.values().flatten() {
        if rel.lemmas().any(|l| closure.contains(l)) {
            for l in rel.lemmas() {
                act.raise(l, RELATION_WEIGHT);
            }
        }
    }
    act
}

/// Age the window, refresh entries the activation touches, evict faded
/// ones and re-rank the medium tier.
pub fn adjust_work_context(act: &ConceptActivation, ctx: &ContextState) -> ContextState {
    let mut next = ctx.clone();
    next.activation = act.clone();
    for e in next.immediate.iter_mut() {
        e.weight *= next.config.decay;
    }
    next.boost();
    let threshold = next.config.evict_threshold;
    next.immediate.retain(|e| e.weight >= threshold);
    next.rerank_medium();
    next
}

/// Templates of the verb whose object class meets the current activation;
/// all of the verb's templates when none does.
pub fn activate_relations(verb: &str, ctx: &ContextState, lex: &Lexicon) -> RelationSet {
    let all = lex.relations(verb);
    let filtered: Vec<RelationTemplate> = all
        .iter()
        .filter(|r| r.expected_object_class.iter().any(|o| ctx.activation.contains(o)))
        .cloned()
        .collect();
    RelationSet { relations: if filtered.is_empty() { all.to_vec() } else { filtered } }
}
