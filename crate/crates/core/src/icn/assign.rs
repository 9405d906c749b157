use serde::{Deserialize, Serialize};

use super::elements::{Channel, Element, ElementSet};
use super::matching::{match_sets, similarity};
use super::{Icn, IcnId};
use crate::context::ContextState;
use crate::graph::ProcessGraph;
use crate::ingest::Lexicon;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IcnConfig {
    pub theta_join: f64,
    pub theta_detail: f64,
    pub candidates: usize,
}

impl Default for IcnConfig {
    fn default() -> Self {
        IcnConfig { theta_join: 0.5, theta_detail: 0.3, candidates: 8 }
    }
}

impl IcnConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.theta_join) || !(0.0..=1.0).contains(&self.theta_detail) {
            return Err("icn thresholds must be in [0, 1]".into());
        }
        if self.candidates == 0 {
            return Err("icn.candidates must be at least 1".into());
        }
        Ok(())
    }
}

/// What the assigner needs to know about an incoming idea.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdeaProfile {
    /// canonical elements, synthesized output included
    pub elements: ElementSet,
    pub goal: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decision {
    Join { icn: IcnId },
    NewDetailing { parent: IcnId, detailed_elements: Vec<Element> },
    NewExploration { context: IcnId },
    NewRoot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub decision: Decision,
    pub score: f64,
    /// clusters that were considered, by id
    pub candidates: Vec<IcnId>,
}

struct Scored<'g> {
    icn: &'g Icn,
    score: f64,
}

fn candidates<'g>(graph: &'g ProcessGraph, ctx: &ContextState, cfg: &IcnConfig) -> Vec<&'g Icn> {
    let mut ids = ctx.window_icns();
    for id in ctx.top_medium(cfg.candidates) {
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    let mut out: Vec<&Icn> = ids.iter().filter_map(|id| graph.icns.get(id)).collect();
    out.sort_by_key(|i| i.id);
    out
}

fn max_rank<'a>(lemmas: impl Iterator<Item = &'a str>, lex: &Lexicon) -> u32 {
    lemmas.map(|l| lex.rank(l).unwrap_or(0)).max().unwrap_or(0)
}

/// The candidate's element subset the idea elaborates, when the idea
/// covers enough of itself with a proper part of the candidate and adds
/// something more concrete.
fn detailing(idea: &IdeaProfile, icn: &Icn, cfg: &IcnConfig, lex: &Lexicon) -> Option<Vec<Element>> {
    let all = icn.elements();
    let m = match_sets(&idea.elements, &all, lex);
    let detailed = m.matched_b();
    if detailed.is_empty() || detailed.len() >= all.len() || idea.elements.is_empty() {
        return None;
    }
    let coverage = m.matched_pairs.len() as f64 / idea.elements.len() as f64;
    if coverage < cfg.theta_detail {
        return None;
    }
    let floor = max_rank(m.matched_pairs.iter().map(|p| p.b.as_str()), lex);
    let concrete = m.unmatched_a.iter().any(|e| lex.rank(&e.lemma).unwrap_or(0) > floor);
    concrete.then(|| detailed.iter().collect())
}

fn explores(idea: &IdeaProfile, icn: &Icn, lex: &Lexicon) -> bool {
    let Some(goal) = idea.goal.as_deref() else { return false };
    let shares_goal = icn.goals().iter().any(|g| lex.same_meaning(g, goal));
    shares_goal && match_sets(&idea.elements, &icn.te_set(), lex).matched_in(Channel::Verb) == 0
}

/// Place an idea: join the most similar cluster, open a detailing or
/// exploration cluster under an existing one, or start a new root.
/// Ties go to the earliest-created cluster.
pub fn assign(
    idea: &IdeaProfile,
    graph: &ProcessGraph,
    ctx: &ContextState,
    cfg: &IcnConfig,
    lex: &Lexicon,
) -> Assignment {
    let pool = candidates(graph, ctx, cfg);
    let ids: Vec<IcnId> = pool.iter().map(|i| i.id).collect();
    let mut scored: Vec<Scored> = pool
        .into_iter()
        .map(|icn| Scored { icn, score: similarity(&match_sets(&idea.elements, &icn.te_set(), lex)) })
        .collect();
    // stable sort keeps id order among equal scores
    scored.sort_by(|a, b| b.score.total_cmp(&a.score));

    let Some(best) = scored.first() else {
        return Assignment { decision: Decision::NewRoot, score: 0.0, candidates: ids };
    };
    if best.score >= cfg.theta_join {
        return Assignment { decision: Decision::Join { icn: best.icn.id }, score: best.score, candidates: ids };
    }
    for c in &scored {
        if let Some(detailed_elements) = detailing(idea, c.icn, cfg, lex) {
            return Assignment {
                decision: Decision::NewDetailing { parent: c.icn.id, detailed_elements },
                score: c.score,
                candidates: ids,
            };
        }
    }
    for c in &scored {
        if explores(idea, c.icn, lex) {
            return Assignment {
                decision: Decision::NewExploration { context: graph.context_of(c.icn.id) },
                score: c.score,
                candidates: ids,
            };
        }
    }
    Assignment { decision: Decision::NewRoot, score: best.score, candidates: ids }
}
