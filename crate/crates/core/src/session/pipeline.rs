//! The per-idea pipeline: activate, adjust the working context, relate to
//! the focus cluster, synthesize expected output and goal, re-adjust while
//! the result feels wrong, then place the idea in the graph.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::events::EventKind;
use super::{Batch, SessionConfig, SessionState};
use crate::canonical;
use crate::context::{activate_concepts, activate_relations, adjust_work_context, ContextState, TRIGGER_WEIGHT};
use crate::error::{Error, Result};
use crate::graph::{member_hint, tag_image, Edge, MentalImageKind, ProcessGraph};
use crate::icn::{assign, match_sets, update_te_ev, Channel, Decision, Element, ElementSet, Icn, IcnId, IdeaProfile, Member, MatchResult};
use crate::ingest::{classify_nature, IdeaTriple, Lexicon, RelationTemplate};
use crate::metrics::DecisionRecord;

const CAUSAL_CUES: &[&str] = &["because", "so that", "result of"];

/// Expected output and goal read off the best-fitting relation template.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SynthesizedMeaning {
    pub out: BTreeSet<String>,
    pub goal: BTreeSet<String>,
    /// hash of the matched pairs and the chosen template
    pub match_signature: u64,
    pub template: Option<RelationTemplate>,
    /// cluster the idea was matched against
    pub focus: Option<IcnId>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(*b)).wrapping_mul(0x0100_0000_01b3))
}

fn signature(m: &MatchResult, template: Option<&RelationTemplate>) -> u64 {
    let key = canonical::to_string(&(&m.matched_pairs, template)).expect("signature key serializes");
    fnv1a(key.as_bytes())
}

/// Relate the idea to the current focus cluster and derive Out and Goal.
pub fn synthesize(idea: &ElementSet, targets: &BTreeSet<String>, ctx: &ContextState, g: &ProcessGraph, lex: &Lexicon) -> SynthesizedMeaning {
    let verb = idea.verbs.iter().next().map(String::as_str).unwrap_or("");
    let relations = activate_relations(verb, ctx, lex).relations;
    let focus = ctx.top_medium(1).into_iter().find(|id| g.icns.contains_key(id));
    let focus_te = focus.map(|id| g.icns[&id].te_set()).unwrap_or_default();
    let m = match_sets(idea, &focus_te, lex);
    let pool: BTreeSet<String> = targets.iter().cloned().chain(focus_te.lemmas()).collect();
    let mut best: Option<(&RelationTemplate, usize)> = None;
    for r in &relations {
        let overlap = r.expected_object_class.iter().filter(|o| pool.contains(*o)).count();
        if best.is_none_or(|(_, b)| overlap > b) {
            best = Some((r, overlap));
        }
    }
    let template = best.map(|(r, _)| r.clone());
    let canon = |l: &String| lex.canonical(l).to_string();
    SynthesizedMeaning {
        out: template.iter().filter_map(|t| t.expected_output.as_ref()).map(canon).collect(),
        goal: template.iter().filter_map(|t| t.goal.as_ref()).map(canon).collect(),
        match_signature: signature(&m, template.as_ref()),
        template,
        focus,
    }
}

/// Out or Goal stands opposite to something currently active.
fn feels_incorrect(meaning: &SynthesizedMeaning, ctx: &ContextState, lex: &Lexicon) -> bool {
    let window = ctx.window_lemmas();
    let active: BTreeSet<&str> = ctx.activation.activated.keys().map(String::as_str).chain(window).collect();
    meaning.out.iter().chain(&meaning.goal).any(|l| active.iter().any(|a| lex.is_antonym(l, a)))
}

/// (window cluster, weight) and (medium cluster, score) pairs.
type ContextView = (Vec<(Option<IcnId>, f64)>, Vec<(IcnId, f64)>);

fn context_view(ctx: &ContextState) -> ContextView {
    (
        ctx.immediate.iter().map(|e| (e.icn, e.weight)).collect(),
        ctx.medium.iter().map(|m| (m.icn, m.score)).collect(),
    )
}

pub(super) fn process_idea(
    st: &mut SessionState,
    idea: &IdeaTriple,
    cfg: &SessionConfig,
    lex: &Lexicon,
    batch: &mut Batch,
) -> Result<()> {
    st.idea_count += 1;
    let utterance = idea.source_utterance;
    let ordinal = idea.ordinal;
    let elements = ElementSet::from_triple(idea).canonical(lex);
    let targets: BTreeSet<String> = elements.targets.clone();

    // activate and adjust the working context
    let trigger = idea.trigger().unwrap_or_default().to_string();
    let base = activate_concepts(lex.canonical(&trigger), lex);
    let adjusted = adjust_work_context(&base, &st.context);
    let (window, medium) = context_view(&adjusted);
    if (window.clone(), medium.clone()) != context_view(&st.context) {
        let top: Vec<_> = medium.into_iter().take(cfg.icn.candidates).collect();
        batch.push(EventKind::ContextAdjusted, json!({ "ordinal": ordinal, "trigger": trigger, "window": window, "medium": top }));
    }

    // relate, synthesize, and re-adjust while the result contradicts the context
    let mut ctx = adjusted.clone();
    let mut meaning = synthesize(&elements, &targets, &ctx, &st.graph, lex);
    if feels_incorrect(&meaning, &ctx, lex) {
        let mut iteration = 0;
        loop {
            iteration += 1;
            let focus = base.with_focus(meaning.out.iter().chain(&meaning.goal).map(String::as_str), TRIGGER_WEIGHT);
            ctx = adjusted.refocus(&focus);
            let next = synthesize(&elements, &targets, &ctx, &st.graph, lex);
            let changed = next.match_signature != meaning.match_signature;
            meaning = next;
            batch.push(
                EventKind::AdjustmentIteration,
                json!({ "ordinal": ordinal, "iteration": iteration, "changed": changed, "meaning": meaning }),
            );
            if !changed || iteration >= cfg.session.adjustment_cap {
                break;
            }
        }
    }

    // assign
    let mut profile_elements = elements.clone();
    for o in &meaning.out {
        profile_elements.insert(Element::new(Channel::Output, o.clone()));
    }
    let profile = IdeaProfile { elements: profile_elements, goal: meaning.goal.iter().next().cloned() };
    let nature = classify_nature(idea, &ctx, lex);
    let hint = member_hint(idea, &ctx, lex);
    let assignment = assign(&profile, &st.graph, &ctx, &cfg.icn, lex);
    let member = Member {
        utterance,
        ordinal,
        idea_index: st.idea_count,
        elements: profile.elements.clone(),
        goal: profile.goal.clone(),
        nature,
        hint,
    };

    let (id, added_elements) = match &assignment.decision {
        Decision::Join { icn } => {
            let before = st.graph.icns.remove(icn).ok_or_else(|| Error::Invariant(format!("{icn} vanished")))?;
            let known = before.elements();
            let added = profile.elements.iter().any(|e| !known.contains(&e));
            let mut after = update_te_ev(before, member);
            after.image = tag_image(&after);
            batch.push(
                EventKind::IcnJoined,
                json!({ "icn": icn, "ordinal": ordinal, "score": assignment.score, "added_elements": added, "te": after.te, "ev": after.ev }),
            );
            st.graph.insert(after);
            (*icn, added)
        }
        decision => {
            let id = st.graph.next_id();
            let mut icn = Icn::new(id, member);
            icn.image = tag_image(&icn);
            st.graph.insert(icn);
            batch.push(
                EventKind::IcnCreated,
                json!({ "icn": id, "ordinal": ordinal, "decision": decision, "score": assignment.score, "nature": nature, "hint": hint }),
            );
            let structural = match decision {
                Decision::NewDetailing { parent, detailed_elements } => Some(Edge::detailing(*parent, id, detailed_elements.clone())),
                Decision::NewExploration { context } => Some(Edge::exploration(*context, id)),
                _ => None,
            };
            let mut edges: Vec<Edge> = structural.into_iter().collect();
            let te = st.graph.icns[&id].te.clone();
            if !te.is_empty() {
                for other in st.graph.icns.values().filter(|o| o.id != id) {
                    if te.is_subset(&other.te) && te.len() < other.te.len() {
                        edges.push(Edge::generalization(other.id, id));
                    }
                }
            }
            for edge in edges {
                st.graph.add_edge(edge.clone())?;
                batch.push(EventKind::EdgeAdded, json!({ "edge": edge }));
            }
            (id, true)
        }
    };

    // explicit causal phrasing ties the idea to the one before it
    let causal = idea
        .cues
        .iter()
        .find(|c| CAUSAL_CUES.contains(&c.as_str()) || lex.image_cues.get(*c) == Some(&MentalImageKind::CausalityOfDifferences));
    if let Some(cue) = causal {
        if let Some(prev) = ctx.window_icns().into_iter().find(|p| *p != id && st.graph.icns.contains_key(p)) {
            let edge = if cue == "because" { Edge::causality(id, prev, cue) } else { Edge::causality(prev, id, cue) };
            st.graph.add_edge(edge.clone())?;
            batch.push(EventKind::EdgeAdded, json!({ "edge": edge }));
        }
    }

    let image = st.graph.icns[&id].image;
    batch.push(EventKind::ImageTagged, json!({ "icn": id, "ordinal": ordinal, "image": image, "hint": hint }));

    ctx.advance(idea, Some(id));
    ctx.sync_medium(&st.graph);
    st.context = ctx;
    st.history.push(DecisionRecord {
        idea_index: st.idea_count,
        utterance,
        ordinal,
        icn: id,
        decision: assignment.decision,
        score: assignment.score,
        added_elements,
        candidates: assignment.candidates,
    });
    Ok(())
}
