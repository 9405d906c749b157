//! The eight problem-solving metric families, computed over a graph
//! snapshot and the per-idea decision history.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{compare_images, image_elements, Direction, EdgeKind, MentalImageKind, ProcessGraph};
use crate::icn::{match_sets, Channel, Decision, Element, ElementSet, IcnId};
use crate::ingest::Lexicon;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// ideas between two touches of a cluster that count as a return
    pub backtrack_gap: u64,
    /// ideas after a return in which a needed-change cluster resolves it
    pub resolution_window: u64,
    pub repetition_similarity: f64,
    /// ideas after a repetition in which a detailing makes it productive
    pub productivity_window: u64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { backtrack_gap: 3, resolution_window: 3, repetition_similarity: 0.9, productivity_window: 2 }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.repetition_similarity) {
            return Err("metrics.repetition_similarity must be in [0, 1]".into());
        }
        if self.backtrack_gap == 0 {
            return Err("metrics.backtrack_gap must be at least 1".into());
        }
        Ok(())
    }
}

/// How one idea was placed in the graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    /// 1-based position of the idea in the session
    pub idea_index: u64,
    pub utterance: u64,
    pub ordinal: u32,
    pub icn: IcnId,
    pub decision: Decision,
    pub score: f64,
    /// whether the idea brought elements its cluster did not have
    pub added_elements: bool,
    /// clusters the assigner considered
    #[serde(default)]
    pub candidates: Vec<IcnId>,
}

/// A pointer to the graph or transcript item behind a metric contribution.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "ref", rename_all = "snake_case")]
pub enum Evidence {
    Icn { id: IcnId, note: String },
    Edge { from: IcnId, to: IcnId, kind: EdgeKind },
    Utterance { id: u64, ordinal: u32, note: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Fulfilled {
    pub count: usize,
    pub ratio: f64,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Exploration {
    pub alternative_count: usize,
    pub switch_count: usize,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Substantiated {
    pub ratio: f64,
    pub orphan_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Backtracking {
    pub count: usize,
    pub resolved_count: usize,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContradictionPair {
    pub a: IcnId,
    pub b: IcnId,
    pub a_element: Element,
    pub b_element: Element,
    /// `antonym` or `target_conflict`
    pub kind: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Contradictions {
    pub count: usize,
    pub pairs: Vec<ContradictionPair>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Repetitions {
    pub count: usize,
    pub productive_count: usize,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Unconsidered {
    pub count: usize,
    pub ratio: f64,
    pub elements: Vec<Element>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Unexplored {
    pub count: usize,
    pub icn_ids: Vec<IcnId>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub fulfilled_requirements: Fulfilled,
    pub exploration: Exploration,
    pub substantiated_decisions: Substantiated,
    pub backtracking: Backtracking,
    pub contradictions: Contradictions,
    pub repetitions: Repetitions,
    pub unconsidered_needs: Unconsidered,
    pub unexplored_items: Unexplored,
    pub at_utterance: u64,
}

impl MetricsReport {
    pub fn evidence(&self) -> BTreeSet<Evidence> {
        let mut out: BTreeSet<Evidence> = BTreeSet::new();
        out.extend(self.fulfilled_requirements.evidence.iter().cloned());
        out.extend(self.exploration.evidence.iter().cloned());
        out.extend(self.backtracking.evidence.iter().cloned());
        out.extend(self.repetitions.evidence.iter().cloned());
        for p in &self.contradictions.pairs {
            out.insert(Evidence::Icn { id: p.a, note: format!("{} vs {}", p.a_element, p.b_element) });
        }
        for id in &self.unexplored_items.icn_ids {
            out.insert(Evidence::Icn { id: *id, note: "unexplored".into() });
        }
        out
    }

    /// Typed bounds plus the fulfilled/unconsidered partition.
    pub fn check(&self, problem_size: usize) -> Result<(), String> {
        let ratios = [
            self.fulfilled_requirements.ratio,
            self.substantiated_decisions.ratio,
            self.unconsidered_needs.ratio,
        ];
        if ratios.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err("metric ratio outside [0, 1]".into());
        }
        if self.fulfilled_requirements.count + self.unconsidered_needs.count != problem_size {
            return Err(format!(
                "fulfilled {} + unconsidered {} != problem image size {problem_size}",
                self.fulfilled_requirements.count, self.unconsidered_needs.count
            ));
        }
        if problem_size > 0
            && (self.fulfilled_requirements.ratio + self.unconsidered_needs.ratio - 1.0).abs() > 1e-9
        {
            return Err("fulfilled and unconsidered ratios do not sum to 1".into());
        }
        Ok(())
    }
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

fn root_of(g: &ProcessGraph, mut id: IcnId) -> IcnId {
    for _ in 0..=g.icns.len() {
        match g.edges.iter().find(|e| e.to == id && e.kind.is_structural()) {
            Some(e) => id = e.from,
            None => break,
        }
    }
    id
}

/// Problem image: the statement's elements plus clusters tagged `problem`.
pub fn problem_image(g: &ProcessGraph, statement: &ElementSet) -> ElementSet {
    statement.union(&image_elements(g, &[MentalImageKind::Problem]))
}

/// Union of the solution-side images.
pub fn solution_image(g: &ProcessGraph) -> ElementSet {
    image_elements(g, &[MentalImageKind::DesiredSolution, MentalImageKind::ExistingSolution])
}

pub fn compute(
    g: &ProcessGraph,
    statement: &ElementSet,
    history: &[DecisionRecord],
    lex: &Lexicon,
    cfg: &MetricsConfig,
    at_utterance: u64,
) -> MetricsReport {
    let problem = problem_image(g, statement);
    let solution = solution_image(g);

    // (1) and (7): problem requirements addressed by solution clusters
    let delta = compare_images(&problem, &solution, lex, Direction::TopDown);
    let missing: BTreeSet<&Element> = delta.delta.iter().collect();
    let mut fulfilled = Fulfilled::default();
    for e in problem.iter().filter(|e| !missing.contains(e)) {
        fulfilled.count += 1;
        let by = g.icns.values().find(|i| {
            i.image.is_solution() && i.elements().channel(e.channel).iter().any(|l| lex.same_meaning(l, &e.lemma))
        });
        if let Some(icn) = by {
            fulfilled.evidence.push(Evidence::Icn { id: icn.id, note: e.to_string() });
        }
    }
    fulfilled.ratio = ratio(fulfilled.count, problem.len());
    let unconsidered = Unconsidered {
        count: delta.delta.len(),
        ratio: ratio(delta.delta.len(), problem.len()),
        elements: delta.delta.clone(),
    };

    // (2) alternatives opened and switches between solution lines
    let mut exploration = Exploration::default();
    for e in g.edges.iter().filter(|e| e.kind == EdgeKind::Exploration) {
        exploration.alternative_count += 1;
        exploration.evidence.push(Evidence::Edge { from: e.from, to: e.to, kind: e.kind });
    }
    let roots: Vec<IcnId> = history.iter().filter(|r| g.icns.contains_key(&r.icn)).map(|r| root_of(g, r.icn)).collect();
    exploration.switch_count = roots.windows(2).filter(|w| w[0] != w[1]).count();

    // (3) decisions motivated by earlier ones
    let orphans = history
        .iter()
        .filter(|r| !matches!(r.decision, Decision::Join { .. } | Decision::NewDetailing { .. }))
        .count();
    let substantiated = Substantiated { ratio: ratio(history.len() - orphans, history.len()), orphan_count: orphans };

    // (4) returns to a cluster left behind, resolved by a needed change
    let mut backtracking = Backtracking::default();
    for (i, r) in history.iter().enumerate() {
        let Decision::Join { icn } = r.decision else { continue };
        let Some(prev) = history[..i].iter().rev().find(|p| p.icn == icn) else { continue };
        if r.idea_index - prev.idea_index < cfg.backtrack_gap {
            continue;
        }
        backtracking.count += 1;
        backtracking.evidence.push(Evidence::Utterance { id: r.utterance, ordinal: r.ordinal, note: format!("back to {icn}") });
        let resolved = history[i + 1..]
            .iter()
            .take_while(|n| n.idea_index - r.idea_index <= cfg.resolution_window)
            .filter_map(|n| g.icns.get(&n.icn))
            .any(|c| {
                matches!(c.image, MentalImageKind::NeededSolutionChanges | MentalImageKind::NeededProblemChanges)
            });
        if resolved {
            backtracking.resolved_count += 1;
        }
    }

    // (5) opposite meanings across images, conflicting changes to the same target
    let mut contradictions = Contradictions::default();
    let icns: Vec<_> = g.icns.values().collect();
    for (i, a) in icns.iter().enumerate() {
        for b in &icns[i + 1..] {
            if a.image == b.image {
                continue;
            }
            let m = match_sets(&a.elements(), &b.elements(), lex);
            for (x, y) in m.opposites {
                contradictions.pairs.push(ContradictionPair { a: a.id, b: b.id, a_element: x, b_element: y, kind: "antonym".into() });
            }
            let pair = match (a.image, b.image) {
                (MentalImageKind::NeededSolutionChanges, MentalImageKind::ExistingSolution) => Some((a, b)),
                (MentalImageKind::ExistingSolution, MentalImageKind::NeededSolutionChanges) => Some((b, a)),
                _ => None,
            };
            if let Some((need, have)) = pair {
                let verbs_meet = need.slots.verbs.keys().any(|v| have.slots.verbs.keys().any(|w| lex.same_meaning(v, w)));
                if verbs_meet {
                    continue;
                }
                for t in need.te.iter().filter(|e| e.channel == Channel::Target) {
                    if let Some(u) = have.te.iter().find(|u| u.channel == Channel::Target && lex.same_meaning(&u.lemma, &t.lemma)) {
                        contradictions.pairs.push(ContradictionPair {
                            a: need.id,
                            b: have.id,
                            a_element: t.clone(),
                            b_element: u.clone(),
                            kind: "target_conflict".into(),
                        });
                    }
                }
            }
        }
    }
    contradictions.count = contradictions.pairs.len();

    // (6) restatements that add nothing, productive when detailing follows
    let mut repetitions = Repetitions::default();
    for (i, r) in history.iter().enumerate() {
        if !matches!(r.decision, Decision::Join { .. }) || r.score < cfg.repetition_similarity || r.added_elements {
            continue;
        }
        repetitions.count += 1;
        repetitions.evidence.push(Evidence::Utterance { id: r.utterance, ordinal: r.ordinal, note: format!("repeats {}", r.icn) });
        let productive = history[i + 1..]
            .iter()
            .take_while(|n| n.idea_index - r.idea_index <= cfg.productivity_window)
            .any(|n| matches!(n.decision, Decision::NewDetailing { .. }));
        if productive {
            repetitions.productive_count += 1;
        }
    }

    // (8) desired solutions nobody elaborated
    let icn_ids: Vec<IcnId> = g
        .icns
        .values()
        .filter(|i| i.image == MentalImageKind::DesiredSolution)
        .filter(|i| g.outgoing(i.id, EdgeKind::Detailing).next().is_none())
        .map(|i| i.id)
        .collect();

    MetricsReport {
        fulfilled_requirements: fulfilled,
        exploration,
        substantiated_decisions: substantiated,
        backtracking,
        contradictions,
        repetitions,
        unconsidered_needs: unconsidered,
        unexplored_items: Unexplored { count: icn_ids.len(), icn_ids },
        at_utterance,
    }
}

/// Signed per-family change between two reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsDelta {
    pub from_utterance: u64,
    pub to_utterance: u64,
    pub fulfilled_requirements: i64,
    pub fulfilled_ratio: f64,
    pub alternative_count: i64,
    pub switch_count: i64,
    pub substantiated_ratio: f64,
    pub orphan_count: i64,
    pub backtracking: i64,
    pub backtracking_resolved: i64,
    pub contradictions: i64,
    pub repetitions: i64,
    pub repetitions_productive: i64,
    pub unconsidered_needs: i64,
    pub unexplored_items: i64,
    pub new_evidence: Vec<Evidence>,
}

impl MetricsDelta {
    pub fn is_zero(&self) -> bool {
        let counts = [
            self.fulfilled_requirements,
            self.alternative_count,
            self.switch_count,
            self.orphan_count,
            self.backtracking,
            self.backtracking_resolved,
            self.contradictions,
            self.repetitions,
            self.repetitions_productive,
            self.unconsidered_needs,
            self.unexplored_items,
        ];
        counts.iter().all(|c| *c == 0)
            && self.fulfilled_ratio == 0.0
            && self.substantiated_ratio == 0.0
            && self.new_evidence.is_empty()
    }
}

fn diff(cur: usize, prev: usize) -> i64 {
    cur as i64 - prev as i64
}

pub fn delta_report(prev: &MetricsReport, cur: &MetricsReport) -> Result<MetricsDelta> {
    if prev.at_utterance > cur.at_utterance {
        return Err(Error::DeltaOrder { prev: prev.at_utterance, cur: cur.at_utterance });
    }
    let seen = prev.evidence();
    Ok(MetricsDelta {
        from_utterance: prev.at_utterance,
        to_utterance: cur.at_utterance,
        fulfilled_requirements: diff(cur.fulfilled_requirements.count, prev.fulfilled_requirements.count),
        fulfilled_ratio: cur.fulfilled_requirements.ratio - prev.fulfilled_requirements.ratio,
        alternative_count: diff(cur.exploration.alternative_count, prev.exploration.alternative_count),
        switch_count: diff(cur.exploration.switch_count, prev.exploration.switch_count),
        substantiated_ratio: cur.substantiated_decisions.ratio - prev.substantiated_decisions.ratio,
        orphan_count: diff(cur.substantiated_decisions.orphan_count, prev.substantiated_decisions.orphan_count),
        backtracking: diff(cur.backtracking.count, prev.backtracking.count),
        backtracking_resolved: diff(cur.backtracking.resolved_count, prev.backtracking.resolved_count),
        contradictions: diff(cur.contradictions.count, prev.contradictions.count),
        repetitions: diff(cur.repetitions.count, prev.repetitions.count),
        repetitions_productive: diff(cur.repetitions.productive_count, prev.repetitions.productive_count),
        unconsidered_needs: diff(cur.unconsidered_needs.count, prev.unconsidered_needs.count),
        unexplored_items: diff(cur.unexplored_items.count, prev.unexplored_items.count),
        new_evidence: cur.evidence().into_iter().filter(|e| !seen.contains(e)).collect(),
    })
}
