#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use icn_core::graph::{converged, EdgeKind, ProcessGraph};
use icn_core::icn::{Channel, Decision, Element, ElementSet, Icn, IcnConfig, IcnId};
use icn_core::ingest::{read_transcript, IdeaTriple, Lexicon, Utterance};
use icn_core::session::{open_session, EventKind, Session, SessionConfig};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn golden_lexicon() -> Arc<Lexicon> {
    Arc::new(Lexicon::load(data("case_study.lex")).expect("golden lexicon"))
}

pub fn golden_transcript() -> Vec<Utterance> {
    read_transcript(data("case_study.jsonl")).expect("golden transcript")
}

pub fn golden_problem() -> String {
    std::fs::read_to_string(data("problem.txt")).expect("problem statement").trim().to_string()
}

pub fn run(utterances: &[Utterance], lex: Arc<Lexicon>, cfg: SessionConfig, problem: &str) -> Session {
    let mut s = open_session(cfg, lex, problem).expect("open session");
    for u in utterances {
        s.process_utterance(u).expect("process utterance");
    }
    s
}

pub fn golden_session() -> Session {
    run(&golden_transcript(), golden_lexicon(), SessionConfig::default(), &golden_problem())
}

/// Cluster holding the first idea of utterance `u`.
pub fn icn_of_utterance(s: &Session, u: u64) -> IcnId {
    s.history().iter().find(|r| r.utterance == u).map(|r| r.icn).expect("utterance was placed")
}

// ---------------------------------------------------------------------------
// random corpora

/// 30 lemmas: six verbs, eighteen nouns, six modifiers.
pub struct RandomVocab {
    pub verbs: Vec<String>,
    pub nouns: Vec<String>,
    pub modifiers: Vec<String>,
}

impl RandomVocab {
    pub fn new() -> Self {
        RandomVocab {
            verbs: (0..6).map(|i| format!("v{i}")).collect(),
            nouns: (0..18).map(|i| format!("n{i}")).collect(),
            modifiers: (0..6).map(|i| format!("m{i}")).collect(),
        }
    }

    pub fn all(&self) -> impl Iterator<Item = &String> {
        self.verbs.iter().chain(&self.nouns).chain(&self.modifiers)
    }
}

pub fn random_lexicon_text(rng: &mut ChaCha8Rng) -> String {
    let v = RandomVocab::new();
    let mut out = String::from("[lemmas]\n");
    for n in v.nouns.iter().take(4) {
        out.push_str(&format!("{n}s = {n}\n"));
    }
    out.push_str("\n[synonyms]\n");
    let mut pool: Vec<&String> = v.nouns.iter().chain(&v.modifiers).collect();
    pool.shuffle(rng);
    for pair in pool.chunks(2).take(rng.gen_range(1..=4)) {
        out.push_str(&format!("{}, {}\n", pair[0], pair[1]));
    }
    out.push_str("\n[antonyms]\n");
    for _ in 0..rng.gen_range(1..=4) {
        let a = pool.choose(rng).unwrap();
        let b = pool.choose(rng).unwrap();
        if a != b {
            out.push_str(&format!("{a}, {b}\n"));
        }
    }
    out.push_str("\n[stopwords]\nthe, a, and\n\n[abstraction]\n");
    for l in v.all() {
        out.push_str(&format!("{l} = {}\n", rng.gen_range(0..4)));
    }
    out.push_str("\n[verb_relations]\n");
    for verb in &v.verbs {
        for _ in 0..rng.gen_range(1..=2) {
            let k = rng.gen_range(1..=3);
            let objects: Vec<&str> = v.nouns.choose_multiple(rng, k).map(String::as_str).collect();
            let mut line = format!("{verb}: {}", objects.join(", "));
            if rng.gen_bool(0.7) {
                line.push_str(&format!(" -> {}", v.nouns.choose(rng).unwrap()));
            }
            if rng.gen_bool(0.6) {
                line.push_str(&format!("; goal = {}", v.nouns.choose(rng).unwrap()));
            }
            out.push_str(&line);
            out.push('\n');
        }
    }
    out.push_str("\n[image_cues]\n");
    let kinds = ["expected_behavior", "observed_behavior", "needed_problem_changes", "existing_solution"];
    for (m, k) in v.modifiers.iter().skip(2).zip(kinds) {
        out.push_str(&format!("{m} = {k}\n"));
    }
    out.push_str("because = causality_of_differences\n");
    out
}

pub fn random_lexicon(rng: &mut ChaCha8Rng) -> Arc<Lexicon> {
    Arc::new(Lexicon::parse(&random_lexicon_text(rng)).expect("random lexicon parses"))
}

fn pick<'a>(rng: &mut ChaCha8Rng, from: &'a [String], max: usize) -> Vec<&'a str> {
    let n = rng.gen_range(0..=max);
    from.choose_multiple(rng, n).map(String::as_str).collect()
}

/// One idea per utterance, at most `max_ideas` of them. Most utterances are
/// pre-annotated; some are free text with a single verb.
pub fn random_transcript(rng: &mut ChaCha8Rng, max_ideas: usize) -> Vec<Utterance> {
    let v = RandomVocab::new();
    let n = rng.gen_range(1..=max_ideas);
    let mut t = 0;
    (1..=n as u64)
        .map(|id| {
            t += rng.gen_range(0..5000);
            let verb = if rng.gen_bool(0.9) { v.verbs.choose(rng).unwrap().as_str() } else { "" };
            let mut targets = pick(rng, &v.nouns[..8], 2);
            targets.extend(pick(rng, &v.nouns[8..], 1));
            let modifiers = pick(rng, &v.modifiers, 2);
            let mut words: Vec<&str> = Vec::new();
            if rng.gen_bool(0.15) {
                words.push("because");
            }
            words.push(verb);
            words.extend(&targets);
            words.extend(&modifiers);
            let text = words.into_iter().filter(|w| !w.is_empty()).collect::<Vec<_>>().join(" ");
            let u = Utterance::new(id, ["A", "B", "C"][id as usize % 3], t, if text.is_empty() { "the".into() } else { text });
            if rng.gen_bool(0.8) || verb.is_empty() {
                let mut triple = IdeaTriple::new(verb, &targets, &modifiers);
                if targets.is_empty() && modifiers.is_empty() && verb.is_empty() {
                    triple.modifiers.push(v.modifiers[0].clone());
                }
                u.with_triples(vec![triple])
            } else {
                u
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// brute-force assignment oracle

/// Largest set of pairs `(i, j)` with `rel(xs[i], ys[j])`, found by
/// exhaustive search; the first maximum in lexicographic order wins.
fn brute_matching(xs: &[String], ys: &[String], rel: &dyn Fn(&str, &str) -> bool) -> Vec<(usize, usize)> {
    fn go(i: usize, xs: &[String], ys: &[String], used: &mut Vec<bool>, rel: &dyn Fn(&str, &str) -> bool) -> Vec<(usize, usize)> {
        if i == xs.len() {
            return Vec::new();
        }
        let mut best: Vec<(usize, usize)> = Vec::new();
        let mut best_set = false;
        for j in 0..ys.len() {
            if used[j] || !rel(&xs[i], &ys[j]) {
                continue;
            }
            used[j] = true;
            let mut cand = vec![(i, j)];
            cand.extend(go(i + 1, xs, ys, used, rel));
            used[j] = false;
            if !best_set || cand.len() > best.len() {
                best = cand;
                best_set = true;
            }
        }
        let skip = go(i + 1, xs, ys, used, rel);
        if !best_set || skip.len() > best.len() {
            best = skip;
        }
        best
    }
    go(0, xs, ys, &mut vec![false; ys.len()], rel)
}

fn weight(c: Channel) -> u32 {
    match c {
        Channel::Verb | Channel::Target => 2,
        Channel::Output | Channel::Modifier => 1,
    }
}

pub struct OracleMatch {
    pub score: f64,
    pub matched_a: Vec<Element>,
    pub matched_b: Vec<Element>,
    pub unmatched_a: Vec<Element>,
    pub verb_matches: usize,
}

pub fn oracle_match(a: &ElementSet, b: &ElementSet, lex: &Lexicon) -> OracleMatch {
    let same = |x: &str, y: &str| lex.same_meaning(x, y);
    let (mut num, mut den) = (0u32, 0u32);
    let mut out = OracleMatch { score: 0.0, matched_a: vec![], matched_b: vec![], unmatched_a: vec![], verb_matches: 0 };
    let mut left_b: Vec<Element> = Vec::new();
    for c in [Channel::Verb, Channel::Target, Channel::Output, Channel::Modifier] {
        let xs: Vec<String> = a.channel(c).iter().cloned().collect();
        let ys: Vec<String> = b.channel(c).iter().cloned().collect();
        let m = brute_matching(&xs, &ys, &same);
        num += weight(c) * m.len() as u32;
        den += weight(c) * xs.len().max(ys.len()) as u32;
        if c == Channel::Verb {
            out.verb_matches = m.len();
        }
        for (i, x) in xs.iter().enumerate() {
            match m.iter().find(|p| p.0 == i) {
                Some((_, j)) => {
                    out.matched_a.push(Element::new(c, x.clone()));
                    out.matched_b.push(Element::new(c, ys[*j].clone()));
                }
                None => out.unmatched_a.push(Element::new(c, x.clone())),
            }
        }
        for (j, y) in ys.iter().enumerate() {
            if !m.iter().any(|p| p.1 == j) {
                left_b.push(Element::new(c, y.clone()));
            }
        }
    }
    let la: Vec<String> = out.unmatched_a.iter().map(|e| e.lemma.clone()).collect();
    let lb: Vec<String> = left_b.iter().map(|e| e.lemma.clone()).collect();
    let opposites = brute_matching(&la, &lb, &|x, y| lex.is_antonym(x, y)).len();
    if den > 0 {
        out.score = (f64::from(num) / f64::from(den) - 0.2 * opposites as f64).clamp(0.0, 1.0);
    }
    out
}

/// Typical elements recomputed from the members: present in at least half.
pub fn oracle_te(icn: &Icn) -> ElementSet {
    let n = icn.members.len();
    let mut counts: BTreeMap<Element, usize> = BTreeMap::new();
    for m in &icn.members {
        for e in m.elements.iter() {
            *counts.entry(e).or_default() += 1;
        }
    }
    counts.into_iter().filter(|(_, c)| 2 * c >= n).map(|(e, _)| e).collect()
}

fn all_member_elements(icn: &Icn) -> ElementSet {
    icn.members.iter().flat_map(|m| m.elements.iter()).collect()
}

/// Decision for an idea against the given candidate clusters of `graph`,
/// recomputed from first principles.
pub fn oracle_decision(
    elements: &ElementSet,
    goal: Option<&str>,
    graph: &ProcessGraph,
    candidates: &[IcnId],
    cfg: &IcnConfig,
    lex: &Lexicon,
) -> Decision {
    let mut scored: Vec<(&Icn, f64)> = candidates
        .iter()
        .map(|id| {
            let icn = &graph.icns[id];
            (icn, oracle_match(elements, &oracle_te(icn), lex).score)
        })
        .collect();
    scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.id.cmp(&y.0.id)));
    let Some(&(best, best_score)) = scored.first() else { return Decision::NewRoot };
    if best_score >= cfg.theta_join {
        return Decision::Join { icn: best.id };
    }
    let rank = |l: &str| lex.rank(l).unwrap_or(0);
    for (icn, _) in &scored {
        let all = all_member_elements(icn);
        let m = oracle_match(elements, &all, lex);
        if m.matched_b.is_empty() || m.matched_b.len() >= all.len() || elements.is_empty() {
            continue;
        }
        if (m.matched_b.len() as f64 / elements.len() as f64) < cfg.theta_detail {
            continue;
        }
        let floor = m.matched_b.iter().map(|e| rank(&e.lemma)).max().unwrap_or(0);
        if m.unmatched_a.iter().any(|e| rank(&e.lemma) > floor) {
            let detailed: BTreeSet<Element> = m.matched_b.into_iter().collect();
            return Decision::NewDetailing { parent: icn.id, detailed_elements: detailed.into_iter().collect() };
        }
    }
    if let Some(goal) = goal {
        for (icn, _) in &scored {
            let shares = icn.members.iter().filter_map(|m| m.goal.as_deref()).any(|g| lex.same_meaning(g, goal));
            if shares && oracle_match(elements, &oracle_te(icn), lex).verb_matches == 0 {
                let context = graph
                    .edges
                    .iter()
                    .find(|e| e.kind == EdgeKind::Exploration && e.to == icn.id)
                    .map_or(icn.id, |e| e.from);
                return Decision::NewExploration { context };
            }
        }
    }
    Decision::NewRoot
}

// ---------------------------------------------------------------------------
// invariants checked after every utterance

pub fn invariant_violations(s: &Session) -> Vec<String> {
    let mut out = Vec::new();
    let g = s.graph();

    // every idea sits in exactly one cluster
    let mut seen = BTreeSet::new();
    for icn in g.icns.values() {
        for m in &icn.members {
            if !seen.insert(m.idea_index) {
                out.push(format!("idea {} placed twice", m.idea_index));
            }
        }
    }
    let placed: BTreeSet<u64> = s.history().iter().map(|r| r.idea_index).collect();
    if seen != placed {
        out.push("cluster members differ from the decision history".into());
    }

    for icn in g.icns.values() {
        if icn.te.iter().any(|e| icn.ev.contains(e)) {
            out.push(format!("{} te and ev overlap", icn.id));
        }
        if icn.te_set() != oracle_te(icn) {
            out.push(format!("{} te is not the member majority", icn.id));
        }
        if icn.elements() != all_member_elements(icn) {
            out.push(format!("{} te and ev do not cover the members", icn.id));
        }
    }

    // detailing edges form a DAG
    let detailing: Vec<(IcnId, IcnId)> =
        g.edges.iter().filter(|e| e.kind == EdgeKind::Detailing).map(|e| (e.from, e.to)).collect();
    let mut remaining: BTreeSet<IcnId> = g.icns.keys().copied().collect();
    loop {
        let sources: Vec<IcnId> = remaining
            .iter()
            .copied()
            .filter(|n| !detailing.iter().any(|(f, t)| t == n && remaining.contains(f)))
            .collect();
        if sources.is_empty() {
            break;
        }
        for n in sources {
            remaining.remove(&n);
        }
    }
    if !remaining.is_empty() {
        out.push(format!("detailing cycle through {remaining:?}"));
    }
    if let Err(e) = g.check() {
        out.push(e);
    }

    let snap = s.snapshot();
    let m = &snap.metrics;
    if m.fulfilled_requirements.count + m.unconsidered_needs.count != snap.problem_image.len() {
        out.push("fulfilled + unconsidered differs from the problem image size".into());
    }

    for eps in 0..6 {
        if converged(&snap.top_down, &snap.bottom_up, eps) && !converged(&snap.top_down, &snap.bottom_up, eps + 1) {
            out.push(format!("convergence not monotone at eps {eps}"));
        }
    }
    if snap.converged != converged(&snap.top_down, &snap.bottom_up, s.config().session.eps) {
        out.push("snapshot convergence flag disagrees with the deltas".into());
    }

    let cap = s.config().session.adjustment_cap as u64;
    let mut per_idea: BTreeMap<(Option<u64>, u64), u64> = BTreeMap::new();
    for e in s.events().iter().filter(|e| e.kind == EventKind::AdjustmentIteration) {
        *per_idea.entry((e.utterance, e.payload["ordinal"].as_u64().unwrap_or(0))).or_default() += 1;
    }
    if let Some((k, n)) = per_idea.iter().find(|(_, n)| **n > cap) {
        out.push(format!("{n} adjustment iterations for {k:?} exceed the cap {cap}"));
    }
    out
}
