use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::elements::{Channel, Element, ElementSet};
use crate::ingest::{IdeaTriple, Lexicon};

const OPPOSITE_PENALTY: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub a: String,
    pub b: String,
    pub channel: Channel,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub matched_pairs: Vec<MatchedPair>,
    pub unmatched_a: BTreeSet<Element>,
    pub unmatched_b: BTreeSet<Element>,
    pub opposites: Vec<(Element, Element)>,
}

impl MatchResult {
    pub fn matched_in(&self, c: Channel) -> usize {
        self.matched_pairs.iter().filter(|p| p.channel == c).count()
    }

    /// Elements of the second operand that found a partner.
    pub fn matched_b(&self) -> ElementSet {
        self.matched_pairs.iter().map(|p| Element::new(p.channel, p.b.clone())).collect()
    }

    pub fn matched_a(&self) -> ElementSet {
        self.matched_pairs.iter().map(|p| Element::new(p.channel, p.a.clone())).collect()
    }

    fn size_a(&self, c: Channel) -> usize {
        self.matched_in(c) + self.unmatched_a.iter().filter(|e| e.channel == c).count()
    }

    fn size_b(&self, c: Channel) -> usize {
        self.matched_in(c) + self.unmatched_b.iter().filter(|e| e.channel == c).count()
    }
}

/// Maximum bipartite matching by augmenting paths. Left vertices are tried
/// in index order and right candidates in index order, so the result is
/// deterministic for sorted inputs.
pub(crate) fn max_bipartite(n_left: usize, n_right: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<Option<usize>> {
    fn augment(
        u: usize,
        n_right: usize,
        edge: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        right_of: &mut [Option<usize>],
    ) -> bool {
        for v in 0..n_right {
            if seen[v] || !edge(u, v) {
                continue;
            }
            seen[v] = true;
            if right_of[v].is_none_or(|w| augment(w, n_right, edge, seen, right_of)) {
                right_of[v] = Some(u);
                return true;
            }
        }
        false
    }

    let mut right_of = vec![None; n_right];
    for u in 0..n_left {
        let mut seen = vec![false; n_right];
        augment(u, n_right, &edge, &mut seen, &mut right_of);
    }
    let mut left_of = vec![None; n_left];
    for (v, u) in right_of.iter().enumerate() {
        if let Some(u) = u {
            left_of[*u] = Some(v);
        }
    }
    left_of
}

/// Channel-respecting maximum matching: two elements match when their
/// lemmas are equal or synonyms. Leftover elements that are antonyms of
/// each other are paired up as opposites.
pub fn match_sets(a: &ElementSet, b: &ElementSet, lex: &Lexicon) -> MatchResult {
    let mut out = MatchResult::default();
    for c in Channel::ALL {
        let xs: Vec<&String> = a.channel(c).iter().collect();
        let ys: Vec<&String> = b.channel(c).iter().collect();
        let pairing = max_bipartite(xs.len(), ys.len(), |i, j| lex.same_meaning(xs[i], ys[j]));
        let mut used = vec![false; ys.len()];
        for (i, m) in pairing.iter().enumerate() {
            match m {
                Some(j) => {
                    used[*j] = true;
                    out.matched_pairs.push(MatchedPair { a: xs[i].clone(), b: ys[*j].clone(), channel: c });
                }
                None => {
                    out.unmatched_a.insert(Element::new(c, xs[i].clone()));
                }
            }
        }
        for (j, y) in ys.iter().enumerate() {
            if !used[j] {
                out.unmatched_b.insert(Element::new(c, (*y).clone()));
            }
        }
    }
    let xs: Vec<&Element> = out.unmatched_a.iter().collect();
    let ys: Vec<&Element> = out.unmatched_b.iter().collect();
    let pairing = max_bipartite(xs.len(), ys.len(), |i, j| lex.is_antonym(&xs[i].lemma, &ys[j].lemma));
    out.opposites = pairing
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.map(|j| (xs[i].clone(), ys[j].clone())))
        .collect();
    out
}

pub fn match_triples(a: &IdeaTriple, b: &IdeaTriple, lex: &Lexicon) -> MatchResult {
    match_sets(&ElementSet::from_triple(a), &ElementSet::from_triple(b), lex)
}

/// Weighted matched fraction minus an opposite-meaning penalty, in [0, 1].
pub fn similarity(m: &MatchResult) -> f64 {
    let mut num = 0u32;
    let mut den = 0u32;
    for c in Channel::ALL {
        let w = c.weight_fifths();
        num += w * m.matched_in(c) as u32;
        den += w * m.size_a(c).max(m.size_b(c)) as u32;
    }
    if den == 0 {
        return 0.0;
    }
    let score = f64::from(num) / f64::from(den) - OPPOSITE_PENALTY * m.opposites.len() as f64;
    score.clamp(0.0, 1.0)
}
