use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{EdgeKind, ProcessGraph};
use crate::icn::{match_sets, similarity, Element, IcnId};
use crate::ingest::Lexicon;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacePair {
    pub a: IcnId,
    pub b: IcnId,
    pub similarity: f64,
    pub unmatched_a: Vec<Element>,
    pub unmatched_b: Vec<Element>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpaceMap {
    pub entries: Vec<IcnId>,
    pub pairs: Vec<SpacePair>,
}

/// High-level solution descriptions: roots and exploration alternatives,
/// compared pairwise on their typical elements.
pub fn solution_space_map(g: &ProcessGraph, lex: &Lexicon) -> SpaceMap {
    let mut entries: BTreeSet<IcnId> = g.roots().into_iter().collect();
    entries.extend(g.edges.iter().filter(|e| e.kind == EdgeKind::Exploration).map(|e| e.to));
    let entries: Vec<IcnId> = entries.into_iter().collect();
    let mut pairs = Vec::new();
    for (i, a) in entries.iter().enumerate() {
        for b in &entries[i + 1..] {
            let m = match_sets(&g.icns[a].te_set(), &g.icns[b].te_set(), lex);
            pairs.push(SpacePair {
                a: *a,
                b: *b,
                similarity: similarity(&m),
                unmatched_a: m.unmatched_a.into_iter().collect(),
                unmatched_b: m.unmatched_b.into_iter().collect(),
            });
        }
    }
    SpaceMap { entries, pairs }
}
