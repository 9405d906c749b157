use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{MentalImageKind, ProcessGraph};
use crate::context::ContextState;
use crate::icn::{match_sets, Channel, Element, ElementSet, Icn};
use crate::ingest::problem_overlap;
use crate::ingest::{IdeaTriple, Lexicon};

const PROBLEM_OVERLAP: f64 = 0.6;
const PROBE_CUES: &[&str] = &["how many", "how much"];

/// Cue kinds consulted after the problem-overlap rule, in priority order.
const CUE_ORDER: [MentalImageKind; 6] = [
    MentalImageKind::ExpectedBehavior,
    MentalImageKind::NeededProblemChanges,
    MentalImageKind::NeededSolutionChanges,
    MentalImageKind::CausalityOfDifferences,
    MentalImageKind::ObservedBehavior,
    MentalImageKind::ExistingSolution,
];

/// Image suggested by a single idea.
pub fn member_hint(idea: &IdeaTriple, ctx: &ContextState, lex: &Lexicon) -> MentalImageKind {
    if problem_overlap(idea, ctx) >= PROBLEM_OVERLAP {
        return MentalImageKind::Problem;
    }
    for kind in CUE_ORDER {
        if idea.cues.iter().any(|c| lex.image_cues.get(c) == Some(&kind)) {
            return kind;
        }
        if kind == MentalImageKind::NeededProblemChanges && PROBE_CUES.iter().any(|c| idea.has_cue(c)) {
            return kind;
        }
    }
    MentalImageKind::DesiredSolution
}

/// Most frequent member hint; ties go to the hint seen first.
pub fn tag_image(icn: &Icn) -> MentalImageKind {
    let mut counts: BTreeMap<MentalImageKind, (usize, usize)> = BTreeMap::new();
    for (i, m) in icn.members.iter().enumerate() {
        counts.entry(m.hint).or_insert((0, i)).0 += 1;
    }
    counts
        .into_iter()
        .max_by(|(_, (ca, fa)), (_, (cb, fb))| ca.cmp(cb).then(fb.cmp(fa)))
        .map(|(k, _)| k)
        .unwrap_or(MentalImageKind::DesiredSolution)
}

/// Union of te and ev over every cluster carrying one of the kinds.
pub fn image_elements(g: &ProcessGraph, kinds: &[MentalImageKind]) -> ElementSet {
    g.icns
        .values()
        .filter(|i| kinds.contains(&i.image))
        .fold(ElementSet::default(), |acc, i| acc.union(&i.elements()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    TopDown,
    BottomUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaMeaning {
    MissingProcessing,
    MissingRequirement,
    WrongOutput,
    Surplus,
    None,
}

impl fmt::Display for DeltaMeaning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(v.as_str().unwrap_or_default())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageDelta {
    pub delta: Vec<Element>,
    pub meaning: DeltaMeaning,
    pub direction: Direction,
}

impl ImageDelta {
    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }
}

fn element_class(e: &Element, lex: &Lexicon, direction: Direction) -> DeltaMeaning {
    if e.channel == Channel::Output {
        return DeltaMeaning::WrongOutput;
    }
    if lex.image_cues.get(&e.lemma) == Some(&MentalImageKind::NeededProblemChanges) {
        return DeltaMeaning::MissingRequirement;
    }
    match direction {
        Direction::TopDown => DeltaMeaning::MissingProcessing,
        Direction::BottomUp => DeltaMeaning::Surplus,
    }
}

/// Elements of `a` with no partner in `b`, labelled by their majority class.
pub fn compare_images(a: &ElementSet, b: &ElementSet, lex: &Lexicon, direction: Direction) -> ImageDelta {
    let m = match_sets(a, b, lex);
    // A maximum matching can leave a synonym unpaired when its partner was
    // taken; such an element is still present in `b`.
    let delta: Vec<Element> = m
        .unmatched_a
        .into_iter()
        .filter(|e| !b.channel(e.channel).iter().any(|l| lex.same_meaning(l, &e.lemma)))
        .collect();
    let mut counts: BTreeMap<DeltaMeaning, usize> = BTreeMap::new();
    for e in &delta {
        *counts.entry(element_class(e, lex, direction)).or_default() += 1;
    }
    let meaning = counts
        .into_iter()
        .max_by(|(ka, ca), (kb, cb)| ca.cmp(cb).then(kb.cmp(ka)))
        .map(|(k, _)| k)
        .unwrap_or(DeltaMeaning::None);
    ImageDelta { delta, meaning, direction }
}

pub fn converged(td: &ImageDelta, bu: &ImageDelta, eps: usize) -> bool {
    td.len() <= eps && bu.len() <= eps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::icn::{IcnId, Member};
    use crate::ingest::NatureLabel;

    fn set(targets: &[&str]) -> ElementSet {
        targets.iter().map(|t| Element::new(Channel::Target, *t)).collect()
    }

    fn lex() -> Lexicon {
        Lexicon::parse("[synonyms]\nvalues, readings\n").unwrap()
    }

    #[test]
    fn identical_images_have_no_delta() {
        let x = set(&["dates", "values"]);
        let d = compare_images(&x, &x, &lex(), Direction::TopDown);
        assert!(d.is_empty());
        assert_eq!(d.meaning, DeltaMeaning::None);
    }

    #[test]
    fn empty_target_yields_everything_as_missing_processing() {
        let p = set(&["dates", "incorrect", "values", "most"]);
        let d = compare_images(&p, &ElementSet::default(), &lex(), Direction::TopDown);
        assert_eq!(d.len(), 4);
        assert_eq!(d.meaning, DeltaMeaning::MissingProcessing);
    }

    #[test]
    fn synonyms_count_as_present() {
        let d = compare_images(&set(&["values", "readings"]), &set(&["readings"]), &lex(), Direction::TopDown);
        assert!(d.is_empty());
    }

    #[test]
    fn output_elements_mean_wrong_output() {
        let a: ElementSet = [Element::new(Channel::Output, "max")].into_iter().collect();
        let d = compare_images(&a, &ElementSet::default(), &lex(), Direction::BottomUp);
        assert_eq!(d.meaning, DeltaMeaning::WrongOutput);
    }

    #[test]
    fn convergence_threshold() {
        let empty = ImageDelta { delta: vec![], meaning: DeltaMeaning::None, direction: Direction::TopDown };
        let three = compare_images(&set(&["a", "b", "c"]), &ElementSet::default(), &lex(), Direction::TopDown);
        assert!(converged(&empty, &empty, 0));
        assert!(!converged(&three, &empty, 0));
        assert!(converged(&three, &empty, 3));
    }

    #[test]
    fn tag_is_majority_hint_with_earliest_tie_break() {
        let member = |utt: u64, hint| Member {
            utterance: utt,
            ordinal: 0,
            idea_index: utt,
            elements: set(&["n"]),
            goal: None,
            nature: NatureLabel::SolvingHighlevel,
            hint,
        };
        let mut icn = Icn::new(IcnId(1), member(1, MentalImageKind::NeededProblemChanges));
        icn = crate::icn::update_te_ev(icn, member(2, MentalImageKind::DesiredSolution));
        assert_eq!(tag_image(&icn), MentalImageKind::NeededProblemChanges);
        icn = crate::icn::update_te_ev(icn, member(3, MentalImageKind::DesiredSolution));
        assert_eq!(tag_image(&icn), MentalImageKind::DesiredSolution);
    }
}
