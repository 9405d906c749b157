use std::fmt;

use serde::{Deserialize, Serialize};

use super::{IdeaTriple, Lexicon};
use crate::context::ContextState;
use crate::graph::MentalImageKind;

/// What an idea does in the discussion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NatureLabel {
    ProblemUnderstanding,
    SolvingHighlevel,
    SolvingDetailing,
    Comparison,
    ProConAnalysis,
    MissingFragment,
    Localization,
    RequiredChange,
    Combination,
}

impl fmt::Display for NatureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(v.as_str().unwrap_or_default())
    }
}

const PROBE_CUES: &[&str] = &["how many", "how much", "what if", "do we know", "?"];
const EVALUATION_CUES: &[&str] = &["might work", "would work", "could work", "should work", "will work", "won't work"];
const COMPARISON_CUES: &[&str] = &["better than", "worse than", "compared to", "versus", "instead of"];
const MISSING_CUES: &[&str] = &["missing", "what about", "we still need"];
const COMBINATION_CUES: &[&str] = &["combine", "together", "both"];
const CHANGE_VERBS: &[&str] = &["change", "shift", "subtract", "modify", "move", "swap"];

/// Discourse cues recognised regardless of the lexicon.
pub(crate) const BUILTIN_CUES: &[&str] = &[
    "how many", "how much", "what if", "do we know",
    "might work", "would work", "could work", "should work", "will work", "won't work",
    "better than", "worse than", "compared to", "versus", "instead of",
    "missing", "what about", "we still need",
    "combine", "together", "both",
];

const PROBLEM_OVERLAP: f64 = 0.6;

fn any_cue(idea: &IdeaTriple, list: &[&str]) -> bool {
    list.iter().any(|c| idea.has_cue(c))
}

fn cue_of_kind(idea: &IdeaTriple, lex: &Lexicon, kind: MentalImageKind) -> bool {
    idea.cues.iter().any(|c| lex.image_cues.get(c) == Some(&kind))
}

/// Share of the idea's lemmas that also occur in the problem statement.
pub(crate) fn problem_overlap(idea: &IdeaTriple, ctx: &ContextState) -> f64 {
    let lemmas: std::collections::BTreeSet<&str> = idea.lemmas().collect();
    if lemmas.is_empty() || ctx.problem_lemmas.is_empty() {
        return 0.0;
    }
    let hit = lemmas.iter().filter(|l| ctx.problem_lemmas.contains(**l)).count();
    hit as f64 / lemmas.len() as f64
}

/// Rule cascade; first rule that fires wins.
pub fn classify_nature(idea: &IdeaTriple, ctx: &ContextState, lex: &Lexicon) -> NatureLabel {
    if problem_overlap(idea, ctx) >= PROBLEM_OVERLAP {
        return NatureLabel::ProblemUnderstanding;
    }
    let probe = cue_of_kind(idea, lex, MentalImageKind::NeededProblemChanges);
    if probe || any_cue(idea, PROBE_CUES) {
        return NatureLabel::RequiredChange;
    }
    if CHANGE_VERBS.contains(&idea.verb.as_str()) {
        let window = ctx.window_lemmas();
        if idea.targets().any(|t| window.contains(t)) {
            return if probe { NatureLabel::RequiredChange } else { NatureLabel::SolvingDetailing };
        }
    }
    if any_cue(idea, EVALUATION_CUES) {
        return NatureLabel::ProConAnalysis;
    }
    if any_cue(idea, COMPARISON_CUES) {
        return NatureLabel::Comparison;
    }
    if any_cue(idea, MISSING_CUES) {
        return NatureLabel::MissingFragment;
    }
    if cue_of_kind(idea, lex, MentalImageKind::NeededSolutionChanges) {
        return NatureLabel::Localization;
    }
    if any_cue(idea, COMBINATION_CUES) {
        return NatureLabel::Combination;
    }
    NatureLabel::SolvingHighlevel
}
