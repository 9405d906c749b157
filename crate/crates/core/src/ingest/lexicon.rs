//! Declarative lexicon: lemma table, synonym sets, antonyms, stopwords,
//! abstraction ranks, verb relation templates and image cues.
//!
//! The on-disk format is a sectioned text file:
//!
//! ```text
//! # comment
//! [lemmas]
//! adding = add
//! add up = add-up
//! [synonyms]
//! add, add-up, sum
//! [antonyms]
//! gap, contiguous
//! [stopwords]
//! the, a, of
//! [abstraction]
//! add = 1
//! [verb_relations]
//! add: numbers, combinations -> total; goal = sum
//! [image_cues]
//! must change = expected_behavior
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MentalImageKind;

/// One meaning a verb can carry: the kind of objects it applies to, what it
/// produces and what it is for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationTemplate {
    pub verb: String,
    pub expected_object_class: BTreeSet<String>,
    pub expected_output: Option<String>,
    pub goal: Option<String>,
}

impl RelationTemplate {
    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.verb.as_str())
            .chain(self.expected_object_class.iter().map(String::as_str))
            .chain(self.expected_output.as_deref())
            .chain(self.goal.as_deref())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    /// surface form -> lemma; surfaces may span several words
    pub lemmas: BTreeMap<String, String>,
    /// in file order; the first member is the set's representative
    pub synonym_sets: Vec<Vec<String>>,
    /// stored with the smaller lemma first
    pub antonym_pairs: BTreeSet<(String, String)>,
    pub stopwords: BTreeSet<String>,
    pub abstraction_rank: BTreeMap<String, u32>,
    pub verb_relations: BTreeMap<String, Vec<RelationTemplate>>,
    /// cue pattern (one or more words) -> image hint
    pub image_cues: BTreeMap<String, MentalImageKind>,

    synonym_index: BTreeMap<String, usize>,
    vocabulary: BTreeSet<String>,
    max_surface_words: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Lemmas,
    Synonyms,
    Antonyms,
    Stopwords,
    Abstraction,
    VerbRelations,
    ImageCues,
}

impl Section {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "lemmas" => Section::Lemmas,
            "synonyms" => Section::Synonyms,
            "antonyms" => Section::Antonyms,
            "stopwords" => Section::Stopwords,
            "abstraction" => Section::Abstraction,
            "verb_relations" => Section::VerbRelations,
            "image_cues" => Section::ImageCues,
            _ => return None,
        })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::LexiconParse { line, message: message.into() }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn key_value(line: usize, s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| parse_err(line, format!("expected `key = value`, got `{s}`")))?;
    let (k, v) = (normalize_phrase(k), v.trim().to_lowercase());
    if k.is_empty() || v.is_empty() {
        return Err(parse_err(line, "empty key or value"));
    }
    Ok((k, v))
}

/// Lowercase and collapse internal whitespace.
pub(crate) fn normalize_phrase(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_relation(line: usize, s: &str) -> Result<RelationTemplate> {
    let (verb, rest) = s
        .split_once(':')
        .ok_or_else(|| parse_err(line, "relation needs `verb: objects [-> output] [; goal = g]`"))?;
    let verb = verb.trim().to_lowercase();
    if verb.is_empty() || verb.contains(char::is_whitespace) {
        return Err(parse_err(line, "relation verb must be a single lemma"));
    }
    let (body, goal) = match rest.split_once(';') {
        Some((body, goal)) => {
            let goal = goal.trim();
            let g = goal
                .strip_prefix("goal")
                .map(|g| g.trim_start())
                .and_then(|g| g.strip_prefix('='))
                .ok_or_else(|| parse_err(line, format!("expected `goal = lemma`, got `{goal}`")))?
                .trim()
                .to_lowercase();
            if g.is_empty() {
                return Err(parse_err(line, "empty goal"));
            }
            (body, Some(g))
        }
        None => (rest, None),
    };
    let (objects, output) = match body.split_once("->") {
        Some((o, out)) => {
            let out = out.trim().to_lowercase();
            if out.is_empty() {
                return Err(parse_err(line, "empty output after `->`"));
            }
            (o, Some(out))
        }
        None => (body, None),
    };
    Ok(RelationTemplate {
        verb,
        expected_object_class: split_list(objects).into_iter().collect(),
        expected_output: output,
        goal,
    })
}

impl Lexicon {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lex = Lexicon::default();
        let mut section = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line, "unterminated section header"))?;
                section = Some(
                    Section::parse(name.trim())
                        .ok_or_else(|| parse_err(line, format!("unknown section `{name}`")))?,
                );
                continue;
            }
            let Some(section) = section else {
                return Err(parse_err(line, "entry outside of any section"));
            };
            match section {
                Section::Lemmas => {
                    let (surface, lemma) = key_value(line, content)?;
                    if lemma.contains(char::is_whitespace) {
                        return Err(parse_err(line, "lemma must be a single token"));
                    }
                    lex.lemmas.insert(surface, lemma);
                }
                Section::Synonyms => {
                    let mut set = Vec::new();
                    for l in split_list(content) {
                        if !set.contains(&l) {
                            set.push(l);
                        }
                    }
                    if set.len() < 2 {
                        return Err(parse_err(line, "synonym set needs at least two lemmas"));
                    }
                    lex.synonym_sets.push(set);
                }
                Section::Antonyms => {
                    let pair = split_list(content);
                    let [a, b] = <[String; 2]>::try_from(pair)
                        .map_err(|_| parse_err(line, "antonym line needs exactly two lemmas"))?;
                    if a == b {
                        return Err(parse_err(line, "a lemma cannot be its own antonym"));
                    }
                    lex.antonym_pairs.insert(if a < b { (a, b) } else { (b, a) });
                }
                Section::Stopwords => lex.stopwords.extend(split_list(content)),
                Section::Abstraction => {
                    let (lemma, rank) = key_value(line, content)?;
                    let rank = rank
                        .parse::<u32>()
                        .map_err(|_| parse_err(line, format!("rank must be a non-negative integer, got `{rank}`")))?;
                    lex.abstraction_rank.insert(lemma, rank);
                }
                Section::VerbRelations => {
                    let rel = parse_relation(line, content)?;
                    lex.verb_relations.entry(rel.verb.clone()).or_default().push(rel);
                }
                Section::ImageCues => {
                    let (pattern, kind) = key_value(line, content)?;
                    let kind = kind
                        .parse::<MentalImageKind>()
                        .map_err(|_| parse_err(line, format!("unknown image kind `{kind}`")))?;
                    lex.image_cues.insert(pattern, kind);
                }
            }
        }
        lex.finish()?;
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Check invariants and build lookup indexes.
    fn finish(&mut self) -> Result<()> {
        self.synonym_index.clear();
        for (i, set) in self.synonym_sets.iter().enumerate() {
            for lemma in set {
                if let Some(prev) = self.synonym_index.insert(lemma.clone(), i) {
                    if prev != i {
                        return Err(Error::LexiconValidation {
                            lemma: lemma.clone(),
                            message: format!("appears in synonym sets {} and {}", prev + 1, i + 1),
                        });
                    }
                }
            }
        }
        for rels in self.verb_relations.values() {
            for rel in rels {
                for lemma in rel.lemmas() {
                    if !self.abstraction_rank.contains_key(lemma) {
                        return Err(Error::LexiconValidation {
                            lemma: lemma.to_string(),
                            message: "used in verb_relations but has no abstraction rank".into(),
                        });
                    }
                }
            }
        }

        let mut vocab: BTreeSet<String> = self.lemmas.values().cloned().collect();
        vocab.extend(self.synonym_sets.iter().flatten().cloned());
        vocab.extend(self.antonym_pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]));
        vocab.extend(self.abstraction_rank.keys().cloned());
        for rels in self.verb_relations.values() {
            vocab.extend(rels.iter().flat_map(|r| r.lemmas().map(String::from)));
        }
        self.vocabulary = vocab;
        self.max_surface_words = self
            .lemmas
            .keys()
            .map(|k| k.split(' ').count())
            .max()
            .unwrap_or(1);
        Ok(())
    }

    /// Lemma for a surface form, if the table lists one.
    pub fn lemma_of(&self, surface: &str) -> Option<&str> {
        self.lemmas.get(surface).map(String::as_str)
    }

    /// Map a token to its lemma. Returns the lemma and whether it is known.
    pub fn normalize(&self, token: &str) -> (String, bool) {
        let token = token.to_lowercase();
        if let Some(l) = self.lemmas.get(&token) {
            return (l.clone(), true);
        }
        let known = self.vocabulary.contains(&token);
        (token, known)
    }

    pub fn knows(&self, lemma: &str) -> bool {
        self.vocabulary.contains(lemma)
    }

    pub fn max_surface_words(&self) -> usize {
        self.max_surface_words.max(1)
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    /// Representative of the lemma's synonym set, or the lemma itself.
    pub fn canonical<'a>(&'a self, lemma: &'a str) -> &'a str {
        match self.synonym_index.get(lemma) {
            Some(&i) => &self.synonym_sets[i][0],
            None => lemma,
        }
    }

    pub fn synonyms(&self, lemma: &str) -> &[String] {
        match self.synonym_index.get(lemma) {
            Some(&i) => &self.synonym_sets[i],
            None => &[],
        }
    }

    /// Identical lemma or members of the same synonym set.
    pub fn same_meaning(&self, a: &str, b: &str) -> bool {
        a == b
            || matches!(
                (self.synonym_index.get(a), self.synonym_index.get(b)),
                (Some(x), Some(y)) if x == y
            )
    }

    pub fn is_antonym(&self, a: &str, b: &str) -> bool {
        let key = if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
        self.antonym_pairs.contains(&key)
    }

    pub fn rank(&self, lemma: &str) -> Option<u32> {
        self.abstraction_rank.get(lemma).copied()
    }

    /// Relation templates for a verb. A verb without its own entry borrows
    /// the templates of the first synonym (in set order) that has one.
    pub fn relations(&self, verb: &str) -> &[RelationTemplate] {
        if let Some(r) = self.verb_relations.get(verb) {
            return r;
        }
        self.synonyms(verb)
            .iter()
            .find_map(|s| self.verb_relations.get(s))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn is_verb(&self, lemma: &str) -> bool {
        !self.relations(lemma).is_empty()
    }
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    Lexicon::load(path)
}
