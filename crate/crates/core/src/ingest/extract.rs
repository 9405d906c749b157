use std::collections::BTreeSet;

use super::nature::BUILTIN_CUES;
use super::{IdeaTriple, Lexicon, Utterance};
use crate::error::{Error, Result};

const CONJUNCTIONS: &[&str] = &["and", "or", "then", "but", "so"];

#[derive(Debug, Clone, PartialEq)]
enum Piece {
    Word(String),
    Break,
}

fn split_pieces(text: &str) -> Vec<Piece> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() || c == '-' || c == '\'' {
            cur.extend(c.to_lowercase());
            continue;
        }
        if !cur.is_empty() {
            out.push(Piece::Word(std::mem::take(&mut cur)));
        }
        if matches!(c, ',' | '.' | ';' | ':' | '!' | '?') {
            out.push(Piece::Break);
        }
    }
    if !cur.is_empty() {
        out.push(Piece::Word(cur));
    }
    out
}

/// Split into clauses on punctuation and conjunctions, lemmatizing with
/// longest-match lookup of multi-word surfaces.
fn clauses(text: &str, lex: &Lexicon) -> Vec<Vec<String>> {
    let mut clauses = vec![Vec::new()];
    let mut words: Vec<String> = Vec::new();
    let flush = |words: &mut Vec<String>, clauses: &mut Vec<Vec<String>>| {
        let mut i = 0;
        while i < words.len() {
            let max = lex.max_surface_words().min(words.len() - i);
            let mut taken = false;
            for n in (1..=max).rev() {
                let surface = words[i..i + n].join(" ");
                if let Some(lemma) = lex.lemma_of(&surface) {
                    clauses.last_mut().unwrap().push(lemma.to_string());
                    i += n;
                    taken = true;
                    break;
                }
            }
            if !taken {
                let w = &words[i];
                if CONJUNCTIONS.contains(&w.as_str()) {
                    clauses.push(Vec::new());
                } else {
                    clauses.last_mut().unwrap().push(w.clone());
                }
                i += 1;
            }
        }
        words.clear();
        clauses.push(Vec::new());
    };
    for piece in split_pieces(text) {
        match piece {
            Piece::Word(w) => words.push(w),
            Piece::Break => flush(&mut words, &mut clauses),
        }
    }
    flush(&mut words, &mut clauses);
    clauses.retain(|c| !c.is_empty());
    clauses
}

/// Lemmatized, stopword-free tokens of a text, in order.
pub fn tokenize_content(text: &str, lex: &Lexicon) -> Vec<String> {
    clauses(text, lex)
        .into_iter()
        .flatten()
        .filter(|t| !lex.is_stopword(t))
        .collect()
}

/// Cue patterns (lexicon image cues and built-in discourse cues) that occur
/// in the text, matched on whole words against both the surface words and
/// their lemmas.
pub fn detect_cues(text: &str, lex: &Lexicon) -> Vec<String> {
    let surface: Vec<String> = split_pieces(text)
        .into_iter()
        .filter_map(|p| match p {
            Piece::Word(w) => Some(w),
            Piece::Break => None,
        })
        .collect();
    let lemmas: Vec<String> = clauses(text, lex).into_iter().flatten().collect();
    let surface = format!(" {} ", surface.join(" "));
    let lemmas = format!(" {} ", lemmas.join(" "));

    let mut found = BTreeSet::new();
    let patterns = lex.image_cues.keys().map(String::as_str).chain(BUILTIN_CUES.iter().copied());
    for p in patterns {
        let needle = format!(" {p} ");
        if surface.contains(&needle) || lemmas.contains(&needle) {
            found.insert(p.to_string());
        }
    }
    if text.contains('?') {
        found.insert("?".to_string());
    }
    found.into_iter().collect()
}

fn is_object(lemma: &str, lex: &Lexicon) -> bool {
    lex.verb_relations.values().flatten().any(|r| {
        r.expected_object_class.contains(lemma)
            || r.expected_output.as_deref() == Some(lemma)
            || r.goal.as_deref() == Some(lemma)
    })
}

/// Nouns are known relation objects plus the head (last) token; the rest
/// are modifiers.
fn split_nouns(tokens: &[String], lex: &Lexicon) -> (Vec<String>, Vec<String>) {
    let mut nouns = Vec::new();
    let mut mods = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        if i + 1 == tokens.len() || is_object(t, lex) {
            nouns.push(t.clone());
        } else {
            mods.push(t.clone());
        }
    }
    (nouns, mods)
}

fn flag_unknown(triple: &mut IdeaTriple, lex: &Lexicon) {
    let unknown: BTreeSet<String> = triple
        .lemmas()
        .filter(|l| !lex.knows(l))
        .map(String::from)
        .collect();
    triple.out_of_lexicon = unknown.into_iter().collect();
}

fn normalize_token(t: &str, lex: &Lexicon) -> String {
    let t = super::normalize_phrase(t);
    match lex.lemma_of(&t) {
        Some(l) => l.to_string(),
        None => t.replace(' ', "-"),
    }
}

fn normalize_annotation(mut t: IdeaTriple, lex: &Lexicon) -> IdeaTriple {
    t.verb = if t.verb.trim().is_empty() { String::new() } else { normalize_token(&t.verb, lex) };
    t.noun1 = t.noun1.as_deref().map(|n| normalize_token(n, lex)).filter(|n| !n.is_empty());
    t.noun2 = t.noun2.iter().map(|n| normalize_token(n, lex)).collect();
    t.modifiers = t.modifiers.iter().map(|n| normalize_token(n, lex)).collect();
    t.assertion_only = t.verb.is_empty();
    t
}

/// Turn an utterance into idea triples, one per verb clause.
///
/// Pre-annotated utterances skip extraction; their triples are only
/// lemma-normalized and stamped with the utterance id.
pub fn extract_ideas(u: &Utterance, lex: &Lexicon) -> Result<Vec<IdeaTriple>> {
    let cues = detect_cues(&u.text, lex);
    if let Some(pre) = &u.pre_annotation {
        if !pre.is_empty() {
            return Ok(pre
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let mut t = normalize_annotation(t.clone(), lex);
                    t.source_utterance = u.id;
                    t.ordinal = i as u32;
                    t.cues = cues.clone();
                    flag_unknown(&mut t, lex);
                    t
                })
                .collect());
        }
    }
    if u.text.trim().is_empty() {
        return Err(Error::EmptyUtterance { id: u.id });
    }

    // (pre-verb tokens, verb, post-verb tokens) per verb clause; verbless
    // clauses are held and folded into the next verb clause as modifiers.
    let mut parts: Vec<(Vec<String>, String, Vec<String>)> = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut all_content: Vec<String> = Vec::new();
    for clause in clauses(&u.text, lex) {
        let content: Vec<String> = clause.into_iter().filter(|t| !lex.is_stopword(t)).collect();
        all_content.extend(content.iter().cloned());
        match content.iter().position(|t| lex.is_verb(t)) {
            Some(v) => {
                let mut pre = std::mem::take(&mut pending);
                pre.extend(content[..v].iter().cloned());
                parts.push((pre, content[v].clone(), content[v + 1..].to_vec()));
            }
            None => pending.extend(content),
        }
    }

    let mut out = Vec::new();
    if parts.is_empty() {
        if all_content.is_empty() {
            // nothing but stopwords: keep the raw words so the idea is not lost
            all_content = tokenize_raw(&u.text);
        }
        let (nouns, modifiers) = split_nouns(&all_content, lex);
        out.push(IdeaTriple {
            noun2: nouns,
            modifiers,
            assertion_only: true,
            ..Default::default()
        });
    } else {
        for (pre, verb, post) in parts {
            let (noun1, mut modifiers) = match pre.split_last() {
                Some((last, rest)) if is_object(last, lex) => (Some(last.clone()), rest.to_vec()),
                _ => (None, pre),
            };
            let (noun2, post_mods) = if post.is_empty() { (Vec::new(), Vec::new()) } else { split_nouns(&post, lex) };
            modifiers.extend(post_mods);
            out.push(IdeaTriple { verb, noun1, noun2, modifiers, ..Default::default() });
        }
        // a trailing verbless clause qualifies the last action
        out.last_mut().unwrap().modifiers.extend(pending);
    }
    for (i, t) in out.iter_mut().enumerate() {
        t.source_utterance = u.id;
        t.ordinal = i as u32;
        t.cues = cues.clone();
        flag_unknown(t, lex);
    }
    Ok(out)
}

fn tokenize_raw(text: &str) -> Vec<String> {
    split_pieces(text)
        .into_iter()
        .filter_map(|p| match p {
            Piece::Word(w) => Some(w),
            Piece::Break => None,
        })
        .collect()
}
