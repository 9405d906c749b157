use std::path::Path;

use super::Utterance;
use crate::error::{Error, Result};

/// Parse a JSON-lines transcript. Blank lines are ignored.
pub fn parse_transcript(text: &str) -> Result<Vec<Utterance>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<Utterance>(l).map_err(|e| Error::Transcript {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_transcript(path: impl AsRef<Path>) -> Result<Vec<Utterance>> {
    parse_transcript(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_fields_and_optional_triples() {
        let text = r#"{"id":1,"speaker":"A","t_ms":0,"text":"Shift left"}

{"id":2,"speaker":"B","t_ms":5,"text":"x","triples":[{"verb":"shift","noun2":["window"],"modifiers":["left"]}]}"#;
        let us = parse_transcript(text).unwrap();
        assert_eq!(us.len(), 2);
        assert_eq!(us[0].t, 0);
        assert!(us[0].pre_annotation.is_none());
        let t = &us[1].pre_annotation.as_ref().unwrap()[0];
        assert_eq!(t.verb, "shift");
        assert_eq!(t.modifiers, vec!["left"]);
    }

    #[test]
    fn bad_line_reports_its_number() {
        let err = parse_transcript("{\"id\":1,\"text\":\"a\"}\n{oops").unwrap_err();
        assert!(matches!(err, Error::Transcript { line: 2, .. }));
    }
}
