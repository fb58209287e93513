//! Plain-text vocabulary file: a `[layer_types]` and a `[materials]`
//! section, one code per line. `#` starts a comment. The first code of each
//! section must be `NONE`.

use std::path::Path;

use pavemr_core::domain::Vocabulary;

use crate::error::{Error, Result};
use crate::io;

pub fn parse_vocabulary(text: &str, path: &Path) -> Result<Vocabulary> {
    let mut layer_types = Vec::new();
    let mut materials = Vec::new();
    let mut section: Option<&mut Vec<String>> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "[layer_types]" => section = Some(&mut layer_types),
            "[materials]" => section = Some(&mut materials),
            _ if line.starts_with('[') => {
                return Err(Error::format(path, format!("line {}: unknown section {line}", n + 1)));
            }
            code => match section.as_deref_mut() {
                Some(list) if list.iter().any(|c| c == code) => {
                    return Err(Error::format(path, format!("line {}: duplicate code {code}", n + 1)));
                }
                Some(list) => list.push(code.to_string()),
                None => return Err(Error::format(path, format!("line {}: code outside a section", n + 1))),
            },
        }
    }
    for (name, list) in [("layer_types", &layer_types), ("materials", &materials)] {
        if list.first().map(String::as_str) != Some("NONE") {
            return Err(Error::format(path, format!("section [{name}] must start with NONE")));
        }
    }
    let vocab = Vocabulary { layer_types, materials };
    vocab.validate()?;
    Ok(vocab)
}

pub fn render_vocabulary(vocab: &Vocabulary) -> String {
    let mut out = String::from("# Categorical codes accepted in structure fields.\n[layer_types]\n");
    for c in &vocab.layer_types {
        out.push_str(c);
        out.push('\n');
    }
    out.push_str("\n[materials]\n");
    for c in &vocab.materials {
        out.push_str(c);
        out.push('\n');
    }
    out
}

pub fn load_vocabulary(path: &Path) -> Result<Vocabulary> {
    parse_vocabulary(&io::read_text(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_vocabulary_round_trips() {
        let v = Vocabulary::standard();
        let text = render_vocabulary(&v);
        assert_eq!(parse_vocabulary(&text, Path::new("v")).unwrap(), v);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# header\n[layer_types]\nNONE\nAC # asphalt\n\n[materials]\nNONE\nAC-20\n";
        let v = parse_vocabulary(text, Path::new("v")).unwrap();
        assert_eq!(v.layer_types, ["NONE", "AC"]);
        assert_eq!(v.materials, ["NONE", "AC-20"]);
    }

    #[test]
    fn malformed_files_are_rejected() {
        for text in ["AC\n", "[layer_types]\nAC\n[materials]\nNONE\n", "[colors]\nred\n", "[layer_types]\nNONE\nAC\nAC\n[materials]\nNONE\n"] {
            assert!(parse_vocabulary(text, Path::new("v")).is_err(), "{text}");
        }
    }
}
