use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::graph::NodeKind;

/// Syntactic label consolidation plus an optional exact-match synonym table.
///
/// Trial ids are registry identifiers and are only trimmed; every other kind is
/// case-folded, whitespace-collapsed and stripped of surrounding punctuation
/// before the synonym lookup.
#[derive(Debug, Clone, Default)]
pub struct Normalizer {
    synonyms: HashMap<String, String>,
}

impl Normalizer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keys and values are normalized on insertion so lookups compare like with like.
    pub fn with_synonyms<I, K, V>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut synonyms = HashMap::new();
        for (k, v) in pairs {
            let key = syntactic(k.as_ref())?;
            let value = syntactic(v.as_ref())?;
            synonyms.insert(key, value);
        }
        Ok(Normalizer { synonyms })
    }

    /// Reads a `raw<TAB>canonical` sidecar; blank lines and `#` comments are ignored.
    pub fn from_tsv(input: impl BufRead, source_name: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::parse(source_name, i + 1, e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((raw, canonical)) = line.split_once('\t') else {
                return Err(Error::parse(source_name, i + 1, "expected raw<TAB>canonical"));
            };
            pairs.push((raw.to_owned(), canonical.to_owned()));
        }
        Self::with_synonyms(pairs).map_err(|e| Error::parse(source_name, 0, e.to_string()))
    }

    pub fn normalize(&self, raw: &str, kind: NodeKind) -> Result<String> {
        if kind == NodeKind::Trial {
            let id = raw.trim();
            return if id.is_empty() {
                Err(Error::EmptyLabel)
            } else {
                Ok(id.to_owned())
            };
        }
        let label = syntactic(raw)?;
        Ok(self.synonyms.get(&label).cloned().unwrap_or(label))
    }
}

fn syntactic(raw: &str) -> Result<String> {
    let folded = raw.to_lowercase();
    let collapsed = folded.split_whitespace().collect::<Vec<_>>().join(" ");
    let trimmed = collapsed.trim_matches(|c: char| c.is_whitespace() || is_punct(c));
    if trimmed.is_empty() {
        Err(Error::EmptyLabel)
    } else {
        Ok(trimmed.to_owned())
    }
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '\u{2018}'..='\u{201f}' | '\u{2013}' | '\u{2014}' | '\u{2026}')
}
