use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// One trial protocol reduced to the entity fields the graph is built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: String,
    #[serde(default, deserialize_with = "one_or_many")]
    pub indications: Vec<String>,
    #[serde(default, deserialize_with = "one_or_many")]
    pub interventions: Vec<String>,
    #[serde(deserialize_with = "exactly_one")]
    pub phase: String,
    #[serde(default, deserialize_with = "one_or_many")]
    pub sponsors: Vec<String>,
    #[serde(default, deserialize_with = "one_or_many")]
    pub endpoints: Vec<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

fn one_or_many<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<String>, D::Error> {
    Ok(match Option::<OneOrMany>::deserialize(de)? {
        None => Vec::new(),
        Some(OneOrMany::One(s)) => vec![s],
        Some(OneOrMany::Many(v)) => v,
    })
}

fn exactly_one<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<String, D::Error> {
    match OneOrMany::deserialize(de)? {
        OneOrMany::One(s) => Ok(s),
        OneOrMany::Many(mut v) if v.len() == 1 => Ok(v.pop().unwrap()),
        OneOrMany::Many(v) => Err(serde::de::Error::custom(format!(
            "phase must be a single value, got {} values",
            v.len()
        ))),
    }
}

/// Parses line-delimited JSON records. Blank lines are skipped.
pub fn parse_records(input: impl BufRead, source_name: &str) -> Result<Vec<TrialRecord>> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut record: TrialRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
        record.trial_id = record.trial_id.trim().to_owned();
        if record.trial_id.is_empty() {
            return Err(Error::parse(source_name, lineno, "empty trial_id"));
        }
        if !seen.insert(record.trial_id.clone()) {
            return Err(Error::DuplicateTrial(record.trial_id));
        }
        records.push(record);
    }
    Ok(records)
}

pub fn write_records(records: &[TrialRecord], out: &mut impl Write) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_strings_and_arrays() {
        let src = r#"{"trial_id":"NCT1","phase":"3","endpoints":"OS"}

{"trial_id":"NCT2","phase":["2"],"indications":["a","b"],"sponsors":null}
"#;
        let recs = parse_records(src.as_bytes(), "r.jsonl").unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].endpoints, vec!["OS"]);
        assert_eq!(recs[0].phase, "3");
        assert!(recs[0].interventions.is_empty());
        assert_eq!(recs[1].indications.len(), 2);
        assert!(recs[1].sponsors.is_empty());
    }

    #[test]
    fn duplicate_id_is_named() {
        let src = "{\"trial_id\":\"NCT1\",\"phase\":\"3\"}\n{\"trial_id\":\" NCT1\",\"phase\":\"2\"}\n";
        match parse_records(src.as_bytes(), "r") {
            Err(Error::DuplicateTrial(id)) => assert_eq!(id, "NCT1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_position() {
        let src = "{\"trial_id\":\"NCT1\",\"phase\":\"3\"}\n{not json\n";
        let err = parse_records(src.as_bytes(), "r").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let multi_phase = "{\"trial_id\":\"NCT1\",\"phase\":[\"2\",\"3\"]}\n";
        assert!(matches!(parse_records(multi_phase.as_bytes(), "r"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn write_then_parse() {
        let recs = vec![TrialRecord {
            trial_id: "NCT9".into(),
            indications: vec!["nsclc".into()],
            interventions: vec![],
            phase: "phase 3".into(),
            sponsors: vec!["acme".into()],
            endpoints: vec!["os".into(), "pfs".into()],
        }];
        let mut buf = Vec::new();
        write_records(&recs, &mut buf).unwrap();
        assert_eq!(parse_records(buf.as_slice(), "m").unwrap(), recs);
    }
}
