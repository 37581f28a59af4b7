//! Line-delimited corpus files:
//! `doc_id<TAB>sentiment<TAB>domain<TAB>text[<TAB>annotations]`, where
//! annotations are `;`-separated `sentence_index:ASPECT#SUB:polarity` triples.

use std::collections::BTreeSet;
use std::path::Path;

use super::document::{Document, LabelSchema, SentenceAnnotation};
use super::tokenize::tokenize_text;
use super::vocab::Vocabulary;
use crate::error::{Result, TdamError};

/// A record after sentence splitting and tokenization, before id mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedRecord {
    pub doc_id: String,
    pub sentences: Vec<Vec<String>>,
    pub sentiment: usize,
    pub domain: Option<usize>,
    pub annotations: Vec<SentenceAnnotation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Malformed {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub records: Vec<TokenizedRecord>,
    /// Schema with the domain list resolved.
    pub schema: LabelSchema,
    pub malformed: Vec<Malformed>,
}

impl LoadedCorpus {
    pub fn sentences(&self) -> impl Iterator<Item = &Vec<String>> {
        self.records.iter().flat_map(|r| r.sentences.iter())
    }

    pub fn documents(&self, vocab: &Vocabulary) -> Vec<Document> {
        self.records
            .iter()
            .map(|r| Document {
                doc_id: r.doc_id.clone(),
                sentences: r
                    .sentences
                    .iter()
                    .map(|s| s.iter().map(|t| vocab.id(t)).collect())
                    .collect(),
                sentiment: r.sentiment,
                domain: r.domain,
                annotations: r.annotations.clone(),
            })
            .collect()
    }
}

struct RawLine<'a> {
    line: usize,
    doc_id: &'a str,
    sentiment: &'a str,
    domain: &'a str,
    text: &'a str,
    annotations: Option<&'a str>,
}

fn parse_annotations(field: &str, sentences: usize) -> std::result::Result<Vec<SentenceAnnotation>, String> {
    let mut out = Vec::new();
    for item in field.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let [idx, aspect, polarity] = parts.as_slice() else {
            return Err(format!("annotation '{item}' is not index:aspect:polarity"));
        };
        let sentence: usize = idx
            .trim()
            .parse()
            .map_err(|_| format!("annotation '{item}' has a bad sentence index"))?;
        if sentence >= sentences {
            return Err(format!("annotation '{item}' points past the last sentence"));
        }
        out.push(SentenceAnnotation {
            sentence,
            aspect: aspect.trim().to_string(),
            polarity: polarity.trim().to_lowercase(),
        });
    }
    Ok(out)
}

/// Parses corpus text. Records with empty text, a wrong field count or bad
/// annotations are skipped and reported in `malformed`; an unknown label is
/// an error.
pub fn parse_corpus(text: &str, schema: &LabelSchema) -> Result<LoadedCorpus> {
    let mut raw = Vec::new();
    let mut malformed = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 4 || fields.len() > 5 {
            malformed.push(Malformed {
                line: line_no,
                reason: format!("expected 4 or 5 tab-separated fields, got {}", fields.len()),
            });
            continue;
        }
        raw.push(RawLine {
            line: line_no,
            doc_id: fields[0].trim(),
            sentiment: fields[1].trim(),
            domain: fields[2].trim(),
            text: fields[3],
            annotations: fields.get(4).copied(),
        });
    }

    let mut schema = schema.clone();
    if schema.domains.is_empty() {
        let found: BTreeSet<&str> = raw.iter().map(|r| r.domain).filter(|d| *d != "-").collect();
        schema.domains = found.into_iter().map(String::from).collect();
    }

    let mut records = Vec::with_capacity(raw.len());
    for r in raw {
        let sentiment = schema
            .sentiment_index(r.sentiment)
            .map_err(|e| TdamError::Parse {
                location: format!("line {}", r.line),
                message: e.to_string(),
            })?;
        let domain = schema.domain_index(r.domain).map_err(|e| TdamError::Parse {
            location: format!("line {}", r.line),
            message: e.to_string(),
        })?;
        let sentences = tokenize_text(r.text);
        if sentences.is_empty() {
            malformed.push(Malformed {
                line: r.line,
                reason: "empty text".into(),
            });
            continue;
        }
        let annotations = match r.annotations.map(|a| parse_annotations(a, sentences.len())) {
            None => Vec::new(),
            Some(Ok(a)) => a,
            Some(Err(reason)) => {
                malformed.push(Malformed { line: r.line, reason });
                continue;
            }
        };
        records.push(TokenizedRecord {
            doc_id: r.doc_id.to_string(),
            sentences,
            sentiment,
            domain,
            annotations,
        });
    }
    malformed.sort_by_key(|m| m.line);
    if records.is_empty() {
        return Err(TdamError::Empty("corpus has no valid records"));
    }
    Ok(LoadedCorpus {
        records,
        schema,
        malformed,
    })
}

pub fn load_corpus(path: &Path, schema: &LabelSchema) -> Result<LoadedCorpus> {
    let text = std::fs::read_to_string(path).map_err(|e| TdamError::io(path, e))?;
    parse_corpus(&text, schema)
}
