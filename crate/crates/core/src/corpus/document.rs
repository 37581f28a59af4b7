use crate::error::{Result, TdamError};

/// Gold aspect and polarity of one sentence (evaluation corpora only).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SentenceAnnotation {
    pub sentence: usize,
    pub aspect: String,
    pub polarity: String,
}

/// A tokenized review mapped to word ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub doc_id: String,
    pub sentences: Vec<Vec<usize>>,
    pub sentiment: usize,
    /// `None` when the record carries no domain label (`-`).
    pub domain: Option<usize>,
    pub annotations: Vec<SentenceAnnotation>,
}

impl Document {
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    /// Checks the structural invariants and label ranges.
    pub fn validate(&self, sentiment_classes: usize, domain_classes: usize) -> Result<()> {
        if self.sentences.is_empty() {
            return Err(TdamError::invalid(format!("document {} has no sentences", self.doc_id)));
        }
        if self.sentences.iter().any(Vec::is_empty) {
            return Err(TdamError::invalid(format!("document {} has an empty sentence", self.doc_id)));
        }
        if self.sentiment >= sentiment_classes {
            return Err(TdamError::LabelOutOfRange {
                label: self.sentiment,
                classes: sentiment_classes,
            });
        }
        if let Some(d) = self.domain {
            if d >= domain_classes {
                return Err(TdamError::LabelOutOfRange {
                    label: d,
                    classes: domain_classes,
                });
            }
        }
        Ok(())
    }
}

/// Label strings in class-index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSchema {
    pub sentiment: Vec<String>,
    /// Empty means: infer from the corpus, sorted.
    pub domains: Vec<String>,
}

impl Default for LabelSchema {
    fn default() -> Self {
        Self {
            sentiment: ["negative", "neutral", "positive"].map(String::from).to_vec(),
            domains: Vec::new(),
        }
    }
}

impl LabelSchema {
    pub fn sentiment_index(&self, label: &str) -> Result<usize> {
        self.sentiment
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| TdamError::UnknownLabel(label.to_string()))
    }

    pub fn domain_index(&self, label: &str) -> Result<Option<usize>> {
        if label == "-" {
            return Ok(None);
        }
        self.domains
            .iter()
            .position(|s| s == label)
            .map(Some)
            .ok_or_else(|| TdamError::UnknownLabel(label.to_string()))
    }
}
