use std::collections::HashMap;

/// Token ↔ id mapping. Id 0 is padding and id 1 the unknown token.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    index: HashMap<String, usize>,
    tokens: Vec<String>,
    counts: Vec<usize>,
}

impl Vocabulary {
    pub const PAD: usize = 0;
    pub const UNK: usize = 1;
    pub const PAD_TOKEN: &'static str = "<pad>";
    pub const UNK_TOKEN: &'static str = "<unk>";

    fn reserved() -> Self {
        let tokens = vec![Self::PAD_TOKEN.to_string(), Self::UNK_TOKEN.to_string()];
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            index,
            tokens,
            counts: vec![0, 0],
        }
    }

    /// Rebuilds a vocabulary from tokens in id order (counts unknown).
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let mut v = Self::reserved();
        for t in tokens.into_iter().skip(2) {
            v.index.insert(t.clone(), v.tokens.len());
            v.tokens.push(t);
            v.counts.push(0);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 2
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(Self::UNK)
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &str {
        self.tokens.get(id).map_or(Self::UNK_TOKEN, String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn count(&self, id: usize) -> usize {
        self.counts.get(id).copied().unwrap_or(0)
    }
}

/// Builds a vocabulary from tokenized sentences. Ids are assigned by
/// descending frequency, ties broken alphabetically; tokens seen fewer than
/// `min_count` times are left out and map to the unknown id.
pub fn build_vocab<'a, I>(sentences: I, min_count: usize) -> Vocabulary
where
    I: IntoIterator<Item = &'a Vec<String>>,
{
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for s in sentences {
        for t in s {
            *freq.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut entries: Vec<(&str, usize)> = freq
        .into_iter()
        .filter(|(t, c)| *c >= min_count.max(1) && *t != Vocabulary::PAD_TOKEN && *t != Vocabulary::UNK_TOKEN)
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut v = Vocabulary::reserved();
    for (t, c) in entries {
        v.index.insert(t.to_string(), v.tokens.len());
        v.tokens.push(t.to_string());
        v.counts.push(c);
    }
    v
}
