//! Name-keyed registry of interchangeable strategy objects.
//!
//! Encoder variants and 2-D projection methods are both selected at runtime
//! from configuration strings; each family owns a `Registry<dyn Trait>`.

use std::collections::BTreeMap;

use crate::error::{Result, TdamError};

pub struct Registry<T: ?Sized> {
    entries: BTreeMap<&'static str, Box<T>>,
}

impl<T: ?Sized> Default for Registry<T> {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }
}

impl<T: ?Sized> Registry<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `strategy` under `name`, replacing any previous entry.
    pub fn register(&mut self, name: &'static str, strategy: Box<T>) -> &mut Self {
        self.entries.insert(name, strategy);
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| TdamError::UnknownStrategy {
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}
