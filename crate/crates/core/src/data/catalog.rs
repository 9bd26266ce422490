use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense identifier of a prompt inside a [`PromptCatalog`].
///
/// Ids are assigned in first-appearance order starting at zero, so they can
/// be used directly as vector indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PromptId(pub u32);

impl PromptId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PromptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A prompt as stored in the catalog: its id, the display text exactly as
/// first seen, and the normalized identity key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub id: PromptId,
    pub text: String,
    key: String,
}

impl Prompt {
    /// The normalized form used for identity checks and tie-breaking.
    pub fn key(&self) -> &str {
        &self.key
    }
}

/// Identity normalization: trim, collapse internal whitespace runs to a
/// single space, and case-fold.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

/// Bijection between prompt ids and prompt texts.
#[derive(Debug, Clone, Default)]
pub struct PromptCatalog {
    prompts: Vec<Prompt>,
    by_key: HashMap<String, PromptId>,
}

impl PromptCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.prompts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prompts.is_empty()
    }

    /// Returns the id for `text`, registering it if its normalized form has
    /// not been seen. Returns `None` for blank text.
    pub fn intern(&mut self, text: &str) -> Option<PromptId> {
        let key = normalize(text);
        if key.is_empty() {
            return None;
        }
        if let Some(&id) = self.by_key.get(&key) {
            return Some(id);
        }
        let id = PromptId(u32::try_from(self.prompts.len()).expect("catalog exceeds u32 ids"));
        self.by_key.insert(key.clone(), id);
        self.prompts.push(Prompt {
            id,
            text: text.to_owned(),
            key,
        });
        Some(id)
    }

    pub fn lookup(&self, text: &str) -> Option<PromptId> {
        self.by_key.get(&normalize(text)).copied()
    }

    pub fn get(&self, id: PromptId) -> Option<&Prompt> {
        self.prompts.get(id.index())
    }

    pub fn contains(&self, id: PromptId) -> bool {
        id.index() < self.prompts.len()
    }

    /// Display text of `id`.
    ///
    /// Panics if `id` does not belong to this catalog.
    pub fn text(&self, id: PromptId) -> &str {
        &self.prompts[id.index()].text
    }

    /// Normalized key of `id`. Panics if `id` does not belong to this catalog.
    pub fn key(&self, id: PromptId) -> &str {
        &self.prompts[id.index()].key
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &Prompt> + '_ {
        self.prompts.iter()
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = PromptId> + '_ {
        (0..self.prompts.len()).map(|i| PromptId(i as u32))
    }
}
