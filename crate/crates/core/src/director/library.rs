//! Item library: the closed vocabulary of objects that can sit on the shelf.
//!
//! The JSON document lists item *kinds*; each kind expands into one item per
//! size level. Size 1 keeps the bare kind id, size 0 appends `_small` and
//! size 2 appends `_large`.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use thiserror::Error;

pub const SIZE_LEVELS: [u8; 3] = [0, 1, 2];

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("reading item library: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing item library: {0}")]
    Json(#[from] serde_json::Error),
    #[error("item library: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Striped,
    Plain,
}

impl Pattern {
    /// Adjective used in instructions.
    pub fn modifier(self) -> &'static str {
        match self {
            Pattern::Striped => "striped",
            Pattern::Plain => "non-striped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryInfo {
    pub id: String,
    /// Noun phrase used in instructions, e.g. "item of clothing".
    pub noun: String,
    pub icon: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Item {
    pub item_id: String,
    pub kind: String,
    pub display_name: String,
    pub categories: Vec<String>,
    pub color: String,
    pub pattern: Pattern,
    pub affordances: Vec<String>,
    pub size_level: u8,
}

impl Item {
    /// Attribute list shown on an ASCII grid's `B:` line.
    pub fn attribute_list(&self) -> Vec<String> {
        let mut attrs = vec![self.color.clone()];
        if self.pattern == Pattern::Striped {
            attrs.push("striped".to_string());
        }
        attrs.extend(self.affordances.iter().cloned());
        attrs.extend(self.categories.iter().cloned());
        attrs
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.item_id)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
struct KindEntry {
    kind: String,
    name: String,
    categories: Vec<String>,
    color: String,
    pattern: Pattern,
    #[serde(default)]
    affordances: Vec<String>,
    sizes: Vec<u8>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
struct LibraryDocument {
    categories: Vec<CategoryInfo>,
    items: Vec<KindEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemLibrary {
    categories: BTreeMap<String, CategoryInfo>,
    items: Vec<Item>,
}

const DEFAULT_LIBRARY: &str = include_str!("items.json");

pub fn item_id_for(kind: &str, size: u8) -> String {
    match size {
        0 => format!("{kind}_small"),
        2 => format!("{kind}_large"),
        _ => kind.to_string(),
    }
}

impl ItemLibrary {
    pub fn builtin() -> Self {
        Self::from_json(DEFAULT_LIBRARY).expect("bundled item library is valid")
    }

    pub fn load(path: &Path) -> Result<Self, LibraryError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_json(text: &str) -> Result<Self, LibraryError> {
        let doc: LibraryDocument = serde_json::from_str(text)?;
        let mut categories = BTreeMap::new();
        for c in doc.categories {
            if categories.insert(c.id.clone(), c.clone()).is_some() {
                return Err(LibraryError::Invalid(format!("duplicate category {}", c.id)));
            }
        }
        let mut items = Vec::new();
        let mut ids = BTreeSet::new();
        for k in doc.items {
            if k.sizes.is_empty() {
                return Err(LibraryError::Invalid(format!("{} has no sizes", k.kind)));
            }
            for cat in &k.categories {
                if !categories.contains_key(cat) {
                    return Err(LibraryError::Invalid(format!("{} uses unknown category {cat}", k.kind)));
                }
            }
            if k.categories.is_empty() {
                return Err(LibraryError::Invalid(format!("{} has no category", k.kind)));
            }
            for &size in &k.sizes {
                if !SIZE_LEVELS.contains(&size) {
                    return Err(LibraryError::Invalid(format!("{} has size {size} outside 0..=2", k.kind)));
                }
                let id = item_id_for(&k.kind, size);
                if !ids.insert(id.clone()) {
                    return Err(LibraryError::Invalid(format!("duplicate item id {id}")));
                }
                let display_name = match size {
                    0 => format!("small {}", k.name),
                    2 => format!("large {}", k.name),
                    _ => k.name.clone(),
                };
                items.push(Item {
                    item_id: id,
                    kind: k.kind.clone(),
                    display_name,
                    categories: k.categories.clone(),
                    color: k.color.clone(),
                    pattern: k.pattern,
                    affordances: k.affordances.clone(),
                    size_level: size,
                });
            }
        }
        Ok(ItemLibrary { categories, items })
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn get(&self, item_id: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.item_id == item_id)
    }

    pub fn category(&self, id: &str) -> Option<&CategoryInfo> {
        self.categories.get(id)
    }

    pub fn categories(&self) -> impl Iterator<Item = &CategoryInfo> {
        self.categories.values()
    }

    pub fn colors(&self) -> BTreeSet<&str> {
        self.items.iter().map(|i| i.color.as_str()).collect()
    }
}
