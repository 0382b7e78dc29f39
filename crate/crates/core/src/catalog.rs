//! The built-in library of structures, algorithms and tables.

use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::engine::Algorithm;
use crate::sds::Sds;
use crate::syntax::{Document, Item, ParseError};
use crate::table::{FunctionTable, TableError};

/// Text of the built-in library.
pub const SOURCE: &str = include_str!("catalog.sds");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("no catalog entry named `{0}`")]
    Unknown(String),
    #[error("`{name}` is a {found}, not a {wanted}")]
    WrongKind { name: String, found: EntryKind, wanted: EntryKind },
    #[error("catalog text: {0}")]
    Parse(#[from] ParseError),
    #[error("table `{name}`: {source}")]
    Table { name: String, source: TableError },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Sds,
    Algorithm,
    Strategy,
    Counter,
    Table,
}

impl std::fmt::Display for EntryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EntryKind::Sds => "structure",
            EntryKind::Algorithm => "algorithm",
            EntryKind::Strategy => "strategy",
            EntryKind::Counter => "counter-strategy",
            EntryKind::Table => "table",
        })
    }
}

fn kind_of(item: &Item) -> EntryKind {
    match item {
        Item::Sds { .. } => EntryKind::Sds,
        Item::Algorithm { .. } => EntryKind::Algorithm,
        Item::Strategy { .. } => EntryKind::Strategy,
        Item::Counter { .. } => EntryKind::Counter,
        Item::Table(_) => EntryKind::Table,
    }
}

const NOTES: &[(&str, &str)] = &[
    ("Bool", "booleans: one cell, two values"),
    ("o", "one cell and no value"),
    ("Bool2", "pairs of booleans"),
    ("BoolE", "booleans with an error value"),
    ("O3", "o -> o -> o, isomorphic to Bool"),
    ("negation", "boolean negation"),
    ("const_tt", "constant true, never reads its input"),
    ("const_ff", "constant false"),
    ("lor", "left or: reads x, then y only when x is false"),
    ("ror", "right or: reads y, then x only when y is false"),
    ("lsor", "strict or reading x first"),
    ("rsor", "strict or reading y first"),
    ("lsor_err", "lsor propagating err in reading order"),
    ("rsor_err", "rsor propagating err in reading order"),
    ("por", "parallel or"),
    ("lor_spec", "specification of left or"),
    ("ror_spec", "specification of right or"),
    ("sor", "strict or"),
    ("const_tt_table", "constant true of two arguments"),
    ("if_then_else", "Bool to o -> o -> o"),
    ("catch", "o -> o -> o to Bool, inverse of if_then_else"),
    ("separator", "maps lsor to tt and rsor to ff"),
    ("separator_rev", "maps lsor to ff and rsor to tt"),
    ("probe_const", "constant tt at the separator's type"),
    ("callcc", "call-cc at Bool, answer type o"),
];

#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub name: String,
    pub kind: EntryKind,
    pub note: &'static str,
    /// Type or declaration header as it prints.
    pub summary: String,
}

/// A parsed library with its tables completed.
#[derive(Clone, Debug)]
pub struct Catalog {
    doc: Document,
    tables: Vec<(String, FunctionTable)>,
}

impl Catalog {
    pub fn load(text: &str) -> Result<Catalog, CatalogError> {
        Catalog { doc: Document::default(), tables: Vec::new() }.extend(text)
    }

    /// A new catalog with the items of `text` added; they may refer to ours.
    pub fn extend(&self, text: &str) -> Result<Catalog, CatalogError> {
        let added = Document::parse_with(text, &self.doc)?;
        let mut doc = self.doc.clone();
        doc.items.extend(added.items.iter().cloned());
        let mut tables = self.tables.clone();
        for item in &added.items {
            if let Item::Table(decl) = item {
                let t = FunctionTable::from_decl(decl, &doc)
                    .map_err(|source| CatalogError::Table { name: decl.name.clone(), source })?;
                tables.push((decl.name.clone(), t));
            }
        }
        Ok(Catalog { doc, tables })
    }

    pub fn document(&self) -> &Document {
        &self.doc
    }

    pub fn entries(&self) -> Vec<Entry> {
        self.doc.items.iter().map(|i| self.entry_of(i)).collect()
    }

    fn entry_of(&self, item: &Item) -> Entry {
        let name = item.name().to_string();
        let note = NOTES.iter().find(|(n, _)| *n == name).map(|(_, d)| *d).unwrap_or("");
        let summary = match item {
            Item::Sds { sds, .. } => sds.to_string(),
            Item::Algorithm { algorithm, .. } => algorithm.arrow().to_string(),
            Item::Strategy { sds, .. } | Item::Counter { sds, .. } => sds.to_string(),
            Item::Table(t) => format!("{} arguments over {}", t.arity, t.flat),
        };
        Entry { name, kind: kind_of(item), note, summary }
    }

    pub fn get(&self, name: &str) -> Result<Entry, CatalogError> {
        self.doc.get(name).map(|i| self.entry_of(i)).ok_or_else(|| CatalogError::Unknown(name.to_string()))
    }

    fn expect(&self, name: &str, wanted: EntryKind) -> Result<&Item, CatalogError> {
        let item = self.doc.get(name).ok_or_else(|| CatalogError::Unknown(name.to_string()))?;
        let found = kind_of(item);
        if found != wanted {
            return Err(CatalogError::WrongKind { name: name.to_string(), found, wanted });
        }
        Ok(item)
    }

    pub fn sds(&self, name: &str) -> Result<&Sds, CatalogError> {
        match self.expect(name, EntryKind::Sds)? {
            Item::Sds { sds, .. } => Ok(sds),
            _ => unreachable!(),
        }
    }

    pub fn algorithm(&self, name: &str) -> Result<&Algorithm, CatalogError> {
        match self.expect(name, EntryKind::Algorithm)? {
            Item::Algorithm { algorithm, .. } => Ok(algorithm),
            _ => unreachable!(),
        }
    }

    pub fn table(&self, name: &str) -> Result<&FunctionTable, CatalogError> {
        self.expect(name, EntryKind::Table)?;
        Ok(self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t).expect("tables completed at load"))
    }

    /// Algorithm entries, in source order.
    pub fn algorithms(&self) -> impl Iterator<Item = (&str, &Algorithm)> {
        self.doc.items.iter().filter_map(|i| match i {
            Item::Algorithm { name, algorithm, .. } => Some((name.as_str(), algorithm)),
            _ => None,
        })
    }
}

/// The built-in library, parsed once.
pub fn catalog() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| Catalog::load(SOURCE).expect("built-in catalog parses"))
}
