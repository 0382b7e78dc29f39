use std::path::Path;

use anyhow::{Context, Result};
use sdsgames_core::catalog::{catalog, Catalog};

/// Names a directory of `.sds` files that replaces the built-in catalog.
pub const CATALOG_DIR_VAR: &str = "SDSGAMES_CATALOG";

/// Concatenates the `.sds` files of `dir` in name order and loads them.
pub fn load_dir(dir: &Path) -> Result<Catalog> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "sds"))
        .collect();
    files.sort();
    let mut text = String::new();
    for f in &files {
        text.push_str(&std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?);
        text.push('\n');
    }
    Catalog::load(&text).with_context(|| format!("loading {}", dir.display()))
}

/// The catalog named by the environment, or the built-in one.
pub fn configured_catalog() -> Result<Catalog> {
    match std::env::var_os(CATALOG_DIR_VAR) {
        Some(dir) => load_dir(Path::new(&dir)),
        None => Ok(catalog().clone()),
    }
}
