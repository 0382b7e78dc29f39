use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::reduce::{head_normalize, Hnf};
use crate::term::Term;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("path {path:?}: node {at:?} has {children} children")]
    NoSuchChild { path: Vec<usize>, at: Vec<usize>, children: usize },
    #[error("path {path:?}: node {at:?} has no head normal form")]
    BelowDivergent { path: Vec<usize>, at: Vec<usize> },
}

/// One node of a Böhm tree, as disclosed so far.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BohmNode {
    Node {
        binders: Vec<String>,
        head: String,
        children: usize,
    },
    /// No head normal form within the fuel.
    Divergent {
        fuel: usize,
    },
}

#[derive(Clone, Debug)]
enum Cached {
    Hnf(Hnf),
    Divergent,
}

/// Lazy Böhm-tree exploration with a per-explorer cache of head normal forms.
#[derive(Clone, Debug)]
pub struct Explorer {
    root: Term,
    fuel: usize,
    cache: HashMap<Vec<usize>, Cached>,
}

impl Explorer {
    pub fn new(root: Term, fuel: usize) -> Explorer {
        Explorer { root, fuel, cache: HashMap::new() }
    }

    pub fn root(&self) -> &Term {
        &self.root
    }

    /// Number of nodes normalized so far.
    pub fn disclosed(&self) -> usize {
        self.cache.len()
    }

    fn normalize(&mut self, at: &[usize], t: &Term) -> &Cached {
        let fuel = self.fuel;
        self.cache.entry(at.to_vec()).or_insert_with(|| match head_normalize(t, fuel) {
            Ok(n) => Cached::Hnf(n.hnf),
            Err(_) => Cached::Divergent,
        })
    }

    /// The node at `path`, children numbered from 1.
    pub fn expand(&mut self, path: &[usize]) -> Result<BohmNode, ExpandError> {
        let mut term = self.root.clone();
        for depth in 0..=path.len() {
            let at = &path[..depth];
            let fuel = self.fuel;
            let node = self.normalize(at, &term).clone();
            let hnf = match node {
                Cached::Divergent if depth == path.len() => return Ok(BohmNode::Divergent { fuel }),
                Cached::Divergent => return Err(ExpandError::BelowDivergent { path: path.to_vec(), at: at.to_vec() }),
                Cached::Hnf(h) => h,
            };
            if depth == path.len() {
                return Ok(BohmNode::Node { binders: hnf.binders, head: hnf.head, children: hnf.args.len() });
            }
            let i = path[depth];
            if i == 0 || i > hnf.args.len() {
                return Err(ExpandError::NoSuchChild {
                    path: path.to_vec(),
                    at: at.to_vec(),
                    children: hnf.args.len(),
                });
            }
            term = hnf.args[i - 1].clone();
        }
        unreachable!("the loop returns at the last depth")
    }
}

/// Expands one node of the Böhm tree of `t` without keeping a cache.
pub fn bohm_expand(t: &Term, path: &[usize], fuel: usize) -> Result<BohmNode, ExpandError> {
    Explorer::new(t.clone(), fuel).expand(path)
}
