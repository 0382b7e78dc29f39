use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{token_game_trace, GameError};
use crate::term::Term;

/// A game instance: `m` with free `z`, and `n` to be put in its place.
#[derive(Clone, Debug)]
pub struct Pair {
    pub m: Term,
    pub n: Term,
}

const FREE: [&str; 2] = ["a", "b"];

struct Gen {
    rng: ChaCha8Rng,
    prefix: &'static str,
    next: usize,
}

impl Gen {
    fn node(&mut self, depth: usize, with_z: bool) -> Term {
        let n_binders = self.rng.gen_range(0..=3);
        let binders: Vec<String> = (0..n_binders)
            .map(|_| {
                self.next += 1;
                format!("{}{}", self.prefix, self.next)
            })
            .collect();
        let mut heads: Vec<String> = binders.clone();
        heads.extend(FREE.iter().map(|s| s.to_string()));
        let head = if with_z && self.rng.gen_bool(0.8) {
            "z".to_string()
        } else if !binders.is_empty() && self.rng.gen_bool(0.75) {
            binders.choose(&mut self.rng).expect("non-empty").clone()
        } else {
            heads.choose(&mut self.rng).expect("free names are always there").clone()
        };
        let n_args = if depth == 0 { 0 } else { self.rng.gen_range(0..=3) };
        let args: Vec<Term> = (0..n_args).map(|_| self.node(depth - 1, false)).collect();
        Term::lams(&binders, Term::apps(Term::var(&head), args))
    }
}

/// `count` pairs in the simple case. Every head is bound by its own
/// abstraction bunch or free (`a`, `b`); `z` occurs only as the root head of
/// `m`, most of the time. Depth at most 3. Candidates on which the game
/// reports surplus arguments are dropped.
pub fn simple_case_corpus(seed: u64, count: usize) -> Vec<Pair> {
    let rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Gen { rng, prefix: "p", next: 0 };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        g.prefix = "p";
        let m = g.node(3, true);
        g.prefix = "q";
        let n = g.node(3, false);
        if !matches!(token_game_trace(&m, "z", &n, 1000), Err(GameError::Surplus { .. })) {
            out.push(Pair { m, n });
        }
    }
    out
}
