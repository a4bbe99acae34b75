//! Random propositional programs for property and acceptance suites.
#![allow(dead_code)]

use aspdebug_core::program::{GroundConfig, GroundProgram};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ATOMS: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_atoms: usize,
    pub max_rules: usize,
    /// Whether some constraints may be placed in a background section.
    pub background: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_atoms: 8,
            max_rules: 12,
            background: false,
        }
    }
}

fn pick<'a>(rng: &mut impl Rng, pool: &[&'a str], max: usize) -> Vec<&'a str> {
    let k = rng.gen_range(0..=max.min(pool.len()));
    let mut v: Vec<&str> = pool.choose_multiple(rng, k).copied().collect();
    v.sort();
    v
}

fn render(head: &[&str], pos: &[&str], neg: &[&str]) -> String {
    let mut s = head.join(" | ");
    let body: Vec<String> = pos
        .iter()
        .map(|a| a.to_string())
        .chain(neg.iter().map(|a| format!("not {a}")))
        .collect();
    if !body.is_empty() {
        if !s.is_empty() {
            s.push(' ');
        }
        s.push_str(":- ");
        s.push_str(&body.join(", "));
    }
    s.push('.');
    s
}

/// Program text with disjunctive heads, default negation and constraints.
pub fn random_source(rng: &mut impl Rng, shape: Shape) -> String {
    let n_atoms = rng.gen_range(1..=shape.max_atoms);
    let pool = &ATOMS[..n_atoms];
    let n_rules = rng.gen_range(1..=shape.max_rules);
    let mut regular = Vec::new();
    let mut background = Vec::new();
    for _ in 0..n_rules {
        let constraint = rng.gen_bool(0.2);
        let head: Vec<&str> = if constraint {
            Vec::new()
        } else {
            let width = if rng.gen_bool(0.3) { 2 } else { 1 };
            let mut h: Vec<&str> = pool.choose_multiple(rng, width).copied().collect();
            h.sort();
            h
        };
        let mut pos = pick(rng, pool, 2);
        let neg = pick(rng, pool, 2);
        if constraint && pos.is_empty() && neg.is_empty() {
            pos.push(pool.choose(rng).copied().unwrap());
        }
        let text = render(&head, &pos, &neg);
        if constraint && shape.background && rng.gen_bool(0.5) {
            background.push(text);
        } else {
            regular.push(text);
        }
    }
    let mut out = regular.join("\n");
    if !background.is_empty() {
        out.push_str("\n#background.\n");
        out.push_str(&background.join("\n"));
    }
    out.push('\n');
    out
}

pub fn ground(source: &str) -> GroundProgram {
    GroundProgram::from_source(source, &GroundConfig::default())
        .unwrap_or_else(|e| panic!("generated program failed to ground: {e}\n{source}"))
}

pub fn random_program(seed: u64, shape: Shape) -> (String, GroundProgram) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src = random_source(&mut rng, shape);
    let gp = ground(&src);
    (src, gp)
}

/// A fixed, reproducible corpus.
pub fn corpus(size: usize, shape: Shape) -> Vec<(String, GroundProgram)> {
    (0..size as u64)
        .map(|i| random_program(0x5eed_0000 + i, shape))
        .collect()
}

pub const P_E: &str = "a :- not d.\nb :- a.\nc :- b.\nd :- c.\n#background.\n:- d.\n";
