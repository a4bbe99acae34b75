//! Answer-set semantics over ground programs.
//!
//! These are direct, brute-force renderings of the definitions (applicability,
//! Gelfond-Lifschitz reduct, minimal models, support, positive dependency
//! graph, unfounded loops). They favour obvious correctness over speed and
//! serve as the reference the rest of the crate is tested against.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::program::{AtomId, AtomSet, GroundProgram, GroundRule, Interpretation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("{atoms} atoms exceed the enumeration cap of {cap}")]
    TooManyAtoms { atoms: usize, cap: usize },
}

pub(crate) fn check_enumerable(gp: &GroundProgram) -> Result<(), SemanticsError> {
    if gp.atom_count() > gp.atom_cap() {
        return Err(SemanticsError::TooManyAtoms {
            atoms: gp.atom_count(),
            cap: gp.atom_cap(),
        });
    }
    Ok(())
}

/// `B+(r) ⊆ I` and `B-(r) ∩ I = ∅`.
pub fn is_applicable(rule: &GroundRule, i: Interpretation) -> bool {
    rule.pos_body.is_subset(i) && rule.neg_body.is_disjoint(i)
}

/// Blocked, or some head atom is true. A constraint is satisfied iff blocked.
pub fn is_satisfied(rule: &GroundRule, i: Interpretation) -> bool {
    !is_applicable(rule, i) || !rule.head.is_disjoint(i)
}

pub fn is_model(gp: &GroundProgram, i: Interpretation) -> bool {
    gp.rules().iter().all(|r| is_satisfied(r, i))
}

/// The Gelfond-Lifschitz reduct `P^I`: rules whose negative body meets `I`
/// are dropped, negative bodies of the rest are erased.
pub fn reduct(gp: &GroundProgram, i: Interpretation) -> GroundProgram {
    let rules = gp
        .rules()
        .iter()
        .filter(|r| r.neg_body.is_disjoint(i))
        .map(|r| GroundRule {
            neg_body: AtomSet::EMPTY,
            ..r.clone()
        })
        .collect();
    gp.with_rules(rules)
}

/// `I` is a minimal model of `P^I`. Minimality is checked against every
/// proper subset of `I`.
pub fn is_answer_set(gp: &GroundProgram, i: Interpretation) -> bool {
    let reduct = reduct(gp, i);
    is_model(&reduct, i) && !i.proper_subsets().any(|j| is_model(&reduct, j))
}

/// All answer sets, in increasing bitmask order.
pub fn answer_sets(gp: &GroundProgram) -> Result<Vec<Interpretation>, SemanticsError> {
    check_enumerable(gp)?;
    Ok(AtomSet::all(gp.atom_count())
        .filter(|&i| is_answer_set(gp, i))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Support {
    None,
    Internal,
    External,
}

/// Whether `rule` supports the atom set `a` with respect to `i`:
/// applicable, `H(r) ∩ A ≠ ∅`, and `H(r) ∩ I ⊆ A`. The support is external
/// when additionally `B+(r) ∩ A = ∅`.
pub fn supports(rule: &GroundRule, a: AtomSet, i: Interpretation) -> Support {
    if !is_applicable(rule, i) || rule.head.is_disjoint(a) || !rule.head.intersection(i).is_subset(a)
    {
        Support::None
    } else if rule.pos_body.is_disjoint(a) {
        Support::External
    } else {
        Support::Internal
    }
}

/// True if some rule supports the singleton `{atom}`.
pub fn is_supported(gp: &GroundProgram, atom: AtomId, i: Interpretation) -> bool {
    let a = AtomSet::singleton(atom);
    gp.rules()
        .iter()
        .any(|r| supports(r, a, i) != Support::None)
}

/// Positive dependency graph: an edge `h -> b` for every rule with
/// `h ∈ H(r)` and `b ∈ B+(r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    successors: Vec<AtomSet>,
}

impl DependencyGraph {
    pub fn new(gp: &GroundProgram) -> DependencyGraph {
        let mut successors = vec![AtomSet::EMPTY; gp.atom_count()];
        for r in gp.rules() {
            for h in r.head.iter() {
                successors[h] = successors[h].union(r.pos_body);
            }
        }
        DependencyGraph { successors }
    }

    pub fn successors(&self, atom: AtomId) -> AtomSet {
        self.successors[atom]
    }

    pub fn edges(&self) -> BTreeSet<(AtomId, AtomId)> {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(h, s)| s.iter().map(move |b| (h, b)))
            .collect()
    }

    /// Atoms reachable from `from` by a path of length ≥ 1 that stays in `within`.
    fn reachable_within(&self, from: AtomId, within: AtomSet) -> AtomSet {
        let mut seen = AtomSet::EMPTY;
        let mut frontier = self.successors[from].intersection(within);
        while !frontier.is_empty() {
            seen = seen.union(frontier);
            let mut next = AtomSet::EMPTY;
            for a in frontier.iter() {
                next = next.union(self.successors[a]);
            }
            frontier = next.intersection(within).difference(seen);
        }
        seen
    }

    /// Every atom of `set` reaches every atom of `set` by a non-empty path
    /// inside `set`. A singleton is a loop only with a self-edge.
    pub fn is_loop(&self, set: AtomSet) -> bool {
        !set.is_empty() && set.iter().all(|a| set.is_subset(self.reachable_within(a, set)))
    }
}

pub fn dependency_graph(gp: &GroundProgram) -> DependencyGraph {
    DependencyGraph::new(gp)
}

/// A set of atoms forming a loop of the positive dependency graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Loop(pub AtomSet);

impl Loop {
    pub fn atoms(self) -> AtomSet {
        self.0
    }
}

/// Loops `L ⊆ I` made of supported atoms that no rule supports externally.
///
/// Candidates are all subsets of the supported part of `I`, so the cost is
/// exponential in `|I|`; the atom cap keeps this bounded.
pub fn unfounded_loops(gp: &GroundProgram, i: Interpretation) -> Vec<Loop> {
    let graph = DependencyGraph::new(gp);
    unfounded_loops_with(gp, &graph, i)
}

pub(crate) fn unfounded_loops_with(
    gp: &GroundProgram,
    graph: &DependencyGraph,
    i: Interpretation,
) -> Vec<Loop> {
    let supported: AtomSet = i.iter().filter(|&a| is_supported(gp, a, i)).collect();
    let mut loops: Vec<Loop> = supported
        .subsets()
        .filter(|&l| graph.is_loop(l))
        .filter(|&l| !gp.rules().iter().any(|r| supports(r, l, i) == Support::External))
        .map(Loop)
        .collect();
    loops.sort();
    loops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::GroundConfig;

    const P_E: &str = "a :- not d.\nb :- a.\nc :- b.\nd :- c.\n#background.\n:- d.\n";

    fn gp(src: &str) -> GroundProgram {
        GroundProgram::from_source(src, &GroundConfig::default()).unwrap()
    }

    fn set(g: &GroundProgram, names: &str) -> AtomSet {
        g.atom_set(names.split(',')).unwrap()
    }

    #[test]
    fn applicability_on_running_example() {
        let g = gp(P_E);
        let r = |id: &str| g.rule(id).unwrap().clone();
        assert!(is_applicable(&r("r1"), set(&g, "a")));
        assert!(!is_applicable(&r("r3"), set(&g, "a")));
        let f = gp("x.");
        for i in AtomSet::all(1) {
            assert!(is_applicable(&f.rules()[0], i));
        }
    }

    #[test]
    fn satisfaction_on_running_example() {
        let g = gp(P_E);
        let r = |id: &str| g.rule(id).unwrap().clone();
        assert!(!is_satisfied(&r("r2"), set(&g, "a")));
        assert!(!is_satisfied(&r("r5"), set(&g, "d")));
        assert!(is_satisfied(&r("r1"), set(&g, "a")));
    }

    #[test]
    fn models() {
        let g = gp(P_E);
        assert!(!is_model(&g, set(&g, "a,b,c,d")));
        assert!(!is_model(&g, set(&g, "a,b,c")));
        let empty = gp("");
        assert!(is_model(&empty, AtomSet::EMPTY));
    }

    #[test]
    fn reduct_examples() {
        let g = gp("a :- not b.");
        let a = set(&g, "a");
        let b = set(&g, "b");
        let r0 = reduct(&g, AtomSet::EMPTY);
        assert_eq!(r0.rules().len(), 1);
        assert_eq!(r0.rules()[0].head, a);
        assert!(r0.rules()[0].is_fact());
        assert!(reduct(&g, b).rules().is_empty());
        assert_eq!(reduct(&g, b).atom_universe(), g.atom_universe());

        let e = gp(P_E);
        let red = reduct(&e, set(&e, "a"));
        let rendered: Vec<String> = red.to_program().rules.iter().map(|r| r.to_string()).collect();
        assert_eq!(
            rendered,
            ["r1: a.", "r2: b :- a.", "r3: c :- b.", "r4: d :- c.", "r5: :- d."]
        );
    }

    #[test]
    fn answer_set_checks() {
        let g = gp("a.");
        assert!(is_answer_set(&g, set(&g, "a")));
        let d = gp("a | b.");
        assert!(!is_answer_set(&d, set(&d, "a,b")));
        assert!(is_answer_set(&d, set(&d, "a")));
        let e = gp(P_E);
        assert!(AtomSet::all(4).all(|i| !is_answer_set(&e, i)));
    }

    #[test]
    fn answer_set_enumeration() {
        let g = gp("a :- not b.\nb :- not a.");
        let found = answer_sets(&g).unwrap();
        assert_eq!(found, vec![set(&g, "a"), set(&g, "b")]);
        assert!(answer_sets(&gp(P_E)).unwrap().is_empty());
        let f = gp("a.");
        assert_eq!(answer_sets(&f).unwrap(), vec![set(&f, "a")]);
    }

    #[test]
    fn support_kinds() {
        let e = gp(P_E);
        let a = set(&e, "a");
        assert_eq!(supports(e.rule("r1").unwrap(), a, a), Support::External);
        assert_eq!(
            supports(e.rule("r3").unwrap(), set(&e, "c"), a),
            Support::None
        );
        let cyc = gp("a :- b.\nb :- a.");
        let ab = set(&cyc, "a,b");
        assert_eq!(supports(cyc.rule("r1").unwrap(), ab, ab), Support::Internal);
    }

    #[test]
    fn disjunctive_support_requires_other_head_atoms_false() {
        let g = gp("a | b.");
        let r = &g.rules()[0];
        assert_eq!(supports(r, set(&g, "a"), set(&g, "a")), Support::External);
        assert_eq!(supports(r, set(&g, "a"), set(&g, "a,b")), Support::None);
        assert_eq!(supports(r, set(&g, "a,b"), set(&g, "a,b")), Support::External);
    }

    #[test]
    fn dependency_graph_edges() {
        let e = gp(P_E);
        let (a, b, c, d) = (0, 1, 2, 3);
        assert_eq!(
            dependency_graph(&e).edges(),
            [(b, a), (c, b), (d, c)].into_iter().collect()
        );
        let cyc = gp("a :- b.\nb :- a.");
        assert_eq!(
            dependency_graph(&cyc).edges(),
            [(0, 1), (1, 0)].into_iter().collect()
        );
        assert!(dependency_graph(&gp("a :- not b.\nc.")).edges().is_empty());
    }

    #[test]
    fn loops_and_self_edges() {
        let g = gp("a :- a.\nb :- c.\nc :- b.\nd :- c.");
        let graph = dependency_graph(&g);
        assert!(graph.is_loop(set(&g, "a")));
        assert!(!graph.is_loop(set(&g, "d")));
        assert!(graph.is_loop(set(&g, "b,c")));
        assert!(!graph.is_loop(set(&g, "b,c,d")));
        assert!(!graph.is_loop(AtomSet::EMPTY));
    }

    #[test]
    fn unfounded_loop_examples() {
        let cyc = gp("a :- b.\nb :- a.");
        let ab = set(&cyc, "a,b");
        assert_eq!(unfounded_loops(&cyc, ab), vec![Loop(ab)]);
        let e = gp(P_E);
        assert!(unfounded_loops(&e, set(&e, "a,b,c")).is_empty());
        for i in [cyc.clone(), e.clone()] {
            assert!(unfounded_loops(&i, AtomSet::EMPTY).is_empty());
        }
    }

    #[test]
    fn externally_supported_loop_is_founded() {
        let g = gp("a :- b.\nb :- a.\na :- not c.");
        assert!(unfounded_loops(&g, set(&g, "a,b")).is_empty());
        assert!(is_answer_set(&g, set(&g, "a,b")));
    }
}
