use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{parse_program, Atom, AtomId, AtomSet, Program, ProgramError, Rule, Term, MAX_ATOMS};

pub const DEFAULT_ATOM_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundConfig {
    /// Grounding fails once more than this many distinct ground atoms appear.
    pub atom_cap: usize,
}

impl Default for GroundConfig {
    fn default() -> Self {
        GroundConfig {
            atom_cap: DEFAULT_ATOM_CAP,
        }
    }
}

/// Where a ground rule came from: the source rule and the substitution applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    pub source: String,
    pub bindings: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundRule {
    pub id: String,
    pub head: AtomSet,
    pub pos_body: AtomSet,
    pub neg_body: AtomSet,
    pub origin: Origin,
}

impl GroundRule {
    pub fn is_constraint(&self) -> bool {
        self.head.is_empty()
    }

    pub fn is_fact(&self) -> bool {
        self.pos_body.is_empty() && self.neg_body.is_empty()
    }
}

/// A variable-free program over an interned atom universe `At(P)`.
///
/// Atoms are sorted canonically, so atom ids (and therefore bit positions of
/// every [`AtomSet`]) are stable for a given rule set.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "GroundProgramData", into = "GroundProgramData")]
pub struct GroundProgram {
    atoms: Vec<Atom>,
    rules: Vec<GroundRule>,
    background: BTreeSet<String>,
    atom_cap: usize,
    index: HashMap<String, AtomId>,
    rule_index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct GroundProgramData {
    atoms: Vec<Atom>,
    rules: Vec<GroundRule>,
    background: BTreeSet<String>,
    atom_cap: usize,
}

impl From<GroundProgramData> for GroundProgram {
    fn from(d: GroundProgramData) -> Self {
        GroundProgram::assemble(d.atoms, d.rules, d.background, d.atom_cap)
    }
}

impl From<GroundProgram> for GroundProgramData {
    fn from(g: GroundProgram) -> Self {
        GroundProgramData {
            atoms: g.atoms,
            rules: g.rules,
            background: g.background,
            atom_cap: g.atom_cap,
        }
    }
}

impl PartialEq for GroundProgram {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
            && self.rules == other.rules
            && self.background == other.background
            && self.atom_cap == other.atom_cap
    }
}

impl Eq for GroundProgram {}

impl GroundProgram {
    fn assemble(
        atoms: Vec<Atom>,
        rules: Vec<GroundRule>,
        background: BTreeSet<String>,
        atom_cap: usize,
    ) -> GroundProgram {
        let index = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.to_string(), i))
            .collect();
        let rule_index = rules
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), i))
            .collect();
        GroundProgram {
            atoms,
            rules,
            background,
            atom_cap,
            index,
            rule_index,
        }
    }

    /// Parses and grounds program text in one step.
    pub fn from_source(text: &str, config: &GroundConfig) -> Result<GroundProgram, ProgramError> {
        ground(&parse_program(text)?, config)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_id(&self, name: &str) -> Option<AtomId> {
        self.index.get(name).copied()
    }

    /// `At(P)` as a set.
    pub fn atom_universe(&self) -> AtomSet {
        AtomSet::full(self.atoms.len())
    }

    pub fn rules(&self) -> &[GroundRule] {
        &self.rules
    }

    pub fn rule(&self, id: &str) -> Option<&GroundRule> {
        self.rule_index.get(id).map(|&i| &self.rules[i])
    }

    /// Ids of rules declared correct in the source.
    pub fn background(&self) -> &BTreeSet<String> {
        &self.background
    }

    /// The atom cap this program was grounded under; enumeration over the
    /// interpretation space is limited to it.
    pub fn atom_cap(&self) -> usize {
        self.atom_cap
    }

    /// Atom names of a set, in atom order.
    pub fn names(&self, set: AtomSet) -> Vec<String> {
        set.iter().map(|id| self.atoms[id].to_string()).collect()
    }

    /// Renders a set as `{a,b}`.
    pub fn show(&self, set: AtomSet) -> String {
        format!("{{{}}}", self.names(set).join(","))
    }

    /// Resolves atom names into a set; fails on the first unknown name.
    pub fn atom_set<'a, I>(&self, names: I) -> Result<AtomSet, String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        names
            .into_iter()
            .map(str::trim)
            .filter(|n| !n.is_empty())
            .map(|n| self.atom_id(n).ok_or_else(|| n.to_string()))
            .collect()
    }

    /// A copy with the same atom universe and a different rule list.
    pub fn with_rules(&self, rules: Vec<GroundRule>) -> GroundProgram {
        let background = rules
            .iter()
            .filter(|r| self.background.contains(&r.id))
            .map(|r| r.id.clone())
            .collect();
        GroundProgram::assemble(self.atoms.clone(), rules, background, self.atom_cap)
    }

    /// Converts back into a (variable-free) source program.
    pub fn to_program(&self) -> Program {
        let atoms = |s: AtomSet| s.iter().map(|i| self.atoms[i].clone()).collect();
        Program {
            rules: self
                .rules
                .iter()
                .map(|r| Rule {
                    id: r.id.clone(),
                    head: atoms(r.head),
                    pos_body: atoms(r.pos_body),
                    neg_body: atoms(r.neg_body),
                })
                .collect(),
            background: self.background.clone(),
        }
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_program())
    }
}

fn substitute(atom: &Atom, binding: &HashMap<&str, &str>) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom
            .args
            .iter()
            .map(|t| match t {
                Term::Variable(v) => Term::Constant(binding[v.as_str()].to_string()),
                c => c.clone(),
            })
            .collect(),
    }
}

/// Steps an odometer over `base^digits.len()`; false once it wraps around.
fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

struct Instance {
    id: String,
    origin: Origin,
    head: Vec<Atom>,
    pos: Vec<Atom>,
    neg: Vec<Atom>,
}

/// Instantiates every rule with every total substitution of its variables by
/// constants of the program. Identical ground rules are kept once (first id).
pub fn ground(program: &Program, config: &GroundConfig) -> Result<GroundProgram, ProgramError> {
    let cap = config.atom_cap.min(MAX_ATOMS);
    let constants: Vec<String> = program.constants().into_iter().collect();
    let mut universe: BTreeSet<Atom> = BTreeSet::new();
    let mut instances = Vec::new();

    for rule in &program.rules {
        if let Some(variable) = rule.unsafe_variable() {
            return Err(ProgramError::UnsafeRule {
                rule: rule.id.clone(),
                variable,
            });
        }
        let vars = rule.variables();
        if !vars.is_empty() && constants.is_empty() {
            continue;
        }
        // Odometer over constants^vars, last variable fastest.
        let mut digits = vec![0usize; vars.len()];
        loop {
            let values: Vec<&str> = digits.iter().map(|&d| constants[d].as_str()).collect();
            let binding: HashMap<&str, &str> =
                vars.iter().map(String::as_str).zip(values.iter().copied()).collect();
            let inst = |atoms: &[Atom]| -> Vec<Atom> {
                atoms.iter().map(|a| substitute(a, &binding)).collect()
            };
            let instance = Instance {
                id: if vars.is_empty() {
                    rule.id.clone()
                } else {
                    format!("{}[{}]", rule.id, values.join(","))
                },
                origin: Origin {
                    source: rule.id.clone(),
                    bindings: vars
                        .iter()
                        .zip(&values)
                        .map(|(v, c)| (v.clone(), c.to_string()))
                        .collect(),
                },
                head: inst(&rule.head),
                pos: inst(&rule.pos_body),
                neg: inst(&rule.neg_body),
            };
            for atom in instance.head.iter().chain(&instance.pos).chain(&instance.neg) {
                if universe.insert(atom.clone()) && universe.len() > cap {
                    return Err(ProgramError::AtomCap { cap });
                }
            }
            instances.push(instance);

            if !advance(&mut digits, constants.len()) {
                break;
            }
        }
    }

    let atoms: Vec<Atom> = universe.into_iter().collect();
    let id_of: HashMap<&Atom, AtomId> = atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mask = |list: &[Atom]| -> AtomSet { list.iter().map(|a| id_of[a]).collect() };

    let mut seen_bodies = HashSet::new();
    let mut seen_ids = HashSet::new();
    let mut rules = Vec::new();
    for inst in instances {
        let (head, pos_body, neg_body) = (mask(&inst.head), mask(&inst.pos), mask(&inst.neg));
        if !seen_bodies.insert((head, pos_body, neg_body)) {
            continue;
        }
        if !seen_ids.insert(inst.id.clone()) {
            return Err(ProgramError::DuplicateLabel {
                label: inst.id,
                line: 0,
            });
        }
        rules.push(GroundRule {
            id: inst.id,
            head,
            pos_body,
            neg_body,
            origin: inst.origin,
        });
    }
    let background = rules
        .iter()
        .filter(|r| program.background.contains(&r.origin.source))
        .map(|r| r.id.clone())
        .collect();
    Ok(GroundProgram::assemble(atoms, rules, background, cap))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(src: &str) -> GroundProgram {
        GroundProgram::from_source(src, &GroundConfig::default()).unwrap()
    }

    fn rendered(g: &GroundProgram) -> Vec<String> {
        g.to_program().rules.iter().map(|r| r.to_string()).collect()
    }

    const P_E: &str = "a :- not d.\nb :- a.\nc :- b.\nd :- c.\n#background.\n:- d.\n";

    #[test]
    fn grounds_two_constants() {
        let g = gp("p(X) :- q(X).\nq(1).\nq(2).");
        let mut rules = rendered(&g);
        rules.sort();
        assert_eq!(
            rules,
            [
                "r1[1]: p(1) :- q(1).",
                "r1[2]: p(2) :- q(2).",
                "r2: q(1).",
                "r3: q(2)."
            ]
        );
        assert_eq!(g.rule("r1[2]").unwrap().origin.bindings, [("X".into(), "2".into())]);
    }

    #[test]
    fn ground_program_grounds_to_itself() {
        let g = gp(P_E);
        assert_eq!(g.names(g.atom_universe()), ["a", "b", "c", "d"]);
        assert_eq!(
            rendered(&g),
            [
                "r1: a :- not d.",
                "r2: b :- a.",
                "r3: c :- b.",
                "r4: d :- c.",
                "r5: :- d."
            ]
        );
        assert_eq!(g.background().iter().collect::<Vec<_>>(), ["r5"]);
    }

    #[test]
    fn single_constant_pair() {
        let g = gp("p(X,Y) :- q(X), q(Y).\nq(1).");
        let r = g.rule("r1[1,1]").unwrap();
        assert_eq!(g.show(r.head), "{p(1,1)}");
        assert_eq!(g.show(r.pos_body), "{q(1)}");
        assert_eq!(g.rules().len(), 2);
    }

    #[test]
    fn atom_universe_examples() {
        assert!(gp("").atom_universe().is_empty());
        let g = gp("a | b.\n:- c.");
        assert_eq!(g.names(g.atom_universe()), ["a", "b", "c"]);
    }

    #[test]
    fn duplicate_ground_rules_are_merged() {
        let g = gp("p(1) :- q(X), r(X).\nq(1).\nr(1).\nfirst: p(1) :- q(1), r(1).");
        let ids: Vec<&str> = g.rules().iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["r1[1]", "r2", "r3"]);
    }

    #[test]
    fn atom_cap_is_enforced() {
        let src = "p(X,Y) :- q(X), q(Y).\nq(1).\nq(2).\nq(3).\nq(4).";
        let err = GroundProgram::from_source(src, &GroundConfig { atom_cap: 8 }).unwrap_err();
        assert_eq!(err, ProgramError::AtomCap { cap: 8 });
        assert!(GroundProgram::from_source(src, &GroundConfig { atom_cap: 20 }).is_ok());
    }

    #[test]
    fn variables_without_constants_produce_no_instances() {
        let g = gp("p(X) :- q(X).\na.");
        assert_eq!(rendered(&g), ["r2: a."]);
    }

    #[test]
    fn serde_round_trip_restores_lookup_tables() {
        let g = gp(P_E);
        let json = serde_json::to_string(&g).unwrap();
        let back: GroundProgram = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.atom_id("c"), Some(2));
        assert!(back.rule("r4").is_some());
    }
}
