use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of a ground atom inside its [`GroundProgram`](super::GroundProgram).
pub type AtomId = usize;

/// Hard upper bound on the atom universe imposed by the bitmask encoding.
pub const MAX_ATOMS: usize = 63;

/// A set of ground atoms of one program, stored as a bitmask over atom ids.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AtomSet(u64);

/// An interpretation is the set of atoms it makes true.
pub type Interpretation = AtomSet;

impl AtomSet {
    pub const EMPTY: AtomSet = AtomSet(0);

    pub fn from_bits(bits: u64) -> AtomSet {
        AtomSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// All atoms `0..n`.
    pub fn full(n: usize) -> AtomSet {
        debug_assert!(n <= MAX_ATOMS);
        AtomSet((1u64 << n) - 1)
    }

    pub fn singleton(id: AtomId) -> AtomSet {
        AtomSet(1 << id)
    }

    pub fn contains(self, id: AtomId) -> bool {
        self.0 >> id & 1 == 1
    }

    pub fn insert(&mut self, id: AtomId) {
        self.0 |= 1 << id;
    }

    pub fn with(self, id: AtomId) -> AtomSet {
        AtomSet(self.0 | 1 << id)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: AtomSet) -> AtomSet {
        AtomSet(self.0 | other.0)
    }

    pub fn intersection(self, other: AtomSet) -> AtomSet {
        AtomSet(self.0 & other.0)
    }

    pub fn difference(self, other: AtomSet) -> AtomSet {
        AtomSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: AtomSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: AtomSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = AtomId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let id = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(id)
            }
        })
    }

    /// Every subset of `self`, including `self` and the empty set, in
    /// decreasing bit order.
    pub fn subsets(self) -> impl Iterator<Item = AtomSet> {
        let full = self.0;
        let mut next = Some(full);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 { None } else { Some((cur - 1) & full) };
            Some(AtomSet(cur))
        })
    }

    /// Every subset of `self` except `self`.
    pub fn proper_subsets(self) -> impl Iterator<Item = AtomSet> {
        self.subsets().skip(1)
    }

    /// All `2^n` interpretations over atoms `0..n`, in increasing bit order.
    pub fn all(n: usize) -> impl Iterator<Item = AtomSet> {
        (0..1u64 << n).map(AtomSet)
    }
}

impl FromIterator<AtomId> for AtomSet {
    fn from_iter<I: IntoIterator<Item = AtomId>>(iter: I) -> Self {
        let mut set = AtomSet::EMPTY;
        for id in iter {
            set.insert(id);
        }
        set
    }
}

impl fmt::Debug for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerates_power_set() {
        let s: AtomSet = [0, 2, 5].into_iter().collect();
        let subs: Vec<AtomSet> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|x| x.is_subset(s)));
        assert_eq!(s.proper_subsets().count(), 7);
        assert!(!s.proper_subsets().any(|x| x == s));
        assert_eq!(AtomSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn iter_yields_ids_in_order() {
        let s: AtomSet = [3, 1, 7].into_iter().collect();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 3, 7]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(7) && !s.contains(2));
    }
}
