//! Small fixed-width vertex sets and growable edge sets.

use std::fmt;

pub use fixedbitset::FixedBitSet as EdgeSet;

/// Upper limit on instance size imposed by [`VertexSet`].
pub const MAX_VERTICES: usize = 128;

/// A set of vertex indices below [`MAX_VERTICES`], stored as a bitmask.
///
/// Ordering is by the raw mask, which is a total order used for
/// deterministic tie-breaking; see [`VertexSet::canonical_cmp`] for the
/// lexicographic order on sorted member lists.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct VertexSet(pub u128);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub fn singleton(v: usize) -> Self {
        VertexSet(1u128 << v)
    }

    /// The set {0, .., n-1}.
    pub fn full(n: usize) -> Self {
        if n >= 128 {
            VertexSet(u128::MAX)
        } else {
            VertexSet((1u128 << n) - 1)
        }
    }

    pub fn from_iter<I: IntoIterator<Item = usize>>(it: I) -> Self {
        let mut s = VertexSet::EMPTY;
        for v in it {
            s.insert(v);
        }
        s
    }

    pub fn contains(self, v: usize) -> bool {
        v < 128 && (self.0 >> v) & 1 == 1
    }

    pub fn insert(&mut self, v: usize) {
        self.0 |= 1u128 << v;
    }

    pub fn remove(&mut self, v: usize) {
        self.0 &= !(1u128 << v);
    }

    pub fn with(self, v: usize) -> Self {
        VertexSet(self.0 | (1u128 << v))
    }

    pub fn without(self, v: usize) -> Self {
        VertexSet(self.0 & !(1u128 << v))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn union(self, o: Self) -> Self {
        VertexSet(self.0 | o.0)
    }

    pub fn intersection(self, o: Self) -> Self {
        VertexSet(self.0 & o.0)
    }

    pub fn difference(self, o: Self) -> Self {
        VertexSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: Self) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_disjoint(self, o: Self) -> bool {
        self.0 & o.0 == 0
    }

    pub fn iter(self) -> VertexIter {
        VertexIter(self.0)
    }

    /// Lexicographic comparison of the sorted member lists.
    pub fn canonical_cmp(self, o: Self) -> std::cmp::Ordering {
        self.iter().cmp(o.iter())
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(it: I) -> Self {
        VertexSet::from_iter(it)
    }
}

pub struct VertexIter(u128);

impl Iterator for VertexIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let v = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(v)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for VertexIter {}

/// Compare two lists of vertex sets (each already in canonical order).
pub fn canonical_cmp_sets(a: &[VertexSet], b: &[VertexSet]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let c = x.canonical_cmp(*y);
        if c.is_ne() {
            return c;
        }
    }
    a.len().cmp(&b.len())
}

/// Sort sets by smallest member (a canonical order for partitions).
pub fn sort_canonical(sets: &mut [VertexSet]) {
    sets.sort_by(|a, b| a.canonical_cmp(*b));
}
