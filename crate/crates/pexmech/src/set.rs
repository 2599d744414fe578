//! Item sets as bitmasks over 1-indexed item labels.

use std::fmt;

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Hard cap on the number of items; item labels live in `1..=MAX_ITEMS`.
pub const MAX_ITEMS: usize = 120;

/// A subset of the item universe `{1, ..., m}`.
///
/// Items are 1-indexed in the public API; internally the set is a bitmask
/// with item `j` stored at bit `j - 1`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ItemSet(u128);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    /// The full universe `{1, ..., m}`.
    pub fn full(m: usize) -> ItemSet {
        assert!(m <= MAX_ITEMS, "item count {m} exceeds cap {MAX_ITEMS}");
        if m == 0 {
            ItemSet(0)
        } else {
            ItemSet(u128::MAX >> (128 - m))
        }
    }

    /// The singleton `{item}` (1-indexed).
    pub fn singleton(item: usize) -> ItemSet {
        assert!(item >= 1 && item <= MAX_ITEMS, "item {item} out of range");
        ItemSet(1u128 << (item - 1))
    }

    pub fn from_items<I: IntoIterator<Item = usize>>(items: I) -> ItemSet {
        let mut s = ItemSet::EMPTY;
        for item in items {
            s = s.with(item);
        }
        s
    }

    /// A contiguous range `{lo, ..., hi}` (inclusive, 1-indexed).
    pub fn range(lo: usize, hi: usize) -> ItemSet {
        ItemSet::from_items(lo..=hi)
    }

    pub fn from_bits(bits: u128) -> ItemSet {
        ItemSet(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn contains(self, item: usize) -> bool {
        item >= 1 && item <= MAX_ITEMS && self.0 & (1u128 << (item - 1)) != 0
    }

    #[must_use]
    pub fn with(self, item: usize) -> ItemSet {
        assert!(item >= 1 && item <= MAX_ITEMS, "item {item} out of range");
        ItemSet(self.0 | (1u128 << (item - 1)))
    }

    #[must_use]
    pub fn without(self, item: usize) -> ItemSet {
        assert!(item >= 1 && item <= MAX_ITEMS, "item {item} out of range");
        ItemSet(self.0 & !(1u128 << (item - 1)))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[must_use]
    pub fn union(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 & !other.0)
    }

    /// Complement within the universe `{1, ..., m}`.
    #[must_use]
    pub fn complement(self, m: usize) -> ItemSet {
        ItemSet(ItemSet::full(m).0 & !self.0)
    }

    pub fn is_subset(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_proper_subset(self, other: ItemSet) -> bool {
        self.is_subset(other) && self != other
    }

    pub fn is_disjoint(self, other: ItemSet) -> bool {
        self.0 & other.0 == 0
    }

    /// True when the set lies within `{1, ..., m}`.
    pub fn within(self, m: usize) -> bool {
        self.is_subset(ItemSet::full(m))
    }

    /// Items in ascending label order.
    pub fn iter(self) -> Items {
        Items(self.0)
    }

    /// Smallest item label, if any.
    pub fn min_item(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize + 1)
        }
    }
}

/// Iterator over item labels in ascending order.
pub struct Items(u128);

impl Iterator for Items {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            let item = self.0.trailing_zeros() as usize + 1;
            self.0 &= self.0 - 1;
            Some(item)
        }
    }
}

impl IntoIterator for ItemSet {
    type Item = usize;
    type IntoIter = Items;

    fn into_iter(self) -> Items {
        self.iter()
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> ItemSet {
        ItemSet::from_items(iter)
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, item) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{item}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for ItemSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for item in self.iter() {
            seq.serialize_element(&item)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ItemSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<ItemSet, D::Error> {
        struct ItemSetVisitor;

        impl<'de> Visitor<'de> for ItemSetVisitor {
            type Value = ItemSet;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a list of 1-indexed item labels")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<ItemSet, A::Error> {
                let mut s = ItemSet::EMPTY;
                while let Some(item) = seq.next_element::<usize>()? {
                    if item < 1 || item > MAX_ITEMS {
                        return Err(serde::de::Error::custom(format!(
                            "item label {item} out of range 1..={MAX_ITEMS}"
                        )));
                    }
                    s = s.with(item);
                }
                Ok(s)
            }
        }

        deserializer.deserialize_seq(ItemSetVisitor)
    }
}

/// All subsets of `universe`, enumerated as submasks in ascending bit order.
pub fn subsets_of(universe: ItemSet) -> impl Iterator<Item = ItemSet> {
    let full = universe.bits();
    let mut next: Option<u128> = Some(0);
    std::iter::from_fn(move || {
        let cur = next?;
        // standard submask enumeration: (cur - full) & full steps through submasks
        next = if cur == full {
            None
        } else {
            Some(cur.wrapping_sub(full) & full)
        };
        Some(ItemSet(cur))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let s = ItemSet::from_items([2, 3]);
        let t = ItemSet::from_items([3, 4]);
        assert_eq!(s.union(t), ItemSet::from_items([2, 3, 4]));
        assert_eq!(s.intersection(t), ItemSet::singleton(3));
        assert_eq!(s.difference(t), ItemSet::singleton(2));
        assert_eq!(s.complement(4), ItemSet::from_items([1, 4]));
        assert!(s.is_proper_subset(ItemSet::full(4)));
        assert!(!s.is_proper_subset(s));
        assert_eq!(s.len(), 2);
        assert_eq!(s.to_string(), "{2,3}");
    }

    #[test]
    fn subset_enumeration_counts() {
        let u = ItemSet::from_items([1, 3, 5]);
        let subs: Vec<_> = subsets_of(u).collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|s| s.is_subset(u)));
        assert_eq!(subs[0], ItemSet::EMPTY);
        assert_eq!(*subs.last().unwrap(), u);
    }

    #[test]
    fn serde_round_trip() {
        let s = ItemSet::from_items([1, 4, 6]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[1,4,6]");
        let back: ItemSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
