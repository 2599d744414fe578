//! Allocations: ordered partitions of an item universe among players.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::set::ItemSet;

#[derive(Debug, Error)]
pub enum AllocationError {
    #[error("bundles for players {a} and {b} overlap on {overlap}")]
    Overlap { a: usize, b: usize, overlap: ItemSet },
    #[error("bundles cover {got} but the universe is {expected}")]
    NotCovering { got: ItemSet, expected: ItemSet },
    #[error("allocation needs at least one bundle")]
    NoBundles,
}

/// A full allocation: pairwise-disjoint bundles whose union is the universe.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation {
    bundles: Vec<ItemSet>,
}

impl Allocation {
    pub fn new(bundles: Vec<ItemSet>, universe: ItemSet) -> Result<Allocation, AllocationError> {
        if bundles.is_empty() {
            return Err(AllocationError::NoBundles);
        }
        let mut seen = ItemSet::EMPTY;
        for (i, b) in bundles.iter().enumerate() {
            let overlap = seen.intersection(*b);
            if !overlap.is_empty() {
                let a = bundles[..i]
                    .iter()
                    .position(|prev| !prev.intersection(*b).is_empty())
                    .unwrap();
                return Err(AllocationError::Overlap {
                    a: a + 1,
                    b: i + 1,
                    overlap,
                });
            }
            seen = seen.union(*b);
        }
        if seen != universe {
            return Err(AllocationError::NotCovering {
                got: seen,
                expected: universe,
            });
        }
        Ok(Allocation { bundles })
    }

    /// Two-player allocation over `{1..m}` given player 1's bundle.
    pub fn two_player(x1: ItemSet, m: usize) -> Allocation {
        Allocation {
            bundles: vec![x1, x1.complement(m)],
        }
    }

    pub fn player_count(&self) -> usize {
        self.bundles.len()
    }

    /// Bundle of a player (1-indexed).
    pub fn bundle(&self, player: usize) -> ItemSet {
        self.bundles[player - 1]
    }

    pub fn bundles(&self) -> &[ItemSet] {
        &self.bundles
    }

    pub fn universe(&self) -> ItemSet {
        self.bundles
            .iter()
            .fold(ItemSet::EMPTY, |acc, b| acc.union(*b))
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.bundles.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "X{}=[", i + 1)?;
            for (k, item) in b.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{item}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_partition() {
        let u = ItemSet::full(4);
        assert!(Allocation::new(
            vec![ItemSet::from_items([1, 3]), ItemSet::from_items([2, 4])],
            u
        )
        .is_ok());
        assert!(matches!(
            Allocation::new(
                vec![ItemSet::from_items([1, 3]), ItemSet::from_items([3, 4])],
                u
            ),
            Err(AllocationError::Overlap { .. })
        ));
        assert!(matches!(
            Allocation::new(vec![ItemSet::from_items([1, 3]), ItemSet::singleton(4)], u),
            Err(AllocationError::NotCovering { .. })
        ));
    }

    #[test]
    fn display_format() {
        let a = Allocation::two_player(ItemSet::from_items([2, 3, 6]), 6);
        assert_eq!(a.to_string(), "X1=[2,3,6] X2=[1,4,5]");
    }
}
