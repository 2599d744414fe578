//! Additive valuations and valuation profiles.

use std::fmt;

use num::{BigInt, One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rat::{from_json_value, to_json_value, Q};
use crate::set::{ItemSet, MAX_ITEMS};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("valuation entry for item {item} must be strictly positive (got {value})")]
    NonPositiveValue { item: usize, value: String },
    #[error("item count {m} exceeds the supported cap of {MAX_ITEMS}")]
    TooManyItems { m: usize },
    #[error("item set {set} is not within the universe of {m} items")]
    SetOutOfRange { set: ItemSet, m: usize },
    #[error("strong desire is defined only for nonempty sets")]
    EmptySet,
    #[error("profile needs at least one player")]
    NoPlayers,
    #[error("player {player} has {got} item values, expected {expected}")]
    MismatchedLength {
        player: usize,
        got: usize,
        expected: usize,
    },
    #[error("player index {player} out of range 1..={n}")]
    PlayerOutOfRange { player: usize, n: usize },
}

/// An additive valuation: one strictly positive exact rational per item.
///
/// The value of a bundle is the sum of its item values.
#[derive(Clone, PartialEq, Eq)]
pub struct Valuation {
    values: Vec<Q>,
}

impl Valuation {
    pub fn new(values: Vec<Q>) -> Result<Valuation, ModelError> {
        if values.len() > MAX_ITEMS {
            return Err(ModelError::TooManyItems { m: values.len() });
        }
        for (idx, v) in values.iter().enumerate() {
            if *v <= Q::zero() {
                return Err(ModelError::NonPositiveValue {
                    item: idx + 1,
                    value: crate::rat::format_rational(v),
                });
            }
        }
        Ok(Valuation { values })
    }

    /// Convenience constructor from integer item values.
    pub fn from_ints(values: &[i64]) -> Result<Valuation, ModelError> {
        Valuation::new(values.iter().map(|&n| crate::rat::qi(n)).collect())
    }

    /// Number of items the valuation covers.
    pub fn item_count(&self) -> usize {
        self.values.len()
    }

    /// Value of a single item (1-indexed).
    pub fn item(&self, item: usize) -> &Q {
        &self.values[item - 1]
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    /// Exact value of a bundle: `v(S) = Σ_{j∈S} v_j`, with `v(∅) = 0`.
    pub fn value(&self, set: ItemSet) -> Result<Q, ModelError> {
        if !set.within(self.item_count()) {
            return Err(ModelError::SetOutOfRange {
                set,
                m: self.item_count(),
            });
        }
        Ok(self.value_in(set))
    }

    /// Bundle value without the range check; callers guarantee `set` is
    /// within this valuation's universe.
    pub(crate) fn value_in(&self, set: ItemSet) -> Q {
        debug_assert!(set.within(self.item_count()));
        let mut total = Q::zero();
        for item in set.iter() {
            total += &self.values[item - 1];
        }
        total
    }

    pub fn total(&self) -> Q {
        self.value_in(ItemSet::full(self.item_count()))
    }

    /// Largest single item value.
    pub fn max_item_value(&self) -> Q {
        self.values.iter().max().cloned().unwrap_or_else(Q::zero)
    }

    /// True when every item of `set` is individually worth more than all the
    /// items outside `set` combined.
    pub fn strongly_desires(&self, set: ItemSet) -> Result<bool, ModelError> {
        if set.is_empty() {
            return Err(ModelError::EmptySet);
        }
        if !set.within(self.item_count()) {
            return Err(ModelError::SetOutOfRange {
                set,
                m: self.item_count(),
            });
        }
        let outside = self.value_in(set.complement(self.item_count()));
        Ok(set.iter().all(|item| self.values[item - 1] > outside))
    }

    /// All `2^m` subset sums, indexed by bitmask. Exponential; intended for
    /// small `m` only.
    pub fn subset_sums(&self) -> Vec<Q> {
        let m = self.item_count();
        let mut sums = vec![Q::zero(); 1usize << m];
        for mask in 1usize..(1usize << m) {
            let low = mask.trailing_zeros() as usize;
            sums[mask] = &sums[mask & (mask - 1)] + &self.values[low];
        }
        sums
    }

    /// True when no two distinct bundles have equal value.
    pub fn has_distinct_subset_sums(&self) -> bool {
        let mut sums = self.subset_sums();
        sums.sort_unstable();
        sums.windows(2).all(|w| w[0] != w[1])
    }

    /// Tie-free copy: adds `2^j / 2^kappa` to the value of item `j`.
    #[must_use]
    pub fn perturbed(&self, kappa: u32) -> Valuation {
        let denom = BigInt::one() << kappa;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, v)| v + Q::new(BigInt::one() << (idx as u32 + 1), denom.clone()))
            .collect();
        Valuation { values }
    }
}

impl fmt::Debug for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", crate::rat::format_rational(v))?;
        }
        write!(f, "]")
    }
}

/// An ordered list of player valuations over a common item universe.
#[derive(Clone, PartialEq, Eq)]
pub struct Profile {
    valuations: Vec<Valuation>,
}

impl Profile {
    pub fn new(valuations: Vec<Valuation>) -> Result<Profile, ModelError> {
        let Some(first) = valuations.first() else {
            return Err(ModelError::NoPlayers);
        };
        let m = first.item_count();
        for (i, v) in valuations.iter().enumerate() {
            if v.item_count() != m {
                return Err(ModelError::MismatchedLength {
                    player: i + 1,
                    got: v.item_count(),
                    expected: m,
                });
            }
        }
        Ok(Profile { valuations })
    }

    /// Two-player profile from integer value rows.
    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Profile, ModelError> {
        Profile::new(
            rows.iter()
                .map(|r| Valuation::from_ints(r))
                .collect::<Result<_, _>>()?,
        )
    }

    pub fn player_count(&self) -> usize {
        self.valuations.len()
    }

    pub fn item_count(&self) -> usize {
        self.valuations[0].item_count()
    }

    /// Valuation of a player (1-indexed).
    pub fn valuation(&self, player: usize) -> &Valuation {
        &self.valuations[player - 1]
    }

    pub fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }

    /// Replace one player's valuation, keeping the rest.
    pub fn with_valuation(&self, player: usize, v: Valuation) -> Result<Profile, ModelError> {
        if player < 1 || player > self.player_count() {
            return Err(ModelError::PlayerOutOfRange {
                player,
                n: self.player_count(),
            });
        }
        if v.item_count() != self.item_count() {
            return Err(ModelError::MismatchedLength {
                player,
                got: v.item_count(),
                expected: self.item_count(),
            });
        }
        let mut valuations = self.valuations.clone();
        valuations[player - 1] = v;
        Ok(Profile { valuations })
    }

    /// Profile restricted to a subset of players (1-indexed, ascending order
    /// preserved).
    pub fn restrict_players(&self, players: &[usize]) -> Profile {
        Profile {
            valuations: players
                .iter()
                .map(|&p| self.valuations[p - 1].clone())
                .collect(),
        }
    }

    /// Tie-free copy of the whole profile; every player gets the same
    /// `2^j / 2^kappa` bump on item `j`.
    #[must_use]
    pub fn perturb_strict(&self, kappa: u32) -> Profile {
        Profile {
            valuations: self.valuations.iter().map(|v| v.perturbed(kappa)).collect(),
        }
    }

    /// Membership test for the tie-free profile class: every player's subset
    /// sums are pairwise distinct. Exponential in the item count.
    pub fn is_strict_profile(&self) -> bool {
        self.valuations.iter().all(|v| v.has_distinct_subset_sums())
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Profile[")?;
        for v in &self.valuations {
            writeln!(f, "  {v:?}")?;
        }
        write!(f, "]")
    }
}

impl Serialize for Profile {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Profile", 2)?;
        st.serialize_field("m", &self.item_count())?;
        let rows: Vec<Vec<serde_json::Value>> = self
            .valuations
            .iter()
            .map(|v| v.values().iter().map(to_json_value).collect())
            .collect();
        st.serialize_field("values", &rows)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Profile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Profile, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            m: usize,
            values: Vec<Vec<serde_json::Value>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut valuations = Vec::with_capacity(raw.values.len());
        for (i, row) in raw.values.iter().enumerate() {
            if row.len() != raw.m {
                return Err(D::Error::custom(format!(
                    "player {} has {} values, expected m={}",
                    i + 1,
                    row.len(),
                    raw.m
                )));
            }
            let vals = row
                .iter()
                .map(from_json_value)
                .collect::<Result<Vec<_>, _>>()
                .map_err(D::Error::custom)?;
            valuations.push(Valuation::new(vals).map_err(D::Error::custom)?);
        }
        Profile::new(valuations).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{q, qi};

    #[test]
    fn bundle_values_match_worked_examples() {
        // Offer values in a six-item picking round.
        let v = Valuation::from_ints(&[3, 5, 5, 10, 4, 2]).unwrap();
        assert_eq!(v.value(ItemSet::from_items([2, 3])).unwrap(), qi(10));
        assert_eq!(v.value(ItemSet::EMPTY).unwrap(), qi(0));

        // A favorable-trade comparison on five items.
        let v = Valuation::from_ints(&[6, 2, 3, 7, 1]).unwrap();
        assert_eq!(v.value(ItemSet::from_items([2, 3])).unwrap(), qi(5));
        assert_eq!(v.value(ItemSet::singleton(4)).unwrap(), qi(7));
    }

    #[test]
    fn value_rejects_out_of_range_sets() {
        let v = Valuation::from_ints(&[1, 2]).unwrap();
        assert!(v.value(ItemSet::singleton(3)).is_err());
    }

    #[test]
    fn strong_desire_examples() {
        let v = Valuation::from_ints(&[100, 100, 1, 1]).unwrap();
        assert!(v.strongly_desires(ItemSet::from_items([1, 2])).unwrap());

        let v = Valuation::from_ints(&[100, 1, 2, 2]).unwrap();
        assert!(!v.strongly_desires(ItemSet::from_items([1, 2])).unwrap());

        let v = Valuation::from_ints(&[5, 5, 5, 5]).unwrap();
        assert!(!v.strongly_desires(ItemSet::singleton(1)).unwrap());

        assert!(v.strongly_desires(ItemSet::EMPTY).is_err());
    }

    #[test]
    fn perturbation_formula() {
        let v = Valuation::from_ints(&[1, 1]).unwrap();
        let p = v.perturbed(3);
        assert_eq!(p.values()[0], q(5, 4));
        assert_eq!(p.values()[1], q(3, 2));
    }

    #[test]
    fn perturbation_induces_distinct_subset_sums() {
        let base = Profile::from_int_rows(&[&[1, 1, 2, 2, 3], &[7, 7, 7, 7, 7]]).unwrap();
        assert!(!base.is_strict_profile());
        let m = base.item_count() as u32;
        assert!(base.perturb_strict(m + 1).is_strict_profile());
    }

    #[test]
    fn perturbation_preserves_strict_inequalities() {
        // With integer inputs and kappa = m+1 the total bump is below 1, so
        // any strict inequality between subset sums survives.
        let v = Valuation::from_ints(&[4, 9, 2, 6]).unwrap();
        let p = v.perturbed(5);
        let sums = v.subset_sums();
        let psums = p.subset_sums();
        for a in 0..sums.len() {
            for b in 0..sums.len() {
                if sums[a] < sums[b] {
                    assert!(psums[a] < psums[b]);
                }
            }
        }
    }

    #[test]
    fn strictness_examples() {
        let p = Profile::from_int_rows(&[&[1, 2, 4], &[1, 2, 4]]).unwrap();
        assert!(p.is_strict_profile());
        let p = Profile::from_int_rows(&[&[1, 1, 3], &[1, 2, 4]]).unwrap();
        assert!(!p.is_strict_profile());
    }

    #[test]
    fn profile_json_round_trip() {
        let p = Profile::new(vec![
            Valuation::new(vec![q(1, 3), qi(2)]).unwrap(),
            Valuation::new(vec![q(7, 2), q(1, 10)]).unwrap(),
        ])
        .unwrap();
        let json = serde_json::to_string(&p).unwrap();
        let back: Profile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
