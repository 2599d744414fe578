//! Finite valuation grids: the sub-domains over which brute-force analysis runs.

use num::{BigInt, Integer, One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rat::{from_json_value, qi, to_json_value, Q};
use crate::set::MAX_ITEMS;
use crate::valuation::{Profile, Valuation};

/// Default cap on the number of grid profiles an operation will enumerate.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid needs a nonempty, strictly ascending list of positive levels")]
    BadLevels,
    #[error("grid needs at least one player and at least one item (m <= {MAX_ITEMS})")]
    BadShape,
    #[error("grid has {count} profiles, exceeding the budget of {budget}")]
    BudgetExceeded { count: u128, budget: u64 },
}

/// A finite grid of profiles: every player/item value is drawn from
/// `value_levels`, optionally made tie-free by the `2^j / 2^(m+1)`
/// perturbation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub m: usize,
    pub value_levels: Vec<Q>,
    pub perturb: bool,
    pub players: usize,
}

impl GridSpec {
    pub fn new(
        m: usize,
        value_levels: Vec<Q>,
        perturb: bool,
        players: usize,
    ) -> Result<GridSpec, GridError> {
        if m == 0 || m > MAX_ITEMS || players == 0 {
            return Err(GridError::BadShape);
        }
        if value_levels.is_empty()
            || value_levels[0] <= Q::zero()
            || value_levels.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(GridError::BadLevels);
        }
        Ok(GridSpec {
            m,
            value_levels,
            perturb,
            players,
        })
    }

    /// Power levels `{1, B, B^2, B^3}` with `B = m + 1`; these include the
    /// steep value patterns that witness strong desire against any mixture of
    /// lower levels.
    pub fn default_levels(m: usize) -> Vec<Q> {
        let b = (m + 1) as i64;
        vec![qi(1), qi(b), qi(b * b), qi(b * b * b)]
    }

    pub fn with_default_levels(m: usize, players: usize, perturb: bool) -> GridSpec {
        GridSpec::new(m, GridSpec::default_levels(m), perturb, players)
            .expect("default grid is valid")
    }

    /// Perturbation exponent used when `perturb` is set.
    pub fn kappa(&self) -> u32 {
        self.m as u32 + 1
    }

    /// Level combinations per player: `L^m`.
    pub fn combos_per_player(&self) -> u128 {
        (self.value_levels.len() as u128).pow(self.m as u32)
    }

    /// Total number of grid profiles: `L^(m*n)`.
    pub fn profile_count(&self) -> u128 {
        self.combos_per_player().pow(self.players as u32)
    }

    /// Refuse with the exact count when the grid exceeds `budget`.
    pub fn check_budget(&self, budget: u64) -> Result<u64, GridError> {
        let count = self.profile_count();
        if count > budget as u128 {
            Err(GridError::BudgetExceeded { count, budget })
        } else {
            Ok(count as u64)
        }
    }

    /// Decode a per-player combo index into level indices, item 1 most
    /// significant (item `m` varies fastest).
    pub fn combo_levels(&self, mut combo: u64) -> Vec<usize> {
        let l = self.value_levels.len() as u64;
        let mut digits = vec![0usize; self.m];
        for slot in digits.iter_mut().rev() {
            *slot = (combo % l) as usize;
            combo /= l;
        }
        digits
    }

    /// Materialize the valuation for a per-player combo index.
    pub fn valuation_at(&self, combo: u64) -> Valuation {
        let digits = self.combo_levels(combo);
        let values: Vec<Q> = digits
            .iter()
            .map(|&d| self.value_levels[d].clone())
            .collect();
        let v = Valuation::new(values).expect("grid levels are positive");
        if self.perturb {
            v.perturbed(self.kappa())
        } else {
            v
        }
    }

    /// Materialize the profile for a global index; player 1's combo is the
    /// most significant digit.
    pub fn profile_at(&self, index: u64) -> Profile {
        let per = self.combos_per_player() as u64;
        let mut rem = index;
        let mut combos = vec![0u64; self.players];
        for slot in combos.iter_mut().rev() {
            *slot = rem % per;
            rem /= per;
        }
        Profile::new(combos.iter().map(|&c| self.valuation_at(c)).collect())
            .expect("grid valuations share m")
    }

    /// Per-player combo indices of a global profile index.
    pub fn combos_of_index(&self, index: u64) -> Vec<u64> {
        let per = self.combos_per_player() as u64;
        let mut rem = index;
        let mut combos = vec![0u64; self.players];
        for slot in combos.iter_mut().rev() {
            *slot = rem % per;
            rem /= per;
        }
        combos
    }

    /// Global profile index from per-player combo indices.
    pub fn index_of_combos(&self, combos: &[u64]) -> u64 {
        let per = self.combos_per_player() as u64;
        combos.iter().fold(0u64, |acc, &c| acc * per + c)
    }

    /// Enumerate all grid profiles in deterministic index order.
    pub fn enumerate(&self, budget: u64) -> Result<impl Iterator<Item = Profile> + '_, GridError> {
        let count = self.check_budget(budget)?;
        Ok((0..count).map(move |i| self.profile_at(i)))
    }

    /// Integer fast path: exact scaled values for every `(level, item)` pair,
    /// or `None` when the levels do not fit `u64` arithmetic.
    pub(crate) fn scaled(&self) -> Option<ScaledGrid> {
        ScaledGrid::build(self)
    }
}

impl Serialize for GridSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("GridSpec", 4)?;
        st.serialize_field("m", &self.m)?;
        let levels: Vec<serde_json::Value> = self.value_levels.iter().map(to_json_value).collect();
        st.serialize_field("levels", &levels)?;
        st.serialize_field("perturb", &self.perturb)?;
        st.serialize_field("players", &self.players)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for GridSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<GridSpec, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            m: usize,
            levels: Vec<serde_json::Value>,
            #[serde(default)]
            perturb: bool,
            #[serde(default = "two")]
            players: usize,
        }
        fn two() -> usize {
            2
        }
        let raw = Raw::deserialize(deserializer)?;
        let levels = raw
            .levels
            .iter()
            .map(from_json_value)
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        GridSpec::new(raw.m, levels, raw.perturb, raw.players).map_err(serde::de::Error::custom)
    }
}

/// Exact u64 representation of grid values: every value is
/// `level * scale (+ 2^j when perturbed)` with `scale = lcm(denoms) * 2^kappa`,
/// so comparisons and sums of scaled values agree with the rationals.
pub(crate) struct ScaledGrid {
    /// `item_value[level][j]` is the scaled value of item `j+1` at `level`.
    item_value: Vec<Vec<u64>>,
    pub m: usize,
}

impl ScaledGrid {
    fn build(grid: &GridSpec) -> Option<ScaledGrid> {
        let mut denom_lcm = BigInt::one();
        for level in &grid.value_levels {
            denom_lcm = denom_lcm.lcm(level.denom());
        }
        let kappa_scale = BigInt::one() << grid.kappa();
        let scale = &denom_lcm * &kappa_scale;
        let mut item_value = Vec::with_capacity(grid.value_levels.len());
        for level in &grid.value_levels {
            let base = (level * Q::from_integer(scale.clone())).to_integer();
            let base = base.to_u64()?;
            let mut per_item = Vec::with_capacity(grid.m);
            for j in 1..=grid.m {
                let bump = if grid.perturb {
                    // 2^j / 2^kappa, scaled by denom_lcm * 2^kappa = denom_lcm * 2^j
                    (&denom_lcm << j).to_u64()?
                } else {
                    0
                };
                let v = base.checked_add(bump)?;
                per_item.push(v);
            }
            item_value.push(per_item);
        }
        // Bundle sums must not overflow u64.
        let max = *item_value.last()?.last()?;
        max.checked_mul(grid.m as u64)?;
        Some(ScaledGrid {
            item_value,
            m: grid.m,
        })
    }

    /// Scaled item values of a per-player combo index.
    pub fn combo_values(&self, grid: &GridSpec, combo: u64) -> Vec<u64> {
        grid.combo_levels(combo)
            .iter()
            .enumerate()
            .map(|(j, &level)| self.item_value[level][j])
            .collect()
    }

    /// All `2^m` scaled subset sums for a combo, indexed by bitmask.
    pub fn subset_sums(&self, values: &[u64]) -> Vec<u64> {
        let mut sums = vec![0u64; 1 << self.m];
        for mask in 1usize..(1 << self.m) {
            let low = mask.trailing_zeros() as usize;
            sums[mask] = sums[mask & (mask - 1)] + values[low];
        }
        sums
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::q;
    use crate::set::ItemSet;

    #[test]
    fn profile_counts() {
        let g = GridSpec::new(2, vec![qi(1), qi(3)], false, 2).unwrap();
        assert_eq!(g.profile_count(), 16);
        let g = GridSpec::new(3, vec![qi(1), qi(4), qi(16)], false, 2).unwrap();
        assert_eq!(g.profile_count(), 729);
        assert_eq!(g.enumerate(1000).unwrap().count(), 729);
    }

    #[test]
    fn budget_refusal_carries_count() {
        let g = GridSpec::with_default_levels(6, 2, false);
        match g.check_budget(DEFAULT_BUDGET) {
            Err(GridError::BudgetExceeded { count, .. }) => {
                assert_eq!(count, 4u128.pow(12));
            }
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn default_levels_match_power_pattern() {
        assert_eq!(
            GridSpec::default_levels(4),
            vec![qi(1), qi(5), qi(25), qi(125)]
        );
    }

    #[test]
    fn perturbed_streams_are_strict() {
        let g = GridSpec::new(3, vec![qi(1), qi(4)], true, 2).unwrap();
        for p in g.enumerate(100).unwrap() {
            assert!(p.is_strict_profile());
        }
    }

    #[test]
    fn enumeration_is_deterministic_and_ordered() {
        let g = GridSpec::new(2, vec![qi(1), qi(3)], false, 2).unwrap();
        let first = g.profile_at(0);
        assert_eq!(first.valuation(1).values()[0], qi(1));
        let last = g.profile_at(15);
        assert_eq!(last.valuation(2).values()[1], qi(3));
        // item m varies fastest within player 2
        let second = g.profile_at(1);
        assert_eq!(second.valuation(2).values(), &[qi(1), qi(3)]);
    }

    #[test]
    fn scaled_values_agree_with_rationals() {
        let g = GridSpec::new(3, vec![q(1, 2), qi(4), qi(9)], true, 2).unwrap();
        let scaled = g.scaled().expect("fits u64");
        for combo in 0..g.combos_per_player() as u64 {
            let ints = scaled.combo_values(&g, combo);
            let sums = scaled.subset_sums(&ints);
            let v = g.valuation_at(combo);
            let rsums = v.subset_sums();
            // cross-check relative order of every pair of subset sums
            for a in 0..rsums.len() {
                for b in 0..rsums.len() {
                    assert_eq!(sums[a].cmp(&sums[b]), rsums[a].cmp(&rsums[b]));
                }
            }
            assert_eq!(
                sums[0b111],
                ints[0] + ints[1] + ints[2],
                "subset sums consistent"
            );
            let _ = ItemSet::full(3);
        }
    }
}
