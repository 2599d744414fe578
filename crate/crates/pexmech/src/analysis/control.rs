//! Grid-relative control detection: a player controls a set when every grid
//! profile in which he strongly desires it hands him the whole set.
//!
//! Grid control is a necessary-condition approximation of control over the
//! full profile space: a refutation found on the grid is real, while a
//! "holds" verdict is evidence relative to the grid. The default power-level
//! grids contain the steep witness patterns that make spec-built mechanisms
//! classify exactly as the theory predicts.

use super::table::MechanismTable;
use super::AnalysisError;
use crate::set::{subsets_of, ItemSet};

/// Verdict of a grid control query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridControl {
    /// Every strong-desire witness profile hands the player the whole set.
    Holds,
    /// Some witness profile denies the player part of the set.
    Fails { witness_index: u64 },
    /// The grid contains no profile in which the player strongly desires the
    /// set; the query says nothing.
    Vacuous,
}

/// Shared precomputation for control queries on one table: per-combo
/// strong-desire flags and, per player, the items received against *every*
/// opponent behavior.
pub(crate) struct ControlScanner {
    /// `desires[combo][mask]`: the combo's valuation strongly desires the
    /// nonempty set `mask`.
    desires: Vec<Vec<bool>>,
    /// `always[player-1][combo]`: intersection of the player's bundles over
    /// all profiles where the player plays `combo`.
    always: Vec<Vec<ItemSet>>,
    per: u64,
}

impl ControlScanner {
    pub(crate) fn build(t: &MechanismTable) -> Result<ControlScanner, AnalysisError> {
        let grid = &t.grid;
        if grid.m > 16 {
            return Err(AnalysisError::TableTooWide { m: grid.m, cap: 16 });
        }
        let per = grid.combos_per_player() as u64;
        let nsets = 1usize << grid.m;

        let mut desires = Vec::with_capacity(per as usize);
        if let Some(scaled) = grid.scaled() {
            for c in 0..per {
                let vals = scaled.combo_values(grid, c);
                let sums = scaled.subset_sums(&vals);
                let full = nsets - 1;
                let mut row = vec![false; nsets];
                for s in 1..nsets {
                    let outside = sums[full ^ s];
                    let min_in = ItemSet::from_bits(s as u128)
                        .iter()
                        .map(|j| vals[j - 1])
                        .min()
                        .unwrap();
                    row[s] = min_in > outside;
                }
                desires.push(row);
            }
        } else {
            for c in 0..per {
                let v = grid.valuation_at(c);
                let mut row = vec![false; nsets];
                for s in 1..nsets {
                    row[s] = v
                        .strongly_desires(ItemSet::from_bits(s as u128))
                        .expect("nonempty in-range set");
                }
                desires.push(row);
            }
        }

        let n = grid.players;
        let full = ItemSet::full(grid.m);
        let mut always = vec![vec![full; per as usize]; n];
        for index in 0..t.profile_count() {
            let combos = grid.combos_of_index(index);
            for player in 1..=n {
                let c = combos[player - 1] as usize;
                let cell = &mut always[player - 1][c];
                *cell = cell.intersection(t.bundle(index, player));
            }
        }
        Ok(ControlScanner {
            desires,
            always,
            per,
        })
    }

    fn desires(&self, combo: u64, set: ItemSet) -> bool {
        self.desires[combo as usize][set.bits() as usize]
    }

    /// Control query for a nonempty set.
    pub(crate) fn control(
        &self,
        t: &MechanismTable,
        player: usize,
        set: ItemSet,
    ) -> GridControl {
        let mut seen_witness = false;
        for c in 0..self.per {
            if !self.desires(c, set) {
                continue;
            }
            seen_witness = true;
            if !set.is_subset(self.always[player - 1][c as usize]) {
                return GridControl::Fails {
                    witness_index: self.find_refutation(t, player, set, c),
                };
            }
        }
        if seen_witness {
            GridControl::Holds
        } else {
            GridControl::Vacuous
        }
    }

    /// Locate a concrete profile refuting control at the player's combo `c`.
    fn find_refutation(&self, t: &MechanismTable, player: usize, set: ItemSet, c: u64) -> u64 {
        let grid = &t.grid;
        let n = grid.players;
        let per = self.per;
        let stride = per.pow((n - player) as u32);
        let prefixes = per.pow((player - 1) as u32);
        for prefix in 0..prefixes {
            for suffix in 0..stride {
                let index = prefix * stride * per + suffix + c * stride;
                if !set.is_subset(t.bundle(index, player)) {
                    return index;
                }
            }
        }
        unreachable!("always-received table said a refutation exists");
    }

    /// All sets the player grid-controls with no controlled strict superset.
    pub(crate) fn maximal_family(
        &self,
        t: &MechanismTable,
        player: usize,
    ) -> Result<Vec<ItemSet>, AnalysisError> {
        let m = t.grid.m;
        let mut controlled: Vec<ItemSet> = Vec::new();
        for s in subsets_of(ItemSet::full(m)) {
            if s.is_empty() {
                continue;
            }
            match self.control(t, player, s) {
                GridControl::Holds => controlled.push(s),
                GridControl::Fails { .. } => {}
                GridControl::Vacuous => {
                    return Err(AnalysisError::VacuousControl { player, set: s })
                }
            }
        }
        Ok(controlled
            .iter()
            .copied()
            .filter(|&s| {
                !controlled
                    .iter()
                    .any(|&t2| s != t2 && s.is_proper_subset(t2))
            })
            .collect())
    }
}

/// Does `player` control the nonempty set `s` on this table's grid?
pub fn controls_on_grid(
    t: &MechanismTable,
    player: usize,
    s: ItemSet,
) -> Result<GridControl, AnalysisError> {
    if player < 1 || player > t.grid.players {
        return Err(AnalysisError::BadPlayer(player));
    }
    if s.is_empty() || !s.within(t.grid.m) {
        return Err(AnalysisError::Mechanism(
            crate::valuation::ModelError::EmptySet.into(),
        ));
    }
    let scanner = ControlScanner::build(t)?;
    Ok(scanner.control(t, player, s))
}

/// All sets the player grid-controls with no grid-controlled strict superset.
///
/// Errs when some candidate set has no strong-desire witness on the grid
/// (the default power-level grids always have witnesses).
pub fn maximal_controlled_sets(
    t: &MechanismTable,
    player: usize,
) -> Result<Vec<ItemSet>, AnalysisError> {
    if player < 1 || player > t.grid.players {
        return Err(AnalysisError::BadPlayer(player));
    }
    let scanner = ControlScanner::build(t)?;
    scanner.maximal_family(t, player)
}

/// First pair-sized controlled set found, if any: the witness that the
/// mechanism is incompatible with the relaxed fairness notions.
pub fn yields_control_of_pairs(
    t: &MechanismTable,
) -> Result<Option<(usize, ItemSet)>, AnalysisError> {
    let scanner = ControlScanner::build(t)?;
    let m = t.grid.m;
    for player in 1..=t.grid.players.min(2) {
        for s in subsets_of(ItemSet::full(m)) {
            if s.len() != 2 {
                continue;
            }
            if scanner.control(t, player, s) == GridControl::Holds {
                return Ok(Some((player, s)));
            }
        }
    }
    Ok(None)
}
