//! Mechanism tables: a mechanism evaluated on every profile of a finite grid.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rules::AllocationRule;
use super::AnalysisError;
use crate::allocation::Allocation;
use crate::grid::GridSpec;
use crate::mechanism::{
    classify_gains, policy_executes, MechanismError, PickingExchangeSpec, TieBreak,
};
use crate::serial::SerialSpec;
use crate::set::ItemSet;

/// A finite map from grid profiles to allocations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MechanismTable {
    pub grid: GridSpec,
    pub rule_name: String,
    /// `bundles[index * players + (player - 1)]`
    bundles: Vec<ItemSet>,
}

impl MechanismTable {
    pub(crate) fn from_parts(grid: GridSpec, rule_name: String, bundles: Vec<ItemSet>) -> Self {
        MechanismTable {
            grid,
            rule_name,
            bundles,
        }
    }

    pub fn profile_count(&self) -> u64 {
        (self.bundles.len() / self.grid.players) as u64
    }

    pub fn bundle(&self, index: u64, player: usize) -> ItemSet {
        self.bundles[index as usize * self.grid.players + player - 1]
    }

    pub fn allocation(&self, index: u64) -> Allocation {
        let start = index as usize * self.grid.players;
        Allocation::new(
            self.bundles[start..start + self.grid.players].to_vec(),
            ItemSet::full(self.grid.m),
        )
        .expect("table entries are full allocations")
    }
}

fn check_rule_output(
    a: &Allocation,
    grid: &GridSpec,
    index: u64,
) -> Result<(), AnalysisError> {
    if a.player_count() != grid.players {
        return Err(AnalysisError::BadRuleOutput {
            index,
            reason: format!(
                "{} bundles for {} players",
                a.player_count(),
                grid.players
            ),
        });
    }
    if a.universe() != ItemSet::full(grid.m) {
        return Err(AnalysisError::BadRuleOutput {
            index,
            reason: format!("universe {} instead of {}", a.universe(), ItemSet::full(grid.m)),
        });
    }
    Ok(())
}

/// Tabulate an arbitrary allocation rule over a grid.
pub fn tabulate(
    rule: &dyn AllocationRule,
    grid: &GridSpec,
    budget: u64,
) -> Result<MechanismTable, AnalysisError> {
    let count = grid.check_budget(budget)?;
    let mut bundles = Vec::with_capacity(count as usize * grid.players);
    for index in 0..count {
        let p = grid.profile_at(index);
        let a = rule.allocate(&p)?;
        check_rule_output(&a, grid, index)?;
        for player in 1..=grid.players {
            bundles.push(a.bundle(player));
        }
    }
    Ok(MechanismTable::from_parts(
        grid.clone(),
        rule.name(),
        bundles,
    ))
}

/// Tabulate a picking-exchange mechanism, using exact integer arithmetic when
/// the grid permits it.
pub fn tabulate_spec(
    spec: &PickingExchangeSpec,
    grid: &GridSpec,
    budget: u64,
) -> Result<MechanismTable, AnalysisError> {
    let violations = spec.validate();
    if !violations.is_empty() {
        return Err(MechanismError::InvalidSpec(violations).into());
    }
    if grid.players != 2 || grid.m != spec.m {
        return Err(AnalysisError::GridMismatch {
            grid_m: grid.m,
            grid_players: grid.players,
            want_m: spec.m,
            want_players: 2,
        });
    }
    let count = grid.check_budget(budget)?;
    if let Some(scaled) = grid.scaled() {
        Ok(tabulate_spec_scaled(spec, grid, &scaled, count))
    } else {
        tabulate(spec, grid, budget)
    }
}

struct ScaledCombos {
    /// per-combo item values
    values: Vec<Vec<u64>>,
}

impl ScaledCombos {
    fn sum(&self, combo: usize, set: ItemSet) -> u64 {
        let vals = &self.values[combo];
        set.iter().map(|j| vals[j - 1]).sum()
    }
}

fn tabulate_spec_scaled(
    spec: &PickingExchangeSpec,
    grid: &GridSpec,
    scaled: &crate::grid::ScaledGrid,
    count: u64,
) -> MechanismTable {
    let per = grid.combos_per_player() as usize;
    let combos = ScaledCombos {
        values: (0..per as u64)
            .map(|c| scaled.combo_values(grid, c))
            .collect(),
    };

    // per-combo offer values and label argmaxes for both roles
    let offer_values = |offers: &[ItemSet]| -> Vec<Vec<u64>> {
        (0..per)
            .map(|c| offers.iter().map(|&o| combos.sum(c, o)).collect())
            .collect()
    };
    let o1_vals = offer_values(&spec.picking[0].offers);
    let o2_vals = offer_values(&spec.picking[1].offers);
    let label_argmax = |vals: &[u64]| -> usize {
        let max = vals.iter().max().unwrap();
        vals.iter().position(|v| v == max).unwrap()
    };
    let pick1_label: Vec<usize> = o1_vals.iter().map(|v| label_argmax(v)).collect();
    let pick2_label: Vec<usize> = o2_vals.iter().map(|v| label_argmax(v)).collect();

    // welfare tie-breaking needs the opponent's residual value per offer
    let residuals = |offers: &crate::mechanism::OfferSet| -> Vec<Vec<u64>> {
        (0..per)
            .map(|c| {
                offers
                    .offers
                    .iter()
                    .map(|&o| combos.sum(c, offers.base.difference(o)))
                    .collect()
            })
            .collect()
    };
    let welfare = spec.offer_tiebreak == TieBreak::Welfare;
    let (resid1, resid2) = if welfare {
        (residuals(&spec.picking[0]), residuals(&spec.picking[1]))
    } else {
        (Vec::new(), Vec::new())
    };

    // deal side values per combo
    let deal_vals = |side: fn(&crate::mechanism::ExchangeDeal) -> ItemSet| -> Vec<Vec<u64>> {
        (0..per)
            .map(|c| spec.deals.iter().map(|d| combos.sum(c, side(d))).collect())
            .collect()
    };
    let give_vals = deal_vals(|d| d.give);
    let take_vals = deal_vals(|d| d.take);

    let pick_welfare = |own_vals: &[u64], resid: &[u64]| -> usize {
        let max = own_vals.iter().max().unwrap();
        let mut best: Option<(u64, usize)> = None;
        for (k, v) in own_vals.iter().enumerate() {
            if v == max && best.map_or(true, |(r, _)| resid[k] > r) {
                best = Some((resid[k], k));
            }
        }
        best.unwrap().1
    };

    let n2 = spec.picking[1].base;
    let e1 = spec.endowments[0];
    let mut bundles = Vec::with_capacity(count as usize * 2);
    for c1 in 0..per {
        for c2 in 0..per {
            let k1 = if welfare {
                pick_welfare(&o1_vals[c1], &resid1[c2])
            } else {
                pick1_label[c1]
            };
            let k2 = if welfare {
                pick_welfare(&o2_vals[c2], &resid2[c1])
            } else {
                pick2_label[c2]
            };
            let mut x1 = spec.picking[0].offers[k1]
                .union(n2.difference(spec.picking[1].offers[k2]));
            let mut keep = e1;
            for (d, deal) in spec.deals.iter().enumerate() {
                let g1 = take_vals[c1][d].cmp(&give_vals[c1][d]);
                let g2 = give_vals[c2][d].cmp(&take_vals[c2][d]);
                if policy_executes(deal.policy, classify_gains(g1, g2), g1, g2) {
                    keep = keep.difference(deal.give);
                    x1 = x1.union(deal.take);
                }
            }
            x1 = x1.union(keep);
            bundles.push(x1);
            bundles.push(x1.complement(spec.m));
        }
    }
    MechanismTable::from_parts(grid.clone(), spec.name(), bundles)
}

/// Tabulate a serial mechanism over an `n`-player grid.
pub fn tabulate_serial(
    spec: &SerialSpec,
    grid: &GridSpec,
    budget: u64,
) -> Result<MechanismTable, AnalysisError> {
    spec.validate()?;
    if grid.players != spec.players || grid.m != spec.m || spec.universe != ItemSet::full(spec.m) {
        return Err(AnalysisError::GridMismatch {
            grid_m: grid.m,
            grid_players: grid.players,
            want_m: spec.m,
            want_players: spec.players,
        });
    }
    let count = grid.check_budget(budget)?;
    let mut bundles = Vec::with_capacity(count as usize * grid.players);
    for index in 0..count {
        let p = grid.profile_at(index);
        let a = spec.allocate_prevalidated(&p);
        check_rule_output(&a, grid, index)?;
        for player in 1..=grid.players {
            bundles.push(a.bundle(player));
        }
    }
    Ok(MechanismTable::from_parts(
        grid.clone(),
        "serial".into(),
        bundles,
    ))
}

// --- JSON form: {"grid":…, "rule":…, "bundles":[[…]…]} ---------------------

#[derive(Serialize, Deserialize)]
struct TableJson {
    grid: GridSpec,
    #[serde(default)]
    rule: String,
    bundles: Vec<Vec<ItemSet>>,
}

impl Serialize for MechanismTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let n = self.grid.players;
        TableJson {
            grid: self.grid.clone(),
            rule: self.rule_name.clone(),
            bundles: self.bundles.chunks(n).map(|c| c.to_vec()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MechanismTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<MechanismTable, D::Error> {
        let raw = TableJson::deserialize(deserializer)?;
        let expected = raw.grid.profile_count();
        if raw.bundles.len() as u128 != expected {
            return Err(serde::de::Error::custom(format!(
                "table has {} entries, grid has {} profiles",
                raw.bundles.len(),
                expected
            )));
        }
        let universe = ItemSet::full(raw.grid.m);
        let mut bundles = Vec::with_capacity(raw.bundles.len() * raw.grid.players);
        for (i, entry) in raw.bundles.iter().enumerate() {
            Allocation::new(entry.clone(), universe).map_err(|e| {
                serde::de::Error::custom(format!("entry {i} is not a full allocation: {e}"))
            })?;
            bundles.extend_from_slice(entry);
        }
        Ok(MechanismTable::from_parts(raw.grid, raw.rule, bundles))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DEFAULT_BUDGET;
    use crate::presets;
    use crate::rat::qi;

    #[test]
    fn budget_refusal_on_wide_grids() {
        let grid = GridSpec::with_default_levels(6, 2, false);
        let err = tabulate_spec(&presets::picking_six(), &grid, DEFAULT_BUDGET).unwrap_err();
        assert!(matches!(
            err,
            AnalysisError::Grid(crate::grid::GridError::BudgetExceeded { count, .. })
            if count == 4u128.pow(12)
        ));
    }

    #[test]
    fn picking_component_table_size() {
        // the four-item picking component on the default power levels
        let spec = PickingExchangeSpec::picking_only(
            4,
            crate::mechanism::OfferSet::new(
                ItemSet::range(1, 4),
                vec![
                    ItemSet::from_items([1, 2]),
                    ItemSet::from_items([2, 3]),
                    ItemSet::singleton(4),
                ],
            ),
            crate::mechanism::OfferSet::degenerate(),
        );
        let grid = GridSpec::new(4, GridSpec::default_levels(4), false, 2).unwrap();
        assert_eq!(grid.value_levels, vec![qi(1), qi(5), qi(25), qi(125)]);
        let t = tabulate_spec(&spec, &grid, DEFAULT_BUDGET).unwrap();
        assert_eq!(t.profile_count(), 65536);
    }

    #[test]
    fn tabulation_is_deterministic() {
        let grid = GridSpec::new(5, vec![qi(1), qi(6)], true, 2).unwrap();
        let a = tabulate_spec(&presets::exchange_five(), &grid, DEFAULT_BUDGET).unwrap();
        let b = tabulate_spec(&presets::exchange_five(), &grid, DEFAULT_BUDGET).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scaled_path_matches_generic_path() {
        for perturb in [false, true] {
            for spec in [presets::exchange_five(), {
                let mut s = presets::exchange_five();
                s.offer_tiebreak = TieBreak::Welfare;
                s
            }] {
                let grid = GridSpec::new(5, vec![qi(1), qi(3), qi(9)], perturb, 2).unwrap();
                let fast = tabulate_spec(&spec, &grid, DEFAULT_BUDGET).unwrap();
                let slow = tabulate(&spec, &grid, DEFAULT_BUDGET).unwrap();
                assert_eq!(fast.bundles, slow.bundles, "perturb={perturb}");
            }
        }
        // a spec with picking ties exercises the tie-breaking paths
        let spec = presets::picking_six();
        let grid = GridSpec::new(6, vec![qi(1), qi(7)], false, 2).unwrap();
        let fast = tabulate_spec(&spec, &grid, DEFAULT_BUDGET).unwrap();
        let slow = tabulate(&spec, &grid, DEFAULT_BUDGET).unwrap();
        assert_eq!(fast.bundles, slow.bundles);
    }

    #[test]
    fn table_json_round_trip() {
        let grid = GridSpec::new(2, vec![qi(1), qi(3)], false, 2).unwrap();
        let spec = crate::singleton::make_singleton_spec(2, ItemSet::singleton(1), true).unwrap();
        let t = tabulate_spec(&spec, &grid, DEFAULT_BUDGET).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: MechanismTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }
}
