//! Structural decomposition of grid-truthful two-player tables.
//!
//! From the maximal grid-controlled families the table yields the union and
//! intersection structure (owned regions, endowments, picking regions and
//! offers), and from the endowment-zone entries the minimal feasible
//! exchanges. Inconsistencies with the expected structure are reported as
//! falsification findings, never repaired.

use std::collections::BTreeMap;

use super::control::{ControlScanner, GridControl};
use super::table::MechanismTable;
use super::verify::verify_truthful;
use super::AnalysisError;
use crate::mechanism::{
    DealPolicy, ExchangeDeal, OfferSet, PickingExchangeSpec, TieBreak,
};
use crate::set::ItemSet;

/// The structure recovered from a grid-truthful table.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Maximal grid-controlled families per player.
    pub maximal_controlled: [Vec<ItemSet>; 2],
    /// Unions of the maximal families: all items a player controls.
    pub controlled_union: [ItemSet; 2],
    /// Intersections of the maximal families: the endowments.
    pub endowments: [ItemSet; 2],
    /// Owned minus endowed: the picking regions.
    pub picking_regions: [ItemSet; 2],
    /// Offers recovered as maximal sets minus the endowment, ascending
    /// bitmask order.
    pub offers: [Vec<ItemSet>; 2],
    /// Minimal feasible exchanges `(give ⊆ E1, take ⊆ E2)`.
    pub deals: Vec<(ItemSet, ItemSet)>,
    /// Entries skipped because their picking zone did not match the argmax
    /// prediction (always zero for tables of valid mechanisms on tie-free
    /// grids).
    pub skipped_entries: u64,
}

impl Decomposition {
    /// Rebuild an executable mechanism from the recovered structure
    /// (label order = ascending bitmask; neutral deals default).
    pub fn to_spec(&self, m: usize) -> PickingExchangeSpec {
        let offer_set = |region: ItemSet, offers: &[ItemSet]| {
            if region.is_empty() {
                OfferSet::degenerate()
            } else {
                OfferSet::new(region, offers.to_vec())
            }
        };
        PickingExchangeSpec {
            m,
            picking: [
                offer_set(self.picking_regions[0], &self.offers[0]),
                offer_set(self.picking_regions[1], &self.offers[1]),
            ],
            endowments: self.endowments,
            deals: self
                .deals
                .iter()
                .map(|&(give, take)| ExchangeDeal {
                    give,
                    take,
                    policy: DealPolicy::ImprovesSomeone,
                })
                .collect(),
            offer_tiebreak: TieBreak::Label,
        }
    }
}

/// Decompose a two-player table. Refuses non-truthful tables and tables with
/// vacuous control queries; reports structural contradictions as findings.
pub fn decompose(t: &MechanismTable) -> Result<Decomposition, AnalysisError> {
    if t.grid.players != 2 {
        return Err(AnalysisError::NotTwoPlayers);
    }
    let report = verify_truthful(t)?;
    if !report.is_truthful() {
        return Err(AnalysisError::NotTruthful {
            violations: report.total_violations,
        });
    }

    let scanner = ControlScanner::build(t)?;
    let a1 = scanner.maximal_family(t, 1)?;
    let a2 = scanner.maximal_family(t, 2)?;

    let mut findings: Vec<String> = Vec::new();
    let m = t.grid.m;

    // every item controlled, as a singleton, by exactly one player
    for x in 1..=m {
        let s = ItemSet::singleton(x);
        let owners: Vec<usize> = (1..=2)
            .filter(|&pl| matches!(scanner.control(t, pl, s), GridControl::Holds))
            .collect();
        if owners.len() != 1 {
            findings.push(format!(
                "item {x} is controlled by {} players instead of exactly one",
                owners.len()
            ));
        }
    }

    let union_of = |family: &[ItemSet]| {
        family
            .iter()
            .fold(ItemSet::EMPTY, |acc, &s| acc.union(s))
    };
    let intersection_of = |family: &[ItemSet]| match family.split_first() {
        None => ItemSet::EMPTY,
        Some((&first, rest)) => rest.iter().fold(first, |acc, &s| acc.intersection(s)),
    };
    let c = [union_of(&a1), union_of(&a2)];
    if !c[0].intersection(c[1]).is_empty() {
        findings.push(format!(
            "owned regions overlap on {}",
            c[0].intersection(c[1])
        ));
    }
    if c[0].union(c[1]) != ItemSet::full(m) {
        findings.push(format!(
            "owned regions cover only {}",
            c[0].union(c[1])
        ));
    }
    if !findings.is_empty() {
        return Err(AnalysisError::Falsified { findings });
    }

    let e = [intersection_of(&a1), intersection_of(&a2)];
    let n = [c[0].difference(e[0]), c[1].difference(e[1])];
    let recover_offers = |family: &[ItemSet], endow: ItemSet, region: ItemSet| -> Vec<ItemSet> {
        if region.is_empty() {
            return vec![ItemSet::EMPTY];
        }
        let mut offers: Vec<ItemSet> = family.iter().map(|&s| s.difference(endow)).collect();
        offers.sort();
        offers.dedup();
        offers
    };
    let offers = [
        recover_offers(&a1, e[0], n[0]),
        recover_offers(&a2, e[1], n[1]),
    ];

    let (deals, skipped) = recover_deals(t, &offers, n, e, &mut findings)?;
    if !findings.is_empty() {
        return Err(AnalysisError::Falsified { findings });
    }

    Ok(Decomposition {
        maximal_controlled: [a1, a2],
        controlled_union: c,
        endowments: e,
        picking_regions: n,
        offers,
        deals,
        skipped_entries: skipped,
    })
}

/// Scan the table's endowment zone for feasible exchanges and distill the
/// minimal ones and their partners.
fn recover_deals(
    t: &MechanismTable,
    offers: &[Vec<ItemSet>; 2],
    regions: [ItemSet; 2],
    endowments: [ItemSet; 2],
    findings: &mut Vec<String>,
) -> Result<(Vec<(ItemSet, ItemSet)>, u64), AnalysisError> {
    let grid = &t.grid;
    let per = grid.combos_per_player() as u64;
    let (e1, e2) = (endowments[0], endowments[1]);
    if e1.is_empty() && e2.is_empty() {
        return Ok((Vec::new(), 0));
    }

    // per-combo predicted picks (unique argmax on tie-free grids; ties make
    // the entry unusable for exchange isolation)
    let predicted = |player: usize| -> Result<Vec<Option<ItemSet>>, AnalysisError> {
        let list = &offers[player - 1];
        if regions[player - 1].is_empty() {
            return Ok(vec![Some(ItemSet::EMPTY); per as usize]);
        }
        let mut out = Vec::with_capacity(per as usize);
        if let Some(scaled) = grid.scaled() {
            for cidx in 0..per {
                let vals = scaled.combo_values(grid, cidx);
                let sum = |s: ItemSet| -> u64 { s.iter().map(|j| vals[j - 1]).sum() };
                let best = list.iter().map(|&o| sum(o)).max().unwrap();
                let winners: Vec<&ItemSet> =
                    list.iter().filter(|&&o| sum(o) == best).collect();
                out.push((winners.len() == 1).then(|| *winners[0]));
            }
        } else {
            for cidx in 0..per {
                let v = grid.valuation_at(cidx);
                let best = list.iter().map(|&o| v.value_in(o)).max().unwrap();
                let winners: Vec<&ItemSet> = list
                    .iter()
                    .filter(|&&o| v.value_in(o) == best)
                    .collect();
                out.push((winners.len() == 1).then(|| *winners[0]));
            }
        }
        Ok(out)
    };
    let pred1 = predicted(1)?;
    let pred2 = predicted(2)?;

    // observed exchange pairs, reading only entries whose picking zones match
    let mut skipped = 0u64;
    let mut pairs: BTreeMap<(ItemSet, ItemSet), u64> = BTreeMap::new();
    for c1 in 0..per {
        for c2 in 0..per {
            let index = c1 * per + c2;
            let x1 = t.bundle(index, 1);
            let picks_match = match (&pred1[c1 as usize], &pred2[c2 as usize]) {
                (Some(p1), Some(p2)) => {
                    x1.intersection(regions[0]) == *p1
                        && t.bundle(index, 2).intersection(regions[1]) == *p2
                }
                _ => false,
            };
            if !picks_match {
                skipped += 1;
                continue;
            }
            let give = e1.difference(x1);
            let take = x1.intersection(e2);
            if give.is_empty() != take.is_empty() {
                findings.push(format!(
                    "one-sided exchange observed at profile {index}: gave {give}, took {take}"
                ));
                continue;
            }
            if !give.is_empty() {
                *pairs.entry((give, take)).or_insert(0) += 1;
            }
        }
    }

    let gives: Vec<ItemSet> = {
        let mut v: Vec<ItemSet> = pairs.keys().map(|&(s, _)| s).collect();
        v.sort();
        v.dedup();
        v
    };
    let takes: Vec<ItemSet> = {
        let mut v: Vec<ItemSet> = pairs.keys().map(|&(_, t)| t).collect();
        v.sort();
        v.dedup();
        v
    };
    let minimal = |family: &[ItemSet]| -> Vec<ItemSet> {
        family
            .iter()
            .copied()
            .filter(|&s| !family.iter().any(|&r| r.is_proper_subset(s)))
            .collect()
    };
    let min_gives = minimal(&gives);
    let min_takes = minimal(&takes);

    // each minimal exchangeable set has a unique partner, itself minimal
    let mut deals: BTreeMap<ItemSet, ItemSet> = BTreeMap::new();
    for &s in &min_gives {
        let partners: Vec<ItemSet> = pairs
            .keys()
            .filter(|&&(g, _)| g == s)
            .map(|&(_, t)| t)
            .collect();
        match partners.as_slice() {
            [t] => {
                if !min_takes.contains(t) {
                    findings.push(format!(
                        "minimal give {s} trades with non-minimal take {t}"
                    ));
                }
                deals.insert(s, *t);
            }
            many => findings.push(format!(
                "minimal give {s} has {} partners instead of one",
                many.len()
            )),
        }
    }
    for &tk in &min_takes {
        let partners: Vec<ItemSet> = pairs
            .keys()
            .filter(|&&(_, t2)| t2 == tk)
            .map(|&(g, _)| g)
            .collect();
        match partners.as_slice() {
            [g] => {
                if deals.get(g) != Some(&tk) {
                    findings.push(format!(
                        "take {tk} pairs with {g}, inconsistent with the give-side pairing"
                    ));
                }
            }
            many => findings.push(format!(
                "minimal take {tk} has {} partners instead of one",
                many.len()
            )),
        }
    }

    // every observed exchange must be a union of minimal ones with matching
    // partner union
    for (&(give, take), _) in &pairs {
        let parts: Vec<ItemSet> = min_gives
            .iter()
            .copied()
            .filter(|&s| s.is_subset(give))
            .collect();
        let g_union = parts.iter().fold(ItemSet::EMPTY, |acc, &s| acc.union(s));
        let t_union = parts
            .iter()
            .filter_map(|s| deals.get(s))
            .fold(ItemSet::EMPTY, |acc, &t2| acc.union(t2));
        if g_union != give || t_union != take {
            findings.push(format!(
                "exchange ({give},{take}) is not a union of minimal exchanges"
            ));
        }
    }

    Ok((deals.into_iter().collect(), skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::rules::DictatorRule;
    use crate::analysis::table::{tabulate, tabulate_spec};
    use crate::grid::{GridSpec, DEFAULT_BUDGET};
    use crate::presets;
    use crate::rat::qi;

    #[test]
    fn exchange_example_recovers_endowments_and_deal() {
        let grid = GridSpec::with_default_levels(5, 2, true);
        let t = tabulate_spec(&presets::exchange_five(), &grid, DEFAULT_BUDGET).unwrap();
        let d = decompose(&t).unwrap();
        assert_eq!(d.endowments[0], ItemSet::range(1, 3));
        assert_eq!(d.endowments[1], ItemSet::range(4, 5));
        assert_eq!(d.picking_regions[0], ItemSet::EMPTY);
        assert_eq!(d.picking_regions[1], ItemSet::EMPTY);
        assert_eq!(
            d.deals,
            vec![(ItemSet::from_items([2, 3]), ItemSet::singleton(4))]
        );
        assert_eq!(d.skipped_entries, 0);
    }

    #[test]
    fn picking_example_recovers_offers() {
        let grid = GridSpec::new(6, vec![qi(1), qi(7), qi(49)], true, 2).unwrap();
        let t = tabulate_spec(&presets::picking_six(), &grid, DEFAULT_BUDGET).unwrap();
        let d = decompose(&t).unwrap();
        assert_eq!(d.endowments, [ItemSet::EMPTY, ItemSet::EMPTY]);
        assert_eq!(d.picking_regions[0], ItemSet::range(1, 4));
        assert_eq!(d.picking_regions[1], ItemSet::range(5, 6));
        let mut expected = vec![
            ItemSet::from_items([1, 2]),
            ItemSet::from_items([2, 3]),
            ItemSet::singleton(4),
        ];
        expected.sort();
        assert_eq!(d.offers[0], expected);
        assert!(d.deals.is_empty());
    }

    #[test]
    fn dictatorship_decomposes_to_a_full_endowment() {
        let grid = GridSpec::with_default_levels(3, 2, true);
        let t = tabulate(&DictatorRule { m: 3, player: 1 }, &grid, DEFAULT_BUDGET).unwrap();
        let d = decompose(&t).unwrap();
        assert_eq!(d.endowments[0], ItemSet::full(3));
        assert_eq!(d.controlled_union[1], ItemSet::EMPTY);
        // and it re-executes as the same table
        let spec = d.to_spec(3);
        let t2 = tabulate_spec(&spec, &grid, DEFAULT_BUDGET).unwrap();
        for i in 0..t.profile_count() {
            assert_eq!(t.bundle(i, 1), t2.bundle(i, 1));
        }
    }

    #[test]
    fn non_truthful_tables_are_refused() {
        let rule = crate::analysis::rules::SpiteRule(presets::picking_six());
        let grid = GridSpec::new(6, vec![qi(1), qi(7)], false, 2).unwrap();
        let t = tabulate(&rule, &grid, DEFAULT_BUDGET).unwrap();
        assert!(matches!(
            decompose(&t),
            Err(AnalysisError::NotTruthful { .. })
        ));
    }

    #[test]
    fn combined_example_round_trips() {
        // two levels keep the eleven-item table tiny while still exercising
        // both components
        let grid = GridSpec::new(11, vec![qi(1), qi(12)], true, 2).unwrap();
        let t = tabulate_spec(&presets::combined_eleven(), &grid, DEFAULT_BUDGET).unwrap();
        let d = decompose(&t).unwrap();
        assert_eq!(d.picking_regions[0], ItemSet::range(1, 4));
        assert_eq!(d.endowments[0], ItemSet::range(7, 9));
        assert_eq!(
            d.deals,
            vec![(ItemSet::from_items([8, 9]), ItemSet::singleton(10))]
        );
        let spec = d.to_spec(11);
        let t2 = tabulate_spec(&spec, &grid, DEFAULT_BUDGET).unwrap();
        for i in 0..t.profile_count() {
            assert_eq!(t.bundle(i, 1), t2.bundle(i, 1), "entry {i}");
        }
    }
}
