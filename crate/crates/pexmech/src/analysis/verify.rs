//! Exhaustive deviation search over a mechanism table.

use num::Zero;

use super::table::MechanismTable;
use super::AnalysisError;
use crate::rat::Q;
use crate::set::ItemSet;
use crate::valuation::{Profile, Valuation};

/// Materialized witnesses are capped at this many; the total count is exact.
pub const WITNESS_CAP: usize = 1000;

/// A profitable unilateral deviation: at `profile_index`, `player` can report
/// the grid valuation with combo index `deviation_combo` and gain `gain` in
/// true value.
#[derive(Clone, Debug)]
pub struct DeviationWitness {
    pub profile_index: u64,
    pub player: usize,
    pub deviation_combo: u64,
    pub gain: Q,
}

impl DeviationWitness {
    pub fn profile(&self, t: &MechanismTable) -> Profile {
        t.grid.profile_at(self.profile_index)
    }

    pub fn deviation(&self, t: &MechanismTable) -> Valuation {
        t.grid.valuation_at(self.deviation_combo)
    }
}

/// Outcome of a full deviation scan.
#[derive(Debug)]
pub struct VerifyReport {
    /// Total `(profile, player, alternative report)` cases examined.
    pub checks: u64,
    /// Number of those cases with a strict gain.
    pub total_violations: u64,
    /// Up to [`WITNESS_CAP`] materialized violating cases.
    pub witnesses: Vec<DeviationWitness>,
}

impl VerifyReport {
    pub fn is_truthful(&self) -> bool {
        self.total_violations == 0
    }
}

/// Per-combo bundle values, in exact integers when the grid allows and exact
/// rationals otherwise.
enum BundleValues {
    Ints(Vec<Vec<u64>>),
    Rats(Vec<Vec<Q>>),
}

impl BundleValues {
    fn build(t: &MechanismTable) -> Result<BundleValues, AnalysisError> {
        let grid = &t.grid;
        if grid.m > 20 {
            return Err(AnalysisError::TableTooWide { m: grid.m, cap: 20 });
        }
        let per = grid.combos_per_player() as u64;
        if let Some(scaled) = grid.scaled() {
            let sums = (0..per)
                .map(|c| scaled.subset_sums(&scaled.combo_values(grid, c)))
                .collect();
            Ok(BundleValues::Ints(sums))
        } else {
            let sums = (0..per).map(|c| grid.valuation_at(c).subset_sums()).collect();
            Ok(BundleValues::Rats(sums))
        }
    }

    fn better(&self, combo: u64, candidate: ItemSet, own: ItemSet) -> bool {
        let (c, a, b) = (combo as usize, candidate.bits() as usize, own.bits() as usize);
        match self {
            BundleValues::Ints(sums) => sums[c][a] > sums[c][b],
            BundleValues::Rats(sums) => sums[c][a] > sums[c][b],
        }
    }
}

/// Scan every profile, player, and unilateral alternative report for strict
/// gains in true value. An empty result means the table is grid-truthful.
pub fn verify_truthful(t: &MechanismTable) -> Result<VerifyReport, AnalysisError> {
    let grid = &t.grid;
    let per = grid.combos_per_player() as u64;
    let n = grid.players;
    let values = BundleValues::build(t)?;
    let mut report = VerifyReport {
        checks: t.profile_count() * n as u64 * (per - 1),
        total_violations: 0,
        witnesses: Vec::new(),
    };

    let mut column: Vec<ItemSet> = vec![ItemSet::EMPTY; per as usize];
    let mut distinct: Vec<ItemSet> = Vec::new();
    for player in 1..=n {
        let stride = per.pow((n - player) as u32);
        let prefixes = per.pow((player - 1) as u32);
        for prefix in 0..prefixes {
            for suffix in 0..stride {
                let base = prefix * stride * per + suffix;
                // outcomes available to `player` against these opponents
                distinct.clear();
                for c in 0..per {
                    let b = t.bundle(base + c * stride, player);
                    column[c as usize] = b;
                    if !distinct.contains(&b) {
                        distinct.push(b);
                    }
                }
                for c in 0..per {
                    let own = column[c as usize];
                    let improvable = distinct
                        .iter()
                        .any(|&cand| cand != own && values.better(c, cand, own));
                    if !improvable {
                        continue;
                    }
                    // count every deviating report that strictly gains
                    for dev in 0..per {
                        if dev == c {
                            continue;
                        }
                        let cand = column[dev as usize];
                        if !values.better(c, cand, own) {
                            continue;
                        }
                        report.total_violations += 1;
                        if report.witnesses.len() < WITNESS_CAP {
                            let truth = grid.valuation_at(c);
                            let gain =
                                truth.value_in(cand) - truth.value_in(own);
                            debug_assert!(gain > Q::zero());
                            report.witnesses.push(DeviationWitness {
                                profile_index: base + c * stride,
                                player,
                                deviation_combo: dev,
                                gain,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::rules::{ConstantRule, ForceBadRule, SpiteRule};
    use crate::analysis::table::{tabulate, tabulate_spec};
    use crate::grid::{GridSpec, DEFAULT_BUDGET};
    use crate::presets;
    use crate::rat::qi;

    #[test]
    fn valid_mechanisms_are_grid_truthful() {
        let grid = GridSpec::new(5, vec![qi(1), qi(6), qi(36)], true, 2).unwrap();
        let t = tabulate_spec(&presets::exchange_five(), &grid, DEFAULT_BUDGET).unwrap();
        let r = verify_truthful(&t).unwrap();
        assert!(r.is_truthful(), "violations: {:?}", r.witnesses.first());
        assert!(r.checks > 0);
    }

    #[test]
    fn label_ties_stay_truthful_without_perturbation() {
        let grid = GridSpec::new(6, vec![qi(1), qi(7)], false, 2).unwrap();
        let t = tabulate_spec(&presets::picking_six(), &grid, DEFAULT_BUDGET).unwrap();
        assert!(verify_truthful(&t).unwrap().is_truthful());
    }

    #[test]
    fn spite_rule_is_caught() {
        let rule = SpiteRule(presets::picking_six());
        let grid = GridSpec::new(6, vec![qi(1), qi(7)], false, 2).unwrap();
        let t = tabulate(&rule, &grid, DEFAULT_BUDGET).unwrap();
        let r = verify_truthful(&t).unwrap();
        assert!(r.total_violations > 0);
        let w = &r.witnesses[0];
        assert!(w.gain > qi(0));
    }

    #[test]
    fn forced_bad_deals_are_caught() {
        let rule = ForceBadRule(presets::exchange_five());
        let grid = GridSpec::new(5, vec![qi(1), qi(6)], true, 2).unwrap();
        let t = tabulate(&rule, &grid, DEFAULT_BUDGET).unwrap();
        assert!(verify_truthful(&t).unwrap().total_violations > 0);
    }

    #[test]
    fn constant_rules_are_truthful() {
        let rule = ConstantRule {
            m: 3,
            x1: ItemSet::from_items([1, 3]),
        };
        let grid = GridSpec::new(3, vec![qi(1), qi(4)], false, 2).unwrap();
        let t = tabulate(&rule, &grid, DEFAULT_BUDGET).unwrap();
        assert!(verify_truthful(&t).unwrap().is_truthful());
    }
}
