//! Brute-force efficiency check for two-player allocations.

use crate::allocation::Allocation;
use crate::fairness::{FairnessError, MAX_ALLOCATION_ENUM_M};
use crate::set::{subsets_of, ItemSet};
use crate::valuation::Profile;

/// True when no other allocation weakly improves both players and strictly
/// improves at least one. Scans all `2^m` allocations.
pub fn is_pareto_efficient(p: &Profile, a: &Allocation) -> Result<bool, FairnessError> {
    if p.player_count() != 2 {
        return Err(FairnessError::NotTwoPlayers(p.player_count()));
    }
    let m = p.item_count();
    if m > MAX_ALLOCATION_ENUM_M {
        return Err(FairnessError::CapExceeded {
            what: "efficiency scan",
            m,
            cap: MAX_ALLOCATION_ENUM_M,
        });
    }
    if a.universe() != ItemSet::full(m) || a.player_count() != 2 {
        return Err(FairnessError::UniverseMismatch {
            got: a.universe(),
            m,
        });
    }
    let v1 = p.valuation(1);
    let v2 = p.valuation(2);
    let base1 = v1.value_in(a.bundle(1));
    let base2 = v2.value_in(a.bundle(2));
    for x1 in subsets_of(ItemSet::full(m)) {
        let c1 = v1.value_in(x1);
        let c2 = v2.value_in(x1.complement(m));
        if c1 >= base1 && c2 >= base2 && (c1 > base1 || c2 > base2) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn welfare_maximizing_split_is_efficient() {
        let p = Profile::from_int_rows(&[&[5, 1, 4, 2], &[2, 3, 1, 6]]).unwrap();
        // give each item to its higher-valuing player
        let a = Allocation::two_player(ItemSet::from_items([1, 3]), 4);
        assert!(is_pareto_efficient(&p, &a).unwrap());
    }

    #[test]
    fn identical_values_make_everything_efficient() {
        let p = Profile::from_int_rows(&[&[2, 3, 4], &[2, 3, 4]]).unwrap();
        for x1 in subsets_of(ItemSet::full(3)) {
            let a = Allocation::two_player(x1, 3);
            assert!(is_pareto_efficient(&p, &a).unwrap());
        }
    }

    #[test]
    fn picking_example_verdict_matches_direct_scan() {
        let p = presets::picking_six_profile();
        let a = Allocation::two_player(ItemSet::from_items([2, 3, 6]), 6);
        let fast = is_pareto_efficient(&p, &a).unwrap();
        // independent re-derivation
        let v1 = p.valuation(1);
        let v2 = p.valuation(2);
        let b1 = v1.value(a.bundle(1)).unwrap();
        let b2 = v2.value(a.bundle(2)).unwrap();
        let mut dominated = false;
        for x1 in subsets_of(ItemSet::full(6)) {
            let c1 = v1.value(x1).unwrap();
            let c2 = v2.value(x1.complement(6)).unwrap();
            if c1 >= b1 && c2 >= b2 && (c1 > b1 || c2 > b2) {
                dominated = true;
            }
        }
        assert_eq!(fast, !dominated);
    }
}
