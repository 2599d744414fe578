//! Allocation rules as black boxes, including a library of deliberately
//! broken rules used to exercise the verifier's falsification path.

use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::mechanism::{
    classify_deal, DealClass, MechanismError, PickingExchangeSpec, SpecViolation, TieBreak,
};
use crate::set::ItemSet;
use crate::valuation::Profile;

/// Anything that maps profiles to full allocations.
pub trait AllocationRule {
    fn allocate(&self, p: &Profile) -> Result<Allocation, MechanismError>;

    fn name(&self) -> String {
        "rule".into()
    }
}

impl AllocationRule for PickingExchangeSpec {
    fn allocate(&self, p: &Profile) -> Result<Allocation, MechanismError> {
        PickingExchangeSpec::allocate(self, p)
    }

    fn name(&self) -> String {
        "picking-exchange".into()
    }
}

impl<F> AllocationRule for F
where
    F: Fn(&Profile) -> Result<Allocation, MechanismError>,
{
    fn allocate(&self, p: &Profile) -> Result<Allocation, MechanismError> {
        self(p)
    }
}

/// Broken on purpose: player 1 receives his *worst* offer instead of his
/// best, so flipping the reported ranking pays off.
pub struct SpiteRule(pub PickingExchangeSpec);

impl AllocationRule for SpiteRule {
    fn allocate(&self, p: &Profile) -> Result<Allocation, MechanismError> {
        let spec = &self.0;
        let violations = spec.validate();
        if !violations.is_empty() {
            return Err(MechanismError::InvalidSpec(violations));
        }
        let v1 = p.valuation(1);
        let v2 = p.valuation(2);
        // argmin with earliest label
        let worst = {
            let vals: Vec<_> = spec.picking[0]
                .offers
                .iter()
                .map(|&o| v1.value(o))
                .collect::<Result<Vec<_>, _>>()?;
            let min = vals.iter().min().unwrap();
            let idx = vals.iter().position(|x| x == min).unwrap();
            spec.picking[0].offers[idx]
        };
        let pick2 = crate::mechanism::best_offer(v2, &spec.picking[1], TieBreak::Label, None)?;
        let mut x1 = worst.union(spec.picking[1].base.difference(pick2));
        let mut keep = spec.endowments[0];
        for deal in &spec.deals {
            if crate::mechanism::deal_executes(p, deal) {
                keep = keep.difference(deal.give);
                x1 = x1.union(deal.take);
            }
        }
        Ok(Allocation::two_player(x1.union(keep), spec.m))
    }

    fn name(&self) -> String {
        "spite".into()
    }
}

/// Broken on purpose: executes exactly the unfavorable deals, so a player can
/// lie about a deal's gain to block the harm.
pub struct ForceBadRule(pub PickingExchangeSpec);

impl AllocationRule for ForceBadRule {
    fn allocate(&self, p: &Profile) -> Result<Allocation, MechanismError> {
        let spec = &self.0;
        let violations = spec.validate();
        if !violations.is_empty() {
            return Err(MechanismError::InvalidSpec(violations));
        }
        let pick1 =
            crate::mechanism::best_offer(p.valuation(1), &spec.picking[0], TieBreak::Label, None)?;
        let pick2 =
            crate::mechanism::best_offer(p.valuation(2), &spec.picking[1], TieBreak::Label, None)?;
        let mut x1 = pick1.union(spec.picking[1].base.difference(pick2));
        let mut keep = spec.endowments[0];
        for deal in &spec.deals {
            if classify_deal(p, deal)? == DealClass::Unfavorable {
                keep = keep.difference(deal.give);
                x1 = x1.union(deal.take);
            }
        }
        Ok(Allocation::two_player(x1.union(keep), spec.m))
    }

    fn name(&self) -> String {
        "force-bad-deals".into()
    }
}

/// The same fixed allocation for every report. Trivially truthful.
pub struct ConstantRule {
    pub m: usize,
    pub x1: ItemSet,
}

impl AllocationRule for ConstantRule {
    fn allocate(&self, _p: &Profile) -> Result<Allocation, MechanismError> {
        Ok(Allocation::two_player(self.x1, self.m))
    }

    fn name(&self) -> String {
        "constant".into()
    }
}

/// Everything to one player.
pub struct DictatorRule {
    pub m: usize,
    pub player: usize,
}

impl AllocationRule for DictatorRule {
    fn allocate(&self, _p: &Profile) -> Result<Allocation, MechanismError> {
        let x1 = if self.player == 1 {
            ItemSet::full(self.m)
        } else {
            ItemSet::EMPTY
        };
        Ok(Allocation::two_player(x1, self.m))
    }

    fn name(&self) -> String {
        format!("dictator-{}", self.player)
    }
}

/// File form of a named rule, for `verify` runs against shipped
/// counterexamples: `{"builtin":"spite","spec":{…}}`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "kebab-case")]
pub enum BuiltinRule {
    Spite { spec: PickingExchangeSpec },
    ForceBadDeals { spec: PickingExchangeSpec },
    Constant { m: usize, x1: ItemSet },
    Dictator { m: usize, player: usize },
}

impl BuiltinRule {
    pub fn as_rule(&self) -> Box<dyn AllocationRule + '_> {
        match self {
            BuiltinRule::Spite { spec } => Box::new(SpiteRule(spec.clone())),
            BuiltinRule::ForceBadDeals { spec } => Box::new(ForceBadRule(spec.clone())),
            BuiltinRule::Constant { m, x1 } => Box::new(ConstantRule { m: *m, x1: *x1 }),
            BuiltinRule::Dictator { m, player } => Box::new(DictatorRule {
                m: *m,
                player: *player,
            }),
        }
    }

    pub fn item_count(&self) -> usize {
        match self {
            BuiltinRule::Spite { spec } | BuiltinRule::ForceBadDeals { spec } => spec.m,
            BuiltinRule::Constant { m, .. } | BuiltinRule::Dictator { m, .. } => *m,
        }
    }

    pub fn validate(&self) -> Vec<SpecViolation> {
        match self {
            BuiltinRule::Spite { spec } | BuiltinRule::ForceBadDeals { spec } => spec.validate(),
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn spite_gives_the_worst_offer() {
        let rule = SpiteRule(presets::picking_six());
        let a = rule.allocate(&presets::picking_six_profile()).unwrap();
        // worst offer for player 1 is {1,2} at value 8
        assert!(a.bundle(1).contains(1) && a.bundle(1).contains(2));
        assert!(!a.bundle(1).contains(4));
    }

    #[test]
    fn force_bad_executes_only_unfavorable() {
        let rule = ForceBadRule(presets::exchange_five());
        // the deal is favorable here, so it is *not* executed
        let a = rule.allocate(&presets::exchange_five_profile()).unwrap();
        assert_eq!(a.bundle(1), ItemSet::range(1, 3));
    }

    #[test]
    fn builtin_json() {
        let b = BuiltinRule::Spite {
            spec: presets::picking_six(),
        };
        let json = serde_json::to_string(&b).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["builtin"], "spite");
        let back: BuiltinRule = serde_json::from_str(&json).unwrap();
        assert_eq!(back.item_count(), 6);
    }
}
