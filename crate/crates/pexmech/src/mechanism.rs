//! Picking-exchange mechanisms: offer sets, exchange deals, validation, and
//! allocation with the label-based and welfare-based tie-breaking families.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::allocation::Allocation;
use crate::set::ItemSet;
use crate::valuation::{Profile, Valuation};

/// A set of offers on a base region: proper subsets that exactly cover the
/// base and share no common element. The listed order is the label order used
/// by tie-breaking.
///
/// The degenerate form `base = ∅, offers = {∅}` stands for "no picking
/// region".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OfferSet {
    pub base: ItemSet,
    pub offers: Vec<ItemSet>,
}

impl OfferSet {
    pub fn new(base: ItemSet, offers: Vec<ItemSet>) -> OfferSet {
        OfferSet { base, offers }
    }

    /// The degenerate offer set on an empty region.
    pub fn degenerate() -> OfferSet {
        OfferSet {
            base: ItemSet::EMPTY,
            offers: vec![ItemSet::EMPTY],
        }
    }

    /// All singletons of `base`, in ascending label order.
    pub fn singletons(base: ItemSet) -> OfferSet {
        if base.is_empty() {
            return OfferSet::degenerate();
        }
        OfferSet {
            base,
            offers: base.iter().map(ItemSet::singleton).collect(),
        }
    }

    pub(crate) fn check(&self, player: usize, violations: &mut Vec<SpecViolation>) {
        self.check_inner(player, violations, true)
    }

    /// Offer validation without the empty-common-intersection rule; serial
    /// mechanisms allow an item in every offer (it behaves like an
    /// endowment there).
    pub(crate) fn check_relaxed(&self, player: usize, violations: &mut Vec<SpecViolation>) {
        self.check_inner(player, violations, false)
    }

    fn check_inner(
        &self,
        player: usize,
        violations: &mut Vec<SpecViolation>,
        require_empty_intersection: bool,
    ) {
        if self.base.is_empty() {
            if self.offers != vec![ItemSet::EMPTY] {
                violations.push(SpecViolation::BadDegenerateOffers { player });
            }
            return;
        }
        if self.offers.is_empty() {
            violations.push(SpecViolation::NoOffers { player });
            return;
        }
        let mut union = ItemSet::EMPTY;
        let mut common = self.base;
        for &offer in &self.offers {
            if !offer.is_proper_subset(self.base) {
                violations.push(SpecViolation::OfferNotProper { player, offer });
            }
            union = union.union(offer);
            common = common.intersection(offer);
        }
        if union != self.base {
            violations.push(SpecViolation::OffersDoNotCover {
                player,
                covered: union,
                base: self.base,
            });
        }
        if require_empty_intersection && !common.is_empty() {
            violations.push(SpecViolation::OffersShareItems { player, common });
        }
    }
}

/// When a deal that is neither favorable nor unfavorable is executed.
///
/// Every mode executes favorable deals and never executes unfavorable ones;
/// they differ only on ties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DealPolicy {
    /// Execute whenever not unfavorable.
    #[serde(rename = "always-unless-unfavorable")]
    AlwaysUnlessUnfavorable,
    /// Execute whenever not unfavorable and at least one player strictly
    /// improves. The default.
    #[serde(rename = "improves-someone")]
    ImprovesSomeone,
    /// Execute whenever not unfavorable and player 1 strictly improves.
    #[serde(rename = "improves-player1")]
    ImprovesPlayer1,
    /// Execute whenever not unfavorable and player 2 strictly improves.
    #[serde(rename = "improves-player2")]
    ImprovesPlayer2,
    /// Execute only favorable deals.
    #[serde(rename = "strictly-favorable-only")]
    StrictlyFavorableOnly,
}

impl Default for DealPolicy {
    fn default() -> DealPolicy {
        DealPolicy::ImprovesSomeone
    }
}

pub const ALL_DEAL_POLICIES: [DealPolicy; 5] = [
    DealPolicy::AlwaysUnlessUnfavorable,
    DealPolicy::ImprovesSomeone,
    DealPolicy::ImprovesPlayer1,
    DealPolicy::ImprovesPlayer2,
    DealPolicy::StrictlyFavorableOnly,
];

/// An exchange deal: player 1 trades away `give ⊆ E1` for `take ⊆ E2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeDeal {
    pub give: ItemSet,
    pub take: ItemSet,
    #[serde(default)]
    pub policy: DealPolicy,
}

/// Classification of a deal under a two-player profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DealClass {
    /// Both players strictly improve.
    Favorable,
    /// At least one player strictly loses.
    Unfavorable,
    /// At least one player is exactly indifferent and nobody strictly loses.
    Neutral,
}

/// Offer tie-breaking family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreak {
    /// Earliest-listed maximizer wins.
    #[serde(rename = "label")]
    Label,
    /// Among maximizers, pick the one leaving the most opponent value in the
    /// base region; remaining ties by label.
    #[serde(rename = "welfare")]
    Welfare,
}

impl Default for TieBreak {
    fn default() -> TieBreak {
        TieBreak::Label
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecViolation {
    #[error("regions (N1,N2,E1,E2) do not partition the universe: covered {covered}, universe {universe}")]
    NotPartition { covered: ItemSet, universe: ItemSet },
    #[error("regions overlap on {overlap}")]
    RegionsOverlap { overlap: ItemSet },
    #[error("player {player}: offer base must equal the picking region")]
    BaseMismatch { player: usize },
    #[error("player {player}: picking region is nonempty but has no offers")]
    NoOffers { player: usize },
    #[error("player {player}: degenerate offer set must be exactly [[]]")]
    BadDegenerateOffers { player: usize },
    #[error("player {player}: offer {offer} is not a proper subset of the base")]
    OfferNotProper { player: usize, offer: ItemSet },
    #[error("player {player}: offers cover {covered}, base is {base}")]
    OffersDoNotCover {
        player: usize,
        covered: ItemSet,
        base: ItemSet,
    },
    #[error("player {player}: all offers share the items {common}")]
    OffersShareItems { player: usize, common: ItemSet },
    #[error("deal {index}: give and take must be nonempty")]
    EmptyDeal { index: usize },
    #[error("deal {index}: give {give} is not inside endowment 1 {endowment}")]
    GiveOutsideEndowment {
        index: usize,
        give: ItemSet,
        endowment: ItemSet,
    },
    #[error("deal {index}: take {take} is not inside endowment 2 {endowment}")]
    TakeOutsideEndowment {
        index: usize,
        take: ItemSet,
        endowment: ItemSet,
    },
    #[error("deals {a} and {b} overlap on {overlap}")]
    DealsOverlap {
        a: usize,
        b: usize,
        overlap: ItemSet,
    },
}

#[derive(Debug, Error)]
pub enum MechanismError {
    #[error("invalid mechanism: {0:?}")]
    InvalidSpec(Vec<SpecViolation>),
    #[error("mechanism is for {expected} players over {m} items, got a profile with {players} players over {got_m} items")]
    ProfileMismatch {
        expected: usize,
        players: usize,
        m: usize,
        got_m: usize,
    },
    #[error(transparent)]
    Model(#[from] crate::valuation::ModelError),
}

/// A two-player picking-exchange mechanism: a partition `(N1, N2, E1, E2)` of
/// `{1..m}`, offer sets on the picking regions, and a valid list of exchange
/// deals on the endowments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PickingExchangeSpec {
    pub m: usize,
    /// Offer sets for players 1 and 2; `picking[i].base` is `N_{i+1}`.
    pub picking: [OfferSet; 2],
    /// Endowments `E1`, `E2`.
    pub endowments: [ItemSet; 2],
    pub deals: Vec<ExchangeDeal>,
    pub offer_tiebreak: TieBreak,
}

impl PickingExchangeSpec {
    /// Pure picking mechanism (no endowments, no deals).
    pub fn picking_only(m: usize, o1: OfferSet, o2: OfferSet) -> PickingExchangeSpec {
        PickingExchangeSpec {
            m,
            picking: [o1, o2],
            endowments: [ItemSet::EMPTY, ItemSet::EMPTY],
            deals: Vec::new(),
            offer_tiebreak: TieBreak::Label,
        }
    }

    /// Pure exchange mechanism (no picking regions).
    pub fn exchange_only(
        m: usize,
        e1: ItemSet,
        e2: ItemSet,
        deals: Vec<ExchangeDeal>,
    ) -> PickingExchangeSpec {
        PickingExchangeSpec {
            m,
            picking: [OfferSet::degenerate(), OfferSet::degenerate()],
            endowments: [e1, e2],
            deals,
            offer_tiebreak: TieBreak::Label,
        }
    }

    pub fn picking_region(&self, player: usize) -> ItemSet {
        self.picking[player - 1].base
    }

    pub fn endowment(&self, player: usize) -> ItemSet {
        self.endowments[player - 1]
    }

    /// Every violated structural invariant; empty means valid.
    pub fn validate(&self) -> Vec<SpecViolation> {
        let mut violations = Vec::new();
        let universe = ItemSet::full(self.m);
        let regions = [
            self.picking[0].base,
            self.picking[1].base,
            self.endowments[0],
            self.endowments[1],
        ];
        let mut covered = ItemSet::EMPTY;
        let mut overlap = ItemSet::EMPTY;
        for r in regions {
            overlap = overlap.union(covered.intersection(r));
            covered = covered.union(r);
        }
        if !overlap.is_empty() {
            violations.push(SpecViolation::RegionsOverlap { overlap });
        }
        if covered != universe {
            violations.push(SpecViolation::NotPartition { covered, universe });
        }
        for (i, offers) in self.picking.iter().enumerate() {
            offers.check(i + 1, &mut violations);
        }
        let mut given = ItemSet::EMPTY;
        let mut taken = ItemSet::EMPTY;
        for (index, deal) in self.deals.iter().enumerate() {
            if deal.give.is_empty() || deal.take.is_empty() {
                violations.push(SpecViolation::EmptyDeal { index });
            }
            if !deal.give.is_subset(self.endowments[0]) {
                violations.push(SpecViolation::GiveOutsideEndowment {
                    index,
                    give: deal.give,
                    endowment: self.endowments[0],
                });
            }
            if !deal.take.is_subset(self.endowments[1]) {
                violations.push(SpecViolation::TakeOutsideEndowment {
                    index,
                    take: deal.take,
                    endowment: self.endowments[1],
                });
            }
            let o = given.intersection(deal.give).union(taken.intersection(deal.take));
            if !o.is_empty() {
                let a = self.deals[..index]
                    .iter()
                    .position(|d| {
                        !d.give.intersection(deal.give).is_empty()
                            || !d.take.intersection(deal.take).is_empty()
                    })
                    .unwrap();
                violations.push(SpecViolation::DealsOverlap {
                    a,
                    b: index,
                    overlap: o,
                });
            }
            given = given.union(deal.give);
            taken = taken.union(deal.take);
        }
        violations
    }

    fn check_profile(&self, p: &Profile) -> Result<(), MechanismError> {
        if p.player_count() != 2 || p.item_count() != self.m {
            return Err(MechanismError::ProfileMismatch {
                expected: 2,
                players: p.player_count(),
                m: self.m,
                got_m: p.item_count(),
            });
        }
        Ok(())
    }

    /// Run the mechanism. Fails on invalid specs or mismatched profiles.
    pub fn allocate(&self, p: &Profile) -> Result<Allocation, MechanismError> {
        Ok(self.allocate_detailed(p)?.0)
    }

    /// Like [`allocate`](Self::allocate), also reporting which deal indices
    /// executed.
    pub fn allocate_detailed(
        &self,
        p: &Profile,
    ) -> Result<(Allocation, Vec<usize>), MechanismError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(MechanismError::InvalidSpec(violations));
        }
        self.check_profile(p)?;
        Ok(self.allocate_unchecked(p))
    }

    /// Allocation assuming the spec is valid and the profile matches.
    pub(crate) fn allocate_unchecked(&self, p: &Profile) -> (Allocation, Vec<usize>) {
        let v1 = p.valuation(1);
        let v2 = p.valuation(2);
        let pick1 = best_offer_in(v1, &self.picking[0], self.offer_tiebreak, Some(v2));
        let pick2 = best_offer_in(v2, &self.picking[1], self.offer_tiebreak, Some(v1));

        let mut x1 = pick1.union(self.picking[1].base.difference(pick2));
        let mut executed = Vec::new();
        let mut e1_keep = self.endowments[0];
        for (index, deal) in self.deals.iter().enumerate() {
            if deal_executes(p, deal) {
                executed.push(index);
                e1_keep = e1_keep.difference(deal.give);
                x1 = x1.union(deal.take);
            }
        }
        x1 = x1.union(e1_keep);
        (Allocation::two_player(x1, self.m), executed)
    }
}

/// The player's chosen offer: a member of the value argmax, with ties broken
/// per `tiebreak`. `opponent` is required for welfare-based tie-breaking.
pub fn best_offer(
    v: &Valuation,
    offers: &OfferSet,
    tiebreak: TieBreak,
    opponent: Option<&Valuation>,
) -> Result<ItemSet, MechanismError> {
    let mut violations = Vec::new();
    offers.check(0, &mut violations);
    if !violations.is_empty() {
        return Err(MechanismError::InvalidSpec(violations));
    }
    if !offers.base.within(v.item_count()) {
        return Err(MechanismError::Model(
            crate::valuation::ModelError::SetOutOfRange {
                set: offers.base,
                m: v.item_count(),
            },
        ));
    }
    if tiebreak == TieBreak::Welfare && opponent.is_none() {
        return Err(MechanismError::InvalidSpec(vec![]));
    }
    Ok(best_offer_in(v, offers, tiebreak, opponent))
}

fn best_offer_in(
    v: &Valuation,
    offers: &OfferSet,
    tiebreak: TieBreak,
    opponent: Option<&Valuation>,
) -> ItemSet {
    let values: Vec<crate::rat::Q> = offers.offers.iter().map(|&o| v.value_in(o)).collect();
    let max = values.iter().max().expect("offer sets are nonempty");
    match tiebreak {
        TieBreak::Label => {
            let idx = values.iter().position(|x| x == max).unwrap();
            offers.offers[idx]
        }
        TieBreak::Welfare => {
            let opp = opponent.expect("welfare tie-breaking needs the opponent");
            let mut best: Option<(crate::rat::Q, usize)> = None;
            for (idx, val) in values.iter().enumerate() {
                if val != max {
                    continue;
                }
                let residual = opp.value_in(offers.base.difference(offers.offers[idx]));
                match &best {
                    Some((r, _)) if *r >= residual => {}
                    _ => best = Some((residual, idx)),
                }
            }
            offers.offers[best.unwrap().1]
        }
    }
}

/// Classify a deal under a two-player profile.
pub fn classify_deal(p: &Profile, deal: &ExchangeDeal) -> Result<DealClass, MechanismError> {
    if p.player_count() != 2 {
        return Err(MechanismError::ProfileMismatch {
            expected: 2,
            players: p.player_count(),
            m: p.item_count(),
            got_m: p.item_count(),
        });
    }
    let m = p.item_count();
    for set in [deal.give, deal.take] {
        if !set.within(m) {
            return Err(MechanismError::Model(
                crate::valuation::ModelError::SetOutOfRange { set, m },
            ));
        }
    }
    Ok(classify_deal_in(p, deal))
}

fn classify_deal_in(p: &Profile, deal: &ExchangeDeal) -> DealClass {
    let v1 = p.valuation(1);
    let v2 = p.valuation(2);
    let gain1 = v1.value_in(deal.take) - v1.value_in(deal.give);
    let gain2 = v2.value_in(deal.give) - v2.value_in(deal.take);
    classify_gains(
        gain1.cmp(&crate::rat::qi(0)),
        gain2.cmp(&crate::rat::qi(0)),
    )
}

pub(crate) fn classify_gains(g1: std::cmp::Ordering, g2: std::cmp::Ordering) -> DealClass {
    use std::cmp::Ordering::*;
    match (g1, g2) {
        (Greater, Greater) => DealClass::Favorable,
        (Less, _) | (_, Less) => DealClass::Unfavorable,
        _ => DealClass::Neutral,
    }
}

pub(crate) fn policy_executes(
    policy: DealPolicy,
    class: DealClass,
    g1: std::cmp::Ordering,
    g2: std::cmp::Ordering,
) -> bool {
    use std::cmp::Ordering::Greater;
    match class {
        DealClass::Favorable => true,
        DealClass::Unfavorable => false,
        DealClass::Neutral => match policy {
            DealPolicy::AlwaysUnlessUnfavorable => true,
            DealPolicy::ImprovesSomeone => g1 == Greater || g2 == Greater,
            DealPolicy::ImprovesPlayer1 => g1 == Greater,
            DealPolicy::ImprovesPlayer2 => g2 == Greater,
            DealPolicy::StrictlyFavorableOnly => false,
        },
    }
}

pub(crate) fn deal_executes(p: &Profile, deal: &ExchangeDeal) -> bool {
    let v1 = p.valuation(1);
    let v2 = p.valuation(2);
    let zero = crate::rat::qi(0);
    let g1 = (v1.value_in(deal.take) - v1.value_in(deal.give)).cmp(&zero);
    let g2 = (v2.value_in(deal.give) - v2.value_in(deal.take)).cmp(&zero);
    policy_executes(deal.policy, classify_gains(g1, g2), g1, g2)
}

// --- JSON form -------------------------------------------------------------
//
// {"m":…, "N1":[…], "O1":[[…],…], "N2":…, "O2":…, "E1":…, "E2":…,
//  "deals":[{"give":[…],"take":[…],"policy":"improves-someone"}…],
//  "tiebreak":"label"|"welfare"}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    m: usize,
    #[serde(rename = "N1", default)]
    n1: ItemSet,
    #[serde(rename = "O1", default)]
    o1: Option<Vec<ItemSet>>,
    #[serde(rename = "N2", default)]
    n2: ItemSet,
    #[serde(rename = "O2", default)]
    o2: Option<Vec<ItemSet>>,
    #[serde(rename = "E1", default)]
    e1: ItemSet,
    #[serde(rename = "E2", default)]
    e2: ItemSet,
    #[serde(default)]
    deals: Vec<ExchangeDeal>,
    #[serde(default)]
    tiebreak: TieBreak,
}

impl Serialize for PickingExchangeSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SpecJson {
            m: self.m,
            n1: self.picking[0].base,
            o1: Some(self.picking[0].offers.clone()),
            n2: self.picking[1].base,
            o2: Some(self.picking[1].offers.clone()),
            e1: self.endowments[0],
            e2: self.endowments[1],
            deals: self.deals.clone(),
            tiebreak: self.offer_tiebreak,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PickingExchangeSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<PickingExchangeSpec, D::Error> {
        let raw = SpecJson::deserialize(deserializer)?;
        let offers = |o: Option<Vec<ItemSet>>, base: ItemSet| match o {
            Some(list) if !list.is_empty() => OfferSet::new(base, list),
            _ if base.is_empty() => OfferSet::degenerate(),
            _ => OfferSet::new(base, Vec::new()),
        };
        Ok(PickingExchangeSpec {
            m: raw.m,
            picking: [offers(raw.o1, raw.n1), offers(raw.o2, raw.n2)],
            endowments: [raw.e1, raw.e2],
            deals: raw.deals,
            offer_tiebreak: raw.tiebreak,
        })
    }
}

impl fmt::Display for PickingExchangeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m={} N1={} N2={} E1={} E2={} deals={}",
            self.m,
            self.picking[0].base,
            self.picking[1].base,
            self.endowments[0],
            self.endowments[1],
            self.deals.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::*;
    use crate::valuation::Valuation;

    #[test]
    fn validation_accepts_the_picking_fixture() {
        assert!(picking_six().validate().is_empty());
        assert!(exchange_five().validate().is_empty());
        assert!(combined_eleven().validate().is_empty());
    }

    #[test]
    fn validation_catches_non_covering_offers() {
        let spec = PickingExchangeSpec::picking_only(
            6,
            OfferSet::new(
                ItemSet::range(1, 4),
                vec![ItemSet::from_items([1, 2]), ItemSet::from_items([2, 3])],
            ),
            OfferSet::new(
                ItemSet::range(5, 6),
                vec![ItemSet::singleton(5), ItemSet::singleton(6)],
            ),
        );
        assert!(spec
            .validate()
            .iter()
            .any(|v| matches!(v, SpecViolation::OffersDoNotCover { player: 1, .. })));
    }

    #[test]
    fn validation_catches_overlapping_deals() {
        let mut spec = PickingExchangeSpec::exchange_only(
            6,
            ItemSet::range(1, 3),
            ItemSet::range(4, 6),
            vec![
                ExchangeDeal {
                    give: ItemSet::singleton(1),
                    take: ItemSet::singleton(5),
                    policy: DealPolicy::default(),
                },
                ExchangeDeal {
                    give: ItemSet::from_items([1, 2]),
                    take: ItemSet::singleton(6),
                    policy: DealPolicy::default(),
                },
            ],
        );
        assert!(spec
            .validate()
            .iter()
            .any(|v| matches!(v, SpecViolation::DealsOverlap { .. })));
        // and deals escaping the endowments
        spec.deals[0].give = ItemSet::singleton(4);
        assert!(spec
            .validate()
            .iter()
            .any(|v| matches!(v, SpecViolation::GiveOutsideEndowment { .. })));
    }

    #[test]
    fn best_offer_breaks_ties_by_label() {
        let p = picking_six_profile();
        let spec = picking_six();
        // offers {2,3} and {4} tie at value 10; {2,3} is listed first
        let pick = best_offer(p.valuation(1), &spec.picking[0], TieBreak::Label, None).unwrap();
        assert_eq!(pick, ItemSet::from_items([2, 3]));
        let pick2 = best_offer(p.valuation(2), &spec.picking[1], TieBreak::Label, None).unwrap();
        assert_eq!(pick2, ItemSet::singleton(5));
    }

    #[test]
    fn best_offer_unique_argmax() {
        let v = Valuation::from_ints(&[9, 1, 1, 1]).unwrap();
        let offers = OfferSet::new(
            ItemSet::range(1, 4),
            vec![
                ItemSet::from_items([1, 2]),
                ItemSet::from_items([2, 3]),
                ItemSet::singleton(4),
            ],
        );
        assert_eq!(
            best_offer(&v, &offers, TieBreak::Label, None).unwrap(),
            ItemSet::from_items([1, 2])
        );
    }

    #[test]
    fn welfare_tiebreak_prefers_larger_residual() {
        // Player values offers {1,2} and {3,4} equally; leaving {3,4} vs {1,2}
        // to the opponent is what distinguishes them.
        let v = Valuation::from_ints(&[2, 2, 2, 2]).unwrap();
        let opp = Valuation::from_ints(&[1, 1, 5, 5]).unwrap();
        let offers = OfferSet::new(
            ItemSet::range(1, 4),
            vec![ItemSet::from_items([3, 4]), ItemSet::from_items([1, 2])],
        );
        // label order would pick {3,4}; welfare keeps the opponent's {3,4} free
        assert_eq!(
            best_offer(&v, &offers, TieBreak::Welfare, Some(&opp)).unwrap(),
            ItemSet::from_items([1, 2])
        );
        assert_eq!(
            best_offer(&v, &offers, TieBreak::Label, None).unwrap(),
            ItemSet::from_items([3, 4])
        );
    }

    #[test]
    fn deal_classification() {
        let p = exchange_five_profile();
        let deal = &exchange_five().deals[0];
        assert_eq!(classify_deal(&p, deal).unwrap(), DealClass::Favorable);

        // full indifference is neutral
        let p = Profile::from_int_rows(&[&[1, 2, 3, 5, 1], &[1, 2, 3, 5, 1]]).unwrap();
        assert_eq!(classify_deal(&p, deal).unwrap(), DealClass::Neutral);

        let p = Profile::from_int_rows(&[&[1, 1, 1, 5, 1], &[1, 6, 1, 4, 7]]).unwrap();
        assert_eq!(classify_deal(&p, deal).unwrap(), DealClass::Favorable);
        let p = Profile::from_int_rows(&[&[1, 1, 1, 5, 1], &[1, 6, 1, 8, 7]]).unwrap();
        assert_eq!(classify_deal(&p, deal).unwrap(), DealClass::Unfavorable);
    }

    #[test]
    fn golden_allocations() {
        let (a, executed) = picking_six()
            .allocate_detailed(&picking_six_profile())
            .unwrap();
        assert_eq!(a.bundle(1), ItemSet::from_items([2, 3, 6]));
        assert_eq!(a.bundle(2), ItemSet::from_items([1, 4, 5]));
        assert!(executed.is_empty());

        let (a, executed) = exchange_five()
            .allocate_detailed(&exchange_five_profile())
            .unwrap();
        assert_eq!(a.bundle(1), ItemSet::from_items([1, 4]));
        assert_eq!(a.bundle(2), ItemSet::from_items([2, 3, 5]));
        assert_eq!(executed, vec![0]);

        let a = combined_eleven()
            .allocate(&combined_eleven_profile())
            .unwrap();
        assert_eq!(a.bundle(1), ItemSet::from_items([2, 3, 6, 7, 10]));
        assert_eq!(a.bundle(2), ItemSet::from_items([1, 4, 5, 8, 9, 11]));
    }

    #[test]
    fn allocate_rejects_invalid_specs() {
        let spec = PickingExchangeSpec::picking_only(
            3,
            OfferSet::new(ItemSet::range(1, 3), vec![ItemSet::from_items([1, 2])]),
            OfferSet::degenerate(),
        );
        let p = Profile::from_int_rows(&[&[1, 1, 1], &[1, 1, 1]]).unwrap();
        assert!(matches!(
            spec.allocate(&p),
            Err(MechanismError::InvalidSpec(_))
        ));
    }

    #[test]
    fn neutral_deal_policies() {
        use std::cmp::Ordering::*;
        // player 1 indifferent, player 2 strictly improves
        let class = classify_gains(Equal, Greater);
        assert_eq!(class, DealClass::Neutral);
        assert!(policy_executes(
            DealPolicy::AlwaysUnlessUnfavorable,
            class,
            Equal,
            Greater
        ));
        assert!(policy_executes(
            DealPolicy::ImprovesSomeone,
            class,
            Equal,
            Greater
        ));
        assert!(!policy_executes(
            DealPolicy::ImprovesPlayer1,
            class,
            Equal,
            Greater
        ));
        assert!(policy_executes(
            DealPolicy::ImprovesPlayer2,
            class,
            Equal,
            Greater
        ));
        assert!(!policy_executes(
            DealPolicy::StrictlyFavorableOnly,
            class,
            Equal,
            Greater
        ));
        // fully indifferent: only mode (i) executes
        let class = classify_gains(Equal, Equal);
        assert!(policy_executes(
            DealPolicy::AlwaysUnlessUnfavorable,
            class,
            Equal,
            Equal
        ));
        assert!(!policy_executes(
            DealPolicy::ImprovesSomeone,
            class,
            Equal,
            Equal
        ));
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = combined_eleven();
        let json = serde_json::to_string(&spec).unwrap();
        let back: PickingExchangeSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        // field names match the documented schema
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(value.get("N1").is_some());
        assert!(value.get("O1").is_some());
        assert!(value.get("deals").is_some());
        assert_eq!(value["tiebreak"], "label");
    }
}
