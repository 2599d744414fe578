//! Serial picking-exchange mechanisms for any number of players.
//!
//! For one player everything goes to that player. For `n >= 2` the item
//! universe is partitioned into picking regions and endowments, generalized
//! deals trade endowment pieces among groups of players, and whatever a
//! player leaves behind in a picking region is allocated to the remaining
//! `n - 1` players by a continuation mechanism chosen by the leftover set.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::allocation::Allocation;
use crate::mechanism::OfferSet;
use crate::rat::Q;
use crate::set::ItemSet;
use crate::valuation::Profile;

/// One directed item transfer inside a generalized deal (players 1-indexed
/// within the owning spec).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub from: usize,
    pub to: usize,
    pub items: ItemSet,
}

/// Neutral-deal handling for generalized deals. Favorable deals (all involved
/// players strictly improve) always execute; unfavorable ones (some involved
/// player strictly loses) never do.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SerialDealPolicy {
    #[serde(rename = "always-unless-unfavorable")]
    AlwaysUnlessUnfavorable,
    #[serde(rename = "improves-someone")]
    ImprovesSomeone,
    #[serde(rename = "strictly-favorable-only")]
    StrictlyFavorableOnly,
}

impl Default for SerialDealPolicy {
    fn default() -> SerialDealPolicy {
        SerialDealPolicy::ImprovesSomeone
    }
}

/// A generalized deal: a set of pairwise transfers with pairwise-disjoint
/// item sets. Executed atomically or not at all.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralizedDeal {
    pub transfers: Vec<Transfer>,
    #[serde(default)]
    pub policy: SerialDealPolicy,
}

impl GeneralizedDeal {
    /// Players appearing in any transfer.
    pub fn involved(&self) -> Vec<usize> {
        let mut players: Vec<usize> = self
            .transfers
            .iter()
            .flat_map(|t| [t.from, t.to])
            .collect();
        players.sort_unstable();
        players.dedup();
        players
    }

    fn given_by(&self, player: usize) -> ItemSet {
        self.transfers
            .iter()
            .filter(|t| t.from == player)
            .fold(ItemSet::EMPTY, |acc, t| acc.union(t.items))
    }

    fn received_by(&self, player: usize) -> ItemSet {
        self.transfers
            .iter()
            .filter(|t| t.to == player)
            .fold(ItemSet::EMPTY, |acc, t| acc.union(t.items))
    }
}

/// One player's slice of the partition: a picking region with its offers and
/// an endowment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SerialPart {
    pub picking: OfferSet,
    pub endowment: ItemSet,
}

impl SerialPart {
    pub fn empty() -> SerialPart {
        SerialPart {
            picking: OfferSet::degenerate(),
            endowment: ItemSet::EMPTY,
        }
    }

    pub fn endowed(endowment: ItemSet) -> SerialPart {
        SerialPart {
            picking: OfferSet::degenerate(),
            endowment,
        }
    }
}

/// Rule for deriving a continuation when no explicit entry covers a leftover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DefaultContinuation {
    /// Hand the whole leftover to the lowest-indexed remaining player as an
    /// endowment.
    EndowFirst,
    /// Restrict the template to the leftover set and repair what breaks:
    /// clipped offer sets that stop being valid demote their region to an
    /// endowment, deals touching missing items are dropped, and uncovered
    /// items go to the first player's endowment.
    Template(Box<SerialSpec>),
}

/// An `n`-player serial picking-exchange mechanism over `universe`.
///
/// Continuation specs are over `n - 1` players; their player `k` is the
/// `k`-th smallest remaining player of the parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SerialSpec {
    pub players: usize,
    pub m: usize,
    pub universe: ItemSet,
    pub parts: Vec<SerialPart>,
    pub deals: Vec<GeneralizedDeal>,
    /// Explicit continuations: (player whose leftover this is, leftover set)
    /// -> sub-mechanism.
    pub continuations: BTreeMap<(usize, ItemSet), SerialSpec>,
    pub default_rule: Option<DefaultContinuation>,
}

#[derive(Debug, Error)]
pub enum SerialError {
    #[error("serial mechanism needs at least one player")]
    NoPlayers,
    #[error("expected {expected} parts, got {got}")]
    WrongPartCount { expected: usize, got: usize },
    #[error("parts cover {covered}, universe is {universe}")]
    NotPartition { covered: ItemSet, universe: ItemSet },
    #[error("parts overlap on {overlap}")]
    PartsOverlap { overlap: ItemSet },
    #[error("player {player}: invalid offer set")]
    BadOffers { player: usize },
    #[error("deal {deal}: transfer items {items} are not in player {player}'s endowment")]
    TransferOutsideEndowment {
        deal: usize,
        player: usize,
        items: ItemSet,
    },
    #[error("deal {deal}: empty transfer or bad player index")]
    BadTransfer { deal: usize },
    #[error("deal item sets overlap on {overlap}")]
    DealsOverlap { overlap: ItemSet },
    #[error("no continuation covers leftover {leftover} of player {player} and no default rule is set")]
    MissingContinuation { player: usize, leftover: ItemSet },
    #[error("continuation for player {player}, leftover {leftover}: {source}")]
    BadContinuation {
        player: usize,
        leftover: ItemSet,
        #[source]
        source: Box<SerialError>,
    },
    #[error("continuation for player {player}, leftover {leftover} must cover exactly the leftover with {players} players")]
    ContinuationShape {
        player: usize,
        leftover: ItemSet,
        players: usize,
    },
    #[error("profile has {got} players, expected {expected}")]
    ProfileMismatch { expected: usize, got: usize },
}

impl SerialSpec {
    /// The one-player mechanism: everything to the single player.
    pub fn trivial(m: usize, universe: ItemSet) -> SerialSpec {
        SerialSpec {
            players: 1,
            m,
            universe,
            parts: vec![SerialPart::endowed(universe)],
            deals: Vec::new(),
            continuations: BTreeMap::new(),
            default_rule: None,
        }
    }

    /// All leftovers that the picking stage can produce, per player.
    pub fn reachable_leftovers(&self) -> Vec<(usize, ItemSet)> {
        let mut out = Vec::new();
        for (idx, part) in self.parts.iter().enumerate() {
            for &offer in &part.picking.offers {
                let leftover = part.picking.base.difference(offer);
                if !leftover.is_empty() {
                    out.push((idx + 1, leftover));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn validate(&self) -> Result<(), SerialError> {
        if self.players == 0 {
            return Err(SerialError::NoPlayers);
        }
        if self.parts.len() != self.players {
            return Err(SerialError::WrongPartCount {
                expected: self.players,
                got: self.parts.len(),
            });
        }
        if self.players == 1 {
            // the single player receives the whole universe; the endowment
            // must say exactly that
            if self.parts[0].endowment != self.universe {
                return Err(SerialError::NotPartition {
                    covered: self.parts[0].endowment,
                    universe: self.universe,
                });
            }
            return Ok(());
        }
        let mut covered = ItemSet::EMPTY;
        let mut overlap = ItemSet::EMPTY;
        for part in &self.parts {
            for region in [part.picking.base, part.endowment] {
                overlap = overlap.union(covered.intersection(region));
                covered = covered.union(region);
            }
        }
        if !overlap.is_empty() {
            return Err(SerialError::PartsOverlap { overlap });
        }
        if covered != self.universe {
            return Err(SerialError::NotPartition {
                covered,
                universe: self.universe,
            });
        }
        for (idx, part) in self.parts.iter().enumerate() {
            let mut violations = Vec::new();
            part.picking.check_relaxed(idx + 1, &mut violations);
            if !violations.is_empty() {
                return Err(SerialError::BadOffers { player: idx + 1 });
            }
        }
        let mut deal_items = ItemSet::EMPTY;
        for (d, deal) in self.deals.iter().enumerate() {
            for t in &deal.transfers {
                if t.items.is_empty()
                    || t.from == t.to
                    || t.from < 1
                    || t.from > self.players
                    || t.to < 1
                    || t.to > self.players
                {
                    return Err(SerialError::BadTransfer { deal: d });
                }
                if !t.items.is_subset(self.parts[t.from - 1].endowment) {
                    return Err(SerialError::TransferOutsideEndowment {
                        deal: d,
                        player: t.from,
                        items: t.items,
                    });
                }
                let o = deal_items.intersection(t.items);
                if !o.is_empty() {
                    return Err(SerialError::DealsOverlap { overlap: o });
                }
                deal_items = deal_items.union(t.items);
            }
        }
        for (player, leftover) in self.reachable_leftovers() {
            match self.continuations.get(&(player, leftover)) {
                Some(sub) => {
                    if sub.players != self.players - 1 || sub.universe != leftover {
                        return Err(SerialError::ContinuationShape {
                            player,
                            leftover,
                            players: self.players - 1,
                        });
                    }
                    sub.validate().map_err(|e| SerialError::BadContinuation {
                        player,
                        leftover,
                        source: Box::new(e),
                    })?;
                }
                None => {
                    if self.default_rule.is_none() {
                        return Err(SerialError::MissingContinuation { player, leftover });
                    }
                }
            }
        }
        Ok(())
    }

    /// Run the mechanism on an `n`-player profile.
    pub fn allocate(&self, p: &Profile) -> Result<Allocation, SerialError> {
        self.validate()?;
        if p.player_count() != self.players {
            return Err(SerialError::ProfileMismatch {
                expected: self.players,
                got: p.player_count(),
            });
        }
        Ok(self.allocate_prevalidated(p))
    }

    /// Allocation for callers that have already validated the spec once
    /// (tabulation loops).
    pub fn allocate_prevalidated(&self, p: &Profile) -> Allocation {
        // player labels within this spec are positions in `active`
        let active: Vec<usize> = (1..=self.players).collect();
        let mut bundles = vec![ItemSet::EMPTY; self.players];
        self.allocate_into(p, &active, &mut bundles);
        Allocation::new(bundles, self.universe).expect("serial allocation partitions")
    }

    /// Allocate `self.universe` among `active` (original player labels,
    /// ascending), accumulating into `bundles` (indexed by original label - 1).
    fn allocate_into(&self, p: &Profile, active: &[usize], bundles: &mut [ItemSet]) {
        debug_assert_eq!(active.len(), self.players);
        if self.players == 1 {
            bundles[active[0] - 1] = bundles[active[0] - 1].union(self.universe);
            return;
        }
        // endowments adjusted by executed deals
        let mut held: Vec<ItemSet> = self.parts.iter().map(|part| part.endowment).collect();
        for deal in &self.deals {
            if self.deal_executes(p, active, deal) {
                for local in 1..=self.players {
                    held[local - 1] = held[local - 1]
                        .difference(deal.given_by(local))
                        .union(deal.received_by(local));
                }
            }
        }
        for (slot, &orig) in active.iter().enumerate() {
            bundles[orig - 1] = bundles[orig - 1].union(held[slot]);
        }
        // picking stage + recursive continuations
        for (slot, &orig) in active.iter().enumerate() {
            let part = &self.parts[slot];
            if part.picking.base.is_empty() {
                continue;
            }
            // label-order argmax; serial offers may share items, so this does
            // not go through the strict two-player offer check
            let pick = {
                let v = p.valuation(orig);
                let mut best = 0;
                let mut best_val = v.value_in(part.picking.offers[0]);
                for (k, &offer) in part.picking.offers.iter().enumerate().skip(1) {
                    let val = v.value_in(offer);
                    if val > best_val {
                        best_val = val;
                        best = k;
                    }
                }
                part.picking.offers[best]
            };
            bundles[orig - 1] = bundles[orig - 1].union(pick);
            let leftover = part.picking.base.difference(pick);
            if leftover.is_empty() {
                continue;
            }
            let remaining: Vec<usize> = active
                .iter()
                .copied()
                .filter(|&q| q != orig)
                .collect();
            let sub = self.continuation_for(slot + 1, leftover);
            sub.allocate_into(p, &remaining, bundles);
        }
    }

    /// The continuation used for `(player, leftover)`: the explicit entry if
    /// present, otherwise the derived default.
    pub fn continuation_for(&self, player: usize, leftover: ItemSet) -> SerialSpec {
        if let Some(sub) = self.continuations.get(&(player, leftover)) {
            return sub.clone();
        }
        match self
            .default_rule
            .as_ref()
            .expect("validated: continuation or default exists")
        {
            DefaultContinuation::EndowFirst => endow_first(self.players - 1, self.m, leftover),
            DefaultContinuation::Template(t) => t.restricted_to(leftover),
        }
    }

    /// Restrict this spec to a smaller universe, repairing structure that the
    /// restriction breaks. The result always validates.
    pub fn restricted_to(&self, universe: ItemSet) -> SerialSpec {
        if self.players == 1 {
            return SerialSpec::trivial(self.m, universe);
        }
        let mut parts = Vec::with_capacity(self.players);
        let mut covered = ItemSet::EMPTY;
        for part in &self.parts {
            let endowment = part.endowment.intersection(universe);
            let base = part.picking.base.intersection(universe);
            let mut offers: Vec<ItemSet> = part
                .picking
                .offers
                .iter()
                .map(|o| o.intersection(base))
                .filter(|o| !o.is_empty())
                .collect();
            offers.dedup();
            let clipped = OfferSet::new(base, offers);
            let mut violations = Vec::new();
            clipped.check_relaxed(0, &mut violations);
            let part = if base.is_empty() {
                SerialPart::endowed(endowment)
            } else if violations.is_empty() {
                SerialPart {
                    picking: clipped,
                    endowment,
                }
            } else {
                // clipped offers no longer form a valid offer set: own the
                // region outright
                SerialPart::endowed(endowment.union(base))
            };
            covered = covered
                .union(part.picking.base)
                .union(part.endowment);
            parts.push(part);
        }
        let stray = universe.difference(covered);
        if !stray.is_empty() {
            parts[0].endowment = parts[0].endowment.union(stray);
        }
        let deals = self
            .deals
            .iter()
            .filter(|deal| {
                deal.transfers.iter().all(|t| {
                    t.items.is_subset(universe)
                        && t.items.is_subset(parts[t.from - 1].endowment)
                })
            })
            .cloned()
            .collect();
        SerialSpec {
            players: self.players,
            m: self.m,
            universe,
            parts,
            deals,
            continuations: BTreeMap::new(),
            default_rule: Some(
                self.default_rule
                    .clone()
                    .unwrap_or(DefaultContinuation::EndowFirst),
            ),
        }
    }

    fn deal_executes(&self, p: &Profile, active: &[usize], deal: &GeneralizedDeal) -> bool {
        let zero = crate::rat::qi(0);
        let mut any_strict = false;
        let mut any_loss = false;
        let mut all_strict = true;
        for local in deal.involved() {
            let orig = active[local - 1];
            let v = p.valuation(orig);
            let gain: Q = v.value_in(deal.received_by(local)) - v.value_in(deal.given_by(local));
            match gain.cmp(&zero) {
                std::cmp::Ordering::Greater => any_strict = true,
                std::cmp::Ordering::Less => {
                    any_loss = true;
                    all_strict = false;
                }
                std::cmp::Ordering::Equal => all_strict = false,
            }
        }
        if any_loss {
            return false;
        }
        if all_strict {
            return true;
        }
        match deal.policy {
            SerialDealPolicy::AlwaysUnlessUnfavorable => true,
            SerialDealPolicy::ImprovesSomeone => any_strict,
            SerialDealPolicy::StrictlyFavorableOnly => false,
        }
    }
}

/// The endow-first default: the lowest remaining player owns the leftover.
pub fn endow_first(players: usize, m: usize, universe: ItemSet) -> SerialSpec {
    let mut parts = vec![SerialPart::empty(); players];
    parts[0] = SerialPart::endowed(universe);
    SerialSpec {
        players,
        m,
        universe,
        parts,
        deals: Vec::new(),
        continuations: BTreeMap::new(),
        default_rule: None,
    }
}

/// Convert a two-player picking-exchange mechanism into the equivalent serial
/// spec (label tie-breaking; leftovers go to the other player).
pub fn from_picking_exchange(spec: &crate::mechanism::PickingExchangeSpec) -> SerialSpec {
    let universe = ItemSet::full(spec.m);
    let parts = vec![
        SerialPart {
            picking: spec.picking[0].clone(),
            endowment: spec.endowments[0],
        },
        SerialPart {
            picking: spec.picking[1].clone(),
            endowment: spec.endowments[1],
        },
    ];
    let deals = spec
        .deals
        .iter()
        .map(|d| GeneralizedDeal {
            transfers: vec![
                Transfer {
                    from: 1,
                    to: 2,
                    items: d.give,
                },
                Transfer {
                    from: 2,
                    to: 1,
                    items: d.take,
                },
            ],
            policy: match d.policy {
                crate::mechanism::DealPolicy::AlwaysUnlessUnfavorable => {
                    SerialDealPolicy::AlwaysUnlessUnfavorable
                }
                crate::mechanism::DealPolicy::StrictlyFavorableOnly => {
                    SerialDealPolicy::StrictlyFavorableOnly
                }
                _ => SerialDealPolicy::ImprovesSomeone,
            },
        })
        .collect();
    SerialSpec {
        players: 2,
        m: spec.m,
        universe,
        parts,
        deals,
        continuations: BTreeMap::new(),
        default_rule: Some(DefaultContinuation::EndowFirst),
    }
}

// --- JSON form ---------------------------------------------------------
//
// {"n":…, "m":…, "parts":[{"N":[…],"O":[[…]…],"E":[…]}…],
//  "deals":[{"transfers":[{"from":i,"to":j,"items":[…]}…],"policy":…}…],
//  "continuations":[{"player":i,"leftover":[…],"spec":{…}}…],
//  "default":"endow-first" | {…template…} | null}

#[derive(Serialize, Deserialize)]
struct PartJson {
    #[serde(rename = "N", default)]
    n: ItemSet,
    #[serde(rename = "O", default)]
    o: Option<Vec<ItemSet>>,
    #[serde(rename = "E", default)]
    e: ItemSet,
}

#[derive(Serialize, Deserialize)]
struct ContinuationJson {
    player: usize,
    leftover: ItemSet,
    spec: SerialSpec,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DefaultJson {
    Named(String),
    Template(Box<SerialSpec>),
}

#[derive(Serialize, Deserialize)]
struct SerialJson {
    n: usize,
    m: usize,
    parts: Vec<PartJson>,
    #[serde(default)]
    deals: Vec<GeneralizedDeal>,
    #[serde(default)]
    continuations: Vec<ContinuationJson>,
    #[serde(default)]
    default: Option<DefaultJson>,
}

impl Serialize for SerialSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SerialJson {
            n: self.players,
            m: self.m,
            parts: self
                .parts
                .iter()
                .map(|p| PartJson {
                    n: p.picking.base,
                    o: Some(p.picking.offers.clone()),
                    e: p.endowment,
                })
                .collect(),
            deals: self.deals.clone(),
            continuations: self
                .continuations
                .iter()
                .map(|(&(player, leftover), spec)| ContinuationJson {
                    player,
                    leftover,
                    spec: spec.clone(),
                })
                .collect(),
            default: self.default_rule.as_ref().map(|d| match d {
                DefaultContinuation::EndowFirst => DefaultJson::Named("endow-first".into()),
                DefaultContinuation::Template(t) => DefaultJson::Template(t.clone()),
            }),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SerialSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<SerialSpec, D::Error> {
        let raw = SerialJson::deserialize(deserializer)?;
        let parts: Vec<SerialPart> = raw
            .parts
            .iter()
            .map(|p| {
                let picking = match &p.o {
                    Some(list) if !list.is_empty() => OfferSet::new(p.n, list.clone()),
                    _ if p.n.is_empty() => OfferSet::degenerate(),
                    _ => OfferSet::new(p.n, Vec::new()),
                };
                SerialPart {
                    picking,
                    endowment: p.e,
                }
            })
            .collect();
        let universe = parts.iter().fold(ItemSet::EMPTY, |acc, p| {
            acc.union(p.picking.base).union(p.endowment)
        });
        let mut continuations = BTreeMap::new();
        for c in raw.continuations {
            continuations.insert((c.player, c.leftover), c.spec);
        }
        let default_rule = match raw.default {
            None => None,
            Some(DefaultJson::Named(name)) if name == "endow-first" => {
                Some(DefaultContinuation::EndowFirst)
            }
            Some(DefaultJson::Named(name)) => {
                return Err(serde::de::Error::custom(format!(
                    "unknown default continuation rule `{name}`"
                )))
            }
            Some(DefaultJson::Template(t)) => Some(DefaultContinuation::Template(t)),
        };
        Ok(SerialSpec {
            players: raw.n,
            m: raw.m,
            universe,
            parts,
            deals: raw.deals,
            continuations,
            default_rule,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::Valuation;

    fn deal(transfers: Vec<(usize, usize, &[usize])>) -> GeneralizedDeal {
        GeneralizedDeal {
            transfers: transfers
                .into_iter()
                .map(|(from, to, items)| Transfer {
                    from,
                    to,
                    items: ItemSet::from_items(items.iter().copied()),
                })
                .collect(),
            policy: SerialDealPolicy::default(),
        }
    }

    #[test]
    fn one_player_takes_everything() {
        let spec = SerialSpec::trivial(4, ItemSet::full(4));
        let p = Profile::from_int_rows(&[&[1, 2, 3, 4]]).unwrap();
        let a = spec.allocate(&p).unwrap();
        assert_eq!(a.bundle(1), ItemSet::full(4));
    }

    /// Three players, six items: picking regions {1,2},{3,4} and endowments
    /// {5},{6} for players 1 and 3, connected by a three-way deal.
    fn small_three_player() -> SerialSpec {
        let mut continuations = BTreeMap::new();
        // leftovers of N1={1,2}: {1} or {2} -> players {2,3}
        for leftover in [ItemSet::singleton(1), ItemSet::singleton(2)] {
            continuations.insert((1, leftover), endow_first(2, 6, leftover));
        }
        for leftover in [ItemSet::singleton(3), ItemSet::singleton(4)] {
            continuations.insert((2, leftover), endow_first(2, 6, leftover));
        }
        SerialSpec {
            players: 3,
            m: 6,
            universe: ItemSet::full(6),
            parts: vec![
                SerialPart {
                    picking: OfferSet::singletons(ItemSet::from_items([1, 2])),
                    endowment: ItemSet::singleton(5),
                },
                SerialPart {
                    picking: OfferSet::singletons(ItemSet::from_items([3, 4])),
                    endowment: ItemSet::EMPTY,
                },
                SerialPart {
                    picking: OfferSet::degenerate(),
                    endowment: ItemSet::singleton(6),
                },
            ],
            deals: vec![deal(vec![(1, 3, &[5]), (3, 1, &[6])])],
            continuations,
            default_rule: None,
        }
    }

    #[test]
    fn three_player_allocation_with_favorable_deal() {
        let spec = small_three_player();
        spec.validate().unwrap();
        // player 1 prefers item 6 over 5, player 3 prefers 5 over 6
        let p = Profile::new(vec![
            Valuation::from_ints(&[9, 1, 1, 1, 2, 8]).unwrap(),
            Valuation::from_ints(&[1, 1, 1, 9, 1, 1]).unwrap(),
            Valuation::from_ints(&[1, 1, 1, 1, 9, 2]).unwrap(),
        ])
        .unwrap();
        let a = spec.allocate(&p).unwrap();
        // picks: player 1 takes 1, player 2 takes 4; leftovers {2} and {3} go
        // to the lowest remaining players (2 and 1 respectively)
        assert_eq!(a.bundle(1), ItemSet::from_items([1, 3, 6]));
        assert_eq!(a.bundle(2), ItemSet::from_items([2, 4]));
        assert_eq!(a.bundle(3), ItemSet::singleton(5));
    }

    #[test]
    fn losing_player_blocks_the_deal() {
        let spec = small_three_player();
        // player 3 strictly prefers keeping item 6
        let p = Profile::new(vec![
            Valuation::from_ints(&[9, 1, 1, 1, 2, 8]).unwrap(),
            Valuation::from_ints(&[1, 1, 1, 9, 1, 1]).unwrap(),
            Valuation::from_ints(&[1, 1, 1, 1, 2, 9]).unwrap(),
        ])
        .unwrap();
        let a = spec.allocate(&p).unwrap();
        assert!(a.bundle(1).contains(5));
        assert!(a.bundle(3).contains(6));
    }

    #[test]
    fn missing_continuation_is_a_configuration_error() {
        let mut spec = small_three_player();
        spec.continuations.clear();
        assert!(matches!(
            spec.validate(),
            Err(SerialError::MissingContinuation { .. })
        ));
        spec.default_rule = Some(DefaultContinuation::EndowFirst);
        spec.validate().unwrap();
    }

    #[test]
    fn two_player_serial_matches_picking_exchange() {
        let pe = crate::presets::combined_eleven();
        let serial = from_picking_exchange(&pe);
        serial.validate().unwrap();
        let p = crate::presets::combined_eleven_profile();
        let a = serial.allocate(&p).unwrap();
        let b = pe.allocate(&p).unwrap();
        assert_eq!(a.bundle(1), b.bundle(1));
        assert_eq!(a.bundle(2), b.bundle(2));
    }

    #[test]
    fn serial_json_round_trip() {
        let spec = small_three_player();
        let json = serde_json::to_string(&spec).unwrap();
        let back: SerialSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["n"], 3);
        assert!(value["parts"].is_array());
        assert!(value["deals"][0]["transfers"].is_array());
    }
}
