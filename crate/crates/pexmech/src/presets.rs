//! Worked example mechanisms and profiles used across tests, docs, and the
//! shipped CLI assets.

use std::collections::BTreeMap;

use crate::mechanism::{DealPolicy, ExchangeDeal, OfferSet, PickingExchangeSpec, TieBreak};
use crate::serial::{
    DefaultContinuation, GeneralizedDeal, SerialDealPolicy, SerialPart, SerialSpec, Transfer,
};
use crate::set::ItemSet;
use crate::valuation::{Profile, Valuation};

/// Six items, picking regions {1,2,3,4} and {5,6} with offers
/// {1,2},{2,3},{4} and {5},{6}; no endowments.
pub fn picking_six() -> PickingExchangeSpec {
    PickingExchangeSpec::picking_only(
        6,
        OfferSet::new(
            ItemSet::range(1, 4),
            vec![
                ItemSet::from_items([1, 2]),
                ItemSet::from_items([2, 3]),
                ItemSet::singleton(4),
            ],
        ),
        OfferSet::new(
            ItemSet::range(5, 6),
            vec![ItemSet::singleton(5), ItemSet::singleton(6)],
        ),
    )
}

/// The profile under which [`picking_six`] allocates {2,3,6} / {1,4,5}.
pub fn picking_six_profile() -> Profile {
    Profile::from_int_rows(&[&[3, 5, 5, 10, 4, 2], &[2, 3, 6, 1, 5, 3]]).unwrap()
}

/// Five items, endowments {1,2,3} / {4,5} with the single deal ({2,3},{4}).
pub fn exchange_five() -> PickingExchangeSpec {
    PickingExchangeSpec::exchange_only(
        5,
        ItemSet::range(1, 3),
        ItemSet::range(4, 5),
        vec![ExchangeDeal {
            give: ItemSet::from_items([2, 3]),
            take: ItemSet::singleton(4),
            policy: DealPolicy::ImprovesSomeone,
        }],
    )
}

/// The profile under which [`exchange_five`] trades {2,3} for {4}.
pub fn exchange_five_profile() -> Profile {
    Profile::from_int_rows(&[&[6, 2, 3, 7, 1], &[1, 6, 1, 4, 7]]).unwrap()
}

/// Eleven items: [`picking_six`] on {1..6} combined with [`exchange_five`]
/// shifted onto {7..11}.
pub fn combined_eleven() -> PickingExchangeSpec {
    PickingExchangeSpec {
        m: 11,
        picking: [
            OfferSet::new(
                ItemSet::range(1, 4),
                vec![
                    ItemSet::from_items([1, 2]),
                    ItemSet::from_items([2, 3]),
                    ItemSet::singleton(4),
                ],
            ),
            OfferSet::new(
                ItemSet::range(5, 6),
                vec![ItemSet::singleton(5), ItemSet::singleton(6)],
            ),
        ],
        endowments: [ItemSet::range(7, 9), ItemSet::range(10, 11)],
        deals: vec![ExchangeDeal {
            give: ItemSet::from_items([8, 9]),
            take: ItemSet::singleton(10),
            policy: DealPolicy::ImprovesSomeone,
        }],
        offer_tiebreak: TieBreak::Label,
    }
}

/// The profile under which [`combined_eleven`] allocates
/// {2,3,6,7,10} / {1,4,5,8,9,11}.
pub fn combined_eleven_profile() -> Profile {
    Profile::from_int_rows(&[
        &[3, 5, 5, 10, 4, 2, 6, 2, 3, 7, 1],
        &[2, 3, 6, 1, 5, 3, 1, 6, 1, 4, 7],
    ])
    .unwrap()
}

/// All `size`-element subsets of `base`, in lexicographic order of their
/// ascending item lists.
pub fn fixed_size_subsets(base: ItemSet, size: usize) -> Vec<ItemSet> {
    let items: Vec<usize> = base.iter().collect();
    let n = items.len();
    if size == 0 || size > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut combo: Vec<usize> = (0..size).collect();
    'outer: loop {
        out.push(ItemSet::from_items(combo.iter().map(|&i| items[i])));
        let mut i = size;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            if combo[i] != i + n - size {
                combo[i] += 1;
                for j in i + 1..size {
                    combo[j] = combo[j - 1] + 1;
                }
                continue 'outer;
            }
        }
    }
    out
}

/// A three-player serial mechanism on 100 items.
///
/// Picking regions: N1 = {1..20} with offers {1,2,3} and N1\{1};
/// N2 = {21..50} with all 6-item subsets as offers; N3 = {51..70} with the
/// two halves as offers. Endowments E1 = {71..80}, E2 = {81..90},
/// E3 = {91..100}. Two generalized deals: a pairwise 1<->3 swap of {75,79}
/// for {93}, and a three-way deal in which player 1 gives 71 to player 2 and
/// {72,80} to player 3, player 2 gives 88 to player 1 and 85 to player 3,
/// and player 3 gives 95 to player 1 and {99,100} to player 2. Leftovers fall
/// back to the endow-first rule.
pub fn serial_hundred() -> SerialSpec {
    let n1 = ItemSet::range(1, 20);
    let n2 = ItemSet::range(21, 50);
    let n3 = ItemSet::range(51, 70);

    let o1 = vec![ItemSet::from_items([1, 2, 3]), n1.without(1)];
    let o2 = fixed_size_subsets(n2, 6);
    let o3 = vec![ItemSet::range(51, 60), ItemSet::range(61, 70)];

    let pairwise = GeneralizedDeal {
        transfers: vec![
            Transfer {
                from: 1,
                to: 3,
                items: ItemSet::from_items([75, 79]),
            },
            Transfer {
                from: 3,
                to: 1,
                items: ItemSet::singleton(93),
            },
        ],
        policy: SerialDealPolicy::ImprovesSomeone,
    };
    let three_way = GeneralizedDeal {
        transfers: vec![
            Transfer {
                from: 1,
                to: 2,
                items: ItemSet::singleton(71),
            },
            Transfer {
                from: 1,
                to: 3,
                items: ItemSet::from_items([72, 80]),
            },
            Transfer {
                from: 2,
                to: 1,
                items: ItemSet::singleton(88),
            },
            Transfer {
                from: 2,
                to: 3,
                items: ItemSet::singleton(85),
            },
            Transfer {
                from: 3,
                to: 1,
                items: ItemSet::singleton(95),
            },
            Transfer {
                from: 3,
                to: 2,
                items: ItemSet::from_items([99, 100]),
            },
        ],
        policy: SerialDealPolicy::ImprovesSomeone,
    };

    SerialSpec {
        players: 3,
        m: 100,
        universe: ItemSet::full(100),
        parts: vec![
            SerialPart {
                picking: OfferSet::new(n1, o1),
                endowment: ItemSet::range(71, 80),
            },
            SerialPart {
                picking: OfferSet::new(n2, o2),
                endowment: ItemSet::range(81, 90),
            },
            SerialPart {
                picking: OfferSet::new(n3, o3),
                endowment: ItemSet::range(91, 100),
            },
        ],
        deals: vec![pairwise, three_way],
        continuations: BTreeMap::new(),
        default_rule: Some(DefaultContinuation::EndowFirst),
    }
}

/// A 100-item, three-player profile under which every transfer of both
/// generalized deals in [`serial_hundred`] strictly improves every involved
/// player.
pub fn serial_hundred_profile() -> Profile {
    let mut v1 = vec![1i64; 100];
    let mut v2 = vec![1i64; 100];
    let mut v3 = vec![1i64; 100];
    // player 1 gives 71, 72, 80, 75, 79 and receives 88, 95, 93
    for j in [88, 95, 93] {
        v1[j - 1] = 50;
    }
    // player 2 gives 88, 85 and receives 71, 99, 100
    for j in [71, 99, 100] {
        v2[j - 1] = 50;
    }
    // player 3 gives 95, 99, 100, 93 and receives 72, 80, 85, 75, 79
    for j in [72, 80, 85, 75, 79] {
        v3[j - 1] = 50;
    }
    // distinct tastes inside the picking regions
    v1[0] = 30; // item 1
    v2[20] = 30; // item 21
    v3[50] = 30; // item 51
    Profile::new(vec![
        Valuation::from_ints(&v1).unwrap(),
        Valuation::from_ints(&v2).unwrap(),
        Valuation::from_ints(&v3).unwrap(),
    ])
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        assert!(picking_six().validate().is_empty());
        assert!(exchange_five().validate().is_empty());
        assert!(combined_eleven().validate().is_empty());
        serial_hundred().validate().unwrap();
    }

    #[test]
    fn serial_offer_count_is_thirty_choose_six() {
        let spec = serial_hundred();
        assert_eq!(spec.parts[1].picking.offers.len(), 593_775);
    }
}
