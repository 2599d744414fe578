//! Singleton picking-exchange mechanisms: each player's region is either a
//! picking region with all-singleton offers or a one-item endowment, and for
//! three or more items no deals exist. These are exactly the truthful
//! mechanisms compatible with the relaxed fairness notions.

use thiserror::Error;

use crate::mechanism::{DealPolicy, ExchangeDeal, OfferSet, PickingExchangeSpec, TieBreak};
use crate::set::ItemSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SingletonError {
    #[error("region {region} is not within the universe of {m} items")]
    RegionOutOfRange { region: ItemSet, m: usize },
    #[error("a pair deal exists only in the degenerate two-item shape; here it would hand a player control of a pair")]
    PairDealRejected,
    #[error("universe must be nonempty")]
    EmptyUniverse,
}

/// Build the singleton mechanism in which player 1's region is `region1` and
/// player 2 owns the rest.
///
/// Region sizes force the shape: a region of two or more items becomes a
/// picking region with all singleton offers, a one-item region becomes an
/// endowment, and an empty region gets the degenerate offer set. With
/// `pair_deal` (allowed only for `m = 2` with both regions single items) the
/// two endowments are connected by the swap deal.
pub fn make_singleton_spec(
    m: usize,
    region1: ItemSet,
    pair_deal: bool,
) -> Result<PickingExchangeSpec, SingletonError> {
    if m == 0 {
        return Err(SingletonError::EmptyUniverse);
    }
    if !region1.within(m) {
        return Err(SingletonError::RegionOutOfRange { region: region1, m });
    }
    let region2 = region1.complement(m);
    let shape = |region: ItemSet| -> (OfferSet, ItemSet) {
        match region.len() {
            0 => (OfferSet::degenerate(), ItemSet::EMPTY),
            1 => (OfferSet::degenerate(), region),
            _ => (OfferSet::singletons(region), ItemSet::EMPTY),
        }
    };
    let (o1, e1) = shape(region1);
    let (o2, e2) = shape(region2);
    let deals = if pair_deal {
        if m != 2 || e1.len() != 1 || e2.len() != 1 {
            return Err(SingletonError::PairDealRejected);
        }
        vec![ExchangeDeal {
            give: e1,
            take: e2,
            policy: DealPolicy::ImprovesSomeone,
        }]
    } else {
        Vec::new()
    };
    Ok(PickingExchangeSpec {
        m,
        picking: [o1, o2],
        endowments: [e1, e2],
        deals,
        offer_tiebreak: TieBreak::Label,
    })
}

/// A canonical singleton shape: player 1's region plus the optional two-item
/// swap deal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SingletonShape {
    pub region1: ItemSet,
    pub pair_deal: bool,
}

impl SingletonShape {
    pub fn build(&self, m: usize) -> PickingExchangeSpec {
        make_singleton_spec(m, self.region1, self.pair_deal).expect("canonical shapes are valid")
    }

    pub fn label(&self, m: usize) -> String {
        let deal = if self.pair_deal { "+deal" } else { "" };
        format!("{}|{}{}", self.region1, self.region1.complement(m), deal)
    }
}

/// Every canonical singleton shape on `m` items, player-swap duplicates
/// pruned by requiring item 1 in player 1's region. For `m = 2` the (1,1)
/// split appears with and without the swap deal.
pub fn canonical_singleton_shapes(m: usize) -> Vec<SingletonShape> {
    assert!(m >= 1);
    let rest: Vec<usize> = (2..=m).collect();
    let mut shapes = Vec::new();
    for mask in 0..(1u64 << rest.len()) {
        let mut region1 = ItemSet::singleton(1);
        for (bit, &item) in rest.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                region1 = region1.with(item);
            }
        }
        shapes.push(SingletonShape {
            region1,
            pair_deal: false,
        });
        if m == 2 && region1.len() == 1 {
            shapes.push(SingletonShape {
                region1,
                pair_deal: true,
            });
        }
    }
    shapes.sort_by_key(|s| (s.region1.bits(), s.pair_deal));
    shapes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::Profile;

    #[test]
    fn full_region_shape() {
        // all five items to player 1's picking region: the one-item-to-the-
        // picker mechanism
        let spec = make_singleton_spec(5, ItemSet::full(5), false).unwrap();
        assert!(spec.validate().is_empty());
        assert_eq!(spec.picking[0].offers.len(), 5);
        assert!(spec.picking[0]
            .offers
            .iter()
            .all(|o| o.len() == 1));
        assert_eq!(spec.picking[1].base, ItemSet::EMPTY);
        assert!(spec.deals.is_empty());

        let p = Profile::from_int_rows(&[&[2, 9, 4, 1, 1], &[1, 1, 1, 1, 1]]).unwrap();
        let a = spec.allocate(&p).unwrap();
        assert_eq!(a.bundle(1), ItemSet::singleton(2));
    }

    #[test]
    fn balanced_four_item_shape() {
        let spec = make_singleton_spec(4, ItemSet::from_items([1, 2]), false).unwrap();
        assert!(spec.validate().is_empty());
        assert_eq!(spec.picking[0].base.len(), 2);
        assert_eq!(spec.picking[1].base.len(), 2);
    }

    #[test]
    fn degenerate_two_item_exchange() {
        let spec = make_singleton_spec(2, ItemSet::singleton(1), true).unwrap();
        assert!(spec.validate().is_empty());
        assert_eq!(spec.endowments[0], ItemSet::singleton(1));
        assert_eq!(spec.endowments[1], ItemSet::singleton(2));
        assert_eq!(spec.deals.len(), 1);

        // both players prefer the other's item: the swap happens
        let p = Profile::from_int_rows(&[&[1, 5], &[5, 1]]).unwrap();
        let a = spec.allocate(&p).unwrap();
        assert_eq!(a.bundle(1), ItemSet::singleton(2));

        // the swap would hurt player 2: blocked
        let p = Profile::from_int_rows(&[&[1, 5], &[1, 5]]).unwrap();
        let a = spec.allocate(&p).unwrap();
        assert_eq!(a.bundle(1), ItemSet::singleton(1));
    }

    #[test]
    fn pair_deal_rejected_beyond_two_items() {
        assert_eq!(
            make_singleton_spec(3, ItemSet::singleton(1), true),
            Err(SingletonError::PairDealRejected)
        );
    }

    #[test]
    fn canonical_shape_counts() {
        assert_eq!(canonical_singleton_shapes(1).len(), 1);
        assert_eq!(canonical_singleton_shapes(2).len(), 3);
        assert_eq!(canonical_singleton_shapes(4).len(), 8);
        assert_eq!(canonical_singleton_shapes(5).len(), 16);
        for shape in canonical_singleton_shapes(5) {
            assert!(shape.build(5).validate().is_empty());
            assert!(shape.region1.contains(1));
        }
    }
}
