//! Structural recovery: control corollaries and decomposition round-trips on
//! tables of randomly generated mechanisms.

use pexmech::analysis::{
    controls_on_grid, decompose, tabulate, tabulate_spec, verify_truthful, ConstantRule,
    DictatorRule, GridControl, MechanismTable,
};
use pexmech::gen::{random_spec, rng_from_seed, SpecGenOptions};
use pexmech::grid::DEFAULT_BUDGET;
use pexmech::rat::qi;
use pexmech::{GridSpec, ItemSet, PickingExchangeSpec};

fn decomposition_grid(m: usize) -> GridSpec {
    GridSpec::with_default_levels(m, 2, true)
}

fn spec_table(spec: &PickingExchangeSpec, m: usize) -> MechanismTable {
    tabulate_spec(spec, &decomposition_grid(m), DEFAULT_BUDGET).unwrap()
}

/// Offers compared as unordered families.
fn as_family(offers: &[ItemSet]) -> Vec<ItemSet> {
    let mut v = offers.to_vec();
    v.sort();
    v.dedup();
    v
}

#[test]
fn round_trip_recovers_structure_on_random_mechanisms() {
    let mut done = 0;
    let mut seed = 0u64;
    while done < 12 {
        seed += 1;
        let mut rng = rng_from_seed(seed);
        let m = 2 + (seed as usize % 3);
        let spec = random_spec(&mut rng, m, &SpecGenOptions::default());
        let t = spec_table(&spec, m);
        let d = decompose(&t).unwrap_or_else(|e| panic!("seed {seed} spec {spec}: {e}"));

        assert_eq!(d.picking_regions[0], spec.picking_region(1), "seed {seed}");
        assert_eq!(d.picking_regions[1], spec.picking_region(2), "seed {seed}");
        assert_eq!(d.endowments[0], spec.endowment(1), "seed {seed}");
        assert_eq!(d.endowments[1], spec.endowment(2), "seed {seed}");
        for i in 0..2 {
            if !spec.picking[i].base.is_empty() {
                assert_eq!(
                    as_family(&d.offers[i]),
                    as_family(&spec.picking[i].offers),
                    "seed {seed} player {}",
                    i + 1
                );
            }
        }
        let mut expected_deals: Vec<(ItemSet, ItemSet)> =
            spec.deals.iter().map(|deal| (deal.give, deal.take)).collect();
        expected_deals.sort();
        assert_eq!(d.deals, expected_deals, "seed {seed}");

        // re-execution reproduces the table exactly
        let rebuilt = d.to_spec(m);
        let t2 = spec_table(&rebuilt, m);
        for index in 0..t.profile_count() {
            assert_eq!(
                t.bundle(index, 1),
                t2.bundle(index, 1),
                "seed {seed} entry {index}"
            );
        }
        done += 1;
    }
}

#[test]
fn singleton_control_and_owned_partition_on_truthful_tables() {
    // spec-built tables plus hand-built truthful rules
    let mut tables: Vec<MechanismTable> = Vec::new();
    for seed in 100..108u64 {
        let mut rng = rng_from_seed(seed);
        let m = 3 + (seed as usize % 2);
        let spec = random_spec(&mut rng, m, &SpecGenOptions::default());
        tables.push(spec_table(&spec, m));
    }
    let grid = decomposition_grid(3);
    tables.push(tabulate(&DictatorRule { m: 3, player: 2 }, &grid, DEFAULT_BUDGET).unwrap());
    tables.push(
        tabulate(
            &ConstantRule {
                m: 3,
                x1: ItemSet::from_items([2]),
            },
            &grid,
            DEFAULT_BUDGET,
        )
        .unwrap(),
    );

    for t in &tables {
        assert!(verify_truthful(t).unwrap().is_truthful());
        let m = t.grid.m;
        let mut owned = [ItemSet::EMPTY; 2];
        for x in 1..=m {
            let s = ItemSet::singleton(x);
            let holders: Vec<usize> = (1..=2)
                .filter(|&pl| controls_on_grid(t, pl, s).unwrap() == GridControl::Holds)
                .collect();
            assert_eq!(holders.len(), 1, "item {x} of {}", t.rule_name);
            owned[holders[0] - 1] = owned[holders[0] - 1].with(x);
        }
        assert_eq!(owned[0].union(owned[1]), ItemSet::full(m));
        assert!(owned[0].is_disjoint(owned[1]));
    }
}

#[test]
fn picking_zone_always_serves_an_argmax_offer() {
    for seed in 200..206u64 {
        let mut rng = rng_from_seed(seed);
        let m = 4;
        let spec = random_spec(&mut rng, m, &SpecGenOptions::default());
        let grid = GridSpec::new(m, vec![qi(1), qi(5), qi(25)], true, 2).unwrap();
        let t = tabulate_spec(&spec, &grid, DEFAULT_BUDGET).unwrap();
        for index in 0..t.profile_count() {
            let p = grid.profile_at(index);
            for player in 1..=2usize {
                let offers = &spec.picking[player - 1];
                let got = t.bundle(index, player).intersection(offers.base);
                // the received piece is one of the offers...
                assert!(
                    offers.offers.contains(&got),
                    "seed {seed} entry {index} player {player}"
                );
                // ...and achieves the maximum offer value
                let v = p.valuation(player);
                let best = offers
                    .offers
                    .iter()
                    .map(|&o| v.value(o).unwrap())
                    .max()
                    .unwrap();
                assert_eq!(v.value(got).unwrap(), best);
            }
        }
    }
}

#[test]
fn tabulate_accepts_closures_as_rules() {
    let m = 3;
    let grid = GridSpec::new(m, vec![qi(1), qi(4)], false, 2).unwrap();
    // an everything-to-player-2 rule written inline
    let rule = |p: &pexmech::Profile| {
        let _ = p;
        Ok(pexmech::Allocation::two_player(ItemSet::EMPTY, m))
    };
    let t = tabulate(&rule, &grid, DEFAULT_BUDGET).unwrap();
    assert!(verify_truthful(&t).unwrap().is_truthful());
    let d = decompose(&t).unwrap();
    assert_eq!(d.endowments[1], ItemSet::full(m));
}
