//! Reproducible experiment suites: the adversarial valuation families that
//! pin down what singleton mechanisms can and cannot guarantee, plus
//! exhaustive grid sweeps for the worst-case approximation floors.

use num::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::allocation::Allocation;
use crate::analysis::{tabulate_spec, AnalysisError};
use crate::fairness::{
    best_proportionality, ef1_flags, guarantee_curve, maximin_share, max_envy, min_possible_envy,
    FairnessError,
};
use crate::grid::GridSpec;
use crate::mechanism::PickingExchangeSpec;
use crate::rat::{q, qi, Q};
use crate::set::ItemSet;
use crate::singleton::canonical_singleton_shapes;
use crate::valuation::{Profile, Valuation};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("epsilon must satisfy 0 < eps < 1 and delta must satisfy 0 < delta < eps/m^2 (eps={eps}, delta={delta}, m={m})")]
    BadEpsDelta { eps: String, delta: String, m: usize },
    #[error(transparent)]
    Fairness(#[from] FairnessError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Mechanism(#[from] crate::mechanism::MechanismError),
}

pub fn default_eps() -> Q {
    q(1, 100)
}

pub fn default_delta() -> Q {
    q(1, 10_000)
}

pub fn check_eps_delta(m: usize, eps: &Q, delta: &Q) -> Result<(), ExperimentError> {
    let m2 = qi((m * m) as i64);
    if *eps <= Q::zero() || *eps >= Q::one() || *delta <= Q::zero() || delta * &m2 >= *eps {
        return Err(ExperimentError::BadEpsDelta {
            eps: crate::rat::format_rational(eps),
            delta: crate::rat::format_rational(delta),
            m,
        });
    }
    Ok(())
}

/// Serializable exact rational with a decimal rendering.
#[derive(Clone, Debug, Serialize)]
pub struct Exact {
    pub exact: String,
    pub decimal: String,
    #[serde(skip)]
    pub value: Q,
}

impl Exact {
    pub fn new(value: Q) -> Exact {
        Exact {
            exact: crate::rat::format_rational(&value),
            decimal: crate::rat::decimal_approx(&value, 6),
            value,
        }
    }
}

// ---------------------------------------------------------------------------
// unbounded-envy family: one contested item against a tower of unit items

/// The contested-item profile: a big item (worth `m` to its controller and
/// `m^d` to the other player) plus `m` unit items, `m + 1` items in total.
/// The unit tail makes "give the big item away" envy-free, so the instance's
/// minimum envy is zero while any mechanism whose player 1 controls item 1
/// leaves player 2 with an envy bounded away from zero and a vanishing share.
pub fn contested_item_profile(m: usize, d: u32) -> Profile {
    let items = m + 1;
    let mut v1 = vec![qi(1); items];
    let mut v2 = vec![qi(1); items];
    v1[0] = qi(m as i64);
    v2[0] = qi(m as i64).pow(d as i32);
    Profile::new(vec![
        Valuation::new(v1).unwrap(),
        Valuation::new(v2).unwrap(),
    ])
    .unwrap()
}

#[derive(Clone, Debug, Serialize)]
pub struct App1Row {
    pub region1: ItemSet,
    pub pair_deal: bool,
    pub d: u32,
    pub x1: ItemSet,
    /// Player 2's proportionality ratio `2 v_2(X_2) / v_2(M)`.
    pub prop_ratio_other: Exact,
    /// Envy produced by the mechanism.
    pub envy_mechanism: Exact,
    /// Minimum envy the instance admits.
    pub envy_instance: Exact,
    /// Best proportionality level the instance admits.
    pub best_proportionality: Exact,
}

/// Run every canonical singleton shape on the contested-item family for each
/// exponent in `d_values`. The shapes place item 1 with player 1, so player
/// 2's share column decays toward zero as `d` grows.
pub fn app1_envy(m: usize, d_values: &[u32]) -> Result<Vec<App1Row>, ExperimentError> {
    let items = m + 1;
    let mut rows = Vec::new();
    for shape in canonical_singleton_shapes(items) {
        let spec = shape.build(items);
        for &d in d_values {
            let p = contested_item_profile(m, d);
            let a = spec.allocate(&p)?;
            let v2 = p.valuation(2);
            let prop = qi(2) * v2.value(a.bundle(2)).unwrap() / v2.total();
            rows.push(App1Row {
                region1: shape.region1,
                pair_deal: shape.pair_deal,
                d,
                x1: a.bundle(1),
                prop_ratio_other: Exact::new(prop),
                envy_mechanism: Exact::new(max_envy(&p, &a)?),
                envy_instance: Exact::new(min_possible_envy(&p)?),
                best_proportionality: Exact::new(best_proportionality(&p)?),
            });
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// mirrored near-tie families for EF1 and share guarantees

/// Per-region mirrored profile: on his own region a player sees `1 + eps`
/// on the region's first item and `1` elsewhere; on the opposite region he
/// sees `big` on its first item and `delta` elsewhere. `big` is the
/// region-size coefficient for the share family and `1` for the EF1 family.
fn mirrored_profile(
    spec: &PickingExchangeSpec,
    eps: &Q,
    delta: &Q,
    big_for: impl Fn(ItemSet) -> Q,
) -> Profile {
    let m = spec.m;
    let r1 = spec.picking_region(1).union(spec.endowment(1));
    let r2 = spec.picking_region(2).union(spec.endowment(2));
    let head = |r: ItemSet| r.min_item();
    let mut v1 = vec![Q::zero(); m];
    let mut v2 = vec![Q::zero(); m];
    for item in 1..=m {
        if r1.contains(item) {
            v1[item - 1] = if head(r1) == Some(item) {
                Q::one() + eps.clone()
            } else {
                Q::one()
            };
            v2[item - 1] = if head(r1) == Some(item) {
                big_for(r2)
            } else {
                delta.clone()
            };
        } else {
            v1[item - 1] = if head(r2) == Some(item) {
                big_for(r1)
            } else {
                delta.clone()
            };
            v2[item - 1] = if head(r2) == Some(item) {
                Q::one() + eps.clone()
            } else {
                Q::one()
            };
        }
    }
    Profile::new(vec![
        Valuation::new(v1).unwrap(),
        Valuation::new(v2).unwrap(),
    ])
    .unwrap()
}

/// The EF1-defeating family: each player almost-ties his own region's items
/// and nearly ignores the other region, except for one moderately valued
/// item there.
pub fn ef1_adversarial_profile(spec: &PickingExchangeSpec, eps: &Q, delta: &Q) -> Profile {
    mirrored_profile(spec, eps, delta, |_| Q::one())
}

/// The share-guarantee family: like the EF1 family, but the one valuable
/// foreign item is worth the whole own region.
pub fn mms_adversarial_profile(spec: &PickingExchangeSpec, eps: &Q, delta: &Q) -> Profile {
    mirrored_profile(spec, eps, delta, |own: ItemSet| {
        let k = own.len().max(1);
        qi(k as i64)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct App2Row {
    pub region1: ItemSet,
    pub pair_deal: bool,
    pub x1: ItemSet,
    pub ef1: bool,
    pub ef1_flags: [bool; 2],
}

/// Every canonical singleton shape against its EF1-adversarial profile.
pub fn app2_ef1(m: usize, eps: &Q, delta: &Q) -> Result<Vec<App2Row>, ExperimentError> {
    check_eps_delta(m, eps, delta)?;
    let mut rows = Vec::new();
    for shape in canonical_singleton_shapes(m) {
        let spec = shape.build(m);
        let p = ef1_adversarial_profile(&spec, eps, delta);
        let a = spec.allocate(&p)?;
        let flags = ef1_flags(&p, &a)?;
        rows.push(App2Row {
            region1: shape.region1,
            pair_deal: shape.pair_deal,
            x1: a.bundle(1),
            ef1: flags.iter().all(|&f| f),
            ef1_flags: flags,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct ShareRow {
    pub region1: ItemSet,
    pub pair_deal: bool,
    pub x1: ItemSet,
    /// `min_i v_i(X_i) / mms_i` on the adversarial profile.
    pub min_mms_ratio: Exact,
    /// `min_i (v_i(X_i)/v_i(M)) / guarantee(alpha_i)`.
    pub min_guarantee_ratio: Exact,
}

/// Every canonical singleton shape against its share-guarantee adversarial
/// profile; reports both the maximin-share and guarantee-curve ratios.
pub fn share_family_rows(m: usize, eps: &Q, delta: &Q) -> Result<Vec<ShareRow>, ExperimentError> {
    check_eps_delta(m, eps, delta)?;
    let mut rows = Vec::new();
    for shape in canonical_singleton_shapes(m) {
        let spec = shape.build(m);
        let p = mms_adversarial_profile(&spec, eps, delta);
        let a = spec.allocate(&p)?;
        let (mms_ratio, g_ratio) = min_ratios(&p, &a)?;
        rows.push(ShareRow {
            region1: shape.region1,
            pair_deal: shape.pair_deal,
            x1: a.bundle(1),
            min_mms_ratio: Exact::new(mms_ratio),
            min_guarantee_ratio: Exact::new(g_ratio),
        });
    }
    Ok(rows)
}

/// Min over players of the maximin-share ratio and the guarantee-curve ratio.
pub fn min_ratios(p: &Profile, a: &Allocation) -> Result<(Q, Q), ExperimentError> {
    let mut mms_min: Option<Q> = None;
    let mut g_min: Option<Q> = None;
    for i in 1..=2 {
        let v = p.valuation(i);
        let bundle = v.value(a.bundle(i)).unwrap();
        let mms = maximin_share(v)?;
        if !mms.is_zero() {
            let r = bundle.clone() / mms;
            if mms_min.as_ref().is_none_or(|b| r < *b) {
                mms_min = Some(r);
            }
        }
        let total = v.total();
        let alpha = v.max_item_value() / total.clone();
        let g = guarantee_curve(&alpha)?;
        if !g.is_zero() {
            let r = bundle / total / g;
            if g_min.as_ref().is_none_or(|b| r < *b) {
                g_min = Some(r);
            }
        }
    }
    Ok((
        mms_min.unwrap_or_else(Q::one),
        g_min.unwrap_or_else(Q::one),
    ))
}

// ---------------------------------------------------------------------------
// exhaustive grid sweeps

#[derive(Clone, Debug, Serialize)]
pub struct WorstCaseRow {
    pub region1: ItemSet,
    pub pair_deal: bool,
    /// Worst `min_i v_i(X_i)/mms_i` over every grid profile.
    pub min_mms_ratio: Exact,
    pub witness_index: u64,
}

/// For each canonical singleton shape, the worst maximin-share ratio over an
/// exhaustive grid. Exact arithmetic throughout; the scan compares ratios by
/// cross-multiplication on the grid's integer scale.
pub fn worst_singleton(
    m: usize,
    grid: &GridSpec,
    budget: u64,
) -> Result<Vec<WorstCaseRow>, ExperimentError> {
    let mut rows = Vec::new();
    for shape in canonical_singleton_shapes(m) {
        let spec = shape.build(m);
        let (ratio, witness) = worst_grid_mms_ratio(&spec, grid, budget)?;
        rows.push(WorstCaseRow {
            region1: shape.region1,
            pair_deal: shape.pair_deal,
            min_mms_ratio: Exact::new(ratio),
            witness_index: witness,
        });
    }
    Ok(rows)
}

/// Worst `min_i v_i(X_i)/mms_i` of one mechanism over a whole grid.
pub fn worst_grid_mms_ratio(
    spec: &PickingExchangeSpec,
    grid: &GridSpec,
    budget: u64,
) -> Result<(Q, u64), ExperimentError> {
    let table = tabulate_spec(spec, grid, budget)?;
    let per = grid.combos_per_player() as u64;
    let scaled = grid.scaled();

    // per-combo subset sums and maximin shares on the integer scale
    struct ComboData {
        sums: Vec<u64>,
        mms: u64,
    }
    let combo_data: Option<Vec<ComboData>> = scaled.map(|sg| {
        (0..per)
            .map(|c| {
                let sums = sg.subset_sums(&sg.combo_values(grid, c));
                let full = sums.len() - 1;
                let total = sums[full];
                let mut mms = 0u64;
                for mask in 0..sums.len() {
                    let side = sums[mask];
                    let min = side.min(total - side);
                    if min > mms {
                        mms = min;
                    }
                }
                ComboData { sums, mms }
            })
            .collect()
    });

    let mut worst: Option<(u64, u64, u64)> = None; // (num, den, index) as scaled ints
    match &combo_data {
        Some(data) => {
            for index in 0..table.profile_count() {
                let combos = grid.combos_of_index(index);
                for player in 1..=2usize {
                    let cd = &data[combos[player - 1] as usize];
                    if cd.mms == 0 {
                        continue;
                    }
                    let bundle = table.bundle(index, player).bits() as usize;
                    let value = cd.sums[bundle];
                    let better = match &worst {
                        None => true,
                        Some((wn, wd, _)) => {
                            (value as u128) * (*wd as u128) < (*wn as u128) * (cd.mms as u128)
                        }
                    };
                    if better {
                        worst = Some((value, cd.mms, index));
                    }
                }
            }
        }
        None => {
            // rational-level grids take the slow exact path
            let mut worst_q: Option<(Q, u64)> = None;
            for index in 0..table.profile_count() {
                let p = grid.profile_at(index);
                let a = table.allocation(index);
                let (r, _) = min_ratios(&p, &a)?;
                if worst_q.as_ref().is_none_or(|(b, _)| r < *b) {
                    worst_q = Some((r, index));
                }
            }
            let (r, idx) = worst_q.expect("grid nonempty");
            return Ok((r, idx));
        }
    }
    let (num, den, index) = worst.expect("grid nonempty with positive shares");
    Ok((q(num as i64, den as i64), index))
}

/// Exhaustively check EF1 of one mechanism over a whole grid; returns the
/// first violating profile index, if any.
pub fn ef1_on_grid(
    spec: &PickingExchangeSpec,
    grid: &GridSpec,
    budget: u64,
) -> Result<Option<u64>, ExperimentError> {
    let table = tabulate_spec(spec, grid, budget)?;
    let per = grid.combos_per_player() as u64;
    if let Some(sg) = grid.scaled() {
        // per-combo subset sums and per-mask max item values
        let nsets = 1usize << grid.m;
        let data: Vec<(Vec<u64>, Vec<u64>)> = (0..per)
            .map(|c| {
                let vals = sg.combo_values(grid, c);
                let sums = sg.subset_sums(&vals);
                let mut max_item = vec![0u64; nsets];
                for mask in 1..nsets {
                    let low = mask.trailing_zeros() as usize;
                    max_item[mask] = max_item[mask & (mask - 1)].max(vals[low]);
                }
                (sums, max_item)
            })
            .collect();
        for index in 0..table.profile_count() {
            let combos = grid.combos_of_index(index);
            for player in 1..=2usize {
                let (sums, max_item) = &data[combos[player - 1] as usize];
                let own = table.bundle(index, player).bits() as usize;
                let other = table.bundle(index, 3 - player).bits() as usize;
                if other == 0 {
                    continue;
                }
                if sums[own] + max_item[other] < sums[other] {
                    return Ok(Some(index));
                }
            }
        }
        Ok(None)
    } else {
        for index in 0..table.profile_count() {
            let p = grid.profile_at(index);
            if !crate::fairness::is_ef1(&p, &table.allocation(index))? {
                return Ok(Some(index));
            }
        }
        Ok(None)
    }
}

/// Report rows as aligned CSV: serializes any experiment row list.
pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    let values: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| serde_json::to_value(r).expect("rows serialize"))
        .collect();
    let Some(first) = values.first() else {
        return out;
    };
    let keys = flat_keys(first);
    out.push_str(&keys.join(","));
    out.push('\n');
    for v in &values {
        let cells: Vec<String> = keys.iter().map(|k| flat_get(v, k)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn flat_keys(v: &serde_json::Value) -> Vec<String> {
    let mut keys = Vec::new();
    if let serde_json::Value::Object(map) = v {
        for (k, val) in map {
            match val {
                serde_json::Value::Object(inner) => {
                    for k2 in inner.keys() {
                        keys.push(format!("{k}.{k2}"));
                    }
                }
                _ => keys.push(k.clone()),
            }
        }
    }
    keys
}

fn flat_get(v: &serde_json::Value, key: &str) -> String {
    let val = match key.split_once('.') {
        Some((a, b)) => &v[a][b],
        None => &v[key],
    };
    match val {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(items) => {
            let inner: Vec<String> = items.iter().map(|x| x.to_string()).collect();
            format!("\"[{}]\"", inner.join(" "))
        }
        other => other.to_string(),
    }
}
