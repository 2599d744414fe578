//! Truthful allocation of indivisible items without payments.
//!
//! The crate models two-player picking-exchange mechanisms (players pick
//! their best bundle among prespecified offers, prearranged endowment trades
//! execute exactly when they hurt nobody), their singleton restrictions, and
//! the n-player serial generalization. Around the mechanisms sit exact
//! fairness metrics (envy, proportionality, envy-freeness up to one item,
//! maximin shares, worst-case guarantee curves) and a brute-force analysis
//! layer that treats any allocation rule as a black box over a finite
//! valuation grid: exhaustive truthfulness verification, control detection,
//! and recovery of the picking/exchange structure from the table alone.
//!
//! All arithmetic is exact: values are arbitrary-precision rationals, and
//! grid sweeps run on exactly scaled integers. No floating point is involved
//! anywhere in a verdict.

pub mod allocation;
pub mod analysis;
pub mod cache;
pub mod experiments;
pub mod fairness;
pub mod gen;
pub mod grid;
pub mod mechanism;
pub mod presets;
pub mod rat;
pub mod serial;
pub mod set;
pub mod singleton;
pub mod valuation;

pub use allocation::Allocation;
pub use grid::GridSpec;
pub use mechanism::{DealPolicy, ExchangeDeal, OfferSet, PickingExchangeSpec, TieBreak};
pub use rat::Q;
pub use serial::SerialSpec;
pub use set::ItemSet;
pub use singleton::{canonical_singleton_shapes, make_singleton_spec};
pub use valuation::{Profile, Valuation};
