//! Black-box analysis of mechanisms over finite grids: tabulation,
//! exhaustive truthfulness verification, control detection, structural
//! decomposition, and a brute-force efficiency check.

mod control;
mod decompose;
mod pareto;
mod rules;
mod table;
mod verify;

pub use control::{controls_on_grid, maximal_controlled_sets, yields_control_of_pairs, GridControl};
pub use decompose::{decompose, Decomposition};
pub use pareto::is_pareto_efficient;
pub use rules::{AllocationRule, BuiltinRule, ConstantRule, DictatorRule, ForceBadRule, SpiteRule};
pub use table::{tabulate, tabulate_serial, tabulate_spec, MechanismTable};
pub use verify::{verify_truthful, DeviationWitness, VerifyReport, WITNESS_CAP};

use thiserror::Error;

use crate::set::ItemSet;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error(transparent)]
    Mechanism(#[from] crate::mechanism::MechanismError),
    #[error(transparent)]
    Serial(#[from] crate::serial::SerialError),
    #[error("rule produced a bad allocation at profile {index}: {reason}")]
    BadRuleOutput { index: u64, reason: String },
    #[error("grid is for {grid_m} items / {grid_players} players; the mechanism wants {want_m} items / {want_players} players")]
    GridMismatch {
        grid_m: usize,
        grid_players: usize,
        want_m: usize,
        want_players: usize,
    },
    #[error("operation supports at most {cap} items per table, table has {m}")]
    TableTooWide { m: usize, cap: usize },
    #[error("operation needs a two-player table")]
    NotTwoPlayers,
    #[error("player index {0} out of range")]
    BadPlayer(usize),
    #[error("grid has no strong-desire witness for {set} (player {player}); finding is vacuous")]
    VacuousControl { player: usize, set: ItemSet },
    #[error("table is not grid-truthful ({violations} violating cases); refusing to decompose")]
    NotTruthful { violations: u64 },
    #[error("table contradicts the expected structure: {findings:?}")]
    Falsified { findings: Vec<String> },
}
