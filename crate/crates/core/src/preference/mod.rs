//! Value models, the comparison log, compatibility checks, repair, and
//! potential-optimality ranking.

mod compat;
mod models;
mod ranking;
mod store;

pub use compat::{
    check, check_choquet, check_choquet_from, check_linear, repair, CompatResult, CompatStatus, ModelKind,
    RepairReport, EPS_COMPAT,
};
pub use models::{
    choquet_eval_2add, choquet_eval_capacity, num_pairs, pair_index, pairs, translate_nonnegative, Capacity,
    ChoquetModel, LinearModel, ValueModel,
};
pub use ranking::{rank_fronts_by_potential_optimality, rank_fronts_limited};
pub use store::{Comparison, PreferenceStore, Verdict};
