//! Simulated annealing over discrete parameter domains.

mod anneal;
mod objective;

pub use anneal::{
    acceptance_probability, anneal, anneal_with, cost, initial_state, neighbour, restrict_by_half,
    restrict_by_half_indices, AnnealResult, AnnealingSchedule, Selection,
};
pub use objective::{combine_cost, default_objectives, default_scale, parse_objectives, Objective};
