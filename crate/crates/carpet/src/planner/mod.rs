//! Scale bookkeeping, dimension formulas, the exponent solver, rule
//! sequences and the quasi-invariant `h_inf_bar`.

pub mod dims;
pub mod invariant;
pub mod scales;
pub mod sequence;

pub use dims::{
    choose_parameters, closed_form_dims, empirical_dims, exact_rule_dims, sequence_dims, solve_exponents, Dims,
    ExponentSolution, ExponentSystem,
};
pub use invariant::{h_inf_bar, h_inf_bar_gauge, Gauge, PowerLaw};
pub use scales::{level_scales, LevelScales, ProfileRow, UniformityProfile};
pub use sequence::{balanced_sequence, discrepancy, repeat_sequence, ConstructionPlan};
