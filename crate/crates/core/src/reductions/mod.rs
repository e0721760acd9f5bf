//! Complexity reductions between weighted KB problems and generators of hard
//! instance families.

pub mod formats;
pub mod random;
pub mod generators;
pub mod lemmas;

pub use generators::{gen_3col, gen_3dnf_certain, gen_3dnf_cq_certain, gen_3sat, gen_lexmax};
pub use lemmas::{bcs_to_iqa_p, iqa_p_to_co_iqa_c, pad_cost, ReductionError};
