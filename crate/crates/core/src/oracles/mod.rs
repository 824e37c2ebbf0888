//! Reference signals and independent solvers used for validation.

pub mod chirp;
pub mod darboux;
pub mod dense;
pub mod scatter;
pub mod soliton;

pub use chirp::{chirped_sech, ChirpedSechParams};
pub use darboux::{closed_form_multisoliton, darboux_multisoliton};
pub use dense::dense_solve;
pub use scatter::{forward_scatter, Dispersion, Scatterer};
pub use soliton::{darboux_seed_data, exact_soliton, one_soliton_approximation, soliton_train_data, SolitonParams};
