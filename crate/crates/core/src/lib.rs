//! Classical and Bayesian interval estimates for condition means in
//! single-factor repeated-measures (within-subject) designs.
//!
//! Data flow: a [`RepeatedMeasuresTable`] is reduced by [`summarize`] to
//! [`SummaryStats`] (or by [`standardize`] to a [`StandardizedTable`]),
//! and the estimators in [`intervals`] map those to [`IntervalEstimate`]s.
//! [`posterior`] builds the conditional posteriors whose HDIs the closed
//! forms reproduce, and [`diagnostics`] helps choose between the
//! homoscedastic and heteroscedastic variants.
//!
//! Monte Carlo work runs through [`parallel::Exec`]. With the default
//! `parallel` feature it uses rayon; without it everything runs on the
//! calling thread. Results are identical either way.

pub mod datasets;
pub mod diagnostics;
mod error;
mod estimate;
mod gibbs;
pub mod intervals;
pub mod io;
pub mod parallel;
pub mod plot;
pub mod posterior;
pub mod report;
pub mod sim;
mod summary;
mod table;
pub mod tdist;

pub use error::{Error, Result};
pub use estimate::{Df, IntervalEstimate, Method};
pub use summary::{interaction_ss_raw_moment, random_effect_mles, standardize, summarize, StandardizedTable, SummaryStats};
pub use table::RepeatedMeasuresTable;
pub use tdist::ScaledTPosterior;
