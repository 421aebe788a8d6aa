//! Bundled example data.

use crate::io::{parse_dataset, DatasetSpec};
use crate::sim::{parse_simspec, SimSpec};
use crate::table::RepeatedMeasuresTable;

/// Ten subjects × three presentation durations (1, 2 and 5 seconds).
pub const EXPOSURE_DURATION_CSV: &str = include_str!("../data/exposure_duration.csv");

/// Generator spec for a 48 × 3 design violating homogeneity of variance.
pub const HETERO_DEMO_TOML: &str = include_str!("../data/hetero_demo.toml");

pub fn exposure_duration() -> RepeatedMeasuresTable {
    parse_dataset(EXPOSURE_DURATION_CSV, &DatasetSpec::wide("exposure_duration.csv"))
        .expect("bundled dataset is valid")
}

pub fn hetero_demo_spec() -> SimSpec {
    parse_simspec(HETERO_DEMO_TOML).expect("bundled simspec is valid")
}
