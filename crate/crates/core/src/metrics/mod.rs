//! Evaluation metrics: validity, structure matching, coverage and property
//! statistics.

mod assignment;
mod coverage;
mod emd;
mod fingerprint;
mod matcher;
mod oxidation;
mod properties;
mod validity;

pub use assignment::min_cost_assignment;
pub use coverage::{
    calibrate_thresholds, coverage, coverage_from_tables, percentile, CoverageReport, DistanceTables,
    Thresholds,
};
pub use emd::emd_1d;
pub use fingerprint::{
    element_features, euclidean, fingerprint_composition, fingerprint_structure, rdf_bin_centers,
    Fingerprints, ELEMENT_FEATURES, RDF_BINS, RDF_BIN_WIDTH, RDF_CUTOFF, RDF_SMEARING,
};
pub use matcher::{structure_match, MatchResult, MatchTolerances};
pub use oxidation::{composition_validity, CompositionValidity, MAX_COMBINATIONS};
pub use properties::{
    density, emd_property, num_elements, property_stats, CustomProperty, PropertyStats,
    AMU_PER_A3_TO_G_PER_CM3,
};
pub use validity::{min_pair_distance, structure_validity, validity, ValidityReport, MIN_PAIR_DISTANCE};
