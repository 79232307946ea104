//! Graph and measure families: generators, the product-segment and
//! full-support constructions, finite-family verdicts, and the
//! generalised-expander certificate.

mod certificate;
mod constructions;
mod generate;
mod report;

pub use certificate::{
    default_test_maps, generalised_certificate, CertificateConfig, CertificateRow, GeneralisedCertificate,
    PairMeasure, RejectedMap, RhoTable, TestMap,
};
pub use constructions::{
    full_support_perturbation, perturbation_ratio_check, product_segment, product_segment_cheeger,
    segment_lower_bound, PerturbationCheck,
};
pub use generate::{generate, random_connected, random_measure, GraphKind, MeasureKind};
pub use report::{family_report, ExpanderVerdict, FamilyReport, FamilyRow, GhostlyTrend, GraphFamily, Provenance};
