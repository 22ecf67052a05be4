//! Substitution rules, the identification ledger and the admissibility audit.

mod apply;
pub mod audit;
pub mod identify;
pub mod ledger;
mod rules;

pub use apply::{apply_rule, Step};
pub use audit::{
    check_admissibility, refine_point, star_quotient_check, wormhole_graphs, AdmissibilityReport, LabelPolicy,
    WormholeGraph,
};
pub use ledger::{IdentificationLedger, PointKey, PointLabel, Tag};
pub use rules::{parse_rule_seq, Rule};
