//! Lattice drawings of each level and their geometric checks.

pub mod checks;
pub mod faces;
pub mod paths;
pub mod snowflake;
pub mod svg;

pub use checks::{
    corridor_check, cumulative_corridor, planarity_check, CorridorReport, CorridorSpec, Crossing, CrossingKind,
    CumulativeCorridorReport, Drawing,
};
pub use faces::{peripheral_faces, Face, FaceReport};
pub use snowflake::{snowflake_stats, BandStats};
pub use svg::to_svg;

use num_traits::ToPrimitive;

use crate::error::{CarpetError, Result};
use crate::graph::MetricGraph;
use crate::substitution::{IdentificationLedger, Rule};

/// The drawing of `child`, verified against its parent: vertices persist at
/// their scaled positions, the drawing is planar, and every child segment
/// stays in the rule's corridor around its parent segment.
pub fn draw_level(child: &MetricGraph, ledger: &IdentificationLedger, parent: &Drawing, rule: Rule) -> Result<Drawing> {
    let drawing = Drawing::from_graph(child);
    let scale = (&parent.l / &child.l)
        .to_integer()
        .to_i64()
        .ok_or_else(|| CarpetError::InvalidParameter("lattice ratio overflows".to_string()))?;
    let positions: std::collections::HashSet<[i64; 2]> = drawing.points.iter().copied().collect();
    for (v, p) in parent.points.iter().enumerate() {
        if !positions.contains(&[p[0] * scale, p[1] * scale]) {
            return Err(CarpetError::Drawing {
                vertex: v,
                reason: "parent vertex does not persist in the child drawing".to_string(),
            });
        }
    }
    if let Some(c) = planarity_check(&drawing).first() {
        return Err(CarpetError::CheckFailed(format!(
            "planarity: segments {} and {} meet at {:?}",
            c.a, c.b, c.at
        )));
    }
    let corridor = corridor_check(parent, &drawing, ledger, &CorridorSpec::for_rule(rule));
    if !corridor.passed() {
        return Err(CarpetError::CheckFailed(format!(
            "corridor: {} child edges leave the corridor, deviation {} > {}",
            corridor.violations.len(),
            corridor.max_deviation,
            corridor.limit
        )));
    }
    Ok(drawing)
}
