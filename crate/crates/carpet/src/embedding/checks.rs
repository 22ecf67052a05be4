//! Exact integer checks on lattice drawings.

use std::collections::{BTreeMap, HashMap};

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::graph::MetricGraph;
use crate::rational::Rational;
use crate::substitution::IdentificationLedger;

/// A drawing `f_k`: vertex positions in units of `l` and one segment per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Drawing {
    pub level: u32,
    pub l: Rational,
    pub points: Vec<[i64; 2]>,
    /// Segment endpoints as indices into `points`.
    pub segments: Vec<[usize; 2]>,
}

impl Drawing {
    pub fn from_graph(g: &MetricGraph) -> Self {
        Drawing {
            level: g.level,
            l: g.l.clone(),
            points: g.vertices().iter().map(|v| v.coord).collect(),
            segments: g.edges().iter().map(|e| [e.tail, e.head]).collect(),
        }
    }

    fn seg(&self, i: usize) -> ([i64; 2], [i64; 2]) {
        let [a, b] = self.segments[i];
        (self.points[a], self.points[b])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CrossingKind {
    /// Interiors cross, or one segment touches the other away from a shared vertex.
    Crossing,
    /// Collinear segments share more than a point.
    Overlap,
    /// Two distinct vertices occupy the same lattice point.
    VertexCollision,
    /// A segment of length zero.
    Degenerate,
    /// A segment that is not axis-parallel; the sweep does not handle it.
    NotAxisParallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Crossing {
    pub kind: CrossingKind,
    pub a: usize,
    pub b: usize,
    pub at: [i64; 2],
}

/// All pairs of segments meeting anywhere other than a shared endpoint
/// vertex. Empty exactly when the drawing is an embedding.
///
/// Perpendicular pairs are found by a left-to-right sweep holding the active
/// horizontal segments by height; collinear pairs by sorting each line.
pub fn planarity_check(d: &Drawing) -> Vec<Crossing> {
    let mut out = Vec::new();
    let mut by_point: HashMap<[i64; 2], usize> = HashMap::with_capacity(d.points.len());
    for (i, p) in d.points.iter().enumerate() {
        if let Some(&j) = by_point.get(p) {
            out.push(Crossing {
                kind: CrossingKind::VertexCollision,
                a: j,
                b: i,
                at: *p,
            });
        } else {
            by_point.insert(*p, i);
        }
    }
    let mut horizontal = Vec::new();
    let mut vertical = Vec::new();
    for i in 0..d.segments.len() {
        let (a, b) = d.seg(i);
        if a == b {
            out.push(Crossing {
                kind: CrossingKind::Degenerate,
                a: i,
                b: i,
                at: a,
            });
        } else if a[1] == b[1] {
            horizontal.push((i, a[1], a[0].min(b[0]), a[0].max(b[0])));
        } else if a[0] == b[0] {
            vertical.push((i, a[0], a[1].min(b[1]), a[1].max(b[1])));
        } else {
            out.push(Crossing {
                kind: CrossingKind::NotAxisParallel,
                a: i,
                b: i,
                at: a,
            });
        }
    }
    let shares_vertex = |i: usize, j: usize, at: [i64; 2]| {
        let [a0, a1] = d.segments[i];
        let [b0, b1] = d.segments[j];
        [a0, a1].iter().any(|&v| (v == b0 || v == b1) && d.points[v] == at)
    };

    // Perpendicular pairs. Events at equal x: insert, query, remove.
    let mut events: Vec<(i64, u8, usize)> = Vec::with_capacity(2 * horizontal.len() + vertical.len());
    for (k, h) in horizontal.iter().enumerate() {
        events.push((h.2, 0, k));
        events.push((h.3, 2, k));
    }
    for (k, v) in vertical.iter().enumerate() {
        events.push((v.1, 1, k));
    }
    events.sort_unstable();
    let mut active: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (x, kind, k) in events {
        match kind {
            0 => active.entry(horizontal[k].1).or_default().push(k),
            2 => {
                let list = active.get_mut(&horizontal[k].1).unwrap();
                list.retain(|&h| h != k);
                if list.is_empty() {
                    active.remove(&horizontal[k].1);
                }
            }
            _ => {
                let (vi, _, y0, y1) = vertical[k];
                for (&y, list) in active.range(y0..=y1) {
                    for &h in list {
                        let hi = horizontal[h].0;
                        let at = [x, y];
                        if !shares_vertex(vi, hi, at) {
                            out.push(Crossing {
                                kind: CrossingKind::Crossing,
                                a: hi.min(vi),
                                b: hi.max(vi),
                                at,
                            });
                        }
                    }
                }
            }
        }
    }

    // Collinear pairs on each line.
    for (segs, horizontal_line) in [(&mut horizontal, true), (&mut vertical, false)] {
        segs.sort_unstable_by_key(|s| (s.1, s.2, s.3, s.0));
        let mut i = 0;
        while i < segs.len() {
            let line = segs[i].1;
            let mut reach: Option<(i64, usize)> = None;
            while i < segs.len() && segs[i].1 == line {
                let (id, _, lo, hi) = segs[i];
                if let Some((r, rid)) = reach {
                    let at = if horizontal_line { [lo, line] } else { [line, lo] };
                    if lo < r {
                        out.push(Crossing {
                            kind: CrossingKind::Overlap,
                            a: rid.min(id),
                            b: rid.max(id),
                            at,
                        });
                    } else if lo == r && !shares_vertex(rid, id, at) {
                        out.push(Crossing {
                            kind: CrossingKind::Crossing,
                            a: rid.min(id),
                            b: rid.max(id),
                            at,
                        });
                    }
                }
                if reach.is_none_or(|(r, _)| hi > r) {
                    reach = Some((hi, id));
                }
                i += 1;
            }
        }
    }
    out.sort_by_key(|c| (c.a, c.b, c.at));
    out.dedup();
    out
}

fn dist_sq_to_segment(p: [i64; 2], a: [i64; 2], b: [i64; 2]) -> i128 {
    let cx = p[0].clamp(a[0].min(b[0]), a[0].max(b[0]));
    let cy = p[1].clamp(a[1].min(b[1]), a[1].max(b[1]));
    let dx = (p[0] - cx) as i128;
    let dy = (p[1] - cy) as i128;
    dx * dx + dy * dy
}

/// Corridor constants: the per-step bound in child lattice cells and the
/// cumulative bound as a fraction of the ancestor's lattice cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorridorSpec {
    pub per_step: u64,
    pub cumulative: Rational,
}

impl CorridorSpec {
    pub fn for_rule(rule: crate::substitution::Rule) -> Self {
        CorridorSpec {
            per_step: rule.corridor_constant(),
            cumulative: Rational::new(1.into(), 3.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorridorReport {
    /// Largest distance from a child segment to its parent segment, in child cells.
    pub max_deviation: f64,
    pub limit: u64,
    /// Child edges outside the corridor.
    pub violations: Vec<usize>,
}

impl CorridorReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Per-step corridor: every child segment lies within `spec.per_step`
/// child cells of its parent edge's segment.
pub fn corridor_check(
    parent: &Drawing,
    child: &Drawing,
    ledger: &IdentificationLedger,
    spec: &CorridorSpec,
) -> CorridorReport {
    let ratio = (&parent.l / &child.l).to_integer().to_i64().expect("integer lattice ratio");
    let limit = (spec.per_step as i128).pow(2);
    let mut worst = 0i128;
    let mut violations = Vec::new();
    for (ce, seg) in child.segments.iter().enumerate() {
        let (pe, _, _) = ledger.parent_of(ce);
        let [pa, pb] = parent.segments[pe];
        let a = parent.points[pa].map(|c| c * ratio);
        let b = parent.points[pb].map(|c| c * ratio);
        let d = seg
            .iter()
            .map(|&v| dist_sq_to_segment(child.points[v], a, b))
            .max()
            .unwrap();
        worst = worst.max(d);
        if d > limit {
            violations.push(ce);
        }
    }
    CorridorReport {
        max_deviation: (worst as f64).sqrt(),
        limit: spec.per_step,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulativeCorridorReport {
    /// Per (ancestor level, descendant level): largest deviation as a fraction of the ancestor cell.
    pub worst: Vec<(u32, u32, f64)>,
    /// (ancestor level, descendant level, descendant edge) outside the budget.
    pub violations: Vec<(u32, u32, usize)>,
}

impl CumulativeCorridorReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Cumulative corridor: every edge of every level stays within
/// `budget * l_j` of its ancestor edge at every earlier level `j`.
/// `ledgers[k]` maps level `k + 1` edges to level `k` edges.
pub fn cumulative_corridor(
    drawings: &[Drawing],
    ledgers: &[IdentificationLedger],
    budget: &Rational,
) -> CumulativeCorridorReport {
    let mut report = CumulativeCorridorReport {
        worst: Vec::new(),
        violations: Vec::new(),
    };
    for k in 1..drawings.len() {
        let child = &drawings[k];
        let mut ancestor: Vec<usize> = (0..child.segments.len()).collect();
        for j in (0..k).rev() {
            for a in ancestor.iter_mut() {
                *a = ledgers[j].parent_of(*a).0;
            }
            let anc = &drawings[j];
            let scale = &anc.l / &child.l;
            let scale_i = scale.to_integer().to_i128().expect("integer lattice ratio");
            // deviation <= budget * l_j  <=>  den^2 * D^2 <= num^2 * scale^2 (in child cells)
            let num = budget.numer().to_i128().unwrap();
            let den = budget.denom().to_i128().unwrap();
            let bound = num * num * scale_i * scale_i;
            let mut worst = 0i128;
            for (ce, seg) in child.segments.iter().enumerate() {
                let [pa, pb] = anc.segments[ancestor[ce]];
                let a = anc.points[pa].map(|c| (c as i128 * scale_i) as i64);
                let b = anc.points[pb].map(|c| (c as i128 * scale_i) as i64);
                let d = seg
                    .iter()
                    .map(|&v| dist_sq_to_segment(child.points[v], a, b))
                    .max()
                    .unwrap();
                worst = worst.max(d);
                if den * den * d > bound {
                    report.violations.push((j as u32, k as u32, ce));
                }
            }
            report
                .worst
                .push((j as u32, k as u32, (worst as f64).sqrt() / scale_i as f64));
        }
    }
    report
}

/// Plane distance, in units of `l_k`, helpers for statistics.
pub fn euclid(a: [i64; 2], b: [i64; 2]) -> f64 {
    let dx = (a[0] - b[0]) as f64;
    let dy = (a[1] - b[1]) as f64;
    (dx * dx + dy * dy).sqrt()
}
