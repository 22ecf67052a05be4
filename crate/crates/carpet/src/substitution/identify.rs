//! The identification sets each rule prescribes, in combinatorial form.

use crate::error::{CarpetError, Result};
use crate::graph::{vertex_star, Color, Dir, MetricGraph, VertexType};

use super::ledger::{PointLabel, Tag};
use super::Rule;

/// One identified pair of points, with the parent vertex whose star
/// prescribes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Identification {
    pub tag: Tag,
    pub a: PointLabel,
    pub b: PointLabel,
    pub star: usize,
}

/// Canonical role of an edge inside a star: incoming from the canonical
/// west or south, outgoing to the canonical north or east.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    InW,
    InS,
    OutN,
    OutE,
}

/// Canonical roles of the edges of the star at `v` for star-based rules.
///
/// Degree-four stars put `i_s` south and `i_w` west (clockwise after `i_s`).
/// Degree-two stars are rotated so their arms are canonical: for `C_N`,
/// straight stars use `(i_w, o_e)`, right turns `(i_s, o_e)` and left turns
/// `(i_w, o_n)`.
pub fn star_arms(g: &MetricGraph, v: usize) -> Result<Vec<(usize, Arm)>> {
    let star = vertex_star(g, v)?;
    let bad = |reason: &str| CarpetError::Drawing {
        vertex: v,
        reason: reason.to_string(),
    };
    match star.vtype {
        VertexType::D => {
            let ((i_s, _), (i_w, dw)) = star.d_in_pair().ok_or_else(|| bad("no adjacent in-edges"))?;
            let mut arms = vec![(i_w, Arm::InW), (i_s, Arm::InS)];
            for &(e, d) in &star.out_edges {
                if d == dw.cw() {
                    arms.push((e, Arm::OutN));
                } else if d == dw.cw().cw() {
                    arms.push((e, Arm::OutE));
                } else {
                    return Err(bad("out-edges not opposite the in-edges"));
                }
            }
            Ok(arms)
        }
        VertexType::A => Ok(vec![(star.in_edges[0].0, Arm::InW), (star.out_edges[0].0, Arm::OutN)]),
        VertexType::B => Ok(vec![(star.in_edges[0].0, Arm::InS), (star.out_edges[0].0, Arm::OutE)]),
        VertexType::C => Ok(vec![(star.in_edges[0].0, Arm::InW), (star.out_edges[0].0, Arm::OutE)]),
        VertexType::Irregular => Err(bad("irregular star")),
    }
}

/// All identifications prescribed by `rule` on the copies of `g`.
pub fn identifications(g: &MetricGraph, rule: Rule) -> Result<Vec<Identification>> {
    let m = rule.subdivision() as u32;
    let mut out = Vec::new();
    let label = |copy: u64, edge: usize, index: u32| PointLabel {
        copy: copy as u32,
        edge: edge as u32,
        index,
    };
    match rule {
        Rule::S(_) | Rule::WS(_) => {}
        Rule::Basic => {
            for e in g.edges() {
                out.push(Identification {
                    tag: Tag::I,
                    a: label(1, e.id, m / 2),
                    b: label(2, e.id, m / 2),
                    star: e.tail,
                });
            }
            for v in g.vertices() {
                if v.vtype != VertexType::D {
                    continue;
                }
                let arms = star_arms(g, v.id)?;
                let find = |arm: Arm| arms.iter().find(|(_, a)| *a == arm).unwrap().0;
                // Blue stars pair copy 2 on i_w / o_n with copy 1 on i_s / o_e;
                // red stars swap the labels.
                let (hi, lo) = match v.color {
                    Color::Blue => (2, 1),
                    Color::Red => (1, 2),
                };
                out.push(Identification {
                    tag: Tag::Q,
                    a: label(hi, find(Arm::InW), m - 4),
                    b: label(lo, find(Arm::InS), m - 4),
                    star: v.id,
                });
                out.push(Identification {
                    tag: Tag::Q,
                    a: label(hi, find(Arm::OutN), 4),
                    b: label(lo, find(Arm::OutE), 4),
                    star: v.id,
                });
            }
        }
        Rule::C(n) => {
            let top = 2 * n + 1;
            for v in g.vertices() {
                let arms = star_arms(g, v.id)?;
                let at = |incoming: bool, t: u64| if incoming { m - t as u32 } else { t as u32 };
                for &(edge, arm) in &arms {
                    let incoming = matches!(arm, Arm::InW | Arm::InS);
                    match arm {
                        Arm::InW | Arm::OutN => {
                            for j in 2..=top {
                                for t in [4 * (2 * n + j - 1), 4 * (10 * n + 3 - j)] {
                                    out.push(Identification {
                                        tag: Tag::I,
                                        a: label(1, edge, at(incoming, t)),
                                        b: label(j, edge, at(incoming, t)),
                                        star: v.id,
                                    });
                                }
                            }
                        }
                        Arm::InS | Arm::OutE => {
                            for j in 1..top {
                                for t in [4 * (4 * n + 1 - j), 4 * (8 * n + 1 + j)] {
                                    out.push(Identification {
                                        tag: Tag::I,
                                        a: label(top, edge, at(incoming, t)),
                                        b: label(j, edge, at(incoming, t)),
                                        star: v.id,
                                    });
                                }
                            }
                        }
                    }
                }
                if v.vtype == VertexType::D {
                    let find = |arm: Arm| arms.iter().find(|(_, a)| *a == arm).unwrap().0;
                    for i in 1..=top {
                        for j in 1..i {
                            let t = 4 * (i - j);
                            out.push(Identification {
                                tag: Tag::Q,
                                a: label(i, find(Arm::InW), m - t as u32),
                                b: label(j, find(Arm::InS), m - t as u32),
                                star: v.id,
                            });
                            out.push(Identification {
                                tag: Tag::Q,
                                a: label(i, find(Arm::OutN), t as u32),
                                b: label(j, find(Arm::OutE), t as u32),
                                star: v.id,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Direction helper shared with the drawing code.
pub fn arm_canonical_dir(arm: Arm) -> Dir {
    match arm {
        Arm::InW => Dir::W,
        Arm::InS => Dir::S,
        Arm::OutN => Dir::N,
        Arm::OutE => Dir::E,
    }
}
