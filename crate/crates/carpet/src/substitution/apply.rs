use std::collections::HashMap;

use crate::embedding::checks::{corridor_check, planarity_check, CorridorSpec, Drawing};
use crate::embedding::paths::draw_paths;
use crate::error::{CarpetError, Result};
use crate::graph::{Color, Edge, MetricGraph, Vertex, VertexType};
use crate::rational::{int, HValue};

use super::identify::identifications;
use super::ledger::{IdentificationLedger, PointLabel, Tag};
use super::Rule;

/// The next level together with the ledger relating it to its parent.
#[derive(Debug, Clone)]
pub struct Step {
    pub graph: MetricGraph,
    pub ledger: IdentificationLedger,
}

struct UnionFind(Vec<u32>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n as u32).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] as usize != x {
            let up = self.0[self.0[x] as usize];
            self.0[x] = up;
            x = up as usize;
        }
        x
    }

    /// Merges and keeps the smaller root, so representatives are stable.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo as u32;
        }
    }
}

/// Numbers classes in order of their smallest key.
fn number_classes(uf: &mut UnionFind) -> (Vec<u32>, usize) {
    let n = uf.0.len();
    let mut id = vec![u32::MAX; n];
    let mut count = 0u32;
    let out = (0..n)
        .map(|k| {
            let r = uf.find(k);
            if id[r] == u32::MAX {
                id[r] = count;
                count += 1;
            }
            id[r]
        })
        .collect();
    (out, count as usize)
}

/// Applies `rule` to `g`: copies, subdivides, identifies, draws, and checks
/// the drawing for planarity and the per-step corridor before returning.
pub fn apply_rule(g: &MetricGraph, rule: Rule) -> Result<Step> {
    let rule = rule.validate()?;
    let k = rule.copies() as usize;
    let m = rule.subdivision() as usize;
    let nv = g.vertex_count();
    let ne = g.edge_count();
    let s_child = &g.s / int(m as i64);
    let l_child = &g.l / int(rule.lattice_ratio() as i64);

    let mut ledger = IdentificationLedger {
        rule,
        parent_level: g.level,
        copies: k,
        subdivision: m,
        parent_vertices: nv,
        parent_edges: ne,
        classes_i: Vec::new(),
        classes_q: Vec::new(),
        q_stars: Vec::new(),
        bar_vertex: Vec::new(),
        bar_vertex_count: 0,
        quotient: Vec::new(),
    };
    let keys = ledger.key_count();

    // Identifications, audited against the half-star bound as they are added.
    let ids = identifications(g, rule)?;
    let half_star = &g.s / int(2) - &s_child;
    let mut uf_i = UnionFind::new(keys);
    let mut uf_all = UnionFind::new(keys);
    let mut q_star_of_key: HashMap<usize, usize> = HashMap::new();
    for id in &ids {
        for p in [id.a, id.b] {
            if p.index == 0 || p.index as usize >= m || p.edge as usize >= ne || p.copy == 0 || p.copy as usize > k {
                return Err(CarpetError::Identification(format!("{p:?} is not an interior subdivision point")));
            }
        }
        let (ka, kb) = (ledger.label_key(&id.a), ledger.label_key(&id.b));
        if id.tag == Tag::Q {
            let v = &g.vertices()[id.star];
            for p in [id.a, id.b] {
                let e = &g.edges()[p.edge as usize];
                let h = g.vertices()[e.tail].h.shift(&(&s_child * int(p.index as i64)));
                if h.arc_distance(&v.h) > half_star {
                    return Err(CarpetError::Identification(format!(
                        "{p:?} lies farther than s/2 - s' from star {}",
                        id.star
                    )));
                }
            }
            q_star_of_key.insert(ka, id.star);
            q_star_of_key.insert(kb, id.star);
        } else {
            uf_i.union(ka, kb);
        }
        uf_all.union(ka, kb);
    }
    let (bar_of_key, bar_count) = number_classes(&mut uf_i);
    let (vertex_of_key, vertex_count) = number_classes(&mut uf_all);
    let mut quotient = vec![u32::MAX; bar_count];
    for key in 0..keys {
        quotient[bar_of_key[key] as usize] = vertex_of_key[key];
    }

    // Class listings for the ledger.
    let mut members_i: HashMap<u32, Vec<PointLabel>> = HashMap::new();
    let mut members_q: HashMap<u32, Vec<PointLabel>> = HashMap::new();
    for id in &ids {
        for p in [id.a, id.b] {
            let key = ledger.label_key(&p);
            let target = if id.tag == Tag::I { &mut members_i } else { &mut members_q };
            let class = if id.tag == Tag::I { bar_of_key[key] } else { vertex_of_key[key] };
            target.entry(class).or_default().push(p);
        }
    }
    let finish = |m: HashMap<u32, Vec<PointLabel>>| {
        let mut classes: Vec<Vec<PointLabel>> = m
            .into_values()
            .map(|mut v| {
                v.sort();
                v.dedup();
                v
            })
            .collect();
        classes.sort();
        classes
    };
    ledger.classes_i = finish(members_i);
    ledger.classes_q = finish(members_q);
    ledger.q_stars = ledger
        .classes_q
        .iter()
        .map(|c| q_star_of_key[&ledger.label_key(&c[0])])
        .collect();

    // Drawing: coordinates per key must agree within classes and separate classes.
    let paths = draw_paths(g, rule)?;
    let mut coord = vec![[i64::MIN, i64::MIN]; vertex_count];
    let mut h = vec![None::<HValue>; vertex_count];
    for e in g.edges() {
        for c in 0..k {
            let path = paths.path(e.id, c);
            for (i, p) in path.iter().enumerate() {
                let key = ledger.key(e.id, c, i, e.tail, e.head);
                let v = vertex_of_key[key] as usize;
                if coord[v][0] == i64::MIN {
                    coord[v] = *p;
                } else if coord[v] != *p {
                    return Err(CarpetError::Drawing {
                        vertex: e.tail,
                        reason: format!(
                            "edge {} copy {} index {i} drawn at {p:?} but its class sits at {:?}",
                            e.id,
                            c + 1,
                            coord[v]
                        ),
                    });
                }
                let hv = g.vertices()[e.tail].h.shift(&(&s_child * int(i as i64)));
                match &h[v] {
                    None => h[v] = Some(hv),
                    Some(old) if *old != hv => {
                        return Err(CarpetError::Identification(format!(
                            "class of edge {} copy {} index {i} mixes h values",
                            e.id,
                            c + 1
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let mut seen: HashMap<[i64; 2], usize> = HashMap::with_capacity(vertex_count);
    for (v, p) in coord.iter().enumerate() {
        if let Some(w) = seen.insert(*p, v) {
            return Err(CarpetError::Drawing {
                vertex: 0,
                reason: format!("vertices {w} and {v} both drawn at {p:?} without being identified"),
            });
        }
    }

    let vertices: Vec<Vertex> = coord
        .iter()
        .zip(h)
        .enumerate()
        .map(|(id, (c, hv))| Vertex {
            id,
            coord: *c,
            h: hv.expect("every class is drawn"),
            vtype: VertexType::Irregular,
            color: Color::of(*c),
        })
        .collect();
    let denom = int((k * m) as i64);
    let mut edges = Vec::with_capacity(ne * k * m);
    for e in g.edges() {
        let measure = &e.measure / &denom;
        for c in 0..k {
            for i in 0..m {
                let a = vertex_of_key[ledger.key(e.id, c, i, e.tail, e.head)] as usize;
                let b = vertex_of_key[ledger.key(e.id, c, i + 1, e.tail, e.head)] as usize;
                edges.push(Edge {
                    id: edges.len(),
                    tail: a,
                    head: b,
                    measure: measure.clone(),
                });
            }
        }
    }
    let mut provenance = g.provenance.clone();
    provenance.rule_seq.push(rule.to_string());
    provenance.parent_file_hash = None;
    let mut graph = MetricGraph::new(g.level + 1, s_child, l_child, vertices, edges, provenance)?;
    graph.recompute_types();

    ledger.bar_vertex = bar_of_key;
    ledger.bar_vertex_count = bar_count;
    ledger.quotient = quotient;

    let child_drawing = Drawing::from_graph(&graph);
    if let Some(c) = planarity_check(&child_drawing).first() {
        return Err(CarpetError::Drawing {
            vertex: 0,
            reason: format!("segments {} and {} meet at {:?} ({:?})", c.a, c.b, c.at, c.kind),
        });
    }
    let corridor = corridor_check(&Drawing::from_graph(g), &child_drawing, &ledger, &CorridorSpec::for_rule(rule));
    if !corridor.passed() {
        return Err(CarpetError::Drawing {
            vertex: g.edges()[ledger.parent_of(corridor.violations[0]).0].tail,
            reason: format!("corridor exceeded: deviation {} > {}", corridor.max_deviation, corridor.limit),
        });
    }
    Ok(Step { graph, ledger })
}
