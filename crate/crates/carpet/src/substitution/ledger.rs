use serde::{Deserialize, Serialize};

use super::Rule;

/// A point of the copied, subdivided parent: `index` steps of length
/// `s_{k+1}` from the tail of parent edge `edge`, in copy `copy` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointLabel {
    pub copy: u32,
    pub edge: u32,
    pub index: u32,
}

/// Resolved form of a point key: a copy of a parent vertex or an interior
/// subdivision point of a copied parent edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKey {
    Vertex { vertex: usize, copy: usize },
    Interior { edge: usize, copy: usize, index: usize },
}

/// Which identification produced a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    /// Wormhole identification, kept in the unquotiented graph.
    I,
    /// Quotient identification inside a parent half-star.
    Q,
}

/// Record of one substitution step: copies, both identification kinds and
/// the maps down to the parent level.
///
/// Point keys number the vertex copies `(v, c)` first, then the interior
/// subdivision points `(e, c, i)` with `0 < i < M`. The unquotiented graph
/// keeps only the wormhole identifications; its vertices are `bar_vertex`
/// classes, and `quotient` maps them onto vertices of the next level.
#[derive(Debug, Clone)]
pub struct IdentificationLedger {
    pub rule: Rule,
    pub parent_level: u32,
    pub copies: usize,
    pub subdivision: usize,
    pub parent_vertices: usize,
    pub parent_edges: usize,
    pub classes_i: Vec<Vec<PointLabel>>,
    pub classes_q: Vec<Vec<PointLabel>>,
    /// Parent vertex whose star generated each quotient class.
    pub q_stars: Vec<usize>,
    /// Unquotiented vertex of each point key.
    pub bar_vertex: Vec<u32>,
    pub bar_vertex_count: usize,
    /// Next-level vertex of each unquotiented vertex.
    pub quotient: Vec<u32>,
}

impl IdentificationLedger {
    pub fn key_count(&self) -> usize {
        self.parent_vertices * self.copies + self.parent_edges * self.copies * (self.subdivision - 1)
    }

    /// Key of the point at `index` along copy `copy` (0-based) of `edge`,
    /// given the parent's endpoints.
    pub fn key(&self, edge: usize, copy: usize, index: usize, tail: usize, head: usize) -> usize {
        if index == 0 {
            tail * self.copies + copy
        } else if index == self.subdivision {
            head * self.copies + copy
        } else {
            self.parent_vertices * self.copies + (edge * self.copies + copy) * (self.subdivision - 1) + index - 1
        }
    }

    pub fn decode(&self, key: usize) -> PointKey {
        let base = self.parent_vertices * self.copies;
        if key < base {
            PointKey::Vertex {
                vertex: key / self.copies,
                copy: key % self.copies,
            }
        } else {
            let rest = key - base;
            let m1 = self.subdivision - 1;
            let run = rest / m1;
            PointKey::Interior {
                edge: run / self.copies,
                copy: run % self.copies,
                index: rest % m1 + 1,
            }
        }
    }

    pub fn label_key(&self, label: &PointLabel) -> usize {
        let base = self.parent_vertices * self.copies;
        base + (label.edge as usize * self.copies + label.copy as usize - 1) * (self.subdivision - 1) + label.index as usize
            - 1
    }

    /// Child edge id of step `index` (from `index` to `index + 1`) along a copy.
    pub fn child_edge(&self, edge: usize, copy: usize, index: usize) -> usize {
        (edge * self.copies + copy) * self.subdivision + index
    }

    /// Parent edge, 0-based copy and step index of a child edge.
    pub fn parent_of(&self, child_edge: usize) -> (usize, usize, usize) {
        let run = child_edge / self.subdivision;
        (run / self.copies, run % self.copies, child_edge % self.subdivision)
    }
}
