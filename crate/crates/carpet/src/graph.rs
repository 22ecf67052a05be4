//! One construction level as a measured, oriented, lattice-drawn metric graph.

use std::collections::{HashMap, VecDeque};

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CarpetError, Result};
use crate::rational::{int, ratio, HValue, Rational};

/// Lattice direction, listed in clockwise order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    N,
    E,
    S,
    W,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::N, Dir::E, Dir::S, Dir::W];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Dir {
        Dir::ALL[i % 4]
    }

    pub fn vector(self) -> (i64, i64) {
        match self {
            Dir::N => (0, 1),
            Dir::E => (1, 0),
            Dir::S => (0, -1),
            Dir::W => (-1, 0),
        }
    }

    pub fn from_vector(dx: i64, dy: i64) -> Option<Dir> {
        match (dx, dy) {
            (0, 1) => Some(Dir::N),
            (1, 0) => Some(Dir::E),
            (0, -1) => Some(Dir::S),
            (-1, 0) => Some(Dir::W),
            _ => None,
        }
    }

    /// Quarter turn clockwise (a right turn for a traveller facing `self`).
    pub fn cw(self) -> Dir {
        Dir::from_index(self.index() + 1)
    }

    /// Quarter turn counter-clockwise (a left turn).
    pub fn ccw(self) -> Dir {
        Dir::from_index(self.index() + 3)
    }

    pub fn opposite(self) -> Dir {
        Dir::from_index(self.index() + 2)
    }

    /// Rotates clockwise by `quarter_turns`.
    pub fn rotate(self, quarter_turns: usize) -> Dir {
        Dir::from_index(self.index() + quarter_turns)
    }
}

/// Local configuration of a vertex star.
///
/// `C` goes straight, `A` turns left, `B` turns right, `D` has degree four
/// with adjacent in-edges. `Irregular` marks any other star and is always
/// reported by [`validate_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexType {
    A,
    B,
    C,
    D,
    Irregular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    /// Red exactly when the coordinate sum is even.
    pub fn of(coord: [i64; 2]) -> Color {
        if (coord[0] + coord[1]).rem_euclid(2) == 0 {
            Color::Red
        } else {
            Color::Blue
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: usize,
    /// Position in units of the lattice cell `l`.
    pub coord: [i64; 2],
    pub h: HValue,
    pub vtype: VertexType,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    pub measure: Rational,
}

/// Where a graph came from: the rule names applied to the seed and the hash
/// of the parent graph file, when known.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub parent_file_hash: Option<String>,
    pub rule_seq: Vec<String>,
}

/// One level `G_k`: edges of length `s`, drawn on the lattice `l * Z^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricGraph {
    pub level: u32,
    pub s: Rational,
    pub l: Rational,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<usize>>,
    pub provenance: Provenance,
}

impl MetricGraph {
    /// Assembles a graph and builds its adjacency index. Vertex ids and edge
    /// ids must equal their positions.
    pub fn new(
        level: u32,
        s: Rational,
        l: Rational,
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        provenance: Provenance,
    ) -> Result<Self> {
        if let Some(v) = vertices.iter().enumerate().find(|(i, v)| v.id != *i) {
            return Err(CarpetError::UnknownVertex(v.1.id));
        }
        let mut incidence = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            if e.id != i {
                return Err(CarpetError::UnknownEdge(e.id));
            }
            if e.tail >= vertices.len() {
                return Err(CarpetError::UnknownVertex(e.tail));
            }
            if e.head >= vertices.len() {
                return Err(CarpetError::UnknownVertex(e.head));
            }
            incidence[e.tail].push(i);
            if e.head != e.tail {
                incidence[e.head].push(i);
            }
        }
        Ok(MetricGraph {
            level,
            s,
            l,
            vertices,
            edges,
            incidence,
            provenance,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, v: usize) -> Result<&Vertex> {
        self.vertices.get(v).ok_or(CarpetError::UnknownVertex(v))
    }

    pub fn edge(&self, e: usize) -> Result<&Edge> {
        self.edges.get(e).ok_or(CarpetError::UnknownEdge(e))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edge ids incident to `v`, in insertion order.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    /// The endpoint of `e` opposite to `v`.
    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let edge = &self.edges[e];
        if edge.tail == v {
            edge.head
        } else {
            edge.tail
        }
    }

    pub fn total_measure(&self) -> Rational {
        self.edges.iter().map(|e| &e.measure).sum()
    }

    /// Mutable access for constructing negative controls in tests and examples.
    pub fn edges_mut(&mut self) -> &mut [Edge] {
        &mut self.edges
    }

    /// Mutable access for constructing negative controls in tests and examples.
    pub fn vertices_mut(&mut self) -> &mut [Vertex] {
        &mut self.vertices
    }

    /// Recomputes every vertex type and color from coordinates and orientation.
    pub fn recompute_types(&mut self) {
        let types: Vec<VertexType> = (0..self.vertices.len())
            .map(|v| classify_star(self, v))
            .collect();
        for (v, t) in self.vertices.iter_mut().zip(types) {
            v.vtype = t;
            v.color = Color::of(v.coord);
        }
    }

    /// Direction of travel along `e` in the drawing, if it is a unit segment.
    pub fn edge_direction(&self, e: usize) -> Option<Dir> {
        let edge = &self.edges[e];
        let a = self.vertices[edge.tail].coord;
        let b = self.vertices[edge.head].coord;
        Dir::from_vector(b[0] - a[0], b[1] - a[1])
    }

    /// Largest hop distance between two vertices (the path diameter on
    /// vertices, in units of `s`). Quadratic; meant for small graphs.
    pub fn vertex_diameter_hops(&self) -> Option<u32> {
        let mut best = 0;
        let mut bfs = Bfs::new(self.vertex_count());
        for v in 0..self.vertex_count() {
            bfs.run(self, &[v], u32::MAX);
            for w in 0..self.vertex_count() {
                best = best.max(bfs.hops(w)?);
            }
        }
        Some(best)
    }
}

fn classify_star(g: &MetricGraph, v: usize) -> VertexType {
    let mut ins = Vec::new();
    let mut outs = Vec::new();
    for &e in g.incident(v) {
        let Some(d) = g.edge_direction(e) else {
            return VertexType::Irregular;
        };
        let edge = &g.edges[e];
        if edge.head == v {
            ins.push(d.opposite());
        }
        if edge.tail == v {
            outs.push(d);
        }
    }
    match (ins.as_slice(), outs.as_slice()) {
        ([a], [b]) => {
            let travel = a.opposite();
            if *b == travel {
                VertexType::C
            } else if *b == travel.ccw() {
                VertexType::A
            } else if *b == travel.cw() {
                VertexType::B
            } else {
                VertexType::Irregular
            }
        }
        ([a1, a2], [b1, b2]) => {
            let distinct = a1 != a2 && b1 != b2 && ![b1, b2].contains(&a1) && ![b1, b2].contains(&a2);
            if distinct && (a1.cw() == *a2 || a2.cw() == *a1) {
                VertexType::D
            } else {
                VertexType::Irregular
            }
        }
        _ => VertexType::Irregular,
    }
}

/// The unit square `G_0`, oriented clockwise, with `h` an isometry onto the
/// circle of length 4.
pub fn build_seed() -> MetricGraph {
    let coords = [[0, 0], [1, 0], [1, 1], [0, 1]];
    let hs = [0, 3, 2, 1];
    let vertices = coords
        .iter()
        .zip(hs)
        .enumerate()
        .map(|(id, (c, h))| Vertex {
            id,
            coord: *c,
            h: HValue::new(int(h)),
            vtype: VertexType::Irregular,
            color: Color::of(*c),
        })
        .collect();
    let pairs = [(0, 3), (3, 2), (2, 1), (1, 0)];
    let edges = pairs
        .iter()
        .enumerate()
        .map(|(id, &(tail, head))| Edge {
            id,
            tail,
            head,
            measure: Rational::one(),
        })
        .collect();
    let mut g = MetricGraph::new(
        0,
        Rational::one(),
        Rational::one(),
        vertices,
        edges,
        Provenance::default(),
    )
    .expect("seed is well formed");
    g.recompute_types();
    g
}

/// Declared constants for [`validate_graph`].
#[derive(Debug, Clone)]
pub struct ValidationLimits {
    pub max_degree: usize,
    /// Largest allowed ratio between measures of edges sharing a vertex.
    pub measure_ratio: Rational,
    /// Expected total measure, when conservation should be checked.
    pub total_measure: Option<Rational>,
}

impl Default for ValidationLimits {
    fn default() -> Self {
        ValidationLimits {
            max_degree: 4,
            measure_ratio: int(4),
            total_measure: Some(int(4)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationKind {
    Disconnected,
    DegreeBound,
    HIsometry,
    MeasureComparability,
    NonPositiveMeasure,
    NonUnitSegment,
    VertexType,
    Color,
    TotalMeasure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

/// Violated invariants; empty when the graph is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, detail: String) {
        self.violations.push(Violation { kind, detail });
    }
}

/// Checks connectivity, degree bound, per-edge h-isometry, measure
/// comparability, lattice segments, star types, colors and total measure.
pub fn validate_graph(g: &MetricGraph, limits: &ValidationLimits) -> ValidationReport {
    let mut report = ValidationReport::default();
    if g.vertex_count() > 0 {
        let mut bfs = Bfs::new(g.vertex_count());
        bfs.run(g, &[0], u32::MAX);
        if let Some(v) = (0..g.vertex_count()).find(|&v| bfs.hops(v).is_none()) {
            report.push(ViolationKind::Disconnected, format!("vertex {v} unreachable from vertex 0"));
        }
    }
    for v in g.vertices() {
        let deg = g.degree(v.id);
        if deg > limits.max_degree {
            report.push(ViolationKind::DegreeBound, format!("vertex {} has degree {deg}", v.id));
        }
        let expected = classify_star(g, v.id);
        if expected == VertexType::Irregular || expected != v.vtype {
            report.push(
                ViolationKind::VertexType,
                format!("vertex {} stored {:?}, star is {:?}", v.id, v.vtype, expected),
            );
        }
        if v.color != Color::of(v.coord) {
            report.push(ViolationKind::Color, format!("vertex {} color", v.id));
        }
    }
    for e in g.edges() {
        let step = g.vertices[e.head].h.diff(&g.vertices[e.tail].h);
        if step != crate::rational::HValue::new(g.s.clone()).value().clone() {
            report.push(
                ViolationKind::HIsometry,
                format!("edge {} has h step {} instead of {}", e.id, step, g.s),
            );
        }
        if !e.measure.is_positive() {
            report.push(ViolationKind::NonPositiveMeasure, format!("edge {}", e.id));
        }
        if g.edge_direction(e.id).is_none() {
            report.push(ViolationKind::NonUnitSegment, format!("edge {}", e.id));
        }
    }
    for v in 0..g.vertex_count() {
        let inc = g.incident(v);
        let Some(min) = inc.iter().map(|&e| &g.edges[e].measure).min() else {
            continue;
        };
        let max = inc.iter().map(|&e| &g.edges[e].measure).max().unwrap();
        if min.is_positive() && max / min > limits.measure_ratio {
            report.push(
                ViolationKind::MeasureComparability,
                format!("vertex {v}: measure ratio {} exceeds {}", max / min, limits.measure_ratio),
            );
        }
    }
    if let Some(total) = &limits.total_measure {
        let got = g.total_measure();
        if &got != total {
            report.push(ViolationKind::TotalMeasure, format!("total {got} instead of {total}"));
        }
    }
    report
}

/// A point of the metric graph: a vertex or an interior point of an edge at
/// `offset` from its tail.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GraphPoint {
    Vertex(usize),
    OnEdge { edge: usize, offset: Rational },
}

impl GraphPoint {
    /// Builds a point on `edge`, collapsing offsets `0` and `s` to vertices.
    pub fn on_edge(g: &MetricGraph, edge: usize, offset: Rational) -> Result<GraphPoint> {
        let e = g.edge(edge)?;
        if offset.is_negative() || offset > g.s {
            return Err(CarpetError::InvalidPoint(format!("offset {offset} outside [0, {}]", g.s)));
        }
        Ok(if offset.is_zero() {
            GraphPoint::Vertex(e.tail)
        } else if offset == g.s {
            GraphPoint::Vertex(e.head)
        } else {
            GraphPoint::OnEdge { edge, offset }
        })
    }

    /// Vertices from which the point is reached, with the connecting length.
    pub fn anchors(&self, g: &MetricGraph) -> Result<Vec<(usize, Rational)>> {
        match self {
            GraphPoint::Vertex(v) => {
                g.vertex(*v)?;
                Ok(vec![(*v, Rational::zero())])
            }
            GraphPoint::OnEdge { edge, offset } => {
                let e = g.edge(*edge)?;
                if !offset.is_positive() || offset >= &g.s {
                    return Err(CarpetError::InvalidPoint("offset not canonical".into()));
                }
                Ok(vec![(e.tail, offset.clone()), (e.head, &g.s - offset)])
            }
        }
    }

    /// Value of the circle map at the point.
    pub fn h(&self, g: &MetricGraph) -> Result<HValue> {
        match self {
            GraphPoint::Vertex(v) => Ok(g.vertex(*v)?.h.clone()),
            GraphPoint::OnEdge { edge, offset } => Ok(g.vertices[g.edge(*edge)?.tail].h.shift(offset)),
        }
    }
}

/// Undirected adjacency, implemented by [`MetricGraph`] and [`Csr`].
pub trait Neighbors {
    fn node_count(&self) -> usize;
    fn for_each_neighbor(&self, v: usize, f: impl FnMut(usize));
}

impl Neighbors for MetricGraph {
    fn node_count(&self) -> usize {
        self.vertex_count()
    }

    fn for_each_neighbor(&self, v: usize, mut f: impl FnMut(usize)) {
        for &e in &self.incidence[v] {
            f(self.other_end(e, v));
        }
    }
}

/// Compact undirected adjacency built from an edge list.
#[derive(Debug, Clone)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Csr {
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut degree = vec![0usize; n + 1];
        for &(a, b) in edges {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[n]];
        for &(a, b) in edges {
            targets[fill[a as usize]] = b;
            fill[a as usize] += 1;
            targets[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        Csr { offsets, targets }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

impl Neighbors for Csr {
    fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    fn for_each_neighbor(&self, v: usize, mut f: impl FnMut(usize)) {
        for &w in self.neighbors(v) {
            f(w as usize);
        }
    }
}

/// Reusable breadth-first search over an undirected graph, counting hops.
pub struct Bfs {
    dist: Vec<u32>,
    touched: Vec<usize>,
    queue: VecDeque<usize>,
}

impl Bfs {
    pub fn new(n: usize) -> Self {
        Bfs {
            dist: vec![u32::MAX; n],
            touched: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    /// Runs from `sources` and stops expanding beyond `max_hops`.
    pub fn run<G: Neighbors>(&mut self, g: &G, sources: &[usize], max_hops: u32) {
        self.run_weighted(g, &sources.iter().map(|&s| (s, 0)).collect::<Vec<_>>(), max_hops)
    }

    /// Runs from sources with initial hop counts (sorted ascending or not);
    /// uses a bucket queue so unequal starts stay exact.
    pub fn run_weighted<G: Neighbors>(&mut self, g: &G, sources: &[(usize, u32)], max_hops: u32) {
        for &v in &self.touched {
            self.dist[v] = u32::MAX;
        }
        self.touched.clear();
        self.queue.clear();
        let mut starts: Vec<(usize, u32)> = sources.to_vec();
        starts.sort_by_key(|&(v, d)| (d, v));
        let mut next_start = 0;
        loop {
            let front = self.queue.front().map(|&v| self.dist[v]);
            let take_start = match (starts.get(next_start), front) {
                (Some(&(_, d)), Some(f)) => d <= f,
                (Some(_), None) => true,
                (None, _) => false,
            };
            let v = if take_start {
                let (v, d) = starts[next_start];
                next_start += 1;
                if d > max_hops || self.dist[v] <= d {
                    continue;
                }
                if self.dist[v] == u32::MAX {
                    self.touched.push(v);
                }
                self.dist[v] = d;
                v
            } else if let Some(v) = self.queue.pop_front() {
                v
            } else {
                break;
            };
            let d = self.dist[v];
            if d >= max_hops {
                continue;
            }
            let (dist, touched, queue) = (&mut self.dist, &mut self.touched, &mut self.queue);
            g.for_each_neighbor(v, |w| {
                if dist[w] == u32::MAX {
                    touched.push(w);
                    dist[w] = d + 1;
                    queue.push_back(w);
                } else if dist[w] > d + 1 {
                    dist[w] = d + 1;
                    queue.push_back(w);
                }
            });
        }
    }

    pub fn hops(&self, v: usize) -> Option<u32> {
        match self.dist[v] {
            u32::MAX => None,
            d => Some(d),
        }
    }

    /// Vertices reached by the last run.
    pub fn reached(&self) -> &[usize] {
        &self.touched
    }
}

/// Exact geodesic distance between two points of the graph.
///
/// Interior points are split into their two endpoints with the connecting
/// lengths, so no extra vertices are inserted.
pub fn shortest_path_distance(g: &MetricGraph, p: &GraphPoint, q: &GraphPoint) -> Result<Rational> {
    if p == q {
        return Ok(Rational::zero());
    }
    let pa = p.anchors(g)?;
    let qa = q.anchors(g)?;
    let mut best: Option<Rational> = None;
    if let (
        GraphPoint::OnEdge { edge: e1, offset: o1 },
        GraphPoint::OnEdge { edge: e2, offset: o2 },
    ) = (p, q)
    {
        if e1 == e2 {
            best = Some((o1 - o2).abs());
        }
    }
    let mut bfs = Bfs::new(g.vertex_count());
    for (a, oa) in &pa {
        bfs.run(g, &[*a], u32::MAX);
        for (b, ob) in &qa {
            if let Some(h) = bfs.hops(*b) {
                let d = oa + ob + &g.s * int(h as i64);
                if best.as_ref().is_none_or(|cur| &d < cur) {
                    best = Some(d);
                }
            }
        }
    }
    best.ok_or(CarpetError::Disconnected)
}

/// Exact measure of the open ball `B(p, r)`.
///
/// Measure is uniform along each edge, so every edge contributes its measure
/// times the covered fraction of its length. All bookkeeping is done in
/// integers over a common denominator.
pub fn ball_measure(g: &MetricGraph, p: &GraphPoint, r: &Rational) -> Result<Rational> {
    let mut bfs = Bfs::new(g.vertex_count());
    ball_measure_with(g, p, r, &mut bfs)
}

/// [`ball_measure`] with a caller-owned search workspace.
pub fn ball_measure_with(g: &MetricGraph, p: &GraphPoint, r: &Rational, bfs: &mut Bfs) -> Result<Rational> {
    if !r.is_positive() {
        return Err(CarpetError::InvalidParameter("radius must be positive".into()));
    }
    let anchors = p.anchors(g)?;
    // Work in units of s: radius and anchor offsets over a common denominator.
    let radius = r / &g.s;
    let offsets: Vec<Rational> = anchors.iter().map(|(_, o)| o / &g.s).collect();
    let mut den = radius.denom().clone();
    for o in &offsets {
        den = num_integer::Integer::lcm(&den, o.denom());
    }
    let to_i128 = |x: &Rational| -> Result<i128> {
        (x * Rational::from_integer(den.clone()))
            .to_integer()
            .to_i128()
            .ok_or_else(|| CarpetError::InvalidParameter("radius or offset too fine for ball bookkeeping".into()))
    };
    let d = den.to_i128().ok_or_else(|| CarpetError::InvalidParameter("denominator overflow".into()))?;
    let rad = to_i128(&radius)?;
    let offs: Vec<i128> = offsets.iter().map(to_i128).collect::<Result<_>>()?;

    // Per-anchor hop searches, truncated just beyond the radius.
    let max_hops = u32::try_from(rad / d + 2).unwrap_or(u32::MAX);
    let mut dist: HashMap<usize, i128> = HashMap::new();
    for ((a, _), off) in anchors.iter().zip(&offs) {
        bfs.run(g, &[*a], max_hops);
        for &v in bfs.reached() {
            let dv = off + d * bfs.hops(v).unwrap() as i128;
            dist.entry(v).and_modify(|x| *x = (*x).min(dv)).or_insert(dv);
        }
    }

    let mut edges: Vec<usize> = Vec::new();
    for &v in dist.keys() {
        edges.extend_from_slice(g.incident(v));
    }
    if let GraphPoint::OnEdge { edge, .. } = p {
        edges.push(*edge);
    }
    edges.sort_unstable();
    edges.dedup();

    let mut by_measure: HashMap<&Rational, i128> = HashMap::new();
    for e in edges {
        let edge = &g.edges[e];
        let mut intervals: Vec<(i128, i128)> = Vec::with_capacity(3);
        if let Some(du) = dist.get(&edge.tail) {
            if rad > *du {
                intervals.push((0, (rad - du).min(d)));
            }
        }
        if let Some(dw) = dist.get(&edge.head) {
            if rad > *dw {
                intervals.push(((d - (rad - dw)).max(0), d));
            }
        }
        if let GraphPoint::OnEdge { edge: pe, .. } = p {
            if *pe == e {
                let o = offs[0];
                intervals.push(((o - rad).max(0), (o + rad).min(d)));
            }
        }
        let covered = union_length(&mut intervals);
        if covered > 0 {
            *by_measure.entry(&edge.measure).or_insert(0) += covered;
        }
    }
    let mut total = Rational::zero();
    for (m, covered) in by_measure {
        total += m * Rational::new(covered.into(), den.clone());
    }
    Ok(total)
}

fn union_length(intervals: &mut [(i128, i128)]) -> i128 {
    intervals.sort_unstable();
    let mut total = 0;
    let mut current: Option<(i128, i128)> = None;
    for &(a, b) in intervals.iter() {
        if b <= a {
            continue;
        }
        match current {
            Some((ca, cb)) if a <= cb => current = Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                total += cb - ca;
                current = Some((a, b));
            }
            None => current = Some((a, b)),
        }
    }
    if let Some((a, b)) = current {
        total += b - a;
    }
    total
}

/// Splits every edge into `n` edges of length `s / n` carrying `measure / n`,
/// drawn as the straight refinement on the lattice `l / n`.
pub fn subdivide(g: &MetricGraph, n: u64) -> Result<MetricGraph> {
    if n < 2 {
        return Err(CarpetError::InvalidParameter(format!("subdivision factor {n} must be at least 2")));
    }
    let k = n as i64;
    let s = &g.s / int(k);
    let mut vertices: Vec<Vertex> = g
        .vertices()
        .iter()
        .map(|v| Vertex {
            coord: [v.coord[0] * k, v.coord[1] * k],
            ..v.clone()
        })
        .collect();
    let mut edges = Vec::with_capacity(g.edge_count() * n as usize);
    for e in g.edges() {
        let a = g.vertices[e.tail].coord;
        let b = g.vertices[e.head].coord;
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let measure = &e.measure / int(k);
        let mut prev = e.tail;
        for i in 1..=k {
            let next = if i == k {
                e.head
            } else {
                let id = vertices.len();
                vertices.push(Vertex {
                    id,
                    coord: [a[0] * k + dx * i, a[1] * k + dy * i],
                    h: g.vertices[e.tail].h.shift(&(&s * int(i))),
                    vtype: VertexType::C,
                    color: Color::Red,
                });
                id
            };
            edges.push(Edge {
                id: edges.len(),
                tail: prev,
                head: next,
                measure: measure.clone(),
            });
            prev = next;
        }
    }
    let mut provenance = g.provenance.clone();
    provenance.rule_seq.push(format!("S{n}"));
    let mut out = MetricGraph::new(g.level + 1, s, &g.l / int(k), vertices, edges, provenance)?;
    out.recompute_types();
    Ok(out)
}

/// The closed star of a vertex with each edge classified as incoming or
/// outgoing, together with the direction from the vertex along the edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexStar {
    pub vertex: usize,
    pub vtype: VertexType,
    pub in_edges: Vec<(usize, Dir)>,
    pub out_edges: Vec<(usize, Dir)>,
}

impl VertexStar {
    /// For a type-D star, the in-edges `(i_s, i_w)` with `i_w` clockwise
    /// after `i_s`.
    pub fn d_in_pair(&self) -> Option<((usize, Dir), (usize, Dir))> {
        if self.vtype != VertexType::D {
            return None;
        }
        let (a, b) = (self.in_edges[0], self.in_edges[1]);
        if a.1.cw() == b.1 {
            Some((a, b))
        } else {
            Some((b, a))
        }
    }
}

pub fn vertex_star(g: &MetricGraph, v: usize) -> Result<VertexStar> {
    let vertex = g.vertex(v)?;
    if g.degree(v) == 0 {
        return Err(CarpetError::InvalidPoint(format!("vertex {v} is isolated")));
    }
    let mut in_edges = Vec::new();
    let mut out_edges = Vec::new();
    for &e in g.incident(v) {
        let edge = &g.edges[e];
        let d = g
            .edge_direction(e)
            .ok_or_else(|| CarpetError::InvalidPoint(format!("edge {e} is not a unit lattice segment")))?;
        if edge.head == v {
            in_edges.push((e, d.opposite()));
        }
        if edge.tail == v {
            out_edges.push((e, d));
        }
    }
    Ok(VertexStar {
        vertex: v,
        vtype: vertex.vtype,
        in_edges,
        out_edges,
    })
}

/// Convenience: midpoint of an edge as a graph point.
pub fn midpoint(g: &MetricGraph, edge: usize) -> Result<GraphPoint> {
    GraphPoint::on_edge(g, edge, &g.s * ratio(1, 2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_shape() {
        let g = build_seed();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.total_measure(), int(4));
        assert_eq!(g.vertex_diameter_hops(), Some(2));
        assert!(g.vertices().iter().all(|v| v.vtype == VertexType::B));
        assert!(validate_graph(&g, &ValidationLimits::default()).is_valid());
    }

    #[test]
    fn seed_is_clockwise() {
        let g = build_seed();
        let dirs: Vec<Dir> = (0..4).map(|e| g.edge_direction(e).unwrap()).collect();
        assert_eq!(dirs, vec![Dir::N, Dir::E, Dir::S, Dir::W]);
        for e in g.edges() {
            let step = g.vertices()[e.head].h.diff(&g.vertices()[e.tail].h);
            assert_eq!(step, int(1));
        }
    }

    #[test]
    fn corrupted_h_is_reported_on_that_edge() {
        let mut g = build_seed();
        let shifted = g.vertices()[3].h.shift(&ratio(1, 2));
        g.vertices_mut()[3].h = shifted;
        let report = validate_graph(&g, &ValidationLimits::default());
        let bad: Vec<&Violation> = report.violations.iter().filter(|v| v.kind == ViolationKind::HIsometry).collect();
        assert_eq!(bad.len(), 2);
        assert!(bad[0].detail.contains("edge 0"));
        assert!(bad[1].detail.contains("edge 1"));
    }

    #[test]
    fn distances_on_seed() {
        let g = build_seed();
        let d = shortest_path_distance(&g, &GraphPoint::Vertex(0), &GraphPoint::Vertex(2)).unwrap();
        assert_eq!(d, int(2));
        let m0 = midpoint(&g, 0).unwrap();
        let m1 = midpoint(&g, 1).unwrap();
        assert_eq!(shortest_path_distance(&g, &m0, &m1).unwrap(), int(1));
        assert_eq!(shortest_path_distance(&g, &m0, &m0).unwrap(), int(0));
        let q = GraphPoint::on_edge(&g, 0, ratio(3, 4)).unwrap();
        assert_eq!(shortest_path_distance(&g, &m0, &q).unwrap(), ratio(1, 4));
    }

    #[test]
    fn canonical_points() {
        let g = build_seed();
        assert_eq!(GraphPoint::on_edge(&g, 0, int(0)).unwrap(), GraphPoint::Vertex(0));
        assert_eq!(GraphPoint::on_edge(&g, 0, int(1)).unwrap(), GraphPoint::Vertex(3));
        assert!(GraphPoint::on_edge(&g, 0, int(2)).is_err());
    }

    #[test]
    fn balls_on_seed() {
        let g = build_seed();
        let v = GraphPoint::Vertex(1);
        assert_eq!(ball_measure(&g, &v, &ratio(1, 2)).unwrap(), int(1));
        assert_eq!(ball_measure(&g, &v, &int(2)).unwrap(), int(4));
        assert_eq!(ball_measure(&g, &v, &int(7)).unwrap(), int(4));
        let m = midpoint(&g, 2).unwrap();
        assert_eq!(ball_measure(&g, &m, &ratio(1, 2)).unwrap(), int(1));
        assert_eq!(ball_measure(&g, &m, &ratio(3, 4)).unwrap(), ratio(3, 2));
        assert_eq!(ball_measure(&g, &m, &int(2)).unwrap(), int(4));
    }

    #[test]
    fn subdivision_conserves_measure() {
        let g = build_seed();
        let g2 = subdivide(&g, 2).unwrap();
        assert_eq!(g2.edge_count(), 8);
        assert!(g2.edges().iter().all(|e| e.measure == ratio(1, 2)));
        assert_eq!(g2.s, ratio(1, 2));
        assert_eq!(g2.total_measure(), int(4));
        assert!(subdivide(&g, 1).is_err());
        let g32 = subdivide(&g, 32).unwrap();
        assert_eq!(g32.edge_count(), 128);
        let mut hs: Vec<Rational> = g32.vertices().iter().map(|v| v.h.value().clone()).collect();
        hs.sort();
        assert_eq!(hs.len(), 128);
        for (i, h) in hs.iter().enumerate() {
            assert_eq!(h, &ratio(i as i64, 32));
        }
        assert!(validate_graph(&g32, &ValidationLimits::default()).is_valid());
    }

    #[test]
    fn seed_stars() {
        let g = build_seed();
        for v in 0..4 {
            let star = vertex_star(&g, v).unwrap();
            assert_eq!(star.in_edges.len(), 1);
            assert_eq!(star.out_edges.len(), 1);
            assert_eq!(star.vtype, VertexType::B);
        }
        assert!(vertex_star(&g, 9).is_err());
    }

    #[test]
    fn truncated_bfs_with_offsets() {
        let g = subdivide(&build_seed(), 4).unwrap();
        let mut bfs = Bfs::new(g.vertex_count());
        bfs.run_weighted(&g, &[(0, 3), (1, 0)], 2);
        assert_eq!(bfs.hops(1), Some(0));
        assert!(bfs.reached().iter().all(|&v| bfs.hops(v).unwrap() <= 2));
    }
}
