use std::collections::VecDeque;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CarpetError, Result};
use crate::graph::{validate_graph, Csr, GraphPoint, MetricGraph, Neighbors, ValidationLimits, ViolationKind};
use crate::rational::{int, Rational};

use super::ledger::{IdentificationLedger, PointKey, PointLabel};

/// Largest π fiber diameter allowed, in units of the parent edge length.
pub const FIBER_DIAMETER_BOUND: f64 = 3.0;

/// Largest number of points a quotient class may identify.
pub const QUOTIENT_CLASS_LIMIT: usize = 2;

/// Labels of one parent edge, joined when a wormhole identification over
/// that edge connects them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WormholeGraph {
    pub parent_edge: usize,
    pub labels: usize,
    /// 1-based label pairs, deduplicated.
    pub edges: Vec<(u32, u32)>,
}

impl WormholeGraph {
    pub fn is_connected(&self) -> bool {
        if self.labels <= 1 {
            return true;
        }
        let mut seen = vec![false; self.labels + 1];
        let mut stack = vec![1u32];
        seen[1] = true;
        while let Some(a) = stack.pop() {
            for &(x, y) in &self.edges {
                let other = if x == a { y } else if y == a { x } else { continue };
                if !seen[other as usize] {
                    seen[other as usize] = true;
                    stack.push(other);
                }
            }
        }
        seen[1..].iter().all(|&s| s)
    }
}

/// One wormhole graph per parent edge, and whether all are connected.
pub fn wormhole_graphs(ledger: &IdentificationLedger) -> (Vec<WormholeGraph>, bool) {
    let mut graphs: Vec<WormholeGraph> = (0..ledger.parent_edges)
        .map(|e| WormholeGraph {
            parent_edge: e,
            labels: ledger.copies,
            edges: Vec::new(),
        })
        .collect();
    for class in &ledger.classes_i {
        for (i, a) in class.iter().enumerate() {
            for b in &class[i + 1..] {
                if a.edge == b.edge && a.copy != b.copy {
                    graphs[a.edge as usize].edges.push((a.copy.min(b.copy), a.copy.max(b.copy)));
                }
            }
        }
    }
    for g in &mut graphs {
        g.edges.sort_unstable();
        g.edges.dedup();
    }
    let connected = graphs.iter().all(WormholeGraph::is_connected);
    (graphs, connected)
}

/// Verdict on one quotient class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuotientClassVerdict {
    pub class: usize,
    pub star: usize,
    /// Largest distance from the star center, in units of the child edge.
    pub max_offset: u64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StarQuotientReport {
    /// Radius of the allowed half-star, in units of the child edge.
    pub bound: u64,
    pub classes: Vec<QuotientClassVerdict>,
}

impl StarQuotientReport {
    pub fn passed(&self) -> bool {
        self.classes.iter().all(|c| c.failure.is_none())
    }

    pub fn failures(&self) -> impl Iterator<Item = &QuotientClassVerdict> {
        self.classes.iter().filter(|c| c.failure.is_some())
    }
}

/// Checks that every quotient class of `ledger` lies in one half-star of
/// its parent vertex, within `s/2 - s'` of the center, at equal height,
/// with at most [`QUOTIENT_CLASS_LIMIT`] members and no wormhole point.
pub fn star_quotient_check(ledger: &IdentificationLedger, parent: &MetricGraph) -> StarQuotientReport {
    star_quotient_check_classes(ledger, parent, &ledger.classes_q, &ledger.q_stars)
}

/// [`star_quotient_check`] on explicit classes and their star centers.
pub fn star_quotient_check_classes(
    ledger: &IdentificationLedger,
    parent: &MetricGraph,
    classes: &[Vec<PointLabel>],
    stars: &[usize],
) -> StarQuotientReport {
    let m = ledger.subdivision as u64;
    // s/2 - s' in units of s', rounded down for odd M.
    let bound = (m / 2).saturating_sub(1);
    let in_wormhole: std::collections::HashSet<PointLabel> =
        ledger.classes_i.iter().flatten().copied().collect();
    let mut verdicts = Vec::with_capacity(classes.len());
    for (id, class) in classes.iter().enumerate() {
        let star = stars.get(id).copied().unwrap_or(usize::MAX);
        let mut failure = None;
        let mut max_offset = 0u64;
        let mut heights = Vec::new();
        if class.len() > QUOTIENT_CLASS_LIMIT {
            failure = Some(format!("{} members exceed the limit {QUOTIENT_CLASS_LIMIT}", class.len()));
        }
        for p in class {
            let Some(e) = parent.edges().get(p.edge as usize) else {
                failure = Some(format!("{p:?} names no parent edge"));
                continue;
            };
            if p.index == 0 || p.index as u64 >= m {
                failure.get_or_insert(format!("{p:?} is not an interior subdivision point"));
                continue;
            }
            let offset = if e.head == star {
                m - p.index as u64
            } else if e.tail == star {
                p.index as u64
            } else {
                failure.get_or_insert(format!("{p:?} is outside the star of vertex {star}"));
                continue;
            };
            // Height relative to the center, signed by edge direction.
            heights.push(if e.head == star { -(offset as i64) } else { offset as i64 });
            max_offset = max_offset.max(offset);
            if offset > bound {
                failure.get_or_insert(format!("{p:?} sits {offset} steps from vertex {star}, beyond {bound}"));
            }
            if in_wormhole.contains(p) {
                failure.get_or_insert(format!("{p:?} is also a wormhole point"));
            }
        }
        if heights.windows(2).any(|w| w[0] != w[1]) {
            failure.get_or_insert(format!("members have unequal heights {heights:?}"));
        }
        verdicts.push(QuotientClassVerdict {
            class: id,
            star,
            max_offset,
            failure,
        });
    }
    StarQuotientReport {
        bound,
        classes: verdicts,
    }
}

/// Outcome of one admissibility condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub number: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Measured constant, when the condition has one.
    pub measured: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub conditions: Vec<ConditionResult>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<u8> {
        self.conditions.iter().filter(|c| !c.passed).map(|c| c.number).collect()
    }

    pub fn condition(&self, number: u8) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.number == number)
    }
}

/// The unquotiented next level and the maps out of it, rebuilt from a ledger.
struct Window<'a> {
    ledger: &'a IdentificationLedger,
    parent: &'a MetricGraph,
    m: usize,
    /// Unquotiented endpoints of every child edge.
    bar_edges: Vec<(u32, u32)>,
    /// Point of the subdivided parent under each unquotiented vertex, or
    /// `None` when keys of one class disagree.
    projection: Vec<Option<u32>>,
    sub_points: usize,
}

impl<'a> Window<'a> {
    fn new(ledger: &'a IdentificationLedger, parent: &'a MetricGraph) -> Self {
        let m = ledger.subdivision;
        let k = ledger.copies;
        let mut bar_edges = Vec::with_capacity(ledger.parent_edges * k * m);
        for e in parent.edges() {
            for c in 0..k {
                for i in 0..m {
                    let a = ledger.bar_vertex[ledger.key(e.id, c, i, e.tail, e.head)];
                    let b = ledger.bar_vertex[ledger.key(e.id, c, i + 1, e.tail, e.head)];
                    bar_edges.push((a, b));
                }
            }
        }
        let mut projection: Vec<Option<u32>> = vec![None; ledger.bar_vertex_count];
        let mut seen = vec![false; ledger.bar_vertex_count];
        for key in 0..ledger.key_count() {
            let bar = ledger.bar_vertex[key] as usize;
            let p = sub_point(ledger, key) as u32;
            if !seen[bar] {
                seen[bar] = true;
                projection[bar] = Some(p);
            } else if projection[bar] != Some(p) {
                projection[bar] = None;
            }
        }
        let sub_points = ledger.parent_vertices + ledger.parent_edges * (m - 1);
        Window {
            ledger,
            parent,
            m,
            bar_edges,
            projection,
            sub_points,
        }
    }

    /// Subdivided-parent edges at a subdivided-parent point.
    fn sub_star(&self, p: usize) -> Vec<u32> {
        let nv = self.ledger.parent_vertices;
        let m = self.m;
        if p < nv {
            let mut out: Vec<u32> = self
                .parent
                .incident(p)
                .iter()
                .flat_map(|&e| {
                    let edge = &self.parent.edges()[e];
                    let mut v = Vec::new();
                    if edge.tail == p {
                        v.push((e * m) as u32);
                    }
                    if edge.head == p {
                        v.push((e * m + m - 1) as u32);
                    }
                    v
                })
                .collect();
            out.sort_unstable();
            out
        } else {
            let rest = p - nv;
            let (e, i) = (rest / (m - 1), rest % (m - 1) + 1);
            vec![(e * m + i - 1) as u32, (e * m + i) as u32]
        }
    }

    /// Subdivided-parent edge under each child edge.
    fn sub_edge(&self, child_edge: usize) -> u32 {
        let (e, _, i) = self.ledger.parent_of(child_edge);
        (e * self.m + i) as u32
    }
}

fn sub_point(ledger: &IdentificationLedger, key: usize) -> usize {
    match ledger.decode(key) {
        PointKey::Vertex { vertex, .. } => vertex,
        PointKey::Interior { edge, index, .. } => ledger.parent_vertices + edge * (ledger.subdivision - 1) + index - 1,
    }
}

fn result(number: u8, name: &'static str, failures: &[String], measured: Option<f64>) -> ConditionResult {
    ConditionResult {
        number,
        name,
        passed: failures.is_empty(),
        measured,
        detail: match failures.len() {
            0 => "ok".to_string(),
            1 => failures[0].clone(),
            n => format!("{} (and {} more)", failures[0], n - 1),
        },
    }
}

/// Audits conditions (1) to (10) of admissibility for the step from
/// `parent` to `child` recorded in `ledger`.
pub fn check_admissibility(
    parent: &MetricGraph,
    child: &MetricGraph,
    ledger: &IdentificationLedger,
) -> Result<AdmissibilityReport> {
    let k = ledger.copies;
    let m = ledger.subdivision;
    if parent.vertex_count() != ledger.parent_vertices
        || parent.edge_count() != ledger.parent_edges
        || child.edge_count() != ledger.parent_edges * k * m
    {
        return Err(CarpetError::InvalidParameter(
            "graphs do not match the ledger's sizes".to_string(),
        ));
    }
    let w = Window::new(ledger, parent);
    let nbar = ledger.bar_vertex_count;
    let s_child = &parent.s / int(m as i64);
    let mut conditions = Vec::with_capacity(10);

    // (1) Simplicial maps.
    let mut fails = Vec::new();
    if let Some(v) = w.projection.iter().position(Option::is_none) {
        fails.push(format!("projection undefined at unquotiented vertex {v}"));
    }
    for (ce, &(a, b)) in w.bar_edges.iter().enumerate() {
        if w.projection[a as usize].is_some() && w.projection[a as usize] == w.projection[b as usize] {
            fails.push(format!("child edge {ce} collapses under projection"));
        }
        let (qa, qb) = (ledger.quotient[a as usize] as usize, ledger.quotient[b as usize] as usize);
        let e = &child.edges()[ce];
        if (e.tail, e.head) != (qa, qb) {
            fails.push(format!("child edge {ce} does not match the quotient of its copy"));
        }
        if qa == qb {
            fails.push(format!("child edge {ce} collapses under the quotient"));
        }
    }
    conditions.push(result(1, "simplicial", &fails, None));

    // (2) Connectivity of every graph in the window.
    let csr = Csr::from_edges(nbar, &w.bar_edges);
    let mut fails = Vec::new();
    for (name, g) in [("parent", parent), ("child", child)] {
        if validate_graph(g, &ValidationLimits::default()).has(ViolationKind::Disconnected) {
            fails.push(format!("{name} graph is disconnected"));
        }
    }
    if nbar > 0 && bfs_component(&csr, 0) != nbar {
        fails.push("unquotiented graph is disconnected".to_string());
    }
    conditions.push(result(2, "connectivity", &fails, None));

    // (3) Bounded degree and comparable measures.
    let limits = ValidationLimits {
        total_measure: None,
        ..ValidationLimits::default()
    };
    let report = validate_graph(child, &limits);
    let mut fails: Vec<String> = report
        .violations
        .iter()
        .filter(|v| {
            matches!(
                v.kind,
                ViolationKind::DegreeBound | ViolationKind::MeasureComparability | ViolationKind::NonPositiveMeasure
            )
        })
        .map(|v| v.detail.clone())
        .collect();
    let bar_degree = (0..nbar).map(|v| csr.degree(v)).max().unwrap_or(0);
    if bar_degree > limits.max_degree {
        fails.push(format!("unquotiented degree {bar_degree}"));
    }
    let degree = (0..child.vertex_count()).map(|v| child.degree(v)).max().unwrap_or(0);
    conditions.push(result(3, "bounded geometry", &fails, Some(degree.max(bar_degree) as f64)));

    // (4) Measures push forward exactly.
    let mut fails = Vec::new();
    let mut pushed = vec![Rational::zero(); ledger.parent_edges * m];
    for (ce, e) in child.edges().iter().enumerate() {
        pushed[w.sub_edge(ce) as usize] += &e.measure;
    }
    let mm = int(m as i64);
    for (f, got) in pushed.iter().enumerate() {
        let want = &parent.edges()[f / m].measure / &mm;
        if *got != want {
            fails.push(format!("subdivided parent edge {f} receives {got} instead of {want}"));
        }
    }
    if child.total_measure() != parent.total_measure() {
        fails.push(format!(
            "total measure {} instead of {}",
            child.total_measure(),
            parent.total_measure()
        ));
    }
    conditions.push(result(4, "measure compatibility", &fails, None));

    // (5) Heights commute with both maps.
    let mut fails = Vec::new();
    for key in 0..ledger.key_count() {
        let want = match ledger.decode(key) {
            PointKey::Vertex { vertex, .. } => parent.vertices()[vertex].h.clone(),
            PointKey::Interior { edge, index, .. } => {
                let tail = parent.edges()[edge].tail;
                parent.vertices()[tail].h.shift(&(&s_child * int(index as i64)))
            }
        };
        let v = ledger.quotient[ledger.bar_vertex[key] as usize] as usize;
        if child.vertices()[v].h != want {
            fails.push(format!("child vertex {v} has height {} instead of {}", child.vertices()[v].h.value(), want.value()));
        }
    }
    if report.has(ViolationKind::HIsometry) {
        fails.push("child edges are not h-isometric".to_string());
    }
    conditions.push(result(5, "height compatibility", &fails, None));

    // (6) Fiber diameters.
    let fibers = fibers(&w);
    let cap = (FIBER_DIAMETER_BOUND as usize + 1) * m;
    let mut worst = 0usize;
    let mut fails = Vec::new();
    let mut search = FiberSearch::new(nbar);
    for (p, fiber) in fibers.iter().enumerate() {
        match search.diameter(&csr, fiber, cap) {
            Some(d) => worst = worst.max(d),
            None => {
                worst = worst.max(cap);
                fails.push(format!("fiber over subdivided point {p} spans more than {cap} steps"));
            }
        }
    }
    let measured = worst as f64 / m as f64;
    if measured > FIBER_DIAMETER_BOUND {
        fails.push(format!("fiber diameter {measured} exceeds {FIBER_DIAMETER_BOUND}"));
    }
    conditions.push(result(6, "fiber diameter", &fails, Some(measured)));

    // Unquotiented incidence with the subdivided edge under each child edge.
    let mut incidence: Vec<(u32, u32, usize)> = Vec::with_capacity(2 * w.bar_edges.len());
    for (ce, &(a, b)) in w.bar_edges.iter().enumerate() {
        let f = w.sub_edge(ce);
        incidence.push((a, f, ce));
        incidence.push((b, f, ce));
    }
    incidence.sort_unstable();

    // (7) Openness and (9) balancing, vertex by vertex.
    let mut open_fails = Vec::new();
    let mut balance_fails = Vec::new();
    let mut start = 0;
    while start < incidence.len() {
        let v = incidence[start].0;
        let mut end = start;
        while end < incidence.len() && incidence[end].0 == v {
            end += 1;
        }
        let Some(p) = w.projection[v as usize] else {
            start = end;
            continue;
        };
        let star = w.sub_star(p as usize);
        let mut covered: Vec<u32> = incidence[start..end].iter().map(|t| t.1).collect();
        covered.dedup();
        if covered != star {
            open_fails.push(format!(
                "unquotiented vertex {v} covers subdivided edges {covered:?} of star {star:?}"
            ));
        }
        let mut ratio: Option<Rational> = None;
        let mut i = start;
        while i < end {
            let f = incidence[i].1;
            let mut mass = Rational::zero();
            while i < end && incidence[i].1 == f {
                mass += &child.edges()[incidence[i].2].measure;
                i += 1;
            }
            let r = mass / (&parent.edges()[f as usize / m].measure / &mm);
            match &ratio {
                None => ratio = Some(r),
                Some(c) if *c != r => {
                    balance_fails.push(format!("unquotiented vertex {v} has star ratios {c} and {r}"));
                    break;
                }
                Some(_) => {}
            }
        }
        start = end;
    }
    if let Some(v) = (0..nbar).find(|&v| csr.degree(v) == 0) {
        open_fails.push(format!("unquotiented vertex {v} is isolated"));
    }
    conditions.push(result(7, "openness", &open_fails, None));

    // (8) Surjectivity.
    let mut fails = Vec::new();
    if let Some(p) = fibers.iter().position(Vec::is_empty) {
        fails.push(format!("subdivided point {p} has no preimage"));
    }
    let mut hit = vec![false; child.vertex_count()];
    for &q in &ledger.quotient {
        if let Some(h) = hit.get_mut(q as usize) {
            *h = true;
        }
    }
    if let Some(v) = hit.iter().position(|h| !h) {
        fails.push(format!("child vertex {v} has no preimage"));
    }
    conditions.push(result(8, "surjectivity", &fails, None));
    conditions.push(result(9, "balancing", &balance_fails, None));

    // (10) Quotient condition through the half-star criterion.
    let sq = star_quotient_check(ledger, parent);
    let fails: Vec<String> = sq
        .failures()
        .map(|c| format!("quotient class {}: {}", c.class, c.failure.as_deref().unwrap_or("")))
        .collect();
    let measured = sq.classes.iter().map(|c| c.max_offset).max().unwrap_or(0) as f64 / m as f64;
    conditions.push(result(10, "quotient", &fails, Some(measured)));

    conditions.sort_by_key(|c| c.number);
    Ok(AdmissibilityReport { conditions })
}

fn fibers(w: &Window) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); w.sub_points];
    for (v, p) in w.projection.iter().enumerate() {
        if let Some(p) = p {
            out[*p as usize].push(v as u32);
        }
    }
    out
}

fn bfs_component(csr: &Csr, start: usize) -> usize {
    let mut seen = vec![false; csr.node_count()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in csr.neighbors(v) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                count += 1;
                queue.push_back(w as usize);
            }
        }
    }
    count
}

/// Breadth-first search that stops once every target is reached.
struct FiberSearch {
    dist: Vec<u32>,
    touched: Vec<u32>,
    queue: VecDeque<u32>,
}

impl FiberSearch {
    fn new(n: usize) -> Self {
        FiberSearch {
            dist: vec![u32::MAX; n],
            touched: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    /// Largest pairwise hop distance within `fiber`, or `None` beyond `cap`.
    fn diameter(&mut self, csr: &Csr, fiber: &[u32], cap: usize) -> Option<usize> {
        let mut worst = 0;
        for (i, &src) in fiber.iter().enumerate() {
            let targets = &fiber[i + 1..];
            if targets.is_empty() {
                break;
            }
            worst = worst.max(self.farthest(csr, src, targets, cap)?);
        }
        Some(worst)
    }

    fn farthest(&mut self, csr: &Csr, src: u32, targets: &[u32], cap: usize) -> Option<usize> {
        for &v in &self.touched {
            self.dist[v as usize] = u32::MAX;
        }
        self.touched.clear();
        self.queue.clear();
        self.dist[src as usize] = 0;
        self.touched.push(src);
        self.queue.push_back(src);
        let mut remaining = targets.len();
        while let Some(v) = self.queue.pop_front() {
            let d = self.dist[v as usize];
            if targets.contains(&v) {
                remaining -= 1;
                if remaining == 0 {
                    return Some(d as usize);
                }
            }
            if d as usize >= cap {
                continue;
            }
            for &w in csr.neighbors(v as usize) {
                if self.dist[w as usize] == u32::MAX {
                    self.dist[w as usize] = d + 1;
                    self.touched.push(w);
                    self.queue.push_back(w);
                }
            }
        }
        None
    }
}

/// Which copy a refined point is taken from.
#[derive(Debug, Clone)]
pub enum LabelPolicy {
    /// Always the given 1-based label, capped at the number of copies.
    Fixed(u32),
    /// A label drawn independently for every call from a seeded stream.
    Seeded(Box<ChaCha8Rng>),
}

impl LabelPolicy {
    pub fn seeded(seed: u64) -> Self {
        LabelPolicy::Seeded(Box::new(ChaCha8Rng::seed_from_u64(seed)))
    }

    fn pick(&mut self, copies: usize) -> usize {
        match self {
            LabelPolicy::Fixed(label) => (*label as usize).clamp(1, copies) - 1,
            LabelPolicy::Seeded(rng) => rng.gen_range(0..copies),
        }
    }
}

/// Lifts a point of the parent level to the chosen copy in `child`, so that
/// projecting the lift back recovers `p`. Vertices lift to the copy drawn
/// at the parent vertex's position, since vertices persist.
pub fn refine_point(
    ledger: &IdentificationLedger,
    parent: &MetricGraph,
    child: &MetricGraph,
    p: &GraphPoint,
    policy: &mut LabelPolicy,
) -> Result<GraphPoint> {
    let copy = policy.pick(ledger.copies);
    match *p {
        GraphPoint::Vertex(v) => {
            let at = parent.vertex(v)?.coord;
            let scale = ledger.rule.lattice_ratio() as i64;
            let lift = |c: usize| ledger.quotient[ledger.bar_vertex[ledger.key(0, c, 0, v, v)] as usize] as usize;
            let persistent = (0..ledger.copies)
                .map(lift)
                .find(|&w| child.vertices()[w].coord == [at[0] * scale, at[1] * scale]);
            Ok(GraphPoint::Vertex(persistent.unwrap_or_else(|| lift(copy))))
        }
        GraphPoint::OnEdge { edge, ref offset } => {
            parent.edge(edge)?;
            let steps = offset / &child.s;
            let (index, rest) = steps.numer().div_mod_floor(steps.denom());
            let index = index
                .to_usize()
                .filter(|&i| i < ledger.subdivision)
                .ok_or_else(|| CarpetError::InvalidPoint(format!("offset {offset} beyond edge {edge}")))?;
            let remainder = Rational::new(rest, steps.denom().clone()) * &child.s;
            GraphPoint::on_edge(child, ledger.child_edge(edge, copy, index), remainder)
        }
    }
}
