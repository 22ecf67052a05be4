//! Lattice polylines for every (parent edge, copy) pair produced by a rule.
//!
//! Each parent vertex owns the square of half-width `ratio / 2` child cells
//! around it. Star-based rules (Basic and `C_N`) draw the half of every copy
//! path that lies in that square from a template rotated to the star's
//! orientation, so drawings of neighbouring stars only meet at edge midpoints.
//! `WS_N` and `S_N` are drawn edge by edge inside the diamond spanned by the
//! edge, which keeps distinct edges apart.

use crate::error::{CarpetError, Result};
use crate::graph::{vertex_star, Color, Dir, MetricGraph, VertexStar, VertexType};
use crate::substitution::Rule;

pub type Point = [i64; 2];

/// Child-lattice polylines indexed by parent edge and copy. Each polyline has
/// `steps + 1` points and runs from the tail copy to the head copy.
#[derive(Debug, Clone)]
pub struct EdgePaths {
    pub copies: usize,
    pub steps: usize,
    points: Vec<Point>,
}

impl EdgePaths {
    fn new(edges: usize, copies: usize, steps: usize) -> Self {
        EdgePaths {
            copies,
            steps,
            points: vec![[i64::MIN, i64::MIN]; edges * copies * (steps + 1)],
        }
    }

    fn offset(&self, edge: usize, copy: usize) -> usize {
        (edge * self.copies + copy) * (self.steps + 1)
    }

    pub fn path(&self, edge: usize, copy: usize) -> &[Point] {
        let o = self.offset(edge, copy);
        &self.points[o..o + self.steps + 1]
    }

    fn set(&mut self, edge: usize, copy: usize, index: usize, p: Point) {
        let o = self.offset(edge, copy);
        self.points[o + index] = p;
    }

    pub fn edge_count(&self) -> usize {
        self.points.len() / (self.copies * (self.steps + 1))
    }
}

fn rotate(p: (i64, i64), quarter_turns: usize) -> (i64, i64) {
    let mut q = p;
    for _ in 0..quarter_turns % 4 {
        q = (q.1, -q.0);
    }
    q
}

fn quarter_turns(from: Dir, to: Dir) -> usize {
    (to.index() + 4 - from.index()) % 4
}

fn walk(start: (i64, i64), moves: &str) -> Vec<(i64, i64)> {
    let mut out = vec![start];
    let mut cur = start;
    for c in moves.chars() {
        let d = match c {
            'N' => Dir::N,
            'E' => Dir::E,
            'S' => Dir::S,
            'W' => Dir::W,
            _ => unreachable!("template move {c}"),
        };
        let (dx, dy) = d.vector();
        cur = (cur.0 + dx, cur.1 + dy);
        out.push(cur);
    }
    out
}

/// One arm of a Basic star template in canonical orientation.
struct BasicArm {
    incoming: bool,
    dir: Dir,
    /// 0-based copy label for a blue star.
    label: usize,
    start: (i64, i64),
    moves: &'static str,
}

const fn arm(incoming: bool, dir: Dir, label: usize, start: (i64, i64), moves: &'static str) -> BasicArm {
    BasicArm {
        incoming,
        dir,
        label,
        start,
        moves,
    }
}

/// Degree-two templates enter from the west. Incoming arms run from the
/// midpoint to the vertex copy, outgoing arms from the vertex copy to the
/// midpoint. Copy 1 of a blue star sits on the parent vertex.
const BASIC_C: [BasicArm; 4] = [
    arm(true, Dir::W, 0, (-8, 0), "ENNESSENNESSEEEE"),
    arm(true, Dir::W, 1, (-8, 0), "SESSSENNESSEENNE"),
    arm(false, Dir::E, 0, (0, 0), "ENNNNEEEEEESSSES"),
    arm(false, Dir::E, 1, (-2, -2), "SSEEEEEEEEENNNNE"),
];

const BASIC_B: [BasicArm; 4] = [
    arm(true, Dir::W, 0, (-8, 0), "ENNESSENNESSEEEE"),
    arm(true, Dir::W, 1, (-8, 0), "SESSSENNESSENNEE"),
    arm(false, Dir::S, 0, (0, 0), "EEEESSSSSSSWWWSW"),
    arm(false, Dir::S, 1, (-2, -2), "ESEESWWSEESWWSES"),
];

const BASIC_A: [BasicArm; 4] = [
    arm(true, Dir::W, 0, (-8, 0), "SESSSENEEEEEENNN"),
    arm(true, Dir::W, 1, (-8, 0), "ENNNNESSSENNESEE"),
    arm(false, Dir::N, 0, (0, 0), "EEEENNNNNNNWWWWN"),
    arm(false, Dir::N, 1, (-2, 2), "NNWWNEENWWNEEENE"),
];

/// Degree-four template with in-edges from the south and west. Copy 1 sits
/// on the vertex, copy 2 at (2,-2); the quotient points are (-2,-2) on the
/// in-edges and (2,2) on the out-edges.
const BASIC_D: [BasicArm; 8] = [
    arm(true, Dir::W, 0, (-8, 0), "EEENEEENWNEESSSE"),
    arm(true, Dir::W, 1, (-8, 0), "SESEEENNESSEEEEE"),
    arm(true, Dir::S, 0, (0, -8), "NWWNNNWWNEENNEEN"),
    arm(true, Dir::S, 1, (0, -8), "ENNNNESSSENNNNWN"),
    arm(false, Dir::N, 0, (0, 0), "NNNNNNWWWWNEEENE"),
    arm(false, Dir::N, 1, (2, -2), "NNNNNWNNNEENWWWN"),
    arm(false, Dir::E, 0, (0, 0), "ENNEESEEENNESSES"),
    arm(false, Dir::E, 1, (2, -2), "ENNEEESWWSEEENNE"),
];

/// Canonical arm directions of a star: rotation from the canonical frame
/// and the actual edge playing each canonical role.
struct StarFrame {
    rotation: usize,
    /// (edge, incoming, canonical arm direction)
    arms: Vec<(usize, bool, Dir)>,
}

/// Orients a star so that in-edges come from the canonical west (and south
/// for degree four). `degree_two_in` gives the canonical in-arm per type for
/// degree-two stars, paired with the canonical out-arm.
fn star_frame(star: &VertexStar, degree_two: impl Fn(VertexType) -> (Dir, Dir)) -> Result<StarFrame> {
    let bad = |reason: &str| CarpetError::Drawing {
        vertex: star.vertex,
        reason: reason.to_string(),
    };
    match star.vtype {
        VertexType::D => {
            let ((i_s, ds), (i_w, _)) = star.d_in_pair().ok_or_else(|| bad("no adjacent in-edges"))?;
            let rotation = quarter_turns(Dir::S, ds);
            let mut arms = vec![(i_s, true, Dir::S), (i_w, true, Dir::W)];
            for &(e, d) in &star.out_edges {
                let canonical = d.rotate(4 - rotation);
                if canonical != Dir::N && canonical != Dir::E {
                    return Err(bad("out-edges not opposite the in-edges"));
                }
                arms.push((e, false, canonical));
            }
            Ok(StarFrame { rotation, arms })
        }
        t @ (VertexType::A | VertexType::B | VertexType::C) => {
            let (cin, cout) = degree_two(t);
            let (ein, din) = star.in_edges[0];
            let (eout, _) = star.out_edges[0];
            let rotation = quarter_turns(cin, din);
            Ok(StarFrame {
                rotation,
                arms: vec![(ein, true, cin), (eout, false, cout)],
            })
        }
        VertexType::Irregular => Err(bad("irregular star")),
    }
}

fn basic_degree_two(t: VertexType) -> (Dir, Dir) {
    match t {
        VertexType::C => (Dir::W, Dir::E),
        VertexType::B => (Dir::W, Dir::S),
        _ => (Dir::W, Dir::N),
    }
}

fn cn_degree_two(t: VertexType) -> (Dir, Dir) {
    match t {
        VertexType::C => (Dir::W, Dir::E),
        VertexType::B => (Dir::S, Dir::E),
        _ => (Dir::W, Dir::N),
    }
}

/// Copy label of a template label for a star of the given color. Red stars
/// swap the two labels, so the template geometry serves both colors.
fn basic_label(template_label: usize, color: Color) -> usize {
    match color {
        Color::Blue => template_label,
        Color::Red => 1 - template_label,
    }
}

/// Draws every (edge, copy) polyline for `rule` applied to `g`.
pub fn draw_paths(g: &MetricGraph, rule: Rule) -> Result<EdgePaths> {
    let k = rule.copies() as usize;
    let m = rule.subdivision() as usize;
    let ratio = rule.lattice_ratio() as i64;
    let mut paths = EdgePaths::new(g.edge_count(), k, m);
    let scaled = |v: usize| {
        let c = g.vertices()[v].coord;
        (c[0] * ratio, c[1] * ratio)
    };
    match rule {
        Rule::S(_) => {
            for e in g.edges() {
                let (a, b) = (scaled(e.tail), scaled(e.head));
                let (dx, dy) = ((b.0 - a.0) / ratio, (b.1 - a.1) / ratio);
                for i in 0..=m as i64 {
                    paths.set(e.id, 0, i as usize, [a.0 + dx * i, a.1 + dy * i]);
                }
            }
        }
        Rule::WS(n) => {
            let lateral = ws_profile(n);
            for e in g.edges() {
                let d = g.edge_direction(e.id).ok_or_else(|| CarpetError::Drawing {
                    vertex: e.tail,
                    reason: format!("edge {} is not a unit segment", e.id),
                })?;
                let (fx, fy) = d.vector();
                let (lx, ly) = d.ccw().vector();
                let a = scaled(e.tail);
                for (i, (x, y)) in lateral.iter().enumerate() {
                    paths.set(e.id, 0, i, [a.0 + fx * x + lx * y, a.1 + fy * x + ly * y]);
                }
            }
        }
        Rule::Basic => {
            for v in 0..g.vertex_count() {
                let star = vertex_star(g, v)?;
                let frame = star_frame(&star, basic_degree_two)?;
                let template: &[BasicArm] = match star.vtype {
                    VertexType::A => &BASIC_A,
                    VertexType::B => &BASIC_B,
                    VertexType::C => &BASIC_C,
                    _ => &BASIC_D,
                };
                let center = scaled(v);
                let color = g.vertices()[v].color;
                for &(edge, incoming, dir) in &frame.arms {
                    for a in template.iter().filter(|a| a.incoming == incoming && a.dir == dir) {
                        let copy = basic_label(a.label, color);
                        for (j, p) in walk(a.start, a.moves).into_iter().enumerate() {
                            let (x, y) = rotate(p, frame.rotation);
                            let idx = if incoming { m / 2 + j } else { j };
                            paths.set(edge, copy, idx, [center.0 + x, center.1 + y]);
                        }
                    }
                }
            }
        }
        Rule::C(n) => {
            let mut arm_len = vec![[0usize; 2]; g.edge_count() * k];
            for v in 0..g.vertex_count() {
                let star = vertex_star(g, v)?;
                let frame = star_frame(&star, cn_degree_two)?;
                let center = scaled(v);
                for &(edge, incoming, dir) in &frame.arms {
                    let (away, qdir, mirrored) = match (incoming, dir) {
                        (true, Dir::W) => (Dir::W, Dir::N, false),
                        (true, Dir::S) => (Dir::S, Dir::E, true),
                        (false, Dir::N) => (Dir::N, Dir::W, false),
                        (false, Dir::E) => (Dir::E, Dir::S, true),
                        _ => unreachable!("canonical C_N arms"),
                    };
                    let away = away.rotate(frame.rotation).vector();
                    let qdir = qdir.rotate(frame.rotation).vector();
                    for copy in 0..k {
                        let label = copy as u64 + 1;
                        let index = if mirrored { 2 * n + 2 - label } else { label };
                        let arm = cn_arm(n, index);
                        let len = arm.len() - 1;
                        for (t, (p, q)) in arm.into_iter().enumerate() {
                            let pt = [center.0 + p * away.0 + q * qdir.0, center.1 + p * away.1 + q * qdir.1];
                            let idx = if incoming { m - t } else { t };
                            paths.set(edge, copy, idx, pt);
                        }
                        arm_len[edge * k + copy][usize::from(incoming)] = len;
                    }
                }
            }
            for e in g.edges() {
                let d = g.edge_direction(e.id).expect("checked by the star frames");
                for copy in 0..k {
                    let [t_out, t_in] = arm_len[e.id * k + copy];
                    let start = paths.path(e.id, copy)[t_out];
                    let along = cn_middle(n, d, start, m - t_out - t_in).map_err(|reason| CarpetError::Drawing {
                        vertex: e.tail,
                        reason,
                    })?;
                    for (j, p) in along.into_iter().enumerate() {
                        let idx = t_out + j;
                        if j > 0 && idx == m - t_in && paths.path(e.id, copy)[idx] != p {
                            return Err(CarpetError::Drawing {
                                vertex: e.head,
                                reason: format!("middle of edge {} copy {} misses the in-arm", e.id, copy + 1),
                            });
                        }
                        paths.set(e.id, copy, idx, p);
                    }
                }
            }
        }
    }
    for e in 0..g.edge_count() {
        for c in 0..k {
            let path = paths.path(e, c);
            if path.iter().any(|p| p[0] == i64::MIN) {
                return Err(CarpetError::Drawing {
                    vertex: g.edges()[e].tail,
                    reason: format!("edge {e} copy {} left undrawn", c + 1),
                });
            }
            if let Some(w) = path.windows(2).position(|w| (w[0][0] - w[1][0]).abs() + (w[0][1] - w[1][1]).abs() != 1) {
                return Err(CarpetError::Drawing {
                    vertex: g.edges()[e].tail,
                    reason: format!("edge {e} copy {} has a non-unit step at {w}", c + 1),
                });
            }
        }
    }
    Ok(paths)
}

/// Lane of copy `label` in a `C_N` drawing: its offset to the left of travel.
pub fn cn_lane(n: u64, label: u64) -> i64 {
    4 * (n as i64 + 1 - label as i64)
}

/// Away distance where every `C_N` arm ends.
pub fn cn_arm_end(n: u64) -> i64 {
    28 * n as i64 - 2
}

/// Canonical `C_N` arm for template index `index` in `(away, lateral)`
/// coordinates, from the copy centre outwards.
///
/// Index 1 is the sweeper. It crosses every other strand at distance 12N
/// from the vertex and again at `p* = 28N - 4`, which realizes both wormhole
/// offsets of each pair. Other strands keep their lane and absorb their
/// extra length in small bumps between the two crossings.
pub fn cn_arm(n: u64, index: u64) -> Vec<(i64, i64)> {
    let ni = n as i64;
    let lane = cn_lane(n, index);
    let p_star = 28 * ni - 4;
    let mut out = vec![(lane, lane)];
    run_to(&mut out, 12 * ni);
    if index == 1 {
        while out.last().unwrap().1 > -4 * ni - 2 {
            step(&mut out, 0, -1);
        }
        run_to(&mut out, 12 * ni + 2);
        bumps(&mut out, 8, -1, p_star - 2);
        run_to(&mut out, p_star);
        while out.last().unwrap().1 < lane {
            step(&mut out, 0, 1);
        }
    } else {
        // Bumps start two cells after the sweeper's first crossing.
        run_to(&mut out, 12 * ni + 2);
        bumps(&mut out, 16 * ni + 20 - 8 * index as i64, 1, p_star - 2);
        run_to(&mut out, p_star);
    }
    run_to(&mut out, cn_arm_end(n));
    out
}

fn step(out: &mut Vec<(i64, i64)>, dp: i64, dq: i64) {
    let &(p, q) = out.last().unwrap();
    out.push((p + dp, q + dq));
}

fn run_to(out: &mut Vec<(i64, i64)>, target: i64) {
    while out.last().unwrap().0 < target {
        step(out, 1, 0);
    }
}

/// Appends bumps of height at most 3 on side `sign`, one per pair of
/// columns, until `lateral` extra steps are spent. Bumps must finish by
/// column `last`.
fn bumps(out: &mut Vec<(i64, i64)>, lateral: i64, sign: i64, last: i64) {
    let mut left = lateral;
    while left > 0 {
        let h = (left / 2).min(3);
        assert!(out.last().unwrap().0 < last, "bump budget exceeds the available columns");
        for _ in 0..h {
            step(out, 0, sign);
        }
        step(out, 1, 0);
        for _ in 0..h {
            step(out, 0, -sign);
        }
        step(out, 1, 0);
        left -= 2 * h;
    }
}

/// The straight middle of a `C_N` edge for one copy: `steps` unit steps from
/// `start` along `d`, spending the slack in left-side bumps of height at
/// most 3. Returns the points including `start`.
fn cn_middle(n: u64, d: Dir, start: Point, steps: usize) -> std::result::Result<Vec<Point>, String> {
    let along = 64 * n as i64 - 2 * cn_arm_end(n);
    let slack = steps as i64 - along;
    if slack < 0 || slack % 2 != 0 {
        return Err(format!("middle slack {slack} is not a nonnegative even number"));
    }
    if 6 * ((along - 1) / 2) < slack {
        return Err(format!("middle slack {slack} exceeds bump capacity"));
    }
    let (fx, fy) = d.vector();
    let (lx, ly) = d.ccw().vector();
    let mut local = vec![(0i64, 0i64)];
    run_to(&mut local, 1);
    bumps(&mut local, slack, 1, along - 1);
    run_to(&mut local, along);
    Ok(local
        .into_iter()
        .map(|(p, q)| [start[0] + p * fx + q * lx, start[1] + p * fy + q * ly])
        .collect())
}

/// Cone-limited amplitude of the `WS_N` zigzag.
pub fn ws_amplitude(n: u64) -> u64 {
    let target = 8 * n * n;
    (1..).find(|&a| ws_capacity(n, a) >= target).expect("the cone holds 16N^2 lateral steps")
}

fn ws_caps(n: u64, a: u64) -> Vec<u64> {
    let w = 8 * n as i64;
    let cone = |x: i64| (x - 1).min(w - 1 - x).min(a as i64).max(0) as u64;
    (1..w).map(|x| cone(x).min(cone(x + 1))).collect()
}

fn ws_capacity(n: u64, a: u64) -> u64 {
    ws_caps(n, a).iter().sum()
}

/// `WS_N` polyline for a parent edge along +x from the origin, as
/// `(along, left)` offsets. Columns alternate between the two sides of the
/// edge; column heights stay inside the diamond `|y| < min(x, 8N - x)` and
/// are trimmed so the path has exactly `8(N + 2N^2)` steps.
pub fn ws_profile(n: u64) -> Vec<(i64, i64)> {
    let a = ws_amplitude(n);
    let mut caps = ws_caps(n, a);
    let mut excess = caps.iter().sum::<u64>() - 8 * n * n;
    for c in caps.iter_mut() {
        if excess == 0 {
            break;
        }
        if *c == a {
            *c -= 1;
            excess -= 1;
        }
    }
    let mut out = vec![(0i64, 0i64)];
    let mut y = 0i64;
    for (i, cap) in caps.iter().enumerate() {
        let x = i as i64 + 1;
        out.push((x, y));
        let target = if x % 2 == 1 { *cap as i64 } else { -(*cap as i64) };
        while y != target {
            y += (target - y).signum();
            out.push((x, y));
        }
    }
    out.push((8 * n as i64, 0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_templates_have_sixteen_steps() {
        for t in [&BASIC_A[..], &BASIC_B, &BASIC_C, &BASIC_D] {
            for a in t {
                assert_eq!(a.moves.len(), 16);
                let pts = walk(a.start, a.moves);
                let (mid, vert) = if a.incoming { (pts[0], pts[16]) } else { (pts[16], pts[0]) };
                let v = a.dir.vector();
                assert_eq!(mid, (8 * v.0, 8 * v.1));
                assert!(vert == (0, 0) || vert == (2, -2) || vert == (-2, -2) || vert == (-2, 2));
            }
        }
    }

    #[test]
    fn ws_profile_length_and_net() {
        for n in 2..9 {
            let p = ws_profile(n);
            assert_eq!(p.len() as u64 - 1, 8 * (n + 2 * n * n));
            assert_eq!(*p.last().unwrap(), (8 * n as i64, 0));
            let mut seen = std::collections::HashSet::new();
            for w in p.windows(2) {
                assert_eq!((w[0].0 - w[1].0).abs() + (w[0].1 - w[1].1).abs(), 1);
            }
            for &(x, y) in &p {
                assert!(seen.insert((x, y)));
                if x > 0 && x < 8 * n as i64 {
                    assert!(y.abs() < x.min(8 * n as i64 - x));
                }
            }
        }
    }

    #[test]
    fn cn_arm_meeting_times() {
        for n in 1..5u64 {
            let ni = n as i64;
            let sweeper = cn_arm(n, 1);
            assert_eq!(sweeper.len() as i64 - 1, 40 * ni + 10);
            for j in 2..=2 * n + 1 {
                let strand = cn_arm(n, j);
                let ji = j as i64;
                assert_eq!(strand.len() as i64 - 1, 40 * ni + 14 - 4 * ji);
                for t in [4 * (2 * ni + ji - 1), 4 * (10 * ni + 3 - ji)] {
                    assert_eq!(strand[t as usize], sweeper[t as usize], "N={n} j={j} t={t}");
                }
            }
        }
    }
}
