use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use num_traits::ToPrimitive;

use super::modulus::CurveFamily;
use crate::error::{CarpetError, Result};
use crate::graph::{Bfs, MetricGraph};
use crate::rational::Rational;

/// Up to `cap` simple paths from the ball `B(x, eps d)` to `B(y, eps d)`
/// with length at most `c (1 + eps) d`, where `d = d(x, y)`, shortest
/// first with ties broken by edge ids. Paths end at the first target ball
/// vertex they reach. Found by Yen's k-shortest paths with Lawler's rule on
/// the vertices that can lie on such a path.
pub fn curve_family_between(
    g: &MetricGraph,
    x: usize,
    y: usize,
    eps: &Rational,
    c: &Rational,
    cap: usize,
) -> Result<CurveFamily> {
    if x == y || cap == 0 {
        return Err(CarpetError::InvalidParameter("need distinct endpoints and a positive cap".to_string()));
    }
    g.vertex(x)?;
    g.vertex(y)?;
    let mut bfs = Bfs::new(g.vertex_count());
    bfs.run(g, &[x], u32::MAX);
    let dx: HashMap<usize, u32> = bfs.reached().iter().map(|&v| (v, bfs.hops(v).unwrap())).collect();
    let d = *dx.get(&y).ok_or(CarpetError::Disconnected)?;
    let one = Rational::from_integer(1.into());
    let bound = Rational::from_integer(d.into()) * c * (&one + eps);
    let max_len = bound.floor().to_u32().unwrap_or(u32::MAX);
    // Ball membership is strict: hop distance below eps * d.
    let ball_hops = |h: u32| Rational::from_integer(h.into()) < Rational::from_integer(d.into()) * eps;
    bfs.run(g, &[y], u32::MAX);
    let dy: HashMap<usize, u32> = bfs.reached().iter().map(|&v| (v, bfs.hops(v).unwrap())).collect();
    let sources: BTreeSet<usize> = dx.iter().filter(|(_, &h)| ball_hops(h)).map(|(&v, _)| v).collect();
    let targets: BTreeSet<usize> = dy.iter().filter(|(_, &h)| ball_hops(h)).map(|(&v, _)| v).collect();
    // A vertex can lie on a qualifying path only if it is close enough to both balls.
    let to_sources = multi_hops(g, &sources);
    let to_targets = multi_hops(g, &targets);
    let usable: Vec<bool> = (0..g.vertex_count())
        .map(|v| match (to_sources[v], to_targets[v]) {
            (Some(a), Some(b)) => a + b <= max_len,
            _ => false,
        })
        .collect();
    let search = Search {
        g,
        usable: &usable,
        to_targets: &to_targets,
        targets: &targets,
        max_len,
    };
    let all_sources: Vec<usize> = sources.iter().copied().filter(|&v| usable[v]).collect();
    let mut scratch = Scratch::new(g.vertex_count());
    // Yen's algorithm over a virtual root joined to every source: spur
    // position 0 is the root, position `i + 1` is vertex `i` of the path.
    // Lawler's rule spurs a path only at or after the position where it
    // left its parent.
    let mut found: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut candidates: BTreeSet<(usize, Vec<usize>, Vec<usize>, usize)> = BTreeSet::new();
    if let Some((vs, es)) = search.shortest(&mut scratch, &all_sources, &[], &[], 0) {
        seen.insert(es.clone());
        candidates.insert((es.len(), es, vs, 0));
    }
    while found.len() < cap {
        let Some((_, edges, vertices, deviation)) = candidates.pop_first() else { break };
        for j in deviation..=edges.len() {
            let spur = if j == 0 {
                let used: HashSet<usize> = found.iter().map(|(v, _)| v[0]).chain([vertices[0]]).collect();
                let starts: Vec<usize> = all_sources.iter().copied().filter(|v| !used.contains(v)).collect();
                search.shortest(&mut scratch, &starts, &[], &[], 0)
            } else {
                let i = j - 1;
                if i == edges.len() {
                    break;
                }
                let (root_v, root_e) = (&vertices[..=i], &edges[..i]);
                let banned_edges: Vec<usize> = found
                    .iter()
                    .map(|(v, e)| (v, e))
                    .chain([(&vertices, &edges)])
                    .filter(|(v, e)| v.len() > i + 1 && v[..=i] == *root_v && e[..i] == *root_e)
                    .map(|(_, e)| e[i])
                    .collect();
                search
                    .shortest(&mut scratch, &[root_v[i]], &root_v[..i], &banned_edges, i as u32)
                    .map(|(sv, se)| ([&root_v[..i], &sv[..]].concat(), [root_e, &se[..]].concat()))
            };
            if let Some((pv, pe)) = spur {
                if pe.len() as u32 <= max_len && seen.insert(pe.clone()) {
                    candidates.insert((pe.len(), pe, pv, j));
                }
            }
        }
        found.push((vertices, edges));
    }
    Ok(CurveFamily {
        curves: found.into_iter().map(|(_, e)| e).collect(),
    })
}

fn multi_hops(g: &MetricGraph, from: &BTreeSet<usize>) -> Vec<Option<u32>> {
    let mut bfs = Bfs::new(g.vertex_count());
    let starts: Vec<usize> = from.iter().copied().collect();
    bfs.run(g, &starts, u32::MAX);
    (0..g.vertex_count()).map(|v| bfs.hops(v)).collect()
}

/// Per-search marks, reset in O(1) by bumping the stamp.
struct Scratch {
    stamp: u32,
    seen: Vec<u32>,
    banned: Vec<u32>,
    prev: Vec<(usize, usize)>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            stamp: 0,
            seen: vec![0; n],
            banned: vec![0; n],
            prev: vec![(usize::MAX, usize::MAX); n],
        }
    }
}

struct Search<'a> {
    g: &'a MetricGraph,
    usable: &'a [bool],
    to_targets: &'a [Option<u32>],
    targets: &'a BTreeSet<usize>,
    max_len: u32,
}

impl Search<'_> {
    /// Shortest path from any of `starts`, with `used` hops already spent,
    /// to any target within the length bound, avoiding the banned vertices
    /// and edges; the smallest edge ids win ties. Returns vertices and edges.
    fn shortest(
        &self,
        sc: &mut Scratch,
        starts: &[usize],
        banned_vertices: &[usize],
        banned_edges: &[usize],
        used: u32,
    ) -> Option<(Vec<usize>, Vec<usize>)> {
        sc.stamp += 1;
        let stamp = sc.stamp;
        for &v in banned_vertices {
            sc.banned[v] = stamp;
        }
        let mut queue = VecDeque::new();
        for &s in starts {
            if self.usable[s] && sc.seen[s] != stamp {
                sc.seen[s] = stamp;
                sc.prev[s] = (usize::MAX, usize::MAX);
                queue.push_back((s, 0u32));
            }
        }
        let mut inc = Vec::new();
        while let Some((v, d)) = queue.pop_front() {
            if d > 0 && self.targets.contains(&v) {
                let (mut vs, mut es) = (vec![v], Vec::new());
                let mut at = v;
                while sc.prev[at].0 != usize::MAX {
                    let (p, e) = sc.prev[at];
                    vs.push(p);
                    es.push(e);
                    at = p;
                }
                vs.reverse();
                es.reverse();
                return Some((vs, es));
            }
            inc.clear();
            inc.extend_from_slice(self.g.incident(v));
            inc.sort_unstable();
            for &e in &inc {
                let w = self.g.other_end(e, v);
                if !self.usable[w] || sc.seen[w] == stamp || sc.banned[w] == stamp || banned_edges.contains(&e) {
                    continue;
                }
                // Skip vertices from which no target is reachable in time.
                match self.to_targets[w] {
                    Some(rest) if used + d + 1 + rest <= self.max_len => {}
                    _ => continue,
                }
                sc.seen[w] = stamp;
                sc.prev[w] = (v, e);
                queue.push_back((w, d + 1));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_seed;
    use crate::rational::{int, ratio};

    #[test]
    fn opposite_seed_corners_give_both_arcs() {
        let g = build_seed();
        let fam = curve_family_between(&g, 0, 2, &ratio(1, 4), &int(1), 64).unwrap();
        assert_eq!(fam.curves.len(), 2);
        assert!(fam.curves.iter().all(|c| c.len() == 2));
        fam.validate(&g).unwrap();
    }

    #[test]
    fn adjacent_vertices_give_the_direct_edge() {
        let g = build_seed();
        let fam = curve_family_between(&g, 0, 3, &ratio(1, 100), &int(1), 64).unwrap();
        assert_eq!(fam.curves, [vec![0]]);
    }

    #[test]
    fn cap_one_gives_one_shortest_path() {
        let g = build_seed();
        let fam = curve_family_between(&g, 0, 2, &ratio(1, 4), &int(1), 1).unwrap();
        assert_eq!(fam.curves.len(), 1);
        assert_eq!(fam.curves[0].len(), 2);
    }

    #[test]
    fn longer_bound_admits_the_long_way_round() {
        let g = build_seed();
        // C (1 + eps) d = 3 (5/4) 1 >= 3 admits the three-edge arc between neighbours.
        let fam = curve_family_between(&g, 0, 3, &ratio(1, 4), &int(3), 64).unwrap();
        assert_eq!(fam.curves.len(), 2);
        assert_eq!(fam.curves[1].len(), 3);
    }

    /// Every simple path from a source-ball vertex that stops at its first
    /// target-ball vertex, within `max_len` edges.
    fn brute_force(g: &MetricGraph, x: usize, y: usize, eps: &Rational, c: &Rational) -> BTreeSet<Vec<usize>> {
        let mut bfs = Bfs::new(g.vertex_count());
        bfs.run(g, &[x], u32::MAX);
        let dx: Vec<Option<u32>> = (0..g.vertex_count()).map(|v| bfs.hops(v)).collect();
        let d = dx[y].unwrap();
        bfs.run(g, &[y], u32::MAX);
        let dy: Vec<Option<u32>> = (0..g.vertex_count()).map(|v| bfs.hops(v)).collect();
        let d_r = Rational::from_integer(d.into());
        let inside = |h: Option<u32>| h.is_some_and(|h| Rational::from_integer(h.into()) < &d_r * eps);
        let max_len = (&d_r * c * (Rational::from_integer(1.into()) + eps)).floor().to_usize().unwrap();
        let mut out = BTreeSet::new();
        fn walk(
            g: &MetricGraph,
            v: usize,
            path: &mut Vec<usize>,
            on: &mut Vec<bool>,
            target: &dyn Fn(usize) -> bool,
            max_len: usize,
            out: &mut BTreeSet<Vec<usize>>,
        ) {
            if !path.is_empty() && target(v) {
                out.insert(path.clone());
                return;
            }
            if path.len() == max_len {
                return;
            }
            for &e in g.incident(v) {
                let w = g.other_end(e, v);
                if !on[w] {
                    on[w] = true;
                    path.push(e);
                    walk(g, w, path, on, target, max_len, out);
                    path.pop();
                    on[w] = false;
                }
            }
        }
        for s in (0..g.vertex_count()).filter(|&v| inside(dx[v])) {
            let mut on = vec![false; g.vertex_count()];
            on[s] = true;
            walk(g, s, &mut Vec::new(), &mut on, &|v| inside(dy[v]), max_len, &mut out);
        }
        out
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let g = crate::substitution::apply_rule(&build_seed(), crate::substitution::Rule::Basic).unwrap().graph;
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
        let (mut checked, mut rich) = (0, 0);
        while checked < 12 {
            let x = rand::Rng::gen_range(&mut rng, 0..g.vertex_count());
            let y = rand::Rng::gen_range(&mut rng, 0..g.vertex_count());
            if x == y {
                continue;
            }
            let (eps, c) = (ratio(1, 2), ratio(5, 4));
            let expected = brute_force(&g, x, y, &eps, &c);
            if expected.len() > 400 {
                continue;
            }
            let fam = curve_family_between(&g, x, y, &eps, &c, 10_000).unwrap();
            let got: BTreeSet<Vec<usize>> = fam.curves.iter().cloned().collect();
            assert_eq!(got.len(), fam.curves.len(), "duplicates for {x}-{y}");
            assert_eq!(got, expected, "{x}-{y}");
            assert!(fam.curves.windows(2).all(|w| w[0].len() <= w[1].len()));
            checked += 1;
            rich += usize::from(expected.len() > 1);
        }
        assert!(rich >= 3, "only {rich} pairs with several paths");
    }
}
