use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{planarity_check, Drawing};
use crate::error::{CarpetError, Result};
use crate::graph::Dir;

/// A face of the planar drawing, traced with the face on the left.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Face {
    /// Boundary vertices in traversal order.
    pub boundary: Vec<usize>,
    /// Twice the signed area in square cells; positive for bounded faces.
    pub doubled_area: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaceReport {
    /// Bounded faces.
    pub faces: Vec<Face>,
    /// Sampled boundary-disjoint pairs and their relative separation.
    pub pairs: Vec<(usize, usize, f64)>,
    /// Sampled pairs skipped because their boundaries touch.
    pub touching_pairs: usize,
    pub min_separation: Option<f64>,
}

/// Bounded complementary faces of a planar drawing, with the relative
/// separation `d(E, F) / min(diam E, diam F)` on up to `samples` seeded
/// random pairs of faces whose boundaries are disjoint.
pub fn peripheral_faces(d: &Drawing, samples: usize, seed: u64) -> Result<FaceReport> {
    if !planarity_check(d).is_empty() {
        return Err(CarpetError::CheckFailed("planarity: drawing is not planar".to_string()));
    }
    let faces = trace_faces(d)?;
    let bounded: Vec<Face> = faces.into_iter().filter(|f| f.doubled_area > 0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    let mut touching = 0;
    if bounded.len() >= 2 {
        let sorted: Vec<Vec<[i64; 2]>> = bounded
            .iter()
            .map(|f| {
                let mut pts: Vec<[i64; 2]> = f.boundary.iter().map(|&v| d.points[v]).collect();
                pts.sort_unstable();
                pts.dedup();
                pts
            })
            .collect();
        let diam: Vec<f64> = sorted.iter().map(|p| diameter(p)).collect();
        for _ in 0..samples {
            let a = rng.gen_range(0..bounded.len());
            let b = rng.gen_range(0..bounded.len() - 1);
            let b = if b >= a { b + 1 } else { b };
            let dist = min_distance(&sorted[a], &sorted[b]);
            if dist == 0.0 {
                touching += 1;
                continue;
            }
            pairs.push((a.min(b), a.max(b), dist / diam[a].min(diam[b])));
        }
    }
    let min_separation = pairs.iter().map(|p| p.2).min_by(f64::total_cmp);
    Ok(FaceReport {
        faces: bounded,
        pairs,
        touching_pairs: touching,
        min_separation,
    })
}

/// All faces, including the unbounded one, of a drawing with unit
/// axis-parallel segments.
pub fn trace_faces(d: &Drawing) -> Result<Vec<Face>> {
    let n = d.points.len();
    // Outgoing half-edge per vertex and direction.
    let mut out = vec![[usize::MAX; 4]; n];
    for (i, &[a, b]) in d.segments.iter().enumerate() {
        let (p, q) = (d.points[a], d.points[b]);
        let dir = Dir::from_vector(q[0] - p[0], q[1] - p[1])
            .ok_or_else(|| CarpetError::CheckFailed(format!("segment {i} is not a unit segment")))?;
        out[a][dir.index()] = 2 * i;
        out[b][dir.opposite().index()] = 2 * i + 1;
    }
    let head = |h: usize| {
        let [a, b] = d.segments[h / 2];
        if h.is_multiple_of(2) { b } else { a }
    };
    let tail = |h: usize| {
        let [a, b] = d.segments[h / 2];
        if h.is_multiple_of(2) { a } else { b }
    };
    let dir_of = |h: usize| {
        let (p, q) = (d.points[tail(h)], d.points[head(h)]);
        Dir::from_vector(q[0] - p[0], q[1] - p[1]).expect("unit segment")
    };
    let mut used = vec![false; 2 * d.segments.len()];
    let mut faces = Vec::new();
    for start in 0..used.len() {
        if used[start] {
            continue;
        }
        let mut boundary = Vec::new();
        let mut area = 0i64;
        let mut h = start;
        while !used[h] {
            used[h] = true;
            let (p, q) = (d.points[tail(h)], d.points[head(h)]);
            area += p[0] * q[1] - q[0] * p[1];
            boundary.push(tail(h));
            // Next: first outgoing half-edge clockwise from the way back.
            let v = head(h);
            let back = dir_of(h).opposite();
            h = (1..=4)
                .map(|t| out[v][back.rotate(t).index()])
                .find(|&x| x != usize::MAX)
                .expect("the way back exists");
        }
        faces.push(Face {
            boundary,
            doubled_area: area,
        });
    }
    Ok(faces)
}

fn diameter(points: &[[i64; 2]]) -> f64 {
    let hull = convex_hull(points);
    let mut best = 0i64;
    for (i, p) in hull.iter().enumerate() {
        for q in &hull[i + 1..] {
            best = best.max((p[0] - q[0]).pow(2) + (p[1] - q[1]).pow(2));
        }
    }
    (best as f64).sqrt()
}

fn convex_hull(sorted: &[[i64; 2]]) -> Vec<[i64; 2]> {
    if sorted.len() < 3 {
        return sorted.to_vec();
    }
    let cross = |o: [i64; 2], a: [i64; 2], b: [i64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[i64; 2]> = Vec::with_capacity(2 * sorted.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[i64; 2]>> = if pass == 0 {
            Box::new(sorted.iter())
        } else {
            Box::new(sorted.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Smallest distance between two lattice point sets sorted by x.
fn min_distance(a: &[[i64; 2]], b: &[[i64; 2]]) -> f64 {
    let mut best = i64::MAX;
    for p in a {
        let lo = b.partition_point(|q| q[0] < p[0] - isqrt_ceil(best));
        for q in &b[lo..] {
            let dx = q[0] - p[0];
            if dx > 0 && dx * dx > best {
                break;
            }
            best = best.min(dx * dx + (q[1] - p[1]).pow(2));
        }
    }
    (best as f64).sqrt()
}

fn isqrt_ceil(v: i64) -> i64 {
    if v == i64::MAX {
        return i64::MAX / 4;
    }
    (v as f64).sqrt().ceil() as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_seed;
    use crate::rational::int;

    #[test]
    fn seed_has_one_bounded_face() {
        let r = peripheral_faces(&Drawing::from_graph(&build_seed()), 10, 0).unwrap();
        assert_eq!(r.faces.len(), 1);
        assert_eq!(r.faces[0].doubled_area, 2);
        assert!(r.pairs.is_empty() && r.min_separation.is_none());
    }

    #[test]
    fn two_separate_squares() {
        // Unit squares at x = 0 and x = 3 joined by a path along y = 0.
        let points = vec![[0, 0], [1, 0], [1, 1], [0, 1], [2, 0], [3, 0], [4, 0], [4, 1], [3, 1]];
        let segments = vec![[0, 1], [1, 2], [2, 3], [3, 0], [1, 4], [4, 5], [5, 6], [6, 7], [7, 8], [8, 5]];
        let d = Drawing {
            level: 0,
            l: int(1),
            points,
            segments,
        };
        let r = peripheral_faces(&d, 20, 1).unwrap();
        assert_eq!(r.faces.len(), 2);
        // d = 2, both diameters sqrt 2.
        let want = 2.0 / 2f64.sqrt();
        assert!((r.min_separation.unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn adjacent_squares_touch() {
        let points = vec![[0, 0], [1, 0], [2, 0], [2, 1], [1, 1], [0, 1]];
        let segments = vec![[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 0], [1, 4]];
        let d = Drawing {
            level: 0,
            l: int(1),
            points,
            segments,
        };
        let r = peripheral_faces(&d, 5, 0).unwrap();
        assert_eq!(r.faces.len(), 2);
        assert_eq!(r.touching_pairs, 5);
    }

    #[test]
    fn hull_diameter() {
        let mut pts = vec![[0, 0], [3, 4], [1, 1], [2, 0], [0, 2]];
        pts.sort_unstable();
        assert_eq!(diameter(&pts), 5.0);
    }
}
