use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::path::Path;

use image::{GrayImage, Luma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::{BandStats, Drawing};
use crate::error::{CarpetError, Result};
use crate::graph::{Bfs, MetricGraph};
use crate::rational::to_f64;

/// Default ambient dimension of the plane.
pub const AMBIENT_DIMENSION: f64 = 2.0;

/// Binary raster of a drawn image. Row 0 is the top row.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    /// Plane coordinates of the lower-left corner.
    pub origin: [f64; 2],
    /// Side length of one pixel.
    pub pixel: f64,
    /// `true` on pixels met by the image.
    pub on: Vec<bool>,
}

impl Raster {
    pub fn empty(width: usize, height: usize, origin: [f64; 2], pixel: f64) -> Result<Self> {
        if width == 0 || height == 0 || !(pixel > 0.0) {
            return Err(CarpetError::InvalidParameter("raster needs positive size".to_string()));
        }
        Ok(Raster { width, height, origin, pixel, on: vec![false; width * height] })
    }

    /// Square raster of `resolution` pixels per side covering the drawing's
    /// bounding box padded by one cell.
    pub fn from_drawing(d: &Drawing, resolution: usize) -> Result<Self> {
        if d.points.is_empty() || resolution == 0 {
            return Err(CarpetError::InvalidParameter("empty drawing or zero resolution".to_string()));
        }
        let cell = to_f64(&d.l);
        let (mut lo, mut hi) = ([i64::MAX; 2], [i64::MIN; 2]);
        for p in &d.points {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let side = ((hi[0] - lo[0]).max(hi[1] - lo[1]) + 2) as f64 * cell;
        let origin = [(lo[0] - 1) as f64 * cell, (lo[1] - 1) as f64 * cell];
        let mut r = Raster::empty(resolution, resolution, origin, side / resolution as f64)?;
        for &[a, b] in &d.segments {
            let (p, q) = (d.points[a], d.points[b]);
            let (px, py) = (p[0] as f64 * cell, p[1] as f64 * cell);
            let (dx, dy) = ((q[0] - p[0]) as f64 * cell, (q[1] - p[1]) as f64 * cell);
            let steps = ((dx.hypot(dy) / (r.pixel / 2.0)).ceil() as usize).max(1);
            for j in 0..=steps {
                let t = j as f64 / steps as f64;
                if let Some(i) = r.locate([px + t * dx, py + t * dy]) {
                    r.on[i] = true;
                }
            }
        }
        Ok(r)
    }

    /// Pixel index containing a plane point, if inside.
    pub fn locate(&self, z: [f64; 2]) -> Option<usize> {
        let c = ((z[0] - self.origin[0]) / self.pixel).floor();
        let r = ((z[1] - self.origin[1]) / self.pixel).floor();
        if c < 0.0 || r < 0.0 || c >= self.width as f64 || r >= self.height as f64 {
            return None;
        }
        Some((self.height - 1 - r as usize) * self.width + c as usize)
    }

    /// Plane coordinates of a pixel center.
    pub fn center(&self, i: usize) -> [f64; 2] {
        let (row, col) = (i / self.width, i % self.width);
        [
            self.origin[0] + (col as f64 + 0.5) * self.pixel,
            self.origin[1] + ((self.height - 1 - row) as f64 + 0.5) * self.pixel,
        ]
    }

    /// Image pixels black, background white.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let img = GrayImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            Luma([if self.on[y as usize * self.width + x as usize] { 0 } else { 255 }])
        });
        img.save_with_format(path, image::ImageFormat::Pnm)
            .map_err(|e| CarpetError::Format(format!("{}: {e}", path.display())))
    }

    /// Reads a PGM as a raster of the unit square (origin 0, pixel `1/width`);
    /// pixels darker than mid-gray are image pixels.
    pub fn read_pgm(path: &Path) -> Result<Self> {
        let img = image::ImageReader::open(path)?
            .with_guessed_format()?
            .decode()
            .map_err(|e| CarpetError::Format(format!("{}: {e}", path.display())))?
            .to_luma8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let mut r = Raster::empty(w, h, [0.0, 0.0], 1.0 / w.max(1) as f64)?;
        for (x, y, p) in img.enumerate_pixels() {
            r.on[y as usize * w + x as usize] = p.0[0] < 128;
        }
        Ok(r)
    }
}

/// Weight `dist(z, image)^beta` sampled at pixel centers, with the cost of
/// entering each pixel.
#[derive(Debug, Clone)]
pub struct AinftyField {
    pub raster: Raster,
    pub beta: f64,
    pub ambient: f64,
    pub weight: Vec<f64>,
    /// `mu(ball of radius one pixel)^(1 / ambient)`, the ball being the pixel
    /// and its four edge neighbours.
    pub cost: Vec<f64>,
}

impl AinftyField {
    pub fn new(raster: Raster, beta: f64, ambient: f64) -> Result<Self> {
        if !(beta >= 0.0) || !(ambient > 0.0) {
            return Err(CarpetError::InvalidParameter("need beta >= 0 and a positive ambient dimension".to_string()));
        }
        let dist = distance_to_image(&raster);
        let weight: Vec<f64> = dist.iter().map(|d| d.powf(beta)).collect();
        let (w, h) = (raster.width, raster.height);
        let area = raster.pixel * raster.pixel;
        let cost = (0..w * h)
            .map(|i| {
                let (row, col) = (i / w, i % w);
                let mut mass = weight[i];
                if row > 0 {
                    mass += weight[i - w];
                }
                if row + 1 < h {
                    mass += weight[i + w];
                }
                if col > 0 {
                    mass += weight[i - 1];
                }
                if col + 1 < w {
                    mass += weight[i + 1];
                }
                (mass * area).powf(1.0 / ambient)
            })
            .collect();
        Ok(AinftyField { raster, beta, ambient, weight, cost })
    }

    /// Default weight exponent `ambient (1/alpha - 1)` for a drawing with
    /// `l ~ s^alpha`.
    pub fn default_beta(alpha: f64, ambient: f64) -> f64 {
        ambient * (1.0 / alpha - 1.0)
    }
}

/// Euclidean distance from each pixel center to the nearest image pixel
/// center, infinite when the image is empty. Exact two-pass transform of
/// Felzenszwalb and Huttenlocher.
fn distance_to_image(r: &Raster) -> Vec<f64> {
    let (w, h) = (r.width, r.height);
    let far = ((w * w + h * h) as f64) * 4.0;
    let mut sq: Vec<f64> = r.on.iter().map(|&b| if b { 0.0 } else { far }).collect();
    let mut buf = Vec::new();
    for col in 0..w {
        buf.clear();
        buf.extend((0..h).map(|row| sq[row * w + col]));
        let out = lower_envelope(&buf);
        for row in 0..h {
            sq[row * w + col] = out[row];
        }
    }
    for row in 0..h {
        let out = lower_envelope(&sq[row * w..(row + 1) * w]);
        sq[row * w..(row + 1) * w].copy_from_slice(&out);
    }
    let empty = !r.on.iter().any(|&b| b);
    sq.into_iter().map(|d| if empty { f64::INFINITY } else { d.sqrt() * r.pixel }).collect()
}

/// One-dimensional squared distance transform `min_q (p - q)^2 + f(q)`.
fn lower_envelope(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut hull = vec![0usize; n];
    let mut bounds = vec![0.0f64; n + 1];
    let mut k = 0;
    bounds[0] = f64::NEG_INFINITY;
    bounds[1] = f64::INFINITY;
    let cross = |q: usize, p: usize| {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * q as f64 - 2.0 * p as f64)
    };
    for q in 1..n {
        let mut s = cross(q, hull[k]);
        while s <= bounds[k] {
            k -= 1;
            s = cross(q, hull[k]);
        }
        k += 1;
        hull[k] = q;
        bounds[k] = s;
        bounds[k + 1] = f64::INFINITY;
    }
    let mut out = vec![0.0; n];
    k = 0;
    for (p, o) in out.iter_mut().enumerate() {
        while bounds[k + 1] < p as f64 {
            k += 1;
        }
        let d = p as f64 - hull[k] as f64;
        *o = d * d + f[hull[k]];
    }
    out
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Chain costs from one pixel to all pixels over the 8-connected pixel graph.
/// A chain costs the sum of `cost` over all its pixels, start included.
fn chain_costs(field: &AinftyField, source: usize) -> Vec<f64> {
    let (w, h) = (field.raster.width as i64, field.raster.height as i64);
    let mut best = vec![f64::INFINITY; field.cost.len()];
    let mut heap = BinaryHeap::new();
    best[source] = field.cost[source];
    heap.push(Entry(best[source], source));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > best[u] {
            continue;
        }
        let (row, col) = (u as i64 / w, u as i64 % w);
        for dr in -1..=1 {
            for dc in -1..=1 {
                let (r, c) = (row + dr, col + dc);
                if (dr, dc) == (0, 0) || r < 0 || c < 0 || r >= h || c >= w {
                    continue;
                }
                let v = (r * w + c) as usize;
                let nd = d + field.cost[v];
                if nd < best[v] {
                    best[v] = nd;
                    heap.push(Entry(nd, v));
                }
            }
        }
    }
    best
}

/// Discretized ball-chain metric `D_omega` between pixel pairs: the least
/// total cost of an 8-connected pixel chain joining them, and 0 for equal
/// pixels. Pairs sharing a source share one shortest-path run.
pub fn strong_ainfty_metric(field: &AinftyField, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    let n = field.cost.len();
    if let Some(&(a, b)) = pairs.iter().find(|&&(a, b)| a >= n || b >= n) {
        return Err(CarpetError::InvalidPoint(format!("pixel pair ({a}, {b}) outside the raster")));
    }
    let mut by_source: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &(a, _)) in pairs.iter().enumerate() {
        by_source.entry(a).or_default().push(i);
    }
    let mut out = vec![0.0; pairs.len()];
    for (src, idx) in by_source {
        if idx.iter().all(|&i| pairs[i].1 == src) {
            continue;
        }
        let costs = chain_costs(field, src);
        for i in idx {
            out[i] = if pairs[i].1 == src { 0.0 } else { costs[pairs[i].1] };
        }
    }
    Ok(out)
}

/// Pixel pairs `D_omega / |x - y|` over `sources * per_source` seeded random
/// pairs of distinct pixels.
pub fn euclidean_band(field: &AinftyField, sources: usize, per_source: usize, seed: u64) -> Result<BandStats> {
    let n = field.cost.len();
    if n < 2 {
        return Err(CarpetError::InvalidParameter("raster needs two pixels".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(sources * per_source);
    for _ in 0..sources {
        let a = rng.gen_range(0..n);
        for _ in 0..per_source {
            pairs.push((a, (a + rng.gen_range(1..n)) % n));
        }
    }
    let d = strong_ainfty_metric(field, &pairs)?;
    let r = &field.raster;
    BandStats::from_values(
        pairs
            .iter()
            .zip(d)
            .map(|(&(a, b), dw)| {
                let (p, q) = (r.center(a), r.center(b));
                dw / (p[0] - q[0]).hypot(p[1] - q[1])
            })
            .collect(),
    )
}

/// Pullback band `D_omega(f(x), f(y)) / d(x, y)` over seeded vertex pairs of
/// `g`, where `f` places each vertex at its drawn position. Pairs landing in
/// one pixel are skipped.
pub fn pullback_band(
    g: &MetricGraph,
    drawing: &Drawing,
    field: &AinftyField,
    sources: usize,
    per_source: usize,
    seed: u64,
) -> Result<BandStats> {
    let n = g.vertex_count();
    if n < 2 || drawing.points.len() < n {
        return Err(CarpetError::InvalidParameter("drawing must place every vertex".to_string()));
    }
    let cell = to_f64(&drawing.l);
    let pixel_of = |v: usize| {
        let p = drawing.points[v];
        field.raster.locate([p[0] as f64 * cell, p[1] as f64 * cell])
    };
    let edge = to_f64(&g.s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bfs = Bfs::new(n);
    let mut pairs = Vec::new();
    let mut graph_dist = Vec::new();
    for _ in 0..sources {
        let x = rng.gen_range(0..n);
        bfs.run(g, &[x], u32::MAX);
        for _ in 0..per_source {
            let y = (x + rng.gen_range(1..n)) % n;
            let (px, py) = match (pixel_of(x), pixel_of(y)) {
                (Some(a), Some(b)) if a != b => (a, b),
                (None, _) | (_, None) => return Err(CarpetError::InvalidPoint("vertex outside the raster".to_string())),
                _ => continue,
            };
            let hops = bfs.hops(y).ok_or(CarpetError::Disconnected)?;
            pairs.push((px, py));
            graph_dist.push(hops as f64 * edge);
        }
    }
    let d = strong_ainfty_metric(field, &pairs)?;
    BandStats::from_values(d.iter().zip(&graph_dist).map(|(a, b)| a / b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_seed;

    fn brute_distance(r: &Raster, i: usize) -> f64 {
        let c = r.center(i);
        (0..r.on.len())
            .filter(|&j| r.on[j])
            .map(|j| {
                let d = r.center(j);
                (c[0] - d[0]).hypot(c[1] - d[1])
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn distance_transform_matches_brute_force() {
        let mut r = Raster::empty(9, 7, [0.0, 0.0], 0.5).unwrap();
        for i in [3, 17, 40, 62] {
            r.on[i] = true;
        }
        let d = distance_to_image(&r);
        for (i, di) in d.iter().enumerate() {
            assert!((di - brute_distance(&r, i)).abs() < 1e-12, "pixel {i}");
        }
    }

    #[test]
    fn constant_weight_is_close_to_euclidean() {
        let field = AinftyField::new(Raster::empty(64, 64, [0.0, 0.0], 1.0 / 64.0).unwrap(), 0.0, 2.0).unwrap();
        assert!(field.weight.iter().all(|&w| w == 1.0));
        let band = euclidean_band(&field, 5, 20, 3).unwrap();
        assert!(band.band_ratio <= 2.0 * 2f64.sqrt() + 1e-9, "{band:?}");
    }

    #[test]
    fn equal_pixels_have_zero_distance() {
        let field = AinftyField::new(Raster::empty(8, 8, [0.0, 0.0], 1.0).unwrap(), 1.0, 2.0).unwrap();
        assert_eq!(strong_ainfty_metric(&field, &[(5, 5)]).unwrap(), vec![0.0]);
        assert!(strong_ainfty_metric(&field, &[(0, 64)]).is_err());
    }

    #[test]
    fn chains_along_the_image_stay_positive() {
        let d = Drawing::from_graph(&build_seed());
        let r = Raster::from_drawing(&d, 40).unwrap();
        let field = AinftyField::new(r, 0.5, 2.0).unwrap();
        let on: Vec<usize> = (0..field.raster.on.len()).filter(|&i| field.raster.on[i]).collect();
        assert!(on.len() > 40);
        assert!(on.iter().all(|&i| field.weight[i] == 0.0 && field.cost[i] > 0.0));
        let dist = strong_ainfty_metric(&field, &[(on[0], on[on.len() / 2])]).unwrap();
        assert!(dist[0] > 0.0);
    }

    #[test]
    fn triangle_inequality_with_unit_weight() {
        let field = AinftyField::new(Raster::empty(20, 20, [0.0, 0.0], 0.05).unwrap(), 0.0, 2.0).unwrap();
        let (a, b, c) = (3, 217, 388);
        let d = strong_ainfty_metric(&field, &[(a, b), (b, c), (a, c), (b, a)]).unwrap();
        assert!(d[2] <= d[0] + d[1] + 1e-12);
        assert_eq!(d[0], d[3]);
    }

    #[test]
    fn pgm_round_trip() {
        let d = Drawing::from_graph(&build_seed());
        let r = Raster::from_drawing(&d, 16).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seed.pgm");
        r.write_pgm(&path).unwrap();
        let back = Raster::read_pgm(&path).unwrap();
        assert_eq!((back.width, back.height), (16, 16));
        assert_eq!(back.on, r.on);
    }

    #[test]
    fn seed_pullback_band_is_finite() {
        let g = build_seed();
        let d = Drawing::from_graph(&g);
        let field = AinftyField::new(Raster::from_drawing(&d, 32).unwrap(), 0.5, 2.0).unwrap();
        let band = pullback_band(&g, &d, &field, 2, 3, 0).unwrap();
        assert!(band.min > 0.0 && band.max.is_finite());
    }
}
