use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::checks::euclid;
use super::Drawing;
use crate::error::{CarpetError, Result};
use crate::graph::{Bfs, MetricGraph};
use crate::rational::to_f64;

/// Pairs drawn per breadth-first search; sharing one search across several
/// targets keeps large levels affordable.
pub const PAIRS_PER_SOURCE: usize = 50;

/// Summary of a positive sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandStats {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    /// 5%, 25%, 50%, 75% and 95% quantiles.
    pub quantiles: [f64; 5],
    /// `max / min`.
    pub band_ratio: f64,
}

impl BandStats {
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        values.retain(|v| v.is_finite());
        if values.is_empty() {
            return Err(CarpetError::InvalidParameter("no qualifying samples".to_string()));
        }
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let q = |p: f64| values[((p * (n - 1) as f64).round() as usize).min(n - 1)];
        let (min, max) = (values[0], values[n - 1]);
        Ok(BandStats {
            count: n,
            min,
            max,
            quantiles: [q(0.05), q(0.25), q(0.5), q(0.75), q(0.95)],
            band_ratio: max / min,
        })
    }
}

/// Statistics of `|f(x) - f(y)| / d(x, y)^alpha` over seeded random vertex
/// pairs at graph distance at least `min_sep` edges.
pub fn snowflake_stats(
    g: &MetricGraph,
    drawing: &Drawing,
    sample_size: usize,
    min_sep: u32,
    alpha: f64,
    seed: u64,
) -> Result<BandStats> {
    let n = g.vertex_count();
    if sample_size < 2 || n < 2 {
        return Err(CarpetError::InvalidParameter("need at least two samples and two vertices".to_string()));
    }
    let (s, l) = (to_f64(&g.s), to_f64(&drawing.l));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bfs = Bfs::new(n);
    let mut values = Vec::with_capacity(sample_size);
    let mut attempts = 0;
    while values.len() < sample_size && attempts < 100 * sample_size {
        let src = rng.gen_range(0..n);
        bfs.run(g, &[src], u32::MAX);
        let mut taken = 0;
        while taken < PAIRS_PER_SOURCE && values.len() < sample_size && attempts < 100 * sample_size {
            attempts += 1;
            let dst = rng.gen_range(0..n);
            let Some(hops) = bfs.hops(dst).filter(|&h| h >= min_sep.max(1)) else {
                continue;
            };
            let plane = euclid(drawing.points[src], drawing.points[dst]) * l;
            values.push(plane / (hops as f64 * s).powf(alpha));
            taken += 1;
        }
    }
    BandStats::from_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_seed;
    use crate::substitution::{apply_rule, Rule};

    #[test]
    fn quantiles_of_a_known_sample() {
        let b = BandStats::from_values((1..=101).map(f64::from).collect()).unwrap();
        assert_eq!((b.min, b.max, b.band_ratio), (1.0, 101.0, 101.0));
        assert_eq!(b.quantiles, [6.0, 26.0, 51.0, 76.0, 96.0]);
        assert!(BandStats::from_values(vec![]).is_err());
    }

    #[test]
    fn seed_pairs_at_distance_two_are_diagonal() {
        let g = build_seed();
        let b = snowflake_stats(&g, &Drawing::from_graph(&g), 10, 2, 1.0, 0).unwrap();
        // Opposite corners: plane distance sqrt 2, graph distance 2.
        assert!((b.min - 2f64.sqrt() / 2.0).abs() < 1e-12 && b.band_ratio < 1.0 + 1e-12);
    }

    #[test]
    fn basic_level_one_band_is_finite() {
        let g = apply_rule(&build_seed(), Rule::Basic).unwrap().graph;
        let b = snowflake_stats(&g, &Drawing::from_graph(&g), 200, 8, 0.8, 1).unwrap();
        assert_eq!(b.count, 200);
        assert!(b.min > 0.0 && b.band_ratio < 100.0);
    }
}
