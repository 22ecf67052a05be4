use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::curves::curve_family_between;
use super::modulus::{modulus, CurveFamily, ModulusProblem};
use crate::error::{CarpetError, Result};
use crate::graph::MetricGraph;
use crate::rational::{to_f64, Rational};

/// Lower envelope of the sampled moduli at one `eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub eps: f64,
    pub min_modulus: f64,
    pub mean_modulus: f64,
    pub pairs: usize,
    /// Pairs whose family came out empty.
    pub empty_families: usize,
}

/// Minimum `q`-modulus over seeded random vertex pairs of curve families
/// from `B(x, eps d)` to `B(y, eps d)` no longer than `c (1 + eps) d`.
///
/// Families accumulate along the increasing `eps` grid: every curve found
/// for a smaller `eps` also qualifies for a larger one, so each row uses a
/// superset of the previous family and the envelope is non-decreasing.
pub fn monotonicity_probe(
    g: &MetricGraph,
    pairs: usize,
    eps_grid: &[Rational],
    c: &Rational,
    q: f64,
    cap: usize,
    seed: u64,
) -> Result<Vec<ProbeRow>> {
    if g.vertex_count() < 2 || eps_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CarpetError::InvalidParameter(
            "need two vertices and an increasing eps grid".to_string(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: Vec<(usize, usize)> = (0..pairs)
        .map(|_| {
            let x = rng.gen_range(0..g.vertex_count());
            let y = (x + rng.gen_range(1..g.vertex_count())) % g.vertex_count();
            (x, y)
        })
        .collect();
    let mut families = vec![CurveFamily::default(); chosen.len()];
    let mut rows = Vec::with_capacity(eps_grid.len());
    for eps in eps_grid {
        let mut values = Vec::with_capacity(chosen.len());
        let mut empty = 0;
        for (fam, &(x, y)) in families.iter_mut().zip(&chosen) {
            for curve in curve_family_between(g, x, y, eps, c, cap)?.curves {
                if !fam.curves.contains(&curve) {
                    fam.curves.push(curve);
                }
            }
            if fam.curves.is_empty() {
                empty += 1;
            }
            values.push(modulus(&ModulusProblem::from_graph(g, fam, q)?)?.value);
        }
        rows.push(ProbeRow {
            eps: to_f64(eps),
            min_modulus: values.iter().copied().fold(f64::INFINITY, f64::min),
            mean_modulus: values.iter().sum::<f64>() / values.len().max(1) as f64,
            pairs: values.len(),
            empty_families: empty,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_seed;
    use crate::rational::{int, ratio};

    #[test]
    fn seed_pairs_have_positive_modulus() {
        let g = build_seed();
        let rows = monotonicity_probe(&g, 6, &[ratio(1, 4), ratio(1, 2), int(1)], &int(1), 1.2, 64, 0).unwrap();
        assert!(rows.iter().all(|r| r.min_modulus > 0.0 && r.empty_families == 0));
        assert!(rows.windows(2).all(|w| w[1].min_modulus >= w[0].min_modulus * (1.0 - 1e-6)));
    }
}
