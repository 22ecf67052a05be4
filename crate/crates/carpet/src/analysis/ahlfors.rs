use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::embedding::BandStats;
use crate::error::{CarpetError, Result};
use num_traits::{Signed, ToPrimitive};

use crate::graph::{Bfs, MetricGraph};
use crate::planner::UniformityProfile;
use crate::rational::{floor, to_f64, Rational};

/// Ratios `mu(B(x, r)) / h(r)` at one radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusBand {
    pub radius: f64,
    pub stats: BandStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AhlforsReport {
    pub per_radius: Vec<RadiusBand>,
    /// Over all centers and radii together.
    pub overall: BandStats,
}

/// Step gauge of a profile: `h_k` on `[s_k, s_{k-1})`, and `h_0` above `s_0`.
pub fn profile_gauge(profile: &UniformityProfile, r: &Rational) -> Option<Rational> {
    profile.gauge(r).cloned()
}

/// Ball measures at `samples` seeded random vertices for every radius,
/// divided by the gauge `h(r)`.
pub fn ahlfors_check(
    g: &MetricGraph,
    samples: usize,
    radii: &[Rational],
    gauge: impl Fn(&Rational) -> Option<f64>,
    seed: u64,
) -> Result<AhlforsReport> {
    if g.vertex_count() == 0 || samples == 0 || radii.is_empty() {
        return Err(CarpetError::InvalidParameter("need vertices, samples and radii".to_string()));
    }
    let mut gauges = Vec::with_capacity(radii.len());
    for r in radii {
        if !r.is_positive() {
            return Err(CarpetError::InvalidParameter(format!("radius {r} must be positive")));
        }
        gauges.push(
            gauge(r)
                .filter(|h| *h > 0.0)
                .ok_or_else(|| CarpetError::InvalidParameter(format!("gauge undefined at radius {r}")))?,
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<usize> = (0..samples).map(|_| rng.gen_range(0..g.vertex_count())).collect();
    let balls = VertexBalls::new(g);
    let units: Vec<Rational> = radii.iter().map(|r| r / &g.s).collect();
    let mut table = vec![Vec::with_capacity(samples); radii.len()];
    for &c in &centers {
        for (i, m) in balls.measures(c, &units).into_iter().enumerate() {
            table[i].push(m / gauges[i]);
        }
    }
    let mut per_radius = Vec::with_capacity(radii.len());
    let mut all = Vec::with_capacity(samples * radii.len());
    for (r, values) in radii.iter().zip(table) {
        all.extend_from_slice(&values);
        per_radius.push(RadiusBand {
            radius: to_f64(r),
            stats: BandStats::from_values(values)?,
        });
    }
    Ok(AhlforsReport {
        per_radius,
        overall: BandStats::from_values(all)?,
    })
}

/// Ball measures around vertices at many radii from one search. With hop
/// distances from the center, an edge whose ends sit at hops `h` and `h + 1`
/// is covered to `min(1, x - h)` of its length at radius `x s`, and an edge
/// with both ends at hop `h` to `min(1, 2 (x - h))`.
struct VertexBalls<'a> {
    g: &'a MetricGraph,
    measure: Vec<f64>,
    bfs: std::cell::RefCell<Bfs>,
}

impl<'a> VertexBalls<'a> {
    fn new(g: &'a MetricGraph) -> Self {
        VertexBalls {
            g,
            measure: g.edges().iter().map(|e| to_f64(&e.measure)).collect(),
            bfs: std::cell::RefCell::new(Bfs::new(g.vertex_count())),
        }
    }

    /// Measures of the balls of radius `x s` for each `x` in `units`.
    fn measures(&self, center: usize, units: &[Rational]) -> Vec<f64> {
        let reach = units.iter().map(floor).max().unwrap();
        let max_hops = reach.to_u32().unwrap_or(u32::MAX - 1).saturating_add(1);
        let mut bfs = self.bfs.borrow_mut();
        bfs.run(self.g, &[center], max_hops);
        let len = max_hops as usize + 2;
        let (mut step, mut level) = (vec![0.0; len], vec![0.0; len]);
        for &u in bfs.reached() {
            let hu = bfs.hops(u).unwrap();
            for &e in self.g.incident(u) {
                let w = self.g.other_end(e, u);
                match bfs.hops(w) {
                    Some(hw) if hw == hu && u <= w => level[hu as usize] += self.measure[e],
                    Some(hw) if hw == hu + 1 => step[hu as usize] += self.measure[e],
                    None => step[hu as usize] += self.measure[e],
                    _ => {}
                }
            }
        }
        let mut full = vec![0.0; len + 1];
        for h in 0..len {
            full[h + 1] = full[h] + step[h] + level[h];
        }
        units
            .iter()
            .map(|x| {
                let j = floor(x).to_usize().unwrap_or(usize::MAX).min(len - 1);
                let frac = to_f64(&(x - Rational::from_integer(j.into())));
                full[j] + step[j] * frac.min(1.0) + level[j] * (2.0 * frac).min(1.0)
            })
            .collect()
    }
}
