use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{CarpetError, Result};
use crate::graph::MetricGraph;
use crate::rational::{to_f64, Rational};

/// Relative duality gap at which the iterative solver stops.
pub const MODULUS_TOLERANCE: f64 = 1e-6;
/// Sweep cap of the iterative solver.
pub const MODULUS_MAX_SWEEPS: usize = 100_000;
/// Coordinate sweeps between Newton polishes.
const POLISH_EVERY: usize = 16;
const POLISH_STEPS: usize = 8;

/// Edge paths in a graph, each given by its edge ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CurveFamily {
    pub curves: Vec<Vec<usize>>,
}

impl CurveFamily {
    /// Checks that every curve is a simple edge path of `g`.
    pub fn validate(&self, g: &MetricGraph) -> Result<()> {
        for (i, c) in self.curves.iter().enumerate() {
            let bad = |why: &str| CarpetError::InvalidParameter(format!("curve {i} {why}"));
            if c.iter().any(|&e| e >= g.edge_count()) {
                return Err(bad("names an unknown edge"));
            }
            let mut seen = std::collections::HashSet::new();
            let mut at: Option<usize> = None;
            for (j, &e) in c.iter().enumerate() {
                let edge = &g.edges()[e];
                let next = match at {
                    None => {
                        // Orient the first edge towards the second.
                        let forward = c.get(j + 1).is_none_or(|&f| {
                            let f = &g.edges()[f];
                            f.tail == edge.head || f.head == edge.head
                        });
                        seen.insert(if forward { edge.tail } else { edge.head });
                        if forward { edge.head } else { edge.tail }
                    }
                    Some(v) if edge.tail == v => edge.head,
                    Some(v) if edge.head == v => edge.tail,
                    Some(_) => return Err(bad("is not connected")),
                };
                if !seen.insert(next) {
                    return Err(bad("is not simple"));
                }
                at = Some(next);
            }
        }
        Ok(())
    }

    /// Curve lengths in `g`.
    pub fn lengths(&self, g: &MetricGraph) -> Vec<Rational> {
        self.curves.iter().map(|c| &g.s * Rational::from_integer(c.len().into())).collect()
    }
}

/// Minimize `sum_e mu_e rho_e^p` over densities with
/// `sum_{e in curve} len_e rho_e >= 1` for every curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusProblem {
    pub lengths: Vec<f64>,
    pub measures: Vec<f64>,
    pub curves: Vec<Vec<usize>>,
    pub p: f64,
}

impl ModulusProblem {
    pub fn from_graph(g: &MetricGraph, family: &CurveFamily, p: f64) -> Result<Self> {
        family.validate(g)?;
        Ok(ModulusProblem {
            lengths: vec![to_f64(&g.s); g.edge_count()],
            measures: g.edges().iter().map(|e| to_f64(&e.measure)).collect(),
            curves: family.curves.clone(),
            p,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) {
            return Err(CarpetError::InvalidParameter(format!("exponent {} below 1", self.p)));
        }
        if self.lengths.len() != self.measures.len() || self.measures.iter().any(|&m| !(m > 0.0)) {
            return Err(CarpetError::InvalidParameter("edge data must be positive and aligned".to_string()));
        }
        for (i, c) in self.curves.iter().enumerate() {
            if c.iter().any(|&e| e >= self.lengths.len()) {
                return Err(CarpetError::InvalidParameter(format!("curve {i} names an unknown edge")));
            }
            if c.iter().map(|&e| self.lengths[e]).sum::<f64>() <= 0.0 {
                return Err(CarpetError::InvalidParameter(format!("curve {i} has zero length")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusResult {
    /// Energy of `density`, an admissible density.
    pub value: f64,
    pub density: Vec<f64>,
    /// Certified lower bound on the modulus.
    pub lower_bound: f64,
    pub sweeps: usize,
}

/// Discrete `p`-modulus. For `p = 1` a linear program; for `p > 1` dual
/// coordinate ascent on the curve constraints, stopped when the admissible
/// rescaling of the dual density is within [`MODULUS_TOLERANCE`] of the
/// dual bound.
pub fn modulus(problem: &ModulusProblem) -> Result<ModulusResult> {
    problem.validate()?;
    let n = problem.lengths.len();
    if problem.curves.is_empty() {
        return Ok(ModulusResult {
            value: 0.0,
            density: vec![0.0; n],
            lower_bound: 0.0,
            sweeps: 0,
        });
    }
    if problem.p == 1.0 {
        return modulus_lp(problem);
    }
    let reduced = SeriesReduction::new(problem);
    let mut result = dual_ascent(&reduced.measures, &reduced.curves, problem.p)?;
    result.density = reduced.expand(&result.density, n);
    Ok(result)
}

/// Edges lying on exactly the same curves act as one series edge: with
/// `q = 1/(p-1)` and `w = sum a^(1+q) m^(-q)` over the group, the optimal
/// split of a total length `t` costs `w^(1-p) t^p`. Groups become unit-length
/// edges of measure `w^(1-p)`, which leaves the modulus unchanged.
struct SeriesReduction {
    members: Vec<Vec<usize>>,
    weights: Vec<f64>,
    measures: Vec<f64>,
    curves: Vec<Vec<usize>>,
    q: f64,
    lengths: Vec<f64>,
    edge_measures: Vec<f64>,
}

impl SeriesReduction {
    fn new(problem: &ModulusProblem) -> Self {
        let q = 1.0 / (problem.p - 1.0);
        let mut on: Vec<Vec<u32>> = vec![Vec::new(); problem.lengths.len()];
        for (i, c) in problem.curves.iter().enumerate() {
            for &e in c {
                on[e].push(i as u32);
            }
        }
        let mut group_of: std::collections::HashMap<&[u32], usize> = std::collections::HashMap::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        for (e, sig) in on.iter().enumerate() {
            if sig.is_empty() {
                continue;
            }
            let g = *group_of.entry(sig.as_slice()).or_insert_with(|| {
                members.push(Vec::new());
                members.len() - 1
            });
            members[g].push(e);
        }
        let weights: Vec<f64> = members
            .iter()
            .map(|es| {
                es.iter()
                    .map(|&e| problem.lengths[e].powf(1.0 + q) * problem.measures[e].powf(-q))
                    .sum()
            })
            .collect();
        let measures = weights.iter().map(|w| w.powf(1.0 - problem.p)).collect();
        let mut curves = vec![Vec::new(); problem.curves.len()];
        for (g, es) in members.iter().enumerate() {
            for &i in &on[es[0]] {
                curves[i as usize].push(g);
            }
        }
        SeriesReduction {
            members,
            weights,
            measures,
            curves,
            q,
            lengths: problem.lengths.clone(),
            edge_measures: problem.measures.clone(),
        }
    }

    /// Density on the original edges from group lengths `t`.
    fn expand(&self, t: &[f64], n: usize) -> Vec<f64> {
        let mut rho = vec![0.0; n];
        for (g, es) in self.members.iter().enumerate() {
            for &e in es {
                rho[e] = (self.lengths[e] / self.edge_measures[e]).powf(self.q) * t[g] / self.weights[g];
            }
        }
        rho
    }
}

/// Dual coordinate ascent for unit-length edges. Each curve multiplier is
/// moved to the point where its curve has length one, found by Newton steps
/// kept inside a bisection bracket.
fn dual_ascent(measures: &[f64], curves: &[Vec<usize>], p: f64) -> Result<ModulusResult> {
    let n = measures.len();
    let q = 1.0 / (p - 1.0);
    let rho_of = |g: f64, m: f64| if g > 0.0 { (g / (p * m)).powf(q) } else { 0.0 };
    let energy = |rho: &[f64]| rho.iter().zip(measures).map(|(r, m)| m * r.powf(p)).sum::<f64>();
    let mut lambda = vec![0.0f64; curves.len()];
    let mut load = vec![0.0f64; n];
    let mut best = (f64::INFINITY, vec![0.0; n], 0.0f64);
    for sweep in 1..=MODULUS_MAX_SWEEPS {
        for (i, c) in curves.iter().enumerate() {
            // Curve length, and its derivative, with this multiplier at `x`.
            let length_at = |x: f64| {
                c.iter().fold((0.0, 0.0), |(f, df), &e| {
                    let g = load[e] + x - lambda[i];
                    if g > 0.0 {
                        let r = rho_of(g, measures[e]);
                        (f + r, df + q * r / g)
                    } else {
                        (f, df)
                    }
                })
            };
            let target = if length_at(0.0).0 >= 1.0 {
                0.0
            } else {
                let (mut lo, mut hi) = (0.0, lambda[i].max(1e-300));
                while length_at(hi).0 < 1.0 {
                    lo = hi;
                    hi *= 2.0;
                }
                let mut x = hi;
                for _ in 0..200 {
                    let (f, df) = length_at(x);
                    if f >= 1.0 {
                        hi = x;
                    } else {
                        lo = x;
                    }
                    let newton = x - (f - 1.0) / df;
                    x = if df > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
                    if (f - 1.0).abs() <= 1e-15 || hi - lo <= hi * 1e-15 {
                        break;
                    }
                }
                // The returned point must make the curve admissible.
                if length_at(x).0 >= 1.0 {
                    x
                } else {
                    hi
                }
            };
            let delta = target - lambda[i];
            if delta != 0.0 {
                for &e in c {
                    load[e] += delta;
                }
                lambda[i] = target;
            }
        }
        if sweep % POLISH_EVERY == 0 {
            newton_polish(measures, curves, p, &mut lambda, &mut load);
        }
        let rho: Vec<f64> = (0..n).map(|e| rho_of(load[e], measures[e])).collect();
        let dual = lambda.iter().sum::<f64>() - (p - 1.0) * energy(&rho);
        let shortest = curves
            .iter()
            .map(|c| c.iter().map(|&e| rho[e]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        if shortest > 0.0 {
            let density: Vec<f64> = rho.iter().map(|r| r / shortest).collect();
            let value = energy(&density);
            if value < best.0 {
                best = (value, density, best.2);
            }
        }
        best.2 = best.2.max(dual);
        if best.0.is_finite() && best.0 - best.2 <= MODULUS_TOLERANCE * best.0 {
            return Ok(ModulusResult {
                value: best.0,
                density: best.1,
                lower_bound: best.2,
                sweeps: sweep,
            });
        }
    }
    Err(CarpetError::CheckFailed(format!(
        "modulus solver reached {MODULUS_MAX_SWEEPS} sweeps with gap {} / {}",
        best.0 - best.2,
        best.0
    )))
}

/// Joint Newton steps on the positive multipliers, solving `length_i = 1`
/// for all of them at once. Coordinate ascent alone stalls when active
/// curves overlap heavily. Any nonnegative multipliers give a valid dual
/// bound, so a poor step costs nothing.
fn newton_polish(measures: &[f64], curves: &[Vec<usize>], p: f64, lambda: &mut [f64], load: &mut [f64]) {
    let q = 1.0 / (p - 1.0);
    for _ in 0..POLISH_STEPS {
        let active: Vec<usize> = (0..curves.len()).filter(|&i| lambda[i] > 0.0).collect();
        let k = active.len();
        if k == 0 {
            return;
        }
        let rho: Vec<f64> = load
            .iter()
            .zip(measures)
            .map(|(&g, &m)| if g > 0.0 { (g / (p * m)).powf(q) } else { 0.0 })
            .collect();
        let mut members = vec![Vec::new(); load.len()];
        for (a, &i) in active.iter().enumerate() {
            for &e in &curves[i] {
                members[e].push(a);
            }
        }
        let mut jac = DMatrix::<f64>::zeros(k, k);
        for (e, on) in members.iter().enumerate() {
            if load[e] > 0.0 {
                let slope = q * rho[e] / load[e];
                for &a in on {
                    for &b in on {
                        jac[(a, b)] += slope;
                    }
                }
            }
        }
        for a in 0..k {
            jac[(a, a)] += 1e-12 * (1.0 + jac[(a, a)]);
        }
        let rhs = DVector::from_iterator(k, active.iter().map(|&i| 1.0 - curves[i].iter().map(|&e| rho[e]).sum::<f64>()));
        let Some(step) = jac.lu().solve(&rhs) else {
            return;
        };
        let mut moved = false;
        for (a, &i) in active.iter().enumerate() {
            let next = (lambda[i] + step[a]).max(0.0);
            let delta = next - lambda[i];
            if delta != 0.0 && delta.is_finite() {
                for &e in &curves[i] {
                    load[e] += delta;
                }
                lambda[i] = next;
                moved = true;
            }
        }
        if !moved {
            return;
        }
    }
}

fn modulus_lp(problem: &ModulusProblem) -> Result<ModulusResult> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = problem.measures.iter().map(|&m| lp.add_var(m, (0.0, f64::INFINITY))).collect();
    for c in &problem.curves {
        let terms: Vec<_> = c.iter().map(|&e| (vars[e], problem.lengths[e])).collect();
        lp.add_constraint(&terms[..], ComparisonOp::Ge, 1.0);
    }
    let sol = lp
        .solve()
        .map_err(|e| CarpetError::CheckFailed(format!("linear program failed: {e}")))?;
    let density: Vec<f64> = vars.iter().map(|&v| *sol.var_value(v)).collect();
    Ok(ModulusResult {
        value: sol.objective(),
        density,
        lower_bound: sol.objective(),
        sweeps: 0,
    })
}

/// Exact 2-modulus by enumerating active constraint sets, for small
/// problems with rational data. Serves as the oracle for [`modulus`].
pub fn modulus_p2_exact(lengths: &[Rational], measures: &[Rational], curves: &[Vec<usize>]) -> Result<Rational> {
    if curves.len() > 20 {
        return Err(CarpetError::InvalidParameter("oracle limited to 20 curves".to_string()));
    }
    if curves.is_empty() {
        return Ok(Rational::zero());
    }
    let n = lengths.len();
    let two = Rational::from_integer(2.into());
    let mut best: Option<Rational> = None;
    for mask in 1u32..(1 << curves.len()) {
        let active: Vec<usize> = (0..curves.len()).filter(|i| mask >> i & 1 == 1).collect();
        // Gram matrix of the active constraints in the metric 1 / (2 mu).
        let k = active.len();
        let mut m = vec![vec![Rational::zero(); k + 1]; k];
        for (r, &a) in active.iter().enumerate() {
            for (c, &b) in active.iter().enumerate() {
                let mut sum = Rational::zero();
                for &e in &curves[a] {
                    if curves[b].contains(&e) {
                        sum += &lengths[e] * &lengths[e] / (&two * &measures[e]);
                    }
                }
                m[r][c] = sum;
            }
            m[r][k] = Rational::from_integer(1.into());
        }
        let Some(lambda) = solve(m) else { continue };
        if lambda.iter().any(Signed::is_negative) {
            continue;
        }
        let mut rho = vec![Rational::zero(); n];
        for (j, &a) in active.iter().enumerate() {
            for &e in &curves[a] {
                rho[e] += &lambda[j] * &lengths[e] / (&two * &measures[e]);
            }
        }
        let feasible = curves.iter().all(|c| {
            let len: Rational = c.iter().map(|&e| &lengths[e] * &rho[e]).sum();
            len >= Rational::from_integer(1.into())
        });
        if !feasible {
            continue;
        }
        let value: Rational = rho.iter().zip(measures).map(|(r, m)| m * r * r).sum();
        if best.as_ref().is_none_or(|b| value < *b) {
            best = Some(value);
        }
    }
    best.ok_or_else(|| CarpetError::CheckFailed("no active set satisfies the optimality conditions".to_string()))
}

/// Gauss-Jordan elimination on an augmented matrix; `None` when singular.
fn solve(mut m: Vec<Vec<Rational>>) -> Option<Vec<Rational>> {
    let k = m.len();
    for col in 0..k {
        let pivot = (col..k).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x /= &p;
        }
        for r in 0..k {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let (src, dst) = if r < col {
                    let (a, b) = m.split_at_mut(col);
                    (&b[0], &mut a[r])
                } else {
                    let (a, b) = m.split_at_mut(r);
                    (&a[col], &mut b[0])
                };
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= &f * s;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[k].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn path_problem(copies: usize, n: usize, p: f64) -> ModulusProblem {
        ModulusProblem {
            lengths: vec![1.0; copies * n],
            measures: vec![1.0; copies * n],
            curves: (0..copies).map(|c| (c * n..(c + 1) * n).collect()).collect(),
            p,
        }
    }

    #[test]
    fn empty_family_has_zero_modulus() {
        let r = modulus(&path_problem(0, 3, 2.0)).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.density.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_path() {
        let r = modulus(&path_problem(1, 5, 2.0)).unwrap();
        assert!((r.value - 0.2).abs() < 1e-6 * 0.2);
        assert!(r.density.iter().all(|d| (d - 0.2).abs() < 1e-6));
        let exact = modulus_p2_exact(&vec![int(1); 5], &vec![int(1); 5], &[(0..5).collect()]).unwrap();
        assert_eq!(exact, ratio(1, 5));
    }

    #[test]
    fn disjoint_paths_add() {
        let r = modulus(&path_problem(2, 5, 2.0)).unwrap();
        assert!((r.value - 0.4).abs() < 1e-6 * 0.4);
    }

    #[test]
    fn other_exponents_on_a_path() {
        // Constant density 1/n is optimal, with energy n^{1-p}.
        for p in [1.0, 1.5, 3.0] {
            let r = modulus(&path_problem(1, 4, p)).unwrap();
            let want = 4f64.powf(1.0 - p);
            assert!((r.value - want).abs() < 1e-6 * want, "p = {p}: {}", r.value);
        }
    }

    #[test]
    fn zero_length_curve_is_an_error() {
        let mut pb = path_problem(1, 2, 2.0);
        pb.curves.push(vec![]);
        assert!(modulus(&pb).is_err());
        pb.curves.pop();
        pb.p = 0.5;
        assert!(modulus(&pb).is_err());
    }

    #[test]
    fn overlapping_curves_match_the_oracle() {
        // Two curves sharing one edge: {0, 1} and {1, 2}.
        let curves = vec![vec![0, 1], vec![1, 2]];
        let exact = modulus_p2_exact(&vec![int(1); 3], &vec![int(1); 3], &curves).unwrap();
        // By symmetry rho = (a, b, a) with a + b = 1; minimizing 2a^2 + b^2 gives a = 1/3.
        assert_eq!(exact, ratio(2, 3));
        let r = modulus(&ModulusProblem {
            lengths: vec![1.0; 3],
            measures: vec![1.0; 3],
            curves,
            p: 2.0,
        })
        .unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-6);
    }
}
