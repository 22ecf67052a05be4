use num_traits::{FromPrimitive, One, Signed};

use super::scales::UniformityProfile;
use crate::error::{CarpetError, Result};
use crate::rational::{to_f64, Rational};

/// Geometric subsamples per band besides the breakpoints.
pub const SUBSAMPLES: usize = 8;

/// Finite-range surrogate of `liminf_{r -> 0} h(t r) / h(r)` for the step
/// profile `h(r) = h_k` on `[s_k, s_{k-1})`: the minimum over all
/// breakpoints and [`SUBSAMPLES`] geometric subsamples per band, skipping
/// radii whose `t r` leaves the table. Exact in rational arithmetic.
pub fn h_inf_bar(profile: &UniformityProfile, t: &Rational) -> Result<Rational> {
    if !(t.is_positive() && *t <= Rational::one()) {
        return Err(CarpetError::InvalidParameter(format!("t = {t} must lie in (0, 1]")));
    }
    profile.validate()?;
    let rows = &profile.rows;
    let bottom = &rows[rows.len() - 1].s;
    let mut best: Option<Rational> = None;
    for k in 0..rows.len() - 1 {
        let (hi, lo) = (&rows[k].s, &rows[k + 1].s);
        let mut radii = vec![lo.clone()];
        let ratio = to_f64(&(hi / lo));
        for j in 1..=SUBSAMPLES {
            let f = ratio.powf(j as f64 / (SUBSAMPLES + 1) as f64);
            if let Some(f) = Rational::from_f64(f) {
                let r = lo * f;
                if &r > lo && &r < hi {
                    radii.push(r);
                }
            }
        }
        for r in radii {
            let tr = &r * t;
            if &tr < bottom {
                continue;
            }
            let (Some(a), Some(b)) = (profile.gauge(&tr), profile.gauge(&r)) else {
                continue;
            };
            let value = a / b;
            if best.as_ref().is_none_or(|v| value < *v) {
                best = Some(value);
            }
        }
    }
    best.ok_or_else(|| CarpetError::InvalidParameter(format!("t = {t} sends every radius off the table")))
}

/// A gauge function given on `[lo, hi]`.
pub trait Gauge {
    fn value(&self, r: f64) -> f64;
    fn range(&self) -> (f64, f64);
}

/// `h(r) = c r^q`.
#[derive(Debug, Clone, Copy)]
pub struct PowerLaw {
    pub q: f64,
    pub c: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Gauge for PowerLaw {
    fn value(&self, r: f64) -> f64 {
        self.c * r.powf(self.q)
    }

    fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// [`h_inf_bar`] for a continuous gauge, sampled geometrically.
pub fn h_inf_bar_gauge(g: &impl Gauge, t: f64, samples: usize) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(CarpetError::InvalidParameter(format!("t = {t} must lie in (0, 1]")));
    }
    let (lo, hi) = g.range();
    let mut best = f64::INFINITY;
    for i in 0..samples.max(2) {
        let r = lo * (hi / lo).powf(i as f64 / (samples.max(2) - 1) as f64);
        if t * r >= lo {
            best = best.min(g.value(t * r) / g.value(r));
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(CarpetError::InvalidParameter(format!("t = {t} sends every radius off the range")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::substitution::Rule;

    #[test]
    fn basic_profile_steps() {
        let p = UniformityProfile::from_rules(&[Rule::Basic; 4]);
        assert_eq!(h_inf_bar(&p, &ratio(1, 32)).unwrap(), ratio(1, 64));
        assert_eq!(h_inf_bar(&p, &int(1)).unwrap(), int(1));
        assert!(h_inf_bar(&p, &int(0)).is_err());
        assert!(h_inf_bar(&p, &ratio(1, 1 << 30)).is_err());
    }

    #[test]
    fn scaling_h_leaves_the_invariant_unchanged() {
        let p = UniformityProfile::from_rules(&[Rule::Basic, Rule::C(1), Rule::S(16), Rule::WS(2)]);
        for t in [ratio(1, 2), ratio(1, 7), ratio(3, 100)] {
            let scaled = p.scaled(&ratio(17, 3));
            assert_eq!(h_inf_bar(&p, &t).unwrap(), h_inf_bar(&scaled, &t).unwrap());
        }
    }

    #[test]
    fn power_law_gives_t_to_the_q() {
        let g = PowerLaw {
            q: 1.2,
            c: 3.0,
            lo: 1e-9,
            hi: 1.0,
        };
        for t in [0.5, 0.1, 1.0] {
            assert!((h_inf_bar_gauge(&g, t, 200).unwrap() - t.powf(1.2)).abs() < 1e-9);
        }
    }
}
