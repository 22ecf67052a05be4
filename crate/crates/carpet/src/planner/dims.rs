use serde::Serialize;

use super::scales::UniformityProfile;
use crate::error::{CarpetError, Result};
use crate::rational::{exact_log_ratio, ln, Rational};
use crate::substitution::Rule;

/// Residual tolerance for the exponent system.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Conformal dimension `q`, snowflake exponent `alpha` and image dimension
/// `q_prime = q / alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dims {
    pub q: f64,
    pub alpha: f64,
    pub q_prime: f64,
}

/// Exact dimensions of a rule repeated forever, when the logarithms are
/// commensurable: `q = log(K M) / log M`, `alpha = log(lattice ratio) / log M`.
pub fn exact_rule_dims(rule: Rule) -> Option<(Rational, Rational, Rational)> {
    let m = rule.subdivision();
    let q = exact_log_ratio(rule.copies().checked_mul(m)?, m)?;
    let alpha = exact_log_ratio(rule.lattice_ratio(), m)?;
    let q_prime = &q / &alpha;
    Some((q, alpha, q_prime))
}

/// The three logarithms per rule family used by the closed forms.
struct Logs {
    s: [f64; 3],
    h: [f64; 3],
    l: [f64; 3],
}

fn logs(n0: u128, n1: u128, n2: u128) -> Logs {
    let f = |x: u128| (x as f64).ln();
    let c_sub = f(96 * n1 + 26);
    let ws_sub = f(8 * n2) + f(1 + 2 * n2);
    Logs {
        s: [f(n0), c_sub, ws_sub],
        h: [f(n0), c_sub + f(2 * n1 + 1), ws_sub],
        l: [f(n0), f(64 * n1), f(8 * n2)],
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Closed-form dimensions for the frequencies `alpha` of `S_{n0}`, `C_{n1}`
/// and `WS_{n2}`.
pub fn closed_form_dims(n0: u128, n1: u128, n2: u128, alpha: [f64; 3]) -> Result<Dims> {
    let sum: f64 = alpha.iter().sum();
    if alpha.iter().any(|&a| !(a >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(CarpetError::InvalidParameter(format!("frequencies {alpha:?} must be nonnegative and sum to 1")));
    }
    if n0 < 2 || n1 < 1 || n2 < 1 {
        return Err(CarpetError::InvalidParameter("parameters out of range".to_string()));
    }
    let lg = logs(n0, n1, n2);
    let den = dot(&alpha, &lg.s);
    if den <= 0.0 {
        return Err(CarpetError::InvalidParameter("degenerate denominator".to_string()));
    }
    let q = dot(&alpha, &lg.h) / den;
    let a = dot(&alpha, &lg.l) / den;
    Ok(Dims {
        q,
        alpha: a,
        q_prime: q / a,
    })
}

/// Dimensions of a finite rule sequence: `log h_k / log s_k` and `log l_k / log s_k`.
pub fn sequence_dims(rules: &[Rule]) -> Result<Dims> {
    let (mut s, mut h, mut l) = (0.0, 0.0, 0.0);
    for r in rules {
        s += (r.subdivision() as f64).ln();
        h += (r.subdivision() as f64).ln() + (r.copies() as f64).ln();
        l += (r.lattice_ratio() as f64).ln();
    }
    if s <= 0.0 {
        return Err(CarpetError::InvalidParameter("empty sequence".to_string()));
    }
    Ok(Dims {
        q: h / s,
        alpha: l / s,
        q_prime: h / l,
    })
}

/// Least-squares slopes of `log h` and `log l` against `log s`.
pub fn empirical_dims(profile: &UniformityProfile) -> Result<(f64, f64)> {
    if profile.rows.len() < 3 {
        return Err(CarpetError::InvalidParameter("need at least three profile rows".to_string()));
    }
    let x: Vec<f64> = profile.rows.iter().map(|r| ln(&r.s)).collect();
    let slope = |y: Vec<f64>| {
        let n = x.len() as f64;
        let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        sxy / sxx
    };
    let q = slope(profile.rows.iter().map(|r| ln(&r.h)).collect());
    let a = slope(profile.rows.iter().map(|r| ln(&r.l)).collect());
    Ok((q, a))
}

/// Coefficients of the two dimension equations, each linear in the frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentSystem {
    /// Coefficients `(A_Q, B_Q, C_Q)` of the conformal-dimension equation.
    pub conformal: [f64; 3],
    /// Coefficients `(A_Q', B_Q', C_Q')` of the image-dimension equation.
    pub image: [f64; 3],
}

impl ExponentSystem {
    pub fn new(q: f64, q_prime: f64, n0: u128, n1: u128, n2: u128) -> Self {
        let lg = logs(n0, n1, n2);
        let conformal = [0, 1, 2].map(|i| lg.h[i] - q * lg.s[i]);
        let image = [0, 1, 2].map(|i| lg.h[i] - q_prime * lg.l[i]);
        ExponentSystem { conformal, image }
    }

    /// Residuals of the normalization and the two dimension equations.
    pub fn residuals(&self, alpha: [f64; 3]) -> [f64; 3] {
        [
            alpha.iter().sum::<f64>() - 1.0,
            dot(&alpha, &self.conformal),
            dot(&alpha, &self.image),
        ]
    }

    /// Sign conditions under which a nonnegative solution exists; the
    /// first violated one is named.
    pub fn check_signs(&self, q: f64, q_prime: f64, n1: u128) -> Result<()> {
        let [_, b_q, _] = self.conformal;
        let [_, b_qp, c_qp] = self.image;
        let named = [
            (c_qp > 0.0, "C_Q' > 0"),
            (b_qp > 0.0, "B_Q' > 0"),
            (b_q > 0.0, "B_Q > 0"),
            (
                q * ((96 * n1 + 26) as f64).ln() < q_prime * ((64 * n1) as f64).ln(),
                "Q log(96 N1 + 26) < Q' log(64 N1)",
            ),
        ];
        match named.iter().find(|(ok, _)| !ok) {
            Some((_, name)) => Err(CarpetError::Infeasible(format!("sign condition {name} fails"))),
            None => Ok(()),
        }
    }

    /// Endpoints of the segment of the proof: solutions of the normalization
    /// and image equations with the middle, then the last, frequency zero.
    pub fn endpoints(&self) -> ([f64; 3], [f64; 3]) {
        let [a, b, c] = self.image;
        let minus = [-c / (a - c), 0.0, a / (a - c)];
        let plus = [-b / (a - b), a / (a - b), 0.0];
        (minus, plus)
    }
}

/// Solution of the exponent system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentSolution {
    pub alpha: [f64; 3],
    pub residuals: [f64; 3],
    /// Conformal-equation values at the two segment endpoints.
    pub bracket: (f64, f64),
    /// Position on the segment, `alpha = t A_+ + (1 - t) A_-`.
    pub t: f64,
}

/// Frequencies of `S_{n0}`, `C_{n1}`, `WS_{n2}` realizing `(q, q_prime)`.
pub fn solve_exponents(q: f64, q_prime: f64, n0: u128, n1: u128, n2: u128) -> Result<ExponentSolution> {
    if !(1.0 < q && q < q_prime && q_prime < 2.0) {
        if 1.0 < q && q == q_prime {
            return Err(CarpetError::Infeasible(
                "Q = Q' forces the C and WS frequencies to zero and hence Q = 1".to_string(),
            ));
        }
        return Err(CarpetError::InvalidParameter(format!("need 1 < Q < Q' < 2, got ({q}, {q_prime})")));
    }
    let sys = ExponentSystem::new(q, q_prime, n0, n1, n2);
    sys.check_signs(q, q_prime, n1)?;
    let (minus, plus) = sys.endpoints();
    let f = |a: [f64; 3]| dot(&a, &sys.conformal);
    let bracket = (f(minus), f(plus));
    if !(bracket.0 < 0.0 && bracket.1 > 0.0) {
        return Err(CarpetError::Infeasible(format!("no sign change on the segment: {bracket:?}")));
    }
    let along = |t: f64| [0, 1, 2].map(|i| t * plus[i] + (1.0 - t) * minus[i]);
    // f is affine along the segment, so its root is explicit; a bisection
    // polish guards against cancellation.
    let mut t = bracket.0 / (bracket.0 - bracket.1);
    if !(0.0..=1.0).contains(&t) || f(along(t)).abs() > RESIDUAL_TOLERANCE {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(along(mid)) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        t = 0.5 * (lo + hi);
    }
    let alpha = along(t).map(|a| a.max(0.0));
    Ok(ExponentSolution {
        alpha,
        residuals: sys.residuals(alpha),
        bracket,
        t,
    })
}

/// Smallest `S` parameter allowed by the lattice decay bound.
pub const MIN_N0: u128 = 16;
/// Largest parameter the search tries.
pub const SEARCH_CAP: u128 = 1 << 100;

/// Smallest parameters (lexicographically) passing the sign conditions,
/// with the frequencies that realize `(q, q_prime)`.
pub fn choose_parameters(q: f64, q_prime: f64) -> Result<(u128, u128, u128, ExponentSolution)> {
    if !(1.0 < q && q < q_prime && q_prime < 2.0) {
        return Err(CarpetError::InvalidParameter(format!("need 1 < Q < Q' < 2, got ({q}, {q_prime})")));
    }
    let n0 = MIN_N0;
    // The C conditions involve only N1 and the WS condition only N2.
    let n1 = smallest(1, |n1| {
        let sys = ExponentSystem::new(q, q_prime, n0, n1, 2);
        sys.image[1] > 0.0
            && sys.conformal[1] > 0.0
            && q * ((96 * n1 + 26) as f64).ln() < q_prime * ((64 * n1) as f64).ln()
    })?;
    let n2 = smallest(2, |n2| ExponentSystem::new(q, q_prime, n0, n1, n2).image[2] > 0.0)?;
    let sol = solve_exponents(q, q_prime, n0, n1, n2)?;
    Ok((n0, n1, n2, sol))
}

/// Smallest `n >= start` satisfying `pred`. Each condition is a log-linear
/// combination whose derivative changes sign at most once, so it is
/// monotone past a small turning point: scan linearly first, then gallop
/// and bisect.
fn smallest(start: u128, pred: impl Fn(u128) -> bool) -> Result<u128> {
    const SCAN: u128 = 1 << 16;
    for n in start..SCAN {
        if pred(n) {
            return Ok(n);
        }
    }
    let mut hi = SCAN;
    while !pred(hi) {
        hi *= 2;
        if hi > SEARCH_CAP {
            return Err(CarpetError::Infeasible(format!("no parameter below the search cap {SEARCH_CAP}")));
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
