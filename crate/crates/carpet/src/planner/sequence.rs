use serde::{Deserialize, Serialize};

use crate::error::{CarpetError, Result};
use crate::substitution::Rule;

/// Rule frequencies, parameters and the resulting rule sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionPlan {
    pub n0: u64,
    pub n1: u64,
    pub n2: u64,
    pub alpha: [f64; 3],
    /// Symbols: 0 for `S_{n0}`, 1 for `C_{n1}`, 2 for `WS_{n2}`.
    pub symbols: Vec<u8>,
}

impl ConstructionPlan {
    pub fn rules(&self) -> Result<Vec<Rule>> {
        self.symbols
            .iter()
            .map(|&a| {
                match a {
                    0 => Rule::S(self.n0),
                    1 => Rule::C(self.n1),
                    2 => Rule::WS(self.n2),
                    _ => return Err(CarpetError::InvalidParameter(format!("unknown symbol {a}"))),
                }
                .validate()
            })
            .collect()
    }
}

/// The first `n` symbols of a sequence whose symbol counts stay within one
/// of `alpha[j] * i` for every prefix length `i`: each step emits the
/// symbol with the largest deficit, ties going to the smaller symbol.
pub fn balanced_sequence(alpha: &[f64], n: usize) -> Result<Vec<u8>> {
    let sum: f64 = alpha.iter().sum();
    if alpha.is_empty() || alpha.iter().any(|&a| !(a >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(CarpetError::InvalidParameter(format!("frequencies {alpha:?} must be nonnegative and sum to 1")));
    }
    let mut counts = vec![0usize; alpha.len()];
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let j = (0..alpha.len())
            .max_by(|&a, &b| {
                let da = alpha[a] * i as f64 - counts[a] as f64;
                let db = alpha[b] * i as f64 - counts[b] as f64;
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("nonempty");
        counts[j] += 1;
        out.push(j as u8);
    }
    Ok(out)
}

/// Each symbol repeated `times` times, in order.
pub fn repeat_sequence<T: Clone>(a: &[T], times: usize) -> Vec<T> {
    a.iter().flat_map(|x| std::iter::repeat_n(x.clone(), times)).collect()
}

/// Largest deviation `|#{i <= n : a_i = j} - alpha_j n|` over prefixes.
pub fn discrepancy(seq: &[u8], alpha: &[f64]) -> f64 {
    let mut counts = vec![0usize; alpha.len()];
    let mut worst = 0.0f64;
    for (i, &a) in seq.iter().enumerate() {
        counts[a as usize] += 1;
        for j in 0..alpha.len() {
            worst = worst.max((counts[j] as f64 - alpha[j] * (i + 1) as f64).abs());
        }
    }
    worst
}
