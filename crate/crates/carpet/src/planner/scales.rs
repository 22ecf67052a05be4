use std::io::{Read, Write};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{CarpetError, Result};
use crate::rational::{int, one, Rational};
use crate::substitution::Rule;

/// Edge length, lattice cell and measure scale after a prefix of rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelScales {
    pub s: Rational,
    pub l: Rational,
    pub h: Rational,
}

/// Scales after the first `k` rules of `rules`.
pub fn level_scales(rules: &[Rule], k: usize) -> Result<LevelScales> {
    if k > rules.len() {
        return Err(CarpetError::InvalidParameter(format!(
            "level {k} needs {k} rules, the sequence has {}",
            rules.len()
        )));
    }
    let mut out = LevelScales {
        s: one(),
        l: one(),
        h: one(),
    };
    for r in &rules[..k] {
        let m = BigInt::from(r.subdivision());
        out.s /= Rational::from_integer(m.clone());
        out.l /= Rational::from_integer(BigInt::from(r.lattice_ratio()));
        out.h /= Rational::from_integer(m * BigInt::from(r.copies()));
    }
    Ok(out)
}

/// One row of a uniformity profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileRow {
    pub k: u32,
    pub s: Rational,
    pub l: Rational,
    pub h: Rational,
}

/// Scales at every level `0..=k_max`, read as the step gauge `h(r) = h_k`
/// for `r` in `[s_k, s_{k-1})`, so that `h(s_k) = h_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformityProfile {
    pub rows: Vec<ProfileRow>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    k: u32,
    s_num: String,
    s_den: String,
    l_num: String,
    l_den: String,
    h_num: String,
    h_den: String,
}

impl UniformityProfile {
    /// Level whose step contains `r`: 0 from `s_0` up, `None` below the
    /// finest breakpoint.
    pub fn step_index(&self, r: &Rational) -> Option<usize> {
        if *r >= self.rows[0].s {
            return Some(0);
        }
        (1..self.rows.len()).find(|&k| self.rows[k].s <= *r && *r < self.rows[k - 1].s)
    }

    /// The step gauge `h(r)`.
    pub fn gauge(&self, r: &Rational) -> Option<&Rational> {
        self.step_index(r).map(|k| &self.rows[k].h)
    }

    pub fn from_rules(rules: &[Rule]) -> Self {
        let mut rows = Vec::with_capacity(rules.len() + 1);
        let (mut s, mut l, mut h) = (one(), one(), one());
        rows.push(ProfileRow {
            k: 0,
            s: s.clone(),
            l: l.clone(),
            h: h.clone(),
        });
        for (i, r) in rules.iter().enumerate() {
            s /= int(r.subdivision() as i64);
            l /= int(r.lattice_ratio() as i64);
            h /= int(r.subdivision() as i64) * int(r.copies() as i64);
            rows.push(ProfileRow {
                k: i as u32 + 1,
                s: s.clone(),
                l: l.clone(),
                h: h.clone(),
            });
        }
        UniformityProfile { rows }
    }

    /// Checks that all three columns strictly decrease.
    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(CarpetError::Format("empty profile".to_string()));
        }
        for w in self.rows.windows(2) {
            if !(w[1].s < w[0].s && w[1].l < w[0].l && w[1].h < w[0].h) {
                return Err(CarpetError::Format(format!("profile does not decrease at row {}", w[1].k)));
            }
        }
        Ok(())
    }

    /// Scales every `h` by `factor`.
    pub fn scaled(&self, factor: &Rational) -> Self {
        UniformityProfile {
            rows: self
                .rows
                .iter()
                .map(|r| ProfileRow {
                    h: &r.h * factor,
                    ..r.clone()
                })
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(CsvRow {
                k: r.k,
                s_num: r.s.numer().to_string(),
                s_den: r.s.denom().to_string(),
                l_num: r.l.numer().to_string(),
                l_den: r.l.denom().to_string(),
                h_num: r.h.numer().to_string(),
                h_den: r.h.denom().to_string(),
            })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rows = Vec::new();
        for rec in csv::Reader::from_reader(r).deserialize() {
            let rec: CsvRow = rec?;
            let q = |n: &str, d: &str| -> Result<Rational> {
                let n: BigInt = n.trim().parse().map_err(|_| CarpetError::Format(format!("bad integer {n}")))?;
                let d: BigInt = d.trim().parse().map_err(|_| CarpetError::Format(format!("bad integer {d}")))?;
                if d == BigInt::from(0) {
                    return Err(CarpetError::Format("zero denominator".to_string()));
                }
                Ok(Rational::new(n, d))
            };
            rows.push(ProfileRow {
                k: rec.k,
                s: q(&rec.s_num, &rec.s_den)?,
                l: q(&rec.l_num, &rec.l_den)?,
                h: q(&rec.h_num, &rec.h_den)?,
            });
        }
        let p = UniformityProfile { rows };
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn basic_scales() {
        let rules = vec![Rule::Basic; 5];
        for k in 0..=5 {
            let sc = level_scales(&rules, k).unwrap();
            let p = |b: i64| Rational::new(1.into(), BigInt::from(b).pow(k as u32));
            assert_eq!((sc.s, sc.l, sc.h), (p(32), p(16), p(64)));
        }
        assert!(level_scales(&rules, 6).is_err());
    }

    #[test]
    fn single_cn_step() {
        let sc = level_scales(&[Rule::C(1)], 1).unwrap();
        assert_eq!((sc.s, sc.l, sc.h), (ratio(1, 122), ratio(1, 64), ratio(1, 366)));
        assert_eq!(level_scales(&[], 0).unwrap().s, one());
    }

    #[test]
    fn csv_round_trip() {
        let p = UniformityProfile::from_rules(&[Rule::Basic, Rule::C(2), Rule::WS(3)]);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,s_num,s_den,l_num,l_den,h_num,h_den\n0,1,1,1,1,1,1\n1,1,32,1,16,1,64\n"));
        assert_eq!(UniformityProfile::read_csv(&buf[..]).unwrap(), p);
    }

    #[test]
    fn non_decreasing_profile_rejected() {
        let csv = "k,s_num,s_den,l_num,l_den,h_num,h_den\n0,1,1,1,1,1,1\n1,1,1,1,2,1,2\n";
        assert!(UniformityProfile::read_csv(csv.as_bytes()).is_err());
    }
}
