use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CarpetError, Result};

/// The four substitution rules.
///
/// Each rule takes `copies()` copies of the current level, subdivides every
/// edge into `subdivision()` pieces and refines the drawing lattice by
/// `lattice_ratio()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// Two copies, subdivision 32, lattice ratio 16.
    Basic,
    /// Plain subdivision by `N >= 16`.
    S(u64),
    /// Subdivision by `8(N + 2N^2)` drawn wiggled on a lattice refined by `8N`, `N >= 2`.
    WS(u64),
    /// `2N + 1` copies, subdivision `96N + 26`, lattice ratio `64N`, `N >= 1`.
    C(u64),
}

impl Rule {
    /// Checks the parameter bounds that keep the lattice ratio at least 16.
    pub fn validate(self) -> Result<Self> {
        let ok = match self {
            Rule::Basic => true,
            Rule::S(n) => n >= 16,
            Rule::WS(n) => n >= 2,
            Rule::C(n) => n >= 1,
        };
        if ok && self.subdivision_checked().is_some() {
            Ok(self)
        } else {
            Err(CarpetError::InvalidParameter(format!(
                "rule {self} violates the lattice decay bound or overflows"
            )))
        }
    }

    /// Number of copies `K`.
    pub fn copies(self) -> u64 {
        match self {
            Rule::Basic => 2,
            Rule::S(_) | Rule::WS(_) => 1,
            Rule::C(n) => 2 * n + 1,
        }
    }

    /// Number of child edges per parent edge and copy.
    pub fn subdivision(self) -> u64 {
        self.subdivision_checked().expect("rule parameters validated")
    }

    fn subdivision_checked(self) -> Option<u64> {
        match self {
            Rule::Basic => Some(32),
            Rule::S(n) => Some(n),
            Rule::WS(n) => n.checked_mul(n)?.checked_mul(2)?.checked_add(n)?.checked_mul(8),
            Rule::C(n) => n.checked_mul(96)?.checked_add(26),
        }
    }

    /// Ratio `l_k / l_{k+1}` of lattice cells.
    pub fn lattice_ratio(self) -> u64 {
        match self {
            Rule::Basic => 16,
            Rule::S(n) => n,
            Rule::WS(n) => 8 * n,
            Rule::C(n) => 64 * n,
        }
    }

    /// Largest size of a class of the quotient identification.
    pub fn max_quotient_class(self) -> usize {
        match self {
            Rule::Basic | Rule::C(_) => 2,
            Rule::S(_) | Rule::WS(_) => 1,
        }
    }

    /// Per-step corridor constant in units of the child lattice cell.
    pub fn corridor_constant(self) -> u64 {
        match self {
            Rule::Basic => 5,
            Rule::S(_) => 0,
            Rule::WS(n) => crate::embedding::paths::ws_amplitude(n),
            Rule::C(n) => 4 * n + 5,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Basic => write!(f, "basic"),
            Rule::S(n) => write!(f, "S{n}"),
            Rule::WS(n) => write!(f, "WS{n}"),
            Rule::C(n) => write!(f, "C{n}"),
        }
    }
}

impl FromStr for Rule {
    type Err = CarpetError;

    /// Parses `basic`, `S<N>`, `WS<N>` or `C<N>` (case-insensitive) and checks bounds.
    fn from_str(s: &str) -> Result<Rule> {
        let t = s.trim().to_ascii_uppercase();
        let num = |rest: &str| {
            rest.parse::<u64>()
                .map_err(|_| CarpetError::InvalidParameter(format!("bad rule parameter in {s:?}")))
        };
        let rule = if t == "BASIC" || t == "B" {
            Rule::Basic
        } else if let Some(rest) = t.strip_prefix("WS") {
            Rule::WS(num(rest)?)
        } else if let Some(rest) = t.strip_prefix('S') {
            Rule::S(num(rest)?)
        } else if let Some(rest) = t.strip_prefix('C') {
            Rule::C(num(rest)?)
        } else {
            return Err(CarpetError::InvalidParameter(format!("unknown rule {s:?}")));
        };
        rule.validate()
    }
}

/// Parses a comma-separated rule list such as `basic,basic` or `S16,C1`.
pub fn parse_rule_seq(s: &str) -> Result<Vec<Rule>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}
