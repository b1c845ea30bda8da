//! The imported Waldschmidt-constant facts. Every leaf of every derivation
//! comes from this list and nowhere else.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{BoundFact, Derivation};
use crate::exact::ratio;
use crate::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AxiomSource {
    /// `k^N` points in grid position have constant exactly `k`.
    ExactGrid { k: u64 },
    /// `N+1` coordinate points have constant `(N+1)/N`.
    Simplex,
    /// `N+2` general points have constant at least `(N+2)/N`.
    NPlusTwo,
    /// `N+3` general points have constant at least `(N+2)/N`.
    NPlusThree,
    /// Known values for 7, 14 and 21 points in `P^3`.
    P3Table,
    /// Eight points in `P^4`.
    P4Eight,
}

impl AxiomSource {
    pub fn citation(&self) -> &'static str {
        match self {
            AxiomSource::ExactGrid { .. } => "exact value on k^N points",
            AxiomSource::Simplex => "coordinate points of P^N",
            AxiomSource::NPlusTwo => "N+2 general points",
            AxiomSource::NPlusThree => "N+3 general points",
            AxiomSource::P3Table => "P^3 values at 7, 14, 21 points",
            AxiomSource::P4Eight => "P^4 value at 8 points",
        }
    }
}

/// One axiom instance: `ahat(P^n, s) >= bound`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AxiomTag {
    pub source: AxiomSource,
    pub n: u32,
    pub s: u64,
    #[serde(with = "crate::exact::ratio_string")]
    pub bound: Rat,
}

impl fmt::Display for AxiomTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (N={}, s={})", self.source.citation(), self.n, self.s)
    }
}

/// Every axiom instance in `P^n` at `s' <= s`, in a fixed order.
pub fn axiom_tags(n: u32, s: u64) -> Vec<AxiomTag> {
    let mut out = Vec::new();
    let nn = i64::from(n);
    let mut push = |source, at: u64, bound: Rat| {
        if at <= s {
            out.push(AxiomTag { source, n, s: at, bound });
        }
    };
    let mut k: u64 = 1;
    while let Some(grid) = k.checked_pow(n).filter(|g| *g <= s) {
        push(AxiomSource::ExactGrid { k }, grid, ratio(k as i64, 1));
        k += 1;
    }
    let n64 = u64::from(n);
    push(AxiomSource::Simplex, n64 + 1, ratio(nn + 1, nn));
    push(AxiomSource::NPlusTwo, n64 + 2, ratio(nn + 2, nn));
    push(AxiomSource::NPlusThree, n64 + 3, ratio(nn + 2, nn));
    match n {
        3 => {
            push(AxiomSource::P3Table, 7, ratio(28, 15));
            push(AxiomSource::P3Table, 14, ratio(7, 3));
            push(AxiomSource::P3Table, 21, ratio(8, 3));
        }
        4 => push(AxiomSource::P4Eight, 8, ratio(8, 5)),
        _ => {}
    }
    out
}

pub fn kb_axioms(n: u32, s: u64) -> Vec<Arc<BoundFact>> {
    axiom_tags(n, s)
        .into_iter()
        .map(|tag| BoundFact::build(tag.n, tag.s, tag.bound.clone(), Derivation::Axiom(tag)))
        .collect()
}

pub fn is_axiom(tag: &AxiomTag) -> bool {
    axiom_tags(tag.n, tag.s).contains(tag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has(n: u32, s: u64, at: u64, bound: Rat) -> bool {
        kb_axioms(n, s).iter().any(|f| f.s == at && f.bound == bound)
    }

    #[test]
    fn listed_instances() {
        assert!(has(3, 14, 14, ratio(7, 3)));
        assert!(has(5, 8, 8, ratio(7, 5)));
        assert!(has(4, 16, 16, ratio(2, 1)));
        assert!(has(3, 7, 7, ratio(28, 15)));
        assert!(has(4, 8, 8, ratio(8, 5)));
        assert!(!has(4, 7, 8, ratio(8, 5)));
        assert!(kb_axioms(6, 1).iter().all(|f| f.bound == ratio(1, 1)));
    }

    #[test]
    fn membership() {
        let tag = AxiomTag { source: AxiomSource::P3Table, n: 3, s: 14, bound: ratio(7, 3) };
        assert!(is_axiom(&tag));
        assert!(!is_axiom(&AxiomTag { bound: ratio(5, 2), ..tag.clone() }));
        assert!(!is_axiom(&AxiomTag { n: 4, ..tag }));
    }
}
