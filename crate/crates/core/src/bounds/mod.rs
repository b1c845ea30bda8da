//! Lower bounds on Waldschmidt constants of generic points, each carrying a
//! derivation tree that re-validates down to the axiom list.

mod axioms;
mod derive;

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cremona::{
    self, homogeneous_pattern, prove_empty, CremonaError, EmptinessCertificate, ProofOutcome, SystemSpec,
};
use crate::exact::{binom, format_ratio, Scalar};
use crate::{LinExpr, Rat};

pub use axioms::{axiom_tags, is_axiom, kb_axioms, AxiomSource, AxiomTag};
pub use derive::{derive_bound, Deriver, Strategy, DEFAULT_SEARCH_DEPTH};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("cannot lift from {from} points down to {to}")]
    LiftDown { from: u64, to: u64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: u32, got: u32 },
    #[error("decomposition: {0}")]
    Decompose(#[from] DecomposeError),
    #[error("weakened bound {new} exceeds {old}")]
    Strengthen { new: String, old: String },
    #[error("bound must be positive")]
    NonPositive,
    #[error("mixed system not proven empty within {0} steps")]
    NotProven(usize),
    #[error("point count overflow")]
    Overflow,
    #[error("invalid derivation at N={n}, s={s}: {reason}")]
    Invalid { n: u32, s: u64, reason: String },
    #[error(transparent)]
    Cremona(#[from] CremonaError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("k={k} needs {need} inputs, got {got}")]
    Arity { k: u32, need: usize, got: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("precondition fails: {0}")]
    Precondition(String),
}

/// `ahat(P^n, s) >= bound` for `s` generic points.
#[derive(Debug, Clone)]
pub struct BoundFact {
    pub n: u32,
    pub s: u64,
    pub bound: Rat,
    pub derivation: Derivation,
}

#[derive(Debug, Clone)]
pub enum Derivation {
    Axiom(AxiomTag),
    MonotoneLift { from: Arc<BoundFact> },
    DoubleSplit { from: Arc<BoundFact> },
    /// `a` double points and `b` simple points stand in for `2^N a + b`
    /// simple ones; the mixed bound comes from `cert`.
    Clump { a: u64, b: u64, cert: Arc<EmptinessCertificate> },
    /// `s >= C(N+c, N)` gives `(N+c+1)/N`.
    Chudnovsky { c: u32 },
    Decompose { k: u32, parts: Vec<Arc<BoundFact>> },
    Weaken { from: Arc<BoundFact> },
    FromEmpty { cert: Arc<EmptinessCertificate> },
}

impl Derivation {
    pub fn rule(&self) -> &'static str {
        match self {
            Derivation::Axiom(_) => "axiom",
            Derivation::MonotoneLift { .. } => "monotone_lift",
            Derivation::DoubleSplit { .. } => "double_split",
            Derivation::Clump { .. } => "clump",
            Derivation::Chudnovsky { .. } => "chudnovsky",
            Derivation::Decompose { .. } => "decompose",
            Derivation::Weaken { .. } => "weaken",
            Derivation::FromEmpty { .. } => "bound_from_empty",
        }
    }
}

impl BoundFact {
    pub(crate) fn build(n: u32, s: u64, bound: Rat, derivation: Derivation) -> Arc<BoundFact> {
        Arc::new(BoundFact { n, s, bound, derivation })
    }

    /// Short description of how the bound was obtained, skipping lifts.
    pub fn route(&self) -> String {
        match &self.derivation {
            Derivation::MonotoneLift { from } => from.route(),
            Derivation::Axiom(tag) => format!("axiom: {} at s={}", tag.source.citation(), tag.s),
            Derivation::DoubleSplit { from } => format!("double split of s={} ({})", from.s, format_ratio(&from.bound)),
            Derivation::Clump { a, b, .. } => format!("clump a={a} b={b} + cremona"),
            Derivation::Chudnovsky { c } => format!("chudnovsky-type c={c}"),
            Derivation::Decompose { k, parts } => {
                let rs: Vec<String> = parts.iter().map(|p| p.s.to_string()).collect();
                format!("decompose k={k} over P^{} r=({})", self.n - 1, rs.join(","))
            }
            Derivation::Weaken { from } => from.route(),
            Derivation::FromEmpty { cert } => {
                let glues = count_glues(cert);
                if glues > 0 {
                    format!("cremona + {glues} glue(s) at s={}", self.s)
                } else {
                    format!("cremona at s={}", self.s)
                }
            }
        }
    }

    /// Point count of the landmark fact this one was lifted from.
    pub fn source_s(&self) -> u64 {
        match &self.derivation {
            Derivation::MonotoneLift { from } => from.source_s(),
            _ => self.s,
        }
    }
}

fn count_glues(cert: &EmptinessCertificate) -> usize {
    match cert.steps.as_slice() {
        [cremona::Step::Glue { right, .. }] => 1 + count_glues(right),
        _ => 0,
    }
}

fn pow2(n: u32) -> Result<u64, BoundError> {
    1u64.checked_shl(n).ok_or(BoundError::Overflow)
}

pub fn monotone_lift(fact: &Arc<BoundFact>, target: u64) -> Result<Arc<BoundFact>, BoundError> {
    if target < fact.s {
        return Err(BoundError::LiftDown { from: fact.s, to: target });
    }
    if target == fact.s {
        return Ok(fact.clone());
    }
    Ok(BoundFact::build(fact.n, target, fact.bound.clone(), Derivation::MonotoneLift { from: fact.clone() }))
}

/// `ahat(P^N, 2^N q) >= 2 ahat(P^N, q)`.
pub fn double_points_split(fact: &Arc<BoundFact>) -> Result<Arc<BoundFact>, BoundError> {
    let s = pow2(fact.n)?.checked_mul(fact.s).ok_or(BoundError::Overflow)?;
    let bound = &fact.bound * Rat::from_integer(BigInt::from(2));
    Ok(BoundFact::build(fact.n, s, bound, Derivation::DoubleSplit { from: fact.clone() }))
}

/// Bounding `2^N a + b` simple points through `a` double and `b` simple ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClumpObligation {
    pub n: u32,
    pub a: u64,
    pub b: u64,
}

pub fn clump(n: u32, a: u64, b: u64) -> ClumpObligation {
    ClumpObligation { n, a, b }
}

impl ClumpObligation {
    pub fn s(&self) -> Result<u64, BoundError> {
        pow2(self.n)?
            .checked_mul(self.a)
            .and_then(|x| x.checked_add(self.b))
            .ok_or(BoundError::Overflow)
    }

    /// `I((2q m)^a, (q m)^b)` in degree `p m - 1`.
    pub fn system(&self, p: &BigInt, q: &BigInt) -> Result<SystemSpec, BoundError> {
        let count = |c: u64| u32::try_from(c).map_err(|_| BoundError::Overflow);
        let mut mults = Vec::new();
        if self.a > 0 {
            mults.push((LinExpr::new(q * 2, BigInt::zero()), count(self.a)?));
        }
        if self.b > 0 {
            mults.push((LinExpr::new(q.clone(), BigInt::zero()), count(self.b)?));
        }
        Ok(SystemSpec::new(self.n, LinExpr::new(p.clone(), -BigInt::one()), mults)?)
    }

    /// Tries to prove the mixed system empty, giving `ahat >= p/q`.
    pub fn discharge(&self, p: &BigInt, q: &BigInt, max_steps: usize) -> Result<Arc<BoundFact>, BoundError> {
        if !p.is_positive() || !q.is_positive() {
            return Err(BoundError::NonPositive);
        }
        let sys = self.system(p, q)?;
        match prove_empty(&sys, max_steps)? {
            ProofOutcome::Proven(cert) => Ok(BoundFact::build(
                self.n,
                self.s()?,
                Rat::new(p.clone(), q.clone()),
                Derivation::Clump { a: self.a, b: self.b, cert: Arc::new(cert) },
            )),
            ProofOutcome::NotProven { .. } => Err(BoundError::NotProven(max_steps)),
        }
    }

    /// Recovers `(p, q)` when `sys` is exactly this obligation's system.
    pub fn read_scale(&self, sys: &SystemSpec) -> Option<(BigInt, BigInt)> {
        let q = if self.b > 0 {
            sys.mults.last()?.0.slope.clone()
        } else {
            let double = &sys.mults.first()?.0.slope;
            if double.is_odd() {
                return None;
            }
            double / 2
        };
        let p = sys.degree.slope.clone();
        (self.system(&p, &q).ok()? == *sys).then_some((p, q))
    }
}

/// Largest `c >= 2` with `s >= C(N+c, N)`, if any.
pub fn chudnovsky_c(n: u32, s: u64) -> Option<u32> {
    let s = BigInt::from(s);
    let mut best = None;
    let mut c = 2u32;
    while binom(i64::from(n + c), i64::from(n)) <= s {
        best = Some(c);
        c += 1;
    }
    best
}

pub fn chudnovsky_bound(n: u32, s: u64) -> Option<Arc<BoundFact>> {
    let c = chudnovsky_c(n, s)?;
    let bound = Rat::new(BigInt::from(n + c + 1), BigInt::from(n));
    Some(BoundFact::build(n, s, bound, Derivation::Chudnovsky { c }))
}

/// `(1 - sum_{j<=k} 1/a_j) a_{k+1} + k`, after checking
/// `k <= a_j <= k+1` for `j <= k`, `a_1 > k` and `a_{k+1} <= k+1`.
pub fn decompose_value<T: Scalar>(k: u32, a: &[Ratio<T>]) -> Result<Ratio<T>, DecomposeError> {
    if k == 0 {
        return Err(DecomposeError::ZeroK);
    }
    let need = k as usize + 1;
    if a.len() != need {
        return Err(DecomposeError::Arity { k, need, got: a.len() });
    }
    let kk = Ratio::from_integer(T::from_u32(k).expect("k fits"));
    let k1 = kk.clone() + Ratio::one();
    let show = |r: &Ratio<T>| format_ratio(r);
    for (j, aj) in a[..k as usize].iter().enumerate() {
        if *aj < kk || *aj > k1 {
            return Err(DecomposeError::Precondition(format!(
                "a_{} = {} is outside [{}, {}]",
                j + 1,
                show(aj),
                show(&kk),
                show(&k1)
            )));
        }
    }
    if a[0] <= kk {
        return Err(DecomposeError::Precondition(format!("a_1 = {} is not > {}", show(&a[0]), show(&kk))));
    }
    let last = &a[k as usize];
    if *last > k1 {
        return Err(DecomposeError::Precondition(format!(
            "a_{} = {} exceeds {}",
            k + 1,
            show(last),
            show(&k1)
        )));
    }
    if !last.is_positive() {
        return Err(DecomposeError::Precondition(format!("a_{} = {} is not positive", k + 1, show(last))));
    }
    let inv: Ratio<T> = a[..k as usize].iter().map(|x| x.recip()).fold(Ratio::zero(), |acc, x| acc + x);
    Ok((Ratio::one() - inv) * last.clone() + kk)
}

/// `ahat(P^N, r_1 + ... + r_{k+1})` from bounds on each `r_j` in `P^{N-1}`.
pub fn decompose(n: u32, k: u32, parts: &[Arc<BoundFact>]) -> Result<Arc<BoundFact>, BoundError> {
    for p in parts {
        if p.n + 1 != n {
            return Err(BoundError::Dimension { expected: n - 1, got: p.n });
        }
    }
    let a: Vec<Rat> = parts.iter().map(|p| p.bound.clone()).collect();
    let bound = decompose_value(k, &a)?;
    let s = parts.iter().try_fold(0u64, |acc, p| acc.checked_add(p.s)).ok_or(BoundError::Overflow)?;
    Ok(BoundFact::build(n, s, bound, Derivation::Decompose { k, parts: parts.to_vec() }))
}

/// Replaces a bound by a smaller positive one.
pub fn weaken(fact: &Arc<BoundFact>, bound: Rat) -> Result<Arc<BoundFact>, BoundError> {
    if !bound.is_positive() {
        return Err(BoundError::NonPositive);
    }
    if bound > fact.bound {
        return Err(BoundError::Strengthen { new: format_ratio(&bound), old: format_ratio(&fact.bound) });
    }
    if bound == fact.bound {
        return Ok(fact.clone());
    }
    Ok(BoundFact::build(fact.n, fact.s, bound, Derivation::Weaken { from: fact.clone() }))
}

/// Re-checks every node of the derivation tree.
pub fn validate(fact: &BoundFact) -> Result<(), BoundError> {
    let invalid = |reason: String| Err(BoundError::Invalid { n: fact.n, s: fact.s, reason });
    if !fact.bound.is_positive() {
        return invalid("bound is not positive".into());
    }
    let same_n = |from: &BoundFact| {
        if from.n == fact.n {
            Ok(())
        } else {
            Err(BoundError::Dimension { expected: fact.n, got: from.n })
        }
    };
    match &fact.derivation {
        Derivation::Axiom(tag) => {
            if !is_axiom(tag) || tag.n != fact.n || tag.s != fact.s || tag.bound != fact.bound {
                return invalid(format!("{tag} is not a listed axiom for this fact"));
            }
        }
        Derivation::MonotoneLift { from } => {
            same_n(from)?;
            if from.s > fact.s || from.bound != fact.bound {
                return invalid("lift changes the bound or lowers s".into());
            }
            validate(from)?;
        }
        Derivation::DoubleSplit { from } => {
            same_n(from)?;
            let again = double_points_split(from)?;
            if again.s != fact.s || again.bound != fact.bound {
                return invalid("split arithmetic does not recompute".into());
            }
            validate(from)?;
        }
        Derivation::Clump { a, b, cert } => {
            let ob = clump(fact.n, *a, *b);
            let matches = ob.read_scale(&cert.claim).is_some_and(|(p, q)| Rat::new(p, q) == fact.bound);
            if !matches || ob.s()? != fact.s {
                return invalid(format!("clump claim {} does not match", cert.claim));
            }
            cert.replay()?;
        }
        Derivation::Chudnovsky { c } => {
            let fits = *c >= 2 && binom(i64::from(fact.n + c), i64::from(fact.n)) <= BigInt::from(fact.s);
            let expected = Rat::new(BigInt::from(fact.n + c + 1), BigInt::from(fact.n));
            if !fits || expected != fact.bound {
                return invalid(format!("chudnovsky-type bound with c={c} does not apply"));
            }
        }
        Derivation::Decompose { k, parts } => {
            let again = decompose(fact.n, *k, parts)?;
            if again.s != fact.s || again.bound != fact.bound {
                return invalid("decomposition does not recompute".into());
            }
            for p in parts {
                validate(p)?;
            }
        }
        Derivation::Weaken { from } => {
            same_n(from)?;
            if from.s != fact.s || fact.bound > from.bound {
                return invalid("weakening raises the bound".into());
            }
            validate(from)?;
        }
        Derivation::FromEmpty { cert } => {
            let (p, q) = homogeneous_pattern(&cert.claim)?;
            if cert.claim.n != fact.n || cert.claim.point_count() != fact.s || Rat::new(p, q) != fact.bound {
                return invalid("emptiness claim does not match the bound".into());
            }
            cert.replay()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn axiom_at(n: u32, s: u64) -> Arc<BoundFact> {
        kb_axioms(n, s).into_iter().filter(|f| f.s == s).max_by(|a, b| a.bound.cmp(&b.bound)).unwrap()
    }

    #[test]
    fn lifts() {
        let seven = axiom_at(3, 7);
        let lifted = monotone_lift(&seven, 8).unwrap();
        assert_eq!((lifted.s, lifted.bound.clone()), (8, ratio(28, 15)));
        assert!(Arc::ptr_eq(&monotone_lift(&seven, 7).unwrap(), &seven));
        assert!(matches!(monotone_lift(&seven, 6), Err(BoundError::LiftDown { .. })));
        let grid = axiom_at(5, 32);
        assert_eq!(monotone_lift(&grid, 42).unwrap().bound, ratio(2, 1));
        validate(&lifted).unwrap();
    }

    #[test]
    fn splits() {
        let f = double_points_split(&axiom_at(6, 7)).unwrap();
        assert_eq!((f.s, f.bound.clone()), (448, ratio(7, 3)));
        let f = double_points_split(&axiom_at(5, 6)).unwrap();
        assert_eq!((f.s, f.bound.clone()), (192, ratio(12, 5)));
        for n in 2..10 {
            let f = double_points_split(&axiom_at(n, u64::from(n) + 1)).unwrap();
            assert_eq!(f.s, (1u64 << n) * (u64::from(n) + 1));
            assert_eq!(f.bound, ratio(2 * (i64::from(n) + 1), i64::from(n)));
            validate(&f).unwrap();
        }
    }

    #[test]
    fn clumps() {
        let ob = clump(6, 6, 45);
        assert_eq!(ob.s().unwrap(), 429);
        let f = ob.discharge(&BigInt::from(22), &BigInt::from(10), 50).unwrap();
        assert_eq!(f.bound, ratio(11, 5));
        validate(&f).unwrap();

        let f = clump(6, 6, 0).discharge(&BigInt::from(2), &BigInt::one(), 50).unwrap();
        assert_eq!((f.s, f.bound.clone()), (384, ratio(2, 1)));
        assert_eq!(monotone_lift(&axiom_at(6, 64), 384).unwrap().bound, f.bound);

        for n in 2..7 {
            let f = clump(n, 1, 0).discharge(&BigInt::from(2), &BigInt::one(), 50).unwrap();
            assert_eq!((f.s, f.bound.clone()), (1 << n, ratio(2, 1)));
        }
        assert!(matches!(
            clump(6, 6, 45).discharge(&BigInt::from(30), &BigInt::from(10), 50),
            Err(BoundError::NotProven(_))
        ));
    }

    #[test]
    fn chudnovsky() {
        assert_eq!(chudnovsky_bound(6, 28).unwrap().bound, ratio(3, 2));
        assert!(chudnovsky_bound(5, 20).is_none());
        let f = chudnovsky_bound(3, 56).unwrap();
        assert_eq!(f.bound, ratio(3, 1));
        validate(&f).unwrap();
    }

    #[test]
    fn decompositions() {
        assert_eq!(decompose_value(1, &[ratio::<BigInt>(8, 5), ratio(3, 2)]).unwrap(), ratio(25, 16));
        assert_eq!(
            decompose_value(2, &[ratio::<BigInt>(12, 5), ratio(11, 5), ratio(9, 5)]).unwrap(),
            ratio(491, 220)
        );
        assert_eq!(decompose_value(1, &[ratio::<BigInt>(2, 1), ratio(2, 1)]).unwrap(), ratio(2, 1));
        assert_eq!(decompose_value(1, &[ratio::<i64>(8, 5), ratio(3, 2)]).unwrap(), ratio(25, 16));

        assert!(matches!(decompose_value(1, &[ratio::<BigInt>(1, 1), ratio(3, 2)]), Err(DecomposeError::Precondition(_))));
        assert!(matches!(decompose_value(1, &[ratio::<BigInt>(5, 2), ratio(3, 2)]), Err(DecomposeError::Precondition(_))));
        assert!(matches!(decompose_value(1, &[ratio::<BigInt>(3, 2), ratio(5, 2)]), Err(DecomposeError::Precondition(_))));
        assert!(matches!(decompose_value(2, &[ratio::<BigInt>(3, 2), ratio(5, 2)]), Err(DecomposeError::Arity { .. })));

        let f = decompose(5, 1, &[axiom_at(4, 8), axiom_at(4, 6)]).unwrap();
        assert_eq!((f.s, f.bound.clone()), (14, ratio(25, 16)));
        validate(&f).unwrap();
        assert!(matches!(decompose(5, 1, &[axiom_at(3, 8), axiom_at(4, 6)]), Err(BoundError::Dimension { .. })));
    }

    #[test]
    fn weakening() {
        let f = axiom_at(4, 16);
        let w = weaken(&f, ratio(3, 2)).unwrap();
        assert_eq!(w.bound, ratio(3, 2));
        validate(&w).unwrap();
        assert!(weaken(&f, ratio(5, 2)).is_err());
        assert!(weaken(&f, ratio(0, 1)).is_err());
    }

    #[test]
    fn tampered_trees_fail() {
        let f = axiom_at(3, 14);
        let forged = BoundFact { bound: ratio(5, 2), ..(*f).clone() };
        assert!(validate(&forged).is_err());
        let lift = BoundFact { n: 3, s: 13, bound: ratio(7, 3), derivation: Derivation::MonotoneLift { from: f.clone() } };
        assert!(validate(&lift).is_err());
        let split = BoundFact { n: 3, s: 112, bound: ratio(5, 1), derivation: Derivation::DoubleSplit { from: f } };
        assert!(validate(&split).is_err());
        let chud = BoundFact { n: 5, s: 20, bound: ratio(8, 5), derivation: Derivation::Chudnovsky { c: 2 } };
        assert!(validate(&chud).is_err());
    }
}
