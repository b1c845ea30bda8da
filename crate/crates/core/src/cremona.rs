//! Symbolic Cremona reduction on linear systems whose degree and
//! multiplicities are affine in a parameter `m`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::bounds::{self, BoundFact, Derivation};
use crate::exact::{ComparisonVerdict, ParseError};
use crate::{LinExpr, Rat};

pub const DEFAULT_MAX_STEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CremonaError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(u32),
    #[error("system has no points")]
    NoPoints,
    #[error("multiplicity counts must be positive")]
    ZeroCount,
    #[error("selection needs {expected} distinct indices, got {got:?}")]
    BadSelection { expected: usize, got: Vec<usize> },
    #[error("selection index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },
    #[error("right system has no point of multiplicity {0}")]
    MissingGlueMultiplicity(LinExpr),
    #[error("claim is not of the form ((q m)^s) in degree p m - 1: {0}")]
    NotHomogeneous(String),
    #[error("bound {bound} times denominator {q} is not an integer")]
    NonIntegralScale { bound: String, q: BigInt },
    #[error("denominator must be positive")]
    BadDenominator,
    #[error("fact does not re-validate: {0}")]
    UncertifiedFact(String),
    #[error("certificate replay failed: {0}")]
    Replay(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("malformed multiplicity list `{0}`")]
    MalformedMults(String),
}

/// `I(m_1, ..., m_s)_d` in `P^N`, with multiplicities stored as runs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemSpec {
    pub n: u32,
    pub degree: LinExpr,
    pub mults: Vec<(LinExpr, u32)>,
}

impl SystemSpec {
    pub fn new(n: u32, degree: LinExpr, mults: Vec<(LinExpr, u32)>) -> Result<Self, CremonaError> {
        if n < 2 {
            return Err(CremonaError::Dimension(n));
        }
        if mults.iter().any(|(_, c)| *c == 0) {
            return Err(CremonaError::ZeroCount);
        }
        let sys = SystemSpec { n, degree, mults }.regrouped();
        if sys.point_count() == 0 {
            return Err(CremonaError::NoPoints);
        }
        Ok(sys)
    }

    /// Builds a system from an expanded list, merging adjacent equal entries.
    /// Unlike [`SystemSpec::new`] this allows an empty point list, which can
    /// arise mid-reduction.
    pub fn from_points(n: u32, degree: LinExpr, points: Vec<LinExpr>) -> Self {
        let mut mults: Vec<(LinExpr, u32)> = Vec::new();
        for p in points {
            match mults.last_mut() {
                Some((last, c)) if *last == p => *c += 1,
                _ => mults.push((p, 1)),
            }
        }
        SystemSpec { n, degree, mults }
    }

    fn regrouped(self) -> Self {
        let points = self.points();
        Self::from_points(self.n, self.degree, points)
    }

    pub fn points(&self) -> Vec<LinExpr> {
        self.mults
            .iter()
            .flat_map(|(e, c)| std::iter::repeat_n(e.clone(), *c as usize))
            .collect()
    }

    pub fn point_count(&self) -> u64 {
        self.mults.iter().map(|(_, c)| u64::from(*c)).sum()
    }

    /// Degree and multiplicities at a concrete `m`.
    pub fn instantiate(&self, m: u64) -> (i64, Vec<i64>) {
        let at = |e: &LinExpr| e.eval_u64(m).to_i64().expect("instantiated value fits in i64");
        (at(&self.degree), self.points().iter().map(at).collect())
    }

    /// Parses `"30m x1, 20m x9"`; a missing `x<count>` means one point.
    pub fn parse_mults(text: &str) -> Result<Vec<(LinExpr, u32)>, CremonaError> {
        let mut out = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (expr, count) = match part.rsplit_once('x') {
                Some((e, c)) if !c.trim().is_empty() && c.trim().chars().all(|ch| ch.is_ascii_digit()) => {
                    let count = c.trim().parse().map_err(|_| CremonaError::MalformedMults(part.into()))?;
                    (e.trim(), count)
                }
                _ => (part, 1),
            };
            out.push((expr.parse()?, count));
        }
        if out.is_empty() {
            return Err(CremonaError::MalformedMults(text.into()));
        }
        Ok(out)
    }

    pub fn mults_text(&self) -> String {
        self.mults.iter().map(|(e, c)| format!("{e} x{c}")).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={}; {}; {}", self.n, self.degree, self.mults_text())
    }
}

/// Result of one Cremona step followed by clamping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub system: SystemSpec,
    pub k: LinExpr,
    /// Indices into the unclamped expanded list that became eventually
    /// nonpositive and were dropped.
    pub dropped: Vec<usize>,
    /// From this `m` on every dropped multiplicity is `<= 0`.
    pub threshold: u64,
}

fn check_selection(n: u32, len: usize, selection: &[usize]) -> Result<(), CremonaError> {
    let expected = n as usize + 1;
    let mut sorted = selection.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if selection.len() != expected || sorted.len() != expected {
        return Err(CremonaError::BadSelection { expected, got: selection.to_vec() });
    }
    if let Some(&index) = sorted.iter().find(|&&i| i >= len) {
        return Err(CremonaError::IndexOutOfRange { index, len });
    }
    Ok(())
}

/// `k = (N-1) d - sum of the selected multiplicities`.
pub fn cremona_k(n: u32, degree: &LinExpr, selected: &[&LinExpr]) -> LinExpr {
    let total: LinExpr = selected.iter().map(|e| (*e).clone()).sum();
    degree.scale(&BigInt::from(n - 1)) - total
}

/// The bare transformation, without clamping. Applying it twice with the same
/// selection returns the input.
pub fn apply_cremona(sys: &SystemSpec, selection: &[usize]) -> Result<(SystemSpec, LinExpr), CremonaError> {
    let mut points = sys.points();
    check_selection(sys.n, points.len(), selection)?;
    let selected: Vec<&LinExpr> = selection.iter().map(|&i| &points[i]).collect();
    let k = cremona_k(sys.n, &sys.degree, &selected);
    for &i in selection {
        points[i] = &points[i] + &k;
    }
    let degree = &sys.degree + &k;
    Ok((SystemSpec::from_points(sys.n, degree, points), k))
}

/// A Cremona step followed by dropping multiplicities that are eventually
/// nonpositive.
pub fn cremona_step(sys: &SystemSpec, selection: &[usize]) -> Result<Reduction, CremonaError> {
    let (raw, k) = apply_cremona(sys, selection)?;
    let (system, dropped, threshold) = clamp(&raw);
    Ok(Reduction { system, k, dropped, threshold })
}

fn clamp(sys: &SystemSpec) -> (SystemSpec, Vec<usize>, u64) {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut threshold = 1;
    for (i, p) in sys.points().into_iter().enumerate() {
        match p.eventually_nonpositive() {
            Some(t) => {
                dropped.push(i);
                threshold = threshold.max(t);
            }
            None => kept.push(p),
        }
    }
    (SystemSpec::from_points(sys.n, sys.degree.clone(), kept), dropped, threshold)
}

/// Indices of the `N+1` eventually-largest multiplicities, ties broken by
/// list order.
pub fn greedy_selection(sys: &SystemSpec) -> Option<Vec<usize>> {
    let order = greedy_order(&sys.points());
    let need = sys.n as usize + 1;
    (order.len() >= need).then(|| order[..need].to_vec())
}

fn greedy_order(points: &[LinExpr]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[b].eventual_cmp(&points[a]).then(a.cmp(&b)));
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Witness {
    /// Index of a multiplicity that eventually exceeds the degree.
    Point(usize),
    NegativeDegree,
}

/// The contradiction with the smallest threshold, if the system is
/// eventually empty by inspection.
pub fn find_contradiction(sys: &SystemSpec) -> Option<(Witness, u64)> {
    let mut best: Option<(Witness, u64)> = None;
    let mut consider = |w: Witness, t: u64| {
        if best.is_none_or(|(_, b)| t < b) {
            best = Some((w, t));
        }
    };
    if let ComparisonVerdict::EventuallyLess { m0 } = sys.degree.compare_const(BigInt::zero()) {
        consider(Witness::NegativeDegree, m0);
    }
    let points = sys.points();
    for i in greedy_order(&points) {
        if let ComparisonVerdict::EventuallyGreater { m0 } = points[i].compare(&sys.degree) {
            consider(Witness::Point(i), m0);
        }
    }
    best
}

#[derive(Debug, Clone)]
pub enum Step {
    Cremona { selection: Vec<usize>, k: LinExpr },
    Clamp { dropped: Vec<usize>, threshold: u64 },
    Glue { left: Arc<EmptinessCertificate>, right: Arc<EmptinessCertificate> },
    /// Emptiness read off a certified bound, scaled by denominator `q`.
    AxiomLeaf { fact: Arc<BoundFact>, q: BigInt },
    Contradiction { witness: Witness, threshold: u64 },
}

/// Proof that `claim` has no nonzero forms for every `m >= m0`.
#[derive(Debug, Clone)]
pub struct EmptinessCertificate {
    pub claim: SystemSpec,
    pub steps: Vec<Step>,
    pub m0: u64,
}

impl EmptinessCertificate {
    /// Systems after each Cremona step (with clamping applied), starting
    /// from the claim. Empty for glue and leaf certificates.
    pub fn trace(&self) -> Vec<SystemSpec> {
        if !matches!(self.steps.first(), Some(Step::Cremona { .. } | Step::Contradiction { .. })) {
            return Vec::new();
        }
        let mut states = vec![self.claim.clone()];
        let mut current = self.claim.clone();
        for step in &self.steps {
            match step {
                Step::Cremona { selection, .. } => {
                    current = apply_cremona(&current, selection).expect("certificate replays").0;
                    states.push(current.clone());
                }
                Step::Clamp { dropped, .. } => {
                    let pts: Vec<LinExpr> = current
                        .points()
                        .into_iter()
                        .enumerate()
                        .filter(|(i, _)| !dropped.contains(i))
                        .map(|(_, p)| p)
                        .collect();
                    current = SystemSpec::from_points(current.n, current.degree.clone(), pts);
                    *states.last_mut().expect("nonempty") = current.clone();
                }
                _ => {}
            }
        }
        states
    }

    pub fn cremona_ks(&self) -> Vec<LinExpr> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                Step::Cremona { k, .. } => Some(k.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn selections(&self) -> Vec<Vec<usize>> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                Step::Cremona { selection, .. } => Some(selection.clone()),
                _ => None,
            })
            .collect()
    }

    /// Re-runs every step with the engine's own rules.
    pub fn replay(&self) -> Result<(), CremonaError> {
        let fail = |msg: String| Err(CremonaError::Replay(msg));
        match self.steps.as_slice() {
            [Step::AxiomLeaf { fact, q }] => {
                let again = empty_from_bound(fact, q)?;
                if again.claim != self.claim || self.m0 != 1 {
                    return fail("leaf claim does not match its fact".into());
                }
                Ok(())
            }
            [Step::Glue { left, right }] => {
                left.replay()?;
                right.replay()?;
                let again = glue(left, right)?;
                if again.claim != self.claim || again.m0 != self.m0 {
                    return fail("glue result does not match claim".into());
                }
                Ok(())
            }
            steps => {
                let mut current = self.claim.clone();
                let mut m0 = 1;
                for (i, step) in steps.iter().enumerate() {
                    let last = i + 1 == steps.len();
                    match step {
                        Step::Cremona { selection, k } if !last => {
                            let (next, k2) = apply_cremona(&current, selection)?;
                            if &k2 != k {
                                return fail(format!("step {i}: k is {k2}, recorded {k}"));
                            }
                            current = next;
                        }
                        Step::Clamp { dropped, threshold } if !last => {
                            let pts = current.points();
                            let mut t = 1;
                            for &d in dropped {
                                match pts.get(d).and_then(LinExpr::eventually_nonpositive) {
                                    Some(x) => t = t.max(x),
                                    None => return fail(format!("step {i}: index {d} is not droppable")),
                                }
                            }
                            if t != *threshold {
                                return fail(format!("step {i}: clamp threshold {t}, recorded {threshold}"));
                            }
                            m0 = m0.max(t);
                            let kept = pts.into_iter().enumerate().filter(|(j, _)| !dropped.contains(j));
                            current = SystemSpec::from_points(current.n, current.degree.clone(), kept.map(|(_, p)| p).collect());
                        }
                        Step::Contradiction { witness, threshold } if last => {
                            let t = match witness {
                                Witness::NegativeDegree => match current.degree.compare_const(BigInt::zero()) {
                                    ComparisonVerdict::EventuallyLess { m0 } => m0,
                                    _ => return fail("degree is not eventually negative".into()),
                                },
                                Witness::Point(w) => match current.points().get(*w).map(|p| p.compare(&current.degree)) {
                                    Some(ComparisonVerdict::EventuallyGreater { m0 }) => m0,
                                    _ => return fail(format!("witness {w} does not exceed the degree")),
                                },
                            };
                            if t != *threshold {
                                return fail(format!("contradiction threshold {t}, recorded {threshold}"));
                            }
                            m0 = m0.max(t);
                        }
                        _ => return fail(format!("step {i} is out of place")),
                    }
                }
                if !matches!(steps.last(), Some(Step::Contradiction { .. })) {
                    return fail("chain does not end in a contradiction".into());
                }
                if m0 != self.m0 {
                    return fail(format!("m0 is {m0}, recorded {}", self.m0));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum ProofOutcome {
    Proven(EmptinessCertificate),
    NotProven { steps_taken: usize, last: SystemSpec },
}

impl ProofOutcome {
    pub fn certificate(self) -> Option<EmptinessCertificate> {
        match self {
            ProofOutcome::Proven(c) => Some(c),
            ProofOutcome::NotProven { .. } => None,
        }
    }
}

/// Greedy reduction until the system is visibly empty.
pub fn prove_empty(sys: &SystemSpec, max_steps: usize) -> Result<ProofOutcome, CremonaError> {
    let sys = SystemSpec::new(sys.n, sys.degree.clone(), sys.mults.clone())?;
    let mut steps = Vec::new();
    let mut current = sys.clone();
    let mut m0 = 1;
    let mut taken = 0;
    loop {
        if let Some((witness, threshold)) = find_contradiction(&current) {
            steps.push(Step::Contradiction { witness, threshold });
            m0 = m0.max(threshold);
            return Ok(ProofOutcome::Proven(EmptinessCertificate { claim: sys, steps, m0 }));
        }
        if taken == max_steps {
            break;
        }
        let Some(selection) = greedy_selection(&current) else { break };
        let red = cremona_step(&current, &selection)?;
        if !red.k.compare_const(BigInt::zero()).is_less() {
            break;
        }
        steps.push(Step::Cremona { selection, k: red.k });
        if !red.dropped.is_empty() {
            steps.push(Step::Clamp { dropped: red.dropped, threshold: red.threshold });
            m0 = m0.max(red.threshold);
        }
        current = red.system;
        taken += 1;
    }
    Ok(ProofOutcome::NotProven { steps_taken: taken, last: current })
}

/// Replaces the first point of `right` with multiplicity `left.degree + 1`
/// by the points of `left`.
pub fn glue(left: &EmptinessCertificate, right: &EmptinessCertificate) -> Result<EmptinessCertificate, CremonaError> {
    let (l, r) = (&left.claim, &right.claim);
    if l.n != r.n {
        return Err(CremonaError::DimensionMismatch { left: l.n, right: r.n });
    }
    let target = &l.degree + &LinExpr::constant(BigInt::one());
    let mut points = r.points();
    let pos = points
        .iter()
        .position(|p| *p == target)
        .ok_or(CremonaError::MissingGlueMultiplicity(target))?;
    points.splice(pos..=pos, l.points());
    Ok(EmptinessCertificate {
        claim: SystemSpec::from_points(r.n, r.degree.clone(), points),
        steps: vec![Step::Glue { left: Arc::new(left.clone()), right: Arc::new(right.clone()) }],
        m0: left.m0.max(right.m0),
    })
}

/// `ahat(P^N, s) >= p/q` gives `I((q m)^s)_{p m - 1} = 0` for every `m`.
pub fn empty_from_bound(fact: &Arc<BoundFact>, q: &BigInt) -> Result<EmptinessCertificate, CremonaError> {
    if !q.is_positive() {
        return Err(CremonaError::BadDenominator);
    }
    bounds::validate(fact).map_err(|e| CremonaError::UncertifiedFact(e.to_string()))?;
    let scaled = &fact.bound * Rat::from_integer(q.clone());
    if !scaled.is_integer() {
        return Err(CremonaError::NonIntegralScale { bound: crate::exact::format_ratio(&fact.bound), q: q.clone() });
    }
    let p = scaled.to_integer();
    let count = u32::try_from(fact.s).map_err(|_| CremonaError::NotHomogeneous("too many points".into()))?;
    let claim = SystemSpec::new(
        fact.n,
        LinExpr::new(p, -BigInt::one()),
        vec![(LinExpr::new(q.clone(), BigInt::zero()), count)],
    )?;
    Ok(EmptinessCertificate { claim, steps: vec![Step::AxiomLeaf { fact: fact.clone(), q: q.clone() }], m0: 1 })
}

/// Reads `(p, q)` off a claim `((q m)^s)_{p m - 1}`.
pub fn homogeneous_pattern(sys: &SystemSpec) -> Result<(BigInt, BigInt), CremonaError> {
    let bad = || CremonaError::NotHomogeneous(sys.to_string());
    if sys.degree.intercept != -BigInt::one() || !sys.degree.slope.is_positive() {
        return Err(bad());
    }
    let q = match sys.mults.as_slice() {
        [(e, _)] if e.intercept.is_zero() && e.slope.is_positive() => e.slope.clone(),
        _ => return Err(bad()),
    };
    Ok((sys.degree.slope.clone(), q))
}

/// `I((q m)^s)_{p m - 1} = 0` for `m >= m0` gives `ahat(P^N, s) >= p/q`.
pub fn bound_from_empty(cert: &EmptinessCertificate) -> Result<Arc<BoundFact>, CremonaError> {
    let (p, q) = homogeneous_pattern(&cert.claim)?;
    Ok(BoundFact::build(
        cert.claim.n,
        cert.claim.point_count(),
        Rat::new(p, q),
        Derivation::FromEmpty { cert: Arc::new(cert.clone()) },
    ))
}
