//! Verdicts for the `m = 2` inequality `ahat(I) >= (alpha(I^(2)) + N - 1) / (N + 1)`:
//! thresholds, the containment exponent, the binomial lemmas and batch suites.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Pow, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{BoundFact, Deriver, Strategy};
use crate::exact::{binom, ceil_ratio, format_ratio, Scalar};
use crate::hilbert::{ell_bracket, reg2_upper, PointMode};
use crate::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Proven,
    Unproven,
    Discrepancy,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Proven => "PROVEN",
            Status::Unproven => "UNPROVEN",
            Status::Discrepancy => "DISCREPANCY",
        })
    }
}

impl FromStr for Status {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "PROVEN" => Ok(Status::Proven),
            "UNPROVEN" => Ok(Status::Unproven),
            "DISCREPANCY" => Ok(Status::Discrepancy),
            _ => Err(format!("unknown status `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Threshold {
    pub ell: u32,
    pub required: Rat,
    /// Regularity bound used in general mode.
    pub reg_bound: Option<u32>,
    pub reg_adjusted: bool,
}

/// Very general: `(N+ell)/(N+1)`. General: `(reg + N - 1)/(N+1)` with the
/// exception-aware regularity bound, which is `(N+ell+1)/(N+1)` away from
/// the exceptional triples.
pub fn required_threshold(n: u32, s: u64, mode: PointMode) -> Threshold {
    let ell = ell_bracket(n, s, mode).ell;
    let den = BigInt::from(n + 1);
    match mode {
        PointMode::VeryGeneral => Threshold {
            ell,
            required: Rat::new(BigInt::from(n + ell), den),
            reg_bound: None,
            reg_adjusted: false,
        },
        PointMode::General => {
            let reg = reg2_upper(n, s);
            Threshold {
                ell,
                required: Rat::new(BigInt::from(reg.bound + n - 1), den),
                reg_bound: Some(reg.bound),
                reg_adjusted: reg.adjusted,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Containment<T> {
    /// `I^(r(N+1)-N+1)` lies in `m^(r(N-1))` for this `r`.
    Exponent(T),
    /// `(N+1) ahat = reg + N - 1`: an exponent exists only through a limit.
    LimitOnly,
    /// The bound is too small for the criterion.
    Fails,
}

impl<T> Containment<T> {
    pub fn exponent(self) -> Option<T> {
        match self {
            Containment::Exponent(r) => Some(r),
            _ => None,
        }
    }
}

/// Least `r >= (N-1) a / ((N+1) a - reg - N + 1)` when the denominator is
/// positive.
pub fn containment_exponent<T: Scalar>(n: u32, ahat: &Ratio<T>, reg: u32) -> Containment<T> {
    let int = |v: u32| Ratio::from_integer(T::from_u32(v).expect("small integer"));
    let gap = int(n + 1) * ahat.clone() - int(reg) - int(n) + Ratio::one();
    if gap.is_zero() {
        return Containment::LimitOnly;
    }
    if gap.is_negative() {
        return Containment::Fails;
    }
    let r = ceil_ratio(&(int(n - 1) * ahat.clone() / gap));
    Containment::Exponent(if r < T::one() { T::one() } else { r })
}

/// Cases the published theorems assert.
pub fn claimed_in_literature(n: u32, s: u64, mode: PointMode) -> bool {
    match mode {
        PointMode::General => match n {
            3 => (6..=216).contains(&s),
            4 => (8..=625).contains(&s),
            5 => s == 8 || s == 9 || (14..=1024).contains(&s),
            n if (6..32).contains(&n) => (1u64 << n..=1u64 << (2 * n)).contains(&s),
            _ => false,
        },
        PointMode::VeryGeneral => (3..64).contains(&n) && (u64::from(n) + 3..=1u64 << n).contains(&s),
    }
}

/// Cases left open in the literature.
pub fn known_open(n: u32, s: u64, mode: PointMode) -> bool {
    mode == PointMode::General && n == 5 && (10..=13).contains(&s)
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub n: u32,
    pub s: u64,
    pub mode: PointMode,
    pub ell: u32,
    pub required: Rat,
    pub reg_bound: Option<u32>,
    pub achieved: Arc<BoundFact>,
    pub status: Status,
    pub containment_r: Option<BigInt>,
    pub notes: Vec<String>,
}

impl Verdict {
    /// Whether this verdict is acceptable for a suite exit code.
    pub fn expected(&self) -> bool {
        match self.status {
            Status::Proven => true,
            Status::Unproven => known_open(self.n, self.s, self.mode),
            Status::Discrepancy => false,
        }
    }
}

pub fn status_for(n: u32, s: u64, mode: PointMode, achieved: &Rat, required: &Rat) -> Status {
    if achieved >= required {
        Status::Proven
    } else if known_open(n, s, mode) {
        Status::Unproven
    } else if claimed_in_literature(n, s, mode) {
        Status::Discrepancy
    } else {
        Status::Unproven
    }
}

pub fn verify_case(n: u32, s: u64, mode: PointMode) -> Verdict {
    verify_case_with(Deriver::global(), Strategy::Paper, n, s, mode)
}

pub fn verify_case_with(deriver: &Deriver, strategy: Strategy, n: u32, s: u64, mode: PointMode) -> Verdict {
    let t = required_threshold(n, s, mode);
    let achieved = deriver.derive(n, s, strategy);
    let status = status_for(n, s, mode, &achieved.bound, &t.required);
    let mut notes = Vec::new();
    if t.reg_adjusted {
        notes.push("regularity bound moved past an exceptional degree".to_string());
    }
    if known_open(n, s, mode) {
        notes.push("open case".to_string());
    }
    if status == Status::Discrepancy {
        notes.push(format!(
            "required {} vs achieved {}",
            format_ratio(&t.required),
            format_ratio(&achieved.bound)
        ));
    }
    let mut containment_r = None;
    if let (PointMode::General, Some(reg)) = (mode, t.reg_bound) {
        if status == Status::Proven {
            match containment_exponent(n, &achieved.bound, reg) {
                Containment::Exponent(r) => containment_r = Some(r),
                Containment::LimitOnly => notes.push("containment exponent exists by limit argument only".into()),
                Containment::Fails => {}
            }
        }
    }
    Verdict {
        n,
        s,
        mode,
        ell: t.ell,
        required: t.required,
        reg_bound: t.reg_bound,
        achieved,
        status,
        containment_r,
        notes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinomialLemma {
    /// `ell^2 - 3 ell - (N-1) <= 0`, equivalently `C(N+ell,N) >= (N+1) C(N+ell-2,N)`.
    Case1,
    /// `(N+ell-2)! (ell^2 - 3 ell - N + 1) / (ell! (N+1)!) >= 1`, equivalently
    /// `C(N+ell,N)/(N+1) >= (C(N-1+ell,N-1) + C(N-2+ell,N-1))/N + 1`.
    Case2,
    /// `4^N (N+1) <= C(3N+2, N)` for `N >= 5`.
    HowFarA,
    /// `3^N (N+1) <= C(2N+2, N)` for `N >= 11`.
    HowFarB,
    /// `3^N (N+1) <= C(2N+3, N)` for `N >= 7`.
    HowFarC,
}

impl BinomialLemma {
    pub const ALL: [BinomialLemma; 5] =
        [BinomialLemma::Case1, BinomialLemma::Case2, BinomialLemma::HowFarA, BinomialLemma::HowFarB, BinomialLemma::HowFarC];

    pub fn name(&self) -> &'static str {
        match self {
            BinomialLemma::Case1 => "case1",
            BinomialLemma::Case2 => "case2",
            BinomialLemma::HowFarA => "how-far-a",
            BinomialLemma::HowFarB => "how-far-b",
            BinomialLemma::HowFarC => "how-far-c",
        }
    }

    /// Smallest `N` of the stated range for the three size lemmas.
    pub fn range_start(&self) -> Option<u32> {
        match self {
            BinomialLemma::HowFarA => Some(5),
            BinomialLemma::HowFarB => Some(11),
            BinomialLemma::HowFarC => Some(7),
            _ => None,
        }
    }
}

impl FromStr for BinomialLemma {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        BinomialLemma::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown lemma `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LemmaError {
    #[error("{0} needs ell")]
    MissingEll(&'static str),
    #[error("ell must be at least 2, got {0}")]
    SmallEll(u32),
    #[error("N must be at least 2, got {0}")]
    SmallN(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaCheck {
    pub lemma: BinomialLemma,
    pub n: u32,
    pub ell: Option<u32>,
    pub holds: bool,
    /// For the case lemmas: whether the binomial form agrees with the
    /// polynomial form.
    pub equivalence: Option<bool>,
    pub lhs: String,
    pub rhs: String,
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn check_binomial_lemma(lemma: BinomialLemma, n: u32, ell: Option<u32>) -> Result<LemmaCheck, LemmaError> {
    if n < 2 {
        return Err(LemmaError::SmallN(n));
    }
    let nn = i64::from(n);
    let big = |v: i64| BigInt::from(v);
    let case_ell = || -> Result<u32, LemmaError> {
        let l = ell.ok_or(LemmaError::MissingEll(lemma.name()))?;
        if l < 2 {
            return Err(LemmaError::SmallEll(l));
        }
        Ok(l)
    };
    let size = |base: u32, top: i64| {
        let lhs = Pow::pow(BigInt::from(base), n) * big(nn + 1);
        let rhs = binom(top, nn);
        (lhs.clone() <= rhs, lhs.to_string(), rhs.to_string())
    };
    let (holds, equivalence, lhs, rhs) = match lemma {
        BinomialLemma::Case1 => {
            let l = i64::from(case_ell()?);
            let poly = l * l - 3 * l - (nn - 1);
            let holds = poly <= 0;
            let binomial_form = binom(nn + l, nn) >= big(nn + 1) * binom(nn + l - 2, nn);
            (holds, Some(holds == binomial_form), poly.to_string(), "0".to_string())
        }
        BinomialLemma::Case2 => {
            let l = case_ell()?;
            let li = i64::from(l);
            let poly = li * li - 3 * li - nn + 1;
            let lhs = Rat::new(factorial(n + l - 2) * big(poly), factorial(l) * factorial(n + 1));
            let holds = lhs >= Rat::one();
            let q = |v: BigInt, d: i64| Rat::new(v, big(d));
            let left = q(binom(nn + li, nn), nn + 1);
            let right = q(binom(nn - 1 + li, nn - 1), nn) + q(binom(nn - 2 + li, nn - 1), nn) + Rat::one();
            (holds, Some(holds == (left >= right)), format_ratio(&lhs), "1".to_string())
        }
        BinomialLemma::HowFarA => {
            let (h, l, r) = size(4, 3 * nn + 2);
            (h, None, l, r)
        }
        BinomialLemma::HowFarB => {
            let (h, l, r) = size(3, 2 * nn + 2);
            (h, None, l, r)
        }
        BinomialLemma::HowFarC => {
            let (h, l, r) = size(3, 2 * nn + 3);
            (h, None, l, r)
        }
    };
    Ok(LemmaCheck { lemma, n, ell: ell.filter(|_| lemma.range_start().is_none()), holds, equivalence, lhs, rhs })
}

/// Summary of one lemma over `2 <= N <= n_max` (and `2 <= ell <= 3N+10` for
/// the case lemmas).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaSummary {
    pub lemma: BinomialLemma,
    pub checked: usize,
    /// Instances inside the stated range that fail (always empty when the
    /// lemma is correct).
    pub range_failures: Vec<u32>,
    /// For the size lemmas: whether the instance just below the range fails.
    pub boundary_fails: Option<bool>,
    pub equivalence_mismatches: Vec<(u32, u32)>,
}

impl LemmaSummary {
    pub fn ok(&self) -> bool {
        self.range_failures.is_empty() && self.equivalence_mismatches.is_empty() && self.boundary_fails != Some(false)
    }
}

pub fn lemma_suite(n_max: u32) -> Vec<LemmaSummary> {
    BinomialLemma::ALL
        .into_iter()
        .map(|lemma| {
            let mut s = LemmaSummary {
                lemma,
                checked: 0,
                range_failures: Vec::new(),
                boundary_fails: None,
                equivalence_mismatches: Vec::new(),
            };
            match lemma.range_start() {
                Some(start) => {
                    for n in 2..=n_max {
                        let c = check_binomial_lemma(lemma, n, None).expect("valid parameters");
                        s.checked += 1;
                        if n >= start && !c.holds {
                            s.range_failures.push(n);
                        }
                        if n + 1 == start {
                            s.boundary_fails = Some(!c.holds);
                        }
                    }
                }
                None => {
                    for n in 2..=n_max {
                        for ell in 2..=3 * n + 10 {
                            let c = check_binomial_lemma(lemma, n, Some(ell)).expect("valid parameters");
                            s.checked += 1;
                            if c.equivalence == Some(false) {
                                s.equivalence_mismatches.push((n, ell));
                            }
                        }
                    }
                }
            }
            s
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Suite {
    /// `N = 3`, `6 <= s <= 216`, general points.
    P3General,
    /// `N = 4`, `8 <= s <= 625`, general points.
    P4General,
    /// `N = 5`, `8 <= s <= 1024`, general points.
    P5General,
    /// `N+3 <= s <= 2^N`, very general points.
    VeryGeneral { n_lo: u32, n_hi: u32 },
    /// `2^N <= s <= 4^N`, general points.
    ManyGeneral { n_lo: u32, n_hi: u32 },
    Lemmas { n_max: u32 },
    Custom { n: u32, s_lo: u64, s_hi: u64, mode: PointMode },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown suite `{0}` (expected p3-general, p4-general, p5-general, very-general[:a..b], many-general[:a..b], lemmas[:n])")]
pub struct UnknownSuite(pub String);

/// Parses `a..b` or `a..=b` (both inclusive).
pub fn parse_range<T: FromStr>(text: &str) -> Option<(T, T)> {
    let (a, b) = text.split_once("..")?;
    Some((a.trim().parse().ok()?, b.trim().trim_start_matches('=').parse().ok()?))
}

impl FromStr for Suite {
    type Err = UnknownSuite;
    fn from_str(s: &str) -> Result<Self, UnknownSuite> {
        let bad = || UnknownSuite(s.to_string());
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let range = |default: (u32, u32)| match arg {
            None => Ok(default),
            Some(a) => parse_range::<u32>(a).filter(|(lo, hi)| lo <= hi && *lo >= 3).ok_or_else(bad),
        };
        match name {
            "p3-general" if arg.is_none() => Ok(Suite::P3General),
            "p4-general" if arg.is_none() => Ok(Suite::P4General),
            "p5-general" if arg.is_none() => Ok(Suite::P5General),
            "very-general" => range((5, 12)).map(|(n_lo, n_hi)| Suite::VeryGeneral { n_lo, n_hi }),
            "many-general" => range((6, 8)).map(|(n_lo, n_hi)| Suite::ManyGeneral { n_lo, n_hi }),
            "lemmas" => match arg {
                None => Ok(Suite::Lemmas { n_max: 40 }),
                Some(a) => a.parse().map(|n_max| Suite::Lemmas { n_max }).map_err(|_| bad()),
            },
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Suite::P3General => f.write_str("p3-general"),
            Suite::P4General => f.write_str("p4-general"),
            Suite::P5General => f.write_str("p5-general"),
            Suite::VeryGeneral { n_lo, n_hi } => write!(f, "very-general:{n_lo}..{n_hi}"),
            Suite::ManyGeneral { n_lo, n_hi } => write!(f, "many-general:{n_lo}..{n_hi}"),
            Suite::Lemmas { n_max } => write!(f, "lemmas:{n_max}"),
            Suite::Custom { n, s_lo, s_hi, mode } => write!(f, "custom N={n} s={s_lo}..{s_hi} {mode}"),
        }
    }
}

impl Suite {
    /// Every `(N, s, mode)` the suite covers, sorted.
    pub fn cases(&self) -> Vec<(u32, u64, PointMode)> {
        let general = |n: u32, lo: u64, hi: u64| (lo..=hi).map(move |s| (n, s, PointMode::General));
        match *self {
            Suite::P3General => general(3, 6, 216).collect(),
            Suite::P4General => general(4, 8, 625).collect(),
            Suite::P5General => general(5, 8, 1024).collect(),
            Suite::VeryGeneral { n_lo, n_hi } => (n_lo..=n_hi)
                .flat_map(|n| (u64::from(n) + 3..=1u64 << n).map(move |s| (n, s, PointMode::VeryGeneral)))
                .collect(),
            Suite::ManyGeneral { n_lo, n_hi } => {
                (n_lo..=n_hi).flat_map(|n| general(n, 1u64 << n, 1u64 << (2 * n))).collect()
            }
            Suite::Lemmas { .. } => Vec::new(),
            Suite::Custom { n, s_lo, s_hi, mode } => (s_lo..=s_hi).map(|s| (n, s, mode)).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub suite: Suite,
    pub verdicts: Vec<Verdict>,
    pub lemmas: Vec<LemmaSummary>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub proven: usize,
    pub unproven: usize,
    pub discrepancy: usize,
    pub unexpected: usize,
}

impl SuiteResult {
    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for v in &self.verdicts {
            match v.status {
                Status::Proven => c.proven += 1,
                Status::Unproven => c.unproven += 1,
                Status::Discrepancy => c.discrepancy += 1,
            }
            if !v.expected() {
                c.unexpected += 1;
            }
        }
        c.unexpected += self.lemmas.iter().filter(|l| !l.ok()).count();
        c
    }

    /// 0 when nothing falls outside the declared open set, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.counts().unexpected > 0)
    }
}

/// Runs a suite on the current rayon pool; rows come back sorted by `(N, s)`.
pub fn run_suite(suite: &Suite, deriver: &Deriver, strategy: Strategy) -> SuiteResult {
    if let Suite::Lemmas { n_max } = *suite {
        return SuiteResult { suite: suite.clone(), verdicts: Vec::new(), lemmas: lemma_suite(n_max) };
    }
    let cases = suite.cases();
    let mut verdicts: Vec<Verdict> = cases
        .par_iter()
        .map(|&(n, s, mode)| verify_case_with(deriver, strategy, n, s, mode))
        .collect();
    verdicts.sort_by_key(|v| (v.n, v.s, v.mode));
    SuiteResult { suite: suite.clone(), verdicts, lemmas: Vec::new() }
}

pub fn describe(v: &Verdict) -> String {
    format!(
        "N={} s={} {} ell={} required={} achieved={} {}",
        v.n,
        v.s,
        v.mode,
        v.ell,
        format_ratio(&v.required),
        format_ratio(&v.achieved.bound),
        v.status
    )
}
