//! Orchestration: picks the best certified bound at `(N, s)` from landmark
//! facts, each lifted monotonically to `s`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use super::{
    chudnovsky_bound, clump, decompose, decompose_value, double_points_split, kb_axioms, monotone_lift, weaken,
    BoundFact,
};
use crate::cremona::{bound_from_empty, empty_from_bound, glue, prove_empty, SystemSpec, DEFAULT_MAX_STEPS};
use crate::exact::{approx, binom};
use crate::Rat;

pub const DEFAULT_SEARCH_DEPTH: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Only the derivation routes used in the published proofs.
    Paper,
    /// Published routes plus splits, Chudnovsky-type bounds and decompositions
    /// explored to the given depth.
    Search { depth: u32 },
}

impl Strategy {
    pub fn search() -> Self {
        Strategy::Search { depth: DEFAULT_SEARCH_DEPTH }
    }

    fn shallower(self) -> Self {
        match self {
            Strategy::Search { depth } if depth > 1 => Strategy::Search { depth: depth - 1 },
            _ => Strategy::Paper,
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paper" => Ok(Strategy::Paper),
            "search" => Ok(Strategy::search()),
            other => match other.strip_prefix("search:").map(str::parse) {
                Some(Ok(depth)) => Ok(Strategy::Search { depth }),
                _ => Err(format!("unknown strategy `{other}`")),
            },
        }
    }
}

type Key = (u32, u64, Strategy);
/// Breakpoints of one dimension, and how far they have been computed.
type Ladder = (u64, Arc<Vec<Breakpoint>>);

/// Memoized derivations. Cheap to share across threads.
#[derive(Default)]
pub struct Deriver {
    memo: RwLock<HashMap<Key, Arc<BoundFact>>>,
    ladders: RwLock<HashMap<(u32, Strategy), Ladder>>,
    p4_glued: [OnceLock<Option<Arc<BoundFact>>>; 3],
    p6_clump: OnceLock<Option<Arc<BoundFact>>>,
}

impl Deriver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn global() -> &'static Deriver {
        static GLOBAL: OnceLock<Deriver> = OnceLock::new();
        GLOBAL.get_or_init(Deriver::new)
    }

    pub fn derive(&self, n: u32, s: u64, strategy: Strategy) -> Arc<BoundFact> {
        assert!(n >= 2 && s >= 1, "derive needs N >= 2 and s >= 1");
        let key = (n, s, strategy);
        if let Some(f) = self.memo.read().expect("memo lock").get(&key) {
            return f.clone();
        }
        let mut candidates = self.published_landmarks(n, s);
        if let Strategy::Search { .. } = strategy {
            candidates.extend(self.search_landmarks(n, s, strategy.shallower()));
        }
        let best = candidates
            .into_iter()
            .filter(|f| f.s <= s)
            .reduce(|best, f| if f.bound > best.bound { f } else { best })
            .expect("the k=1 grid axiom is always present");
        let fact = monotone_lift(&best, s).expect("landmarks sit at or below s");
        self.memo.write().expect("memo lock").entry(key).or_insert(fact).clone()
    }

    fn published_landmarks(&self, n: u32, s: u64) -> Vec<Arc<BoundFact>> {
        let mut out = kb_axioms(n, s);
        let split_q = match n {
            3 => Some(7),
            n if n >= 5 => Some(u64::from(n) + 1),
            _ => None,
        };
        if let Some(q) = split_q {
            if (1u64 << n).saturating_mul(q) <= s {
                out.extend(double_points_split(&self.derive(n, q, Strategy::Paper)).ok());
            }
        }
        match n {
            4 => {
                for (i, &(at, _, _, _)) in P4_SCRIPTS.iter().enumerate() {
                    if at <= s {
                        out.extend(self.p4_script(i));
                    }
                }
            }
            5 => {
                for &(at, k, rs) in P5_SCRIPTS.iter() {
                    if at <= s {
                        let parts: Vec<_> = rs.iter().map(|&r| self.derive(4, r, Strategy::Paper)).collect();
                        out.extend(decompose(5, k, &parts).ok());
                    }
                }
            }
            6 if s >= 429 => out.extend(self.p6_clump()),
            _ => {}
        }
        if n >= 5 {
            out.extend(chudnovsky_bound(n, s));
        }
        if n >= 6 {
            out.extend(self.case_two(n, s));
        }
        out
    }

    /// `I((20m)^6)_{30m-1} = 0` glued into a one-step Cremona reduction.
    fn p4_script(&self, i: usize) -> Option<Arc<BoundFact>> {
        self.p4_glued[i]
            .get_or_init(|| {
                let (_, degree, start, glues) = P4_SCRIPTS[i];
                let six = self.derive(4, 6, Strategy::Paper);
                let left = empty_from_bound(&six, &BigInt::from(20)).ok()?;
                let sys = SystemSpec::new(4, degree.parse().ok()?, SystemSpec::parse_mults(start).ok()?).ok()?;
                let mut cert = prove_empty(&sys, DEFAULT_MAX_STEPS).ok()?.certificate()?;
                for _ in 0..glues {
                    cert = glue(&left, &cert).ok()?;
                }
                bound_from_empty(&cert).ok()
            })
            .clone()
    }

    fn p6_clump(&self) -> Option<Arc<BoundFact>> {
        self.p6_clump
            .get_or_init(|| clump(6, 6, 45).discharge(&BigInt::from(22), &BigInt::from(10), DEFAULT_MAX_STEPS).ok())
            .clone()
    }

    /// Decompositions over `P^{N-1}` for the `ell` beyond the quadratic root,
    /// with both inputs capped at 2.
    fn case_two(&self, n: u32, s: u64) -> Vec<Arc<BoundFact>> {
        let mut out = Vec::new();
        let nn = i64::from(n);
        for ell in 2..n {
            let l = i64::from(ell);
            if l * l - 3 * l - (nn - 1) <= 0 {
                continue;
            }
            let share = |top: i64| {
                let c = binom(top, nn - 1);
                let q = BigInt::from(n);
                ((&c + &q - BigInt::one()) / q).to_u64()
            };
            let (Some(r1), Some(r2)) = (share(nn - 1 + l), share(nn - 2 + l)) else { continue };
            if r1 + r2 > s {
                continue;
            }
            let cap = |r: u64| {
                let f = self.derive(n - 1, r, Strategy::Paper);
                let two = Rat::from_integer(BigInt::from(2));
                if f.bound > two {
                    weaken(&f, two).ok()
                } else {
                    Some(f)
                }
            };
            if let (Some(a1), Some(a2)) = (cap(r1), cap(r2)) {
                out.extend(decompose(n, 1, &[a1, a2]).ok());
            }
        }
        out
    }

    fn search_landmarks(&self, n: u32, s: u64, sub: Strategy) -> Vec<Arc<BoundFact>> {
        let mut out = Vec::new();
        let mut q = 1u64;
        while (1u64 << n).saturating_mul(q) <= s {
            out.extend(double_points_split(&self.derive(n, q, sub)).ok());
            q += 1;
        }
        out.extend(chudnovsky_bound(n, s));
        if n >= 3 {
            out.extend(self.best_decomposition(n, s, 1, sub));
            out.extend(self.best_decomposition(n, s, 2, sub));
        }
        out
    }

    /// Breakpoints of `r -> derive(n, r)`: the point counts where the bound
    /// increases, with the new value. Covers at least `1..=upto`.
    fn breakpoints(&self, n: u32, upto: u64, strategy: Strategy) -> Arc<Vec<Breakpoint>> {
        let key = (n, strategy);
        let (done, known) = match self.ladders.read().expect("ladder lock").get(&key) {
            Some((done, v)) if *done >= upto => return v.clone(),
            Some((done, v)) => (*done, v.clone()),
            None => (0, Arc::new(Vec::new())),
        };
        let mut points = (*known).clone();
        for r in done + 1..=upto {
            let v = self.derive(n, r, strategy).bound.clone();
            if points.last().is_none_or(|b| b.value != v) {
                points.push(Breakpoint { r, approx: approx(&v), value: v });
            }
        }
        let points = Arc::new(points);
        let mut ladders = self.ladders.write().expect("ladder lock");
        let entry = ladders.entry(key).or_insert((0, Arc::new(Vec::new())));
        if entry.0 < upto {
            *entry = (upto, points.clone());
        }
        points
    }

    /// Best `k`-decomposition with every input capped at `k+1`. Inputs are
    /// monotone in their point count, so the last share takes whatever
    /// remains and the others range over breakpoints with values in
    /// `[k, k+1]`, stopping at the first one that reaches the cap.
    ///
    /// The walk scores splits in floating point and keeps every split within
    /// a small margin of the best score; only those are ranked exactly.
    fn best_decomposition(&self, n: u32, s: u64, k: u32, sub: Strategy) -> Option<Arc<BoundFact>> {
        let floor = Rat::from_integer(BigInt::from(k));
        let cap = Rat::from_integer(BigInt::from(k + 1));
        let capf = f64::from(k + 1);
        let bp = self.breakpoints(n - 1, s - 1, sub);
        let at = |r: u64| &bp[bp.partition_point(|b| b.r <= r) - 1];
        let mut ladder: Vec<Rung> = Vec::new();
        for b in bp.iter().take_while(|b| b.r < s) {
            if b.value >= floor {
                let top = b.value >= cap;
                ladder.push(Rung { r: b.r, inv: 1.0 / b.approx.min(capf), above: b.value > floor });
                if top {
                    break;
                }
            }
        }
        struct Walk<'a> {
            ladder: &'a [Rung],
            k: usize,
            s: u64,
            tail: &'a dyn Fn(u64) -> f64,
            rs: Vec<u64>,
            best: f64,
            near: Vec<(f64, Vec<u64>)>,
        }
        impl Walk<'_> {
            fn go(&mut self, used: u64, coef: f64) {
                if self.rs.len() == self.k {
                    let v = coef * (self.tail)(self.s - used);
                    if v >= self.best - MARGIN {
                        self.best = self.best.max(v);
                        let mut shares = self.rs.clone();
                        shares.push(self.s - used);
                        self.near.push((v, shares));
                    }
                    return;
                }
                for i in 0..self.ladder.len() {
                    let rung = self.ladder[i];
                    if used + rung.r >= self.s {
                        break;
                    }
                    if self.rs.is_empty() && !rung.above {
                        continue;
                    }
                    self.rs.push(rung.r);
                    self.go(used + rung.r, coef - rung.inv);
                    self.rs.pop();
                }
            }
        }
        let tail = |r: u64| at(r).approx.min(capf);
        let mut walk = Walk { ladder: &ladder, k: k as usize, s, tail: &tail, rs: Vec::new(), best: f64::MIN, near: Vec::new() };
        walk.go(0, 1.0);
        let cutoff = walk.best - MARGIN;
        let mut best: Option<(Rat, Vec<u64>)> = None;
        for (_, rs) in walk.near.into_iter().filter(|(v, _)| *v >= cutoff) {
            let a: Vec<Rat> = rs.iter().map(|&r| at(r).value.clone().min(cap.clone())).collect();
            if let Ok(v) = decompose_value(k, &a) {
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, rs));
                }
            }
        }
        let (_, rs) = best?;
        let parts: Vec<Arc<BoundFact>> = rs
            .iter()
            .map(|&r| {
                let f = self.derive(n - 1, r, sub);
                if f.bound > cap {
                    weaken(&f, cap.clone()).expect("cap is positive and below the bound")
                } else {
                    f
                }
            })
            .collect();
        decompose(n, k, &parts).ok()
    }
}

const MARGIN: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Breakpoint {
    r: u64,
    value: Rat,
    approx: f64,
}

#[derive(Debug, Clone, Copy)]
struct Rung {
    r: u64,
    inv: f64,
    /// Exactly above `k`, as the first input must be.
    above: bool,
}

/// `(landmark s, degree, starting system, number of gluings)` in `P^4`.
const P4_SCRIPTS: [(u64, &str, &str, usize); 3] = [
    (15, "36m-1", "20m x9, 30m", 1),
    (43, "44m-1", "20m, 30m x7", 7),
    (67, "48m-1", "20m, 30m x11", 11),
];

/// `(landmark s, k, point counts in P^4)` for the `P^5` decompositions.
const P5_SCRIPTS: [(u64, u32, &[u64]); 3] = [(14, 1, &[8, 6]), (22, 1, &[15, 7]), (125, 2, &[67, 43, 15])];

pub fn derive_bound(n: u32, s: u64, strategy: Strategy) -> Arc<BoundFact> {
    Deriver::global().derive(n, s, strategy)
}

