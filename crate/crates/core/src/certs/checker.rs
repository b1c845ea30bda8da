//! Independent certificate checker. It re-derives every step from the JSON
//! alone, sharing only exact arithmetic, the axiom list and the
//! exceptional-triple list with the engine.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{Map, Value};
use thiserror::Error;

use super::{CertificateFile, Kind, FORMAT_VERSION};
use crate::bounds::{is_axiom, AxiomSource, AxiomTag};
use crate::demailly::{claimed_in_literature, known_open};
use crate::exact::{binom, format_ratio, parse_ratio, ComparisonVerdict};
use crate::hilbert::{exception, PointMode};
use crate::{LinExpr, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("structural error at {step}: {msg}")]
    Structural { step: String, msg: String },
    #[error("step {step} does not hold: {msg}")]
    Invalid { step: String, msg: String },
    #[error("claim mismatch: {0}")]
    Claim(String),
    #[error("unparseable certificate: {0}")]
    Parse(String),
}

impl CheckError {
    pub fn is_structural(&self) -> bool {
        matches!(self, CheckError::Structural { .. } | CheckError::Parse(_))
    }

    pub fn step(&self) -> Option<&str> {
        match self {
            CheckError::Structural { step, .. } | CheckError::Invalid { step, .. } => Some(step),
            _ => None,
        }
    }
}

/// What a certificate establishes once checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checked {
    pub kind: Kind,
    pub steps: usize,
    pub m0: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Sys {
    n: u32,
    degree: LinExpr,
    points: Vec<LinExpr>,
}

impl Sys {
    fn runs(&self) -> Vec<(LinExpr, u64)> {
        let mut out: Vec<(LinExpr, u64)> = Vec::new();
        for p in &self.points {
            match out.last_mut() {
                Some((e, c)) if e == p => *c += 1,
                _ => out.push((p.clone(), 1)),
            }
        }
        out
    }

    fn same_as(&self, other: &Sys) -> bool {
        self.n == other.n && self.degree == other.degree && self.runs() == other.runs()
    }
}

#[derive(Debug, Clone)]
enum Judgment {
    Chain { start: Sys, cur: Sys, m0: u64 },
    Empty { sys: Sys, m0: u64 },
    Bound { n: u32, s: u64, bound: Rat },
    Verdict(Value),
}

struct Ctx<'a> {
    id: &'a str,
}

impl Ctx<'_> {
    fn structural<T>(&self, msg: impl Into<String>) -> Result<T, CheckError> {
        Err(CheckError::Structural { step: self.id.to_string(), msg: msg.into() })
    }

    fn invalid<T>(&self, msg: impl Into<String>) -> Result<T, CheckError> {
        Err(CheckError::Invalid { step: self.id.to_string(), msg: msg.into() })
    }

    fn field<'v>(&self, params: &'v Map<String, Value>, key: &str) -> Result<&'v Value, CheckError> {
        params
            .get(key)
            .ok_or_else(|| CheckError::Structural { step: self.id.to_string(), msg: format!("missing `{key}`") })
    }

    fn uint(&self, params: &Map<String, Value>, key: &str) -> Result<u64, CheckError> {
        match self.field(params, key)?.as_u64() {
            Some(v) => Ok(v),
            None => self.structural(format!("`{key}` must be a nonnegative integer")),
        }
    }

    fn text<'v>(&self, params: &'v Map<String, Value>, key: &str) -> Result<&'v str, CheckError> {
        match self.field(params, key)?.as_str() {
            Some(v) => Ok(v),
            None => self.structural(format!("`{key}` must be a string")),
        }
    }

    fn rat(&self, params: &Map<String, Value>, key: &str) -> Result<Rat, CheckError> {
        let t = self.text(params, key)?;
        parse_ratio(t).or_else(|e| self.structural(format!("`{key}`: {e}")))
    }

    fn lin(&self, v: &Value, what: &str) -> Result<LinExpr, CheckError> {
        match v.as_str().map(str::parse::<LinExpr>) {
            Some(Ok(e)) => Ok(e),
            _ => self.structural(format!("{what} is not an affine expression")),
        }
    }

    fn indices(&self, params: &Map<String, Value>, key: &str) -> Result<Vec<usize>, CheckError> {
        let Some(arr) = self.field(params, key)?.as_array() else {
            return self.structural(format!("`{key}` must be an array"));
        };
        arr.iter()
            .map(|v| match v.as_u64() {
                Some(i) => Ok(i as usize),
                None => self.structural(format!("`{key}` holds a non-index")),
            })
            .collect()
    }

    fn system(&self, v: &Value) -> Result<Sys, CheckError> {
        let Some(obj) = v.as_object() else { return self.structural("system must be an object") };
        let n = self.uint(obj, "n")?;
        let n = match u32::try_from(n) {
            Ok(n) if n >= 2 => n,
            _ => return self.structural("system dimension must be at least 2"),
        };
        let degree = self.lin(self.field(obj, "degree")?, "degree")?;
        let Some(runs) = self.field(obj, "mults")?.as_array() else {
            return self.structural("`mults` must be an array");
        };
        let mut points = Vec::new();
        for run in runs {
            let Some(run) = run.as_object() else { return self.structural("multiplicity run must be an object") };
            let mult = self.lin(self.field(run, "mult")?, "multiplicity")?;
            let count = self.uint(run, "count")?;
            if count == 0 || count > 1 << 24 {
                return self.structural("run count out of range");
            }
            points.extend(std::iter::repeat_n(mult, count as usize));
        }
        if points.is_empty() {
            return self.structural("system has no points");
        }
        Ok(Sys { n, degree, points })
    }
}

pub fn check_str(text: &str) -> Result<Checked, CheckError> {
    let file = CertificateFile::from_json(text).map_err(|e| CheckError::Parse(e.to_string()))?;
    check(&file)
}

/// Re-derives every step and compares the final judgment with the claim.
pub fn check(file: &CertificateFile) -> Result<Checked, CheckError> {
    let top = Ctx { id: "certificate" };
    if file.version != FORMAT_VERSION {
        return top.structural(format!("unsupported version {}", file.version));
    }
    if file.steps.is_empty() {
        return top.structural("no steps");
    }
    let mut done: HashMap<&str, Judgment> = HashMap::new();
    let mut max_m0 = 1u64;
    let mut last = None;
    for rec in &file.steps {
        let ctx = Ctx { id: &rec.id };
        if done.contains_key(rec.id.as_str()) {
            return ctx.structural("duplicate step id");
        }
        let mut inputs = Vec::new();
        for i in &rec.inputs {
            match done.get(i.as_str()) {
                Some(j) => inputs.push(j.clone()),
                None => return ctx.structural(format!("input `{i}` is not an earlier step")),
            }
        }
        let j = apply(&ctx, &rec.rule, &rec.params, inputs)?;
        if let Judgment::Empty { m0, .. } = &j {
            max_m0 = max_m0.max(*m0);
        }
        done.insert(&rec.id, j.clone());
        last = Some(j);
    }
    let last = last.expect("steps are nonempty");
    match (file.kind, &last) {
        (Kind::Emptiness, Judgment::Empty { sys, m0 }) => {
            let claim = top.system(&file.claim).map_err(|e| CheckError::Claim(e.to_string()))?;
            if !claim.same_as(sys) {
                return Err(CheckError::Claim("final system differs from the claim".into()));
            }
            if *m0 != file.m0 {
                return Err(CheckError::Claim(format!("m0 is {m0}, certificate says {}", file.m0)));
            }
        }
        (Kind::Bound, Judgment::Bound { n, s, bound }) => {
            let expected = serde_json::json!({ "n": n, "s": s, "bound": format_ratio(bound) });
            if expected != file.claim {
                return Err(CheckError::Claim(format!("derived {expected}, claimed {}", file.claim)));
            }
            if max_m0 != file.m0 {
                return Err(CheckError::Claim(format!("m0 is {max_m0}, certificate says {}", file.m0)));
            }
        }
        (Kind::Verdict, Judgment::Verdict(v)) => {
            if *v != file.claim {
                return Err(CheckError::Claim(format!("derived {v}, claimed {}", file.claim)));
            }
            if max_m0 != file.m0 {
                return Err(CheckError::Claim(format!("m0 is {max_m0}, certificate says {}", file.m0)));
            }
        }
        _ => return top.structural("final step does not match the certificate kind"),
    }
    Ok(Checked { kind: file.kind, steps: file.steps.len(), m0: file.m0 })
}

fn arity(ctx: &Ctx, inputs: &[Judgment], n: usize) -> Result<(), CheckError> {
    if inputs.len() != n {
        return ctx.structural(format!("expects {n} input(s), got {}", inputs.len()));
    }
    Ok(())
}

fn bound_input(ctx: &Ctx, j: &Judgment) -> Result<(u32, u64, Rat), CheckError> {
    match j {
        Judgment::Bound { n, s, bound } => Ok((*n, *s, bound.clone())),
        _ => ctx.structural("input is not a bound"),
    }
}

fn empty_input(ctx: &Ctx, j: &Judgment) -> Result<(Sys, u64), CheckError> {
    match j {
        Judgment::Empty { sys, m0 } => Ok((sys.clone(), *m0)),
        _ => ctx.structural("input is not an emptiness judgment"),
    }
}

/// `Some((p, q))` when `e = q m` with `q > 0`.
fn homogeneous(e: &LinExpr) -> Option<BigInt> {
    (e.intercept.is_zero() && e.slope.is_positive()).then(|| e.slope.clone())
}

fn degree_p(sys: &Sys) -> Option<BigInt> {
    (sys.degree.intercept == -BigInt::one() && sys.degree.slope.is_positive()).then(|| sys.degree.slope.clone())
}

fn apply(ctx: &Ctx, rule: &str, params: &Map<String, Value>, inputs: Vec<Judgment>) -> Result<Judgment, CheckError> {
    match rule {
        "start" => {
            arity(ctx, &inputs, 0)?;
            let sys = ctx.system(ctx.field(params, "system")?)?;
            Ok(Judgment::Chain { start: sys.clone(), cur: sys, m0: 1 })
        }
        "cremona" => {
            arity(ctx, &inputs, 1)?;
            let Judgment::Chain { start, mut cur, m0 } = inputs.into_iter().next().expect("arity") else {
                return ctx.structural("input is not a reduction chain");
            };
            let sel = ctx.indices(params, "selection")?;
            let recorded = ctx.lin(ctx.field(params, "k")?, "k")?;
            let mut sorted = sel.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sel.len() != cur.n as usize + 1 || sorted.len() != sel.len() {
                return ctx.invalid(format!("selection must be {} distinct indices", cur.n + 1));
            }
            if sorted.last().is_some_and(|&i| i >= cur.points.len()) {
                return ctx.invalid("selection index out of range");
            }
            let mut k = cur.degree.scale(&BigInt::from(cur.n - 1));
            for &i in &sel {
                k = k - cur.points[i].clone();
            }
            if k != recorded {
                return ctx.invalid(format!("k recomputes to {k}, recorded {recorded}"));
            }
            for &i in &sel {
                cur.points[i] = cur.points[i].clone() + k.clone();
            }
            cur.degree = cur.degree.clone() + k;
            Ok(Judgment::Chain { start, cur, m0 })
        }
        "clamp" => {
            arity(ctx, &inputs, 1)?;
            let Judgment::Chain { start, mut cur, m0 } = inputs.into_iter().next().expect("arity") else {
                return ctx.structural("input is not a reduction chain");
            };
            let dropped = ctx.indices(params, "dropped")?;
            let recorded = ctx.uint(params, "threshold")?;
            let mut sorted = dropped.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != dropped.len() || sorted.is_empty() {
                return ctx.invalid("dropped indices must be distinct and nonempty");
            }
            let mut t = 1u64;
            for &i in &sorted {
                let Some(p) = cur.points.get(i) else { return ctx.invalid("dropped index out of range") };
                match p.eventually_nonpositive() {
                    Some(x) => t = t.max(x),
                    None => return ctx.invalid(format!("multiplicity {p} is not eventually nonpositive")),
                }
            }
            if t != recorded {
                return ctx.invalid(format!("threshold recomputes to {t}, recorded {recorded}"));
            }
            for &i in sorted.iter().rev() {
                cur.points.remove(i);
            }
            Ok(Judgment::Chain { start, cur, m0: m0.max(t) })
        }
        "contradiction" => {
            arity(ctx, &inputs, 1)?;
            let Judgment::Chain { start, cur, m0 } = inputs.into_iter().next().expect("arity") else {
                return ctx.structural("input is not a reduction chain");
            };
            let recorded = ctx.uint(params, "threshold")?;
            let w = ctx.field(params, "witness")?;
            let t = if w.as_str() == Some("negative_degree") {
                match cur.degree.compare(&LinExpr::zero()) {
                    ComparisonVerdict::EventuallyLess { m0 } => m0,
                    _ => return ctx.invalid("degree is not eventually negative"),
                }
            } else if let Some(i) = w.as_u64() {
                let Some(p) = cur.points.get(i as usize) else { return ctx.invalid("witness out of range") };
                match p.compare(&cur.degree) {
                    ComparisonVerdict::EventuallyGreater { m0 } => m0,
                    _ => return ctx.invalid(format!("multiplicity {p} does not exceed degree {}", cur.degree)),
                }
            } else {
                return ctx.structural("witness must be an index or \"negative_degree\"");
            };
            if t != recorded {
                return ctx.invalid(format!("threshold recomputes to {t}, recorded {recorded}"));
            }
            Ok(Judgment::Empty { sys: start, m0: m0.max(t) })
        }
        "glue" => {
            arity(ctx, &inputs, 2)?;
            let (left, lm) = empty_input(ctx, &inputs[0])?;
            let (right, rm) = empty_input(ctx, &inputs[1])?;
            if left.n != right.n {
                return ctx.invalid("dimensions differ");
            }
            let target = left.degree.clone() + LinExpr::constant(BigInt::one());
            let Some(pos) = right.points.iter().position(|p| *p == target) else {
                return ctx.invalid(format!("right system has no multiplicity {target}"));
            };
            let mut points = right.points.clone();
            points.splice(pos..=pos, left.points);
            Ok(Judgment::Empty { sys: Sys { n: right.n, degree: right.degree, points }, m0: lm.max(rm) })
        }
        "empty_from_bound" => {
            arity(ctx, &inputs, 1)?;
            let (n, s, bound) = bound_input(ctx, &inputs[0])?;
            let q: BigInt = match ctx.text(params, "q")?.parse() {
                Ok(q) => q,
                Err(_) => return ctx.structural("`q` must be an integer"),
            };
            if !q.is_positive() {
                return ctx.invalid("q must be positive");
            }
            let scaled = bound * Rat::from_integer(q.clone());
            if !scaled.is_integer() {
                return ctx.invalid("bound times q is not an integer");
            }
            let count = usize::try_from(s).ok().filter(|c| *c <= 1 << 24);
            let Some(count) = count else { return ctx.invalid("too many points") };
            let sys = Sys {
                n,
                degree: LinExpr::new(scaled.to_integer(), -BigInt::one()),
                points: vec![LinExpr::new(q, BigInt::zero()); count],
            };
            Ok(Judgment::Empty { sys, m0: 1 })
        }
        "axiom" => {
            arity(ctx, &inputs, 0)?;
            let source: AxiomSource = match serde_json::from_value(ctx.field(params, "source")?.clone()) {
                Ok(s) => s,
                Err(e) => return ctx.structural(format!("unknown axiom source: {e}")),
            };
            let n = u32::try_from(ctx.uint(params, "n")?).or_else(|_| ctx.structural("n out of range"))?;
            let s = ctx.uint(params, "s")?;
            let bound = ctx.rat(params, "bound")?;
            let tag = AxiomTag { source, n, s, bound: bound.clone() };
            if !is_axiom(&tag) {
                return ctx.invalid(format!("{tag} with bound {} is not in the axiom list", format_ratio(&bound)));
            }
            Ok(Judgment::Bound { n, s, bound })
        }
        "monotone_lift" => {
            arity(ctx, &inputs, 1)?;
            let (n, s, bound) = bound_input(ctx, &inputs[0])?;
            let target = ctx.uint(params, "s")?;
            if target < s {
                return ctx.invalid(format!("cannot lift from {s} down to {target}"));
            }
            Ok(Judgment::Bound { n, s: target, bound })
        }
        "double_split" => {
            arity(ctx, &inputs, 1)?;
            let (n, s, bound) = bound_input(ctx, &inputs[0])?;
            let s = 1u64.checked_shl(n).and_then(|p| p.checked_mul(s));
            let Some(s) = s else { return ctx.invalid("point count overflows") };
            Ok(Judgment::Bound { n, s, bound: bound * Rat::from_integer(BigInt::from(2)) })
        }
        "clump" => {
            arity(ctx, &inputs, 1)?;
            let (sys, _) = empty_input(ctx, &inputs[0])?;
            let a = ctx.uint(params, "a")?;
            let b = ctx.uint(params, "b")?;
            if a + b != sys.points.len() as u64 {
                return ctx.invalid("a + b does not match the number of points");
            }
            let Some(p) = degree_p(&sys) else { return ctx.invalid("degree is not p m - 1") };
            let (doubles, simples) = sys.points.split_at(a as usize);
            let q = if b > 0 {
                homogeneous(&simples[0])
            } else {
                homogeneous(&doubles[0]).filter(|d| d.is_even()).map(|d| d / 2)
            };
            let Some(q) = q else { return ctx.invalid("multiplicities are not of the form q m") };
            let two_q = LinExpr::new(&q * 2, BigInt::zero());
            let one_q = LinExpr::new(q.clone(), BigInt::zero());
            if doubles.iter().any(|d| *d != two_q) || simples.iter().any(|e| *e != one_q) {
                return ctx.invalid("system is not ((2q m)^a, (q m)^b)");
            }
            let s = 1u64.checked_shl(sys.n).and_then(|p| p.checked_mul(a)).and_then(|x| x.checked_add(b));
            let Some(s) = s else { return ctx.invalid("point count overflows") };
            Ok(Judgment::Bound { n: sys.n, s, bound: Rat::new(p, q) })
        }
        "chudnovsky" => {
            arity(ctx, &inputs, 0)?;
            let n = u32::try_from(ctx.uint(params, "n")?).or_else(|_| ctx.structural("n out of range"))?;
            let s = ctx.uint(params, "s")?;
            let c = ctx.uint(params, "c")?;
            if n < 2 || c < 2 || binom(i64::from(n) + c as i64, i64::from(n)) > BigInt::from(s) {
                return ctx.invalid(format!("needs c >= 2 and s >= C(N+c, N), got c={c}"));
            }
            Ok(Judgment::Bound { n, s, bound: Rat::new(BigInt::from(u64::from(n) + c + 1), BigInt::from(n)) })
        }
        "decompose" => {
            let k = ctx.uint(params, "k")?;
            if k == 0 {
                return ctx.invalid("k must be positive");
            }
            arity(ctx, &inputs, k as usize + 1)?;
            let mut a = Vec::new();
            let mut total = 0u64;
            let mut dim = None;
            for j in &inputs {
                let (n, s, bound) = bound_input(ctx, j)?;
                if dim.is_some_and(|d| d != n) {
                    return ctx.invalid("inputs live in different dimensions");
                }
                dim = Some(n);
                total += s;
                a.push(bound);
            }
            let kk = Rat::from_integer(BigInt::from(k));
            let k1 = &kk + Rat::one();
            for (j, aj) in a[..k as usize].iter().enumerate() {
                if *aj < kk || *aj > k1 {
                    return ctx.invalid(format!("a_{} = {} not in [k, k+1]", j + 1, format_ratio(aj)));
                }
            }
            if a[0] <= kk {
                return ctx.invalid("precondition a_1 > k violated");
            }
            let last = &a[k as usize];
            if *last > k1 || !last.is_positive() {
                return ctx.invalid("a_{k+1} must lie in (0, k+1]");
            }
            let mut sum = Rat::zero();
            for aj in &a[..k as usize] {
                sum += aj.recip();
            }
            let bound = (Rat::one() - sum) * last + kk;
            Ok(Judgment::Bound { n: dim.expect("at least two inputs") + 1, s: total, bound })
        }
        "weaken" => {
            arity(ctx, &inputs, 1)?;
            let (n, s, old) = bound_input(ctx, &inputs[0])?;
            let bound = ctx.rat(params, "bound")?;
            if !bound.is_positive() || bound > old {
                return ctx.invalid("weakened bound must be positive and no larger");
            }
            Ok(Judgment::Bound { n, s, bound })
        }
        "bound_from_empty" => {
            arity(ctx, &inputs, 1)?;
            let (sys, _) = empty_input(ctx, &inputs[0])?;
            let Some(p) = degree_p(&sys) else { return ctx.invalid("degree is not p m - 1") };
            let Some(q) = homogeneous(&sys.points[0]) else { return ctx.invalid("multiplicity is not q m") };
            if sys.points.iter().any(|e| *e != sys.points[0]) {
                return ctx.invalid("multiplicities differ");
            }
            Ok(Judgment::Bound { n: sys.n, s: sys.points.len() as u64, bound: Rat::new(p, q) })
        }
        "verdict" => {
            arity(ctx, &inputs, 1)?;
            let (n, s, achieved) = bound_input(ctx, &inputs[0])?;
            let mode: PointMode = match serde_json::from_value(ctx.field(params, "mode")?.clone()) {
                Ok(m) => m,
                Err(_) => return ctx.structural("unknown mode"),
            };
            Ok(Judgment::Verdict(recompute_verdict(n, s, mode, &achieved)))
        }
        other => ctx.structural(format!("unknown rule `{other}`")),
    }
}

fn recompute_verdict(n: u32, s: u64, mode: PointMode, achieved: &Rat) -> Value {
    let nn = i64::from(n);
    let cond = BigInt::from(s) * BigInt::from(n + 1);
    let cols = |d: i64| binom(d + nn, nn);
    let mut ell = 0i64;
    loop {
        let (lo, hi) = (cols(ell), cols(ell + 1));
        let inside = match mode {
            PointMode::VeryGeneral => lo <= cond && cond < hi,
            PointMode::General => lo < cond && cond <= hi,
        };
        if inside {
            break;
        }
        ell += 1;
    }
    let (required, reg_bound) = match mode {
        PointMode::VeryGeneral => (Rat::new(BigInt::from(nn + ell), BigInt::from(nn + 1)), None),
        PointMode::General => {
            let mut d = 0i64;
            while cols(d) < cond {
                d += 1;
            }
            while exception(n, s, d as u32).is_some() {
                d += 1;
            }
            let reg = d + 1;
            (Rat::new(BigInt::from(reg + nn - 1), BigInt::from(nn + 1)), Some(reg))
        }
    };
    let status = if *achieved >= required {
        "PROVEN"
    } else if known_open(n, s, mode) {
        "UNPROVEN"
    } else if claimed_in_literature(n, s, mode) {
        "DISCREPANCY"
    } else {
        "UNPROVEN"
    };
    let containment_r = match reg_bound {
        Some(reg) if status == "PROVEN" => {
            let gap = Rat::from_integer(BigInt::from(nn + 1)) * achieved - Rat::from_integer(BigInt::from(reg + nn - 1));
            if gap.is_positive() {
                let r = (Rat::from_integer(BigInt::from(nn - 1)) * achieved / gap).ceil().to_integer();
                Some(r.max(BigInt::one()).to_string())
            } else {
                None
            }
        }
        _ => None,
    };
    serde_json::json!({
        "n": n,
        "s": s,
        "mode": mode,
        "ell": ell.to_u32().expect("ell is small"),
        "required": format_ratio(&required),
        "achieved": format_ratio(achieved),
        "status": status,
        "reg_bound": reg_bound,
        "containment_r": containment_r,
    })
}
