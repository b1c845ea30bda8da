//! Dimension of linear systems with assigned base-point multiplicities at
//! random points over a prime field.
//!
//! Full column rank at one specialization forces full rank for generic
//! points, so `certified_empty` is a proof. A positive `dim_at_sample` is
//! only evidence.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cremona::SystemSpec;
use crate::exact::binom;
use crate::hilbert::{exception, hf_double, HfValue};

/// `2^61 - 1`, which allows a shift-and-add reduction.
pub const MERSENNE_61: u64 = (1 << 61) - 1;
pub const DEFAULT_PRIME: u64 = MERSENNE_61;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_MAX_COLUMNS: usize = 3000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{columns} columns exceed the size cap of {cap}")]
    SizeCap { columns: u128, cap: usize },
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("prime {prime} must exceed the degree {d}")]
    PrimeTooSmall { prime: u64, d: i64 },
    #[error("N must be at least 1")]
    Dimension,
    #[error("dimension {0} outside the supported range")]
    Unsupported(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub prime: u64,
    pub seed: u64,
    pub max_columns: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { prime: DEFAULT_PRIME, seed: DEFAULT_SEED, max_columns: DEFAULT_MAX_COLUMNS }
    }
}

trait Modulus: Copy {
    fn p(self) -> u64;
    fn mul(self, a: u64, b: u64) -> u64;

    fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p() - b
        }
    }

    fn pow(self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.p();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn inv(self, a: u64) -> u64 {
        self.pow(a, self.p() - 2)
    }
}

#[derive(Clone, Copy)]
struct Mersenne61;

impl Modulus for Mersenne61 {
    fn p(self) -> u64 {
        MERSENNE_61
    }

    fn mul(self, a: u64, b: u64) -> u64 {
        let t = u128::from(a) * u128::from(b);
        let folded = (t as u64 & MERSENNE_61) + (t >> 61) as u64;
        if folded >= MERSENNE_61 {
            folded - MERSENNE_61
        } else {
            folded
        }
    }
}

#[derive(Clone, Copy)]
struct Prime(u64);

impl Modulus for Prime {
    fn p(self) -> u64 {
        self.0
    }

    fn mul(self, a: u64, b: u64) -> u64 {
        (u128::from(a) * u128::from(b) % u128::from(self.0)) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub n: u32,
    pub d: i64,
    pub mults: Vec<i64>,
    pub columns: u64,
    pub conditions: u64,
    pub rank: u64,
    pub dim_at_sample: u64,
    pub certified_empty: bool,
    pub prime: u64,
    pub seed: u64,
}

fn exponents(vars: usize, d: u32) -> Vec<Vec<u32>> {
    fn go(vars: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() + 1 == vars {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            go(vars, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(vars, d, &mut Vec::with_capacity(vars), &mut out);
    out
}

/// Dimension of degree-`d` forms in `N+1` variables vanishing to the given
/// orders at random points.
pub fn system_dim(n: u32, d: i64, mults: &[i64], cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    if n == 0 {
        return Err(OracleError::Dimension);
    }
    if n > 64 {
        return Err(OracleError::Unsupported(n));
    }
    if !primal_check::miller_rabin(cfg.prime) {
        return Err(OracleError::NotPrime(cfg.prime));
    }
    let nn = i64::from(n);
    let conditions: u64 = mults
        .iter()
        .filter(|&&m| m > 0)
        .map(|&m| binom(nn + m - 1, nn).to_u64().unwrap_or(u64::MAX))
        .fold(0u64, u64::saturating_add);
    let base = OracleResult {
        n,
        d,
        mults: mults.to_vec(),
        columns: 0,
        conditions,
        rank: 0,
        dim_at_sample: 0,
        certified_empty: true,
        prime: cfg.prime,
        seed: cfg.seed,
    };
    if d < 0 {
        return Ok(base);
    }
    if cfg.prime <= d as u64 {
        return Err(OracleError::PrimeTooSmall { prime: cfg.prime, d });
    }
    let columns = binom(d + nn, nn).to_u128().unwrap_or(u128::MAX);
    if columns > cfg.max_columns as u128 {
        return Err(OracleError::SizeCap { columns, cap: cfg.max_columns });
    }
    let rank = if cfg.prime == MERSENNE_61 {
        rank_of(Mersenne61, n, d as u32, mults, cfg.seed)
    } else {
        rank_of(Prime(cfg.prime), n, d as u32, mults, cfg.seed)
    };
    let columns = columns as u64;
    Ok(OracleResult { columns, rank, dim_at_sample: columns - rank, certified_empty: rank == columns, ..base })
}

fn rank_of<M: Modulus>(f: M, n: u32, d: u32, mults: &[i64], seed: u64) -> u64 {
    let vars = n as usize + 1;
    let monos = exponents(vars, d);
    let cols = monos.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pivots: Vec<Option<Vec<u64>>> = vec![None; cols];
    let mut rank = 0usize;
    // falling[a][b] = a (a-1) ... (a-b+1)
    let du = d as usize;
    let mut falling = vec![vec![0u64; du + 1]; du + 1];
    for (a, row) in falling.iter_mut().enumerate() {
        row[0] = 1;
        for b in 1..=a {
            row[b] = f.mul(row[b - 1], (a - b + 1) as u64);
        }
    }
    for &m in mults {
        // the point is drawn even when it imposes nothing, so results do not
        // depend on which multiplicities are positive
        let point: Vec<u64> = (0..vars).map(|_| rng.random_range(0..f.p())).collect();
        if m <= 0 || rank == cols {
            continue;
        }
        let powers: Vec<Vec<u64>> = point
            .iter()
            .map(|&x| {
                let mut p = vec![1u64; du + 1];
                for e in 1..=du {
                    p[e] = f.mul(p[e - 1], x);
                }
                p
            })
            .collect();
        let order = (m - 1) as u32;
        if order > d {
            // every derivative of order m-1 > d vanishes identically, but
            // the point still kills all forms of degree < m
            for (c, pivot) in pivots.iter_mut().enumerate() {
                if pivot.is_none() {
                    let mut row = vec![0u64; cols];
                    row[c] = 1;
                    *pivot = Some(row);
                    rank += 1;
                }
            }
            continue;
        }
        for beta in exponents(vars, order) {
            let mut row: Vec<u64> = monos
                .iter()
                .map(|alpha| {
                    let mut v = 1u64;
                    for i in 0..vars {
                        let (a, b) = (alpha[i] as usize, beta[i] as usize);
                        if b > a {
                            return 0;
                        }
                        v = f.mul(v, f.mul(falling[a][b], powers[i][a - b]));
                    }
                    v
                })
                .collect();
            if insert_row(f, &mut pivots, &mut row) {
                rank += 1;
                if rank == cols {
                    break;
                }
            }
        }
    }
    rank as u64
}

/// Reduces `row` against the stored pivots; keeps it if anything survives.
fn insert_row<M: Modulus>(f: M, pivots: &mut [Option<Vec<u64>>], row: &mut [u64]) -> bool {
    for c in 0..row.len() {
        if row[c] == 0 {
            continue;
        }
        match &pivots[c] {
            Some(p) => {
                let factor = row[c];
                for j in c..row.len() {
                    if p[j] != 0 {
                        row[j] = f.sub(row[j], f.mul(factor, p[j]));
                    }
                }
            }
            None => {
                let inv = f.inv(row[c]);
                for v in row[c..].iter_mut() {
                    *v = f.mul(*v, inv);
                }
                pivots[c] = Some(row.to_vec());
                return true;
            }
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AhRow {
    pub n: u32,
    pub s: u64,
    pub d: u32,
    pub formula: Option<u64>,
    pub exceptional: bool,
    pub oracle_hf: u64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AhReport {
    pub rows: Vec<AhRow>,
    pub skipped: usize,
}

impl AhReport {
    /// Non-exceptional triples that disagree, and exceptional triples that
    /// show no defect.
    pub fn failures(&self) -> Vec<&AhRow> {
        self.rows.iter().filter(|r| !r.agrees).collect()
    }
}

/// Compares the double-point Hilbert function against the oracle on every
/// `(N, s, d)` in range.
pub fn ah_crosscheck(n_max: u32, s_max: u64, d_max: u32, cfg: &OracleConfig) -> Result<AhReport, OracleError> {
    let mut rows = Vec::new();
    let mut skipped = 0;
    for n in 2..=n_max {
        for s in 1..=s_max {
            for d in 0..=d_max {
                let res = match system_dim(n, i64::from(d), &vec![2; s as usize], cfg) {
                    Ok(r) => r,
                    Err(OracleError::SizeCap { .. }) => {
                        skipped += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let naive = (s * u64::from(n + 1)).min(res.columns);
                let (formula, exceptional) = match hf_double(n, s, d).value {
                    HfValue::Known(v) => (v.to_u64(), false),
                    HfValue::Exceptional(_) => (None, true),
                };
                let agrees = if exceptional { res.rank < naive } else { Some(res.rank) == formula };
                rows.push(AhRow { n, s, d, formula, exceptional, oracle_hf: res.rank, agrees });
            }
        }
    }
    debug_assert!(rows.iter().all(|r| r.exceptional == exception(r.n, r.s, r.d).is_some()));
    Ok(AhReport { rows, skipped })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CremonaTrial {
    pub d: i64,
    pub mults: Vec<i64>,
    pub reduced_d: i64,
    pub reduced_mults: Vec<i64>,
    pub original_empty: bool,
    pub reduced_empty: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CremonaRuleReport {
    pub n: u32,
    pub trials: usize,
    pub reduced_empty: usize,
    pub violations: Vec<CremonaTrial>,
    pub dimension_mismatches: usize,
}

/// Random concrete systems in `P^2` or `P^3`: whenever the Cremona-reduced
/// system is certified empty, the original must be too.
pub fn validate_cremona_rule(n: u32, trials: usize, seed: u64, cfg: &OracleConfig) -> Result<CremonaRuleReport, OracleError> {
    if !(2..=3).contains(&n) {
        return Err(OracleError::Unsupported(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nn = i64::from(n);
    let d_max: i64 = if n == 2 { 14 } else { 8 };
    let mut report = CremonaRuleReport { n, trials, reduced_empty: 0, violations: Vec::new(), dimension_mismatches: 0 };
    for t in 0..trials {
        let d = rng.random_range(1..=d_max);
        let count = rng.random_range(n as usize + 1..=n as usize + 4);
        let mults: Vec<i64> = (0..count).map(|_| rng.random_range(0..=d)).collect();
        let k = (nn - 1) * d - mults[..=n as usize].iter().sum::<i64>();
        let reduced_d = d + k;
        let reduced_mults: Vec<i64> =
            mults.iter().enumerate().map(|(i, &m)| if i <= n as usize { (m + k).max(0) } else { m }).collect();
        let sub = OracleConfig { seed: cfg.seed.wrapping_add(t as u64), ..*cfg };
        let original = system_dim(n, d, &mults, &sub)?;
        let reduced = system_dim(n, reduced_d, &reduced_mults, &sub)?;
        if reduced.certified_empty {
            report.reduced_empty += 1;
            if !original.certified_empty {
                report.violations.push(CremonaTrial {
                    d,
                    mults: mults.clone(),
                    reduced_d,
                    reduced_mults: reduced_mults.clone(),
                    original_empty: original.certified_empty,
                    reduced_empty: true,
                });
            }
        }
        if original.dim_at_sample != reduced.dim_at_sample {
            report.dimension_mismatches += 1;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum InstanceCheck {
    Empty { m: u64, columns: u64 },
    NotEmpty { m: u64, dim: u64 },
    TooLarge { m: u64 },
}

/// Instantiates an `m`-family at each `m` and asks the oracle.
pub fn check_instances(
    sys: &SystemSpec,
    ms: impl IntoIterator<Item = u64>,
    cfg: &OracleConfig,
) -> Result<Vec<InstanceCheck>, OracleError> {
    let mut out = Vec::new();
    for m in ms {
        let (d, mults) = sys.instantiate(m);
        match system_dim(sys.n, d, &mults, cfg) {
            Ok(r) if r.certified_empty => out.push(InstanceCheck::Empty { m, columns: r.columns }),
            Ok(r) => out.push(InstanceCheck::NotEmpty { m, dim: r.dim_at_sample }),
            Err(OracleError::SizeCap { .. }) => out.push(InstanceCheck::TooLarge { m }),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
