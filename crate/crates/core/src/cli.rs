//! Command-line front end. Exit codes: 0 success, 1 a check or suite did not
//! come out as expected, 2 usage or input errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::bounds::{Deriver, Strategy};
use crate::certs::{
    bound_certificate, check_str, emptiness_certificate, render_markdown, verdict_certificate, CertStore,
    CertificateFile, ReportRow,
};
use crate::cremona::{prove_empty, ProofOutcome, SystemSpec, DEFAULT_MAX_STEPS};
use crate::demailly::{describe, parse_range, run_suite, Status, Suite, SuiteResult};
use crate::exact::{approx, format_ratio};
use crate::hilbert::{hf_double, HfValue, PointMode};
use crate::oracle::{ah_crosscheck, system_dim, validate_cremona_rule, OracleConfig};

#[derive(Parser, Debug)]
#[command(name = "waldschmidt", version, about = "Certified Waldschmidt-constant bounds and m=2 Demailly checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Global {
    /// Worker threads for suite runs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory where certificates are stored by content id.
    #[arg(long, global = true)]
    certs: Option<PathBuf>,
    /// Seed for the random points of the finite-field oracle.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with defaults for prime, seed, jobs and max_columns.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Best certified lower bound for the Waldschmidt constant of s points in P^N.
    Bound {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        points: u64,
        #[arg(long, default_value = "paper")]
        strategy: Strategy,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Prove a parameterized linear system empty by Cremona reduction.
    Empty {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        degree: String,
        #[arg(long)]
        mults: String,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Check the m=2 Demailly inequality over a range of point counts.
    Demailly {
        #[arg(long)]
        mode: PointMode,
        #[arg(long = "N")]
        n: u32,
        /// Inclusive range `a..b`.
        #[arg(long)]
        s: String,
        #[arg(long, default_value = "paper")]
        strategy: Strategy,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Hilbert function of s general double points in degree d.
    Hilbert {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        s: u64,
        #[arg(long)]
        d: u32,
        /// Also compute the rank over a finite field at random points.
        #[arg(long)]
        oracle: bool,
        /// Prime modulus, or `auto` for the default.
        #[arg(long)]
        prime: Option<String>,
    },
    /// Re-validate certificate files.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Property runs of the finite-field oracle.
    OracleValidate {
        #[arg(long, value_enum)]
        rule: Rule,
        #[arg(long = "N", default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 15)]
        s_max: u64,
        #[arg(long, default_value_t = 6)]
        d_max: u32,
    },
    /// Run a named suite and write a markdown report.
    Report {
        #[arg(long)]
        suite: Suite,
        #[arg(long, default_value = "paper")]
        strategy: Strategy,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Rule {
    Cremona,
    Ah,
}

#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct Config {
    prime: Option<u64>,
    seed: Option<u64>,
    jobs: Option<usize>,
    max_columns: Option<usize>,
}

struct Settings {
    oracle: OracleConfig,
    certs: Option<CertStore>,
}

type Failure = (i32, String);

fn usage(msg: impl std::fmt::Display) -> Failure {
    (2, msg.to_string())
}

pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

fn settings(global: &Global) -> Result<Settings, Failure> {
    let config: Config = match &global.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => Config::default(),
    };
    let mut oracle = OracleConfig::default();
    if let Some(p) = config.prime {
        oracle.prime = p;
    }
    if let Some(c) = config.max_columns {
        oracle.max_columns = c;
    }
    if let Some(seed) = global.seed.or(config.seed) {
        oracle.seed = seed;
    }
    if let Some(jobs) = global.jobs.or(config.jobs) {
        if jobs == 0 {
            return Err(usage("--jobs must be positive"));
        }
        // Only the first configuration in a process takes effect.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let certs = match &global.certs {
        Some(dir) => Some(CertStore::open(dir).map_err(usage)?),
        None => None,
    };
    Ok(Settings { oracle, certs })
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&PathBuf>, store: Option<&CertStore>, cert: &CertificateFile) -> Result<Option<String>, Failure> {
    if let Some(path) = path {
        write_file(path, &cert.to_json())?;
    }
    match store {
        Some(store) => Ok(Some(store.put(cert).map_err(usage)?)),
        None => Ok(None),
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    let st = settings(&cli.global)?;
    match cli.cmd {
        Cmd::Bound { n, points, strategy, emit: path } => {
            if n < 2 || points == 0 {
                return Err(usage("need N >= 2 and at least one point"));
            }
            let fact = Deriver::global().derive(n, points, strategy);
            println!("N={n} s={points}: {} ~ {:.6}", format_ratio(&fact.bound), approx(&fact.bound));
            println!("route: {}", fact.route());
            if let Some(id) = emit(path.as_ref(), st.certs.as_ref(), &bound_certificate(&fact))? {
                println!("certificate: {id}");
            }
            Ok(0)
        }
        Cmd::Empty { n, degree, mults, max_steps, emit: path } => {
            let degree = degree.parse().map_err(|e| usage(format!("--degree: {e}")))?;
            let mults = SystemSpec::parse_mults(&mults).map_err(|e| usage(format!("--mults: {e}")))?;
            let sys = SystemSpec::new(n, degree, mults).map_err(usage)?;
            match prove_empty(&sys, max_steps).map_err(usage)? {
                ProofOutcome::Proven(cert) => {
                    for line in cert.trace() {
                        println!("{line}");
                    }
                    println!("EMPTY for m >= {}", cert.m0);
                    if let Some(id) = emit(path.as_ref(), st.certs.as_ref(), &emptiness_certificate(&cert))? {
                        println!("certificate: {id}");
                    }
                    Ok(0)
                }
                ProofOutcome::NotProven { steps_taken, last } => {
                    println!("NOT PROVEN after {steps_taken} step(s); last system {last}");
                    Ok(1)
                }
            }
        }
        Cmd::Demailly { mode, n, s, strategy, report } => {
            let (s_lo, s_hi) = parse_range::<u64>(&s)
                .filter(|(a, b)| a <= b && *a >= 1)
                .ok_or_else(|| usage(format!("--s expects a..b, got `{s}`")))?;
            if n < 2 {
                return Err(usage("need N >= 2"));
            }
            let suite = Suite::Custom { n, s_lo, s_hi, mode };
            let result = run_suite(&suite, Deriver::global(), strategy);
            for v in result.verdicts.iter().filter(|v| v.status != Status::Proven) {
                println!("{}", describe(v));
            }
            finish_suite(&result, report.as_deref(), st.certs.as_ref())
        }
        Cmd::Hilbert { n, s, d, oracle, prime } => {
            let mut cfg = st.oracle;
            match prime.as_deref() {
                None | Some("auto") => {}
                Some(p) => cfg.prime = p.parse().map_err(|_| usage(format!("--prime: bad value `{p}`")))?,
            }
            match hf_double(n, s, d).value {
                HfValue::Known(v) => println!("{v}"),
                HfValue::Exceptional(e) if oracle => println!("EXCEPTIONAL ({e:?})"),
                HfValue::Exceptional(_) => println!("EXCEPTIONAL (use --oracle)"),
            }
            if oracle {
                let r = system_dim(n, i64::from(d), &vec![2; s as usize], &cfg).map_err(usage)?;
                println!("N\td\tmults\tcolumns\tconditions\trank\tdim\tcertified");
                println!(
                    "{}\t{}\t2x{}\t{}\t{}\t{}\t{}\t{}",
                    r.n, r.d, s, r.columns, r.conditions, r.rank, r.dim_at_sample, r.certified_empty
                );
            }
            Ok(0)
        }
        Cmd::Check { files } => {
            let mut code = 0;
            for path in &files {
                let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                match check_str(&text) {
                    Ok(c) => println!("OK {} ({:?}, {} steps, m0={})", path.display(), c.kind, c.steps, c.m0),
                    Err(e) => {
                        println!("INVALID {}: {e}", path.display());
                        code = 1;
                    }
                }
            }
            Ok(code)
        }
        Cmd::OracleValidate { rule, n, trials, s_max, d_max } => match rule {
            Rule::Cremona => {
                let r = validate_cremona_rule(n, trials, st.oracle.seed, &st.oracle).map_err(usage)?;
                println!(
                    "N={} trials={} reduced_empty={} violations={} dimension_mismatches={}",
                    r.n,
                    r.trials,
                    r.reduced_empty,
                    r.violations.len(),
                    r.dimension_mismatches
                );
                Ok(i32::from(!r.violations.is_empty()))
            }
            Rule::Ah => {
                let r = ah_crosscheck(n.max(2), s_max, d_max, &st.oracle).map_err(usage)?;
                let failures = r.failures();
                for f in &failures {
                    println!("MISMATCH N={} s={} d={} formula={:?} oracle={}", f.n, f.s, f.d, f.formula, f.oracle_hf);
                }
                println!("rows={} skipped={} failures={}", r.rows.len(), r.skipped, failures.len());
                Ok(i32::from(!failures.is_empty()))
            }
        },
        Cmd::Report { suite, strategy, out } => {
            let result = run_suite(&suite, Deriver::global(), strategy);
            let doc = report_text(&result, st.certs.as_ref())?;
            match out {
                Some(path) => write_file(&path, &doc)?,
                None => print!("{doc}"),
            }
            Ok(result.exit_code())
        }
    }
}

fn report_text(result: &SuiteResult, store: Option<&CertStore>) -> Result<String, Failure> {
    let mut ids = Vec::with_capacity(result.verdicts.len());
    for v in &result.verdicts {
        ids.push(emit(None, store, &verdict_certificate(v))?);
    }
    let rows: Vec<ReportRow> =
        result.verdicts.iter().zip(ids).map(|(v, certificate)| ReportRow { verdict: v, certificate }).collect();
    Ok(render_markdown(&result.suite.to_string(), &rows, &result.lemmas))
}

fn finish_suite(result: &SuiteResult, report: Option<&Path>, store: Option<&CertStore>) -> Result<i32, Failure> {
    if report.is_some() || store.is_some() {
        let doc = report_text(result, store)?;
        if let Some(path) = report {
            write_file(path, &doc)?;
        }
    }
    let c = result.counts();
    println!("{} PROVEN, {} UNPROVEN, {} DISCREPANCY", c.proven, c.unproven, c.discrepancy);
    Ok(result.exit_code())
}
