use waldschmidt::cremona::{prove_empty, SystemSpec, DEFAULT_MAX_STEPS};
use waldschmidt::hilbert::{exception, hf_double};
use waldschmidt::oracle::{ah_crosscheck, check_instances, system_dim, validate_cremona_rule, InstanceCheck, OracleConfig};

#[test]
fn alexander_hirschowitz_agrees_with_rank() {
    let cfg = OracleConfig::default();
    let report = ah_crosscheck(4, 15, 6, &cfg).unwrap();
    assert!(report.failures().is_empty(), "{:?}", report.failures());
    let exceptional: Vec<_> = report.rows.iter().filter(|r| r.exceptional).map(|r| (r.n, r.s, r.d)).collect();
    assert!(exceptional.contains(&(3, 2, 2)));
    assert!(exceptional.contains(&(4, 14, 4)));
    assert!(exceptional.contains(&(4, 7, 3)));
}

#[test]
fn non_exceptional_small_cases_match_exhaustively() {
    let cfg = OracleConfig::default();
    for n in 2..=5u32 {
        for s in 1..=20u64 {
            for d in 0..=6u32 {
                if exception(n, s, d).is_some() {
                    continue;
                }
                let Ok(r) = system_dim(n, i64::from(d), &vec![2; s as usize], &cfg) else { continue };
                let expected = hf_double(n, s, d).known().cloned().unwrap();
                assert_eq!(num_bigint::BigInt::from(r.rank), expected, "N={n} s={s} d={d}");
            }
        }
    }
}

#[test]
fn cremona_rule_has_no_counterexamples() {
    let cfg = OracleConfig::default();
    for n in [2, 3] {
        let report = validate_cremona_rule(n, 150, 11, &cfg).unwrap();
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        assert!(report.reduced_empty > 0);
    }
}

#[test]
fn certificates_hold_at_small_instances() {
    let cfg = OracleConfig::default();
    let cases = [
        (3, "8m-1", "3m x8"),
        (4, "6m-1", "4m x6"),
        (2, "5m-1", "2m x7"),
        (3, "5m-1", "3m x5"),
    ];
    let mut empty_instances = 0;
    for (n, d, mults) in cases {
        let sys = SystemSpec::new(n, d.parse().unwrap(), SystemSpec::parse_mults(mults).unwrap()).unwrap();
        if let Some(cert) = prove_empty(&sys, DEFAULT_MAX_STEPS).unwrap().certificate() {
            for c in check_instances(&sys, cert.m0..cert.m0 + 4, &cfg).unwrap() {
                assert!(!matches!(c, InstanceCheck::NotEmpty { .. }), "{sys}: {c:?}");
                if matches!(c, InstanceCheck::Empty { .. }) {
                    empty_instances += 1;
                }
            }
        }
    }
    assert!(empty_instances > 0);
}
