//! Claim suites: every checked property of the catalog as a pass/fail row.
//!
//! A suite `NAME-only` selects the claims whose id starts with `NAME`; `engine` covers the
//! convolution, Monte Carlo and lattice checks; `paper-full` runs everything.

mod constructions;
mod dyadic;
mod engine;

use std::collections::HashMap;
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify_entry, csv_field, default_config, Class, ClassReport, Verdict};
use crate::catalog::{self, Entry};
use crate::convolution::big_jump_terms_many;
use crate::error::{Error, Result};
use crate::tailfn::TailFunction;
use crate::transform::fmt_num;

pub const SUITES: [&str; 7] = [
    "paper-full",
    "ex41-only",
    "ex33-only",
    "ex32-only",
    "ex31-only",
    "goldie-only",
    "engine",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimRow {
    pub claim_id: String,
    pub location: String,
    pub expected: String,
    pub computed: String,
    pub status: ClaimStatus,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Trials per Monte Carlo cross-check of the convolution engine.
    pub mc_trials: u64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            mc_trials: 10_000_000,
            seed: 20_240_601,
        }
    }
}

/// What a check reports back.
pub(crate) struct Outcome {
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

impl Outcome {
    pub fn new(expected: impl Into<String>, computed: impl Into<String>, pass: bool) -> Self {
        Self {
            expected: expected.into(),
            computed: computed.into(),
            pass,
        }
    }

    /// `computed <= bound`.
    pub fn at_most(what: &str, computed: f64, bound: f64) -> Self {
        Self::new(
            format!("{what} <= {}", fmt_num(bound)),
            fmt_num(computed),
            computed <= bound,
        )
    }
}

/// Shared state for one run: options and lazily built entries and default reports.
pub(crate) struct Run {
    pub opts: VerifyOptions,
    entries: OnceLock<HashMap<&'static str, Entry>>,
    reports: OnceLock<HashMap<&'static str, Result<ClassReport>>>,
}

impl Run {
    fn new(opts: VerifyOptions) -> Self {
        Self {
            opts,
            entries: OnceLock::new(),
            reports: OnceLock::new(),
        }
    }

    pub fn entry(&self, name: &str) -> Result<&Entry> {
        let all = self.entries.get_or_init(|| {
            catalog::NAMES
                .iter()
                .filter_map(|&n| catalog::build_default(n).ok().map(|e| (n, e)))
                .collect()
        });
        all.get(name).ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    /// Default-config report for a catalog entry.
    pub fn report(&self, name: &str) -> Result<&ClassReport> {
        let all = self.reports.get_or_init(|| {
            catalog::NAMES
                .par_iter()
                .map(|&n| (n, self.entry(n).and_then(|e| classify_entry(e, &default_config(e)))))
                .collect()
        });
        match all.get(name) {
            Some(Ok(r)) => Ok(r),
            Some(Err(e)) => Err(e.clone()),
            None => Err(Error::UnknownName(name.to_string())),
        }
    }
}

pub(crate) type Check = fn(&Run) -> Result<Outcome>;

pub(crate) struct Claim {
    pub id: &'static str,
    pub location: &'static str,
    pub check: Check,
}

fn all_claims() -> Vec<Claim> {
    let mut v = dyadic::claims();
    v.extend(constructions::claims());
    v.extend(engine::claims());
    v
}

fn selected(suite: &str, id: &str) -> bool {
    match suite {
        "paper-full" => true,
        "engine" => ["conv.", "mc.", "lattice."].iter().any(|p| id.starts_with(p)),
        s => s.strip_suffix("-only").is_some_and(|p| id.starts_with(p)),
    }
}

/// Ids of the claims in a suite, in run order.
pub fn suite_claims(suite: &str) -> Result<Vec<&'static str>> {
    if !SUITES.contains(&suite) {
        return Err(Error::UnknownName(format!("suite {suite}")));
    }
    Ok(all_claims()
        .into_iter()
        .filter(|c| selected(suite, c.id))
        .map(|c| c.id)
        .collect())
}

pub fn verify_claims(suite: &str) -> Result<Vec<ClaimRow>> {
    verify_claims_with(suite, &VerifyOptions::default())
}

/// Run a suite; a check that errors is a failing row carrying the error message.
pub fn verify_claims_with(suite: &str, opts: &VerifyOptions) -> Result<Vec<ClaimRow>> {
    if !SUITES.contains(&suite) {
        return Err(Error::UnknownName(format!("suite {suite}")));
    }
    let run = Run::new(opts.clone());
    Ok(all_claims()
        .into_iter()
        .filter(|c| selected(suite, c.id))
        .map(|c| {
            let start = Instant::now();
            let out = (c.check)(&run).unwrap_or_else(|e| Outcome::new("no error", e.to_string(), false));
            ClaimRow {
                claim_id: c.id.to_string(),
                location: c.location.to_string(),
                expected: out.expected,
                computed: out.computed,
                status: if out.pass { ClaimStatus::Pass } else { ClaimStatus::Fail },
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect())
}

pub const CLAIMS_CSV_HEADER: &str = "claim_id,location,expected,computed,status,seconds";

pub fn claims_csv(rows: &[ClaimRow]) -> String {
    let mut out = format!("{CLAIMS_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&r.claim_id),
            csv_field(&r.location),
            csv_field(&r.expected),
            csv_field(&r.computed),
            match r.status {
                ClaimStatus::Pass => "pass",
                ClaimStatus::Fail => "fail",
            },
            fmt_num(r.seconds)
        ));
    }
    out
}

/// Largest relative error `|a/b - 1|` over pairs, compared in logs.
pub(crate) fn max_log_err(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs
        .into_iter()
        .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() })
        .fold(0.0, f64::max)
}

/// Pairs `(x, K)` with `x > 2K` where `B < 1 - B1 - B2` beyond rounding, and the pair count.
pub(crate) fn bound_violations(t: &TailFunction, xs: &[f64], ks: &[f64]) -> Result<(usize, usize)> {
    let terms = xs
        .par_iter()
        .map(|&x| {
            let adm: Vec<f64> = ks.iter().copied().filter(|&k| k > 0.0 && 2.0 * k < x).collect();
            if adm.is_empty() {
                Ok(Vec::new())
            } else {
                big_jump_terms_many(t, x, &adm)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<_> = terms.into_iter().flatten().collect();
    let bad = all.iter().filter(|b| b.B < 1.0 - b.B1 - b.B2 - 1e-12).count();
    Ok((bad, all.len()))
}

/// The report's verdicts on `want`, its lattice flags required empty.
pub(crate) fn expect_verdicts(r: &ClassReport, want: &[(Class, Verdict)]) -> Outcome {
    let fmt = |vs: &mut dyn Iterator<Item = (Class, Verdict)>| {
        vs.map(|(c, v)| format!("{c}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let expected = fmt(&mut want.iter().copied()) + "; lattice flags: 0";
    let got = fmt(&mut want.iter().map(|&(c, _)| (c, r.verdict(c))));
    let computed = format!("{got}; lattice flags: {}", r.lattice_flags.len());
    let pass = want.iter().all(|&(c, v)| r.verdict(c) == v) && r.lattice_flags.is_empty();
    Outcome::new(expected, computed, pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(verify_claims("nope"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn suites_select_by_prefix() {
        let ex41 = suite_claims("ex41-only").unwrap();
        assert!(!ex41.is_empty());
        assert!(ex41.iter().all(|id| id.starts_with("ex41")));
        assert!(ex41.contains(&"ex41.mu"));
        let full = suite_claims("paper-full").unwrap();
        for s in SUITES {
            assert!(suite_claims(s).unwrap().iter().all(|id| full.contains(id)));
        }
        let ids: std::collections::HashSet<_> = full.iter().collect();
        assert_eq!(ids.len(), full.len(), "claim ids are unique");
    }

    #[test]
    fn csv_has_fixed_header() {
        let rows = vec![ClaimRow {
            claim_id: "a".into(),
            location: "b, c".into(),
            expected: "1".into(),
            computed: "1".into(),
            status: ClaimStatus::Pass,
            seconds: 0.5,
        }];
        let csv = claims_csv(&rows);
        assert!(csv.starts_with(CLAIMS_CSV_HEADER));
        assert!(csv.contains("\"b, c\""));
    }
}
