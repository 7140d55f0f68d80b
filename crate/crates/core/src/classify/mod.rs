//! Finite-scale verdicts for the tail classes, the inclusion lattice and the claim suites.
//!
//! Every verdict is evidence at the explored scale. Oracle series are judged on their last
//! `window` indices against the `window` before; numeric series on the upper half of their
//! log-x range against the lower half.

mod claims;
mod lattice;
mod rules;
mod weak;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::{Entry, KnotOracle};
use crate::convolution::{big_jump_profile, conv_ratio_series, profile_series, ProfileRow};
use crate::error::{Error, Result};
use crate::tailfn::TailFunction;
use crate::transform::{self, DiagnosticSeries, Extreme};

pub use claims::{
    claims_csv, suite_claims, verify_claims, verify_claims_with, ClaimRow, ClaimStatus,
    VerifyOptions, CLAIMS_CSV_HEADER, SUITES,
};
pub use lattice::{lattice_check, IMPLICATIONS};
pub use weak::{shift_growth_estimate, shift_probe, unbounded_in_t, weak_equiv_verdict, WeakEquivVerdict};
use rules::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Class {
    K,
    Kstar,
    DK1,
    L,
    D,
    OL,
    OS,
    S,
    J,
}

impl Class {
    pub const ALL: [Class; 9] = [
        Class::K,
        Class::Kstar,
        Class::DK1,
        Class::L,
        Class::D,
        Class::OL,
        Class::OS,
        Class::S,
        Class::J,
    ];

    /// Classes defined only for heavy tails; reported refuted when `K` is.
    pub fn heavy_only(self) -> bool {
        matches!(self, Class::Kstar | Class::DK1 | Class::L | Class::D | Class::S)
    }

    /// Classes whose diagnostics need the convolution of the tail itself.
    pub fn needs_tail(self) -> bool {
        matches!(self, Class::OS | Class::S | Class::J)
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Class {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Class::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName(format!("class {s}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Supported,
    Refuted,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Supported => "supported",
            Verdict::Refuted => "refuted",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Decision thresholds. Support and refutation thresholds are separated so that enlarging
/// the explored range passes through `inconclusive` before flipping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub window: usize,
    /// L supported when `max |ratio - 1|` over the last window is below this.
    pub l_support: f64,
    /// L refuted when the shift ratio stays at or above this over the last window.
    pub l_refute: f64,
    /// D, OL and OS refuted when the series exceeds this and is still growing.
    pub growth_refute: f64,
    /// Bounded series supported when the last window's max is within this factor of the
    /// previous window's.
    pub stabilize: f64,
    pub j_support: f64,
    pub j_refute: f64,
    /// Absolute slack of the J x-stability check.
    pub j_x_slack: f64,
    pub s_band: (f64, f64),
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            window: 10,
            l_support: 0.05,
            l_refute: 1.5,
            growth_refute: 100.0,
            stabilize: 0.10,
            j_support: 0.05,
            j_refute: 0.2,
            j_x_slack: 0.005,
            s_band: (1.8, 2.2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub thresholds: Thresholds,
    pub x_grid: Vec<f64>,
    #[serde(rename = "K_grid")]
    pub k_grid: Vec<f64>,
    /// Oracle index range; `None` uses [`default_knot_hi`].
    pub knot_range: Option<(u64, u64)>,
    pub shifts: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub classes: Vec<Class>,
}

pub const DEFAULT_KNOT_HI: u64 = 400;

/// Oracle log values beyond this magnitude keep too few digits for ratio diagnostics.
pub const PRECISE_LOG: f64 = 1e8;

/// Last index up to [`DEFAULT_KNOT_HI`] whose knot and tail logs stay within [`PRECISE_LOG`].
pub fn default_knot_hi(o: &dyn KnotOracle) -> u64 {
    let top = o.n_max().min(DEFAULT_KNOT_HI);
    let ok = |n: u64| {
        o.log_tail_at(n + 1).abs() <= PRECISE_LOG && o.log_knot(n + 1).abs() <= PRECISE_LOG
    };
    (o.n_min()..=top).take_while(|&n| ok(n)).last().unwrap_or(o.n_min())
}

fn dyadic_grid() -> Vec<f64> {
    (-6..=6).map(|k| 2f64.powi(k)).collect()
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            x_grid: Vec::new(),
            k_grid: Vec::new(),
            knot_range: None,
            shifts: vec![1.0],
            lambdas: dyadic_grid(),
            deltas: dyadic_grid(),
            classes: Class::ALL.to_vec(),
        }
    }
}

/// What is being classified: a numerically evaluable tail, a knot oracle, or both.
#[derive(Debug, Clone, Copy)]
pub struct Subject<'a> {
    pub name: &'a str,
    pub tail: Option<&'a TailFunction>,
    pub oracle: Option<&'a dyn KnotOracle>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassVerdict {
    pub class: Class,
    pub verdict: Verdict,
    pub reason: String,
    /// Labels of the series the verdict was read from.
    pub evidence: Vec<String>,
    pub scale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub name: String,
    pub verdicts: Vec<ClassVerdict>,
    pub lattice_flags: Vec<String>,
    pub series: Vec<DiagnosticSeries>,
    pub profile: Vec<ProfileRow>,
}

impl ClassReport {
    pub fn verdict(&self, c: Class) -> Verdict {
        self.verdicts
            .iter()
            .find(|v| v.class == c)
            .map_or(Verdict::Inconclusive, |v| v.verdict)
    }

    pub fn get(&self, c: Class) -> Option<&ClassVerdict> {
        self.verdicts.iter().find(|v| v.class == c)
    }

    /// `class,verdict,reason,evidence,scale` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,verdict,reason,evidence,scale\n");
        for v in &self.verdicts {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                v.class,
                v.verdict,
                csv_field(&v.reason),
                csv_field(&v.evidence.join(";")),
                csv_field(&v.scale)
            ));
        }
        for f in &self.lattice_flags {
            out.push_str(&format!("lattice,violation,{},,\n", csv_field(f)));
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

struct Ctx<'a> {
    subject: Subject<'a>,
    cfg: &'a ClassifyConfig,
    knots: (u64, u64),
    series: Vec<DiagnosticSeries>,
}

impl Ctx<'_> {
    fn scale(&self, s: &DiagnosticSeries) -> String {
        match s.domain {
            transform::DomainTag::KnotOracle => {
                format!("knots n = {}..{}", self.knots.0, self.knots.1)
            }
            transform::DomainTag::NumericGrid => {
                let (lo, hi) = s
                    .points
                    .first()
                    .zip(s.points.last())
                    .map_or((f64::NAN, f64::NAN), |(a, b)| (a.ln_x.exp(), b.ln_x.exp()));
                format!("x in [{lo:.6e}, {hi:.6e}], {} points", s.len())
            }
        }
    }

    fn keep(&mut self, s: DiagnosticSeries) -> (String, String) {
        let label = format!("{} [{}]", s.kind, s.domain);
        let scale = self.scale(&s);
        self.series.push(s);
        (label, scale)
    }

    fn tail(&self) -> Result<&TailFunction> {
        self.subject.tail.ok_or_else(|| {
            Error::Capability(format!(
                "{} is oracle-only; OS, S and J need a numerically evaluable tail",
                self.subject.name
            ))
        })
    }

    fn shift_series(&self, t: f64) -> Result<DiagnosticSeries> {
        match self.subject.oracle {
            Some(o) => Ok(transform::ratio_series_oracle(o, t, self.knots.0, self.knots.1)),
            None => transform::ratio_series(self.tail()?, t, &self.cfg.x_grid),
        }
    }

    fn halving(&self) -> Result<DiagnosticSeries> {
        match self.subject.oracle {
            Some(o) => Ok(transform::halving_series_oracle(o, self.knots.0, self.knots.1)),
            None => transform::halving_series(self.tail()?, &self.cfg.x_grid),
        }
    }

    fn lambda(&self, l: f64, which: Extreme) -> Result<DiagnosticSeries> {
        match self.subject.oracle {
            Some(o) => Ok(transform::lambda_scan_oracle(o, l, self.knots.0, self.knots.1, which)),
            None => transform::lambda_scan(self.tail()?, l, &self.cfg.x_grid),
        }
    }

    fn delta(&self, d: f64) -> Result<DiagnosticSeries> {
        match self.subject.oracle {
            Some(o) => Ok(transform::delta_scan_oracle(
                o,
                d,
                self.knots.0,
                self.knots.1,
                Extreme::Low,
            )),
            None => transform::delta_scan(self.tail()?, d, &self.cfg.x_grid),
        }
    }
}

fn verdict(class: Class, (v, reason): (Verdict, String), ev: Vec<(String, String)>) -> ClassVerdict {
    let scale = ev.iter().map(|e| e.1.clone()).collect::<Vec<_>>();
    let mut scale_unique = scale.clone();
    scale_unique.dedup();
    ClassVerdict {
        class,
        verdict: v,
        reason,
        evidence: ev.into_iter().map(|e| e.0).collect(),
        scale: scale_unique.join("; "),
    }
}

/// Verdicts for the requested classes.
pub fn classify(subject: Subject<'_>, cfg: &ClassifyConfig) -> Result<ClassReport> {
    if subject.tail.is_none() {
        if let Some(c) = cfg.classes.iter().find(|c| c.needs_tail()) {
            return Err(Error::Capability(format!(
                "{c} needs the convolution of a numerically evaluable tail; {} is oracle-only",
                subject.name
            )));
        }
    }
    if subject.oracle.is_none() && cfg.x_grid.is_empty() {
        return Err(Error::Domain("classify needs an x-grid when no knot oracle is given".into()));
    }
    let knots = match (cfg.knot_range, subject.oracle) {
        (Some((lo, hi)), Some(o)) => (lo.max(o.n_min()), hi.min(o.n_max())),
        (None, Some(o)) => (o.n_min(), default_knot_hi(o)),
        _ => (0, 0),
    };
    let mut ctx = Ctx {
        subject,
        cfg,
        knots,
        series: Vec::new(),
    };
    let th = cfg.thresholds.clone();
    let mut verdicts = Vec::new();
    let mut profile = Vec::new();
    let wants = |c: Class| cfg.classes.contains(&c);

    // K and K*: λ-scans, judged at the smallest λ for support and any λ for refutation
    let lam_min = cfg.lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    if wants(Class::K) || wants(Class::Kstar) {
        let mut hi = Vec::new();
        let mut lo = Vec::new();
        for &l in &cfg.lambdas {
            hi.push((l, ctx.lambda(l, Extreme::High)?));
            lo.push((l, ctx.lambda(l, Extreme::Low)?));
        }
        if wants(Class::K) {
            let r = scan_rule(&hi, lam_min, th.window, ScanMode::Some);
            let ev = hi.into_iter().map(|(_, s)| ctx.keep(s)).collect();
            verdicts.push(verdict(Class::K, r, ev));
        }
        if wants(Class::Kstar) {
            let r = scan_rule(&lo, lam_min, th.window, ScanMode::Every);
            let ev = lo.into_iter().map(|(_, s)| ctx.keep(s)).collect();
            verdicts.push(verdict(Class::Kstar, r, ev));
        }
    }
    if wants(Class::DK1) {
        let scans = cfg
            .deltas
            .iter()
            .map(|&d| Ok((d, ctx.delta(d)?)))
            .collect::<Result<Vec<_>>>()?;
        let r = delta_rule(&scans, th.window);
        let ev = scans.into_iter().map(|(_, s)| ctx.keep(s)).collect();
        verdicts.push(verdict(Class::DK1, r, ev));
    }
    let mut l_refuted = false;
    if wants(Class::L) || wants(Class::OL) || wants(Class::S) {
        let shifts = cfg
            .shifts
            .iter()
            .map(|&t| ctx.shift_series(t))
            .collect::<Result<Vec<_>>>()?;
        let lr = l_rule(&shifts, &th);
        l_refuted = lr.0 == Verdict::Refuted;
        let or = ol_rule(&shifts, &th);
        let ev: Vec<_> = shifts.into_iter().map(|s| ctx.keep(s)).collect();
        if wants(Class::L) {
            verdicts.push(verdict(Class::L, lr, ev.clone()));
        }
        if wants(Class::OL) {
            verdicts.push(verdict(Class::OL, or, ev));
        }
    }
    if wants(Class::D) {
        let s = ctx.halving()?;
        let r = growth_rule(&s, &th, "halving ratio");
        let ev = vec![ctx.keep(s)];
        verdicts.push(verdict(Class::D, r, ev));
    }
    if wants(Class::OS) || wants(Class::S) {
        let t = ctx.tail()?;
        let os = conv_ratio_series(t, &cfg.x_grid, false)?;
        if wants(Class::OS) {
            let r = growth_rule(&os, &th, "convolution ratio");
            let ev = vec![ctx.keep(os.clone())];
            verdicts.push(verdict(Class::OS, r, ev));
        }
        if wants(Class::S) {
            let mut s = os;
            s.kind = transform::SeriesKind::SRatio;
            let r = s_rule(&s, &th, l_refuted);
            let ev = vec![ctx.keep(s)];
            verdicts.push(verdict(Class::S, r, ev));
        }
    }
    if wants(Class::J) {
        let t = ctx.tail()?;
        let (r, rows, ev) = j_verdict(t, cfg)?;
        profile = rows;
        let s = profile_series(&profile);
        let mut ev_all = vec![ctx.keep(s)];
        ev_all[0].1 = ev;
        verdicts.push(verdict(Class::J, r, ev_all));
    }

    if verdicts.iter().any(|v| v.class == Class::K && v.verdict == Verdict::Refuted) {
        for v in verdicts.iter_mut().filter(|v| v.class.heavy_only()) {
            v.verdict = Verdict::Refuted;
            v.reason = format!("light tail (K refuted); diagnostic: {}", v.reason);
        }
    }
    let order = |c: Class| Class::ALL.iter().position(|&d| d == c).unwrap_or(usize::MAX);
    verdicts.sort_by_key(|v| order(v.class));
    let mut report = ClassReport {
        name: subject.name.to_string(),
        verdicts,
        lattice_flags: Vec::new(),
        series: ctx.series,
        profile,
    };
    report.lattice_flags = lattice_check(&report);
    Ok(report)
}

fn j_verdict(
    t: &TailFunction,
    cfg: &ClassifyConfig,
) -> Result<((Verdict, String), Vec<ProfileRow>, String)> {
    let th = &cfg.thresholds;
    if cfg.k_grid.is_empty() {
        return Err(Error::Domain("the J verdict needs a K-grid".into()));
    }
    let mut xs = cfg.x_grid.clone();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let rows = big_jump_profile(t, &xs, &cfg.k_grid)?;
    let scale = format!(
        "x in [{:.6e}, {:.6e}] ({} points), K in [{}, {}]",
        xs.first().copied().unwrap_or(f64::NAN),
        xs.last().copied().unwrap_or(f64::NAN),
        xs.len(),
        rows.first().map_or(f64::NAN, |r| r.K),
        rows.last().map_or(f64::NAN, |r| r.K)
    );
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.K.total_cmp(&b.K));
    let comp: Vec<f64> = sorted.iter().map(|r| r.sup_complement).collect();
    let last = *comp.last().expect("profile is nonempty");
    let upper = &comp[comp.len() / 2..];
    if upper.iter().all(|&c| c >= th.j_refute) {
        let r = (
            Verdict::Refuted,
            format!(
                "1 - inf_x B stays >= {} over the upper half of the K-grid (at K_max: {last:.4e})",
                th.j_refute
            ),
        );
        return Ok((r, rows, scale));
    }
    let decreasing = comp.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
    if last < th.j_support && decreasing {
        // the same K_max must not lose ground on the upper half of the x-range
        let k_max = sorted.last().expect("nonempty").K;
        let mid = 0.5 * (xs[0].ln() + xs[xs.len() - 1].ln());
        let (low_x, high_x): (Vec<f64>, Vec<f64>) = xs.iter().partition(|x| x.ln() < mid);
        let sub = |g: &[f64]| -> Option<f64> {
            big_jump_profile(t, g, &[k_max]).ok().map(|r| r[0].sup_complement)
        };
        if let (Some(a), Some(b)) = (sub(&low_x), sub(&high_x)) {
            if b > a * (1.0 + th.stabilize) + th.j_x_slack {
                let r = (
                    Verdict::Inconclusive,
                    format!(
                        "1 - inf_x B at K_max grows with x: {a:.4e} on the lower half, {b:.4e} on the upper half"
                    ),
                );
                return Ok((r, rows, scale));
            }
        }
        let r = (
            Verdict::Supported,
            format!("1 - inf_x B decreases in K to {last:.4e} < {}", th.j_support),
        );
        return Ok((r, rows, scale));
    }
    let r = (
        Verdict::Inconclusive,
        format!(
            "1 - inf_x B at K_max is {last:.4e}{}",
            if decreasing { "" } else { ", not monotone in K" }
        ),
    );
    Ok((r, rows, scale))
}

/// Log-spaced points plus every knot, knot ± 1 and pairwise knot sum (± 1) inside `[lo, hi]`.
pub fn knot_grid(t: &TailFunction, lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count.max(2) - 1) as f64))
        .collect();
    let knots: Vec<f64> = t.knots().into_iter().filter(|&k| k <= hi).collect();
    for (i, &a) in knots.iter().enumerate() {
        for &b in std::iter::once(&0.0).chain(&knots[i..]) {
            for d in [-1.0, 0.0, 1.0] {
                let z = a + b + d;
                if z >= lo && z <= hi {
                    xs.push(z);
                }
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

pub fn log_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Default grids for a catalog entry: the explored scale on which its verdicts are read.
pub fn default_config(entry: &Entry) -> ClassifyConfig {
    let t = &entry.tail;
    let knots = t.knots();
    let k = |i: usize| knots.get(i).copied().unwrap_or(f64::NAN);
    let (x_lo, x_hi, k_grid): (f64, f64, Vec<f64>) = match entry.name.as_str() {
        "goldie" => (2.0, 1e60, vec![1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 20.0]),
        "ex31" => (2e3, 1e5, log_points(10.0, 900.0, 12)),
        "ex32" | "ex32_base" => {
            // both-large mass F̄(x_n)²/F̄(x_(n+1)) = x_n^(beta - 2 alpha) is small from x_4 on
            let x = &entry.oracle;
            let (x4, x6) = (x.log_knot(4).exp(), x.log_knot(6).exp());
            (x4, x6, log_points(10.0, 0.45 * x4, 14))
        }
        // knots are 0, x_1, 2x_1, x_2, 2x_2, ...
        "ex33" => (k(3), k(7), log_points(10.0, 0.49 * k(3), 16)),
        "ex41" => (8.0, 2f64.powi(40), (1..=50).map(|i| 10.0 * i as f64).collect()),
        "ex41_itail" => (2f64.powi(10), 2f64.powi(20), log_points(1.0, 500.0, 12)),
        "exponential" => (1.0, 200.0, log_points(1.0, 20.0, 8)),
        _ => (1e3, 1e7, log_points(1.0, 100.0, 12)),
    };
    ClassifyConfig {
        x_grid: knot_grid(t, x_lo, x_hi.min(t.x_cap()), 200),
        k_grid,
        ..ClassifyConfig::default()
    }
}

/// [`classify`] a catalog entry with its tail and oracle.
pub fn classify_entry(entry: &Entry, cfg: &ClassifyConfig) -> Result<ClassReport> {
    classify(
        Subject {
            name: &entry.name,
            tail: Some(&entry.tail),
            oracle: Some(entry.oracle.as_ref()),
        },
        cfg,
    )
}
