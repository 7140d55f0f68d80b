//! Subcommand bodies. Each returns the exit code on success.

use serde_json::{json, Value};

use super::config::RunConfig;
use super::grid::parse_grid;
use super::report::{csv_table, Report};
use super::spec::Built;
use crate::catalog::{build, listing, Params, LISTINGS};
use crate::classify::{
    classify as run_classify, claims_csv, default_config, knot_grid, log_points, verify_claims_with,
    ClaimStatus, ClassifyConfig, Subject, VerifyOptions,
};
use crate::convolution::{big_jump_profile, ln_conv2_tail, ln_conv2_tail_sym};
use crate::error::{Error, Result};
use crate::mc::{mc_conv_tail_many, sample as draw};
use crate::tailfn::TailFunction;
use crate::transform::{fmt_num, integrated_tail};

/// Positions used when no x-grid is given.
const DEFAULT_KNOTS: usize = 30;
const DEFAULT_SAMPLES: usize = 1000;

fn built(cfg: &RunConfig) -> Result<Built> {
    cfg.dist
        .as_ref()
        .ok_or_else(|| Error::Parse(format!("{} needs --dist or --spec", cfg.command)))?
        .build()
}

fn grid_or(
    spec: &Option<String>,
    t: &TailFunction,
    b: &Built,
    default: impl FnOnce() -> Vec<f64>,
) -> Result<Vec<f64>> {
    match spec {
        Some(s) => parse_grid(s, Some(t), b.oracle()),
        None => Ok(default()),
    }
}

fn first_knots(t: &TailFunction) -> Vec<f64> {
    t.knots().into_iter().take(DEFAULT_KNOTS).collect()
}

fn f(v: f64) -> String {
    fmt_num(v)
}

fn params_text(p: &Params) -> String {
    serde_json::to_string(p).expect("params serialize")
}

pub fn catalog_list(cfg: &RunConfig) -> Result<i32> {
    let rows = LISTINGS.iter().map(|l| {
        vec![
            l.name.to_string(),
            csv(l.summary),
            csv(&l.params.join(";")),
            csv(&l.claims.join(" | ")),
        ]
    });
    Report {
        csv: csv_table("name,summary,params,claims", rows),
        json: serde_json::to_value(LISTINGS).expect("listings serialize"),
    }
    .emit(cfg)?;
    Ok(0)
}

fn csv(s: &str) -> String {
    crate::classify::csv_field(s)
}

pub fn catalog_show(name: &str, cfg: &RunConfig) -> Result<i32> {
    let l = listing(name)?;
    // parameter flags apply to the shown entry
    let params = match &cfg.dist {
        Some(super::DistSpec::Catalog { name: n, params }) if n == name => params.clone(),
        _ => Params::default(),
    };
    let e = build(name, &params)?;
    let knots = e.tail.knots();
    let (i, j) = cfg
        .knot_range
        .map(|(i, j)| (i as usize, j as usize))
        .unwrap_or((0, DEFAULT_KNOTS - 1));
    let j = j.min(knots.len().saturating_sub(1));
    let shown: Vec<(usize, f64)> = (i..=j).filter_map(|k| knots.get(k).map(|&v| (k, v))).collect();
    let mean = e.tail.mean();
    let mean_text = match &mean {
        Ok(m) => f(*m),
        Err(err) => csv(&err.to_string()),
    };
    let mut rows = vec![
        vec!["name".into(), e.name.clone()],
        vec!["summary".into(), csv(l.summary)],
        vec!["params".into(), csv(&params_text(&e.params))],
        vec!["mean".into(), mean_text],
        vec!["x_cap".into(), f(e.tail.x_cap())],
        vec!["knot_count".into(), knots.len().to_string()],
    ];
    rows.extend(shown.iter().map(|(k, v)| vec![format!("knot[{k}]"), f(*v)]));
    rows.extend(l.claims.iter().map(|c| vec!["claim".into(), csv(c)]));
    let json = json!({
        "name": e.name,
        "summary": l.summary,
        "params": e.params,
        "mean": mean.as_ref().ok(),
        "mean_error": mean.as_ref().err().map(|e| e.to_string()),
        "x_cap": e.tail.x_cap(),
        "knot_count": knots.len(),
        "knots": shown.iter().map(|&(k, v)| json!({"index": k, "x": v})).collect::<Vec<_>>(),
        "claims": l.claims,
    });
    Report { csv: csv_table("field,value", rows), json }.emit(cfg)?;
    Ok(0)
}

pub fn eval(cfg: &RunConfig) -> Result<i32> {
    let b = built(cfg)?;
    let t = &b.tail;
    let xs = grid_or(&cfg.x_grid, t, &b, || first_knots(t))?;
    let mut rows = Vec::with_capacity(xs.len());
    let mut data = Vec::with_capacity(xs.len());
    for &x in &xs {
        let tail = t.eval_tail(x)?;
        let ln = t.log_eval_tail(x)?;
        let ln_left = t.log_left_limit(x)?;
        let atom = t.atom_mass(x)?;
        rows.push(vec![f(x), f(tail), f(ln), f(ln_left), f(atom)]);
        data.push(json!({"x": x, "tail": tail, "ln_tail": ln, "ln_left": ln_left, "atom_mass": atom}));
    }
    Report { csv: csv_table("x,tail,ln_tail,ln_left,atom_mass", rows), json: Value::Array(data) }.emit(cfg)?;
    Ok(0)
}

pub fn conv(cfg: &RunConfig) -> Result<i32> {
    let b = built(cfg)?;
    let t = &b.tail;
    let xs = grid_or(&cfg.x_grid, t, &b, || first_knots(t))?;
    let mc = match cfg.trials {
        Some(n) => Some(mc_conv_tail_many(t, 2, &xs, n, cfg.seed)?),
        None => None,
    };
    let mut header = String::from("x,conv2_tail,ln_conv2_tail,ln_conv2_tail_sym,ln_tail");
    if mc.is_some() {
        header.push_str(",mc_mean,mc_stderr,mc_ci95_lo,mc_ci95_hi");
    }
    let mut rows = Vec::with_capacity(xs.len());
    let mut data = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        let a = ln_conv2_tail(t, x)?;
        let s = ln_conv2_tail_sym(t, x)?;
        let lt = t.log_eval_tail(x)?;
        let mut row = vec![f(x), f(a.exp()), f(a), f(s), f(lt)];
        let mut obj = json!({"x": x, "conv2_tail": a.exp(), "ln_conv2_tail": a, "ln_conv2_tail_sym": s, "ln_tail": lt});
        if let Some(est) = &mc {
            let e = &est[i];
            row.extend([f(e.mean), f(e.stderr), f(e.ci95.0), f(e.ci95.1)]);
            obj["mc"] = serde_json::to_value(e).expect("estimate serializes");
        }
        rows.push(row);
        data.push(obj);
    }
    Report { csv: csv_table(&header, rows), json: Value::Array(data) }.emit(cfg)?;
    Ok(0)
}

pub fn itail(cfg: &RunConfig) -> Result<i32> {
    let b = built(cfg)?;
    let it = integrated_tail(&b.tail)?;
    let xs = grid_or(&cfg.x_grid, &it, &b, || first_knots(&it))?;
    let mut rows = Vec::with_capacity(xs.len());
    let mut data = Vec::with_capacity(xs.len());
    for &x in &xs {
        let ln = it.log_eval_tail(x)?;
        rows.push(vec![f(x), f(ln.exp()), f(ln)]);
        data.push(json!({"x": x, "itail": ln.exp(), "ln_itail": ln}));
    }
    Report { csv: csv_table("x,itail,ln_itail", rows), json: Value::Array(data) }.emit(cfg)?;
    Ok(0)
}

/// Catalog entries start from their default grids; explicit settings replace them.
fn classify_config(cfg: &RunConfig, b: &Built) -> Result<ClassifyConfig> {
    let t = &b.tail;
    let mut c = match &b.entry {
        Some(e) => default_config(e),
        None => ClassifyConfig {
            x_grid: knot_grid(t, 1.0, 1e6f64.min(0.5 * t.x_cap()), 200),
            k_grid: log_points(1.0, 100.0, 12),
            ..ClassifyConfig::default()
        },
    };
    if let Some(s) = &cfg.x_grid {
        c.x_grid = parse_grid(s, Some(t), b.oracle())?;
    }
    if let Some(s) = &cfg.k_grid {
        c.k_grid = parse_grid(s, Some(t), b.oracle())?;
    }
    if cfg.knot_range.is_some() {
        c.knot_range = cfg.knot_range;
    }
    if let Some(th) = &cfg.thresholds {
        c.thresholds = th.clone();
    }
    Ok(c)
}

pub fn classify(cfg: &RunConfig) -> Result<i32> {
    let b = built(cfg)?;
    let c = classify_config(cfg, &b)?;
    let report = run_classify(
        Subject {
            name: &b.label,
            tail: Some(&b.tail),
            oracle: b.oracle(),
        },
        &c,
    )?;
    Report {
        csv: report.to_csv(),
        json: serde_json::to_value(&report).expect("report serializes"),
    }
    .emit(cfg)?;
    Ok(0)
}

pub fn sample(cfg: &RunConfig) -> Result<i32> {
    let b = built(cfg)?;
    let xs = draw(&b.tail, cfg.n.unwrap_or(DEFAULT_SAMPLES), cfg.seed);
    Report {
        csv: csv_table("value", xs.iter().map(|&x| vec![f(x)])),
        json: json!(xs),
    }
    .emit(cfg)?;
    Ok(0)
}

pub fn bigjump(cfg: &RunConfig) -> Result<i32> {
    let b = built(cfg)?;
    let c = classify_config(cfg, &b)?;
    let rows = big_jump_profile(&b.tail, &c.x_grid, &c.k_grid)?;
    let table = rows
        .iter()
        .map(|r| vec![f(r.K), f(r.inf_B), f(r.sup_complement), f(r.argmin_x), r.pairs.to_string()]);
    Report {
        csv: csv_table("K,inf_B,sup_complement,argmin_x,pairs", table),
        json: serde_json::to_value(&rows).expect("profile serializes"),
    }
    .emit(cfg)?;
    Ok(0)
}

pub fn verify(cfg: &RunConfig) -> Result<i32> {
    let suite = cfg.suite.as_deref().unwrap_or("paper-full");
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        mc_trials: cfg.trials.unwrap_or(defaults.mc_trials),
        seed: cfg.seed,
    };
    let rows = verify_claims_with(suite, &opts)?;
    let report = Report {
        csv: claims_csv(&rows),
        json: serde_json::to_value(&rows).expect("rows serialize"),
    };
    if cfg.output.is_some() {
        report.emit(cfg)?;
    }
    print!("{}", report.render(&RunConfig { output: None, ..cfg.clone() }));
    let failing: Vec<_> = rows.iter().filter(|r| r.status == ClaimStatus::Fail).collect();
    if failing.is_empty() {
        return Ok(0);
    }
    eprintln!("bigjump: {} of {} claims failed:", failing.len(), rows.len());
    for r in failing {
        eprintln!("  {}: expected {}; computed {}", r.claim_id, r.expected, r.computed);
    }
    Ok(3)
}
