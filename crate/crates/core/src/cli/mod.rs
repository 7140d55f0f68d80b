//! Command-line surface. Exit codes: 0 success, 1 numeric failure, 2 usage error, 3 failing
//! claims.

mod commands;
pub mod config;
pub mod grid;
pub mod report;
pub mod spec;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{Format, RunConfig, CONFIG_PREFIX, SEED_ENV};
pub use grid::parse_grid;
pub use spec::{Built, DistSpec, PlainForm};

use crate::catalog::Params;
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "bigjump", version, about = "Heavy-tailed distributions: tails, convolutions, single big jump, tail classes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// List catalog entries or show one
    Catalog {
        #[command(subcommand)]
        action: CatalogCmd,
    },
    /// Tail, log tail, left limit and atom mass at each x
    Eval(Common),
    /// Two-fold convolution tail at each x, optionally with a Monte Carlo column (--trials)
    Conv(Common),
    /// Integrated tail at each x
    Itail(Common),
    /// Class verdicts with their evidence
    Classify(Common),
    /// Seeded draws from the distribution (-n, default 1000)
    Sample(Common),
    /// Single-big-jump K-profile: inf_x B(x, K) per K
    Bigjump(Common),
    /// Run a claim suite; exit 3 when any claim fails
    Verify(Common),
}

#[derive(Debug, Subcommand)]
enum CatalogCmd {
    /// One row per catalog entry
    List(Common),
    /// Parameters, mean, knots and claims of one entry
    Show {
        name: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Default, Args)]
struct Common {
    /// Catalog name
    #[arg(long, conflicts_with = "spec")]
    dist: Option<String>,
    /// Distribution spec file (JSON)
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long)]
    x1: Option<f64>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Positions: a value or comma list
    #[arg(long, conflicts_with = "x_grid")]
    x: Option<String>,
    /// Positions: lo:hi:count, log:lo:hi:count, knots:i:j or a comma list
    #[arg(long = "x-grid")]
    x_grid: Option<String>,
    /// Thresholds K, same grid syntax
    #[arg(long = "K-grid")]
    k_grid: Option<String>,
    /// Knot index range i:j (oracle indices for classify, materialized knots for catalog show)
    #[arg(long = "knot-range", value_parser = parse_range)]
    knot_range: Option<(u64, u64)>,
    /// Claim suite for verify
    #[arg(long)]
    suite: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Seed; BIGJUMP_SEED overrides config files, this flag overrides both
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials
    #[arg(long)]
    trials: Option<u64>,
    /// Sample size
    #[arg(short = 'n', long = "n")]
    n: Option<usize>,
    /// Start from a config file or an earlier report
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_range(s: &str) -> std::result::Result<(u64, u64), String> {
    let (i, j) = s.split_once(':').ok_or("expected i:j")?;
    let p = |v: &str| v.trim().parse::<u64>().map_err(|_| format!("not an index: `{v}`"));
    let (i, j) = (p(i)?, p(j)?);
    if i > j {
        return Err(format!("empty range {i}:{j}"));
    }
    Ok((i, j))
}

impl Common {
    fn params(&self) -> Option<Params> {
        let p = Params {
            alpha: self.alpha,
            beta: self.beta,
            x1: self.x1,
            m: self.m,
            a: self.a,
            c: self.c,
            lambda: self.lambda,
        };
        (p != Params::default()).then_some(p)
    }

    /// File config, then `BIGJUMP_SEED`, then flags.
    fn resolve(self, command: &str, seed_env: Option<&str>) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        cfg.command = command.to_string();
        cfg.apply_seed_env(seed_env)?;
        if let Some(name) = &self.dist {
            cfg.dist = Some(DistSpec::Catalog { name: name.clone(), params: Params::default() });
        }
        if let Some(p) = &self.spec {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", p.display())))?;
            cfg.dist = Some(DistSpec::parse_json(&text)?);
        }
        if let Some(given) = self.params() {
            match &mut cfg.dist {
                Some(DistSpec::Catalog { params, .. }) => merge(params, &given),
                _ => return Err(Error::Parse("parameter flags need a catalog --dist".into())),
            }
        }
        if self.x.is_some() || self.x_grid.is_some() {
            cfg.x_grid = self.x.or(self.x_grid);
        }
        set(&mut cfg.k_grid, self.k_grid);
        if self.knot_range.is_some() {
            cfg.knot_range = self.knot_range;
        }
        set(&mut cfg.suite, self.suite);
        if let Some(f) = self.format {
            cfg.format = f;
        }
        set(&mut cfg.output, self.output);
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        set(&mut cfg.trials, self.trials);
        set(&mut cfg.n, self.n);
        Ok(cfg)
    }
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

fn merge(p: &mut Params, q: &Params) {
    set(&mut p.alpha, q.alpha);
    set(&mut p.beta, q.beta);
    set(&mut p.x1, q.x1);
    set(&mut p.m, q.m);
    set(&mut p.a, q.a);
    set(&mut p.c, q.c);
    set(&mut p.lambda, q.lambda);
}

/// Exit code for an error from the library.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::UnknownName(_)
        | Error::Domain(_)
        | Error::Construction(_)
        | Error::Capability(_) => 2,
        Error::Range { .. }
        | Error::Divergence(_)
        | Error::Numeric { .. }
        | Error::Underflow(_)
        | Error::Infeasible { .. } => 1,
    }
}

/// Run the CLI on `args` (program name first) and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let seed_env = std::env::var(SEED_ENV).ok();
    let seed_env = seed_env.as_deref();
    let result = match cli.cmd {
        Cmd::Catalog { action: CatalogCmd::List(c) } => {
            c.resolve("catalog list", seed_env).and_then(|cfg| commands::catalog_list(&cfg))
        }
        Cmd::Catalog { action: CatalogCmd::Show { name, common } } => common
            .resolve("catalog show", seed_env)
            .and_then(|cfg| commands::catalog_show(&name, &cfg)),
        Cmd::Eval(c) => c.resolve("eval", seed_env).and_then(|cfg| commands::eval(&cfg)),
        Cmd::Conv(c) => c.resolve("conv", seed_env).and_then(|cfg| commands::conv(&cfg)),
        Cmd::Itail(c) => c.resolve("itail", seed_env).and_then(|cfg| commands::itail(&cfg)),
        Cmd::Classify(c) => c.resolve("classify", seed_env).and_then(|cfg| commands::classify(&cfg)),
        Cmd::Sample(c) => c.resolve("sample", seed_env).and_then(|cfg| commands::sample(&cfg)),
        Cmd::Bigjump(c) => c.resolve("bigjump", seed_env).and_then(|cfg| commands::bigjump(&cfg)),
        Cmd::Verify(c) => c.resolve("verify", seed_env).and_then(|cfg| commands::verify(&cfg)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("bigjump: {e}");
            exit_code(&e)
        }
    }
}
