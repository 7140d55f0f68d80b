//! Seeded Monte Carlo oracle for sums of i.i.d. draws.
//!
//! Work is cut into fixed chunks of [`CHUNK`] trials; chunk `j` draws from ChaCha8 stream `j`
//! of the root seed, and chunk tallies are combined in chunk order, so estimates do not depend
//! on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tailfn::TailFunction;

pub const CHUNK: u64 = 1 << 16;
pub const MIN_TRIALS: u64 = 10_000;
pub const MIN_ACCEPTANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub accepted: u64,
    pub ci95: (f64, f64),
    pub seed: u64,
    /// Set when the interval is not `mean ± 1.96 stderr` (zero hits).
    pub note: Option<String>,
}

impl MCEstimate {
    fn from_counts(hits: u64, accepted: u64, trials: u64, seed: u64) -> Self {
        let n = accepted as f64;
        let mean = hits as f64 / n;
        let stderr = (mean * (1.0 - mean) / n).sqrt();
        if hits == 0 {
            // one-sided rule of three
            return Self {
                mean,
                stderr,
                trials,
                accepted,
                ci95: (0.0, 3.0 / n),
                seed,
                note: Some("zero hits: one-sided 95% bound 3/n".into()),
            };
        }
        Self::normal(mean, stderr, trials, accepted, seed)
    }

    fn normal(mean: f64, stderr: f64, trials: u64, accepted: u64, seed: u64) -> Self {
        Self {
            mean,
            stderr,
            trials,
            accepted,
            ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr),
            seed,
            note: None,
        }
    }

    /// `|value - mean| <= k·stderr`, or inside the one-sided bound when there were no hits.
    pub fn within(&self, value: f64, k: f64) -> bool {
        if self.note.is_some() {
            value <= self.ci95.1 * (k / 1.96).max(1.0)
        } else {
            (value - self.mean).abs() <= k * self.stderr
        }
    }
}

fn stream(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Uniform on the open interval `(0, 1)`.
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.gen::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn draw(t: &TailFunction, rng: &mut ChaCha8Rng) -> f64 {
    t.quantile_ln(open_unit(rng).ln())
}

/// Run `trials` trials in chunks; `body(rng, count)` returns the chunk's tally.
fn chunked<A: Send>(
    trials: u64,
    seed: u64,
    body: impl Fn(&mut ChaCha8Rng, u64) -> A + Sync,
) -> Vec<A> {
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|j| {
            let count = CHUNK.min(trials - j * CHUNK);
            body(&mut stream(seed, j), count)
        })
        .collect()
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::Domain(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    Ok(())
}

/// `n` i.i.d. draws by inverse transform.
pub fn sample(t: &TailFunction, n: usize, seed: u64) -> Vec<f64> {
    chunked(n as u64, seed, |rng, count| {
        (0..count).map(|_| draw(t, rng)).collect::<Vec<_>>()
    })
    .concat()
}

/// Estimates of `P(S_n > x)` at every `x`, all from one simulated sample of sums.
pub fn mc_conv_tail_many(
    t: &TailFunction,
    n_sum: usize,
    xs: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<MCEstimate>> {
    check_trials(trials)?;
    if n_sum < 1 {
        return Err(Error::Domain("n_sum must be at least 1".into()));
    }
    let tallies = chunked(trials, seed, |rng, count| {
        let mut hits = vec![0u64; xs.len()];
        for _ in 0..count {
            let s: f64 = (0..n_sum).map(|_| draw(t, rng)).sum();
            for (h, &x) in hits.iter_mut().zip(xs) {
                *h += u64::from(s > x);
            }
        }
        hits
    });
    Ok((0..xs.len())
        .map(|i| {
            let hits = tallies.iter().map(|c| c[i]).sum();
            MCEstimate::from_counts(hits, trials, trials, seed)
        })
        .collect())
}

/// `P(S_n > x)` by direct simulation.
pub fn mc_conv_tail(
    t: &TailFunction,
    n_sum: usize,
    x: f64,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    Ok(mc_conv_tail_many(t, n_sum, &[x], trials, seed)?.remove(0))
}

/// `P(X_(n,2) <= K | S_n > x)` by rejection on `{S_n > x}`; `trials` counts proposals.
#[allow(non_snake_case)]
pub fn mc_second_max(
    t: &TailFunction,
    n_sum: usize,
    x: f64,
    K: f64,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    check_trials(trials)?;
    if n_sum < 2 {
        return Err(Error::Domain("the second maximum needs n_sum >= 2".into()));
    }
    let tallies = chunked(trials, seed, |rng, count| {
        let (mut acc, mut hit) = (0u64, 0u64);
        for _ in 0..count {
            let (mut s, mut first, mut second) = (0.0, f64::NEG_INFINITY, f64::NEG_INFINITY);
            for _ in 0..n_sum {
                let v = draw(t, rng);
                s += v;
                if v > first {
                    second = first;
                    first = v;
                } else if v > second {
                    second = v;
                }
            }
            if s > x {
                acc += 1;
                hit += u64::from(second <= K);
            }
        }
        (acc, hit)
    });
    let accepted: u64 = tallies.iter().map(|c| c.0).sum();
    let hits: u64 = tallies.iter().map(|c| c.1).sum();
    let rate = accepted as f64 / trials as f64;
    if accepted == 0 || rate < MIN_ACCEPTANCE {
        return Err(Error::Infeasible {
            rate,
            min: MIN_ACCEPTANCE,
            hint: format!("P(S_{n_sum} > {x}) is too small for rejection; try a smaller x"),
        });
    }
    Ok(MCEstimate::from_counts(hits, accepted, trials, seed))
}

/// Conditional Monte Carlo for `n = 2` at any `x > 2K`: with `X₁ ~ F`,
/// `B = E[1{X₁ <= K} F̄(x - X₁)] / (F̄(x/2)²/2 + E[1{X₁ <= x/2} F̄(x - X₁)])`,
/// a ratio estimator with delta-method standard error. Feasible where rejection is not.
#[allow(non_snake_case)]
pub fn mc_second_max_conditional(
    t: &TailFunction,
    x: f64,
    K: f64,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    check_trials(trials)?;
    if !(K > 0.0 && 2.0 * K < x && x <= t.x_cap()) {
        return Err(Error::Domain(format!("need x > 2K > 0 inside the cap, got x = {x}, K = {K}")));
    }
    let ln_ref = t.ln_unchecked(x);
    let q = (2.0 * t.ln_unchecked(0.5 * x) - ln_ref).exp() * 0.5;
    // per chunk: Σa, Σb, Σa², Σb², Σab with a = 1{≤K}g, b = 1{≤x/2}g + q, g = F̄(x - X)/F̄(x)
    let sums = chunked(trials, seed, |rng, count| {
        let mut s = [0.0f64; 5];
        for _ in 0..count {
            let y = draw(t, rng);
            let g = if y <= 0.5 * x {
                (crate::convolution::ln_tail_below(t, x, y) - ln_ref).exp()
            } else {
                0.0
            };
            let a = if y <= K { g } else { 0.0 };
            let b = g + q;
            s[0] += a;
            s[1] += b;
            s[2] += a * a;
            s[3] += b * b;
            s[4] += a * b;
        }
        s
    });
    let mut s = [0.0f64; 5];
    for c in &sums {
        for i in 0..5 {
            s[i] += c[i];
        }
    }
    let n = trials as f64;
    let (ma, mb) = (s[0] / n, s[1] / n);
    let (va, vb, cab) = (s[2] / n - ma * ma, s[3] / n - mb * mb, s[4] / n - ma * mb);
    let r = ma / mb;
    let var = (va - 2.0 * r * cab + r * r * vb).max(0.0) / (n * mb * mb);
    Ok(MCEstimate::normal(r, var.sqrt(), trials, trials, seed))
}
