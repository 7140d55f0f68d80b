//! Closed-form log-domain accessors for catalog knot sequences.
//!
//! Every quantity is a natural log, so indices far beyond double range (knots like `2^(10^6)`)
//! stay exact. Indices are capped where `|ln F̄|` would exceed [`LOG_CAP`].

use std::f64::consts::{LN_2, SQRT_2};
use std::fmt::Debug;

use crate::logmath::{ln_1m_exp, log_add_exp, log_sub_exp, log_sum_exp};

/// Largest `|ln F̄|` an oracle will report.
pub const LOG_CAP: f64 = 1e15;

/// A witness point for a ratio diagnostic: `ln x` and the log ratio there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub ln_x: f64,
    pub ln_ratio: f64,
}

pub trait KnotOracle: Send + Sync + Debug {
    fn name(&self) -> &'static str;
    /// First index with a positive knot.
    fn n_min(&self) -> u64;
    /// Last index with `|ln F̄| <= LOG_CAP`.
    fn n_max(&self) -> u64;
    fn log_knot(&self, n: u64) -> f64;
    /// `ln F̄(knot_n)`.
    fn log_tail_at(&self, n: u64) -> f64;
    /// `ln F̄(knot_n -)`.
    fn log_left_tail_at(&self, n: u64) -> f64 {
        self.log_tail_at(n)
    }
    /// `(ln x, ln F̄(x))` at the extreme points of period `[knot_n, knot_{n+1})`, left limits
    /// included.
    fn period_points(&self, n: u64) -> Vec<(f64, f64)>;
    /// Point of period `n` where `F̄(x - t)/F̄(x)` is largest, with that ratio.
    fn shift_witness(&self, n: u64, t: f64) -> Witness;
    /// Point of period `n` where `F̄(x/2)/F̄(x)` is largest, with that ratio.
    fn halving_witness(&self, n: u64) -> Witness;
    fn ratio_names(&self) -> &'static [&'static str];
    /// Log of an entry-specific closed-form ratio at index `n`.
    fn named_ratio(&self, name: &str, n: u64) -> Option<f64>;
}

fn ln_1p_exp(z: f64) -> f64 {
    log_add_exp(0.0, z)
}

/// `ln(e^z - 1)` for `z > 0`.
fn ln_expm1(z: f64) -> f64 {
    log_sub_exp(z, 0.0)
}

/// Largest `n >= lo` with `pred(n)`, given `pred` is true at `lo` and eventually false.
fn last_true(lo: u64, pred: impl Fn(u64) -> bool) -> u64 {
    let mut hi = lo.max(1);
    while pred(hi) {
        if hi > u64::MAX / 4 {
            return hi;
        }
        hi *= 2;
    }
    let mut lo = lo;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Goldie knots `x_n = Σ_{k=1}^n k^(k-2)` with `F̄ = n^-n` on `[x_{n-1}, x_n)`.
#[derive(Debug, Clone)]
pub struct GoldieOracle;

impl GoldieOracle {
    /// `-n ln n`: log of the value on `[x_{n-1}, x_n)`.
    fn ln_level(n: u64) -> f64 {
        let nf = n as f64;
        -nf * nf.ln()
    }
}

impl KnotOracle for GoldieOracle {
    fn name(&self) -> &'static str {
        "goldie"
    }
    fn n_min(&self) -> u64 {
        2
    }
    fn n_max(&self) -> u64 {
        last_true(2, |n| -Self::ln_level(n + 1) <= LOG_CAP)
    }
    fn log_knot(&self, n: u64) -> f64 {
        // terms shrink like (e k)^-j going backwards; 60 terms exhaust double precision
        let lo = n.saturating_sub(60).max(1);
        let terms: Vec<f64> = (lo..=n)
            .map(|k| {
                let kf = k as f64;
                (kf - 2.0) * kf.ln()
            })
            .collect();
        log_sum_exp(&terms)
    }
    fn log_tail_at(&self, n: u64) -> f64 {
        Self::ln_level(n + 1)
    }
    fn log_left_tail_at(&self, n: u64) -> f64 {
        Self::ln_level(n)
    }
    fn period_points(&self, n: u64) -> Vec<(f64, f64)> {
        let v = self.log_tail_at(n);
        vec![(self.log_knot(n), v), (self.log_knot(n + 1), v)]
    }
    fn shift_witness(&self, n: u64, t: f64) -> Witness {
        // at x_{n+1}, stepping back into the period containing x_{n+1} - t
        let m = n + 1;
        let ln_x = self.log_knot(m);
        let ln_pos = log_sub_exp(ln_x, t.ln());
        let mut j = m;
        while j > 1 && ln_pos < self.log_knot(j - 1) {
            j -= 1;
        }
        Witness {
            ln_x,
            ln_ratio: Self::ln_level(j) - Self::ln_level(m + 1),
        }
    }
    fn halving_witness(&self, n: u64) -> Witness {
        let m = n + 1;
        Witness {
            ln_x: self.log_knot(m),
            ln_ratio: Self::ln_level(m) - Self::ln_level(m + 1),
        }
    }
    fn ratio_names(&self) -> &'static [&'static str] {
        &["jump"]
    }
    fn named_ratio(&self, name: &str, n: u64) -> Option<f64> {
        match name {
            // F̄(x_n - 1)/F̄(x_n) = n^-n (n+1)^(n+1)
            "jump" => Some(Self::ln_level(n) - Self::ln_level(n + 1)),
            _ => None,
        }
    }
}

/// Flattened `e^-sqrt(x)`: `x_1 = max((ln a)^2, 1)`, `sqrt(y_n) = sqrt(x_n) + ln a`,
/// `x_{n+1} = 2 y_n`.
#[derive(Debug, Clone)]
pub struct Ex31Oracle {
    pub a: f64,
}

impl Ex31Oracle {
    /// `sqrt(x_n)` from the affine recursion `s_{n+1} = sqrt2 (s_n + ln a)`.
    pub fn sqrt_knot(&self, n: u64) -> f64 {
        let l = self.a.ln();
        let s1 = (l * l).max(1.0).sqrt();
        let fixed = -SQRT_2 * l / (SQRT_2 - 1.0);
        (s1 - fixed) * SQRT_2.powf(n as f64 - 1.0) + fixed
    }
    pub fn log_y(&self, n: u64) -> f64 {
        2.0 * (self.sqrt_knot(n) + self.a.ln()).ln()
    }
}

impl KnotOracle for Ex31Oracle {
    fn name(&self) -> &'static str {
        "ex31"
    }
    fn n_min(&self) -> u64 {
        1
    }
    fn n_max(&self) -> u64 {
        last_true(1, |n| self.sqrt_knot(n + 1) <= LOG_CAP)
    }
    fn log_knot(&self, n: u64) -> f64 {
        2.0 * self.sqrt_knot(n).ln()
    }
    fn log_tail_at(&self, n: u64) -> f64 {
        -self.sqrt_knot(n)
    }
    fn period_points(&self, n: u64) -> Vec<(f64, f64)> {
        let s = self.sqrt_knot(n);
        let l = self.a.ln();
        let ly = self.log_y(n);
        vec![
            (self.log_knot(n), -s),
            (ly, -s),
            (ly, -s - l),
            (self.log_knot(n + 1), -self.sqrt_knot(n + 1)),
        ]
    }
    fn shift_witness(&self, n: u64, t: f64) -> Witness {
        let s = self.sqrt_knot(n);
        let l = self.a.ln();
        let y = self.log_y(n).exp();
        let x = s * s;
        let back = y - t;
        let ln_left = if back >= x {
            -s
        } else {
            -(back.max(0.0)).sqrt().min(s)
        };
        Witness {
            ln_x: self.log_y(n),
            ln_ratio: ln_left + s + l,
        }
    }
    fn halving_witness(&self, n: u64) -> Witness {
        // x_{n+1}/2 = y_n exactly
        let s = self.sqrt_knot(n);
        let s_next = self.sqrt_knot(n + 1);
        Witness {
            ln_x: self.log_knot(n + 1),
            ln_ratio: s_next - s - self.a.ln(),
        }
    }
    fn ratio_names(&self) -> &'static [&'static str] {
        &["jump_at_y"]
    }
    fn named_ratio(&self, name: &str, n: u64) -> Option<f64> {
        match name {
            // F̄(y_n - 1)/F̄(y_n) = a once y_n - x_n >= 1
            "jump_at_y" => Some(self.shift_witness(n, 1.0).ln_ratio),
            _ => None,
        }
    }
}

/// Piecewise-affine power interpolation with `x_{n+1} = x_n^(beta/alpha)`, optionally
/// flattened at `y_n` with `a = 2`.
#[derive(Debug, Clone)]
pub struct Ex32Oracle {
    pub alpha: f64,
    pub beta: f64,
    pub x1: f64,
    pub flattened: bool,
}

impl Ex32Oracle {
    /// `ln q_n = (beta - alpha) ln x_n`, the log of the left/right value ratio on period `n`.
    fn ln_q(&self, n: u64) -> f64 {
        (self.beta - self.alpha) * self.log_knot(n)
    }
    /// `ln r_n = ln(x_{n+1}/x_n)`.
    fn ln_r(&self, n: u64) -> f64 {
        self.ln_q(n) / self.alpha
    }
    /// `ln(x_{n+1} - x_n)`.
    fn ln_width(&self, n: u64) -> f64 {
        self.log_knot(n + 1) + ln_1m_exp(-self.ln_r(n))
    }
    /// `ln y_n` from `y_n = (x_{n+1}+x_n)/2 + (x_{n+1}-x_n)/(2(q-1))`.
    pub fn log_y(&self, n: u64) -> f64 {
        let ln_r = self.ln_r(n);
        let inv_r = (-ln_r).exp();
        let inv_qm1 = (-ln_expm1(self.ln_q(n))).exp();
        self.log_knot(n) + ln_r - LN_2 + (inv_r + (1.0 - inv_r) * inv_qm1).ln_1p()
    }
    /// `ln F̄_1` at a point of period `n` given by `ln x`.
    fn ln_base_in_period(&self, n: u64, ln_pos: f64) -> f64 {
        // v_R (1 + (q-1)(x_{n+1} - p)/(x_{n+1} - x_n))
        let ln_vr = -self.beta * self.log_knot(n);
        let ln_gap = log_sub_exp(self.log_knot(n + 1), ln_pos);
        ln_vr + ln_1p_exp(ln_expm1(self.ln_q(n)) + ln_gap - self.ln_width(n))
    }
}

impl KnotOracle for Ex32Oracle {
    fn name(&self) -> &'static str {
        if self.flattened {
            "ex32"
        } else {
            "ex32_base"
        }
    }
    fn n_min(&self) -> u64 {
        1
    }
    fn n_max(&self) -> u64 {
        last_true(1, |n| self.beta * self.log_knot(n + 1) <= LOG_CAP)
    }
    fn log_knot(&self, n: u64) -> f64 {
        self.x1.ln() * (self.beta / self.alpha).powf(n as f64 - 1.0)
    }
    fn log_tail_at(&self, n: u64) -> f64 {
        -self.alpha * self.log_knot(n)
    }
    fn period_points(&self, n: u64) -> Vec<(f64, f64)> {
        let v = self.log_tail_at(n);
        let v_next = self.log_tail_at(n + 1);
        let mut pts = vec![(self.log_knot(n), v)];
        if self.flattened {
            let ly = self.log_y(n);
            pts.push((ly, v));
            pts.push((ly, v - LN_2));
        }
        pts.push((self.log_knot(n + 1), v_next));
        pts
    }
    fn shift_witness(&self, n: u64, t: f64) -> Witness {
        if self.flattened {
            let ly = self.log_y(n);
            let ln_back = log_sub_exp(ly, t.ln());
            let ln_left = if ln_back >= self.log_knot(n) {
                self.log_tail_at(n)
            } else {
                // steps back into the previous rejoined base piece
                self.ln_base_in_period(n - 1, ln_back.max(self.log_knot(n - 1)))
            };
            return Witness {
                ln_x: ly,
                ln_ratio: ln_left - (self.log_tail_at(n) - LN_2),
            };
        }
        // steepest relative descent sits at the right end of the period
        let ln_x = self.log_knot(n + 1);
        let ln_back = log_sub_exp(ln_x, t.ln()).max(self.log_knot(n));
        Witness {
            ln_x,
            ln_ratio: self.ln_base_in_period(n, ln_back) - self.log_tail_at(n + 1),
        }
    }
    fn halving_witness(&self, n: u64) -> Witness {
        let ln_x = self.log_knot(n + 1);
        if self.flattened {
            // x_{n+1}/2 lies in the flat piece [x_n, y_n)
            return Witness {
                ln_x,
                ln_ratio: self.ln_q(n),
            };
        }
        Witness {
            ln_x,
            ln_ratio: self.ln_base_in_period(n, ln_x - LN_2) - self.log_tail_at(n + 1),
        }
    }
    fn ratio_names(&self) -> &'static [&'static str] {
        &["halving_at_next", "halving_bound", "jump_at_y"]
    }
    fn named_ratio(&self, name: &str, n: u64) -> Option<f64> {
        match name {
            "halving_at_next" => Some(self.halving_witness(n).ln_ratio),
            // (1 + x_n^(beta-alpha))/2
            "halving_bound" => Some(ln_1p_exp(self.ln_q(n)) - LN_2),
            "jump_at_y" if self.flattened => Some(self.shift_witness(n, 1.0).ln_ratio),
            _ => None,
        }
    }
}

/// Affine descent from `x_n^-alpha` to `x_n^(-alpha-1)` on `[x_n, 2x_n)`, flat to
/// `x_{n+1} = x_n^(1+1/alpha)`; raised to the power `m`.
#[derive(Debug, Clone)]
pub struct Ex33Oracle {
    pub alpha: f64,
    pub x1: f64,
    pub m: u32,
}

impl KnotOracle for Ex33Oracle {
    fn name(&self) -> &'static str {
        "ex33"
    }
    fn n_min(&self) -> u64 {
        1
    }
    fn n_max(&self) -> u64 {
        last_true(1, |n| {
            self.m as f64 * (self.alpha + 1.0) * self.log_knot(n + 1) <= LOG_CAP
        })
    }
    fn log_knot(&self, n: u64) -> f64 {
        self.x1.ln() * (1.0 + 1.0 / self.alpha).powf(n as f64 - 1.0)
    }
    fn log_tail_at(&self, n: u64) -> f64 {
        -(self.m as f64) * self.alpha * self.log_knot(n)
    }
    fn period_points(&self, n: u64) -> Vec<(f64, f64)> {
        let lx = self.log_knot(n);
        let low = -(self.m as f64) * (self.alpha + 1.0) * lx;
        vec![
            (lx, self.log_tail_at(n)),
            (lx + LN_2, low),
            (self.log_knot(n + 1), low),
        ]
    }
    fn shift_witness(&self, n: u64, t: f64) -> Witness {
        let lx = self.log_knot(n);
        let x = lx.exp();
        // F̄(2x_n - t)/F̄(2x_n) = 1 + t - t/x_n inside the descent, x_n beyond it
        let ratio = if t <= x {
            (t * (1.0 - 1.0 / x)).ln_1p()
        } else {
            lx
        };
        Witness {
            ln_x: lx + LN_2,
            ln_ratio: self.m as f64 * ratio,
        }
    }
    fn halving_witness(&self, n: u64) -> Witness {
        let lx = self.log_knot(n);
        Witness {
            ln_x: lx + LN_2,
            ln_ratio: self.m as f64 * lx,
        }
    }
    fn ratio_names(&self) -> &'static [&'static str] {
        &["drop", "shift1"]
    }
    fn named_ratio(&self, name: &str, n: u64) -> Option<f64> {
        match name {
            // F̄(2x_n)/F̄(x_n) = 1/x_n
            "drop" => Some(-(self.m as f64) * self.log_knot(n)),
            // F̄(2x_n - 1)/F̄(2x_n) = 2 - 1/x_n
            "shift1" => Some(self.shift_witness(n, 1.0).ln_ratio),
            _ => None,
        }
    }
}

/// Dyadic step tail `c_n = 2^(-(n+n^2)/2)(1 - 2^-n)` on `[2^n, 2^(n+1))`.
#[derive(Debug, Clone)]
pub struct Ex41Oracle;

impl Ex41Oracle {
    pub fn ln_level(n: u64) -> f64 {
        if n < 2 {
            return -3.0 * LN_2;
        }
        let nf = n as f64;
        -(nf + nf * nf) / 2.0 * LN_2 + ln_1m_exp(-nf * LN_2)
    }
}

impl KnotOracle for Ex41Oracle {
    fn name(&self) -> &'static str {
        "ex41"
    }
    fn n_min(&self) -> u64 {
        2
    }
    fn n_max(&self) -> u64 {
        last_true(2, |n| -Self::ln_level(n + 1) <= LOG_CAP)
    }
    fn log_knot(&self, n: u64) -> f64 {
        n as f64 * LN_2
    }
    fn log_tail_at(&self, n: u64) -> f64 {
        Self::ln_level(n)
    }
    fn log_left_tail_at(&self, n: u64) -> f64 {
        Self::ln_level(n - 1)
    }
    fn period_points(&self, n: u64) -> Vec<(f64, f64)> {
        let v = Self::ln_level(n);
        vec![(self.log_knot(n), v), (self.log_knot(n + 1), v)]
    }
    fn shift_witness(&self, n: u64, t: f64) -> Witness {
        // at 2^(n+1): stepping back t <= 2^n stays in period n
        let x = ((n + 1) as f64).exp2();
        let j = if !x.is_finite() || t <= 0.5 * x {
            n
        } else if x - t < 4.0 {
            1
        } else {
            (x - t).log2().floor() as u64
        };
        Witness {
            ln_x: self.log_knot(n + 1),
            ln_ratio: Self::ln_level(j) - Self::ln_level(n + 1),
        }
    }
    fn halving_witness(&self, n: u64) -> Witness {
        Witness {
            ln_x: self.log_knot(n + 1),
            ln_ratio: Self::ln_level(n) - Self::ln_level(n + 1),
        }
    }
    fn ratio_names(&self) -> &'static [&'static str] {
        &["jump"]
    }
    fn named_ratio(&self, name: &str, n: u64) -> Option<f64> {
        match name {
            // F̄(2^n - 1)/F̄(2^n) = 2^n (1 - 2^(1-n))/(1 - 2^-n), without differencing levels
            "jump" if n >= 3 => {
                let nf = n as f64;
                Some(nf * LN_2 + ln_1m_exp((1.0 - nf) * LN_2) - ln_1m_exp(-nf * LN_2))
            }
            "jump" => Some(Self::ln_level(n - 1) - Self::ln_level(n)),
            _ => None,
        }
    }
}

/// Integrated tail of [`Ex41Oracle`]: `I_n = 2^((n-n^2)/2)` at `2^n`, affine in between.
#[derive(Debug, Clone)]
pub struct Ex41ItailOracle;

impl Ex41ItailOracle {
    pub fn ln_level(n: u64) -> f64 {
        let nf = n as f64;
        (nf - nf * nf) / 2.0 * LN_2
    }
}

impl KnotOracle for Ex41ItailOracle {
    fn name(&self) -> &'static str {
        "ex41_itail"
    }
    fn n_min(&self) -> u64 {
        2
    }
    fn n_max(&self) -> u64 {
        last_true(2, |n| -Self::ln_level(n + 1) <= LOG_CAP)
    }
    fn log_knot(&self, n: u64) -> f64 {
        n as f64 * LN_2
    }
    fn log_tail_at(&self, n: u64) -> f64 {
        Self::ln_level(n)
    }
    fn period_points(&self, n: u64) -> Vec<(f64, f64)> {
        vec![
            (self.log_knot(n), Self::ln_level(n)),
            (self.log_knot(n + 1), Self::ln_level(n + 1)),
        ]
    }
    fn shift_witness(&self, n: u64, t: f64) -> Witness {
        // F̄ᴵ(2^(n+1) - t)/F̄ᴵ(2^(n+1)) = 1 + (1 - 2^-n) t for t <= 2^n
        let nf = n as f64;
        let slope = -(-nf * LN_2).exp_m1();
        let t_in = t.min(nf.exp2());
        Witness {
            ln_x: self.log_knot(n + 1),
            ln_ratio: (slope * t_in).ln_1p(),
        }
    }
    fn halving_witness(&self, n: u64) -> Witness {
        // F̄ᴵ(2^n)/F̄ᴵ(2^(n+1)) = 2^n
        Witness {
            ln_x: self.log_knot(n + 1),
            ln_ratio: n as f64 * LN_2,
        }
    }
    fn ratio_names(&self) -> &'static [&'static str] {
        &["step", "shift1"]
    }
    fn named_ratio(&self, name: &str, n: u64) -> Option<f64> {
        match name {
            // F̄ᴵ(2^(n+1))/F̄ᴵ(2^n) = 2^-n
            "step" => Some(-(n as f64) * LN_2),
            // F̄ᴵ(2^(n+1) - 1)/F̄ᴵ(2^(n+1)) = 2 - 2^-n
            "shift1" => Some(self.shift_witness(n, 1.0).ln_ratio),
            _ => None,
        }
    }
}

/// Reference families sampled at dyadic points `2^n`.
#[derive(Debug, Clone)]
pub enum DyadicOracle {
    Pareto { ln_c: f64, alpha: f64 },
    Exponential { ln_c: f64, lambda: f64 },
    ExpSqrt { ln_c: f64 },
}

impl DyadicOracle {
    /// `ln F̄(e^ln_x)`.
    fn ln_tail(&self, ln_x: f64) -> f64 {
        match *self {
            DyadicOracle::Pareto { ln_c, alpha } => (ln_c - alpha * ln_x).min(0.0),
            DyadicOracle::Exponential { ln_c, lambda } => (ln_c - lambda * ln_x.exp()).min(0.0),
            DyadicOracle::ExpSqrt { ln_c } => (ln_c - (0.5 * ln_x).exp()).min(0.0),
        }
    }
}

impl KnotOracle for DyadicOracle {
    fn name(&self) -> &'static str {
        match self {
            DyadicOracle::Pareto { .. } => "pareto",
            DyadicOracle::Exponential { .. } => "exponential",
            DyadicOracle::ExpSqrt { .. } => "expsqrt",
        }
    }
    fn n_min(&self) -> u64 {
        1
    }
    fn n_max(&self) -> u64 {
        last_true(1, |n| n < 1000 && -self.ln_tail((n + 1) as f64 * LN_2) <= LOG_CAP)
    }
    fn log_knot(&self, n: u64) -> f64 {
        n as f64 * LN_2
    }
    fn log_tail_at(&self, n: u64) -> f64 {
        self.ln_tail(self.log_knot(n))
    }
    fn period_points(&self, n: u64) -> Vec<(f64, f64)> {
        vec![
            (self.log_knot(n), self.log_tail_at(n)),
            (self.log_knot(n + 1), self.log_tail_at(n + 1)),
        ]
    }
    fn shift_witness(&self, n: u64, t: f64) -> Witness {
        let ln_x = self.log_knot(n + 1);
        let x = ln_x.exp();
        let ln_ratio = match *self {
            DyadicOracle::Pareto { .. } => {
                self.ln_tail(log_sub_exp(ln_x, t.ln())) - self.ln_tail(ln_x)
            }
            DyadicOracle::Exponential { lambda, .. } => lambda * t.min(x),
            DyadicOracle::ExpSqrt { .. } => x.sqrt() - (x - t).max(0.0).sqrt(),
        };
        Witness { ln_x, ln_ratio }
    }
    fn halving_witness(&self, n: u64) -> Witness {
        let ln_x = self.log_knot(n + 1);
        Witness {
            ln_x,
            ln_ratio: self.log_tail_at(n) - self.log_tail_at(n + 1),
        }
    }
    fn ratio_names(&self) -> &'static [&'static str] {
        &[]
    }
    fn named_ratio(&self, _name: &str, _n: u64) -> Option<f64> {
        None
    }
}
