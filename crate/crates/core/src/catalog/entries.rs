//! Constructors for the catalog tails.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::logmath::log_rel_diff;
use crate::tailfn::{SegmentForm, TailFunction, DEFAULT_X_CAP};

use super::oracle::{
    Ex31Oracle, Ex32Oracle, Ex33Oracle, Ex41ItailOracle, Ex41Oracle, GoldieOracle, KnotOracle,
};

/// Knot sequence `{x_i}` for [`flatten`].
#[derive(Debug, Clone, PartialEq)]
pub enum KnotRule {
    /// `x_1` given, then `x_{i+1} = factor * y_i`.
    Geometric { x1: f64, factor: f64 },
    /// Fixed `x_1 < x_2 < …`.
    Explicit(Vec<f64>),
}

/// Knots and forms under assembly; consecutive pushes must have increasing starts.
#[derive(Default)]
struct Builder {
    knots: Vec<f64>,
    forms: Vec<SegmentForm>,
}

impl Builder {
    fn push(&mut self, start: f64, form: SegmentForm) {
        debug_assert!(self.knots.last().map_or(start == 0.0, |&k| start > k));
        self.knots.push(start);
        self.forms.push(form);
    }

    /// Copy the pieces of `base` covering `[lo, hi)`.
    fn copy_base(&mut self, base: &TailFunction, lo: f64, hi: f64) {
        let segs = base.segments();
        let first = base.locate(lo);
        self.push(lo, segs[first].form.clone());
        for s in &segs[first + 1..] {
            if s.start >= hi {
                break;
            }
            self.push(s.start, s.form.clone());
        }
    }

    fn finish(self, x_cap: f64) -> Result<TailFunction> {
        TailFunction::from_parts(self.knots, self.forms, x_cap)
    }
}

/// Hold `F̄` at `F̄_1(x_i)` on `[x_i, y_i)` and rejoin `F̄_1` on `[y_i, x_{i+1})`, where
/// `F̄_1(y_i) = F̄_1(x_i)/a`. Returns the tail and the `(x_i, y_i)` pairs.
pub fn flatten_with_points(
    base: &TailFunction,
    a: f64,
    rule: &KnotRule,
) -> Result<(TailFunction, Vec<(f64, f64)>)> {
    if !(a > 1.0) {
        return Err(Error::Domain(format!("flattening factor must exceed 1, got {a}")));
    }
    let ln_a = a.ln();
    let mut cap = base.x_cap();
    let mut pairs = Vec::new();
    let mut x = match rule {
        KnotRule::Geometric { x1, .. } => *x1,
        KnotRule::Explicit(v) => *v.first().ok_or_else(|| {
            Error::Construction("explicit knot rule needs at least one knot".into())
        })?,
    };
    if !(x > 0.0) || base.log_eval_tail(x)? + ln_a > 1e-12 {
        return Err(Error::Construction(format!(
            "first flattening knot {x} must satisfy a F̄_1(x_1) <= 1"
        )));
    }
    for i in 1.. {
        let y = base.quantile_ln(base.log_eval_tail(x)? - ln_a);
        if !(y - x > 8.0 * f64::EPSILON * x) {
            // the flat piece is narrower than double resolution: materialize up to x only
            if pairs.is_empty() {
                return Err(Error::Construction(format!("no resolvable y_1 beyond x_1 = {x}")));
            }
            cap = x;
            break;
        }
        let next = match rule {
            KnotRule::Geometric { factor, .. } => factor * y,
            KnotRule::Explicit(v) => v.get(i).copied().unwrap_or(f64::INFINITY),
        };
        if !(next > y) {
            return Err(Error::Construction(format!(
                "knot rule gives x_{} = {next} <= y_{i} = {y}",
                i + 1
            )));
        }
        pairs.push((x, y));
        if !(next <= cap) {
            break;
        }
        x = next;
    }
    let mut b = Builder::default();
    b.copy_base(base, 0.0, pairs[0].0);
    for (i, &(x, y)) in pairs.iter().enumerate() {
        b.push(
            x,
            SegmentForm::const_ln(base.log_eval_tail(x)?),
        );
        let hi = pairs.get(i + 1).map_or(f64::INFINITY, |p| p.0);
        b.copy_base(base, y, hi);
    }
    Ok((b.finish(cap)?, pairs))
}

/// Flatten `base` by factor `a` at the knots of `rule`; `F̄_1 <= F̄ <= a F̄_1`.
pub fn flatten(base: &TailFunction, a: f64, rule: &KnotRule) -> Result<TailFunction> {
    Ok(flatten_with_points(base, a, rule)?.0)
}

/// Goldie's tail: `F̄ = n^-n` on `[x_{n-1}, x_n)` with `x_0 = 0` and `x_n = Σ_{k=1}^n k^(k-2)`.
pub fn make_goldie() -> Result<(TailFunction, GoldieOracle)> {
    let mut b = Builder::default();
    let mut x = 0.0f64;
    let mut n = 1u64;
    loop {
        let nf = n as f64;
        b.push(x, SegmentForm::const_ln(-nf * nf.ln()));
        if x > DEFAULT_X_CAP {
            break;
        }
        x += if n < 30 {
            nf.powi(n as i32 - 2)
        } else {
            ((nf - 2.0) * nf.ln()).exp()
        };
        n += 1;
    }
    // mass beyond the first knot past the cap is below double range
    let last = *b.knots.last().expect("nonempty");
    b.knots.push(last * 2.0);
    b.forms.push(SegmentForm::zero());
    let t = b.finish(DEFAULT_X_CAP)?;
    Ok((t, GoldieOracle))
}

/// Flattened `e^-sqrt(x)` with `x_1 = max((ln a)^2, 1)` and `x_{i+1} = 2 y_i`.
pub fn make_ex31(a: f64) -> Result<(TailFunction, TailFunction, Ex31Oracle)> {
    if !(a > 1.0) {
        return Err(Error::Domain(format!("ex31 needs a > 1, got {a}")));
    }
    let base = TailFunction::single(SegmentForm::scaled_exp_sqrt(1.0));
    let x1 = a.ln().powi(2).max(1.0);
    let t = flatten(&base, a, &KnotRule::Geometric { x1, factor: 2.0 })?;
    Ok((t, base, Ex31Oracle { a }))
}

fn check_ex32(alpha: f64, beta: f64, x1: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("ex32 needs alpha in (0,1), got {alpha}")));
    }
    if !(beta > alpha && beta < 2.0 * alpha) {
        return Err(Error::Domain(format!(
            "ex32 needs beta in (alpha, 2 alpha) = ({alpha}, {}), got {beta}",
            2.0 * alpha
        )));
    }
    let bound = (alpha / (beta - alpha)).exp2();
    if !(x1 > bound) {
        return Err(Error::Domain(format!(
            "ex32 needs x1 > 2^(alpha/(beta-alpha)) = {bound}, got {x1}"
        )));
    }
    Ok(())
}

/// Piecewise-affine `F̄_1` through `x_n^-alpha` at `x_n` with `x_{n+1} = x_n^(beta/alpha)`.
pub fn make_ex32_base(alpha: f64, beta: f64, x1: f64) -> Result<(TailFunction, Ex32Oracle)> {
    check_ex32(alpha, beta, x1)?;
    let oracle = Ex32Oracle {
        alpha,
        beta,
        x1,
        flattened: false,
    };
    let mut b = Builder::default();
    b.push(
        0.0,
        SegmentForm::affine_descent(0.0, x1, -alpha * x1.ln(), x1.powf(alpha)),
    );
    let mut n = 1u64;
    loop {
        let (ln_x, ln_next) = (oracle.log_knot(n), oracle.log_knot(n + 1));
        let (x, next) = (ln_x.exp(), ln_next.exp());
        if !next.is_finite() {
            // past the last representable knot the tail follows its x^-alpha envelope
            b.push(x, SegmentForm::ScaledPower { ln_c: 0.0, alpha });
            break;
        }
        let ratio = (alpha * (ln_next - ln_x)).exp();
        b.push(x, SegmentForm::affine_descent(x, next, -alpha * ln_next, ratio));
        n += 1;
    }
    Ok((b.finish(DEFAULT_X_CAP)?, oracle))
}

/// Base and flattened tails of the power-interpolation construction.
#[derive(Debug, Clone)]
pub struct Ex32 {
    pub base: TailFunction,
    pub flattened: TailFunction,
    pub base_oracle: Ex32Oracle,
    pub oracle: Ex32Oracle,
    /// `(x_n, y_n)` flattening pairs.
    pub pairs: Vec<(f64, f64)>,
}

/// [`make_ex32_base`] flattened with `a = 2` at every finite knot. The flattened version
/// additionally needs `x_1^(beta-alpha) > 2` so that `y_n < x_{n+1}`.
pub fn make_ex32(alpha: f64, beta: f64, x1: f64) -> Result<Ex32> {
    let (base, base_oracle) = make_ex32_base(alpha, beta, x1)?;
    let bound = (1.0 / (beta - alpha)).exp2();
    if !(x1 > bound) {
        return Err(Error::Domain(format!(
            "flattened ex32 needs x1 > 2^(1/(beta-alpha)) = {bound} so that y_n < x_(n+1), got {x1}"
        )));
    }
    let mut knots: Vec<f64> = base.knots().into_iter().skip(1).collect();
    // the envelope piece has no successor to rejoin
    knots.pop();
    let (flattened, pairs) = flatten_with_points(&base, 2.0, &KnotRule::Explicit(knots))?;
    let oracle = Ex32Oracle {
        flattened: true,
        ..base_oracle.clone()
    };
    for (i, &(x, y)) in pairs.iter().enumerate() {
        let n = i as u64 + 1;
        let y_closed = oracle.log_y(n).exp();
        if (y_closed / y - 1.0).abs() > 1e-12 {
            return Err(Error::Construction(format!(
                "y_{n} from the inverse ({y}) disagrees with the closed form ({y_closed})"
            )));
        }
        let lhs = base.log_eval_tail(y)? + LN_2;
        let rhs = base.log_eval_tail(x)?;
        if log_rel_diff(lhs, rhs) > 1e-12 {
            return Err(Error::Construction(format!("2 F̄_1(y_{n}) != F̄_1(x_{n})")));
        }
    }
    Ok(Ex32 {
        base,
        flattened,
        base_oracle,
        oracle,
        pairs,
    })
}

/// Affine from `x_n^-alpha` at `x_n` to `x_n^(-alpha-1)` at `2x_n`, flat until
/// `x_{n+1} = x_n^(1+1/alpha)`, raised to the power `m`.
fn ex33_knot(x1: f64, alpha: f64, n: u64) -> f64 {
    x1.powf((1.0 + 1.0 / alpha).powi(n as i32 - 1))
}

pub fn make_ex33(alpha: f64, x1: f64, m: u32) -> Result<(TailFunction, Ex33Oracle)> {
    if m == 0 {
        return Err(Error::Domain("ex33 needs m >= 1".into()));
    }
    let amin = 2.0 + 3.0 / m as f64;
    if !(alpha > amin) {
        return Err(Error::Domain(format!(
            "ex33 needs alpha > 2 + 3/m = {amin}, got {alpha}"
        )));
    }
    let xmin = 4f64.powf(alpha);
    if !(x1 > xmin) {
        return Err(Error::Domain(format!("ex33 needs x1 > 4^alpha = {xmin}, got {x1}")));
    }
    let oracle = Ex33Oracle { alpha, x1, m };
    let mut b = Builder::default();
    b.push(
        0.0,
        SegmentForm::affine_descent(0.0, x1, -alpha * x1.ln(), x1.powf(alpha)),
    );
    let mut n = 1u64;
    loop {
        // x_n = x1^(r^(n-1)) keeps x_1 exact
        let x = ex33_knot(x1, alpha, n);
        let low = -(alpha + 1.0) * x.ln();
        b.push(x, SegmentForm::affine_descent(x, 2.0 * x, low, x));
        let next = ex33_knot(x1, alpha, n + 1);
        if !(2.0 * next).is_finite() {
            let lx2 = (2.0 * x).ln();
            b.push(
                2.0 * x,
                SegmentForm::ScaledPower {
                    ln_c: low + (alpha + 1.0) * lx2,
                    alpha: alpha + 1.0,
                },
            );
            break;
        }
        b.push(2.0 * x, SegmentForm::const_ln(low));
        n += 1;
    }
    let t = b.finish(DEFAULT_X_CAP)?;
    let t = if m == 1 { t } else { t.map_forms(|f| f.clone().power(m)) };
    Ok((t, oracle))
}

/// Dyadic step tail and its closed-form integrated tail.
#[derive(Debug, Clone)]
pub struct Ex41 {
    pub f: TailFunction,
    pub itail: TailFunction,
    pub oracle: Ex41Oracle,
    pub itail_oracle: Ex41ItailOracle,
}

/// Largest dyadic exponent materialized: `2^997` is the first power of two past `1e300`.
pub const EX41_LAST_EXPONENT: i32 = 997;

pub fn make_ex41() -> Result<Ex41> {
    let mut f = Builder::default();
    let mut g = Builder::default();
    f.push(0.0, SegmentForm::constant(0.125));
    g.push(0.0, SegmentForm::affine_descent(0.0, 4.0, -LN_2, 2.0));
    for n in 2..EX41_LAST_EXPONENT {
        let x = 2f64.powi(n);
        let nu = n as u64;
        // 2^-k (1 - 2^-n) is exact whenever it is normal
        let level = 2f64.powi(-((n + n * n) / 2)) * (1.0 - 2f64.powi(-n));
        f.push(x, SegmentForm::const_exact(level, Ex41Oracle::ln_level(nu)));
        g.push(
            x,
            SegmentForm::affine_descent(x, 2.0 * x, Ex41ItailOracle::ln_level(nu + 1), x),
        );
    }
    let end = 2f64.powi(EX41_LAST_EXPONENT);
    f.push(end, SegmentForm::zero());
    g.push(end, SegmentForm::zero());
    Ok(Ex41 {
        f: f.finish(DEFAULT_X_CAP)?,
        itail: g.finish(DEFAULT_X_CAP)?,
        oracle: Ex41Oracle,
        itail_oracle: Ex41ItailOracle,
    })
}

/// Reference families with fully analytic operations.
pub fn reference(name: &str, c: f64, shape: f64) -> Result<TailFunction> {
    if !(c > 0.0 && c <= 1.0) && name != "pareto" {
        return Err(Error::Domain(format!("{name} needs 0 < c <= 1, got {c}")));
    }
    match name {
        "pareto" => {
            if !(c > 0.0 && shape > 0.0) {
                return Err(Error::Domain(format!(
                    "pareto needs c > 0 and alpha > 0, got c={c}, alpha={shape}"
                )));
            }
            let corner = c.powf(1.0 / shape);
            TailFunction::from_parts(
                vec![0.0, corner],
                vec![
                    SegmentForm::constant(1.0),
                    SegmentForm::ScaledPower {
                        ln_c: c.ln(),
                        alpha: shape,
                    },
                ],
                DEFAULT_X_CAP,
            )
        }
        "exponential" => {
            if !(shape > 0.0) {
                return Err(Error::Domain(format!("exponential needs lambda > 0, got {shape}")));
            }
            Ok(TailFunction::single(SegmentForm::log_affine(c, shape)))
        }
        "expsqrt" => Ok(TailFunction::single(SegmentForm::scaled_exp_sqrt(c))),
        other => Err(Error::UnknownName(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goldie_values() {
        let (t, _) = make_goldie().unwrap();
        assert_eq!(&t.knots()[..6], &[0.0, 1.0, 2.0, 5.0, 21.0, 146.0]);
        assert!((t.eval_tail(3.0).unwrap() - 1.0 / 27.0).abs() < 1e-16);
        assert!(t.validate().is_empty());
    }

    #[test]
    fn ex41_spot_values() {
        let e = make_ex41().unwrap();
        assert!((e.f.eval_tail(5.0).unwrap() - 0.09375).abs() < 1e-16);
        assert!((e.f.atom_mass(0.0).unwrap() - 0.875).abs() < 1e-16);
        assert!((e.f.atom_mass(4.0).unwrap() - 1.0 / 32.0).abs() < 1e-16);
        assert!((e.itail.eval_tail(7.0).unwrap() / e.itail.eval_tail(8.0).unwrap() - 1.75).abs() < 1e-14);
        assert!(e.f.validate().is_empty());
        assert!(e.itail.validate().is_empty());
    }

    #[test]
    fn ex33_shape() {
        let (t, o) = make_ex33(5.5, 2050.0, 1).unwrap();
        assert!(t.validate().is_empty(), "{:?}", t.validate());
        let x = 2050.0f64;
        let r = t.eval_tail(2.0 * x).unwrap() / t.eval_tail(x).unwrap();
        assert!((r * x - 1.0).abs() < 1e-12);
        assert_eq!(t.atom_mass(2.0 * x).unwrap(), 0.0);
        assert!(o.n_max() > 28);
    }

    #[test]
    fn ex32_flattening() {
        let e = make_ex32(0.5, 0.75, 100.0).unwrap();
        assert!(e.base.validate().is_empty());
        assert!(e.flattened.validate().is_empty());
        assert!(e.pairs.len() > 8);
        assert!(matches!(make_ex32(0.5, 0.75, 10.0), Err(Error::Domain(_))));
    }

    #[test]
    fn flatten_near_one_is_identity() {
        let base = TailFunction::single(SegmentForm::scaled_exp_sqrt(1.0));
        let t = flatten(&base, 1.0 + 1e-12, &KnotRule::Geometric { x1: 1.0, factor: 2.0 }).unwrap();
        for i in 0..200 {
            let x = i as f64 * 7.3;
            let d = (t.eval_tail(x).unwrap() - base.eval_tail(x).unwrap()).abs();
            assert!(d <= 1e-11 * base.eval_tail(x).unwrap());
        }
    }
}
