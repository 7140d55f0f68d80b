//! The constructed distributions, reference families and their knot oracles.

mod entries;
pub mod oracle;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tailfn::TailFunction;

pub use entries::{
    flatten, flatten_with_points, make_ex31, make_ex32, make_ex32_base, make_ex33, make_ex41,
    make_goldie, reference, Ex32, Ex41, KnotRule, EX41_LAST_EXPONENT,
};
pub use oracle::{KnotOracle, Witness};

/// Catalog parameters; fields that do not apply to an entry must be absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl Params {
    fn given(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.alpha.is_some() {
            v.push("alpha");
        }
        if self.beta.is_some() {
            v.push("beta");
        }
        if self.x1.is_some() {
            v.push("x1");
        }
        if self.m.is_some() {
            v.push("m");
        }
        if self.a.is_some() {
            v.push("a");
        }
        if self.c.is_some() {
            v.push("c");
        }
        if self.lambda.is_some() {
            v.push("lambda");
        }
        v
    }
}

/// Static description of one catalog name.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Listing {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [&'static str],
    pub claims: &'static [&'static str],
}

/// Entries shown by `catalog list`; the closed-form integrated tail is listed with `ex41`.
pub const LISTINGS: [Listing; 9] = [
    Listing {
        name: "goldie",
        summary: "Goldie's step tail n^-n on [x_(n-1), x_n), x_n = sum k^(k-2)",
        params: &[],
        claims: &["DK1 supported (delta = 2)", "OL refuted: jump ratio (n+1)^(n+1)/n^n"],
    },
    Listing {
        name: "ex31",
        summary: "e^-sqrt(x) flattened by factor a on [x_i, y_i), x_(i+1) = 2 y_i",
        params: &["a"],
        claims: &["F̄_1 <= F̄ <= a F̄_1", "F̄(y_n - 1)/F̄(y_n) = a: L refuted", "J supported, D refuted"],
    },
    Listing {
        name: "ex32_base",
        summary: "piecewise-affine x_n^-alpha down to x_n^-beta, x_(n+1) = x_n^(beta/alpha)",
        params: &["alpha", "beta", "x1"],
        claims: &["infinite mean", "halving ratio at x_(n+1) >= (1 + x_n^(beta-alpha))/2"],
    },
    Listing {
        name: "ex32",
        summary: "ex32_base flattened with a = 2 at y_n",
        params: &["alpha", "beta", "x1"],
        claims: &["2 F̄_1(y_n) = F̄_1(x_n)", "J supported, L and D refuted"],
    },
    Listing {
        name: "ex33",
        summary: "affine x_n^-alpha to x_n^(-alpha-1) on [x_n, 2x_n), flat to x_n^(1+1/alpha); m-th power",
        params: &["alpha", "x1", "m"],
        claims: &[
            "F̄(2x_n)/F̄(x_n) = 1/x_n",
            "F̄(2x_n - 1)/F̄(2x_n) = 2 - 1/x_n",
            "x^(-alpha-1) <= F̄ <= 2^alpha x^-alpha for x >= x1",
            "J supported, L and D refuted",
        ],
    },
    Listing {
        name: "ex41",
        summary: "dyadic step tail 2^(-(n+n^2)/2)(1 - 2^-n) on [2^n, 2^(n+1)); ex41_itail is its integrated tail",
        params: &[],
        claims: &[
            "mean mu = 1",
            "F̄(2^n - 1)/F̄(2^n) ~ 2^n: OL refuted, J refuted",
            "integrated tail F̄ᴵ(2^n) = 2^((n-n^2)/2), in J but not in L or D",
        ],
    },
    Listing {
        name: "pareto",
        summary: "reference min(1, c x^-alpha)",
        params: &["c", "alpha"],
        claims: &["regularly varying: subexponential"],
    },
    Listing {
        name: "exponential",
        summary: "reference c e^(-lambda x)",
        params: &["c", "lambda"],
        claims: &["light tail"],
    },
    Listing {
        name: "expsqrt",
        summary: "reference c e^-sqrt(x)",
        params: &["c"],
        claims: &["subexponential, all moments finite"],
    },
];

/// Every name accepted by [`build`].
pub const NAMES: [&str; 10] = [
    "goldie",
    "ex31",
    "ex32_base",
    "ex32",
    "ex33",
    "ex41",
    "ex41_itail",
    "pareto",
    "exponential",
    "expsqrt",
];

pub fn listing(name: &str) -> Result<&'static Listing> {
    let key = if name == "ex41_itail" { "ex41" } else { name };
    LISTINGS
        .iter()
        .find(|l| l.name == key)
        .ok_or_else(|| Error::UnknownName(name.to_string()))
}

/// A built catalog tail with its resolved parameters.
#[derive(Debug, Clone)]
pub struct Entry {
    pub name: String,
    pub params: Params,
    pub tail: TailFunction,
    pub oracle: Arc<dyn KnotOracle>,
    /// Weak-equivalence partner: the unflattened base, or `F` for `ex41_itail`.
    pub base: Option<TailFunction>,
}

fn allowed(name: &str) -> &'static [&'static str] {
    match name {
        "ex41_itail" => &[],
        other => listing(other).map(|l| l.params).unwrap_or(&[]),
    }
}

/// Build a catalog entry; unset parameters take their defaults.
pub fn build(name: &str, params: &Params) -> Result<Entry> {
    if !NAMES.contains(&name) {
        return Err(Error::UnknownName(name.to_string()));
    }
    let ok = allowed(name);
    if let Some(bad) = params.given().into_iter().find(|p| !ok.contains(p)) {
        return Err(Error::Domain(format!("parameter `{bad}` does not apply to {name}")));
    }
    let mut p = params.clone();
    let entry = |tail, oracle: Arc<dyn KnotOracle>, base, p: Params| Entry {
        name: name.to_string(),
        params: p,
        tail,
        oracle,
        base,
    };
    Ok(match name {
        "goldie" => {
            let (t, o) = make_goldie()?;
            entry(t, Arc::new(o), None, p)
        }
        "ex31" => {
            let a = *p.a.get_or_insert(2.0);
            let (t, base, o) = make_ex31(a)?;
            entry(t, Arc::new(o), Some(base), p)
        }
        "ex32_base" | "ex32" => {
            let alpha = *p.alpha.get_or_insert(0.5);
            let beta = *p.beta.get_or_insert(0.75);
            let x1 = *p.x1.get_or_insert(100.0);
            if name == "ex32" {
                let e = make_ex32(alpha, beta, x1)?;
                entry(e.flattened, Arc::new(e.oracle), Some(e.base), p)
            } else {
                let (t, o) = make_ex32_base(alpha, beta, x1)?;
                entry(t, Arc::new(o), None, p)
            }
        }
        "ex33" => {
            let alpha = *p.alpha.get_or_insert(5.5);
            let x1 = *p.x1.get_or_insert(2050.0);
            let m = *p.m.get_or_insert(1);
            let (t, o) = make_ex33(alpha, x1, m)?;
            entry(t, Arc::new(o), None, p)
        }
        "ex41" => {
            let e = make_ex41()?;
            entry(e.f, Arc::new(e.oracle), None, p)
        }
        "ex41_itail" => {
            let e = make_ex41()?;
            entry(e.itail, Arc::new(e.itail_oracle), Some(e.f), p)
        }
        "pareto" => {
            let c = *p.c.get_or_insert(1.0);
            let alpha = *p.alpha.get_or_insert(2.0);
            let t = reference("pareto", c, alpha)?;
            entry(t, Arc::new(oracle::DyadicOracle::Pareto { ln_c: c.ln(), alpha }), None, p)
        }
        "exponential" => {
            let c = *p.c.get_or_insert(1.0);
            let lambda = *p.lambda.get_or_insert(1.0);
            let t = reference("exponential", c, lambda)?;
            entry(
                t,
                Arc::new(oracle::DyadicOracle::Exponential { ln_c: c.ln(), lambda }),
                None,
                p,
            )
        }
        "expsqrt" => {
            let c = *p.c.get_or_insert(1.0);
            let t = reference("expsqrt", c, 0.0)?;
            entry(t, Arc::new(oracle::DyadicOracle::ExpSqrt { ln_c: c.ln() }), None, p)
        }
        _ => unreachable!("name checked above"),
    })
}

/// Build with default parameters.
pub fn build_default(name: &str) -> Result<Entry> {
    build(name, &Params::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_builds_and_validates() {
        for name in NAMES {
            let e = build_default(name).unwrap();
            let v = e.tail.validate();
            assert!(v.is_empty(), "{name}: {v:?}");
        }
    }

    #[test]
    fn parameters_are_checked() {
        let p = Params {
            beta: Some(0.7),
            ..Params::default()
        };
        assert!(matches!(build("goldie", &p), Err(Error::Domain(_))));
        assert!(matches!(build_default("nope"), Err(Error::UnknownName(_))));
        let p = Params {
            alpha: Some(3.0),
            ..Params::default()
        };
        assert!(matches!(build("ex33", &p), Err(Error::Domain(_))));
    }
}
