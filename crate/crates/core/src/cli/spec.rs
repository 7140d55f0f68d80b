//! Distribution specs: a catalog name with parameters, or explicit knots and segment forms.

use serde::{Deserialize, Serialize};

use crate::catalog::{self, Entry, KnotOracle, Params};
use crate::error::{Error, Result};
use crate::tailfn::{SegmentForm, TailFunction, DEFAULT_X_CAP};

/// Segment shapes with plain (not logged) constants, as written in spec files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlainForm {
    Const {
        c: f64,
    },
    /// `Σ coeffs[k] x^k`
    Poly {
        coeffs: Vec<f64>,
    },
    ScaledPower {
        #[serde(alias = "C")]
        c: f64,
        alpha: f64,
    },
    ScaledExpSqrt {
        #[serde(alias = "C")]
        c: f64,
    },
    LogAffine {
        #[serde(alias = "C")]
        c: f64,
        lambda: f64,
    },
    PowerOf {
        base: Box<PlainForm>,
        m: u32,
    },
}

impl PlainForm {
    fn to_form(&self) -> Result<SegmentForm> {
        let positive = |what: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse(format!("{what} must be positive and finite, got {v}")))
            }
        };
        Ok(match self {
            PlainForm::Const { c } => {
                if !(0.0..=1.0).contains(c) {
                    return Err(Error::Parse(format!("const c must be in [0, 1], got {c}")));
                }
                SegmentForm::constant(*c)
            }
            PlainForm::Poly { coeffs } => {
                if coeffs.is_empty() || coeffs.len() > 4 || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Parse(format!(
                        "poly needs 1 to 4 finite coefficients, got {coeffs:?}"
                    )));
                }
                SegmentForm::poly(coeffs.clone(), 0.0)
            }
            PlainForm::ScaledPower { c, alpha } => {
                SegmentForm::scaled_power(positive("c", *c)?, positive("alpha", *alpha)?)
            }
            PlainForm::ScaledExpSqrt { c } => SegmentForm::scaled_exp_sqrt(positive("c", *c)?),
            PlainForm::LogAffine { c, lambda } => {
                SegmentForm::log_affine(positive("c", *c)?, positive("lambda", *lambda)?)
            }
            PlainForm::PowerOf { base, m } => {
                if *m == 0 {
                    return Err(Error::Parse("power_of needs m >= 1".into()));
                }
                SegmentForm::PowerOf {
                    base: Box::new(base.to_form()?),
                    m: *m,
                }
            }
        })
    }
}

/// A distribution as given on the command line or in a spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpec {
    Catalog {
        name: String,
        #[serde(default)]
        params: Params,
    },
    Piecewise {
        knots: Vec<f64>,
        segments: Vec<PlainForm>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_cap: Option<f64>,
    },
}

/// A built distribution: always a tail, plus the catalog entry when there is one.
pub struct Built {
    pub label: String,
    pub tail: TailFunction,
    pub entry: Option<Entry>,
}

impl Built {
    pub fn oracle(&self) -> Option<&dyn KnotOracle> {
        self.entry.as_ref().map(|e| e.oracle.as_ref() as &dyn KnotOracle)
    }
}

impl DistSpec {
    pub fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("distribution spec: {e}")))
    }

    pub fn build(&self) -> Result<Built> {
        match self {
            DistSpec::Catalog { name, params } => {
                let e = catalog::build(name, params)?;
                Ok(Built {
                    label: name.clone(),
                    tail: e.tail.clone(),
                    entry: Some(e),
                })
            }
            DistSpec::Piecewise {
                knots,
                segments,
                x_cap,
            } => {
                let forms = segments
                    .iter()
                    .map(PlainForm::to_form)
                    .collect::<Result<Vec<_>>>()?;
                let tail = TailFunction::checked(knots.clone(), forms, x_cap.unwrap_or(DEFAULT_X_CAP))?;
                Ok(Built {
                    label: "piecewise".into(),
                    tail,
                    entry: None,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_spec_round_trips() {
        let s = DistSpec::parse_json(r#"{"kind": "catalog", "name": "ex33", "params": {"alpha": 5.5}}"#)
            .unwrap();
        let back = DistSpec::parse_json(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, back);
        assert_eq!(s.build().unwrap().label, "ex33");
    }

    #[test]
    fn piecewise_spec_builds_a_checked_tail() {
        let s = DistSpec::parse_json(
            r#"{"kind": "piecewise", "knots": [0, 1],
                "segments": [{"form": "const", "c": 1}, {"form": "scaled_power", "C": 1, "alpha": 2}]}"#,
        )
        .unwrap();
        let t = s.build().unwrap().tail;
        assert_eq!(t.eval_tail(2.0).unwrap(), 0.25);
    }

    #[test]
    fn unknown_fields_and_bad_shapes_are_rejected() {
        let bad = [
            r#"{"kind": "catalog", "name": "ex41", "extra": 1}"#,
            r#"{"kind": "piecewise", "knots": [0], "segments": [{"form": "const", "c": 1, "d": 2}]}"#,
            r#"{"kind": "other"}"#,
        ];
        for b in bad {
            assert!(matches!(DistSpec::parse_json(b), Err(Error::Parse(_))), "{b}");
        }
        // increasing tail fails validation
        let s = DistSpec::parse_json(
            r#"{"kind": "piecewise", "knots": [0, 1], "segments": [{"form": "const", "c": 0.5}, {"form": "const", "c": 0.9}]}"#,
        )
        .unwrap();
        assert!(matches!(s.build(), Err(Error::Construction(_))));
    }
}
