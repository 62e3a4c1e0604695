//! JSON run configuration for the command-line front end.
//!
//! A config carries three blocks: the model parameters, the payoff and
//! barriers, and the run controls (maturities, spots, method, tolerance).
//! Unknown keys are rejected so that typos fail loudly instead of silently
//! falling back to defaults.

use serde::Deserialize;

use crate::engine::PayoffSpec;
use crate::error::PricingError;
use crate::levy::LevyModel;
use crate::pricing::{Method, PriceRequest};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub payoff: PayoffConfig,
    pub run: RunBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub nu: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Second instantaneous moment; mutually exclusive with `c`.
    pub m2: Option<f64>,
    /// Raw intensity; mutually exclusive with `m2`.
    pub c: Option<f64>,
    #[serde(default)]
    pub mu: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffConfig {
    pub kind: PayoffKind,
    pub h_minus: f64,
    pub h_plus: f64,
    /// Log-strike, required for `digital_put` and `call`.
    pub a: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffKind {
    NoTouch,
    DigitalPut,
    Call,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    /// Maturities to price, one report per entry.
    pub t: Vec<f64>,
    pub x: SpotSpec,
    pub method: Option<MethodName>,
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub dual_run: bool,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpotSpec {
    List(Vec<f64>),
    Range { min: f64, max: f64, points: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Sinh,
    Gwr,
    Auto,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Method {
        match m {
            MethodName::Sinh => Method::SinhLaplace,
            MethodName::Gwr => Method::Gwr,
            MethodName::Auto => Method::Auto,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, PricingError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| PricingError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), PricingError> {
        match (self.model.m2, self.model.c) {
            (Some(_), Some(_)) => {
                return Err(PricingError::Config("give either m2 or c, not both".into()))
            }
            (None, None) => return Err(PricingError::Config("one of m2 or c is required".into())),
            _ => {}
        }
        if self.payoff.kind != PayoffKind::NoTouch && self.payoff.a.is_none() {
            return Err(PricingError::Config(format!(
                "payoff kind {:?} requires a log-strike `a`",
                self.payoff.kind
            )));
        }
        if self.run.t.is_empty() {
            return Err(PricingError::Config("run.t must list at least one maturity".into()));
        }
        if let SpotSpec::Range { min, max, points } = self.run.x {
            if !(min < max) || points == 0 {
                return Err(PricingError::Config(
                    "spot range needs min < max and at least one point".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<LevyModel, PricingError> {
        let m = &self.model;
        match (m.m2, m.c) {
            (Some(m2), None) => LevyModel::kobol_with_m2(m.nu, m.lambda_plus, m.lambda_minus, m2, m.mu),
            (None, Some(c)) => LevyModel::kobol(m.nu, m.lambda_plus, m.lambda_minus, c, m.mu),
            _ => unreachable!("validated on load"),
        }
    }

    pub fn payoff_spec(&self) -> PayoffSpec {
        match self.payoff.kind {
            PayoffKind::NoTouch => PayoffSpec::NoTouch,
            PayoffKind::DigitalPut => PayoffSpec::DigitalPut {
                strike: self.payoff.a.expect("validated on load"),
            },
            PayoffKind::Call => PayoffSpec::Call {
                strike: self.payoff.a.expect("validated on load"),
            },
        }
    }

    pub fn spots(&self) -> Vec<f64> {
        match &self.run.x {
            SpotSpec::List(xs) => xs.clone(),
            SpotSpec::Range { min, max, points } => {
                if *points == 1 {
                    vec![0.5 * (min + max)]
                } else {
                    (0..*points)
                        .map(|i| min + (max - min) * i as f64 / (*points as f64 - 1.0))
                        .collect()
                }
            }
        }
    }

    /// One request per maturity in `run.t`.
    pub fn requests(&self) -> Result<Vec<PriceRequest>, PricingError> {
        let model = self.model()?;
        let payoff = self.payoff_spec();
        let spots = self.spots();
        self.run
            .t
            .iter()
            .map(|&t| {
                let mut req = PriceRequest::new(
                    model,
                    payoff.clone(),
                    self.payoff.h_minus,
                    self.payoff.h_plus,
                    t,
                    spots.clone(),
                );
                if let Some(m) = self.run.method {
                    req.method = m.into();
                }
                if let Some(tol) = self.run.tolerance {
                    req.tolerance = tol;
                }
                req.dual_run = self.run.dual_run;
                Ok(req)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "model": {"nu": 1.2, "lambda_plus": 1.0, "lambda_minus": -2.0, "m2": 0.1},
        "payoff": {"kind": "no_touch", "h_minus": -0.05, "h_plus": 0.05},
        "run": {"t": [0.25], "x": [-0.04, 0.0, 0.04], "method": "sinh", "dual_run": true}
    }"#;

    #[test]
    fn good_config_parses_and_builds_requests() {
        let cfg = RunConfig::from_json(GOOD).unwrap();
        let reqs = cfg.requests().unwrap();
        assert_eq!(reqs.len(), 1);
        assert_eq!(reqs[0].spots, vec![-0.04, 0.0, 0.04]);
        assert_eq!(reqs[0].method, Method::SinhLaplace);
        assert!(reqs[0].dual_run);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = GOOD.replace("\"mu\": 0.0", "").replace("\"m2\": 0.1", "\"m2\": 0.1, \"sigma\": 1.0");
        assert!(RunConfig::from_json(&text).is_err());
    }

    #[test]
    fn strike_required_for_strike_payoffs() {
        let text = GOOD.replace("no_touch", "digital_put");
        let err = RunConfig::from_json(&text).unwrap_err();
        assert!(matches!(err, PricingError::Config(_)));
    }

    #[test]
    fn m2_and_c_are_exclusive() {
        let text = GOOD.replace("\"m2\": 0.1", "\"m2\": 0.1, \"c\": 0.02");
        assert!(RunConfig::from_json(&text).is_err());
        let text = GOOD.replace("\"m2\": 0.1", "\"c\": 0.02");
        assert!(RunConfig::from_json(&text).is_ok());
    }

    #[test]
    fn spot_range_expands_inclusive() {
        let text = GOOD.replace(
            "\"x\": [-0.04, 0.0, 0.04]",
            "\"x\": {\"min\": -0.04, \"max\": 0.04, \"points\": 5}",
        );
        let cfg = RunConfig::from_json(&text).unwrap();
        let xs = cfg.spots();
        assert_eq!(xs.len(), 5);
        assert!((xs[0] + 0.04).abs() < 1e-15 && (xs[4] - 0.04).abs() < 1e-15);
        assert!((xs[2]).abs() < 1e-15);
    }
}
