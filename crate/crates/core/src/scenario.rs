//! Scenario files: a space, named step functions, an optional weight and
//! parameters, as JSON.
//!
//! ```json
//! {
//!   "space": {"density": {"domain": ["0", "inf"], "breaks": [], "values": ["1"]}},
//!   "functions": {"f": {"domain": ["0", "inf"], "breaks": ["1"], "values": ["2", "0"]}},
//!   "weight": {"step": {"domain": ["0", "inf"], "breaks": [], "values": ["1"]}},
//!   "params": {"p": "2", "epsilon": "1/10"}
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::embedding::TwoMeasures;
use crate::error::{Error, Result};
use crate::power_tail::PowerTail;
use crate::scalar::{ExtScalar, Rational};
use crate::space::WeightedSpace;
use crate::step::StepFunction;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Step(StepFunction),
    PowerTail(PowerTail),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<ExtScalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<ExtScalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cases: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Campaign families to run; all when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub families: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub space: WeightedSpace,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, StepFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightSpec>,
    /// Density of a second measure `ν` on the same domain, for the embedding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<StepFunction>,
    #[serde(default)]
    pub params: Params,
}

fn finite(name: &str, x: &ExtScalar) -> Result<Rational> {
    match x {
        ExtScalar::Finite(q) => Ok(q.clone()),
        ExtScalar::Infinite => Err(Error::Parse(format!("params.{name} must be finite"))),
    }
}

impl Scenario {
    /// Parses and checks that every function lives on the space's domain.
    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let domain = self.space.domain();
        for (name, f) in &self.functions {
            if f.domain() != domain {
                return Err(Error::Parse(format!("functions.{name}: domain {} differs from space domain {domain}", f.domain())));
            }
        }
        if let Some(WeightSpec::Step(v)) = &self.weight {
            if v.domain() != domain {
                return Err(Error::Parse(format!("weight.step: domain {} differs from space domain {domain}", v.domain())));
            }
        }
        if let Some(nu) = &self.nu {
            if nu.domain() != domain {
                return Err(Error::Parse(format!("nu: domain {} differs from space domain {domain}", nu.domain())));
            }
        }
        self.p()?;
        self.epsilon()?;
        Ok(())
    }

    pub fn p(&self) -> Result<Option<Rational>> {
        self.params.p.as_ref().map(|x| finite("p", x)).transpose()
    }

    pub fn epsilon(&self) -> Result<Option<Rational>> {
        self.params.epsilon.as_ref().map(|x| finite("epsilon", x)).transpose()
    }

    pub fn step_weight(&self) -> Option<&StepFunction> {
        match &self.weight {
            Some(WeightSpec::Step(v)) => Some(v),
            _ => None,
        }
    }

    /// `μ` from the space and `ν` from `nu`, or else `dν = v dμ` for a step weight.
    pub fn measures(&self) -> Result<TwoMeasures> {
        let w_mu = self.space.density().clone();
        let w_nu = match (&self.nu, self.step_weight()) {
            (Some(nu), _) => nu.clone(),
            (None, Some(v)) => v.mul(&w_mu)?,
            (None, None) => return Err(Error::Parse("the embedding needs `nu` or a step `weight`".into())),
        };
        TwoMeasures::new(w_mu, w_nu)
    }
}
