use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log10,
}

/// A finite, strictly increasing set of admissible values for one parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterDomain {
    name: String,
    values: Vec<f64>,
    spacing: Spacing,
}

impl ParameterDomain {
    pub fn new(name: impl Into<String>, values: Vec<f64>, spacing: Spacing) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::config(format!("domain `{name}` is empty")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config(format!("domain `{name}` has non-finite values")));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config(format!("domain `{name}` is not strictly increasing")));
        }
        if spacing == Spacing::Log10 && values[0] <= 0.0 {
            return Err(Error::config(format!("log-spaced domain `{name}` needs positive values")));
        }
        Ok(ParameterDomain {
            name,
            values,
            spacing,
        })
    }

    /// `count` evenly spaced values over `[lo, hi]`, endpoints included.
    pub fn linear(name: impl Into<String>, lo: f64, hi: f64, count: usize) -> Result<Self> {
        let values = grid(lo, hi, count, |t| lo + (hi - lo) * t);
        ParameterDomain::new(name, values, Spacing::Linear)
    }

    /// `count` values evenly spaced in `log10` over `[lo, hi]`, endpoints included.
    pub fn log10(name: impl Into<String>, lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > 0.0) {
            return Err(Error::config("log-spaced bounds must be positive"));
        }
        let (a, b) = (lo.log10(), hi.log10());
        let values = grid(lo, hi, count, |t| 10f64.powf(a + (b - a) * t));
        ParameterDomain::new(name, values, Spacing::Log10)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// Index of `value`, allowing a relative mismatch of 1e-9 so values that
    /// went through text formatting still resolve.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        let i = self.values.partition_point(|v| *v < value);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter(|&j| j < self.values.len())
            .find(|&j| {
                let v = self.values[j];
                v == value || (v - value).abs() <= 1e-9 * v.abs().max(value.abs())
            })
    }
}

fn grid(lo: f64, hi: f64, count: usize, at: impl Fn(f64) -> f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n)
            .map(|i| match i {
                0 => lo,
                i if i == n - 1 => hi,
                i => at(i as f64 / (n - 1) as f64),
            })
            .collect(),
    }
}

/// A named mechanism plus one value per parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LppmConfig {
    pub lppm_name: String,
    pub assignment: BTreeMap<String, f64>,
}

impl LppmConfig {
    pub fn new(lppm_name: impl Into<String>) -> Self {
        LppmConfig {
            lppm_name: lppm_name.into(),
            assignment: BTreeMap::new(),
        }
    }

    pub fn with(mut self, param: impl Into<String>, value: f64) -> Self {
        self.assignment.insert(param.into(), value);
        self
    }

    pub fn get(&self, param: &str) -> Option<f64> {
        self.assignment.get(param).copied()
    }

    pub(crate) fn require(&self, param: &str) -> Result<f64> {
        self.get(param).ok_or_else(|| {
            Error::config(format!("{} requires parameter `{param}`", self.lppm_name))
        })
    }
}

impl fmt::Display for LppmConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{", self.lppm_name)?;
        for (i, (k, v)) in self.assignment.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str("}")
    }
}
