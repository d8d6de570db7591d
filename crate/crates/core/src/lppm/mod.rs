//! Location privacy protection mechanisms (LPPMs) and their registry.
//!
//! A mechanism maps a trace to a protected trace under a parameter
//! assignment. The registry keeps mechanisms addressable by name together
//! with their default parameter domains, so the optimizer and evaluators never
//! depend on a concrete mechanism.

mod domain;
pub mod geo_ind;
pub mod promesse;

pub use domain::{LppmConfig, ParameterDomain, Spacing};

use crate::error::{Error, Result};
use crate::geo::Trace;
use crate::rng::RandomStream;
use std::sync::{Arc, OnceLock};

pub trait Lppm: Send + Sync {
    fn name(&self) -> &str;

    /// Parameter domains explored by the optimizer.
    fn default_domains(&self) -> Vec<ParameterDomain>;

    /// Whether the output ignores the random stream.
    fn is_deterministic(&self) -> bool;

    fn protect(&self, config: &LppmConfig, trace: &Trace, rng: &RandomStream) -> Result<Trace>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GeoIndistinguishability;

impl Lppm for GeoIndistinguishability {
    fn name(&self) -> &str {
        geo_ind::NAME
    }

    fn default_domains(&self) -> Vec<ParameterDomain> {
        vec![ParameterDomain::log10(geo_ind::EPSILON, 0.001, 0.1, 101).expect("static domain")]
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn protect(&self, config: &LppmConfig, trace: &Trace, rng: &RandomStream) -> Result<Trace> {
        geo_ind::obfuscate(trace, config.require(geo_ind::EPSILON)?, rng)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Promesse;

impl Lppm for Promesse {
    fn name(&self) -> &str {
        promesse::NAME
    }

    fn default_domains(&self) -> Vec<ParameterDomain> {
        // starts at 5 m: alpha = 0 never terminates
        vec![ParameterDomain::linear(promesse::ALPHA, 5.0, 500.0, 101).expect("static domain")]
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn protect(&self, config: &LppmConfig, trace: &Trace, _rng: &RandomStream) -> Result<Trace> {
        promesse::obfuscate(trace, config.require(promesse::ALPHA)?)
    }
}

#[derive(Clone, Default)]
pub struct LppmRegistry {
    mechanisms: Vec<Arc<dyn Lppm>>,
}

impl LppmRegistry {
    /// Registry with geo-indistinguishability and Promesse.
    pub fn builtin() -> Self {
        let mut r = LppmRegistry::default();
        r.register(Arc::new(GeoIndistinguishability));
        r.register(Arc::new(Promesse));
        r
    }

    /// Adds a mechanism, replacing any previous one with the same name.
    pub fn register(&mut self, lppm: Arc<dyn Lppm>) {
        self.mechanisms.retain(|m| m.name() != lppm.name());
        self.mechanisms.push(lppm);
    }

    pub fn names(&self) -> Vec<&str> {
        self.mechanisms.iter().map(|m| m.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn Lppm> {
        self.mechanisms
            .iter()
            .find(|m| m.name() == name)
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::config(format!("unknown LPPM `{name}`")))
    }

    /// Checks that `config` names a registered mechanism and assigns exactly
    /// its parameters.
    pub fn validate(&self, config: &LppmConfig) -> Result<&dyn Lppm> {
        let lppm = self.get(&config.lppm_name)?;
        let domains = lppm.default_domains();
        for d in &domains {
            config.require(d.name())?;
        }
        if let Some(extra) = config
            .assignment
            .keys()
            .find(|k| !domains.iter().any(|d| d.name() == k.as_str()))
        {
            return Err(Error::config(format!(
                "{} has no parameter `{extra}`",
                config.lppm_name
            )));
        }
        Ok(lppm)
    }

    pub fn apply(&self, config: &LppmConfig, trace: &Trace, rng: &RandomStream) -> Result<Trace> {
        self.validate(config)?.protect(config, trace, rng)
    }
}

pub(crate) fn builtin_registry() -> &'static LppmRegistry {
    static REGISTRY: OnceLock<LppmRegistry> = OnceLock::new();
    REGISTRY.get_or_init(LppmRegistry::builtin)
}

/// Protects `trace` with the built-in mechanism named by `config`.
pub fn apply_lppm(config: &LppmConfig, trace: &Trace, rng: &RandomStream) -> Result<Trace> {
    builtin_registry().apply(config, trace, rng)
}

/// Default parameter domains of a built-in mechanism.
pub fn default_domains(lppm_name: &str) -> Result<Vec<ParameterDomain>> {
    Ok(builtin_registry().get(lppm_name)?.default_domains())
}
