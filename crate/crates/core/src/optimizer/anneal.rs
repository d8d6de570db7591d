use super::objective::{combine_cost, Objective};
use crate::error::{Error, Result};
use crate::lppm::{LppmConfig, ParameterDomain};
use crate::metrics::{evaluate_robust_many, Evaluator, Reference};
use crate::rng::RandomStream;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Geometric cooling from `t0` down to `t_min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealingSchedule {
    pub t0: f64,
    pub t_min: f64,
    pub delta_t: f64,
}

impl Default for AnnealingSchedule {
    fn default() -> Self {
        AnnealingSchedule {
            t0: 1.0,
            t_min: 1e-5,
            delta_t: 0.9,
        }
    }
}

impl AnnealingSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min < self.t0 && self.t0.is_finite()) {
            return Err(Error::config(format!(
                "schedule needs 0 < t_min < t0, got t0={} t_min={}",
                self.t0, self.t_min
            )));
        }
        if !(self.delta_t > 0.0 && self.delta_t < 1.0) {
            return Err(Error::config(format!(
                "cooling rate must lie in (0, 1), got {}",
                self.delta_t
            )));
        }
        Ok(())
    }

    /// Number of temperature steps the schedule executes.
    pub fn steps(&self) -> usize {
        let mut t = self.t0;
        let mut n = 0;
        while t >= self.t_min {
            t *= self.delta_t;
            n += 1;
        }
        n
    }
}

/// Which state an annealing run hands over for protection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    /// Lowest-cost state seen during the run.
    #[default]
    Best,
    /// State held when the temperature reached `t_min`.
    Final,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnealResult {
    pub initial_cost: f64,
    pub best_state: LppmConfig,
    pub best_cost: f64,
    pub final_state: LppmConfig,
    pub final_cost: f64,
    pub iterations: usize,
    /// `(temperature, current cost)` after each step.
    pub cost_trace: Vec<(f64, f64)>,
}

impl AnnealResult {
    pub fn selected(&self, selection: Selection) -> &LppmConfig {
        match selection {
            Selection::Best => &self.best_state,
            Selection::Final => &self.final_state,
        }
    }
}

/// Probability of moving from cost `current` to cost `candidate` at
/// temperature `t`: always 1 for an improvement, otherwise the logistic
/// `1 / (1 + exp((candidate - current) / (0.5 · t · n_objectives)))`.
pub fn acceptance_probability(current: f64, candidate: f64, t: f64, n_objectives: usize) -> f64 {
    if candidate < current {
        return 1.0;
    }
    let scale = 0.5 * t * n_objectives as f64;
    1.0 / (1.0 + ((candidate - current) / scale).exp())
}

/// Candidate indices around `index` in a domain of `len` values: a window of
/// half-width `max(1, len / 4)` clipped to the bounds, without `index` itself.
/// A singleton domain yields `[index]`.
pub fn restrict_by_half_indices(len: usize, index: usize) -> Vec<usize> {
    let h = (len / 4).max(1);
    let lo = index.saturating_sub(h);
    let hi = (index + h).min(len.saturating_sub(1));
    let window: Vec<usize> = (lo..=hi).filter(|&j| j != index).collect();
    if window.is_empty() {
        vec![index]
    } else {
        window
    }
}

/// Values reachable from `current` in one neighbour move.
pub fn restrict_by_half(domain: &ParameterDomain, current: f64) -> Result<Vec<f64>> {
    let i = domain.index_of(current).ok_or_else(|| {
        Error::invalid(format!("{current} is not a value of domain `{}`", domain.name()))
    })?;
    Ok(restrict_by_half_indices(domain.len(), i)
        .into_iter()
        .map(|j| domain.value(j))
        .collect())
}

/// Independent uniform draw over each domain's indices.
pub fn initial_state<R: Rng + ?Sized>(
    lppm_name: &str,
    domains: &[ParameterDomain],
    rng: &mut R,
) -> Result<LppmConfig> {
    let mut state = LppmConfig::new(lppm_name);
    for d in domains {
        if d.is_empty() {
            return Err(Error::config(format!("domain `{}` is empty", d.name())));
        }
        state
            .assignment
            .insert(d.name().to_string(), d.value(rng.random_range(0..d.len())));
    }
    Ok(state)
}

/// Changes one uniformly chosen parameter to a uniform draw from its
/// restricted window.
pub fn neighbour<R: Rng + ?Sized>(
    state: &LppmConfig,
    domains: &[ParameterDomain],
    rng: &mut R,
) -> Result<LppmConfig> {
    if domains.is_empty() {
        return Ok(state.clone());
    }
    let d = &domains[rng.random_range(0..domains.len())];
    let current = state.require(d.name())?;
    let i = d.index_of(current).ok_or_else(|| {
        Error::invalid(format!("{current} is not a value of domain `{}`", d.name()))
    })?;
    let window = restrict_by_half_indices(d.len(), i);
    let j = window[rng.random_range(0..window.len())];
    let mut next = state.clone();
    next.assignment.insert(d.name().to_string(), d.value(j));
    Ok(next)
}

/// Cost of `state` on `reference`: each objective's metric is the median of
/// `k` protections, clamped to its scale and summed.
pub fn cost(
    state: &LppmConfig,
    objectives: &[Objective],
    reference: &Reference,
    k: usize,
    rng: &RandomStream,
) -> Result<f64> {
    if objectives.is_empty() {
        return Err(Error::config("at least one objective is required"));
    }
    let evaluators: Vec<&dyn Evaluator> = objectives.iter().map(|o| &o.metric as &dyn Evaluator).collect();
    let values: Vec<f64> = evaluate_robust_many(&evaluators, reference, state, k, rng)?
        .into_iter()
        .map(|v| v.value)
        .collect();
    Ok(combine_cost(objectives, &values))
}

/// Annealing loop over an arbitrary cost function.
///
/// `cost_fn` receives the state and a dedicated stream (`cost/init`, then
/// `cost/<step>`), so stochastic costs stay reproducible. Control draws
/// (initial state, neighbours, acceptance) come from the `anneal` child.
pub fn anneal_with<F>(
    lppm_name: &str,
    domains: &[ParameterDomain],
    schedule: &AnnealingSchedule,
    n_objectives: usize,
    rng: &RandomStream,
    mut cost_fn: F,
) -> Result<AnnealResult>
where
    F: FnMut(&LppmConfig, &RandomStream) -> Result<f64>,
{
    schedule.validate()?;
    if n_objectives == 0 {
        return Err(Error::config("at least one objective is required"));
    }
    let mut control = rng.child("anneal").rng();

    let mut state = initial_state(lppm_name, domains, &mut control)?;
    let mut c = cost_fn(&state, &rng.child("cost/init"))?;
    let initial_cost = c;
    let mut best = (state.clone(), c);
    let mut cost_trace = Vec::with_capacity(schedule.steps());

    let mut t = schedule.t0;
    let mut step = 0usize;
    while t >= schedule.t_min {
        let candidate = neighbour(&state, domains, &mut control)?;
        let c2 = cost_fn(&candidate, &rng.child(format_args!("cost/{step}")))?;
        let ap = acceptance_probability(c, c2, t, n_objectives);
        if ap >= control.random::<f64>() {
            state = candidate;
            c = c2;
            if c < best.1 {
                best = (state.clone(), c);
            }
        }
        cost_trace.push((t, c));
        t *= schedule.delta_t;
        step += 1;
    }

    Ok(AnnealResult {
        initial_cost,
        best_state: best.0,
        best_cost: best.1,
        final_state: state,
        final_cost: c,
        iterations: step,
        cost_trace,
    })
}

/// Tunes `lppm_name` over `domains` for `objectives` on `reference`.
pub fn anneal(
    lppm_name: &str,
    domains: &[ParameterDomain],
    objectives: &[Objective],
    reference: &Reference,
    schedule: &AnnealingSchedule,
    k: usize,
    rng: &RandomStream,
) -> Result<AnnealResult> {
    anneal_with(lppm_name, domains, schedule, objectives.len(), rng, |s, r| {
        cost(s, objectives, reference, k, r)
    })
}
