use super::{Evaluator, MetricValue, Reference};
use crate::error::{Error, Result};
use crate::lppm::{apply_lppm, LppmConfig};
use crate::rng::RandomStream;

/// Median of an odd-length or even-length sample (mean of the middle pair).
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn check_k(k: usize) -> Result<()> {
    if k.is_multiple_of(2) {
        return Err(Error::invalid(format!("repetitions must be odd and positive, got {k}")));
    }
    Ok(())
}

/// Protects the reference `k` times on child streams `robust/0..k` and
/// returns the median score.
pub fn evaluate_robust(
    evaluator: &dyn Evaluator,
    reference: &Reference,
    config: &LppmConfig,
    k: usize,
    rng: &RandomStream,
) -> Result<MetricValue> {
    check_k(k)?;
    let mut values = (0..k)
        .map(|i| {
            let protected = apply_lppm(config, reference.trace(), &rng.child(format_args!("robust/{i}")))?;
            evaluator.evaluate(reference, &protected)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MetricValue {
        value: median(&mut values),
        evaluator_name: evaluator.name().to_string(),
    })
}

/// Same as calling [`evaluate_robust`] once per evaluator, but each protected
/// trace is produced once and shared.
pub fn evaluate_robust_many(
    evaluators: &[&dyn Evaluator],
    reference: &Reference,
    config: &LppmConfig,
    k: usize,
    rng: &RandomStream,
) -> Result<Vec<MetricValue>> {
    check_k(k)?;
    let mut samples = vec![Vec::with_capacity(k); evaluators.len()];
    for i in 0..k {
        let protected = apply_lppm(config, reference.trace(), &rng.child(format_args!("robust/{i}")))?;
        for (e, s) in evaluators.iter().zip(samples.iter_mut()) {
            s.push(e.evaluate(reference, &protected)?);
        }
    }
    Ok(evaluators
        .iter()
        .zip(samples.iter_mut())
        .map(|(e, s)| MetricValue {
            value: median(s),
            evaluator_name: e.name().to_string(),
        })
        .collect())
}
