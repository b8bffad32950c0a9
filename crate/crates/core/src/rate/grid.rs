//! Exhaustive grid search over the weight simplex, used as a cross-check.

use crate::error::{invalid, Result};
use crate::group::GroupSpec;
use crate::rate::solver::{evaluate_at, Sense, ThetaTerms};
use crate::rate::theta::{scale_weights, WeightVector};

#[derive(Clone, Debug)]
pub struct GridResult {
    pub value: f64,
    pub w: WeightVector<f64>,
    pub points: usize,
}

/// Calls `f` on every composition of `total` into `n` nonnegative parts.
fn compositions(n: usize, total: usize, f: &mut impl FnMut(&[usize])) {
    fn go(cur: &mut Vec<usize>, n: usize, left: usize, f: &mut impl FnMut(&[usize])) {
        if cur.len() + 1 == n {
            cur.push(left);
            f(cur);
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            go(cur, n, left - k, f);
            cur.pop();
        }
    }
    go(&mut Vec::with_capacity(n), n, total, f);
}

/// Best objective over weights `w = k / steps` (integer `k`), skipping
/// grid points whose support misses a prime.
pub fn grid_search(
    spec: &GroupSpec,
    terms: &ThetaTerms,
    sense: Sense,
    steps: usize,
) -> Result<GridResult> {
    if steps == 0 {
        return invalid("grid needs at least one step");
    }
    let n = spec.s_index().len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut points = 0;
    let mut failure = None;
    compositions(n, steps, &mut |k| {
        if failure.is_some() {
            return;
        }
        let w: Vec<f64> = k.iter().map(|&x| x as f64 / steps as f64).collect();
        let wv = match WeightVector::new(spec, w.clone()) {
            Ok(wv) => wv,
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        if !wv.support().covers_primes(spec) {
            return;
        }
        points += 1;
        let value = scale_weights(spec, &wv)
            .and_then(|v| evaluate_at::<f64>(spec, terms, sense, &v))
            .map(|(x, _)| x.to_f64());
        let value = match value {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        let better = match &best {
            None => true,
            Some((b, _)) => match sense {
                Sense::Source => value < *b,
                Sense::Channel => value > *b,
            },
        };
        if better {
            best = Some((value, w));
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (value, w) = best.expect("the all-top-exponent point covers every prime");
    Ok(GridResult {
        value,
        w: WeightVector::new(spec, w)?,
        points,
    })
}
