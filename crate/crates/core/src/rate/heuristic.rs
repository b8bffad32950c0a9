//! Random-restart search over test channels for the source functional.
//!
//! The result is an upper bound only: the search is local and the joint is
//! restricted to a grid of transport moves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::group::GroupSpec;
use crate::info::SourceJoint;
use crate::rate::solver::{isc, SolverOptions};

#[derive(Clone, Debug)]
pub struct HeuristicOptions {
    pub restarts: usize,
    pub iterations: usize,
    /// Moves shift mass in multiples of `1 / (|G| · resolution)`.
    pub resolution: usize,
    pub seed: u64,
    pub solver: SolverOptions,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        HeuristicOptions {
            restarts: 4,
            iterations: 200,
            resolution: 40,
            seed: 0,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct HeuristicResult {
    pub joint: SourceJoint,
    pub rate: f64,
    /// Always false: the optimum over test channels is not certified.
    pub certified: bool,
}

fn distortion(p: &[Vec<f64>], d: &[Vec<f64>]) -> f64 {
    p.iter()
        .zip(d)
        .flat_map(|(pr, dr)| pr.iter().zip(dr).map(|(a, b)| a * b))
        .sum()
}

/// A random 2×2 exchange that keeps both marginals and nonnegativity.
fn random_move(p: &[Vec<f64>], step: f64, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<f64>>> {
    let nx = p.len();
    let nu = p[0].len();
    if nx < 2 || nu < 2 {
        return None;
    }
    let (x1, x2) = (rng.random_range(0..nx), rng.random_range(0..nx));
    let (u1, u2) = (rng.random_range(0..nu), rng.random_range(0..nu));
    if x1 == x2 || u1 == u2 {
        return None;
    }
    let eps = step.min(p[x1][u2]).min(p[x2][u1]);
    if eps <= 0.0 {
        return None;
    }
    let mut q = p.to_vec();
    q[x1][u1] += eps;
    q[x1][u2] -= eps;
    q[x2][u1] -= eps;
    q[x2][u2] += eps;
    Some(q)
}

/// Searches joints `p(x, u)` with source marginal `p_x`, uniform `U` and
/// `E[d] ≤ D` for a small `I_sc^G`.
pub fn optimize_test_channel(
    group: &GroupSpec,
    p_x: &[f64],
    d: &[Vec<f64>],
    max_distortion: f64,
    options: &HeuristicOptions,
) -> Result<HeuristicResult> {
    let n = group.order() as usize;
    if d.len() != p_x.len() || d.iter().any(|r| r.len() != n) {
        return invalid("distortion matrix must be |X| × |G|");
    }
    if options.resolution == 0 {
        return invalid("resolution must be positive");
    }
    let step = 1.0 / (n * options.resolution) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let rate = |p: &Vec<Vec<f64>>| -> Result<f64> {
        let j = SourceJoint::new(group.clone(), p.clone(), None, None)?;
        Ok(isc::<f64>(&j, &options.solver)?.value_bits())
    };

    let product: Vec<Vec<f64>> = p_x.iter().map(|&px| vec![px / n as f64; n]).collect();
    // walk toward feasibility first: accept moves that lower distortion
    let mut start = product;
    let mut guard = 0;
    while distortion(&start, d) > max_distortion + 1e-12 {
        guard += 1;
        if guard > 200_000 {
            return invalid(format!(
                "could not reach expected distortion {max_distortion}"
            ));
        }
        if let Some(q) = random_move(&start, step, &mut rng) {
            if distortion(&q, d) < distortion(&start, d) {
                start = q;
            }
        }
    }

    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for restart in 0..options.restarts.max(1) {
        let mut cur = start.clone();
        if restart > 0 {
            for _ in 0..options.iterations {
                if let Some(q) = random_move(&cur, step, &mut rng) {
                    if distortion(&q, d) <= max_distortion {
                        cur = q;
                    }
                }
            }
        }
        let mut cur_rate = rate(&cur)?;
        for _ in 0..options.iterations {
            let Some(q) = random_move(&cur, step, &mut rng) else {
                continue;
            };
            if distortion(&q, d) > max_distortion {
                continue;
            }
            let r = rate(&q)?;
            if r < cur_rate {
                cur = q;
                cur_rate = r;
            }
        }
        if best.as_ref().is_none_or(|(b, _)| cur_rate < *b) {
            best = Some((cur_rate, cur));
        }
    }
    let (rate, joint) = best.expect("at least one restart");
    Ok(HeuristicResult {
        joint: SourceJoint::new(group.clone(), joint, Some(d.to_vec()), Some(max_distortion))?,
        rate,
        certified: false,
    })
}
