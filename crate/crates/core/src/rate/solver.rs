//! Outer optimization over weight vectors.
//!
//! Weights are handled in `log q`-scaled form `v`, in which every `ω_θ` is a
//! ratio of integer linear forms `N_θ(v) / D(v)`. For a fixed support the
//! sublevel sets of the objective are polytopes, so bisection on the target
//! rate with a simplex feasibility test finds the optimum per support.

use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};
use crate::group::{GroupSpec, ThetaVector};
use crate::info::{coset_mi_channel, coset_mi_source, ChannelSpec, SourceJoint};
use crate::rate::lp::simplex_feasible_point;
use crate::rate::theta::{
    enumerate_theta, omega_coefficients, unscale_weights, Support, WeightVector,
};
use crate::scalar::{Extended, Scalar};

/// Direction of the outer optimization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    /// `min_w max_θ I([U]_θ;X) / ω_θ`.
    Source,
    /// `max_w min_θ I(X;Y|[X]_θ) / (1 − ω_θ)`.
    Channel,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Bisection stops once the bracket is narrower than this (bits).
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Terms within this distance of the optimum are reported as critical.
    pub critical_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-10,
            max_iterations: 200,
            critical_tolerance: 1e-7,
        }
    }
}

/// Information term table `θ ↦ bits`.
pub type ThetaTerms = BTreeMap<ThetaVector, f64>;

/// One row of the per-θ table at the reported weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaTerm<T> {
    pub theta: ThetaVector,
    pub omega: T,
    pub info: f64,
    pub ratio: Extended<T>,
}

#[derive(Clone, Debug)]
pub struct RateResult<T> {
    pub sense: Sense,
    /// The inner optimum at `optimal_w`, in bits.
    pub value: Extended<T>,
    pub optimal_w: WeightVector<f64>,
    /// `optimal_w` scaled by `log q` and normalized; exact for exact `T`.
    pub scaled_w: Vec<T>,
    pub support: Support,
    pub critical_thetas: Vec<ThetaVector>,
    pub per_theta_terms: Vec<ThetaTerm<T>>,
    pub supports_examined: usize,
    pub diagnostic: Option<String>,
}

impl<T: Scalar> RateResult<T> {
    pub fn value_bits(&self) -> f64 {
        self.value.to_f64()
    }
}

/// `I([U]_θ;X)` for every `θ`.
pub fn source_terms(j: &SourceJoint) -> Result<ThetaTerms> {
    ThetaVector::all(j.group())
        .into_iter()
        .map(|t| coset_mi_source(j, &t).map(|c| (t, c)))
        .collect()
}

/// `I(X;Y|[X]_θ)` for every `θ`.
pub fn channel_terms(c: &ChannelSpec) -> Result<ThetaTerms> {
    ThetaVector::all(c.group())
        .into_iter()
        .map(|t| coset_mi_channel(c, &t).map(|v| (t, v)))
        .collect()
}

/// `I_sc^G(U;X)`.
pub fn isc<T: Scalar>(j: &SourceJoint, options: &SolverOptions) -> Result<RateResult<T>> {
    solve_minimax(j.group(), &source_terms(j)?, Sense::Source, options)
}

/// `I_cc^G(X;Y)`.
pub fn icc<T: Scalar>(c: &ChannelSpec, options: &SolverOptions) -> Result<RateResult<T>> {
    solve_minimax(c.group(), &channel_terms(c)?, Sense::Channel, options)
}

/// `c / den` with `0/0 = 0` and `c/0 = +∞` for `c > 0`.
pub fn term_ratio<T: Scalar>(c: &T, den: &T) -> Extended<T> {
    if den.is_zero() {
        if c.is_zero() {
            Extended::Finite(T::zero())
        } else {
            Extended::Infinite
        }
    } else {
        Extended::Finite(c.clone() / den.clone())
    }
}

struct Problem<'a, T> {
    spec: &'a GroupSpec,
    sense: Sense,
    info: BTreeMap<ThetaVector, (f64, T)>,
    s: Vec<T>,
}

impl<'a, T: Scalar> Problem<'a, T> {
    fn excluded(&self, theta: &ThetaVector) -> bool {
        match self.sense {
            Sense::Source => theta.values().iter().all(|&x| x == 0),
            Sense::Channel => theta
                .values()
                .iter()
                .zip(self.spec.q_index())
                .all(|(&x, &(_, r))| x == r),
        }
    }

    fn thetas(&self, support: Support) -> Result<Vec<ThetaVector>> {
        Ok(enumerate_theta(self.spec, support)?
            .into_iter()
            .filter(|t| !self.excluded(t))
            .collect())
    }

    fn info(&self, theta: &ThetaVector) -> Result<&(f64, T)> {
        self.info.get(theta).ok_or_else(|| {
            Error::InvalidInput(format!("missing information term for theta {theta}"))
        })
    }

    fn coeffs(&self, theta: &ThetaVector) -> Vec<T> {
        omega_coefficients(self.spec, theta)
            .into_iter()
            .map(|a| T::from_u32(a).unwrap())
            .collect()
    }

    /// Constraint rows at target `t`, restricted to the support positions.
    fn rows(&self, positions: &[usize], thetas: &[(Vec<T>, T)], t: &T) -> Vec<Vec<T>> {
        thetas
            .iter()
            .filter(|(_, c)| self.sense == Sense::Channel || *c > T::zero())
            .map(|(a, c)| {
                positions
                    .iter()
                    .map(|&i| match self.sense {
                        Sense::Source => t.clone() * a[i].clone() - c.clone() * self.s[i].clone(),
                        Sense::Channel => {
                            c.clone() * self.s[i].clone()
                                - t.clone() * (self.s[i].clone() - a[i].clone())
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn feasible(&self, positions: &[usize], thetas: &[(Vec<T>, T)], t: &T) -> Option<Vec<T>> {
        let v = simplex_feasible_point(positions.len(), &self.rows(positions, thetas, t))?;
        let mut full = vec![T::zero(); self.s.len()];
        for (&i, x) in positions.iter().zip(v) {
            full[i] = x;
        }
        Some(full)
    }

    /// Per-θ table over `Θ(supp v)` minus the excluded endpoint. When `v`
    /// drops every weight of some prime, `fallback` supplies `Θ`.
    fn table(&self, v: &[T], fallback: Option<Support>) -> Result<(Support, Vec<ThetaTerm<T>>)> {
        let mut mask = 0u64;
        for (i, x) in v.iter().enumerate() {
            if *x > T::zero() {
                mask |= 1 << i;
            }
        }
        let mut support = Support::from_mask(self.spec, mask)?;
        if let Some(f) = fallback {
            if !support.covers_primes(self.spec) {
                support = f;
            }
        }
        let d = v
            .iter()
            .zip(&self.s)
            .fold(T::zero(), |acc, (x, s)| acc + x.clone() * s.clone());
        let mut rows = Vec::new();
        for theta in self.thetas(support)? {
            let (info, c) = self.info(&theta)?.clone();
            let n = self
                .coeffs(&theta)
                .iter()
                .zip(v)
                .fold(T::zero(), |acc, (a, x)| acc + a.clone() * x.clone());
            let omega = n.clone() / d.clone();
            let den = match self.sense {
                Sense::Source => omega.clone(),
                Sense::Channel => T::one() - omega.clone(),
            };
            rows.push(ThetaTerm {
                ratio: term_ratio(&c, &den),
                theta,
                omega,
                info,
            });
        }
        Ok((support, rows))
    }

    fn objective(&self, rows: &[ThetaTerm<T>]) -> Extended<T> {
        let mut it = rows.iter().map(|r| r.ratio.clone());
        let first = match it.next() {
            Some(x) => x,
            // an empty max is 0 and an empty min is +∞
            None => {
                return match self.sense {
                    Sense::Source => Extended::Finite(T::zero()),
                    Sense::Channel => Extended::Infinite,
                }
            }
        };
        it.fold(first, |acc, x| {
            let better = match self.sense {
                Sense::Source => x > acc,
                Sense::Channel => x < acc,
            };
            if better {
                x
            } else {
                acc
            }
        })
    }
}

/// Outcome of one support pattern.
struct Candidate<T> {
    value: Extended<T>,
    v: Vec<T>,
    support: Support,
}

/// Solves the outer problem given precomputed information terms.
///
/// Supports are visited by ascending bitmask and an incumbent is replaced
/// only on strict improvement, so the witness is deterministic.
pub fn solve_minimax<T: Scalar>(
    spec: &GroupSpec,
    terms: &ThetaTerms,
    sense: Sense,
    options: &SolverOptions,
) -> Result<RateResult<T>> {
    if !(options.tolerance > 0.0) {
        return invalid("tolerance must be positive");
    }
    let mut info = BTreeMap::new();
    for (theta, &c) in terms {
        theta.validate(spec)?;
        if !c.is_finite() || c < -1e-9 {
            return invalid(format!("information term for theta {theta} is {c}"));
        }
        let c = c.max(0.0);
        info.insert(theta.clone(), (c, T::lift(c)));
    }
    let problem = Problem {
        spec,
        sense,
        info,
        s: spec
            .s_index()
            .iter()
            .map(|&(_, s)| T::from_u32(s).unwrap())
            .collect(),
    };
    let tol = T::lift(options.tolerance);
    let two = T::one() + T::one();
    let start = T::lift((spec.order() as f64).log2() + 1.0);
    let ceiling = start.clone() * T::lift(2f64.powi(40));

    let mut best: Option<Candidate<T>> = None;
    let mut examined = 0;
    let mut notes = Vec::new();

    for support in Support::all_covering(spec) {
        examined += 1;
        let positions: Vec<usize> = support.positions().collect();
        let mut thetas = Vec::new();
        for theta in problem.thetas(support)? {
            let c = problem.info(&theta)?.1.clone();
            thetas.push((problem.coeffs(&theta), c));
        }
        let feasible = |t: &T| problem.feasible(&positions, &thetas, t);
        let incumbent = best.as_ref().and_then(|b| b.value.finite().cloned());

        // (lo, hi) brackets the support optimum; `witness` is feasible at
        // hi (source) or lo (channel)
        let (mut lo, mut hi, mut witness) = match sense {
            Sense::Source => {
                let (hi, w) = match &incumbent {
                    Some(b) => match feasible(b) {
                        Some(w) => (b.clone(), w),
                        None => continue,
                    },
                    None => {
                        let mut hi = start.clone();
                        loop {
                            if let Some(w) = feasible(&hi) {
                                break (hi, w);
                            }
                            if hi > ceiling {
                                notes.push(format!("support {support}: no finite rate"));
                                break (hi, Vec::new());
                            }
                            hi = hi * two.clone();
                        }
                    }
                };
                if w.is_empty() {
                    continue;
                }
                match feasible(&T::zero()) {
                    Some(w0) => (T::zero(), T::zero(), w0),
                    None => (T::zero(), hi, w),
                }
            }
            Sense::Channel => {
                let lo = incumbent.clone().unwrap_or_else(T::zero);
                let Some(w) = feasible(&lo) else { continue };
                let mut hi = Scalar::max_of(start.clone(), lo.clone() * two.clone());
                let mut unbounded = false;
                let mut w = w;
                while let Some(wh) = feasible(&hi) {
                    if hi > ceiling {
                        unbounded = true;
                        break;
                    }
                    w = wh;
                    hi = hi * two.clone();
                }
                if unbounded {
                    notes.push(format!(
                        "support {support}: rate exceeds {}",
                        ceiling.lower()
                    ));
                    let candidate = Candidate {
                        value: Extended::Infinite,
                        v: w,
                        support,
                    };
                    if best.as_ref().is_none_or(|b| b.value.is_finite()) {
                        best = Some(candidate);
                    }
                    continue;
                }
                (lo, hi, w)
            }
        };

        let mut iterations = 0;
        while hi.clone() - lo.clone() > tol {
            iterations += 1;
            if iterations > options.max_iterations {
                return Err(Error::Solver(format!(
                    "bisection did not converge on support {support}: bracket [{}, {}]",
                    lo.lower(),
                    hi.lower()
                )));
            }
            let mid = (lo.clone() + hi.clone()) / two.clone();
            // bracket already at the resolution of T
            if mid <= lo || mid >= hi {
                break;
            }
            match (sense, feasible(&mid)) {
                (Sense::Source, Some(w)) => {
                    hi = mid;
                    witness = w;
                }
                (Sense::Source, None) => lo = mid,
                (Sense::Channel, Some(w)) => {
                    lo = mid;
                    witness = w;
                }
                (Sense::Channel, None) => hi = mid,
            }
        }

        let (_, rows) = problem.table(&witness, Some(support))?;
        let value = problem.objective(&rows);
        let improves = match &best {
            None => true,
            Some(b) => match sense {
                Sense::Source => value < b.value,
                Sense::Channel => value > b.value,
            },
        };
        if improves {
            best = Some(Candidate {
                value,
                v: witness,
                support,
            });
        }
    }

    let Some(best) = best else {
        return Err(Error::Solver(format!(
            "no support admits a finite rate below {}; {}",
            ceiling.lower(),
            notes.join("; ")
        )));
    };
    let (support, per_theta_terms) = problem.table(&best.v, Some(best.support))?;
    // per-support notes only matter when nothing finite was found
    let value_finite = best.value.is_finite();
    let critical_thetas = match &best.value {
        Extended::Finite(x) => {
            let ct = T::lift(options.critical_tolerance);
            per_theta_terms
                .iter()
                .filter(|r| match &r.ratio {
                    Extended::Finite(y) => (y.clone() - x.clone()).abs() <= ct,
                    Extended::Infinite => false,
                })
                .map(|r| r.theta.clone())
                .collect()
        }
        Extended::Infinite => per_theta_terms
            .iter()
            .filter(|r| !r.ratio.is_finite())
            .map(|r| r.theta.clone())
            .collect(),
    };
    Ok(RateResult {
        sense,
        value: best.value,
        optimal_w: unscale_weights(spec, &best.v),
        scaled_w: best.v,
        support,
        critical_thetas,
        per_theta_terms,
        supports_examined: examined,
        diagnostic: (!value_finite && !notes.is_empty()).then(|| notes.join("; ")),
    })
}

/// Objective at a given weight vector, for diagnostics and grid oracles.
pub fn evaluate_at<T: Scalar>(
    spec: &GroupSpec,
    terms: &ThetaTerms,
    sense: Sense,
    scaled: &[T],
) -> Result<(Extended<T>, Vec<ThetaTerm<T>>)> {
    if scaled.len() != spec.s_index().len() || scaled.iter().any(|x| *x < T::zero()) {
        return invalid("scaled weights must be nonnegative, one per (q,s)");
    }
    let problem = Problem {
        spec,
        sense,
        info: terms
            .iter()
            .map(|(t, &c)| (t.clone(), (c, T::lift(c.max(0.0)))))
            .collect(),
        s: spec
            .s_index()
            .iter()
            .map(|&(_, s)| T::from_u32(s).unwrap())
            .collect(),
    };
    let (support, rows) = problem.table(scaled, None)?;
    if !support.covers_primes(spec) {
        return Err(Error::UndefinedComponent {
            p: *spec
                .primes()
                .iter()
                .find(|&&p| !support.pairs(spec).iter().any(|&(q, _)| q == p))
                .unwrap(),
        });
    }
    Ok((problem.objective(&rows), rows))
}
