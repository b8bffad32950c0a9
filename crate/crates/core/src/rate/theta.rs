//! Weight supports together with the subgroup family `Θ(w)` and its ratios `ω_θ`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::group::{GroupSpec, ThetaVector};
use crate::scalar::Scalar;

/// Set of `(q, s) ∈ 𝒮(G)` carrying positive weight, as a bitmask over
/// positions of [`GroupSpec::s_index`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Support(u64);

impl Support {
    pub fn from_mask(spec: &GroupSpec, mask: u64) -> Result<Self> {
        let n = spec.s_index().len();
        if mask == 0 || (n < 64 && mask >> n != 0) {
            return invalid(format!("support mask {mask:#b} is empty or out of range"));
        }
        Ok(Support(mask))
    }

    pub fn from_pairs(spec: &GroupSpec, pairs: &[(u64, u32)]) -> Result<Self> {
        let mut mask = 0u64;
        for &(q, s) in pairs {
            let i = spec
                .s_position(q, s)
                .ok_or_else(|| Error::InvalidInput(format!("({q},{s}) is not in S(G)")))?;
            mask |= 1 << i;
        }
        Support::from_mask(spec, mask)
    }

    /// Full support over `𝒮(G)`.
    pub fn full(spec: &GroupSpec) -> Self {
        Support((1u64 << spec.s_index().len()) - 1)
    }

    pub fn mask(&self) -> u64 {
        self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..64).filter(move |&i| self.contains(i))
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn pairs(&self, spec: &GroupSpec) -> Vec<(u64, u32)> {
        self.positions().map(|i| spec.s_index()[i]).collect()
    }

    /// Every prime of `G` has at least one supported `(p, s)`.
    pub fn covers_primes(&self, spec: &GroupSpec) -> bool {
        spec.primes()
            .iter()
            .all(|&p| self.positions().any(|i| spec.s_index()[i].0 == p))
    }

    /// All nonempty supports covering every prime, by ascending mask.
    pub fn all_covering(spec: &GroupSpec) -> Vec<Support> {
        let n = spec.s_index().len();
        (1u64..1 << n)
            .map(Support)
            .filter(|s| s.covers_primes(spec))
            .collect()
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#b}", self.0)
    }
}

/// A probability vector over `𝒮(G)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<T> {
    values: Vec<T>,
}

impl<T: Scalar> WeightVector<T> {
    pub fn new(spec: &GroupSpec, values: Vec<T>) -> Result<Self> {
        if values.len() != spec.s_index().len() {
            return invalid(format!(
                "expected {} weights, got {}",
                spec.s_index().len(),
                values.len()
            ));
        }
        if values.iter().any(|w| *w < T::zero()) {
            return invalid("weights must be nonnegative");
        }
        let total = values.iter().fold(T::zero(), |a, b| a + b.clone());
        let err = (total - T::one()).abs();
        if err > T::lift(1e-9) {
            return invalid("weights must add up to one");
        }
        Ok(WeightVector { values })
    }

    /// Uniform weights on `support`.
    pub fn uniform_on(spec: &GroupSpec, support: Support) -> Self {
        let k = T::from_usize(support.len()).unwrap();
        let values = (0..spec.s_index().len())
            .map(|i| {
                if support.contains(i) {
                    T::one() / k.clone()
                } else {
                    T::zero()
                }
            })
            .collect();
        WeightVector { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, spec: &GroupSpec, q: u64, s: u32) -> Option<&T> {
        spec.s_position(q, s).map(|i| &self.values[i])
    }

    pub fn support(&self) -> Support {
        let mut mask = 0u64;
        for (i, w) in self.values.iter().enumerate() {
            if *w > T::zero() {
                mask |= 1 << i;
            }
        }
        Support(mask)
    }

    pub fn to_f64(&self) -> WeightVector<f64> {
        WeightVector {
            values: self.values.iter().map(Scalar::lower).collect(),
        }
    }
}

/// `|r − s|⁺`.
fn excess(r: u32, s: u32) -> u32 {
    r.saturating_sub(s)
}

fn check_thetahat(spec: &GroupSpec, support: Support, thetahat: &[u32]) -> Result<()> {
    if thetahat.len() != spec.s_index().len() {
        return invalid("thetahat must have one entry per (q,s) in S(G)");
    }
    for i in support.positions() {
        let (q, s) = spec.s_index()[i];
        if thetahat[i] > s {
            return invalid(format!("thetahat_({q},{s}) = {} exceeds {s}", thetahat[i]));
        }
    }
    Ok(())
}

/// Components of `𝜽(θ̂)`, `None` where no supported pair has prime `p`.
fn theta_components(spec: &GroupSpec, support: Support, thetahat: &[u32]) -> Vec<Option<u32>> {
    spec.q_index()
        .iter()
        .map(|&(p, r)| {
            support
                .positions()
                .filter(|&i| spec.s_index()[i].0 == p)
                .map(|i| excess(r, spec.s_index()[i].1) + thetahat[i])
                .min()
                .map(|t| t.min(r))
        })
        .collect()
}

/// `𝜽(θ̂)`: for each `(p, r) ∈ 𝒬(G)`, the minimum of `|r−s|⁺ + θ̂_{q,s}` over
/// supported `(q, s)` with `q = p`, capped at `r`.
///
/// `thetahat` is indexed like [`GroupSpec::s_index`]; unsupported entries are
/// ignored.
pub fn theta_of_thetahat(
    spec: &GroupSpec,
    support: Support,
    thetahat: &[u32],
) -> Result<ThetaVector> {
    check_thetahat(spec, support, thetahat)?;
    let values = theta_components(spec, support, thetahat)
        .into_iter()
        .zip(spec.q_index())
        .map(|(t, &(p, _))| t.ok_or(Error::UndefinedComponent { p }))
        .collect::<Result<Vec<u32>>>()?;
    Ok(ThetaVector::from_raw(values))
}

/// Visits every `θ̂` on the support, in odometer order.
fn for_each_thetahat(
    spec: &GroupSpec,
    support: Support,
    mut f: impl FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    let positions: Vec<usize> = support.positions().collect();
    let bounds: Vec<u32> = positions.iter().map(|&i| spec.s_index()[i].1).collect();
    let mut thetahat = vec![0u32; spec.s_index().len()];
    let mut cur = vec![0u32; positions.len()];
    loop {
        for (&i, &v) in positions.iter().zip(&cur) {
            thetahat[i] = v;
        }
        f(&thetahat)?;
        let mut k = cur.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            if cur[k] < bounds[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = 0;
        }
    }
}

/// `Θ(w)` for any `w` with the given support, sorted and deduplicated.
pub fn enumerate_theta(spec: &GroupSpec, support: Support) -> Result<Vec<ThetaVector>> {
    let mut out = BTreeSet::new();
    for_each_thetahat(spec, support, |th| {
        out.insert(theta_of_thetahat(spec, support, th)?);
        Ok(())
    })?;
    Ok(out.into_iter().collect())
}

/// Like [`enumerate_theta`], but a prime with no supported pair keeps
/// `θ_{p,r} = r`: an input group without that prime never moves those rings.
pub fn enumerate_theta_pinned(spec: &GroupSpec, support: Support) -> Result<Vec<ThetaVector>> {
    let mut out = BTreeSet::new();
    for_each_thetahat(spec, support, |th| {
        let values = theta_components(spec, support, th)
            .into_iter()
            .zip(spec.q_index())
            .map(|(t, &(_, r))| t.unwrap_or(r))
            .collect();
        out.insert(ThetaVector::from_raw(values));
        Ok(())
    })?;
    Ok(out.into_iter().collect())
}

/// Numerator coefficients of `ω_θ` per `(q, s)`:
/// `max_{(p,r)∈𝒬, p=q} (θ_{p,r} − |r−s|⁺)⁺`. Each is at most `s`.
pub fn omega_coefficients(spec: &GroupSpec, theta: &ThetaVector) -> Vec<u32> {
    spec.s_index()
        .iter()
        .map(|&(q, s)| {
            spec.q_index()
                .iter()
                .zip(theta.values())
                .filter(|((p, _), _)| *p == q)
                .map(|(&(_, r), &t)| t.saturating_sub(excess(r, s)))
                .max()
                .unwrap_or(0)
        })
        .collect()
}

/// `ω_θ` from weights already multiplied by `log q` (any positive scale).
pub fn omega_scaled<T: Scalar>(spec: &GroupSpec, scaled: &[T], theta: &ThetaVector) -> T {
    let coeffs = omega_coefficients(spec, theta);
    let mut num = T::zero();
    let mut den = T::zero();
    for ((v, &a), &(_, s)) in scaled.iter().zip(&coeffs).zip(spec.s_index()) {
        num = num + v.clone() * T::from_u32(a).unwrap();
        den = den + v.clone() * T::from_u32(s).unwrap();
    }
    num / den
}

/// Converts weights to `log q`-scaled weights normalized to sum one.
///
/// With a single prime in the support the logarithms cancel and the result
/// is exact; otherwise `T` must represent `log2 q`.
pub fn scale_weights<T: Scalar>(spec: &GroupSpec, w: &WeightVector<T>) -> Result<Vec<T>> {
    let support = w.support();
    if support.is_empty() {
        return invalid("weights have empty support");
    }
    let single_prime = support
        .positions()
        .map(|i| spec.s_index()[i].0)
        .collect::<BTreeSet<_>>()
        .len()
        == 1;
    let mut scaled = Vec::with_capacity(w.values.len());
    for (v, &(q, _)) in w.values.iter().zip(spec.s_index()) {
        if single_prime || v.is_zero() {
            scaled.push(v.clone());
        } else {
            let lq = T::log2_int(q).ok_or_else(|| {
                Error::Unsupported(format!("log2({q}) is not exactly representable"))
            })?;
            scaled.push(v.clone() * lq);
        }
    }
    let total = scaled.iter().fold(T::zero(), |a, b| a + b.clone());
    Ok(scaled.into_iter().map(|x| x / total.clone()).collect())
}

/// Inverse of [`scale_weights`], reported in `f64`.
pub fn unscale_weights<T: Scalar>(spec: &GroupSpec, scaled: &[T]) -> WeightVector<f64> {
    let raw: Vec<f64> = scaled
        .iter()
        .zip(spec.s_index())
        .map(|(v, &(q, _))| v.lower() / (q as f64).log2())
        .collect();
    let total: f64 = raw.iter().sum();
    WeightVector {
        values: raw.into_iter().map(|x| x / total).collect(),
    }
}

/// `ω_θ` for weight vector `w`, evaluated in `T`.
pub fn omega<T: Scalar>(spec: &GroupSpec, w: &WeightVector<T>, theta: &ThetaVector) -> Result<T> {
    theta.validate(spec)?;
    let scaled = scale_weights(spec, w)?;
    Ok(omega_scaled(spec, &scaled, theta))
}
