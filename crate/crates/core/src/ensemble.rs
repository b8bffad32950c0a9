//! Sampling and lemma checks for the random homomorphism ensemble. A small
//! Monte Carlo decoder runs over the sampled codes.
//!
//! Elements of the input group `J = ⊕ Z_{q^s}^{k_{q,s}}` are residue vectors,
//! one entry per generator `(q, s, l)` in `𝒢(J)` order. Elements of `G^n` are
//! `n` consecutive blocks in the canonical element order of `G`.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{AddAssign, MulAssign};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::group::{p_adic_depth, GroupSpec, ThetaVector};
use crate::info::ChannelSpec;
use crate::rate::{enumerate_theta_pinned, omega_coefficients, Support};

/// Soft cap on `(g, B)` tables enumerated by the exhaustive pairwise check.
pub const EXHAUSTIVE_TABLE_CAP: u128 = 1 << 16;
/// Soft cap on `(u, ũ)` cells in a pairwise law table.
pub const PAIR_CELL_CAP: u128 = 1 << 16;
/// Cap on `|J| · |G|^n` for the Monte Carlo decoder.
pub const DECODER_CAP: u128 = 1 << 20;

/// The input group with its counts `k_{q,s}`.
#[derive(Clone, Debug, PartialEq)]
pub struct JSpec {
    group: GroupSpec,
    counts: Vec<u32>,
    generators: Vec<(u64, u32)>,
}

impl JSpec {
    /// `counts` follows [`GroupSpec::s_index`].
    pub fn new(group: GroupSpec, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != group.s_index().len() {
            return invalid(format!(
                "expected {} counts k_(q,s), got {}",
                group.s_index().len(),
                counts.len()
            ));
        }
        if counts.iter().all(|&k| k == 0) {
            return invalid("k must be at least one");
        }
        let generators = group
            .s_index()
            .iter()
            .zip(&counts)
            .flat_map(|(&qs, &k)| std::iter::repeat_n(qs, k as usize))
            .collect();
        Ok(JSpec {
            group,
            counts,
            generators,
        })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn k(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// `(q, s)` of each generator of `J`.
    pub fn generators(&self) -> &[(u64, u32)] {
        &self.generators
    }

    pub fn moduli(&self) -> Vec<u64> {
        self.generators.iter().map(|&(q, s)| q.pow(s)).collect()
    }

    pub fn order(&self) -> u128 {
        self.moduli().iter().map(|&m| m as u128).product()
    }

    /// `w_{q,s} = k_{q,s} / k`.
    pub fn weights(&self) -> Vec<f64> {
        let k = self.k() as f64;
        self.counts.iter().map(|&c| c as f64 / k).collect()
    }

    pub fn support(&self) -> Support {
        let mask = self
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .fold(0u64, |m, (i, _)| m | 1 << i);
        Support::from_mask(&self.group, mask).expect("k >= 1")
    }

    fn check(&self, a: &[u64]) -> Result<()> {
        if a.len() != self.generators.len() || a.iter().zip(self.moduli()).any(|(&x, m)| x >= m) {
            return invalid("element is not in J");
        }
        Ok(())
    }

    /// Element with dense index `i` (first generator most significant).
    pub fn element_at(&self, mut i: u128) -> Vec<u64> {
        let moduli = self.moduli();
        let mut out = vec![0; moduli.len()];
        for (slot, &m) in out.iter_mut().zip(&moduli).rev() {
            *slot = (i % m as u128) as u64;
            i /= m as u128;
        }
        out
    }

    pub fn elements(&self) -> Result<impl Iterator<Item = Vec<u64>> + '_> {
        self.group.check_cap("input group J", self.order())?;
        Ok((0..self.order()).map(|i| self.element_at(i)))
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .zip(self.moduli())
            .map(|((x, y), m)| (x + y) % m)
            .collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .zip(self.moduli())
            .map(|((x, y), m)| (x + m - y) % m)
            .collect()
    }
}

/// Law of one generator image: `g = step · i`, `i` uniform on `0..count`.
fn g_law(q: u64, s: u32, p: u64, r: u32) -> (u64, u64) {
    if p != q {
        (0, 1)
    } else if r <= s {
        (1, p.pow(r))
    } else {
        (p.pow(r - s), p.pow(s))
    }
}

/// `(p, r)` of each component of `G^n`.
fn components(group: &GroupSpec, n: usize) -> Vec<(u64, u32)> {
    (0..n)
        .flat_map(|_| group.rings().iter().map(|g| (g.p, g.r)))
        .collect()
}

/// A sampled homomorphism `φ: J → G^n` with dither `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomomorphismTable {
    n: usize,
    /// `images[l][c]`: image of generator `l` in component `c` of `G^n`.
    images: Vec<Vec<u64>>,
    dither: Vec<u64>,
    seed: Option<u64>,
}

impl HomomorphismTable {
    /// Builds a table from explicit images, checking the `g` constraints.
    pub fn from_parts(
        j: &JSpec,
        n: usize,
        images: Vec<Vec<u64>>,
        dither: Vec<u64>,
    ) -> Result<Self> {
        let comps = components(j.group(), n);
        if images.len() != j.generators().len()
            || images.iter().any(|row| row.len() != comps.len())
            || dither.len() != comps.len()
        {
            return invalid("table shape does not match J and G^n");
        }
        let table = HomomorphismTable {
            n,
            images,
            dither,
            seed: None,
        };
        if let Some(msg) = table.constraint_violation(j) {
            return invalid(msg);
        }
        Ok(table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn images(&self) -> &[Vec<u64>] {
        &self.images
    }

    pub fn dither(&self) -> &[u64] {
        &self.dither
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// First violated `g` constraint, if any.
    pub fn constraint_violation(&self, j: &JSpec) -> Option<String> {
        let comps = components(j.group(), self.n);
        for (l, &(q, s)) in j.generators().iter().enumerate() {
            for (c, &(p, r)) in comps.iter().enumerate() {
                let g = self.images[l][c];
                let (step, count) = g_law(q, s, p, r);
                let ok = g < p.pow(r)
                    && if step == 0 {
                        g == 0
                    } else {
                        g.is_multiple_of(step) && g / step < count
                    };
                if !ok {
                    return Some(format!(
                        "image of generator ({q},{s},{}) in component {c} is {g}",
                        l + 1
                    ));
                }
            }
        }
        if self
            .dither
            .iter()
            .zip(&comps)
            .any(|(&b, &(p, r))| b >= p.pow(r))
        {
            return Some("dither out of range".into());
        }
        None
    }
}

/// Draws every generator image and the dither independently.
pub fn sample_hom(j: &JSpec, n: usize, seed: u64) -> Result<HomomorphismTable> {
    if n == 0 {
        return invalid("blocklength must be at least one");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let comps = components(j.group(), n);
    let images = j
        .generators()
        .iter()
        .map(|&(q, s)| {
            comps
                .iter()
                .map(|&(p, r)| {
                    let (step, count) = g_law(q, s, p, r);
                    step * rng.random_range(0..count)
                })
                .collect()
        })
        .collect();
    let dither = comps
        .iter()
        .map(|&(p, r)| rng.random_range(0..p.pow(r)))
        .collect();
    Ok(HomomorphismTable {
        n,
        images,
        dither,
        seed: Some(seed),
    })
}

/// `φ(a)`, componentwise `Σ_l a_l g_l mod p^r`.
pub fn apply_hom(j: &JSpec, h: &HomomorphismTable, a: &[u64]) -> Result<Vec<u64>> {
    j.check(a)?;
    let comps = components(j.group(), h.n);
    Ok(comps
        .iter()
        .enumerate()
        .map(|(c, &(p, r))| {
            let m = p.pow(r) as u128;
            let sum: u128 = a
                .iter()
                .zip(&h.images)
                .map(|(&x, row)| x as u128 * row[c] as u128 % m)
                .sum();
            (sum % m) as u64
        })
        .collect())
}

/// `φ(a) + B`.
pub fn encode(j: &JSpec, h: &HomomorphismTable, a: &[u64]) -> Result<Vec<u64>> {
    let x = apply_hom(j, h, a)?;
    let comps = components(j.group(), h.n);
    Ok(x.iter()
        .zip(&h.dither)
        .zip(&comps)
        .map(|((x, b), &(p, r))| (x + b) % p.pow(r))
        .collect())
}

/// `θ` of a pair: `θ̂_l` is the depth of `ã_l − a_l` in `Z_{q^s}` (zero maps
/// to `s`), then `θ_{p,r} = min_l |r−s|⁺ + θ̂_l` over generators of prime `p`.
/// A prime of `G` absent from `J` gets `θ_{p,r} = r`.
pub fn theta_of_pair(j: &JSpec, a: &[u64], b: &[u64]) -> Result<ThetaVector> {
    j.check(a)?;
    j.check(b)?;
    let d = j.sub(b, a);
    let depths: Vec<u32> = d
        .iter()
        .zip(j.generators())
        .map(|(&x, &(q, s))| p_adic_depth(x, q, s))
        .collect();
    let values = j
        .group()
        .q_index()
        .iter()
        .map(|&(p, r)| {
            j.generators()
                .iter()
                .zip(&depths)
                .filter(|((q, _), _)| *q == p)
                .map(|(&(_, s), &t)| r.saturating_sub(s) + t)
                .min()
                .unwrap_or(r)
                .min(r)
        })
        .collect();
    ThetaVector::new(j.group(), values)
}

/// `|T_θ(a)|` for every `θ` that occurs.
pub fn t_theta_census(j: &JSpec, a: &[u64]) -> Result<BTreeMap<ThetaVector, u64>> {
    let mut out = BTreeMap::new();
    for b in j.elements()? {
        *out.entry(theta_of_pair(j, a, &b)?).or_insert(0) += 1;
    }
    Ok(out)
}

/// `|T_θ(a)|`.
pub fn count_t_theta(j: &JSpec, a: &[u64], theta: &ThetaVector) -> Result<u64> {
    theta.validate(j.group())?;
    Ok(t_theta_census(j, a)?.get(theta).copied().unwrap_or(0))
}

/// `{θ : T_θ(0) ≠ ∅}`.
pub fn brute_theta(j: &JSpec) -> Result<BTreeSet<ThetaVector>> {
    let zero = vec![0; j.generators().len()];
    Ok(t_theta_census(j, &zero)?.into_keys().collect())
}

/// `∏_{(q,s,l) ∈ 𝒢(J)} q^{s − max_{p=q} (θ_{p,r} − |r−s|⁺)⁺}`.
pub fn t_bound(j: &JSpec, theta: &ThetaVector) -> Result<BigUint> {
    theta.validate(j.group())?;
    let coeffs = omega_coefficients(j.group(), theta);
    let mut out = BigUint::from(1u32);
    for ((&(q, s), &a), &k) in j.group().s_index().iter().zip(&coeffs).zip(j.counts()) {
        out *= BigUint::from(q).pow((s - a) * k);
    }
    Ok(out)
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(m as i128) as u64
}

/// Solutions of `a x ≡ b (mod p^r)` for `a ∈ Z_{p^s} \ {0}`, `s ≤ r`.
///
/// With `a = p^θ̂ α`, `b = p^θ β` (`α`, `β` units) the set is
/// `{p^{θ−θ̂} α⁻¹ β + i α⁻¹ p^{r−θ̂}}`, empty when `θ < θ̂`.
pub fn solve_congruence(p: u64, r: u32, s: u32, a: u64, b: u64) -> Result<Vec<u64>> {
    if !crate::group::is_prime(p) || r == 0 || s == 0 || s > r {
        return invalid("need a prime p and 1 <= s <= r");
    }
    let m = p.pow(r);
    if a == 0 || a >= p.pow(s) {
        return invalid("a must be a nonzero element of Z_(p^s)");
    }
    if b >= m {
        return invalid("b must lie in Z_(p^r)");
    }
    let th_a = p_adic_depth(a, p, r);
    let th_b = p_adic_depth(b, p, r);
    if th_b < th_a {
        return Ok(Vec::new());
    }
    let alpha_inv = mod_inverse(a / p.pow(th_a), m) as u128;
    let beta = (b / p.pow(th_b)) as u128;
    let m = m as u128;
    let base = p.pow(th_b - th_a) as u128 * alpha_inv % m * beta % m;
    let stride = alpha_inv * p.pow(r - th_a) as u128 % m;
    let mut out: Vec<u64> = (0..p.pow(th_a) as u128)
        .map(|i| ((base + i * stride) % m) as u64)
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// How the pairwise law was checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairwiseMode {
    /// Every `(g, B)` table enumerated.
    Exhaustive,
    /// Exact law of `φ(ã − a)` per component by convolution.
    Factorized,
    /// Empirical frequencies with a total-variation test.
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairwiseReport {
    pub theta: String,
    pub mode: PairwiseMode,
    pub cells: u128,
    /// Cells whose probability differs from the claimed law (exact modes)
    /// or carry mass outside the support (sampled mode).
    pub violations: u64,
    pub tv_distance: Option<f64>,
    pub tv_threshold: Option<f64>,
    pub passed: bool,
}

/// Pairwise law check request.
#[derive(Clone, Copy, Debug)]
pub enum PairwiseRequest {
    /// Exhaustive when the table space allows it, else factorized.
    Exact,
    Exhaustive,
    Factorized,
    Sampled {
        samples: u64,
        seed: u64,
    },
}

/// Number of `(g, B)` tables for blocklength `n`.
pub fn table_space(j: &JSpec, n: usize) -> u128 {
    let comps = components(j.group(), n);
    let mut size: u128 = 1;
    for &(q, s) in j.generators() {
        for &(p, r) in &comps {
            size = size.saturating_mul(g_law(q, s, p, r).1 as u128);
        }
    }
    for &(p, r) in &comps {
        size = size.saturating_mul(p.pow(r) as u128);
    }
    size
}

fn gn_order(j: &JSpec, n: usize) -> u128 {
    (j.group().order() as u128).pow(n as u32)
}

/// Dense index of a `G^n` element (first component most significant).
fn gn_index(comps: &[(u64, u32)], x: &[u64]) -> usize {
    x.iter().zip(comps).fold(0usize, |acc, (&v, &(p, r))| {
        acc * p.pow(r) as usize + v as usize
    })
}

fn gn_element(comps: &[(u64, u32)], mut i: usize) -> Vec<u64> {
    let mut out = vec![0; comps.len()];
    for (slot, &(p, r)) in out.iter_mut().zip(comps).rev() {
        let m = p.pow(r) as usize;
        *slot = (i % m) as u64;
        i /= m;
    }
    out
}

/// `ũ − u ∈ H_θ^n`.
fn in_h(comps: &[(u64, u32)], theta_per_comp: &[u32], diff: &[u64]) -> bool {
    diff.iter()
        .zip(comps)
        .zip(theta_per_comp)
        .all(|((&d, &(p, _)), &t)| d % p.pow(t) == 0)
}

/// Checks `P(φ(a)+B = u, φ(ã)+B = ũ) = |G|^{−n} |H_θ|^{−n} 1{ũ − u ∈ H_θ^n}`.
pub fn verify_pairwise_law(
    j: &JSpec,
    n: usize,
    a: &[u64],
    b: &[u64],
    request: PairwiseRequest,
) -> Result<PairwiseReport> {
    if n == 0 {
        return invalid("blocklength must be at least one");
    }
    let theta = theta_of_pair(j, a, b)?;
    let group = j.group();
    let comps = components(group, n);
    let q_pos = group.ring_q_positions();
    let theta_per_comp: Vec<u32> = (0..n)
        .flat_map(|_| q_pos.iter().map(|&i| theta.values()[i]))
        .collect();
    // |H_θ^n|
    let h_order: u128 = comps
        .iter()
        .zip(&theta_per_comp)
        .map(|(&(p, r), &t)| p.pow(r - t) as u128)
        .product();
    let g_order = gn_order(j, n);
    let cells = g_order * g_order;
    if cells > PAIR_CELL_CAP {
        return Err(Error::CapExceeded {
            what: "pairwise law table".into(),
            size: cells,
            cap: PAIR_CELL_CAP as u64,
        });
    }
    let cells_usize = cells as usize;
    let g_usize = g_order as usize;
    let members: Vec<Vec<u64>> = (0..g_usize).map(|i| gn_element(&comps, i)).collect();
    let inside: Vec<bool> = members
        .iter()
        .map(|d| in_h(&comps, &theta_per_comp, d))
        .collect();
    // index of ũ − u for the cell (u, ũ)
    let diff_index = |cell: usize| {
        let (u, v) = (&members[cell / g_usize], &members[cell % g_usize]);
        u.iter()
            .zip(v)
            .zip(&comps)
            .fold(0usize, |acc, ((&x, &y), &(p, r))| {
                let m = p.pow(r);
                acc * m as usize + ((y + m - x) % m) as usize
            })
    };

    let space = table_space(j, n);
    let request = match request {
        PairwiseRequest::Exact if space <= EXHAUSTIVE_TABLE_CAP => PairwiseRequest::Exhaustive,
        PairwiseRequest::Exact => PairwiseRequest::Factorized,
        PairwiseRequest::Exhaustive if space > EXHAUSTIVE_TABLE_CAP => {
            return Err(Error::CapExceeded {
                what: "(g, B) table space".into(),
                size: space,
                cap: EXHAUSTIVE_TABLE_CAP as u64,
            })
        }
        other => other,
    };
    match request {
        PairwiseRequest::Exhaustive => {
            let mut counts = vec![0u64; cells_usize];
            let mut total = 0u64;
            let laws: Vec<(u64, u64)> = j
                .generators()
                .iter()
                .flat_map(|&(q, s)| comps.iter().map(move |&(p, r)| g_law(q, s, p, r)))
                .collect();
            let nc = comps.len();
            let moduli: Vec<u64> = comps.iter().map(|&(p, r)| p.pow(r)).collect();
            let dithers = &members;
            let index = |x: &[u64], shift: &[u64]| {
                x.iter()
                    .zip(shift)
                    .zip(&moduli)
                    .fold(0usize, |acc, ((&v, &b), &m)| {
                        acc * m as usize + ((v + b) % m) as usize
                    })
            };
            let (mut fa, mut fb) = (vec![0u64; nc], vec![0u64; nc]);
            let zero = vec![0u64; nc];
            // draws tallied by (φ(a), φ(b)); dithers applied to the tally below
            let mut draws = vec![0u64; cells_usize];
            let mut digits = vec![0u64; laws.len()];
            loop {
                // moduli here are at most |G^n| ≤ 2^8, so u64 products are exact
                for c in 0..nc {
                    let m = moduli[c];
                    let (mut xa, mut xb) = (0u64, 0u64);
                    for (l, (&al, &bl)) in a.iter().zip(b).enumerate() {
                        let g = laws[l * nc + c].0 * digits[l * nc + c];
                        xa += al * g;
                        xb += bl * g;
                    }
                    fa[c] = xa % m;
                    fb[c] = xb % m;
                }
                draws[index(&fa, &zero) * g_usize + index(&fb, &zero)] += 1;
                let mut k = digits.len();
                let mut wrapped = true;
                while k > 0 {
                    k -= 1;
                    digits[k] += 1;
                    if digits[k] < laws[k].1 {
                        wrapped = false;
                        break;
                    }
                    digits[k] = 0;
                }
                if wrapped {
                    break;
                }
            }
            for (cell, &c) in draws.iter().enumerate().filter(|(_, &c)| c > 0) {
                let (u, v) = (&dithers[cell / g_usize], &dithers[cell % g_usize]);
                for dither in dithers {
                    counts[index(u, dither) * g_usize + index(v, dither)] += c;
                    total += c;
                }
            }
            let mut violations = 0;
            for (cell, &cnt) in counts.iter().enumerate() {
                let expected = if inside[diff_index(cell)] {
                    // cnt / total == 1 / (|G|^n |H|^n)
                    cnt as u128 * g_order * h_order == total as u128
                } else {
                    cnt == 0
                };
                if !expected {
                    violations += 1;
                }
            }
            Ok(PairwiseReport {
                theta: theta.to_string(),
                mode: PairwiseMode::Exhaustive,
                cells,
                violations,
                tv_distance: None,
                tv_threshold: None,
                passed: violations == 0,
            })
        }
        PairwiseRequest::Exact | PairwiseRequest::Factorized => {
            let d = j.sub(b, a);
            // every count is at most (draws · |H_θ^n|), so u128 is exact below that
            let draws = space / g_order;
            let bad = if space < u128::MAX && draws.checked_mul(h_order).is_some() {
                factorized_bad_diffs::<u128>(j, &comps, &d, &members, &inside, h_order)
            } else {
                factorized_bad_diffs::<BigUint>(j, &comps, &d, &members, &inside, h_order)
            };
            // the claimed cell probability depends on ũ − u alone
            let violations = bad * g_order as u64;
            Ok(PairwiseReport {
                theta: theta.to_string(),
                mode: PairwiseMode::Factorized,
                cells,
                violations,
                tv_distance: None,
                tv_threshold: None,
                passed: violations == 0,
            })
        }
        PairwiseRequest::Sampled { samples, seed } => {
            if samples == 0 {
                return invalid("need at least one sample");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut counts = vec![0u64; cells_usize];
            for _ in 0..samples {
                let h = sample_hom(j, n, rng.random())?;
                let u = encode(j, &h, a)?;
                let v = encode(j, &h, b)?;
                counts[gn_index(&comps, &u) * g_usize + gn_index(&comps, &v)] += 1;
            }
            let target = 1.0 / (g_order as f64 * h_order as f64);
            let mut violations = 0;
            let mut tv = 0.0;
            for (cell, &cnt) in counts.iter().enumerate() {
                let freq = cnt as f64 / samples as f64;
                if inside[diff_index(cell)] {
                    tv += (freq - target).abs();
                } else if cnt > 0 {
                    violations += 1;
                    tv += freq;
                }
            }
            tv /= 2.0;
            let threshold = 3.0 * (cells as f64 / samples as f64).sqrt();
            Ok(PairwiseReport {
                theta: theta.to_string(),
                mode: PairwiseMode::Sampled,
                cells,
                violations,
                tv_distance: Some(tv),
                tv_threshold: Some(threshold),
                passed: violations == 0 && tv < threshold,
            })
        }
    }
}

/// Number of `ũ − u` values whose exact probability under the factorized law
/// differs from the claimed one.
fn factorized_bad_diffs<T>(
    j: &JSpec,
    comps: &[(u64, u32)],
    d: &[u64],
    members: &[Vec<u64>],
    inside: &[bool],
    h_order: u128,
) -> u64
where
    T: Clone + PartialEq + Zero + One + From<u64> + for<'a> AddAssign<&'a T> + MulAssign,
{
    // per component, the law of φ_c(d) is a convolution over generators
    let per_comp: Vec<Vec<T>> = comps
        .iter()
        .map(|&(p, r)| {
            let m = p.pow(r) as usize;
            let mut dist = vec![T::zero(); m];
            dist[0] = T::one();
            for (&dl, &(q, s)) in d.iter().zip(j.generators()) {
                let (step, count) = g_law(q, s, p, r);
                let mut next = vec![T::zero(); m];
                for (x, w) in dist.iter().enumerate() {
                    if w.is_zero() {
                        continue;
                    }
                    for i in 0..count {
                        let y = (x as u128 + dl as u128 * (step * i) as u128) % m as u128;
                        next[y as usize] += w;
                    }
                }
                dist = next;
            }
            dist
        })
        .collect();
    let mut total = T::one();
    for &(p, r) in comps {
        for &(q, s) in j.generators() {
            total *= T::from(g_law(q, s, p, r).1);
        }
    }
    let mut h = T::one();
    h *= T::from(h_order as u64);
    let mut bad = 0;
    for (diff, &inside) in members.iter().zip(inside) {
        let mut mass = T::one();
        for (&x, dist) in diff.iter().zip(&per_comp) {
            mass *= dist[x as usize].clone();
        }
        // P(u, ũ) = |G|^{−n} · mass / total
        let ok = if inside {
            mass *= h.clone();
            mass == total
        } else {
            mass.is_zero()
        };
        if !ok {
            bad += 1;
        }
    }
    bad
}

/// Outcome of one lemma family in [`verify_ensemble`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub lemma: String,
    pub cases: u64,
    pub violations: u64,
    pub detail: Option<String>,
}

impl LemmaCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub tables: usize,
    pub seed: u64,
    pub pairwise: PairwiseRequest,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tables: 20,
            seed: 0,
            pairwise: PairwiseRequest::Exact,
        }
    }
}

fn record(checks: &mut Vec<LemmaCheck>, lemma: &str, cases: u64, failures: Vec<String>) {
    checks.push(LemmaCheck {
        lemma: lemma.to_string(),
        cases,
        violations: failures.len() as u64,
        detail: failures.into_iter().next(),
    });
}

/// Runs every ensemble lemma check for `J` and blocklength `n`.
pub fn verify_ensemble(j: &JSpec, n: usize, options: &VerifyOptions) -> Result<Vec<LemmaCheck>> {
    if n == 0 {
        return invalid("blocklength must be at least one");
    }
    let group = j.group();
    let elements: Vec<Vec<u64>> = j.elements()?.collect();
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let moduli: Vec<u64> = components(group, n)
        .iter()
        .map(|&(p, r)| p.pow(r))
        .collect();
    let mut fails = Vec::new();
    let mut law_fails = Vec::new();
    let mut law_cases = 0;
    for _ in 0..options.tables {
        let h = sample_hom(j, n, rng.random())?;
        if let Some(msg) = h.constraint_violation(j) {
            fails.push(msg);
        }
        if (elements.len() as u128).pow(2) <= group.enumeration_cap() as u128 {
            let images: Vec<Vec<u64>> = elements
                .iter()
                .map(|a| apply_hom(j, &h, a))
                .collect::<Result<_>>()?;
            let j_moduli = j.moduli();
            let index_of = |x: &[u64]| {
                x.iter()
                    .zip(&j_moduli)
                    .fold(0usize, |acc, (&v, &m)| acc * m as usize + v as usize)
            };
            for (a, pa) in elements.iter().zip(&images) {
                for (b, pb) in elements.iter().zip(&images) {
                    law_cases += 1;
                    let lhs = &images[index_of(&j.add(a, b))];
                    let ok = lhs
                        .iter()
                        .zip(pa.iter().zip(pb))
                        .zip(&moduli)
                        .all(|((&l, (&x, &y)), &m)| l == (x + y) % m);
                    if !ok {
                        law_fails.push(format!("phi(a+b) != phi(a)+phi(b) at a={a:?}, b={b:?}"));
                    }
                }
            }
        }
    }
    record(
        &mut checks,
        "generator-image constraints",
        options.tables as u64,
        fails,
    );
    record(&mut checks, "homomorphism law", law_cases, law_fails);

    let zero = vec![0; j.generators().len()];
    let census = t_theta_census(j, &zero)?;
    let mut fails = Vec::new();
    for (theta, &count) in &census {
        let bound = t_bound(j, theta)?;
        if BigUint::from(count) > bound {
            fails.push(format!("|T_{theta}| = {count} exceeds bound {bound}"));
        }
    }
    record(&mut checks, "T_theta bound", census.len() as u64, fails);

    let brute: BTreeSet<ThetaVector> = census.keys().cloned().collect();
    let formula: BTreeSet<ThetaVector> = enumerate_theta_pinned(group, j.support())?
        .into_iter()
        .collect();
    let fails = if brute == formula {
        Vec::new()
    } else {
        vec![format!(
            "brute force gives {:?}, formula gives {:?}",
            brute.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            formula.iter().map(|t| t.to_string()).collect::<Vec<_>>()
        )]
    };
    record(&mut checks, "Theta(w) set equality", 1, fails);

    let mut fails = Vec::new();
    let mut cases = 0;
    for &(p, r) in group.q_index() {
        for s in 1..=r {
            for a in 1..p.pow(s) {
                for b in 0..p.pow(r) {
                    cases += 1;
                    let got = solve_congruence(p, r, s, a, b)?;
                    let want: Vec<u64> = (0..p.pow(r))
                        .filter(|&x| (a as u128 * x as u128) % p.pow(r) as u128 == b as u128)
                        .collect();
                    if got != want {
                        fails.push(format!(
                            "p={p} r={r} s={s} a={a} b={b}: {got:?} != {want:?}"
                        ));
                    }
                }
            }
        }
    }
    record(&mut checks, "congruence solutions", cases, fails);

    let mut fails = Vec::new();
    for b in &elements {
        let report = verify_pairwise_law(j, n, &zero, b, options.pairwise)?;
        if !report.passed {
            fails.push(format!(
                "pair (0, {b:?}) with theta {}: {} bad cells",
                report.theta, report.violations
            ));
        }
    }
    record(
        &mut checks,
        "pairwise joint law",
        elements.len() as u64,
        fails,
    );
    Ok(checks)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecoderReport {
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
}

/// Block error rate of maximum-likelihood decoding (ties broken uniformly at
/// random) over sampled tables and uniform messages.
pub fn mc_channel_error(
    j: &JSpec,
    n: usize,
    channel: &ChannelSpec,
    trials: u64,
    seed: u64,
) -> Result<DecoderReport> {
    if channel.group() != j.group() {
        return Err(Error::GroupMismatch);
    }
    if n == 0 || trials == 0 {
        return invalid("blocklength and trial count must be positive");
    }
    let work = j.order().saturating_mul(gn_order(j, n));
    if work > DECODER_CAP {
        return Err(Error::CapExceeded {
            what: "|J|·|G|^n".into(),
            size: work,
            cap: DECODER_CAP as u64,
        });
    }
    let group = j.group();
    let width = group.rings().len();
    let elements: Vec<Vec<u64>> = j.elements()?.collect();
    let w = channel.matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut errors = 0;
    for _ in 0..trials {
        let h = sample_hom(j, n, rng.random())?;
        // codeword symbols as element indices of G, per time step
        let book: Vec<Vec<usize>> = elements
            .iter()
            .map(|a| {
                let x = encode(j, &h, a).expect("element of J");
                x.chunks(width)
                    .map(|blk| group.index_of_residues(blk))
                    .collect()
            })
            .collect();
        let msg = rng.random_range(0..elements.len());
        let y: Vec<usize> = book[msg]
            .iter()
            .map(|&x| {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let row = &w[x];
                row.iter()
                    .position(|&p| {
                        acc += p;
                        u < acc
                    })
                    .unwrap_or_else(|| row.iter().rposition(|&p| p > 0.0).unwrap())
            })
            .collect();
        let likelihood: Vec<f64> = book
            .iter()
            .map(|cw| cw.iter().zip(&y).map(|(&x, &yy)| w[x][yy]).product())
            .collect();
        let best = likelihood.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = (0..book.len()).filter(|&i| likelihood[i] == best).collect();
        let decoded = ties[rng.random_range(0..ties.len())];
        if decoded != msg {
            errors += 1;
        }
    }
    Ok(DecoderReport {
        trials,
        errors,
        error_rate: errors as f64 / trials as f64,
    })
}
