//! Reference computations for the test suites.
//!
//! Everything here is written from the definitions, on plain vectors, and
//! shares no code with `abelian-gmi`. Groups are lists of rings `(p, r)`
//! sorted ascending; elements are residue vectors in lexicographic order with
//! the first ring most significant.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A finite Abelian group as a sorted list of rings `Z_{p^r}`.
#[derive(Clone, Debug)]
pub struct Ab {
    pub rings: Vec<(u64, u32)>,
}

impl Ab {
    pub fn new(mut rings: Vec<(u64, u32)>) -> Self {
        rings.sort();
        Ab { rings }
    }

    pub fn moduli(&self) -> Vec<u64> {
        self.rings.iter().map(|&(p, r)| p.pow(r)).collect()
    }

    pub fn order(&self) -> usize {
        self.moduli().iter().product::<u64>() as usize
    }

    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for m in self.moduli() {
            out = out
                .into_iter()
                .flat_map(|e| {
                    (0..m).map(move |x| {
                        let mut v = e.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        out
    }

    pub fn index(&self, x: &[u64]) -> usize {
        x.iter()
            .zip(self.moduli())
            .fold(0, |acc, (&v, m)| acc * m as usize + v as usize)
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .zip(self.moduli())
            .map(|((x, y), m)| (x + m - y) % m)
            .collect()
    }

    pub fn primes(&self) -> Vec<u64> {
        let s: BTreeSet<u64> = self.rings.iter().map(|r| r.0).collect();
        s.into_iter().collect()
    }

    /// `𝒮(G)`: `(q, s)` for `1 ≤ s ≤ r_q`.
    pub fn s_pairs(&self) -> Vec<(u64, u32)> {
        self.primes()
            .into_iter()
            .flat_map(|q| {
                let rq = self
                    .rings
                    .iter()
                    .filter(|r| r.0 == q)
                    .map(|r| r.1)
                    .max()
                    .unwrap();
                (1..=rq).map(move |s| (q, s))
            })
            .collect()
    }

    /// `𝒬(G)`: distinct `(p, r)`.
    pub fn q_pairs(&self) -> Vec<(u64, u32)> {
        let s: BTreeSet<(u64, u32)> = self.rings.iter().copied().collect();
        s.into_iter().collect()
    }

    /// Every theta vector over `𝒬(G)`.
    pub fn all_thetas(&self) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for (_, r) in self.q_pairs() {
            out = out
                .into_iter()
                .flat_map(|e| {
                    (0..=r).map(move |t| {
                        let mut v = e.clone();
                        v.push(t);
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// Residues mod `p^θ` in each ring.
    pub fn label(&self, x: &[u64], theta: &[u32]) -> Vec<u64> {
        let q = self.q_pairs();
        x.iter()
            .zip(&self.rings)
            .map(|(&v, ring)| {
                let t = theta[q.iter().position(|qq| qq == ring).unwrap()];
                v % ring.0.pow(t)
            })
            .collect()
    }
}

fn h(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// `I(A;B) = H(A) + H(B) − H(A,B)` for a joint table `p[a][b]`.
pub fn mi(joint: &[Vec<f64>]) -> f64 {
    let pa: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let nb = joint[0].len();
    let pb: Vec<f64> = (0..nb).map(|b| joint.iter().map(|r| r[b]).sum()).collect();
    let pab: Vec<f64> = joint.iter().flatten().copied().collect();
    (h(&pa) + h(&pb) - h(&pab)).max(0.0)
}

/// `I(X;Y|[X]_θ) = H(Y|[X]_θ) − H(Y|X)` with `X` uniform.
pub fn channel_term(ab: &Ab, w: &[Vec<f64>], theta: &[u32]) -> f64 {
    let n = ab.order() as f64;
    let h_y_x: f64 = w.iter().map(|row| h(row)).sum::<f64>() / n;
    let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for (i, x) in ab.elements().iter().enumerate() {
        groups.entry(ab.label(x, theta)).or_default().push(i);
    }
    let ny = w[0].len();
    let h_y_l: f64 = groups
        .values()
        .map(|members| {
            let k = members.len() as f64;
            let py: Vec<f64> = (0..ny)
                .map(|y| members.iter().map(|&x| w[x][y]).sum::<f64>() / k)
                .collect();
            k / n * h(&py)
        })
        .sum();
    (h_y_l - h_y_x).max(0.0)
}

/// `I(X;Y | X uniform on one coset)` for each coset of `H_θ`.
pub fn per_coset_terms(ab: &Ab, w: &[Vec<f64>], theta: &[u32]) -> Vec<f64> {
    let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for (i, x) in ab.elements().iter().enumerate() {
        groups.entry(ab.label(x, theta)).or_default().push(i);
    }
    groups
        .values()
        .map(|members| {
            let k = members.len() as f64;
            let joint: Vec<Vec<f64>> = members
                .iter()
                .map(|&x| w[x].iter().map(|p| p / k).collect())
                .collect();
            mi(&joint)
        })
        .collect()
}

/// `I([U]_θ;X)` for `p[x][u]`.
pub fn source_term(ab: &Ab, joint: &[Vec<f64>], theta: &[u32]) -> f64 {
    let labels: Vec<Vec<u64>> = ab.elements().iter().map(|u| ab.label(u, theta)).collect();
    let distinct: Vec<Vec<u64>> = labels
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let merged: Vec<Vec<f64>> = joint
        .iter()
        .map(|row| {
            distinct
                .iter()
                .map(|l| {
                    (0..row.len())
                        .filter(|&u| &labels[u] == l)
                        .map(|u| row[u])
                        .sum()
                })
                .collect()
        })
        .collect();
    mi(&merged)
}

/// `Θ` for a support over `𝒮(G)`, straight from the definition.
pub fn theta_set(ab: &Ab, support: &[bool]) -> BTreeSet<Vec<u32>> {
    let s = ab.s_pairs();
    let chosen: Vec<(u64, u32)> = s
        .iter()
        .zip(support)
        .filter(|(_, &b)| b)
        .map(|(&x, _)| x)
        .collect();
    let mut hats = vec![vec![]];
    for &(_, sv) in &chosen {
        hats = hats
            .into_iter()
            .flat_map(|e: Vec<u32>| {
                (0..=sv).map(move |t| {
                    let mut v = e.clone();
                    v.push(t);
                    v
                })
            })
            .collect();
    }
    hats.iter()
        .map(|hat| {
            ab.q_pairs()
                .iter()
                .map(|&(p, r)| {
                    chosen
                        .iter()
                        .zip(hat)
                        .filter(|((q, _), _)| *q == p)
                        .map(|(&(_, sv), &t)| r.saturating_sub(sv) + t)
                        .min()
                        .expect("support covers every prime")
                        .min(r)
                })
                .collect()
        })
        .collect()
}

/// `(N_θ(w), D(w) − N_θ(w), D(w))` with `log2 q` factors.
fn omega_parts(ab: &Ab, w: &[f64], theta: &[u32]) -> (f64, f64, f64) {
    let qp = ab.q_pairs();
    let (mut num, mut rest, mut den) = (0.0, 0.0, 0.0);
    for (&(q, s), &wv) in ab.s_pairs().iter().zip(w) {
        let a = qp
            .iter()
            .zip(theta)
            .filter(|((p, _), _)| *p == q)
            .map(|(&(_, r), &t)| t.saturating_sub(r.saturating_sub(s)))
            .max()
            .unwrap_or(0);
        let lq = (q as f64).log2();
        num += a as f64 * wv * lq;
        rest += (s - a) as f64 * wv * lq;
        den += s as f64 * wv * lq;
    }
    (num, rest, den)
}

pub fn omega(ab: &Ab, w: &[f64], theta: &[u32]) -> f64 {
    let (n, _, d) = omega_parts(ab, w, theta);
    n / d
}

/// Source or channel objective at `w`, or `None` when some prime has no
/// weight.
pub fn functional(
    ab: &Ab,
    w: &[f64],
    terms: &BTreeMap<Vec<u32>, f64>,
    source: bool,
) -> Option<f64> {
    let support: Vec<bool> = w.iter().map(|&x| x > 0.0).collect();
    let s = ab.s_pairs();
    if !ab
        .primes()
        .iter()
        .all(|&p| s.iter().zip(&support).any(|(&(q, _), &b)| b && q == p))
    {
        return None;
    }
    let full: Vec<u32> = ab.q_pairs().iter().map(|&(_, r)| r).collect();
    let ratio = |c: f64, num: f64, den: f64| {
        if num == 0.0 {
            if c == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            c * den / num
        }
    };
    let mut vals = Vec::new();
    for theta in theta_set(ab, &support) {
        let zero = theta.iter().all(|&t| t == 0);
        if (source && zero) || (!source && theta == full) {
            continue;
        }
        let c = terms[&theta];
        let (n, rest, d) = omega_parts(ab, w, &theta);
        vals.push(if source {
            ratio(c, n, d)
        } else {
            ratio(c, rest, d)
        });
    }
    Some(if source {
        vals.into_iter().fold(0.0, f64::max)
    } else {
        vals.into_iter().fold(f64::INFINITY, f64::min)
    })
}

/// Best objective over the grid `w = k / steps`.
pub fn grid_optimum(
    ab: &Ab,
    terms: &BTreeMap<Vec<u32>, f64>,
    source: bool,
    steps: usize,
) -> (f64, Vec<f64>) {
    let n = ab.s_pairs().len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut stack: Vec<(Vec<usize>, usize)> = vec![(vec![], steps)];
    while let Some((prefix, left)) = stack.pop() {
        if prefix.len() + 1 == n {
            let mut k = prefix.clone();
            k.push(left);
            let w: Vec<f64> = k.iter().map(|&x| x as f64 / steps as f64).collect();
            if let Some(v) = functional(ab, &w, terms, source) {
                let better = match &best {
                    None => true,
                    Some((b, _)) => (source && v < *b) || (!source && v > *b),
                };
                if better {
                    best = Some((v, w));
                }
            }
            continue;
        }
        for x in 0..=left {
            let mut p = prefix.clone();
            p.push(x);
            stack.push((p, left - x));
        }
    }
    best.expect("some grid point covers every prime")
}

pub fn channel_terms(ab: &Ab, w: &[Vec<f64>]) -> BTreeMap<Vec<u32>, f64> {
    ab.all_thetas()
        .into_iter()
        .map(|t| {
            let v = channel_term(ab, w, &t);
            (t, v)
        })
        .collect()
}

pub fn source_terms(ab: &Ab, joint: &[Vec<f64>]) -> BTreeMap<Vec<u32>, f64> {
    ab.all_thetas()
        .into_iter()
        .map(|t| {
            let v = source_term(ab, joint, &t);
            (t, v)
        })
        .collect()
}

/// A random probability vector, skewed so that some entries are small.
pub fn random_distribution(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(3) + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

pub fn random_channel(n: usize, ny: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n).map(|_| random_distribution(ny, rng)).collect()
}

/// `W(y|x) = P(Z = y − x)` on the group.
pub fn additive_channel(ab: &Ab, noise: &[f64]) -> Vec<Vec<f64>> {
    let el = ab.elements();
    el.iter()
        .map(|x| el.iter().map(|y| noise[ab.index(&ab.sub(y, x))]).collect())
        .collect()
}

/// `p[x][u] = p(x|u) / |G|`, so `U` is uniform.
pub fn random_source_joint(nx: usize, nu: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let cond: Vec<Vec<f64>> = (0..nu).map(|_| random_distribution(nx, rng)).collect();
    (0..nx)
        .map(|x| (0..nu).map(|u| cond[u][x] / nu as f64).collect())
        .collect()
}

/// Solutions of `a x ≡ b (mod m)` by brute force.
pub fn brute_congruence(a: u64, b: u64, m: u64) -> Vec<u64> {
    (0..m).filter(|&x| (a * x) % m == b % m).collect()
}

/// Largest `t ≤ cap` with `p^t | x` (zero maps to `cap`).
pub fn depth(x: u64, p: u64, cap: u32) -> u32 {
    let mut t = 0;
    let mut v = x;
    while t < cap && v.is_multiple_of(p) {
        v /= p;
        t += 1;
    }
    if x == 0 {
        cap
    } else {
        t
    }
}

/// Abelian groups of order `n` as ring lists, one per partition of every
/// prime exponent.
pub fn abelian_groups_of_order(n: u64) -> Vec<Vec<(u64, u32)>> {
    fn partitions(k: u32, max: u32) -> Vec<Vec<u32>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in (1..=k.min(max)).rev() {
            for mut rest in partitions(k - first, first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    let mut factors = Vec::new();
    let mut m = n;
    let mut p = 2;
    while m > 1 {
        let mut e = 0;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
        p += 1;
    }
    let mut out: Vec<Vec<(u64, u32)>> = vec![vec![]];
    for (p, e) in factors {
        out = out
            .into_iter()
            .flat_map(|g| {
                partitions(e, e).into_iter().map(move |part| {
                    let mut v = g.clone();
                    v.extend(part.into_iter().map(|r| (p, r)));
                    v
                })
            })
            .collect();
    }
    for g in &mut out {
        g.sort();
    }
    out
}

/// `Z_{p^r}` channel: `min_{θ<r} r/(r−θ) · I(X;Y|[X]_θ)`.
pub fn zpr_channel_formula(r: u32, terms: &BTreeMap<Vec<u32>, f64>) -> f64 {
    (0..r)
        .map(|t| r as f64 / (r - t) as f64 * terms[&vec![t]])
        .fold(f64::INFINITY, f64::min)
}

/// `Z_{p^r}` source: `max_{θ≥1} r/θ · I([U]_θ;X)`.
pub fn zpr_source_formula(r: u32, terms: &BTreeMap<Vec<u32>, f64>) -> f64 {
    (1..=r)
        .map(|t| r as f64 / t as f64 * terms[&vec![t]])
        .fold(0.0, f64::max)
}

/// `Z_2 ⊕ Z_4` channel: `min(I_{(1,1)} + I_{(0,1)}, I)`.
pub fn z2z4_channel_formula(terms: &BTreeMap<Vec<u32>, f64>) -> f64 {
    (terms[&vec![1, 1]] + terms[&vec![0, 1]]).min(terms[&vec![0, 0]])
}

/// `Z_2 ⊕ Z_4` source: `max(I_{(1,1)} + I_{(0,1)}, I)`.
pub fn z2z4_source_formula(terms: &BTreeMap<Vec<u32>, f64>) -> f64 {
    (terms[&vec![1, 1]] + terms[&vec![0, 1]]).max(terms[&vec![1, 2]])
}

pub type Rng = ChaCha8Rng;
