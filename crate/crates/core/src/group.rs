//! Finite Abelian groups in canonical form `⊕ Z_{p^r}^{(m)}`.
//!
//! A [`GroupSpec`] lists its cyclic prime-power rings sorted by
//! `(p, r, m)`. Elements are dense residue vectors over those rings and all
//! arithmetic is componentwise. The subgroups `H_θ = ⊕ p^{θ_{p,r}} Z_{p^r}`
//! and their cosets are provided by [`Subgroup`].

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Default soft cap on the number of elements any enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

/// One `Z_{p^r}` ring of a canonical decomposition, the `m`-th of its kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ring {
    pub p: u64,
    pub r: u32,
    pub m: u32,
}

impl Ring {
    pub fn modulus(&self) -> u64 {
        self.p.pow(self.r)
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.r, self.m)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization as `(p, e)` pairs with ascending `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Exponent of the largest power of `p` dividing `x` inside `Z_{p^r}`;
/// zero maps to `r`.
pub fn p_adic_depth(x: u64, p: u64, r: u32) -> u32 {
    if x == 0 {
        return r;
    }
    let mut x = x;
    let mut d = 0;
    while x.is_multiple_of(p) && d < r {
        x /= p;
        d += 1;
    }
    d
}

/// Canonical description of a finite Abelian group.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    rings: Vec<Ring>,
    primes: Vec<u64>,
    q_index: Vec<(u64, u32)>,
    s_index: Vec<(u64, u32)>,
    order: u64,
    fingerprint: u64,
    cap: u64,
}

impl PartialEq for GroupSpec {
    fn eq(&self, other: &Self) -> bool {
        self.rings == other.rings
    }
}

impl Eq for GroupSpec {}

impl GroupSpec {
    /// Builds the canonical group `⊕ Z_{p^r}` from prime-power pairs given in
    /// any order.
    pub fn from_prime_powers(parts: &[(u64, u32)]) -> Result<Self> {
        if parts.is_empty() {
            return invalid("a group needs at least one ring");
        }
        for &(p, r) in parts {
            if !is_prime(p) {
                return invalid(format!("{p} is not prime"));
            }
            if r == 0 {
                return invalid("ring exponents must be at least 1");
            }
        }
        let mut sorted = parts.to_vec();
        sorted.sort();
        let mut rings: Vec<Ring> = Vec::with_capacity(sorted.len());
        for (p, r) in sorted {
            let m = match rings.last() {
                Some(last) if last.p == p && last.r == r => last.m + 1,
                _ => 1,
            };
            rings.push(Ring { p, r, m });
        }
        Self::from_rings(rings)
    }

    fn from_rings(rings: Vec<Ring>) -> Result<Self> {
        let mut order: u64 = 1;
        for ring in &rings {
            let modulus = ring
                .p
                .checked_pow(ring.r)
                .ok_or_else(|| Error::InvalidInput("ring modulus overflows u64".into()))?;
            order = order
                .checked_mul(modulus)
                .ok_or_else(|| Error::InvalidInput("group order overflows u64".into()))?;
        }
        let mut primes: Vec<u64> = rings.iter().map(|g| g.p).collect();
        primes.dedup();
        let mut q_index: Vec<(u64, u32)> = rings.iter().map(|g| (g.p, g.r)).collect();
        q_index.dedup();
        let mut s_index = Vec::new();
        for &q in &primes {
            let rq = rings
                .iter()
                .filter(|g| g.p == q)
                .map(|g| g.r)
                .max()
                .unwrap();
            s_index.extend((1..=rq).map(|s| (q, s)));
        }
        let mut h = DefaultHasher::new();
        rings.hash(&mut h);
        Ok(GroupSpec {
            rings,
            primes,
            q_index,
            s_index,
            order,
            fingerprint: h.finish(),
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    /// Replaces the soft cap on element enumeration.
    pub fn with_enumeration_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn enumeration_cap(&self) -> u64 {
        self.cap
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    /// `𝒫(G)`, ascending.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `𝒬(G)`: the distinct `(p, r)` pairs, ascending.
    pub fn q_index(&self) -> &[(u64, u32)] {
        &self.q_index
    }

    /// `𝒮(G)`: `(q, s)` for every prime `q` and `1 ≤ s ≤ r_q`, ascending.
    pub fn s_index(&self) -> &[(u64, u32)] {
        &self.s_index
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// `r_q`, the largest exponent of prime `q` in the decomposition.
    pub fn r_max(&self, q: u64) -> Option<u32> {
        self.rings.iter().filter(|g| g.p == q).map(|g| g.r).max()
    }

    /// `ℛ_p(G)`.
    pub fn exponents(&self, p: u64) -> Vec<u32> {
        self.q_index
            .iter()
            .filter(|&&(q, _)| q == p)
            .map(|&(_, r)| r)
            .collect()
    }

    /// `M_{p,r}`.
    pub fn multiplicity(&self, p: u64, r: u32) -> u32 {
        self.rings.iter().filter(|g| g.p == p && g.r == r).count() as u32
    }

    pub fn q_position(&self, p: u64, r: u32) -> Option<usize> {
        self.q_index.iter().position(|&x| x == (p, r))
    }

    pub fn s_position(&self, q: u64, s: u32) -> Option<usize> {
        self.s_index.iter().position(|&x| x == (q, s))
    }

    /// Position in `q_index` of each ring.
    pub(crate) fn ring_q_positions(&self) -> Vec<usize> {
        self.rings
            .iter()
            .map(|g| self.q_position(g.p, g.r).unwrap())
            .collect()
    }

    /// True for a single cyclic ring `Z_{p^r}`.
    pub fn is_single_ring(&self) -> bool {
        self.rings.len() == 1
    }

    /// True when every ring has `r = 1` and a single prime is present.
    pub fn is_field_like(&self) -> bool {
        self.primes.len() == 1 && self.rings.iter().all(|g| g.r == 1)
    }

    pub fn moduli(&self) -> Vec<u64> {
        self.rings.iter().map(Ring::modulus).collect()
    }

    /// Returns an error when `size` exceeds the enumeration cap.
    pub fn check_cap(&self, what: &str, size: u128) -> Result<()> {
        if size > self.cap as u128 {
            return Err(Error::CapExceeded {
                what: what.to_string(),
                size,
                cap: self.cap,
            });
        }
        Ok(())
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            residues: vec![0; self.rings.len()],
            fingerprint: self.fingerprint,
        }
    }

    /// Binds a residue vector (reduced mod each ring's modulus).
    pub fn element(&self, residues: &[u64]) -> Result<GroupElement> {
        if residues.len() != self.rings.len() {
            return invalid(format!(
                "expected {} residues, got {}",
                self.rings.len(),
                residues.len()
            ));
        }
        Ok(GroupElement {
            residues: residues
                .iter()
                .zip(&self.rings)
                .map(|(&x, g)| x % g.modulus())
                .collect(),
            fingerprint: self.fingerprint,
        })
    }

    /// The generator `𝕀_{G:p,r,m}` of the `i`-th ring.
    pub fn generator(&self, i: usize) -> GroupElement {
        let mut e = self.zero();
        e.residues[i] = 1 % self.rings[i].modulus();
        e
    }

    fn bound(&self, a: &GroupElement) -> Result<()> {
        if a.fingerprint != self.fingerprint {
            return Err(Error::GroupMismatch);
        }
        Ok(())
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.bound(a)?;
        self.bound(b)?;
        Ok(GroupElement {
            residues: a
                .residues
                .iter()
                .zip(&b.residues)
                .zip(&self.rings)
                .map(|((&x, &y), g)| (x + y) % g.modulus())
                .collect(),
            fingerprint: self.fingerprint,
        })
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        self.bound(a)?;
        Ok(GroupElement {
            residues: a
                .residues
                .iter()
                .zip(&self.rings)
                .map(|(&x, g)| (g.modulus() - x) % g.modulus())
                .collect(),
            fingerprint: self.fingerprint,
        })
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.add(a, &self.neg(b)?)
    }

    /// `c·a`, the `c`-fold sum of `a` (negative `c` uses `-a`).
    pub fn scalar_mul(&self, c: i64, a: &GroupElement) -> Result<GroupElement> {
        self.bound(a)?;
        Ok(GroupElement {
            residues: a
                .residues
                .iter()
                .zip(&self.rings)
                .map(|(&x, g)| {
                    let m = g.modulus() as i128;
                    ((c as i128 % m + m) % m * x as i128 % m) as u64
                })
                .collect(),
            fingerprint: self.fingerprint,
        })
    }

    /// Position of `a` in the canonical (lexicographic) element order.
    pub fn index_of(&self, a: &GroupElement) -> Result<usize> {
        self.bound(a)?;
        Ok(self.index_of_residues(&a.residues))
    }

    pub(crate) fn index_of_residues(&self, residues: &[u64]) -> usize {
        residues
            .iter()
            .zip(&self.rings)
            .fold(0usize, |acc, (&x, g)| {
                acc * g.modulus() as usize + x as usize
            })
    }

    /// Inverse of [`GroupSpec::index_of`].
    pub fn element_at(&self, mut index: usize) -> GroupElement {
        let mut residues = vec![0; self.rings.len()];
        for (slot, g) in residues.iter_mut().zip(&self.rings).rev() {
            let m = g.modulus() as usize;
            *slot = (index % m) as u64;
            index /= m;
        }
        GroupElement {
            residues,
            fingerprint: self.fingerprint,
        }
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> Result<impl Iterator<Item = GroupElement> + '_> {
        self.check_cap("group", self.order as u128)?;
        Ok((0..self.order as usize).map(move |i| self.element_at(i)))
    }

    pub fn subgroup(&self, theta: &ThetaVector) -> Result<Subgroup<'_>> {
        Subgroup::new(self, theta.clone())
    }

    /// `Z_2⊕Z_3`-style rendering of the canonical form.
    pub fn canonical_form(&self) -> String {
        self.rings
            .iter()
            .map(|g| format!("Z_{}", g.modulus()))
            .collect::<Vec<_>>()
            .join("⊕")
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_form())
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    /// Parses a comma-separated list of cyclic orders, e.g. `"4,3,9,9"`.
    fn from_str(s: &str) -> Result<Self> {
        Ok(decompose(&parse_orders(s)?)?.spec)
    }
}

pub fn parse_orders(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidInput(format!("bad cyclic order {t:?}")))
        })
        .collect()
}

/// An element of a [`GroupSpec`], as its residue vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    residues: Vec<u64>,
    fingerprint: u64,
}

impl GroupElement {
    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn is_zero(&self) -> bool {
        self.residues.iter().all(|&x| x == 0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.residues.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Result of [`decompose`]: the canonical group plus the isomorphism from
/// the user's product of cyclic groups.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub spec: GroupSpec,
    pub iso: CyclicIsomorphism,
}

/// Isomorphism `⊕_i Z_{n_i} → ⊕ Z_{p^r}` given by reduction mod each prime
/// power, inverted with the Chinese remainder theorem.
#[derive(Clone, Debug)]
pub struct CyclicIsomorphism {
    orders: Vec<u64>,
    // for every canonical ring: (user factor, modulus p^r)
    sources: Vec<(usize, u64)>,
}

impl CyclicIsomorphism {
    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn to_canonical(&self, spec: &GroupSpec, x: &[u64]) -> Result<GroupElement> {
        if x.len() != self.orders.len() {
            return invalid(format!("expected {} coordinates", self.orders.len()));
        }
        for (&xi, &n) in x.iter().zip(&self.orders) {
            if xi >= n {
                return invalid(format!("coordinate {xi} out of range for Z_{n}"));
            }
        }
        let residues: Vec<u64> = self.sources.iter().map(|&(i, q)| x[i] % q).collect();
        spec.element(&residues)
    }

    pub fn from_canonical(&self, spec: &GroupSpec, a: &GroupElement) -> Result<Vec<u64>> {
        spec.bound(a)?;
        let mut out = vec![0u64; self.orders.len()];
        let mut moduli = vec![1u64; self.orders.len()];
        for (&(i, q), &res) in self.sources.iter().zip(&a.residues) {
            out[i] = crt_pair(out[i], moduli[i], res, q);
            moduli[i] *= q;
        }
        Ok(out)
    }
}

fn mod_inverse(a: i128, m: i128) -> i128 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m, a.rem_euclid(m));
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1, "not invertible");
    t.rem_euclid(m)
}

/// Solves `x ≡ a (mod m)`, `x ≡ b (mod n)` for coprime `m, n`.
fn crt_pair(a: u64, m: u64, b: u64, n: u64) -> u64 {
    let (a, m, b, n) = (a as i128, m as i128, b as i128, n as i128);
    let t = ((b - a) * mod_inverse(m, n)).rem_euclid(n);
    (a + m * t) as u64
}

/// Canonical decomposition of `⊕_i Z_{n_i}`.
pub fn decompose(cyclic_orders: &[u64]) -> Result<Decomposition> {
    if cyclic_orders.is_empty() {
        return invalid("empty list of cyclic orders");
    }
    let mut parts = Vec::new();
    for (i, &n) in cyclic_orders.iter().enumerate() {
        if n < 2 {
            return invalid(format!("cyclic order {n} is below 2"));
        }
        for (p, e) in factorize(n) {
            parts.push((p, e, i));
        }
    }
    parts.sort();
    let spec =
        GroupSpec::from_prime_powers(&parts.iter().map(|&(p, e, _)| (p, e)).collect::<Vec<_>>())?;
    let sources = parts.iter().map(|&(p, e, i)| (i, p.pow(e))).collect();
    Ok(Decomposition {
        spec,
        iso: CyclicIsomorphism {
            orders: cyclic_orders.to_vec(),
            sources,
        },
    })
}

/// Subgroup selector `θ`, one exponent `θ_{p,r} ∈ [0, r]` per `(p, r) ∈ 𝒬(G)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThetaVector(Vec<u32>);

impl ThetaVector {
    pub fn new(spec: &GroupSpec, values: Vec<u32>) -> Result<Self> {
        let theta = ThetaVector(values);
        theta.validate(spec)?;
        Ok(theta)
    }

    pub(crate) fn from_raw(values: Vec<u32>) -> Self {
        ThetaVector(values)
    }

    /// `𝟎`: selects `H = G`.
    pub fn zero(spec: &GroupSpec) -> Self {
        ThetaVector(vec![0; spec.q_index().len()])
    }

    /// `𝐫`: selects `H = {0}`.
    pub fn full(spec: &GroupSpec) -> Self {
        ThetaVector(spec.q_index().iter().map(|&(_, r)| r).collect())
    }

    pub fn validate(&self, spec: &GroupSpec) -> Result<()> {
        if self.0.len() != spec.q_index().len() {
            return invalid(format!(
                "theta has {} components, group needs {}",
                self.0.len(),
                spec.q_index().len()
            ));
        }
        for (&t, &(p, r)) in self.0.iter().zip(spec.q_index()) {
            if t > r {
                return invalid(format!("theta_({p},{r}) = {t} exceeds {r}"));
            }
        }
        Ok(())
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, spec: &GroupSpec, p: u64, r: u32) -> Option<u32> {
        spec.q_position(p, r).map(|i| self.0[i])
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &ThetaVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Every valid θ for `spec`, in lexicographic order.
    pub fn all(spec: &GroupSpec) -> Vec<ThetaVector> {
        let bounds: Vec<u32> = spec.q_index().iter().map(|&(_, r)| r).collect();
        let mut out = Vec::new();
        let mut cur = vec![0u32; bounds.len()];
        loop {
            out.push(ThetaVector(cur.clone()));
            let mut i = bounds.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < bounds[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = 0;
            }
        }
    }
}

impl fmt::Display for ThetaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

/// Canonical coset representative of `x + H_θ`: residues mod `p^{θ_{p,r}}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetLabel(pub Vec<u64>);

/// The subgroup `H_θ = ⊕ p^{θ_{p,r}} Z_{p^r}^{(m)}` of a group.
#[derive(Clone, Debug)]
pub struct Subgroup<'g> {
    spec: &'g GroupSpec,
    theta: ThetaVector,
    // p^{θ_{p,r}} for each ring
    steps: Vec<u64>,
}

impl<'g> Subgroup<'g> {
    pub fn new(spec: &'g GroupSpec, theta: ThetaVector) -> Result<Self> {
        theta.validate(spec)?;
        let steps = spec
            .rings()
            .iter()
            .zip(spec.ring_q_positions())
            .map(|(g, qi)| g.p.pow(theta.0[qi]))
            .collect();
        Ok(Subgroup { spec, theta, steps })
    }

    pub fn spec(&self) -> &'g GroupSpec {
        self.spec
    }

    pub fn theta(&self) -> &ThetaVector {
        &self.theta
    }

    /// `|H_θ|`.
    pub fn order(&self) -> u64 {
        self.spec.order() / self.index()
    }

    /// `|G : H_θ|`.
    pub fn index(&self) -> u64 {
        self.steps.iter().product()
    }

    pub fn contains(&self, x: &GroupElement) -> Result<bool> {
        self.spec.bound(x)?;
        Ok(x.residues
            .iter()
            .zip(&self.steps)
            .all(|(&v, &d)| v % d == 0))
    }

    pub fn coset_label(&self, x: &GroupElement) -> Result<CosetLabel> {
        self.spec.bound(x)?;
        Ok(CosetLabel(
            x.residues
                .iter()
                .zip(&self.steps)
                .map(|(&v, &d)| v % d)
                .collect(),
        ))
    }

    /// Dense coset id in `[0, |G:H_θ|)`.
    pub fn coset_id(&self, x: &GroupElement) -> Result<usize> {
        self.spec.bound(x)?;
        Ok(self.coset_id_of_residues(&x.residues))
    }

    pub(crate) fn coset_id_of_residues(&self, residues: &[u64]) -> usize {
        residues
            .iter()
            .zip(&self.steps)
            .fold(0usize, |acc, (&v, &d)| acc * d as usize + (v % d) as usize)
    }

    /// Elements of `H_θ` in canonical order.
    pub fn elements(&self) -> Result<Vec<GroupElement>> {
        self.spec.check_cap("subgroup", self.order() as u128)?;
        let counts: Vec<u64> = self
            .spec
            .rings()
            .iter()
            .zip(&self.steps)
            .map(|(g, &d)| g.modulus() / d)
            .collect();
        let total = self.order() as usize;
        let mut out = Vec::with_capacity(total);
        for mut k in 0..total {
            let mut residues = vec![0u64; counts.len()];
            for i in (0..counts.len()).rev() {
                let c = counts[i] as usize;
                residues[i] = (k % c) as u64 * self.steps[i];
                k /= c;
            }
            out.push(GroupElement {
                residues,
                fingerprint: self.spec.fingerprint,
            });
        }
        Ok(out)
    }

    /// Element indices of `G` grouped by coset id.
    pub fn cosets(&self) -> Result<Vec<Vec<usize>>> {
        self.spec.check_cap("group", self.spec.order() as u128)?;
        let mut out = vec![Vec::new(); self.index() as usize];
        for i in 0..self.spec.order() as usize {
            let x = self.spec.element_at(i);
            out[self.coset_id_of_residues(&x.residues)].push(i);
        }
        Ok(out)
    }
}
