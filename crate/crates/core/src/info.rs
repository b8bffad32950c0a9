//! Discrete information measures in bits, plus the coset-conditioned
//! quantities `I([U]_θ; X)` and `I(X; Y | [X]_θ)`.

use num_traits::Float;

use crate::error::{invalid, Result};
use crate::group::{GroupSpec, ThetaVector};

/// Tolerance used when validating probability vectors and matrices.
pub const PROB_TOLERANCE: f64 = 1e-9;

fn lift<F: Float>(x: f64) -> F {
    F::from(x).expect("f64 representable")
}

/// A validated probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<F = f64>(Vec<F>);

impl<F: Float> Distribution<F> {
    pub fn new(p: Vec<F>) -> Result<Self> {
        if p.is_empty() {
            return invalid("empty distribution");
        }
        if p.iter().any(|&x| !(x >= F::zero()) || !x.is_finite()) {
            return invalid("probabilities must be finite and nonnegative");
        }
        let total = p.iter().fold(F::zero(), |a, &b| a + b);
        if (total - F::one()).abs() > lift(PROB_TOLERANCE) {
            return invalid(format!("probabilities sum to {}", total.to_f64().unwrap()));
        }
        Ok(Distribution(p))
    }

    pub fn uniform(n: usize) -> Self {
        Distribution(vec![F::one() / lift(n as f64); n])
    }

    pub fn probs(&self) -> &[F] {
        &self.0
    }
}

fn plogp<F: Float>(p: F) -> F {
    if p > F::zero() {
        -p * p.log2()
    } else {
        F::zero()
    }
}

/// Shannon entropy (bits) of an unnormalized-safe probability slice.
fn raw_entropy<F: Float>(p: &[F]) -> F {
    p.iter().fold(F::zero(), |acc, &x| acc + plogp(x))
}

pub fn entropy<F: Float>(p: &Distribution<F>) -> F {
    raw_entropy(p.probs())
}

fn validate_joint<F: Float>(joint: &[Vec<F>]) -> Result<()> {
    if joint.is_empty() || joint[0].is_empty() {
        return invalid("empty joint distribution");
    }
    let cols = joint[0].len();
    let mut total = F::zero();
    for row in joint {
        if row.len() != cols {
            return invalid("ragged joint matrix");
        }
        for &x in row {
            if !(x >= F::zero()) || !x.is_finite() {
                return invalid("joint entries must be finite and nonnegative");
            }
            total = total + x;
        }
    }
    if (total - F::one()).abs() > lift(PROB_TOLERANCE) {
        return invalid(format!("joint sums to {}", total.to_f64().unwrap()));
    }
    Ok(())
}

/// `I = H(rows) + H(cols) − H(joint)` in bits, clamped at zero.
pub fn mutual_information<F: Float>(joint: &[Vec<F>]) -> Result<F> {
    validate_joint(joint)?;
    Ok(mi_unchecked(joint))
}

fn mi_unchecked<F: Float>(joint: &[Vec<F>]) -> F {
    let cols = joint[0].len();
    let mut col_marg = vec![F::zero(); cols];
    let mut h_joint = F::zero();
    let mut h_rows = F::zero();
    for row in joint {
        let mut rs = F::zero();
        for (j, &x) in row.iter().enumerate() {
            col_marg[j] = col_marg[j] + x;
            rs = rs + x;
            h_joint = h_joint + plogp(x);
        }
        h_rows = h_rows + plogp(rs);
    }
    let mi = h_rows + raw_entropy(&col_marg) - h_joint;
    if mi < F::zero() {
        F::zero()
    } else {
        mi
    }
}

/// A discrete memoryless channel with input alphabet `G` (rows in canonical
/// element order).
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec {
    group: GroupSpec,
    matrix: Vec<Vec<f64>>,
}

impl ChannelSpec {
    pub fn new(group: GroupSpec, matrix: Vec<Vec<f64>>) -> Result<Self> {
        group.check_cap("channel input alphabet", group.order() as u128)?;
        if matrix.len() as u64 != group.order() {
            return invalid(format!(
                "channel has {} rows, group order is {}",
                matrix.len(),
                group.order()
            ));
        }
        let outputs = matrix.first().map_or(0, Vec::len);
        if outputs == 0 {
            return invalid("channel needs at least one output symbol");
        }
        for (x, row) in matrix.iter().enumerate() {
            if row.len() != outputs {
                return invalid(format!(
                    "row {x} has {} entries, expected {outputs}",
                    row.len()
                ));
            }
            if row.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
                return invalid(format!("row {x} has a negative or non-finite entry"));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > PROB_TOLERANCE {
                return invalid(format!("row {x} sums to {s}"));
            }
        }
        Ok(ChannelSpec { group, matrix })
    }

    /// Additive-noise channel `Y = X + Z` on `G`, noise indexed in canonical
    /// element order.
    pub fn additive(group: GroupSpec, noise: &[f64]) -> Result<Self> {
        let n = group.order() as usize;
        if noise.len() != n {
            return invalid("noise length must equal the group order");
        }
        let mut matrix = vec![vec![0.0; n]; n];
        for (x, row) in matrix.iter_mut().enumerate() {
            let ex = group.element_at(x);
            for (z, &pz) in noise.iter().enumerate() {
                let y = group.add(&ex, &group.element_at(z))?;
                row[group.index_of(&y)?] += pz;
            }
        }
        ChannelSpec::new(group, matrix)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn output_size(&self) -> usize {
        self.matrix[0].len()
    }

    /// Joint `p(x, y)` with `X` uniform on `G`.
    pub fn uniform_joint(&self) -> Vec<Vec<f64>> {
        let px = 1.0 / self.matrix.len() as f64;
        self.matrix
            .iter()
            .map(|row| row.iter().map(|w| w * px).collect())
            .collect()
    }
}

/// A joint law `p(x, u)` with `U` uniform on `G` (columns in canonical
/// element order), plus optional distortion data.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceJoint {
    group: GroupSpec,
    joint: Vec<Vec<f64>>,
    distortion: Option<Vec<Vec<f64>>>,
    max_distortion: Option<f64>,
}

impl SourceJoint {
    pub fn new(
        group: GroupSpec,
        joint: Vec<Vec<f64>>,
        distortion: Option<Vec<Vec<f64>>>,
        max_distortion: Option<f64>,
    ) -> Result<Self> {
        group.check_cap("reconstruction alphabet", group.order() as u128)?;
        let n = group.order() as usize;
        if joint.is_empty() {
            return invalid("source alphabet is empty");
        }
        if joint.iter().any(|row| row.len() != n) {
            return invalid(format!("every joint row needs {n} columns"));
        }
        validate_joint(&joint)?;
        for u in 0..n {
            let pu: f64 = joint.iter().map(|row| row[u]).sum();
            if (pu - 1.0 / n as f64).abs() > PROB_TOLERANCE {
                return invalid(format!("U-marginal is not uniform: p_U({u}) = {pu}"));
            }
        }
        if let Some(d) = &distortion {
            if d.len() != joint.len() || d.iter().any(|row| row.len() != n) {
                return invalid("distortion matrix shape differs from the joint");
            }
            if d.iter().flatten().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return invalid("distortions must be finite and nonnegative");
            }
        }
        match (&distortion, max_distortion) {
            (Some(d), Some(limit)) => {
                let e: f64 = joint
                    .iter()
                    .zip(d)
                    .flat_map(|(pr, dr)| pr.iter().zip(dr).map(|(p, d)| p * d))
                    .sum();
                if e > limit + PROB_TOLERANCE {
                    return invalid(format!("expected distortion {e} exceeds D = {limit}"));
                }
            }
            (None, Some(_)) => return invalid("a distortion target needs a distortion matrix"),
            _ => {}
        }
        Ok(SourceJoint {
            group,
            joint,
            distortion,
            max_distortion,
        })
    }

    /// Builds `p(x, u) = p(x | u) / |G|` from a test channel `U → X`.
    pub fn from_backward_channel(group: GroupSpec, x_given_u: &[Vec<f64>]) -> Result<Self> {
        let n = group.order() as usize;
        if x_given_u.len() != n {
            return invalid("need one conditional row per group element");
        }
        let nx = x_given_u[0].len();
        let mut joint = vec![vec![0.0; n]; nx];
        for (u, row) in x_given_u.iter().enumerate() {
            if row.len() != nx {
                return invalid("ragged conditional matrix");
            }
            for (x, &p) in row.iter().enumerate() {
                joint[x][u] = p / n as f64;
            }
        }
        SourceJoint::new(group, joint, None, None)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn joint(&self) -> &[Vec<f64>] {
        &self.joint
    }

    pub fn distortion(&self) -> Option<&[Vec<f64>]> {
        self.distortion.as_deref()
    }

    pub fn max_distortion(&self) -> Option<f64> {
        self.max_distortion
    }

    pub fn source_size(&self) -> usize {
        self.joint.len()
    }

    pub fn expected_distortion(&self) -> Option<f64> {
        self.distortion.as_ref().map(|d| {
            self.joint
                .iter()
                .zip(d)
                .flat_map(|(pr, dr)| pr.iter().zip(dr).map(|(p, d)| p * d))
                .sum()
        })
    }
}

/// `I([U]_θ; X)`: merge the `U` columns by coset of `H_θ`, then take the
/// mutual information.
pub fn coset_mi_source(j: &SourceJoint, theta: &ThetaVector) -> Result<f64> {
    let h = j.group.subgroup(theta)?;
    let cosets = h.cosets()?;
    let merged: Vec<Vec<f64>> = j
        .joint
        .iter()
        .map(|row| {
            cosets
                .iter()
                .map(|c| c.iter().map(|&u| row[u]).sum())
                .collect()
        })
        .collect();
    Ok(mi_unchecked(&merged))
}

/// `I(X; Y | X uniform on C)` for every coset `C` of `H_θ`, indexed by coset id.
pub fn per_coset_mi(c: &ChannelSpec, theta: &ThetaVector) -> Result<Vec<f64>> {
    let h = c.group.subgroup(theta)?;
    let size = h.order() as f64;
    Ok(h.cosets()?
        .iter()
        .map(|coset| {
            let joint: Vec<Vec<f64>> = coset
                .iter()
                .map(|&x| c.matrix[x].iter().map(|w| w / size).collect())
                .collect();
            mi_unchecked(&joint)
        })
        .collect())
}

/// `I(X; Y | [X]_θ)` with `X` uniform on `G`, as the coset average.
pub fn coset_mi_channel(c: &ChannelSpec, theta: &ThetaVector) -> Result<f64> {
    let per = per_coset_mi(c, theta)?;
    Ok(per.iter().sum::<f64>() / per.len() as f64)
}

/// The same quantity through `I(X;Y) − I([X]_θ;Y)`.
pub fn coset_mi_channel_chain(c: &ChannelSpec, theta: &ThetaVector) -> Result<f64> {
    let h = c.group.subgroup(theta)?;
    let joint = c.uniform_joint();
    let full = mi_unchecked(&joint);
    let merged: Vec<Vec<f64>> = h
        .cosets()?
        .iter()
        .map(|coset| {
            let mut row = vec![0.0; c.output_size()];
            for &x in coset {
                for (acc, p) in row.iter_mut().zip(&joint[x]) {
                    *acc += p;
                }
            }
            row
        })
        .collect();
    Ok((full - mi_unchecked(&merged)).max(0.0))
}

/// `I(X;Y)` with uniform input.
pub fn symmetric_mi(c: &ChannelSpec) -> f64 {
    mi_unchecked(&c.uniform_joint())
}

/// `I(U;X)` of a source joint.
pub fn source_mi(j: &SourceJoint) -> f64 {
    mi_unchecked(&j.joint)
}
