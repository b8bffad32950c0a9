//! Closed-form rates for the groups where one is known.

use crate::error::{Error, Result};
use crate::group::{GroupSpec, ThetaVector};
use crate::info::{
    coset_mi_channel, coset_mi_source, source_mi, symmetric_mi, ChannelSpec, SourceJoint,
};

fn single_ring(spec: &GroupSpec) -> Result<u32> {
    if !spec.is_single_ring() {
        return Err(Error::Unsupported(format!(
            "{} is not a single ring Z_(p^r)",
            spec.canonical_form()
        )));
    }
    Ok(spec.rings()[0].r)
}

fn is_z2_z4(spec: &GroupSpec) -> bool {
    spec.q_index() == [(2, 1), (2, 2)] && spec.rings().iter().all(|g| g.m == 1)
}

fn th(spec: &GroupSpec, v: &[u32]) -> ThetaVector {
    ThetaVector::new(spec, v.to_vec()).expect("theta within range")
}

/// `max_{θ=1..r} (r/θ) I([U]_θ;X)` on `Z_{p^r}`.
pub fn isc_zpr_closed_form(j: &SourceJoint) -> Result<f64> {
    let spec = j.group();
    let r = single_ring(spec)?;
    let mut best = 0.0f64;
    for t in 1..=r {
        let c = coset_mi_source(j, &th(spec, &[t]))?;
        best = best.max(r as f64 / t as f64 * c);
    }
    Ok(best)
}

/// `min_{θ=0..r−1} r/(r−θ) I(X;Y|[X]_θ)` on `Z_{p^r}`.
///
/// The minimum (not a maximum) is what the achievability argument yields.
pub fn icc_zpr_closed_form(c: &ChannelSpec) -> Result<f64> {
    let spec = c.group();
    let r = single_ring(spec)?;
    let mut best = f64::INFINITY;
    for t in 0..r {
        let v = coset_mi_channel(c, &th(spec, &[t]))?;
        best = best.min(r as f64 / (r - t) as f64 * v);
    }
    Ok(best)
}

/// `max(I([U]_{(1,1)};X) + I([U]_{(0,1)};X), I(U;X))` on `Z_2 ⊕ Z_4`.
pub fn isc_z2z4_closed_form(j: &SourceJoint) -> Result<f64> {
    let spec = j.group();
    if !is_z2_z4(spec) {
        return Err(Error::Unsupported("group is not Z_2⊕Z_4".into()));
    }
    let a = coset_mi_source(j, &th(spec, &[1, 1]))?;
    let b = coset_mi_source(j, &th(spec, &[0, 1]))?;
    Ok((a + b).max(source_mi(j)))
}

/// `min(I(X;Y|[X]_{(1,1)}) + I(X;Y|[X]_{(0,1)}), I(X;Y))` on `Z_2 ⊕ Z_4`.
pub fn icc_z2z4_closed_form(c: &ChannelSpec) -> Result<f64> {
    let spec = c.group();
    if !is_z2_z4(spec) {
        return Err(Error::Unsupported("group is not Z_2⊕Z_4".into()));
    }
    let a = coset_mi_channel(c, &th(spec, &[1, 1]))?;
    let b = coset_mi_channel(c, &th(spec, &[0, 1]))?;
    Ok((a + b).min(symmetric_mi(c)))
}

/// Fast path when one applies: `Z_p^m`, `Z_{p^r}` or `Z_2 ⊕ Z_4`.
pub fn isc_closed_form(j: &SourceJoint) -> Result<Option<f64>> {
    let spec = j.group();
    if spec.is_field_like() {
        Ok(Some(source_mi(j)))
    } else if spec.is_single_ring() {
        isc_zpr_closed_form(j).map(Some)
    } else if is_z2_z4(spec) {
        isc_z2z4_closed_form(j).map(Some)
    } else {
        Ok(None)
    }
}

pub fn icc_closed_form(c: &ChannelSpec) -> Result<Option<f64>> {
    let spec = c.group();
    if spec.is_field_like() {
        Ok(Some(symmetric_mi(c)))
    } else if spec.is_single_ring() {
        icc_zpr_closed_form(c).map(Some)
    } else if is_z2_z4(spec) {
        icc_z2z4_closed_form(c).map(Some)
    } else {
        Ok(None)
    }
}
