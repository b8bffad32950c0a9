//! Problem files and result records.
//!
//! Matrices bind rows (channel) or columns (source) to group elements in the
//! canonical element order: lexicographic in the residue vector of the
//! canonical decomposition, first ring most significant.

use std::io::Write;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::group::{decompose, GroupSpec, ThetaVector};
use crate::info::{ChannelSpec, SourceJoint};
use crate::rate::{enumerate_theta, omega_coefficients, RateResult, Support};
use crate::scalar::{Extended, Scalar};

/// A probability written either as a JSON number or as a decimal string.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn value(&self) -> Result<f64> {
        match self {
            Number::Float(x) => Ok(*x),
            Number::Text(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("not a decimal number: {s:?}"))),
        }
    }
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.value() {
            Ok(x) => s.serialize_f64(x),
            Err(_) => Err(serde::ser::Error::custom("invalid number")),
        }
    }
}

fn numbers(m: &[Vec<Number>]) -> Result<Vec<Vec<f64>>> {
    m.iter()
        .map(|row| row.iter().map(Number::value).collect())
        .collect()
}

fn to_numbers(m: &[Vec<f64>]) -> Vec<Vec<Number>> {
    m.iter()
        .map(|row| row.iter().map(|&x| Number::Float(x)).collect())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Channel,
    Source,
}

/// A channel or source problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub kind: ProblemKind,
    /// Cyclic orders whose product is `G`.
    pub group: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_size: Option<usize>,
    /// `W[x][y]`, rows in canonical element order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Number>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_size: Option<usize>,
    /// `p[x][u]`, columns in canonical element order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<Vec<Vec<Number>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<Vec<Vec<Number>>>,
    #[serde(default, rename = "D", skip_serializing_if = "Option::is_none")]
    pub max_distortion: Option<Number>,
}

/// A validated problem.
#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    Channel(ChannelSpec),
    Source(SourceJoint),
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("problem file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn group_spec(&self) -> Result<GroupSpec> {
        Ok(decompose(&self.group)?.spec)
    }

    /// Validates the file into a channel or source problem.
    pub fn problem(&self) -> Result<Problem> {
        let group = self.group_spec()?;
        match self.kind {
            ProblemKind::Channel => {
                if self.joint.is_some()
                    || self.distortion.is_some()
                    || self.max_distortion.is_some()
                {
                    return invalid("channel files take only output_size and matrix");
                }
                let m =
                    numbers(self.matrix.as_deref().ok_or_else(|| {
                        Error::InvalidInput("channel file needs a matrix".into())
                    })?)?;
                if let Some(ny) = self.output_size {
                    if m.iter().any(|row| row.len() != ny) {
                        return invalid(format!(
                            "every matrix row needs output_size = {ny} entries"
                        ));
                    }
                }
                Ok(Problem::Channel(ChannelSpec::new(group, m)?))
            }
            ProblemKind::Source => {
                if self.matrix.is_some() || self.output_size.is_some() {
                    return invalid("source files take joint, distortion and D");
                }
                let joint = numbers(
                    self.joint
                        .as_deref()
                        .ok_or_else(|| Error::InvalidInput("source file needs a joint".into()))?,
                )?;
                if let Some(nx) = self.source_size {
                    if joint.len() != nx {
                        return invalid(format!("joint needs source_size = {nx} rows"));
                    }
                }
                let d = self.distortion.as_deref().map(numbers).transpose()?;
                let limit = self
                    .max_distortion
                    .as_ref()
                    .map(Number::value)
                    .transpose()?;
                Ok(Problem::Source(SourceJoint::new(group, joint, d, limit)?))
            }
        }
    }

    /// Normalized file for a channel; `group` gives the cyclic orders.
    pub fn from_channel(group: Vec<u64>, c: &ChannelSpec) -> Self {
        ProblemFile {
            kind: ProblemKind::Channel,
            group,
            output_size: Some(c.output_size()),
            matrix: Some(to_numbers(c.matrix())),
            source_size: None,
            joint: None,
            distortion: None,
            max_distortion: None,
        }
    }

    pub fn from_source(group: Vec<u64>, j: &SourceJoint) -> Self {
        ProblemFile {
            kind: ProblemKind::Source,
            group,
            output_size: None,
            matrix: None,
            source_size: Some(j.source_size()),
            joint: Some(to_numbers(j.joint())),
            distortion: j.distortion().map(to_numbers),
            max_distortion: j.max_distortion().map(Number::Float),
        }
    }

    /// Reparses every number and fills in the sizes.
    pub fn normalized(&self) -> Result<Self> {
        Ok(match self.problem()? {
            Problem::Channel(c) => ProblemFile::from_channel(self.group.clone(), &c),
            Problem::Source(j) => ProblemFile::from_source(self.group.clone(), &j),
        })
    }
}

/// Rounds to the nine printed decimals.
pub fn round9(x: f64) -> f64 {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// A rate for records: a number rounded to 1e-9, or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bits(pub f64);

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(round9(self.0))
        }
    }
}

impl std::fmt::Display for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{:.9}", round9(self.0))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Bits,
    Nats,
}

impl Unit {
    pub fn scale(self, bits: f64) -> f64 {
        match self {
            Unit::Bits => bits,
            Unit::Nats => bits * std::f64::consts::LN_2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightEntry {
    pub q: u64,
    pub s: u32,
    pub w: Bits,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaRow {
    pub theta: Vec<u32>,
    pub omega: Bits,
    pub info: Bits,
    pub ratio: Bits,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridCheck {
    pub step: f64,
    pub points: usize,
    pub grid_value: Bits,
    /// Solver minus grid, signed in the optimization direction.
    pub gap: Bits,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedFormCheck {
    pub value: Bits,
    pub difference: Bits,
}

/// Output of `capacity` and `rd`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRecord {
    pub command: String,
    pub input: String,
    pub group: String,
    pub unit: Unit,
    pub rate: Bits,
    pub optimal_w: Vec<WeightEntry>,
    pub critical_thetas: Vec<String>,
    pub per_theta: Vec<ThetaRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedFormCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_check: Option<GridCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl ResultRecord {
    pub fn from_rate<T: Scalar>(
        command: &str,
        input: &str,
        spec: &GroupSpec,
        result: &RateResult<T>,
        unit: Unit,
    ) -> Self {
        let ext = |x: &Extended<T>| Bits(unit.scale(x.to_f64()));
        ResultRecord {
            command: command.to_string(),
            input: input.to_string(),
            group: spec.canonical_form(),
            unit,
            rate: ext(&result.value),
            optimal_w: spec
                .s_index()
                .iter()
                .zip(result.optimal_w.values())
                .map(|(&(q, s), &w)| WeightEntry { q, s, w: Bits(w) })
                .collect(),
            critical_thetas: result
                .critical_thetas
                .iter()
                .map(|t| t.to_string())
                .collect(),
            per_theta: result
                .per_theta_terms
                .iter()
                .map(|r| ThetaRow {
                    theta: r.theta.values().to_vec(),
                    omega: Bits(r.omega.lower()),
                    info: Bits(unit.scale(r.info)),
                    ratio: ext(&r.ratio),
                })
                .collect(),
            closed_form: None,
            grid_check: None,
            diagnostic: result.diagnostic.clone(),
            timing_ms: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    /// Human-readable rendering with the same rounded values as the JSON.
    pub fn to_text(&self) -> String {
        let unit = match self.unit {
            Unit::Bits => "bits",
            Unit::Nats => "nats",
        };
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        out.push_str(&format!("input: {}\n", self.input));
        out.push_str(&format!("group: {}\n", self.group));
        out.push_str(&format!("rate: {} {unit}\n", self.rate));
        let w: Vec<String> = self
            .optimal_w
            .iter()
            .map(|e| format!("w({},{})={}", e.q, e.s, e.w))
            .collect();
        out.push_str(&format!("optimal w: {}\n", w.join(" ")));
        out.push_str(&format!(
            "critical theta: {}\n",
            self.critical_thetas.join(" ")
        ));
        out.push_str(&format!(
            "{:<12} {:>14} {:>14} {:>14}\n",
            "theta", "omega", "info", "ratio"
        ));
        for r in &self.per_theta {
            out.push_str(&format!(
                "{:<12} {:>14} {:>14} {:>14}\n",
                theta_label(&r.theta),
                r.omega.to_string(),
                r.info.to_string(),
                r.ratio.to_string()
            ));
        }
        if let Some(c) = &self.closed_form {
            out.push_str(&format!(
                "closed form: {} (difference {})\n",
                c.value, c.difference
            ));
        }
        if let Some(g) = &self.grid_check {
            out.push_str(&format!(
                "grid check: step {} over {} points, grid value {}, gap {}\n",
                g.step, g.points, g.grid_value, g.gap
            ));
        }
        if let Some(d) = &self.diagnostic {
            out.push_str(&format!("diagnostic: {d}\n"));
        }
        if let Some(t) = self.timing_ms {
            out.push_str(&format!("timing: {t:.3} ms\n"));
        }
        out
    }
}

fn theta_label(t: &[u32]) -> String {
    if t.len() == 1 {
        t[0].to_string()
    } else {
        format!(
            "({})",
            t.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

/// Writes the per-θ table: one column per `(p, r)`, then omega, info_bits
/// and ratio_bits.
pub fn write_theta_csv<W: Write>(spec: &GroupSpec, rows: &[ThetaRow], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = spec
        .q_index()
        .iter()
        .map(|(p, r)| format!("theta_{p}_{r}"))
        .collect();
    header.extend(["omega", "info_bits", "ratio_bits"].map(String::from));
    w.write_record(&header).map_err(io)?;
    for r in rows {
        let mut rec: Vec<String> = r.theta.iter().map(|x| x.to_string()).collect();
        rec.push(r.omega.to_string());
        rec.push(r.info.to_string());
        rec.push(r.ratio.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(())
}

/// `ω_θ` as a ratio of linear forms, e.g. `(1·w(2,2) + 2·w(2,3)) / (2·w(2,2) + 3·w(2,3))`.
/// Each weight carries a `log q` factor when several primes are supported.
pub fn omega_formula(spec: &GroupSpec, support: Support, theta: &ThetaVector) -> String {
    let multi = support
        .pairs(spec)
        .iter()
        .map(|&(q, _)| q)
        .collect::<std::collections::BTreeSet<_>>()
        .len()
        > 1;
    let coeffs = omega_coefficients(spec, theta);
    let term = |c: u32, i: usize| {
        let (q, s) = spec.s_index()[i];
        let log = if multi {
            format!("·log{q}")
        } else {
            String::new()
        };
        format!("{c}·w({q},{s}){log}")
    };
    let form = |cs: Vec<(u32, usize)>| {
        let parts: Vec<String> = cs
            .into_iter()
            .filter(|(c, _)| *c > 0)
            .map(|(c, i)| term(c, i))
            .collect();
        if parts.is_empty() {
            "0".to_string()
        } else {
            format!("({})", parts.join(" + "))
        }
    };
    let num = form(support.positions().map(|i| (coeffs[i], i)).collect());
    let den = form(
        support
            .positions()
            .map(|i| (spec.s_index()[i].1, i))
            .collect(),
    );
    format!("{num} / {den}")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaTableRow {
    pub theta: Vec<u32>,
    pub omega_formula: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<Bits>,
}

/// Output of `theta-table`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaTableRecord {
    pub command: String,
    pub group: String,
    pub support: Vec<(u64, u32)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<WeightEntry>>,
    pub rows: Vec<ThetaTableRow>,
}

impl ThetaTableRecord {
    /// `weights`, when given, follow [`GroupSpec::s_index`] and must vanish
    /// off the support.
    pub fn build(spec: &GroupSpec, support: Support, weights: Option<&[f64]>) -> Result<Self> {
        let w = match weights {
            Some(w) => {
                let wv = crate::rate::WeightVector::new(spec, w.to_vec())?;
                if wv.support() != support {
                    return invalid("weights must be positive exactly on the support");
                }
                Some(wv)
            }
            None => None,
        };
        let mut rows = Vec::new();
        for theta in enumerate_theta(spec, support)? {
            let omega = match &w {
                Some(wv) => Some(Bits(crate::rate::omega(spec, wv, &theta)?)),
                None => None,
            };
            rows.push(ThetaTableRow {
                theta: theta.values().to_vec(),
                omega_formula: omega_formula(spec, support, &theta),
                omega,
            });
        }
        Ok(ThetaTableRecord {
            command: "theta-table".into(),
            group: spec.canonical_form(),
            support: support.pairs(spec),
            weights: w.map(|wv| {
                spec.s_index()
                    .iter()
                    .zip(wv.values())
                    .map(|(&(q, s), &w)| WeightEntry { q, s, w: Bits(w) })
                    .collect()
            }),
            rows,
        })
    }
}

/// Output of `group-info`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupInfoRecord {
    pub command: String,
    pub input: Vec<u64>,
    pub canonical_form: String,
    pub order: u64,
    /// `𝒢(G)` as `(p, r, m)`.
    pub rings: Vec<(u64, u32, u32)>,
    /// `𝒮(G)` as `(q, s)`, the order used for weights and counts.
    pub s_index: Vec<(u64, u32)>,
    /// `𝒬(G)` as `(p, r)`, the order used for theta components.
    pub q_index: Vec<(u64, u32)>,
    pub r_max: Vec<(u64, u32)>,
}

impl GroupInfoRecord {
    pub fn build(orders: &[u64]) -> Result<Self> {
        let spec = decompose(orders)?.spec;
        Ok(GroupInfoRecord {
            command: "group-info".into(),
            input: orders.to_vec(),
            canonical_form: spec.canonical_form(),
            order: spec.order(),
            rings: spec.rings().iter().map(|g| (g.p, g.r, g.m)).collect(),
            s_index: spec.s_index().to_vec(),
            q_index: spec.q_index().to_vec(),
            r_max: spec
                .primes()
                .iter()
                .map(|&p| (p, spec.r_max(p).expect("prime of G")))
                .collect(),
        })
    }

    pub fn to_text(&self) -> String {
        let pairs = |v: &[(u64, u32)]| {
            v.iter()
                .map(|(a, b)| format!("({a},{b})"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let rings: Vec<String> = self
            .rings
            .iter()
            .map(|(p, r, m)| format!("({p},{r},{m})"))
            .collect();
        let rq: Vec<String> = self
            .r_max
            .iter()
            .map(|(q, r)| format!("r_{q}={r}"))
            .collect();
        format!(
            "group: {}\norder: {}\nG(G) = {{{}}}\nS(G) = {{{}}}\nQ(G) = {{{}}}\n{}\n",
            self.canonical_form,
            self.order,
            rings.join(","),
            pairs(&self.s_index),
            pairs(&self.q_index),
            rq.join(" ")
        )
    }
}

/// Output of `verify-ensemble`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyRecord {
    pub command: String,
    pub group: String,
    pub counts: Vec<u32>,
    pub n: usize,
    pub seed: u64,
    pub checks: Vec<crate::ensemble::LemmaCheck>,
    pub passed: bool,
}

impl VerifyRecord {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "group: {}\ncounts: {:?}\nn: {}\nseed: {}\n",
            self.group, self.counts, self.n, self.seed
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{} {} ({} cases, {} violations)\n",
                if c.passed() { "PASS" } else { "FAIL" },
                c.lemma,
                c.cases,
                c.violations
            ));
            if let Some(d) = &c.detail {
                out.push_str(&format!("  first violation: {d}\n"));
            }
        }
        out
    }
}

/// Output of `simulate`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulateRecord {
    pub command: String,
    pub input: String,
    pub group: String,
    pub counts: Vec<u32>,
    pub n: usize,
    pub seed: u64,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: Bits,
}

impl SimulateRecord {
    pub fn to_text(&self) -> String {
        format!(
            "input: {}\ngroup: {}\ncounts: {:?}\nn: {}\nseed: {}\ntrials: {}\nerrors: {}\nerror rate: {}\n",
            self.input, self.group, self.counts, self.n, self.seed, self.trials, self.errors, self.error_rate
        )
    }
}
