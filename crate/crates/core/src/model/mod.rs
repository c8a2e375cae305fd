//! Finite hidden-variable models and the observable quantities derived from them.

mod json;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of tuples in the Cartesian product of lists with the given lengths.
pub fn tuple_count(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Row-major decode: the last party varies fastest.
pub fn decode_index(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub fn encode_index(tuple: &[usize], dims: &[usize]) -> usize {
    tuple.iter().zip(dims).fold(0, |acc, (&t, &d)| acc * d + t)
}

/// Outcome list `[+1, -1]`.
pub fn pm_outcomes<T: Scalar>() -> Vec<T> {
    vec![T::one(), -T::one()]
}

/// A finite N-party hidden-variable model.
///
/// `joint[s][l][o]` is the probability of outcome tuple `o` given setting
/// tuple `s` and hidden variable `l`; `prior[s][l]` is the probability of `l`
/// given `s`. Tuples are indexed row-major over the per-party lists.
#[derive(Clone, Debug, PartialEq)]
pub struct NPartyModel<T> {
    settings: Vec<Vec<String>>,
    outcomes: Vec<Vec<T>>,
    lambdas: Vec<String>,
    joint: Vec<Vec<Vec<T>>>,
    prior: Vec<Vec<T>>,
    metadata: Option<serde_json::Value>,
    setting_dims: Vec<usize>,
    outcome_dims: Vec<usize>,
}

fn check_labels(kind: &str, labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::Structure(format!("{kind} list is empty")));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::Structure(format!("duplicate {kind} label `{l}`")));
        }
    }
    Ok(())
}

impl<T: Scalar> NPartyModel<T> {
    pub fn new(
        settings: Vec<Vec<String>>,
        outcomes: Vec<Vec<T>>,
        lambdas: Vec<String>,
        joint: Vec<Vec<Vec<T>>>,
        prior: Vec<Vec<T>>,
    ) -> Result<Self> {
        if settings.is_empty() {
            return Err(Error::Structure("model needs at least one party".into()));
        }
        if outcomes.len() != settings.len() {
            return Err(Error::Structure(format!(
                "{} setting lists but {} outcome lists",
                settings.len(),
                outcomes.len()
            )));
        }
        for s in &settings {
            check_labels("setting", s)?;
        }
        for (p, o) in outcomes.iter().enumerate() {
            if o.is_empty() {
                return Err(Error::Structure(format!("party {p} has no outcomes")));
            }
        }
        check_labels("lambda", &lambdas)?;

        let setting_dims: Vec<usize> = settings.iter().map(Vec::len).collect();
        let outcome_dims: Vec<usize> = outcomes.iter().map(Vec::len).collect();
        let ns = tuple_count(&setting_dims);
        let no = tuple_count(&outcome_dims);
        let nl = lambdas.len();

        if joint.len() != ns {
            return Err(Error::Structure(format!(
                "joint has {} setting rows, expected {ns}",
                joint.len()
            )));
        }
        for (s, rows) in joint.iter().enumerate() {
            if rows.len() != nl {
                return Err(Error::Structure(format!(
                    "joint[{s}] has {} lambda rows, expected {nl}",
                    rows.len()
                )));
            }
            for (l, row) in rows.iter().enumerate() {
                if row.len() != no {
                    return Err(Error::Structure(format!(
                        "joint[{s}][{l}] has {} entries, expected {no}",
                        row.len()
                    )));
                }
            }
        }
        if prior.len() != ns {
            return Err(Error::Structure(format!(
                "prior has {} setting rows, expected {ns}",
                prior.len()
            )));
        }
        for (s, row) in prior.iter().enumerate() {
            if row.len() != nl {
                return Err(Error::Structure(format!(
                    "prior[{s}] has {} entries, expected {nl}",
                    row.len()
                )));
            }
        }

        Ok(Self {
            settings,
            outcomes,
            lambdas,
            joint,
            prior,
            metadata: None,
            setting_dims,
            outcome_dims,
        })
    }

    pub fn with_metadata(mut self, metadata: serde_json::Value) -> Self {
        self.metadata = Some(metadata);
        self
    }

    pub fn metadata(&self) -> Option<&serde_json::Value> {
        self.metadata.as_ref()
    }

    pub fn parties(&self) -> usize {
        self.settings.len()
    }

    pub fn settings(&self) -> &[Vec<String>] {
        &self.settings
    }

    pub fn outcomes(&self) -> &[Vec<T>] {
        &self.outcomes
    }

    pub fn lambdas(&self) -> &[String] {
        &self.lambdas
    }

    pub fn setting_dims(&self) -> &[usize] {
        &self.setting_dims
    }

    pub fn outcome_dims(&self) -> &[usize] {
        &self.outcome_dims
    }

    pub fn num_setting_tuples(&self) -> usize {
        self.joint.len()
    }

    pub fn num_outcome_tuples(&self) -> usize {
        tuple_count(&self.outcome_dims)
    }

    pub fn num_lambdas(&self) -> usize {
        self.lambdas.len()
    }

    /// Joint outcome distribution for setting tuple `s` and hidden variable `l`.
    pub fn joint(&self, s: usize, l: usize) -> &[T] {
        &self.joint[s][l]
    }

    pub fn joint_table(&self) -> &[Vec<Vec<T>>] {
        &self.joint
    }

    pub fn prior(&self, s: usize) -> &[T] {
        &self.prior[s]
    }

    pub fn prior_table(&self) -> &[Vec<T>] {
        &self.prior
    }

    pub fn setting_tuple(&self, s: usize) -> Vec<usize> {
        decode_index(s, &self.setting_dims)
    }

    pub fn outcome_tuple(&self, o: usize) -> Vec<usize> {
        decode_index(o, &self.outcome_dims)
    }

    pub fn setting_index(&self, tuple: &[usize]) -> Result<usize> {
        if tuple.len() != self.parties() || tuple.iter().zip(&self.setting_dims).any(|(t, d)| t >= d) {
            return Err(Error::Unknown {
                kind: "setting tuple",
                name: format!("{tuple:?}"),
            });
        }
        Ok(encode_index(tuple, &self.setting_dims))
    }

    pub fn setting_index_by_labels(&self, labels: &[&str]) -> Result<usize> {
        if labels.len() != self.parties() {
            return Err(Error::Unknown {
                kind: "setting tuple",
                name: labels.join(","),
            });
        }
        let mut tuple = Vec::with_capacity(labels.len());
        for (p, label) in labels.iter().enumerate() {
            let i = self.settings[p]
                .iter()
                .position(|s| s == label)
                .ok_or_else(|| Error::Unknown {
                    kind: "setting",
                    name: label.to_string(),
                })?;
            tuple.push(i);
        }
        self.setting_index(&tuple)
    }

    pub fn lambda_index(&self, label: &str) -> Result<usize> {
        self.lambdas
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Unknown {
                kind: "lambda",
                name: label.to_string(),
            })
    }

    /// Single-party marginals of `joint(s, l)` for every party.
    pub fn marginals(&self, s: usize, l: usize) -> Vec<Vec<T>> {
        let mut out: Vec<Vec<T>> = self.outcome_dims.iter().map(|&d| vec![T::zero(); d]).collect();
        for (o, p) in self.joint[s][l].iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let tuple = decode_index(o, &self.outcome_dims);
            for (party, &a) in tuple.iter().enumerate() {
                out[party][a] = out[party][a].clone() + p.clone();
            }
        }
        out
    }

    /// Converts every probability and outcome value.
    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> NPartyModel<U> {
        NPartyModel {
            settings: self.settings.clone(),
            outcomes: self.outcomes.iter().map(|o| o.iter().map(&f).collect()).collect(),
            lambdas: self.lambdas.clone(),
            joint: self
                .joint
                .iter()
                .map(|rows| rows.iter().map(|r| r.iter().map(&f).collect()).collect())
                .collect(),
            prior: self.prior.iter().map(|r| r.iter().map(&f).collect()).collect(),
            metadata: self.metadata.clone(),
            setting_dims: self.setting_dims.clone(),
            outcome_dims: self.outcome_dims.clone(),
        }
    }

    pub fn to_f64(&self) -> NPartyModel<f64> {
        self.map_scalar(|x| x.to_f64_lossy())
    }

    pub fn validate(&self, tol: &T) -> ValidationReport {
        validate_model(self, tol)
    }

    /// Validates with the scalar's default tolerance.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate(&T::default_tolerance());
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidModel(Box::new(report)))
        }
    }

    fn setting_label(&self, s: usize) -> String {
        let t = self.setting_tuple(s);
        t.iter()
            .enumerate()
            .map(|(p, &i)| self.settings[p][i].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    fn outcome_label(&self, o: usize) -> String {
        let t = self.outcome_tuple(o);
        t.iter()
            .enumerate()
            .map(|(p, &i)| format!("{}", self.outcomes[p][i].to_f64_lossy()))
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Negative,
    AboveOne,
    JointNotNormalized,
    PriorNotNormalized,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub setting: usize,
    pub lambda: Option<usize>,
    pub outcome: Option<usize>,
    pub location: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub tolerance: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        match self.violations.first() {
            None => "no violations".into(),
            Some(v) => format!(
                "{} violation(s), first: {:?} at {} (value {})",
                self.violations.len(),
                v.kind,
                v.location,
                v.value
            ),
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "{:?} at {}: {}", v.kind, v.location, v.value)?;
        }
        Ok(())
    }
}

/// Checks positivity, upper bounds and normalization of both tables.
pub fn validate_model<T: Scalar>(model: &NPartyModel<T>, tol: &T) -> ValidationReport {
    let mut violations = Vec::new();
    let one = T::one();
    let mut entry = |kind, s, l: Option<usize>, o: Option<usize>, value: &T, location: String| {
        violations.push(Violation {
            kind,
            setting: s,
            lambda: l,
            outcome: o,
            location,
            value: value.to_f64_lossy(),
        });
    };

    for s in 0..model.num_setting_tuples() {
        let sl = model.setting_label(s);
        for l in 0..model.num_lambdas() {
            let row = model.joint(s, l);
            let mut total = T::zero();
            for (o, p) in row.iter().enumerate() {
                let loc = || format!("joint[{sl}][{}][{}]", model.lambdas[l], model.outcome_label(o));
                if *p < -tol.clone() {
                    entry(ViolationKind::Negative, s, Some(l), Some(o), p, loc());
                } else if *p > one.clone() + tol.clone() {
                    entry(ViolationKind::AboveOne, s, Some(l), Some(o), p, loc());
                }
                total = total + p.clone();
            }
            if (total.clone() - one.clone()).abs() > *tol {
                let loc = format!("joint[{sl}][{}]", model.lambdas[l]);
                entry(ViolationKind::JointNotNormalized, s, Some(l), None, &total, loc);
            }
        }
        let mut total = T::zero();
        for (l, p) in model.prior(s).iter().enumerate() {
            let loc = || format!("prior[{sl}][{}]", model.lambdas[l]);
            if *p < -tol.clone() {
                entry(ViolationKind::Negative, s, Some(l), None, p, loc());
            } else if *p > one.clone() + tol.clone() {
                entry(ViolationKind::AboveOne, s, Some(l), None, p, loc());
            }
            total = total + p.clone();
        }
        if (total.clone() - one.clone()).abs() > *tol {
            entry(ViolationKind::PriorNotNormalized, s, None, None, &total, format!("prior[{sl}]"));
        }
    }

    ValidationReport {
        tolerance: tol.to_f64_lossy(),
        violations,
    }
}

/// Observed distribution p(outcomes | settings).
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTable<T> {
    pub settings: Vec<Vec<String>>,
    pub outcomes: Vec<Vec<T>>,
    /// `table[s][o]`
    pub table: Vec<Vec<T>>,
}

impl<T: Scalar> CorrelationTable<T> {
    pub fn setting_dims(&self) -> Vec<usize> {
        self.settings.iter().map(Vec::len).collect()
    }

    pub fn outcome_dims(&self) -> Vec<usize> {
        self.outcomes.iter().map(Vec::len).collect()
    }

    pub fn row(&self, s: usize) -> &[T] {
        &self.table[s]
    }

    pub fn correlator(&self, setting_tuple: &[usize]) -> Result<T> {
        correlator(self, setting_tuple)
    }

    pub fn to_f64(&self) -> CorrelationTable<f64> {
        CorrelationTable {
            settings: self.settings.clone(),
            outcomes: self
                .outcomes
                .iter()
                .map(|o| o.iter().map(Scalar::to_f64_lossy).collect())
                .collect(),
            table: self
                .table
                .iter()
                .map(|r| r.iter().map(Scalar::to_f64_lossy).collect())
                .collect(),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "settings": self.settings,
            "outcomes": self.outcomes.iter().map(|o| o.iter().map(Scalar::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "table": self.table.iter().map(|r| r.iter().map(Scalar::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// Sums `joint * prior` over λ. Rejects models that fail validation.
pub fn observed_correlations<T: Scalar>(model: &NPartyModel<T>) -> Result<CorrelationTable<T>> {
    model.ensure_valid()?;
    let no = model.num_outcome_tuples();
    let table = (0..model.num_setting_tuples())
        .map(|s| {
            let mut row = vec![T::zero(); no];
            for (l, w) in model.prior(s).iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                for (acc, p) in row.iter_mut().zip(model.joint(s, l)) {
                    *acc = acc.clone() + w.clone() * p.clone();
                }
            }
            row
        })
        .collect();
    Ok(CorrelationTable {
        settings: model.settings().to_vec(),
        outcomes: model.outcomes().to_vec(),
        table,
    })
}

fn check_pm<T: Scalar>(outcomes: &[Vec<T>]) -> Result<()> {
    let one = T::one();
    for (p, o) in outcomes.iter().enumerate() {
        if o.iter().any(|v| v.abs() != one) {
            return Err(Error::Unsupported(format!(
                "correlators need +1/-1 outcomes, party {p} has another alphabet"
            )));
        }
    }
    Ok(())
}

/// Average product of the outcomes of a ±1-valued distribution row.
pub fn correlator_of_row<T: Scalar>(outcomes: &[Vec<T>], row: &[T]) -> Result<T> {
    check_pm(outcomes)?;
    let dims: Vec<usize> = outcomes.iter().map(Vec::len).collect();
    let mut acc = T::zero();
    for (o, p) in row.iter().enumerate() {
        let t = decode_index(o, &dims);
        let sign = t
            .iter()
            .enumerate()
            .fold(T::one(), |prod, (party, &a)| prod * outcomes[party][a].clone());
        acc = acc + sign * p.clone();
    }
    Ok(acc)
}

pub fn correlator<T: Scalar>(table: &CorrelationTable<T>, setting_tuple: &[usize]) -> Result<T> {
    let dims = table.setting_dims();
    if setting_tuple.len() != dims.len() || setting_tuple.iter().zip(&dims).any(|(t, d)| t >= d) {
        return Err(Error::Unknown {
            kind: "setting tuple",
            name: format!("{setting_tuple:?}"),
        });
    }
    let s = encode_index(setting_tuple, &dims);
    correlator_of_row(&table.outcomes, &table.table[s])
}

/// ⟨X₀Y₀⟩ + ⟨X₀Y₁⟩ + ⟨X₁Y₀⟩ − ⟨X₁Y₁⟩ for a two-party, two-setting table.
pub fn chsh_value<T: Scalar>(table: &CorrelationTable<T>) -> Result<T> {
    if table.settings.len() != 2 || table.settings.iter().any(|s| s.len() != 2) {
        return Err(Error::Unsupported("CHSH needs two parties with two settings each".into()));
    }
    let e = |j, k| correlator(table, &[j, k]);
    Ok(e(0, 0)? + e(0, 1)? + e(1, 0)? - e(1, 1)?)
}

/// Distribution of one party's outcome given a setting tuple and λ.
pub fn underlying_marginal<T: Scalar>(
    model: &NPartyModel<T>,
    party: usize,
    setting: usize,
    lambda: usize,
) -> Result<Vec<T>> {
    if party >= model.parties() {
        return Err(Error::Unknown {
            kind: "party",
            name: party.to_string(),
        });
    }
    if setting >= model.num_setting_tuples() {
        return Err(Error::Unknown {
            kind: "setting tuple",
            name: setting.to_string(),
        });
    }
    if lambda >= model.num_lambdas() {
        return Err(Error::Unknown {
            kind: "lambda",
            name: lambda.to_string(),
        });
    }
    Ok(model.marginals(setting, lambda).swap_remove(party))
}

/// Label-based variant of [`underlying_marginal`].
pub fn underlying_marginal_by_label<T: Scalar>(
    model: &NPartyModel<T>,
    party: usize,
    settings: &[&str],
    lambda: &str,
) -> Result<Vec<T>> {
    let s = model.setting_index_by_labels(settings)?;
    let l = model.lambda_index(lambda)?;
    underlying_marginal(model, party, s, l)
}

/// Binary bipartite distribution written as (c, m−c, n−c, 1+c−m−n).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CmnTriple<T> {
    /// Probability of (+1, +1).
    pub c: T,
    /// Probability that the first party gets +1.
    pub m: T,
    /// Probability that the second party gets +1.
    pub n: T,
}

impl<T: Scalar> CmnTriple<T> {
    pub fn new(c: T, m: T, n: T) -> Self {
        Self { c, m, n }
    }

    /// Ordering (+,+), (+,−), (−,+), (−,−).
    pub fn to_distribution(&self) -> [T; 4] {
        let (c, m, n) = (self.c.clone(), self.m.clone(), self.n.clone());
        [
            c.clone(),
            m.clone() - c.clone(),
            n.clone() - c.clone(),
            T::one() + c - m - n,
        ]
    }

    pub fn c_range(&self) -> (T, T) {
        c_range(&self.m, &self.n)
    }

    pub fn is_valid(&self, tol: &T) -> bool {
        let (lo, hi) = self.c_range();
        self.c.clone() >= lo - tol.clone() && self.c.clone() <= hi + tol.clone()
    }

    /// ⟨XY⟩ = 1 + 4c − 2(m + n).
    pub fn correlator(&self) -> T {
        T::one() + T::int(4) * self.c.clone() - T::int(2) * (self.m.clone() + self.n.clone())
    }
}

/// Admissible interval [max(0, m+n−1), min(m, n)] for c.
pub fn c_range<T: Scalar>(m: &T, n: &T) -> (T, T) {
    let lo = m.clone() + n.clone() - T::one();
    let lo = if lo < T::zero() { T::zero() } else { lo };
    let hi = if m < n { m.clone() } else { n.clone() };
    (lo, hi)
}

pub fn decompose_cmn<T: Scalar>(dist: &[T]) -> Result<CmnTriple<T>> {
    if dist.len() != 4 {
        return Err(Error::Structure(format!(
            "binary bipartite distribution needs 4 entries, got {}",
            dist.len()
        )));
    }
    let tol = T::default_tolerance();
    let total = dist.iter().cloned().fold(T::zero(), |a, b| a + b);
    if dist.iter().any(|p| *p < -tol.clone()) || (total - T::one()).abs() > tol {
        return Err(Error::out_of_range(
            "distribution",
            format!("{dist:?} is not in the probability simplex"),
        ));
    }
    let c = dist[0].clone();
    let m = dist[0].clone() + dist[1].clone();
    let n = dist[0].clone() + dist[2].clone();
    Ok(CmnTriple { c, m, n })
}
