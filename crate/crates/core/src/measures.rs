//! Distance-based relaxation measures of a finite model.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{decode_index, encode_index, NPartyModel};
use crate::scalar::{smax, Scalar};

/// Tracks a supremum over all cells and over cells carrying prior weight.
struct Sup<T> {
    all: T,
    weighted: T,
}

impl<T: Scalar> Sup<T> {
    fn new() -> Self {
        Self {
            all: T::zero(),
            weighted: T::zero(),
        }
    }

    fn push(&mut self, value: T, has_weight: bool) {
        if has_weight {
            self.weighted = smax(self.weighted.clone(), value.clone());
        }
        self.all = smax(self.all.clone(), value);
    }

    /// True when the supremum is reached only on zero-prior cells.
    fn zero_prior_only(&self) -> bool {
        self.all > self.weighted.clone() + T::default_tolerance()
    }
}

fn min_pq<T: Scalar>(p: &T) -> T {
    let q = T::one() - p.clone();
    if q < *p {
        q
    } else {
        p.clone()
    }
}

fn indeterminism_sup<T: Scalar>(model: &NPartyModel<T>) -> Sup<T> {
    let mut sup = Sup::new();
    for s in 0..model.num_setting_tuples() {
        for l in 0..model.num_lambdas() {
            let weighted = !model.prior(s)[l].is_zero();
            for marginal in model.marginals(s, l) {
                for p in &marginal {
                    sup.push(min_pq(p), weighted);
                }
            }
        }
    }
    sup
}

/// Smallest I with every underlying marginal in [0, I] ∪ [1 − I, 1].
pub fn indeterminism<T: Scalar>(model: &NPartyModel<T>) -> Result<T> {
    model.ensure_valid()?;
    Ok(indeterminism_sup(model).all)
}

/// Σ_ab |p(a,b) − p(a)p(b)| of a bipartite joint row.
pub fn row_outcome_dependence<T: Scalar>(row: &[T], na: usize, nb: usize) -> T {
    let mut pa = vec![T::zero(); na];
    let mut pb = vec![T::zero(); nb];
    for a in 0..na {
        for b in 0..nb {
            let p = &row[a * nb + b];
            pa[a] = pa[a].clone() + p.clone();
            pb[b] = pb[b].clone() + p.clone();
        }
    }
    let mut total = T::zero();
    for a in 0..na {
        for b in 0..nb {
            let d = row[a * nb + b].clone() - pa[a].clone() * pb[b].clone();
            total = total + d.abs();
        }
    }
    total
}

fn require_bipartite<T: Scalar>(model: &NPartyModel<T>, what: &str) -> Result<()> {
    if model.parties() != 2 {
        return Err(Error::Unsupported(format!(
            "{what} is defined for two parties, model has {}",
            model.parties()
        )));
    }
    Ok(())
}

fn outcome_dependence_sup<T: Scalar>(model: &NPartyModel<T>) -> Sup<T> {
    let (na, nb) = (model.outcome_dims()[0], model.outcome_dims()[1]);
    let mut sup = Sup::new();
    for s in 0..model.num_setting_tuples() {
        for l in 0..model.num_lambdas() {
            let weighted = !model.prior(s)[l].is_zero();
            sup.push(row_outcome_dependence(model.joint(s, l), na, nb), weighted);
        }
    }
    sup
}

/// Largest variational distance between an underlying joint and the product
/// of its marginals. Two parties only.
pub fn outcome_dependence<T: Scalar>(model: &NPartyModel<T>) -> Result<T> {
    require_bipartite(model, "outcome dependence")?;
    model.ensure_valid()?;
    Ok(outcome_dependence_sup(model).all)
}

/// `matrix[sender][receiver]`: largest shift of the receiver's underlying
/// marginal when only the sender's setting changes.
fn signaling_sups<T: Scalar>(model: &NPartyModel<T>) -> Vec<Vec<Sup<T>>> {
    let n = model.parties();
    let dims = model.setting_dims();
    let mut out: Vec<Vec<Sup<T>>> = (0..n).map(|_| (0..n).map(|_| Sup::new()).collect()).collect();
    let marginals: Vec<Vec<Vec<Vec<T>>>> = (0..model.num_setting_tuples())
        .map(|s| (0..model.num_lambdas()).map(|l| model.marginals(s, l)).collect())
        .collect();
    for s in 0..model.num_setting_tuples() {
        let tuple = decode_index(s, dims);
        for sender in 0..n {
            for alt in tuple[sender] + 1..dims[sender] {
                let mut other = tuple.clone();
                other[sender] = alt;
                let s2 = encode_index(&other, dims);
                for l in 0..model.num_lambdas() {
                    let weighted = !model.prior(s)[l].is_zero() || !model.prior(s2)[l].is_zero();
                    for (receiver, row) in out[sender].iter_mut().enumerate() {
                        if receiver == sender {
                            continue;
                        }
                        let shift = marginals[s][l][receiver]
                            .iter()
                            .zip(&marginals[s2][l][receiver])
                            .map(|(p, q)| (p.clone() - q.clone()).abs())
                            .fold(T::zero(), smax);
                        row.push(shift, weighted);
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Signaling<T> {
    /// First party's setting moving the second party's marginals.
    pub s_1to2: T,
    pub s_2to1: T,
    /// Maximum over all ordered party pairs.
    pub s: T,
    /// `matrix[sender][receiver]`
    pub matrix: Vec<Vec<T>>,
}

fn signaling_from_sups<T: Scalar>(sups: &[Vec<Sup<T>>]) -> Signaling<T> {
    let matrix: Vec<Vec<T>> = sups
        .iter()
        .map(|row| row.iter().map(|s| s.all.clone()).collect())
        .collect();
    let s = matrix.iter().flatten().cloned().fold(T::zero(), smax);
    let get = |i: usize, j: usize| matrix.get(i).and_then(|r| r.get(j)).cloned().unwrap_or_else(T::zero);
    Signaling {
        s_1to2: get(0, 1),
        s_2to1: get(1, 0),
        s,
        matrix,
    }
}

pub fn signaling<T: Scalar>(model: &NPartyModel<T>) -> Result<Signaling<T>> {
    model.ensure_valid()?;
    Ok(signaling_from_sups(&signaling_sups(model)))
}

/// Largest variational distance between any two rows of a prior table.
pub fn prior_distance<T: Scalar>(rows: &[Vec<T>]) -> T {
    let mut best = T::zero();
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            let d = a
                .iter()
                .zip(b)
                .fold(T::zero(), |acc, (p, q)| acc + (p.clone() - q.clone()).abs());
            best = smax(best, d);
        }
    }
    best
}

pub fn measurement_dependence<T: Scalar>(model: &NPartyModel<T>) -> Result<T> {
    model.ensure_valid()?;
    Ok(prior_distance(model.prior_table()))
}

/// F = 1 − M/2.
pub fn free_will_fraction<T: Scalar>(m: &T) -> Result<T> {
    if *m < T::zero() || *m > T::int(2) {
        return Err(Error::out_of_range("M", format!("{m:?} is outside [0, 2]")));
    }
    Ok(T::one() - m.clone() / T::int(2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureReport<T> {
    pub i: T,
    /// Outcome dependence, two-party models only.
    pub o: Option<T>,
    pub s_1to2: T,
    pub s_2to1: T,
    pub s: T,
    pub m: T,
    pub f: T,
    /// Measures whose supremum is attained only on zero-prior λ.
    pub zero_prior_flags: Vec<String>,
}

pub fn measure_report<T: Scalar>(model: &NPartyModel<T>) -> Result<MeasureReport<T>> {
    model.ensure_valid()?;
    let mut flags = Vec::new();

    let isup = indeterminism_sup(model);
    if isup.zero_prior_only() {
        flags.push("I".to_string());
    }
    let o = if model.parties() == 2 {
        let osup = outcome_dependence_sup(model);
        if osup.zero_prior_only() {
            flags.push("O".to_string());
        }
        Some(osup.all)
    } else {
        None
    };
    let ssups = signaling_sups(model);
    for (i, row) in ssups.iter().enumerate() {
        for (j, sup) in row.iter().enumerate() {
            if i != j && sup.zero_prior_only() {
                flags.push(format!("S_{}to{}", i + 1, j + 1));
            }
        }
    }
    let sig = signaling_from_sups(&ssups);
    let m = prior_distance(model.prior_table());
    let f = free_will_fraction(&m)?;
    Ok(MeasureReport {
        i: isup.all,
        o,
        s_1to2: sig.s_1to2,
        s_2to1: sig.s_2to1,
        s: sig.s,
        m,
        f,
        zero_prior_flags: flags,
    })
}

impl<T: Scalar> MeasureReport<T> {
    pub fn to_f64(&self) -> MeasureReport<f64> {
        MeasureReport {
            i: self.i.to_f64_lossy(),
            o: self.o.as_ref().map(Scalar::to_f64_lossy),
            s_1to2: self.s_1to2.to_f64_lossy(),
            s_2to1: self.s_2to1.to_f64_lossy(),
            s: self.s.to_f64_lossy(),
            m: self.m.to_f64_lossy(),
            f: self.f.to_f64_lossy(),
            zero_prior_flags: self.zero_prior_flags.clone(),
        }
    }

    pub fn to_json_value(&self) -> Value {
        let mut v = json!({
            "I": self.i.to_json(),
            "O": self.o.as_ref().map(Scalar::to_json),
            "S_1to2": self.s_1to2.to_json(),
            "S_2to1": self.s_2to1.to_json(),
            "S": self.s.to_json(),
            "M": self.m.to_json(),
            "F": self.f.to_json(),
        });
        if !self.zero_prior_flags.is_empty() {
            v["zero_prior_flags"] = json!(self.zero_prior_flags);
        }
        v
    }
}
