//! Conversion of outcome-independent bipartite models into deterministic
//! ones by splitting each λ into cells of two auxiliary uniform variables.
//!
//! For every λ, α and β are uniform on [0, 1). Party one outputs the k-th
//! outcome when α falls in the k-th interval of the cumulative marginal
//! p(a | x, y, λ), party two likewise with β. Refining [0, 1) at the union of
//! the breakpoints over every setting tuple turns this into finitely many
//! cells, each with a fixed outcome per setting tuple and prior weight equal
//! to the product of the cell widths.

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::measures::{indeterminism, measurement_dependence, outcome_dependence, signaling};
use crate::model::NPartyModel;
use crate::scalar::Scalar;

/// Outcome dependence at most `tol`.
pub fn is_outcome_independent<T: Scalar>(model: &NPartyModel<T>, tol: &T) -> Result<bool> {
    Ok(outcome_dependence(model)? <= *tol)
}

/// One cell λ̃ = (λ, α-cell, β-cell); both cells are half-open.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedLambda<T> {
    pub base: usize,
    pub alpha: (T, T),
    pub beta: (T, T),
}

impl<T: Scalar> AugmentedLambda<T> {
    pub fn weight(&self) -> T {
        (self.alpha.1.clone() - self.alpha.0.clone()) * (self.beta.1.clone() - self.beta.0.clone())
    }
}

/// Sorted cell boundaries of [0, 1), including both ends. Values closer
/// than the scalar's boundary epsilon collapse onto the earlier one.
fn breakpoints<T: Scalar>(cuts: Vec<T>) -> Vec<T> {
    let eps = T::boundary_epsilon();
    let mut cuts = cuts;
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite probabilities"));
    let mut out = vec![T::zero()];
    for c in cuts {
        let last = out.last().expect("nonempty").clone();
        if c > last.clone() + eps.clone() && c < T::one() - eps.clone() {
            out.push(c);
        }
    }
    out.push(T::one());
    out
}

/// Index of the cumulative interval of `marginal` containing `point`.
fn interval_of<T: Scalar>(marginal: &[T], point: &T) -> usize {
    let mut cum = T::zero();
    for (k, p) in marginal.iter().enumerate().take(marginal.len() - 1) {
        cum = cum + p.clone();
        if *point < cum {
            return k;
        }
    }
    marginal.len() - 1
}

fn cumulative_cuts<T: Scalar>(marginal: &[T]) -> impl Iterator<Item = T> + '_ {
    marginal[..marginal.len() - 1].iter().scan(T::zero(), |cum, p| {
        *cum = cum.clone() + p.clone();
        Some(cum.clone())
    })
}

fn require_bipartite<T: Scalar>(model: &NPartyModel<T>) -> Result<()> {
    if model.parties() != 2 {
        return Err(Error::Unsupported(format!(
            "the determinism transform needs two parties, model has {}",
            model.parties()
        )));
    }
    Ok(())
}

/// Cells of every λ, in λ order, α-major within each λ.
pub fn augmented_cells<T: Scalar>(model: &NPartyModel<T>) -> Result<Vec<AugmentedLambda<T>>> {
    require_bipartite(model)?;
    let mut cells = Vec::new();
    for l in 0..model.num_lambdas() {
        let mut alpha_cuts = Vec::new();
        let mut beta_cuts = Vec::new();
        for s in 0..model.num_setting_tuples() {
            let marg = model.marginals(s, l);
            alpha_cuts.extend(cumulative_cuts(&marg[0]));
            beta_cuts.extend(cumulative_cuts(&marg[1]));
        }
        let alpha = breakpoints(alpha_cuts);
        let beta = breakpoints(beta_cuts);
        for a in alpha.windows(2) {
            for b in beta.windows(2) {
                cells.push(AugmentedLambda {
                    base: l,
                    alpha: (a[0].clone(), a[1].clone()),
                    beta: (b[0].clone(), b[1].clone()),
                });
            }
        }
    }
    Ok(cells)
}

/// SHA-256 of the model's canonical JSON text.
pub fn model_hash<T: Scalar>(model: &NPartyModel<T>) -> String {
    let text = model.to_json_value().to_string();
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Deterministic model with the same observed correlations, prior
/// structure and signaling pattern as an outcome-independent input.
pub fn to_deterministic<T: Scalar>(model: &NPartyModel<T>) -> Result<NPartyModel<T>> {
    require_bipartite(model)?;
    let o = outcome_dependence(model)?;
    if o > T::default_tolerance() {
        return Err(Error::Unsupported(format!(
            "model is outcome dependent (O = {}); only outcome-independent models can be made deterministic",
            o.to_f64_lossy()
        )));
    }
    let cells = augmented_cells(model)?;
    let two = T::int(2);
    let nb = model.outcome_dims()[1];
    let no = model.num_outcome_tuples();
    let mut joint = Vec::with_capacity(model.num_setting_tuples());
    let mut prior = Vec::with_capacity(model.num_setting_tuples());
    for s in 0..model.num_setting_tuples() {
        let marginals: Vec<Vec<Vec<T>>> = (0..model.num_lambdas()).map(|l| model.marginals(s, l)).collect();
        let mut jrow = Vec::with_capacity(cells.len());
        let mut prow = Vec::with_capacity(cells.len());
        for cell in &cells {
            let marg = &marginals[cell.base];
            let mid_a = (cell.alpha.0.clone() + cell.alpha.1.clone()) / two.clone();
            let mid_b = (cell.beta.0.clone() + cell.beta.1.clone()) / two.clone();
            let ka = interval_of(&marg[0], &mid_a);
            let kb = interval_of(&marg[1], &mid_b);
            let mut dist = vec![T::zero(); no];
            dist[ka * nb + kb] = T::one();
            jrow.push(dist);
            prow.push(model.prior(s)[cell.base].clone() * cell.weight());
        }
        joint.push(jrow);
        prior.push(prow);
    }
    let labels = model.lambdas();
    let mut counter = vec![0usize; model.num_lambdas()];
    let names: Vec<String> = cells
        .iter()
        .map(|c| {
            counter[c.base] += 1;
            format!("{}#{}", labels[c.base], counter[c.base])
        })
        .collect();
    let cell_map: Vec<Value> = cells
        .iter()
        .zip(&names)
        .map(|(c, name)| {
            json!({
                "lambda": name,
                "base": labels[c.base],
                "alpha": [c.alpha.0.to_json(), c.alpha.1.to_json()],
                "beta": [c.beta.0.to_json(), c.beta.1.to_json()],
            })
        })
        .collect();
    let out = NPartyModel::new(
        model.settings().to_vec(),
        model.outcomes().to_vec(),
        names,
        joint,
        prior,
    )?
    .with_metadata(json!({
        "kind": "deterministic-conversion",
        "source_sha256": model_hash(model),
        "cells": cell_map,
    }));
    debug_assert!(indeterminism(&out).map(|i| i.is_zero()).unwrap_or(false));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutationReport {
    pub input_signaling: f64,
    pub output_signaling: f64,
    pub input_measurement_dependence: f64,
    pub output_measurement_dependence: f64,
    pub input_nosig: bool,
    pub output_nosig: bool,
    pub input_measurement_independent: bool,
    pub output_measurement_independent: bool,
}

impl CommutationReport {
    /// Both properties hold for the input exactly when they hold for the
    /// output.
    pub fn holds(&self) -> bool {
        self.input_nosig == self.output_nosig
            && self.input_measurement_independent == self.output_measurement_independent
    }

    pub fn to_json_value(&self) -> Value {
        serde_json::to_value(self).expect("plain struct serializes")
    }
}

/// Compares no signaling and measurement independence of a model and its
/// deterministic conversion.
pub fn check_commutation<T: Scalar>(input: &NPartyModel<T>, output: &NPartyModel<T>) -> Result<CommutationReport> {
    let tol = T::default_tolerance();
    let si = signaling(input)?.s;
    let so = signaling(output)?.s;
    let mi = measurement_dependence(input)?;
    let mo = measurement_dependence(output)?;
    Ok(CommutationReport {
        input_nosig: si <= tol,
        output_nosig: so <= tol,
        input_measurement_independent: mi <= tol,
        output_measurement_independent: mo <= tol,
        input_signaling: si.to_f64_lossy(),
        output_signaling: so.to_f64_lossy(),
        input_measurement_dependence: mi.to_f64_lossy(),
        output_measurement_dependence: mo.to_f64_lossy(),
    })
}
