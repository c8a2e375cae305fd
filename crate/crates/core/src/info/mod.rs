//! Information capacities of hidden-variable models, in bits.

pub mod capacity;
pub mod comm;
pub mod entropy;

use serde::Serialize;
use serde_json::{json, Value};

pub use capacity::{
    binary_input_capacity, binary_input_information, channel_capacity, CapacityConfig,
    CapacityResult,
};
pub use comm::{c_commun, CommCapacity, CommModel};
pub use entropy::{binary_entropy, entropy, kl_divergence, mutual_information};

use crate::error::{Error, Result};
use crate::model::NPartyModel;
use crate::scalar::Scalar;

/// Largest Shannon entropy of any underlying single-party marginal.
pub fn c_random<T: Scalar>(model: &NPartyModel<T>) -> Result<f64> {
    model.ensure_valid()?;
    let model = model.to_f64();
    let mut best: f64 = 0.0;
    for s in 0..model.num_setting_tuples() {
        for l in 0..model.num_lambdas() {
            for m in model.marginals(s, l) {
                best = best.max(entropy(&m));
            }
        }
    }
    Ok(best)
}

/// Largest mutual information between the two outcomes at fixed settings and λ.
pub fn c_outcome<T: Scalar>(model: &NPartyModel<T>) -> Result<f64> {
    if model.parties() != 2 {
        return Err(Error::Unsupported("outcome capacity needs two parties".into()));
    }
    model.ensure_valid()?;
    let model = model.to_f64();
    let (na, nb) = (model.outcome_dims()[0], model.outcome_dims()[1]);
    let mut best: f64 = 0.0;
    for s in 0..model.num_setting_tuples() {
        for l in 0..model.num_lambdas() {
            best = best.max(mutual_information(model.joint(s, l), na, nb));
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigCapacity {
    pub value: f64,
    pub sender: usize,
    pub receiver: usize,
    pub lambda: usize,
    pub receiver_setting: usize,
    /// Law over the sender's settings attaining `value`.
    pub input: Vec<f64>,
    /// Golden-section weight on the sender's second setting, for two-setting senders.
    pub golden_weight: Option<f64>,
    /// Largest disagreement between the two maximization paths over all cells.
    pub path_disagreement: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Signaling capacity: channel from one party's setting to the other party's
/// outcome at fixed λ and fixed receiver setting, maximized over cells and
/// both directions. Two parties only.
pub fn c_sig<T: Scalar>(model: &NPartyModel<T>, cfg: &CapacityConfig) -> Result<SigCapacity> {
    if model.parties() != 2 {
        return Err(Error::Unsupported("signaling capacity is defined for two parties".into()));
    }
    model.ensure_valid()?;
    let model = model.to_f64();
    let mut best = SigCapacity {
        value: 0.0,
        sender: 0,
        receiver: 1,
        lambda: 0,
        receiver_setting: 0,
        input: Vec::new(),
        golden_weight: None,
        path_disagreement: 0.0,
        converged: true,
        iterations: 0,
    };
    let mut disagreement: f64 = 0.0;
    let mut converged = true;
    let mut iterations = 0;
    for sender in 0..2 {
        let receiver = 1 - sender;
        let nx = model.setting_dims()[sender];
        for y in 0..model.setting_dims()[receiver] {
            for l in 0..model.num_lambdas() {
                let rows = (0..nx)
                    .map(|x| {
                        let mut tuple = [0usize; 2];
                        tuple[sender] = x;
                        tuple[receiver] = y;
                        let s = model.setting_index(&tuple)?;
                        Ok(model.marginals(s, l).swap_remove(receiver))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let r = channel_capacity(&rows, cfg);
                converged &= r.converged;
                iterations = iterations.max(r.iterations);
                let golden = (nx == 2).then(|| binary_input_capacity(&rows[0], &rows[1], 1e-9));
                if let Some((v, _)) = golden {
                    disagreement = disagreement.max((v - r.value).abs());
                }
                if r.value > best.value {
                    best = SigCapacity {
                        value: r.value,
                        sender,
                        receiver,
                        lambda: l,
                        receiver_setting: y,
                        input: r.input,
                        golden_weight: golden.map(|g| g.1),
                        path_disagreement: 0.0,
                        converged: true,
                        iterations: 0,
                    };
                }
            }
        }
    }
    best.path_disagreement = disagreement;
    best.converged = converged;
    best.iterations = iterations;
    Ok(best)
}

/// Capacity of the channel from setting tuple to λ defined by the prior table.
pub fn c_meas_dep<T: Scalar>(model: &NPartyModel<T>, cfg: &CapacityConfig) -> Result<CapacityResult> {
    model.ensure_valid()?;
    let rows: Vec<Vec<f64>> = model
        .prior_table()
        .iter()
        .map(|r| r.iter().map(Scalar::to_f64_lossy).collect())
        .collect();
    Ok(channel_capacity(&rows, cfg))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityReport {
    pub c_random: f64,
    pub c_outcome: Option<f64>,
    pub c_sig: Option<f64>,
    pub c_meas_dep: f64,
    pub c_commun: Option<f64>,
    pub meas_dep: CapacityResult,
    pub sig: Option<SigCapacity>,
    pub commun: Option<CommCapacity>,
    pub warnings: Vec<String>,
}

pub fn capacity_report<T: Scalar>(
    model: &NPartyModel<T>,
    comm: Option<&CommModel>,
    cfg: &CapacityConfig,
) -> Result<CapacityReport> {
    let mut warnings = Vec::new();
    let c_random = c_random(model)?;
    let bipartite = model.parties() == 2;
    let c_outcome = if bipartite { Some(c_outcome(model)?) } else { None };
    let sig = if bipartite { Some(c_sig(model, cfg)?) } else { None };
    if let Some(s) = &sig {
        if !s.converged {
            warnings.push("signaling capacity hit the iteration cap; value is a lower bound".into());
        }
    }
    let meas_dep = c_meas_dep(model, cfg)?;
    if !meas_dep.converged {
        warnings.push(format!(
            "measurement-dependence capacity hit the iteration cap; true value lies in [{}, {}]",
            meas_dep.value, meas_dep.upper
        ));
    }
    let commun = comm.map(|c| c_commun(c, None, cfg)).transpose()?;
    if let Some(c) = &commun {
        if !c.converged {
            warnings.push("communication capacity hit the iteration cap; value is a lower bound".into());
        }
    }
    Ok(CapacityReport {
        c_random,
        c_outcome,
        c_sig: sig.as_ref().map(|s| s.value),
        c_meas_dep: meas_dep.value,
        c_commun: commun.as_ref().map(|c| c.c_commun),
        meas_dep,
        sig,
        commun,
        warnings,
    })
}

impl CapacityReport {
    pub fn to_json_value(&self) -> Value {
        let mut diagnostics = json!({
            "C_meas_dep": {
                "iterations": self.meas_dep.iterations,
                "gap": self.meas_dep.gap(),
                "upper": self.meas_dep.upper,
                "converged": self.meas_dep.converged,
            },
        });
        if let Some(s) = &self.sig {
            diagnostics["C_sig"] = json!({
                "iterations": s.iterations,
                "converged": s.converged,
                "sender": s.sender + 1,
                "receiver": s.receiver + 1,
                "lambda": s.lambda,
                "receiver_setting": s.receiver_setting,
                "input": s.input,
                "golden_weight": s.golden_weight,
                "path_disagreement": s.path_disagreement,
            });
        }
        if let Some(c) = &self.commun {
            diagnostics["C_commun"] = json!({
                "iterations": c.iterations,
                "converged": c.converged,
                "lambda": c.lambda,
                "input": c.input,
                "per_lambda_uniform_settings": c.per_lambda,
            });
        }
        let mut v = json!({
            "C_random": self.c_random,
            "C_outcome": self.c_outcome,
            "C_sig": self.c_sig,
            "C_meas_dep": self.c_meas_dep,
            "diagnostics": diagnostics,
        });
        if let Some(c) = self.c_commun {
            v["C_commun"] = json!(c);
        }
        if !self.warnings.is_empty() {
            v["warnings"] = json!(self.warnings);
        }
        v
    }
}
