//! One-way communication models: a message drawn by one party from its own
//! setting, outcome and λ, read by the other party.

use serde::Serialize;

use super::capacity::{channel_capacity_with_bonus, CapacityConfig};
use super::entropy::entropy;
use crate::error::{Error, Result};
use crate::model::NPartyModel;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct CommModel {
    base: NPartyModel<f64>,
    sender: usize,
    messages: Vec<String>,
    /// `law[sender_setting][lambda][sender_outcome][message]`
    law: Vec<Vec<Vec<Vec<f64>>>>,
    /// `outcome_law[sender_setting][lambda][sender_outcome]`
    outcome_law: Vec<Vec<Vec<f64>>>,
}

const TOL: f64 = 1e-9;

impl CommModel {
    pub fn new<T: Scalar>(
        base: &NPartyModel<T>,
        sender: usize,
        messages: Vec<String>,
        law: Vec<Vec<Vec<Vec<f64>>>>,
    ) -> Result<Self> {
        let base = base.to_f64();
        if base.parties() != 2 {
            return Err(Error::Unsupported("communication models have two parties".into()));
        }
        if sender > 1 {
            return Err(Error::Unknown {
                kind: "party",
                name: sender.to_string(),
            });
        }
        if messages.is_empty() {
            return Err(Error::Structure("message alphabet is empty".into()));
        }
        base.ensure_valid()?;
        let receiver = 1 - sender;
        let nx = base.setting_dims()[sender];
        let na = base.outcome_dims()[sender];
        let nl = base.num_lambdas();
        let nm = messages.len();

        if law.len() != nx || law.iter().any(|r| r.len() != nl) {
            return Err(Error::Structure("message law must be indexed [setting][lambda]".into()));
        }
        for (x, rows) in law.iter().enumerate() {
            for (l, per_outcome) in rows.iter().enumerate() {
                if per_outcome.len() != na || per_outcome.iter().any(|d| d.len() != nm) {
                    return Err(Error::Structure(format!(
                        "message law at setting {x}, lambda {l} must be {na} x {nm}"
                    )));
                }
                for d in per_outcome {
                    let total: f64 = d.iter().sum();
                    if d.iter().any(|&p| p < -TOL) || (total - 1.0).abs() > TOL {
                        return Err(Error::out_of_range(
                            "message law",
                            format!("row at setting {x}, lambda {l} is not a distribution"),
                        ));
                    }
                }
            }
        }

        // The sender's outcome law must not depend on the receiver's setting.
        let mut outcome_law = vec![vec![Vec::new(); nl]; nx];
        for (x, per_lambda) in outcome_law.iter_mut().enumerate() {
            for (l, slot) in per_lambda.iter_mut().enumerate() {
                let mut first: Option<Vec<f64>> = None;
                for y in 0..base.setting_dims()[receiver] {
                    let mut tuple = [0usize; 2];
                    tuple[sender] = x;
                    tuple[receiver] = y;
                    let s = base.setting_index(&tuple)?;
                    let marg = base.marginals(s, l).swap_remove(sender);
                    match &first {
                        None => first = Some(marg),
                        Some(f) => {
                            if f.iter().zip(&marg).any(|(a, b)| (a - b).abs() > TOL) {
                                return Err(Error::Structure(format!(
                                    "sender outcome at setting {x}, lambda {l} depends on the receiver's setting"
                                )));
                            }
                        }
                    }
                }
                *slot = first.unwrap_or_default();
            }
        }

        Ok(Self {
            base,
            sender,
            messages,
            law,
            outcome_law,
        })
    }

    /// Message law that ignores the sender's outcome: `law[setting][lambda][message]`.
    pub fn from_setting_law<T: Scalar>(
        base: &NPartyModel<T>,
        sender: usize,
        messages: Vec<String>,
        law: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if base.parties() != 2 || sender > 1 {
            return Err(Error::Unsupported("communication models have two parties".into()));
        }
        let na = base.outcome_dims()[sender];
        let expanded = law
            .into_iter()
            .map(|rows| rows.into_iter().map(|d| vec![d; na]).collect())
            .collect();
        Self::new(base, sender, messages, expanded)
    }

    pub fn base(&self) -> &NPartyModel<f64> {
        &self.base
    }

    pub fn sender(&self) -> usize {
        self.sender
    }

    pub fn messages(&self) -> &[String] {
        &self.messages
    }

    pub fn law(&self) -> &[Vec<Vec<Vec<f64>>>] {
        &self.law
    }

    fn sender_settings(&self) -> usize {
        self.law.len()
    }

    /// Message distribution given sender setting and λ.
    pub fn message_law(&self, x: usize, l: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.messages.len()];
        for (pa, d) in self.outcome_law[x][l].iter().zip(&self.law[x][l]) {
            for (o, p) in out.iter_mut().zip(d) {
                *o += pa * p;
            }
        }
        out
    }

    /// H(M | X = x, A, λ).
    fn conditional_entropy(&self, x: usize, l: usize) -> f64 {
        self.outcome_law[x][l]
            .iter()
            .zip(&self.law[x][l])
            .map(|(pa, d)| pa * entropy(d))
            .sum()
    }

    /// I(M ; X, A) at fixed λ for the given sender-setting law.
    pub fn information(&self, l: usize, setting_law: &[f64]) -> f64 {
        let mut q = vec![0.0; self.messages.len()];
        let mut cond = 0.0;
        for (x, &r) in setting_law.iter().enumerate() {
            for (qm, p) in q.iter_mut().zip(self.message_law(x, l)) {
                *qm += r * p;
            }
            cond += r * self.conditional_entropy(x, l);
        }
        (entropy(&q) - cond).max(0.0)
    }

    /// Entropy of the message at fixed λ and setting law.
    pub fn message_entropy(&self, l: usize, setting_law: &[f64]) -> f64 {
        let mut q = vec![0.0; self.messages.len()];
        for (x, &r) in setting_law.iter().enumerate() {
            for (qm, p) in q.iter_mut().zip(self.message_law(x, l)) {
                *qm += r * p;
            }
        }
        entropy(&q)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommCapacity {
    /// I(M ; sender setting, sender outcome) per λ at the supplied setting law.
    pub per_lambda: Vec<f64>,
    pub setting_law: Vec<f64>,
    pub c_commun: f64,
    /// λ and setting law attaining `c_commun`.
    pub lambda: usize,
    pub input: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Communication capacity: sup over λ and the sender-setting law of the
/// information the message carries about the sender's setting and outcome.
pub fn c_commun(
    comm: &CommModel,
    setting_law: Option<&[f64]>,
    cfg: &CapacityConfig,
) -> Result<CommCapacity> {
    let nx = comm.sender_settings();
    let law = match setting_law {
        Some(w) => {
            let total: f64 = w.iter().sum();
            if w.len() != nx || w.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > TOL {
                return Err(Error::out_of_range(
                    "sender setting law",
                    format!("expected a distribution over {nx} settings"),
                ));
            }
            w.to_vec()
        }
        None => vec![1.0 / nx as f64; nx],
    };
    let nl = comm.base.num_lambdas();
    let per_lambda = (0..nl).map(|l| comm.information(l, &law)).collect();

    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut converged = true;
    let mut iterations = 0;
    for l in 0..nl {
        let rows: Vec<Vec<f64>> = (0..nx).map(|x| comm.message_law(x, l)).collect();
        let bonus: Vec<f64> = rows
            .iter()
            .enumerate()
            .map(|(x, row)| entropy(row) - comm.conditional_entropy(x, l))
            .collect();
        let r = channel_capacity_with_bonus(&rows, &bonus, cfg);
        converged &= r.converged;
        iterations = iterations.max(r.iterations);
        if best.as_ref().is_none_or(|b| r.value > b.0) {
            best = Some((r.value, l, r.input));
        }
    }
    let (c, lambda, input) = best.unwrap_or((0.0, 0, law.clone()));
    Ok(CommCapacity {
        per_lambda,
        setting_law: law,
        c_commun: c,
        lambda,
        input,
        converged,
        iterations,
    })
}
