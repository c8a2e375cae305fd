//! Finite CHSH models attaining the closed-form bounds.

use serde_json::json;

use super::gap_reached;
use crate::error::{Error, Result};
use crate::model::{pm_outcomes, NPartyModel};
use crate::scalar::{smin, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum ChshCase<T> {
    /// Indeterminism only (S = M = 0).
    IOnly { i: T },
    /// Measurement dependence only (I = S = 0).
    MOnly { m: T },
    /// Signaling at or beyond the gap, S ≥ 1 − 2I.
    Gap { i: T, s: T },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriorFamily {
    /// Five λ values, M = 2p for 0 ≤ p < 1/3.
    FiveLambda,
    /// Four λ values, M = 2 − 4p for 0 ≤ p ≤ 1/3.
    FourLambda,
}

/// Prior table `rows[j][k]` over the four CHSH setting pairs.
pub fn make_prior_family<T: Scalar>(kind: PriorFamily, p: &T) -> Result<Vec<Vec<T>>> {
    let third = T::ratio(1, 3);
    let zero = T::zero();
    let ok = match kind {
        PriorFamily::FiveLambda => *p >= zero && *p < third,
        PriorFamily::FourLambda => *p >= zero && *p <= third,
    };
    if !ok {
        return Err(Error::out_of_range("prior family parameter", format!("{p:?} for {kind:?}")));
    }
    let rows = (1..=4)
        .map(|j| match kind {
            PriorFamily::FiveLambda => (1..=5)
                .map(|k| {
                    if k == 5 {
                        T::one() - T::int(3) * p.clone()
                    } else if j + k == 5 {
                        T::zero()
                    } else {
                        p.clone()
                    }
                })
                .collect(),
            PriorFamily::FourLambda => (1..=4)
                .map(|k| {
                    if j == k {
                        p.clone()
                    } else if j + k == 5 {
                        T::zero()
                    } else {
                        (T::one() - p.clone()) / T::int(2)
                    }
                })
                .collect(),
        })
        .collect();
    Ok(rows)
}

/// Σ_λ min_j P_j(λ).
pub fn min_overlap<T: Scalar>(priors: &[Vec<T>]) -> Result<T> {
    let first = priors
        .first()
        .ok_or_else(|| Error::Structure("no priors given".into()))?;
    if priors.iter().any(|p| p.len() != first.len()) {
        return Err(Error::Structure("priors have different lengths".into()));
    }
    Ok((0..first.len())
        .map(|l| {
            priors[1..]
                .iter()
                .fold(priors[0][l].clone(), |acc, p| smin(acc, p[l].clone()))
        })
        .fold(T::zero(), |a, b| a + b))
}

fn chsh_settings() -> Vec<Vec<String>> {
    vec![
        vec!["x".to_string(), "x'".to_string()],
        vec!["y".to_string(), "y'".to_string()],
    ]
}

fn chsh_model<T: Scalar>(
    lambdas: Vec<String>,
    joint: Vec<Vec<Vec<T>>>,
    prior: Vec<Vec<T>>,
) -> Result<NPartyModel<T>> {
    NPartyModel::new(
        chsh_settings(),
        vec![pm_outcomes(), pm_outcomes()],
        lambdas,
        joint,
        prior,
    )
}

/// Outcome indices (a(x), a(x'), b(y), b(y')), index 0 meaning +1.
type Box4 = [usize; 4];

fn box_from_code(code: usize) -> Box4 {
    [(code >> 3) & 1, (code >> 2) & 1, (code >> 1) & 1, code & 1]
}

/// Whether the deterministic box satisfies the CHSH sign constraint of
/// setting pair (j, k): a·b = +1, except a·b = −1 for (x', y').
fn satisfies(b: &Box4, j: usize, k: usize) -> bool {
    let same = b[j] == b[2 + k];
    if (j, k) == (1, 1) {
        !same
    } else {
        same
    }
}

/// Lexicographically first box satisfying every constraint except `skip`.
fn first_box_violating(skip: (usize, usize)) -> Box4 {
    (0..16)
        .map(box_from_code)
        .find(|b| {
            (0..2).all(|j| (0..2).all(|k| satisfies(b, j, k) != ((j, k) == skip)))
        })
        .expect("every single constraint can be violated alone")
}

fn point_mass<T: Scalar>(b: &Box4, j: usize, k: usize) -> Vec<T> {
    let mut row = vec![T::zero(); 4];
    row[b[j] * 2 + b[2 + k]] = T::one();
    row
}

fn pair_of(j: usize) -> (usize, usize) {
    (j / 2, j % 2)
}

fn check_unit<T: Scalar>(what: &'static str, x: &T, hi: T) -> Result<()> {
    if *x < T::zero() || *x > hi {
        return Err(Error::out_of_range(what, format!("{x:?} is outside [0, {hi:?}]")));
    }
    Ok(())
}

/// Builds a finite CHSH model whose value equals the closed-form bound of its budget.
pub fn make_chsh_saturating_model<T: Scalar>(case: &ChshCase<T>) -> Result<NPartyModel<T>> {
    let one = T::one();
    let zero = T::zero();
    match case {
        ChshCase::IOnly { i } => {
            check_unit("I", i, T::half())?;
            let pos = vec![i.clone(), zero.clone(), zero.clone(), one.clone() - i.clone()];
            let last = vec![
                zero.clone(),
                i.clone(),
                i.clone(),
                one.clone() - T::int(2) * i.clone(),
            ];
            let joint = vec![vec![pos.clone()], vec![pos.clone()], vec![pos], vec![last]];
            Ok(chsh_model(vec!["l".into()], joint, vec![vec![one]; 4])?
                .with_metadata(json!({"construction": "chsh-saturating", "case": "I-only", "I": i.to_json()})))
        }
        ChshCase::Gap { i, s } => {
            check_unit("I", i, T::half())?;
            check_unit("S", s, T::one())?;
            if !gap_reached(i, s) {
                return Err(Error::out_of_range(
                    "S",
                    format!("gap case needs S >= 1 - 2I, got I = {i:?}, S = {s:?}"),
                ));
            }
            let pos = vec![i.clone(), zero.clone(), zero.clone(), one.clone() - i.clone()];
            let last = vec![zero.clone(), i.clone(), one.clone() - i.clone(), zero];
            let joint = vec![vec![pos.clone()], vec![pos.clone()], vec![pos], vec![last]];
            Ok(chsh_model(vec!["l".into()], joint, vec![vec![one]; 4])?.with_metadata(
                json!({"construction": "chsh-saturating", "case": "gap", "I": i.to_json(), "S": s.to_json()}),
            ))
        }
        ChshCase::MOnly { m } => {
            check_unit("M", m, T::int(2))?;
            let (kind, p) = if *m < T::ratio(2, 3) {
                (PriorFamily::FiveLambda, m.clone() / T::int(2))
            } else {
                (PriorFamily::FourLambda, (T::int(2) - m.clone()) / T::int(4))
            };
            let prior = make_prior_family(kind, &p)?;
            let nl = prior[0].len();
            // λ_k (k < 4) carries no weight on setting pair j with j + k = 3
            // (zero-based), so its box may violate exactly that constraint.
            let boxes: Vec<Box4> = (0..nl)
                .map(|k| {
                    if k < 4 {
                        first_box_violating(pair_of(3 - k))
                    } else {
                        first_box_violating((1, 1))
                    }
                })
                .collect();
            let joint = (0..4)
                .map(|s| {
                    let (j, k) = pair_of(s);
                    boxes.iter().map(|b| point_mass(b, j, k)).collect()
                })
                .collect();
            let lambdas = (1..=nl).map(|k| format!("l{k}")).collect();
            let family = match kind {
                PriorFamily::FiveLambda => "five-lambda",
                PriorFamily::FourLambda => "four-lambda",
            };
            Ok(chsh_model(lambdas, joint, prior)?.with_metadata(json!({
                "construction": "chsh-saturating",
                "case": "M-only",
                "M": m.to_json(),
                "prior_family": family,
                "p": p.to_json(),
            })))
        }
    }
}

/// Nonsignaling, measurement-independent boxes reaching 4/(2 − O).
pub fn make_outcome_saturating_model<T: Scalar>(o: &T) -> Result<NPartyModel<T>> {
    check_unit("O", o, T::one())?;
    let one = T::one();
    let two = T::int(2);
    let half = T::half();
    let r = one.clone() / (two.clone() - o.clone());
    let p12 = vec![
        one.clone() - o.clone() / two.clone(),
        (one.clone() + o.clone()) / two.clone() - r.clone(),
        T::zero(),
        r - half.clone(),
    ];
    let p3 = vec![
        half.clone(),
        T::zero(),
        (one.clone() - o.clone()) / two.clone(),
        o.clone() / two.clone(),
    ];
    let p4 = vec![
        (one.clone() - o.clone()) / two.clone(),
        o.clone() / two,
        half,
        T::zero(),
    ];
    let joint = vec![vec![p12.clone()], vec![p12], vec![p3], vec![p4]];
    Ok(chsh_model(vec!["l".into()], joint, vec![vec![one]; 4])?
        .with_metadata(json!({"construction": "outcome-saturating", "O": o.to_json()})))
}
