#![allow(dead_code)]

use bellkit::model::{pm_outcomes, NPartyModel};
use bellkit::scalar::Rational;
use bellkit::Scalar;
use proptest::prelude::*;

/// Distribution over `n` entries with frequent exact zeros and ones.
pub fn dist(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, n).prop_map(|w| {
        let w: Vec<f64> = w.into_iter().map(|x| if x < 0.25 { 0.0 } else { x }).collect();
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            let mut one = vec![0.0; w.len()];
            one[0] = 1.0;
            one
        } else {
            w.into_iter().map(|x| x / total).collect()
        }
    })
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

pub fn binary_model_from(nx: usize, ny: usize, nl: usize, joint: Vec<Vec<f64>>, prior: Vec<Vec<f64>>) -> NPartyModel<f64> {
    let joint = joint.chunks(nl).map(|c| c.to_vec()).collect();
    NPartyModel::new(
        vec![labels("x", nx), labels("y", ny)],
        vec![pm_outcomes(), pm_outcomes()],
        labels("l", nl),
        joint,
        prior,
    )
    .expect("generated model is well formed")
}

/// Binary-outcome two-party model with up to 3 settings per party and 3 λ.
pub fn binary_model() -> impl Strategy<Value = NPartyModel<f64>> {
    (1..=3usize, 1..=3usize, 1..=3usize).prop_flat_map(|(nx, ny, nl)| {
        (
            prop::collection::vec(dist(4), nx * ny * nl),
            prop::collection::vec(dist(nl), nx * ny),
        )
            .prop_map(move |(j, p)| binary_model_from(nx, ny, nl, j, p))
    })
}

/// Two-party model with 2 or 3 outcomes per party.
pub fn multi_outcome_model() -> impl Strategy<Value = NPartyModel<f64>> {
    (1..=2usize, 1..=2usize, 2..=3usize, 2..=3usize, 1..=3usize).prop_flat_map(|(nx, ny, na, nb, nl)| {
        (
            prop::collection::vec(dist(na * nb), nx * ny * nl),
            prop::collection::vec(dist(nl), nx * ny),
        )
            .prop_map(move |(j, p)| {
                NPartyModel::new(
                    vec![labels("x", nx), labels("y", ny)],
                    vec![(0..na).map(|k| k as f64).collect(), (0..nb).map(|k| k as f64).collect()],
                    labels("l", nl),
                    j.chunks(nl).map(|c| c.to_vec()).collect(),
                    p,
                )
                .expect("generated model is well formed")
            })
    })
}

/// Rational distribution over `n` entries with denominators up to 12.
pub fn rational_dist(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(0..4i64, n).prop_map(|w| {
        let total: i64 = w.iter().sum();
        if total == 0 {
            let mut one = vec![Rational::int(0); w.len()];
            one[0] = Rational::int(1);
            one
        } else {
            w.into_iter().map(|x| Rational::ratio(x, total)).collect()
        }
    })
}

/// Outcome-independent two-party model with exact rational entries.
/// `nosig` makes each party's marginal depend on its own setting only and
/// `free` makes the prior the same for every setting pair.
#[derive(Clone, Debug)]
pub struct ProductModel {
    pub model: NPartyModel<Rational>,
    pub nosig: bool,
    pub free: bool,
}

pub fn outcome_independent_model() -> impl Strategy<Value = ProductModel> {
    (1..=3usize, 1..=3usize, 2..=3usize, 2..=3usize, 1..=3usize, any::<bool>(), any::<bool>()).prop_flat_map(
        |(nx, ny, na, nb, nl, nosig, free)| {
            let ns = nx * ny;
            (
                prop::collection::vec(rational_dist(na), ns * nl),
                prop::collection::vec(rational_dist(nb), ns * nl),
                prop::collection::vec(rational_dist(nl), ns),
            )
                .prop_map(move |(alice, bob, priors)| {
                    let mut joint = Vec::with_capacity(ns);
                    let mut prior = Vec::with_capacity(ns);
                    for s in 0..ns {
                        let (x, y) = (s / ny, s % ny);
                        let mut rows = Vec::with_capacity(nl);
                        for l in 0..nl {
                            // Without signaling, reuse the marginal drawn for y = 0 or x = 0.
                            let pa = &alice[if nosig { x * ny } else { s } * nl + l];
                            let pb = &bob[if nosig { y } else { s } * nl + l];
                            let mut row = Vec::with_capacity(na * nb);
                            for a in pa {
                                for b in pb {
                                    row.push(a.clone() * b.clone());
                                }
                            }
                            rows.push(row);
                        }
                        joint.push(rows);
                        prior.push(priors[if free { 0 } else { s }].clone());
                    }
                    let model = NPartyModel::new(
                        vec![labels("x", nx), labels("y", ny)],
                        vec![(0..na as i64).map(Rational::int).collect(), (0..nb as i64).map(Rational::int).collect()],
                        labels("l", nl),
                        joint,
                        prior,
                    )
                    .expect("generated model is well formed");
                    ProductModel { model, nosig, free }
                })
        },
    )
}

/// Four priors over `n` λ values.
pub fn prior_quadruple() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=5usize).prop_flat_map(|n| prop::collection::vec(dist(n), 4))
}

pub fn h(p: f64) -> f64 {
    bellkit::info::binary_entropy(p.clamp(0.0, 1.0)).expect("argument in [0, 1]")
}
