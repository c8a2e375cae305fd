//! One-bit communication model of the singlet: λ = (λ₁, λ₂) uniform and
//! independent on the sphere, message m = sgn(x·λ₁) sgn(x·λ₂).

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::sphere::{sgn, singlet_table, SphereDirection, SphereSampler, SHARD};
use crate::error::{Error, Result};
use crate::info::entropy::h;
use crate::info::CommModel;
use crate::model::{pm_outcomes, NPartyModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TonerBaconSpec {
    pub seed: u64,
    pub samples: u64,
}

pub type HiddenPair = (SphereDirection, SphereDirection);

pub fn toner_bacon_message(x: &SphereDirection, l: &HiddenPair) -> i8 {
    sgn(x.dot(&l.0)) * sgn(x.dot(&l.1))
}

/// a = −sgn x·λ₁ and b = sgn y·(λ₁ + mλ₂).
pub fn toner_bacon_outcomes(x: &SphereDirection, y: &SphereDirection, l: &HiddenPair) -> (i8, i8) {
    let m = f64::from(toner_bacon_message(x, l));
    let (v1, v2) = (l.0.vector(), l.1.vector());
    let s = [v1[0] + m * v2[0], v1[1] + m * v2[1], v1[2] + m * v2[2]];
    let yv = y.vector();
    (-sgn(x.dot(&l.0)), sgn(yv[0] * s[0] + yv[1] * s[1] + yv[2] * s[2]))
}

/// Entropy of the message at fixed λ for a uniformly random x.
pub fn toner_bacon_message_entropy(l: &HiddenPair) -> f64 {
    h(l.0.angle_to(&l.1) / std::f64::consts::PI)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TonerBaconRun {
    pub spec: TonerBaconSpec,
    /// Order ++, +−, −+, −−.
    pub estimates: [f64; 4],
    pub target: [f64; 4],
    /// Binomial standard error of each estimate under the target law.
    pub std_errors: [f64; 4],
    /// Largest |estimate − target| in units of its standard error; a cell
    /// with zero target contributes 0 if never hit and ∞ otherwise.
    pub max_sigma: f64,
    pub mean_message_entropy: f64,
    pub message_entropy_std_error: f64,
    /// Fraction of samples with m = +1 at the given x.
    pub message_plus_fraction: f64,
}

#[derive(Default)]
struct Tally {
    counts: [u64; 4],
    plus: u64,
    h_sum: f64,
    h_sq: f64,
}

fn draw_pair(rng: &mut rand_chacha::ChaCha8Rng) -> HiddenPair {
    (SphereSampler::draw(rng), SphereSampler::draw(rng))
}

/// Monte Carlo estimate of p(a, b | x, y) with message statistics.
pub fn toner_bacon_run(x: &SphereDirection, y: &SphereDirection, spec: &TonerBaconSpec) -> Result<TonerBaconRun> {
    if spec.samples == 0 {
        return Err(Error::out_of_range("samples", "need at least one sample"));
    }
    let n = spec.samples;
    let sampler = SphereSampler::new(spec.seed);
    let tallies: Vec<Tally> = (0..n.div_ceil(SHARD))
        .into_par_iter()
        .map(|s| {
            let mut rng = sampler.shard(s);
            let mut t = Tally::default();
            for _ in 0..SHARD.min(n - s * SHARD) {
                let l = draw_pair(&mut rng);
                let (a, b) = toner_bacon_outcomes(x, y, &l);
                t.counts[usize::from(a < 0) * 2 + usize::from(b < 0)] += 1;
                t.plus += u64::from(toner_bacon_message(x, &l) > 0);
                let e = toner_bacon_message_entropy(&l);
                t.h_sum += e;
                t.h_sq += e * e;
            }
            t
        })
        .collect();
    let mut total = Tally::default();
    for t in tallies {
        for k in 0..4 {
            total.counts[k] += t.counts[k];
        }
        total.plus += t.plus;
        total.h_sum += t.h_sum;
        total.h_sq += t.h_sq;
    }
    let nf = n as f64;
    let estimates = total.counts.map(|c| c as f64 / nf);
    let target = singlet_table(x, y);
    let std_errors = target.map(|p| (p * (1.0 - p) / nf).sqrt());
    let mut max_sigma: f64 = 0.0;
    for k in 0..4 {
        let dev = (estimates[k] - target[k]).abs();
        let z = if std_errors[k] > 0.0 {
            dev / std_errors[k]
        } else if dev > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        max_sigma = max_sigma.max(z);
    }
    let mean = total.h_sum / nf;
    let var = (total.h_sq / nf - mean * mean).max(0.0);
    Ok(TonerBaconRun {
        spec: *spec,
        estimates,
        target,
        std_errors,
        max_sigma,
        mean_message_entropy: mean,
        message_entropy_std_error: (var / nf).sqrt(),
        message_plus_fraction: total.plus as f64 / nf,
    })
}

/// Reproducible hidden pairs: pair `i` depends only on `(seed, i)`.
pub fn toner_bacon_lambdas(seed: u64, count: usize) -> Vec<HiddenPair> {
    let sampler = SphereSampler::new(seed);
    let mut out = Vec::with_capacity(count);
    let mut shard = 0;
    while out.len() < count {
        let mut rng = sampler.shard(shard);
        let take = (count - out.len()).min(SHARD as usize);
        out.extend((0..take).map(|_| draw_pair(&mut rng)));
        shard += 1;
    }
    out
}

/// Finite restriction to the given settings and hidden pairs with a uniform
/// prior, together with its one-way communication model (the first party
/// sends m).
pub fn toner_bacon_restriction(
    alice: &[SphereDirection],
    bob: &[SphereDirection],
    lambdas: &[HiddenPair],
) -> Result<(NPartyModel<f64>, CommModel)> {
    if alice.is_empty() || bob.is_empty() || lambdas.is_empty() {
        return Err(Error::Structure("restriction needs settings for both parties and at least one lambda".into()));
    }
    let nl = lambdas.len();
    let mut joint = Vec::new();
    for x in alice {
        for y in bob {
            joint.push(
                lambdas
                    .iter()
                    .map(|l| {
                        let (a, b) = toner_bacon_outcomes(x, y, l);
                        let mut row = vec![0.0; 4];
                        row[usize::from(a < 0) * 2 + usize::from(b < 0)] = 1.0;
                        row
                    })
                    .collect::<Vec<_>>(),
            );
        }
    }
    let prior = vec![vec![1.0 / nl as f64; nl]; alice.len() * bob.len()];
    let labels = |p: &str, n: usize| (1..=n).map(|k| format!("{p}{k}")).collect::<Vec<_>>();
    let model = NPartyModel::new(
        vec![labels("x", alice.len()), labels("y", bob.len())],
        vec![pm_outcomes(), pm_outcomes()],
        labels("lambda", nl),
        joint,
        prior,
    )?
    .with_metadata(json!({
        "kind": "toner-bacon-restriction",
        "alice": alice.iter().map(|d| d.vector()).collect::<Vec<_>>(),
        "bob": bob.iter().map(|d| d.vector()).collect::<Vec<_>>(),
        "lambdas": lambdas.iter().map(|l| [l.0.vector(), l.1.vector()]).collect::<Vec<_>>(),
    }));
    let law = alice
        .iter()
        .map(|x| {
            lambdas
                .iter()
                .map(|l| if toner_bacon_message(x, l) > 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
                .collect()
        })
        .collect();
    let comm = CommModel::from_setting_law(&model, 0, vec!["+1".into(), "-1".into()], law)?;
    Ok((model, comm))
}
