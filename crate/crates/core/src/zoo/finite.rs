//! Tabulated models: a signaling communication model of the CHSH
//! violation, a setting-determining λ, and local deterministic models of
//! perfect-correlation arguments that give up measurement independence.

use serde_json::json;

use crate::error::{Error, Result};
use crate::info::CommModel;
use crate::model::{decode_index, encode_index, pm_outcomes, CorrelationTable, NPartyModel};
use crate::scalar::Scalar;

fn labels(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// CHSH model in which the second party's setting shifts the first party's
/// marginal at x′ by p, carried by a one-bit message from the second party.
pub fn pawlowski_model<T: Scalar>(p: &T) -> Result<(NPartyModel<T>, CommModel)> {
    if *p < T::zero() || *p > T::one() {
        return Err(Error::out_of_range("p", format!("{p:?} is outside [0, 1]")));
    }
    let (z, o) = (T::zero(), T::one());
    let q = T::one() - p.clone();
    // λ = +1 then λ = −1; outcome order ++, +−, −+, −−.
    let plain = vec![
        vec![o.clone(), z.clone(), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), z.clone(), o.clone()],
    ];
    let flipped = vec![
        vec![q.clone(), z.clone(), p.clone(), z.clone()],
        vec![z.clone(), p.clone(), z.clone(), q.clone()],
    ];
    let half = T::half();
    let model = NPartyModel::new(
        vec![labels(&["x", "x'"]), labels(&["y", "y'"])],
        vec![pm_outcomes(), pm_outcomes()],
        labels(&["+1", "-1"]),
        vec![plain.clone(), plain.clone(), plain, flipped],
        vec![vec![half.clone(), half.clone()]; 4],
    )?
    .with_metadata(json!({"kind": "pawlowski", "p": p.to_json()}));
    let pf = p.to_f64_lossy();
    let law = vec![vec![vec![1.0, 0.0]; 2], vec![vec![1.0 - pf, pf]; 2]];
    let comm = CommModel::from_setting_law(&model, 1, labels(&["0", "1"]), law)?;
    Ok((model, comm))
}

/// λ fixes both the setting tuple and every outcome; the prior puts λ on
/// its own setting tuple with the target probability, so the target table
/// is reproduced exactly by a deterministic, nonsignaling model.
pub fn brans_model<T: Scalar>(target: &CorrelationTable<T>) -> Result<NPartyModel<T>> {
    let sdims = target.setting_dims();
    let odims = target.outcome_dims();
    let ns: usize = sdims.iter().product();
    let no: usize = odims.iter().product();
    if target.table.len() != ns || target.table.iter().any(|r| r.len() != no) {
        return Err(Error::Structure("target table does not match its settings and outcomes".into()));
    }
    let mut cells = Vec::new();
    for (s, row) in target.table.iter().enumerate() {
        for (o, p) in row.iter().enumerate() {
            if !p.is_zero() {
                cells.push((s, o));
            }
        }
    }
    let lambdas = cells
        .iter()
        .map(|&(s, o)| {
            let st = decode_index(s, &sdims);
            let ot = decode_index(o, &odims);
            let part = |t: &[usize]| t.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            format!("s({})o({})", part(&st), part(&ot))
        })
        .collect();
    let mut joint = vec![Vec::with_capacity(cells.len()); ns];
    let mut prior = vec![Vec::with_capacity(cells.len()); ns];
    for (s, (jrow, prow)) in joint.iter_mut().zip(prior.iter_mut()).enumerate() {
        for &(cs, co) in &cells {
            let mut dist = vec![T::zero(); no];
            dist[co] = T::one();
            jrow.push(dist);
            prow.push(if cs == s { target.table[s][co].clone() } else { T::zero() });
        }
    }
    Ok(NPartyModel::new(
        target.settings.clone(),
        target.outcomes.clone(),
        lambdas,
        joint,
        prior,
    )?
    .with_metadata(json!({"kind": "brans"})))
}

/// Three-party local deterministic model of the four perfect correlations
/// ⟨ABC′⟩ = ⟨AB′C⟩ = ⟨A′BC⟩ = 1, ⟨A′B′C′⟩ = −1.
///
/// `signs[j] = (a_j, b_j, c_j)` for λ_{j+1}. Primed outcomes are products of
/// the other two parties' unprimed outcomes, A′ = bc, B′ = ac, C′ = ab, with
/// λ₂, λ₃, λ₄ flipping A′, B′, C′ respectively. Each of those λ is excluded
/// from the one context containing its flipped observable alongside two
/// unprimed ones, and λ₁ from A′B′C′. The four remaining setting tuples
/// carry a uniform prior.
pub fn mermin_model<T: Scalar>(signs: &[[i8; 3]; 4]) -> Result<NPartyModel<T>> {
    if signs.iter().flatten().any(|&s| s != 1 && s != -1) {
        return Err(Error::out_of_range("sign", "Mermin signs must be ±1"));
    }
    let dims = [2usize, 2, 2];
    let outcome = |l: usize, party: usize, primed: bool| -> i8 {
        let [a, b, c] = signs[l];
        if !primed {
            return [a, b, c][party];
        }
        let product = [b * c, a * c, a * b][party];
        if l == party + 1 {
            -product
        } else {
            product
        }
    };
    // Contexts ABC′, AB′C, A′BC, A′B′C′ and the λ each excludes.
    let contexts: [([usize; 3], usize); 4] = [([0, 0, 1], 3), ([0, 1, 0], 2), ([1, 0, 0], 1), ([1, 1, 1], 0)];
    let mut joint = Vec::with_capacity(8);
    let mut prior = Vec::with_capacity(8);
    for s in 0..8 {
        let st = decode_index(s, &dims);
        joint.push(
            (0..4)
                .map(|l| {
                    let ot: Vec<usize> = (0..3).map(|p| usize::from(outcome(l, p, st[p] == 1) < 0)).collect();
                    let mut dist = vec![T::zero(); 8];
                    dist[encode_index(&ot, &dims)] = T::one();
                    dist
                })
                .collect::<Vec<_>>(),
        );
        let row = match contexts.iter().find(|(c, _)| c[..] == st[..]) {
            Some(&(_, excluded)) => (0..4)
                .map(|l| if l == excluded { T::zero() } else { T::ratio(1, 3) })
                .collect(),
            None => vec![T::ratio(1, 4); 4],
        };
        prior.push(row);
    }
    Ok(NPartyModel::new(
        vec![labels(&["A", "A'"]), labels(&["B", "B'"]), labels(&["C", "C'"])],
        vec![pm_outcomes(), pm_outcomes(), pm_outcomes()],
        labels(&["lambda1", "lambda2", "lambda3", "lambda4"]),
        joint,
        prior,
    )?
    .with_metadata(json!({
        "kind": "mermin",
        "signs": signs,
        "unlisted_contexts": "uniform prior",
    })))
}

/// (5√5 − 11)/2, the largest γ reachable by two qubits.
pub fn hardy_gamma_max() -> f64 {
    (5.0 * 5f64.sqrt() - 11.0) / 2.0
}

/// Capacity bound γ log₂(3/2) of the Hardy model.
pub fn hardy_capacity_bound(gamma: f64) -> f64 {
    gamma * 1.5f64.log2()
}

/// Two-party local deterministic model of Hardy's correlations with
/// outcomes in {0, 1} and settings U, D. Values of γ above the two-qubit
/// maximum are accepted and flagged in the metadata.
pub fn hardy_model<T: Scalar>(gamma: &T, a: u8, b: u8) -> Result<NPartyModel<T>> {
    if *gamma <= T::zero() || *gamma > T::one() {
        return Err(Error::out_of_range("gamma", format!("{gamma:?} is outside (0, 1]")));
    }
    if a > 1 || b > 1 {
        return Err(Error::out_of_range("Hardy bits", format!("a = {a}, b = {b} must be 0 or 1")));
    }
    let (a, b) = (usize::from(a), usize::from(b));
    // Per λ: (u1, u2, d1, d2).
    let table = [[a, 1 - a, 0, 0], [b, 1 - b, 1 - b, b], [0, 1, 1, 1], [1, 0, 1, 1], [1, 1, 1, 1]];
    let g = gamma.clone();
    let gp = (T::one() - g.clone()) / T::int(2);
    let g2 = g.clone() / T::int(2);
    let g3 = g.clone() / T::int(3);
    let z = T::zero();
    // Columns UU, UD, DU, DD.
    let priors = [
        [gp.clone(), gp.clone(), gp.clone(), gp.clone()],
        [gp.clone(), gp.clone(), gp.clone(), gp],
        [g2.clone(), z.clone(), g2.clone(), g3.clone()],
        [g2.clone(), g2.clone(), z.clone(), g3.clone()],
        [z, g2.clone(), g2, g3],
    ];
    let mut joint = Vec::with_capacity(4);
    let mut prior = Vec::with_capacity(4);
    for s in 0..4 {
        let (s1, s2) = (s / 2, s % 2);
        joint.push(
            table
                .iter()
                .map(|row| {
                    let o1 = row[if s1 == 0 { 0 } else { 2 }];
                    let o2 = row[if s2 == 0 { 1 } else { 3 }];
                    let mut dist = vec![T::zero(); 4];
                    dist[o1 * 2 + o2] = T::one();
                    dist
                })
                .collect::<Vec<_>>(),
        );
        prior.push(priors.iter().map(|p| p[s].clone()).collect());
    }
    let gf = gamma.to_f64_lossy();
    let mut meta = json!({"kind": "hardy", "gamma": gamma.to_json(), "a": a, "b": b});
    if gf > hardy_gamma_max() + 1e-15 {
        meta["warning"] = json!(format!(
            "gamma = {gf} exceeds the two-qubit maximum {:.6}",
            hardy_gamma_max()
        ));
    }
    Ok(NPartyModel::new(
        vec![labels(&["U", "D"]), labels(&["U", "D"])],
        vec![vec![T::zero(), T::one()], vec![T::zero(), T::one()]],
        labels(&["lambda1", "lambda2", "lambda3", "lambda4", "lambda5"]),
        joint,
        prior,
    )?
    .with_metadata(meta))
}

pub const CONWAY_KOCHEN_DIRECTIONS: usize = 33;

/// p(λ_w | x, y) over 33 direction labels: zero when w is one of the
/// settings, otherwise uniform over the remaining labels. Rows are indexed
/// by x·33 + y.
pub fn conway_kochen_prior<T: Scalar>() -> Vec<Vec<T>> {
    let n = CONWAY_KOCHEN_DIRECTIONS;
    let mut rows = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            let share = if x == y { T::ratio(1, 32) } else { T::ratio(1, 31) };
            rows.push(
                (0..n)
                    .map(|w| if w == x || w == y { T::zero() } else { share.clone() })
                    .collect(),
            );
        }
    }
    rows
}

/// log₂(33/31): entropy of the uniform λ minus the smallest row entropy.
pub fn conway_kochen_capacity_bound() -> f64 {
    (33.0f64 / 31.0).log2()
}
