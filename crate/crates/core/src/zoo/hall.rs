//! Deterministic, nonsignaling singlet model with a setting-dependent
//! density on the sphere: a = sgn x·λ, b = −sgn y·λ.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::sphere::{integrate_split, sgn, singlet_table, SphereDirection, SphereGrid};
use crate::error::{Error, Result};
use crate::info::entropy::{entropy, h};
use crate::model::{pm_outcomes, NPartyModel};

/// Densities on the sign-agreeing and sign-disagreeing regions for two
/// directions at angle φ; a branch whose denominator vanishes carries nothing.
pub fn region_densities(phi: f64) -> (f64, f64) {
    let t = phi.cos();
    let same = if PI - phi == 0.0 { 0.0 } else { (1.0 + t) / (8.0 * (PI - phi)) };
    let diff = if phi == 0.0 { 0.0 } else { (1.0 - t) / (8.0 * phi) };
    (same, diff)
}

/// p(λ | x, y).
pub fn hall_density(lambda: &SphereDirection, x: &SphereDirection, y: &SphereDirection) -> f64 {
    let (same, diff) = region_densities(x.angle_to(y));
    if sgn(x.dot(lambda)) == sgn(y.dot(lambda)) {
        same
    } else {
        diff
    }
}

/// Outcomes (a, b) at λ.
pub fn hall_outcomes(lambda: &SphereDirection, x: &SphereDirection, y: &SphereDirection) -> (i8, i8) {
    (sgn(x.dot(lambda)), -sgn(y.dot(lambda)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HallQuadrature {
    /// Gauss-Legendre nodes in cos θ for the split rule.
    pub polar: usize,
    /// Nodes per azimuth piece of the split rule.
    pub order: usize,
    /// Fixed product grid used as an independent cross-check.
    pub grid: SphereGrid,
}

impl Default for HallQuadrature {
    fn default() -> Self {
        Self {
            polar: 32,
            order: 4,
            grid: SphereGrid::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingletCheck {
    /// Order ++, +−, −+, −−.
    pub probabilities: [f64; 4],
    pub target: [f64; 4],
    pub max_deviation: f64,
    pub normalization: f64,
    pub grid_probabilities: [f64; 4],
    pub grid_deviation: f64,
}

const PAIRS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Integrates the model's outcomes against its density and compares with
/// the singlet law.
pub fn hall_verify_singlet(x: &SphereDirection, y: &SphereDirection, q: &HallQuadrature) -> SingletCheck {
    let target = singlet_table(x, y);
    let cell = |l: &SphereDirection, k: usize| {
        if hall_outcomes(l, x, y) == PAIRS[k] {
            hall_density(l, x, y)
        } else {
            0.0
        }
    };
    let probabilities = [0, 1, 2, 3].map(|k| integrate_split(x, y, q.polar, q.order, |l| cell(l, k)));
    let grid_probabilities = [0, 1, 2, 3].map(|k| q.grid.integrate(|l| cell(l, k)));
    let dev = |p: &[f64; 4]| p.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    SingletCheck {
        probabilities,
        target,
        max_deviation: dev(&probabilities),
        normalization: probabilities.iter().sum(),
        grid_probabilities,
        grid_deviation: dev(&grid_probabilities),
    }
}

/// Differential entropy in bits of p(λ | x, y) as a function of x·y;
/// the argument is clamped to [−1, 1].
pub fn hall_setting_entropy(t: f64) -> f64 {
    let t = t.clamp(-1.0, 1.0);
    let phi = t.acos();
    let mut v = h((1.0 + t) / 2.0) + 2.0;
    if t < 1.0 {
        v += 0.5 * (1.0 - t) * phi.log2();
    }
    if t > -1.0 {
        v += 0.5 * (1.0 + t) * (PI - phi).log2();
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HallPriorDistance {
    pub value: f64,
    /// Azimuths (x, y, x′, y′) in radians of the maximizing coplanar settings.
    pub angles: [f64; 4],
    /// Grid step of the global stage in degrees.
    pub resolution_deg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HallCapacities {
    pub h_max: f64,
    pub h_min: f64,
    /// x·y at the entropy minimum (the minimum is symmetric under x·y → −x·y).
    pub h_min_at: f64,
    pub c_meas_dep: f64,
    pub i_uniform: f64,
    pub i_chsh: f64,
    pub m: HallPriorDistance,
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// ∫ |p(λ|x,y) − p(λ|x′,y′)| dλ for coplanar settings given by azimuths.
/// Both densities are constant on the arcs between the eight great circles
/// orthogonal to the settings, and an arc of width w is a lune of area 2w.
pub fn coplanar_prior_distance(angles: &[f64; 4]) -> f64 {
    let tau = 2.0 * PI;
    let pair = |a: f64, b: f64| region_densities((a - b).cos().clamp(-1.0, 1.0).acos());
    let d = [pair(angles[0], angles[1]), pair(angles[2], angles[3])];
    let mut cuts = [(0.0, 0usize); 8];
    for (k, &a) in angles.iter().enumerate() {
        cuts[2 * k] = ((a + PI / 2.0).rem_euclid(tau), k);
        cuts[2 * k + 1] = ((a - PI / 2.0).rem_euclid(tau), k);
    }
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let width = |k: usize| {
        let hi = if k == 7 { cuts[0].0 + tau } else { cuts[k + 1].0 };
        hi - cuts[k].0
    };
    // Signs at the middle of the widest arc, then flipped at each crossing,
    // so coincident cuts cancel correctly.
    let k0 = (0..8).max_by(|&a, &b| width(a).total_cmp(&width(b))).unwrap_or(0);
    let mid = cuts[k0].0 + width(k0) / 2.0;
    let mut signs = angles.map(|a| (mid - a).cos() >= 0.0);
    let mut total = 0.0;
    for step in 0..8 {
        let k = (k0 + step) % 8;
        if step > 0 {
            let dir = cuts[k].1;
            signs[dir] = !signs[dir];
        }
        let w = width(k);
        if w <= 0.0 {
            continue;
        }
        let r1 = if signs[0] == signs[1] { d[0].0 } else { d[0].1 };
        let r2 = if signs[2] == signs[3] { d[1].0 } else { d[1].1 };
        total += 2.0 * w * (r1 - r2).abs();
    }
    total
}

fn search_point(v: [f64; 3]) -> [f64; 4] {
    [0.0, v[0], v[1], v[1] + v[2]]
}

/// Largest prior distance over coplanar setting quadruples: a global grid
/// over (∠xy, x′, ∠x′y′) followed by compass refinement of the best cells.
pub fn hall_measurement_dependence(resolution_deg: f64) -> Result<HallPriorDistance> {
    if !(resolution_deg > 0.0 && resolution_deg <= 45.0) {
        return Err(Error::out_of_range("resolution", format!("{resolution_deg} degrees")));
    }
    let step = resolution_deg.to_radians();
    let nb = (180.0 / resolution_deg).round() as usize;
    let nc = (360.0 / resolution_deg).round() as usize;
    const KEEP: usize = 8;
    // (x, y) is unordered, so ∠x′y′ ∈ [0, π] with x′ anywhere covers every case.
    let tops: Vec<Vec<(f64, [f64; 3])>> = (0..=nb)
        .into_par_iter()
        .map(|i| {
            let mut top: Vec<(f64, [f64; 3])> = Vec::with_capacity(KEEP + 1);
            for j in 0..nc {
                for k in 0..=nb {
                    let v = [i as f64 * step, j as f64 * step, k as f64 * step];
                    let m = coplanar_prior_distance(&search_point(v));
                    if top.len() < KEEP || m > top[top.len() - 1].0 {
                        let pos = top.partition_point(|t| t.0 >= m);
                        top.insert(pos, (m, v));
                        top.truncate(KEEP);
                    }
                }
            }
            top
        })
        .collect();
    let mut all: Vec<(f64, [f64; 3])> = tops.into_iter().flatten().collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal)));
    all.truncate(KEEP);

    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    for (_, start) in all {
        let (p, v) = compass(start, step);
        if v > best.0 {
            best = (v, p);
        }
    }
    Ok(HallPriorDistance {
        value: best.0,
        angles: search_point(best.1),
        resolution_deg,
    })
}

fn compass(start: [f64; 3], step: f64) -> ([f64; 3], f64) {
    let f = |v: &[f64; 3]| coplanar_prior_distance(&search_point(*v));
    let mut best = start;
    let mut val = f(&best);
    let mut step = step;
    while step > 1e-10 {
        let mut improved = false;
        for k in 0..3 {
            for dir in [1.0, -1.0] {
                let mut p = best;
                p[k] += dir * step;
                let v = f(&p);
                if v > val {
                    val = v;
                    best = p;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    (best, val)
}

/// Entropy extremes, capacities and the prior distance of the model.
pub fn hall_capacities(resolution_deg: f64) -> Result<HallCapacities> {
    let h_max = (4.0 * PI).log2();
    let t_min = golden_min(hall_setting_entropy, 0.0, 1.0, 1e-10);
    let h_min = hall_setting_entropy(t_min);
    // Uniform settings make x·y uniform on [−1, 1].
    let mean = super::sphere::integrate_interval(hall_setting_entropy, -1.0, 1.0, 400, 8) / 2.0;
    let q = (1.0 + 1.0 / SQRT_2) / 2.0;
    let i_chsh = 2.0 - entropy(&[q / 3.0, q / 3.0, q / 3.0, 1.0 - q]);
    Ok(HallCapacities {
        h_max,
        h_min,
        h_min_at: t_min,
        c_meas_dep: h_max - h_min,
        i_uniform: h_max - mean,
        i_chsh,
        m: hall_measurement_dependence(resolution_deg)?,
    })
}

/// Finite restriction to coplanar settings given by azimuths (radians).
/// λ ranges over the arcs cut out by the settings' orthogonal great
/// circles; on each arc both outcomes and the density are constant, so the
/// restriction reproduces the model's statistics exactly.
pub fn hall_discretized_model(alice: &[f64], bob: &[f64]) -> Result<NPartyModel<f64>> {
    if alice.is_empty() || bob.is_empty() {
        return Err(Error::Structure("each party needs at least one setting".into()));
    }
    let tau = 2.0 * PI;
    let mut cuts: Vec<f64> = alice
        .iter()
        .chain(bob)
        .flat_map(|a| [a + PI / 2.0, a - PI / 2.0])
        .map(|a| a.rem_euclid(tau))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let arcs: Vec<(f64, f64)> = (0..cuts.len())
        .map(|k| {
            let hi = if k + 1 == cuts.len() { cuts[0] + tau } else { cuts[k + 1] };
            (cuts[k], hi - cuts[k])
        })
        .filter(|a| a.1 > 1e-12)
        .collect();
    let mids: Vec<SphereDirection> = arcs
        .iter()
        .map(|(lo, w)| SphereDirection::in_plane(lo + w / 2.0))
        .collect();

    let mut joint = Vec::new();
    let mut prior = Vec::new();
    for &xa in alice {
        for &yb in bob {
            let (x, y) = (SphereDirection::in_plane(xa), SphereDirection::in_plane(yb));
            let mut rows = Vec::with_capacity(arcs.len());
            let mut weights = Vec::with_capacity(arcs.len());
            for (mid, (_, w)) in mids.iter().zip(&arcs) {
                let (a, b) = hall_outcomes(mid, &x, &y);
                let idx = usize::from(a < 0) * 2 + usize::from(b < 0);
                let mut row = vec![0.0; 4];
                row[idx] = 1.0;
                rows.push(row);
                weights.push(2.0 * w * hall_density(mid, &x, &y));
            }
            let total: f64 = weights.iter().sum();
            joint.push(rows);
            prior.push(weights.iter().map(|w| w / total).collect());
        }
    }
    let labels = |p: &str, n: usize| (1..=n).map(|k| format!("{p}{k}")).collect::<Vec<_>>();
    let model = NPartyModel::new(
        vec![labels("x", alice.len()), labels("y", bob.len())],
        vec![pm_outcomes(), pm_outcomes()],
        labels("arc", arcs.len()),
        joint,
        prior,
    )?;
    Ok(model.with_metadata(json!({
        "kind": "hall-coplanar-restriction",
        "alice_azimuths_deg": alice.iter().map(|a| a.to_degrees()).collect::<Vec<_>>(),
        "bob_azimuths_deg": bob.iter().map(|a| a.to_degrees()).collect::<Vec<_>>(),
        "arcs": arcs.iter().map(|(lo, w)| [lo.to_degrees(), w.to_degrees()]).collect::<Vec<_>>(),
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{c_meas_dep, CapacityConfig};
    use crate::measures::{indeterminism, signaling};
    use crate::model::observed_correlations;

    #[test]
    fn density_examples() {
        let x = SphereDirection::in_plane(0.0);
        let y = SphereDirection::in_plane(PI / 2.0);
        let l = SphereDirection::from_angles(0.7, 2.1);
        assert!((hall_density(&l, &x, &y) - 1.0 / (4.0 * PI)).abs() < 1e-15);
        let total = SphereGrid::default().integrate(|l| hall_density(l, &x, &x));
        assert!((total - 1.0).abs() < 1e-9);
        let y = SphereDirection::from_angles(0.4, 1.3);
        let q = HallQuadrature::default();
        let split = integrate_split(&x, &y, q.polar, q.order, |l| hall_density(l, &x, &y));
        assert!((split - 1.0).abs() < 1e-6);
    }

    #[test]
    fn reproduces_the_singlet() {
        let q = HallQuadrature::default();
        for &(p1, a1, p2, a2) in &[(0.3, 0.2, 1.9, 2.5), (1.2, 0.0, 1.2, 0.0), (0.5, 1.0, 2.6, 4.0)] {
            let x = SphereDirection::from_angles(p1, a1);
            let y = SphereDirection::from_angles(p2, a2);
            let c = hall_verify_singlet(&x, &y, &q);
            assert!(c.max_deviation < 1e-10, "{c:?}");
            assert!(c.grid_deviation < 1e-2);
        }
    }

    #[test]
    fn entropy_extremes() {
        let h_max = (4.0 * PI).log2();
        for t in [0.0, 1.0, -1.0] {
            assert!((hall_setting_entropy(t) - h_max).abs() < 1e-12);
        }
        // Direct quadrature of −ρ log₂ ρ at x·y = cos 1.
        let x = SphereDirection::in_plane(0.0);
        let y = SphereDirection::in_plane(1.0);
        let q = HallQuadrature::default();
        let direct = integrate_split(&x, &y, q.polar, q.order, |l| {
            let r = hall_density(l, &x, &y);
            -r * r.log2()
        });
        assert!((direct - hall_setting_entropy(1f64.cos())).abs() < 1e-9);
    }

    #[test]
    fn restriction_matches_chsh_information() {
        let deg = |d: f64| d.to_radians();
        let m = hall_discretized_model(&[deg(0.0), deg(90.0)], &[deg(45.0), deg(135.0)]).unwrap();
        assert_eq!(indeterminism(&m).unwrap(), 0.0);
        assert_eq!(signaling(&m).unwrap().s, 0.0);
        let table = observed_correlations(&m).unwrap();
        for (s, (xa, yb)) in [(0.0, 45.0), (0.0, 135.0), (90.0, 45.0), (90.0, 135.0)].iter().enumerate() {
            let t = singlet_table(&SphereDirection::in_plane(deg(*xa)), &SphereDirection::in_plane(deg(*yb)));
            for k in 0..4 {
                assert!((table.table[s][k] - t[k]).abs() < 1e-12);
            }
        }
        // Mutual information of settings and arcs under uniform settings.
        let rows = m.prior_table();
        let avg: Vec<f64> = (0..rows[0].len()).map(|l| rows.iter().map(|r| r[l]).sum::<f64>() / 4.0).collect();
        let mi = entropy(&avg) - rows.iter().map(|r| entropy(r)).sum::<f64>() / 4.0;
        let q = (1.0 + 1.0 / SQRT_2) / 2.0;
        assert!((mi - (2.0 - entropy(&[q / 3.0, q / 3.0, q / 3.0, 1.0 - q]))).abs() < 1e-12);
        let cap = c_meas_dep(&m, &CapacityConfig::default()).unwrap();
        assert!(cap.value >= mi - 1e-9);
    }

    #[test]
    fn coplanar_distance_basics() {
        let a = [0.0, 1.0, 0.0, 1.0];
        assert!(coplanar_prior_distance(&a).abs() < 1e-15);
        // Uniform density at right angles on both sides.
        let b = [0.0, PI / 2.0, 0.3, 0.3 + PI / 2.0];
        assert!(coplanar_prior_distance(&b).abs() < 1e-15);
        let c = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
        assert!(coplanar_prior_distance(&c) > 0.0);
    }
}
