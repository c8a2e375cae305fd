mod common;

use std::f64::consts::SQRT_2;

use bellkit::bounds::b_chsh;
use bellkit::info::{c_commun, c_sig, channel_capacity, CapacityConfig};
use bellkit::lp::{builtin, relaxed_bound_lp, LPConfig};
use bellkit::measures::{indeterminism, measure_report, measurement_dependence, signaling};
use bellkit::model::{chsh_value, correlator_of_row, decompose_cmn, observed_correlations, pm_outcomes};
use bellkit::zoo::{hall_density, pawlowski_model, SphereDirection};
use bellkit::NPartyModel;
use proptest::prelude::*;

fn direction() -> impl Strategy<Value = SphereDirection> {
    (-1.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let r = (1.0 - z * z).sqrt();
        SphereDirection::normalized([r * phi.cos(), r * phi.sin(), z]).unwrap()
    })
}

/// Rotation by `angle` about a unit `axis` (Rodrigues).
fn rotate(v: [f64; 3], axis: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let d = v[0] * axis[0] + v[1] * axis[1] + v[2] * axis[2];
    let cross = [
        axis[1] * v[2] - axis[2] * v[1],
        axis[2] * v[0] - axis[0] * v[2],
        axis[0] * v[1] - axis[1] * v[0],
    ];
    [0, 1, 2].map(|i| v[i] * c + cross[i] * s + axis[i] * d * (1.0 - c))
}

fn reverse_lambdas(m: &NPartyModel<f64>) -> NPartyModel<f64> {
    let rev = |rows: &[Vec<f64>]| rows.iter().rev().cloned().collect::<Vec<_>>();
    let joint = m.joint_table().iter().map(|rows| rev(rows)).collect();
    let prior = m.prior_table().iter().map(|p| p.iter().rev().copied().collect()).collect();
    let mut lambdas = m.lambdas().to_vec();
    lambdas.reverse();
    NPartyModel::new(m.settings().to_vec(), m.outcomes().to_vec(), lambdas, joint, prior).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 512, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn observed_rows_are_distributions(m in common::multi_outcome_model()) {
        let t = observed_correlations(&m).unwrap();
        for row in &t.table {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn cmn_round_trip(d in common::dist(4)) {
        let t = decompose_cmn(&d).unwrap();
        let back = t.to_distribution();
        for (a, b) in back.iter().zip(&d) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let direct = correlator_of_row(&[pm_outcomes(), pm_outcomes()], &d).unwrap();
        prop_assert!((t.correlator() - direct).abs() < 1e-12);
        prop_assert!(t.is_valid(&1e-12));
    }

    #[test]
    fn cmn_round_trip_is_exact_for_rationals(d in common::rational_dist(4)) {
        let t = decompose_cmn(&d).unwrap();
        prop_assert_eq!(t.to_distribution().to_vec(), d);
    }

    #[test]
    fn measures_ignore_lambda_order(m in common::binary_model()) {
        let r = reverse_lambdas(&m);
        let (a, b) = (measure_report(&m).unwrap(), measure_report(&r).unwrap());
        prop_assert!((a.m - b.m).abs() < 1e-12);
        prop_assert!((a.i - b.i).abs() < 1e-12);
        prop_assert!((a.s - b.s).abs() < 1e-12);
        let (p, q) = (observed_correlations(&m).unwrap().table, observed_correlations(&r).unwrap().table);
        for (x, y) in p.iter().flatten().zip(q.iter().flatten()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_models_signal_fully_or_not_at_all(
        (nx, ny, nl) in (1..=3usize, 1..=3usize, 1..=3usize),
        picks in prop::collection::vec(0..4usize, 27),
        priors in prop::collection::vec(common::dist(3), 9),
    ) {
        let joint: Vec<Vec<f64>> = (0..nx * ny * nl).map(|k| {
            let mut d = vec![0.0; 4];
            d[picks[k]] = 1.0;
            d
        }).collect();
        let prior = priors[..nx * ny].iter().map(|p| {
            let head: f64 = p[..nl].iter().sum();
            if head == 0.0 { let mut v = vec![0.0; nl]; v[0] = 1.0; v } else { p[..nl].iter().map(|x| x / head).collect() }
        }).collect();
        let m = common::binary_model_from(nx, ny, nl, joint, prior);
        prop_assert_eq!(indeterminism(&m).unwrap(), 0.0);
        let s = signaling(&m).unwrap().s;
        prop_assert!(s == 0.0 || s == 1.0, "S = {}", s);
    }

    #[test]
    fn chsh_bound_is_monotone_and_capped(i in 0.0..=0.5f64, s in 0.0..=1.0f64, m in 0.0..=2.0f64, d in 0.0..0.2f64) {
        let base = b_chsh(&i, &s, &m).unwrap();
        prop_assert!((2.0..=4.0).contains(&base));
        prop_assert!(b_chsh(&(i + d).min(0.5), &s, &m).unwrap() + 1e-12 >= base);
        prop_assert!(b_chsh(&i, &(s + d).min(1.0), &m).unwrap() + 1e-12 >= base);
        prop_assert!(b_chsh(&i, &s, &(m + d).min(2.0)).unwrap() + 1e-12 >= base);
    }

    #[test]
    fn hall_density_is_rotation_covariant(
        l in direction(), x in direction(), y in direction(), axis in direction(), angle in 0.0..6.0f64,
    ) {
        let r = |d: &SphereDirection| SphereDirection::normalized(rotate(d.vector(), axis.vector(), angle)).unwrap();
        // Skip λ on a hemisphere boundary, where the sign flips under rounding.
        prop_assume!(l.dot(&x).abs() > 1e-9 && l.dot(&y).abs() > 1e-9);
        let a = hall_density(&l, &x, &y);
        let b = hall_density(&r(&l), &r(&x), &r(&y));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn capacity_brackets_and_grows(rows in (2..=4usize, 2..=4usize).prop_flat_map(|(r, c)| prop::collection::vec(common::dist(c), r))) {
        let cfg = CapacityConfig { record_trace: true, ..CapacityConfig::default() };
        let cap = channel_capacity(&rows, &cfg);
        prop_assert!(cap.value <= cap.upper + 1e-12);
        prop_assert!(cap.value >= -1e-12);
        prop_assert!(cap.upper <= (rows.len() as f64).log2() + 1e-9);
        for w in cap.trace.windows(2) {
            prop_assert!(w[1] + 1e-12 >= w[0], "trace decreased: {:?}", w);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lp_bound_grows_with_the_budget(i in 0.0..=0.45f64, s in 0.0..=0.9f64, d in 0.0..0.05f64) {
        let f = builtin("chsh").unwrap();
        let cfg = LPConfig::default();
        let base = relaxed_bound_lp(&f, i, s, &cfg).unwrap();
        prop_assert!(relaxed_bound_lp(&f, i + d, s, &cfg).unwrap().bound + 1e-9 >= base.bound);
        prop_assert!(relaxed_bound_lp(&f, i, s + d, &cfg).unwrap().bound + 1e-9 >= base.bound);
        let w = &base.witness;
        prop_assert!(indeterminism(w).unwrap() <= i + 1e-9);
        prop_assert!(signaling(w).unwrap().s <= s + 1e-9);
        prop_assert!(measurement_dependence(w).unwrap() <= 1e-12);
        let v = chsh_value(&observed_correlations(w).unwrap()).unwrap();
        prop_assert!((v - base.bound).abs() < 1e-7);
    }

    #[test]
    fn explicit_messages_cost_at_least_the_signaling_capacity(p in 0.01..=1.0f64) {
        let (m, comm) = pawlowski_model(&p).unwrap();
        let cfg = CapacityConfig::default();
        let sig = c_sig(&m, &cfg).unwrap().value;
        let commun = c_commun(&comm, None, &cfg).unwrap().c_commun;
        prop_assert!(commun + 1e-6 >= sig, "C_commun = {}, C_sig = {}", commun, sig);
    }

    #[test]
    fn exact_and_float_measures_agree(g in common::outcome_independent_model()) {
        let exact = measure_report(&g.model).unwrap().to_f64();
        let float = measure_report(&g.model.to_f64()).unwrap();
        prop_assert!((exact.i - float.i).abs() < 1e-12);
        prop_assert!((exact.s - float.s).abs() < 1e-12);
        prop_assert!((exact.m - float.m).abs() < 1e-12);
    }
}

#[test]
fn tsirelson_point_of_the_pawlowski_family() {
    let (m, _) = pawlowski_model(&(SQRT_2 - 1.0)).unwrap();
    let v = chsh_value(&observed_correlations(&m).unwrap()).unwrap();
    assert!((v - 2.0 * SQRT_2).abs() < 1e-12, "CHSH = {v}");
}
