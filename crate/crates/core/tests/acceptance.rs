//! End-to-end acceptance checks. Each criterion prints one `[PASS]` or
//! `[FAIL]` line; the test fails if any criterion does.

mod common;

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;
use std::time::{Duration, Instant};

use bellkit::bounds::{
    b_3322, b_chsh, b_outcome, c_outcome_saturating, correlator_bounds, make_chsh_saturating_model,
    make_outcome_saturating_model, min_overlap, ChshCase,
};
use bellkit::info::{c_commun, c_meas_dep, c_outcome, c_random, c_sig, channel_capacity, CapacityConfig};
use bellkit::lp::{builtin, deterministic_bound, relaxed_bound_lp, LPConfig};
use bellkit::measures::{
    indeterminism, measure_report, measurement_dependence, outcome_dependence, prior_distance, signaling,
};
use bellkit::model::{chsh_value, correlator, observed_correlations, CmnTriple};
use bellkit::transforms::{check_commutation, to_deterministic};
use bellkit::zoo::{self, HallQuadrature, SphereDirection, TonerBaconSpec};
use bellkit::{NPartyModel, Rational, Scalar};
use common::h;
use proptest::test_runner::{Config as RunnerConfig, RngAlgorithm, TestRng, TestRunner};

/// Collects failed checks for one criterion.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn ok(&mut self, what: impl Into<String>, cond: bool) {
        if !cond {
            self.failures.push(what.into());
        }
    }

    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        if !((got - want).abs() <= tol) {
            self.failures.push(format!("{what}: got {got}, want {want} ± {tol}"));
        }
    }

    fn at_most(&mut self, what: &str, got: f64, limit: f64) {
        if !(got <= limit) {
            self.failures.push(format!("{what}: {got} exceeds {limit}"));
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn within(&mut self, what: &str, elapsed: Duration, limit: Duration) {
        self.note(format!("{what} took {:.2} s", elapsed.as_secs_f64()));
        if elapsed > limit {
            self.failures.push(format!("{what}: {:.1} s exceeds {:.0} s", elapsed.as_secs_f64(), limit.as_secs_f64()));
        }
    }
}

fn runner(cases: u32) -> TestRunner {
    let config = RunnerConfig {
        cases,
        failure_persistence: None,
        ..RunnerConfig::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn chsh_of<T: Scalar>(m: &NPartyModel<T>) -> T {
    chsh_value(&observed_correlations(m).unwrap()).unwrap()
}

fn ac1(c: &mut Checks) {
    c.close("b_chsh(0,0,0)", b_chsh(&0.0, &0.0, &0.0).unwrap(), 2.0, 0.0);
    c.close("b_chsh(0.207,0,0)", b_chsh(&0.207, &0.0, &0.0).unwrap(), 2.828, 1e-3);
    c.close("b_chsh(0,0,0.276)", b_chsh(&0.0, &0.0, &0.276).unwrap(), 2.828, 1e-3);
    c.close("b_3322(0,0)", b_3322(&0.0, &0.0).unwrap(), 4.0, 0.0);
    for k in 0..=20 {
        let i = Rational::ratio(k, 40);
        let want = Rational::int(4) + Rational::int(8) * i.clone();
        c.ok(format!("b_3322({i},0) = 4+8I exactly"), b_3322(&i, &Rational::int(0)).unwrap() == want);
    }
    c.close("b_outcome(2-sqrt2)", b_outcome(&(2.0 - SQRT_2)).unwrap(), 2.0 * SQRT_2, 1e-9);
}

fn ac2(c: &mut Checks) {
    let chsh = builtin("chsh").unwrap();
    let cfg = LPConfig::default();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for a in 0..=10 {
        for b in 0..=10 {
            let (i, s) = (a as f64 * 0.05, b as f64 * 0.1);
            let lp = relaxed_bound_lp(&chsh, i, s, &cfg).unwrap().bound;
            let closed = b_chsh(&i, &s, &0.0).unwrap();
            worst = worst.max((lp - closed).abs());
            c.close(&format!("CHSH LP at I={i}, S={s}"), lp, closed, 1e-7);
        }
    }
    c.within("CHSH 11x11 grid", start.elapsed(), Duration::from_secs(10));
    c.note(format!("CHSH grid max deviation {worst:.1e}"));
    // The jump at the gap: just below and at S = 1 − 2I.
    let below = relaxed_bound_lp(&chsh, 0.2, 0.6 - 1e-6, &cfg).unwrap().bound;
    let at = relaxed_bound_lp(&chsh, 0.2, 0.6, &cfg).unwrap().bound;
    c.close("CHSH LP just below the gap", below, 2.8, 1e-7);
    c.close("CHSH LP at the gap", at, 4.0, 1e-7);

    let i3322 = builtin("i3322").unwrap();
    for a in 0..=10 {
        let i = a as f64 * 0.05;
        for s in [0.0, 1.0] {
            let lp = relaxed_bound_lp(&i3322, i, s, &cfg).unwrap().bound;
            let closed = b_3322(&i, &s).unwrap();
            c.close(&format!("3322 LP at I={i}, S={s}"), lp, closed, 1e-7);
            if s == 0.0 {
                c.close(&format!("3322 LP at I={i} vs 4+8I"), lp, 4.0 + 8.0 * i, 1e-7);
            }
        }
    }
    // Full enumeration of all 2^18 branches in the gap regime, no shortcuts.
    let full = LPConfig {
        symmetry: false,
        ceiling_stop: false,
        ..LPConfig::default()
    };
    let start = Instant::now();
    let r = relaxed_bound_lp(&i3322, 0.3, 0.5, &full).unwrap();
    c.within("3322 point, 2^18 branches", start.elapsed(), Duration::from_secs(60));
    c.ok("3322 full enumeration covers 2^18 branches", r.stats.total == 1 << 18);
    c.close("3322 full enumeration value", r.bound, b_3322(&0.3, &0.5).unwrap(), 1e-7);
}

fn ac3(c: &mut Checks) {
    for (name, m, want) in [("chsh", 2usize, 2.0), ("i3322", 3, 4.0), ("i4422", 4, 7.0)] {
        let (v, _) = deterministic_bound(&builtin(name).unwrap()).unwrap();
        c.close(&format!("{name} deterministic bound"), v, want, 1e-12);
        c.close(&format!("{name} vs m(m-1)/2+1"), v, (m * (m - 1)) as f64 / 2.0 + 1.0, 1e-12);
    }
}

fn ac4(c: &mut Checks) {
    let eps = 1e-12;
    let check = |c: &mut Checks, label: String, m: NPartyModel<f64>, bound: f64, i: f64, s: f64, mm: f64| {
        c.close(&format!("{label} CHSH"), chsh_of(&m), bound, 1e-9);
        let r = measure_report(&m).unwrap();
        c.at_most(&format!("{label} I"), r.i, i + eps);
        c.at_most(&format!("{label} S"), r.s, s + eps);
        c.at_most(&format!("{label} M"), r.m, mm + eps);
    };
    for k in 0..=10 {
        let i = k as f64 * 0.05;
        let m = make_chsh_saturating_model(&ChshCase::IOnly { i }).unwrap();
        check(c, format!("I-only {i}"), m, b_chsh(&i, &0.0, &0.0).unwrap(), i, 0.0, 0.0);
    }
    for k in 0..=20 {
        let mm = k as f64 * 0.1;
        let m = make_chsh_saturating_model(&ChshCase::MOnly { m: mm }).unwrap();
        check(c, format!("M-only {mm}"), m, b_chsh(&0.0, &0.0, &mm).unwrap(), 0.0, 0.0, mm);
    }
    for (i, s) in [(0.0, 1.0), (0.1, 0.8), (0.25, 0.5), (0.4, 0.9), (0.5, 0.0)] {
        let m = make_chsh_saturating_model(&ChshCase::Gap { i, s }).unwrap();
        check(c, format!("gap ({i}, {s})"), m, b_chsh(&i, &s, &0.0).unwrap(), i, s, 0.0);
    }
    for k in 0..=10 {
        let o = k as f64 * 0.1;
        let m = make_outcome_saturating_model(&o).unwrap();
        c.close(&format!("outcome {o} CHSH"), chsh_of(&m), b_outcome(&o).unwrap(), 1e-9);
        let r = measure_report(&m).unwrap();
        c.at_most(&format!("outcome {o} O"), r.o.unwrap(), o + eps);
        c.at_most(&format!("outcome {o} S"), r.s, eps);
        c.at_most(&format!("outcome {o} M"), r.m, eps);
    }
    let o = 2.0 - SQRT_2;
    let m = make_outcome_saturating_model(&o).unwrap();
    let co = c_outcome(&m).unwrap();
    c.close("c_outcome at O = 2 - sqrt2", co, 0.480, 1e-3);
    c.close("c_outcome matches its closed form", co, c_outcome_saturating(o), 1e-9);
}

fn ac5(c: &mut Checks) {
    let q = HallQuadrature::default();
    let mut worst: f64 = 0.0;
    for (x, y) in zoo::spread_setting_pairs(20) {
        worst = worst.max(zoo::hall_verify_singlet(&x, &y, &q).max_deviation);
    }
    // Twenty pairs at x·y = −1/2 in assorted planes.
    for k in 0..20 {
        let x = SphereDirection::from_angles(0.3 + 0.12 * k as f64, 0.7 * k as f64);
        let axis = zoo::spread_setting_pairs(20)[k].0;
        let perp = {
            let (a, b) = (x.vector(), axis.vector());
            let d = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            SphereDirection::normalized([b[0] - d * a[0], b[1] - d * a[1], b[2] - d * a[2]]).unwrap()
        };
        let (xa, pa) = (x.vector(), perp.vector());
        let t = 2.0 * PI / 3.0;
        let y = SphereDirection::normalized([0, 1, 2].map(|i| t.cos() * xa[i] + t.sin() * pa[i])).unwrap();
        c.close("x·y of the -1/2 grid", x.dot(&y), -0.5, 1e-12);
        worst = worst.max(zoo::hall_verify_singlet(&x, &y, &q).max_deviation);
    }
    c.at_most("Hall singlet max deviation", worst, 1e-4);
    c.note(format!("Hall singlet max deviation {worst:.1e}"));

    let start = Instant::now();
    let caps = zoo::hall_capacities(0.5).unwrap();
    c.note(format!("Hall capacities took {:.1} s", start.elapsed().as_secs_f64()));
    c.close("H_max", caps.h_max, 3.65145, 1e-4);
    c.close("H_min", caps.h_min, 3.58521, 1e-4);
    c.close("argmin |x·y|", caps.h_min_at.abs(), 0.9148, 1e-3);
    c.close("C_meas_dep", caps.c_meas_dep, 0.0663, 5e-4);
    c.close("I_uniform", caps.i_uniform, 0.0280, 5e-4);
    c.close("I_CHSH", caps.i_chsh, 0.0463, 1e-4);
    c.close("M", caps.m.value, 0.276, 1e-3);
    c.note(format!("Hall M = {:.7}", caps.m.value));
}

fn ac6(c: &mut Checks) {
    let spec = TonerBaconSpec {
        seed: 2024,
        samples: 1_000_000,
    };
    let mut max_sigma: f64 = 0.0;
    let mut entropy = f64::NAN;
    for (x, y) in zoo::spread_setting_pairs(10) {
        let r = zoo::toner_bacon_run(&x, &y, &spec).unwrap();
        max_sigma = max_sigma.max(r.max_sigma);
        entropy = r.mean_message_entropy;
    }
    c.at_most("Toner-Bacon max deviation in sigma", max_sigma, 4.0);
    c.close("mean message entropy", entropy, 0.85, 0.01);
    c.note(format!("max {max_sigma:.2} sigma, <H> = {entropy:.4}"));
}

fn ac7(c: &mut Checks) {
    let p = SQRT_2 - 1.0;
    let (m, comm) = zoo::pawlowski_model(&p).unwrap();
    // Quoted decimals abbreviate √2 − 1 and h(√2 − 1); compare with those.
    c.close("I", indeterminism(&m).unwrap(), p, 1e-9);
    c.close("S", signaling(&m).unwrap().s, p, 1e-9);
    c.close("O", outcome_dependence(&m).unwrap(), 0.0, 0.0);
    c.close("C_random", c_random(&m).unwrap(), h(p), 1e-4);
    let cfg = CapacityConfig::default();
    let sig = c_sig(&m, &cfg).unwrap();
    c.close("C_sig", sig.value, 0.256, 1e-3);
    c.close("w' at C_sig", sig.golden_weight.unwrap_or(f64::NAN), 0.393, 1e-2);
    let commun = c_commun(&comm, None, &cfg).unwrap();
    c.close("C_commun vs C_sig", commun.c_commun, sig.value, 1e-6);
    c.close("H(M:Y) at w = 1/2", comm.information(0, &[0.5, 0.5]), 0.247, 1e-3);
    c.note(format!("C_random = {:.6}, C_sig = {:.6}", c_random(&m).unwrap(), sig.value));
}

fn ac8(c: &mut Checks) {
    let mermin: NPartyModel<Rational> = zoo::mermin_model(&[[1; 3]; 4]).unwrap();
    let t = observed_correlations(&mermin).unwrap();
    for (ctx, want) in [([0, 0, 1], 1), ([0, 1, 0], 1), ([1, 0, 0], 1), ([1, 1, 1], -1)] {
        c.ok(format!("Mermin correlator {ctx:?}"), correlator(&t, &ctx).unwrap() == Rational::int(want));
    }
    c.ok("Mermin M = 2/3", measurement_dependence(&mermin).unwrap() == Rational::ratio(2, 3));
    let cfg = CapacityConfig::default();
    let cm = c_meas_dep(&mermin, &cfg).unwrap();
    let target = (4.0f64 / 3.0).log2();
    c.close("Mermin C_meas_dep", cm.value, target, 1e-6);
    c.ok("Mermin certified interval contains log2(4/3)", cm.value <= target + 1e-12 && target <= cm.upper + 1e-12);

    let ck: Vec<Vec<Rational>> = zoo::conway_kochen_prior();
    c.ok("Conway-Kochen M = 4/31", prior_distance(&ck) == Rational::ratio(4, 31));
    let rows: Vec<Vec<f64>> = ck.iter().map(|r| r.iter().map(Scalar::to_f64_lossy).collect()).collect();
    let cap = channel_capacity(&rows, &cfg);
    c.at_most("Conway-Kochen capacity", cap.value, zoo::conway_kochen_capacity_bound());

    for gamma in [Rational::ratio(9, 100), Rational::ratio(1, 20)] {
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let hm = zoo::hardy_model(&gamma, a, b).unwrap();
            let t = observed_correlations(&hm).unwrap();
            let zero = Rational::int(0);
            c.ok("Hardy p(u1=u2=1|UU) = 0", t.table[0][3] == zero);
            c.ok("Hardy p(d1=1,u2=0|DU) = 0", t.table[2][2] == zero);
            c.ok("Hardy p(u1=0,d2=1|UD) = 0", t.table[1][1] == zero);
            c.ok("Hardy p(d1=d2=1|DD) = gamma", t.table[3][3] == gamma);
            c.ok("Hardy M = gamma", measurement_dependence(&hm).unwrap() == gamma);
        }
    }
    let gm = zoo::hardy_gamma_max();
    let hm = zoo::hardy_model(&gm, 0, 0).unwrap();
    let bound = zoo::hardy_capacity_bound(gm);
    c.close("Hardy capacity bound at gamma_max", bound, 0.053, 1e-3);
    c.at_most("Hardy capacity at gamma_max", c_meas_dep(&hm, &cfg).unwrap().value, bound);
}

fn ac9(c: &mut Checks) {
    use proptest::prelude::*;
    const CASES: u32 = 10_000;
    let cfg = CapacityConfig::default();
    let run = |c: &mut Checks, name: &str, result: Result<(), String>| match result {
        Ok(()) => c.note(format!("{name}: {CASES} cases")),
        Err(e) => c.failures.push(format!("{name}: {e}")),
    };

    let r = runner(CASES).run(&common::binary_model(), |m| {
        let (i, o) = (indeterminism(&m).unwrap(), outcome_dependence(&m).unwrap());
        prop_assert!(o <= 4.0 * i * (1.0 - i) + 1e-12, "O = {o}, I = {i}");
        Ok(())
    });
    run(c, "O <= 4I(1-I)", r.map_err(|e| e.to_string()));

    let r = runner(CASES).run(&prop_oneof![common::binary_model(), common::multi_outcome_model()], |m| {
        let (i, s) = (indeterminism(&m).unwrap(), signaling(&m).unwrap().s);
        prop_assert!(i + 1e-12 >= s.min((1.0 - s) / 2.0), "I = {i}, S = {s}");
        Ok(())
    });
    run(c, "I >= min{S, (1-S)/2}", r.map_err(|e| e.to_string()));

    let r = runner(CASES).run(&common::binary_model(), |m| {
        let (cr, i) = (c_random(&m).unwrap(), indeterminism(&m).unwrap());
        prop_assert!((cr - h(i)).abs() <= 1e-9, "C_random = {cr}, h(I) = {}", h(i));
        Ok(())
    });
    run(c, "C_random = h(I) for binary outcomes", r.map_err(|e| e.to_string()));

    let r = runner(CASES).run(&common::multi_outcome_model(), |m| {
        let (cr, i) = (c_random(&m).unwrap(), indeterminism(&m).unwrap());
        prop_assert!(cr + 1e-9 >= h(i), "C_random = {cr}, h(I) = {}", h(i));
        Ok(())
    });
    run(c, "C_random >= h(I)", r.map_err(|e| e.to_string()));

    let r = runner(CASES).run(&common::binary_model(), |m| {
        let (co, o) = (c_outcome(&m).unwrap(), outcome_dependence(&m).unwrap());
        let pinsker = 0.5 * o * o * std::f64::consts::LOG2_E;
        let tight = 1.0 - h((1.0 + o) / 2.0);
        prop_assert!(co + 1e-9 >= pinsker.max(tight), "C_outcome = {co}, O = {o}");
        Ok(())
    });
    run(c, "C_outcome >= max{O^2 log2(e)/2, 1-h((1+O)/2)}", r.map_err(|e| e.to_string()));

    let r = runner(CASES).run(&common::binary_model(), |m| {
        let (cs, s) = (c_sig(&m, &cfg).unwrap().value, signaling(&m).unwrap().s);
        prop_assert!(cs + 1e-6 >= 1.0 - h((1.0 + s) / 2.0), "C_sig = {cs}, S = {s}");
        Ok(())
    });
    run(c, "C_sig >= 1-h((1+S)/2)", r.map_err(|e| e.to_string()));

    let r = runner(CASES).run(&common::prior_quadruple(), |rows| {
        let m = prior_distance(&rows);
        let overlap = min_overlap(&rows).unwrap();
        prop_assert!(overlap + 1e-12 >= (1.0 - 1.5 * m).max(0.0), "overlap {overlap}, M = {m}");
        Ok(())
    });
    run(c, "min_overlap >= 1-3M/2", r.map_err(|e| e.to_string()));

    let r = runner(CASES).run(&(0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64), |(m, n, t)| {
        let (lo, hi) = correlator_bounds(&m, &n);
        let (c0, c1) = CmnTriple::new(0.0, m, n).c_range();
        prop_assert!((CmnTriple::new(c0, m, n).correlator() - lo).abs() <= 1e-12);
        prop_assert!((CmnTriple::new(c1, m, n).correlator() - hi).abs() <= 1e-12);
        let mid = CmnTriple::new(c0 + t * (c1 - c0), m, n).correlator();
        prop_assert!(lo - 1e-12 <= mid && mid <= hi + 1e-12);
        Ok(())
    });
    run(c, "per-lambda correlator bounds attained at the c extremes", r.map_err(|e| e.to_string()));
}

fn ac10(c: &mut Checks) {
    let r = runner(1000).run(&common::outcome_independent_model(), |g| {
        let m = &g.model;
        let d = to_deterministic(m).unwrap();
        let zero = Rational::int(0);
        proptest::prop_assert_eq!(observed_correlations(&d).unwrap().table, observed_correlations(m).unwrap().table);
        proptest::prop_assert_eq!(indeterminism(&d).unwrap(), zero.clone());
        proptest::prop_assert_eq!(outcome_dependence(&d).unwrap(), zero);
        let rep = check_commutation(m, &d).unwrap();
        proptest::prop_assert!(rep.holds(), "{rep:?}");
        if g.nosig {
            proptest::prop_assert!(rep.input_nosig && rep.output_nosig);
        }
        if g.free {
            proptest::prop_assert!(rep.input_measurement_independent && rep.output_measurement_independent);
        }
        let (ns, no) = (m.num_setting_tuples(), m.num_outcome_tuples());
        proptest::prop_assert!(d.num_lambdas() <= m.num_lambdas() * (ns * no + 1).pow(2));
        Ok(())
    });
    match r {
        Ok(()) => c.note("1000 random outcome-independent models"),
        Err(e) => c.failures.push(e.to_string()),
    }
}

/// Writes past the test harness's output capture so the per-criterion lines
/// show up in a plain `cargo test` run.
fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn(&mut Checks)); 10] = [
        ("AC1 closed-form bounds", ac1),
        ("AC2 LP versus closed form", ac2),
        ("AC3 deterministic oracle", ac3),
        ("AC4 saturating constructors", ac4),
        ("AC5 Hall model", ac5),
        ("AC6 Toner-Bacon sampler", ac6),
        ("AC7 Pawlowski model", ac7),
        ("AC8 EPR-KS robustness", ac8),
        ("AC9 property suites", ac9),
        ("AC10 determinism transform", ac10),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let mut c = Checks::default();
        let start = Instant::now();
        check(&mut c);
        let status = if c.failures.is_empty() { "PASS" } else { "FAIL" };
        let mut line = format!("[{status}] {name} ({:.1} s)", start.elapsed().as_secs_f64());
        if !c.notes.is_empty() {
            line.push_str(&format!(" - {}", c.notes.join("; ")));
        }
        report(&line);
        for f in &c.failures {
            report(&format!("    {f}"));
        }
        if !c.failures.is_empty() {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
