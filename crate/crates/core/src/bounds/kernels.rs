//! Formula kernels behind the outcome-relaxed bound and per-λ correlator limits.

use serde::Serialize;

use crate::info::entropy::g;
use crate::scalar::Scalar;

/// Range [2|m+n−1| − 1, 1 − 2|m−n|] of ⟨XY⟩ for a binary pair with
/// marginals m, n; the ends are reached at the extremes of c.
pub fn correlator_bounds<T: Scalar>(m: &T, n: &T) -> (T, T) {
    let one = T::one();
    let two = T::int(2);
    let lo = two.clone() * (m.clone() + n.clone() - one.clone()).abs() - one.clone();
    let hi = one - two * (m.clone() - n.clone()).abs();
    (lo, hi)
}

/// f(a, b, c) = min{a, b, ab + c/4}.
pub fn outcome_kernel_f(a: f64, b: f64, c: f64) -> f64 {
    a.min(b).min(a * b + c / 4.0)
}

/// Upper bound on the per-λ CHSH value of a nonsignaling box with marginals
/// (m, m′) and (n, n′) and outcome dependence at most O.
pub fn outcome_kernel(m: f64, mp: f64, n: f64, np: f64, o: f64) -> f64 {
    4.0 * (outcome_kernel_f(1.0 - m, 1.0 - n, o)
        + outcome_kernel_f(m, np, o)
        + outcome_kernel_f(mp, n, o)
        + outcome_kernel_f(mp, 1.0 - np, o))
        - 4.0 * mp
        - 2.0
}

/// Outcome capacity of the saturating boxes at outcome dependence O.
pub fn c_outcome_saturating(o: f64) -> f64 {
    let r = 1.0 / (2.0 - o);
    g(o / 2.0) + g(1.5 - r) - g((1.0 + o) / 2.0 - r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeMaximizerCheck {
    pub o: f64,
    /// 4/(2 − O).
    pub bound: f64,
    /// (m, m′, n, n′) = (3/2 − 1/(2−O), 1/2, 1 − O/2, 1 − O/2).
    pub claimed_point: [f64; 4],
    pub claimed_value: f64,
    /// Maximum over m on the claimed line, sampled at `resolution`.
    pub line_max: f64,
    pub line_argmax: f64,
    /// Best value from a coarse 4-D grid followed by local refinement.
    pub search_max: f64,
    pub search_argmax: [f64; 4],
    pub resolution: f64,
}

impl OutcomeMaximizerCheck {
    /// No sampled point beats the bound and the claimed point attains it.
    pub fn holds(&self, tol: f64) -> bool {
        self.search_max <= self.bound + tol
            && self.line_max <= self.bound + tol
            && (self.claimed_value - self.bound).abs() <= tol
    }
}

fn kernel_at(p: &[f64; 4], o: f64) -> f64 {
    outcome_kernel(p[0], p[1], p[2], p[3], o)
}

/// Compass search on [0,1]^4 down to a step of 1e-10.
fn refine(start: [f64; 4], o: f64, step: f64) -> ([f64; 4], f64) {
    let mut best = start;
    let mut val = kernel_at(&best, o);
    let mut step = step;
    while step > 1e-10 {
        let mut improved = false;
        for k in 0..4 {
            for dir in [1.0, -1.0] {
                let mut p = best;
                p[k] = (p[k] + dir * step).clamp(0.0, 1.0);
                let v = kernel_at(&p, o);
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

/// Re-derives the location of the maximum of [`outcome_kernel`] at fixed O.
///
/// A 1-D scan over m on the claimed line at `resolution`, plus a 4-D grid
/// with step `coarse` whose best cells are refined by compass search.
pub fn verify_outcome_maximizer(o: f64, resolution: f64, coarse: f64) -> OutcomeMaximizerCheck {
    let bound = 4.0 / (2.0 - o);
    let claimed = [1.5 - 1.0 / (2.0 - o), 0.5, 1.0 - o / 2.0, 1.0 - o / 2.0];
    let claimed_value = kernel_at(&claimed, o);

    let steps = (1.0 / resolution).round() as usize;
    let (mut line_max, mut line_argmax) = (f64::NEG_INFINITY, 0.0);
    for k in 0..=steps {
        let m = k as f64 / steps as f64;
        let v = outcome_kernel(m, claimed[1], claimed[2], claimed[3], o);
        if v > line_max {
            line_max = v;
            line_argmax = m;
        }
    }

    let n = (1.0 / coarse).round() as usize;
    let pts: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    const KEEP: usize = 8;
    let mut top: Vec<(f64, [f64; 4])> = Vec::with_capacity(KEEP + 1);
    for &a in &pts {
        for &b in &pts {
            for &c in &pts {
                for &d in &pts {
                    let p = [a, b, c, d];
                    let v = kernel_at(&p, o);
                    if top.len() < KEEP || v > top[top.len() - 1].0 {
                        let pos = top.partition_point(|t| t.0 >= v);
                        top.insert(pos, (v, p));
                        top.truncate(KEEP);
                    }
                }
            }
        }
    }
    let (mut search_argmax, mut search_max) = refine(claimed, o, coarse);
    for (_, p) in top {
        let (q, v) = refine(p, o, coarse);
        if v > search_max {
            search_max = v;
            search_argmax = q;
        }
    }

    OutcomeMaximizerCheck {
        o,
        bound,
        claimed_point: claimed,
        claimed_value,
        line_max,
        line_argmax,
        search_max,
        search_argmax,
        resolution,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claimed_point_attains_the_bound() {
        for &o in &[0.0, 0.2, 2.0 - std::f64::consts::SQRT_2, 0.9, 1.0] {
            let c = [1.5 - 1.0 / (2.0 - o), 0.5, 1.0 - o / 2.0, 1.0 - o / 2.0];
            assert!((kernel_at(&c, o) - 4.0 / (2.0 - o)).abs() < 1e-12, "O = {o}");
        }
    }

    #[test]
    fn saturating_capacity_range() {
        assert!(c_outcome_saturating(0.0).abs() < 1e-12);
        assert!((c_outcome_saturating(1.0) - 1.0).abs() < 1e-12);
        assert!((c_outcome_saturating(2.0 - std::f64::consts::SQRT_2) - 0.480).abs() < 1e-3);
    }

    #[test]
    fn correlator_bounds_examples() {
        assert_eq!(correlator_bounds(&0.5, &0.5), (-1.0, 1.0));
        assert_eq!(correlator_bounds(&1.0, &0.0), (-1.0, -1.0));
        assert_eq!(correlator_bounds(&1.0, &1.0), (1.0, 1.0));
    }
}
