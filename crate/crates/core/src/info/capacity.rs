//! Discrete memoryless channel capacity.
//!
//! Blahut-Arimoto iteration with the usual certificate: at input law r the
//! mutual information is a lower bound and max_x D(W_x‖rW) an upper bound on
//! the capacity. A per-input bonus term covers objectives of the form
//! I(X;Y) + Σ_x r_x c_x, which is what the communication capacity needs.

use serde::Serialize;

use super::entropy::kl_divergence;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CapacityConfig {
    /// Stop once upper − lower ≤ gap, in bits.
    pub gap: f64,
    pub max_iterations: usize,
    /// Keep the lower bound of every iteration in the result.
    pub record_trace: bool,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        Self {
            gap: 1e-6,
            max_iterations: 100_000,
            record_trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityResult {
    /// Certified lower bound; reported as the capacity.
    pub value: f64,
    pub upper: f64,
    /// Input law achieving `value`.
    pub input: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<f64>,
}

impl CapacityResult {
    pub fn gap(&self) -> f64 {
        self.upper - self.value
    }

    fn trivial(n: usize) -> Self {
        Self {
            value: 0.0,
            upper: 0.0,
            input: vec![1.0 / n.max(1) as f64; n],
            iterations: 0,
            converged: true,
            trace: Vec::new(),
        }
    }
}

pub fn channel_capacity(rows: &[Vec<f64>], cfg: &CapacityConfig) -> CapacityResult {
    channel_capacity_with_bonus(rows, &vec![0.0; rows.len()], cfg)
}

fn rows_identical(rows: &[Vec<f64>]) -> bool {
    rows.iter().all(|r| r == &rows[0])
}

/// Maximizes I(X;Y) + Σ_x r_x bonus_x over input laws r.
pub fn channel_capacity_with_bonus(
    rows: &[Vec<f64>],
    bonus: &[f64],
    cfg: &CapacityConfig,
) -> CapacityResult {
    let nx = rows.len();
    if nx == 0 {
        return CapacityResult::trivial(0);
    }
    if rows_identical(rows) && bonus.iter().all(|&b| b == bonus[0]) {
        let mut r = CapacityResult::trivial(nx);
        r.value = bonus[0];
        r.upper = bonus[0];
        return r;
    }
    let ny = rows[0].len();
    let mut r = vec![1.0 / nx as f64; nx];
    let mut q = vec![0.0; ny];
    let mut d = vec![0.0; nx];
    let mut trace = Vec::new();
    let mut best = (f64::NEG_INFINITY, r.clone());
    let mut upper = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iterations {
        iterations += 1;
        q.iter_mut().for_each(|v| *v = 0.0);
        for (rx, row) in r.iter().zip(rows) {
            for (qy, w) in q.iter_mut().zip(row) {
                *qy += rx * w;
            }
        }
        for x in 0..nx {
            d[x] = kl_divergence(&rows[x], &q) + bonus[x];
        }
        let lower: f64 = r.iter().zip(&d).map(|(rx, dx)| if *rx > 0.0 { rx * dx } else { 0.0 }).sum();
        let up = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        upper = upper.min(up);
        if lower > best.0 {
            best = (lower, r.clone());
        }
        if cfg.record_trace {
            trace.push(lower);
        }
        if upper - best.0 <= cfg.gap {
            converged = true;
            break;
        }
        // Multiplicative update, shifted by the max exponent for stability.
        let mut total = 0.0;
        for x in 0..nx {
            let e = (d[x] - up).exp2();
            r[x] *= e;
            total += r[x];
        }
        r.iter_mut().for_each(|v| *v /= total);
    }

    CapacityResult {
        value: best.0.max(0.0),
        upper,
        input: best.1,
        iterations,
        converged,
        trace,
    }
}

/// Mutual information of a two-input channel with weight `w` on the second row.
pub fn binary_input_information(row0: &[f64], row1: &[f64], w: f64) -> f64 {
    let q: Vec<f64> = row0.iter().zip(row1).map(|(a, b)| (1.0 - w) * a + w * b).collect();
    let mut i = 0.0;
    if w < 1.0 {
        i += (1.0 - w) * kl_divergence(row0, &q);
    }
    if w > 0.0 {
        i += w * kl_divergence(row1, &q);
    }
    i.max(0.0)
}

/// Golden-section maximization of the (concave) mutual information of a
/// two-input channel. Returns (capacity, weight on the second row).
pub fn binary_input_capacity(row0: &[f64], row1: &[f64], tol: f64) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let f = |w: f64| binary_input_information(row0, row1, w);
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let w = 0.5 * (a + b);
    (f(w), w)
}
