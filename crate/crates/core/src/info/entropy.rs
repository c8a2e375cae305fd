//! Shannon quantities in bits, with 0 log 0 = 0.

use crate::error::{Error, Result};

/// −x log₂ x, zero at x = 0.
pub fn g(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

fn h2(x: f64) -> f64 {
    g(x) + g(1.0 - x)
}

/// Binary entropy h(x) = −x log₂ x − (1 − x) log₂(1 − x).
pub fn binary_entropy(x: f64) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    if !(-SLACK..=1.0 + SLACK).contains(&x) || x.is_nan() {
        return Err(Error::out_of_range("binary entropy argument", format!("{x} is outside [0, 1]")));
    }
    Ok(h2(x.clamp(0.0, 1.0)))
}

/// Binary entropy without range checking; arguments are clamped.
pub(crate) fn h(x: f64) -> f64 {
    h2(x.clamp(0.0, 1.0))
}

pub fn entropy(dist: &[f64]) -> f64 {
    dist.iter().map(|&p| g(p)).sum()
}

/// D(p‖q) in bits; infinite when p is not absolutely continuous w.r.t. q.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return f64::INFINITY;
        }
        d += pi * (pi / qi).log2();
    }
    d
}

/// I(A;B) of a row-major `na × nb` joint distribution.
pub fn mutual_information(joint: &[f64], na: usize, nb: usize) -> f64 {
    let mut pa = vec![0.0; na];
    let mut pb = vec![0.0; nb];
    for a in 0..na {
        for b in 0..nb {
            let p = joint[a * nb + b];
            pa[a] += p;
            pb[b] += p;
        }
    }
    let mi = entropy(&pa) + entropy(&pb) - entropy(joint);
    mi.max(0.0)
}
