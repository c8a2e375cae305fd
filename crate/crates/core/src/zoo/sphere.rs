//! Unit directions, the singlet law and quadrature on the sphere.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::UnitSphere;

use crate::error::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereDirection([f64; 3]);

impl SphereDirection {
    /// Accepts a vector whose norm is 1 within 1e-12.
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let norm = dot3(&v, &v).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::out_of_range("direction", format!("{v:?} has norm {norm}")));
        }
        Ok(Self(v))
    }

    /// Rescales any nonzero finite vector to unit length.
    pub fn normalized(v: [f64; 3]) -> Result<Self> {
        let norm = dot3(&v, &v).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::out_of_range("direction", format!("{v:?} cannot be normalized")));
        }
        Ok(Self(v.map(|c| c / norm)))
    }

    /// Polar angle from the z axis and azimuth in the xy plane.
    pub fn from_angles(polar: f64, azimuth: f64) -> Self {
        Self([polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()])
    }

    /// Direction in the xy plane at the given azimuth.
    pub fn in_plane(azimuth: f64) -> Self {
        Self([azimuth.cos(), azimuth.sin(), 0.0])
    }

    pub fn vector(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot3(&self.0, &other.0).clamp(-1.0, 1.0)
    }

    /// Angle in [0, π].
    pub fn angle_to(&self, other: &Self) -> f64 {
        self.dot(other).acos()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.map(|c| -c))
    }

    /// Applies a rotation given as a row-major orthogonal matrix.
    pub fn rotated(&self, r: &[[f64; 3]; 3]) -> Self {
        Self([dot3(&r[0], &self.0), dot3(&r[1], &self.0), dot3(&r[2], &self.0)])
    }
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Sign with sgn(0) = +1.
pub fn sgn(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

fn check_pm(v: i8) -> Result<()> {
    if v == 1 || v == -1 {
        Ok(())
    } else {
        Err(Error::out_of_range("outcome", format!("{v} is not ±1")))
    }
}

/// p(a, b | x, y) = (1 − ab x·y)/4 for the spin singlet.
pub fn singlet_probability(x: &SphereDirection, y: &SphereDirection, a: i8, b: i8) -> Result<f64> {
    check_pm(a)?;
    check_pm(b)?;
    Ok((1.0 - f64::from(a * b) * x.dot(y)) / 4.0)
}

/// Singlet table in the order ++, +−, −+, −−.
pub fn singlet_table(x: &SphereDirection, y: &SphereDirection) -> [f64; 4] {
    let t = x.dot(y);
    [(1.0 - t) / 4.0, (1.0 + t) / 4.0, (1.0 + t) / 4.0, (1.0 - t) / 4.0]
}

/// `n` reproducible setting pairs: x on a Fibonacci spiral, y at angle
/// kπ/(n − 1) from x in a plane that turns with k, so x·y sweeps [−1, 1].
pub fn spread_setting_pairs(n: usize) -> Vec<(SphereDirection, SphereDirection)> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let x = SphereDirection([r * (golden * k as f64).cos(), r * (golden * k as f64).sin(), z]);
            let seed = if x.0[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let u = cross3(&x.0, &seed);
            let un = dot3(&u, &u).sqrt();
            let u = u.map(|c| c / un);
            let w = cross3(&x.0, &u);
            let turn = k as f64;
            let perp = [0, 1, 2].map(|i| turn.cos() * u[i] + turn.sin() * w[i]);
            let phi = if n > 1 { PI * k as f64 / (n - 1) as f64 } else { PI / 2.0 };
            let y = [0, 1, 2].map(|i| phi.cos() * x.0[i] + phi.sin() * perp[i]);
            (x, SphereDirection::normalized(y).expect("unit combination"))
        })
        .collect()
}

/// Gauss-Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// ∫_a^b f by `panels` Gauss-Legendre panels of `order` nodes each.
pub fn integrate_interval(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for (z, w) in nodes.iter().zip(&weights) {
            total += w * f(mid + 0.5 * h * z);
        }
    }
    total * 0.5 * h
}

/// Product rule: Gauss-Legendre in cos θ times the trapezoid rule in azimuth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SphereGrid {
    pub polar: usize,
    pub azimuth: usize,
}

impl Default for SphereGrid {
    fn default() -> Self {
        Self {
            polar: 128,
            azimuth: 256,
        }
    }
}

impl SphereGrid {
    /// ∫ f dΩ over the unit sphere.
    pub fn integrate(&self, f: impl Fn(&SphereDirection) -> f64) -> f64 {
        let (nodes, weights) = gauss_legendre(self.polar);
        let dphi = 2.0 * PI / self.azimuth as f64;
        let mut total = 0.0;
        for (z, w) in nodes.iter().zip(&weights) {
            let r = (1.0 - z * z).sqrt();
            let mut ring = 0.0;
            for k in 0..self.azimuth {
                let phi = (k as f64 + 0.5) * dphi;
                ring += f(&SphereDirection([r * phi.cos(), r * phi.sin(), *z]));
            }
            total += w * ring * dphi;
        }
        total
    }
}

/// Orthonormal frame whose first two axes span `x` and `y`.
pub(crate) fn plane_frame(x: &SphereDirection, y: &SphereDirection) -> [[f64; 3]; 3] {
    let e1 = x.0;
    let mut e2 = y.0;
    let d = dot3(&e1, &e2);
    for k in 0..3 {
        e2[k] -= d * e1[k];
    }
    let mut n = dot3(&e2, &e2).sqrt();
    if n < 1e-9 {
        // Parallel inputs: any perpendicular works.
        let helper = if e1[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        e2 = cross3(&e1, &helper);
        n = dot3(&e2, &e2).sqrt();
    }
    let e2 = e2.map(|c| c / n);
    let e3 = cross3(&e1, &e2);
    [e1, e2, e3]
}

/// Integrates a function that, in the frame spanned by `x` and `y`, only
/// jumps where λ crosses the great circles orthogonal to `x` or `y`.
/// Azimuth is split at those crossings so each piece is smooth.
pub fn integrate_split(
    x: &SphereDirection,
    y: &SphereDirection,
    polar: usize,
    order: usize,
    f: impl Fn(&SphereDirection) -> f64,
) -> f64 {
    let frame = plane_frame(x, y);
    let ax = 0.0;
    let ay = dot3(&y.0, &frame[1]).atan2(dot3(&y.0, &frame[0]));
    let mut cuts: Vec<f64> = [ax, ay]
        .iter()
        .flat_map(|a| [a + PI / 2.0, a - PI / 2.0])
        .map(|a| a.rem_euclid(2.0 * PI))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let first = cuts[0];
    cuts.push(first + 2.0 * PI);

    let (zn, zw) = gauss_legendre(polar);
    let (an, aw) = gauss_legendre(order);
    let mut total = 0.0;
    for (z, wz) in zn.iter().zip(&zw) {
        let r = (1.0 - z * z).sqrt();
        for win in cuts.windows(2) {
            let (lo, hi) = (win[0], win[1]);
            let half = 0.5 * (hi - lo);
            if half <= 0.0 {
                continue;
            }
            let mid = 0.5 * (hi + lo);
            let mut piece = 0.0;
            for (u, wu) in an.iter().zip(&aw) {
                let phi = mid + half * u;
                let (c, s) = (r * phi.cos(), r * phi.sin());
                let v = [0, 1, 2].map(|k| c * frame[0][k] + s * frame[1][k] + z * frame[2][k]);
                piece += wu * f(&SphereDirection(v));
            }
            total += wz * piece * half;
        }
    }
    total
}

/// Seeded uniform directions; sample `i` depends only on `(seed, i)`.
pub struct SphereSampler {
    seed: u64,
}

/// Samples per independent generator stream.
pub const SHARD: u64 = 1 << 16;

impl SphereSampler {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Generator positioned at the start of a shard.
    pub fn shard(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    pub fn draw(rng: &mut ChaCha8Rng) -> SphereDirection {
        let v: [f64; 3] = rng.sample(UnitSphere);
        SphereDirection(v)
    }

    /// Monte Carlo estimate of ∫ f dΩ with `n` samples.
    pub fn integrate(&self, n: u64, f: impl Fn(&SphereDirection) -> f64 + Sync) -> f64 {
        use rayon::prelude::*;
        let shards = n.div_ceil(SHARD);
        let sums: Vec<f64> = (0..shards)
            .into_par_iter()
            .map(|s| {
                let mut rng = self.shard(s);
                let count = SHARD.min(n - s * SHARD);
                (0..count).map(|_| f(&Self::draw(&mut rng))).sum()
            })
            .collect();
        4.0 * PI * sums.iter().sum::<f64>() / n as f64
    }
}
