//! Dense two-phase tableau simplex for small problems
//! `max cᵀx  s.t.  Ax ≤ b, x ≥ 0`.

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows + 1` rows of `cols + 1` entries; the last row is the objective,
    /// the last column the right-hand side.
    data: Vec<f64>,
    basis: Vec<usize>,
    tol: f64,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    fn width(&self) -> usize {
        self.cols + 1
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width();
        let pv = self.at(pr, pc);
        let inv = 1.0 / pv;
        for c in 0..w {
            self.data[pr * w + c] *= inv;
        }
        self.data[pr * w + pc] = 1.0;
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.data[r * w + pc];
            if f == 0.0 {
                continue;
            }
            for c in 0..w {
                let v = self.data[pr * w + c];
                if v != 0.0 {
                    self.data[r * w + c] -= f * v;
                }
            }
            self.data[r * w + pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Runs simplex iterations on columns `< allowed`. Returns false when unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        let obj = self.rows;
        let mut degenerate_run = 0usize;
        let limit = 50 * (self.rows + self.cols + 10);
        for _ in 0..limit {
            let bland = degenerate_run > 8;
            let mut enter = None;
            let mut best = -self.tol;
            for c in 0..allowed {
                let v = self.at(obj, c);
                if v < best {
                    enter = Some(c);
                    if bland {
                        break;
                    }
                    best = v;
                }
            }
            let Some(pc) = enter else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > self.tol {
                    let ratio = self.at(r, self.cols) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-12
                                || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((pr, ratio)) = leave else {
                return false;
            };
            if ratio.abs() <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(pr, pc);
        }
        true
    }
}

/// Solves `max cᵀx` subject to `a x ≤ b` and `x ≥ 0`.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64], tol: f64) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    let negative: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let n_art = negative.len();
    // Columns: x (n), slack/surplus (m), artificial (n_art).
    let cols = n + m + n_art;
    let w = cols + 1;
    let mut data = vec![0.0; (m + 1) * w];
    let mut basis = vec![0; m];
    let mut art = 0;
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            data[i * w + j] = sign * a[i][j];
        }
        data[i * w + n + i] = sign;
        data[i * w + cols] = sign * b[i];
        if sign < 0.0 {
            data[i * w + n + m + art] = 1.0;
            basis[i] = n + m + art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }
    let mut t = Tableau {
        rows: m,
        cols,
        data,
        basis,
        tol,
    };

    if n_art > 0 {
        // Phase 1: maximize −Σ artificials.
        for k in 0..n_art {
            t.data[m * w + n + m + k] = 1.0;
        }
        for &i in &negative {
            for c in 0..w {
                t.data[m * w + c] -= t.data[i * w + c];
            }
        }
        t.optimize(cols);
        if t.at(m, cols) < -tol {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificials out of the basis.
        for r in 0..m {
            if t.basis[r] >= n + m {
                if let Some(pc) = (0..n + m).find(|&c| t.at(r, c).abs() > tol) {
                    t.pivot(r, pc);
                }
            }
        }
        // Artificial columns never re-enter.
        for r in 0..=m {
            for k in 0..n_art {
                t.data[r * w + n + m + k] = 0.0;
            }
        }
    }

    // Phase 2 objective row: −c, then eliminate basic columns.
    for c in 0..w {
        t.data[m * w + c] = 0.0;
    }
    for j in 0..n {
        t.data[m * w + j] = -c[j];
    }
    for r in 0..m {
        let bc = t.basis[r];
        let f = t.data[m * w + bc];
        if f != 0.0 {
            for col in 0..w {
                t.data[m * w + col] -= f * t.data[r * w + col];
            }
        }
    }
    if !t.optimize(n + m) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.at(r, cols);
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { value, x }
}
