//! Relaxed bound of a Bell functional under indeterminism I and signaling S
//! at M = 0, by enumerating marginal branches and solving one LP per branch.
//!
//! Every marginal m, n of a pair lies either low, in [0, I], or high, in
//! [1 − I, 1]. A branch fixes that choice for all marginals. Inside a branch
//! each marginal is written through its distance to the nearest end,
//! m̃ = m (low) or m̃ = 1 − m (high), so all variables live in [0, I].

use rayon::prelude::*;
use serde_json::{json, Value};

use super::functional::BellFunctional;
use super::simplex::{maximize, LpOutcome};
use crate::bounds::gap_reached;
use crate::error::{Error, Result};
use crate::model::{c_range, pm_outcomes, CmnTriple, NPartyModel};

/// Branches are processed in fixed-size blocks so that the early stop at the
/// ceiling happens at the same place whatever the thread count.
const BLOCK: u64 = 1024;

#[derive(Clone, Debug, PartialEq)]
pub struct LPConfig {
    /// Largest number of branches the engine agrees to enumerate.
    pub branch_cap: u64,
    /// Feasibility and optimality tolerance of each LP.
    pub tolerance: f64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Skip branches related by a global outcome flip when the functional
    /// is invariant under it.
    pub symmetry: bool,
    /// Stop once a branch reaches Σ max α, which no table can exceed.
    pub ceiling_stop: bool,
}

impl Default for LPConfig {
    fn default() -> Self {
        Self {
            branch_cap: 1 << 20,
            tolerance: 1e-9,
            jobs: None,
            symmetry: true,
            ceiling_stop: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BranchStats {
    /// Branches in the enumeration domain.
    pub total: u64,
    /// LPs actually solved.
    pub evaluated: u64,
    /// Rejected before solving because some coupling cannot be met.
    pub pruned: u64,
    pub lp_infeasible: u64,
    pub symmetric_skipped: u64,
    /// True when enumeration stopped early at the ceiling.
    pub ceiling_stop: bool,
    /// Marginal mask of the best branch: bit p is the first party's marginal
    /// of pair p, bit P + p the second party's; 1 means high.
    pub best_branch: u64,
}

#[derive(Clone, Debug)]
pub struct RelaxedBound {
    pub bound: f64,
    pub i: f64,
    pub s: f64,
    /// Single-λ model attaining the bound.
    pub witness: NPartyModel<f64>,
    pub stats: BranchStats,
}

impl RelaxedBound {
    pub fn to_json_value(&self) -> Value {
        let s = &self.stats;
        json!({
            "bound": self.bound,
            "I": self.i,
            "S": self.s,
            "branches": {
                "total": s.total,
                "evaluated": s.evaluated,
                "pruned": s.pruned,
                "lp_infeasible": s.lp_infeasible,
                "symmetric_skipped": s.symmetric_skipped,
                "ceiling_stop": s.ceiling_stop,
                "best_branch": s.best_branch,
            },
            "witness": self.witness.to_json_value(),
        })
    }
}

/// Per-pair objective κ + γc + μm + νn.
#[derive(Clone, Copy, Debug)]
struct PairTerms {
    kappa: f64,
    gamma: f64,
    mu: f64,
    nu: f64,
}

impl PairTerms {
    fn new(a: &[f64; 4]) -> Self {
        Self {
            kappa: a[3],
            gamma: a[0] - a[1] - a[2] + a[3],
            mu: a[1] - a[3],
            nu: a[2] - a[3],
        }
    }
}

struct Problem {
    nx: usize,
    ny: usize,
    terms: Vec<PairTerms>,
    /// Column of c̃ for each pair, if γ ≠ 0.
    c_col: Vec<Option<usize>>,
    vars: usize,
    i: f64,
    s: f64,
    gap: bool,
    tol: f64,
}

struct Branch {
    value: f64,
    m: Vec<f64>,
    n: Vec<f64>,
    c: Vec<f64>,
}

enum Eval {
    Pruned,
    Infeasible,
    Solved(Branch),
}

impl Problem {
    fn pairs(&self) -> usize {
        self.nx * self.ny
    }

    /// Maps an enumeration index to a marginal mask. Without the gap a
    /// party's marginal cannot switch sides, so the index only carries one
    /// bit per setting.
    fn mask_of(&self, index: u64) -> u64 {
        if self.gap {
            return index;
        }
        let (nx, ny, p) = (self.nx, self.ny, self.pairs());
        let mut mask = 0u64;
        for j in 0..nx {
            if index >> j & 1 == 1 {
                for k in 0..ny {
                    mask |= 1 << (j * ny + k);
                }
            }
        }
        for k in 0..ny {
            if index >> (nx + k) & 1 == 1 {
                for j in 0..nx {
                    mask |= 1 << (p + j * ny + k);
                }
            }
        }
        mask
    }

    fn domain_bits(&self) -> usize {
        if self.gap {
            2 * self.pairs()
        } else {
            self.nx + self.ny
        }
    }

    /// Coupled marginal pairs as variable indices: the first party's
    /// marginal across the second party's settings and vice versa.
    fn couplings(&self) -> Vec<(usize, usize)> {
        let (nx, ny, p) = (self.nx, self.ny, self.pairs());
        let mut out = Vec::new();
        for j in 0..nx {
            for k in 0..ny {
                for k2 in k + 1..ny {
                    out.push((j * ny + k, j * ny + k2));
                }
            }
        }
        for k in 0..ny {
            for j in 0..nx {
                for j2 in j + 1..nx {
                    out.push((p + j * ny + k, p + j2 * ny + k));
                }
            }
        }
        out
    }

    fn evaluate(&self, mask: u64, couplings: &[(usize, usize)]) -> Eval {
        let p = self.pairs();
        let high = |v: usize| mask >> v & 1 == 1;
        let mut a: Vec<Vec<f64>> = Vec::new();
        let mut b: Vec<f64> = Vec::new();
        let row = |coeffs: &[(usize, f64)], rhs: f64, a: &mut Vec<Vec<f64>>, b: &mut Vec<f64>| {
            let mut r = vec![0.0; self.vars];
            for &(v, x) in coeffs {
                r[v] += x;
            }
            a.push(r);
            b.push(rhs);
        };

        for &(u, v) in couplings {
            if high(u) == high(v) {
                if self.s < self.i {
                    row(&[(u, 1.0), (v, -1.0)], self.s, &mut a, &mut b);
                    row(&[(u, -1.0), (v, 1.0)], self.s, &mut a, &mut b);
                }
            } else {
                if !self.gap {
                    return Eval::Pruned;
                }
                if self.s < 1.0 {
                    row(&[(u, -1.0), (v, -1.0)], self.s - 1.0, &mut a, &mut b);
                }
            }
        }
        for v in 0..2 * p {
            row(&[(v, 1.0)], self.i, &mut a, &mut b);
        }

        let mut obj = vec![0.0; self.vars];
        let mut constant = 0.0;
        for q in 0..p {
            let t = self.terms[q];
            let (mv, nv) = (q, p + q);
            let (mh, nh) = (high(mv), high(nv));
            constant += t.kappa;
            if mh {
                constant += t.mu;
                obj[mv] -= t.mu;
            } else {
                obj[mv] += t.mu;
            }
            if nh {
                constant += t.nu;
                obj[nv] -= t.nu;
            } else {
                obj[nv] += t.nu;
            }
            let Some(cv) = self.c_col[q] else { continue };
            let up = t.gamma > 0.0;
            match (mh, nh) {
                (false, false) => {
                    obj[cv] += t.gamma;
                    if up {
                        row(&[(cv, 1.0), (mv, -1.0)], 0.0, &mut a, &mut b);
                        row(&[(cv, 1.0), (nv, -1.0)], 0.0, &mut a, &mut b);
                    }
                }
                (true, true) => {
                    constant += t.gamma;
                    obj[cv] -= t.gamma;
                    if up {
                        row(&[(mv, 1.0), (cv, -1.0)], 0.0, &mut a, &mut b);
                        row(&[(nv, 1.0), (cv, -1.0)], 0.0, &mut a, &mut b);
                    } else {
                        row(&[(cv, 1.0), (mv, -1.0), (nv, -1.0)], 0.0, &mut a, &mut b);
                    }
                }
                (true, false) => {
                    obj[cv] += t.gamma;
                    if up {
                        row(&[(cv, 1.0), (nv, -1.0)], 0.0, &mut a, &mut b);
                    } else {
                        row(&[(nv, 1.0), (mv, -1.0), (cv, -1.0)], 0.0, &mut a, &mut b);
                    }
                }
                (false, true) => {
                    obj[cv] += t.gamma;
                    if up {
                        row(&[(cv, 1.0), (mv, -1.0)], 0.0, &mut a, &mut b);
                    } else {
                        row(&[(mv, 1.0), (nv, -1.0), (cv, -1.0)], 0.0, &mut a, &mut b);
                    }
                }
            }
        }

        let x = match maximize(&obj, &a, &b, self.tol) {
            LpOutcome::Optimal { x, .. } => x,
            // Every variable is boxed in [0, I], so only infeasibility remains.
            LpOutcome::Infeasible | LpOutcome::Unbounded => return Eval::Infeasible,
        };

        let clamp = |v: f64| v.clamp(0.0, self.i);
        let side = |v: usize| if high(v) { 1.0 - clamp(x[v]) } else { clamp(x[v]) };
        let m: Vec<f64> = (0..p).map(side).collect();
        let n: Vec<f64> = (0..p).map(|q| side(p + q)).collect();
        let c: Vec<f64> = (0..p)
            .map(|q| {
                let (lo, hi) = c_range(&m[q], &n[q]);
                let raw = match self.c_col[q] {
                    Some(cv) if high(q) && high(p + q) => 1.0 - x[cv],
                    Some(cv) => x[cv],
                    None => lo,
                };
                // lo can exceed hi by one ulp when m + n − 1 rounds up.
                raw.clamp(lo.min(hi), hi)
            })
            .collect();
        let value = constant + obj.iter().zip(&x).map(|(o, v)| o * v).sum::<f64>();
        Eval::Solved(Branch { value, m, n, c })
    }
}

/// Maximum of the functional over models with indeterminism at most `i`,
/// signaling at most `s` and no measurement dependence.
pub fn relaxed_bound_lp(func: &BellFunctional, i: f64, s: f64, config: &LPConfig) -> Result<RelaxedBound> {
    if !(0.0..=0.5).contains(&i) {
        return Err(Error::out_of_range("I", format!("{i} is outside [0, 1/2]")));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::out_of_range("S", format!("{s} is outside [0, 1]")));
    }
    if config.branch_cap == 0 || !(config.tolerance > 0.0) || config.jobs == Some(0) {
        return Err(Error::out_of_range("LP config", "caps and tolerance must be positive"));
    }
    let (nx, ny) = (func.nx(), func.ny());
    let pairs = nx * ny;
    let terms: Vec<PairTerms> = func.alpha.iter().flatten().map(PairTerms::new).collect();
    let mut vars = 2 * pairs;
    let c_col = terms
        .iter()
        .map(|t| {
            (t.gamma != 0.0).then(|| {
                vars += 1;
                vars - 1
            })
        })
        .collect();
    let problem = Problem {
        nx,
        ny,
        terms,
        c_col,
        vars,
        i,
        s,
        gap: gap_reached(&i, &s),
        tol: config.tolerance,
    };
    let bits = problem.domain_bits();
    if bits >= 64 || (1u64 << bits) > config.branch_cap {
        return Err(Error::ResourceCap(format!(
            "2^{bits} marginal branches exceed the branch cap {}",
            config.branch_cap
        )));
    }

    let run = || search(&problem, func, bits, config);
    let (best, stats) = match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let witness = witness_model(nx, ny, &best, stats.best_branch, i, s)?;
    Ok(RelaxedBound {
        bound: best.value,
        i,
        s,
        witness,
        stats,
    })
}

fn search(problem: &Problem, func: &BellFunctional, bits: usize, config: &LPConfig) -> (Branch, BranchStats) {
    let total = 1u64 << bits;
    let symmetric = config.symmetry && func.flip_symmetric() && bits > 0;
    let ceiling = func.ceiling();
    let couplings = problem.couplings();
    let mut stats = BranchStats {
        total,
        ..Default::default()
    };
    let mut best: Option<(u64, Branch)> = None;
    let mut start = 0u64;
    while start < total {
        let end = (start + BLOCK).min(total);
        let results: Vec<(u64, Eval)> = (start..end)
            .into_par_iter()
            .filter(|&idx| !(symmetric && idx >> (bits - 1) & 1 == 1))
            .map(|idx| {
                let mask = problem.mask_of(idx);
                (mask, problem.evaluate(mask, &couplings))
            })
            .collect();
        if symmetric {
            stats.symmetric_skipped += (end - start) - results.len() as u64;
        }
        for (mask, eval) in results {
            match eval {
                Eval::Pruned => stats.pruned += 1,
                Eval::Infeasible => {
                    stats.evaluated += 1;
                    stats.lp_infeasible += 1;
                }
                Eval::Solved(br) => {
                    stats.evaluated += 1;
                    let better = match &best {
                        None => true,
                        Some((bm, b)) => br.value > b.value || (br.value == b.value && mask < *bm),
                    };
                    if better {
                        best = Some((mask, br));
                    }
                }
            }
        }
        start = end;
        if config.ceiling_stop {
            if let Some((_, b)) = &best {
                if b.value >= ceiling - config.tolerance && start < total {
                    stats.ceiling_stop = true;
                    break;
                }
            }
        }
    }
    // The all-low branch with every marginal at zero is always feasible.
    let (mask, branch) = best.expect("all-low branch is feasible");
    stats.best_branch = mask;
    (branch, stats)
}

fn witness_model(nx: usize, ny: usize, best: &Branch, mask: u64, i: f64, s: f64) -> Result<NPartyModel<f64>> {
    let settings = vec![
        (1..=nx).map(|j| format!("x{j}")).collect(),
        (1..=ny).map(|k| format!("y{k}")).collect(),
    ];
    let joint = (0..nx * ny)
        .map(|q| {
            let d = CmnTriple::new(best.c[q], best.m[q], best.n[q]).to_distribution();
            let d = d.map(|v| v.max(0.0));
            let total: f64 = d.iter().sum();
            vec![d.iter().map(|v| v / total).collect()]
        })
        .collect();
    let prior = vec![vec![1.0]; nx * ny];
    let model = NPartyModel::new(
        settings,
        vec![pm_outcomes(), pm_outcomes()],
        vec!["lambda".to_string()],
        joint,
        prior,
    )?;
    Ok(model.with_metadata(json!({
        "kind": "relaxed-lp-witness",
        "I": i,
        "S": s,
        "branch": mask,
        "single_lambda": "At M = 0 the functional is linear in p(lambda), so its supremum over models is reached at a single extreme lambda; one lambda carrying the optimal per-lambda table is therefore a maximizer.",
    })))
}
