//! Linear Bell functionals over binary-outcome bipartite correlations.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Outcome-pair order used by coefficient arrays: ++, +−, −+, −−.
pub const OUTCOME_PAIRS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

#[derive(Clone, Debug, PartialEq)]
pub struct BellFunctional {
    pub name: Option<String>,
    /// `alpha[j][k][ab]` multiplies p(a, b | x_j, y_k).
    pub alpha: Vec<Vec<[f64; 4]>>,
    /// Correlator coefficients when the functional was given in that form.
    pub correlator: Option<Vec<Vec<f64>>>,
    /// Classical bound quoted alongside the coefficients, if any.
    pub declared_bound: Option<f64>,
}

impl BellFunctional {
    pub fn new(alpha: Vec<Vec<[f64; 4]>>) -> Result<Self> {
        let ny = alpha.first().map(Vec::len).unwrap_or(0);
        if alpha.is_empty() || ny == 0 || alpha.iter().any(|r| r.len() != ny) {
            return Err(Error::Structure("coefficients must form a nonempty |X| x |Y| grid".into()));
        }
        if alpha.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::out_of_range("coefficient", "non-finite value"));
        }
        Ok(Self {
            name: None,
            alpha,
            correlator: None,
            declared_bound: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.declared_bound = Some(bound);
        self
    }

    pub fn nx(&self) -> usize {
        self.alpha.len()
    }

    pub fn ny(&self) -> usize {
        self.alpha[0].len()
    }

    /// Value on a table `p[j][k][ab]`.
    pub fn evaluate(&self, p: &[Vec<[f64; 4]>]) -> f64 {
        let mut v = 0.0;
        for (aj, pj) in self.alpha.iter().zip(p) {
            for (ajk, pjk) in aj.iter().zip(pj) {
                for (a, q) in ajk.iter().zip(pjk) {
                    v += a * q;
                }
            }
        }
        v
    }

    /// Unchanged under flipping both outcomes.
    pub fn flip_symmetric(&self) -> bool {
        self.alpha
            .iter()
            .flatten()
            .all(|a| a[0] == a[3] && a[1] == a[2])
    }

    /// Σ_jk max_ab α^{ab}_jk, an upper bound on the value of any table.
    pub fn ceiling(&self) -> f64 {
        self.alpha
            .iter()
            .flatten()
            .map(|a| a.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
            .sum()
    }

    pub fn from_json_value(doc: &Value) -> Result<Self> {
        let obj = doc
            .as_object()
            .ok_or_else(|| Error::Structure("functional document must be an object".into()))?;
        let number = |v: &Value| -> Result<f64> { f64::from_json(v) };
        let mut f = if let Some(corr) = obj.get("correlator") {
            let rows = corr
                .as_array()
                .ok_or_else(|| Error::Structure("`correlator` must be a matrix".into()))?;
            let matrix = rows
                .iter()
                .map(|r| {
                    r.as_array()
                        .ok_or_else(|| Error::Structure("`correlator` rows must be arrays".into()))?
                        .iter()
                        .map(number)
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            functional_from_correlators(&matrix)?
        } else if let Some(alpha) = obj.get("alpha") {
            let rows = alpha
                .as_array()
                .ok_or_else(|| Error::Structure("`alpha` must be a nested array".into()))?;
            let grid = rows
                .iter()
                .map(|r| {
                    r.as_array()
                        .ok_or_else(|| Error::Structure("`alpha` rows must be arrays".into()))?
                        .iter()
                        .map(|cell| {
                            let cell = cell
                                .as_array()
                                .filter(|c| c.len() == 4)
                                .ok_or_else(|| {
                                    Error::Structure("each `alpha` cell needs 4 coefficients (++, +-, -+, --)".into())
                                })?;
                            Ok([number(&cell[0])?, number(&cell[1])?, number(&cell[2])?, number(&cell[3])?])
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            BellFunctional::new(grid)?
        } else {
            return Err(Error::Structure("functional needs `alpha` or `correlator`".into()));
        };
        if let Some(b) = obj.get("bound") {
            if !b.is_null() {
                f.declared_bound = Some(number(b)?);
            }
        }
        if let Some(Value::String(n)) = obj.get("name") {
            f.name = Some(n.clone());
        }
        Ok(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_value(&serde_json::from_str(&text)?)
    }

    pub fn to_json_value(&self) -> Value {
        let mut v = match &self.correlator {
            Some(c) => json!({ "correlator": c }),
            None => json!({ "alpha": self.alpha }),
        };
        if let Some(n) = &self.name {
            v["name"] = json!(n);
        }
        if let Some(b) = self.declared_bound {
            v["bound"] = json!(b);
        }
        v
    }
}

/// Expands ⟨X_jY_k⟩ coefficients into outcome-pair coefficients α·ab.
pub fn functional_from_correlators(coeffs: &[Vec<f64>]) -> Result<BellFunctional> {
    let alpha = coeffs
        .iter()
        .map(|row| {
            row.iter()
                .map(|&c| OUTCOME_PAIRS.map(|(a, b)| c * f64::from(a * b)))
                .collect()
        })
        .collect();
    let mut f = BellFunctional::new(alpha)?;
    f.correlator = Some(coeffs.to_vec());
    Ok(f)
}

/// Correlator coefficients of the m-setting family: 1 for j + k ≤ m + 1,
/// −1 for j + k = m + 2, 0 otherwise (one-based indices).
pub fn imm22_correlators(m: usize) -> Vec<Vec<f64>> {
    (1..=m)
        .map(|j| {
            (1..=m)
                .map(|k| {
                    if j + k <= m + 1 {
                        1.0
                    } else if j + k == m + 2 {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Built-in functionals: `chsh`, `i3322`, `i4422` and generally `iMM22`.
pub fn builtin(name: &str) -> Option<BellFunctional> {
    let m = match name {
        "chsh" => 2,
        _ => {
            let digits = name.strip_prefix('i')?.strip_suffix("22")?;
            let half = digits.len() / 2;
            if digits.len() % 2 != 0 || digits[..half] != digits[half..] {
                return None;
            }
            digits[..half].parse::<usize>().ok().filter(|&m| m >= 2)?
        }
    };
    let f = functional_from_correlators(&imm22_correlators(m)).ok()?;
    let bound = (m * (m - 1)) as f64 / 2.0 + 1.0;
    Some(f.with_name(name).with_bound(bound))
}

/// Best deterministic assignment: outcomes of the first party per setting,
/// then the second party's.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterministicStrategy {
    pub a: Vec<i8>,
    pub b: Vec<i8>,
}

/// Largest deterministic settings-to-outcomes assignments allowed.
pub const DETERMINISTIC_CAP: usize = 26;

/// Exact maximum of the functional over local deterministic strategies.
pub fn deterministic_bound(func: &BellFunctional) -> Result<(f64, DeterministicStrategy)> {
    let (nx, ny) = (func.nx(), func.ny());
    if nx + ny > DETERMINISTIC_CAP {
        return Err(Error::ResourceCap(format!(
            "{} deterministic strategies exceed the enumeration cap 2^{DETERMINISTIC_CAP}",
            nx + ny
        )));
    }
    let idx = |a: bool, b: bool| (a as usize) * 2 + (b as usize);
    let mut best = (f64::NEG_INFINITY, 0u64);
    for code in 0..(1u64 << (nx + ny)) {
        let bit = |i: usize| (code >> (nx + ny - 1 - i)) & 1 == 1;
        let mut v = 0.0;
        for j in 0..nx {
            for k in 0..ny {
                v += func.alpha[j][k][idx(bit(j), bit(nx + k))];
            }
        }
        if v > best.0 {
            best = (v, code);
        }
    }
    let code = best.1;
    let sign = |i: usize| if (code >> (nx + ny - 1 - i)) & 1 == 1 { -1 } else { 1 };
    Ok((
        best.0,
        DeterministicStrategy {
            a: (0..nx).map(sign).collect(),
            b: (nx..nx + ny).map(sign).collect(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_bounds_of_builtins() {
        assert_eq!(deterministic_bound(&builtin("chsh").unwrap()).unwrap().0, 2.0);
        assert_eq!(deterministic_bound(&builtin("i3322").unwrap()).unwrap().0, 4.0);
        assert_eq!(deterministic_bound(&builtin("i4422").unwrap()).unwrap().0, 7.0);
        assert!(builtin("i3422").is_none());
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn i3322_pattern() {
        let c = imm22_correlators(3);
        assert_eq!(c, vec![vec![1.0, 1.0, 1.0], vec![1.0, 1.0, -1.0], vec![1.0, -1.0, 0.0]]);
    }

    #[test]
    fn zero_matrix_has_zero_bound() {
        let f = functional_from_correlators(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(deterministic_bound(&f).unwrap().0, 0.0);
    }

    #[test]
    fn strategy_reaches_the_bound() {
        let f = builtin("chsh").unwrap();
        let (v, s) = deterministic_bound(&f).unwrap();
        let c = f.correlator.as_ref().unwrap();
        let mut total = 0.0;
        for j in 0..2 {
            for k in 0..2 {
                total += c[j][k] * f64::from(s.a[j] * s.b[k]);
            }
        }
        assert_eq!(total, v);
    }

    #[test]
    fn json_forms() {
        let doc = json!({"correlator": [[1, 1], [1, -1]], "bound": 2});
        let f = BellFunctional::from_json_value(&doc).unwrap();
        assert_eq!(f.declared_bound, Some(2.0));
        assert!(f.flip_symmetric());
        let raw = json!({"alpha": [[[1, 0, 0, 0]]]});
        let g = BellFunctional::from_json_value(&raw).unwrap();
        assert!(!g.flip_symmetric());
        assert_eq!(g.ceiling(), 1.0);
        assert!(BellFunctional::from_json_value(&json!({"alpha": [[[1, 0, 0]]]})).is_err());
        assert!(BellFunctional::from_json_value(&json!({})).is_err());
    }
}
