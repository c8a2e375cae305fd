//! Closed-form relaxed Bell bounds and minimal-relaxation thresholds.

pub mod kernels;
pub mod saturating;

use serde::Serialize;

pub use kernels::{
    c_outcome_saturating, correlator_bounds, outcome_kernel, outcome_kernel_f,
    verify_outcome_maximizer, OutcomeMaximizerCheck,
};
pub use saturating::{
    make_chsh_saturating_model, make_outcome_saturating_model, make_prior_family, min_overlap,
    ChshCase, PriorFamily,
};

use crate::error::{Error, Result};
use crate::info::entropy::h;
use crate::scalar::Scalar;

fn check_range<T: Scalar>(what: &'static str, x: &T, hi: T) -> Result<()> {
    if *x < T::zero() || *x > hi {
        return Err(Error::out_of_range(what, format!("{x:?} is outside [0, {hi:?}]")));
    }
    Ok(())
}

/// Relaxation budget (I, S, M) with an optional outcome-dependence budget O.
#[derive(Clone, Debug, PartialEq)]
pub struct RelaxationBudget<T> {
    pub i: T,
    pub s: T,
    pub m: T,
    pub o: Option<T>,
}

impl<T: Scalar> RelaxationBudget<T> {
    pub fn new(i: T, s: T, m: T) -> Result<Self> {
        check_range("I", &i, T::half())?;
        check_range("S", &s, T::one())?;
        check_range("M", &m, T::int(2))?;
        Ok(Self { i, s, m, o: None })
    }

    pub fn with_outcome(mut self, o: T) -> Result<Self> {
        check_range("O", &o, T::int(2))?;
        self.o = Some(o);
        Ok(self)
    }
}

/// True when S ≥ 1 − 2I, i.e. signaling can carry a marginal across the
/// forbidden middle interval. Float types allow a tiny slack so grid points
/// landing on the boundary are classified consistently.
pub fn gap_reached<T: Scalar>(i: &T, s: &T) -> bool {
    s.clone() + T::boundary_epsilon() >= T::one() - T::int(2) * i.clone()
}

/// Tight CHSH bound under indeterminism I, signaling S and measurement dependence M.
pub fn b_chsh<T: Scalar>(i: &T, s: &T, m: &T) -> Result<T> {
    check_range("I", i, T::half())?;
    check_range("S", s, T::one())?;
    check_range("M", m, T::int(2))?;
    let four = T::int(4);
    if gap_reached(i, s) || *m >= T::ratio(2, 3) {
        return Ok(four);
    }
    Ok(four - (T::one() - T::int(2) * i.clone()) * (T::int(2) - T::int(3) * m.clone()))
}

/// Nonsignaling CHSH bound, `b_chsh(I, 0, M)`.
pub fn b_chsh_nosig<T: Scalar>(i: &T, m: &T) -> Result<T> {
    b_chsh(i, &T::zero(), m)
}

/// CHSH bound for nonsignaling, measurement-independent models with outcome dependence O.
pub fn b_outcome<T: Scalar>(o: &T) -> Result<T> {
    if *o < T::zero() || *o > T::one() {
        return Err(Error::out_of_range(
            "O",
            format!("{o:?}: binary-outcome models have 0 <= O <= 1"),
        ));
    }
    Ok(T::int(4) / (T::int(2) - o.clone()))
}

/// Bound of the correlator form of I3322 under (I, S).
pub fn b_3322<T: Scalar>(i: &T, s: &T) -> Result<T> {
    check_range("I", i, T::half())?;
    check_range("S", s, T::one())?;
    if gap_reached(i, s) {
        Ok(T::int(8))
    } else {
        Ok(T::int(4) + T::int(8) * i.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MmBound<T> {
    pub value: T,
    /// Tightness is only established for m ≤ 3.
    pub conjectured: bool,
}

/// Relaxed bound of the m-setting correlator family.
pub fn b_mm22<T: Scalar>(m: u32, i: &T, s: &T) -> Result<MmBound<T>> {
    if m < 2 {
        return Err(Error::out_of_range("m", format!("{m} < 2")));
    }
    check_range("I", i, T::half())?;
    check_range("S", s, T::one())?;
    let mm = T::int(m as i64);
    let factor = mm.clone() - T::one();
    let inner = if gap_reached(i, s) {
        mm + T::int(4)
    } else {
        mm + T::int(8) * i.clone()
    };
    Ok(MmBound {
        value: factor * inner / T::int(2) + T::one(),
        conjectured: m >= 4,
    })
}

/// Smallest single-parameter relaxations allowing a CHSH violation V.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "I_min")]
    pub i_min: f64,
    /// Signaling needed at I = I_min for the gap condition, 1 − 2 I_min.
    #[serde(rename = "S_gap")]
    pub s_gap: f64,
    #[serde(rename = "M_min")]
    pub m_min: f64,
    #[serde(rename = "O_min")]
    pub o_min: f64,
    #[serde(rename = "C_random_min")]
    pub c_random_min: f64,
    #[serde(rename = "C_sig_min")]
    pub c_sig_min: f64,
    #[serde(rename = "C_outcome_min")]
    pub c_outcome_min: f64,
}

pub fn min_relaxation(v: f64) -> Result<ThresholdReport> {
    if !(0.0..=2.0).contains(&v) {
        return Err(Error::out_of_range("V", format!("{v} is outside [0, 2]")));
    }
    let i_min = v / 4.0;
    let s_gap = 1.0 - 2.0 * i_min;
    let o_min = 2.0 * v / (2.0 + v);
    Ok(ThresholdReport {
        v,
        i_min,
        s_gap,
        m_min: v / 3.0,
        o_min,
        c_random_min: h(i_min),
        c_sig_min: 1.0 - h((1.0 + s_gap) / 2.0),
        c_outcome_min: 1.0 - h((1.0 + o_min) / 2.0),
    })
}

/// Bound families exposed to sweeps and the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundFamily {
    Chsh,
    ChshNosig,
    Outcome,
    I3322,
    Imm22(u32),
}

impl BoundFamily {
    pub fn parse(name: &str, m: Option<u32>) -> Result<Self> {
        Ok(match name {
            "chsh" => Self::Chsh,
            "chsh-nosig" => Self::ChshNosig,
            "outcome" => Self::Outcome,
            "i3322" => Self::I3322,
            "imm22" => Self::Imm22(m.unwrap_or(4)),
            other => {
                return Err(Error::Unknown {
                    kind: "bound family",
                    name: other.to_string(),
                })
            }
        })
    }

    pub fn name(&self) -> String {
        match self {
            Self::Chsh => "chsh".into(),
            Self::ChshNosig => "chsh-nosig".into(),
            Self::Outcome => "outcome".into(),
            Self::I3322 => "i3322".into(),
            Self::Imm22(m) => format!("i{m}{m}22"),
        }
    }

    pub fn evaluate<T: Scalar>(&self, budget: &RelaxationBudget<T>) -> Result<T> {
        match self {
            Self::Chsh => b_chsh(&budget.i, &budget.s, &budget.m),
            Self::ChshNosig => b_chsh_nosig(&budget.i, &budget.m),
            Self::Outcome => b_outcome(budget.o.as_ref().unwrap_or(&T::zero())),
            Self::I3322 => b_3322(&budget.i, &budget.s),
            Self::Imm22(m) => b_mm22(*m, &budget.i, &budget.s).map(|b| b.value),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    const V: f64 = 2.0 * std::f64::consts::SQRT_2 - 2.0;

    #[test]
    fn chsh_examples() {
        assert_eq!(b_chsh::<f64>(&0.0, &0.0, &0.0).unwrap(), 2.0);
        assert!((b_chsh::<f64>(&0.207, &0.0, &0.0).unwrap() - 2.828).abs() < 1e-3);
        let m = V / 3.0;
        assert!((b_chsh::<f64>(&0.0, &0.0, &m).unwrap() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(b_chsh::<f64>(&0.1, &0.9, &0.0).unwrap(), 4.0);
        assert_eq!(b_chsh_nosig::<f64>(&0.5, &0.0).unwrap(), 4.0);
        assert!(b_chsh::<f64>(&0.6, &0.0, &0.0).is_err());
    }

    #[test]
    fn strict_gap_boundary_is_exact_for_rationals() {
        let i = Rational::ratio(1, 5);
        let below = Rational::ratio(59, 100);
        let at = Rational::ratio(3, 5);
        assert_eq!(b_chsh(&i, &below, &Rational::int(0)).unwrap(), Rational::ratio(14, 5));
        assert_eq!(b_chsh(&i, &at, &Rational::int(0)).unwrap(), Rational::int(4));
        assert_eq!(b_chsh::<f64>(&0.2, &0.6, &0.0).unwrap(), 4.0);
    }

    #[test]
    fn hyperbola_through_thresholds() {
        let t = min_relaxation(V).unwrap();
        assert!(((1.0 - 2.0 * t.i_min) * 2.0 - (4.0 - 2.0 * std::f64::consts::SQRT_2)).abs() < 1e-12);
        assert!((b_chsh_nosig::<f64>(&0.0, &t.m_min).unwrap() - (2.0 + V)).abs() < 1e-12);
        assert!((b_chsh(&t.i_min, &0.0, &0.0).unwrap() - (2.0 + V)).abs() < 1e-12);
        assert!((b_outcome::<f64>(&t.o_min).unwrap() - (2.0 + V)).abs() < 1e-12);
        assert!((t.i_min - 0.207).abs() < 1e-3);
        assert!((t.s_gap - 0.586).abs() < 1e-3);
        assert!((t.o_min - (2.0 - std::f64::consts::SQRT_2)).abs() < 1e-12);
        assert!((t.c_random_min - 0.736).abs() < 1e-3);
        assert!((t.c_sig_min - 0.264).abs() < 1e-3);
        assert!((t.c_outcome_min - 0.264).abs() < 1e-3);
        let zero = min_relaxation(0.0).unwrap();
        assert_eq!((zero.i_min, zero.m_min, zero.o_min), (0.0, 0.0, 0.0));
    }

    #[test]
    fn outcome_and_3322() {
        assert_eq!(b_outcome::<f64>(&0.0).unwrap(), 2.0);
        assert_eq!(b_outcome::<f64>(&1.0).unwrap(), 4.0);
        assert!(b_outcome::<f64>(&1.2).is_err());
        assert!((b_outcome::<f64>(&(2.0 - std::f64::consts::SQRT_2)).unwrap() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
        assert_eq!(b_3322::<f64>(&0.0, &0.0).unwrap(), 4.0);
        assert_eq!(b_3322::<f64>(&0.25, &0.0).unwrap(), 6.0);
        assert_eq!(b_3322::<f64>(&0.0, &1.0).unwrap(), 8.0);
    }

    #[test]
    fn mm22_reduces_to_lower_families() {
        for &(i, s) in &[(0.0, 0.0), (0.1, 0.3), (0.3, 0.5), (0.45, 0.0)] {
            let m2 = b_mm22::<f64>(2, &i, &s).unwrap();
            assert!((m2.value - b_chsh::<f64>(&i, &s, &0.0).unwrap()).abs() < 1e-12);
            assert!(!m2.conjectured);
            let m3 = b_mm22::<f64>(3, &i, &s).unwrap();
            assert!((m3.value - b_3322::<f64>(&i, &s).unwrap()).abs() < 1e-12);
        }
        let m4 = b_mm22::<f64>(4, &0.0, &0.0).unwrap();
        assert_eq!(m4.value, 7.0);
        assert!(m4.conjectured);
        assert!(b_mm22::<f64>(1, &0.0, &0.0).is_err());
    }
}
