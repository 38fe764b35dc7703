//! Local-realistic content: realistic kaon states, the strangeness-aligned
//! fractions Q±(τ), and the interval any local model confines the
//! asymmetry to.

use serde::{Deserialize, Serialize};

use crate::error::{check_time, Error, Result};
use crate::params::ParameterSet;
use crate::qm::{asymmetry_at_separation, CpEigenvalue, Strangeness};

/// A realistic kaon carries definite strangeness and CP at every instant;
/// after decay only the CP of the products remains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RealisticKaonState {
    /// K⁰_S: S = +1, CP = +1
    K1,
    /// K̄⁰_S: S = −1, CP = +1
    K2,
    /// K⁰_L: S = +1, CP = −1
    K3,
    /// K̄⁰_L: S = −1, CP = −1
    K4,
    /// CP = +1 decay products
    DecayProductsPlus,
    /// CP = −1 decay products
    DecayProductsMinus,
}

impl RealisticKaonState {
    pub const KAONS: [RealisticKaonState; 4] = [Self::K1, Self::K2, Self::K3, Self::K4];
    pub const ALL: [RealisticKaonState; 6] = [
        Self::K1,
        Self::K2,
        Self::K3,
        Self::K4,
        Self::DecayProductsPlus,
        Self::DecayProductsMinus,
    ];

    pub fn from_quantum_numbers(s: Strangeness, cp: CpEigenvalue) -> Self {
        use CpEigenvalue::*;
        use Strangeness::*;
        match (s, cp) {
            (Kaon, Short) => Self::K1,
            (AntiKaon, Short) => Self::K2,
            (Kaon, Long) => Self::K3,
            (AntiKaon, Long) => Self::K4,
        }
    }

    pub fn cp(self) -> CpEigenvalue {
        match self {
            Self::K1 | Self::K2 | Self::DecayProductsPlus => CpEigenvalue::Short,
            Self::K3 | Self::K4 | Self::DecayProductsMinus => CpEigenvalue::Long,
        }
    }

    pub fn strangeness(self) -> Option<Strangeness> {
        match self {
            Self::K1 | Self::K3 => Some(Strangeness::Kaon),
            Self::K2 | Self::K4 => Some(Strangeness::AntiKaon),
            Self::DecayProductsPlus | Self::DecayProductsMinus => None,
        }
    }

    /// Strangeness measurement; decay products have none.
    pub fn measure_strangeness(self) -> Result<Strangeness> {
        self.strangeness().ok_or(Error::NoStrangeness)
    }

    pub fn is_decayed(self) -> bool {
        self.strangeness().is_none()
    }

    /// The decay products this state turns into.
    pub fn decayed(self) -> Self {
        match self.cp() {
            CpEigenvalue::Short => Self::DecayProductsPlus,
            CpEigenvalue::Long => Self::DecayProductsMinus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::K1 => "K1",
            Self::K2 => "K2",
            Self::K3 => "K3",
            Self::K4 => "K4",
            Self::DecayProductsPlus => "DP+",
            Self::DecayProductsMinus => "DP-",
        }
    }
}

/// One of the four equally likely pair states just after production.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InitialPairAssignment {
    pub left: RealisticKaonState,
    pub right: RealisticKaonState,
}

impl InitialPairAssignment {
    pub const WEIGHT: f64 = 0.25;

    /// Builds the pair from the left kaon; the right one is its total
    /// anti-correlate in strangeness and CP.
    pub fn from_left(left: RealisticKaonState) -> Result<Self> {
        let s = left.measure_strangeness()?;
        let right = RealisticKaonState::from_quantum_numbers(s.flipped(), left.cp().flipped());
        Ok(InitialPairAssignment { left, right })
    }

    pub fn weight(&self) -> f64 {
        Self::WEIGHT
    }
}

/// Rows (K1,K4), (K2,K3), (K3,K2), (K4,K1).
pub fn initial_pair_assignments() -> [InitialPairAssignment; 4] {
    RealisticKaonState::KAONS
        .map(|k| InitialPairAssignment::from_left(k).expect("K1..K4 all carry strangeness"))
}

/// All pair states reachable at τ₂ ≥ τ₁ from the production rows: any
/// left/right combination of kaons and decay products whose CP values are
/// opposite. Eighteen in total.
pub fn local_realistic_pair_states() -> Vec<(RealisticKaonState, RealisticKaonState)> {
    let mut out = Vec::with_capacity(18);
    for left in RealisticKaonState::ALL {
        for right in RealisticKaonState::ALL {
            if left.cp() != right.cp() {
                out.push((left, right));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QSign {
    Plus,
    Minus,
}

/// Q±(τ): fraction of undecayed, initially aligned kaons that show the
/// initial (+) or the opposite (−) strangeness at τ.
pub fn q_fraction(p: &ParameterSet, sign: QSign, tau: f64) -> Result<f64> {
    let tau = check_time("tau", tau)?;
    Ok(q_unchecked(p, sign, tau))
}

pub(crate) fn q_unchecked(p: &ParameterSet, sign: QSign, tau: f64) -> f64 {
    let osc = asymmetry_at_separation(p, tau);
    match sign {
        QSign::Plus => 0.5 * (1.0 + osc),
        QSign::Minus => 0.5 * (1.0 - osc),
    }
}

/// The interval [lower, upper] containing any local-realistic asymmetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryBounds {
    pub lower: f64,
    pub upper: f64,
}

impl AsymmetryBounds {
    pub fn contains(&self, a: f64) -> bool {
        self.lower <= a && a <= self.upper
    }

    /// Containment widened by `margin` on both sides.
    pub fn contains_within(&self, a: f64, margin: f64) -> bool {
        self.lower - margin <= a && a <= self.upper + margin
    }
}

// Slack allowed when lower and upper coincide analytically (e.g. tau1 = 0).
const EMPTY_INTERVAL_SLACK: f64 = 1e-12;

/// Asymmetry interval for 0 ≤ tau1 ≤ tau2.
pub fn asymmetry_bounds(p: &ParameterSet, tau1: f64, tau2: f64) -> Result<AsymmetryBounds> {
    let tau1 = check_time("tau1", tau1)?;
    let tau2 = check_time("tau2", tau2)?;
    if tau1 > tau2 {
        return Err(Error::Ordering { tau1, tau2 });
    }
    let qp1 = q_unchecked(p, QSign::Plus, tau1);
    let qm1 = q_unchecked(p, QSign::Minus, tau1);
    let qp2 = q_unchecked(p, QSign::Plus, tau2);
    let lower = 2.0 * (qp2 - qm1).abs() - 1.0;
    let upper = 1.0 - 2.0 * (qp2 - qp1).abs();
    if lower > upper + EMPTY_INTERVAL_SLACK {
        return Err(Error::EmptyInterval {
            tau1,
            tau2,
            lower,
            upper,
        });
    }
    Ok(AsymmetryBounds {
        lower: lower.min(upper),
        upper,
    })
}

/// Relative excess of the quantum asymmetry over the local-realistic
/// maximum along the line tau2 = alpha·tau1. Negative when the quantum
/// value sits inside the local interval.
pub fn lr_gap(p: &ParameterSet, alpha: f64, tau1: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::AlphaNotAboveOne(alpha));
    }
    if !(tau1.is_finite() && tau1 > 0.0) {
        return Err(Error::NonPositiveTau(tau1));
    }
    let tau2 = alpha * tau1;
    let a_qm = asymmetry_at_separation(p, tau2 - tau1);
    if a_qm == 0.0 {
        return Err(Error::DegenerateAsymmetry { alpha, tau1 });
    }
    let bounds = asymmetry_bounds(p, tau1, tau2)?;
    Ok((a_qm - bounds.upper) / a_qm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::default_params;
    use crate::qm::qm_asymmetry;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use RealisticKaonState::*;

    /// Q₊ from raw exponentials.
    fn oracle_q_plus(p: &ParameterSet, t: f64) -> f64 {
        let el = (-p.gamma_l * t).exp();
        let es = (-p.gamma_s * t).exp();
        0.5 * (1.0 + 2.0 * (el * es).sqrt() / (el + es) * (p.delta_m * t).cos())
    }

    #[test]
    fn state_catalogue() {
        use CpEigenvalue::*;
        use Strangeness::*;
        assert_eq!((K1.strangeness(), K1.cp()), (Some(Kaon), Short));
        assert_eq!((K2.strangeness(), K2.cp()), (Some(AntiKaon), Short));
        assert_eq!((K3.strangeness(), K3.cp()), (Some(Kaon), Long));
        assert_eq!((K4.strangeness(), K4.cp()), (Some(AntiKaon), Long));
        assert_eq!(DecayProductsPlus.cp(), Short);
        assert_eq!(DecayProductsMinus.cp(), Long);
        assert_eq!(
            DecayProductsMinus.measure_strangeness(),
            Err(Error::NoStrangeness)
        );
        assert_eq!(K3.decayed(), DecayProductsMinus);
    }

    #[test]
    fn initial_rows() {
        let rows = initial_pair_assignments();
        assert_eq!(
            rows[0],
            InitialPairAssignment {
                left: K1,
                right: K4
            }
        );
        assert_eq!(
            rows[1],
            InitialPairAssignment {
                left: K2,
                right: K3
            }
        );
        assert_eq!(
            rows[2],
            InitialPairAssignment {
                left: K3,
                right: K2
            }
        );
        assert_eq!(
            rows[3],
            InitialPairAssignment {
                left: K4,
                right: K1
            }
        );
        for row in rows {
            let (sl, sr) = (
                row.left.strangeness().unwrap(),
                row.right.strangeness().unwrap(),
            );
            assert_eq!(sl.value(), -sr.value());
            assert_eq!(row.left.cp().value(), -row.right.cp().value());
        }
        let total: f64 = rows.iter().map(|r| r.weight()).sum();
        assert_eq!(total, 1.0);
        assert!(InitialPairAssignment::from_left(DecayProductsPlus).is_err());
    }

    #[test]
    fn pair_state_enumeration() {
        let states = local_realistic_pair_states();
        assert_eq!(states.len(), 18);
        // the four rows written out explicitly are among them
        for row in [
            (K1, K4),
            (K1, DecayProductsMinus),
            (DecayProductsPlus, K4),
            (K1, K3),
        ] {
            assert!(states.contains(&row));
        }
        assert!(!states.contains(&(K1, K2)));
    }

    #[test]
    fn q_values() {
        let p = default_params();
        assert_eq!(q_fraction(&p, QSign::Plus, 0.0).unwrap(), 1.0);
        assert_eq!(q_fraction(&p, QSign::Minus, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            q_fraction(&p, QSign::Plus, 1.5).unwrap(),
            0.789_308_767_204_425_4,
            max_relative = 1e-13
        );
        assert!(q_fraction(&p, QSign::Plus, -1.0).is_err());
    }

    #[test]
    fn bounds_examples() {
        let p = default_params();
        let b = asymmetry_bounds(&p, 1.1, 1.1).unwrap();
        assert_eq!(b.upper, 1.0);
        for tau2 in [0.3, 1.0, 2.5, 7.0] {
            let b = asymmetry_bounds(&p, 0.0, tau2).unwrap();
            assert_relative_eq!(
                b.lower,
                qm_asymmetry(&p, 0.0, tau2).unwrap(),
                epsilon = 1e-14
            );
        }
        let b = asymmetry_bounds(&p, 1.5, 2.25).unwrap();
        assert_relative_eq!(b.upper, 0.694_787_501_916_938_4, max_relative = 1e-12);
        assert_relative_eq!(b.lower, -0.147_977_429_265_359_94, max_relative = 1e-11);
        assert!(matches!(
            asymmetry_bounds(&p, 2.0, 1.0),
            Err(Error::Ordering { .. })
        ));
        assert!(asymmetry_bounds(&p, -1.0, 1.0).is_err());
    }

    #[test]
    fn gap_examples() {
        let p = default_params();
        assert_relative_eq!(
            lr_gap(&p, 1.5, 1.5).unwrap(),
            0.204_246_602_437_167_25,
            max_relative = 1e-11
        );
        assert_relative_eq!(
            lr_gap(&p, 2.0, 1.2).unwrap(),
            0.270_610_278_360_810_86,
            max_relative = 1e-11
        );
        assert!(lr_gap(&p, 1.5, 3.0).unwrap() <= 0.0);
        assert!(matches!(
            lr_gap(&p, 1.0, 1.0),
            Err(Error::AlphaNotAboveOne(_))
        ));
        assert!(matches!(
            lr_gap(&p, 1.5, 0.0),
            Err(Error::NonPositiveTau(_))
        ));
        // damping underflows to exactly zero
        let fast = ParameterSet::new(2000.0, 0.0, 0.5).unwrap();
        assert!(matches!(
            lr_gap(&fast, 2.0, 1.0),
            Err(Error::DegenerateAsymmetry { .. })
        ));
    }

    #[test]
    fn bounds_non_empty_on_dense_grid() {
        let p = default_params();
        let n = 241;
        for i in 0..n {
            for j in i..n {
                let t1 = 6.0 * i as f64 / (n - 1) as f64;
                let t2 = 6.0 * j as f64 / (n - 1) as f64;
                let b = asymmetry_bounds(&p, t1, t2).unwrap();
                assert!(b.lower <= b.upper, "empty at ({t1}, {t2})");
            }
        }
    }

    #[test]
    fn gap_positive_in_discrepancy_region() {
        let p = default_params();
        for ia in 1..=20 {
            let alpha = 1.0 + 0.5 * ia as f64 / 20.0;
            for it in 1..220 {
                let tau1 = 0.01 * it as f64;
                let g = lr_gap(&p, alpha, tau1).unwrap();
                assert!(g > 0.0, "gap {g} at alpha {alpha}, tau1 {tau1}");
            }
        }
    }

    proptest! {
        #[test]
        fn q_complementary_and_bounded(t in 0.0f64..50.0) {
            let p = default_params();
            let plus = q_fraction(&p, QSign::Plus, t).unwrap();
            let minus = q_fraction(&p, QSign::Minus, t).unwrap();
            prop_assert!((plus + minus - 1.0).abs() <= 1e-15);
            prop_assert!((0.0..=1.0).contains(&plus));
            prop_assert!((0.0..=1.0).contains(&minus));
            prop_assert!((plus - oracle_q_plus(&p, t)).abs() <= 1e-12);
        }

        #[test]
        fn equal_time_upper_is_quantum(t in 0.0f64..20.0) {
            let p = default_params();
            let b = asymmetry_bounds(&p, t, t).unwrap();
            prop_assert_eq!(b.upper, qm_asymmetry(&p, t, t).unwrap());
        }
    }
}
