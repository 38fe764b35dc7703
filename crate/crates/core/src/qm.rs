//! Closed-form quantum predictions for the φ → K⁰K̄⁰ pair.
//!
//! Side 1 is the left-going kaon detected at `tau1`, side 2 the right-going
//! one detected at `tau2`. Every probability refers to that ordered pair.

use serde::{Deserialize, Serialize};

use crate::error::{check_time, Result};
use crate::params::ParameterSet;

/// Strong-interaction eigenvalue: K⁰ (S = +1) or K̄⁰ (S = −1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strangeness {
    Kaon,
    AntiKaon,
}

impl Strangeness {
    pub const ALL: [Strangeness; 2] = [Strangeness::Kaon, Strangeness::AntiKaon];

    pub fn value(self) -> i8 {
        match self {
            Strangeness::Kaon => 1,
            Strangeness::AntiKaon => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Strangeness::Kaon => Strangeness::AntiKaon,
            Strangeness::AntiKaon => Strangeness::Kaon,
        }
    }
}

/// CP eigenvalue: K_S (CP = +1) or K_L (CP = −1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CpEigenvalue {
    Short,
    Long,
}

impl CpEigenvalue {
    pub const ALL: [CpEigenvalue; 2] = [CpEigenvalue::Short, CpEigenvalue::Long];

    pub fn value(self) -> i8 {
        match self {
            CpEigenvalue::Short => 1,
            CpEigenvalue::Long => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            CpEigenvalue::Short => CpEigenvalue::Long,
            CpEigenvalue::Long => CpEigenvalue::Short,
        }
    }

    /// Decay width attached to this CP eigenstate.
    pub fn width(self, p: &ParameterSet) -> f64 {
        match self {
            CpEigenvalue::Short => p.gamma_s,
            CpEigenvalue::Long => p.gamma_l,
        }
    }
}

/// E(τ) = exp(−Γτ).
pub fn survival_factor(gamma: f64, tau: f64) -> Result<f64> {
    let tau = check_time("tau", tau)?;
    Ok((-gamma * tau).exp())
}

/// 2√(E_L E_S)/(E_L + E_S) at time separation `dt`, written as a sech so
/// neither exponential is formed explicitly.
pub(crate) fn damping_ratio(p: &ParameterSet, dt: f64) -> f64 {
    let x = 0.5 * (p.gamma_s - p.gamma_l) * dt.abs();
    1.0 / x.cosh()
}

/// Asymmetry as a function of the time separation only.
pub(crate) fn asymmetry_at_separation(p: &ParameterSet, dt: f64) -> f64 {
    damping_ratio(p, dt) * (p.delta_m * dt.abs()).cos()
}

/// Quantum asymmetry between unlike- and like-strangeness detections.
///
/// Depends on |tau2 − tau1| only, so the argument order is irrelevant.
pub fn qm_asymmetry(p: &ParameterSet, tau1: f64, tau2: f64) -> Result<f64> {
    let tau1 = check_time("tau1", tau1)?;
    let tau2 = check_time("tau2", tau2)?;
    Ok(asymmetry_at_separation(p, tau2 - tau1))
}

/// Probability that neither kaon has decayed at (tau1, tau2).
pub fn survival_prob(p: &ParameterSet, tau1: f64, tau2: f64) -> Result<f64> {
    let tau1 = check_time("tau1", tau1)?;
    let tau2 = check_time("tau2", tau2)?;
    Ok(pair_survival(p, tau1, tau2))
}

fn pair_survival(p: &ParameterSet, tau1: f64, tau2: f64) -> f64 {
    let es = |t: f64| (-p.gamma_s * t).exp();
    let el = |t: f64| (-p.gamma_l * t).exp();
    0.5 * (es(tau1) * el(tau2) + el(tau1) * es(tau2))
}

/// Joint probability of detecting strangeness `s1` on the left at `tau1`
/// and `s2` on the right at `tau2`.
pub fn joint_strangeness_prob(
    p: &ParameterSet,
    s1: Strangeness,
    s2: Strangeness,
    tau1: f64,
    tau2: f64,
) -> Result<f64> {
    let a = qm_asymmetry(p, tau1, tau2)?;
    Ok(0.25 * pair_survival(p, tau1, tau2) * correlation_bracket(s1, s2, a))
}

fn correlation_bracket(s1: Strangeness, s2: Strangeness, a: f64) -> f64 {
    if s1 == s2 {
        1.0 - a
    } else {
        1.0 + a
    }
}

/// Joint probability of finding CP eigenvalues (`c1`, `c2`). The pair is
/// produced CP-antisymmetric, so equal eigenvalues never occur.
pub fn joint_cp_prob(
    p: &ParameterSet,
    c1: CpEigenvalue,
    c2: CpEigenvalue,
    tau1: f64,
    tau2: f64,
) -> Result<f64> {
    let tau1 = check_time("tau1", tau1)?;
    let tau2 = check_time("tau2", tau2)?;
    if c1 == c2 {
        return Ok(0.0);
    }
    Ok(0.5 * (-c1.width(p) * tau1).exp() * (-c2.width(p) * tau2).exp())
}

/// Joint strangeness probability conditioned on both kaons being undecayed.
///
/// Evaluated as (1 ± A)/4 directly, which stays finite when the survival
/// probability itself underflows.
pub fn renormalized_joint(
    p: &ParameterSet,
    s1: Strangeness,
    s2: Strangeness,
    tau1: f64,
    tau2: f64,
) -> Result<f64> {
    let a = qm_asymmetry(p, tau1, tau2)?;
    Ok(0.25 * correlation_bracket(s1, s2, a))
}

/// Probability that a single kaon is undecayed and shows strangeness `s`
/// at `tau`: half of the single-kaon survival (E_S + E_L)/2.
pub fn single_strangeness_prob(p: &ParameterSet, _s: Strangeness, tau: f64) -> Result<f64> {
    let tau = check_time("tau", tau)?;
    Ok(0.25 * ((-p.gamma_s * tau).exp() + (-p.gamma_l * tau).exp()))
}

/// A single-kaon strangeness probability renormalized to undecayed kaons.
pub const RENORMALIZED_SINGLE: f64 = 0.5;
