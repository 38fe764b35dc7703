//! CHSH test on strangeness −1 detections.
//!
//! Left detections happen at τ₁ or τ₂, right ones at τ₃ or τ₄. A local
//! model obeys −1 ≤ S ≤ 0 with
//!
//! S = P(τ₁,τ₃) − P(τ₁,τ₄) + P(τ₂,τ₃) + P(τ₂,τ₄) − P(τ₂) − P(τ₃)
//!
//! where P(a,b) is the K̄⁰K̄⁰ joint probability and P(a) the single-kaon
//! K̄⁰ probability. The renormalized variant conditions everything on the
//! relevant kaons being undecayed.

use serde::{Deserialize, Serialize};

use crate::error::{check_time, Error, Result};
use crate::montecarlo::{tally_pairs, CountsTable, EstimateWithError, HvModel};
use crate::optimize::{grid_golden_search, Extremum, Objective, DEFAULT_GRID_POINTS};
use crate::params::ParameterSet;
use crate::qm::{
    asymmetry_at_separation, joint_strangeness_prob, renormalized_joint, single_strangeness_prob,
    Strangeness, RENORMALIZED_SINGLE,
};

/// Largest allowed ratio of late to early detection time for the two
/// measurements to stay space-like separated.
pub const LOCALITY_RATIO: f64 = 1.55;

/// Smallest schedule parameter (exclusive) that keeps τ₄/τ₁ inside the
/// locality window, as quoted with the window.
pub const MIN_LOCAL_P: f64 = 5.45;

/// Equally spaced detection times τ₁ = pτ, τ₃ = (p+1)τ, τ₂ = (p+2)τ,
/// τ₄ = (p+3)τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSchedule {
    p: f64,
    tau: f64,
}

impl ChshSchedule {
    pub fn new(p: f64, tau: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::InvalidSchedule {
                name: "p",
                value: p,
            });
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidSchedule {
                name: "tau",
                value: tau,
            });
        }
        Ok(ChshSchedule { p, tau })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Common spacing τ.
    pub fn spacing(&self) -> f64 {
        self.tau
    }

    pub fn tau1(&self) -> f64 {
        self.p * self.tau
    }

    pub fn tau2(&self) -> f64 {
        (self.p + 2.0) * self.tau
    }

    pub fn tau3(&self) -> f64 {
        (self.p + 1.0) * self.tau
    }

    pub fn tau4(&self) -> f64 {
        (self.p + 3.0) * self.tau
    }

    /// [τ₁, τ₂, τ₃, τ₄]
    pub fn times(&self) -> [f64; 4] {
        [self.tau1(), self.tau2(), self.tau3(), self.tau4()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum LocalityVerdict {
    Ok { ratio: f64 },
    Violated { ratio: f64 },
}

impl LocalityVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, LocalityVerdict::Ok { .. })
    }

    pub fn ratio(&self) -> f64 {
        match *self {
            LocalityVerdict::Ok { ratio } | LocalityVerdict::Violated { ratio } => ratio,
        }
    }
}

/// Accepts the schedule iff p > 5.45. The reported ratio is τ₄/τ₁ =
/// (p+3)/p, infinite at p = 0.
pub fn locality_check(s: &ChshSchedule) -> LocalityVerdict {
    let ratio = if s.p == 0.0 {
        f64::INFINITY
    } else {
        (s.p + 3.0) / s.p
    };
    if s.p > MIN_LOCAL_P {
        LocalityVerdict::Ok { ratio }
    } else {
        LocalityVerdict::Violated { ratio }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshValue {
    pub s: f64,
    /// s < −1
    pub violated_lower: bool,
    /// s > 0
    pub violated_upper: bool,
}

impl ChshValue {
    pub fn new(s: f64) -> Self {
        ChshValue {
            s,
            violated_lower: s < -1.0,
            violated_upper: s > 0.0,
        }
    }

    pub fn is_violation(&self) -> bool {
        self.violated_lower || self.violated_upper
    }
}

/// The six probabilities entering S. Indices follow the detection times:
/// `pr23` is the left kaon at τ₂ with the right one at τ₃.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshInputs {
    pub pr13: f64,
    pub pr14: f64,
    pub pr23: f64,
    pub pr24: f64,
    pub pr2: f64,
    pub pr3: f64,
}

impl ChshInputs {
    pub fn evaluate(&self) -> Result<ChshValue> {
        s_from_probs(
            self.pr13, self.pr14, self.pr23, self.pr24, self.pr2, self.pr3,
        )
    }
}

/// S from arbitrary probabilities (quantum, simulated or hypothetical).
pub fn s_from_probs(
    pr13: f64,
    pr14: f64,
    pr23: f64,
    pr24: f64,
    pr2: f64,
    pr3: f64,
) -> Result<ChshValue> {
    for (name, value) in [
        ("pr13", pr13),
        ("pr14", pr14),
        ("pr23", pr23),
        ("pr24", pr24),
        ("pr2", pr2),
        ("pr3", pr3),
    ] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::ProbabilityOutOfRange { name, value });
        }
    }
    Ok(ChshValue::new(pr13 - pr14 + pr23 + pr24 - pr2 - pr3))
}

const ANTI: Strangeness = Strangeness::AntiKaon;

/// Renormalized quantum probabilities at the schedule's four times.
pub fn renormalized_inputs(p: &ParameterSet, s: &ChshSchedule) -> Result<ChshInputs> {
    let [t1, t2, t3, t4] = s.times();
    Ok(ChshInputs {
        pr13: renormalized_joint(p, ANTI, ANTI, t1, t3)?,
        pr14: renormalized_joint(p, ANTI, ANTI, t1, t4)?,
        pr23: renormalized_joint(p, ANTI, ANTI, t2, t3)?,
        pr24: renormalized_joint(p, ANTI, ANTI, t2, t4)?,
        pr2: RENORMALIZED_SINGLE,
        pr3: RENORMALIZED_SINGLE,
    })
}

/// Unrenormalized quantum probabilities: joints include the pair survival
/// and singles are half the single-kaon survival.
pub fn unrenormalized_inputs(p: &ParameterSet, s: &ChshSchedule) -> Result<ChshInputs> {
    let [t1, t2, t3, t4] = s.times();
    Ok(ChshInputs {
        pr13: joint_strangeness_prob(p, ANTI, ANTI, t1, t3)?,
        pr14: joint_strangeness_prob(p, ANTI, ANTI, t1, t4)?,
        pr23: joint_strangeness_prob(p, ANTI, ANTI, t2, t3)?,
        pr24: joint_strangeness_prob(p, ANTI, ANTI, t2, t4)?,
        pr2: single_strangeness_prob(p, ANTI, t2)?,
        pr3: single_strangeness_prob(p, ANTI, t3)?,
    })
}

/// Renormalized quantum S for equally spaced times:
/// ¼[2 − 3A(τ) + A(3τ)] − 1. Independent of the schedule offset p.
pub fn s_qm(p: &ParameterSet, tau: f64) -> Result<ChshValue> {
    let tau = check_time("tau", tau)?;
    Ok(ChshValue::new(s_qm_unchecked(p, tau)))
}

fn s_qm_unchecked(p: &ParameterSet, tau: f64) -> f64 {
    let a1 = asymmetry_at_separation(p, tau);
    let a3 = asymmetry_at_separation(p, 3.0 * tau);
    0.25 * (2.0 - 3.0 * a1 + a3) - 1.0
}

/// Stable-kaon limit, where the asymmetry is a pure cos(Δm τ).
pub fn s_stable(delta_m: f64, tau: f64) -> ChshValue {
    let x = delta_m * tau;
    ChshValue::new(0.25 * (2.0 - 3.0 * x.cos() + (3.0 * x).cos()) - 1.0)
}

/// Quantum S from unrenormalized probabilities; depends on `p_sched`.
pub fn s_unrenormalized(p: &ParameterSet, p_sched: f64, tau: f64) -> Result<ChshValue> {
    let schedule = ChshSchedule::new(p_sched, tau)?;
    unrenormalized_inputs(p, &schedule)?.evaluate()
}

/// Extremum of the renormalized quantum S over τ ∈ [tau_lo, tau_hi].
pub fn find_extremal_violation(
    p: &ParameterSet,
    tau_lo: f64,
    tau_hi: f64,
    objective: Objective,
    tol: f64,
) -> Result<Extremum> {
    find_extremal_violation_with_grid(p, tau_lo, tau_hi, objective, tol, DEFAULT_GRID_POINTS)
}

pub fn find_extremal_violation_with_grid(
    p: &ParameterSet,
    tau_lo: f64,
    tau_hi: f64,
    objective: Objective,
    tol: f64,
    grid_points: usize,
) -> Result<Extremum> {
    if !(tau_lo.is_finite() && tau_lo >= 0.0 && tau_lo < tau_hi) {
        return Err(Error::EmptyRange {
            lo: tau_lo,
            hi: tau_hi,
        });
    }
    grid_golden_search(
        |t| s_qm_unchecked(p, t),
        tau_lo,
        tau_hi,
        grid_points.max(512),
        tol,
        objective,
    )
}

/// Simulated CHSH value from a local model, one independent run per
/// detection-time setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshEstimate {
    pub value: ChshValue,
    pub sigma: f64,
    pub inputs: ChshInputs,
    /// Tables for (τ₁,τ₃), (τ₁,τ₄), (τ₂,τ₃), (τ₂,τ₄).
    pub tables: [CountsTable; 4],
}

/// Estimates the renormalized S of a local model at `schedule`. Joint terms
/// are K̄⁰K̄⁰ frequencies among undecayed pairs; the singles are K̄⁰
/// frequencies among undecayed kaons on the relevant side.
pub fn simulate_chsh(
    model: HvModel,
    p: &ParameterSet,
    schedule: &ChshSchedule,
    n_events: u64,
    seed: u64,
) -> Result<ChshEstimate> {
    if n_events == 0 {
        return Err(Error::NoEvents);
    }
    let [t1, t2, t3, t4] = schedule.times();
    let settings = [(t1, t3), (t1, t4), (t2, t3), (t2, t4)];
    let tables = std::array::from_fn(|i| {
        let (tl, tr) = settings[i];
        CountsTable {
            model,
            params: *p,
            tau1: tl,
            tau2: tr,
            seed,
            n_events,
            tallies: tally_pairs(model, p, tl, tr, n_events, seed, i as u16 + 1),
        }
    });
    let joint: Vec<EstimateWithError> = tables
        .iter()
        .map(|t: &CountsTable| t.renormalized(ANTI, ANTI))
        .collect::<Result<_>>()?;
    // left at τ₂ from the (τ₂,τ₄) run, right at τ₃ from the (τ₁,τ₃) run
    let single2 = tables[3].left_marginal(ANTI)?;
    let single3 = tables[0].right_marginal(ANTI)?;

    let inputs = ChshInputs {
        pr13: joint[0].value,
        pr14: joint[1].value,
        pr23: joint[2].value,
        pr24: joint[3].value,
        pr2: single2.value,
        pr3: single3.value,
    };
    // single2 shares its run with pr24, single3 with pr13; errors are
    // combined in quadrature regardless
    let sigma = joint
        .iter()
        .chain([&single2, &single3])
        .map(|e| e.sigma * e.sigma)
        .sum::<f64>()
        .sqrt();
    Ok(ChshEstimate {
        value: inputs.evaluate()?,
        sigma,
        inputs,
        tables,
    })
}
