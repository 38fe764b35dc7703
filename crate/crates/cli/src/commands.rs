//! The four subcommands, as library functions returning their output bytes.

use kaonbell::chsh::{self, ChshSchedule, LocalityVerdict, MIN_LOCAL_P};
use kaonbell::montecarlo::{estimate_asymmetry, run_experiment, CountsTable, EstimateWithError};
use kaonbell::optimize::DEFAULT_GRID_POINTS;
use kaonbell::{
    asymmetry_bounds, qm_asymmetry, survival_prob, AsymmetryBounds, HvModel, Objective,
    ParameterSet,
};
use serde::Serialize;

use crate::config::ResolvedParams;
use crate::format::sig9;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ChshMode {
    Ren,
    Unren { p: f64 },
    Stable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CurveKind {
    Asymmetry { alpha: f64 },
    Chsh(ChshMode),
}

/// A sampled curve over [x_lo, x_hi] with `steps` rows, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSpec {
    pub kind: CurveKind,
    pub x_lo: f64,
    pub x_hi: f64,
    pub steps: usize,
}

impl CurveSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::InvalidSpec(msg));
        if !(self.x_lo.is_finite() && self.x_hi.is_finite() && self.x_lo < self.x_hi) {
            return bad(format!("range [{}, {}] is empty", self.x_lo, self.x_hi));
        }
        if self.x_lo < 0.0 {
            return bad(format!("range start {} is negative", self.x_lo));
        }
        if self.steps < 2 {
            return bad(format!("need at least 2 steps, got {}", self.steps));
        }
        match self.kind {
            CurveKind::Asymmetry { alpha } if !(alpha > 1.0 && alpha.is_finite()) => {
                bad(format!("alpha must exceed 1, got {alpha}"))
            }
            CurveKind::Chsh(ChshMode::Unren { p }) if !(p >= 0.0 && p.is_finite()) => bad(format!(
                "schedule parameter p must be non-negative, got {p}"
            )),
            _ => Ok(()),
        }
    }

    pub fn abscissae(&self) -> impl Iterator<Item = f64> + '_ {
        let last = self.steps - 1;
        let step = (self.x_hi - self.x_lo) / last as f64;
        (0..self.steps).map(move |i| {
            if i == last {
                self.x_hi
            } else {
                self.x_lo + step * i as f64
            }
        })
    }
}

/// CSV text for `spec`: `tau1,a_qm,a_lr_min,a_lr_max` for asymmetry
/// curves, `tau,s` for CHSH curves.
pub fn cmd_curve(spec: &CurveSpec, params: &ParameterSet) -> Result<String, CliError> {
    spec.validate()?;
    let mut out = String::new();
    match spec.kind {
        CurveKind::Asymmetry { alpha } => {
            out.push_str("tau1,a_qm,a_lr_min,a_lr_max\n");
            for tau1 in spec.abscissae() {
                let tau2 = alpha * tau1;
                let a = qm_asymmetry(params, tau1, tau2)?;
                let b = asymmetry_bounds(params, tau1, tau2)?;
                push_row(&mut out, &[tau1, a, b.lower, b.upper]);
            }
        }
        CurveKind::Chsh(mode) => {
            out.push_str("tau,s\n");
            for tau in spec.abscissae() {
                let s = match mode {
                    ChshMode::Ren => chsh::s_qm(params, tau)?,
                    ChshMode::Unren { p } => chsh::s_unrenormalized(params, p, tau)?,
                    ChshMode::Stable => chsh::s_stable(params.delta_m, tau),
                };
                push_row(&mut out, &[tau, s.s]);
            }
        }
    }
    Ok(out)
}

fn push_row(out: &mut String, values: &[f64]) {
    let cells: Vec<String> = values.iter().map(|&v| sig9(v)).collect();
    out.push_str(&cells.join(","));
    out.push('\n');
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRequest {
    pub objective: Objective,
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub tol: f64,
    pub grid_points: usize,
    /// Evaluate in the Γ_S = Γ_L = 0 limit with the resolved Δm.
    pub stable: bool,
}

impl Default for ScanRequest {
    fn default() -> Self {
        ScanRequest {
            objective: Objective::Min,
            tau_lo: 0.0,
            tau_hi: 4.0,
            tol: 1e-6,
            grid_points: DEFAULT_GRID_POINTS,
            stable: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleReport {
    pub p: f64,
    pub tau: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub tau4: f64,
    pub locality: LocalityVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub objective: Objective,
    pub range: [f64; 2],
    pub tol: f64,
    pub stable_limit: bool,
    pub tau_star: f64,
    pub s_star: f64,
    pub violation: bool,
    pub p_min_locality: f64,
    pub example_schedule: ScheduleReport,
}

/// Example schedule offset reported with every scan.
pub const EXAMPLE_P: f64 = 6.0;

pub fn cmd_scan(params: &ParameterSet, req: &ScanRequest) -> Result<ScanReport, CliError> {
    let effective = if req.stable {
        ParameterSet::stable_limit(params.delta_m)
    } else {
        *params
    };
    let best = chsh::find_extremal_violation_with_grid(
        &effective,
        req.tau_lo,
        req.tau_hi,
        req.objective,
        req.tol,
        req.grid_points,
    )?;
    let value = chsh::ChshValue::new(best.value);
    let violation = match req.objective {
        Objective::Min => value.violated_lower,
        Objective::Max => value.violated_upper,
    };
    let sched = ChshSchedule::new(EXAMPLE_P, best.x)?;
    Ok(ScanReport {
        objective: req.objective,
        range: [req.tau_lo, req.tau_hi],
        tol: req.tol,
        stable_limit: req.stable,
        tau_star: best.x,
        s_star: best.value,
        violation,
        p_min_locality: MIN_LOCAL_P,
        example_schedule: ScheduleReport {
            p: EXAMPLE_P,
            tau: best.x,
            tau1: sched.tau1(),
            tau2: sched.tau2(),
            tau3: sched.tau3(),
            tau4: sched.tau4(),
            locality: chsh::locality_check(&sched),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateRequest {
    pub model: HvModel,
    pub tau1: f64,
    pub tau2: f64,
    pub n_events: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurvivalReport {
    pub observed: EstimateWithError,
    pub expected: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub counts: CountsTable,
    pub estimate: EstimateWithError,
    pub bounds: AsymmetryBounds,
    /// Estimate within [lower − 3σ, upper + 3σ].
    pub within_bounds: bool,
    pub survival: SurvivalReport,
}

/// Width, in standard errors, of the containment check.
pub const CONTAINMENT_SIGMAS: f64 = 3.0;

pub fn cmd_simulate(
    params: &ParameterSet,
    req: &SimulateRequest,
) -> Result<SimulateReport, CliError> {
    let counts = run_experiment(
        req.model,
        params,
        req.tau1,
        req.tau2,
        req.n_events,
        req.seed,
    )?;
    let estimate = estimate_asymmetry(&counts)?;
    let bounds = asymmetry_bounds(params, req.tau1, req.tau2)?;
    let survival = SurvivalReport {
        observed: counts.undecayed_fraction(),
        expected: survival_prob(params, req.tau1, req.tau2)?,
    };
    Ok(SimulateReport {
        within_bounds: bounds.contains_within(estimate.value, CONTAINMENT_SIGMAS * estimate.sigma),
        counts,
        estimate,
        bounds,
        survival,
    })
}

pub fn cmd_params(resolved: &ResolvedParams) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(resolved)? + "\n")
}
