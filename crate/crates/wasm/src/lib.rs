//! Browser bindings: curves, the CHSH optimum and a small Monte Carlo run.
//!
//! Curves come back as flat `Float64Array`s (row-major), structured
//! results as JSON strings.

use kaonbell::{
    asymmetry_bounds, chsh, estimate_asymmetry, qm_asymmetry, run_experiment, HvModel, Objective,
    ParameterSet,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest Monte Carlo run accepted from the page.
pub const MAX_EVENTS: u64 = 2_000_000;

fn params(gamma_s: f64, gamma_l: f64, delta_m: f64) -> Result<ParameterSet, String> {
    ParameterSet::new(gamma_s, gamma_l, delta_m).map_err(|e| e.to_string())
}

fn grid(x_hi: f64, steps: usize) -> Result<impl Iterator<Item = f64>, String> {
    if !(x_hi > 0.0 && x_hi.is_finite()) || steps < 2 {
        return Err(format!("need x_hi > 0 and steps >= 2, got {x_hi}, {steps}"));
    }
    let last = steps - 1;
    Ok((0..steps).map(move |i| {
        if i == last {
            x_hi
        } else {
            x_hi * i as f64 / last as f64
        }
    }))
}

/// Rows of `[tau1, a_qm, a_lr_min, a_lr_max]` with τ₂ = α τ₁.
pub fn asymmetry_rows(
    p: &ParameterSet,
    alpha: f64,
    x_hi: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(format!("alpha must exceed 1, got {alpha}"));
    }
    let mut out = Vec::with_capacity(4 * steps);
    for t in grid(x_hi, steps)? {
        let a = qm_asymmetry(p, t, alpha * t).map_err(|e| e.to_string())?;
        let b = asymmetry_bounds(p, t, alpha * t).map_err(|e| e.to_string())?;
        out.extend([t, a, b.lower, b.upper]);
    }
    Ok(out)
}

/// Rows of `[tau, s_ren, s_unren]`, the unrenormalized curve at offset `p_sched`.
pub fn chsh_rows(
    p: &ParameterSet,
    p_sched: f64,
    x_hi: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    let mut out = Vec::with_capacity(3 * steps);
    for t in grid(x_hi, steps)? {
        let ren = chsh::s_qm(p, t).map_err(|e| e.to_string())?;
        let unren = chsh::s_unrenormalized(p, p_sched, t).map_err(|e| e.to_string())?;
        out.extend([t, ren.s, unren.s]);
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct SimulationSummary {
    pub model: HvModel,
    pub n_events: u64,
    pub undecayed_pairs: u64,
    pub like: u64,
    pub unlike: u64,
    pub a_hat: f64,
    pub sigma: f64,
    pub a_qm: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn simulate_summary(
    p: &ParameterSet,
    model: &str,
    tau1: f64,
    tau2: f64,
    n_events: u64,
    seed: u64,
) -> Result<SimulationSummary, String> {
    let model: HvModel = model.parse()?;
    if n_events > MAX_EVENTS {
        return Err(format!("at most {MAX_EVENTS} events in the browser"));
    }
    let counts = run_experiment(model, p, tau1, tau2, n_events, seed).map_err(|e| e.to_string())?;
    let est = estimate_asymmetry(&counts).map_err(|e| e.to_string())?;
    let bounds = asymmetry_bounds(p, tau1, tau2).map_err(|e| e.to_string())?;
    Ok(SimulationSummary {
        model,
        n_events,
        undecayed_pairs: counts.undecayed_pairs(),
        like: counts.like_strangeness(),
        unlike: counts.unlike_strangeness(),
        a_hat: est.value,
        sigma: est.sigma,
        a_qm: qm_asymmetry(p, tau1, tau2).map_err(|e| e.to_string())?,
        lower: bounds.lower,
        upper: bounds.upper,
    })
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn asymmetry_curve(
    gamma_s: f64,
    gamma_l: f64,
    delta_m: f64,
    alpha: f64,
    tau_max: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    js(params(gamma_s, gamma_l, delta_m).and_then(|p| asymmetry_rows(&p, alpha, tau_max, steps)))
}

#[wasm_bindgen]
pub fn chsh_curve(
    gamma_s: f64,
    gamma_l: f64,
    delta_m: f64,
    p_sched: f64,
    tau_max: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    js(params(gamma_s, gamma_l, delta_m).and_then(|p| chsh_rows(&p, p_sched, tau_max, steps)))
}

/// `[tau_star, s_star]` for the renormalized curve on (0, tau_max].
#[wasm_bindgen]
pub fn chsh_optimum(
    gamma_s: f64,
    gamma_l: f64,
    delta_m: f64,
    tau_max: f64,
) -> Result<Vec<f64>, JsError> {
    js(params(gamma_s, gamma_l, delta_m).and_then(|p| {
        let e = chsh::find_extremal_violation(&p, 0.0, tau_max, Objective::Min, 1e-7)
            .map_err(|e| e.to_string())?;
        Ok(vec![e.x, e.value])
    }))
}

/// JSON summary of a Monte Carlo run.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    gamma_s: f64,
    gamma_l: f64,
    delta_m: f64,
    model: &str,
    tau1: f64,
    tau2: f64,
    n_events: u32,
    seed: u32,
) -> Result<String, JsError> {
    js(params(gamma_s, gamma_l, delta_m)
        .and_then(|p| simulate_summary(&p, model, tau1, tau2, n_events.into(), seed.into()))
        .and_then(|s| serde_json::to_string(&s).map_err(|e| e.to_string())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use kaonbell::default_params;

    #[test]
    fn asymmetry_rows_shape() {
        let rows = asymmetry_rows(&default_params(), 1.5, 3.0, 301).unwrap();
        assert_eq!(rows.len(), 4 * 301);
        let r = &rows[4 * 150..4 * 151];
        assert_eq!(r[0], 1.5);
        assert!((r[1] - 0.873_119_114_596_149_7).abs() < 1e-12);
        assert!(r[2] <= r[3] && r[3] < r[1]);
        assert!(asymmetry_rows(&default_params(), 1.0, 3.0, 10).is_err());
        assert!(asymmetry_rows(&default_params(), 1.5, 3.0, 1).is_err());
    }

    #[test]
    fn chsh_rows_dip_below_minus_one() {
        let rows = chsh_rows(&default_params(), 6.0, 4.0, 401).unwrap();
        let min_ren = rows.chunks(3).map(|r| r[1]).fold(f64::INFINITY, f64::min);
        let min_unren = rows.chunks(3).map(|r| r[2]).fold(f64::INFINITY, f64::min);
        assert!(min_ren < -1.08);
        assert!(min_unren >= -1.0);
    }

    #[test]
    fn simulation_summary() {
        let s =
            simulate_summary(&default_params(), "threshold-max", 1.5, 2.25, 200_000, 1).unwrap();
        assert_eq!(s.like + s.unlike, s.undecayed_pairs);
        assert!((s.a_hat - s.upper).abs() < 4.0 * s.sigma);
        assert!(simulate_summary(&default_params(), "nope", 1.0, 1.0, 10, 1).is_err());
        assert!(simulate_summary(
            &default_params(),
            "threshold-max",
            1.0,
            1.0,
            MAX_EVENTS + 1,
            1
        )
        .is_err());
    }
}
