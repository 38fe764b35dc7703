//! One-dimensional extremum search: a uniform grid to locate the basin,
//! then golden-section refinement inside the bracketing cell pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Min,
    Max,
}

impl Objective {
    fn sign(self) -> f64 {
        match self {
            Objective::Min => 1.0,
            Objective::Max => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
}

pub const DEFAULT_GRID_POINTS: usize = 1024;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of `f` on [a, b] until the bracket is
/// narrower than `tol`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Extremum {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    Extremum { x, value: f(x) }
}

/// Grid of `grid_points` inclusive samples over [lo, hi], then golden
/// section on the two cells around the best sample. Ties on the grid go to
/// the lowest index.
pub fn grid_golden_search<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    grid_points: usize,
    tol: f64,
    objective: Objective,
) -> Result<Extremum> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::EmptyRange { lo, hi });
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let n = grid_points.max(3);
    let sign = objective.sign();
    let g = |x: f64| sign * f(x);
    let step = (hi - lo) / (n - 1) as f64;
    let at = |i: usize| if i == n - 1 { hi } else { lo + step * i as f64 };

    let (best_i, best_g) = (0..n)
        .map(|i| (i, g(at(i))))
        .fold(
            (0, f64::INFINITY),
            |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
        );

    let a = at(best_i.saturating_sub(1));
    let b = at((best_i + 1).min(n - 1));
    let refined = golden_section_min(g, a, b, tol);
    let best = if refined.value <= best_g {
        refined
    } else {
        Extremum {
            x: at(best_i),
            value: best_g,
        }
    };
    Ok(Extremum {
        x: best.x,
        value: sign * best.value,
    })
}
