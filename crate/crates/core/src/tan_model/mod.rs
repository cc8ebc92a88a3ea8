//! Fit of the tangent law `r_i = amplitude · tan(rate · (i − center))`
//! to relative eigenvalue differences.

mod lsq;

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::io_util::{fmt_f64, CsvTable};
use crate::spectral_analysis::{differences, EigenDiff};

/// Every included index must satisfy `|rate·(i − center)| < π/2 − MARGIN`.
pub const MARGIN: f64 = 1e-3;
pub const RATE_MIN: f64 = 1e-4;
pub const GRID_RATES: usize = 32;
pub const GRID_CENTERS: usize = 64;
const MAX_ITER: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct TanFit {
    pub rate: f64,
    pub amplitude: f64,
    pub center: f64,
    /// Root-mean-square ratio error over `included`.
    pub residual: f64,
    /// 1-based indices used in the fit.
    pub included: Vec<usize>,
    /// All ratios were zero; rate and center are placeholders.
    pub degenerate: bool,
    /// Refinement converged. When false the best grid point is returned.
    pub converged: bool,
}

impl TanFit {
    pub fn arg(&self, i: f64) -> f64 {
        self.rate * (i - self.center)
    }
}

/// `amplitude · tan(rate · (i − center))`; errors near the singularity.
pub fn eval_tan(fit: &TanFit, i: f64) -> Result<f64> {
    let x = fit.arg(i);
    if x.abs() >= FRAC_PI_2 - MARGIN {
        return Err(Error::Numerical(format!(
            "index {i} is within {MARGIN} of the tan singularity (argument {x})"
        )));
    }
    Ok(fit.amplitude * x.tan())
}

/// Fits matched eigenpairs `(i, ε^B_i, ε^D_i)`, skipping floor-flagged indices.
pub fn fit_tan(diffs: &[EigenDiff]) -> Result<TanFit> {
    let pts: Vec<(usize, f64)> = diffs.iter().filter_map(|d| d.rel.map(|r| (d.index, r))).collect();
    let ell = diffs.iter().map(|d| d.index).max().unwrap_or(0);
    fit_ratios(&pts, ell)
}

/// Convenience wrapper over raw eigenvalue lists in the bare ordering.
pub fn fit_eigenvalues(eps_b: &[f64], eps_d: &[f64]) -> Result<TanFit> {
    fit_tan(&differences(eps_b, eps_d))
}

/// Fits `(index, ratio)` points; centers are searched over `[1, ell]`.
pub fn fit_ratios(points: &[(usize, f64)], ell: usize) -> Result<TanFit> {
    if points.len() < 4 {
        return Err(Error::Invalid(format!(
            "tan fit needs at least 4 included points, got {}",
            points.len()
        )));
    }
    if let Some((i, r)) = points.iter().find(|(_, r)| !r.is_finite()) {
        return Err(Error::NonFinite(format!("ratio {r} at index {i}")));
    }
    let included: Vec<usize> = points.iter().map(|p| p.0).collect();
    let xs: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let rs: Vec<f64> = points.iter().map(|p| p.1).collect();
    let ell = ell.max(*included.iter().max().unwrap()) as f64;

    if rs.iter().all(|&r| r == 0.0) {
        return Ok(TanFit {
            rate: RATE_MIN,
            amplitude: 0.0,
            center: 0.5 * (1.0 + ell),
            residual: 0.0,
            included,
            degenerate: true,
            converged: true,
        });
    }

    let (rate, center) = grid_search(&xs, &rs, ell)?;
    let amplitude = best_amplitude(&xs, &rs, rate, center);
    let grid = [rate, amplitude, center];
    let (params, converged) = match lsq::refine(&xs, &rs, grid, MAX_ITER) {
        Some(p) => (p, true),
        None => (grid, false),
    };
    let [rate, amplitude, center] = params;
    let residual = (sse(&xs, &rs, rate, amplitude, center) / xs.len() as f64).sqrt();
    Ok(TanFit {
        rate,
        amplitude,
        center,
        residual,
        included,
        degenerate: false,
        converged,
    })
}

pub(crate) fn feasible(xs: &[f64], rate: f64, center: f64) -> bool {
    rate > 0.0 && xs.iter().all(|&i| (rate * (i - center)).abs() < FRAC_PI_2 - MARGIN)
}

pub(crate) fn sse(xs: &[f64], rs: &[f64], rate: f64, amplitude: f64, center: f64) -> f64 {
    xs.iter()
        .zip(rs)
        .map(|(&i, &r)| {
            let e = r - amplitude * (rate * (i - center)).tan();
            e * e
        })
        .sum()
}

fn best_amplitude(xs: &[f64], rs: &[f64], rate: f64, center: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (&i, &r) in xs.iter().zip(rs) {
        let t = (rate * (i - center)).tan();
        num += r * t;
        den += t * t;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Coarse search over `(rate, center)`; ties go to the lowest rate, then
/// the lowest center.
fn grid_search(xs: &[f64], rs: &[f64], ell: f64) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64, f64)> = None;
    for ci in 0..GRID_CENTERS {
        let center = 1.0 + (ell - 1.0) * ci as f64 / (GRID_CENTERS - 1) as f64;
        let reach = xs.iter().map(|&i| (i - center).abs()).fold(0.0, f64::max);
        let rate_max = if reach > 0.0 {
            (FRAC_PI_2 - MARGIN) / reach
        } else {
            f64::INFINITY
        };
        // Keep the top of the grid strictly inside the open region.
        let rate_max = rate_max * (1.0 - 1e-9);
        if rate_max <= RATE_MIN {
            continue;
        }
        for ri in 0..GRID_RATES {
            let rate = RATE_MIN * (rate_max / RATE_MIN).powf(ri as f64 / (GRID_RATES - 1) as f64);
            if !feasible(xs, rate, center) {
                continue;
            }
            let b = best_amplitude(xs, rs, rate, center);
            let s = sse(xs, rs, rate, b, center);
            let better = match best {
                None => true,
                Some((bs, br, bc)) => s < bs || (s == bs && (rate < br || (rate == br && center < bc))),
            };
            if better {
                best = Some((s, rate, center));
            }
        }
    }
    best.map(|(_, r, c)| (r, c))
        .ok_or_else(|| Error::Numerical("no singularity-free grid cell for the tan fit".into()))
}

/// Columns `system,body,rate,amplitude,center,residual`.
pub fn tan_report(rows: &[(String, String, TanFit)]) -> CsvTable {
    let mut t = CsvTable::new(["system", "body", "rate", "amplitude", "center", "residual"]);
    for (system, body, fit) in rows {
        t.push([
            system.clone(),
            body.clone(),
            fmt_f64(fit.rate),
            fmt_f64(fit.amplitude),
            fmt_f64(fit.center),
            fmt_f64(fit.residual),
        ]);
    }
    t
}

/// Columns `i,observed,fitted` for every included index.
pub fn curve_csv(fit: &TanFit, diffs: &[EigenDiff]) -> CsvTable {
    let mut t = CsvTable::new(["i", "observed", "fitted"]);
    for d in diffs {
        if let Some(r) = d.rel {
            let fitted = eval_tan(fit, d.index as f64).map(fmt_f64).unwrap_or_default();
            t.push([d.index.to_string(), fmt_f64(r), fitted]);
        }
    }
    t
}
