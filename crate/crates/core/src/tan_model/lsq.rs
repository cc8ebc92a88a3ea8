//! Levenberg–Marquardt refinement of `(rate, amplitude, center)`.
//!
//! Each step solves the damped least-squares system `[J; √λ·D] δ = [−e; 0]`
//! by Householder QR instead of forming `JᵀJ`, which keeps the centre
//! resolvable to ~1e-9 when the amplitude is tiny.

use super::{feasible, sse};

/// Returns refined parameters, or `None` when no improving step was found
/// before the iteration cap.
pub(super) fn refine(xs: &[f64], rs: &[f64], start: [f64; 3], max_iter: usize) -> Option<[f64; 3]> {
    let mut p = start;
    let mut cost = sse(xs, rs, p[0], p[1], p[2]);
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..max_iter {
        if cost == 0.0 {
            converged = true;
            break;
        }
        let (jac, err) = jacobian(xs, rs, p);
        let scale: Vec<f64> = (0..3)
            .map(|c| jac.iter().map(|row| row[c] * row[c]).sum::<f64>().sqrt().max(1e-300))
            .collect();
        let mut accepted = false;
        for _ in 0..40 {
            let delta = solve_damped(&jac, &err, &scale, lambda);
            let trial = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]];
            if trial.iter().all(|v| v.is_finite()) && feasible(xs, trial[0], trial[2]) {
                let c = sse(xs, rs, trial[0], trial[1], trial[2]);
                if c <= cost {
                    let small =
                        (0..3).all(|k| (delta[k] * scale[k]).abs() <= 1e-15 * (p[k] * scale[k]).abs().max(1e-300));
                    let stalled = cost - c <= 1e-15 * cost;
                    p = trial;
                    cost = c;
                    lambda = (lambda * 0.3).max(1e-12);
                    accepted = true;
                    if small || stalled {
                        converged = true;
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No descent direction left: the start point is already optimal
            // to working precision.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    converged.then_some(p)
}

/// Rows of the Jacobian of `e_i = amplitude·tan(rate(i−c)) − r_i` and `e`.
fn jacobian(xs: &[f64], rs: &[f64], p: [f64; 3]) -> (Vec<[f64; 3]>, Vec<f64>) {
    let [a, b, c] = p;
    let mut jac = Vec::with_capacity(xs.len());
    let mut err = Vec::with_capacity(xs.len());
    for (&i, &r) in xs.iter().zip(rs) {
        let x = a * (i - c);
        let t = x.tan();
        let sec2 = 1.0 + t * t;
        jac.push([b * sec2 * (i - c), t, -b * sec2 * a]);
        err.push(b * t - r);
    }
    (jac, err)
}

/// Least-squares solution of `[J·S⁻¹; √λ·I] y = [−e; 0]`, returned as `δ = S⁻¹y`.
#[allow(clippy::needless_range_loop)]
fn solve_damped(jac: &[[f64; 3]], err: &[f64], scale: &[f64], lambda: f64) -> [f64; 3] {
    let m = jac.len() + 3;
    let mut a: Vec<[f64; 3]> = jac
        .iter()
        .map(|row| [row[0] / scale[0], row[1] / scale[1], row[2] / scale[2]])
        .collect();
    let mut rhs: Vec<f64> = err.iter().map(|e| -e).collect();
    let sl = lambda.sqrt();
    for k in 0..3 {
        let mut row = [0.0; 3];
        row[k] = sl;
        a.push(row);
        rhs.push(0.0);
    }
    // Householder QR, columns 0..3.
    for k in 0..3 {
        let norm = (k..m).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for col in k..3 {
            let dot: f64 = (k..m).map(|i| v[i - k] * a[i][col]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                a[i][col] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i - k] * rhs[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in k..m {
            rhs[i] -= f * v[i - k];
        }
    }
    let mut y = [0.0; 3];
    for k in (0..3).rev() {
        let mut s = rhs[k];
        for j in k + 1..3 {
            s -= a[k][j] * y[j];
        }
        y[k] = if a[k][k] != 0.0 { s / a[k][k] } else { 0.0 };
    }
    [y[0] / scale[0], y[1] / scale[1], y[2] / scale[2]]
}
