//! Bilinear heads that turn pseudo-orbital vectors and a symmetric kernel
//! into one- and two-body tensor entries.
//!
//! Every head evaluates its bilinear forms through [`KernelMatrix::bilinear`],
//! which sums over the upper triangle with the summand `u_i v_j + u_j v_i`.
//! That summand is unchanged bit-for-bit when `u` and `v` trade places, so
//! the permutational symmetries of the heads hold exactly in floating point.

mod kernel;

pub use kernel::KernelMatrix;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HeadKind {
    BareOneBody,
    EffOneBody,
    BareTwoBody,
    EffTwoBody,
}

impl HeadKind {
    pub const ALL: [HeadKind; 4] = [
        HeadKind::BareOneBody,
        HeadKind::EffOneBody,
        HeadKind::BareTwoBody,
        HeadKind::EffTwoBody,
    ];

    /// Number of distinct orbital nets feeding the head.
    pub fn n_nets(self) -> usize {
        match self {
            HeadKind::EffTwoBody => 2,
            _ => 1,
        }
    }

    pub fn is_two_body(self) -> bool {
        matches!(self, HeadKind::BareTwoBody | HeadKind::EffTwoBody)
    }

    pub fn is_effective(self) -> bool {
        matches!(self, HeadKind::EffOneBody | HeadKind::EffTwoBody)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HeadKind::BareOneBody => "bare-one",
            HeadKind::EffOneBody => "eff-one",
            HeadKind::BareTwoBody => "bare-two",
            HeadKind::EffTwoBody => "eff-two",
        }
    }
}

impl fmt::Display for HeadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HeadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        HeadKind::ALL
            .into_iter()
            .find(|h| h.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown head kind '{s}'")))
    }
}

fn check_len(ell: usize, vs: &[ArrayView1<f64>]) -> Result<()> {
    match vs.iter().find(|v| v.len() != ell) {
        Some(v) => Err(Error::Shape(format!(
            "vector of length {} against kernel dim {ell}",
            v.len()
        ))),
        None => Ok(()),
    }
}

/// `[φp⊙φq]ᵀ W [φr⊙φs]`.
pub fn eval_bare_two(
    phi_p: ArrayView1<f64>,
    phi_q: ArrayView1<f64>,
    phi_r: ArrayView1<f64>,
    phi_s: ArrayView1<f64>,
    w: &KernelMatrix,
) -> Result<f64> {
    check_len(w.dim(), &[phi_p, phi_q, phi_r, phi_s])?;
    let u = &phi_p * &phi_q;
    let v = &phi_r * &phi_s;
    Ok(w.bilinear(u.view(), v.view()))
}

/// `½([φp⊙φ̃q]ᵀW[φr⊙φ̃s] + [φq⊙φ̃p]ᵀW[φs⊙φ̃r])`.
#[allow(clippy::too_many_arguments)]
pub fn eval_eff_two(
    phi_p: ArrayView1<f64>,
    phi_q: ArrayView1<f64>,
    phi_r: ArrayView1<f64>,
    phi_s: ArrayView1<f64>,
    tilde_p: ArrayView1<f64>,
    tilde_q: ArrayView1<f64>,
    tilde_r: ArrayView1<f64>,
    tilde_s: ArrayView1<f64>,
    w: &KernelMatrix,
) -> Result<f64> {
    check_len(
        w.dim(),
        &[phi_p, phi_q, phi_r, phi_s, tilde_p, tilde_q, tilde_r, tilde_s],
    )?;
    let u1 = &phi_p * &tilde_q;
    let v1 = &phi_r * &tilde_s;
    let u2 = &phi_q * &tilde_p;
    let v2 = &phi_s * &tilde_r;
    let a = w.bilinear(u1.view(), v1.view());
    let b = w.bilinear(u2.view(), v2.view());
    Ok(0.5 * (a + b))
}

/// `ψpᵀ M ψq`.
pub fn eval_one(psi_p: ArrayView1<f64>, psi_q: ArrayView1<f64>, m: &KernelMatrix) -> Result<f64> {
    check_len(m.dim(), &[psi_p, psi_q])?;
    Ok(m.bilinear(psi_p, psi_q))
}

/// Vectors feeding one head evaluation, in slot order.
#[derive(Clone, Copy, Debug)]
pub enum HeadInput<'a> {
    One {
        psi: [ArrayView1<'a, f64>; 2],
    },
    BareTwo {
        phi: [ArrayView1<'a, f64>; 4],
    },
    EffTwo {
        phi: [ArrayView1<'a, f64>; 4],
        tilde: [ArrayView1<'a, f64>; 4],
    },
}

impl HeadInput<'_> {
    pub fn eval(&self, w: &KernelMatrix) -> Result<f64> {
        match *self {
            HeadInput::One { psi } => eval_one(psi[0], psi[1], w),
            HeadInput::BareTwo { phi } => eval_bare_two(phi[0], phi[1], phi[2], phi[3], w),
            HeadInput::EffTwo { phi, tilde } => eval_eff_two(
                phi[0], phi[1], phi[2], phi[3], tilde[0], tilde[1], tilde[2], tilde[3], w,
            ),
        }
    }
}

/// Gradients of one head evaluation, scaled by the upstream scalar.
///
/// `kernel` is the symmetrized matrix gradient; `phi[k]`/`tilde[k]` belong to
/// input slot `k` (for one-body heads only `phi[0..2]` are filled).
#[derive(Clone, Debug, PartialEq)]
pub struct HeadGrad {
    pub kernel: ndarray::Array2<f64>,
    pub phi: Vec<Array1<f64>>,
    pub tilde: Vec<Array1<f64>>,
}

pub fn grad_head(input: &HeadInput, w: &KernelMatrix, upstream: f64) -> Result<HeadGrad> {
    let ell = w.dim();
    let wm = w.matrix();
    match *input {
        HeadInput::One { psi } => {
            check_len(ell, &psi)?;
            let mq = wm.dot(&psi[1]);
            let mp = wm.dot(&psi[0]);
            let mut kernel = outer(psi[0], psi[1], upstream);
            symmetrize(&mut kernel);
            Ok(HeadGrad {
                kernel,
                phi: vec![mq * upstream, mp * upstream],
                tilde: Vec::new(),
            })
        }
        HeadInput::BareTwo { phi } => {
            check_len(ell, &phi)?;
            let u = &phi[0] * &phi[1];
            let v = &phi[2] * &phi[3];
            let wv = wm.dot(&v) * upstream;
            let wu = wm.dot(&u) * upstream;
            let mut kernel = outer(u.view(), v.view(), upstream);
            symmetrize(&mut kernel);
            Ok(HeadGrad {
                kernel,
                phi: vec![&phi[1] * &wv, &phi[0] * &wv, &phi[3] * &wu, &phi[2] * &wu],
                tilde: Vec::new(),
            })
        }
        HeadInput::EffTwo { phi, tilde } => {
            check_len(ell, &phi)?;
            check_len(ell, &tilde)?;
            let h = 0.5 * upstream;
            let u1 = &phi[0] * &tilde[1];
            let v1 = &phi[2] * &tilde[3];
            let u2 = &phi[1] * &tilde[0];
            let v2 = &phi[3] * &tilde[2];
            let wv1 = wm.dot(&v1) * h;
            let wu1 = wm.dot(&u1) * h;
            let wv2 = wm.dot(&v2) * h;
            let wu2 = wm.dot(&u2) * h;
            let mut kernel = outer(u1.view(), v1.view(), h) + outer(u2.view(), v2.view(), h);
            symmetrize(&mut kernel);
            Ok(HeadGrad {
                kernel,
                phi: vec![&tilde[1] * &wv1, &tilde[0] * &wv2, &tilde[3] * &wu1, &tilde[2] * &wu2],
                tilde: vec![&phi[1] * &wv2, &phi[0] * &wv1, &phi[3] * &wu2, &phi[2] * &wu1],
            })
        }
    }
}

fn outer(a: ArrayView1<f64>, b: ArrayView1<f64>, scale: f64) -> ndarray::Array2<f64> {
    let a = a.to_owned().insert_axis(ndarray::Axis(1)) * scale;
    let b = b.insert_axis(ndarray::Axis(0));
    &a * &b
}

pub(crate) fn symmetrize(g: &mut ndarray::Array2<f64>) {
    let n = g.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (g[[i, j]] + g[[j, i]]);
            g[[i, j]] = s;
            g[[j, i]] = s;
        }
    }
}
