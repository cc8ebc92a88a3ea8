use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::nn_core::{Block, ShapeSpec};

/// Symmetric ℓ×ℓ kernel parameterized by its upper triangle (row-major,
/// diagonal included). The dense matrix is rebuilt from the triangle after
/// every update so it is symmetric to the bit.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    upper: Vec<f64>,
    dense: Array2<f64>,
}

impl KernelMatrix {
    pub fn zeros(dim: usize) -> Self {
        KernelMatrix {
            upper: vec![0.0; dim * (dim + 1) / 2],
            dense: Array2::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![1.0; dim])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut k = Self::zeros(n);
        for (i, d) in diag.iter().enumerate() {
            k.upper[tri_index(n, i, i)] = *d;
        }
        k.rebuild();
        k
    }

    pub fn from_upper(dim: usize, upper: &[f64]) -> Result<Self> {
        if upper.len() != dim * (dim + 1) / 2 {
            return Err(Error::Shape(format!(
                "{} triangle values for a {dim}x{dim} kernel",
                upper.len()
            )));
        }
        let mut k = Self::zeros(dim);
        k.upper.copy_from_slice(upper);
        k.rebuild();
        Ok(k)
    }

    /// Takes the upper triangle of `m`; the lower triangle must agree to `tol`.
    pub fn from_matrix(m: ArrayView2<f64>, tol: f64) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::Shape(format!("kernel must be square, got {:?}", m.shape())));
        }
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                let (a, b) = (m[[i, j]], m[[j, i]]);
                if (a - b).abs() > tol {
                    return Err(Error::Symmetry(format!(
                        "kernel[{i}][{j}] = {a:e} but kernel[{j}][{i}] = {b:e}"
                    )));
                }
                upper.push(a);
            }
        }
        Self::from_upper(n, &upper)
    }

    pub fn dim(&self) -> usize {
        self.dense.nrows()
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn set_upper(&mut self, upper: &[f64]) -> Result<()> {
        if upper.len() != self.upper.len() {
            return Err(Error::Shape(format!(
                "{} triangle values for {} slots",
                upper.len(),
                self.upper.len()
            )));
        }
        self.upper.copy_from_slice(upper);
        self.rebuild();
        Ok(())
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.dense
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dense[[i, j]]
    }

    /// `uᵀ K v`, summed so that swapping `u` and `v` gives the same bits.
    pub fn bilinear(&self, u: ArrayView1<f64>, v: ArrayView1<f64>) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        let mut k = 0;
        for i in 0..n {
            let (ui, vi) = (u[i], v[i]);
            acc += self.upper[k] * (ui * vi);
            k += 1;
            for j in i + 1..n {
                acc += self.upper[k] * (ui * v[j] + u[j] * vi);
                k += 1;
            }
        }
        acc
    }

    /// Maps a gradient on the dense matrix to the triangle parameters.
    /// Off-diagonal slots feed two dense entries.
    pub fn upper_grad(g: ArrayView2<f64>) -> Vec<f64> {
        let n = g.nrows();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            out.push(g[[i, i]]);
            for j in i + 1..n {
                out.push(g[[i, j]] + g[[j, i]]);
            }
        }
        out
    }

    pub fn to_block(&self, name: &str, seed: u64, step: u64) -> Block {
        Block {
            name: name.to_string(),
            shape: ShapeSpec::SymmetricMatrix(self.dim()),
            seed,
            step,
            data: self.upper.clone(),
        }
    }

    pub fn from_block(block: &Block) -> Result<Self> {
        match block.shape {
            ShapeSpec::SymmetricMatrix(n) => Self::from_upper(n, &block.data),
            ref other => Err(Error::Shape(format!(
                "block '{}' has shape {other}, expected a symmetric matrix",
                block.name
            ))),
        }
    }

    fn rebuild(&mut self) {
        let n = self.dim();
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                self.dense[[i, j]] = self.upper[k];
                self.dense[[j, i]] = self.upper[k];
                k += 1;
            }
        }
    }
}

fn tri_index(n: usize, i: usize, j: usize) -> usize {
    i * n - i * (i + 1) / 2 + j
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn triangle_layout() {
        let k = KernelMatrix::from_upper(3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(*k.matrix(), array![[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]]);
        assert_eq!(tri_index(3, 1, 2), 4);
        assert!(KernelMatrix::from_upper(3, &[1.0]).is_err());
    }

    #[test]
    fn from_matrix_checks_symmetry() {
        let m = array![[1.0, 2.0], [2.0 + 1e-3, 1.0]];
        assert!(KernelMatrix::from_matrix(m.view(), 1e-12).is_err());
        assert!(KernelMatrix::from_matrix(m.view(), 1e-2).is_ok());
    }

    #[test]
    fn block_round_trip() {
        let k = KernelMatrix::from_upper(2, &[0.1, -0.2, 0.3]).unwrap();
        assert_eq!(KernelMatrix::from_block(&k.to_block("w", 1, 2)).unwrap(), k);
    }
}
