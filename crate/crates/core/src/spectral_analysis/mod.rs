//! Eigendecomposition of kernels, bare/effective eigenvector pairing and
//! the eigenvalue differences fed to the tan-model fit.

mod jacobi;

pub use jacobi::{jacobi_eigh, EigenSystem, JACOBI_TOL};

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::factorized_interactions::KernelMatrix;
use crate::io_util::{fmt_f64, CsvTable};

/// Ratios are computed only where `|ε^B| ≥ FLOOR_REL · max |ε^B|`.
pub const FLOOR_REL: f64 = 1e-8;

pub fn eig_sym(k: &KernelMatrix) -> Result<EigenSystem> {
    jacobi_eigh(k.matrix().view())
}

/// Pairing of effective eigenvectors with bare ones.
///
/// `perm[i]` is the effective column matched to bare column `i`, and
/// `signs[i]` the flip applied to it. `overlap` is `(Z^B)ᵀ Z^D` after
/// reordering and sign fixing, so its diagonal is non-negative.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentReport {
    pub overlap: Array2<f64>,
    pub perm: Vec<usize>,
    pub signs: Vec<f64>,
    pub eps_b: Vec<f64>,
    pub eps_d: Vec<f64>,
    pub score: f64,
}

impl AlignmentReport {
    pub fn max_off_diagonal(&self) -> f64 {
        self.overlap
            .indexed_iter()
            .filter(|((i, j), _)| i != j)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    }

    /// Columns `row,col,value` (1-based).
    pub fn overlap_csv(&self) -> CsvTable {
        matrix_csv(self.overlap.view())
    }
}

/// Greedy one-to-one pairing by decreasing `|overlap|`.
pub fn align_eigensystems(b: &EigenSystem, d: &EigenSystem) -> Result<AlignmentReport> {
    let n = b.dim();
    if d.dim() != n {
        return Err(Error::Shape(format!("eigensystems of size {n} and {}", d.dim())));
    }
    let raw = b.vectors.t().dot(&d.vectors);
    let mut cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    cells.sort_by(|&(i1, j1), &(i2, j2)| {
        raw[[i2, j2]]
            .abs()
            .total_cmp(&raw[[i1, j1]].abs())
            .then((i1, j1).cmp(&(i2, j2)))
    });
    let mut perm = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut left = n;
    for (i, j) in cells {
        if left == 0 {
            break;
        }
        if perm[i] == usize::MAX && !taken[j] {
            perm[i] = j;
            taken[j] = true;
            left -= 1;
        }
    }
    let signs: Vec<f64> = (0..n)
        .map(|i| if raw[[i, perm[i]]] < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let mut overlap = Array2::zeros((n, n));
    for i in 0..n {
        for k in 0..n {
            overlap[[i, k]] = raw[[i, perm[k]]] * signs[k];
        }
    }
    let score = (0..n).map(|i| overlap[[i, i]].abs()).fold(1.0, f64::min);
    Ok(AlignmentReport {
        overlap,
        eps_b: b.values.clone(),
        eps_d: perm.iter().map(|&j| d.values[j]).collect(),
        perm,
        signs,
        score: if n == 0 { 1.0 } else { score },
    })
}

/// `Zᵀ K Z`.
pub fn project_kernel(k: &KernelMatrix, z: ArrayView2<f64>) -> Result<Array2<f64>> {
    if z.nrows() != k.dim() {
        return Err(Error::Shape(format!(
            "basis with {} rows for a {}-dim kernel",
            z.nrows(),
            k.dim()
        )));
    }
    Ok(z.t().dot(&k.matrix().dot(&z)))
}

/// One matched eigenpair. `index` is 1-based in the bare ordering; `rel` is
/// `None` when the bare eigenvalue is under the floor.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDiff {
    pub index: usize,
    pub eps_b: f64,
    pub eps_d: f64,
    pub diff: f64,
    pub rel: Option<f64>,
}

impl EigenDiff {
    pub fn flagged(&self) -> bool {
        self.rel.is_none()
    }
}

pub fn eigen_differences(report: &AlignmentReport) -> Vec<EigenDiff> {
    differences(&report.eps_b, &report.eps_d)
}

pub fn differences(eps_b: &[f64], eps_d: &[f64]) -> Vec<EigenDiff> {
    let max = eps_b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let floor = FLOOR_REL * max;
    eps_b
        .iter()
        .zip(eps_d)
        .enumerate()
        .map(|(i, (&b, &d))| {
            let diff = d - b;
            let rel = (max > 0.0 && b.abs() >= floor).then(|| diff / b);
            EigenDiff {
                index: i + 1,
                eps_b: b,
                eps_d: d,
                diff,
                rel,
            }
        })
        .collect()
}

/// Columns `i,eps_B,eps_D,diff,rel_diff,flagged`; `rel_diff` is empty when flagged.
pub fn differences_csv(diffs: &[EigenDiff]) -> CsvTable {
    let mut t = CsvTable::new(["i", "eps_B", "eps_D", "diff", "rel_diff", "flagged"]);
    for d in diffs {
        t.push([
            d.index.to_string(),
            fmt_f64(d.eps_b),
            fmt_f64(d.eps_d),
            fmt_f64(d.diff),
            d.rel.map(fmt_f64).unwrap_or_default(),
            d.flagged().to_string(),
        ]);
    }
    t
}

/// Columns `row,col,value` (1-based), row-major.
pub fn matrix_csv(m: ArrayView2<f64>) -> CsvTable {
    let mut t = CsvTable::new(["row", "col", "value"]);
    for ((i, j), v) in m.indexed_iter() {
        t.push([(i + 1).to_string(), (j + 1).to_string(), fmt_f64(*v)]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identical_systems_align_to_identity() {
        let k =
            KernelMatrix::from_matrix(array![[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, -1.0]].view(), 0.0).unwrap();
        let e = eig_sym(&k).unwrap();
        let a = align_eigensystems(&e, &e).unwrap();
        assert_eq!(a.perm, vec![0, 1, 2]);
        assert!((a.score - 1.0).abs() < 1e-14);
        assert!(a.max_off_diagonal() < 1e-14);
        assert!(eigen_differences(&a).iter().all(|d| d.diff == 0.0));
    }

    #[test]
    fn swapped_columns_are_recovered() {
        let k = KernelMatrix::from_diag(&[3.0, 2.0, 1.0]);
        let b = eig_sym(&k).unwrap();
        let mut d = b.clone();
        d.values.swap(0, 1);
        let c0 = d.vectors.column(0).to_owned();
        let c1 = d.vectors.column(1).to_owned();
        d.vectors.column_mut(0).assign(&(-&c1));
        d.vectors.column_mut(1).assign(&c0);
        let a = align_eigensystems(&b, &d).unwrap();
        assert_eq!(a.perm, vec![1, 0, 2]);
        assert_eq!(a.signs, vec![1.0, -1.0, 1.0]);
        assert_eq!(a.eps_d, vec![3.0, 2.0, 1.0]);
        assert_eq!(a.score, 1.0);
    }

    #[test]
    fn zero_bare_eigenvalue_is_flagged() {
        let d = differences(&[2.0, 0.0, -1.0], &[2.5, 1e-3, -1.0]);
        assert_eq!(d[0].rel, Some(0.25));
        assert!(d[1].flagged() && d[1].diff == 1e-3);
        assert_eq!(d[2].rel, Some(0.0));
        let csv = differences_csv(&d).render();
        assert!(csv.lines().nth(2).unwrap().ends_with(",,true"));
    }

    #[test]
    fn projection_of_own_kernel_is_diagonal() {
        let k = KernelMatrix::from_matrix(array![[1.0, 0.3], [0.3, -0.5]].view(), 0.0).unwrap();
        let e = eig_sym(&k).unwrap();
        let p = project_kernel(&k, e.vectors.view()).unwrap();
        assert!(p[[0, 1]].abs() < 1e-15 && (p[[0, 0]] - e.values[0]).abs() < 1e-15);
    }
}
