//! Symmetric eigendecomposition with degeneracy grouping.

use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 10_000;

/// Eigenvalues in ascending order, the matching orthonormal eigenvectors as
/// columns, and the partition of indices into numerically equal eigenvalues.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    groups: Vec<Range<usize>>,
}

impl Spectrum {
    /// Assembles a spectrum from already-computed parts. Eigenvalues must be
    /// sorted ascending and `eigenvectors` must have one column per value.
    pub fn from_parts(eigenvalues: DVector<f64>, eigenvectors: DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = eigenvalues.len();
        if eigenvectors.shape() != (n, n) {
            return Err(Error::Shape(format!(
                "{} eigenvalues with a {}x{} eigenvector matrix",
                n,
                eigenvectors.nrows(),
                eigenvectors.ncols()
            )));
        }
        if eigenvalues.as_slice().windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Parameter("eigenvalues must be nondecreasing".into()));
        }
        let groups = group_degenerate(eigenvalues.as_slice(), tol);
        Ok(Spectrum {
            eigenvalues,
            eigenvectors,
            groups,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Contiguous index ranges of numerically equal eigenvalues.
    pub fn groups(&self) -> &[Range<usize>] {
        &self.groups
    }

    /// Group id of every eigenvalue index.
    pub fn group_ids(&self) -> Vec<usize> {
        let mut ids = vec![0; self.dim()];
        for (g, r) in self.groups.iter().enumerate() {
            ids[r.clone()].fill(g);
        }
        ids
    }

    /// `Φ Λ Φᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = &self.eigenvectors * DMatrix::from_diagonal(&self.eigenvalues);
        scaled * self.eigenvectors.transpose()
    }
}

/// Default grouping tolerance for a sorted spectrum: `1e-9 * max(1, range)`.
pub fn default_tolerance(eigenvalues: &[f64]) -> f64 {
    let range = match (eigenvalues.first(), eigenvalues.last()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0.0,
    };
    1e-9 * range.max(1.0)
}

/// Decomposes a symmetric matrix, grouping eigenvalues with the default
/// tolerance.
pub fn eig_sym(m: &DMatrix<f64>) -> Result<Spectrum> {
    eig_sym_with_tolerance(m, None)
}

pub fn eig_sym_with_tolerance(m: &DMatrix<f64>, tol: Option<f64>) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::Shape(format!("matrix is {}x{}", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (m[(i, j)] - m[(j, i)]).abs();
            if d > SYMMETRY_TOL || d.is_nan() {
                return Err(Error::Shape(format!("matrix not symmetric at ({i}, {j}): gap {d:e}")));
            }
        }
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    if n == 0 {
        return Spectrum::from_parts(DVector::zeros(0), DMatrix::zeros(0, 0), 1e-9);
    }

    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);

    let tol = tol.unwrap_or_else(|| default_tolerance(eigenvalues.as_slice()));
    Spectrum::from_parts(eigenvalues, eigenvectors, tol)
}

/// Partitions a sorted eigenvalue list into groups. Each eigenvalue joins the
/// current group when it lies within `tol` of that group's first member.
pub fn group_degenerate(eigenvalues: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=eigenvalues.len() {
        if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[start] > tol {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}
