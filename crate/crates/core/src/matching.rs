//! Minimum-cost linear assignment and QJSD-driven node matching.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ctqw::Horizon;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::qjsd::{node_pair_qjsd, WalkConfig};

/// Node correspondence between two graphs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
    pub unmatched_left: Vec<usize>,
    pub unmatched_right: Vec<usize>,
}

impl Assignment {
    /// Column matched to each row, if any.
    pub fn row_to_col(&self, rows: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; rows];
        for &(u, v) in &self.pairs {
            out[u] = Some(v);
        }
        out
    }
}

/// Solves the rectangular assignment problem, minimising total cost.
///
/// Rectangular inputs are padded to square with the largest entry, and the
/// dummy pairs are reported as unmatched. Ties resolve deterministically in
/// row-scan order.
pub fn hungarian(cost: &DMatrix<f64>) -> Result<Assignment> {
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain("cost matrix has non-finite entries".into()));
    }
    let (rows, cols) = cost.shape();
    if rows == 0 || cols == 0 {
        return Ok(Assignment {
            pairs: Vec::new(),
            total_cost: 0.0,
            unmatched_left: (0..rows).collect(),
            unmatched_right: (0..cols).collect(),
        });
    }

    let size = rows.max(cols);
    let dummy = cost.max();
    let padded = DMatrix::from_fn(size, size, |i, j| {
        if i < rows && j < cols {
            cost[(i, j)]
        } else {
            dummy
        }
    });
    let row_of = solve_square(&padded);

    let mut pairs = Vec::with_capacity(rows.min(cols));
    let mut unmatched_left = Vec::new();
    let mut matched_right = vec![false; cols];
    for (i, &j) in row_of.iter().enumerate().take(rows) {
        if j < cols {
            pairs.push((i, j));
            matched_right[j] = true;
        } else {
            unmatched_left.push(i);
        }
    }
    let unmatched_right = (0..cols).filter(|&j| !matched_right[j]).collect();
    let total_cost = pairs.iter().map(|&(i, j)| cost[(i, j)]).sum();
    Ok(Assignment {
        pairs,
        total_cost,
        unmatched_left,
        unmatched_right,
    })
}

/// Shortest augmenting path with row/column potentials, O(n³). Returns the
/// column assigned to each row.
fn solve_square(cost: &DMatrix<f64>) -> Vec<usize> {
    let n = cost.nrows();
    // 1-based with index 0 as the virtual source column
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_of = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_of[p[j] - 1] = j - 1;
        }
    }
    row_of
}

/// Maps node-pair divergences to assignment costs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostTransform {
    /// `1 - QJSD`: corresponding nodes score near 1, so they cost near 0.
    #[default]
    OneMinusQjsd,
    /// The divergence itself.
    Raw,
}

impl CostTransform {
    pub fn apply(self, divergences: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            CostTransform::OneMinusQjsd => divergences.map(|d| 1.0 - d),
            CostTransform::Raw => divergences.clone(),
        }
    }
}

/// Node-pair divergence matrix together with the assignment derived from it.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeMatching {
    pub divergences: DMatrix<f64>,
    pub assignment: Assignment,
}

pub fn optimal_node_matching(
    g1: &Graph,
    g2: &Graph,
    horizon: Horizon,
    config: &WalkConfig,
    transform: CostTransform,
) -> Result<NodeMatching> {
    let divergences = node_pair_qjsd(g1, g2, horizon, config)?;
    let assignment = hungarian(&transform.apply(&divergences))?;
    Ok(NodeMatching {
        divergences,
        assignment,
    })
}
