//! Von Neumann entropy, quantum Jensen-Shannon divergence, and the graph-level
//! and node-pair divergences built on merged-graph walks.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ctqw::{avg_density, initial_states, DensityMatrix, Hamiltonian, Horizon, WalkState};
use crate::error::{Error, Result};
use crate::graph::{merge_graphs, Graph, InterEdges, InterWeight, MergePolicy, MergedGraph};
use crate::par::{try_map_indices, Execution};
use crate::spectral::{eig_sym, Spectrum};

/// Eigenvalues with magnitude up to this contribute nothing to the entropy.
const CLIP: f64 = 1e-12;
/// Eigenvalues below `-NEG_TOL` mean the input is not a density matrix.
const NEG_TOL: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-9;

/// How node-pair divergences connect the two graphs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairTopology {
    /// One inter-graph edge between the scored pair.
    Single,
    /// All inter-graph edges, with the scored pair's edge weight multiplied.
    FullBoosted { boost: f64 },
}

/// Free parameters of the walk pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub hamiltonian: Hamiltonian,
    /// Bandwidth of the attribute kernel on inter-graph edges.
    pub sigma: f64,
    pub pair_topology: PairTopology,
    pub execution: Execution,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            hamiltonian: Hamiltonian::Laplacian,
            sigma: 1.0,
            pair_topology: PairTopology::Single,
            execution: Execution::Parallel,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::Parameter(format!("sigma must be positive, got {}", self.sigma)));
        }
        if let PairTopology::FullBoosted { boost } = self.pair_topology {
            if !(boost > 0.0) || !boost.is_finite() {
                return Err(Error::Parameter(format!("boost must be positive, got {boost}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub value: f64,
    pub entropy_mixture: f64,
    pub entropy_rho: f64,
    pub entropy_sigma: f64,
    pub time_horizon: Horizon,
}

/// `-Σ λ log₂ λ` over the eigenvalues of `rho`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let herm = rho.hermiticity_error();
    if herm > HERMITIAN_TOL {
        return Err(Error::Domain(format!("not Hermitian (error {herm:e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::Domain(format!("trace is {tr}, expected 1")));
    }
    let eigenvalues = rho.eigenvalues()?;
    if let Some(&min) = eigenvalues.first() {
        if min < -NEG_TOL {
            return Err(Error::Domain(format!("negative eigenvalue {min:e}")));
        }
    }
    Ok(eigenvalues
        .into_iter()
        .filter(|&l| l > CLIP)
        .map(|l| -l * l.log2())
        .sum())
}

/// `H((ρ+σ)/2) - H(ρ)/2 - H(σ)/2`, bounded in `[0, 1]` with base-2 logs.
pub fn qjsd(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivergenceReport> {
    qjsd_at(rho, sigma, Horizon::Infinite)
}

fn qjsd_at(rho: &DensityMatrix, sigma: &DensityMatrix, horizon: Horizon) -> Result<DivergenceReport> {
    let mixture = rho.midpoint(sigma)?;
    let entropy_rho = von_neumann_entropy(rho)?;
    let entropy_sigma = von_neumann_entropy(sigma)?;
    let entropy_mixture = von_neumann_entropy(&mixture)?;
    Ok(DivergenceReport {
        value: entropy_mixture - 0.5 * (entropy_rho + entropy_sigma),
        entropy_mixture,
        entropy_rho,
        entropy_sigma,
        time_horizon: horizon,
    })
}

/// Inter-edge weighting implied by the graphs' attributes.
fn inter_weight(g1: &Graph, g2: &Graph, sigma: f64) -> Result<InterWeight> {
    match (g1.attributes(), g2.attributes()) {
        (Some(_), Some(_)) => Ok(InterWeight::Gaussian { sigma }),
        (None, None) => Ok(InterWeight::Unit),
        _ => Err(Error::Attribute(
            "only one of the two graphs carries node attributes".into(),
        )),
    }
}

fn check_nonempty(g1: &Graph, g2: &Graph) -> Result<()> {
    if g1.n() == 0 || g2.n() == 0 {
        return Err(Error::Domain("graphs must have at least one node".into()));
    }
    Ok(())
}

/// The two walks on one merged graph, sharing a single eigendecomposition.
#[derive(Clone, Debug)]
pub struct WalkPair {
    merged: MergedGraph,
    spectrum: Spectrum,
    minus: WalkState,
    plus: WalkState,
}

impl WalkPair {
    pub fn new(g1: &Graph, g2: &Graph, edges: InterEdges, config: &WalkConfig) -> Result<Self> {
        config.validate()?;
        check_nonempty(g1, g2)?;
        let policy = MergePolicy {
            edges,
            weight: inter_weight(g1, g2, config.sigma)?,
        };
        let merged = merge_graphs(g1, g2, policy)?;
        let spectrum = eig_sym(&config.hamiltonian.matrix(merged.graph()))?;
        let (minus, plus) = initial_states(&merged)?;
        Ok(WalkPair {
            merged,
            spectrum,
            minus,
            plus,
        })
    }

    pub fn merged(&self) -> &MergedGraph {
        &self.merged
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// `(ψ⁻, ψ⁺)`.
    pub fn states(&self) -> (&WalkState, &WalkState) {
        (&self.minus, &self.plus)
    }

    /// Averaged operators `(ρ, σ)` of the sign-flipped and uniform-sign walks.
    pub fn densities(&self, horizon: Horizon) -> Result<(DensityMatrix, DensityMatrix)> {
        Ok((
            avg_density(&self.spectrum, &self.minus, horizon)?,
            avg_density(&self.spectrum, &self.plus, horizon)?,
        ))
    }

    pub fn divergence(&self, horizon: Horizon) -> Result<DivergenceReport> {
        let (rho, sigma) = self.densities(horizon)?;
        qjsd_at(&rho, &sigma, horizon)
    }
}

/// Divergence between the two walks on the fully connected merge of `g1`
/// and `g2`.
pub fn graph_qjsd(g1: &Graph, g2: &Graph, horizon: Horizon, config: &WalkConfig) -> Result<DivergenceReport> {
    WalkPair::new(g1, g2, InterEdges::Full, config)?.divergence(horizon)
}

/// Graph-level divergences for many pairs, in input order.
pub fn graph_qjsd_batch(
    pairs: &[(&Graph, &Graph)],
    horizon: Horizon,
    config: &WalkConfig,
) -> Result<Vec<DivergenceReport>> {
    try_map_indices(config.execution, pairs.len(), |i| {
        graph_qjsd(pairs[i].0, pairs[i].1, horizon, config)
    })
}

fn pair_edges(u: usize, v: usize, topology: PairTopology) -> InterEdges {
    match topology {
        PairTopology::Single => InterEdges::Single(u, v),
        PairTopology::FullBoosted { boost } => InterEdges::FullBoosted { u, v, boost },
    }
}

/// `n1 × n2` matrix whose `(u, v)` entry is the divergence on the merge that
/// joins only `u` and `v` (or boosts their edge, per the configured topology).
pub fn node_pair_qjsd(g1: &Graph, g2: &Graph, horizon: Horizon, config: &WalkConfig) -> Result<DMatrix<f64>> {
    Ok(node_pair_qjsd_multi(g1, g2, &[horizon], config)?.remove(0))
}

/// One node-pair matrix per horizon; each cell is decomposed only once.
pub fn node_pair_qjsd_multi(
    g1: &Graph,
    g2: &Graph,
    horizons: &[Horizon],
    config: &WalkConfig,
) -> Result<Vec<DMatrix<f64>>> {
    config.validate()?;
    check_nonempty(g1, g2)?;
    let (n1, n2) = (g1.n(), g2.n());
    let cells = try_map_indices(config.execution, n1 * n2, |idx| {
        let (u, v) = (idx / n2, idx % n2);
        let walk = WalkPair::new(g1, g2, pair_edges(u, v, config.pair_topology), config)?;
        horizons
            .iter()
            .map(|&h| walk.divergence(h).map(|r| r.value))
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok((0..horizons.len())
        .map(|h| DMatrix::from_fn(n1, n2, |u, v| cells[u * n2 + v][h]))
        .collect())
}
