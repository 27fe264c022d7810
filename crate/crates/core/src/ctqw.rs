//! Continuous-time quantum walks on a merged graph.
//!
//! States evolve as `|ψ_t⟩ = Φ e^{-iΛt} Φᵀ |ψ_0⟩` where `H = ΦΛΦᵀ` is the
//! walk Hamiltonian. The time-averaged density operator over `[0, T]` has a
//! closed form in the eigenbasis: with `ψ̂ = Φᵀψ_0`,
//!
//! ```text
//! ρ_T = Φ M Φᵀ,   M[k][n] = ψ̂_k conj(ψ̂_n) · avg_{t∈[0,T]} e^{i(λ_n - λ_k)t}
//! ```
//!
//! As `T → ∞` only pairs inside one degeneracy group survive, which equals
//! `Σ_λ P_λ |ψ_0⟩⟨ψ_0| P_λ`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, MergedGraph};
use crate::spectral::Spectrum;

const NORM_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-9;

/// Which operator drives the walk.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hamiltonian {
    #[default]
    Laplacian,
    Adjacency,
}

impl Hamiltonian {
    pub fn matrix(self, g: &Graph) -> DMatrix<f64> {
        match self {
            Hamiltonian::Laplacian => g.laplacian(),
            Hamiltonian::Adjacency => g.weights().clone(),
        }
    }
}

/// Averaging window for density operators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

impl std::fmt::Display for Horizon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Horizon::Finite(t) => write!(f, "{t}"),
            Horizon::Infinite => f.write_str("inf"),
        }
    }
}

/// Unit-norm amplitude vector over the nodes of a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    amplitudes: DVector<Complex64>,
}

impl WalkState {
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("state norm is {norm}, expected 1")));
        }
        Ok(WalkState { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(DVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&a| Complex64::new(a, 0.0)),
        ))
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Probability of finding the walker on each node.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates every density-matrix invariant.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let rho = DensityMatrix { entries };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn new_unchecked(entries: DMatrix<Complex64>) -> Self {
        DensityMatrix { entries }
    }

    pub fn from_real(entries: &DMatrix<f64>) -> Result<Self> {
        Self::new(entries.map(|x| Complex64::new(x, 0.0)))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(state: &WalkState) -> Self {
        let a = state.amplitudes();
        DensityMatrix::new_unchecked(a * a.adjoint())
    }

    /// `I / n`.
    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix::new_unchecked(DMatrix::identity(n, n) / Complex64::new(n as f64, 0.0))
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `max |ρ - ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.dim() == 0 {
            return Ok(Vec::new());
        }
        let hermitian = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = nalgebra::SymmetricEigen::try_new(hermitian, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.entries.is_square() {
            return Err(Error::Shape("density matrix must be square".into()));
        }
        if self.entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("density matrix has non-finite entries".into()));
        }
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::Domain(format!("not Hermitian (error {herm:e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Domain(format!("trace is {tr}, expected 1")));
        }
        let min = self.min_eigenvalue()?;
        if min < -PSD_TOL {
            return Err(Error::Domain(format!("not positive semidefinite (min eigenvalue {min:e})")));
        }
        Ok(())
    }

    /// Entrywise `(ρ + σ) / 2`.
    pub fn midpoint(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "density matrices are {}x{0} and {}x{1}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(DensityMatrix::new_unchecked(
            (&self.entries + &other.entries) * Complex64::new(0.5, 0.0),
        ))
    }

    /// `max |ρ_ij - σ_ij|`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }
}

/// The two walker start states on a merged graph.
///
/// Both put amplitude `d_u / C` on node `u`, with `d_u` the weighted degree in
/// the merged graph and `C = sqrt(Σ d_u²)`. The returned `minus` state flips
/// the sign on the second graph's nodes; `plus` does not.
pub fn initial_states(mg: &MergedGraph) -> Result<(WalkState, WalkState)> {
    let degrees = mg.graph().degree_vector();
    let c = degrees.norm();
    if !(c > 0.0) {
        return Err(Error::DegenerateInput(
            "merged graph has no edges, so every degree is zero".into(),
        ));
    }
    let n = degrees.len();
    let plus = DVector::from_iterator(n, degrees.iter().map(|d| Complex64::new(d / c, 0.0)));
    let minus = DVector::from_iterator(
        n,
        degrees.iter().enumerate().map(|(u, d)| {
            let a = d / c;
            Complex64::new(if mg.is_left(u) { a } else { -a }, 0.0)
        }),
    );
    Ok((WalkState { amplitudes: minus }, WalkState { amplitudes: plus }))
}

fn check_dims(spec: &Spectrum, psi: &WalkState) -> Result<()> {
    if spec.dim() != psi.dim() {
        return Err(Error::Shape(format!(
            "spectrum of dimension {} with state of dimension {}",
            spec.dim(),
            psi.dim()
        )));
    }
    Ok(())
}

/// `Φᵀ ψ` as complex coefficients in the eigenbasis.
fn to_eigenbasis(spec: &Spectrum, psi: &WalkState) -> DVector<Complex64> {
    let phi = spec.eigenvectors();
    DVector::from_fn(spec.dim(), |k, _| {
        phi.column(k)
            .iter()
            .zip(psi.amplitudes.iter())
            .map(|(&p, &a)| a * p)
            .sum()
    })
}

/// `Φ M Φᵀ` for real `Φ`, followed by symmetrisation of rounding noise.
fn from_eigenbasis(spec: &Spectrum, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let phi = spec.eigenvectors().map(|x| Complex64::new(x, 0.0));
    let rho = &phi * m * phi.transpose();
    (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `|ψ_t⟩ = Φ e^{-iΛt} Φᵀ |ψ_0⟩`.
pub fn evolve(spec: &Spectrum, psi0: &WalkState, t: f64) -> Result<WalkState> {
    check_dims(spec, psi0)?;
    if !t.is_finite() {
        return Err(Error::Parameter(format!("time must be finite, got {t}")));
    }
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    let coeffs = to_eigenbasis(spec, psi0);
    let phased = DVector::from_fn(spec.dim(), |k, _| {
        coeffs[k] * Complex64::from_polar(1.0, -spec.eigenvalues()[k] * t)
    });
    let phi = spec.eigenvectors();
    let amplitudes = DVector::from_fn(spec.dim(), |r, _| {
        phi.row(r).iter().zip(phased.iter()).map(|(&p, &a)| a * p).sum()
    });
    Ok(WalkState { amplitudes })
}

/// `(1/T) ∫_0^T e^{iωt} dt`, evaluated without cancellation near `ω = 0`.
fn phase_average(omega: f64, horizon: f64) -> Complex64 {
    let x = omega * horizon;
    if x == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let half = 0.5 * x;
    let s = half.sin();
    Complex64::new(x.sin() / x, 2.0 * s * s / x)
}

/// Closed-form average of `|ψ_t⟩⟨ψ_t|` over `t ∈ [0, T]`.
pub fn avg_density_finite(spec: &Spectrum, psi0: &WalkState, horizon: f64) -> Result<DensityMatrix> {
    check_dims(spec, psi0)?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Parameter(format!("time horizon must be positive, got {horizon}")));
    }
    let coeffs = to_eigenbasis(spec, psi0);
    let lambda = spec.eigenvalues();
    let groups = spec.group_ids();
    let n = spec.dim();
    let m = DMatrix::from_fn(n, n, |k, l| {
        let weight = if groups[k] == groups[l] {
            Complex64::new(1.0, 0.0)
        } else {
            phase_average(lambda[l] - lambda[k], horizon)
        };
        coeffs[k] * coeffs[l].conj() * weight
    });
    Ok(DensityMatrix::new_unchecked(from_eigenbasis(spec, &m)))
}

/// Infinite-time average: `Σ_λ P_λ |ψ_0⟩⟨ψ_0| P_λ` over degeneracy groups.
pub fn avg_density_infinite(spec: &Spectrum, psi0: &WalkState) -> Result<DensityMatrix> {
    check_dims(spec, psi0)?;
    let n = spec.dim();
    let coeffs = to_eigenbasis(spec, psi0);
    let phi = spec.eigenvectors();
    let mut rho = DMatrix::<Complex64>::zeros(n, n);
    for group in spec.groups() {
        // P_λ ψ_0 = Φ_λ (Φ_λᵀ ψ_0)
        let projected = DVector::from_fn(n, |r, _| {
            group.clone().map(|k| coeffs[k] * phi[(r, k)]).sum::<Complex64>()
        });
        rho += &projected * projected.adjoint();
    }
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(DensityMatrix::new_unchecked(rho))
}

/// Averaged density operator for either horizon.
pub fn avg_density(spec: &Spectrum, psi0: &WalkState, horizon: Horizon) -> Result<DensityMatrix> {
    match horizon {
        Horizon::Finite(t) => avg_density_finite(spec, psi0, t),
        Horizon::Infinite => avg_density_infinite(spec, psi0),
    }
}

/// Trapezoid-rule approximation of the time average, sampling the evolved
/// state on a uniform grid no coarser than `step`.
pub fn avg_density_quadrature(
    spec: &Spectrum,
    psi0: &WalkState,
    horizon: f64,
    step: f64,
) -> Result<DensityMatrix> {
    check_dims(spec, psi0)?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Parameter(format!("time horizon must be positive, got {horizon}")));
    }
    if !(step > 0.0) || step >= horizon {
        return Err(Error::Parameter(format!("step must lie in (0, T), got {step}")));
    }
    let intervals = (horizon / step).ceil() as usize;
    let h = horizon / intervals as f64;
    let n = spec.dim();
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..=intervals {
        let psi = evolve(spec, psi0, i as f64 * h)?;
        let w = if i == 0 || i == intervals { 0.5 } else { 1.0 };
        let a = psi.amplitudes();
        acc += (a * a.adjoint()) * Complex64::new(w, 0.0);
    }
    Ok(DensityMatrix::new_unchecked(acc * Complex64::new(h / horizon, 0.0)))
}
