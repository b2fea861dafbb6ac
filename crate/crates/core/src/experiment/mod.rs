//! The entangled quanton-detector state and the observables read off it.
//!
//! A [`BranchState`] stores the quanton wavefunction correlated with each of
//! the three orthonormal detector basis vectors. Changing detector basis
//! recombines the branches; the total screen density never changes.

pub mod fringe;
pub mod kick;
pub mod sampling;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use thiserror::Error;

use crate::hilbert::{basis_matrix, BasisChoice, DetectorConfig, Outcome, UqsdCoefficients};
use crate::wavepacket::{
    propagate_fft, slit_state, ConfigError, GridSpec, PhysicalUnits, Slit, SlitGeometry,
    Wavefunction,
};

pub use fringe::{fringe_analysis, FringeAnalysis, FringeWindow};
pub use kick::{
    eq14_residual, kick_report, momentum_shift, periodic_distance, phase_kick_shift,
    storey_bound_report, tilted_relative_kick, KickBound, KickReport, TiltedKicks,
};
pub use sampling::{chi_square_vs_density, sample_events, ChiSquare, EventSample};

/// Branch probabilities at or below this are treated as empty.
pub const EMPTY_BRANCH: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("branch {0} has zero probability; its conditional pattern is undefined")]
    EmptyBranch(Outcome),
    #[error("outcome {outcome} does not belong to the {basis} basis")]
    ForeignOutcome {
        outcome: Outcome,
        basis: BasisChoice,
    },
    #[error("fringe window [{lo}, {hi}] is malformed: {reason}")]
    MalformedWindow {
        lo: f64,
        hi: f64,
        reason: &'static str,
    },
    #[error("visibility {0} must lie in [0, 1]")]
    VisibilityOutOfRange(f64),
    #[error("event count must be at least 1")]
    NoEvents,
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// Quanton branches correlated with the three vectors of one detector basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    basis: BasisChoice,
    branches: [Wavefunction; 3],
}

impl BranchState {
    pub fn new(basis: BasisChoice, branches: [Wavefunction; 3]) -> Self {
        Self { basis, branches }
    }

    pub fn basis(&self) -> BasisChoice {
        self.basis
    }

    pub fn branches(&self) -> &[Wavefunction; 3] {
        &self.branches
    }

    pub fn grid(&self) -> &GridSpec {
        self.branches[0].grid()
    }

    pub fn branch(&self, outcome: Outcome) -> Result<&Wavefunction> {
        outcome
            .index_in(&self.basis)
            .map(|i| &self.branches[i])
            .ok_or(ExperimentError::ForeignOutcome {
                outcome,
                basis: self.basis,
            })
    }

    /// Branch norms, in basis order.
    pub fn probabilities(&self) -> [f64; 3] {
        [
            self.branches[0].norm_sqr(),
            self.branches[1].norm_sqr(),
            self.branches[2].norm_sqr(),
        ]
    }

    pub fn probability(&self, outcome: Outcome) -> Result<f64> {
        Ok(self.branch(outcome)?.norm_sqr())
    }

    pub fn total_norm(&self) -> f64 {
        self.probabilities().iter().sum()
    }
}

/// Which density a [`ScreenPattern`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    /// Sum over all branches; integrates to one.
    Total,
    /// One branch renormalised to unit mass.
    Conditional(Outcome),
    /// Density of a single undisturbed wavefunction.
    Pure,
}

/// Real probability density on the position grid, units `length^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreenPattern {
    grid: GridSpec,
    density: Vec<f64>,
    kind: PatternKind,
}

impl ScreenPattern {
    pub fn new(grid: GridSpec, density: Vec<f64>, kind: PatternKind) -> Self {
        assert_eq!(grid.n(), density.len());
        Self {
            grid,
            density,
            kind,
        }
    }

    pub fn from_wavefunction(psi: &Wavefunction) -> Self {
        Self::new(*psi.grid(), psi.density(), PatternKind::Pure)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    /// `sum rho dx`
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.grid.dx()
    }

    pub fn max_abs_diff(&self, other: &ScreenPattern) -> f64 {
        self.density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// No-detector state `(psi1 + psi2) / sqrt(2)`.
pub fn reference_state(geom: &SlitGeometry, grid: &GridSpec) -> Result<Wavefunction> {
    let psi1 = slit_state(geom, grid, Slit::One)?;
    let psi2 = slit_state(geom, grid, Slit::Two)?;
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Ok(Wavefunction::superpose(&[(h, &psi1), (h, &psi2)]))
}

/// Entangled state in the computational detector basis:
/// `q1: alpha psi1 / sqrt2`, `q2: gamma psi2 / sqrt2`,
/// `q3: (beta psi1 + delta psi2) / sqrt2`.
pub fn assemble(
    geom: &SlitGeometry,
    grid: &GridSpec,
    coeffs: &UqsdCoefficients,
) -> Result<BranchState> {
    let psi1 = slit_state(geom, grid, Slit::One)?;
    let psi2 = slit_state(geom, grid, Slit::Two)?;
    Ok(assemble_from(&psi1, &psi2, coeffs))
}

/// [`assemble`] from arbitrary path states, e.g. already-propagated ones.
pub fn assemble_from(
    psi1: &Wavefunction,
    psi2: &Wavefunction,
    coeffs: &UqsdCoefficients,
) -> BranchState {
    let zero = Complex64::new(0.0, 0.0);
    let s = FRAC_1_SQRT_2;
    let q1 =
        Wavefunction::superpose(&[(Complex64::new(coeffs.alpha * s, 0.0), psi1), (zero, psi2)]);
    let q2 =
        Wavefunction::superpose(&[(zero, psi1), (Complex64::new(coeffs.gamma * s, 0.0), psi2)]);
    let q3 = Wavefunction::superpose(&[(coeffs.beta * s, psi1), (coeffs.delta * s, psi2)]);
    BranchState::new(BasisChoice::Computational, [q1, q2, q3])
}

pub fn change_basis(state: &BranchState, to: BasisChoice) -> BranchState {
    let m = basis_matrix(&state.basis, &to);
    let [a, b, c] = &state.branches;
    let row = |i: usize| Wavefunction::superpose(&[(m[i][0], a), (m[i][1], b), (m[i][2], c)]);
    BranchState::new(to, [row(0), row(1), row(2)])
}

/// Free evolution of every branch; detector states do not evolve.
pub fn propagate_all(state: &BranchState, units: &PhysicalUnits) -> Result<BranchState> {
    let [a, b, c] = &state.branches;
    Ok(BranchState::new(
        state.basis,
        [
            propagate_fft(a, units)?,
            propagate_fft(b, units)?,
            propagate_fft(c, units)?,
        ],
    ))
}

/// `rho(x) = sum_b |psi_b(x)|^2`.
pub fn screen_density(state: &BranchState) -> ScreenPattern {
    let grid = *state.grid();
    let mut density = vec![0.0; grid.n()];
    for branch in &state.branches {
        for (r, a) in density.iter_mut().zip(branch.amplitudes()) {
            *r += a.norm_sqr();
        }
    }
    ScreenPattern::new(grid, density, PatternKind::Total)
}

/// Screen density written directly in terms of the two path states:
/// `(|psi1|^2 + |psi2|^2 + 2 Re(<d1|d2> psi1* psi2)) / 2`.
pub fn two_path_density(
    psi1: &Wavefunction,
    psi2: &Wavefunction,
    detector: &DetectorConfig,
) -> ScreenPattern {
    let overlap = detector.inner_product();
    let density = psi1
        .amplitudes()
        .iter()
        .zip(psi2.amplitudes())
        .map(|(a, b)| 0.5 * (a.norm_sqr() + b.norm_sqr() + 2.0 * (overlap * a.conj() * b).re))
        .collect();
    ScreenPattern::new(*psi1.grid(), density, PatternKind::Total)
}

/// Branch probability and the branch pattern renormalised to unit mass.
pub fn conditional_density(state: &BranchState, outcome: Outcome) -> Result<(f64, ScreenPattern)> {
    let branch = state.branch(outcome)?;
    let probability = branch.norm_sqr();
    if probability <= EMPTY_BRANCH {
        return Err(ExperimentError::EmptyBranch(outcome));
    }
    let density = branch
        .amplitudes()
        .iter()
        .map(|a| a.norm_sqr() / probability)
        .collect();
    Ok((
        probability,
        ScreenPattern::new(*state.grid(), density, PatternKind::Conditional(outcome)),
    ))
}
