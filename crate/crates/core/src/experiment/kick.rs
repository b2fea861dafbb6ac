//! Apparent momentum kicks.
//!
//! Near the slits the `q-` branch `(psi1 - psi2)/sqrt2` equals the `q+`
//! branch multiplied by `exp(i p0 x / hbar)`, `p0 = pi hbar / d = h / 2d`.
//! In momentum space every two-path state `psi1 + e^{i phi} psi2` has the
//! density `E(p) (1 + cos(p d / hbar - phi))`, where `E` is the incoherent
//! single-slit envelope, so a phase between the paths shows up as a rigid
//! shift of the fringes by `phi hbar / d`.
//!
//! Shifts are estimated by cross-correlating two momentum densities and
//! dividing by the autocorrelation of `E`. The raw correlation peak is
//! pulled towards zero lag by the envelope (about 1.6 bins at the default
//! grid); the normalised one peaks at the fringe shift itself. Because the
//! fringes are periodic in `2 pi hbar / d`, a shift is only defined modulo
//! that period and is searched for in a one-period lag window.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{change_basis, reference_state, BranchState, ExperimentError, Result, EMPTY_BRANCH};
use crate::hilbert::{BasisChoice, DetectorConfig, Outcome};
use crate::wavepacket::{slit_state, GridSpec, PhysicalUnits, Slit, SlitGeometry, Wavefunction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickReport {
    /// `pi hbar / d`
    pub p0: f64,
    /// Relative `q-` / `q+` fringe shift; `None` when the `q-` branch is empty.
    pub p0_measured: Option<f64>,
    /// `(1 - c) / 2`
    pub f_k_theory: f64,
    /// Norm of the `q-` branch.
    pub f_k_branch: f64,
    pub eq14_residual: f64,
    /// `theta hbar / d`
    pub p_e: f64,
    /// Momentum bin width of the grid.
    pub dp: f64,
}

/// Relative and per-branch shifts in a tilted basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedKicks {
    /// `q-` relative to `q+`, in `[0, 2 pi hbar / d)`.
    pub relative: f64,
    /// `q+` relative to the no-detector state, in `[-pi hbar / d, pi hbar / d)`.
    pub plus_vs_reference: f64,
    /// `q-` relative to the no-detector state, in `[-pi hbar / d, pi hbar / d)`.
    pub minus_vs_reference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickBound {
    /// `p0 d / hbar`, always `pi`.
    pub lhs: f64,
    /// `1 - V`
    pub rhs: f64,
    pub satisfied: bool,
}

/// L2 distance between `(psi1 - psi2)/sqrt2` and `exp(i p0 x / hbar) (psi1 + psi2)/sqrt2`
/// at the slits. `hbar` cancels from the phase `p0 x / hbar = pi x / d`.
pub fn eq14_residual(geom: &SlitGeometry, grid: &GridSpec) -> Result<f64> {
    let psi1 = slit_state(geom, grid, Slit::One)?;
    let psi2 = slit_state(geom, grid, Slit::Two)?;
    let k = PI / geom.d();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sum_sq: f64 = psi1
        .amplitudes()
        .iter()
        .zip(psi2.amplitudes())
        .zip(grid.positions())
        .map(|((a, b), x)| {
            let minus = (a - b) * s;
            let kicked = Complex64::from_polar(1.0, k * x) * (a + b) * s;
            (minus - kicked).norm_sqr()
        })
        .sum();
    Ok((sum_sq * grid.dx()).sqrt())
}

/// Kick magnitude, kick fraction and the slit-level kick residual.
///
/// Any basis is accepted; a computational-basis state is first rotated to
/// the symmetric basis.
pub fn kick_report(
    state: &BranchState,
    detector: &DetectorConfig,
    units: &PhysicalUnits,
    geom: &SlitGeometry,
) -> Result<KickReport> {
    let state = match state.basis() {
        BasisChoice::Computational => change_basis(state, BasisChoice::Symmetric),
        _ => state.clone(),
    };
    let hbar = units.hbar;
    let p0 = PI * hbar / geom.d();
    let f_k_branch = state.probability(Outcome::QMinus)?;
    let p0_measured =
        if f_k_branch <= EMPTY_BRANCH || state.probability(Outcome::QPlus)? <= EMPTY_BRANCH {
            None
        } else {
            let envelope = Envelope::new(geom, state.grid(), hbar)?;
            Some(envelope.relative_shift(
                state.branch(Outcome::QMinus)?,
                state.branch(Outcome::QPlus)?,
            ))
        };
    Ok(KickReport {
        p0,
        p0_measured,
        f_k_theory: 0.5 * (1.0 - detector.overlap()),
        f_k_branch,
        eq14_residual: eq14_residual(geom, state.grid())?,
        p_e: detector.phase() * hbar / geom.d(),
        dp: state.grid().dp(hbar),
    })
}

/// Shift of the `q3` branch's momentum fringes relative to the no-detector
/// state, in `[-pi hbar / d, pi hbar / d)`. Expected: `theta hbar / d`.
pub fn phase_kick_shift(state: &BranchState, geom: &SlitGeometry, hbar: f64) -> Result<f64> {
    let q3 = state
        .branch(Outcome::Q3)
        .or_else(|_| state.branch(Outcome::Fail))?;
    if q3.norm_sqr() <= EMPTY_BRANCH {
        return Err(ExperimentError::EmptyBranch(Outcome::Q3));
    }
    let reference = reference_state(geom, state.grid())?;
    let envelope = Envelope::new(geom, state.grid(), hbar)?;
    Ok(envelope.absolute_shift(q3, &reference))
}

/// Kicks in the tilted basis `q+- = (q1 +- e^{i theta'} q2)/sqrt2`.
///
/// The relative `q-`/`q+` shift is `pi hbar / d` for every `theta'`. Against
/// the no-detector state the branches are `psi1 +- e^{-i theta'} psi2`, so
/// the individual shifts are `-theta' hbar / d` and `-theta' hbar / d + pi hbar / d`
/// (modulo the fringe period).
pub fn tilted_relative_kick(
    state: &BranchState,
    theta_prime: f64,
    geom: &SlitGeometry,
    hbar: f64,
) -> Result<TiltedKicks> {
    let tilted = change_basis(state, BasisChoice::Tilted(theta_prime));
    let plus = tilted.branch(Outcome::QPlus)?;
    let minus = tilted.branch(Outcome::QMinus)?;
    for (o, b) in [(Outcome::QPlus, plus), (Outcome::QMinus, minus)] {
        if b.norm_sqr() <= EMPTY_BRANCH {
            return Err(ExperimentError::EmptyBranch(o));
        }
    }
    let reference = reference_state(geom, state.grid())?;
    let envelope = Envelope::new(geom, state.grid(), hbar)?;
    Ok(TiltedKicks {
        relative: envelope.relative_shift(minus, plus),
        plus_vs_reference: envelope.absolute_shift(plus, &reference),
        minus_vs_reference: envelope.absolute_shift(minus, &reference),
    })
}

/// Compares the kick magnitude with the bound `p_m d / hbar >= 1 - V`.
pub fn storey_bound_report(visibility: f64) -> Result<KickBound> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(ExperimentError::VisibilityOutOfRange(visibility));
    }
    let lhs = PI;
    let rhs = 1.0 - visibility;
    Ok(KickBound {
        lhs,
        rhs,
        satisfied: lhs >= rhs,
    })
}

/// Distance between `a` and `b` on a circle of circumference `period`.
pub fn periodic_distance(a: f64, b: f64, period: f64) -> f64 {
    let r = (a - b).rem_euclid(period);
    r.min(period - r)
}

/// Incoherent single-slit momentum envelope of a geometry on a grid.
struct Envelope {
    density: Vec<f64>,
    hbar: f64,
    dp: f64,
    period: f64,
}

impl Envelope {
    fn new(geom: &SlitGeometry, grid: &GridSpec, hbar: f64) -> Result<Self> {
        let a = slit_state(geom, grid, Slit::One)?
            .to_momentum(hbar)
            .density();
        let b = slit_state(geom, grid, Slit::Two)?
            .to_momentum(hbar)
            .density();
        Ok(Self {
            density: a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect(),
            hbar,
            dp: grid.dp(hbar),
            period: 2.0 * PI * hbar / geom.d(),
        })
    }

    fn shift(&self, target: &Wavefunction, reference: &Wavefunction, lags: (f64, f64)) -> f64 {
        momentum_shift(
            &target.to_momentum(self.hbar).density(),
            &reference.to_momentum(self.hbar).density(),
            Some(&self.density),
            self.dp,
            lags,
        )
    }

    /// Lag in `[0, period)`.
    fn relative_shift(&self, target: &Wavefunction, reference: &Wavefunction) -> f64 {
        self.shift(target, reference, (0.0, self.period))
    }

    /// Lag in `[-period/2, period/2)`.
    fn absolute_shift(&self, target: &Wavefunction, reference: &Wavefunction) -> f64 {
        self.shift(target, reference, (-0.5 * self.period, 0.5 * self.period))
    }
}

/// Momentum shift `s` for which `target(p) ~ reference(p - s)`, searched
/// over lags in `[lags.0, lags.1)` on the bin grid of width `dp`.
///
/// With an `envelope`, the circular cross-correlation at each lag is divided
/// by the envelope's autocorrelation at that lag.
pub fn momentum_shift(
    target: &[f64],
    reference: &[f64],
    envelope: Option<&[f64]>,
    dp: f64,
    lags: (f64, f64),
) -> f64 {
    let n = target.len();
    assert_eq!(n, reference.len());
    let corr = circular_correlation(target, reference);
    let norm = envelope.map(|e| circular_correlation(e, e));

    let k_lo = (lags.0 / dp).ceil() as i64;
    let mut k_hi = (lags.1 / dp).floor() as i64;
    if k_hi as f64 * dp >= lags.1 {
        k_hi -= 1;
    }
    let mut best = (k_lo, f64::NEG_INFINITY);
    for k in k_lo..=k_hi {
        let idx = k.rem_euclid(n as i64) as usize;
        let score = match &norm {
            Some(e) if e[idx] > 0.0 => corr[idx] / e[idx],
            Some(_) => continue,
            None => corr[idx],
        };
        if score > best.1 {
            best = (k, score);
        }
    }
    best.0 as f64 * dp
}

/// `c[k] = sum_j a[j] b[j - k]`, indices modulo `n`.
fn circular_correlation(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut fa: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut fb: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y.conj();
    }
    inverse.process(&mut fa);
    fa.iter().map(|v| v.re / n as f64).collect()
}
