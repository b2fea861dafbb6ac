//! Fringe contrast from adjacent extrema.
//!
//! A global `I_max`/`I_min` over the screen is dominated by the Gaussian
//! envelope, so visibility is taken from the central maximum and its two
//! neighbouring minima only.

use super::{ExperimentError, Result, ScreenPattern};
use crate::wavepacket::{PhysicalUnits, SlitGeometry};

/// Minimum samples per fringe period for the window to be usable.
const MIN_SAMPLES_PER_PERIOD: f64 = 8.0;

/// Analysis window: `center +- period`.
///
/// `center` is where the undisturbed (`c = 1`, `theta = 0`) pattern has its
/// central maximum; shifts are reported relative to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeWindow {
    pub center: f64,
    pub period: f64,
}

impl FringeWindow {
    /// Centred between the slits with the far-field period `2 pi hbar t / (m d)`.
    pub fn centered(geom: &SlitGeometry, units: &PhysicalUnits) -> Self {
        Self {
            center: 0.5 * geom.d(),
            period: geom.fringe_period(units),
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.center - self.period, self.center + self.period)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeAnalysis {
    pub visibility: f64,
    pub fringe_period: f64,
    /// Position of the central maximum minus the window centre.
    pub central_fringe_shift: f64,
    pub analysis_window: (f64, f64),
}

pub fn fringe_analysis(pattern: &ScreenPattern, window: &FringeWindow) -> Result<FringeAnalysis> {
    let grid = pattern.grid();
    let (lo, hi) = window.bounds();
    let malformed = |reason| ExperimentError::MalformedWindow { lo, hi, reason };
    if !(window.period > 0.0 && window.period.is_finite() && window.center.is_finite()) {
        return Err(malformed("period must be positive and finite"));
    }
    if lo < grid.x_min() || hi > grid.x_max() - grid.dx() {
        return Err(malformed("window extends past the grid"));
    }
    if window.period / grid.dx() < MIN_SAMPLES_PER_PERIOD {
        return Err(malformed("grid too coarse to resolve one fringe"));
    }

    let rho = pattern.density();
    let idx = |x: f64| grid.index_of(x);
    let (j_lo, j_hi) = (idx(lo), idx(hi));
    let half = 0.5 * window.period;

    let j_max = argext(
        rho,
        idx(window.center - half),
        idx(window.center + half),
        |a, b| a > b,
    );
    let x_max = refine(pattern, j_max);

    let reach = 0.75 * window.period;
    let left_start = idx(grid.x(j_max) - reach).max(j_lo);
    let right_end = idx(grid.x(j_max) + reach).min(j_hi);
    let j_left = argext(rho, left_start, j_max, |a, b| a < b);
    let j_right = argext(rho, j_max, right_end, |a, b| a < b);

    let i_max = rho[j_max];
    let i_min = 0.5 * (rho[j_left] + rho[j_right]);
    let visibility = if i_max + i_min > 0.0 {
        ((i_max - i_min) / (i_max + i_min)).clamp(0.0, 1.0)
    } else {
        0.0
    };

    // both minima strictly inside their search ranges: measured period
    let interior = j_left > left_start && j_right < right_end;
    let fringe_period = if interior {
        refine(pattern, j_right) - refine(pattern, j_left)
    } else {
        window.period
    };

    Ok(FringeAnalysis {
        visibility,
        fringe_period,
        central_fringe_shift: x_max - window.center,
        analysis_window: (lo, hi),
    })
}

/// Index in `[from, to]` whose value wins under `better`; first wins ties.
fn argext(values: &[f64], from: usize, to: usize, better: impl Fn(f64, f64) -> bool) -> usize {
    (from..=to).fold(from, |best, j| {
        if better(values[j], values[best]) {
            j
        } else {
            best
        }
    })
}

/// Sub-sample extremum position from a parabola through three samples.
fn refine(pattern: &ScreenPattern, j: usize) -> f64 {
    let grid = pattern.grid();
    let rho = pattern.density();
    if j == 0 || j + 1 >= rho.len() {
        return grid.x(j);
    }
    let (a, b, c) = (rho[j - 1], rho[j], rho[j + 1]);
    let denom = a - 2.0 * b + c;
    if denom == 0.0 {
        return grid.x(j);
    }
    let offset = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    grid.x(j) + offset * grid.dx()
}
