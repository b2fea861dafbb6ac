//! Quanton wavefunctions on a uniform 1-D grid.
//!
//! Position samples sit at `x_j = x_min + j dx`, `j = 0..n`. The conjugate
//! momentum grid is centred, `p_k = (k - n/2) dp` with `dp = 2 pi hbar / (n dx)`.
//! Transforms use the continuum normalisation
//!
//! ```text
//! Phi(p_k) = dx / sqrt(2 pi hbar) * sum_j psi(x_j) exp(-i p_k x_j / hbar)
//! ```
//!
//! so a state centred at `x_c` carries the phase `exp(-i p x_c / hbar)` and
//! `sum |Phi|^2 dp == sum |psi|^2 dx`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

/// Largest `sigma / d` for which the slits count as narrow.
pub const NARROW_SLIT_RATIO: f64 = 0.05;

/// Grid points required per slit standard deviation.
const POINTS_PER_SIGMA: f64 = 4.0;

/// Probability mass ignored at each edge when locating a state's support.
const SUPPORT_TAIL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("grid size n = {0} must be a power of two and at least 16")]
    GridSize(usize),
    #[error("grid extent [{x_min}, {x_max}] is empty or not finite")]
    GridExtent { x_min: f64, x_max: f64 },
    #[error("grid spacing dx = {dx} exceeds sigma/4 = {limit}; slit state unresolved")]
    TooCoarse { dx: f64, limit: f64 },
    #[error("grid [{x_min}, {x_max}] does not contain the evolved envelope [{need_lo}, {need_hi}] (FFT wraparound)")]
    Wraparound {
        x_min: f64,
        x_max: f64,
        need_lo: f64,
        need_hi: f64,
    },
    #[error("slit geometry requires d > 0 and sigma > 0 (got d = {d}, sigma = {sigma})")]
    Geometry { d: f64, sigma: f64 },
    #[error("physical units require hbar > 0, mass > 0, t >= 0 (got hbar = {hbar}, mass = {mass}, t = {t})")]
    Units { hbar: f64, mass: f64, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitGeometry {
    d: f64,
    sigma: f64,
}

impl SlitGeometry {
    /// Slit 1 is centred at `x = 0`, slit 2 at `x = d`.
    pub fn new(d: f64, sigma: f64) -> Result<Self, ConfigError> {
        if !(d > 0.0 && sigma > 0.0 && d.is_finite() && sigma.is_finite()) {
            return Err(ConfigError::Geometry { d, sigma });
        }
        let geom = Self { d, sigma };
        if !geom.is_narrow() {
            log::warn!(
                "sigma/d = {} exceeds {NARROW_SLIT_RATIO}; slits are not sharply localised",
                sigma / d
            );
        }
        Ok(geom)
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn is_narrow(&self) -> bool {
        self.sigma / self.d <= NARROW_SLIT_RATIO
    }

    pub fn center(&self, slit: Slit) -> f64 {
        match slit {
            Slit::One => 0.0,
            Slit::Two => self.d,
        }
    }

    /// Evolved single-slit standard deviation `sigma sqrt(1 + (hbar t / 2 m sigma^2)^2)`.
    pub fn evolved_width(&self, units: &PhysicalUnits) -> f64 {
        let spread = units.hbar * units.t / (2.0 * units.mass * self.sigma);
        (self.sigma * self.sigma + spread * spread).sqrt()
    }

    /// Far-field fringe period `2 pi hbar t / (m d)`.
    pub fn fringe_period(&self, units: &PhysicalUnits) -> f64 {
        2.0 * PI * units.hbar * units.t / (units.mass * self.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slit {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalUnits {
    pub hbar: f64,
    pub mass: f64,
    /// Slit-to-screen flight time.
    pub t: f64,
}

impl PhysicalUnits {
    pub fn new(hbar: f64, mass: f64, t: f64) -> Result<Self, ConfigError> {
        if !(hbar > 0.0
            && mass > 0.0
            && t >= 0.0
            && hbar.is_finite()
            && mass.is_finite()
            && t.is_finite())
        {
            return Err(ConfigError::Units { hbar, mass, t });
        }
        Ok(Self { hbar, mass, t })
    }

    /// Same units at a different time.
    pub fn at_time(&self, t: f64) -> Self {
        Self { t, ..*self }
    }
}

impl Default for PhysicalUnits {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            t: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    x_min: f64,
    x_max: f64,
}

impl GridSpec {
    pub fn new(n: usize, x_min: f64, x_max: f64) -> Result<Self, ConfigError> {
        if n < 16 || !n.is_power_of_two() {
            return Err(ConfigError::GridSize(n));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(ConfigError::GridExtent { x_min, x_max });
        }
        Ok(Self { n, x_min, x_max })
    }

    /// `n` points of spacing `dx` centred on `center`.
    pub fn centered(n: usize, dx: f64, center: f64) -> Result<Self, ConfigError> {
        let half = 0.5 * n as f64 * dx;
        Self::new(n, center - half, center + half)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.x(j))
    }

    pub fn dp(&self, hbar: f64) -> f64 {
        2.0 * PI * hbar / (self.n as f64 * self.dx())
    }

    pub fn p(&self, k: usize, hbar: f64) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.dp(hbar)
    }

    /// Index of the grid point nearest `x`, clamped to the grid.
    pub fn index_of(&self, x: f64) -> usize {
        let j = ((x - self.x_min) / self.dx()).round();
        j.clamp(0.0, (self.n - 1) as f64) as usize
    }

    pub fn check_resolves(&self, geom: &SlitGeometry) -> Result<(), ConfigError> {
        let limit = geom.sigma() / POINTS_PER_SIGMA;
        // relative slack absorbs rounding in (x_max - x_min) / n
        if self.dx() > limit * (1.0 + 1e-9) {
            return Err(ConfigError::TooCoarse {
                dx: self.dx(),
                limit,
            });
        }
        Ok(())
    }

    /// The extent must hold `[-3W, d + 3W]`, `W` the evolved single-slit width.
    pub fn check_envelope(
        &self,
        geom: &SlitGeometry,
        units: &PhysicalUnits,
    ) -> Result<(), ConfigError> {
        let w = geom.evolved_width(units);
        self.check_contains(-3.0 * w, geom.d() + 3.0 * w)
    }

    pub fn validate(&self, geom: &SlitGeometry, units: &PhysicalUnits) -> Result<(), ConfigError> {
        self.check_resolves(geom)?;
        self.check_envelope(geom, units)
    }

    fn check_contains(&self, need_lo: f64, need_hi: f64) -> Result<(), ConfigError> {
        if need_lo < self.x_min || need_hi > self.x_max {
            return Err(ConfigError::Wraparound {
                x_min: self.x_min,
                x_max: self.x_max,
                need_lo,
                need_hi,
            });
        }
        Ok(())
    }
}

/// Complex amplitudes on a position grid, units `length^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: GridSpec,
    amplitudes: Vec<Complex64>,
}

impl Wavefunction {
    pub fn new(grid: GridSpec, amplitudes: Vec<Complex64>) -> Self {
        assert_eq!(
            grid.n(),
            amplitudes.len(),
            "amplitude count must match grid"
        );
        Self { grid, amplitudes }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::new(grid, vec![Complex64::new(0.0, 0.0); grid.n()])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `sum |psi|^2 dx`
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Wavefunction) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx()
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn max_abs_diff(&self, other: &Wavefunction) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `sum_i weights[i] * states[i]`; all states must share one grid.
    pub fn superpose(terms: &[(Complex64, &Wavefunction)]) -> Wavefunction {
        let grid = terms.first().expect("at least one term").1.grid;
        let mut out = vec![Complex64::new(0.0, 0.0); grid.n()];
        for (w, psi) in terms {
            debug_assert_eq!(psi.grid, grid);
            if *w == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, a) in out.iter_mut().zip(&psi.amplitudes) {
                *o += w * a;
            }
        }
        Wavefunction::new(grid, out)
    }

    pub fn scaled(&self, k: Complex64) -> Wavefunction {
        Wavefunction::new(self.grid, self.amplitudes.iter().map(|a| a * k).collect())
    }

    pub fn to_momentum(&self, hbar: f64) -> MomentumSpectrum {
        let n = self.grid.n();
        let mut buf: Vec<Complex64> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| if j % 2 == 0 { *a } else { -a })
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = self.grid.dx() / (2.0 * PI * hbar).sqrt();
        let x_min = self.grid.x_min();
        for (k, b) in buf.iter_mut().enumerate() {
            let p = self.grid.p(k, hbar);
            *b *= Complex64::from_polar(scale, -p * x_min / hbar);
        }
        MomentumSpectrum {
            grid: self.grid,
            hbar,
            amplitudes: buf,
        }
    }
}

/// Momentum-space amplitudes, units `momentum^{-1/2}`, on the centred grid
/// conjugate to a position grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumSpectrum {
    grid: GridSpec,
    hbar: f64,
    amplitudes: Vec<Complex64>,
}

impl MomentumSpectrum {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dp(&self) -> f64 {
        self.grid.dp(self.hbar)
    }

    pub fn p(&self, k: usize) -> f64 {
        self.grid.p(k, self.hbar)
    }

    pub fn momenta(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid.n()).map(move |k| self.p(k))
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `sum |Phi|^2 dp`
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dp()
    }

    /// Index of the largest `|Phi|^2`.
    pub fn argmax(&self) -> usize {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, v)| {
                if v > best.1 {
                    (k, v)
                } else {
                    best
                }
            })
            .0
    }

    /// Inverse of [`Wavefunction::to_momentum`].
    pub fn to_position(&self) -> Wavefunction {
        let n = self.grid.n();
        let x_min = self.grid.x_min();
        let mut buf: Vec<Complex64> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| a * Complex64::from_polar(1.0, self.p(k) * x_min / self.hbar))
            .collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        let scale = (2.0 * PI * self.hbar).sqrt() / (self.grid.dx() * n as f64);
        for (j, b) in buf.iter_mut().enumerate() {
            *b *= if j % 2 == 0 { scale } else { -scale };
        }
        Wavefunction::new(self.grid, buf)
    }
}

/// Normalised Gaussian `(2 pi sigma^2)^{-1/4} exp(-(x - x_c)^2 / (4 sigma^2))`
/// centred on the chosen slit.
pub fn slit_state(
    geom: &SlitGeometry,
    grid: &GridSpec,
    slit: Slit,
) -> Result<Wavefunction, ConfigError> {
    grid.check_resolves(geom)?;
    let units = PhysicalUnits {
        t: 0.0,
        ..PhysicalUnits::default()
    };
    Ok(propagate_analytic(geom, grid, &units, slit))
}

/// Closed-form free evolution of a slit Gaussian:
///
/// ```text
/// psi(x, t) = (2 pi sigma^2)^{-1/4} sqrt(sigma^2 / B) exp(-(x - x_c)^2 / (4 B)),
/// B = sigma^2 + i hbar t / (2 m)
/// ```
pub fn propagate_analytic(
    geom: &SlitGeometry,
    grid: &GridSpec,
    units: &PhysicalUnits,
    slit: Slit,
) -> Wavefunction {
    let s2 = geom.sigma() * geom.sigma();
    let b = Complex64::new(s2, units.hbar * units.t / (2.0 * units.mass));
    let prefactor = (2.0 * PI * s2).powf(-0.25) * (Complex64::new(s2, 0.0) / b).sqrt();
    let inv_4b = 1.0 / (4.0 * b);
    let xc = geom.center(slit);
    let amplitudes = grid
        .positions()
        .map(|x| {
            let u = x - xc;
            prefactor * (-(u * u) * inv_4b).exp()
        })
        .collect();
    Wavefunction::new(*grid, amplitudes)
}

/// Free evolution by exact multiplication with `exp(-i p^2 t / (2 m hbar))` in
/// momentum space.
///
/// Fails if the state would spread past the grid edges within `t`: the
/// position support, widened by three momentum standard deviations times
/// `t/m` (plus the mean drift), must stay inside the extent.
pub fn propagate_fft(
    psi: &Wavefunction,
    units: &PhysicalUnits,
) -> Result<Wavefunction, ConfigError> {
    if units.t == 0.0 {
        return Ok(psi.clone());
    }
    let total = psi.norm_sqr();
    if total == 0.0 {
        return Ok(psi.clone());
    }
    let spectrum = psi.to_momentum(units.hbar);
    check_wraparound(psi, &spectrum, units)?;

    let (hbar, m, t) = (units.hbar, units.mass, units.t);
    let kinetic: Vec<Complex64> = spectrum
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let p = spectrum.p(k);
            a * Complex64::from_polar(1.0, -p * p * t / (2.0 * m * hbar))
        })
        .collect();
    Ok(MomentumSpectrum {
        amplitudes: kinetic,
        ..spectrum
    }
    .to_position())
}

fn check_wraparound(
    psi: &Wavefunction,
    spectrum: &MomentumSpectrum,
    units: &PhysicalUnits,
) -> Result<(), ConfigError> {
    let grid = psi.grid();
    let density = spectrum.density();
    let mass: f64 = density.iter().sum();
    let mean_p = density
        .iter()
        .enumerate()
        .map(|(k, w)| w * spectrum.p(k))
        .sum::<f64>()
        / mass;
    let var_p = density
        .iter()
        .enumerate()
        .map(|(k, w)| w * (spectrum.p(k) - mean_p).powi(2))
        .sum::<f64>()
        / mass;
    let spread = 3.0 * var_p.sqrt() * units.t / units.mass;
    let drift = mean_p * units.t / units.mass;

    let (lo, hi) = support(&psi.density());
    let need_lo = grid.x(lo) + drift.min(0.0) - spread;
    let need_hi = grid.x(hi) + drift.max(0.0) + spread;
    grid.check_contains(need_lo, need_hi)
}

/// Indices bracketing all but `SUPPORT_TAIL` of the mass at each end.
fn support(density: &[f64]) -> (usize, usize) {
    let total: f64 = density.iter().sum();
    let cut = SUPPORT_TAIL * total;
    let mut acc = 0.0;
    let lo = density
        .iter()
        .position(|w| {
            acc += w;
            acc > cut
        })
        .unwrap_or(0);
    acc = 0.0;
    let hi = density.len()
        - 1
        - density
            .iter()
            .rev()
            .position(|w| {
                acc += w;
                acc > cut
            })
            .unwrap_or(0);
    (lo, hi)
}

/// Multiply by `exp(i p x / hbar)`; shifts the momentum spectrum by `+p`.
pub fn apply_kick(psi: &Wavefunction, p: f64, hbar: f64) -> Wavefunction {
    let grid = *psi.grid();
    let amplitudes = psi
        .amplitudes
        .iter()
        .zip(grid.positions())
        .map(|(a, x)| a * Complex64::from_polar(1.0, p * x / hbar))
        .collect();
    Wavefunction::new(grid, amplitudes)
}
