//! Monte Carlo detection events.
//!
//! Each event first draws a detector outcome with the branch probabilities,
//! then a screen position from that branch's conditional density. Positions
//! come from an inverse CDF that is linear within each grid cell
//! `[x_j - dx/2, x_j + dx/2)`, i.e. the density is piecewise constant.
//!
//! Random numbers come from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded
//! with `seed_from_u64`; every event consumes exactly two uniform `f64`
//! draws (outcome, then position), each built from the top 53 bits of a
//! `u64`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{BranchState, ExperimentError, Result, ScreenPattern, EMPTY_BRANCH};
use crate::hilbert::Outcome;
use crate::wavepacket::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventSample {
    pub outcome: Outcome,
    pub x: f64,
}

pub fn sample_events(state: &BranchState, count: usize, seed: u64) -> Result<Vec<EventSample>> {
    if count == 0 {
        return Err(ExperimentError::NoEvents);
    }
    let probabilities = state.probabilities();
    let total: f64 = probabilities.iter().sum();
    let outcomes = state.basis().outcomes();
    let samplers: Vec<Option<CellSampler>> = state
        .branches()
        .iter()
        .zip(probabilities)
        .map(|(b, p)| (p > EMPTY_BRANCH).then(|| CellSampler::new(b.grid(), &b.density())))
        .collect();
    let live: Vec<usize> = (0..3).filter(|&i| samplers[i].is_some()).collect();

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut events = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut branch = *live.last().expect("state has a non-empty branch");
        for &i in &live {
            acc += probabilities[i];
            if u < acc {
                branch = i;
                break;
            }
        }
        let v: f64 = rng.gen();
        let x = samplers[branch].as_ref().expect("live branch").sample(v);
        events.push(EventSample {
            outcome: outcomes[branch],
            x,
        });
    }
    Ok(events)
}

struct CellSampler {
    grid: GridSpec,
    cdf: Vec<f64>,
}

impl CellSampler {
    fn new(grid: &GridSpec, density: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = density
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { grid: *grid, cdf }
    }

    fn sample(&self, v: f64) -> f64 {
        let total = *self.cdf.last().unwrap();
        let target = v * total;
        let j = self
            .cdf
            .partition_point(|&c| c <= target)
            .min(self.cdf.len() - 1);
        let below = if j == 0 { 0.0 } else { self.cdf[j - 1] };
        let width = self.cdf[j] - below;
        let frac = if width > 0.0 {
            ((target - below) / width).clamp(0.0, 1.0)
        } else {
            0.5
        };
        let dx = self.grid.dx();
        self.grid.x(j) - 0.5 * dx + frac * dx
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of sampled positions against a density.
///
/// The central `1 - 2 * 1e-3` of the probability mass is split into `bins`
/// runs of whole grid cells, plus one bin for each tail, so bin edges agree
/// with the sampler's cells.
pub fn chi_square_vs_density(xs: &[f64], pattern: &ScreenPattern, bins: usize) -> ChiSquare {
    let grid = pattern.grid();
    let rho = pattern.density();
    let mass: f64 = rho.iter().sum();
    let mut acc = 0.0;
    let cum: Vec<f64> = rho
        .iter()
        .map(|w| {
            acc += w / mass;
            acc
        })
        .collect();
    let first = cum.partition_point(|&c| c < 1e-3);
    let last = cum.partition_point(|&c| c < 1.0 - 1e-3).min(rho.len() - 1);
    let span = last - first + 1;
    let bins = bins.min(span).max(1);

    // cell-index edges of the interior bins
    let edges: Vec<usize> = (0..=bins).map(|b| first + b * span / bins).collect();
    let mut expected = vec![0.0; bins + 2];
    let prob = |from: usize, to: usize| -> f64 { rho[from..to].iter().sum::<f64>() / mass };
    expected[0] = prob(0, edges[0]);
    for b in 0..bins {
        expected[b + 1] = prob(edges[b], edges[b + 1]);
    }
    expected[bins + 1] = prob(edges[bins], rho.len());

    let mut observed = vec![0usize; bins + 2];
    let dx = grid.dx();
    for &x in xs {
        let cell = ((x - grid.x_min() + 0.5 * dx) / dx)
            .floor()
            .clamp(0.0, (rho.len() - 1) as f64) as usize;
        let slot = if cell < edges[0] {
            0
        } else if cell >= edges[bins] {
            bins + 1
        } else {
            edges.partition_point(|&e| e <= cell)
        };
        observed[slot] += 1;
    }

    let n = xs.len() as f64;
    let mut statistic = 0.0;
    let mut used = 0usize;
    for (o, e) in observed.iter().zip(&expected) {
        let e = e * n;
        if e > 0.0 {
            statistic += (*o as f64 - e).powi(2) / e;
            used += 1;
        } else if *o > 0 {
            statistic = f64::INFINITY;
        }
    }
    let dof = used.saturating_sub(1).max(1);
    let p_value = ChiSquared::new(dof as f64)
        .map(|d| 1.0 - d.cdf(statistic))
        .unwrap_or(f64::NAN);
    ChiSquare {
        statistic,
        dof,
        p_value,
    }
}
