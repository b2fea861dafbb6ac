//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! geometry.d = 1
//! detector.c = 0.5
//! detector.theta = pi/4
//! basis = tilted:pi/2
//! ```
//!
//! Angles accept a plain number or `[-]pi[/k]`. Unset keys take the desk
//! defaults; when the grid extent is not given the grid is centred between
//! the slits with `dx = sigma / 4`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use kickscope_core::hilbert::{BasisChoice, DetectorConfig};
use kickscope_core::wavepacket::{GridSpec, PhysicalUnits, SlitGeometry};

use crate::CliError;

pub const DEFAULT_GRID_N: usize = 1 << 21;
pub const DEFAULT_COUNT: usize = 100_000;

const KEYS: [&str; 16] = [
    "geometry.d",
    "geometry.sigma",
    "units.hbar",
    "units.mass",
    "units.t",
    "grid.n",
    "grid.x_min",
    "grid.x_max",
    "detector.c",
    "detector.theta",
    "basis",
    "sampling.count",
    "sampling.seed",
    "output.dir",
    "output.stride",
    "output.momentum_stride",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: SlitGeometry,
    pub units: PhysicalUnits,
    pub grid: GridSpec,
    pub detector: DetectorConfig,
    pub basis: BasisChoice,
    pub count: usize,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    /// Write every `stride`-th grid row of `pattern.csv`.
    pub stride: usize,
    /// Write every `momentum_stride`-th row of `momentum.csv`.
    pub momentum_stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::parse("").expect("defaults are valid")
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut raw: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                invalid(format!(
                    "line {lineno}: expected `key = value`, got `{line}`"
                ))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(invalid(format!("line {lineno}: unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(invalid(format!("line {lineno}: key `{key}` has no value")));
            }
            if raw.insert(key, (lineno, value)).is_some() {
                return Err(invalid(format!("line {lineno}: key `{key}` given twice")));
            }
        }

        let num = |key: &str, default: f64| -> Result<f64, CliError> {
            match raw.get(key) {
                None => Ok(default),
                Some((lineno, v)) => {
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| {
                            invalid(format!(
                                "line {lineno}: `{key}` must be a finite number, got `{v}`"
                            ))
                        })
                }
            }
        };
        let int = |key: &str, default: u64| -> Result<u64, CliError> {
            match raw.get(key) {
                None => Ok(default),
                Some((lineno, v)) => v.parse::<u64>().map_err(|_| {
                    invalid(format!(
                        "line {lineno}: `{key}` must be a non-negative integer, got `{v}`"
                    ))
                }),
            }
        };

        let geometry = SlitGeometry::new(num("geometry.d", 1.0)?, num("geometry.sigma", 0.01)?)?;
        let units = PhysicalUnits::new(
            num("units.hbar", 1.0)?,
            num("units.mass", 1.0)?,
            num("units.t", 5.0)?,
        )?;

        let n = int("grid.n", DEFAULT_GRID_N as u64)? as usize;
        let grid = match (raw.get("grid.x_min"), raw.get("grid.x_max")) {
            (None, None) => GridSpec::centered(n, geometry.sigma() / 4.0, 0.5 * geometry.d())?,
            (Some(_), Some(_)) => {
                GridSpec::new(n, num("grid.x_min", 0.0)?, num("grid.x_max", 0.0)?)?
            }
            _ => return Err(invalid("grid.x_min and grid.x_max must be given together")),
        };
        grid.validate(&geometry, &units)?;

        let theta = match raw.get("detector.theta") {
            None => 0.0,
            Some((lineno, v)) => parse_angle(v).ok_or_else(|| {
                invalid(format!(
                    "line {lineno}: `detector.theta` is not an angle: `{v}`"
                ))
            })?,
        };
        let detector = DetectorConfig::new(num("detector.c", 0.5)?, theta)?;

        let basis = match raw.get("basis") {
            None => BasisChoice::Symmetric,
            Some((lineno, v)) => parse_basis(v).ok_or_else(|| {
                invalid(format!(
                    "line {lineno}: basis must be computational, symmetric or tilted:<angle>, got `{v}`"
                ))
            })?,
        };

        let count = int("sampling.count", DEFAULT_COUNT as u64)? as usize;
        if count == 0 {
            return Err(invalid("sampling.count must be at least 1"));
        }
        let stride = int("output.stride", 1)? as usize;
        let momentum_stride = int("output.momentum_stride", 1)? as usize;
        if stride == 0 || momentum_stride == 0 {
            return Err(invalid("output strides must be at least 1"));
        }

        Ok(RunConfig {
            geometry,
            units,
            grid,
            detector,
            basis,
            count,
            seed: int("sampling.seed", 0)?,
            out_dir: raw.get("output.dir").map(|(_, v)| PathBuf::from(v)),
            stride,
            momentum_stride,
        })
    }
}

/// A number, or `[-]pi[/k]`, `[-]k*pi`.
pub fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return x.is_finite().then_some(x);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, s),
    };
    let value = if body == "pi" {
        PI
    } else if let Some(k) = body.strip_prefix("pi/") {
        PI / k.trim().parse::<f64>().ok()?
    } else {
        body.strip_suffix("*pi")?.trim().parse::<f64>().ok()? * PI
    };
    (value.is_finite()).then_some(sign * value)
}

pub fn parse_basis(s: &str) -> Option<BasisChoice> {
    match s.trim() {
        "computational" => Some(BasisChoice::Computational),
        "symmetric" => Some(BasisChoice::Symmetric),
        other => other
            .strip_prefix("tilted:")
            .and_then(parse_angle)
            .map(BasisChoice::Tilted),
    }
}
