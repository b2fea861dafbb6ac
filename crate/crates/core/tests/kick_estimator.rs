//! The envelope-normalised estimator against the plain correlation peak at
//! the full default grid, where the plain peak is biased by more than a bin.

use std::f64::consts::PI;

use kickscope_core::experiment::{assemble, change_basis, momentum_shift};
use kickscope_core::hilbert::{build_uqsd, BasisChoice, DetectorConfig, Outcome};
use kickscope_core::wavepacket::{slit_state, GridSpec, Slit, SlitGeometry};

#[test]
fn envelope_normalisation_removes_the_peak_bias() {
    let geom = SlitGeometry::new(1.0, 0.01).unwrap();
    let grid = GridSpec::centered(1 << 21, 0.0025, 0.5).unwrap();
    let dp = grid.dp(1.0);
    let state = change_basis(
        &assemble(
            &geom,
            &grid,
            &build_uqsd(&DetectorConfig::with_overlap(0.5).unwrap()),
        )
        .unwrap(),
        BasisChoice::Symmetric,
    );
    let spec = |o| state.branch(o).unwrap().to_momentum(1.0).density();
    let (minus, plus) = (spec(Outcome::QMinus), spec(Outcome::QPlus));
    let e1 = slit_state(&geom, &grid, Slit::One)
        .unwrap()
        .to_momentum(1.0)
        .density();
    let e2 = slit_state(&geom, &grid, Slit::Two)
        .unwrap()
        .to_momentum(1.0)
        .density();
    let envelope: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| 0.5 * (a + b)).collect();

    let lags = (0.0, 2.0 * PI);
    let raw = momentum_shift(&minus, &plus, None, dp, lags);
    let normalised = momentum_shift(&minus, &plus, Some(&envelope), dp, lags);
    assert!((raw - PI).abs() > dp, "raw {raw}");
    assert!((normalised - PI).abs() <= dp, "normalised {normalised}");
}
