//! Detector Hilbert-space algebra.
//!
//! The two which-way detector states `d1`, `d2` are embedded in a
//! three-dimensional space spanned by the orthonormal vectors `q1, q2, q3`
//! so that they can be discriminated unambiguously:
//!
//! ```text
//! d1 = alpha q1 + beta  q3
//! d2 = gamma q2 + delta q3
//! ```
//!
//! A `q1` outcome rules out `d2`, a `q2` outcome rules out `d1`, and a `q3`
//! outcome is the inconclusive (failed) result.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// 3x3 complex matrix, row-major.
pub type Matrix3 = [[Complex64; 3]; 3];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("detector overlap magnitude c = {0} must lie in [0, 1]")]
    OverlapOutOfRange(f64),
    #[error("detector overlap phase theta = {0} must lie in (-pi, pi]")]
    PhaseOutOfRange(f64),
}

/// Overlap `<d1|d2> = c e^{i theta}` of the two detector states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    overlap: f64,
    phase: f64,
}

impl DetectorConfig {
    pub fn new(overlap: f64, phase: f64) -> Result<Self, DomainError> {
        if !(0.0..=1.0).contains(&overlap) {
            return Err(DomainError::OverlapOutOfRange(overlap));
        }
        if !(phase > -PI && phase <= PI) {
            return Err(DomainError::PhaseOutOfRange(phase));
        }
        Ok(Self { overlap, phase })
    }

    /// Real overlap, `theta = 0`.
    pub fn with_overlap(overlap: f64) -> Result<Self, DomainError> {
        Self::new(overlap, 0.0)
    }

    pub fn overlap(&self) -> f64 {
        self.overlap
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// `<d1|d2>` as a complex number.
    pub fn inner_product(&self) -> Complex64 {
        Complex64::from_polar(self.overlap, self.phase)
    }
}

/// Optimal UQSD embedding coefficients.
///
/// `beta` is real and non-negative; the whole overlap phase sits on `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UqsdCoefficients {
    pub alpha: f64,
    pub gamma: f64,
    pub beta: Complex64,
    pub delta: Complex64,
}

impl UqsdCoefficients {
    /// Failure probability of the measurement for equal priors,
    /// `(|beta|^2 + |delta|^2) / 2`.
    pub fn failure_probability(&self) -> f64 {
        0.5 * (self.beta.norm_sqr() + self.delta.norm_sqr())
    }

    /// `<d1|d2>` reconstructed from the coefficients.
    pub fn overlap(&self) -> Complex64 {
        self.beta.conj() * self.delta
    }
}

/// Coefficients minimising the inconclusive-outcome probability:
/// `|beta|^2 = c`, `alpha = gamma = sqrt(1 - c)`, `delta = e^{i theta} beta`.
pub fn build_uqsd(config: &DetectorConfig) -> UqsdCoefficients {
    let c = config.overlap();
    let alpha = (1.0 - c).sqrt();
    let beta = Complex64::new(c.sqrt(), 0.0);
    let delta = beta * Complex64::from_polar(1.0, config.phase());
    UqsdCoefficients {
        alpha,
        gamma: alpha,
        beta,
        delta,
    }
}

/// Amplitudes of a detector state over `(q1, q2, q3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorVector(pub [Complex64; 3]);

impl DetectorVector {
    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &DetectorVector) -> Complex64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }
}

pub fn detector_states(coeffs: &UqsdCoefficients) -> (DetectorVector, DetectorVector) {
    let zero = Complex64::new(0.0, 0.0);
    let d1 = DetectorVector([Complex64::new(coeffs.alpha, 0.0), zero, coeffs.beta]);
    let d2 = DetectorVector([zero, Complex64::new(coeffs.gamma, 0.0), coeffs.delta]);
    (d1, d2)
}

/// Orthonormal detector basis in which branches are labelled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisChoice {
    /// `q1, q2, q3`
    Computational,
    /// `q+- = (q1 +- q2)/sqrt(2)`, `q3`
    Symmetric,
    /// `q+- = (q1 +- e^{i theta'} q2)/sqrt(2)`, `q3`
    Tilted(f64),
}

impl BasisChoice {
    /// Basis vectors in computational coordinates, one per column.
    fn vectors(&self) -> Matrix3 {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match *self {
            BasisChoice::Computational => identity(),
            BasisChoice::Symmetric => [[h, h, zero], [h, -h, zero], [zero, zero, one]],
            BasisChoice::Tilted(theta) => {
                let t = Complex64::from_polar(FRAC_1_SQRT_2, theta);
                [[h, h, zero], [t, -t, zero], [zero, zero, one]]
            }
        }
    }

    pub fn outcomes(&self) -> [Outcome; 3] {
        match self {
            BasisChoice::Computational => [Outcome::Path1, Outcome::Path2, Outcome::Fail],
            _ => [Outcome::QPlus, Outcome::QMinus, Outcome::Q3],
        }
    }
}

impl fmt::Display for BasisChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisChoice::Computational => write!(f, "computational"),
            BasisChoice::Symmetric => write!(f, "symmetric"),
            BasisChoice::Tilted(theta) => write!(f, "tilted:{theta}"),
        }
    }
}

/// Labelled measurement outcome of the detector observable.
///
/// The computational basis yields the UQSD outcomes; the symmetric and
/// tilted bases yield the `q+`, `q-`, `q3` projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Path1,
    Path2,
    Fail,
    QPlus,
    QMinus,
    Q3,
}

impl Outcome {
    /// Branch index of this outcome in `basis`, if it belongs to it.
    pub fn index_in(&self, basis: &BasisChoice) -> Option<usize> {
        basis.outcomes().iter().position(|o| o == self)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Path1 => "path1",
            Outcome::Path2 => "path2",
            Outcome::Fail => "fail",
            Outcome::QPlus => "q+",
            Outcome::QMinus => "q-",
            Outcome::Q3 => "q3",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn identity() -> Matrix3 {
    let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn adjoint(m: &Matrix3) -> Matrix3 {
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i].conj();
        }
    }
    out
}

pub fn matmul(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &Matrix3, b: &Matrix3) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Coordinate transform taking branch amplitudes labelled in `from` to
/// amplitudes labelled in `to`: `U = V_to^dagger V_from`.
pub fn basis_matrix(from: &BasisChoice, to: &BasisChoice) -> Matrix3 {
    matmul(&adjoint(&to.vectors()), &from.vectors())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    fn all_bases() -> Vec<BasisChoice> {
        vec![
            BasisChoice::Computational,
            BasisChoice::Symmetric,
            BasisChoice::Tilted(0.0),
            BasisChoice::Tilted(PI / 4.0),
            BasisChoice::Tilted(PI / 2.0),
            BasisChoice::Tilted(-2.0),
        ]
    }

    #[test]
    fn uqsd_orthogonal_detectors() {
        let k = build_uqsd(&DetectorConfig::with_overlap(0.0).unwrap());
        assert_eq!(k.alpha, 1.0);
        assert_eq!(k.beta, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn uqsd_identical_detectors() {
        let k = build_uqsd(&DetectorConfig::with_overlap(1.0).unwrap());
        assert_eq!(k.alpha, 0.0);
        assert!((k.beta.norm() - 1.0).abs() < TOL);
    }

    #[test]
    fn uqsd_overlap_036_phase_pi_over_3() {
        let cfg = DetectorConfig::new(0.36, PI / 3.0).unwrap();
        let k = build_uqsd(&cfg);
        assert!((k.alpha - 0.8).abs() < TOL);
        assert!((k.gamma - 0.8).abs() < TOL);
        assert!((k.beta - Complex64::new(0.6, 0.0)).norm() < TOL);
        assert!((k.delta - Complex64::from_polar(0.6, PI / 3.0)).norm() < TOL);
        assert!((k.alpha * k.alpha + k.beta.norm_sqr() - 1.0).abs() < TOL);
        // independent dot product of explicit 3-vectors
        let d1 = [0.8, 0.0, 0.6].map(|v| Complex64::new(v, 0.0));
        let d2 = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.8, 0.0),
            Complex64::new(0.6 * 0.5, 0.6 * (3f64).sqrt() / 2.0),
        ];
        let dot: Complex64 = d1.iter().zip(&d2).map(|(a, b)| a.conj() * b).sum();
        assert!((dot - Complex64::from_polar(0.36, PI / 3.0)).norm() < TOL);
    }

    #[test]
    fn detector_states_edge_cases() {
        let (d1, d2) = detector_states(&build_uqsd(&DetectorConfig::with_overlap(0.0).unwrap()));
        assert_eq!(d1.0[0], Complex64::new(1.0, 0.0));
        assert_eq!(d2.0[1], Complex64::new(1.0, 0.0));
        assert_eq!(d1.inner(&d2), Complex64::new(0.0, 0.0));

        let theta = 1.1;
        let (d1, d2) = detector_states(&build_uqsd(&DetectorConfig::new(1.0, theta).unwrap()));
        assert!((d1.0[2] - 1.0).norm() < TOL);
        assert!((d2.0[2] - Complex64::from_polar(1.0, theta)).norm() < TOL);
        assert!((d1.inner(&d2).norm() - 1.0).abs() < TOL);

        let (d1, d2) = detector_states(&build_uqsd(&DetectorConfig::with_overlap(0.36).unwrap()));
        assert!((d1.inner(&d2) - Complex64::new(0.36, 0.0)).norm() < TOL);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            DetectorConfig::new(1.5, 0.0),
            Err(DomainError::OverlapOutOfRange(_))
        ));
        assert!(DetectorConfig::new(-0.1, 0.0).is_err());
        assert!(DetectorConfig::new(f64::NAN, 0.0).is_err());
        assert!(matches!(
            DetectorConfig::new(0.5, -PI),
            Err(DomainError::PhaseOutOfRange(_))
        ));
        assert!(DetectorConfig::new(0.5, PI).is_ok());
        assert!(DetectorConfig::new(0.5, 4.0).is_err());
    }

    #[test]
    fn computational_to_symmetric_rows() {
        let m = basis_matrix(&BasisChoice::Computational, &BasisChoice::Symmetric);
        let h = FRAC_1_SQRT_2;
        let expected = [[h, h, 0.0], [h, -h, 0.0], [0.0, 0.0, 1.0]]
            .map(|row| row.map(|v| Complex64::new(v, 0.0)));
        assert!(max_abs_diff(&m, &expected) < TOL);
        let id = basis_matrix(&BasisChoice::Computational, &BasisChoice::Computational);
        assert!(max_abs_diff(&id, &identity()) < TOL);
    }

    #[test]
    fn tilted_zero_is_symmetric() {
        let a = basis_matrix(&BasisChoice::Computational, &BasisChoice::Tilted(0.0));
        let b = basis_matrix(&BasisChoice::Computational, &BasisChoice::Symmetric);
        assert_eq!(a, b);
    }

    #[test]
    fn tilted_matrix_is_unitary_and_fixes_q3() {
        let u = basis_matrix(&BasisChoice::Computational, &BasisChoice::Tilted(PI / 2.0));
        let uu = matmul(&u, &adjoint(&u));
        assert!(max_abs_diff(&uu, &identity()) < TOL);
        // q+ row picks up e^{-i theta'} on the q2 amplitude
        assert!((u[0][1] - Complex64::new(0.0, -FRAC_1_SQRT_2)).norm() < TOL);
        for (i, row) in u.iter().enumerate().take(2) {
            assert_eq!(row[2], Complex64::new(0.0, 0.0));
            assert_eq!(u[2][i], Complex64::new(0.0, 0.0));
        }
        assert_eq!(u[2][2], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn round_trips_are_identity() {
        for a in all_bases() {
            for b in all_bases() {
                let m = matmul(&basis_matrix(&a, &b), &basis_matrix(&b, &a));
                assert!(max_abs_diff(&m, &identity()) < TOL, "{a} <-> {b}");
                let u = basis_matrix(&a, &b);
                assert!(max_abs_diff(&matmul(&u, &adjoint(&u)), &identity()) < TOL);
            }
        }
    }

    #[test]
    fn outcome_indices() {
        assert_eq!(Outcome::Fail.index_in(&BasisChoice::Computational), Some(2));
        assert_eq!(Outcome::QMinus.index_in(&BasisChoice::Tilted(0.3)), Some(1));
        assert_eq!(Outcome::QMinus.index_in(&BasisChoice::Computational), None);
    }

    proptest! {
        #[test]
        fn coefficients_normalized(c in 0.0f64..=1.0, theta in (-PI + 1e-12)..=PI) {
            let k = build_uqsd(&DetectorConfig::new(c, theta).unwrap());
            prop_assert!((k.alpha * k.alpha + k.beta.norm_sqr() - 1.0).abs() <= TOL);
            prop_assert!((k.gamma * k.gamma + k.delta.norm_sqr() - 1.0).abs() <= TOL);
            prop_assert!((k.beta.norm_sqr() - c).abs() <= TOL);
            prop_assert!((k.failure_probability() - c).abs() <= TOL);
        }

        #[test]
        fn detector_overlap_reproduced(c in 0.0f64..=1.0, theta in (-PI + 1e-12)..=PI) {
            let cfg = DetectorConfig::new(c, theta).unwrap();
            let (d1, d2) = detector_states(&build_uqsd(&cfg));
            prop_assert!((d1.inner(&d2) - cfg.inner_product()).norm() <= TOL);
            prop_assert!((d1.norm_sqr() - 1.0).abs() <= TOL);
            prop_assert!((d2.norm_sqr() - 1.0).abs() <= TOL);
            // q2 never fires for d1, q1 never fires for d2
            prop_assert_eq!(d1.0[1].norm(), 0.0);
            prop_assert_eq!(d2.0[0].norm(), 0.0);
        }

        #[test]
        fn tilted_round_trip(t1 in -6.0f64..6.0, t2 in -6.0f64..6.0) {
            let a = BasisChoice::Tilted(t1);
            let b = BasisChoice::Tilted(t2);
            let m = matmul(&basis_matrix(&a, &b), &basis_matrix(&b, &a));
            prop_assert!(max_abs_diff(&m, &identity()) <= TOL);
        }
    }
}
