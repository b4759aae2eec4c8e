//! Null-type weak-measurement POVM on a qubit.
//!
//! Along `ẑ` the two Kraus operators are `M₊ = diag(1, √(1−η))` and
//! `M₋ = diag(0, √η)`, so `M₊†M₊ + M₋†M₋ = I`. A general measurement axis
//! `n = (θ, φ)` is reached by conjugation with the SU(2) rotation
//! [`rotation`], `M(n, r) = U(n)⁻¹ M(ẑ, r) U(n)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{Complex, Mat2};

/// Measurement axis on the Bloch sphere.
///
/// `phi` is never reduced modulo 2π: accumulated windings are meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub theta: f64,
    pub phi: f64,
}

impl Orientation {
    pub const fn new(theta: f64, phi: f64) -> Self {
        Orientation { theta, phi }
    }

    /// Equatorial axis at polar angle `phi`.
    pub const fn equator(phi: f64) -> Self {
        Orientation::new(std::f64::consts::FRAC_PI_2, phi)
    }

    /// Folds `theta` into `[0, π]`, compensating in `phi` by a half turn
    /// when the axis passes through a pole. `phi` is otherwise untouched.
    pub fn canonical(self) -> Self {
        use std::f64::consts::PI;
        let mut theta = self.theta.rem_euclid(2.0 * PI);
        let mut phi = self.phi;
        if theta > PI {
            theta = 2.0 * PI - theta;
            phi += PI;
        }
        Orientation { theta, phi }
    }
}

/// Detector readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Readout {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Readout {
    pub fn symbol(self) -> char {
        match self {
            Readout::Plus => '+',
            Readout::Minus => '-',
        }
    }
}

impl fmt::Display for Readout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// The two Kraus operators of one measurement step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrausPair {
    pub eta: f64,
    pub plus: Mat2,
    pub minus: Mat2,
}

impl KrausPair {
    pub fn get(&self, r: Readout) -> Mat2 {
        match r {
            Readout::Plus => self.plus,
            Readout::Minus => self.minus,
        }
    }

    /// `M₊†M₊ + M₋†M₋`.
    pub fn completeness(&self) -> Mat2 {
        self.plus.dagger() * self.plus + self.minus.dagger() * self.minus
    }

    /// Conjugates both operators into orientation `n`.
    pub fn oriented(&self, n: Orientation) -> KrausPair {
        let u = rotation(n);
        let ud = u.dagger();
        KrausPair {
            eta: self.eta,
            plus: ud * self.plus * u,
            minus: ud * self.minus * u,
        }
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::EtaOutOfRange { eta })
    }
}

/// Kraus pair for a measurement along `ẑ` with strength `eta`.
pub fn kraus_z(eta: f64) -> Result<KrausPair> {
    check_eta(eta)?;
    Ok(KrausPair {
        eta,
        plus: Mat2::diag_real(1.0, (1.0 - eta).sqrt()),
        minus: Mat2::diag_real(0.0, eta.sqrt()),
    })
}

/// `M(ẑ, +)` with `√(1−η)` continued to `i√(η−1)` for `η > 1`.
///
/// Not a physical Kraus operator beyond `η = 1`; used only by the labelled
/// analytic-continuation mode.
pub fn kraus_z_plus_continued(eta: f64) -> Mat2 {
    let lower = Complex::new(1.0 - eta, 0.0).sqrt();
    Mat2::diag(Complex::new(1.0, 0.0), lower)
}

/// SU(2) rotation taking the measurement axis `n` to `ẑ`:
///
/// ```text
/// U(n) = ⎛  cos θ/2          e^{−iφ} sin θ/2 ⎞
///        ⎝ −e^{iφ} sin θ/2   cos θ/2         ⎠
/// ```
pub fn rotation(n: Orientation) -> Mat2 {
    let (s, c) = (0.5 * n.theta).sin_cos();
    let e = Complex::from_polar(1.0, n.phi);
    Mat2::new(
        Complex::new(c, 0.0),
        e.conj() * s,
        -e * s,
        Complex::new(c, 0.0),
    )
}

/// Kraus operator for readout `r` with the measurement axis along `n`.
pub fn kraus_oriented(eta: f64, n: Orientation, r: Readout) -> Result<Mat2> {
    let z = kraus_z(eta)?.get(r);
    let u = rotation(n);
    Ok(u.dagger() * z * u)
}

/// The k-independent step matrix
/// `½·((1+e^{−iε}, 1−e^{−iε}), (1−e^{−iε}, 1+e^{−iε}))`.
///
/// Its eigenvalues are `1` (on `(|↑⟩+|↓⟩)/√2`) and `e^{−iε}` (on
/// `(|↑⟩−|↓⟩)/√2`).
pub fn delta_r(epsilon: f64) -> Mat2 {
    let z = Complex::from_polar(1.0, -epsilon);
    let one = Complex::new(1.0, 0.0);
    let d = (one + z) * 0.5;
    let o = (one - z) * 0.5;
    Mat2::new(d, o, o, d)
}
