//! Exact 2×2 complex linear algebra and phase unwrapping.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use num_complex::Complex64 as Complex;

/// Moduli at or below this are treated as exact zeros by [`arg_unwrap`].
pub const ZERO_MODULUS: f64 = 1e-300;

/// Half-width of the window around ±π in which an unwrapping step is
/// resolved downwards to −π.
pub const PI_TIE_TOL: f64 = 1e-6;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// State coefficients `up·|↑⟩ + down·|↓⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub up: Complex,
    pub down: Complex,
}

impl Vec2 {
    pub const fn new(up: Complex, down: Complex) -> Self {
        Vec2 { up, down }
    }

    pub const fn spin_up() -> Self {
        Vec2::new(ONE, ZERO)
    }

    /// `(|↑⟩ + |↓⟩)/√2`.
    pub fn plus_x() -> Self {
        let h = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Vec2::new(h, h)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    /// Returns `None` for the zero vector.
    pub fn normalized(&self) -> Option<Vec2> {
        let n = self.norm_sqr().sqrt();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    pub fn scale(&self, s: f64) -> Vec2 {
        Vec2::new(self.up * s, self.down * s)
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &Vec2) -> Complex {
        self.up.conj() * other.up + self.down.conj() * other.down
    }
}

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub m00: Complex,
    pub m01: Complex,
    pub m10: Complex,
    pub m11: Complex,
}

impl Mat2 {
    pub const fn new(m00: Complex, m01: Complex, m10: Complex, m11: Complex) -> Self {
        Mat2 { m00, m01, m10, m11 }
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn diag(d0: Complex, d1: Complex) -> Self {
        Mat2::new(d0, ZERO, ZERO, d1)
    }

    pub fn diag_real(d0: f64, d1: f64) -> Self {
        Mat2::diag(Complex::new(d0, 0.0), Complex::new(d1, 0.0))
    }

    /// Pauli X.
    pub const fn flip() -> Self {
        Mat2::new(ZERO, ONE, ONE, ZERO)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Mat2 {
        Mat2::new(
            self.m00.conj(),
            self.m10.conj(),
            self.m01.conj(),
            self.m11.conj(),
        )
    }

    pub fn trace(&self) -> Complex {
        self.m00 + self.m11
    }

    pub fn det(&self) -> Complex {
        self.m00 * self.m11 - self.m01 * self.m10
    }

    /// Roots of the characteristic polynomial `λ² − tr·λ + det`, in closed form.
    ///
    /// The pair is ordered with the `+√disc` root first.
    pub fn eigenvalues(&self) -> (Complex, Complex) {
        let half_tr = self.trace() * 0.5;
        let disc = (half_tr * half_tr - self.det()).sqrt();
        let (a, b) = (half_tr + disc, half_tr - disc);
        // Recover the smaller root from the product to avoid cancellation.
        let det = self.det();
        if a.norm() >= b.norm() {
            let b = if a.norm() > 0.0 { det / a } else { b };
            (a, b)
        } else {
            let a = if b.norm() > 0.0 { det / b } else { a };
            (a, b)
        }
    }

    pub fn scale(&self, s: Complex) -> Mat2 {
        Mat2::new(self.m00 * s, self.m01 * s, self.m10 * s, self.m11 * s)
    }

    pub fn scale_real(&self, s: f64) -> Mat2 {
        Mat2::new(self.m00 * s, self.m01 * s, self.m10 * s, self.m11 * s)
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn entries(&self) -> [Complex; 4] {
        [self.m00, self.m01, self.m10, self.m11]
    }

    /// Largest entry distance to `other`.
    pub fn max_diff(&self, other: &Mat2) -> f64 {
        (*self - *other).max_norm()
    }

    /// True iff every entry of `m†m − I` has modulus at most `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.dagger() * *self).max_diff(&Mat2::identity()) <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, b: Mat2) -> Mat2 {
        let a = self;
        Mat2::new(
            a.m00 * b.m00 + a.m01 * b.m10,
            a.m00 * b.m01 + a.m01 * b.m11,
            a.m10 * b.m00 + a.m11 * b.m10,
            a.m10 * b.m01 + a.m11 * b.m11,
        )
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;

    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.m00 * v.up + self.m01 * v.down,
            self.m10 * v.up + self.m11 * v.down,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, b: Mat2) -> Mat2 {
        Mat2::new(
            self.m00 + b.m00,
            self.m01 + b.m01,
            self.m10 + b.m10,
            self.m11 + b.m11,
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, b: Mat2) -> Mat2 {
        Mat2::new(
            self.m00 - b.m00,
            self.m01 - b.m01,
            self.m10 - b.m10,
            self.m11 - b.m11,
        )
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn principal(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Wraps an angle into `[−π, π)`, with values within [`PI_TIE_TOL`] of `+π`
/// mapped to `−π`. Sign flips of a real amplitude therefore read as `−π`.
pub fn wrap_phase(x: f64) -> f64 {
    let p = principal(x);
    if p >= PI - PI_TIE_TOL {
        p - 2.0 * PI
    } else {
        p
    }
}

/// Unwraps the arguments of a sequence of complex samples.
///
/// The first output is the principal argument of the first nonzero sample;
/// each subsequent phase is the branch closest to its predecessor. A step of
/// (numerically) exactly π, which is what a real amplitude crossing zero
/// produces, is taken as −π rather than smoothed away. Samples with modulus
/// at or below [`ZERO_MODULUS`] carry no phase: they are filled by linear
/// interpolation between the neighbouring nonzero samples, so the jump lands
/// on the interval containing the zero. An all-zero input unwraps to zeros.
pub fn arg_unwrap(values: &[Complex]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptySequence);
    }
    let nonzero: Vec<usize> = (0..values.len())
        .filter(|&i| values[i].norm() > ZERO_MODULUS)
        .collect();
    let mut out = vec![0.0; values.len()];
    let Some(&first) = nonzero.first() else {
        return Ok(out);
    };

    out[first] = values[first].arg();
    for pair in nonzero.windows(2) {
        let (prev, next) = (pair[0], pair[1]);
        let mut step = principal(values[next].arg() - values[prev].arg());
        if step.abs() >= PI - PI_TIE_TOL {
            step = -PI;
        }
        out[next] = out[prev] + step;
        // Interpolate across any zero-modulus gap.
        let span = (next - prev) as f64;
        for i in prev + 1..next {
            let t = (i - prev) as f64 / span;
            out[i] = out[prev] + t * step;
        }
    }
    let last = *nonzero.last().unwrap();
    for i in 0..first {
        out[i] = out[first];
    }
    for i in last + 1..values.len() {
        out[i] = out[last];
    }
    Ok(out)
}
