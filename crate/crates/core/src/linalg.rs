//! Fixed-size 2×2 complex matrices used pointwise in λ.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub const fn zero() -> Self {
        Mat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    #[inline]
    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    #[inline]
    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Adjugate; equals the inverse when det = 1.
    #[inline]
    pub fn adj(&self) -> Self {
        let m = &self.0;
        Mat2([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        Some(self.adj().scale(d.inv()))
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn conj(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]])
    }

    #[inline]
    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0f64, |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }

    pub fn to_array(&self) -> [C64; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }

    pub fn from_array(a: [C64; 4]) -> Self {
        Mat2([[a[0], a[1]], [a[2], a[3]]])
    }

    /// Unit quaternion (x1, x2, x3, x4) of an SU(2) matrix [[α, β], [−β̄, ᾱ]].
    pub fn to_quaternion(&self) -> [f64; 4] {
        let a = self.0[0][0];
        let b = self.0[0][1];
        [a.re, a.im, b.re, b.im]
    }

    pub fn from_quaternion(q: [f64; 4]) -> Self {
        let a = C64::new(q[0], q[1]);
        let b = C64::new(q[2], q[3]);
        Mat2::new(a, b, -b.conj(), a.conj())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    #[inline]
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    #[inline]
    fn sub(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]])
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    #[inline]
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// Principal logarithm of a matrix in SL(2, ℂ) written as `Id + h·w`, divided by `h`.
///
/// Stays accurate as `h → 0`, where it returns the traceless part of `w`. The second
/// value is the rotation angle θ (eigenvalues of the log are ±iθ); |Re θ| close to π
/// signals proximity to the branch cut.
pub fn log_one_plus_scaled(w: &Mat2, h: f64) -> (Mat2, C64) {
    let half_tr = w.trace() * 0.5;
    let w0 = *w - Mat2::identity().scale(half_tr);
    // (M − cId)² = (c² − 1)Id with M − cId = h·w0, so sin²θ = h²·det(w0)
    let s = w0.det().sqrt() * h;
    let c = ONE + half_tr * h;
    let ratio = if s.norm() < 1e-2 {
        // asin(s)/s series; c ≈ 1 here so the principal branch is asin
        let s2 = s * s;
        ONE + s2 * (1.0 / 6.0 + s2 * (3.0 / 40.0 + s2 * (5.0 / 112.0 + s2 * (35.0 / 1152.0))))
    } else {
        let theta = -I * (c + I * s).ln();
        theta / s
    };
    let theta = ratio * s;
    (w0.scale(ratio), theta)
}
