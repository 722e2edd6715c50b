//! Adaptive Dormand–Prince 5(4) integration of 2×2 complex linear systems along
//! piecewise paths in the z-plane.

use crate::error::{DpwError, Result};
use crate::linalg::{Mat2, C64, I};
use serde::{Deserialize, Serialize};

pub const MAX_STEPS: usize = 200_000;
const MIN_STEP: f64 = 1e-14;

/// One piece of an integration path, parameterized by a real variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    /// z = from + s(to − from), s ∈ [0, 1].
    Line { from: C64, to: C64 },
    /// z = center + radius·e^{iφ}, φ from `start` to `end`.
    Arc { center: C64, radius: f64, start: f64, end: f64 },
    /// z = center + e^{σ}e^{iφ}, σ from `start` to `end` along a fixed ray.
    LogRadial { center: C64, phi: f64, start: f64, end: f64 },
}

impl Segment {
    pub fn span(&self) -> (f64, f64) {
        match *self {
            Segment::Line { .. } => (0.0, 1.0),
            Segment::Arc { start, end, .. } => (start, end),
            Segment::LogRadial { start, end, .. } => (start, end),
        }
    }

    /// (z(s), dz/ds).
    #[inline]
    pub fn point(&self, s: f64) -> (C64, C64) {
        match *self {
            Segment::Line { from, to } => (from + (to - from) * s, to - from),
            Segment::Arc { center, radius, .. } => {
                let e = C64::from_polar(radius, s);
                (center + e, I * e)
            }
            Segment::LogRadial { center, phi, .. } => {
                let e = C64::from_polar(s.exp(), phi);
                (center + e, e)
            }
        }
    }

    pub fn start_point(&self) -> C64 {
        self.point(self.span().0).0
    }

    pub fn end_point(&self) -> C64 {
        self.point(self.span().1).0
    }

    /// Smallest distance from the segment to `q`, sampled.
    pub fn distance_to(&self, q: C64) -> f64 {
        let (a, b) = self.span();
        (0..=256)
            .map(|i| (self.point(a + (b - a) * i as f64 / 256.0).0 - q).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-11, atol: 1e-11 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy(y: &Mat2, h: f64, terms: &[(f64, &Mat2)]) -> Mat2 {
    let mut acc = Mat2::zero();
    for (c, k) in terms {
        acc = acc + k.scale(C64::new(*c, 0.0));
    }
    *y + acc.scale(C64::new(h, 0.0))
}

fn err_norm(y0: &Mat2, y1: &Mat2, e: &Mat2, opts: &OdeOptions) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let scale = opts.atol + opts.rtol * y0.0[i][j].norm().max(y1.0[i][j].norm());
            worst = worst.max(e.0[i][j].norm() / scale);
        }
    }
    worst
}

/// Integrates y' = f(s, y) from `s0` to `s1` (either direction) with FSAL Dormand–Prince.
pub fn integrate(
    f: impl Fn(f64, &Mat2) -> Mat2,
    s0: f64,
    s1: f64,
    y0: Mat2,
    opts: &OdeOptions,
    stats: &mut OdeStats,
) -> Result<Mat2> {
    let span = s1 - s0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut s = s0;
    let mut y = y0;
    let mut k1 = f(s, &y);
    let scale0 = opts.atol + opts.rtol * y.max_abs();
    let d1 = k1.max_abs();
    let mut h = if d1 > 0.0 { 0.01 * (scale0 / d1).powf(0.2) * span.abs().max(1.0) } else { 0.01 * span.abs() };
    h = h.min(span.abs()).max(1e-6 * span.abs());
    let mut steps = 0;
    let mut last_err = 1e-4f64;
    while (s1 - s) * dir > 0.0 {
        if steps >= MAX_STEPS {
            return Err(DpwError::TooManySteps(steps));
        }
        steps += 1;
        let remaining = (s1 - s).abs();
        let hs = h.min(remaining);
        let hd = hs * dir;
        let k2 = f(s + C2 * hd, &axpy(&y, hd, &[(A21, &k1)]));
        let k3 = f(s + C3 * hd, &axpy(&y, hd, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(s + C4 * hd, &axpy(&y, hd, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(s + C5 * hd, &axpy(&y, hd, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(s + hd, &axpy(&y, hd, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = axpy(&y, hd, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(s + hd, &y_new);
        let e = axpy(&Mat2::zero(), hd, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
        let err = err_norm(&y, &y_new, &e, opts);
        if !err.is_finite() {
            h *= 0.25;
            stats.rejected += 1;
        } else if err <= 1.0 {
            s = if hs == remaining { s1 } else { s + hd };
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
            // PI step-size control
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * last_err.powf(0.4 / 5.0);
            h = hs * fac.clamp(0.2, 5.0);
            last_err = err.max(1e-4);
        } else {
            stats.rejected += 1;
            h = hs * (0.9 * err.powf(-0.2)).max(0.2);
        }
        if h < MIN_STEP * span.abs().max(1.0) {
            return Err(DpwError::StepUnderflow { s, h });
        }
    }
    Ok(y)
}

/// Integrates along consecutive segments; `f(z, dz/ds, y)` is the right-hand side.
pub fn integrate_path(
    f: impl Fn(C64, C64, &Mat2) -> Mat2,
    path: &[Segment],
    y0: Mat2,
    opts: &OdeOptions,
    stats: &mut OdeStats,
) -> Result<Mat2> {
    let mut y = y0;
    for seg in path {
        let (a, b) = seg.span();
        y = integrate(
            |s, y| {
                let (z, dz) = seg.point(s);
                f(z, dz, y)
            },
            a,
            b,
            y,
            opts,
            stats,
        )?;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_exponential() {
        // y' = A y with A = [[i, 0], [0, -i]] over [0, 2π]
        let a = Mat2::diag(I, -I);
        let mut st = OdeStats::default();
        let y = integrate(|_, y| a * *y, 0.0, 2.0 * std::f64::consts::PI, Mat2::identity(), &OdeOptions::default(), &mut st)
            .unwrap();
        assert!((y - Mat2::identity()).max_abs() < 1e-9);
        let back = integrate(|_, y| a * *y, 1.0, 0.0, Mat2::diag(I.exp(), (-I).exp()), &OdeOptions::default(), &mut st)
            .unwrap();
        assert!((back - Mat2::identity()).max_abs() < 1e-9);
    }

    #[test]
    fn residue_around_a_pole() {
        // dΦ = Φ·R/(z − 1) dz around a circle gives exp(2πi R)
        let r = Mat2::diag(C64::new(0.25, 0.0), C64::new(-0.25, 0.0));
        let path = [Segment::Arc { center: C64::new(1.0, 0.0), radius: 0.5, start: 0.0, end: 2.0 * std::f64::consts::PI }];
        let mut st = OdeStats::default();
        let y = integrate_path(
            |z, dz, y| *y * r.scale(dz / (z - C64::new(1.0, 0.0))),
            &path,
            Mat2::identity(),
            &OdeOptions::default(),
            &mut st,
        )
        .unwrap();
        let expect = Mat2::diag(I * std::f64::consts::FRAC_PI_2, -I * std::f64::consts::FRAC_PI_2);
        let expect = Mat2::diag(expect.0[0][0].exp(), expect.0[1][1].exp());
        assert!((y - expect).max_abs() < 1e-9);
    }
}
