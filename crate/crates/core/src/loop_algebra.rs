//! Truncated Laurent loops on the circle |λ| = 1 with ρ-weighted norms.
//!
//! Coefficients are stored densely for k = −N..=N. Matrix loops are 2×2 arrays of
//! scalar loops sharing degree and weight.

use crate::error::{DpwError, Result};
use crate::linalg::{Mat2, C64, ONE, ZERO};
use rustfft::FftPlanner;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::PI;

/// Discarded band mass (relative to the total weighted norm) tolerated by products.
pub const TAIL_BUDGET: f64 = 1e-10;

/// Sample magnitude below which inversion is refused.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// Which Fourier band to keep in [`ScalarLoop::project`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Plus,
    Zero,
    Minus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarLoop {
    coeffs: Vec<C64>,
    n: usize,
    rho: f64,
}

impl ScalarLoop {
    pub fn zeros(n: usize, rho: f64) -> Self {
        ScalarLoop { coeffs: vec![ZERO; 2 * n + 1], n, rho }
    }

    /// Builds a loop from coefficients ordered k = −N..=N.
    pub fn from_coeffs(coeffs: Vec<C64>, rho: f64) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(DpwError::Incompatible(format!(
                "coefficient vector of even length {}",
                coeffs.len()
            )));
        }
        let n = coeffs.len() / 2;
        Ok(ScalarLoop { coeffs, n, rho })
    }

    /// Loop with the given coefficients at nonnegative powers, k = 0, 1, ...
    pub fn from_positive(pos: &[C64], n: usize, rho: f64) -> Self {
        let mut f = Self::zeros(n, rho);
        for (k, &c) in pos.iter().enumerate().take(n + 1) {
            f.coeffs[n + k] = c;
        }
        f
    }

    pub fn from_real_positive(pos: &[f64], n: usize, rho: f64) -> Self {
        let v: Vec<C64> = pos.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_positive(&v, n, rho)
    }

    pub fn constant(c: C64, n: usize, rho: f64) -> Self {
        let mut f = Self::zeros(n, rho);
        f.coeffs[n] = c;
        f
    }

    /// c·λ^k.
    pub fn monomial(c: C64, k: i32, n: usize, rho: f64) -> Self {
        let mut f = Self::zeros(n, rho);
        f.set(k, c);
        f
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient of λ^k, zero outside the stored band.
    pub fn coeff(&self, k: i32) -> C64 {
        let idx = k + self.n as i32;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            ZERO
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn set(&mut self, k: i32, c: C64) {
        assert!(k.unsigned_abs() as usize <= self.n, "index {k} outside band {}", self.n);
        let idx = (k + self.n as i32) as usize;
        self.coeffs[idx] = c;
    }

    /// Same loop stored at a different degree (pads with zeros or drops the outer band).
    pub fn with_degree(&self, n: usize) -> Self {
        let mut out = Self::zeros(n, self.rho);
        let m = n.min(self.n) as i32;
        for k in -m..=m {
            out.set(k, self.coeff(k));
        }
        out
    }

    pub fn norm_rho(&self) -> f64 {
        let n = self.n as i32;
        (-n..=n).map(|k| self.coeff(k).norm() * self.rho.powi(k.abs())).sum()
    }

    /// Weighted mass in |k| > N − 2.
    pub fn tail_mass(&self) -> f64 {
        let n = self.n as i32;
        (-n..=n)
            .filter(|k| k.abs() > n - 2)
            .map(|k| self.coeff(k).norm() * self.rho.powi(k.abs()))
            .sum()
    }

    pub fn is_nonnegative(&self, tol: f64) -> bool {
        (1..=self.n as i32).all(|k| self.coeff(-k).norm() <= tol)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.im.abs() <= tol)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n || (self.rho - other.rho).abs() > 0.0 {
            return Err(DpwError::Incompatible(format!(
                "(N={}, rho={}) vs (N={}, rho={})",
                self.n, self.rho, other.n, other.rho
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(ScalarLoop { coeffs, n: self.n, rho: self.rho })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(ScalarLoop { coeffs, n: self.n, rho: self.rho })
    }

    pub fn scale(&self, s: C64) -> Self {
        ScalarLoop { coeffs: self.coeffs.iter().map(|c| c * s).collect(), n: self.n, rho: self.rho }
    }

    /// Untruncated product, stored at degree 2N.
    pub fn mul_full(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.n;
        let mut out = vec![ZERO; 4 * n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Ok(ScalarLoop { coeffs: out, n: 2 * n, rho: self.rho })
    }

    /// Product truncated back to degree N; fails if the discarded band is too heavy.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let full = self.mul_full(other)?;
        let total = full.norm_rho();
        let kept = full.with_degree(self.n);
        let discarded = total - kept.norm_rho();
        if discarded > TAIL_BUDGET * total.max(f64::MIN_POSITIVE) {
            return Err(DpwError::TruncationOverflow { discarded, budget: TAIL_BUDGET * total });
        }
        Ok(kept)
    }

    /// Multiplicative inverse computed on a 4N-point grid.
    pub fn invert(&self) -> Result<Self> {
        let l = 4 * self.n.max(1);
        let samples = self.to_grid(l)?;
        let mut inv = Vec::with_capacity(l);
        for (index, s) in samples.iter().enumerate() {
            if s.norm() < SINGULAR_THRESHOLD {
                return Err(DpwError::SingularInverse { magnitude: s.norm(), index });
            }
            inv.push(s.inv());
        }
        Self::from_grid(&inv, self.n, self.rho)
    }

    /// f*(λ) = conj(f(1/conj λ)).
    pub fn star(&self) -> Self {
        let coeffs = self.coeffs.iter().rev().map(|c| c.conj()).collect();
        ScalarLoop { coeffs, n: self.n, rho: self.rho }
    }

    /// f̄(λ) = conj(f(conj λ)).
    pub fn bar(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c.conj()).collect();
        ScalarLoop { coeffs, n: self.n, rho: self.rho }
    }

    /// λ ↦ f(−λ).
    pub fn reflect(&self) -> Self {
        let n = self.n as i32;
        let coeffs = (-n..=n)
            .map(|k| if k % 2 == 0 { self.coeff(k) } else { -self.coeff(k) })
            .collect();
        ScalarLoop { coeffs, n: self.n, rho: self.rho }
    }

    pub fn project(&self, part: Part) -> Self {
        let n = self.n as i32;
        let mut out = Self::zeros(self.n, self.rho);
        for k in -n..=n {
            let keep = match part {
                Part::Plus => k > 0,
                Part::Zero => k == 0,
                Part::Minus => k < 0,
            };
            if keep {
                out.set(k, self.coeff(k));
            }
        }
        out
    }

    /// Horner evaluation on the closed annulus 1/ρ ≤ |λ| ≤ ρ.
    pub fn evaluate(&self, lambda: C64) -> Result<C64> {
        let r = lambda.norm();
        let slack = 1e-12;
        if r > self.rho * (1.0 + slack) || r * self.rho < 1.0 - slack {
            return Err(DpwError::OutOfAnnulus { lambda: format!("{lambda}"), rho: self.rho });
        }
        Ok(self.eval_unchecked(lambda))
    }

    pub(crate) fn eval_unchecked(&self, lambda: C64) -> C64 {
        let n = self.n;
        let mut pos = ZERO;
        for c in self.coeffs[n..].iter().rev() {
            pos = pos * lambda + c;
        }
        if n == 0 {
            return pos;
        }
        let inv = lambda.inv();
        let mut neg = ZERO;
        for c in self.coeffs[..n].iter() {
            neg = (neg + c) * inv;
        }
        pos + neg
    }

    /// Samples at λ_j = e^{2πij/L}.
    pub fn to_grid(&self, l: usize) -> Result<Vec<C64>> {
        check_grid(l, self.n)?;
        let mut buf = vec![ZERO; l];
        let n = self.n as i32;
        for k in -n..=n {
            buf[k.rem_euclid(l as i32) as usize] += self.coeff(k);
        }
        // f(λ_j) = Σ_k f_k e^{2πijk/L} is an inverse DFT
        FftPlanner::new().plan_fft_inverse(l).process(&mut buf);
        Ok(buf)
    }

    /// Coefficients k = −N..=N from samples on the L-point grid.
    pub fn from_grid(samples: &[C64], n: usize, rho: f64) -> Result<Self> {
        let l = samples.len();
        check_grid(l, n)?;
        let mut buf = samples.to_vec();
        FftPlanner::new().plan_fft_forward(l).process(&mut buf);
        let scale = 1.0 / l as f64;
        let ni = n as i32;
        let coeffs = (-ni..=ni).map(|k| buf[k.rem_euclid(l as i32) as usize] * scale).collect();
        Ok(ScalarLoop { coeffs, n, rho })
    }
}

/// Grid points e^{2πij/L}.
pub fn grid_points(l: usize) -> Vec<C64> {
    (0..l).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / l as f64)).collect()
}

pub fn check_grid(l: usize, n: usize) -> Result<()> {
    if l % 2 == 1 {
        return Err(DpwError::InvalidGrid(format!("L = {l} is odd: grid must contain lambda = -1")));
    }
    if l < 2 * n + 2 {
        return Err(DpwError::InvalidGrid(format!("L = {l} aliases degree N = {n}; need L >= {}", 2 * n + 2)));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct LoopRepr {
    rho: f64,
    #[serde(rename = "N")]
    n: usize,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for ScalarLoop {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LoopRepr {
            rho: self.rho,
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ScalarLoop {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = LoopRepr::deserialize(d)?;
        if r.coeffs.len() != 2 * r.n + 1 {
            return Err(serde::de::Error::custom(format!(
                "expected {} coefficients for N = {}, found {}",
                2 * r.n + 1,
                r.n,
                r.coeffs.len()
            )));
        }
        Ok(ScalarLoop { coeffs: r.coeffs.iter().map(|c| C64::new(c[0], c[1])).collect(), n: r.n, rho: r.rho })
    }
}

/// 2×2 matrix of scalar loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixLoop {
    pub entries: [[ScalarLoop; 2]; 2],
}

impl MatrixLoop {
    pub fn new(a: ScalarLoop, b: ScalarLoop, c: ScalarLoop, d: ScalarLoop) -> Self {
        MatrixLoop { entries: [[a, b], [c, d]] }
    }

    pub fn identity(n: usize, rho: f64) -> Self {
        Self::constant(&Mat2::identity(), n, rho)
    }

    pub fn constant(m: &Mat2, n: usize, rho: f64) -> Self {
        let e = |i: usize, j: usize| ScalarLoop::constant(m.0[i][j], n, rho);
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn degree(&self) -> usize {
        self.entries[0][0].degree()
    }

    pub fn rho(&self) -> f64 {
        self.entries[0][0].rho()
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarLoop {
        &self.entries[i][j]
    }

    /// Coefficient matrix of λ^k.
    pub fn coeff(&self, k: i32) -> Mat2 {
        let e = &self.entries;
        Mat2::new(e[0][0].coeff(k), e[0][1].coeff(k), e[1][0].coeff(k), e[1][1].coeff(k))
    }

    fn map(&self, f: impl Fn(&ScalarLoop) -> ScalarLoop) -> Self {
        let e = &self.entries;
        Self::new(f(&e[0][0]), f(&e[0][1]), f(&e[1][0]), f(&e[1][1]))
    }

    fn zip(&self, o: &Self, f: impl Fn(&ScalarLoop, &ScalarLoop) -> Result<ScalarLoop>) -> Result<Self> {
        let (a, b) = (&self.entries, &o.entries);
        Ok(Self::new(f(&a[0][0], &b[0][0])?, f(&a[0][1], &b[0][1])?, f(&a[1][0], &b[1][0])?, f(&a[1][1], &b[1][1])?))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.zip(o, |x, y| x.add(y))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.zip(o, |x, y| x.sub(y))
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|x| x.scale(s))
    }

    pub fn with_degree(&self, n: usize) -> Self {
        self.map(|x| x.with_degree(n))
    }

    fn mul_with(&self, o: &Self, f: impl Fn(&ScalarLoop, &ScalarLoop) -> Result<ScalarLoop>) -> Result<Self> {
        let (a, b) = (&self.entries, &o.entries);
        let entry = |i: usize, j: usize| -> Result<ScalarLoop> { f(&a[i][0], &b[0][j])?.add(&f(&a[i][1], &b[1][j])?) };
        Ok(Self::new(entry(0, 0)?, entry(0, 1)?, entry(1, 0)?, entry(1, 1)?))
    }

    /// Truncated product; fails on truncation overflow.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        let full = self.mul_full(o)?;
        let total = full.norm_rho();
        let kept = full.with_degree(self.degree());
        let discarded = full.sub(&kept.with_degree(full.degree()))?.norm_rho();
        if discarded > TAIL_BUDGET * total.max(f64::MIN_POSITIVE) {
            return Err(DpwError::TruncationOverflow { discarded, budget: TAIL_BUDGET * total });
        }
        Ok(kept)
    }

    /// Untruncated product at degree 2N.
    pub fn mul_full(&self, o: &Self) -> Result<Self> {
        self.mul_with(o, |x, y| x.mul_full(y))
    }

    pub fn det(&self) -> Result<ScalarLoop> {
        let e = &self.entries;
        e[0][0].mul_full(&e[1][1])?.sub(&e[0][1].mul_full(&e[1][0])?)
    }

    pub fn adj(&self) -> Self {
        let e = &self.entries;
        let neg = |x: &ScalarLoop| x.scale(-ONE);
        Self::new(e[1][1].clone(), neg(&e[0][1]), neg(&e[1][0]), e[0][0].clone())
    }

    /// Inverse via pointwise inversion on a 4N grid.
    pub fn invert(&self) -> Result<Self> {
        let l = 4 * self.degree().max(1);
        let samples = self.to_grid(l)?;
        let mut inv = Vec::with_capacity(l);
        for (index, s) in samples.iter().enumerate() {
            let d = s.det();
            if d.norm() < SINGULAR_THRESHOLD {
                return Err(DpwError::SingularInverse { magnitude: d.norm(), index });
            }
            inv.push(s.adj().scale(d.inv()));
        }
        Self::from_grid(&inv, self.degree(), self.rho())
    }

    /// (M*)_{ij} = (M_{ji})*.
    pub fn star(&self) -> Self {
        let e = &self.entries;
        Self::new(e[0][0].star(), e[1][0].star(), e[0][1].star(), e[1][1].star())
    }

    pub fn bar(&self) -> Self {
        self.map(|x| x.bar())
    }

    pub fn reflect(&self) -> Self {
        self.map(|x| x.reflect())
    }

    /// Max row sum of entry ρ-norms.
    pub fn norm_rho(&self) -> f64 {
        let e = &self.entries;
        (e[0][0].norm_rho() + e[0][1].norm_rho()).max(e[1][0].norm_rho() + e[1][1].norm_rho())
    }

    pub fn evaluate(&self, lambda: C64) -> Result<Mat2> {
        let e = &self.entries;
        Ok(Mat2::new(
            e[0][0].evaluate(lambda)?,
            e[0][1].evaluate(lambda)?,
            e[1][0].evaluate(lambda)?,
            e[1][1].evaluate(lambda)?,
        ))
    }

    pub fn to_grid(&self, l: usize) -> Result<Vec<Mat2>> {
        let e = &self.entries;
        let g = [e[0][0].to_grid(l)?, e[0][1].to_grid(l)?, e[1][0].to_grid(l)?, e[1][1].to_grid(l)?];
        Ok((0..l).map(|j| Mat2::new(g[0][j], g[1][j], g[2][j], g[3][j])).collect())
    }

    pub fn from_grid(samples: &[Mat2], n: usize, rho: f64) -> Result<Self> {
        let entry = |i: usize, j: usize| -> Result<ScalarLoop> {
            let v: Vec<C64> = samples.iter().map(|m| m.0[i][j]).collect();
            ScalarLoop::from_grid(&v, n, rho)
        };
        Ok(Self::new(entry(0, 0)?, entry(0, 1)?, entry(1, 0)?, entry(1, 1)?))
    }

    /// det ≡ 1 coefficientwise within `tol`.
    pub fn is_sl(&self, tol: f64) -> Result<bool> {
        let d = self.det()?;
        let n = d.degree() as i32;
        Ok((-n..=n).all(|k| (d.coeff(k) - if k == 0 { ONE } else { ZERO }).norm() <= tol))
    }

    /// Every entry free of negative powers.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.entries.iter().flatten().all(|x| x.is_nonnegative(tol))
    }

    /// Positive, with upper-triangular value at λ = 0 and positive real diagonal there.
    pub fn is_positive_real(&self, tol: f64) -> bool {
        let b0 = self.coeff(0);
        self.is_positive(tol)
            && b0.0[1][0].norm() <= tol
            && b0.0[0][0].im.abs() <= tol
            && b0.0[1][1].im.abs() <= tol
            && b0.0[0][0].re > 0.0
            && b0.0[1][1].re > 0.0
    }

    /// Largest ‖F F† − Id‖ over an L-point grid on the unit circle.
    pub fn unitarity_defect(&self, l: usize) -> Result<f64> {
        Ok(self
            .to_grid(l)?
            .iter()
            .map(|f| (*f * f.dagger() - Mat2::identity()).max_abs())
            .fold(0.0, f64::max))
    }

    pub fn is_unitary(&self, l: usize, tol: f64) -> Result<bool> {
        Ok(self.unitarity_defect(l)? <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn polynomial_product() {
        let a = ScalarLoop::from_real_positive(&[1.0, 1.0], 4, 2.0);
        let b = ScalarLoop::from_real_positive(&[1.0, -1.0], 4, 2.0);
        let p = a.mul(&b).unwrap();
        assert_eq!(p, ScalarLoop::from_real_positive(&[1.0, 0.0, -1.0], 4, 2.0));
    }

    #[test]
    fn geometric_inverse() {
        let f = ScalarLoop::from_real_positive(&[1.0, -0.5], 40, 2.0);
        let g = f.invert().unwrap();
        assert!((g.coeff(2) - c(0.25)).norm() < 1e-14);
        let one = ScalarLoop::constant(ONE, 40, 2.0);
        assert!((one.invert().unwrap().coeff(0) - ONE).norm() < 1e-15);
    }

    #[test]
    fn overflow_is_reported() {
        let a = ScalarLoop::monomial(ONE, 3, 4, 2.0);
        assert!(matches!(a.mul(&a), Err(DpwError::TruncationOverflow { .. })));
    }

    #[test]
    fn star_examples() {
        let lam = ScalarLoop::monomial(ONE, 1, 3, 2.0);
        assert_eq!(lam.star(), ScalarLoop::monomial(ONE, -1, 3, 2.0));
        let il = ScalarLoop::monomial(C64::new(0.0, 1.0), 1, 3, 2.0);
        assert_eq!(il.star(), ScalarLoop::monomial(C64::new(0.0, -1.0), -1, 3, 2.0));
        assert_eq!(lam.star().bar(), ScalarLoop::monomial(ONE, -1, 3, 2.0));
    }

    #[test]
    fn projections() {
        let mut f = ScalarLoop::zeros(3, 2.0);
        f.set(-1, c(2.0));
        f.set(0, c(3.0));
        f.set(1, c(4.0));
        assert_eq!(f.project(Part::Plus), ScalarLoop::monomial(c(4.0), 1, 3, 2.0));
        assert_eq!(f.project(Part::Zero), ScalarLoop::monomial(c(3.0), 0, 3, 2.0));
        assert_eq!(f.project(Part::Minus), ScalarLoop::monomial(c(2.0), -1, 3, 2.0));

        let mut g = ScalarLoop::zeros(3, 2.0);
        g.set(1, ONE);
        g.set(-1, -ONE);
        let lam = C64::from_polar(1.3, 0.4);
        let lhs = g.project(Part::Plus).evaluate(lam).unwrap();
        let rhs = g.project(Part::Minus).evaluate(lam.inv()).unwrap();
        assert!((lhs + rhs).norm() < 1e-15);
    }

    #[test]
    fn evaluation_examples() {
        let mut f = ScalarLoop::zeros(2, 2.0);
        f.set(1, ONE);
        f.set(-1, ONE);
        assert!((f.evaluate(ONE).unwrap() - c(2.0)).norm() < 1e-15);
        assert!((f.evaluate(-ONE).unwrap() + c(2.0)).norm() < 1e-15);
        let sq = ScalarLoop::monomial(ONE, 2, 2, 2.0);
        assert!((sq.evaluate(c(2.0)).unwrap() - c(4.0)).norm() < 1e-14);
        assert!(matches!(sq.evaluate(c(3.0)), Err(DpwError::OutOfAnnulus { .. })));
    }

    #[test]
    fn grid_examples() {
        let lam = ScalarLoop::monomial(ONE, 1, 3, 2.0);
        let s = lam.to_grid(8).unwrap();
        let back = ScalarLoop::from_grid(&s, 3, 2.0).unwrap();
        for k in -3..=3 {
            let expect = if k == 1 { ONE } else { ZERO };
            assert!((back.coeff(k) - expect).norm() < 1e-12);
        }
        assert!(matches!(ScalarLoop::from_grid(&[ONE; 9], 3, 2.0), Err(DpwError::InvalidGrid(_))));
        assert!(matches!(lam.to_grid(6), Err(DpwError::InvalidGrid(_))));
    }

    #[test]
    fn json_layout() {
        let f = ScalarLoop::monomial(C64::new(1.0, -2.0), 1, 1, 2.0);
        let v: serde_json::Value = serde_json::to_value(&f).unwrap();
        assert_eq!(v["N"], 1);
        assert_eq!(v["coeffs"][2][1], -2.0);
        let g: ScalarLoop = serde_json::from_value(v).unwrap();
        assert_eq!(f, g);
    }
}
