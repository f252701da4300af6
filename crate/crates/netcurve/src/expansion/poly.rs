//! Polynomial algebra over an abstract coefficient ring, for plane-valued
//! expansion jets. Exact rational coefficients drive the identity-level
//! tests; f64 coefficients drive the numeric pipeline. Exponentially
//! decaying parts are never represented here; they stay sampled.

use num::BigRational;
use num::{One, Signed, Zero};

pub trait Ring: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// division by a nonzero integer (both our rings admit it)
    fn div_int(&self, v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_int(&self, v: i64) -> Self {
        self / v as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Ring for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from(num::BigInt::from(v))
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_int(&self, v: i64) -> Self {
        self / Self::from_i64(v)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        num::ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // fall back through a float ratio for huge numerators
            let n = self.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
            let d = self.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
            n / d
        })
    }
}

/// Scalar polynomial, coefficients from low to high degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<R: Ring>(pub Vec<R>);

impl<R: Ring> Poly<R> {
    pub fn zero() -> Self {
        Poly(vec![])
    }

    pub fn constant(c: R) -> Self {
        Poly(vec![c])
    }

    pub fn monomial(c: R, deg: usize) -> Self {
        let mut v = vec![R::zero(); deg + 1];
        v[deg] = c;
        Poly(v)
    }

    pub fn coeff(&self, i: usize) -> R {
        self.0.get(i).cloned().unwrap_or_else(R::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    pub fn trim(mut self) -> Self {
        while self.0.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.0.pop();
        }
        self
    }

    pub fn add(&self, o: &Poly<R>) -> Poly<R> {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect()).trim()
    }

    pub fn sub(&self, o: &Poly<R>) -> Poly<R> {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|i| self.coeff(i).sub(&o.coeff(i))).collect()).trim()
    }

    pub fn neg(&self) -> Poly<R> {
        Poly(self.0.iter().map(|c| c.neg()).collect())
    }

    pub fn mul(&self, o: &Poly<R>) -> Poly<R> {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![R::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Poly(out).trim()
    }

    pub fn scale(&self, c: &R) -> Poly<R> {
        Poly(self.0.iter().map(|v| v.mul(c)).collect()).trim()
    }

    pub fn derivative(&self) -> Poly<R> {
        if self.0.len() <= 1 {
            return Poly::zero();
        }
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.mul(&R::from_i64(i as i64)))
                .collect(),
        )
        .trim()
    }

    pub fn eval_f64(&self, s: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * s + c.to_f64())
    }

    /// Parity: Some(true) if purely even, Some(false) if purely odd, None if
    /// mixed or zero-ambiguous (zero polynomial counts as both, returns
    /// Some(true)).
    pub fn parity(&self) -> Option<bool> {
        let mut even = true;
        let mut odd = true;
        for (i, c) in self.0.iter().enumerate() {
            if !c.is_zero() {
                if i % 2 == 0 {
                    odd = false;
                } else {
                    even = false;
                }
            }
        }
        match (even, odd) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        }
    }
}

/// Plane-valued polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2<R: Ring> {
    pub x: Poly<R>,
    pub y: Poly<R>,
}

impl<R: Ring> Poly2<R> {
    pub fn zero() -> Self {
        Poly2 { x: Poly::zero(), y: Poly::zero() }
    }

    pub fn monomial(cx: R, cy: R, deg: usize) -> Self {
        Poly2 { x: Poly::monomial(cx, deg), y: Poly::monomial(cy, deg) }
    }

    pub fn degree(&self) -> Option<usize> {
        match (self.x.degree(), self.y.degree()) {
            (None, d) | (d, None) => d,
            (Some(a), Some(b)) => Some(a.max(b)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn add(&self, o: &Poly2<R>) -> Poly2<R> {
        Poly2 { x: self.x.add(&o.x), y: self.y.add(&o.y) }
    }

    pub fn sub(&self, o: &Poly2<R>) -> Poly2<R> {
        Poly2 { x: self.x.sub(&o.x), y: self.y.sub(&o.y) }
    }

    pub fn dot(&self, o: &Poly2<R>) -> Poly<R> {
        self.x.mul(&o.x).add(&self.y.mul(&o.y))
    }

    pub fn mul_scalar_poly(&self, p: &Poly<R>) -> Poly2<R> {
        Poly2 { x: self.x.mul(p), y: self.y.mul(p) }
    }

    pub fn scale(&self, c: &R) -> Poly2<R> {
        Poly2 { x: self.x.scale(c), y: self.y.scale(c) }
    }

    pub fn derivative(&self) -> Poly2<R> {
        Poly2 { x: self.x.derivative(), y: self.y.derivative() }
    }

    pub fn eval_f64(&self, s: f64) -> crate::geom::Vec2 {
        crate::geom::Vec2::new(self.x.eval_f64(s), self.y.eval_f64(s))
    }

    pub fn parity(&self) -> Option<bool> {
        match (self.x.parity(), self.y.parity()) {
            (Some(a), Some(b)) if a == b => Some(a),
            (Some(a), None) if self.y.is_zero() => Some(a),
            (None, Some(b)) if self.x.is_zero() => Some(b),
            _ => None,
        }
    }

    /// coefficient of s^i as a pair
    pub fn coeff(&self, i: usize) -> (R, R) {
        (self.x.coeff(i), self.y.coeff(i))
    }
}

/// Undetermined-coefficients solve of u'' + s u' - lambda u = rhs for
/// polynomials over any ring, with prescribed coefficient at degree lambda.
/// Requires deg rhs <= lambda - 1; the coefficient at degree lambda - 1 is
/// forced and the rest follow downward.
pub fn solve_poly_ring<R: Ring>(
    lambda: usize,
    rhs: &Poly<R>,
    leading: &R,
) -> Result<Poly<R>, String> {
    if let Some(d) = rhs.degree() {
        if d + 1 > lambda {
            return Err(format!("rhs degree {d} too high for lambda {lambda}"));
        }
    }
    let mut a = vec![R::zero(); lambda + 1];
    a[lambda] = leading.clone();
    for i in (0..lambda).rev() {
        let upstream = if i + 2 <= lambda {
            a[i + 2].mul(&R::from_i64(((i + 2) * (i + 1)) as i64))
        } else {
            R::zero()
        };
        a[i] = upstream.sub(&rhs.coeff(i)).div_int((lambda - i) as i64);
    }
    Ok(Poly(a).trim())
}

/// Vector version of `solve_poly_ring` (componentwise).
pub fn solve_poly2_ring<R: Ring>(
    lambda: usize,
    rhs: &Poly2<R>,
    leading: (R, R),
) -> Result<Poly2<R>, String> {
    Ok(Poly2 {
        x: solve_poly_ring(lambda, &rhs.x, &leading.0)?,
        y: solve_poly_ring(lambda, &rhs.y, &leading.1)?,
    })
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(num::BigInt::from(n), num::BigInt::from(d))
}

/// Random small-rational plane polynomial of the given degree (test helper;
/// deterministic in the provided generator).
pub fn random_poly2(
    rng: &mut impl rand::Rng,
    degree: usize,
) -> Poly2<BigRational> {
    let coef = |rng: &mut dyn rand::RngCore| {
        rational(rand::Rng::gen_range(rng, -6..=6), rand::Rng::gen_range(rng, 1..=4))
    };
    Poly2 {
        x: Poly((0..=degree).map(|_| coef(rng)).collect()).trim(),
        y: Poly((0..=degree).map(|_| coef(rng)).collect()).trim(),
    }
}

/// |q| as f64 for diagnostics.
pub fn rational_abs_f64(q: &BigRational) -> f64 {
    q.abs().to_f64()
}
