//! Truncated Laurent series in the regularization parameter ε.
//!
//! A series carries its coefficients from the most negative power up to the
//! highest power whose coefficient is still trustworthy. Every operation
//! propagates that reliable order, so a finite part can never be read from a
//! coefficient that a truncation has silently corrupted.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Coefficient field for [`LaurentSeries`].
///
/// `f64` is the working type. Oracle runs can plug in an exact or extended
/// precision type by implementing this trait.
pub trait Scalar:
    Copy
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_finite(&self) -> bool;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Laurent series `Σ c_k ε^k` for `min_order ≤ k ≤ max_reliable_order`.
///
/// Canonical form: the coefficient at `min_order` is nonzero. The zero series
/// has no stored coefficients and reports `min_order() == 0`; it still keeps
/// the order up to which it is known to vanish.
#[derive(Clone, PartialEq)]
pub struct LaurentSeries<T = f64> {
    min_order: i32,
    max_reliable: i32,
    coeffs: Vec<T>,
}

impl<T: Scalar> LaurentSeries<T> {
    /// Builds `Σ coeffs[i] ε^(min_order + i)`, reliable through the last
    /// supplied coefficient.
    pub fn new(min_order: i32, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        let max_reliable = min_order + coeffs.len() as i32 - 1;
        Self::with_reliable_order(min_order, coeffs, max_reliable)
    }

    /// Builds a series whose reliable window ends at `max_reliable`.
    ///
    /// Coefficients above `max_reliable` are dropped. Missing coefficients up
    /// to `max_reliable` are taken to be exactly zero.
    pub fn with_reliable_order(
        min_order: i32,
        mut coeffs: Vec<T>,
        max_reliable: i32,
    ) -> Result<Self> {
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite {
                    order: min_order + i as i32,
                    value: c.to_f64(),
                });
            }
        }
        let window = (max_reliable - min_order + 1).max(0) as usize;
        coeffs.resize(window, T::zero());
        Ok(Self::from_parts(min_order, coeffs, max_reliable))
    }

    /// The zero series, known to vanish through `max_reliable`.
    pub fn zero(max_reliable: i32) -> Self {
        Self {
            min_order: 0,
            max_reliable,
            coeffs: Vec::new(),
        }
    }

    /// A constant series reliable through `max_reliable` (clamped at 0).
    pub fn constant(value: T, max_reliable: i32) -> Self {
        let max_reliable = max_reliable.max(0);
        let mut coeffs = vec![T::zero(); max_reliable as usize + 1];
        coeffs[0] = value;
        Self::from_parts(0, coeffs, max_reliable)
    }

    // Canonicalizes: strips exact leading zeros inside the reliable window.
    fn from_parts(min_order: i32, mut coeffs: Vec<T>, max_reliable: i32) -> Self {
        let lead = coeffs.iter().position(|c| *c != T::zero());
        match lead {
            None => Self::zero(max_reliable),
            Some(skip) => {
                coeffs.drain(..skip);
                Self {
                    min_order: min_order + skip as i32,
                    max_reliable,
                    coeffs,
                }
            }
        }
    }

    pub fn min_order(&self) -> i32 {
        self.min_order
    }

    pub fn max_reliable_order(&self) -> i32 {
        self.max_reliable
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(order, coefficient)` pairs across the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (i32, T)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.min_order + i as i32, *c))
    }

    // Lowest order that can hold a nonzero coefficient. For the zero series
    // nothing nonzero is known below max_reliable + 1.
    fn effective_min(&self) -> i32 {
        if self.is_zero() {
            self.max_reliable + 1
        } else {
            self.min_order
        }
    }

    /// Coefficient of `ε^k`.
    ///
    /// Orders below the leading term are exact zeros. Orders above the reliable
    /// window are an error, never a silent zero.
    pub fn coeff_at(&self, k: i32) -> Result<T> {
        if k > self.max_reliable {
            return Err(Error::OutOfRange {
                order: k,
                min: self.min_order,
                max: self.max_reliable,
            });
        }
        if k < self.min_order || self.is_zero() {
            return Ok(T::zero());
        }
        Ok(self.coeffs[(k - self.min_order) as usize])
    }

    /// Finite part: the `ε^0` coefficient.
    pub fn finite_part(&self) -> Result<T> {
        self.coeff_at(0)
    }

    /// Lowers the reliable order to `max_reliable` (no-op if already lower).
    pub fn truncate(&self, max_reliable: i32) -> Self {
        if max_reliable >= self.max_reliable {
            return self.clone();
        }
        if self.is_zero() || max_reliable < self.min_order {
            return Self::zero(max_reliable);
        }
        let keep = (max_reliable - self.min_order + 1) as usize;
        Self::from_parts(self.min_order, self.coeffs[..keep].to_vec(), max_reliable)
    }

    pub fn scale(&self, factor: T) -> Self {
        let coeffs = self.coeffs.iter().map(|c| *c * factor).collect();
        Self::from_parts(self.min_order, coeffs, self.max_reliable)
    }

    pub fn add(&self, other: &Self) -> Self {
        let max = self.max_reliable.min(other.max_reliable);
        let lo = self.effective_min().min(other.effective_min());
        if lo > max {
            return Self::zero(max);
        }
        let coeffs = (lo..=max).map(|k| self.raw(k) + other.raw(k)).collect();
        Self::from_parts(lo, coeffs, max)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            min_order: self.min_order,
            max_reliable: self.max_reliable,
            coeffs: self.coeffs.iter().map(|c| -*c).collect(),
        }
    }

    /// Cauchy product. A coefficient is reported only if no truncated
    /// coefficient of either factor can contribute to it.
    pub fn mul(&self, other: &Self) -> Self {
        let (amin, bmin) = (self.effective_min(), other.effective_min());
        let max = (self.max_reliable + bmin).min(other.max_reliable + amin);
        if self.is_zero() || other.is_zero() {
            return Self::zero(max);
        }
        let lo = amin + bmin;
        if lo > max {
            return Self::zero(max);
        }
        let len = (max - lo + 1) as usize;
        let mut out = vec![T::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                out[i + j] = out[i + j] + *a * *b;
            }
        }
        Self::from_parts(lo, out, max)
    }

    /// `self^p` by binary exponentiation; `p = 0` gives the constant 1 with
    /// reliability `max_reliable_order - min_order`.
    pub fn pow_int(&self, p: u32) -> Self {
        if p == 0 {
            return Self::constant(T::one(), self.max_reliable - self.min_order);
        }
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        let mut e = p;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        acc.expect("p > 0")
    }

    fn raw(&self, k: i32) -> T {
        if self.is_zero() || k < self.min_order || k > self.max_reliable {
            return T::zero();
        }
        self.coeffs[(k - self.min_order) as usize]
    }
}

impl<T: Scalar> fmt::Debug for LaurentSeries<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0 + O(eps^{})", self.max_reliable + 1);
        }
        for (k, c) in self.iter() {
            write!(f, "{:?}*eps^{} + ", c, k)?;
        }
        write!(f, "O(eps^{})", self.max_reliable + 1)
    }
}

impl<T: Scalar> Add for &LaurentSeries<T> {
    type Output = LaurentSeries<T>;
    fn add(self, rhs: Self) -> LaurentSeries<T> {
        LaurentSeries::add(self, rhs)
    }
}

impl<T: Scalar> Sub for &LaurentSeries<T> {
    type Output = LaurentSeries<T>;
    fn sub(self, rhs: Self) -> LaurentSeries<T> {
        LaurentSeries::sub(self, rhs)
    }
}

impl<T: Scalar> Mul for &LaurentSeries<T> {
    type Output = LaurentSeries<T>;
    fn mul(self, rhs: Self) -> LaurentSeries<T> {
        LaurentSeries::mul(self, rhs)
    }
}

impl<T: Scalar> Neg for &LaurentSeries<T> {
    type Output = LaurentSeries<T>;
    fn neg(self) -> LaurentSeries<T> {
        LaurentSeries::neg(self)
    }
}

/// Taylor expansion of `mu^(-a ε)`: coefficients `(-a ln mu)^j / j!` for
/// `j = 0..=order`.
pub fn mu_power_factor(mu: f64, a: u32, order: u32) -> Result<LaurentSeries> {
    crate::error::check_positive("mu", mu)?;
    let x = -(a as f64) * mu.ln();
    let mut coeffs = Vec::with_capacity(order as usize + 1);
    let mut term = 1.0;
    for j in 0..=order {
        if j > 0 {
            term *= x / j as f64;
        }
        coeffs.push(term);
    }
    LaurentSeries::new(0, coeffs)
}
