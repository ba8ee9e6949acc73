//! Points of the plane identified with complex numbers.
//!
//! Throughout the crate `R^2` is identified with `C`: the vertical unit
//! `i = (0, 1)` doubles as the imaginary unit, products like `ω θ A` or
//! `ω (A m + i)` are complex multiplications, and `*` is complex
//! conjugation. All other modules rely on this identification.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// A point of the plane / a complex number. `x` is the real part, `y` the
/// imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlaneVec {
    pub x: f64,
    pub y: f64,
}

pub const ZERO: PlaneVec = PlaneVec { x: 0.0, y: 0.0 };
pub const ONE: PlaneVec = PlaneVec { x: 1.0, y: 0.0 };
/// The vertical unit, also the imaginary unit.
pub const I: PlaneVec = PlaneVec { x: 0.0, y: 1.0 };

impl PlaneVec {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Complex conjugate.
    pub fn conj(self) -> Self {
        Self::new(self.x, -self.y)
    }

    /// Counter-clockwise quarter turn, `i * self`.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    /// Euclidean dot product.
    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Complex division `self / d`.
    ///
    /// Returns `None` when the denominator is exactly zero.
    pub fn cdiv(self, d: Self) -> Option<Self> {
        let n2 = d.norm_sq();
        if n2 == 0.0 {
            return None;
        }
        Some(self * d.conj() * (1.0 / n2))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for PlaneVec {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for PlaneVec {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for PlaneVec {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for PlaneVec {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl Neg for PlaneVec {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Complex product.
impl Mul for PlaneVec {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.x * o.x - self.y * o.y, self.x * o.y + self.y * o.x)
    }
}

impl Mul<f64> for PlaneVec {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Mul<PlaneVec> for f64 {
    type Output = PlaneVec;
    fn mul(self, v: PlaneVec) -> PlaneVec {
        v * self
    }
}

impl Div<f64> for PlaneVec {
    type Output = Self;
    fn div(self, s: f64) -> Self {
        Self::new(self.x / s, self.y / s)
    }
}

impl From<(f64, f64)> for PlaneVec {
    fn from((x, y): (f64, f64)) -> Self {
        Self::new(x, y)
    }
}

impl fmt::Display for PlaneVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}
