//! Second-order forward-mode jets over two spatial inputs.

use std::ops::{Add, Mul, Neg, Sub};

/// A scalar with exact first and pure second derivatives with respect to
/// the two spatial inputs `x` and `y`.
///
/// The mixed second derivative is deliberately not carried: the cavity
/// residuals only use `d²/dx²` and `d²/dy²`, and a 5-wide jet is cheaper
/// than a 6-wide one.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub val: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dyy: f64,
}

/// Coordinate seed jets for a point `(x, y)`: the x-jet has `dx = 1`, the
/// y-jet has `dy = 1`, all other derivative slots are zero.
pub fn seed_inputs(x: f64, y: f64) -> (Jet2, Jet2) {
    (Jet2::seed_x(x), Jet2::seed_y(y))
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2::constant(0.0);

    pub const fn constant(val: f64) -> Self {
        Self { val, dx: 0.0, dy: 0.0, dxx: 0.0, dyy: 0.0 }
    }

    pub const fn seed_x(x: f64) -> Self {
        Self { val: x, dx: 1.0, dy: 0.0, dxx: 0.0, dyy: 0.0 }
    }

    pub const fn seed_y(y: f64) -> Self {
        Self { val: y, dx: 0.0, dy: 1.0, dxx: 0.0, dyy: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.val.is_finite()
            && self.dx.is_finite()
            && self.dy.is_finite()
            && self.dxx.is_finite()
            && self.dyy.is_finite()
    }

    pub fn scale(self, c: f64) -> Self {
        Self {
            val: c * self.val,
            dx: c * self.dx,
            dy: c * self.dy,
            dxx: c * self.dxx,
            dyy: c * self.dyy,
        }
    }

    /// sin propagated to second order:
    /// `(sin f)'' = cos(f) f'' - sin(f) (f')²` per direction.
    pub fn sin(self) -> Self {
        let (s, c) = self.val.sin_cos();
        Self {
            val: s,
            dx: c * self.dx,
            dy: c * self.dy,
            dxx: c * self.dxx - s * self.dx * self.dx,
            dyy: c * self.dyy - s * self.dy * self.dy,
        }
    }

    /// cos propagated to second order.
    pub fn cos(self) -> Self {
        let (s, c) = self.val.sin_cos();
        Self {
            val: c,
            dx: -s * self.dx,
            dy: -s * self.dy,
            dxx: -s * self.dxx - c * self.dx * self.dx,
            dyy: -s * self.dyy - c * self.dy * self.dy,
        }
    }
}

impl Add for Jet2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            val: self.val + rhs.val,
            dx: self.dx + rhs.dx,
            dy: self.dy + rhs.dy,
            dxx: self.dxx + rhs.dxx,
            dyy: self.dyy + rhs.dyy,
        }
    }
}

impl Sub for Jet2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            val: self.val - rhs.val,
            dx: self.dx - rhs.dx,
            dy: self.dy - rhs.dy,
            dxx: self.dxx - rhs.dxx,
            dyy: self.dyy - rhs.dyy,
        }
    }
}

impl Neg for Jet2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            val: -self.val,
            dx: -self.dx,
            dy: -self.dy,
            dxx: -self.dxx,
            dyy: -self.dyy,
        }
    }
}

impl Mul for Jet2 {
    type Output = Self;
    /// Product rule to second order:
    /// `(fg)'' = f''g + 2 f'g' + fg''` per direction.
    fn mul(self, rhs: Self) -> Self {
        Self {
            val: self.val * rhs.val,
            dx: self.dx * rhs.val + self.val * rhs.dx,
            dy: self.dy * rhs.val + self.val * rhs.dy,
            dxx: self.dxx * rhs.val + 2.0 * self.dx * rhs.dx + self.val * rhs.dxx,
            dyy: self.dyy * rhs.val + 2.0 * self.dy * rhs.dy + self.val * rhs.dyy,
        }
    }
}
