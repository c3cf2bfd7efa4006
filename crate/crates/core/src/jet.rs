//! First-order jets (value plus derivative with respect to the spectral
//! parameter) over `Complex64`.
//!
//! All characteristic quantities are polynomial or trigonometric in the
//! per-edge solution values, so carrying a jet through the assembly gives
//! exact first derivatives once the shooting layer supplies `dS/dλ` etc.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet {
    pub v: Complex64,
    pub d: Complex64,
}

impl Jet {
    pub const ZERO: Jet = Jet {
        v: Complex64::new(0.0, 0.0),
        d: Complex64::new(0.0, 0.0),
    };

    pub fn new(v: Complex64, d: Complex64) -> Self {
        Self { v, d }
    }

    pub fn constant(v: Complex64) -> Self {
        Self {
            v,
            d: Complex64::new(0.0, 0.0),
        }
    }

    /// The independent variable λ itself.
    pub fn var(lambda: Complex64) -> Self {
        Self {
            v: lambda,
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn sin(self) -> Self {
        Self {
            v: self.v.sin(),
            d: self.v.cos() * self.d,
        }
    }

    pub fn cos(self) -> Self {
        Self {
            v: self.v.cos(),
            d: -self.v.sin() * self.d,
        }
    }

    pub fn scale(self, s: Complex64) -> Self {
        Self {
            v: self.v * s,
            d: self.d * s,
        }
    }

    pub fn recip(self) -> Self {
        let inv = self.v.inv();
        Self {
            v: inv,
            d: -self.d * inv * inv,
        }
    }
}

impl From<f64> for Jet {
    fn from(x: f64) -> Self {
        Jet::constant(Complex64::new(x, 0.0))
    }
}

impl From<Complex64> for Jet {
    fn from(x: Complex64) -> Self {
        Jet::constant(x)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d + o.d)
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, o: Jet) {
        self.v += o.v;
        self.d += o.d;
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d - o.d)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(self.v * o.v, self.v * o.d + self.d * o.v)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let q = self.v / o.v;
        Jet::new(q, (self.d - q * o.d) / o.v)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        Jet::new(self.v * s, self.d * s)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, s: f64) -> Jet {
        Jet::new(self.v + s, self.d)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, s: f64) -> Jet {
        Jet::new(self.v - s, self.d)
    }
}

impl std::iter::Product for Jet {
    fn product<I: Iterator<Item = Jet>>(iter: I) -> Jet {
        iter.fold(Jet::from(1.0), |acc, x| acc * x)
    }
}

impl std::iter::Sum for Jet {
    fn sum<I: Iterator<Item = Jet>>(iter: I) -> Jet {
        iter.fold(Jet::ZERO, |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd<F: Fn(Complex64) -> Complex64>(f: F, z: Complex64) -> Complex64 {
        let h = 1e-6;
        (f(z + h) - f(z - h)) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let z = Complex64::new(0.7, -0.3);
        let j = Jet::var(z);
        let expr = |x: Jet| (x * x).sin() / (x + 2.0) - x.cos() * x;
        let plain = |x: Complex64| (x * x).sin() / (x + 2.0) - x.cos() * x;
        let got = expr(j);
        assert!((got.v - plain(z)).norm() < 1e-14);
        assert!((got.d - fd(plain, z)).norm() < 1e-8);
    }

    #[test]
    fn recip_of_constant_has_zero_derivative() {
        let r = Jet::constant(Complex64::new(2.0, 1.0)).recip();
        assert_eq!(r.d, Complex64::new(0.0, 0.0));
    }
}
