//! Forward-mode jets of order 3 in one variable.
//!
//! A [`Jet`] carries a value together with first, second, and third
//! derivatives with respect to a single independent variable.  Arithmetic
//! follows the Leibniz rule through order 3 and elementary functions are
//! composed with Faa di Bruno's formula.  Fields hold derivative values,
//! not Taylor coefficients.
//!
//! The scalar type is generic so the same evaluator serves real profiles
//! (`f64`) and holomorphic profiles (`Complex64`); for a holomorphic
//! function the derivative slots are the complex derivatives d^k h / dz^k.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// Scalar admissible as the coefficient field of a [`Jet`].
pub trait JetScalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(v: f64) -> Self;
    fn is_finite(self) -> bool;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    /// Principal power with an arbitrary real exponent.
    fn powf(self, e: f64) -> Self;
}

impl JetScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
}

impl JetScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn sin(self) -> Self {
        Complex64::sin(self)
    }
    fn cos(self) -> Self {
        Complex64::cos(self)
    }
    fn tan(self) -> Self {
        Complex64::tan(self)
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    fn sinh(self) -> Self {
        Complex64::sinh(self)
    }
    fn cosh(self) -> Self {
        Complex64::cosh(self)
    }
    fn powf(self, e: f64) -> Self {
        Complex64::powf(self, e)
    }
}

/// Value plus derivatives of order 1..3 with respect to one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T> {
    pub v: T,
    pub d1: T,
    pub d2: T,
    pub d3: T,
}

impl<T: JetScalar> Jet<T> {
    pub fn constant(v: T) -> Self {
        Jet {
            v,
            d1: T::zero(),
            d2: T::zero(),
            d3: T::zero(),
        }
    }

    /// Seed for the independent variable: derivative 1, higher orders 0.
    pub fn variable(v: T) -> Self {
        Jet {
            v,
            d1: T::one(),
            d2: T::zero(),
            d3: T::zero(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite() && self.d3.is_finite()
    }

    /// Chain rule through order 3: `g` is described by its derivatives
    /// (g0..g3) at the point `self.v`.
    fn compose(self, g0: T, g1: T, g2: T, g3: T) -> Self {
        let f1 = self.d1;
        let f2 = self.d2;
        let f3 = self.d3;
        Jet {
            v: g0,
            d1: g1 * f1,
            d2: g2 * f1 * f1 + g1 * f2,
            d3: g3 * f1 * f1 * f1 + (g2 * f1 * f2) * T::from_f64(3.0) + g1 * f3,
        }
    }

    pub fn sin(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.compose(s, c, -s, -c)
    }

    pub fn cos(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.compose(c, -s, -c, s)
    }

    pub fn tan(self) -> Self {
        let t = self.v.tan();
        let sec2 = T::one() + t * t;
        // d/dx tan = sec^2, then differentiate sec^2 = 1 + tan^2.
        let d2 = T::from_f64(2.0) * t * sec2;
        let d3 = T::from_f64(2.0) * sec2 * (sec2 + T::from_f64(2.0) * t * t);
        self.compose(t, sec2, d2, d3)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e, e)
    }

    pub fn ln(self) -> Self {
        let v = self.v;
        let inv = T::one() / v;
        let inv2 = inv * inv;
        self.compose(v.ln(), inv, -inv2, T::from_f64(2.0) * inv2 * inv)
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let g1 = T::from_f64(0.5) / s;
        let g2 = -g1 / (T::from_f64(2.0) * self.v);
        let g3 = T::from_f64(3.0) * g1 / (T::from_f64(4.0) * self.v * self.v);
        self.compose(s, g1, g2, g3)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.compose(s, c, s, c)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.compose(c, s, c, s)
    }

    /// Integer power by the direct derivative formula; valid for any base,
    /// including negative real bases.
    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Jet::constant(T::one());
        }
        let v = self.v;
        // Zero falling-factorial coefficients kill the whole term; they must
        // short-circuit, or 0 * v^{negative} turns into NaN at v = 0.
        let c1 = n as i64;
        let c2 = c1 * (n as i64 - 1);
        let c3 = c2 * (n as i64 - 2);
        let term = |c: i64, k: i32| {
            if c == 0 {
                T::zero()
            } else {
                T::from_f64(c as f64) * pow_scalar(v, k)
            }
        };
        let g0 = pow_scalar(v, n);
        let g1 = term(c1, n - 1);
        let g2 = term(c2, n - 2);
        let g3 = term(c3, n - 3);
        self.compose(g0, g1, g2, g3)
    }

    /// Real-exponent power through the derivative formula for the principal
    /// branch.
    pub fn powf(self, e: f64) -> Self {
        let v = self.v;
        let g0 = v.powf(e);
        let g1 = T::from_f64(e) * v.powf(e - 1.0);
        let g2 = T::from_f64(e * (e - 1.0)) * v.powf(e - 2.0);
        let g3 = T::from_f64(e * (e - 1.0) * (e - 2.0)) * v.powf(e - 3.0);
        self.compose(g0, g1, g2, g3)
    }
}

fn pow_scalar<T: JetScalar>(v: T, n: i32) -> T {
    if n == 0 {
        return T::one();
    }
    let neg = n < 0;
    let mut k = n.unsigned_abs();
    let mut base = v;
    let mut acc = T::one();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        k >>= 1;
    }
    if neg {
        T::one() / acc
    } else {
        acc
    }
}

impl<T: JetScalar> Add for Jet<T> {
    type Output = Jet<T>;
    fn add(self, o: Jet<T>) -> Jet<T> {
        Jet {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
            d3: self.d3 + o.d3,
        }
    }
}

impl<T: JetScalar> Sub for Jet<T> {
    type Output = Jet<T>;
    fn sub(self, o: Jet<T>) -> Jet<T> {
        Jet {
            v: self.v - o.v,
            d1: self.d1 - o.d1,
            d2: self.d2 - o.d2,
            d3: self.d3 - o.d3,
        }
    }
}

impl<T: JetScalar> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        Jet {
            v: -self.v,
            d1: -self.d1,
            d2: -self.d2,
            d3: -self.d3,
        }
    }
}

impl<T: JetScalar> Mul for Jet<T> {
    type Output = Jet<T>;
    fn mul(self, o: Jet<T>) -> Jet<T> {
        let three = T::from_f64(3.0);
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + T::from_f64(2.0) * self.d1 * o.d1 + self.v * o.d2,
            d3: self.d3 * o.v + three * self.d2 * o.d1 + three * self.d1 * o.d2 + self.v * o.d3,
        }
    }
}

impl<T: JetScalar> Div for Jet<T> {
    type Output = Jet<T>;
    fn div(self, o: Jet<T>) -> Jet<T> {
        // Solve q*o = self order by order.
        let three = T::from_f64(3.0);
        let q0 = self.v / o.v;
        let q1 = (self.d1 - q0 * o.d1) / o.v;
        let q2 = (self.d2 - T::from_f64(2.0) * q1 * o.d1 - q0 * o.d2) / o.v;
        let q3 = (self.d3 - three * q2 * o.d1 - three * q1 * o.d2 - q0 * o.d3) / o.v;
        Jet {
            v: q0,
            d1: q1,
            d2: q2,
            d3: q3,
        }
    }
}
