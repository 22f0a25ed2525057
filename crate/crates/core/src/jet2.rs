//! Second-order jets in two variables.
//!
//! [`Jet2`] carries a value with the gradient and Hessian with respect to
//! the plane coordinates (x, y).  Metric components, quadratic-form
//! coefficients, and potentials are all evaluated as `Jet2`s so that
//! Christoffel symbols, Hamiltonian gradients, and the Killing PDE
//! residuals come out of plain arithmetic instead of finite differences.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 {
            v,
            ..Default::default()
        }
    }

    pub fn var_x(x: f64) -> Self {
        Jet2 {
            v: x,
            dx: 1.0,
            ..Default::default()
        }
    }

    pub fn var_y(y: f64) -> Self {
        Jet2 {
            v: y,
            dy: 1.0,
            ..Default::default()
        }
    }

    /// Lift a univariate jet of f(x) into the plane (no y-dependence).
    pub fn from_x_jet(j: Jet<f64>) -> Self {
        Jet2 {
            v: j.v,
            dx: j.d1,
            dy: 0.0,
            dxx: j.d2,
            dxy: 0.0,
            dyy: 0.0,
        }
    }

    /// Lift a univariate jet of f(y) into the plane (no x-dependence).
    pub fn from_y_jet(j: Jet<f64>) -> Self {
        Jet2 {
            v: j.v,
            dx: 0.0,
            dy: j.d1,
            dxx: 0.0,
            dxy: 0.0,
            dyy: j.d2,
        }
    }

    /// Jets of a univariate f evaluated along the line t = cx*x + cy*y.
    pub fn from_linear_composition(j: Jet<f64>, cx: f64, cy: f64) -> Self {
        Jet2 {
            v: j.v,
            dx: j.d1 * cx,
            dy: j.d1 * cy,
            dxx: j.d2 * cx * cx,
            dxy: j.d2 * cx * cy,
            dyy: j.d2 * cy * cy,
        }
    }

    /// Real part of a holomorphic jet h(z), z = x + i y, as a plane field.
    ///
    /// Cauchy-Riemann gives d(Re h) = (Re h', -Im h') and the second-order
    /// slots follow from differentiating h' the same way.
    pub fn re_part(h: Jet<Complex64>) -> Self {
        Jet2 {
            v: h.v.re,
            dx: h.d1.re,
            dy: -h.d1.im,
            dxx: h.d2.re,
            dxy: -h.d2.im,
            dyy: -h.d2.re,
        }
    }

    /// Imaginary part of a holomorphic jet as a plane field.
    pub fn im_part(h: Jet<Complex64>) -> Self {
        Jet2 {
            v: h.v.im,
            dx: h.d1.im,
            dy: h.d1.re,
            dxx: h.d2.im,
            dxy: h.d2.re,
            dyy: -h.d2.im,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.dx.is_finite()
            && self.dy.is_finite()
            && self.dxx.is_finite()
            && self.dxy.is_finite()
            && self.dyy.is_finite()
    }

    pub fn scale(self, c: f64) -> Self {
        Jet2 {
            v: c * self.v,
            dx: c * self.dx,
            dy: c * self.dy,
            dxx: c * self.dxx,
            dxy: c * self.dxy,
            dyy: c * self.dyy,
        }
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let dx = self.dx / (2.0 * s);
        let dy = self.dy / (2.0 * s);
        Jet2 {
            v: s,
            dx,
            dy,
            dxx: (self.dxx - 2.0 * dx * dx) / (2.0 * s),
            dxy: (self.dxy - 2.0 * dx * dy) / (2.0 * s),
            dyy: (self.dyy - 2.0 * dy * dy) / (2.0 * s),
        }
    }

    pub fn recip(self) -> Self {
        Jet2::constant(1.0) / self
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        Jet2 {
            v: e,
            dx: e * self.dx,
            dy: e * self.dy,
            dxx: e * (self.dxx + self.dx * self.dx),
            dxy: e * (self.dxy + self.dx * self.dy),
            dyy: e * (self.dyy + self.dy * self.dy),
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxx: self.dxx + o.dxx,
            dxy: self.dxy + o.dxy,
            dyy: self.dyy + o.dyy,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v - o.v,
            dx: self.dx - o.dx,
            dy: self.dy - o.dy,
            dxx: self.dxx - o.dxx,
            dxy: self.dxy - o.dxy,
            dyy: self.dyy - o.dyy,
        }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
            dxx: self.dxx * o.v + 2.0 * self.dx * o.dx + self.v * o.dxx,
            dxy: self.dxy * o.v + self.dx * o.dy + self.dy * o.dx + self.v * o.dxy,
            dyy: self.dyy * o.v + 2.0 * self.dy * o.dy + self.v * o.dyy,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        // Solve q*o = self slot by slot.
        let q = self.v / o.v;
        let qx = (self.dx - q * o.dx) / o.v;
        let qy = (self.dy - q * o.dy) / o.v;
        Jet2 {
            v: q,
            dx: qx,
            dy: qy,
            dxx: (self.dxx - 2.0 * qx * o.dx - q * o.dxx) / o.v,
            dxy: (self.dxy - qx * o.dy - qy * o.dx - q * o.dxy) / o.v,
            dyy: (self.dyy - 2.0 * qy * o.dy - q * o.dyy) / o.v,
        }
    }
}
