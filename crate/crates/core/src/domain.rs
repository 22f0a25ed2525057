//! Closed intervals and axis-aligned rectangles used as declared domains.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput {
                reason: format!("interval [{lo}, {hi}] must be finite with lo < hi"),
            });
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// n evenly spaced points including both endpoints (n >= 2).  Rounding
    /// may not push points outside the interval.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        (0..n)
            .map(|i| {
                let t = self.lo + self.length() * (i as f64) / ((n - 1) as f64);
                t.clamp(self.lo, self.hi)
            })
            .collect()
    }

    pub fn intersect(&self, other: &Interval) -> Result<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x: Interval,
    pub y: Interval,
}

impl Rect {
    pub fn new(x: Interval, y: Interval) -> Self {
        Rect { x, y }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x.contains(x) && self.y.contains(y)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x.mid(), self.y.mid())
    }

    pub fn intersect(&self, other: &Rect) -> Result<Rect> {
        Ok(Rect {
            x: self.x.intersect(&other.x)?,
            y: self.y.intersect(&other.y)?,
        })
    }

    /// n x n grid including the boundary.
    pub fn grid(&self, n: usize) -> Vec<(f64, f64)> {
        let xs = self.x.samples(n);
        let ys = self.y.samples(n);
        let mut out = Vec::with_capacity(n * n);
        for &x in &xs {
            for &y in &ys {
                out.push((x, y));
            }
        }
        out
    }

    /// Interior grid: like [`Rect::grid`] but shrunk by `margin` of the side
    /// length on each edge, so samples stay strictly inside.
    pub fn interior_grid(&self, n: usize, margin: f64) -> Vec<(f64, f64)> {
        let sx = self.x.length() * margin;
        let sy = self.y.length() * margin;
        let inner = Rect {
            x: Interval {
                lo: self.x.lo + sx,
                hi: self.x.hi - sx,
            },
            y: Interval {
                lo: self.y.lo + sy,
                hi: self.y.hi - sy,
            },
        };
        inner.grid(n)
    }

    pub fn random_points(&self, n: usize, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                (
                    rng.gen_range(self.x.lo..=self.x.hi),
                    rng.gen_range(self.y.lo..=self.y.hi),
                )
            })
            .collect()
    }

    /// The fixed sample set used to validate constructor preconditions:
    /// a 64x64 grid plus 256 random interior points from a fixed seed.
    pub fn validation_samples(&self) -> Vec<(f64, f64)> {
        let mut pts = self.grid(64);
        pts.extend(self.random_points(256, 0x9e3779b97f4a7c15));
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_interval_contains_endpoints() {
        let iv = Interval::new(-1.0, 2.0).unwrap();
        assert!(iv.contains(-1.0));
        assert!(iv.contains(2.0));
        assert!(!iv.contains(2.0 + 1e-12));
    }

    #[test]
    fn degenerate_interval_rejected() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 2.0).is_err());
    }

    #[test]
    fn validation_samples_deterministic() {
        let r = Rect::new(
            Interval::new(0.0, 1.0).unwrap(),
            Interval::new(0.0, 1.0).unwrap(),
        );
        let a = r.validation_samples();
        let b = r.validation_samples();
        assert_eq!(a.len(), 64 * 64 + 256);
        assert_eq!(a, b);
        assert!(a.iter().all(|&(x, y)| r.contains(x, y)));
    }
}
