//! North-east-down vector used for positions and velocities.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A 3-vector in the local north-east-down frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Ned {
    pub n: f64,
    pub e: f64,
    pub d: f64,
}

impl Ned {
    pub const ZERO: Ned = Ned { n: 0.0, e: 0.0, d: 0.0 };

    pub const fn new(n: f64, e: f64, d: f64) -> Self {
        Self { n, e, d }
    }

    pub fn norm(&self) -> f64 {
        (self.n * self.n + self.e * self.e + self.d * self.d).sqrt()
    }

    pub fn horizontal_norm(&self) -> f64 {
        self.n.hypot(self.e)
    }

    pub fn dot(&self, other: &Ned) -> f64 {
        self.n * other.n + self.e * other.e + self.d * other.d
    }

    pub fn is_finite(&self) -> bool {
        self.n.is_finite() && self.e.is_finite() && self.d.is_finite()
    }
}

impl From<[f64; 3]> for Ned {
    fn from(v: [f64; 3]) -> Self {
        Ned::new(v[0], v[1], v[2])
    }
}

impl From<Ned> for [f64; 3] {
    fn from(v: Ned) -> Self {
        [v.n, v.e, v.d]
    }
}

impl Add for Ned {
    type Output = Ned;
    fn add(self, rhs: Ned) -> Ned {
        Ned::new(self.n + rhs.n, self.e + rhs.e, self.d + rhs.d)
    }
}

impl AddAssign for Ned {
    fn add_assign(&mut self, rhs: Ned) {
        *self = *self + rhs;
    }
}

impl Sub for Ned {
    type Output = Ned;
    fn sub(self, rhs: Ned) -> Ned {
        Ned::new(self.n - rhs.n, self.e - rhs.e, self.d - rhs.d)
    }
}

impl Mul<f64> for Ned {
    type Output = Ned;
    fn mul(self, k: f64) -> Ned {
        Ned::new(self.n * k, self.e * k, self.d * k)
    }
}

impl Neg for Ned {
    type Output = Ned;
    fn neg(self) -> Ned {
        Ned::new(-self.n, -self.e, -self.d)
    }
}
