//! Fixed-size complex linear algebra for the 2x2 propagation core.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Column vector in C^2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2c(pub [Complex64; 2]);

/// 2x2 complex matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2c(pub [[Complex64; 2]; 2]);

/// The symplectic unit J = [[0, -1], [1, 0]].
pub const J: Mat2c = Mat2c([
    [C_ZERO, Complex64::new(-1.0, 0.0)],
    [C_ONE, C_ZERO],
]);

impl Vec2c {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        Vec2c([a, b])
    }

    pub fn from_real(a: f64, b: f64) -> Self {
        Vec2c([Complex64::new(a, 0.0), Complex64::new(b, 0.0)])
    }

    pub fn zero() -> Self {
        Vec2c([C_ZERO; 2])
    }

    pub fn conj(self) -> Self {
        Vec2c([self.0[0].conj(), self.0[1].conj()])
    }

    /// Hermitian dot product, conjugate linear in `self`.
    pub fn dot(self, other: Vec2c) -> Complex64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn norm_sq(self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn inf_norm(self) -> f64 {
        self.0[0].norm().max(self.0[1].norm())
    }
}

impl Add for Vec2c {
    type Output = Vec2c;
    fn add(self, rhs: Vec2c) -> Vec2c {
        Vec2c([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }
}

impl Sub for Vec2c {
    type Output = Vec2c;
    fn sub(self, rhs: Vec2c) -> Vec2c {
        Vec2c([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1]])
    }
}

impl Mul<Vec2c> for Complex64 {
    type Output = Vec2c;
    fn mul(self, rhs: Vec2c) -> Vec2c {
        Vec2c([self * rhs.0[0], self * rhs.0[1]])
    }
}

impl Neg for Vec2c {
    type Output = Vec2c;
    fn neg(self) -> Vec2c {
        Vec2c([-self.0[0], -self.0[1]])
    }
}

impl Mat2c {
    #[rustfmt::skip]
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2c([[a, b],
               [c, d]])
    }

    pub fn identity() -> Self {
        Mat2c::new(C_ONE, C_ZERO, C_ZERO, C_ONE)
    }

    pub fn zero() -> Self {
        Mat2c([[C_ZERO; 2]; 2])
    }

    pub fn det(self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(self) -> Self {
        Mat2c::new(self.0[0][0], self.0[1][0], self.0[0][1], self.0[1][1])
    }

    pub fn conj(self) -> Self {
        Mat2c([
            [self.0[0][0].conj(), self.0[0][1].conj()],
            [self.0[1][0].conj(), self.0[1][1].conj()],
        ])
    }

    /// Conjugate transpose.
    pub fn adjoint(self) -> Self {
        self.conj().transpose()
    }

    pub fn inf_norm(self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|e| e.norm())
            .fold(0.0, f64::max)
    }

    pub fn col(self, j: usize) -> Vec2c {
        Vec2c([self.0[0][j], self.0[1][j]])
    }
}

impl Add for Mat2c {
    type Output = Mat2c;
    fn add(self, rhs: Mat2c) -> Mat2c {
        Mat2c([
            [self.0[0][0] + rhs.0[0][0], self.0[0][1] + rhs.0[0][1]],
            [self.0[1][0] + rhs.0[1][0], self.0[1][1] + rhs.0[1][1]],
        ])
    }
}

impl Sub for Mat2c {
    type Output = Mat2c;
    fn sub(self, rhs: Mat2c) -> Mat2c {
        Mat2c([
            [self.0[0][0] - rhs.0[0][0], self.0[0][1] - rhs.0[0][1]],
            [self.0[1][0] - rhs.0[1][0], self.0[1][1] - rhs.0[1][1]],
        ])
    }
}

impl Mul for Mat2c {
    type Output = Mat2c;
    fn mul(self, rhs: Mat2c) -> Mat2c {
        let a = &self.0;
        let b = &rhs.0;
        Mat2c([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Mul<Vec2c> for Mat2c {
    type Output = Vec2c;
    fn mul(self, v: Vec2c) -> Vec2c {
        Vec2c([
            self.0[0][0] * v.0[0] + self.0[0][1] * v.0[1],
            self.0[1][0] * v.0[0] + self.0[1][1] * v.0[1],
        ])
    }
}

impl Mul<Mat2c> for Complex64 {
    type Output = Mat2c;
    fn mul(self, m: Mat2c) -> Mat2c {
        Mat2c([
            [self * m.0[0][0], self * m.0[0][1]],
            [self * m.0[1][0], self * m.0[1][1]],
        ])
    }
}

/// Outer product a b^*, the rank-one matrix mapping v to a (b . v).
pub fn outer_adj(a: Vec2c, b: Vec2c) -> Mat2c {
    Mat2c([
        [a.0[0] * b.0[0].conj(), a.0[0] * b.0[1].conj()],
        [a.0[1] * b.0[0].conj(), a.0[1] * b.0[1].conj()],
    ])
}
