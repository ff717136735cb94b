use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense 2×2 integer matrix `[[c1, c2], [c3, c4]]` with arbitrary-precision entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat2Z {
    pub c: [BigInt; 4],
}

impl Mat2Z {
    pub fn new(
        c1: impl Into<BigInt>,
        c2: impl Into<BigInt>,
        c3: impl Into<BigInt>,
        c4: impl Into<BigInt>,
    ) -> Self {
        Mat2Z {
            c: [c1.into(), c2.into(), c3.into(), c4.into()],
        }
    }

    pub fn from_i64(e: [i64; 4]) -> Self {
        Mat2Z::new(e[0], e[1], e[2], e[3])
    }

    pub fn identity() -> Self {
        Mat2Z::from_i64([1, 0, 0, 1])
    }

    pub fn zero() -> Self {
        Mat2Z::from_i64([0, 0, 0, 0])
    }

    pub fn diag(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        Mat2Z::new(a, 0, 0, b)
    }

    pub fn det(&self) -> BigInt {
        &self.c[0] * &self.c[3] - &self.c[1] * &self.c[2]
    }

    pub fn transpose(&self) -> Self {
        let [a, b, c, d] = &self.c;
        Mat2Z::new(a.clone(), c.clone(), b.clone(), d.clone())
    }

    /// Classical adjugate: `self * adj = det * I`.
    pub fn adjugate(&self) -> Self {
        let [a, b, c, d] = &self.c;
        Mat2Z::new(d.clone(), -b, -c, a.clone())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Mat2Z {
            c: self.c.clone().map(|x| x * k),
        }
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    /// Exact inverse of a unimodular matrix.
    pub fn inverse_unimodular(&self) -> Result<Self> {
        let d = self.det();
        if !d.abs().is_one() {
            return Err(Error::Domain(format!("matrix {self} is not unimodular")));
        }
        Ok(self.adjugate().scale(&d))
    }

    /// gcd of the four entries (0 for the zero matrix).
    pub fn content(&self) -> BigInt {
        self.c.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
    }

    pub fn norm_inf(&self) -> BigInt {
        self.c.iter().map(|x| x.abs()).max().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        self.c[1] == self.c[2]
    }

    pub fn to_i64(&self) -> Result<[i64; 4]> {
        let mut out = [0i64; 4];
        for (o, x) in out.iter_mut().zip(&self.c) {
            *o = x
                .to_i64()
                .ok_or_else(|| Error::Range(format!("entry {x} exceeds 64 bits")))?;
        }
        Ok(out)
    }

    pub fn to_f64(&self) -> [f64; 4] {
        self.c.clone().map(|x| x.to_f64().unwrap_or(f64::NAN))
    }

    pub fn row(&self, i: usize) -> [BigInt; 2] {
        [self.c[2 * i].clone(), self.c[2 * i + 1].clone()]
    }

    pub fn col(&self, j: usize) -> [BigInt; 2] {
        [self.c[j].clone(), self.c[2 + j].clone()]
    }
}

impl fmt::Display for Mat2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = &self.c;
        write!(f, "[[{a},{b}],[{c},{d}]]")
    }
}

impl<'a> Mul<&'a Mat2Z> for &'a Mat2Z {
    type Output = Mat2Z;
    fn mul(self, o: &'a Mat2Z) -> Mat2Z {
        let [a, b, c, d] = &self.c;
        let [e, f, g, h] = &o.c;
        Mat2Z::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }
}

impl<'a> Add<&'a Mat2Z> for &'a Mat2Z {
    type Output = Mat2Z;
    fn add(self, o: &'a Mat2Z) -> Mat2Z {
        Mat2Z {
            c: std::array::from_fn(|i| &self.c[i] + &o.c[i]),
        }
    }
}

impl<'a> Sub<&'a Mat2Z> for &'a Mat2Z {
    type Output = Mat2Z;
    fn sub(self, o: &'a Mat2Z) -> Mat2Z {
        Mat2Z {
            c: std::array::from_fn(|i| &self.c[i] - &o.c[i]),
        }
    }
}

impl Neg for &Mat2Z {
    type Output = Mat2Z;
    fn neg(self) -> Mat2Z {
        Mat2Z {
            c: self.c.clone().map(|x| -x),
        }
    }
}

/// Half-integral symmetric matrix `[[a, b/2], [b/2, c]]`, stored as `(a, b, c)`.
///
/// Entries are machine integers: these are user-supplied frequencies at desk
/// scale. Every quantity derived from them is computed in wider or
/// arbitrary-precision arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymHalf2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl SymHalf2 {
    pub const fn new(a: i64, b: i64, c: i64) -> Self {
        SymHalf2 { a, b, c }
    }

    pub fn zero() -> Self {
        SymHalf2::new(0, 0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0 && self.c == 0
    }

    /// `4·det = 4ac − b²`, always an integer.
    pub fn det4(&self) -> i128 {
        4 * self.a as i128 * self.c as i128 - (self.b as i128).pow(2)
    }

    pub fn det(&self) -> f64 {
        self.det4() as f64 / 4.0
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0 && self.det4() > 0
    }

    /// The binary quadratic form `a x² + b xy + c y²`.
    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (x, y) = (x as i128, y as i128);
        self.a as i128 * x * x + self.b as i128 * x * y + self.c as i128 * y * y
    }

    pub fn eval_big(&self, x: &BigInt, y: &BigInt) -> BigInt {
        BigInt::from(self.a) * x * x + BigInt::from(self.b) * x * y + BigInt::from(self.c) * y * y
    }

    /// `M · self · Mᵗ` (rows of `M` become the new basis vectors).
    pub fn congruence(&self, m: &Mat2Z) -> Result<SymHalf2> {
        let [m1, m2, m3, m4] = &m.c;
        let two = BigInt::from(2);
        let a = self.eval_big(m1, m2);
        let c = self.eval_big(m3, m4);
        let b = &two * BigInt::from(self.a) * m1 * m3
            + BigInt::from(self.b) * (m1 * m4 + m2 * m3)
            + &two * BigInt::from(self.c) * m2 * m4;
        let fit = |x: BigInt| {
            x.to_i64()
                .ok_or_else(|| Error::Range(format!("form coefficient {x} exceeds 64 bits")))
        };
        Ok(SymHalf2::new(fit(a)?, fit(b)?, fit(c)?))
    }

    pub fn neg(&self) -> SymHalf2 {
        SymHalf2::new(-self.a, -self.b, -self.c)
    }

    pub fn norm_inf(&self) -> i64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }

    /// The real symmetric matrix `[[a, b/2], [b/2, c]]`.
    pub fn to_real(&self) -> crate::arith::SymReal2 {
        crate::arith::SymReal2::new(self.a as f64, self.b as f64 / 2.0, self.c as f64)
    }
}

impl fmt::Display for SymHalf2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

/// Dense 4×4 integer matrix, row-major, arbitrary precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat4Z {
    pub e: [[BigInt; 4]; 4],
}

impl Mat4Z {
    pub fn from_blocks(a: &Mat2Z, b: &Mat2Z, c: &Mat2Z, d: &Mat2Z) -> Self {
        let blk = |m: &Mat2Z, i: usize, j: usize| m.c[2 * i + j].clone();
        Mat4Z {
            e: std::array::from_fn(|i| {
                std::array::from_fn(|j| match (i < 2, j < 2) {
                    (true, true) => blk(a, i, j),
                    (true, false) => blk(b, i, j - 2),
                    (false, true) => blk(c, i - 2, j),
                    (false, false) => blk(d, i - 2, j - 2),
                })
            }),
        }
    }

    pub fn from_i64(e: [[i64; 4]; 4]) -> Self {
        Mat4Z {
            e: e.map(|r| r.map(BigInt::from)),
        }
    }

    pub fn identity() -> Self {
        Mat4Z {
            e: std::array::from_fn(|i| {
                std::array::from_fn(|j| if i == j { BigInt::one() } else { BigInt::zero() })
            }),
        }
    }

    /// The standard symplectic form `[[0, I], [−I, 0]]`.
    pub fn j() -> Self {
        let z = Mat2Z::zero();
        let i = Mat2Z::identity();
        Mat4Z::from_blocks(&z, &i, &(-&i), &z)
    }

    pub fn block(&self, bi: usize, bj: usize) -> Mat2Z {
        let (r, c) = (2 * bi, 2 * bj);
        Mat2Z::new(
            self.e[r][c].clone(),
            self.e[r][c + 1].clone(),
            self.e[r + 1][c].clone(),
            self.e[r + 1][c + 1].clone(),
        )
    }

    pub fn transpose(&self) -> Self {
        Mat4Z {
            e: std::array::from_fn(|i| std::array::from_fn(|j| self.e[j][i].clone())),
        }
    }

    pub fn to_f64(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.e[i][j].to_f64().unwrap_or(f64::NAN)))
    }
}

impl<'a> Mul<&'a Mat4Z> for &'a Mat4Z {
    type Output = Mat4Z;
    fn mul(self, o: &'a Mat4Z) -> Mat4Z {
        Mat4Z {
            e: std::array::from_fn(|i| {
                std::array::from_fn(|j| (0..4).map(|k| &self.e[i][k] * &o.e[k][j]).sum())
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_adjugate() {
        let m = Mat2Z::from_i64([2, 1, 0, 3]);
        assert_eq!(m.det(), BigInt::from(6));
        assert_eq!(&m * &m.adjugate(), Mat2Z::diag(6, 6));
    }

    #[test]
    fn det_does_not_wrap() {
        let big: BigInt = BigInt::from(i64::MAX) * 4;
        let m = Mat2Z::new(big.clone(), 1, 0, big.clone());
        assert_eq!(m.det(), &big * &big);
        assert!(m.to_i64().is_err());
    }

    #[test]
    fn congruence_matches_matrix_product() {
        let q = SymHalf2::new(1, 1, 3);
        let u = Mat2Z::from_i64([1, 2, -1, 3]);
        let f = q.congruence(&u).unwrap();
        // f(x, y) must equal q((x, y)·U).
        for (x, y) in [(1, 0), (0, 1), (2, -3), (5, 7)] {
            let xu = x * 1 + y * -1;
            let yu = x * 2 + y * 3;
            assert_eq!(f.eval(x, y), q.eval(xu, yu));
        }
    }

    #[test]
    fn positive_definite_test() {
        assert!(SymHalf2::new(1, 0, 1).is_positive_definite());
        assert!(!SymHalf2::new(1, 2, 1).is_positive_definite());
        assert!(!SymHalf2::new(-1, 0, -1).is_positive_definite());
    }
}
