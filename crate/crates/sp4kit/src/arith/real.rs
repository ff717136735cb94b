//! Small real and complex matrices and the Iwasawa coordinates of positive
//! definite 2×2 matrices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2R = [[f64; 2]; 2];
pub type Mat4R = [[f64; 4]; 4];

/// Real symmetric matrix `[[y1, y2], [y2, y3]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymReal2 {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
}

impl SymReal2 {
    pub const fn new(y1: f64, y2: f64, y3: f64) -> Self {
        SymReal2 { y1, y2, y3 }
    }

    pub fn identity() -> Self {
        SymReal2::new(1.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.y1 * self.y3 - self.y2 * self.y2
    }

    pub fn trace(&self) -> f64 {
        self.y1 + self.y3
    }

    pub fn is_positive_definite(&self) -> bool {
        self.y1 > 0.0 && self.det() > 0.0
    }

    pub fn to_mat(&self) -> Mat2R {
        [[self.y1, self.y2], [self.y2, self.y3]]
    }

    /// Symmetrizes an arbitrary 2×2 matrix.
    pub fn from_mat(m: &Mat2R) -> Self {
        SymReal2::new(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1])
    }

    /// `Tr(self · other)` for symmetric arguments.
    pub fn trace_prod(&self, o: &SymReal2) -> f64 {
        self.y1 * o.y1 + 2.0 * self.y2 * o.y2 + self.y3 * o.y3
    }

    pub fn max_abs(&self) -> f64 {
        self.y1.abs().max(self.y2.abs()).max(self.y3.abs())
    }

    pub fn scale(&self, k: f64) -> Self {
        SymReal2::new(k * self.y1, k * self.y2, k * self.y3)
    }

    /// Eigenvalues in increasing order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * (self.y1 + self.y3);
        let r = (0.25 * (self.y1 - self.y3).powi(2) + self.y2 * self.y2).sqrt();
        (m - r, m + r)
    }
}

/// Iwasawa coordinates `Y = [[r1 + u² r2, u r2], [u r2, r2]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IwasawaCoords {
    pub u: f64,
    pub r1: f64,
    pub r2: f64,
}

impl IwasawaCoords {
    pub fn to_sym(&self) -> SymReal2 {
        SymReal2::new(self.r1 + self.u * self.u * self.r2, self.u * self.r2, self.r2)
    }

    /// Upper-triangular `R` with positive diagonal and `R Rᵗ = Y`.
    pub fn r_matrix(&self) -> Mat2R {
        let s2 = self.r2.sqrt();
        [[self.r1.sqrt(), self.u * s2], [0.0, s2]]
    }
}

/// Iwasawa coordinates of a positive definite `Y`.
pub fn iota_inverse(y: &SymReal2) -> Result<IwasawaCoords> {
    if !(y.y3 > 0.0) || !(y.det() > 0.0) || !y.y1.is_finite() || !y.y2.is_finite() {
        return Err(Error::Domain(format!("{y:?} is not positive definite")));
    }
    let r2 = y.y3;
    let u = y.y2 / y.y3;
    // r1 = det / y3 is the cancellation-free form of y1 − y2²/y3.
    let r1 = y.det() / y.y3;
    Ok(IwasawaCoords { u, r1, r2 })
}

pub fn mat2_mul(a: &Mat2R, b: &Mat2R) -> Mat2R {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub fn mat2_transpose(a: &Mat2R) -> Mat2R {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

pub fn mat2_det(a: &Mat2R) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn mat2_inv(a: &Mat2R) -> Result<Mat2R> {
    let d = mat2_det(a);
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if d == 0.0 || d.abs() <= 1e-14 * scale * scale {
        return Err(Error::Conditioning(format!("2x2 block {a:?} is numerically singular")));
    }
    Ok([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]])
}

/// `M · S · Mᵗ`.
pub fn congruence_real(m: &Mat2R, s: &SymReal2) -> SymReal2 {
    let p = mat2_mul(&mat2_mul(m, &s.to_mat()), &mat2_transpose(m));
    SymReal2::from_mat(&p)
}

/// The canonical representative of `M·SO₂(ℝ)`: the upper-triangular matrix with
/// positive diagonal and the same `M Mᵗ`.
pub fn canonical_upper(m: &Mat2R) -> Result<Mat2R> {
    let y = SymReal2::from_mat(&mat2_mul(m, &mat2_transpose(m)));
    Ok(iota_inverse(&y)?.r_matrix())
}

/// Complex 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat2(pub [[Complex64; 2]; 2]);

impl CMat2 {
    pub fn from_parts(re: &Mat2R, im: &Mat2R) -> Self {
        CMat2(std::array::from_fn(|i| {
            std::array::from_fn(|j| Complex64::new(re[i][j], im[i][j]))
        }))
    }

    pub fn from_real(re: &Mat2R) -> Self {
        CMat2::from_parts(re, &[[0.0; 2]; 2])
    }

    pub fn mul(&self, o: &CMat2) -> CMat2 {
        let (a, b) = (&self.0, &o.0);
        CMat2(std::array::from_fn(|i| {
            std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j])
        }))
    }

    pub fn add(&self, o: &CMat2) -> CMat2 {
        CMat2(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] + o.0[i][j])))
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn inv(&self) -> Result<CMat2> {
        let d = self.det();
        let scale = self.0.iter().flatten().fold(0.0f64, |m, x| m.max(x.norm()));
        if d.norm() <= 1e-14 * scale * scale || d.norm() == 0.0 {
            return Err(Error::Conditioning("complex 2x2 block is numerically singular".into()));
        }
        let m = &self.0;
        Ok(CMat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    pub fn re(&self) -> Mat2R {
        std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j].re))
    }

    pub fn im(&self) -> Mat2R {
        std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j].im))
    }
}
