use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::real::{iota_inverse, CMat2, Mat2R, Mat4R, SymReal2};
use super::snf::{mat_vec, MatZ, SmithForm};
use super::{Mat2Z, Mat4Z};
use crate::error::{domain, Error, Result};

/// An element of Sp₄(ℤ) in block form `[[A, B], [C, D]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sp4Element {
    pub a: Mat2Z,
    pub b: Mat2Z,
    pub c: Mat2Z,
    pub d: Mat2Z,
}

impl Sp4Element {
    pub fn to_mat4(&self) -> Mat4Z {
        Mat4Z::from_blocks(&self.a, &self.b, &self.c, &self.d)
    }
}

/// True iff `gᵗ J g = J` exactly.
pub fn is_sp4(g: &Mat4Z) -> bool {
    let j = Mat4Z::j();
    &(&g.transpose() * &j) * g == j
}

/// Why a bottom row `(C, D)` cannot be completed to an element of Sp₄(ℤ).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompletionFailure {
    #[error("C·Dᵗ is not symmetric")]
    NotSymmetric,
    #[error("the 2×4 block (C D) is not primitive")]
    NotCoprime,
}

/// `C·Dᵗ` symmetric, the symmetry condition on a bottom row.
pub fn is_symmetric_pair(c: &Mat2Z, d: &Mat2Z) -> bool {
    let [c1, c2, c3, c4] = &c.c;
    let [d1, d2, d3, d4] = &d.c;
    c1 * d3 + c2 * d4 == c3 * d1 + c4 * d2
}

/// gcd of the six 2×2 minors of the 2×4 block `(C D)`.
pub fn pair_minor_gcd(c: &Mat2Z, d: &Mat2Z) -> BigInt {
    let row0 = [&c.c[0], &c.c[1], &d.c[0], &d.c[1]];
    let row1 = [&c.c[2], &c.c[3], &d.c[2], &d.c[3]];
    let mut g = BigInt::zero();
    for i in 0..4 {
        for j in i + 1..4 {
            g = g.gcd(&(row0[i] * row1[j] - row0[j] * row1[i]));
        }
    }
    g
}

/// Coprime symmetric pair: symmetric and primitive, i.e. completable.
pub fn is_coprime_symmetric_pair(c: &Mat2Z, d: &Mat2Z) -> bool {
    is_symmetric_pair(c, d) && pair_minor_gcd(c, d).is_one()
}

/// Completes a bottom row `(C, D)` to `[[A, B], [C, D]] ∈ Sp₄(ℤ)`.
///
/// For nonsingular `C` the returned `A` is normalized so that `A·C⁻¹` has all
/// entries in `[0, 1)`; for `C = 0` the completion is `A = D⁻ᵗ`, `B = 0`.
pub fn complete_pair(
    c: &Mat2Z,
    d: &Mat2Z,
) -> std::result::Result<(Mat2Z, Mat2Z), CompletionFailure> {
    if !is_symmetric_pair(c, d) {
        return Err(CompletionFailure::NotSymmetric);
    }
    if c.is_zero() {
        let inv = d.inverse_unimodular().map_err(|_| CompletionFailure::NotCoprime)?;
        return Ok((inv.transpose(), Mat2Z::zero()));
    }
    // Left inverse of M = [Dᵗ; −Cᵗ] (4×2): [A₀ B₀]·M = I.
    let dt = d.transpose();
    let ct = -&c.transpose();
    let m: MatZ = vec![
        vec![dt.c[0].clone(), dt.c[1].clone()],
        vec![dt.c[2].clone(), dt.c[3].clone()],
        vec![ct.c[0].clone(), ct.c[1].clone()],
        vec![ct.c[2].clone(), ct.c[3].clone()],
    ];
    let sf = SmithForm::compute(&m);
    if !(sf.diag[0].is_one() && sf.diag[1].is_one()) {
        return Err(CompletionFailure::NotCoprime);
    }
    // p·M·q = [I; 0]  ⇒  L = q·[I 0]·p.
    let l: Vec<Vec<BigInt>> = (0..2)
        .map(|i| {
            (0..4)
                .map(|j| (0..2).map(|k| &sf.q[i][k] * &sf.p[k][j]).sum())
                .collect()
        })
        .collect();
    let a0 = Mat2Z::new(l[0][0].clone(), l[0][1].clone(), l[1][0].clone(), l[1][1].clone());
    let b0 = Mat2Z::new(l[0][2].clone(), l[0][3].clone(), l[1][2].clone(), l[1][3].clone());
    // A₀B₀ᵗ − B₀A₀ᵗ = [[0, e], [−e, 0]]; shifting by X = [[0, e], [0, 0]] symmetrizes.
    let e = (&(&a0 * &b0.transpose()) - &(&b0 * &a0.transpose())).c[1].clone();
    let x = Mat2Z::new(0, e, 0, 0);
    let mut a = &a0 + &(&x * c);
    let mut b = &b0 + &(&x * d);
    let det = c.det();
    if !det.is_zero() {
        // A ↦ A − F·C, B ↦ B − F·D with F = ⌊A·C⁻¹⌋ (symmetric).
        let num = &a * &c.adjugate();
        let f = Mat2Z {
            c: num.c.clone().map(|x| x.div_floor(&det)),
        };
        debug_assert!(f.is_symmetric());
        a = &a - &(&f * c);
        b = &b - &(&f * d);
    }
    debug_assert!(is_sp4(&Mat4Z::from_blocks(&a, &b, c, d)));
    Ok((a, b))
}

/// Representatives of `{D : (C, D) coprime symmetric} / C·Λ′`, where Λ′ is
/// the lattice of integral symmetric matrices.
///
/// The symmetric `D` form a rank-3 lattice `L_C`. We take an explicit basis,
/// write the generators of `C·Λ′` in it, read the finite quotient off a 3×3
/// Smith form, and keep the primitive pairs.
pub fn enumerate_d_classes(c: &Mat2Z) -> Result<Vec<Mat2Z>> {
    if c.det().is_zero() {
        return domain(format!("enumerate_d_classes: {c} is singular"));
    }
    let [c1, c2, c3, c4] = &c.c;
    // D flattened as (d1, d2, d3, d4); symmetry is −c3·d1 − c4·d2 + c1·d3 + c2·d4 = 0.
    let row: MatZ = vec![vec![-c3, -c4, c1.clone(), c2.clone()]];
    let kernel = SmithForm::compute(&row);
    // Columns 1..4 of q span the kernel; q⁻¹ gives coordinates in that basis.
    let gens = [
        [c1.clone(), BigInt::zero(), c3.clone(), BigInt::zero()],
        [c2.clone(), c1.clone(), c4.clone(), c3.clone()],
        [BigInt::zero(), c2.clone(), BigInt::zero(), c4.clone()],
    ];
    let mut g: MatZ = vec![vec![BigInt::zero(); 3]; 3];
    for (j, gen) in gens.iter().enumerate() {
        let coords = mat_vec(&kernel.q_inv, gen);
        if !coords[0].is_zero() {
            return Err(Error::Domain("internal: C·Λ′ generator left the symmetric lattice".into()));
        }
        for i in 0..3 {
            g[i][j] = coords[i + 1].clone();
        }
    }
    let sf = SmithForm::compute(&g);
    let mods: Vec<i64> = sf
        .diag
        .iter()
        .map(|e| {
            e.try_into()
                .map_err(|_| Error::Range(format!("quotient order {e} too large to enumerate")))
        })
        .collect::<Result<_>>()?;
    let total: i64 = mods.iter().product();
    let mut reps = Vec::new();
    for idx in 0..total {
        let mut rem = idx;
        let k: Vec<BigInt> = mods
            .iter()
            .map(|&m| {
                let v = rem % m;
                rem /= m;
                BigInt::from(v)
            })
            .collect();
        let x = mat_vec(&sf.p_inv, &k);
        let flat: Vec<BigInt> = (0..4)
            .map(|r| (0..3).map(|j| &kernel.q[r][j + 1] * &x[j]).sum())
            .collect();
        let d = Mat2Z::new(flat[0].clone(), flat[1].clone(), flat[2].clone(), flat[3].clone());
        debug_assert!(is_symmetric_pair(c, &d));
        if pair_minor_gcd(c, &d).is_one() {
            reps.push(d);
        }
    }
    Ok(reps)
}

/// True iff `D₁ − D₂ ∈ C·Λ′`.
pub fn d_equivalent(c: &Mat2Z, d1: &Mat2Z, d2: &Mat2Z) -> bool {
    let det = c.det();
    if det.is_zero() {
        return false;
    }
    let s = &c.adjugate() * &(d1 - d2);
    s.c.iter().all(|x| x.is_multiple_of(&det)) && s.is_symmetric()
}

/// `n(X) = [[I, X], [0, I]]` over the reals.
pub fn n_real(x: &SymReal2) -> Mat4R {
    let mut g = identity4();
    g[0][2] = x.y1;
    g[0][3] = x.y2;
    g[1][2] = x.y2;
    g[1][3] = x.y3;
    g
}

/// `m(A) = diag(A, A⁻ᵗ)` over the reals.
pub fn m_real(a: &Mat2R) -> Result<Mat4R> {
    let inv = super::real::mat2_inv(a)?;
    let mut g = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = a[i][j];
            g[2 + i][2 + j] = inv[j][i];
        }
    }
    Ok(g)
}

pub fn identity4() -> Mat4R {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }))
}

pub fn mat4_mul(a: &Mat4R, b: &Mat4R) -> Mat4R {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| a[i][k] * b[k][j]).sum()))
}

fn blocks(g: &Mat4R) -> [Mat2R; 4] {
    let blk = |r: usize, c: usize| [[g[r][c], g[r][c + 1]], [g[r + 1][c], g[r + 1][c + 1]]];
    [blk(0, 0), blk(0, 2), blk(2, 0), blk(2, 2)]
}

/// Largest entry of `gᵗJg − J`, relative to the size of `g`.
pub fn symplectic_defect(g: &Mat4R) -> f64 {
    let mut j = [[0.0; 4]; 4];
    j[0][2] = 1.0;
    j[1][3] = 1.0;
    j[2][0] = -1.0;
    j[3][1] = -1.0;
    let gt: Mat4R = std::array::from_fn(|i| std::array::from_fn(|k| g[k][i]));
    let p = mat4_mul(&mat4_mul(&gt, &j), g);
    let scale = g.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut worst = 0.0f64;
    for i in 0..4 {
        for k in 0..4 {
            worst = worst.max((p[i][k] - j[i][k]).abs());
        }
    }
    worst / (scale * scale)
}

/// The `GL₂⁺(ℝ)/SO₂(ℝ)` component of `g ∈ Sp₄(ℝ)`: the upper-triangular `R`
/// with positive diagonal such that `Im(g·iI) = R Rᵗ`.
pub fn iwasawa_malpha(g: &Mat4R) -> Result<Mat2R> {
    if symplectic_defect(g) > 1e-9 {
        return domain("iwasawa_malpha: input is not symplectic to tolerance");
    }
    let [a, b, c, d] = blocks(g);
    let num = CMat2::from_parts(&b, &a);
    let den = CMat2::from_parts(&d, &c);
    let z = num.mul(&den.inv()?);
    let y = SymReal2::from_mat(&z.im());
    let coords = iota_inverse(&y).map_err(|e| Error::Conditioning(e.to_string()))?;
    Ok(coords.r_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sp4_examples() {
        assert!(is_sp4(&Mat4Z::identity()));
        assert!(is_sp4(&Mat4Z::j()));
        let x = Mat2Z::from_i64([3, -1, -1, 5]);
        let n = Mat4Z::from_blocks(&Mat2Z::identity(), &x, &Mat2Z::zero(), &Mat2Z::identity());
        assert!(is_sp4(&n));
        let nonsym = Mat2Z::from_i64([0, 1, 0, 0]);
        let bad = Mat4Z::from_blocks(&Mat2Z::identity(), &nonsym, &Mat2Z::zero(), &Mat2Z::identity());
        assert!(!is_sp4(&bad));
    }

    #[test]
    fn complete_pair_examples() {
        let (a, b) = complete_pair(&Mat2Z::identity(), &Mat2Z::zero()).unwrap();
        assert_eq!(a, Mat2Z::zero());
        assert_eq!(b, -&Mat2Z::identity());
        let (a, b) = complete_pair(&Mat2Z::zero(), &Mat2Z::identity()).unwrap();
        assert_eq!((a, b), (Mat2Z::identity(), Mat2Z::zero()));
        assert_eq!(
            complete_pair(&Mat2Z::identity(), &Mat2Z::from_i64([0, 1, 0, 0])),
            Err(CompletionFailure::NotSymmetric)
        );
        assert_eq!(
            complete_pair(&Mat2Z::diag(2, 2), &Mat2Z::diag(2, 4)),
            Err(CompletionFailure::NotCoprime)
        );
    }

    #[test]
    fn complete_pair_rank_one_modulus() {
        let c = Mat2Z::from_i64([1, 0, 0, 0]);
        let d = Mat2Z::from_i64([0, 0, 0, 1]);
        let (a, b) = complete_pair(&c, &d).unwrap();
        assert!(is_sp4(&Mat4Z::from_blocks(&a, &b, &c, &d)));
    }

    #[test]
    fn d_classes_identity_and_diag() {
        let reps = enumerate_d_classes(&Mat2Z::identity()).unwrap();
        assert_eq!(reps.len(), 1);
        assert!(d_equivalent(&Mat2Z::identity(), &reps[0], &Mat2Z::zero()));
        // C = diag(1, β): the classes are indexed by d₄ coprime to β.
        let reps = enumerate_d_classes(&Mat2Z::diag(1, 6)).unwrap();
        assert_eq!(reps.len(), 2);
    }

    #[test]
    fn iwasawa_of_n_times_m() {
        let r: Mat2R = [[1.5, 0.3], [0.0, 0.7]];
        let g = mat4_mul(&n_real(&SymReal2::new(0.2, -1.0, 3.0)), &m_real(&r).unwrap());
        let got = iwasawa_malpha(&g).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((got[i][j] - r[i][j]).abs() < 1e-12);
            }
        }
        let id = iwasawa_malpha(&identity4()).unwrap();
        assert_eq!(id, [[1.0, 0.0], [0.0, 1.0]]);
    }
}
