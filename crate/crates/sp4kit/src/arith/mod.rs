//! Exact integer linear algebra in dimension 2 and 4: matrices, Smith normal
//! form, Iwasawa coordinates and the bottom-row machinery of Sp₄(ℤ).

mod mat;
pub mod real;
mod snf;
mod sp4;

pub use mat::{Mat2Z, Mat4Z, SymHalf2};
pub use real::{
    canonical_upper, congruence_real, iota_inverse, mat2_det, mat2_inv, mat2_mul, mat2_transpose,
    CMat2, IwasawaCoords, Mat2R, Mat4R, SymReal2,
};
pub use snf::{ext_gcd, ext_gcd_i64, mod_inverse, snf2, SnfDecomp};
pub use sp4::{
    complete_pair, d_equivalent, enumerate_d_classes, identity4, is_coprime_symmetric_pair, is_sp4,
    is_symmetric_pair, iwasawa_malpha, m_real, mat4_mul, n_real, pair_minor_gcd,
    symplectic_defect, CompletionFailure, Sp4Element,
};
