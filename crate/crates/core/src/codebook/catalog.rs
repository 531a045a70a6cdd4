//! Named codes with their optimized parameters baked in.

#[allow(unused_imports)]
use num_traits::Float;

use super::{
    build_u_dft, make_alamouti, make_family1, make_family2, make_golden, make_new_4x2, make_quasi_orthogonal,
    Family1Scaling, LinearCode,
};
use crate::{Error, Result, C64};

pub const NAMES: [&str; 7] = ["alamouti", "family1", "family2", "golden", "qo4", "new4x2-4qam", "new4x2-16qam"];

/// `U` parameters `(N, [n_1..n_4])` of the 4×2 code designed for 4-QAM.
pub const NEW4X2_4QAM_U: (u32, [u32; 4]) = (7, [1, 2, 5, 6]);
/// `U` parameters `(N, [n_1..n_4])` of the 4×2 code designed for 16-QAM.
pub const NEW4X2_16QAM_U: (u32, [u32; 4]) = (17, [3, 4, 5, 13]);

/// Family I rotation `(φ1, φ2)`: the maximizer of the 4-QAM minimum
/// determinant found by `search::search_family1`, written in the exact
/// algebraic form it converges to.
pub fn family1_phi() -> (C64, C64) {
    let r7 = 7f64.sqrt();
    (C64::new(2.0, -1.0) / r7, C64::new(1.0, 1.0) / r7)
}

/// Family II coefficients `(α12, β12, α34, β34)` maximizing the 4-QAM
/// minimum determinant, with `α12 = β12 = 1/√2` fixed by symmetry.
pub fn family2_coeffs() -> (C64, C64, C64, C64) {
    let r2 = 2f64.sqrt();
    let r7 = 7f64.sqrt();
    let half = C64::new(1.0 / r2, 0.0);
    let b = C64::new(1.0 - r7, 1.0 + r7) / (4.0 * r2);
    (half, half, b.conj(), C64::new(0.0, 1.0) * b.conj())
}

pub fn by_name(name: &str) -> Result<LinearCode> {
    let half = C64::new(1.0 / 2f64.sqrt(), 0.0);
    let code = match name {
        "alamouti" => make_alamouti(half, half)?,
        "family1" => {
            let (p1, p2) = family1_phi();
            make_family1(p1, p2, Family1Scaling::Normalized)?
        }
        "family2" => {
            let (a12, b12, a34, b34) = family2_coeffs();
            make_family2(a12, b12, a34, b34)?
        }
        "golden" => make_golden(),
        "qo4" => make_quasi_orthogonal(),
        "new4x2-4qam" => make_new_4x2(&build_u_dft(NEW4X2_4QAM_U.0, NEW4X2_4QAM_U.1)?)?,
        "new4x2-16qam" => make_new_4x2(&build_u_dft(NEW4X2_16QAM_U.0, NEW4X2_16QAM_U.1)?)?,
        other => return Err(Error::UnknownCode(other.into())),
    };
    Ok(code.with_name(name))
}
