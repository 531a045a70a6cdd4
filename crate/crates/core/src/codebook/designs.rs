use alloc::format;

use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use super::LinearCode;
use crate::numerics::CMat;
use crate::{Error, Result, C64};

const NORM_TOL: f64 = 1e-12;

/// Scaling of the two Alamouti blocks of a Family I code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family1Scaling {
    /// `α = β = 1` in both blocks; the real generator satisfies `GᵀG = 2 I₈`.
    Literal,
    /// `α = β = 1/√2` in both blocks; `GᵀG = I₈`. Minimum determinants are a
    /// quarter of the literal scaling's.
    Normalized,
}

fn alamouti_block(alpha: C64, beta: C64, s1: C64, s2: C64) -> [[C64; 2]; 2] {
    [[alpha * s1, -beta * s2.conj()], [alpha * s2, beta * s1.conj()]]
}

fn check_alamouti_pair(alpha: C64, beta: C64) -> Result<()> {
    let (a2, b2) = (alpha.norm_sqr(), beta.norm_sqr());
    if (a2 - b2).abs() > NORM_TOL || (a2 + b2 - 1.0).abs() > NORM_TOL {
        return Err(Error::NormalizationViolated);
    }
    Ok(())
}

/// Alamouti code `[[α s1, -β s2*], [α s2, β s1*]]` with `|α|² = |β|² = 1/2`.
pub fn make_alamouti(alpha: C64, beta: C64) -> Result<LinearCode> {
    check_alamouti_pair(alpha, beta)?;
    Ok(make_alamouti_unchecked(alpha, beta))
}

/// Alamouti code without the normalization check (e.g. `α = β = 1`).
pub fn make_alamouti_unchecked(alpha: C64, beta: C64) -> LinearCode {
    LinearCode::from_encoder("alamouti", 2, |s| CMat::from_rows(&alamouti_block(alpha, beta, s[0], s[1])))
        .expect("alamouti dispersion is well formed")
}

/// Family I twisted code: `X = X12(s1, s2) + T · Alamouti(z1, z2)` with
/// `T = diag(1, -1)` and `z = U (s3, s4)`, `U = [[φ1, -φ2*], [φ2, φ1*]]`.
pub fn make_family1(phi1: C64, phi2: C64, scaling: Family1Scaling) -> Result<LinearCode> {
    let deviation = (phi1.norm_sqr() + phi2.norm_sqr() - 1.0).abs();
    if deviation > NORM_TOL {
        return Err(Error::UnitarityViolated { deviation });
    }
    let k = match scaling {
        Family1Scaling::Literal => 1.0,
        Family1Scaling::Normalized => 1.0 / 2f64.sqrt(),
    };
    let k = C64::new(k, 0.0);
    LinearCode::from_encoder("family1", 4, |s| {
        let z1 = phi1 * s[2] - phi2.conj() * s[3];
        let z2 = phi2 * s[2] + phi1.conj() * s[3];
        let a = alamouti_block(k, k, s[0], s[1]);
        let b = alamouti_block(k, k, z1, z2);
        CMat::from_rows(&[[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]])
    })
}

/// Family II code: two Alamouti blocks with independent coefficients,
/// `X = Alamouti(α12, β12)(s1, s2) + Alamouti(α34, β34)(s3, s4)`.
pub fn make_family2(a12: C64, b12: C64, a34: C64, b34: C64) -> Result<LinearCode> {
    check_alamouti_pair(a12, b12)?;
    check_alamouti_pair(a34, b34)?;
    LinearCode::from_encoder("family2", 4, |s| {
        let a = alamouti_block(a12, b12, s[0], s[1]);
        let b = alamouti_block(a34, b34, s[2], s[3]);
        CMat::from_fn(2, 2, |i, j| a[i][j] + b[i][j])
    })
}

/// Golden code with the `1/√5` normalization:
/// `[[α(s1 + s2 θ), α(s3 + s4 θ)], [j σ(α)(s3 + s4 σ(θ)), σ(α)(s1 + s2 σ(θ))]]`,
/// `θ = (1+√5)/2`, `σ(θ) = (1-√5)/2`, `α = 1 + j - jθ`.
pub fn make_golden() -> LinearCode {
    let sqrt5 = 5f64.sqrt();
    let theta = (1.0 + sqrt5) / 2.0;
    let theta_bar = (1.0 - sqrt5) / 2.0;
    let j = C64::new(0.0, 1.0);
    let alpha = C64::new(1.0, 1.0) - j * theta;
    let alpha_bar = C64::new(1.0, 1.0) - j * theta_bar;
    let k = 1.0 / sqrt5;
    LinearCode::from_encoder("golden", 4, |s| {
        CMat::from_rows(&[
            [alpha * (s[0] + s[1] * theta) * k, alpha * (s[2] + s[3] * theta) * k],
            [j * alpha_bar * (s[2] + s[3] * theta_bar) * k, alpha_bar * (s[0] + s[1] * theta_bar) * k],
        ])
    })
    .expect("golden dispersion is well formed")
}

fn quasi_orthogonal_block(s: &[C64]) -> CMat {
    let (s1, s2, s3, s4) = (s[0], s[1], s[2], s[3]);
    CMat::from_rows(&[
        [s1, -s2.conj(), -s3.conj(), s4],
        [s2, s1.conj(), -s4.conj(), -s3],
        [s3, -s4.conj(), s1.conj(), -s2],
        [s4, s3.conj(), s2.conj(), s1],
    ])
}

/// Rate-1 quasi-orthogonal 4×4 design over `s1..s4` (minimum rank 2).
pub fn make_quasi_orthogonal() -> LinearCode {
    LinearCode::from_encoder("qo4", 4, quasi_orthogonal_block).expect("quasi-orthogonal dispersion is well formed")
}

/// `U = D P / 2` with `D = diag(exp(j2π n_ℓ / N))` and
/// `P[ℓ][n] = exp(j2π ℓ n / 4)`, zero-based `ℓ, n`.
pub fn build_u_dft(n_cap: u32, n_exp: [u32; 4]) -> Result<CMat> {
    if n_cap == 0 {
        return Err(Error::OutOfRange("N must be at least 1".into()));
    }
    if let Some(bad) = n_exp.iter().find(|&&n| n > n_cap) {
        return Err(Error::OutOfRange(format!("exponent {bad} not in 0..={n_cap}")));
    }
    let phase = |x: f64| C64::new(0.0, 2.0 * PI * x).exp();
    Ok(CMat::from_fn(4, 4, |l, n| {
        phase(n_exp[l] as f64 / n_cap as f64) * phase((l * n) as f64 / 4.0) * 0.5
    }))
}

/// Full-rate 4×2 code `X = QO(s1..s4) + T · QO(z1..z4)` with
/// `T = diag(1, 1, -1, -1)` and `z = U (s5..s8)`.
pub fn make_new_4x2(u: &CMat) -> Result<LinearCode> {
    if u.rows() != 4 || u.cols() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: u.rows().max(u.cols()) });
    }
    let deviation = u.unitarity_deviation();
    if deviation > 1e-9 {
        return Err(Error::UnitarityViolated { deviation });
    }
    LinearCode::from_encoder("new4x2", 8, |s| {
        let a = quasi_orthogonal_block(&s[..4]);
        let z = u.mul_vec(&s[4..]);
        let mut b = quasi_orthogonal_block(&z);
        for i in 2..4 {
            for j in 0..4 {
                b[(i, j)] = -b[(i, j)];
            }
        }
        a.add(&b)
    })
}
