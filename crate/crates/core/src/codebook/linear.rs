use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::numerics::{tilde_vec, vec, CMat, RMat};
use crate::{Error, Result, C64};

/// A real-linear space-time block code.
///
/// A codeword is `X = Σ_ℓ (a_ℓ A_ℓ + j b_ℓ B_ℓ)` with `s_ℓ = a_ℓ + j b_ℓ`.
/// The real generator has columns `tilde(vec(A_ℓ))` and `tilde(vec(j B_ℓ))`,
/// so that `tilde(vec(X)) = G_real · tilde(s)`.
#[derive(Clone, Debug)]
pub struct LinearCode {
    name: String,
    n_t: usize,
    t: usize,
    disp_a: Vec<CMat>,
    disp_b: Vec<CMat>,
    real_gen: RMat,
    complex_form: Option<ComplexForm>,
}

/// Complex-linear description after conjugating whole time slots.
///
/// For codes built from Alamouti-like blocks each column of `X` is either
/// linear or conjugate-linear in `s`. Conjugating the latter columns gives
/// `vec*(X) = G s`, where `vec*` conjugates the entries of the slots flagged
/// in `conj_slots`. When no slot is conjugated `G` is the ordinary complex
/// generator (`G_real = check(G)`).
#[derive(Clone, Debug)]
pub struct ComplexForm {
    pub g: CMat,
    pub conj_slots: Vec<bool>,
}

impl ComplexForm {
    pub fn has_conjugated_slots(&self) -> bool {
        self.conj_slots.iter().any(|&c| c)
    }
}

impl LinearCode {
    /// Builds a code from its dispersion matrices (`κ` of each, all `n_t × T`).
    pub fn from_dispersion(name: &str, disp_a: Vec<CMat>, disp_b: Vec<CMat>) -> Result<Self> {
        let kappa = disp_a.len();
        if kappa == 0 {
            return Err(Error::Degenerate("no symbols".into()));
        }
        if disp_b.len() != kappa {
            return Err(Error::DimensionMismatch { expected: kappa, got: disp_b.len() });
        }
        let (n_t, t) = (disp_a[0].rows(), disp_a[0].cols());
        for m in disp_a.iter().chain(&disp_b) {
            if m.rows() != n_t {
                return Err(Error::DimensionMismatch { expected: n_t, got: m.rows() });
            }
            if m.cols() != t {
                return Err(Error::DimensionMismatch { expected: t, got: m.cols() });
            }
            if !m.is_finite() {
                return Err(Error::Degenerate("non-finite dispersion entry".into()));
            }
        }
        let j = C64::new(0.0, 1.0);
        let mut real_gen = RMat::zeros(2 * n_t * t, 2 * kappa);
        for l in 0..kappa {
            let ca = tilde_vec(&vec(&disp_a[l]));
            let cb = tilde_vec(&vec(&disp_b[l].scale(j)));
            for (r, (x, y)) in ca.iter().zip(&cb).enumerate() {
                real_gen[(r, 2 * l)] = *x;
                real_gen[(r, 2 * l + 1)] = *y;
            }
        }
        let complex_form = derive_complex_form(&disp_a, &disp_b);
        Ok(LinearCode { name: name.into(), n_t, t, disp_a, disp_b, real_gen, complex_form })
    }

    /// Builds a code from a real-linear encoding map by probing it with
    /// `s = e_ℓ` and `s = j e_ℓ`.
    pub fn from_encoder(name: &str, kappa: usize, encoder: impl Fn(&[C64]) -> CMat) -> Result<Self> {
        let mut disp_a = Vec::with_capacity(kappa);
        let mut disp_b = Vec::with_capacity(kappa);
        let mut s = alloc::vec![C64::zero(); kappa];
        for l in 0..kappa {
            s[l] = C64::new(1.0, 0.0);
            disp_a.push(encoder(&s));
            s[l] = C64::new(0.0, 1.0);
            // X(j e_ℓ) = j B_ℓ
            disp_b.push(encoder(&s).scale(C64::new(0.0, -1.0)));
            s[l] = C64::zero();
        }
        Self::from_dispersion(name, disp_a, disp_b)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    /// Transmit antennas.
    #[inline]
    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// Channel uses per codeword.
    #[inline]
    pub fn t(&self) -> usize {
        self.t
    }

    /// Symbols per codeword.
    #[inline]
    pub fn kappa(&self) -> usize {
        self.disp_a.len()
    }

    /// Symbols per channel use, `κ / T`.
    pub fn rate(&self) -> f64 {
        self.kappa() as f64 / self.t as f64
    }

    /// Full rate for `n_r` receive antennas means `κ = n_r T`.
    pub fn is_full_rate(&self, n_r: usize) -> bool {
        self.kappa() == n_r * self.t
    }

    pub fn disp_a(&self) -> &[CMat] {
        &self.disp_a
    }

    pub fn disp_b(&self) -> &[CMat] {
        &self.disp_b
    }

    /// The `2 n_t T × 2κ` real generator.
    pub fn real_gen(&self) -> &RMat {
        &self.real_gen
    }

    pub fn complex_form(&self) -> Option<&ComplexForm> {
        self.complex_form.as_ref()
    }

    /// The complex generator `G` with `vec(X) = G s`, present only when no
    /// slot needs conjugation.
    pub fn complex_gen(&self) -> Option<&CMat> {
        self.complex_form.as_ref().filter(|f| !f.has_conjugated_slots()).map(|f| &f.g)
    }

    pub fn encode(&self, s: &[C64]) -> Result<CMat> {
        if s.len() != self.kappa() {
            return Err(Error::DimensionMismatch { expected: self.kappa(), got: s.len() });
        }
        let mut x = CMat::zeros(self.n_t, self.t);
        for (l, sl) in s.iter().enumerate() {
            if sl.re != 0.0 {
                x.add_scaled(&self.disp_a[l], C64::new(sl.re, 0.0));
            }
            if sl.im != 0.0 {
                x.add_scaled(&self.disp_b[l], C64::new(0.0, sl.im));
            }
        }
        Ok(x)
    }

    /// The same code with symbol `ℓ` of the new code being symbol `perm[ℓ]`
    /// of this one.
    pub fn permuted(&self, perm: &[usize]) -> Result<LinearCode> {
        let kappa = self.kappa();
        let mut seen = alloc::vec![false; kappa];
        if perm.len() != kappa {
            return Err(Error::DimensionMismatch { expected: kappa, got: perm.len() });
        }
        for &p in perm {
            if p >= kappa || core::mem::replace(&mut seen[p], true) {
                return Err(Error::OutOfRange("not a permutation".into()));
            }
        }
        let a = perm.iter().map(|&p| self.disp_a[p].clone()).collect();
        let b = perm.iter().map(|&p| self.disp_b[p].clone()).collect();
        LinearCode::from_dispersion(&self.name, a, b)
    }

    /// Multiplies every codeword by the real factor `k`.
    pub fn scaled(&self, k: f64) -> LinearCode {
        let f = C64::new(k, 0.0);
        let a = self.disp_a.iter().map(|m| m.scale(f)).collect();
        let b = self.disp_b.iter().map(|m| m.scale(f)).collect();
        LinearCode::from_dispersion(&self.name, a, b).expect("scaling preserves validity")
    }

    /// Scale so that `E‖X‖²_F = T · E_s` for i.i.d. zero-mean symbols of
    /// energy `E_s` (each real dimension carrying `E_s / 2`). The factor does
    /// not depend on the constellation.
    pub fn energy_normalized(&self) -> LinearCode {
        let k = (2.0 * self.t as f64 / self.real_gen.gram().trace()).sqrt();
        self.scaled(k)
    }

    /// `E‖X‖²_F / E_s`.
    pub fn energy_per_symbol_energy(&self) -> f64 {
        self.real_gen.gram().trace() / 2.0
    }

    /// `Some(c)` when `G_realᵀ G_real = c I` within `tol` (cubic shaping up
    /// to scale), `None` otherwise.
    pub fn cubic_shaping_scale(&self, tol: f64) -> Option<f64> {
        let gram = self.real_gen.gram();
        let c = gram.trace() / gram.rows() as f64;
        (gram.max_abs_diff(&RMat::identity(gram.rows()).scale(c)) <= tol * c.max(1.0)).then_some(c)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum SlotKind {
    Unknown,
    Linear,
    Conjugate,
}

fn derive_complex_form(disp_a: &[CMat], disp_b: &[CMat]) -> Option<ComplexForm> {
    let kappa = disp_a.len();
    let (n_t, t) = (disp_a[0].rows(), disp_a[0].cols());
    let scale = disp_a.iter().chain(disp_b).flat_map(|m| m.as_slice()).map(|z| z.norm()).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(1.0);
    let mut kinds = alloc::vec![SlotKind::Unknown; t];
    for slot in 0..t {
        for row in 0..n_t {
            for l in 0..kappa {
                let (a, b) = (disp_a[l][(row, slot)], disp_b[l][(row, slot)]);
                if a.norm() <= tol && b.norm() <= tol {
                    continue;
                }
                let kind = if (a - b).norm() <= tol {
                    SlotKind::Linear
                } else if (a + b).norm() <= tol {
                    SlotKind::Conjugate
                } else {
                    return None;
                };
                match kinds[slot] {
                    SlotKind::Unknown => kinds[slot] = kind,
                    k if k != kind => return None,
                    _ => {}
                }
            }
        }
    }
    let conj_slots: Vec<bool> = kinds.iter().map(|k| *k == SlotKind::Conjugate).collect();
    // rows follow vec ordering: slot-major, antenna-minor
    let g = CMat::from_fn(n_t * t, kappa, |r, l| {
        let (slot, row) = (r / n_t, r % n_t);
        let a = disp_a[l][(row, slot)];
        if conj_slots[slot] {
            a.conj()
        } else {
            a
        }
    });
    Some(ComplexForm { g, conj_slots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::vec as vec_of;
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn encoder_probe_round_trip() {
        // X = [[s1, -conj(s2)], [s2, conj(s1)]]
        let code = LinearCode::from_encoder("ala", 2, |s| {
            CMat::from_rows(&[[s[0], -s[1].conj()], [s[1], s[0].conj()]])
        })
        .unwrap();
        assert_eq!((code.n_t(), code.t(), code.kappa()), (2, 2, 2));
        let s = [c(1.0, -3.0), c(-1.0, 1.0)];
        let x = code.encode(&s).unwrap();
        assert_eq!(x[(0, 1)], -s[1].conj());
        assert_eq!(x[(1, 1)], s[0].conj());
        let form = code.complex_form().unwrap();
        assert_eq!(form.conj_slots, vec![false, true]);
        assert!(code.complex_gen().is_none());
        // conjugated second slot is linear in s
        let mut v = vec_of(&x);
        v[2] = v[2].conj();
        v[3] = v[3].conj();
        let gs = form.g.mul_vec(&s);
        for (p, q) in v.iter().zip(&gs) {
            assert!((p - q).norm() < 1e-15);
        }
    }

    #[test]
    fn mixed_entries_have_no_complex_form() {
        // entry Re(s) only: neither linear nor conjugate-linear
        let code = LinearCode::from_encoder("re", 1, |s| CMat::from_rows(&[[c(s[0].re, 0.0)]])).unwrap();
        assert!(code.complex_form().is_none());
    }

    #[test]
    fn encode_rejects_wrong_length() {
        let code = LinearCode::from_encoder("id", 1, |s| CMat::from_rows(&[[s[0]]])).unwrap();
        assert_eq!(code.encode(&[]).unwrap_err(), Error::DimensionMismatch { expected: 1, got: 0 });
    }

    #[test]
    fn energy_normalization_targets_t_es() {
        let code = LinearCode::from_encoder("ala", 2, |s| {
            CMat::from_rows(&[[s[0], -s[1].conj()], [s[1], s[0].conj()]])
        })
        .unwrap();
        // ‖X‖² = 2(|s1|²+|s2|²) → E‖X‖² = 4 E_s; target T E_s = 2 E_s
        assert!((code.energy_per_symbol_energy() - 4.0).abs() < 1e-12);
        let n = code.energy_normalized();
        assert!((n.energy_per_symbol_energy() - 2.0).abs() < 1e-12);
    }
}
