//! Rayleigh block-fading MIMO channel `Y = H X + N`.
//!
//! Randomness comes from counter-addressed ChaCha8 substreams: every trial
//! of a simulation derives its channel, data and noise generators from
//! `(master seed, stream kind, trial index)`, so results do not depend on
//! how trials are spread across threads and two decoders (or two codes) can
//! be compared on identical realizations.

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numerics::CMat;
use crate::{Error, Result, C64};

/// Channel matrix and noise level for one codeword.
#[derive(Clone, Debug)]
pub struct ChannelRealization {
    pub h: CMat,
    pub n0: f64,
}

/// Circularly-symmetric complex Gaussian with `E|z|² = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let sigma = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * sigma, im * sigma)
}

/// `n_r × n_t` matrix of i.i.d. unit-variance complex Gaussians.
pub fn sample_channel<R: Rng + ?Sized>(n_r: usize, n_t: usize, rng: &mut R) -> CMat {
    CMat::from_fn(n_r, n_t, |_, _| complex_gaussian(rng, 1.0))
}

/// `N0 = n_t E_s / 10^(snr_db / 10)`, from `SNR = n_t E_s / N0`.
pub fn snr_to_n0(snr_db: f64, n_t: usize, e_s: f64) -> f64 {
    debug_assert!(e_s > 0.0);
    n_t as f64 * e_s / 10f64.powf(snr_db / 10.0)
}

/// `Y = H X + N` with `N` i.i.d. complex Gaussian of variance `N0`.
pub fn transmit<R: Rng + ?Sized>(x: &CMat, ch: &ChannelRealization, rng: &mut R) -> Result<CMat> {
    if ch.h.cols() != x.rows() {
        return Err(Error::DimensionMismatch { expected: ch.h.cols(), got: x.rows() });
    }
    let mut y = ch.h.mul(x);
    if ch.n0 > 0.0 {
        for v in y.as_mut_slice() {
            *v += complex_gaussian(rng, ch.n0);
        }
    }
    Ok(y)
}

/// Independent random streams used by a trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamKind {
    Channel = 1,
    Data = 2,
    Noise = 3,
    Sampling = 4,
}

/// Generator for `(seed, kind, index)`. Distinct kinds use distinct keys and
/// distinct indices distinct ChaCha stream ids.
pub fn substream(seed: u64, kind: StreamKind, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(kind as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_arithmetic() {
        assert!((snr_to_n0(0.0, 2, 2.0) - 4.0).abs() < 1e-12);
        assert!((snr_to_n0(10.0, 2, 2.0) - 0.4).abs() < 1e-12);
        assert!((snr_to_n0(20.0, 4, 2.0) - 0.08).abs() < 1e-12);
    }

    #[test]
    fn replay_is_identical() {
        let a = sample_channel(2, 2, &mut substream(9, StreamKind::Channel, 4));
        let b = sample_channel(2, 2, &mut substream(9, StreamKind::Channel, 4));
        assert_eq!(a, b);
        let c = sample_channel(2, 2, &mut substream(9, StreamKind::Channel, 5));
        assert_ne!(a, c);
        let d = sample_channel(2, 2, &mut substream(9, StreamKind::Noise, 4));
        assert_ne!(a, d);
    }

    #[test]
    fn channel_moments() {
        let mut rng = substream(1, StreamKind::Channel, 0);
        let n = 100_000;
        let (mut sum, mut pow) = (C64::new(0.0, 0.0), 0.0);
        for _ in 0..n {
            let z = sample_channel(1, 1, &mut rng)[(0, 0)];
            sum += z;
            pow += z.norm_sqr();
        }
        let mean = sum / n as f64;
        // each component of the mean has std 1/sqrt(2n)
        let three_sigma = 3.0 / (2.0 * n as f64).sqrt();
        assert!(mean.re.abs() < three_sigma && mean.im.abs() < three_sigma, "{mean}");
        assert!((pow / n as f64 - 1.0).abs() < 0.02);
    }

    #[test]
    fn noiseless_and_noise_only() {
        let mut rng = substream(2, StreamKind::Channel, 0);
        let h = sample_channel(2, 2, &mut rng);
        let x = CMat::from_fn(2, 2, |i, j| C64::new(i as f64 + 1.0, j as f64 - 1.0));
        let y = transmit(&x, &ChannelRealization { h: h.clone(), n0: 0.0 }, &mut rng).unwrap();
        assert_eq!(y, h.mul(&x));

        let n0 = 0.7;
        let zero = CMat::zeros(2, 2);
        let ch = ChannelRealization { h, n0 };
        let mut noise = substream(2, StreamKind::Noise, 0);
        let trials = 50_000;
        let total: f64 = (0..trials).map(|_| transmit(&zero, &ch, &mut noise).unwrap().frobenius_norm_sqr()).sum();
        let want = 2.0 * 2.0 * n0;
        assert!((total / trials as f64 / want - 1.0).abs() < 0.02);
    }

    #[test]
    fn dimension_mismatch() {
        let ch = ChannelRealization { h: CMat::zeros(2, 4), n0: 1.0 };
        let err = transmit(&CMat::zeros(2, 2), &ch, &mut substream(0, StreamKind::Noise, 0)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 4, got: 2 });
    }
}
