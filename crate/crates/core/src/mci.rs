//! Multichannel interpolation engine.
//!
//! A signal `f` with band `I = {N₁..N₂}` is observed through `M` channels
//! `g_m = f * h_m`, each sampled uniformly at `2πp/K` with `K = μ/M`. The band is
//! cut into `M` consecutive blocks of length `K`; for every `n` of the first block
//! the `M×M` channel matrix `H_n[j][m] = b_m(n + jK)` is inverted and its rows
//! give the interpolant coefficients `r_m(n)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, SINGULAR_RTOL};
use crate::spectral::{SpectralSupport, TrigPolynomial};

type CoeffFn = dyn Fn(i64) -> Complex64 + Send + Sync;

/// Frequency response `n -> b_m(n)` of one channel.
#[derive(Clone)]
pub struct ChannelFilter {
    coeff_fn: Arc<CoeffFn>,
    label: &'static str,
}

impl ChannelFilter {
    pub fn from_fn(f: impl Fn(i64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            coeff_fn: Arc::new(f),
            label: "custom",
        }
    }

    /// `b(n) = 1`: plain samples of `f`.
    pub fn identity() -> Self {
        Self {
            coeff_fn: Arc::new(|_| Complex64::new(1.0, 0.0)),
            label: "identity",
        }
    }

    /// `b(n) = e^{inα}`: samples of `f(t + α)`.
    pub fn advance(alpha: f64) -> Self {
        Self {
            coeff_fn: Arc::new(move |n| Complex64::from_polar(1.0, n as f64 * alpha)),
            label: "advance",
        }
    }

    /// `b(n) = in`: samples of `f'`.
    pub fn derivative() -> Self {
        Self {
            coeff_fn: Arc::new(|n| Complex64::new(0.0, n as f64)),
            label: "derivative",
        }
    }

    /// `b(n) = -i sgn(n)`: samples of the circular Hilbert transform.
    pub fn hilbert() -> Self {
        Self {
            coeff_fn: Arc::new(|n| Complex64::new(0.0, -(n.signum() as f64))),
            label: "hilbert",
        }
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        (self.coeff_fn)(n)
    }
}

impl fmt::Debug for ChannelFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChannelFilter").field("label", &self.label).finish()
    }
}

/// Uniform samples `g_m(2πp/K)`, `p = 0..K`, of channel `m` (zero-based).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSampleSet {
    pub channel: usize,
    pub values: Vec<Complex64>,
}

impl ChannelSampleSet {
    pub fn new(channel: usize, values: Vec<Complex64>) -> Self {
        Self { channel, values }
    }
}

/// Interpolant coefficients `r_m(n)` for every channel on the full band.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolantBasis {
    support: SpectralSupport,
    block: usize,
    r: Vec<Vec<Complex64>>,
}

/// `H_n[j][m] = b_m(n + jK)`, `j, m = 0..M`.
pub fn channel_matrix(filters: &[ChannelFilter], n: i64, block: usize) -> CMatrix {
    let k = block as i64;
    CMatrix::from_fn(filters.len(), filters.len(), |j, m| {
        filters[m].coeff(n + j as i64 * k)
    })
}

/// Build `r_m(n)` from the inverses of `H_n`, `n ∈ I₁`.
pub fn build_basis(filters: &[ChannelFilter], support: SpectralSupport) -> Result<InterpolantBasis> {
    let channels = filters.len();
    let mu = support.len();
    if channels == 0 || !mu.is_multiple_of(channels) {
        return Err(Error::IndivisibleSupport { len: mu, channels });
    }
    let block = mu / channels;
    let mut r = vec![vec![Complex64::new(0.0, 0.0); mu]; channels];
    for offset in 0..block {
        let n = support.n_lo() + offset as i64;
        let h = channel_matrix(filters, n, block);
        let lu = h.lu();
        if lu.is_singular() || lu.det().norm() <= SINGULAR_RTOL * h.hadamard_bound() {
            return Err(Error::SingularChannelMatrix { n });
        }
        let q = lu.inverse();
        // Block j of the band takes column j of H_n^{-1}.
        for (m, rm) in r.iter_mut().enumerate() {
            for j in 0..channels {
                rm[offset + j * block] = q[(m, j)];
            }
        }
    }
    Ok(InterpolantBasis { support, block, r })
}

impl InterpolantBasis {
    pub fn support(&self) -> SpectralSupport {
        self.support
    }

    pub fn channels(&self) -> usize {
        self.r.len()
    }

    /// Samples per channel `K`.
    pub fn block(&self) -> usize {
        self.block
    }

    /// `r_m(n)`, zero outside the band.
    pub fn r(&self, m: usize, n: i64) -> Complex64 {
        self.support
            .index_of(n)
            .map_or(Complex64::new(0.0, 0.0), |k| self.r[m][k])
    }

    /// The interpolating function `y_m` as a trigonometric polynomial.
    pub fn kernel(&self, m: usize) -> TrigPolynomial {
        TrigPolynomial::new(self.support, self.r[m].clone()).expect("basis length matches support")
    }

    pub fn eval_kernel(&self, m: usize, t: f64) -> Complex64 {
        self.kernel(m).eval(t)
    }

    /// Coefficients of `(1/K) Σ_m Σ_p g_m(2πp/K) y_m(t - 2πp/K)`.
    pub fn reconstruct(&self, samples: &[ChannelSampleSet]) -> Result<TrigPolynomial> {
        if samples.len() != self.channels() {
            return Err(Error::LengthMismatch {
                expected: self.channels(),
                got: samples.len(),
            });
        }
        let k = self.block;
        let fft = FftPlanner::new().plan_fft_forward(k);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.support.len()];
        for set in samples {
            if set.channel >= self.channels() {
                return Err(Error::InvalidConfig(format!(
                    "channel index {} out of range",
                    set.channel
                )));
            }
            if set.values.len() != k {
                return Err(Error::LengthMismatch {
                    expected: k,
                    got: set.values.len(),
                });
            }
            let mut spectrum = set.values.clone();
            fft.process(&mut spectrum);
            let rm = &self.r[set.channel];
            for (idx, n) in self.support.iter().enumerate() {
                let g = spectrum[n.rem_euclid(k as i64) as usize] / k as f64;
                coeffs[idx] += rm[idx] * g;
            }
        }
        TrigPolynomial::new(self.support, coeffs)
    }
}

/// Channel samples of `f` seen through `filters`: `g_m(2πp/K) = Σ a(n) b_m(n) e^{2πinp/K}`.
pub fn sample_channels(f: &TrigPolynomial, filters: &[ChannelFilter], block: usize) -> Vec<ChannelSampleSet> {
    filters
        .iter()
        .enumerate()
        .map(|(m, h)| {
            let g = TrigPolynomial::from_fn(f.support(), |n| f.coeff(n) * h.coeff(n));
            let values = (0..block)
                .map(|p| g.eval(std::f64::consts::TAU * p as f64 / block as f64))
                .collect();
            ChannelSampleSet::new(m, values)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(rng: &mut ChaCha8Rng, support: SpectralSupport) -> TrigPolynomial {
        TrigPolynomial::from_fn(support, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn single_identity_channel_is_all_ones() {
        let s = SpectralSupport::new(-3, 4).unwrap();
        let b = build_basis(&[ChannelFilter::identity()], s).unwrap();
        for n in s.iter() {
            assert!((b.r(0, n) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn identical_channels_are_singular() {
        let s = SpectralSupport::new(-3, 4).unwrap();
        let err = build_basis(&[ChannelFilter::identity(), ChannelFilter::identity()], s).unwrap_err();
        assert!(matches!(err, Error::SingularChannelMatrix { .. }));
    }

    #[test]
    fn indivisible_support() {
        let s = SpectralSupport::new(0, 4).unwrap();
        let err = build_basis(&[ChannelFilter::identity(), ChannelFilter::derivative()], s).unwrap_err();
        assert_eq!(err, Error::IndivisibleSupport { len: 5, channels: 2 });
    }

    #[test]
    fn zero_samples_give_zero() {
        let s = SpectralSupport::new(-3, 4).unwrap();
        let filters = [ChannelFilter::advance(0.3), ChannelFilter::derivative()];
        let b = build_basis(&filters, s).unwrap();
        let zeros: Vec<_> = (0..2)
            .map(|m| ChannelSampleSet::new(m, vec![Complex64::new(0.0, 0.0); 4]))
            .collect();
        assert_eq!(b.reconstruct(&zeros).unwrap().norm_l2(), 0.0);
    }

    #[test]
    fn length_mismatch_rejected() {
        let s = SpectralSupport::new(-3, 4).unwrap();
        let b = build_basis(&[ChannelFilter::identity(), ChannelFilter::derivative()], s).unwrap();
        let bad = vec![
            ChannelSampleSet::new(0, vec![Complex64::new(0.0, 0.0); 4]),
            ChannelSampleSet::new(1, vec![Complex64::new(0.0, 0.0); 3]),
        ];
        assert_eq!(
            b.reconstruct(&bad).unwrap_err(),
            Error::LengthMismatch { expected: 4, got: 3 }
        );
    }

    #[test]
    fn exact_for_several_filter_banks() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let banks: Vec<Vec<ChannelFilter>> = vec![
            vec![ChannelFilter::identity(), ChannelFilter::advance(0.4)],
            vec![ChannelFilter::advance(0.2), ChannelFilter::derivative()],
            vec![
                ChannelFilter::identity(),
                ChannelFilter::derivative(),
                ChannelFilter::advance(0.1),
            ],
            vec![ChannelFilter::identity(), ChannelFilter::hilbert()],
        ];
        for bank in banks {
            let mu = 12 * bank.len();
            // The Hilbert pair needs I₁ on the negative side and I₂ on the other.
            let n_lo = if bank[1].label == "hilbert" { -(mu as i64) / 2 } else { -(mu as i64) / 2 + 1 };
            let s = SpectralSupport::with_len(n_lo, mu).unwrap();
            let b = build_basis(&bank, s).unwrap();
            for _ in 0..5 {
                let f = random_poly(&mut rng, s);
                let g = sample_channels(&f, &bank, b.block());
                let rec = b.reconstruct(&g).unwrap();
                assert!(rec.max_coeff_diff(&f) < 1e-10);
            }
        }
    }

    #[test]
    fn block_identity() {
        let s = SpectralSupport::new(-7, 8).unwrap();
        let filters = [ChannelFilter::advance(0.35), ChannelFilter::derivative()];
        let b = build_basis(&filters, s).unwrap();
        let k = b.block();
        for off in 0..k {
            let n = s.n_lo() + off as i64;
            let h = channel_matrix(&filters, n, k);
            let q = CMatrix::from_fn(2, 2, |m, j| b.r(m, n + (j * k) as i64));
            assert!(h.mul(&q).max_abs_diff(&CMatrix::identity(2)) < 1e-10);
        }
    }
}
