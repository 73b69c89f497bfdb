//! Recurrent nonuniform sampling on `t_p = 2πp/m₀`.
//!
//! RN1 reconstructs from `f(t_p)` and `f(α + t_p)`; RN2 from `f(α + t_p)` and
//! `f'(t_p)`. Both are two-channel instances of the multichannel engine with
//! `K = m₀`. Kernels here follow the normalisation of the interpolation formula
//! itself, `f(t) = Σ_p g₁(p) y₁(t - t_p) + g₂(p) y₂(t - t_p)`, which is the
//! engine's `y_m` divided by `m₀`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::mci::{build_basis, ChannelFilter, ChannelSampleSet, InterpolantBasis};
use crate::spectral::{SpectralSupport, TrigPolynomial};

/// Points closer than this to a removable singularity on the unit circle are
/// evaluated from the coefficients instead of the closed form.
pub const POLE_GUARD: f64 = 1e-6;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecurrentKind {
    Rn1,
    Rn2,
}

/// Base grid `t_p = 2πp/m₀` with one offset `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrentGrid {
    m0: usize,
    alpha: f64,
    kind: RecurrentKind,
}

impl RecurrentGrid {
    /// RN1 grid; `α` must lie in the open interval `(0, 2π/m₀)`.
    pub fn rn1(m0: usize, alpha: f64) -> Result<Self> {
        check_m0(m0)?;
        let hi = TAU / m0 as f64;
        if !(alpha > 0.0 && alpha < hi) {
            return Err(Error::AlphaOutOfRange {
                alpha,
                interval: format!("(0, {hi})"),
            });
        }
        Ok(Self { m0, alpha, kind: RecurrentKind::Rn1 })
    }

    /// RN2 grid; `α` must lie in `[0, 2π/m₀)`.
    pub fn rn2(m0: usize, alpha: f64) -> Result<Self> {
        check_m0(m0)?;
        let hi = TAU / m0 as f64;
        if !(alpha >= 0.0 && alpha < hi) {
            return Err(Error::AlphaOutOfRange {
                alpha,
                interval: format!("[0, {hi})"),
            });
        }
        Ok(Self { m0, alpha, kind: RecurrentKind::Rn2 })
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kind(&self) -> RecurrentKind {
        self.kind
    }

    pub fn base_points(&self) -> Vec<f64> {
        (0..self.m0).map(|p| TAU * p as f64 / self.m0 as f64).collect()
    }

    pub fn shifted_points(&self) -> Vec<f64> {
        self.base_points().into_iter().map(|t| t + self.alpha).collect()
    }

    /// Default band `{-m₀+1, …, m₀}`.
    pub fn default_support(&self) -> SpectralSupport {
        SpectralSupport::with_len(1 - self.m0 as i64, 2 * self.m0).expect("m0 >= 1")
    }

    fn check_support(&self, support: SpectralSupport) -> Result<()> {
        if support.len() != 2 * self.m0 {
            return Err(Error::InvalidConfig(format!(
                "recurrent formulas need a band of exactly 2*m0 = {} frequencies, got {}",
                2 * self.m0,
                support.len()
            )));
        }
        Ok(())
    }
}

fn check_m0(m0: usize) -> Result<()> {
    if m0 == 0 {
        return Err(Error::InvalidConfig("m0 must be positive".into()));
    }
    Ok(())
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

/// RN1 filter bank `b₁ = 1`, `b₂ = e^{inα}`.
pub fn rn1_filters(alpha: f64) -> [ChannelFilter; 2] {
    [ChannelFilter::identity(), ChannelFilter::advance(alpha)]
}

/// RN2 filter bank `b₁ = e^{inα}`, `b₂ = in`.
pub fn rn2_filters(alpha: f64) -> [ChannelFilter; 2] {
    [ChannelFilter::advance(alpha), ChannelFilter::derivative()]
}

pub fn rn1_basis(grid: &RecurrentGrid, support: SpectralSupport) -> Result<InterpolantBasis> {
    if grid.kind != RecurrentKind::Rn1 {
        return Err(Error::InvalidConfig("rn1_basis needs an RN1 grid".into()));
    }
    grid.check_support(support)?;
    build_basis(&rn1_filters(grid.alpha), support)
}

pub fn rn1_reconstruct(
    grid: &RecurrentGrid,
    support: SpectralSupport,
    f_at_tp: &[Complex64],
    f_at_alpha_tp: &[Complex64],
) -> Result<TrigPolynomial> {
    check_len(grid.m0, f_at_tp.len())?;
    check_len(grid.m0, f_at_alpha_tp.len())?;
    let basis = rn1_basis(grid, support)?;
    basis.reconstruct(&[
        ChannelSampleSet::new(0, f_at_tp.to_vec()),
        ChannelSampleSet::new(1, f_at_alpha_tp.to_vec()),
    ])
}

/// Closed form of `y_{k,α}(t)` for RN1 (`k` is 1 or 2). `None` within the guard band of a
/// removable singularity.
pub fn rn1_closed_form(grid: &RecurrentGrid, n_lo: i64, k: usize, t: f64) -> Option<Complex64> {
    let m0 = grid.m0 as f64;
    let a = grid.alpha;
    let n1 = n_lo as f64;
    let zt = cis(t);
    let em = cis(m0 * a) - ONE;
    match k {
        1 => {
            let den = zt - ONE;
            if den.norm() < POLE_GUARD {
                return None;
            }
            let num = (cis(m0 * t) - ONE) * (cis(m0 * a + n1 * t) - cis((m0 + n1) * t));
            Some(num / (m0 * den * em))
        }
        2 => {
            let den = cis(a) - zt;
            if den.norm() < POLE_GUARD {
                return None;
            }
            let num = cis(n1 * t)
                * (cis(m0 * t) - ONE)
                * (cis(m0 * a) - cis(m0 * t))
                * cis((1.0 - m0 - n1) * a);
            Some(num / (m0 * em * den))
        }
        _ => panic!("kernel index must be 1 or 2"),
    }
}

/// `y_{k,α}(t)` for RN1: closed form away from its removable singularities,
/// coefficient evaluation of `basis` near them.
pub fn rn1_kernel(grid: &RecurrentGrid, basis: &InterpolantBasis, k: usize, t: f64) -> Complex64 {
    rn1_closed_form(grid, basis.support().n_lo(), k, t)
        .unwrap_or_else(|| basis.eval_kernel(k - 1, t) / grid.m0 as f64)
}

fn rn2_denominator(grid: &RecurrentGrid, n: i64) -> Result<Complex64> {
    let m0 = grid.m0 as f64;
    let nf = n as f64;
    let d = m0 + nf - nf * cis(m0 * grid.alpha);
    if d.norm() <= 1e-12 * (m0 + 2.0 * nf.abs()) {
        return Err(Error::VanishingDenominator { n });
    }
    Ok(d)
}

/// `(v_{1,n,α}(t), v_{2,n,α}(t))`.
pub fn rn2_v(n: i64, grid: &RecurrentGrid, t: f64) -> Result<(Complex64, Complex64)> {
    let d = rn2_denominator(grid, n)?;
    let m0 = grid.m0 as f64;
    let nf = n as f64;
    let emt = cis(m0 * t);
    let v1 = (m0 - nf * (emt - ONE)) * cis(nf * (t - grid.alpha)) / d;
    let v2 = I * (cis(m0 * grid.alpha + nf * t) - cis((m0 + nf) * t)) / d;
    Ok((v1, v2))
}

/// RN2 basis assembled from the closed-form inverse of `H_n`.
pub fn rn2_basis(grid: &RecurrentGrid, support: SpectralSupport) -> Result<InterpolantBasis> {
    if grid.kind != RecurrentKind::Rn2 {
        return Err(Error::InvalidConfig("rn2_basis needs an RN2 grid".into()));
    }
    grid.check_support(support)?;
    for n in support.n_lo()..support.n_lo() + grid.m0 as i64 {
        rn2_denominator(grid, n)?;
    }
    build_basis(&rn2_filters(grid.alpha), support)
}

/// Values `y_{k,α}(t - t_p)` for `p = 0..m₀`, both kernels, from one length-`m₀`
/// FFT over `n` of `v_{k,n,α}(t)`.
pub fn rn2_kernels_shifted(
    grid: &RecurrentGrid,
    support: SpectralSupport,
    t: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    grid.check_support(support)?;
    let m0 = grid.m0;
    let mut b1 = vec![Complex64::new(0.0, 0.0); m0];
    let mut b2 = b1.clone();
    for n in support.n_lo()..support.n_lo() + m0 as i64 {
        let (v1, v2) = rn2_v(n, grid, t)?;
        let idx = n.rem_euclid(m0 as i64) as usize;
        b1[idx] += v1;
        b2[idx] += v2;
    }
    // Σ_n v(n) e^{-2πinp/m₀} is a forward DFT in n.
    let fft = FftPlanner::new().plan_fft_forward(m0);
    fft.process(&mut b1);
    fft.process(&mut b2);
    let s = 1.0 / m0 as f64;
    Ok((
        b1.into_iter().map(|v| v * s).collect(),
        b2.into_iter().map(|v| v * s).collect(),
    ))
}

/// `y_{k,α}(t)` for RN2 as `(1/m₀) Σ_{n∈I₁} v_{k,n,α}(t)`.
pub fn rn2_kernel(grid: &RecurrentGrid, support: SpectralSupport, k: usize, t: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in support.n_lo()..support.n_lo() + grid.m0 as i64 {
        let (v1, v2) = rn2_v(n, grid, t)?;
        acc += if k == 1 { v1 } else { v2 };
    }
    Ok(acc / grid.m0 as f64)
}

/// Closed forms `y_{1,0}`, `y_{2,0}` of the uniform value-plus-derivative case.
/// `None` within the guard band of `e^{it} = 1`.
pub fn uniform_closed_form(m0: usize, n_lo: i64, k: usize, t: f64) -> Option<Complex64> {
    let zt = cis(t);
    if (zt - ONE).norm() < POLE_GUARD {
        return None;
    }
    let m = m0 as f64;
    let n1 = n_lo as f64;
    let emt = cis(m * t);
    match k {
        1 => {
            let num = cis(n1 * t) * (emt - ONE).powu(2) * (n1 + m - (n1 + m - 1.0) * zt);
            Some(num / (m * m * (ONE - zt).powu(2)))
        }
        2 => {
            let num = I * cis(n1 * t) * (2.0 * emt - emt * emt - ONE);
            Some(num / (m * m * (zt - ONE)))
        }
        _ => panic!("kernel index must be 1 or 2"),
    }
}

pub fn rn2_reconstruct(
    grid: &RecurrentGrid,
    support: SpectralSupport,
    f_at_alpha_tp: &[Complex64],
    df_at_tp: &[Complex64],
) -> Result<TrigPolynomial> {
    check_len(grid.m0, f_at_alpha_tp.len())?;
    check_len(grid.m0, df_at_tp.len())?;
    let basis = rn2_basis(grid, support)?;
    basis.reconstruct(&[
        ChannelSampleSet::new(0, f_at_alpha_tp.to_vec()),
        ChannelSampleSet::new(1, df_at_tp.to_vec()),
    ])
}

/// `α = π/m₀`, the offset at which RN1 collapses to uniform sampling.
pub fn midpoint_alpha(m0: usize) -> f64 {
    PI / m0 as f64
}
