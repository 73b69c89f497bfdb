//! Fourier-series backbone for trigonometric polynomials on the unit circle.
//!
//! A [`TrigPolynomial`] stores the coefficients `a(n)` of
//! `f(t) = Σ a(n) e^{int}` over a contiguous band of integer frequencies
//! (a [`SpectralSupport`]). Conversion to values on a uniform grid goes through
//! a zero-padded FFT with negative frequencies placed at index `n mod P`.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// The band `{n_lo, …, n_hi}` of admissible frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpectralSupport {
    n_lo: i64,
    n_hi: i64,
}

impl SpectralSupport {
    pub fn new(n_lo: i64, n_hi: i64) -> Result<Self> {
        if n_lo > n_hi {
            return Err(Error::InvalidSupport { n_lo, n_hi });
        }
        Ok(Self { n_lo, n_hi })
    }

    /// Band of `len` frequencies starting at `n_lo`.
    pub fn with_len(n_lo: i64, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidSupport { n_lo, n_hi: n_lo - 1 });
        }
        Self::new(n_lo, n_lo + len as i64 - 1)
    }

    /// Near-symmetric band of `len` frequencies: `n_lo = -floor((len-1)/2)`.
    ///
    /// Odd lengths give `{-k..k}`, even lengths `{-k+1..k}`.
    pub fn centered(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidSupport { n_lo: 0, n_hi: -1 });
        }
        Self::with_len(-(((len - 1) / 2) as i64), len)
    }

    pub fn n_lo(&self) -> i64 {
        self.n_lo
    }

    pub fn n_hi(&self) -> i64 {
        self.n_hi
    }

    /// Cardinality μ of the band.
    pub fn len(&self) -> usize {
        (self.n_hi - self.n_lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.n_lo && n <= self.n_hi
    }

    pub fn index_of(&self, n: i64) -> Option<usize> {
        self.contains(n).then(|| (n - self.n_lo) as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.n_lo..=self.n_hi
    }

    pub fn intersect(&self, other: &SpectralSupport) -> Option<SpectralSupport> {
        let lo = self.n_lo.max(other.n_lo);
        let hi = self.n_hi.min(other.n_hi);
        (lo <= hi).then_some(SpectralSupport { n_lo: lo, n_hi: hi })
    }

    pub fn union(&self, other: &SpectralSupport) -> SpectralSupport {
        SpectralSupport {
            n_lo: self.n_lo.min(other.n_lo),
            n_hi: self.n_hi.max(other.n_hi),
        }
    }
}

/// A finite trigonometric polynomial `Σ_{n ∈ support} a(n) e^{int}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    support: SpectralSupport,
    coeffs: Vec<Complex64>,
}

impl TrigPolynomial {
    pub fn new(support: SpectralSupport, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != support.len() {
            return Err(Error::LengthMismatch {
                expected: support.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { support, coeffs })
    }

    pub fn zeros(support: SpectralSupport) -> Self {
        Self {
            support,
            coeffs: vec![Complex64::new(0.0, 0.0); support.len()],
        }
    }

    pub fn from_fn(support: SpectralSupport, mut a: impl FnMut(i64) -> Complex64) -> Self {
        let coeffs = support.iter().map(&mut a).collect();
        Self { support, coeffs }
    }

    pub fn support(&self) -> SpectralSupport {
        self.support
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient `a(n)`, zero outside the support.
    pub fn coeff(&self, n: i64) -> Complex64 {
        self.support
            .index_of(n)
            .map_or(Complex64::new(0.0, 0.0), |k| self.coeffs[k])
    }

    /// Pointwise evaluation by Horner's rule in `z = e^{it}`.
    pub fn eval(&self, t: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, t);
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * Complex64::from_polar(1.0, self.support.n_lo as f64 * t)
    }

    /// Values at `t_j = 2πj / n_points`, `j = 0..n_points`, via one inverse FFT.
    pub fn eval_dense(&self, n_points: usize) -> Result<Vec<Complex64>> {
        let mu = self.support.len();
        if n_points < mu {
            return Err(Error::InsufficientResolution {
                needed: mu,
                got: n_points,
            });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n_points];
        let p = n_points as i64;
        for (n, &c) in self.support.iter().zip(&self.coeffs) {
            buf[n.rem_euclid(p) as usize] += c;
        }
        FftPlanner::new().plan_fft_inverse(n_points).process(&mut buf);
        Ok(buf)
    }

    /// Evaluate on an arbitrary grid; uniform grids starting at zero use the FFT path.
    pub fn eval_grid(&self, grid: &EvalGrid) -> Vec<Complex64> {
        if grid.is_uniform() && grid.len() >= self.support.len() {
            if let Ok(v) = self.eval_dense(grid.len()) {
                return v;
            }
        }
        grid.points().iter().map(|&t| self.eval(t)).collect()
    }

    /// Analytic derivative: `a(n) -> i n a(n)`.
    pub fn derivative(&self) -> Self {
        Self::from_fn(self.support, |n| {
            Complex64::new(0.0, n as f64) * self.coeff(n)
        })
    }

    /// Circular Hilbert transform: `a(n) -> -i sgn(n) a(n)`.
    pub fn hilbert(&self) -> Self {
        Self::from_fn(self.support, |n| {
            let s = n.signum() as f64;
            Complex64::new(0.0, -s) * self.coeff(n)
        })
    }

    /// Circular convolution `(1/2π) ∫ f(s) h(t - s) ds`: coefficientwise product on the
    /// intersection of supports. Disjoint supports give the zero polynomial on `self`'s band.
    pub fn convolve(&self, other: &TrigPolynomial) -> Self {
        match self.support.intersect(&other.support) {
            Some(s) => Self::from_fn(s, |n| self.coeff(n) * other.coeff(n)),
            None => Self::zeros(self.support),
        }
    }

    /// Time shift `f(t - tau)`.
    pub fn shift(&self, tau: f64) -> Self {
        Self::from_fn(self.support, |n| {
            self.coeff(n) * Complex64::from_polar(1.0, -(n as f64) * tau)
        })
    }

    /// `(f, h) = Σ a(n) conj(b(n))`.
    pub fn inner(&self, other: &TrigPolynomial) -> Complex64 {
        match self.support.intersect(&other.support) {
            Some(s) => s.iter().map(|n| self.coeff(n) * other.coeff(n).conj()).sum(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `‖f‖₂ = (Σ |a(n)|²)^{1/2}`.
    pub fn norm_l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest coefficient discrepancy over the union of both supports.
    pub fn max_coeff_diff(&self, other: &TrigPolynomial) -> f64 {
        self.support
            .union(&other.support)
            .iter()
            .map(|n| (self.coeff(n) - other.coeff(n)).norm())
            .fold(0.0, f64::max)
    }

    /// Rows `n, re, im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (n, c) in self.support.iter().zip(&self.coeffs) {
            let _ = writeln!(out, "{n},{:.17e},{:.17e}", c.re, c.im);
        }
        out
    }

    /// Parse rows `n, re, im`; frequencies must be contiguous once sorted,
    /// missing interior frequencies default to zero.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected `n, re, im`",
                    lineno + 1
                )));
            }
            let parse_err = |what: &str| Error::Parse(format!("line {}: bad {what}", lineno + 1));
            // Allow a header row.
            let n: i64 = match fields[0].parse() {
                Ok(n) => n,
                Err(_) if rows.is_empty() && lineno == 0 => continue,
                Err(_) => return Err(parse_err("frequency")),
            };
            let re: f64 = fields[1].parse().map_err(|_| parse_err("real part"))?;
            let im: f64 = fields[2].parse().map_err(|_| parse_err("imaginary part"))?;
            rows.push((n, Complex64::new(re, im)));
        }
        if rows.is_empty() {
            return Err(Error::Parse("no coefficients".into()));
        }
        let lo = rows.iter().map(|r| r.0).min().unwrap();
        let hi = rows.iter().map(|r| r.0).max().unwrap();
        let support = SpectralSupport::new(lo, hi)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); support.len()];
        for (n, c) in rows {
            coeffs[(n - lo) as usize] += c;
        }
        Self::new(support, coeffs)
    }
}

/// Evaluation abscissae in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    points: Vec<f64>,
    uniform: bool,
}

impl EvalGrid {
    /// `t_j = 2πj / n`.
    pub fn uniform(n: usize) -> Self {
        let points = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
        Self {
            points,
            uniform: true,
        }
    }

    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.iter().any(|t| !(0.0..TAU).contains(t)) {
            return Err(Error::InvalidGrid("evaluation points must lie in [0, 2π)".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("evaluation points must be strictly increasing".into()));
        }
        Ok(Self {
            points,
            uniform: false,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }
}
