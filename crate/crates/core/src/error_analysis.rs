//! Averaged reconstruction error for non-bandlimited inputs.
//!
//! Every formula in this crate is a linear map `W` from samples to the Fourier
//! coefficients of the interpolant. Averaging the squared error over all phase
//! shifts of the input decouples frequencies, giving
//! `ε² = Σ_{n∉I} |a(n)|² Er(n)` with `Er(n) = 1 + Σ_k |Σ_j W[j][k] s_j(n)|²`,
//! where `s_j(n)` is sample functional `j` applied to `e^{int}`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generic::{
    gn1_functionals, gn1_weights, gn2_basis, gn2_functionals, GenericGrid, Gn2Basis, SampleFunctional,
    WeightMatrix,
};
use crate::linalg::CMatrix;
use crate::mci::{build_basis, ChannelFilter, ChannelSampleSet, InterpolantBasis};
use crate::recurrent::{rn1_basis, rn2_basis, RecurrentGrid};
use crate::signals::{CoefficientMap, TestFunction};
use crate::spectral::{SpectralSupport, TrigPolynomial};

/// Nodes of the quadrature used for errors in the time domain.
pub const QUADRATURE_NODES: usize = 2048;

/// Default coefficient cutoff for the test function.
pub const TAIL_CUTOFF: i64 = 512;

/// Relative energy beyond the cutoff that averaged errors tolerate.
pub const TAIL_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pattern {
    Rn1,
    Gn1,
    U1,
    Rn2,
    Gn2,
    U2,
}

impl Pattern {
    pub const ALL: [Pattern; 6] = [Pattern::Rn1, Pattern::Gn1, Pattern::U1, Pattern::Rn2, Pattern::Gn2, Pattern::U2];

    pub fn name(&self) -> &'static str {
        match self {
            Pattern::Rn1 => "RN1",
            Pattern::Gn1 => "GN1",
            Pattern::U1 => "U1",
            Pattern::Rn2 => "RN2",
            Pattern::Gn2 => "GN2",
            Pattern::U2 => "U2",
        }
    }

    /// Patterns whose grids are random.
    pub fn is_stochastic(&self) -> bool {
        matches!(self, Pattern::Gn1 | Pattern::Gn2)
    }

    pub fn uses_derivatives(&self) -> bool {
        matches!(self, Pattern::Rn2 | Pattern::Gn2 | Pattern::U2)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pattern {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Pattern::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown pattern '{s}' (expected RN1, GN1, U1, RN2, GN2 or U2)")))
    }
}

/// `fix(x)`: rounding toward zero.
pub fn fix(x: f64) -> f64 {
    x.trunc()
}

#[derive(Debug, Clone)]
enum Backend {
    Engine(InterpolantBasis),
    Gn1,
    Gn2(Box<Gn2Basis>),
}

/// One interpolation formula on one grid: its sample functionals and weight matrix.
#[derive(Debug, Clone)]
pub struct Scheme {
    pattern: Pattern,
    support: SpectralSupport,
    functionals: Vec<SampleFunctional>,
    weights: WeightMatrix,
    backend: Backend,
}

fn engine_weights(basis: &InterpolantBasis) -> Result<WeightMatrix> {
    let k = basis.block();
    let s = basis.support();
    let mu = s.len();
    let w = CMatrix::from_fn(mu, mu, |j, col| {
        let (m, p) = (j / k, j % k);
        let n = s.n_lo() + col as i64;
        basis.r(m, n) * Complex64::from_polar(1.0 / k as f64, -(n as f64) * TAU * p as f64 / k as f64)
    });
    WeightMatrix::from_matrix(s.n_lo(), w)
}

impl Scheme {
    fn engine(pattern: Pattern, basis: InterpolantBasis, functionals: Vec<SampleFunctional>) -> Result<Self> {
        Ok(Self {
            pattern,
            support: basis.support(),
            weights: engine_weights(&basis)?,
            functionals,
            backend: Backend::Engine(basis),
        })
    }

    /// Samples `f(t_p)` then `f(t_p + α)`.
    pub fn rn1(m0: usize, alpha: f64, support: SpectralSupport) -> Result<Self> {
        let grid = RecurrentGrid::rn1(m0, alpha)?;
        let basis = rn1_basis(&grid, support)?;
        let f = grid
            .base_points()
            .into_iter()
            .chain(grid.shifted_points())
            .map(SampleFunctional::Value)
            .collect();
        Self::engine(Pattern::Rn1, basis, f)
    }

    /// Samples `f(t_p + α)` then `f'(t_p)`.
    pub fn rn2(m0: usize, alpha: f64, support: SpectralSupport) -> Result<Self> {
        let grid = RecurrentGrid::rn2(m0, alpha)?;
        let basis = rn2_basis(&grid, support)?;
        let f = grid
            .shifted_points()
            .into_iter()
            .map(SampleFunctional::Value)
            .chain(grid.base_points().into_iter().map(SampleFunctional::Derivative))
            .collect();
        let mut s = Self::engine(Pattern::Rn2, basis, f)?;
        if alpha == 0.0 {
            s.pattern = Pattern::U2;
        }
        Ok(s)
    }

    /// Uniform values and derivatives on `2πp/m₀`.
    pub fn u2(m0: usize, support: SpectralSupport) -> Result<Self> {
        Self::rn2(m0, 0.0, support)
    }

    /// Uniform values on `2πj/M`, `M = μ`.
    pub fn u1(support: SpectralSupport) -> Result<Self> {
        let m = support.len();
        let basis = build_basis(&[ChannelFilter::identity()], support)?;
        let f = (0..m).map(|j| SampleFunctional::Value(TAU * j as f64 / m as f64)).collect();
        Self::engine(Pattern::U1, basis, f)
    }

    pub fn gn1(grid: &GenericGrid, support: SpectralSupport) -> Result<Self> {
        if grid.len() != support.len() {
            return Err(Error::InvalidConfig(format!(
                "GN1 needs as many nodes as frequencies: {} nodes, band of {}",
                grid.len(),
                support.len()
            )));
        }
        Ok(Self {
            pattern: Pattern::Gn1,
            support,
            functionals: gn1_functionals(grid),
            weights: gn1_weights(grid, support.n_lo()),
            backend: Backend::Gn1,
        })
    }

    pub fn gn2(grid: &GenericGrid, n_lo: i64) -> Result<Self> {
        let basis = gn2_basis(grid, n_lo)?;
        Ok(Self {
            pattern: Pattern::Gn2,
            support: basis.support(),
            functionals: gn2_functionals(grid),
            weights: basis.weights(),
            backend: Backend::Gn2(Box::new(basis)),
        })
    }

    /// Scheme with `N` total samples in the benchmark configuration: band
    /// `{-N/2+1, …, N/2}`, `α = π/N`, random grids drawn from `rng`.
    pub fn benchmark(pattern: Pattern, total: usize, rng: &mut impl Rng) -> Result<Self> {
        if total < 2 || !total.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("total samples must be even and >= 2, got {total}")));
        }
        let m0 = total / 2;
        let support = SpectralSupport::with_len(1 - m0 as i64, total)?;
        let alpha = PI / total as f64;
        match pattern {
            Pattern::Rn1 => Self::rn1(m0, alpha, support),
            Pattern::Rn2 => Self::rn2(m0, alpha, support),
            Pattern::U1 => Self::u1(support),
            Pattern::U2 => Self::u2(m0, support),
            Pattern::Gn1 => Self::gn1(&rand1_grid(total, rng)?, support),
            Pattern::Gn2 => Self::gn2(&rand2_grid(total, rng)?, support.n_lo()),
        }
    }

    pub fn pattern(&self) -> Pattern {
        self.pattern
    }

    pub fn support(&self) -> SpectralSupport {
        self.support
    }

    pub fn functionals(&self) -> &[SampleFunctional] {
        &self.functionals
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    /// Reconstruct from samples listed in the order of [`Scheme::functionals`].
    pub fn reconstruct(&self, samples: &[Complex64]) -> Result<TrigPolynomial> {
        let mu = self.functionals.len();
        if samples.len() != mu {
            return Err(Error::LengthMismatch { expected: mu, got: samples.len() });
        }
        match &self.backend {
            Backend::Engine(basis) => {
                let k = basis.block();
                let sets: Vec<_> = samples
                    .chunks(k)
                    .enumerate()
                    .map(|(m, c)| ChannelSampleSet::new(m, c.to_vec()))
                    .collect();
                basis.reconstruct(&sets)
            }
            Backend::Gn1 => self.weights.apply(samples),
            Backend::Gn2(basis) => {
                let values: Vec<_> = samples.iter().step_by(2).copied().collect();
                let derivs: Vec<_> = samples.iter().skip(1).step_by(2).copied().collect();
                basis.reconstruct(&values, &derivs)
            }
        }
    }

    /// Sample `signal` at the scheme's functionals and reconstruct.
    pub fn reconstruct_signal(&self, signal: &dyn Signal) -> Result<TrigPolynomial> {
        let s: Vec<_> = self.functionals.iter().map(|f| signal.sample(f)).collect();
        self.reconstruct(&s)
    }

    /// `Σ_j W[j][k] s_j(n)` for every `k`.
    fn mode_response(&self, n: i64) -> Vec<Complex64> {
        let s: Vec<Complex64> = self.functionals.iter().map(|f| f.on_mode(n)).collect();
        let mu = s.len();
        (0..mu)
            .map(|k| (0..mu).map(|j| self.weights.get(j, k) * s[j]).sum())
            .collect()
    }

    /// `Er(n) = 1 + Σ_k |Σ_j W[j][k] s_j(n)|²` for out-of-band `n`.
    pub fn er(&self, n: i64) -> Result<f64> {
        if self.support.contains(n) {
            return Err(Error::InBand { n });
        }
        Ok(1.0 + self.mode_response(n).iter().map(|c| c.norm_sqr()).sum::<f64>())
    }

    /// For in-band `n` the response must be the unit vector at `n`; returns the largest deviation.
    pub fn in_band_defect(&self, n: i64) -> f64 {
        let k0 = self.support.index_of(n).expect("n in band");
        self.mode_response(n)
            .iter()
            .enumerate()
            .map(|(k, c)| (c - if k == k0 { 1.0 } else { 0.0 }).norm())
            .fold(0.0, f64::max)
    }

    /// `Er` over a window, skipping in-band frequencies.
    pub fn profile(&self, window: RangeInclusive<i64>) -> ErrorProfile {
        let ns: Vec<i64> = window.filter(|n| !self.support.contains(*n)).collect();
        let values = ns.par_iter().map(|&n| self.er(n).expect("out of band")).collect();
        ErrorProfile { support: self.support, pattern: self.pattern, n: ns, er: values }
    }

    /// `ε(f)` from the analytic profile over `|n| ≤ cutoff`.
    pub fn averaged_error(&self, coeffs: &CoefficientMap) -> Result<f64> {
        let c = coeffs.cutoff();
        averaged_error(coeffs, &self.profile(-c..=c))
    }
}

/// `Er(𝐍, n)` values on a set of out-of-band frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorProfile {
    pub support: SpectralSupport,
    pub pattern: Pattern,
    pub n: Vec<i64>,
    pub er: Vec<f64>,
}

impl ErrorProfile {
    pub fn get(&self, n: i64) -> Option<f64> {
        self.n.iter().position(|&m| m == n).map(|i| self.er[i])
    }

    /// Rows `n,Er` separated by `sep`.
    pub fn to_delimited(&self, sep: char) -> String {
        let mut out = format!("n{sep}Er\n");
        for (n, e) in self.n.iter().zip(&self.er) {
            out.push_str(&format!("{n}{sep}{e:.17e}\n"));
        }
        out
    }
}

pub fn er_gn1(grid: &GenericGrid, support: SpectralSupport, n: i64) -> Result<f64> {
    if support.contains(n) {
        return Err(Error::InBand { n });
    }
    let w = gn1_weights(grid, support.n_lo());
    let m = grid.len();
    let mut acc = 1.0;
    for k in 0..m {
        let s: Complex64 = (0..m)
            .map(|p| Complex64::from_polar(1.0, n as f64 * grid.nodes()[p]) * w.get(p, k))
            .sum();
        acc += s.norm_sqr();
    }
    Ok(acc)
}

pub fn er_gn2(grid: &GenericGrid, n_lo: i64, n: i64) -> Result<f64> {
    let basis = gn2_basis(grid, n_lo)?;
    if basis.support().contains(n) {
        return Err(Error::InBand { n });
    }
    let mut acc = 1.0;
    for k in 0..basis.support().len() {
        let s: Complex64 = (0..grid.len())
            .map(|p| {
                let e = Complex64::from_polar(1.0, n as f64 * grid.nodes()[p]);
                e * basis.psi(p).coeffs()[k] + Complex64::new(0.0, n as f64) * e * basis.phi(p).coeffs()[k]
            })
            .sum();
        acc += s.norm_sqr();
    }
    Ok(acc)
}

/// Two-term closed form for RN2. The block index is `k_n = ⌊(n - N₁)/m₀⌋ + 1`;
/// the toward-zero rounding agrees with it for `n ≥ N₁` only.
pub fn er_rn2(grid: &RecurrentGrid, support: SpectralSupport, n: i64) -> Result<f64> {
    if support.contains(n) {
        return Err(Error::InBand { n });
    }
    let m0 = grid.m0() as i64;
    let kn = (n - support.n_lo()).div_euclid(m0) + 1;
    let m0f = m0 as f64;
    let nf = n as f64;
    let knm = (kn * m0) as f64;
    let e = Complex64::from_polar(1.0, m0f * grid.alpha());
    let ek = Complex64::from_polar(1.0, (kn - 1) as f64 * m0f * grid.alpha());
    let den = (2.0 * m0f + nf - knm) - (nf + m0f - knm) * e;
    if den.norm() <= 1e-12 * (m0f + nf.abs()) {
        return Err(Error::VanishingDenominator { n });
    }
    let a = ((2.0 * m0f + nf - knm) * ek - nf * e) / den;
    let b = (nf - (m0f + nf - knm) * ek) / den;
    Ok(1.0 + a.norm_sqr() + b.norm_sqr())
}

/// `√(Σ_{n∉I} |a(n)|² Er(n))` over the coefficient cutoff.
pub fn averaged_error(coeffs: &CoefficientMap, profile: &ErrorProfile) -> Result<f64> {
    let total = coeffs.mass() + coeffs.tail_mass();
    if total > 0.0 && coeffs.tail_mass() > TAIL_RTOL * total {
        return Err(Error::InsufficientTailDecay { ratio: coeffs.tail_mass() / total });
    }
    let mut acc = 0.0;
    for (n, a) in coeffs.iter() {
        if profile.support.contains(n) || a.norm_sqr() == 0.0 {
            continue;
        }
        let er = profile.get(n).ok_or_else(|| {
            Error::InvalidConfig(format!("error profile does not cover n = {n}"))
        })?;
        acc += a.norm_sqr() * er;
    }
    Ok(acc.sqrt())
}

/// Anything that can be sampled by value and first derivative.
pub trait Signal: Sync {
    fn value(&self, t: f64) -> Complex64;
    fn derivative(&self, t: f64) -> Complex64;

    fn sample(&self, f: &SampleFunctional) -> Complex64 {
        match *f {
            SampleFunctional::Value(t) => self.value(t),
            SampleFunctional::Derivative(t) => self.derivative(t),
        }
    }
}

impl Signal for TestFunction {
    fn value(&self, t: f64) -> Complex64 {
        Complex64::new(self.f(t), 0.0)
    }
    fn derivative(&self, t: f64) -> Complex64 {
        Complex64::new(self.df(t), 0.0)
    }
}

impl Signal for TrigPolynomial {
    fn value(&self, t: f64) -> Complex64 {
        self.eval(t)
    }
    fn derivative(&self, t: f64) -> Complex64 {
        TrigPolynomial::derivative(self).eval(t)
    }
}

struct Shifted<'a> {
    inner: &'a dyn Signal,
    tau: f64,
}

impl Signal for Shifted<'_> {
    fn value(&self, t: f64) -> Complex64 {
        self.inner.value(t - self.tau)
    }
    fn derivative(&self, t: f64) -> Complex64 {
        self.inner.derivative(t - self.tau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftMode {
    /// `τ_j = 2πj/n_shifts`.
    Equispaced,
    /// `τ_j` uniform on `[0, 2π)` from a seeded generator.
    Random(u64),
}

/// `ς(f, τ) = ‖f_τ - T f_τ‖₂²` by quadrature on [`QUADRATURE_NODES`] points.
pub fn shift_error(signal: &dyn Signal, scheme: &Scheme, tau: f64) -> Result<f64> {
    let shifted = Shifted { inner: signal, tau };
    let rec = scheme.reconstruct_signal(&shifted)?;
    let values = rec.eval_dense(QUADRATURE_NODES)?;
    let l = QUADRATURE_NODES as f64;
    Ok(values
        .iter()
        .enumerate()
        .map(|(j, v)| (shifted.value(TAU * j as f64 / l) - v).norm_sqr())
        .sum::<f64>()
        / l)
}

/// `√(mean_τ ς(f, τ))`.
pub fn monte_carlo_error(signal: &dyn Signal, scheme: &Scheme, n_shifts: usize, mode: ShiftMode) -> Result<f64> {
    if n_shifts == 0 {
        return Err(Error::InvalidConfig("n_shifts must be at least 1".into()));
    }
    let taus: Vec<f64> = match mode {
        ShiftMode::Equispaced => (0..n_shifts).map(|j| TAU * j as f64 / n_shifts as f64).collect(),
        ShiftMode::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n_shifts).map(|_| rng.gen_range(0.0..TAU)).collect()
        }
    };
    let errs = taus
        .par_iter()
        .map(|&tau| shift_error(signal, scheme, tau))
        .collect::<Result<Vec<f64>>>()?;
    Ok((errs.iter().sum::<f64>() / n_shifts as f64).sqrt())
}

/// `t_n = (n-1) 2π/N + ζ_n`, `ζ_n ~ U(0, 2π/3N)`, `n = 1..N`.
pub fn rand1_grid(total: usize, rng: &mut impl Rng) -> Result<GenericGrid> {
    let h = TAU / total as f64;
    GenericGrid::new((0..total).map(|j| j as f64 * h + rng.gen_range(0.0..h / 3.0)).collect())
}

/// `t̃_n = (n-1) 4π/N + η_n`, `η_n ~ U(0, 4π/3N)`, `n = 1..N/2`.
pub fn rand2_grid(total: usize, rng: &mut impl Rng) -> Result<GenericGrid> {
    let h = 2.0 * TAU / total as f64;
    GenericGrid::new((0..total / 2).map(|j| j as f64 * h + rng.gen_range(0.0..h / 3.0)).collect())
}

/// One benchmark row: mean errors for `f` and `ℋf` and their sample variances.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub pattern: Pattern,
    pub total: usize,
    pub trials: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub var1: f64,
    pub var2: f64,
}

impl Table1Row {
    pub const HEADER: [&'static str; 6] = ["pattern", "N", "delta1", "delta2", "var1", "var2"];

    pub fn fields(&self) -> [String; 6] {
        [
            self.pattern.name().to_string(),
            self.total.to_string(),
            format!("{:.6}", self.delta1),
            format!("{:.6}", self.delta2),
            format!("{:.6e}", self.var1),
            format!("{:.6e}", self.var2),
        ]
    }
}

/// Relative errors `(δ₁, δ₂)` of one reconstruction of the test function, using the real
/// parts of the interpolant and of its Hilbert transform on the quadrature grid.
pub fn relative_errors(rec: &TrigPolynomial) -> Result<(f64, f64)> {
    let tf = TestFunction;
    let fh = rec.eval_dense(QUADRATURE_NODES)?;
    let hh = rec.hilbert().eval_dense(QUADRATURE_NODES)?;
    let (mut e1, mut n1, mut e2, mut n2) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..QUADRATURE_NODES {
        let t = TAU * j as f64 / QUADRATURE_NODES as f64;
        let (f, h) = (tf.f(t), tf.hilbert_f(t));
        e1 += (f - fh[j].re).powi(2);
        n1 += f * f;
        e2 += (h - hh[j].re).powi(2);
        n2 += h * h;
    }
    Ok(((e1 / n1).sqrt(), (e2 / n2).sqrt()))
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Reconstruct the test function with `total` samples. Random patterns average over
/// `trials` grids, trial `i` drawing from stream `i` of a generator seeded with `seed`;
/// deterministic patterns run once.
pub fn table1_benchmark(total: usize, pattern: Pattern, trials: usize, seed: u64) -> Result<Table1Row> {
    let runs = if pattern.is_stochastic() { trials } else { 1 };
    if runs == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let tf = TestFunction;
    let results = (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let scheme = Scheme::benchmark(pattern, total, &mut rng)?;
            relative_errors(&scheme.reconstruct_signal(&tf)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let d1: Vec<f64> = results.iter().map(|r| r.0).collect();
    let d2: Vec<f64> = results.iter().map(|r| r.1).collect();
    let (delta1, var1) = mean_var(&d1);
    let (delta2, var2) = mean_var(&d2);
    Ok(Table1Row { pattern, total, trials: runs, delta1, delta2, var1, var2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym64() -> SpectralSupport {
        SpectralSupport::new(-31, 32).unwrap()
    }

    #[test]
    fn fix_rounds_toward_zero() {
        assert_eq!(fix(-1.5), -1.0);
        assert_eq!(fix(1.7), 1.0);
        assert_eq!(fix((33.0 + 31.0) / 32.0) + 1.0, 3.0);
    }

    #[test]
    fn pattern_parse() {
        assert_eq!("gn2".parse::<Pattern>().unwrap(), Pattern::Gn2);
        assert!("xx".parse::<Pattern>().is_err());
    }

    #[test]
    fn er_in_band_rejected() {
        let s = Scheme::u1(sym64()).unwrap();
        assert_eq!(s.er(0).unwrap_err(), Error::InBand { n: 0 });
    }

    #[test]
    fn er_gn1_matches_scheme_and_unit_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = rand1_grid(64, &mut rng).unwrap();
        let s = Scheme::gn1(&g, sym64()).unwrap();
        for n in [33, 40, 100, -32, -90] {
            let a = er_gn1(&g, sym64(), n).unwrap();
            assert!((a - s.er(n).unwrap()).abs() <= 1e-8 * a);
            assert!(a >= 1.0);
        }
        for n in sym64().iter() {
            assert!(s.in_band_defect(n) < 1e-9);
        }
    }

    #[test]
    fn er_gn2_matches_scheme() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = GenericGrid::new(vec![0.4, 3.5]).unwrap();
        let s = Scheme::gn2(&g, -1).unwrap();
        let a = er_gn2(&g, -1, 3).unwrap();
        assert!((a - s.er(3).unwrap()).abs() <= 1e-8 * a);
        let g = rand2_grid(64, &mut rng).unwrap();
        let s = Scheme::gn2(&g, -31).unwrap();
        for n in sym64().iter() {
            assert!(s.in_band_defect(n) < 1e-9, "n={n}");
        }
    }

    #[test]
    fn er_rn2_closed_form_matches_weights() {
        for alpha in [0.0, 0.05, PI / 64.0, PI / 32.0 * 0.9] {
            let g = RecurrentGrid::rn2(32, alpha).unwrap();
            let s = Scheme::rn2(32, alpha, sym64()).unwrap();
            for n in (-200..=200).filter(|n| !sym64().contains(*n)) {
                let a = er_rn2(&g, sym64(), n).unwrap();
                let b = s.er(n).unwrap();
                assert!((a - b).abs() <= 1e-8 * b, "alpha={alpha} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn u1_is_periodic() {
        let s = Scheme::u1(sym64()).unwrap();
        for n in 33..100 {
            assert!((s.er(n).unwrap() - s.er(n + 64).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn averaged_error_examples() {
        let s = Scheme::u1(SpectralSupport::new(-3, 4).unwrap()).unwrap();
        let inside = TrigPolynomial::from_fn(SpectralSupport::new(-3, 4).unwrap(), |n| Complex64::new(n as f64, 1.0));
        assert_eq!(s.averaged_error(&CoefficientMap::from_poly(&inside)).unwrap(), 0.0);
        let single = TrigPolynomial::from_fn(SpectralSupport::new(5, 5).unwrap(), |_| Complex64::new(1.0, 0.0));
        let e = s.averaged_error(&CoefficientMap::from_poly(&single)).unwrap();
        assert!((e - s.er(5).unwrap().sqrt()).abs() < 1e-14);
        let heavy = CoefficientMap::new(1, vec![Complex64::new(1.0, 0.0); 3], 1.0);
        assert!(matches!(s.averaged_error(&heavy), Err(Error::InsufficientTailDecay { .. })));
    }

    #[test]
    fn monte_carlo_examples() {
        let support = SpectralSupport::new(-3, 4).unwrap();
        let s = Scheme::rn1(4, 0.3, support).unwrap();
        let f = TrigPolynomial::from_fn(support, |n| Complex64::new(1.0 / (1.0 + n.abs() as f64), 0.2));
        assert!(monte_carlo_error(&f, &s, 16, ShiftMode::Equispaced).unwrap() < 1e-9);
        let tf = TestFunction;
        let one = monte_carlo_error(&tf, &s, 1, ShiftMode::Equispaced).unwrap();
        assert!((one * one - shift_error(&tf, &s, 0.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn analytic_matches_monte_carlo_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = rand2_grid(16, &mut rng).unwrap();
        let s = Scheme::gn2(&g, -7).unwrap();
        let tf = TestFunction;
        let a = s.averaged_error(&tf.coefficients(TAIL_CUTOFF)).unwrap();
        let m = monte_carlo_error(&tf, &s, 256, ShiftMode::Equispaced).unwrap();
        assert!((a - m).abs() <= 0.01 * a, "{a} vs {m}");
    }

    #[test]
    fn benchmark_row_rn1_54() {
        let r = table1_benchmark(54, Pattern::Rn1, 1, 0).unwrap();
        assert!((r.delta1 - 0.1955).abs() < 0.002, "{r:?}");
        assert!((r.delta2 - 0.1922).abs() < 0.002, "{r:?}");
        assert_eq!(r.var1, 0.0);
    }
}
