//! Generic nonuniform interpolation.
//!
//! GN1 reconstructs a band of `M` frequencies from values at `M` arbitrary nodes
//! (a Vandermonde system); GN2 reconstructs a band of `2m₀` frequencies from values
//! and first derivatives at `m₀` nodes (a confluent Vandermonde system). Both are
//! solved in closed form; the explicit linear system is kept only as an oracle.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::spectral::{SpectralSupport, TrigPolynomial};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// Relative separation threshold: grids whose smallest circular gap is below
/// `GAP_RTOL * 2π/M` are rejected.
pub const GAP_RTOL: f64 = 1e-6;

/// Strictly increasing nodes in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericGrid {
    nodes: Vec<f64>,
    min_gap: f64,
}

impl GenericGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidGrid("no nodes".into()));
        }
        if let Some(t) = nodes.iter().find(|t| !(0.0..TAU).contains(*t)) {
            return Err(Error::InvalidGrid(format!("node {t} outside [0, 2π)")));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("nodes must be strictly increasing".into()));
        }
        let min_gap = circular_min_gap(&nodes);
        let threshold = GAP_RTOL * TAU / nodes.len() as f64;
        if min_gap < threshold {
            return Err(Error::IllConditionedGrid { gap: min_gap, threshold });
        }
        Ok(Self { nodes, min_gap })
    }

    /// Sort first, then validate.
    pub fn from_unsorted(mut nodes: Vec<f64>) -> Result<Self> {
        nodes.sort_by(|a, b| a.total_cmp(b));
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }
}

fn circular_min_gap(nodes: &[f64]) -> f64 {
    let m = nodes.len();
    if m == 1 {
        return TAU;
    }
    let inner = nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    inner.min(nodes[0] + TAU - nodes[m - 1])
}

/// Square coefficient map `a(N₁+k) = Σ_j W[j][k] s_j` from samples to Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n_lo: i64,
    w: CMatrix,
}

impl WeightMatrix {
    /// Wrap a square matrix whose row `j` holds the weights of sample `j`.
    pub fn from_matrix(n_lo: i64, w: CMatrix) -> Result<Self> {
        if w.rows() != w.cols() {
            return Err(Error::LengthMismatch { expected: w.rows(), got: w.cols() });
        }
        Ok(Self { n_lo, w })
    }

    /// Weight of sample `j` on the coefficient of frequency `N₁ + k` (both zero-based).
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.w[(j, k)]
    }

    pub fn n_lo(&self) -> i64 {
        self.n_lo
    }

    pub fn dim(&self) -> usize {
        self.w.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.w
    }

    /// Apply to a sample vector.
    pub fn apply(&self, samples: &[Complex64]) -> Result<TrigPolynomial> {
        let m = self.dim();
        if samples.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: samples.len() });
        }
        let support = SpectralSupport::with_len(self.n_lo, m)?;
        let coeffs = (0..m)
            .map(|k| (0..m).map(|j| self.w[(j, k)] * samples[j]).sum())
            .collect();
        TrigPolynomial::new(support, coeffs)
    }

    /// `max |H W - I|` for the explicit system matrix `H[k][j]` (row: frequency, column: sample).
    pub fn residual(&self, h: &CMatrix) -> f64 {
        h.mul(&self.w).max_abs_diff(&CMatrix::identity(self.dim()))
    }
}

/// Point evaluations a reconstruction may be built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleFunctional {
    Value(f64),
    Derivative(f64),
}

impl SampleFunctional {
    /// The functional applied to `e^{int}`.
    pub fn on_mode(&self, n: i64) -> Complex64 {
        match *self {
            SampleFunctional::Value(t) => cis(n as f64 * t),
            SampleFunctional::Derivative(t) => Complex64::new(0.0, n as f64) * cis(n as f64 * t),
        }
    }

    pub fn apply(&self, f: &TrigPolynomial) -> Complex64 {
        match *self {
            SampleFunctional::Value(t) => f.eval(t),
            SampleFunctional::Derivative(t) => f.derivative().eval(t),
        }
    }
}

/// GN2 sample layout: `f(t_p)` followed by `f'(t_p)` for every node.
pub fn gn2_functionals(grid: &GenericGrid) -> Vec<SampleFunctional> {
    grid.nodes
        .iter()
        .flat_map(|&t| [SampleFunctional::Value(t), SampleFunctional::Derivative(t)])
        .collect()
}

pub fn gn1_functionals(grid: &GenericGrid) -> Vec<SampleFunctional> {
    grid.nodes.iter().map(|&t| SampleFunctional::Value(t)).collect()
}

/// Explicit system `H[k][j] = s_j(e^{i(N₁+k)t})`.
pub fn system_matrix(support: SpectralSupport, functionals: &[SampleFunctional]) -> CMatrix {
    CMatrix::from_fn(support.len(), functionals.len(), |k, j| {
        functionals[j].on_mode(support.n_lo() + k as i64)
    })
}

/// Brute-force solution of the explicit square system with a 1-norm condition estimate.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub poly: TrigPolynomial,
    pub condition: f64,
}

impl OracleSolution {
    pub fn is_ill_conditioned(&self) -> bool {
        self.condition > 1e12
    }
}

pub fn matrix_oracle_reconstruct(
    support: SpectralSupport,
    functionals: &[SampleFunctional],
    values: &[Complex64],
) -> Result<OracleSolution> {
    if functionals.len() != support.len() {
        return Err(Error::LengthMismatch { expected: support.len(), got: functionals.len() });
    }
    if values.len() != functionals.len() {
        return Err(Error::LengthMismatch { expected: functionals.len(), got: values.len() });
    }
    // Rows are functionals, columns frequencies.
    let a = system_matrix(support, functionals).transpose();
    let condition = a.condition_1();
    let lu = a.lu();
    if lu.is_singular() {
        return Err(Error::SingularSystem { cond: condition });
    }
    let poly = TrigPolynomial::new(support, lu.solve(values))?;
    Ok(OracleSolution { poly, condition })
}

/// Radical-inverse ordering, so that partial products of roots stay spread over the circle.
fn spread_order(m: usize) -> Vec<usize> {
    let bits = usize::BITS - m.max(1).leading_zeros();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by_key(|&i| i.reverse_bits() >> (usize::BITS - bits));
    idx
}

/// Coefficients `β₀..β_d` (ascending powers) of `∏ (x - r)`.
fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![ONE];
    for &r in roots {
        c.push(ZERO);
        for k in (1..c.len()).rev() {
            let lower = c[k - 1];
            c[k] = lower - r * c[k];
        }
        c[0] = -r * c[0];
    }
    c
}

/// GN1 weights `z_p(k)`: `W[p][k]` is the coefficient of `e^{i(N₁+k)t}` in `h_p`.
pub fn gn1_weights(grid: &GenericGrid, n_lo: i64) -> WeightMatrix {
    let m = grid.len();
    let z: Vec<Complex64> = grid.nodes.iter().map(|&t| cis(t)).collect();
    let order = spread_order(m);
    let mut w = CMatrix::zeros(m, m);
    for p in 0..m {
        let others: Vec<Complex64> = order.iter().filter(|&&s| s != p).map(|&s| z[s]).collect();
        let beta = poly_from_roots(&others);
        let denom: Complex64 = others.iter().map(|&zs| zs - z[p]).product();
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let scale = sign * cis(-(n_lo as f64) * grid.nodes[p]) / denom;
        for k in 0..m {
            w[(p, k)] = beta[k] * scale;
        }
    }
    WeightMatrix { n_lo, w }
}

/// Sine-product form of the GN1 kernel `h_p(t)`.
pub fn gn1_kernel(grid: &GenericGrid, n_lo: i64, p: usize, t: f64) -> Complex64 {
    let nodes = &grid.nodes;
    let tp = nodes[p];
    let m = nodes.len() as f64;
    let mut ratio = 1.0;
    for (s, &ts) in nodes.iter().enumerate() {
        if s != p {
            ratio *= ((t - ts) / 2.0).sin() / ((tp - ts) / 2.0).sin();
        }
    }
    cis(n_lo as f64 * (t - tp) + (m - 1.0) * (t - tp) / 2.0) * ratio
}

pub fn gn1_reconstruct(grid: &GenericGrid, support: SpectralSupport, values: &[Complex64]) -> Result<TrigPolynomial> {
    if support.len() != grid.len() {
        return Err(Error::InvalidConfig(format!(
            "GN1 needs as many nodes as frequencies: {} nodes, band of {}",
            grid.len(),
            support.len()
        )));
    }
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
    }
    gn1_weights(grid, support.n_lo()).apply(values)
}

/// Closed-form `det H` for the value-plus-derivative system on `nodes`.
/// Coincident nodes give zero.
pub fn gn2_det(nodes: &[f64], n_lo: i64) -> Complex64 {
    let m0 = nodes.len();
    let sum: f64 = nodes.iter().sum();
    let mut prod = ONE;
    for p in 0..m0 {
        for q in p + 1..m0 {
            prod *= (cis(nodes[q]) - cis(nodes[p])).powu(4);
        }
    }
    I.powu(m0 as u32) * cis((2 * n_lo + 1) as f64 * sum) * prod
}

/// `det H̃(t₁,…,t_{m₀})` by the recursion
/// `det H̃(t₁,…) = e^{it₁} ∏_{p>1}(e^{it_p} - e^{it₁})⁴ det H̃(t₂,…)`, `det H̃(t) = e^{it}`.
pub fn gn2_det_tilde_recursive(nodes: &[f64]) -> Complex64 {
    match nodes {
        [] => ONE,
        [t] => cis(*t),
        [t1, rest @ ..] => {
            let z1 = cis(*t1);
            let f: Complex64 = rest.iter().map(|&t| (cis(t) - z1).powu(4)).product();
            z1 * f * gn2_det_tilde_recursive(rest)
        }
    }
}

/// `det H = i^{m₀} e^{2iN₁Σt} det H̃`.
pub fn gn2_det_from_recursion(nodes: &[f64], n_lo: i64) -> Complex64 {
    let sum: f64 = nodes.iter().sum();
    I.powu(nodes.len() as u32) * cis(2.0 * n_lo as f64 * sum) * gn2_det_tilde_recursive(nodes)
}

/// GN2 interpolants `φ_p` (derivative sample) and `ψ_p` (value sample).
#[derive(Debug, Clone)]
pub struct Gn2Basis {
    grid: GenericGrid,
    support: SpectralSupport,
    phi: Vec<TrigPolynomial>,
    psi: Vec<TrigPolynomial>,
}

struct Gn2Node {
    zp: Complex64,
    // ∏_{s≠p} (z_s - z_p)^{-2}
    inv_den: Complex64,
    // Σ_{s≠p} 1/(z_s - z_p)
    recip_sum: Complex64,
}

fn gn2_node(z: &[Complex64], p: usize) -> Gn2Node {
    let zp = z[p];
    let mut den = ONE;
    let mut recip_sum = ZERO;
    for (s, &zs) in z.iter().enumerate() {
        if s != p {
            let d = zs - zp;
            den *= d * d;
            recip_sum += d.inv();
        }
    }
    Gn2Node { zp, inv_den: den.inv(), recip_sum }
}

/// `(φ_p(t), ψ_p(t))` from the closed forms.
fn gn2_closed(z: &[Complex64], nodes: &[f64], n_lo: i64, node: &Gn2Node, p: usize, t: f64) -> (Complex64, Complex64) {
    let zt = cis(t);
    let mut prod = ONE;
    for (s, &zs) in z.iter().enumerate() {
        if s != p {
            let d = zt - zs;
            prod *= d * d;
        }
    }
    let pp = prod * node.inv_den;
    let dt = t - nodes[p];
    let e = cis(n_lo as f64 * dt);
    let phi = -I * e * (cis(dt) - ONE) * pp;
    let psi = 2.0 * e * (zt - node.zp) * pp * node.recip_sum - I * n_lo as f64 * phi + e * pp;
    (phi, psi)
}

pub fn gn2_basis(grid: &GenericGrid, n_lo: i64) -> Result<Gn2Basis> {
    let m0 = grid.len();
    let mu = 2 * m0;
    let support = SpectralSupport::with_len(n_lo, mu)?;
    let z: Vec<Complex64> = grid.nodes.iter().map(|&t| cis(t)).collect();
    let fft = FftPlanner::new().plan_fft_forward(mu);
    let mut phi = Vec::with_capacity(m0);
    let mut psi = Vec::with_capacity(m0);
    // Both interpolants are trigonometric polynomials on a band of exactly μ
    // frequencies, so μ equispaced samples of the closed forms determine them.
    for p in 0..m0 {
        let node = gn2_node(&z, p);
        let mut a = vec![ZERO; mu];
        let mut b = vec![ZERO; mu];
        for j in 0..mu {
            let (f, g) = gn2_closed(&z, &grid.nodes, n_lo, &node, p, TAU * j as f64 / mu as f64);
            a[j] = f;
            b[j] = g;
        }
        fft.process(&mut a);
        fft.process(&mut b);
        let unfold = |buf: &[Complex64]| {
            TrigPolynomial::from_fn(support, |n| buf[n.rem_euclid(mu as i64) as usize] / mu as f64)
        };
        phi.push(unfold(&a));
        psi.push(unfold(&b));
    }
    Ok(Gn2Basis { grid: grid.clone(), support, phi, psi })
}

impl Gn2Basis {
    pub fn grid(&self) -> &GenericGrid {
        &self.grid
    }

    pub fn support(&self) -> SpectralSupport {
        self.support
    }

    pub fn phi(&self, p: usize) -> &TrigPolynomial {
        &self.phi[p]
    }

    pub fn psi(&self, p: usize) -> &TrigPolynomial {
        &self.psi[p]
    }

    /// `(φ_p(t), ψ_p(t))` evaluated directly from the closed forms.
    pub fn eval_closed(&self, p: usize, t: f64) -> (Complex64, Complex64) {
        let z: Vec<Complex64> = self.grid.nodes.iter().map(|&t| cis(t)).collect();
        let node = gn2_node(&z, p);
        gn2_closed(&z, &self.grid.nodes, self.support.n_lo(), &node, p, t)
    }

    /// Weight matrix in the layout of [`gn2_functionals`]: row `2p` is `ψ_p`, row `2p+1` is `φ_p`.
    pub fn weights(&self) -> WeightMatrix {
        let mu = self.support.len();
        let w = CMatrix::from_fn(mu, mu, |j, k| {
            let poly = if j % 2 == 0 { &self.psi[j / 2] } else { &self.phi[j / 2] };
            poly.coeffs()[k]
        });
        WeightMatrix { n_lo: self.support.n_lo(), w }
    }

    /// `Σ_p f(t_p) ψ_p + f'(t_p) φ_p`.
    pub fn reconstruct(&self, values: &[Complex64], derivs: &[Complex64]) -> Result<TrigPolynomial> {
        let m0 = self.grid.len();
        if values.len() != m0 {
            return Err(Error::LengthMismatch { expected: m0, got: values.len() });
        }
        if derivs.len() != m0 {
            return Err(Error::LengthMismatch { expected: m0, got: derivs.len() });
        }
        let mut coeffs = vec![ZERO; self.support.len()];
        for p in 0..m0 {
            for (c, (a, b)) in coeffs
                .iter_mut()
                .zip(self.psi[p].coeffs().iter().zip(self.phi[p].coeffs()))
            {
                *c += values[p] * a + derivs[p] * b;
            }
        }
        TrigPolynomial::new(self.support, coeffs)
    }
}

pub fn gn2_reconstruct(
    grid: &GenericGrid,
    n_lo: i64,
    values: &[Complex64],
    derivs: &[Complex64],
) -> Result<TrigPolynomial> {
    gn2_basis(grid, n_lo)?.reconstruct(values, derivs)
}
