//! Reference signals used by the examples, benchmarks and error analysis.

use num_complex::Complex64;

use crate::spectral::{SpectralSupport, TrigPolynomial};

/// `f(t) = 0.05 t (t - 2π)(0.04t² + 0.02t³ + cos(3 sin t))` on `[0, 2π)`.
pub fn example_signal(t: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    0.05 * t * (t - tau) * (0.04 * t * t + 0.02 * t.powi(3) + (3.0 * t.sin()).cos())
}

pub fn example_signal_derivative(t: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let u = 0.05 * t * (t - tau);
    let du = 0.05 * (2.0 * t - tau);
    let v = 0.04 * t * t + 0.02 * t.powi(3) + (3.0 * t.sin()).cos();
    let dv = 0.08 * t + 0.06 * t * t - (3.0 * t.sin()).sin() * 3.0 * t.cos();
    du * v + u * dv
}

/// Fourier coefficients `a(n)`, `|n| ≤ cutoff`, with the energy left beyond the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMap {
    cutoff: i64,
    coeffs: Vec<Complex64>,
    tail_mass: f64,
}

impl CoefficientMap {
    pub fn new(cutoff: i64, coeffs: Vec<Complex64>, tail_mass: f64) -> Self {
        assert_eq!(coeffs.len() as i64, 2 * cutoff + 1);
        Self { cutoff, coeffs, tail_mass }
    }

    /// Coefficients of a trigonometric polynomial; nothing is truncated.
    pub fn from_poly(p: &TrigPolynomial) -> Self {
        let s = p.support();
        let cutoff = s.n_lo().abs().max(s.n_hi().abs());
        let coeffs = (-cutoff..=cutoff).map(|n| p.coeff(n)).collect();
        Self { cutoff, coeffs, tail_mass: 0.0 }
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn get(&self, n: i64) -> Complex64 {
        if n.abs() > self.cutoff {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n + self.cutoff) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        (-self.cutoff..=self.cutoff).zip(self.coeffs.iter().copied())
    }

    /// `Σ |a(n)|²` within the cutoff.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn to_poly(&self) -> TrigPolynomial {
        TrigPolynomial::new(
            SpectralSupport::new(-self.cutoff, self.cutoff).expect("cutoff >= 0"),
            self.coeffs.clone(),
        )
        .expect("length matches")
    }
}

/// `Φ(z) = (0.08z² + 0.06z¹⁰)/((1.3-z)(1.5-z)) + (0.05z³ + 0.09z¹⁰)/((1.2+z)(1.3+z))`,
/// with `f = Re Φ(e^{it})` and `ℋf = Im Φ(e^{it})`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TestFunction;

impl TestFunction {
    pub fn phi(&self, z: Complex64) -> Complex64 {
        let a = 0.08 * z.powu(2) + 0.06 * z.powu(10);
        let b = (1.3 - z) * (1.5 - z);
        let c = 0.05 * z.powu(3) + 0.09 * z.powu(10);
        let d = (1.2 + z) * (1.3 + z);
        a / b + c / d
    }

    pub fn phi_prime(&self, z: Complex64) -> Complex64 {
        let a = 0.08 * z.powu(2) + 0.06 * z.powu(10);
        let da = 0.16 * z + 0.6 * z.powu(9);
        let b = (1.3 - z) * (1.5 - z);
        let db = 2.0 * z - 2.8;
        let c = 0.05 * z.powu(3) + 0.09 * z.powu(10);
        let dc = 0.15 * z.powu(2) + 0.9 * z.powu(9);
        let d = (1.2 + z) * (1.3 + z);
        let dd = 2.0 * z + 2.5;
        (da * b - a * db) / (b * b) + (dc * d - c * dd) / (d * d)
    }

    pub fn f(&self, t: f64) -> f64 {
        self.phi(Complex64::from_polar(1.0, t)).re
    }

    pub fn hilbert_f(&self, t: f64) -> f64 {
        self.phi(Complex64::from_polar(1.0, t)).im
    }

    /// `f'(t) = Re(Φ'(z) i z)`, `z = e^{it}`.
    pub fn df(&self, t: f64) -> f64 {
        let z = Complex64::from_polar(1.0, t);
        (self.phi_prime(z) * Complex64::i() * z).re
    }

    /// Taylor coefficient `c_k` of `Φ` at the origin.
    pub fn taylor(&self, k: i64) -> f64 {
        let g1 = |j: i64| {
            if j < 0 {
                0.0
            } else {
                (1.3f64.powi(-(j as i32) - 1) - 1.5f64.powi(-(j as i32) - 1)) / 0.2
            }
        };
        let g2 = |j: i64| {
            if j < 0 {
                0.0
            } else {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                s * (1.2f64.powi(-(j as i32) - 1) - 1.3f64.powi(-(j as i32) - 1)) / 0.1
            }
        };
        0.08 * g1(k - 2) + 0.06 * g1(k - 10) + 0.05 * g2(k - 3) + 0.09 * g2(k - 10)
    }

    /// Fourier coefficient of `f`: `a(±n) = c_n / 2` for `n > 0`, `a(0) = c_0 = 0`.
    pub fn coeff(&self, n: i64) -> Complex64 {
        let c = self.taylor(n.abs());
        Complex64::new(if n == 0 { c } else { c / 2.0 }, 0.0)
    }

    pub fn coefficients(&self, cutoff: i64) -> CoefficientMap {
        let coeffs = (-cutoff..=cutoff).map(|n| self.coeff(n)).collect();
        // Decay is geometric with ratio 1/1.2, so three more cutoffs exhaust double precision.
        let tail_mass = (cutoff + 1..=4 * cutoff + 64)
            .map(|n| 2.0 * self.coeff(n).norm_sqr())
            .sum();
        CoefficientMap { cutoff, coeffs, tail_mass }
    }

    pub fn hilbert_coefficients(&self, cutoff: i64) -> CoefficientMap {
        let base = self.coefficients(cutoff);
        let coeffs = base
            .iter()
            .map(|(n, a)| Complex64::new(0.0, -(n.signum() as f64)) * a)
            .collect();
        CoefficientMap { cutoff, coeffs, tail_mass: base.tail_mass }
    }
}
