//! Real and complex fields on a periodic grid, with spectral calculus.
//!
//! Derivatives go through the Fourier differentiation theorem
//! `d^n f/dx^n = F^-1{(ik)^n F{f}}`, exact for band-limited inputs. Integrals
//! are the plain Riemann sum `sum f * dx`, which is spectrally accurate on a
//! periodic grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::GridSpec;

/// Derivative order accepted by the spectral differentiation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    First,
    Second,
}

impl DerivativeOrder {
    /// Map the numeric order from the operation contract (1 or 2).
    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            1 => Ok(DerivativeOrder::First),
            2 => Ok(DerivativeOrder::Second),
            other => Err(Error::Unsupported { reason: format!("derivative order {other} (only 1 and 2)") }),
        }
    }
}

/// Real-valued function sampled on the grid (roles: P, S, S0, V, u, Q).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::GridMismatch { left: grid.n_points(), right: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "scalar field", index });
        }
        Ok(ScalarField { grid, values })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.n_points()).map(|j| f(grid.point(j))).collect();
        ScalarField::new(grid, values)
    }

    pub fn zeros(grid: GridSpec) -> Self {
        ScalarField { grid, values: vec![0.0; grid.n_points()] }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Result<Self> {
        ScalarField::new(grid, vec![value; grid.n_points()])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Spectral derivative of the requested order.
    ///
    /// The Nyquist mode is zeroed for odd orders (its first derivative has no
    /// consistent real representation on the grid).
    pub fn differentiate(&self, order: DerivativeOrder) -> ScalarField {
        let mut spectrum = fft::forward_real(&self.values);
        apply_derivative(&mut spectrum, &self.grid, order);
        let values = fft::inverse_to_real(spectrum);
        ScalarField { grid: self.grid, values }
    }

    /// Riemann sum `sum f * dx` over the periodic grid.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.spacing()
    }

    /// Scale a nonnegative density so it integrates to one.
    pub fn normalize(&self) -> Result<ScalarField> {
        if let Some((index, &value)) = self.values.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::NegativeDensity { index, value });
        }
        let integral = self.integrate();
        if integral <= 0.0 {
            return Err(Error::DegenerateDensity { integral });
        }
        let values = self.values.iter().map(|v| v / integral).collect();
        Ok(ScalarField { grid: self.grid, values })
    }

    /// Zero every Fourier mode above two thirds of the Nyquist wavenumber.
    /// Standard de-aliasing for quadratic products.
    pub fn dealias(&self) -> ScalarField {
        let n = self.len();
        let cutoff = n / 3;
        let mut spectrum = fft::forward_real(&self.values);
        for (i, c) in spectrum.iter_mut().enumerate() {
            let m = if i <= n / 2 { i } else { n - i };
            if m > cutoff {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        let values = fft::inverse_to_real(spectrum);
        ScalarField { grid: self.grid, values }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.grid.compatible(other.grid())?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(ScalarField { grid: self.grid, values })
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        self.map(|v| v * s)
    }

    /// Trigonometric (band-limited) interpolation at an arbitrary point.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.len();
        let spectrum = fft::forward_real(&self.values);
        let xw = self.grid.wrap(x) + 0.5 * self.grid.length();
        let dk = 2.0 * std::f64::consts::PI / self.grid.length();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in spectrum.iter().enumerate() {
            let m = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
            if i == n / 2 {
                // Splitting the Nyquist mode into cos keeps the interpolant real.
                acc += c * (m * dk * xw).cos();
            } else {
                acc += c * Complex64::new(0.0, m * dk * xw).exp();
            }
        }
        acc.re / n as f64
    }

    /// Samples on a grid refined by `factor`, via spectral zero padding.
    pub fn upsample(&self, factor: usize) -> Vec<f64> {
        upsample_spectrum(fft::forward_real(&self.values), self.len(), factor)
            .into_iter()
            .map(|c| c.re)
            .collect()
    }
}

/// Complex-valued function on the grid (roles: psi, Psi).
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl WaveField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::GridMismatch { left: grid.n_points(), right: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { context: "wave field", index });
        }
        Ok(WaveField { grid, values })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = (0..grid.n_points()).map(|j| f(grid.point(j))).collect();
        WaveField::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn differentiate(&self, order: DerivativeOrder) -> WaveField {
        let mut spectrum = self.values.clone();
        fft::forward(&mut spectrum);
        apply_derivative(&mut spectrum, &self.grid, order);
        fft::inverse(&mut spectrum);
        WaveField { grid: self.grid, values: spectrum }
    }

    /// `|psi|^2` as a scalar field.
    pub fn density(&self) -> ScalarField {
        ScalarField { grid: self.grid, values: self.values.iter().map(|v| v.norm_sqr()).collect() }
    }

    /// `int |psi|^2 dx`.
    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    /// Rescale to unit norm.
    pub fn normalized(&self) -> Result<WaveField> {
        let n2 = self.norm_squared();
        if n2 <= 0.0 {
            return Err(Error::DegenerateDensity { integral: n2 });
        }
        let s = 1.0 / n2.sqrt();
        Ok(WaveField { grid: self.grid, values: self.values.iter().map(|v| v * s).collect() })
    }

    /// Overlap `int conj(a) b dx`.
    pub fn inner(&self, other: &WaveField) -> Result<Complex64> {
        self.grid.compatible(other.grid())?;
        let acc: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(acc * self.grid.spacing())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> WaveField {
        WaveField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Fourier coefficients (forward DFT of the samples).
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut buf = self.values.clone();
        fft::forward(&mut buf);
        buf
    }

    /// Rebuild from Fourier coefficients.
    pub fn from_spectrum(grid: GridSpec, mut spectrum: Vec<Complex64>) -> Result<WaveField> {
        if spectrum.len() != grid.n_points() {
            return Err(Error::GridMismatch { left: grid.n_points(), right: spectrum.len() });
        }
        fft::inverse(&mut spectrum);
        WaveField::new(grid, spectrum)
    }
}

fn apply_derivative(spectrum: &mut [Complex64], grid: &GridSpec, order: DerivativeOrder) {
    let k = grid.wavenumbers();
    let n = spectrum.len();
    match order {
        DerivativeOrder::First => {
            for (i, c) in spectrum.iter_mut().enumerate() {
                if i == n / 2 {
                    *c = Complex64::new(0.0, 0.0);
                } else {
                    *c *= Complex64::new(0.0, k[i]);
                }
            }
        }
        DerivativeOrder::Second => {
            for (i, c) in spectrum.iter_mut().enumerate() {
                *c *= -k[i] * k[i];
            }
        }
    }
}

fn upsample_spectrum(spectrum: Vec<Complex64>, n: usize, factor: usize) -> Vec<Complex64> {
    assert!(factor >= 1);
    let m = n * factor;
    let mut padded = vec![Complex64::new(0.0, 0.0); m];
    let half = n / 2;
    for i in 0..=half {
        padded[i] = spectrum[i];
    }
    for i in 1..half {
        padded[m - i] = spectrum[n - i];
    }
    // Split the Nyquist coefficient between +N/2 and -N/2 to keep the
    // interpolant real for real inputs.
    if factor > 1 {
        let nyq = spectrum[half] * 0.5;
        padded[half] = nyq;
        padded[m - half] = nyq;
    }
    fft::inverse(&mut padded);
    padded.into_iter().map(|c| c * factor as f64).collect()
}

/// Samples of a complex field on a grid refined by `factor`.
pub fn upsample_wave(field: &WaveField, factor: usize) -> Vec<Complex64> {
    upsample_spectrum(field.spectrum(), field.len(), factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(512, 40.0).unwrap()
    }

    fn gaussian_density(grid: GridSpec, sigma: f64) -> ScalarField {
        let norm = 1.0 / (2.0 * PI * sigma * sigma).sqrt();
        ScalarField::from_fn(grid, |x| norm * (-x * x / (2.0 * sigma * sigma)).exp()).unwrap()
    }

    #[test]
    fn first_derivative_of_sine_is_exact() {
        let g = grid();
        let k = 2.0 * PI / g.length();
        let f = ScalarField::from_fn(g, |x| (k * x).sin()).unwrap();
        let df = f.differentiate(DerivativeOrder::First);
        for (j, &v) in df.values().iter().enumerate() {
            let expected = k * (k * g.point(j)).cos();
            assert_abs_diff_eq!(v, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let f = ScalarField::constant(grid(), 3.7).unwrap();
        let df = f.differentiate(DerivativeOrder::First);
        assert!(df.values().iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn second_derivative_of_gaussian_matches_closed_form() {
        // d2/dx2 exp(-x^2/2) = (x^2 - 1) exp(-x^2/2) for sigma = 1
        let g = grid();
        let f = ScalarField::from_fn(g, |x| (-0.5 * x * x).exp()).unwrap();
        let d2 = f.differentiate(DerivativeOrder::Second);
        let mut max_err: f64 = 0.0;
        for (j, &v) in d2.values().iter().enumerate() {
            let x = g.point(j);
            let expected = (x * x - 1.0) * (-0.5 * x * x).exp();
            max_err = max_err.max((v - expected).abs());
        }
        assert!(max_err < 1e-10, "max error {max_err:.3e}");
    }

    #[test]
    fn integrate_normalized_gaussian_is_one() {
        let p = gaussian_density(grid(), 1.0);
        assert_abs_diff_eq!(p.integrate(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn integrate_zero_field_is_zero() {
        assert_eq!(ScalarField::zeros(grid()).integrate(), 0.0);
    }

    #[test]
    fn first_moment_of_centered_gaussian_vanishes() {
        let g = grid();
        let p = gaussian_density(g, 1.0);
        let xp = ScalarField::from_fn(g, |x| x).unwrap().zip_with(&p, |x, p| x * p).unwrap();
        assert_abs_diff_eq!(xp.integrate(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn normalize_scales_to_unit_mass() {
        let p = gaussian_density(grid(), 1.0).scaled(2.0);
        let n = p.normalize().unwrap();
        assert_abs_diff_eq!(n.integrate(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn normalize_uniform_gives_inverse_length() {
        let g = grid();
        let n = ScalarField::constant(g, 5.0).unwrap().normalize().unwrap();
        for &v in n.values() {
            assert_abs_diff_eq!(v, 1.0 / g.length(), epsilon = 1e-14);
        }
    }

    #[test]
    fn normalize_rejects_negative_entries() {
        let g = GridSpec::new(8, 1.0).unwrap();
        let mut values = vec![1.0; 8];
        values[3] = -0.5;
        let p = ScalarField::new(g, values).unwrap();
        assert!(matches!(p.normalize(), Err(Error::NegativeDensity { index: 3, .. })));
    }

    #[test]
    fn normalize_rejects_zero_mass() {
        assert!(matches!(
            ScalarField::zeros(grid()).normalize(),
            Err(Error::DegenerateDensity { .. })
        ));
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let g = GridSpec::new(8, 1.0).unwrap();
        let mut values = vec![0.0; 8];
        values[5] = f64::NAN;
        assert!(matches!(
            ScalarField::new(g, values),
            Err(Error::NonFinite { index: 5, .. })
        ));
    }

    #[test]
    fn interpolation_reproduces_band_limited_values() {
        let g = GridSpec::new(64, 8.0).unwrap();
        let k = 2.0 * PI / g.length();
        let f = ScalarField::from_fn(g, |x| (2.0 * k * x).cos() + 0.3 * (k * x).sin()).unwrap();
        for &x in &[0.123, -1.74, 3.999] {
            let expected = (2.0 * k * x).cos() + 0.3 * (k * x).sin();
            assert_abs_diff_eq!(f.interpolate(x), expected, epsilon = 1e-11);
        }
    }

    #[test]
    fn upsample_matches_band_limited_function() {
        let g = GridSpec::new(32, 4.0).unwrap();
        let k = 2.0 * PI / g.length();
        let f = ScalarField::from_fn(g, |x| (3.0 * k * x).sin()).unwrap();
        let fine = f.upsample(4);
        for (j, &v) in fine.iter().enumerate() {
            let x = -2.0 + j as f64 * g.spacing() / 4.0;
            assert_abs_diff_eq!(v, (3.0 * k * x).sin(), epsilon = 1e-11);
        }
    }

    #[test]
    fn dealias_removes_top_third() {
        let g = GridSpec::new(32, 4.0).unwrap();
        let k = 2.0 * PI / g.length();
        // mode 12 is above 32/3, mode 5 below
        let f = ScalarField::from_fn(g, |x| (5.0 * k * x).cos() + (12.0 * k * x).cos()).unwrap();
        let filtered = f.dealias();
        for (j, &v) in filtered.values().iter().enumerate() {
            assert_abs_diff_eq!(v, (5.0 * k * g.point(j)).cos(), epsilon = 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// D(a f + b g) = a D(f) + b D(g)
        #[test]
        fn differentiation_is_linear(
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            c1 in -2.0f64..2.0,
            c2 in -2.0f64..2.0,
            m1 in 1usize..10,
            m2 in 1usize..10,
        ) {
            let g = GridSpec::new(64, 8.0).unwrap();
            let k = 2.0 * PI / g.length();
            let f1 = ScalarField::from_fn(g, |x| c1 * (m1 as f64 * k * x).sin()).unwrap();
            let f2 = ScalarField::from_fn(g, |x| c2 * (m2 as f64 * k * x).cos()).unwrap();
            let combo = f1.zip_with(&f2, |u, v| a * u + b * v).unwrap();
            let d_combo = combo.differentiate(DerivativeOrder::First);
            let d1 = f1.differentiate(DerivativeOrder::First);
            let d2 = f2.differentiate(DerivativeOrder::First);
            for j in 0..g.n_points() {
                let expected = a * d1.values()[j] + b * d2.values()[j];
                prop_assert!((d_combo.values()[j] - expected).abs() < 1e-12);
            }
        }

        /// int D(f) g dx = -int f D(g) dx on the periodic grid
        #[test]
        fn integration_by_parts(
            m1 in 1usize..12,
            m2 in 1usize..12,
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
        ) {
            let g = GridSpec::new(128, 10.0).unwrap();
            let k = 2.0 * PI / g.length();
            let f = ScalarField::from_fn(g, |x| a * (m1 as f64 * k * x).sin() + 0.5 * (k * x).cos()).unwrap();
            let h = ScalarField::from_fn(g, |x| b * (m2 as f64 * k * x).cos()).unwrap();
            let lhs = f.differentiate(DerivativeOrder::First).zip_with(&h, |u, v| u * v).unwrap().integrate();
            let rhs = -f.zip_with(&h.differentiate(DerivativeOrder::First), |u, v| u * v).unwrap().integrate();
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        /// Second derivative equals the first derivative applied twice.
        #[test]
        fn second_derivative_composes(m in 1usize..10, a in -2.0f64..2.0) {
            let g = GridSpec::new(128, 10.0).unwrap();
            let k = 2.0 * PI / g.length();
            let f = ScalarField::from_fn(g, |x| a * (m as f64 * k * x).sin()).unwrap();
            let once_twice = f
                .differentiate(DerivativeOrder::First)
                .differentiate(DerivativeOrder::First);
            let second = f.differentiate(DerivativeOrder::Second);
            for j in 0..g.n_points() {
                prop_assert!((once_twice.values()[j] - second.values()[j]).abs() < 1e-10);
            }
        }
    }
}
