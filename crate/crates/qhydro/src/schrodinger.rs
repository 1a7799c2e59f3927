//! Split-step reference solver for the Schrödinger equation
//! `i hbar dpsi/dt = (-hbar^2/2m d2/dx2 + V) psi`, plus the closed-form
//! states used as ground truth throughout the test suite.
//!
//! One step is Strang-split: half potential phase, full kinetic phase in
//! Fourier space with the factor `exp(-i hbar k^2 dt / 2m)`, half potential
//! phase. The step is norm-exact and second-order accurate in dt.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, WaveField};
use crate::grid::{GridSpec, PhysicalConstants};

/// External potential specification, evaluated to a field on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    None,
    Harmonic {
        omega: f64,
        #[serde(default)]
        center: f64,
    },
    Polynomial {
        coefficients: Vec<f64>,
    },
}

impl PotentialSpec {
    pub fn evaluate(&self, grid: &GridSpec, constants: &PhysicalConstants) -> Result<ScalarField> {
        match self {
            PotentialSpec::None => Ok(ScalarField::zeros(*grid)),
            PotentialSpec::Harmonic { omega, center } => {
                if !(*omega > 0.0) {
                    return Err(Error::config(format!("potential.omega must be positive, got {omega}")));
                }
                let m = constants.mass;
                let w = *omega;
                let x0 = *center;
                ScalarField::from_fn(*grid, |x| 0.5 * m * w * w * (x - x0) * (x - x0))
            }
            PotentialSpec::Polynomial { coefficients } => {
                let coeffs = coefficients.clone();
                ScalarField::from_fn(*grid, move |x| {
                    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
                })
            }
        }
    }
}

/// One Strang step of size `dt`.
pub fn split_step(psi: &WaveField, potential: &ScalarField, dt: f64, constants: &PhysicalConstants) -> Result<WaveField> {
    if !(dt > 0.0) {
        return Err(Error::Unsupported { reason: format!("dt must be positive, got {dt}") });
    }
    psi.grid().compatible(potential.grid())?;
    let hbar = constants.hbar;
    let half_phase: Vec<Complex64> = potential
        .values()
        .iter()
        .map(|&v| Complex64::from_polar(1.0, -0.5 * v * dt / hbar))
        .collect();

    let grid = *psi.grid();
    let mut values: Vec<Complex64> =
        psi.values().iter().zip(&half_phase).map(|(a, b)| a * b).collect();

    let mut spectrum = values;
    crate::fft::forward(&mut spectrum);
    for (c, &k) in spectrum.iter_mut().zip(grid.wavenumbers().iter()) {
        *c *= Complex64::from_polar(1.0, -0.5 * hbar * k * k * dt / constants.mass);
    }
    crate::fft::inverse(&mut spectrum);

    values = spectrum.iter().zip(&half_phase).map(|(a, b)| a * b).collect();
    WaveField::new(grid, values)
}

/// Deterministic snapshot series from repeated split stepping.
///
/// The initial state is always the first snapshot; later snapshots land every
/// `snapshot_every` steps (every step when 0 or 1), and the final state is
/// always included.
pub fn evolve(
    psi0: &WaveField,
    potential: &ScalarField,
    dt: f64,
    n_steps: usize,
    snapshot_every: usize,
    constants: &PhysicalConstants,
) -> Result<Vec<(f64, WaveField)>> {
    let stride = snapshot_every.max(1);
    let mut snapshots = Vec::with_capacity(n_steps / stride + 2);
    snapshots.push((0.0, psi0.clone()));
    let mut psi = psi0.clone();
    for step in 1..=n_steps {
        psi = split_step(&psi, potential, dt, constants)?;
        if step % stride == 0 || step == n_steps {
            snapshots.push((step as f64 * dt, psi.clone()));
        }
    }
    Ok(snapshots)
}

/// Closed-form reference states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalyticState {
    /// Free Gaussian packet. `sigma` is the *position* standard deviation at
    /// t = 0, `x0` the center and `k0` the carrier wavenumber (must sit on
    /// the reciprocal lattice of the grid).
    FreeGaussian { sigma: f64, x0: f64, k0: f64 },
    /// Harmonic-oscillator ground state, phase `-omega t / 2`.
    HoGround { omega: f64 },
    /// Coherent state displaced by `x0`; its center follows `x0 cos(omega t)`.
    HoCoherent { omega: f64, x0: f64 },
    /// `exp(ikx)/sqrt(L)`; k must sit on the reciprocal lattice.
    PlaneWave { k: f64 },
}

impl AnalyticState {
    /// Evaluate the state on the grid at time `t`.
    ///
    /// Localized states are periodized (summed over a few periodic images),
    /// so the sampled field is smooth across the wrap; the images change
    /// bulk values far below any tolerance used here.
    pub fn sample(&self, grid: &GridSpec, constants: &PhysicalConstants, t: f64) -> Result<WaveField> {
        let hbar = constants.hbar;
        let m = constants.mass;
        let length = grid.length();
        match *self {
            AnalyticState::FreeGaussian { sigma, x0, k0 } => {
                if !(sigma > 0.0) {
                    return Err(Error::config(format!("free_gaussian.sigma must be positive, got {sigma}")));
                }
                check_on_lattice(grid, k0, "k0")?;
                // alpha = 1 + i hbar t / (2 m sigma^2); the packet spreads as
                // sigma(t) = sigma * |alpha|
                let alpha = Complex64::new(1.0, 0.5 * hbar * t / (m * sigma * sigma));
                let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
                let pref = norm * alpha.sqrt().inv();
                let v0 = hbar * k0 / m;
                let drift = x0 + v0 * t;
                let carrier_rate = 0.5 * hbar * k0 * k0 / m;
                // k0 on the reciprocal lattice makes each image carry the
                // same carrier phase, so the image sum stays periodic.
                WaveField::from_fn(*grid, |x| {
                    periodized(x, length, |xi| {
                        let dx = xi - drift;
                        let envelope = (-dx * dx / (4.0 * sigma * sigma * alpha)).exp();
                        let carrier = Complex64::from_polar(1.0, k0 * xi - carrier_rate * t);
                        pref * envelope * carrier
                    })
                })
            }
            AnalyticState::HoGround { omega } => {
                if !(omega > 0.0) {
                    return Err(Error::config(format!("ho_ground.omega must be positive, got {omega}")));
                }
                let a = m * omega / (std::f64::consts::PI * hbar);
                let phase = -0.5 * omega * t;
                WaveField::from_fn(*grid, |x| {
                    periodized(x, length, |xi| {
                        Complex64::from_polar(
                            a.powf(0.25) * (-0.5 * m * omega * xi * xi / hbar).exp(),
                            phase,
                        )
                    })
                })
            }
            AnalyticState::HoCoherent { omega, x0 } => {
                if !(omega > 0.0) {
                    return Err(Error::config(format!("ho_coherent.omega must be positive, got {omega}")));
                }
                let a = m * omega / (std::f64::consts::PI * hbar);
                let xc = x0 * (omega * t).cos();
                let pc = -m * omega * x0 * (omega * t).sin();
                let base_phase = -0.5 * omega * t - 0.5 * pc * xc / hbar;
                WaveField::from_fn(*grid, |x| {
                    periodized(x, length, |xi| {
                        let dx = xi - xc;
                        Complex64::from_polar(
                            a.powf(0.25) * (-0.5 * m * omega * dx * dx / hbar).exp(),
                            base_phase + pc * xi / hbar,
                        )
                    })
                })
            }
            AnalyticState::PlaneWave { k } => {
                check_on_lattice(grid, k, "k")?;
                let energy_rate = 0.5 * hbar * k * k / m;
                let amp = grid.length().sqrt().recip();
                WaveField::from_fn(*grid, |x| Complex64::from_polar(amp, k * x - energy_rate * t))
            }
        }
    }

    /// Position spread of the free packet, `sigma(t) = sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2)`.
    pub fn free_gaussian_width(sigma0: f64, t: f64, constants: &PhysicalConstants) -> f64 {
        let beta = 0.5 * constants.hbar * t / (constants.mass * sigma0 * sigma0);
        sigma0 * (1.0 + beta * beta).sqrt()
    }
}

/// Sum a localized profile over periodic images.
fn periodized(x: f64, length: f64, f: impl Fn(f64) -> Complex64) -> Complex64 {
    (-3..=3).map(|n| f(x + n as f64 * length)).sum()
}

fn check_on_lattice(grid: &GridSpec, k: f64, name: &str) -> Result<()> {
    let dk = 2.0 * std::f64::consts::PI / grid.length();
    let modes = k / dk;
    if (modes - modes.round()).abs() > 1e-9 {
        return Err(Error::config(format!(
            "{name} = {k} is not a multiple of 2*pi/L = {dk}; the state would not be periodic"
        )));
    }
    Ok(())
}

/// `int |psi|^2 V dx + int |psi_k|^2 hbar^2 k^2/2m dk`-style total energy,
/// evaluated spectrally. Used by conservation tests.
pub fn energy(psi: &WaveField, potential: &ScalarField, constants: &PhysicalConstants) -> Result<f64> {
    psi.grid().compatible(potential.grid())?;
    let mut spectrum = psi.spectrum();
    let n = psi.len() as f64;
    for c in spectrum.iter_mut() {
        *c /= n;
    }
    let k = psi.grid().wavenumbers();
    // Parseval on the unit-norm spectrum: sum over modes of |c_k|^2 = <1>/L * ...
    let kinetic: f64 = spectrum
        .iter()
        .zip(k.iter())
        .map(|(c, &kk)| 0.5 * constants.hbar * constants.hbar * kk * kk / constants.mass * c.norm_sqr())
        .sum::<f64>()
        * psi.grid().length();
    let potential_energy: f64 = psi
        .density()
        .values()
        .iter()
        .zip(potential.values())
        .map(|(&p, &v)| p * v)
        .sum::<f64>()
        * psi.grid().spacing();
    Ok(kinetic + potential_energy)
}
