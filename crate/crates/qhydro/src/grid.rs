//! Periodic 1D grid and physical constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[-L/2, L/2)`.
///
/// Point `n_points` wraps back to point 0. `n_points` must be a power of two
/// so the spectral operators stay exact and cheap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n_points: usize,
    length: f64,
    spacing: f64,
    dim: u32,
}

impl GridSpec {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < 4 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid {
                reason: format!("n_points must be a power of two >= 4, got {n_points}"),
            });
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid { reason: format!("length must be positive, got {length}") });
        }
        Ok(GridSpec { n_points, length, spacing: length / n_points as f64, dim: 1 })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Spatial dimension. Stored for bookkeeping; all solvers here are 1D.
    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Coordinate of grid point `index`.
    pub fn point(&self, index: usize) -> f64 {
        -0.5 * self.length + index as f64 * self.spacing
    }

    /// All grid coordinates.
    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.point(j)).collect()
    }

    /// Index of the point closest to x = 0 (used as the phase anchor).
    pub fn origin_index(&self) -> usize {
        self.n_points / 2
    }

    /// Angular wavenumbers in FFT order: `(2*pi/L) * [0, 1, ..., N/2-1, -N/2, ..., -1]`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points as i64;
        let dk = 2.0 * std::f64::consts::PI / self.length;
        (0..n)
            .map(|i| {
                let m = if i < n / 2 { i } else { i - n };
                m as f64 * dk
            })
            .collect()
    }

    /// Wrap a coordinate into `[-L/2, L/2)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let half = 0.5 * self.length;
        let mut y = (x + half).rem_euclid(self.length) - half;
        if y >= half {
            y -= self.length;
        }
        y
    }

    pub fn compatible(&self, other: &GridSpec) -> Result<()> {
        if self.n_points != other.n_points || (self.length - other.length).abs() > 1e-12 * self.length {
            return Err(Error::GridMismatch { left: self.n_points, right: other.n_points });
        }
        Ok(())
    }
}

/// Physical constants shared by the solvers. Defaults are hbar = m = c = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
    /// Speed of light; only the Klein-Gordon module uses it.
    pub c: f64,
    /// Oscillator frequency for harmonic scenarios; zero when unused.
    pub omega: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants { hbar: 1.0, mass: 1.0, c: 1.0, omega: 0.0 }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v, strict) in [
            ("hbar", self.hbar, true),
            ("mass", self.mass, true),
            ("c", self.c, true),
            ("omega", self.omega, false),
        ] {
            if !v.is_finite() || (strict && v <= 0.0) || (!strict && v < 0.0) {
                return Err(Error::InvalidConstants { reason: format!("{name} = {v}") });
            }
        }
        Ok(())
    }
}
