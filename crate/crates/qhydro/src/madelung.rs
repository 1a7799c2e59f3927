//! Bidirectional transform between the wave function and the (P, S) pair,
//! plus the derived zero-point fields: the log-density action S0, the osmotic
//! velocity u = (hbar/2m) grad P / P, and the quantum potential.
//!
//! Phase convention: psi = sqrt(P) * exp(+i S / hbar). With +i the continuity
//! and Hamilton-Jacobi-Bohm pair combines exactly into the Schrödinger
//! equation used by the reference solver; the printed -i convention maps onto
//! this one by S -> -S.
//!
//! Node handling: all machinery is restricted to node-free states. Densities
//! may still undercut the floor `1e-12 * max(P)` in the far tail of a
//! localized packet; divisions clamp the denominator there. A dip below the
//! floor strictly *inside* the support (the above-floor set not being one
//! contiguous cyclic interval) is treated as a node and rejected.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{DerivativeOrder, ScalarField, WaveField};
use crate::grid::PhysicalConstants;

/// Relative node floor: densities below `NODE_FLOOR_RELATIVE * max(P)` count
/// as unresolved tail (clamped in divisions) or, if interior, as a node.
pub const NODE_FLOOR_RELATIVE: f64 = 1e-12;

/// (P, S) pair at a time instant.
#[derive(Debug, Clone)]
pub struct HydroState {
    p: ScalarField,
    s: ScalarField,
    time: f64,
}

impl HydroState {
    /// Build a state, enforcing the invariants: P >= 0, node-free, and unit
    /// mass within 1e-6. The zero-winding requirement on S is checked by
    /// [`compose`], which knows hbar.
    pub fn new(p: ScalarField, s: ScalarField, time: f64) -> Result<Self> {
        p.grid().compatible(s.grid())?;
        if let Some((index, &value)) = p.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::NegativeDensity { index, value });
        }
        Support::analyze(&p)?;
        let mass = p.integrate();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::DegenerateDensity { integral: mass });
        }
        Ok(HydroState { p, s, time })
    }

    pub fn density(&self) -> &ScalarField {
        &self.p
    }

    pub fn action(&self) -> &ScalarField {
        &self.s
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }
}

/// Above-floor structure of a density.
#[derive(Debug, Clone, Copy)]
pub enum SupportKind {
    /// Every point is at or above the floor.
    Full,
    /// One contiguous cyclic interval of above-floor points starting at
    /// `start` with `len` points; the complement is the sub-floor tail band.
    Bulk { start: usize, len: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct Support {
    pub floor: f64,
    pub kind: SupportKind,
}

impl Support {
    /// Classify the above-floor set of `p`; reject interior nodes.
    ///
    /// The bulk is the contiguous above-floor run containing the density
    /// peak. Floor-level raggedness outside it (evolving tails wiggle right
    /// at the crossing) is tolerated; density above `1e4 * floor` outside
    /// the bulk is a genuine second lobe, i.e. an interior node.
    pub fn analyze(p: &ScalarField) -> Result<Support> {
        let max = p.max_value();
        if !(max > 0.0) {
            return Err(Error::DegenerateDensity { integral: p.integrate() });
        }
        let floor = NODE_FLOOR_RELATIVE * max;
        let n = p.len();
        let values = p.values();
        if values.iter().all(|&v| v >= floor) {
            return Ok(Support { floor, kind: SupportKind::Full });
        }

        let peak = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite density"))
            .map(|(j, _)| j)
            .expect("non-empty field");
        let mut start = peak;
        while values[(start + n - 1) % n] >= floor && (start + n - 1) % n != peak {
            start = (start + n - 1) % n;
        }
        let len = (0..n).take_while(|&o| values[(start + o) % n] >= floor).count();

        let lobe_threshold = 1e4 * floor;
        let in_bulk = |j: usize| (j + n - start) % n < len;
        if values.iter().enumerate().any(|(j, &v)| !in_bulk(j) && v >= lobe_threshold) {
            let (index, &value) = values
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite density"))
                .expect("non-empty field");
            return Err(Error::NodeDetected { index, value, floor });
        }
        Ok(Support { floor, kind: SupportKind::Bulk { start, len } })
    }

    /// Iterate the above-floor indices in cyclic order.
    pub fn bulk_indices(&self, n: usize) -> Vec<usize> {
        match self.kind {
            SupportKind::Full => (0..n).collect(),
            SupportKind::Bulk { start, len } => (0..len).map(|o| (start + o) % n).collect(),
        }
    }
}

/// `max(P, floor)` for safe division.
pub fn clamped_density(p: &ScalarField) -> Result<ScalarField> {
    let support = Support::analyze(p)?;
    Ok(p.map(|v| v.max(support.floor)))
}

/// A single-valued periodic action stays below a pi*hbar jump between cyclic
/// neighbours once the grid resolves the phase; a larger jump means the field
/// winds around the domain.
fn check_phase_increments(s: &ScalarField, hbar: f64) -> Result<()> {
    let n = s.len();
    let v = s.values();
    for j in 0..n {
        let jump = v[(j + 1) % n] - v[j];
        if jump.abs() > std::f64::consts::PI * hbar {
            let winding = (jump / (2.0 * std::f64::consts::PI * hbar)).round() as i64;
            return Err(Error::WindingDetected { winding: if winding == 0 { 1 } else { winding } });
        }
    }
    Ok(())
}

/// A resolved single-valued phase moves by far less than pi/2 per grid cell;
/// a near-pi jump between neighbouring above-floor points means the field
/// crosses zero between them (a node the density floor cannot see, e.g. a
/// real standing wave dipping through zero above the floor).
pub(crate) fn detect_phase_tears(psi: &WaveField, support: &Support) -> Result<()> {
    let p = psi.density();
    let n = psi.len();
    let values = psi.values();
    let bulk = support.bulk_indices(n);
    for pair in bulk.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if (b + n - a) % n != 1 {
            continue;
        }
        let jump = (values[b] * values[a].conj()).arg();
        if jump.abs() > std::f64::consts::FRAC_PI_2 {
            return Err(Error::NodeDetected { index: b, value: p.values()[b], floor: support.floor });
        }
    }
    Ok(())
}

/// P = |psi|^2 and S = hbar * unwrapped phase.
///
/// The phase is unwrapped outward from the density peak; across a sub-floor
/// tail band S is continued as a plateau from the nearer bulk endpoint (the
/// phase carries no information where the density is unresolved). For states
/// above the floor everywhere the unwrap closes around the loop and a nonzero
/// winding number is an error. Returned with `time = 0`; callers stamp it.
pub fn decompose(psi: &WaveField, constants: &PhysicalConstants) -> Result<HydroState> {
    let p = psi.density();
    let support = Support::analyze(&p)?;
    detect_phase_tears(psi, &support)?;
    let hbar = constants.hbar;
    let n = psi.len();
    let values = psi.values();

    let mut s = vec![0.0_f64; n];
    match support.kind {
        SupportKind::Full => {
            let anchor = psi.grid().origin_index();
            s[anchor] = hbar * values[anchor].arg();
            for o in 1..n {
                let j = (anchor + o) % n;
                let prev = (anchor + o - 1) % n;
                s[j] = s[prev] + hbar * (values[j] * values[prev].conj()).arg();
            }
            let closing = hbar * (values[anchor] * values[(anchor + n - 1) % n].conj()).arg();
            let winding = (s[(anchor + n - 1) % n] + closing - s[anchor])
                / (2.0 * std::f64::consts::PI * hbar);
            let winding = winding.round() as i64;
            if winding != 0 {
                return Err(Error::WindingDetected { winding });
            }
        }
        SupportKind::Bulk { start, len } => {
            let bulk = support.bulk_indices(n);
            let peak = *bulk
                .iter()
                .max_by(|&&a, &&b| p.values()[a].partial_cmp(&p.values()[b]).expect("finite"))
                .expect("non-empty bulk");
            let peak_offset = bulk.iter().position(|&j| j == peak).expect("peak in bulk");
            s[peak] = hbar * values[peak].arg();
            for o in peak_offset + 1..len {
                let j = bulk[o];
                let prev = bulk[o - 1];
                s[j] = s[prev] + hbar * (values[j] * values[prev].conj()).arg();
            }
            for o in (0..peak_offset).rev() {
                let j = bulk[o];
                let next = bulk[o + 1];
                s[j] = s[next] + hbar * (values[j] * values[next].conj()).arg();
            }
            // Plateau continuation across the tail band.
            let band_len = n - len;
            let end_value = s[bulk[len - 1]];
            let start_value = s[start];
            for b in 0..band_len {
                let j = (start + len + b) % n;
                s[j] = if b < band_len / 2 { end_value } else { start_value };
            }
        }
    }

    let grid = *psi.grid();
    HydroState::new(p, ScalarField::new(grid, s)?, 0.0)
}

/// psi = sqrt(P) * exp(+i S / hbar), normalized.
pub fn compose(state: &HydroState, constants: &PhysicalConstants) -> Result<WaveField> {
    let hbar = constants.hbar;
    check_phase_increments(state.action(), hbar)?;
    let grid = *state.density().grid();
    let values = state
        .density()
        .values()
        .iter()
        .zip(state.action().values())
        .map(|(&p, &s)| Complex64::from_polar(p.max(0.0).sqrt(), s / hbar))
        .collect();
    WaveField::new(grid, values)?.normalized()
}

/// grad S computed from the probability current:
/// `grad S = hbar * Im(conj(psi) * grad psi) / |psi|^2`.
///
/// This avoids phase unwrapping entirely and is the preferred route to the
/// velocity field.
pub fn phase_gradient(psi: &WaveField, constants: &PhysicalConstants) -> Result<ScalarField> {
    let p = psi.density();
    let support = Support::analyze(&p)?;
    let dpsi = psi.differentiate(DerivativeOrder::First);
    let grid = *psi.grid();
    let values = psi
        .values()
        .iter()
        .zip(dpsi.values())
        .zip(p.values())
        .map(|((psi_j, dpsi_j), &p_j)| {
            constants.hbar * (psi_j.conj() * dpsi_j).im / p_j.max(support.floor)
        })
        .collect();
    ScalarField::new(grid, values)
}

/// Zero-point action S0 = (hbar/2) ln(P / p_ref).
///
/// Only grad S0 is physical; `p_ref` is a gauge choice and defaults to
/// max(P) via [`zero_point_action_default`].
pub fn zero_point_action(p: &ScalarField, p_ref: f64, constants: &PhysicalConstants) -> Result<ScalarField> {
    if !(p_ref > 0.0) {
        return Err(Error::Unsupported { reason: format!("p_ref must be positive, got {p_ref}") });
    }
    let clamped = clamped_density(p)?;
    Ok(clamped.map(|v| 0.5 * constants.hbar * (v / p_ref).ln()))
}

/// [`zero_point_action`] with the default reference max(P).
pub fn zero_point_action_default(p: &ScalarField, constants: &PhysicalConstants) -> Result<ScalarField> {
    let p_ref = p.max_value();
    zero_point_action(p, p_ref, constants)
}

/// Osmotic velocity u = (hbar / 2m) grad P / P.
pub fn osmotic_velocity(p: &ScalarField, constants: &PhysicalConstants) -> Result<ScalarField> {
    let support = Support::analyze(p)?;
    let dp = p.differentiate(DerivativeOrder::First);
    let scale = 0.5 * constants.hbar / constants.mass;
    dp.zip_with(p, |dp_j, p_j| scale * dp_j / p_j.max(support.floor))
}

/// Quantum potential, bracket form:
/// `Q = (hbar^2 / 4m) [ (grad P / P)^2 / 2 - laplacian P / P ]`.
pub fn quantum_potential(p: &ScalarField, constants: &PhysicalConstants) -> Result<ScalarField> {
    let support = Support::analyze(p)?;
    let dp = p.differentiate(DerivativeOrder::First);
    let d2p = p.differentiate(DerivativeOrder::Second);
    let coeff = constants.hbar * constants.hbar / (4.0 * constants.mass);
    let grid = *p.grid();
    let values = p
        .values()
        .iter()
        .zip(dp.values())
        .zip(d2p.values())
        .map(|((&p_j, &dp_j), &d2p_j)| {
            let safe = p_j.max(support.floor);
            let ratio = dp_j / safe;
            coeff * (0.5 * ratio * ratio - d2p_j / safe)
        })
        .collect();
    ScalarField::new(grid, values)
}

/// Quantum potential through the amplitude curvature,
/// `Q = -(hbar^2 / 2m) laplacian(sqrt P) / sqrt P`.
///
/// Algebraically identical to the bracket form; numerically the independent
/// second route (and far less noise-amplifying in deep tails, so the
/// hydrodynamic solver steps with this one).
pub fn quantum_potential_curvature(p: &ScalarField, constants: &PhysicalConstants) -> Result<ScalarField> {
    Support::analyze(p)?;
    let amplitude = p.map(|v| v.max(0.0).sqrt());
    let floor = NODE_FLOOR_RELATIVE * amplitude.max_value();
    let d2 = amplitude.differentiate(DerivativeOrder::Second);
    let coeff = -0.5 * constants.hbar * constants.hbar / constants.mass;
    d2.zip_with(&amplitude, |d2_j, a_j| coeff * d2_j / a_j.max(floor))
}
