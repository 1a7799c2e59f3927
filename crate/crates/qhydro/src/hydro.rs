//! Direct time integration of the real-valued system — the continuity
//! equation `dP/dt = -div(P grad S / m)` coupled to the Hamilton-Jacobi-Bohm
//! equation `dS/dt = -[(grad S)^2/2m + V + Q]` — with no complex amplitude
//! anywhere in the loop.
//!
//! Internally the stepper carries the log-density `R = ln(P)/2` instead of P:
//!
//! ```text
//! dR/dt = -(grad R . grad S + lapl S / 2) / m
//! dS/dt = -(grad S)^2/2m - V + (hbar^2/2m) (lapl R + (grad R)^2)
//! ```
//!
//! which is algebraically the same system (the last term is -Q expressed
//! through `sqrt(P) = exp(R)`), but polynomial in derivatives: no division by
//! a vanishing tail anywhere. A Gaussian tail is a smooth parabola in R, so
//! node-free states keep every field O(10) across the whole domain and the
//! k^2-amplified floor noise that plagues the `grad P / P` forms never
//! arises. Quadratic products are de-aliased with the two-thirds rule;
//! classical RK4 advances (R, S); P is renormalized every step and the
//! pre-normalization drift is reported, not hidden.
//!
//! Stability: the linearized system oscillates at `hbar k^2 / 2m` per mode,
//! so RK4 needs `dt * hbar k_c^2 / 2m < 2*sqrt(2)` with `k_c = (2/3) pi N/L`
//! the de-aliasing cutoff. Node formation (an interior dip of the density
//! below the node floor) ends a run with an error rather than silently
//! producing garbage.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{DerivativeOrder, ScalarField, WaveField};
use crate::grid::PhysicalConstants;
use crate::madelung::{self, HydroState, Support};
use crate::schrodinger;

/// Time derivatives (dP/dt, dS/dt) of the hydrodynamic state, as stated by
/// the field equations. Evaluated through the log-density form and mapped
/// back via `dP/dt = 2 P dR/dt`.
pub fn rhs(
    state: &HydroState,
    potential: &ScalarField,
    constants: &PhysicalConstants,
) -> Result<(ScalarField, ScalarField)> {
    let log = LogState::from_state(state)?;
    let (dr, ds) = rhs_log(&log.r, &log.s, potential, constants)?;
    let dp = state.density().zip_with(&dr, |pj, drj| 2.0 * pj * drj)?;
    Ok((dp, ds))
}

/// Internal log-density representation.
struct LogState {
    r: ScalarField,
    s: ScalarField,
    time: f64,
}

impl LogState {
    fn from_state(state: &HydroState) -> Result<LogState> {
        // Node-free states on sane grids keep P well above f64 underflow;
        // the guard only protects ln from literal zeros.
        let r = state.density().map(|p| 0.5 * p.max(1e-280).ln());
        Ok(LogState { r, s: state.action().clone(), time: state.time() })
    }

    fn to_state(&self) -> Result<HydroState> {
        let p = self.r.map(|r| (2.0 * r).exp()).normalize()?;
        HydroState::new(p, self.s.clone(), self.time)
    }
}

fn rhs_log(
    r: &ScalarField,
    s: &ScalarField,
    potential: &ScalarField,
    constants: &PhysicalConstants,
) -> Result<(ScalarField, ScalarField)> {
    let m = constants.mass;
    let hbar = constants.hbar;
    let grad_r = r.differentiate(DerivativeOrder::First);
    let grad_s = s.differentiate(DerivativeOrder::First);
    let lapl_r = r.differentiate(DerivativeOrder::Second);
    let lapl_s = s.differentiate(DerivativeOrder::Second);

    let advection = grad_r.zip_with(&grad_s, |a, b| a * b)?.dealias();
    let dr = advection.zip_with(&lapl_s, |adv, ls| -(adv + 0.5 * ls) / m)?;

    let kinetic = grad_s.map(|g| g * g).dealias().scaled(0.5 / m);
    let curvature = grad_r.map(|g| g * g).dealias().zip_with(&lapl_r, |g2, lr| g2 + lr)?;
    let q_coeff = 0.5 * hbar * hbar / m;
    let ds = kinetic
        .zip_with(potential, |k, v| -(k + v))?
        .zip_with(&curvature, |acc, c| acc + q_coeff * c)?;
    Ok((dr, ds))
}

/// One RK4 step in log space. The new R is renormalized (unit mass of
/// e^{2R}) and node-checked; returns the state and the pre-normalization
/// mass drift.
fn step_log(
    log: &LogState,
    potential: &ScalarField,
    dt: f64,
    constants: &PhysicalConstants,
) -> Result<(LogState, f64)> {
    let (k1r, k1s) = rhs_log(&log.r, &log.s, potential, constants)?;
    let r1 = log.r.zip_with(&k1r, |f, k| f + 0.5 * dt * k)?;
    let s1 = log.s.zip_with(&k1s, |f, k| f + 0.5 * dt * k)?;
    let (k2r, k2s) = rhs_log(&r1, &s1, potential, constants)?;
    let r2 = log.r.zip_with(&k2r, |f, k| f + 0.5 * dt * k)?;
    let s2 = log.s.zip_with(&k2s, |f, k| f + 0.5 * dt * k)?;
    let (k3r, k3s) = rhs_log(&r2, &s2, potential, constants)?;
    let r3 = log.r.zip_with(&k3r, |f, k| f + dt * k)?;
    let s3 = log.s.zip_with(&k3s, |f, k| f + dt * k)?;
    let (k4r, k4s) = rhs_log(&r3, &s3, potential, constants)?;

    let sixth = dt / 6.0;
    let combine = |f0: &ScalarField,
                   k1: &ScalarField,
                   k2: &ScalarField,
                   k3: &ScalarField,
                   k4: &ScalarField|
     -> Result<ScalarField> {
        f0.zip_with(k1, |f, k| f + sixth * k)?
            .zip_with(k2, |f, k| f + 2.0 * sixth * k)?
            .zip_with(k3, |f, k| f + 2.0 * sixth * k)?
            .zip_with(k4, |f, k| f + sixth * k)
    };
    let mut r = combine(&log.r, &k1r, &k2r, &k3r, &k4r)?;
    let s = combine(&log.s, &k1s, &k2s, &k3s, &k4s)?;

    let p = r.map(|rj| (2.0 * rj).exp());
    let mass = p.integrate();
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::NodeDetected { index: 0, value: mass, floor: 0.0 });
    }
    Support::analyze(&p)?;
    let drift = (mass - 1.0).abs();
    let shift = 0.5 * mass.ln();
    r = r.map(|rj| rj - shift);
    Ok((LogState { r, s, time: log.time + dt }, drift))
}

/// One RK4 step. Returns the new state (P renormalized) and the
/// pre-normalization mass drift `|int P dx - 1|`.
pub fn step_rk4(
    state: &HydroState,
    potential: &ScalarField,
    dt: f64,
    constants: &PhysicalConstants,
) -> Result<(HydroState, f64)> {
    if !(dt > 0.0) {
        return Err(Error::Unsupported { reason: format!("dt must be positive, got {dt}") });
    }
    let log = LogState::from_state(state)?;
    let (next, drift) =
        step_log(&log, potential, dt, constants).map_err(node_to_step(state.time() + dt))?;
    let state = next.to_state().map_err(node_to_step(next.time))?;
    Ok((state, drift))
}

fn node_to_step(time: f64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::NodeDetected { .. } | Error::NonFinite { .. } => Error::NodeDuringStep { step: 0, time },
        other => other,
    }
}

/// A hydrodynamic run: snapshots plus bookkeeping.
#[derive(Debug, Clone)]
pub struct HydroRun {
    pub snapshots: Vec<HydroState>,
    /// Largest pre-normalization mass drift over any single step.
    pub max_mass_drift: f64,
}

/// Evolve the state, keeping a snapshot every `snapshot_every` steps (the
/// initial and final states are always kept).
pub fn evolve(
    state0: &HydroState,
    potential: &ScalarField,
    dt: f64,
    n_steps: usize,
    snapshot_every: usize,
    constants: &PhysicalConstants,
) -> Result<HydroRun> {
    if !(dt > 0.0) && n_steps > 0 {
        return Err(Error::Unsupported { reason: format!("dt must be positive, got {dt}") });
    }
    let stride = snapshot_every.max(1);
    let mut snapshots = Vec::with_capacity(n_steps / stride + 2);
    snapshots.push(state0.clone());
    let mut log = LogState::from_state(state0)?;
    let mut max_mass_drift: f64 = 0.0;
    for step in 1..=n_steps {
        let time = log.time + dt;
        let stamp = |e: Error| match node_to_step(time)(e) {
            Error::NodeDuringStep { time, .. } => Error::NodeDuringStep { step, time },
            other => other,
        };
        let (next, drift) = step_log(&log, potential, dt, constants).map_err(stamp)?;
        log = next;
        max_mass_drift = max_mass_drift.max(drift);
        if step % stride == 0 || step == n_steps {
            snapshots.push(log.to_state().map_err(stamp)?);
        }
    }
    Ok(HydroRun { snapshots, max_mass_drift })
}

/// Per-snapshot comparison of the hydrodynamic evolution against the
/// split-step spectral evolution from identical initial data.
#[derive(Debug, Clone, Serialize)]
pub struct CrossValidation {
    pub times: Vec<f64>,
    /// `sqrt(int (P_hydro - P_spectral)^2 dx)` per snapshot.
    pub l2_density: Vec<f64>,
    /// Sup-norm of the velocity-field mismatch `grad S_hydro - grad S_spectral`
    /// over the bulk (density above 1e-6 of its peak).
    pub linf_grad_s: Vec<f64>,
    pub max_l2_density: f64,
    pub max_linf_grad_s: f64,
    pub hydro_mass_drift: f64,
    /// Set when the hydro run ended early at a node; the report covers the
    /// horizon up to that time.
    pub truncated_at: Option<f64>,
}

/// Evolve both representations from `psi0` and compare them snapshot by
/// snapshot. Node formation truncates the report instead of failing it.
pub fn cross_validate(
    psi0: &WaveField,
    potential: &ScalarField,
    dt: f64,
    n_steps: usize,
    snapshot_every: usize,
    constants: &PhysicalConstants,
) -> Result<CrossValidation> {
    let state0 = madelung::decompose(psi0, constants)?;
    let stride = snapshot_every.max(1);

    let spectral = schrodinger::evolve(psi0, potential, dt, n_steps, stride, constants)?;

    let mut hydro_snapshots = vec![state0.clone()];
    let mut truncated_at = None;
    let mut max_mass_drift: f64 = 0.0;
    {
        let mut log = LogState::from_state(&state0)?;
        'run: for step in 1..=n_steps {
            match step_log(&log, potential, dt, constants) {
                Ok((next, drift)) => {
                    log = next;
                    max_mass_drift = max_mass_drift.max(drift);
                    if step % stride == 0 || step == n_steps {
                        match log.to_state() {
                            Ok(state) => hydro_snapshots.push(state),
                            Err(_) => {
                                truncated_at = Some(log.time);
                                break 'run;
                            }
                        }
                    }
                }
                Err(_) => {
                    truncated_at = Some(log.time + dt);
                    break 'run;
                }
            }
        }
    }

    let dx = psi0.grid().spacing();
    let mut times = Vec::new();
    let mut l2_density = Vec::new();
    let mut linf_grad_s = Vec::new();
    for (h, (t, psi)) in hydro_snapshots.iter().zip(spectral.iter()) {
        let p_spectral = psi.density();
        let l2 = h
            .density()
            .values()
            .iter()
            .zip(p_spectral.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            * dx.sqrt();
        let grad_hydro = h.action().differentiate(DerivativeOrder::First);
        let grad_spectral = madelung::phase_gradient(psi, constants)?;
        let bulk = 1e-6 * p_spectral.max_value();
        let linf = grad_hydro
            .values()
            .iter()
            .zip(grad_spectral.values())
            .zip(p_spectral.values())
            .filter(|&(_, &pj)| pj >= bulk)
            .map(|((a, b), _)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        times.push(*t);
        l2_density.push(l2);
        linf_grad_s.push(linf);
    }

    let max_l2_density = l2_density.iter().cloned().fold(0.0, f64::max);
    let max_linf_grad_s = linf_grad_s.iter().cloned().fold(0.0, f64::max);
    Ok(CrossValidation {
        times,
        l2_density,
        linf_grad_s,
        max_l2_density,
        max_linf_grad_s,
        hydro_mass_drift: max_mass_drift,
        truncated_at,
    })
}

/// dt bound for a stable RK4 integration on this grid:
/// `dt < 2 sqrt(2) * 2m / (hbar k_c^2)` with `k_c` the de-aliasing cutoff.
pub fn stable_dt_bound(grid: &crate::grid::GridSpec, constants: &PhysicalConstants) -> f64 {
    let k_c = 2.0 / 3.0 * std::f64::consts::PI * grid.n_points() as f64 / grid.length();
    2.0 * std::f64::consts::SQRT_2 * 2.0 * constants.mass / (constants.hbar * k_c * k_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::schrodinger::{AnalyticState, PotentialSpec};
    use approx::assert_abs_diff_eq;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn vacuum_is_a_fixed_point() {
        let c = consts();
        let g = GridSpec::new(64, 8.0).unwrap();
        let state = HydroState::new(
            ScalarField::constant(g, 1.0 / 8.0).unwrap(),
            ScalarField::zeros(g),
            0.0,
        )
        .unwrap();
        let v = ScalarField::zeros(g);
        let (dp, ds) = rhs(&state, &v, &c).unwrap();
        for &r in dp.values() {
            assert_abs_diff_eq!(r, 0.0, epsilon = 1e-12);
        }
        for &r in ds.values() {
            assert_abs_diff_eq!(r, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ho_ground_state_rates_match_zero_point_energy() {
        let c = consts();
        let g = GridSpec::new(256, 13.0).unwrap();
        let omega = 1.0;
        let psi = AnalyticState::HoGround { omega }.sample(&g, &c, 0.0).unwrap();
        let state = madelung::decompose(&psi, &c).unwrap();
        let v = PotentialSpec::Harmonic { omega, center: 0.0 }.evaluate(&g, &c).unwrap();
        let (dp, ds) = rhs(&state, &v, &c).unwrap();
        let p = state.density();
        let dx = g.spacing();
        let rms_dp = dp
            .values()
            .iter()
            .zip(p.values())
            .map(|(&r, &pj)| pj * r * r)
            .sum::<f64>()
            .sqrt()
            * dx.sqrt();
        assert!(rms_dp < 1e-9, "rms dP/dt = {rms_dp:.3e}");
        for (j, &r) in ds.values().iter().enumerate() {
            if p.values()[j] >= 1e-6 * p.max_value() {
                assert_abs_diff_eq!(r, -0.5 * c.hbar * omega, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn free_gaussian_initial_rates() {
        let c = consts();
        let g = GridSpec::new(512, 18.0).unwrap();
        let psi = AnalyticState::FreeGaussian { sigma: 1.0, x0: 0.0, k0: 0.0 }
            .sample(&g, &c, 0.0)
            .unwrap();
        let state = madelung::decompose(&psi, &c).unwrap();
        let v = ScalarField::zeros(g);
        let (dp, ds) = rhs(&state, &v, &c).unwrap();
        let p = state.density();
        // grad S = 0, so dP/dt = 0 momentarily while dS/dt = -Q != 0
        let q = madelung::quantum_potential(&p, &c).unwrap();
        for (j, (&r_p, &r_s)) in dp.values().iter().zip(ds.values()).enumerate() {
            if p.values()[j] >= 1e-4 * p.max_value() {
                assert_abs_diff_eq!(r_p, 0.0, epsilon = 1e-10);
                assert_abs_diff_eq!(r_s, -q.values()[j], epsilon = 1e-8);
            }
        }
        assert_abs_diff_eq!(q.interpolate(0.0), 0.25, epsilon = 1e-8);
    }

    #[test]
    fn ho_ground_state_is_stationary_over_short_run() {
        let c = consts();
        let g = GridSpec::new(256, 13.0).unwrap();
        let omega = 1.0;
        let psi = AnalyticState::HoGround { omega }.sample(&g, &c, 0.0).unwrap();
        let state0 = madelung::decompose(&psi, &c).unwrap();
        let v = PotentialSpec::Harmonic { omega, center: 0.0 }.evaluate(&g, &c).unwrap();
        let run = evolve(&state0, &v, 1e-3, 200, 200, &c).unwrap();
        let last = run.snapshots.last().unwrap();
        let dx = g.spacing();
        let l2: f64 = last
            .density()
            .values()
            .iter()
            .zip(state0.density().values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            * dx.sqrt();
        assert!(l2 < 1e-9, "L2 density drift {l2:.3e} after 200 steps");
        // S advances at -E t with E = hbar omega / 2
        let p = last.density();
        let expected = -0.5 * c.hbar * omega * last.time();
        let anchor = state0.action().values()[g.origin_index()];
        for (j, &s) in last.action().values().iter().enumerate() {
            if p.values()[j] >= 1e-4 * p.max_value() {
                assert_abs_diff_eq!(s - anchor, expected, epsilon = 1e-6);
            }
        }
        assert!(run.max_mass_drift < 1e-10, "mass drift {:.3e}", run.max_mass_drift);
    }

    #[test]
    fn cross_validation_free_gaussian_short_horizon() {
        let c = consts();
        let g = GridSpec::new(512, 18.0).unwrap();
        let psi = AnalyticState::FreeGaussian { sigma: 1.0, x0: 0.0, k0: 0.0 }
            .sample(&g, &c, 0.0)
            .unwrap();
        let v = ScalarField::zeros(g);
        let report = cross_validate(&psi, &v, 1e-3, 100, 20, &c).unwrap();
        assert!(report.truncated_at.is_none(), "truncated at {:?}", report.truncated_at);
        assert!(report.max_l2_density < 1e-5, "L2 {:.3e}", report.max_l2_density);
        assert!(report.max_linf_grad_s < 1e-4, "Linf {:.3e}", report.max_linf_grad_s);
    }

    #[test]
    fn cross_validation_stationary_state_is_tight() {
        let c = consts();
        let g = GridSpec::new(256, 13.0).unwrap();
        let omega = 1.0;
        let psi = AnalyticState::HoGround { omega }.sample(&g, &c, 0.0).unwrap();
        let v = PotentialSpec::Harmonic { omega, center: 0.0 }.evaluate(&g, &c).unwrap();
        let report = cross_validate(&psi, &v, 1e-3, 300, 100, &c).unwrap();
        assert!(report.truncated_at.is_none(), "truncated at {:?}", report.truncated_at);
        assert!(report.max_l2_density < 1e-8, "L2 {:.3e}", report.max_l2_density);
        assert!(report.max_linf_grad_s < 1e-8, "Linf {:.3e}", report.max_linf_grad_s);
    }

    #[test]
    fn rejects_nonpositive_dt() {
        let c = consts();
        let g = GridSpec::new(64, 8.0).unwrap();
        let state = HydroState::new(
            ScalarField::constant(g, 1.0 / 8.0).unwrap(),
            ScalarField::zeros(g),
            0.0,
        )
        .unwrap();
        let v = ScalarField::zeros(g);
        assert!(step_rk4(&state, &v, 0.0, &c).is_err());
    }

    #[test]
    fn node_formation_is_detected() {
        let c = consts();
        let g = GridSpec::new(256, 12.0).unwrap();
        // deep (but legal) valley at the origin plus a strong outflow phase
        let two_pi = 2.0 * std::f64::consts::PI;
        let depth = 5e-12;
        let p = ScalarField::from_fn(g, |x| {
            let envelope = (-x * x / 4.0).exp();
            let valley = depth + (1.0 - depth) * (0.5 * two_pi * x / 12.0).sin().powi(2);
            envelope * valley + 1e-30
        })
        .unwrap()
        .normalize()
        .unwrap();
        let s = ScalarField::from_fn(g, |x| -2000.0 * (two_pi * x / 12.0).cos()).unwrap();
        let state = HydroState::new(p, s, 0.0).unwrap();
        let v = ScalarField::zeros(g);
        match evolve(&state, &v, 1e-3, 50, 1, &c) {
            Err(Error::NodeDuringStep { .. }) => {}
            other => panic!("expected node-during-step, got {other:?}"),
        }
    }

    #[test]
    fn stable_dt_bound_matches_scenarios() {
        let c = consts();
        let g = GridSpec::new(512, 18.0).unwrap();
        assert!(stable_dt_bound(&g, &c) > 1e-3);
        let tight = GridSpec::new(512, 10.0).unwrap();
        assert!(stable_dt_bound(&tight, &c) < 1e-3);
    }
}
