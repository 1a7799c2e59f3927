//! Shared FFT plans.
//!
//! rustfft plans are cached per transform length so that field operations stay
//! cheap pure functions. Inverse transforms are normalized by 1/N here, so a
//! forward/inverse round trip is the identity.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// In-place forward DFT (no normalization).
pub fn forward(buf: &mut [Complex64]) {
    plans(buf.len()).0.process(buf);
}

/// In-place inverse DFT, normalized by 1/N.
pub fn inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    plans(n).1.process(buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Forward transform of a real signal.
pub fn forward_real(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward(&mut buf);
    buf
}

/// Real part of the inverse transform.
pub fn inverse_to_real(mut buf: Vec<Complex64>) -> Vec<f64> {
    inverse(&mut buf);
    buf.into_iter().map(|v| v.re).collect()
}
