use qhydro::field::{DerivativeOrder, ScalarField};
use qhydro::grid::{GridSpec, PhysicalConstants};
use qhydro::madelung::{self, HydroState};
use qhydro::schrodinger::{AnalyticState, PotentialSpec};

#[derive(Clone, Copy)]
enum Variant { AmpBlend(f64), DealiasQ, Both(f64) }

fn blend(p: f64, p_max: f64, lo_decade: f64, width: f64) -> f64 {
    if !(p > 0.0) || !(p_max > 0.0) { return 0.0; }
    let u = ((p / p_max).log10() - lo_decade) / width;
    if u <= 0.0 { 0.0 } else if u >= 1.0 { 1.0 } else { u * u * (3.0 - 2.0 * u) }
}

fn q_amp(p: &ScalarField, variant: Variant) -> ScalarField {
    let p_max = p.max_value();
    let floor = 1e-12 * p_max;
    let amp = match variant {
        Variant::AmpBlend(d) | Variant::Both(d) => p.map(|v| {
            let w = blend(v, p_max, -12.0, d);
            let ratio = (v.max(1e-30 * p_max) / floor).ln();
            floor.sqrt() * (0.5 * w * ratio).exp()
        }),
        Variant::DealiasQ => {
            let f2 = floor * floor;
            p.map(|v| { let v = v.max(0.0); (v * v + f2).sqrt().sqrt() })
        }
    };
    let d2 = amp.differentiate(DerivativeOrder::Second);
    let q = d2.zip_with(&amp, |d2j, aj| -0.5 * d2j / aj).unwrap();
    match variant {
        Variant::DealiasQ | Variant::Both(_) => q.dealias(),
        _ => q,
    }
}

fn rhs(p: &ScalarField, s: &ScalarField, v: &ScalarField, variant: Variant) -> (ScalarField, ScalarField) {
    let grad_s = s.differentiate(DerivativeOrder::First);
    let flux = p.zip_with(&grad_s, |pj, gj| pj * gj).unwrap().dealias();
    let dp = flux.differentiate(DerivativeOrder::First).scaled(-1.0);
    let kinetic = grad_s.map(|g| g * g).dealias().scaled(0.5);
    let q = q_amp(p, variant);
    let local = kinetic.zip_with(v, |k, vv| -(k + vv)).unwrap().zip_with(&q, |a, qj| a - qj).unwrap();
    let dx = p.grid().spacing();
    let mass: f64 = p.values().iter().sum::<f64>() * dx;
    let mean: f64 = p.values().iter().zip(local.values()).map(|(&pj, &rj)| pj * rj).sum::<f64>() * dx / mass;
    let p_max = p.max_value();
    let ds = p.zip_with(&local, |pj, rj| {
        let w = blend(pj, p_max, -12.0, 4.0);
        w * rj + (1.0 - w) * mean
    }).unwrap();
    (dp, ds)
}

fn step(p: &ScalarField, s: &ScalarField, v: &ScalarField, dt: f64, variant: Variant) -> Option<(ScalarField, ScalarField)> {
    let (k1p, k1s) = rhs(p, s, v, variant);
    let p1 = p.zip_with(&k1p, |a, k| a + 0.5 * dt * k).unwrap();
    let s1 = s.zip_with(&k1s, |a, k| a + 0.5 * dt * k).unwrap();
    let (k2p, k2s) = rhs(&p1, &s1, v, variant);
    let p2 = p.zip_with(&k2p, |a, k| a + 0.5 * dt * k).unwrap();
    let s2 = s.zip_with(&k2s, |a, k| a + 0.5 * dt * k).unwrap();
    let (k3p, k3s) = rhs(&p2, &s2, v, variant);
    let p3 = p.zip_with(&k3p, |a, k| a + dt * k).unwrap();
    let s3 = s.zip_with(&k3s, |a, k| a + dt * k).unwrap();
    let (k4p, k4s) = rhs(&p3, &s3, v, variant);
    let comb = |f0: &ScalarField, k1: &ScalarField, k2: &ScalarField, k3: &ScalarField, k4: &ScalarField| {
        ScalarField::new(*f0.grid(), (0..f0.len()).map(|j| f0.values()[j] + dt / 6.0 * (k1.values()[j] + 2.0 * k2.values()[j] + 2.0 * k3.values()[j] + k4.values()[j])).collect()).unwrap()
    };
    let pn = comb(p, &k1p, &k2p, &k3p, &k4p);
    let sn = comb(s, &k1s, &k2s, &k3s, &k4s);
    let mx = pn.max_value();
    if pn.min_value() < -1e-9 * mx {
        let mut wj = (0usize, 0.0f64);
        for (j, &x) in pn.values().iter().enumerate() { if x < wj.1 { wj = (j, x); } }
        eprintln!("  guard: min {:.3e} at x={:+.3}, max {:.3e}; |k1s|max {:.2e} |k4s|max {:.2e} |k4p|max {:.2e}",
            pn.min_value(), pn.grid().point(wj.0), mx,
            k1s.values().iter().cloned().fold(0.0f64, |a,b| a.max(b.abs())),
            k4s.values().iter().cloned().fold(0.0f64, |a,b| a.max(b.abs())),
            k4p.values().iter().cloned().fold(0.0f64, |a,b| a.max(b.abs())));
        return None;
    }
    let pn = pn.map(|x| x.max(0.0)).normalize().unwrap();
    Some((pn, sn))
}

fn l2(a: &ScalarField, b: &ScalarField) -> f64 {
    let dx = a.grid().spacing();
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt() * dx.sqrt()
}

fn main() {
    let c = PhysicalConstants::default();
    for (name, variant) in [
        ("amp-blend D=2", Variant::AmpBlend(2.0)),
        ("amp-blend D=4", Variant::AmpBlend(4.0)),
        ("dealias-q    ", Variant::DealiasQ),
        ("both D=4     ", Variant::Both(4.0)),
    ] {
        // HO stationarity: 1000 steps
        let g = GridSpec::new(256, 13.0).unwrap();
        let psi = AnalyticState::HoGround { omega: 1.0 }.sample(&g, &c, 0.0).unwrap();
        let st = madelung::decompose(&psi, &c).unwrap();
        let v = PotentialSpec::Harmonic { omega: 1.0, center: 0.0 }.evaluate(&g, &c).unwrap();
        let (mut p, mut s) = (st.density().clone(), st.action().clone());
        let p0 = p.clone();
        let mut failed = None;
        for step_i in 1..=1000 {
            match step(&p, &s, &v, 1e-3, variant) {
                Some((pn, sn)) => { p = pn; s = sn; }
                None => { failed = Some(step_i); break; }
            }
        }
        let ho = match failed { Some(k) => format!("DIED step {k}"), None => format!("drift {:.2e}", l2(&p, &p0)) };

        // free Gaussian cross-check at t = 0.5 vs analytic density
        let g2 = GridSpec::new(512, 18.0).unwrap();
        let psi2 = AnalyticState::FreeGaussian { sigma: 1.0, x0: 0.0, k0: 0.0 }.sample(&g2, &c, 0.0).unwrap();
        let st2 = madelung::decompose(&psi2, &c).unwrap();
        let v2 = ScalarField::zeros(g2);
        let (mut p2, mut s2) = (st2.density().clone(), st2.action().clone());
        let mut failed2 = None;
        for step_i in 1..=500 {
            match step(&p2, &s2, &v2, 1e-3, variant) {
                Some((pn, sn)) => { p2 = pn; s2 = sn; }
                None => { failed2 = Some(step_i); break; }
            }
        }
        let fg = match failed2 {
            Some(k) => format!("DIED step {k}"),
            None => {
                let oracle = AnalyticState::FreeGaussian { sigma: 1.0, x0: 0.0, k0: 0.0 }.sample(&g2, &c, 0.5).unwrap().density();
                format!("L2 vs oracle {:.2e}", l2(&p2, &oracle))
            }
        };
        println!("{name}: HO {ho} | freeG {fg}");
    }
    let _ = HydroState::new; // keep import used
}
