use fracnls::evolution::{evolve, evolve_final, ungauge, EvolutionConfig, Integrator, Stepper};
use fracnls::fractional::Alpha;
use fracnls::invariants::Sign;
use fracnls::nonlinearity::{resonant_constant, Dealias};
use fracnls::spectral::{random_field, sobolev_norm, GridSpec, SpectralField};

fn data() -> SpectralField {
    random_field(GridSpec::new(64).unwrap(), 3.0, 7)
}

fn cfg(sign: Sign, dt: f64, integrator: Integrator) -> EvolutionConfig {
    let mut c = EvolutionConfig::new(Alpha::new(0.75).unwrap(), sign, dt);
    c.integrator = integrator;
    c
}

/// Observed orders from H¹ errors against a fine run of the same scheme. Steps stay
/// below the splitting resonance `π / max|k|^{2α} ≈ 0.017`.
fn orders(integrator: Integrator, sign: Sign) -> Vec<f64> {
    let u0 = data();
    let t = 0.5;
    let reference = evolve_final(&u0, t, &cfg(sign, 1e-5, integrator)).unwrap();
    let errs: Vec<f64> = [6.25e-3, 3.125e-3, 1.5625e-3]
        .iter()
        .map(|&dt| {
            let u = evolve_final(&u0, t, &cfg(sign, dt, integrator)).unwrap();
            sobolev_norm(&(&u - &reference), 1.0)
        })
        .collect();
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn strang_is_second_order() {
    for sign in [Sign::Defocusing, Sign::Focusing] {
        for p in orders(Integrator::StrangSplit, sign) {
            assert!((1.9..=2.1).contains(&p), "{sign:?}: order {p}");
        }
    }
}

#[test]
fn if_rk4_is_fourth_order() {
    for sign in [Sign::Defocusing, Sign::Focusing] {
        for p in orders(Integrator::IfRk4, sign) {
            assert!((3.8..=4.2).contains(&p), "{sign:?}: order {p}");
        }
    }
}

#[test]
fn schemes_agree() {
    let u0 = data();
    let a = evolve_final(
        &u0,
        1.0,
        &cfg(Sign::Defocusing, 2.5e-4, Integrator::StrangSplit),
    )
    .unwrap();
    // same discrete equation: products on the collocation grid
    let mut c = cfg(Sign::Defocusing, 2.5e-4, Integrator::IfRk4);
    c.dealias = Dealias::None;
    let b = evolve_final(&u0, 1.0, &c).unwrap();
    assert!(a.max_rel_diff(&b) < 1e-6, "{}", a.max_rel_diff(&b));
}

#[test]
fn time_reversal_returns_data() {
    let u0 = data();
    for integrator in [Integrator::StrangSplit, Integrator::IfRk4] {
        let c = cfg(Sign::Defocusing, 1e-3, integrator);
        let p = resonant_constant(&u0);
        let mut fwd = Stepper::new(&c, &u0, p).unwrap();
        let mut back = Stepper::with_dt(&c, &u0, p, -1e-3);
        let mut u = u0.clone();
        for _ in 0..200 {
            fwd.step(&mut u).unwrap();
        }
        for _ in 0..200 {
            back.step(&mut u).unwrap();
        }
        let tol = if integrator == Integrator::StrangSplit {
            1e-12
        } else {
            1e-9
        };
        assert!(
            u.max_rel_diff(&u0) < tol,
            "{integrator:?}: {}",
            u.max_rel_diff(&u0)
        );
    }
}

#[test]
fn gauged_run_matches_after_ungauging() {
    let u0 = data();
    let mut c = cfg(Sign::Focusing, 1e-3, Integrator::IfRk4);
    let u = evolve_final(&u0, 0.7, &c).unwrap();
    c.gauged = true;
    let v = evolve_final(&u0, 0.7, &c).unwrap();
    let back = ungauge(&v, 0.7, 1.0, resonant_constant(&u0));
    assert!(back.max_rel_diff(&u) < 1e-9);
}

#[test]
fn csv_trajectory_has_header_and_rows() {
    let mut c = cfg(Sign::Defocusing, 1e-2, Integrator::StrangSplit);
    c.sample_every = 10;
    c.norms = vec![fracnls::spectral::NormSpec::Lebesgue4];
    let rec = evolve(&data(), 0.5, &c).unwrap();
    let mut out = Vec::new();
    rec.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,mass,kinetic,potential,energy,L4");
    assert_eq!(lines.count(), rec.len());
    assert_eq!(rec.times.last(), Some(&0.5));
}
