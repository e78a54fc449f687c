//! Quick end-to-end checks of identities that hold by construction.

use std::f64::consts::PI;

use num_complex::Complex64;

use fracnls::audits::{audit_phi_growth, AuditReport, PhiParams};
use fracnls::evolution::{evolve, evolve_final, EvolutionConfig, Integrator};
use fracnls::fractional::{
    apply_frac_derivative, freq_quadruple_gap, project, propagate_linear, Alpha, Projection,
};
use fracnls::highlow::{hamiltonian_difference_bound_check, run_stage, HighLowConfig};
use fracnls::invariants::{mass, Sign};
use fracnls::nonlinearity::{cubic, resonant_decompose_oracle, Dealias};
use fracnls::spectral::{
    forward_transform, inverse_transform, random_field, GridSpec, SpectralField,
};
use fracnls::Result;

type Case = (&'static str, fn() -> Result<bool>);

fn alpha() -> Alpha {
    Alpha::new(0.75).expect("valid")
}

fn grid(m: usize) -> GridSpec {
    GridSpec::new(m).expect("valid grid")
}

fn single_mode_phase() -> Result<bool> {
    let a = Complex64::new(0.6, 0.8);
    let u0 = SpectralField::from_modes(grid(16), &[(3, a)])?;
    let mut ok = true;
    for integrator in [Integrator::StrangSplit, Integrator::IfRk4] {
        let mut c = EvolutionConfig::new(alpha(), Sign::Defocusing, 1e-3);
        c.integrator = integrator;
        let u = evolve_final(&u0, 0.5, &c)?;
        let w = 3f64.powf(1.5) + a.norm_sqr();
        let want = a * Complex64::from_polar(1.0, 0.5 * w);
        ok &= (u.coeff(3) - want).norm() < 1e-9;
    }
    Ok(ok)
}

fn zero_time() -> Result<bool> {
    let u0 = random_field(grid(32), 1.5, 1);
    let rec = evolve(
        &u0,
        0.0,
        &EvolutionConfig::new(alpha(), Sign::Focusing, 1e-3),
    )?;
    Ok(rec.len() == 1 && rec.final_field().is_none_or(|f| *f == u0))
}

fn decomposition() -> Result<bool> {
    let u = random_field(grid(16), 0.8, 2);
    let parts = resonant_decompose_oracle(&u)?;
    Ok(parts
        .reassemble(&u)
        .max_rel_diff(&cubic(&u, Dealias::Strict))
        < 1e-12)
}

fn projections() -> Result<bool> {
    let u = random_field(grid(32), 0.5, 3);
    let lo = project(&u, Projection::low(5))?;
    let hi = project(&u, Projection::high(5))?;
    Ok(&lo + &hi == u && project(&u, Projection::low(16)).is_err())
}

fn plancherel() -> Result<bool> {
    let u = random_field(grid(64), 1.0, 4);
    let x = inverse_transform(&u);
    let phys = 2.0 * PI / 64.0 * x.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let back = forward_transform(&x, u.grid())?;
    Ok((phys / mass(&u) - 1.0).abs() < 1e-12 && back.max_rel_diff(&u) < 1e-13)
}

fn unitarity() -> Result<bool> {
    let u = random_field(grid(64), 1.0, 5);
    let v = propagate_linear(&u, 2.7, alpha(), -0.4);
    let w = propagate_linear(&v, -2.7, alpha(), -0.4);
    Ok((mass(&v) / mass(&u) - 1.0).abs() < 1e-12 && w.max_rel_diff(&u) < 1e-12)
}

fn frac_derivative() -> Result<bool> {
    let u = SpectralField::from_modes(grid(16), &[(3, Complex64::new(2.0, 0.0))])?;
    let d = apply_frac_derivative(&u, Alpha::new(0.6)?);
    Ok((d.coeff(3).re - 2.0 * 3f64.powf(0.6)).abs() < 1e-12)
}

fn gap_symmetry() -> Result<bool> {
    let a = alpha();
    Ok(
        freq_quadruple_gap(3, 7, 11, a) == freq_quadruple_gap(7, 3, 11, a)
            && freq_quadruple_gap(0, 7, 11, a) == 0.0,
    )
}

fn hamiltonian_zero_perturbation() -> Result<bool> {
    let f = random_field(grid(32), 2.0, 6);
    Ok(hamiltonian_difference_bound_check(&f, &SpectralField::zeros(f.grid()), alpha())? == 0.0)
}

fn highlow_without_high_part() -> Result<bool> {
    let v = project(&random_field(grid(64), 1.5, 7), Projection::low(8))?;
    let cfg = HighLowConfig::default();
    let st = run_stage(&v, &SpectralField::zeros(v.grid()), 0.05, 0.2, &cfg)?;
    Ok(st.w_nl.is_zero())
}

fn report_round_trip() -> Result<bool> {
    let r = audit_phi_growth(PhiParams::default())?;
    Ok(r.pass && AuditReport::from_json(&r.to_json())? == r)
}

pub const CASES: &[Case] = &[
    ("single-mode phase, both integrators", single_mode_phase),
    ("zero final time returns the data", zero_time),
    ("resonant decomposition reassembles", decomposition),
    ("projections split the field", projections),
    ("Plancherel and transform round trip", plancherel),
    ("linear flow is unitary and reversible", unitarity),
    ("fractional derivative of one mode", frac_derivative),
    ("gap symmetric, zero on axes", gap_symmetry),
    (
        "Hamiltonian difference vanishes for g = 0",
        hamiltonian_zero_perturbation,
    ),
    (
        "high-low stage with no high part",
        highlow_without_high_part,
    ),
    ("phi growth audit and JSON round trip", report_round_trip),
];

/// Runs every case; returns the number of failures.
pub fn run() -> usize {
    let mut failed = 0;
    for (name, case) in CASES {
        let (ok, note) = match case() {
            Ok(ok) => (ok, String::new()),
            Err(e) => (false, format!(" ({e})")),
        };
        if !ok {
            failed += 1;
        }
        println!("{} {name}{note}", if ok { "ok  " } else { "FAIL" });
    }
    failed
}
