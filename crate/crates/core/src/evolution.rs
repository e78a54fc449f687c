//! Time integration of `iu_t + (-Δ)^α u = μ|u|²u`.
//!
//! The gauged variable `v = e^{iμPt} u`, `P = (1/π)‖u₀‖²_{L²}`, solves
//! `iv_t + (-Δ)^α v = μ(|v|²v − Pv)`; for defocusing data this is
//! `iv_t + (-Δ)^α v + |v|²v − Pv = 0`. Both forms share the linear flow
//! `c_k ↦ e^{itω_k} c_k` with `ω_k = |k|^{2α}` (plus `μP` when gauged).
//!
//! * Strang splitting: exact linear half steps around the exact pointwise phase
//!   rotation `u ↦ e^{−iμ dt |u|²} u` on the collocation grid.
//! * IF-RK4 (Lawson): classical RK4 on `e^{−itΩ}c`, with the nonlinearity formed
//!   according to the dealiasing policy.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::{symbol_laplacian, Alpha};
use crate::invariants::{snapshot, InvariantSnapshot, Quadrature, Sign};
use crate::nonlinearity::{cubic, resonant_constant, Dealias};
use crate::spectral::{fft_in_place, norm, NormSpec, SpectralField};

/// Largest admissible step.
pub const DT_MAX: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    StrangSplit,
    IfRk4,
}

impl Integrator {
    pub fn order(self) -> u32 {
        match self {
            Integrator::StrangSplit => 2,
            Integrator::IfRk4 => 4,
        }
    }

    /// Quadrature under which the scheme's discrete energy is the conserved one.
    pub fn energy_quadrature(self, dealias: Dealias) -> Quadrature {
        match (self, dealias) {
            (Integrator::StrangSplit, _) | (Integrator::IfRk4, Dealias::None) => {
                Quadrature::Collocation
            }
            (Integrator::IfRk4, Dealias::Strict) => Quadrature::Padded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub alpha: Alpha,
    pub sign: Sign,
    pub gauged: bool,
    pub dt: f64,
    pub integrator: Integrator,
    pub dealias: Dealias,
    pub sample_every: usize,
    /// Norms recorded at every sample.
    pub norms: Vec<NormSpec>,
    pub store_fields: bool,
}

impl EvolutionConfig {
    pub fn new(alpha: Alpha, sign: Sign, dt: f64) -> Self {
        EvolutionConfig {
            alpha,
            sign,
            gauged: false,
            dt,
            integrator: Integrator::StrangSplit,
            dealias: Dealias::Strict,
            sample_every: 1,
            norms: Vec::new(),
            store_fields: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= DT_MAX) {
            return Err(Error::config(format!(
                "dt must lie in (0, {DT_MAX}], got {}",
                self.dt
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::config("sample_every must be positive"));
        }
        for n in &self.norms {
            if let NormSpec::Sobolev { s } = n {
                if !s.is_finite() {
                    return Err(Error::config("Sobolev exponent must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn mu(&self) -> f64 {
        self.sign.mu()
    }
}

/// Default step for data `u0`: half the nonlinear time scale `1/‖u₀‖²_∞`, at most
/// `DT_MAX`; IF-RK4 is additionally capped at `10⁻²·2π/max|k|^{2α}`.
pub fn default_dt(u0: &SpectralField, alpha: Alpha, integrator: Integrator) -> f64 {
    let amp = norm(u0, NormSpec::LebesgueInf).powi(2);
    let mut dt = 0.5 * if amp > 1.0 { 1.0 / amp } else { 1.0 };
    if integrator == Integrator::IfRk4 {
        let kmax = u0.grid().k_min().abs();
        dt = dt.min(1e-2 * 2.0 * std::f64::consts::PI / symbol_laplacian(kmax, alpha));
    }
    dt.min(DT_MAX)
}

/// Undo the gauge: `u(t) = e^{−iμPt} v(t)`.
pub fn ungauge(v: &SpectralField, t: f64, mu: f64, p: f64) -> SpectralField {
    v.scale(Complex64::from_polar(1.0, -mu * p * t))
}

/// Fixed-step propagator with precomputed phases.
#[derive(Debug, Clone)]
pub struct Stepper {
    integrator: Integrator,
    dealias: Dealias,
    mu: f64,
    dt: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    step_index: usize,
}

impl Stepper {
    /// `p` is the gauge constant; ignored unless `cfg.gauged`.
    pub fn new(cfg: &EvolutionConfig, grid_field: &SpectralField, p: f64) -> Result<Self> {
        cfg.validate()?;
        Ok(Self::with_dt(cfg, grid_field, p, cfg.dt))
    }

    /// Any nonzero step, including negative ones for time reversal.
    pub fn with_dt(cfg: &EvolutionConfig, grid_field: &SpectralField, p: f64, dt: f64) -> Self {
        let shift = if cfg.gauged { cfg.mu() * p } else { 0.0 };
        let omega: Vec<f64> = grid_field
            .grid()
            .wavenumbers()
            .map(|k| symbol_laplacian(k, cfg.alpha) + shift)
            .collect();
        Stepper {
            integrator: cfg.integrator,
            dealias: cfg.dealias,
            mu: cfg.mu(),
            dt,
            half: omega
                .iter()
                .map(|w| Complex64::from_polar(1.0, 0.5 * dt * w))
                .collect(),
            full: omega
                .iter()
                .map(|w| Complex64::from_polar(1.0, dt * w))
                .collect(),
            step_index: 0,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&mut self, field: &mut SpectralField) -> Result<()> {
        self.step_index += 1;
        match self.integrator {
            Integrator::StrangSplit => self.strang(field),
            Integrator::IfRk4 => self.if_rk4(field),
        }
        if !field.is_finite() {
            return Err(Error::Instability {
                step: self.step_index,
                dt: self.dt,
                context: String::new(),
            });
        }
        Ok(())
    }

    fn strang(&self, field: &mut SpectralField) {
        let m = field.grid().size();
        let c = field.coeffs_mut();
        for (z, e) in c.iter_mut().zip(&self.half) {
            *z *= e;
        }
        if self.mu != 0.0 {
            // coefficients -> nodal values (the grid transform is unnormalised inverse)
            fft_in_place(c, false);
            let rot = -self.mu * self.dt;
            for z in c.iter_mut() {
                *z *= Complex64::from_polar(1.0, rot * z.norm_sqr());
            }
            fft_in_place(c, true);
            let inv = 1.0 / m as f64;
            for (z, e) in c.iter_mut().zip(&self.half) {
                *z *= e * inv;
            }
        } else {
            for (z, e) in c.iter_mut().zip(&self.half) {
                *z *= e;
            }
        }
    }

    fn nonlinear(&self, c: &SpectralField) -> SpectralField {
        cubic(c, self.dealias).scale(Complex64::new(0.0, -self.mu))
    }

    fn apply(phase: &[Complex64], f: &SpectralField) -> SpectralField {
        let mut out = f.clone();
        for (z, e) in out.coeffs_mut().iter_mut().zip(phase) {
            *z *= e;
        }
        out
    }

    fn axpy(a: &SpectralField, h: f64, b: &SpectralField) -> SpectralField {
        let mut out = a.clone();
        for (z, w) in out.coeffs_mut().iter_mut().zip(b.coeffs()) {
            *z += w * h;
        }
        out
    }

    fn if_rk4(&self, field: &mut SpectralField) {
        let h = self.dt;
        if self.mu == 0.0 {
            *field = Self::apply(&self.full, field);
            return;
        }
        let c = &*field;
        let k1 = self.nonlinear(c);
        let k2 = self.nonlinear(&Self::apply(&self.half, &Self::axpy(c, 0.5 * h, &k1)));
        let ec = Self::apply(&self.half, c);
        let k3 = self.nonlinear(&Self::axpy(&ec, 0.5 * h, &k2));
        let k4 = self.nonlinear(&Self::apply(&self.half, &Self::axpy(&ec, h, &k3)));
        let mut out = Self::apply(&self.full, c);
        let e1 = Self::apply(&self.full, &k1);
        let e23 = Self::apply(&self.half, &(&k2 + &k3));
        for (((z, a), b), d) in out
            .coeffs_mut()
            .iter_mut()
            .zip(e1.coeffs())
            .zip(e23.coeffs())
            .zip(k4.coeffs())
        {
            *z += (a + b * 2.0 + d) * (h / 6.0);
        }
        *field = out;
    }
}

/// One step of size `cfg.dt`; the gauge constant is taken from `field` itself.
pub fn step(field: &SpectralField, cfg: &EvolutionConfig) -> Result<SpectralField> {
    let p = resonant_constant(field);
    let mut stepper = Stepper::new(cfg, field, p)?;
    let mut out = field.clone();
    stepper.step(&mut out)?;
    Ok(out)
}

/// Samples along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub snapshots: Vec<InvariantSnapshot>,
    pub norm_tracks: Vec<(NormSpec, Vec<f64>)>,
    pub fields_at: Option<Vec<SpectralField>>,
    /// Gauge constant `P = (1/π)‖u₀‖²_{L²}`.
    pub gauge_p: f64,
    pub gauged: bool,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_field(&self) -> Option<&SpectralField> {
        self.fields_at.as_ref().and_then(|f| f.last())
    }

    /// Largest `|q(t) − q(0)| / |q(0)|` of a snapshot quantity.
    pub fn relative_drift(&self, quantity: impl Fn(&InvariantSnapshot) -> f64) -> f64 {
        let q0 = quantity(&self.snapshots[0]);
        let scale = if q0 == 0.0 { 1.0 } else { q0.abs() };
        self.snapshots
            .iter()
            .map(|s| (quantity(s) - q0).abs() / scale)
            .fold(0.0, f64::max)
    }

    pub fn mass_drift(&self) -> f64 {
        self.relative_drift(|s| s.mass)
    }

    pub fn energy_drift(&self) -> f64 {
        self.relative_drift(|s| s.energy)
    }

    /// CSV: `t, mass, kinetic, potential, energy`, then one column per tracked norm.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["t", "mass", "kinetic", "potential", "energy"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend(self.norm_tracks.iter().map(|(n, _)| n.label()));
        w.write_record(&header).map_err(csv_err)?;
        for (i, s) in self.snapshots.iter().enumerate() {
            let mut row: Vec<String> = [s.t, s.mass, s.kinetic, s.potential, s.energy]
                .iter()
                .map(|v| fmt_f64(*v))
                .collect();
            row.extend(self.norm_tracks.iter().map(|(_, v)| fmt_f64(v[i])));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

struct Sampler<'a> {
    cfg: &'a EvolutionConfig,
    quad: Quadrature,
    rec: TrajectoryRecord,
}

impl Sampler<'_> {
    fn record(&mut self, t: f64, f: &SpectralField) {
        self.rec.times.push(t);
        self.rec
            .snapshots
            .push(snapshot(f, t, self.cfg.alpha, self.cfg.sign, self.quad));
        for (spec, vals) in &mut self.rec.norm_tracks {
            vals.push(norm(f, *spec));
        }
        if let Some(fs) = &mut self.rec.fields_at {
            fs.push(f.clone());
        }
    }
}

/// Integrate to time `t_end` with fixed steps; the last step is shortened so that
/// `t_end` is hit exactly. Samples every `sample_every` steps and at `t_end`.
pub fn evolve(u0: &SpectralField, t_end: f64, cfg: &EvolutionConfig) -> Result<TrajectoryRecord> {
    evolve_with_gauge(u0, t_end, cfg, resonant_constant(u0))
}

/// As [`evolve`], with the gauge constant `p` supplied instead of taken from `u0`.
pub fn evolve_with_gauge(
    u0: &SpectralField,
    t_end: f64,
    cfg: &EvolutionConfig,
    p: f64,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::config(format!(
            "final time must be nonnegative, got {t_end}"
        )));
    }
    if !u0.is_finite() {
        return Err(Error::input("initial data not finite"));
    }
    if cfg.gauged && !p.is_finite() {
        return Err(Error::input("gauge constant not finite"));
    }
    let mut sampler = Sampler {
        cfg,
        quad: cfg.integrator.energy_quadrature(cfg.dealias),
        rec: TrajectoryRecord {
            times: Vec::new(),
            snapshots: Vec::new(),
            norm_tracks: cfg.norms.iter().map(|n| (*n, Vec::new())).collect(),
            fields_at: cfg.store_fields.then(Vec::new),
            gauge_p: p,
            gauged: cfg.gauged,
        },
    };
    sampler.record(0.0, u0);
    if t_end == 0.0 {
        return Ok(sampler.rec);
    }

    let dt = cfg.dt;
    // tolerate round-off in t_end/dt so that T = n·dt is n full steps
    let n_full = ((t_end / dt) * (1.0 + 1e-12)).floor() as usize;
    let rem = t_end - n_full as f64 * dt;
    let tail = rem > 1e-12 * t_end;

    let mut stepper = Stepper::new(cfg, u0, p)?;
    let mut u = u0.clone();
    for i in 1..=n_full {
        stepper.step(&mut u)?;
        let last = i == n_full && !tail;
        if last {
            sampler.record(t_end, &u);
        } else if i % cfg.sample_every == 0 {
            sampler.record(i as f64 * dt, &u);
        }
    }
    if tail {
        let mut short = Stepper::with_dt(cfg, u0, p, rem);
        short.step_index = n_full;
        short.step(&mut u)?;
        sampler.record(t_end, &u);
    }
    Ok(sampler.rec)
}

/// Evolve and return only the final field.
pub fn evolve_final(
    u0: &SpectralField,
    t_end: f64,
    cfg: &EvolutionConfig,
) -> Result<SpectralField> {
    let mut c = cfg.clone();
    c.store_fields = true;
    c.norms.clear();
    c.sample_every = usize::MAX;
    let rec = evolve(u0, t_end, &c)?;
    Ok(rec
        .fields_at
        .and_then(|mut f| f.pop())
        .expect("final sample"))
}

/// `T_loc = c₀ ‖u₀‖^{−4}_{H^s}`, the local existence time scale for `s > 1/2`.
pub fn local_existence_heuristic(u0: &SpectralField, s: f64, c0: f64) -> Result<f64> {
    if s.is_nan() || s <= 0.5 {
        return Err(Error::config(format!(
            "local existence heuristic needs s > 1/2, got {s}"
        )));
    }
    if !(c0 > 0.0) {
        return Err(Error::config("safety constant must be positive"));
    }
    let n = crate::spectral::sobolev_norm(u0, s);
    if n == 0.0 {
        return Err(Error::input(
            "zero data has no finite local existence scale",
        ));
    }
    Ok(c0 * n.powi(-4))
}
