//! High-low frequency decomposition over short stages.
//!
//! The data splits as `u₀ = Φ₀ + Ψ₀` with `Φ₀ = P_N u₀`. Each stage evolves the full
//! field `u = Φ + Ψ` and the low part `v` (from `Φ`) by the same gauged equation, then
//! reads off `w_nl = u − v − e^{iδ(-Δ)^α}Ψ`. Both runs share the gauge constant `P` of
//! the original data, so the free part of the high frequencies is the plain linear flow.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audits::{fit_slope, rel_change, AuditReport, Extremal, Table};
use crate::error::{Error, Result};
use crate::evolution::{evolve_with_gauge, local_existence_heuristic, EvolutionConfig, Integrator};
use crate::fractional::{project, propagate_linear, Alpha, Projection};
use crate::invariants::{energy, snapshot, Sign};
use crate::nonlinearity::{resonant_constant, Dealias};
use crate::spectral::{
    bracket, norm, random_field, random_field_with, sobolev_norm, GridSpec, NormSpec, SpectralField,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaRule {
    /// `δ = c₀ N^{−4(α−s)}`.
    Cutoff,
    /// `δ = c₀ ‖Φ₀‖^{−4}_{H^α}`.
    Heuristic,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageUpdate {
    /// `Φ ← v(δ) + w_nl(δ)`, `Ψ ←` linear evolution of `Ψ`.
    #[default]
    Literal,
    /// `Φ ← P_N u(δ)`, `Ψ ← (1 − P_N) u(δ)`.
    Reproject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HighLowConfig {
    pub alpha: Alpha,
    pub s: f64,
    pub s0: f64,
    pub n_cut: u64,
    pub stages: usize,
    pub delta_rule: DeltaRule,
    pub c0: f64,
    pub dt: f64,
    pub integrator: Integrator,
    pub dealias: Dealias,
    pub stage_update: StageUpdate,
}

impl Default for HighLowConfig {
    fn default() -> Self {
        HighLowConfig {
            alpha: Alpha::new(0.75).expect("valid"),
            s: 0.9,
            s0: 0.51,
            n_cut: 16,
            stages: 4,
            delta_rule: DeltaRule::Heuristic,
            c0: 1.0,
            dt: 1e-3,
            integrator: Integrator::StrangSplit,
            dealias: Dealias::Strict,
            stage_update: StageUpdate::Literal,
        }
    }
}

impl HighLowConfig {
    /// Checks `1/2 < s₀ < s` and `α − s₀ < min(2s₀ + α − 1, α − 1/2)`.
    ///
    /// `s ≥ α` is accepted (the smoothing regime sits above `α` for `α < 1`) and
    /// reported by [`HighLowConfig::s_above_alpha`].
    pub fn validate(&self) -> Result<()> {
        let a = self.alpha.value();
        if !(self.s0 > 0.5) {
            return Err(Error::config(format!(
                "s0 must exceed 1/2, got {}",
                self.s0
            )));
        }
        if !(self.s0 < self.s) {
            return Err(Error::config(format!(
                "ordering s0 < s < alpha violated: s0 = {}, s = {}",
                self.s0, self.s
            )));
        }
        let bound = (2.0 * self.s0 + a - 1.0).min(a - 0.5);
        if !(a - self.s0 < bound) {
            return Err(Error::config(format!(
                "alpha - s0 = {} must be below min(2 s0 + alpha - 1, alpha - 1/2) = {bound}",
                a - self.s0
            )));
        }
        if self.n_cut == 0 {
            return Err(Error::config("cutoff N must be positive"));
        }
        if self.stages == 0 {
            return Err(Error::config("need at least one stage"));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(Error::config("safety constant c0 must be positive"));
        }
        if let DeltaRule::Fixed(d) = self.delta_rule {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::config(format!(
                    "stage length must be positive, got {d}"
                )));
            }
        }
        self.evolution().validate()
    }

    pub fn s_above_alpha(&self) -> bool {
        self.s >= self.alpha.value()
    }

    fn evolution(&self) -> EvolutionConfig {
        let mut c = EvolutionConfig::new(self.alpha, Sign::Defocusing, self.dt);
        c.gauged = true;
        c.integrator = self.integrator;
        c.dealias = self.dealias;
        c.sample_every = usize::MAX;
        c.store_fields = true;
        c
    }

    pub fn delta(&self, phi0: &SpectralField) -> Result<f64> {
        match self.delta_rule {
            DeltaRule::Cutoff => {
                Ok(self.c0 * (self.n_cut as f64).powf(-4.0 * (self.alpha.value() - self.s)))
            }
            DeltaRule::Heuristic => local_existence_heuristic(phi0, self.alpha.value(), self.c0),
            DeltaRule::Fixed(d) => Ok(d),
        }
    }

    /// `(7α/8 + 1/16, 5α/6 + 1/12)`: first-pass and improved regularity thresholds.
    pub fn thresholds(&self) -> (f64, f64) {
        let a = self.alpha.value();
        (7.0 * a / 8.0 + 1.0 / 16.0, 5.0 * a / 6.0 + 1.0 / 12.0)
    }
}

/// `(P_N u₀, (1 − P_N) u₀)`.
pub fn decompose_initial(u0: &SpectralField, n_cut: u64) -> Result<(SpectralField, SpectralField)> {
    let phi = project(u0, Projection::low(n_cut))?;
    let psi = project(u0, Projection::high(n_cut))?;
    Ok((phi, psi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub stage: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub phi_h_alpha: f64,
    pub psi_h_s0: f64,
    pub psi_l2: f64,
    pub h_start: f64,
    pub h_end: f64,
    /// `H(Φ_{i+1}) − H(v(δ))`: the energy injected by the stage update.
    pub h_increment: f64,
    pub wnl_h_alpha: f64,
    pub wnl_l2: f64,
    /// `‖v + e^{iδ(-Δ)^α}Ψ + w_nl − u‖ / ‖u‖` in coefficients.
    pub reconstruction_error: f64,
}

impl StageRow {
    pub const COLUMNS: [&'static str; 12] = [
        "stage",
        "t_start",
        "t_end",
        "phi_h_alpha",
        "psi_h_s0",
        "psi_l2",
        "h_start",
        "h_end",
        "h_increment",
        "wnl_h_alpha",
        "wnl_l2",
        "reconstruction_error",
    ];

    pub fn values(&self) -> Vec<f64> {
        vec![
            self.stage as f64,
            self.t_start,
            self.t_end,
            self.phi_h_alpha,
            self.psi_h_s0,
            self.psi_l2,
            self.h_start,
            self.h_end,
            self.h_increment,
            self.wnl_h_alpha,
            self.wnl_l2,
            self.reconstruction_error,
        ]
    }

    pub fn h_drift(&self) -> f64 {
        rel_change(self.h_start, self.h_end)
    }
}

/// Result of one stage.
#[derive(Debug, Clone)]
pub struct Stage {
    pub u: SpectralField,
    pub v: SpectralField,
    pub psi_lin: SpectralField,
    pub w_nl: SpectralField,
    pub row: StageRow,
}

/// Evolve `v_in + psi` and `v_in` over `[0, δ]` with gauge constant `p`.
pub fn run_stage(
    v_in: &SpectralField,
    psi: &SpectralField,
    delta: f64,
    p: f64,
    cfg: &HighLowConfig,
) -> Result<Stage> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::config(format!(
            "stage length must be positive, got {delta}"
        )));
    }
    let ecfg = cfg.evolution();
    let u_in = v_in + psi;
    let (ru, rv) = rayon::join(
        || evolve_with_gauge(&u_in, delta, &ecfg, p),
        || evolve_with_gauge(v_in, delta, &ecfg, p),
    );
    let (ru, rv) = (ru?, rv?);
    let u = ru.final_field().expect("final sample").clone();
    let v = rv.final_field().expect("final sample").clone();
    let psi_lin = propagate_linear(psi, delta, cfg.alpha, 0.0);
    let w_nl = &(&u - &v) - &psi_lin;
    let rebuilt = &(&v + &psi_lin) + &w_nl;
    let a = cfg.alpha.value();
    let row = StageRow {
        stage: 0,
        t_start: 0.0,
        t_end: delta,
        phi_h_alpha: sobolev_norm(v_in, a),
        psi_h_s0: sobolev_norm(psi, cfg.s0),
        psi_l2: norm(psi, NormSpec::Lebesgue2),
        h_start: rv.snapshots[0].energy,
        h_end: rv.snapshots.last().expect("final sample").energy,
        h_increment: 0.0,
        wnl_h_alpha: sobolev_norm(&w_nl, a),
        wnl_l2: norm(&w_nl, NormSpec::Lebesgue2),
        reconstruction_error: rebuilt.max_rel_diff(&u),
    };
    Ok(Stage {
        u,
        v,
        psi_lin,
        w_nl,
        row,
    })
}

/// Per-stage bookkeeping of one run plus the budget quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageLedger {
    pub n_cut: u64,
    pub delta: f64,
    pub gauge_p: f64,
    pub rows: Vec<StageRow>,
    pub h_phi0: f64,
    /// `Σ |H(Φ_{i+1}) − H(v_i(δ))|`.
    pub cumulative_increment: f64,
    /// `(T/δ) N^{5α+s₀−6s}`.
    pub budget_growth: f64,
    /// `N^{2α−2s}`.
    pub budget_allowed: f64,
    /// `N^{α+s₀−2s}`.
    pub l2_scale: f64,
}

impl StageLedger {
    pub fn max_h_drift(&self) -> f64 {
        self.rows.iter().map(StageRow::h_drift).fold(0.0, f64::max)
    }

    pub fn max_reconstruction_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.reconstruction_error)
            .fold(0.0, f64::max)
    }

    /// Largest relative deviation of `‖Ψ_i‖_{H^{s₀}}` and `‖Ψ_i‖_{L²}` from stage 0.
    pub fn psi_spread(&self) -> f64 {
        let first = &self.rows[0];
        self.rows
            .iter()
            .flat_map(|r| {
                [
                    rel_change(first.psi_h_s0, r.psi_h_s0),
                    rel_change(first.psi_l2, r.psi_l2),
                ]
            })
            .filter(|x| x.is_finite())
            .fold(0.0, f64::max)
    }

    pub fn to_table(&self, name: &str) -> Table {
        let mut cols = vec!["N"];
        cols.extend(StageRow::COLUMNS);
        let mut t = Table::new(name, &cols);
        for r in &self.rows {
            let mut v = vec![self.n_cut as f64];
            v.extend(r.values());
            t.push(v);
        }
        t
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        self.to_table("stages").write_csv(out)
    }
}

/// Iterate [`run_stage`] `cfg.stages` times.
pub fn run_highlow(u0: &SpectralField, cfg: &HighLowConfig) -> Result<StageLedger> {
    cfg.validate()?;
    if !u0.is_finite() {
        return Err(Error::input("initial data not finite"));
    }
    if cfg.n_cut >= u0.grid().size() as u64 / 2 {
        return Err(Error::config(format!(
            "cutoff N = {} not resolved by grid {} (needs N < M/2)",
            cfg.n_cut,
            u0.grid()
        )));
    }
    let (mut phi, mut psi) = decompose_initial(u0, cfg.n_cut)?;
    let delta = cfg.delta(&phi)?;
    let p = resonant_constant(u0);
    let quad = cfg.integrator.energy_quadrature(cfg.dealias);
    let h = |f: &SpectralField| snapshot(f, 0.0, cfg.alpha, Sign::Defocusing, quad).energy;
    let h_phi0 = h(&phi);
    let mut rows = Vec::with_capacity(cfg.stages);
    let mut cumulative = 0.0;
    for i in 0..cfg.stages {
        let st = run_stage(&phi, &psi, delta, p, cfg)
            .map_err(|e| e.with_context(format!("stage {i}")))?;
        let (phi_next, psi_next) = match cfg.stage_update {
            StageUpdate::Literal => (&st.w_nl + &st.v, st.psi_lin),
            StageUpdate::Reproject => decompose_initial(&st.u, cfg.n_cut)?,
        };
        let mut row = st.row;
        row.stage = i;
        row.t_start = i as f64 * delta;
        row.t_end = (i + 1) as f64 * delta;
        row.h_increment = h(&phi_next) - row.h_end;
        cumulative += row.h_increment.abs();
        rows.push(row);
        phi = phi_next;
        psi = psi_next;
    }
    let (a, s, s0) = (cfg.alpha.value(), cfg.s, cfg.s0);
    let n = cfg.n_cut as f64;
    Ok(StageLedger {
        n_cut: cfg.n_cut,
        delta,
        gauge_p: p,
        rows,
        h_phi0,
        cumulative_increment: cumulative,
        budget_growth: cfg.stages as f64 * n.powf(5.0 * a + s0 - 6.0 * s),
        budget_allowed: n.powf(2.0 * a - 2.0 * s),
        l2_scale: n.powf(a + s0 - 2.0 * s),
    })
}

/// Scaling exponents `(2α+s₀−3s, 5α+s₀−6s, 2α−2s, α+s₀−2s)`.
pub fn exponents(cfg: &HighLowConfig) -> [f64; 4] {
    let (a, s, s0) = (cfg.alpha.value(), cfg.s, cfg.s0);
    [
        2.0 * a + s0 - 3.0 * s,
        5.0 * a + s0 - 6.0 * s,
        2.0 * a - 2.0 * s,
        a + s0 - 2.0 * s,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HighLowParams {
    pub config: HighLowConfig,
    /// Cutoffs swept, each run independently.
    pub cutoffs: Vec<u64>,
    pub m: usize,
    pub seed: u64,
    /// Data `c_k = A ⟨k⟩^{−σ} e^{iθ_k}` with `σ = s + 1/2 + 0.05`.
    pub amplitude: f64,
    pub h_tolerance: f64,
    pub reconstruction_tolerance: f64,
    pub psi_tolerance: f64,
}

impl Default for HighLowParams {
    fn default() -> Self {
        HighLowParams::standard()
    }
}

impl HighLowParams {
    pub fn standard() -> Self {
        HighLowParams {
            config: HighLowConfig::default(),
            cutoffs: vec![16, 32],
            m: 256,
            seed: 5,
            amplitude: 0.5,
            h_tolerance: 1e-6,
            reconstruction_tolerance: 1e-12,
            psi_tolerance: 1e-12,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.config.s + 0.55
    }

    pub fn data(&self) -> Result<SpectralField> {
        let a = self.amplitude;
        Ok(random_field(GridSpec::new(self.m)?, self.sigma(), self.seed).scale(a.into()))
    }
}

/// Sweep the cutoff and check the bookkeeping identities and scaling sign.
pub fn audit_highlow(p: &HighLowParams) -> Result<AuditReport> {
    p.config.validate()?;
    if p.cutoffs.is_empty() {
        return Err(Error::config("need at least one cutoff"));
    }
    let u0 = p.data()?;
    let ledgers: Vec<StageLedger> = p
        .cutoffs
        .par_iter()
        .map(|&n| {
            let mut c = p.config.clone();
            c.n_cut = n;
            run_highlow(&u0, &c).map_err(|e| e.with_context(format!("N = {n}")))
        })
        .collect::<Result<_>>()?;

    let mut rep = AuditReport::new("highlow", p);
    let (t1, t2) = p.config.thresholds();
    let ex = exponents(&p.config);
    rep.extremals
        .push(Extremal::new("threshold_first_pass", t1, &[]));
    rep.extremals
        .push(Extremal::new("threshold_improved", t2, &[]));
    for (label, v) in ["exp_wnl", "exp_growth", "exp_allowed", "exp_l2"]
        .iter()
        .zip(ex)
    {
        rep.extremals.push(Extremal::new(*label, v, &[]));
    }

    let mut stages = Table::new("stages", &[]);
    let mut scaling = Table::new(
        "scaling",
        &[
            "N",
            "delta",
            "wnl_h_alpha_first",
            "wnl_l2_first",
            "h_phi0",
            "cumulative_increment",
            "budget_growth",
            "budget_allowed",
            "l2_scale",
        ],
    );
    for l in &ledgers {
        let t = l.to_table("stages");
        stages.columns = t.columns;
        stages.rows.extend(t.rows);
        scaling.push(vec![
            l.n_cut as f64,
            l.delta,
            l.rows[0].wnl_h_alpha,
            l.rows[0].wnl_l2,
            l.h_phi0,
            l.cumulative_increment,
            l.budget_growth,
            l.budget_allowed,
            l.l2_scale,
        ]);
    }

    let recon = ledgers
        .iter()
        .map(StageLedger::max_reconstruction_error)
        .fold(0.0, f64::max);
    rep.check(
        "reconstruction",
        recon < p.reconstruction_tolerance,
        format!("max relative reconstruction residual {recon:.3e}"),
    );
    let drift = ledgers
        .iter()
        .map(StageLedger::max_h_drift)
        .fold(0.0, f64::max);
    rep.check(
        "low_hamiltonian_conserved",
        drift < p.h_tolerance,
        format!("max per-stage relative drift of H(v) {drift:.3e}"),
    );
    if p.config.stage_update == StageUpdate::Literal {
        let spread = ledgers
            .iter()
            .map(StageLedger::psi_spread)
            .fold(0.0, f64::max);
        rep.check(
            "psi_unitary",
            spread < p.psi_tolerance,
            format!("max relative change of Psi norms {spread:.3e}"),
        );
    }
    let budget_ok = ledgers.iter().all(|l| l.cumulative_increment < l.h_phi0);
    rep.check(
        "increments_within_h_phi0",
        budget_ok,
        ledgers
            .iter()
            .map(|l| {
                format!(
                    "N = {}: {:.3e} vs {:.3e}",
                    l.n_cut, l.cumulative_increment, l.h_phi0
                )
            })
            .collect::<Vec<_>>()
            .join("; "),
    );
    if ledgers.len() >= 2 {
        let x: Vec<f64> = ledgers.iter().map(|l| (l.n_cut as f64).log2()).collect();
        let y: Vec<f64> = ledgers
            .iter()
            .map(|l| l.rows[0].wnl_h_alpha.log2())
            .collect();
        let yl: Vec<f64> = ledgers.iter().map(|l| l.rows[0].wnl_l2.log2()).collect();
        let slope = fit_slope(&x, &y);
        let slope_l2 = fit_slope(&x, &yl);
        rep.extremals
            .push(Extremal::new("slope_wnl_h_alpha", slope, &[]));
        rep.extremals
            .push(Extremal::new("slope_wnl_l2", slope_l2, &[]));
        if ex[0] < 0.0 {
            rep.check(
                "scaling_sign",
                slope < 0.0,
                format!(
                    "log2 slope of ||w_nl||_H^alpha vs N: {slope:.3} (exponent {:.3})",
                    ex[0]
                ),
            );
        }
    }
    rep.tables.push(scaling);
    rep.tables.push(stages);
    rep.verdict = if rep.pass {
        "high-low bookkeeping consistent".into()
    } else {
        "see checks".into()
    };
    Ok(rep)
}

/// `|H(f+g) − H(f)| / (‖g‖² + ‖g‖‖f‖ + ‖g‖⁴ + ‖g‖‖f‖³)` with `H^α` norms and the
/// defocusing Hamiltonian.
pub fn hamiltonian_difference_bound_check(
    f: &SpectralField,
    g: &SpectralField,
    alpha: Alpha,
) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(Error::input("fields on different grids"));
    }
    if f.is_zero() && g.is_zero() {
        return Err(Error::input(
            "Hamiltonian difference ratio of two zero fields",
        ));
    }
    if g.is_zero() {
        return Ok(0.0);
    }
    let a = alpha.value();
    let (nf, ng) = (sobolev_norm(f, a), sobolev_norm(g, a));
    let h = |x: &SpectralField| energy(x, alpha, Sign::Defocusing).energy;
    let num = (h(&(f + g)) - h(f)).abs();
    let rhs = ng * ng + ng * nf + ng.powi(4) + ng * nf.powi(3);
    Ok(num / rhs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HamiltonianCorpusParams {
    pub alpha: Alpha,
    pub pairs: usize,
    pub ladder: Vec<usize>,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for HamiltonianCorpusParams {
    fn default() -> Self {
        HamiltonianCorpusParams::standard()
    }
}

impl HamiltonianCorpusParams {
    pub fn standard() -> Self {
        HamiltonianCorpusParams {
            alpha: Alpha::new(0.75).expect("valid"),
            pairs: 500,
            ladder: vec![64, 128],
            seed: 2024,
            tolerance: 0.10,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct PairSpec {
    sigma_f: f64,
    sigma_g: f64,
    amp_f: f64,
    amp_g: f64,
    seed_f: u64,
    seed_g: u64,
    zero_f: bool,
}

fn corpus(p: &HamiltonianCorpusParams) -> Vec<PairSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let lo = p.alpha.value() + 0.6;
    (0..p.pairs)
        .map(|i| PairSpec {
            sigma_f: rng.random_range(lo..3.0),
            sigma_g: rng.random_range(lo..3.0),
            amp_f: 10f64.powf(rng.random_range(-2.0..1.0)),
            amp_g: 10f64.powf(rng.random_range(-2.0..1.0)),
            seed_f: rng.random(),
            seed_g: rng.random(),
            zero_f: i % 10 == 0,
        })
        .collect()
}

fn build(grid: GridSpec, amp: f64, sigma: f64, seed: u64) -> SpectralField {
    random_field_with(grid, seed, |k| amp * bracket(k as f64).powf(-sigma))
}

/// Supremum of the Hamiltonian-difference ratio over a seeded corpus at each
/// resolution; every tenth pair has `f = 0`.
pub fn audit_hamiltonian_difference(p: &HamiltonianCorpusParams) -> Result<AuditReport> {
    if p.pairs == 0 || p.ladder.is_empty() {
        return Err(Error::config(
            "corpus needs pairs and at least one resolution",
        ));
    }
    let specs = corpus(p);
    let mut rep = AuditReport::new("hamiltonian_difference", p);
    let mut tab = Table::new("sup", &["M", "sup_ratio", "argmax", "sup_ratio_f_zero"]);
    let mut sups = Vec::new();
    for &m in &p.ladder {
        let grid = GridSpec::new(m)?;
        let ratios: Vec<f64> = specs
            .par_iter()
            .map(|q| {
                let f = if q.zero_f {
                    SpectralField::zeros(grid)
                } else {
                    build(grid, q.amp_f, q.sigma_f, q.seed_f)
                };
                let g = build(grid, q.amp_g, q.sigma_g, q.seed_g);
                hamiltonian_difference_bound_check(&f, &g, p.alpha)
            })
            .collect::<Result<_>>()?;
        let (arg, sup) = ratios
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc });
        let sup_zero = ratios
            .iter()
            .zip(&specs)
            .filter(|(_, q)| q.zero_f)
            .map(|(r, _)| *r)
            .fold(0.0, f64::max);
        tab.push(vec![m as f64, sup, arg as f64, sup_zero]);
        rep.extremals.push(Extremal::new(
            format!("sup_ratio_M{m}"),
            sup,
            &[("pair", arg as f64)],
        ));
        sups.push(sup);
    }
    let finite = sups.iter().all(|s| s.is_finite());
    rep.check("finite", finite, format!("sups {sups:?}"));
    let changes: Vec<f64> = sups.windows(2).map(|w| rel_change(w[0], w[1])).collect();
    rep.check(
        "resolution_stable",
        changes.iter().all(|c| *c < p.tolerance),
        format!(
            "change per doubling: {}",
            changes
                .iter()
                .map(|c| format!("{:.3}%", 100.0 * c))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
    rep.tables.push(tab);
    rep.verdict = if rep.pass {
        "bound holds with a stable constant".into()
    } else {
        "see checks".into()
    };
    Ok(rep)
}
