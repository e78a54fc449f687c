//! Space-time `L⁴` ratio `Q(f) = ‖e^{it(-Δ)^α} f‖_{L⁴_{t∈[0,2π]} L⁴_x} / ‖f‖_{H^s}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{AuditReport, Extremal, Table};
use crate::error::{Error, Result};
use crate::fractional::{symbol_laplacian, Alpha};
use crate::nonlinearity::ORACLE_MAX_M;
use crate::spectral::{
    bracket, fft_in_place, random_field_with, sobolev_norm, GridSpec, SpectralField, PAD_FACTOR,
};

/// Test profiles for the Strichartz corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Profile {
    /// `f̂(k) = ⟨k⟩^{−1/2} / (1 + ln⟨k⟩)`, real and positive.
    NearExtremal,
    /// `f̂(k) = 1` on the whole band.
    Dirichlet,
    /// Unit moduli with seeded random phases.
    RandomPhase { seed: u64 },
    /// `f̂(k) = 1` on `[n₀, n₀ + n₀^{1−α})`, `n₀ = M/4`: a packet on which the
    /// dispersion relation is nearly linear.
    ResonantPacket,
}

impl Profile {
    pub fn label(&self) -> String {
        match self {
            Profile::NearExtremal => "near_extremal".into(),
            Profile::Dirichlet => "dirichlet".into(),
            Profile::RandomPhase { seed } => format!("random_phase_{seed}"),
            Profile::ResonantPacket => "resonant_packet".into(),
        }
    }

    pub fn build(&self, grid: GridSpec, alpha: Alpha) -> SpectralField {
        let kmax = grid.k_max();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let f = match self {
            Profile::NearExtremal => SpectralField::from_fn(grid, |k| {
                let b = bracket(k as f64);
                one * (b.powf(-0.5) / (1.0 + b.ln()))
            }),
            Profile::Dirichlet => SpectralField::from_fn(grid, |_| one),
            Profile::RandomPhase { seed } => return random_field_with(grid, *seed, |_| 1.0),
            Profile::ResonantPacket => {
                let n0 = (grid.size() / 4) as i64;
                let width = ((n0 as f64).powf(1.0 - alpha.value()).ceil() as i64).max(1);
                SpectralField::from_fn(grid, |k| {
                    if k >= n0 && k < n0 + width && k <= kmax {
                        one
                    } else {
                        zero
                    }
                })
            }
        };
        let kmin = grid.k_min();
        f.expect("profile on grid")
            .map_modes(|k, c| if k == kmin { zero } else { c })
    }
}

/// Default number of time nodes: at least `4M`, and enough that the fastest phase
/// `2·(M/2)^{2α}` of `|u|⁴` advances by at most `π/2` per step.
pub fn default_time_nodes(m: usize, alpha: Alpha) -> usize {
    let fastest = 2.0 * symbol_laplacian((m / 2) as i64, alpha);
    (4 * m).max((4.0 * fastest).ceil() as usize + 1)
}

/// `∫_0^{2π} ∫_0^{2π} |e^{it(-Δ)^α} f|⁴ dx dt`: trapezoid on `mt` time nodes, padded
/// quadrature in `x`. Requires `mt ≥ 4M`.
pub fn strichartz_integral(f: &SpectralField, alpha: Alpha, mt: usize) -> Result<f64> {
    let m = f.grid().size();
    if mt < 4 * m {
        return Err(Error::config(format!(
            "time quadrature under-resolved: {mt} nodes < 4M = {}",
            4 * m
        )));
    }
    let mp = PAD_FACTOR * m;
    let modes: Vec<(usize, f64, Complex64)> = f
        .modes()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(k, c)| {
            let slot = if k >= 0 {
                k as usize
            } else {
                (k + mp as i64) as usize
            };
            (slot, symbol_laplacian(k, alpha), c)
        })
        .collect();
    let h = 2.0 * PI / (mt - 1) as f64;
    let chunk = 64;
    let partial: Vec<f64> = (0..mt.div_ceil(chunk))
        .into_par_iter()
        .map(|ci| {
            let mut buf = vec![Complex64::new(0.0, 0.0); mp];
            let mut acc = 0.0;
            for i in ci * chunk..((ci + 1) * chunk).min(mt) {
                let t = i as f64 * h;
                buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                for &(slot, w, c) in &modes {
                    buf[slot] = c * Complex64::from_polar(1.0, t * w);
                }
                fft_in_place(&mut buf, false);
                let q: f64 = buf.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum();
                let wt = if i == 0 || i == mt - 1 { 0.5 } else { 1.0 };
                acc += wt * q;
            }
            acc
        })
        .collect();
    Ok(partial.iter().sum::<f64>() * h * 2.0 * PI / mp as f64)
}

/// Exact space-time integral by the quartic sum over `k₁ − k₂ + k₃ − k₄ = 0` with the
/// time integral done in closed form. `O(M³)`; refuses `M > 256`.
pub fn strichartz_integral_oracle(f: &SpectralField, alpha: Alpha) -> Result<f64> {
    let m = f.grid().size();
    if m > ORACLE_MAX_M {
        return Err(Error::Cost(format!("quartic oracle refuses M = {m}")));
    }
    let g = f.grid();
    let modes: Vec<(i64, Complex64, f64)> = f
        .modes()
        .map(|(k, c)| (k, c, symbol_laplacian(k, alpha)))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for &(k1, c1, w1) in &modes {
        for &(k2, c2, w2) in &modes {
            for &(k3, c3, w3) in &modes {
                let k4 = k1 - k2 + k3;
                let Some(i4) = g.index(k4) else { continue };
                let c4 = f.coeffs()[i4];
                let w4 = symbol_laplacian(k4, alpha);
                let phi = w1 - w2 + w3 - w4;
                let time = if phi == 0.0 {
                    Complex64::new(2.0 * PI, 0.0)
                } else {
                    (Complex64::from_polar(1.0, 2.0 * PI * phi) - 1.0) / Complex64::new(0.0, phi)
                };
                acc += c1 * c2.conj() * c3 * c4.conj() * time;
            }
        }
    }
    Ok(2.0 * PI * acc.re)
}

/// `Q(f)` for one exponent.
pub fn strichartz_ratio(f: &SpectralField, alpha: Alpha, s: f64, mt: usize) -> Result<f64> {
    let den = sobolev_norm(f, s);
    if den == 0.0 {
        return Err(Error::input("Strichartz ratio of the zero field"));
    }
    Ok(strichartz_integral(f, alpha, mt)?.powf(0.25) / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrichartzParams {
    pub alpha: Alpha,
    /// Exponents scanned; those above `(1−α)/4` are bound checks, the others probes.
    pub s_values: Vec<f64>,
    /// Resolutions, each twice the previous.
    pub ladder: Vec<usize>,
    pub profiles: Vec<Profile>,
    /// Time nodes; `None` uses [`default_time_nodes`] per resolution.
    pub time_nodes: Option<usize>,
    /// Growth threshold per doubling.
    pub growth: f64,
}

impl Default for StrichartzParams {
    fn default() -> Self {
        StrichartzParams::standard(Alpha::new(0.75).expect("valid"))
    }
}

impl StrichartzParams {
    pub fn standard(alpha: Alpha) -> Self {
        let a = alpha.value();
        StrichartzParams {
            alpha,
            s_values: vec![(1.0 - a) / 4.0 + 0.05, 0.0],
            ladder: vec![64, 128, 256, 512, 1024],
            profiles: vec![
                Profile::NearExtremal,
                Profile::Dirichlet,
                Profile::RandomPhase { seed: 1 },
                Profile::RandomPhase { seed: 2 },
                Profile::ResonantPacket,
            ],
            time_nodes: None,
            growth: 0.25,
        }
    }
}

/// Supremum of `Q` over the corpus at each resolution of the ladder.
pub fn audit_strichartz(p: &StrichartzParams) -> Result<AuditReport> {
    if p.ladder.is_empty() || p.ladder.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::config("ladder must be a nonempty doubling sequence"));
    }
    if p.profiles.is_empty() || p.s_values.is_empty() {
        return Err(Error::config("need at least one profile and one exponent"));
    }
    if p.s_values.iter().any(|s| !s.is_finite()) {
        return Err(Error::config("exponents must be finite"));
    }
    let threshold = (1.0 - p.alpha.value()) / 4.0;
    let mut rep = AuditReport::new("strichartz", p);
    let mut table = Table::new("ratios", &["M", "profile", "s", "Q"]);
    let mut sup = vec![vec![(f64::MIN, 0usize); p.ladder.len()]; p.s_values.len()];
    for (li, &m) in p.ladder.iter().enumerate() {
        let grid = GridSpec::new(m)?;
        let mt = p
            .time_nodes
            .unwrap_or_else(|| default_time_nodes(m, p.alpha));
        for (pi, prof) in p.profiles.iter().enumerate() {
            let f = prof.build(grid, p.alpha);
            let quart = strichartz_integral(&f, p.alpha, mt)?.powf(0.25);
            for (si, &s) in p.s_values.iter().enumerate() {
                let q = quart / sobolev_norm(&f, s);
                table.push(vec![m as f64, pi as f64, s, q]);
                if q > sup[si][li].0 {
                    sup[si][li] = (q, pi);
                }
            }
        }
    }
    let mut sup_table = Table::new("sup", &["s", "M", "sup_Q", "argmax_profile", "growth"]);
    for (si, &s) in p.s_values.iter().enumerate() {
        let mut growths = Vec::new();
        for (li, &m) in p.ladder.iter().enumerate() {
            let g = if li == 0 {
                0.0
            } else {
                sup[si][li].0 / sup[si][li - 1].0 - 1.0
            };
            if li > 0 {
                growths.push(g);
            }
            sup_table.push(vec![s, m as f64, sup[si][li].0, sup[si][li].1 as f64, g]);
            rep.extremals.push(Extremal::new(
                format!("sup_Q_s{s}_M{m}"),
                sup[si][li].0,
                &[("profile", sup[si][li].1 as f64)],
            ));
        }
        let worst = growths.iter().copied().fold(f64::MIN, f64::max);
        let list = growths
            .iter()
            .map(|g| format!("{:.2}%", 100.0 * g))
            .collect::<Vec<_>>()
            .join(", ");
        if s > threshold {
            rep.check(
                format!("bounded_s{s}"),
                worst < p.growth,
                format!("growth per doubling: {list}"),
            );
        } else {
            let detected = worst > p.growth;
            rep.check(
                format!("probe_s{s}"),
                detected,
                if detected {
                    format!("growth detected: {list}")
                } else {
                    format!(
                        "anomaly: no doubling grows by more than {}%: {list}",
                        100.0 * p.growth
                    )
                },
            );
        }
    }
    rep.tables.push(table);
    rep.tables.push(sup_table);
    rep.verdict = if rep.pass {
        "bound consistent above threshold; growth detected below".into()
    } else {
        "see checks".into()
    };
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha() -> Alpha {
        Alpha::new(0.75).unwrap()
    }

    #[test]
    fn single_mode() {
        let g = GridSpec::new(16).unwrap();
        let f = SpectralField::from_modes(g, &[(1, Complex64::new(1.0, 0.0))]).unwrap();
        for s in [0.0, 0.3, 1.0] {
            let q = strichartz_ratio(&f, alpha(), s, 64).unwrap();
            let want = (2.0 * PI).sqrt() / 2f64.powf(s / 2.0);
            assert!((q - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn two_mode_closed_form() {
        // |1 + e^{iθ}|⁴ averages to 6, so the space-time integral is 24π²
        let g = GridSpec::new(32).unwrap();
        let kk = 7;
        let f = SpectralField::from_modes(
            g,
            &[
                (0, Complex64::new(1.0, 0.0)),
                (kk, Complex64::new(1.0, 0.0)),
            ],
        )
        .unwrap();
        let i = strichartz_integral(&f, alpha(), 128).unwrap();
        assert!((i - 24.0 * PI * PI).abs() < 1e-11 * i);
        let s = 0.4;
        let q = strichartz_ratio(&f, alpha(), s, 128).unwrap();
        let want = (24.0 * PI * PI).powf(0.25) / (1.0 + (1.0 + (kk * kk) as f64).powf(s)).sqrt();
        assert!((q - want).abs() < 1e-12 * want);
    }

    #[test]
    fn trapezoid_against_exact_time_integral() {
        let g = GridSpec::new(16).unwrap();
        let f = crate::spectral::random_field(g, 0.8, 3);
        let exact = strichartz_integral_oracle(&f, alpha()).unwrap();
        let trap = strichartz_integral(&f, alpha(), 8193).unwrap();
        assert!((trap - exact).abs() < 1e-5 * exact, "{trap} {exact}");
    }

    #[test]
    fn rejects_coarse_time_grid() {
        let g = GridSpec::new(16).unwrap();
        let f = crate::spectral::random_field(g, 0.8, 3);
        assert!(matches!(
            strichartz_integral(&f, alpha(), 63),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn profiles_live_on_band() {
        let g = GridSpec::new(64).unwrap();
        for p in StrichartzParams::standard(alpha()).profiles {
            let f = p.build(g, alpha());
            assert!(!f.is_zero());
            assert_eq!(
                f.coeff(g.k_min()),
                Complex64::new(0.0, 0.0),
                "{}",
                p.label()
            );
        }
    }
}
