//! Truncated multiplier sums over the `(j, k)` lattice,
//! `k₁ = n+j, k₂ = n+j+k, k₃ = n+k`, `jk ≠ 0`:
//!
//! ```text
//! M_n  = Σ ⟨n⟩^{2s} / (⟨k₁⟩⟨k₂⟩⟨k₃⟩)^{2s} ⟨k₁^{2α} − k₂^{2α} + k₃^{2α} − n^{2α}⟩^{2b′}
//! M(n) = Σ ⟨n⟩^{2s+2c} / (⟨k₁⟩⟨k₂⟩⟨k₃⟩)^{2s} ⟨|jk| / (|n|+|j|+|k|)^{2−2α}⟩^{1−ε}
//! ```
//!
//! Both are summed over `|j|, |k| ≤ K` and `|j|, |k| ≤ 2K` in one pass. Terms are
//! symmetric in `j ↔ k`, so only `j ≤ k` is visited.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lattice::SymTable;
use super::report::{fit_slope, rel_change, AuditReport, Extremal, Table};
use crate::error::{Error, Result};
use crate::fractional::Alpha;
use crate::spectral::bracket;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MnParams {
    pub alpha: Alpha,
    pub s: f64,
    pub bprime: f64,
    pub n_max: i64,
    /// Inner truncation `K`; the outer one is `2K`.
    pub k_trunc: i64,
    pub tolerance: f64,
}

impl Default for MnParams {
    fn default() -> Self {
        MnParams {
            alpha: Alpha::new(0.75).expect("valid"),
            s: 0.2,
            bprime: 0.49,
            n_max: 256,
            k_trunc: 2048,
            tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothingSumParams {
    pub alpha: Alpha,
    pub s: f64,
    pub c: f64,
    /// The exponent `1−` is `1 − eps`.
    pub eps: f64,
    pub n_max: i64,
    pub k_trunc: i64,
    pub tolerance: f64,
    /// Smoothing exponent of the failure probe; defaults to `α − 1/2 + 0.1`.
    pub probe_c: Option<f64>,
}

impl Default for SmoothingSumParams {
    fn default() -> Self {
        SmoothingSumParams {
            alpha: Alpha::new(0.75).expect("valid"),
            s: 0.6,
            c: 0.2,
            eps: 0.01,
            n_max: 256,
            k_trunc: 1024,
            tolerance: 0.05,
            probe_c: None,
        }
    }
}

fn check_truncation(n_max: i64, k_trunc: i64) -> Result<()> {
    if n_max < 0 || k_trunc < 1 {
        return Err(Error::config("need n_max >= 0 and K >= 1"));
    }
    if k_trunc < 4 * n_max {
        return Err(Error::config(format!(
            "truncation K = {k_trunc} below 4·n_max = {}",
            4 * n_max
        )));
    }
    Ok(())
}

/// `(Σ_{|j|,|k| ≤ k_in}, Σ_{|j|,|k| ≤ k_out})` of a `j ↔ k` symmetric term, `jk ≠ 0`.
#[inline]
fn pair_sums(k_in: i64, k_out: i64, term: impl Fn(i64, i64) -> f64) -> (f64, f64) {
    let mut inner = 0.0;
    let mut outer = 0.0;
    for j in (-k_out..=k_out).filter(|j| *j != 0) {
        let mut row_in = 0.0;
        let mut row_out = 0.0;
        let diag = term(j, j);
        let split = if j.abs() <= k_in { k_in } else { j };
        for k in (j + 1)..=split {
            if k != 0 {
                row_in += term(j, k);
            }
        }
        for k in (split + 1).max(j + 1)..=k_out {
            if k != 0 {
                row_out += term(j, k);
            }
        }
        if j.abs() <= k_in {
            inner += diag + 2.0 * row_in;
        }
        outer += diag + 2.0 * (row_in + row_out);
    }
    (inner, outer)
}

struct Weights {
    /// `⟨m⟩^{−2s}`
    decay: SymTable,
    /// `|m|^{2α}`
    power: SymTable,
}

impl Weights {
    fn new(radius: i64, alpha: Alpha, s: f64) -> Self {
        let p = 2.0 * alpha.value();
        Weights {
            decay: SymTable::new(radius, |m| bracket(m as f64).powf(-2.0 * s)),
            power: SymTable::new(radius, |m| {
                if m == 0 {
                    0.0
                } else {
                    (m.abs() as f64).powf(p)
                }
            }),
        }
    }
}

/// One `M_n` term (without the `⟨n⟩^{2s}` prefactor).
#[inline]
fn mn_term(w: &Weights, n: i64, j: i64, k: i64, bprime: f64) -> f64 {
    let pw = &w.power;
    let g = (pw.get(n + j) + pw.get(n + k)) - (pw.get(n + j + k) + pw.get(n));
    let base = w.decay.get(n + j) * w.decay.get(n + k) * w.decay.get(n + j + k);
    if bprime == 0.0 {
        base
    } else {
        base * (1.0 + g * g).powf(-bprime)
    }
}

/// `(M_n at K, M_n at 2K)`.
pub fn mn_sum(p: &MnParams, n: i64) -> (f64, f64) {
    let w = Weights::new(n.abs() + 4 * p.k_trunc, p.alpha, p.s);
    mn_sum_with(&w, p, n)
}

fn mn_sum_with(w: &Weights, p: &MnParams, n: i64) -> (f64, f64) {
    let pre = bracket(n as f64).powf(2.0 * p.s);
    let (a, b) = pair_sums(p.k_trunc, 2 * p.k_trunc, |j, k| {
        mn_term(w, n, j, k, p.bprime)
    });
    (pre * a, pre * b)
}

struct SmoothWeights {
    base: Weights,
    /// `m^{−(2−2α)}` for `m ≥ 0`
    denom: SymTable,
}

#[inline]
fn smoothing_term(w: &SmoothWeights, n: i64, j: i64, k: i64, expo: f64) -> f64 {
    let x = (j * k).abs() as f64 * w.denom.get(n.abs() + j.abs() + k.abs());
    let d = &w.base.decay;
    d.get(n + j) * d.get(n + k) * d.get(n + j + k) * (1.0 + x * x).powf(-0.5 * expo)
}

fn smooth_weights(p: &SmoothingSumParams, radius: i64) -> SmoothWeights {
    let q = 2.0 - 2.0 * p.alpha.value();
    SmoothWeights {
        base: Weights::new(radius, p.alpha, p.s),
        denom: SymTable::new(radius, |m| {
            if m == 0 {
                0.0
            } else {
                (m.abs() as f64).powf(-q)
            }
        }),
    }
}

/// `(M(n) at K, M(n) at 2K)`.
pub fn smoothing_sum(p: &SmoothingSumParams, n: i64) -> (f64, f64) {
    let w = smooth_weights(p, n.abs() + 4 * p.k_trunc);
    smoothing_sum_with(&w, p, n)
}

fn smoothing_sum_with(w: &SmoothWeights, p: &SmoothingSumParams, n: i64) -> (f64, f64) {
    let pre = bracket(n as f64).powf(2.0 * p.s + 2.0 * p.c);
    let expo = 1.0 - p.eps;
    let (a, b) = pair_sums(p.k_trunc, 2 * p.k_trunc, |j, k| {
        smoothing_term(w, n, j, k, expo)
    });
    (pre * a, pre * b)
}

/// Shared scan/stability protocol. `values[i] = (M at K, M at 2K)` for `n = i`.
fn stability_report(
    rep: &mut AuditReport,
    values: &[(f64, f64)],
    k_trunc: i64,
    tolerance: f64,
    symmetric: bool,
) {
    let n_max = values.len() as i64 - 1;
    let mut t = Table::new("per_n", &["n", "M_K", "M_2K", "rel_change"]);
    for (n, (a, b)) in values.iter().enumerate() {
        t.push(vec![n as f64, *a, *b, rel_change(*a, *b)]);
    }
    let argmax = |f: fn(&(f64, f64)) -> f64| {
        values
            .iter()
            .enumerate()
            .fold((0usize, f64::MIN), |acc, (i, v)| {
                if f(v) > acc.1 {
                    (i, f(v))
                } else {
                    acc
                }
            })
    };
    let (n1, m1) = argmax(|v| v.0);
    let (n2, m2) = argmax(|v| v.1);
    rep.extremals.push(Extremal::new(
        format!("max_K{k_trunc}"),
        m1,
        &[("n", n1 as f64)],
    ));
    rep.extremals.push(Extremal::new(
        format!("max_K{}", 2 * k_trunc),
        m2,
        &[("n", n2 as f64)],
    ));
    rep.tables.push(t);
    rep.check("symmetry", symmetric, "terms symmetric under j <-> k");
    rep.check(
        "truncation_monotone",
        values.iter().all(|(a, b)| b >= a),
        "every M is nondecreasing in the truncation",
    );
    let c = rel_change(m1, m2);
    rep.check(
        "truncation_stability",
        c < tolerance,
        format!(
            "max over n changes by {:.3}% from K = {} to {}",
            100.0 * c,
            k_trunc,
            2 * k_trunc
        ),
    );
    // trend over the upper half of the n range, at the larger truncation
    let lo = (n_max / 2).max(1) as usize;
    if values.len() > lo + 1 {
        let x: Vec<f64> = (lo..values.len()).map(|n| (n as f64).ln()).collect();
        let y: Vec<f64> = values[lo..].iter().map(|v| v.1.ln()).collect();
        let slope = fit_slope(&x, &y);
        rep.extremals
            .push(Extremal::new("large_n_log_slope", slope, &[]));
        rep.check(
            "large_n_trend",
            slope <= 0.0,
            format!("log-log slope {slope:.4} over n in [{lo}, {n_max}]"),
        );
    }
}

fn symmetric_on_sample(n_max: i64, term: impl Fn(i64, i64, i64) -> f64) -> bool {
    let ns = [0, n_max / 2, n_max];
    ns.iter().all(|&n| {
        (-12i64..=12).all(|j| (-12i64..=12).all(|k| j * k == 0 || term(n, j, k) == term(n, k, j)))
    })
}

/// `M_n` for `0 ≤ n ≤ n_max` at truncations `K` and `2K`.
pub fn audit_mn_sum(p: &MnParams) -> Result<AuditReport> {
    let a = p.alpha.value();
    if !(p.s > (1.0 - a) / 2.0) {
        return Err(Error::input(format!(
            "M_n audit needs s > (1-alpha)/2, got s = {}",
            p.s
        )));
    }
    if !(0.0..0.5).contains(&p.bprime) {
        return Err(Error::input(format!(
            "bprime must lie in [0, 1/2), got {}",
            p.bprime
        )));
    }
    check_truncation(p.n_max, p.k_trunc)?;
    let mut rep = AuditReport::new("mn_sum", p);
    let w = Weights::new(p.n_max + 4 * p.k_trunc, p.alpha, p.s);
    let values: Vec<(f64, f64)> = (0..=p.n_max)
        .into_par_iter()
        .map(|n| mn_sum_with(&w, p, n))
        .collect();
    let sym = symmetric_on_sample(p.n_max, |n, j, k| mn_term(&w, n, j, k, p.bprime));
    stability_report(&mut rep, &values, p.k_trunc, p.tolerance, sym);
    rep.verdict = verdict(rep.pass);
    Ok(rep)
}

fn verdict(pass: bool) -> String {
    if pass {
        "consistent with bounded".into()
    } else {
        "growth detected".into()
    }
}

/// `M(n)` for `0 ≤ n ≤ n_max` at `K` and `2K`, plus the failure probe above the
/// smoothing threshold. The probe differs only in the `⟨n⟩^{2c}` prefactor, so it is
/// obtained by rescaling.
pub fn audit_smoothing_sum(p: &SmoothingSumParams) -> Result<AuditReport> {
    let a = p.alpha.value();
    if !(p.s > (1.0 - a) / 2.0) {
        return Err(Error::input(format!(
            "smoothing sum needs s > (1-alpha)/2, got s = {}",
            p.s
        )));
    }
    let c_max = (a - 0.5).min(2.0 * p.s + a - 1.0);
    if !(p.c < c_max) {
        return Err(Error::input(format!(
            "smoothing sum needs c < min(alpha - 1/2, 2s + alpha - 1) = {c_max}, got c = {}",
            p.c
        )));
    }
    if !(p.eps > 0.0 && p.eps < 1.0) {
        return Err(Error::input("eps must lie in (0, 1)"));
    }
    check_truncation(p.n_max, p.k_trunc)?;
    let probe_c = p.probe_c.unwrap_or(a - 0.5 + 0.1);
    let mut rep = AuditReport::new("smoothing_sum", p);
    let w = smooth_weights(p, p.n_max + 4 * p.k_trunc);
    let values: Vec<(f64, f64)> = (0..=p.n_max)
        .into_par_iter()
        .map(|n| smoothing_sum_with(&w, p, n))
        .collect();
    let expo = 1.0 - p.eps;
    let sym = symmetric_on_sample(p.n_max, |n, j, k| smoothing_term(&w, n, j, k, expo));
    stability_report(&mut rep, &values, p.k_trunc, p.tolerance, sym);

    let probe: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(n, v)| v.1 * bracket(n as f64).powf(2.0 * (probe_c - p.c)))
        .collect();
    let mut t = Table::new("probe", &["n", "M_probe_2K"]);
    for (n, v) in probe.iter().enumerate() {
        t.push(vec![n as f64, *v]);
    }
    rep.tables.push(t);
    let grows = probe.windows(2).all(|w| w[1] > w[0]);
    rep.extremals.push(Extremal::new(
        "probe_growth_factor",
        probe.last().copied().unwrap_or(f64::NAN) / probe[0],
        &[("c", probe_c)],
    ));
    rep.check(
        "failure_probe",
        grows,
        if grows {
            format!("probe at c = {probe_c} grows monotonically in n, as expected")
        } else {
            format!("anomaly: probe at c = {probe_c} does not grow monotonically")
        },
    );
    rep.verdict = verdict(rep.pass);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha() -> Alpha {
        Alpha::new(0.75).unwrap()
    }

    #[test]
    fn mn_matches_triple_sum() {
        // independent enumeration over (k1, k2, k3) with k1 - k2 + k3 = n
        let (s, bp, kt, n) = (1.0, 0.49, 8i64, 0i64);
        let p = MnParams {
            alpha: alpha(),
            s,
            bprime: bp,
            n_max: 0,
            k_trunc: kt,
            tolerance: 1.0,
        };
        let br = |x: i64| (1.0 + (x * x) as f64).sqrt();
        let pw = |x: i64| (x.abs() as f64).powf(1.5);
        let brute = |kk: i64| {
            let mut acc = 0.0;
            for k1 in n - kk..=n + kk {
                for k3 in n - kk..=n + kk {
                    let k2 = k1 + k3 - n;
                    if k1 == n || k2 == k1 {
                        continue;
                    }
                    let ph = pw(k1) - pw(k2) + pw(k3) - pw(n);
                    acc += br(n).powf(2.0 * s)
                        / (br(k1) * br(k2) * br(k3)).powf(2.0 * s)
                        / (1.0 + ph * ph).powf(bp);
                }
            }
            acc
        };
        let (a, b) = mn_sum(&p, n);
        assert!((a - brute(kt)).abs() < 1e-13 * a, "{a} {}", brute(kt));
        assert!((b - brute(2 * kt)).abs() < 1e-13 * b);
        let (a5, _) = mn_sum(&p, 5);
        let mut p5 = p;
        p5.n_max = 2;
        assert!(a5 > 0.0 && audit_mn_sum(&p5).is_ok());
    }

    #[test]
    fn smoothing_single_term() {
        let (s, c, eps) = (0.6, 0.2, 0.01);
        let p = SmoothingSumParams {
            alpha: alpha(),
            s,
            c,
            eps,
            n_max: 0,
            k_trunc: 1,
            tolerance: 1.0,
            probe_c: None,
        };
        let w = smooth_weights(&p, 8);
        let t = smoothing_term(&w, 0, 1, 1, 1.0 - eps);
        let br = |x: f64| (1.0 + x * x).sqrt();
        let want = 1.0
            / (br(1.0) * br(1.0) * br(2.0)).powf(2.0 * s)
            / br(1.0 / 2f64.powf(2.0 - 1.5)).powf(1.0 - eps);
        assert!((t - want).abs() < 1e-15);
    }

    #[test]
    fn smoothing_matches_brute_force() {
        let p = SmoothingSumParams {
            alpha: alpha(),
            s: 0.6,
            c: 0.2,
            eps: 0.01,
            n_max: 3,
            k_trunc: 12,
            tolerance: 1.0,
            probe_c: None,
        };
        let br = |x: f64| (1.0 + x * x).sqrt();
        for n in 0..=3i64 {
            let mut acc = 0.0;
            for j in -24i64..=24 {
                for k in -24i64..=24 {
                    if j * k == 0 {
                        continue;
                    }
                    let x = (j * k).abs() as f64 / ((n.abs() + j.abs() + k.abs()) as f64).powf(0.5);
                    acc += br(n as f64).powf(1.6)
                        / (br((n + j) as f64) * br((n + k) as f64) * br((n + j + k) as f64))
                            .powf(1.2)
                        / br(x).powf(0.99);
                }
            }
            let (_, b) = smoothing_sum(&p, n);
            assert!((b - acc).abs() < 1e-12 * acc, "{n}: {b} {acc}");
        }
    }

    #[test]
    fn domain_checks() {
        let mut p = MnParams {
            alpha: alpha(),
            s: 0.1,
            bprime: 0.49,
            n_max: 4,
            k_trunc: 16,
            tolerance: 0.05,
        };
        assert!(audit_mn_sum(&p).is_err());
        p.s = 0.2;
        p.k_trunc = 8;
        assert!(matches!(audit_mn_sum(&p), Err(Error::Config(_))));
        let q = SmoothingSumParams {
            alpha: alpha(),
            s: 0.6,
            c: 0.3,
            eps: 0.01,
            n_max: 2,
            k_trunc: 8,
            tolerance: 0.05,
            probe_c: None,
        };
        assert!(audit_smoothing_sum(&q).is_err());
    }

    #[test]
    fn small_reports_are_thread_invariant() {
        let p = MnParams {
            alpha: alpha(),
            s: 0.2,
            bprime: 0.49,
            n_max: 6,
            k_trunc: 24,
            tolerance: 0.05,
        };
        let a = audit_mn_sum(&p).unwrap().to_json();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let b = pool.install(|| audit_mn_sum(&p).unwrap().to_json());
        assert_eq!(a, b);
    }
}
