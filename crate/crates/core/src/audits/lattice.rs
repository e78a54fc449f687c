//! Lattice scans for the elementary sum lemma and the frequency lower bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{fit_slope, rel_change, AuditReport, Extremal, Table};
use crate::error::{Error, Result};
use crate::fractional::{freq_quadruple_gap, Alpha, GAP_DIRECT_LIMIT};
use crate::spectral::bracket;

/// `f(m)` tabulated for `m ∈ [−radius, radius]`.
pub(crate) struct SymTable {
    radius: i64,
    values: Vec<f64>,
}

impl SymTable {
    pub(crate) fn new(radius: i64, f: impl Fn(i64) -> f64) -> Self {
        SymTable {
            radius,
            values: (-radius..=radius).map(f).collect(),
        }
    }

    #[inline]
    pub(crate) fn get(&self, m: i64) -> f64 {
        self.values[(m + self.radius) as usize]
    }
}

/// `φ_β(k) = Σ_{|n| ≤ |k|} ⟨n⟩^{−β}`.
pub fn audit_phi(beta: f64, k: i64) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::input(format!("phi needs beta >= 0, got {beta}")));
    }
    let k = k.unsigned_abs() as i64;
    Ok(1.0 + 2.0 * (1..=k).map(|n| bracket(n as f64).powf(-beta)).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhiParams {
    pub beta: f64,
    pub k_lo: i64,
    pub k_hi: i64,
    /// Number of log-spaced sample points in `[k_lo, k_hi]`.
    pub points: usize,
}

impl Default for PhiParams {
    fn default() -> Self {
        PhiParams {
            beta: 0.5,
            k_lo: 100,
            k_hi: 10_000,
            points: 21,
        }
    }
}

/// Growth regime of `φ_β` over `[k_lo, k_hi]`: power `k^{1−β}` for `β < 1`,
/// logarithmic for `β = 1`, bounded for `β > 1`.
pub fn audit_phi_growth(p: PhiParams) -> Result<AuditReport> {
    if !(p.beta >= 0.0) || p.k_lo < 1 || p.k_hi <= p.k_lo || p.points < 2 {
        return Err(Error::input(
            "phi scan needs beta >= 0, 1 <= k_lo < k_hi, points >= 2",
        ));
    }
    let mut rep = AuditReport::new("phi", p);
    let ks: Vec<i64> = (0..p.points)
        .map(|i| {
            let e = (p.k_lo as f64).ln()
                + ((p.k_hi as f64).ln() - (p.k_lo as f64).ln()) * i as f64 / (p.points - 1) as f64;
            e.exp().round() as i64
        })
        .collect();
    // one cumulative pass
    let mut vals = Vec::with_capacity(ks.len());
    let mut acc = 1.0;
    let mut n = 0;
    for &k in &ks {
        while n < k {
            n += 1;
            acc += 2.0 * bracket(n as f64).powf(-p.beta);
        }
        vals.push(acc);
    }
    let mut t = Table::new("growth", &["k", "phi"]);
    for (k, v) in ks.iter().zip(&vals) {
        t.push(vec![*k as f64, *v]);
    }
    let lk: Vec<f64> = ks.iter().map(|k| (*k as f64).ln()).collect();
    let lv: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    let exponent = fit_slope(&lk, &lv);
    let log_slope = fit_slope(&lk, &vals);
    rep.extremals
        .push(Extremal::new("fitted_exponent", exponent, &[]));
    rep.extremals
        .push(Extremal::new("slope_vs_log_k", log_slope, &[]));
    if p.beta < 1.0 {
        let want = 1.0 - p.beta;
        rep.check(
            "power_growth",
            (exponent - want).abs() <= 0.05,
            format!("fitted exponent {exponent:.4}, expected {want:.4}"),
        );
        rep.verdict = "power growth".into();
    } else if p.beta == 1.0 {
        rep.check(
            "log_growth",
            (log_slope - 2.0).abs() <= 0.1,
            format!("slope against ln k {log_slope:.4}, expected 2"),
        );
        rep.verdict = "logarithmic growth".into();
    } else {
        rep.check(
            "bounded",
            exponent < 0.05,
            format!("fitted exponent {exponent:.4} (bounded regime)"),
        );
        rep.verdict = "consistent with bounded".into();
    }
    rep.tables.push(t);
    Ok(rep)
}

fn sum_lemma_domain(beta: f64, gamma: f64) -> Result<()> {
    if !(beta >= gamma && gamma >= 0.0 && beta + gamma > 1.0) {
        return Err(Error::input(format!(
            "sum lemma needs beta >= gamma >= 0 and beta + gamma > 1, got ({beta}, {gamma})"
        )));
    }
    Ok(())
}

/// `Σ_{|n − k₁| ≤ K} ⟨n−k₁⟩^{−β}⟨n−k₂⟩^{−γ}  /  (⟨k₁−k₂⟩^{−γ} φ_β(k₁−k₂))`.
///
/// The truncation window is centred at `k₁`, so the ratio depends on `k₁ − k₂` only.
pub fn audit_sum_lemma(beta: f64, gamma: f64, k1: i64, k2: i64, k_trunc: i64) -> Result<f64> {
    sum_lemma_domain(beta, gamma)?;
    if k_trunc < 1 {
        return Err(Error::input("truncation must be positive"));
    }
    let d = k1 - k2;
    let lhs: f64 = (-k_trunc..=k_trunc)
        .map(|m| bracket(m as f64).powf(-beta) * bracket((m + d) as f64).powf(-gamma))
        .sum();
    Ok(lhs / (bracket(d as f64).powf(-gamma) * audit_phi(beta, d)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SumLemmaParams {
    pub beta: f64,
    pub gamma: f64,
    /// Scan `|k₁|, |k₂| ≤ k_max`.
    pub k_max: i64,
    /// Truncations compared, increasing.
    pub truncations: Vec<i64>,
    /// Allowed relative change of the supremum between consecutive truncations.
    pub tolerance: f64,
}

impl Default for SumLemmaParams {
    fn default() -> Self {
        SumLemmaParams {
            beta: 1.2,
            gamma: 0.9,
            k_max: 200,
            truncations: vec![1000, 10_000],
            tolerance: 0.01,
        }
    }
}

/// Supremum of the sum-lemma ratio over the `(k₁, k₂)` box, per truncation.
///
/// The table also lists a tail-corrected supremum, adding the integral estimate
/// `2(K+½)^{1−β−γ}/(β+γ−1)` of the omitted terms; the pass criterion uses the
/// plain truncated sums.
pub fn audit_sum_lemma_scan(p: &SumLemmaParams) -> Result<AuditReport> {
    sum_lemma_domain(p.beta, p.gamma)?;
    if p.k_max < 0 || p.truncations.is_empty() || p.truncations.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("need k_max >= 0 and increasing truncations"));
    }
    if p.truncations[0] < 1 {
        return Err(Error::input("truncation must be positive"));
    }
    let mut rep = AuditReport::new("sum_lemma", p);
    let dmax = 2 * p.k_max;
    let kt_max = *p.truncations.last().unwrap();
    let a = SymTable::new(kt_max, |m| bracket(m as f64).powf(-p.beta));
    let b = SymTable::new(kt_max + dmax, |m| bracket(m as f64).powf(-p.gamma));
    let mut phi = vec![1.0; dmax as usize + 1];
    for d in 1..=dmax as usize {
        phi[d] = phi[d - 1] + 2.0 * a.get(d as i64);
    }
    let rhs = |d: i64| b.get(d) * phi[d.unsigned_abs() as usize];
    let ds: Vec<i64> = (-dmax..=dmax).collect();
    let mut table = Table::new(
        "truncation",
        &[
            "K",
            "sup_ratio",
            "argmax_k1",
            "argmax_k2",
            "sup_ratio_tail_corrected",
        ],
    );
    let mut sups = Vec::new();
    for &kt in &p.truncations {
        let ratios: Vec<f64> = ds
            .par_iter()
            .map(|&d| {
                let mut s = 0.0;
                for m in -kt..=kt {
                    s += a.get(m) * b.get(m + d);
                }
                s / rhs(d)
            })
            .collect();
        let (imax, sup) =
            ratios.iter().enumerate().fold(
                (0, f64::MIN),
                |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc },
            );
        let d = ds[imax];
        let (k1, k2) = representative(d, p.k_max);
        let e = p.beta + p.gamma;
        let tail = 2.0 * (kt as f64 + 0.5).powf(1.0 - e) / (e - 1.0);
        let corrected = ratios
            .iter()
            .zip(&ds)
            .map(|(r, &d)| r + tail / rhs(d))
            .fold(f64::MIN, f64::max);
        table.push(vec![kt as f64, sup, k1 as f64, k2 as f64, corrected]);
        rep.extremals.push(Extremal::new(
            format!("sup_ratio_K{kt}"),
            sup,
            &[("k1", k1 as f64), ("k2", k2 as f64)],
        ));
        sups.push((kt, sup, corrected));
    }
    // translation invariance: the ratio at (k₁+m, k₂+m) equals that at (k₁, k₂)
    let kt0 = p.truncations[0];
    let probe = [(p.k_max, -p.k_max), (1, 0), (0, 0)];
    let shift_ok = probe.iter().all(|&(k1, k2)| {
        let r0 = audit_sum_lemma(p.beta, p.gamma, k1, k2, kt0).unwrap();
        let r1 = audit_sum_lemma(p.beta, p.gamma, k1 + 37, k2 + 37, kt0).unwrap();
        (r0 - r1).abs() <= 1e-10 * r0
    });
    rep.check(
        "translation_invariance",
        shift_ok,
        "ratio unchanged under common shifts",
    );
    let monotone = sups.windows(2).all(|w| w[1].1 >= w[0].1);
    rep.check(
        "truncation_monotone",
        monotone,
        "sup ratio nondecreasing in K",
    );
    let mut stable = true;
    let mut detail = Vec::new();
    for w in sups.windows(2) {
        let c = rel_change(w[0].1, w[1].1);
        let cc = rel_change(w[0].2, w[1].2);
        stable &= c < p.tolerance;
        detail.push(format!(
            "K {} -> {}: {:.3}% (tail-corrected {:.3}%)",
            w[0].0,
            w[1].0,
            100.0 * c,
            100.0 * cc
        ));
    }
    rep.check("truncation_stability", stable, detail.join("; "));
    rep.verdict = if stable {
        "consistent with bounded".into()
    } else {
        "truncation not converged".into()
    };
    rep.tables.push(table);
    Ok(rep)
}

fn representative(d: i64, k_max: i64) -> (i64, i64) {
    if d >= 0 {
        let k1 = d.min(k_max);
        (k1, k1 - d)
    } else {
        let k2 = (-d).min(k_max);
        (k2 + d, k2)
    }
}

/// `g(j,k,n) (|j|+|k|+|n|)^{2−2α} / (|j||k|)`.
pub fn gap_ratio(j: i64, k: i64, n: i64, alpha: Alpha) -> f64 {
    let g = freq_quadruple_gap(j, k, n, alpha);
    let w = ((j.abs() + k.abs() + n.abs()) as f64).powf(2.0 - 2.0 * alpha.value());
    g * w / (j.abs() as f64 * k.abs() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapParams {
    pub alpha: Alpha,
    pub j_max: i64,
    pub k_max: i64,
    pub n_max: i64,
    /// Allowed relative change of the minimum when the `n` box doubles.
    pub tolerance: f64,
}

impl Default for GapParams {
    fn default() -> Self {
        GapParams {
            alpha: Alpha::new(0.75).expect("valid"),
            j_max: 50,
            k_max: 50,
            n_max: 500,
            tolerance: 0.02,
        }
    }
}

#[derive(Clone, Copy)]
struct Min {
    value: f64,
    at: (i64, i64, i64),
}

impl Min {
    fn none() -> Self {
        Min {
            value: f64::INFINITY,
            at: (0, 0, 0),
        }
    }

    #[inline]
    fn offer(&mut self, v: f64, at: (i64, i64, i64)) {
        if v < self.value {
            self.value = v;
            self.at = at;
        }
    }

    fn merge(self, o: Min) -> Min {
        if o.value < self.value {
            o
        } else {
            self
        }
    }
}

#[derive(Clone, Copy)]
struct GapRow {
    inner: Min,
    outer: Min,
    far: Min,
    asym: bool,
}

/// Minimum of [`gap_ratio`] over `0 < |j| ≤ j_max`, `0 < |k| ≤ k_max`,
/// `|n| ≤ n_max`, and over the box with the `n` range doubled.
pub fn audit_freq_lower_bound(p: &GapParams) -> Result<AuditReport> {
    if p.j_max < 1 || p.k_max < 1 || p.n_max < 0 {
        return Err(Error::input(
            "gap scan needs j_max, k_max >= 1 and n_max >= 0",
        ));
    }
    let mut rep = AuditReport::new("freq_lower_bound", p);
    let alpha = p.alpha;
    let pw = 2.0 * alpha.value();
    let n2 = 2 * p.n_max;
    let radius = n2 + p.j_max + p.k_max;
    let direct = radius as f64 <= GAP_DIRECT_LIMIT;
    let pow = SymTable::new(if direct { radius } else { 0 }, |m| {
        if m == 0 {
            0.0
        } else {
            (m.abs() as f64).powf(pw)
        }
    });
    let wgt = SymTable::new(radius, |m| (m.abs() as f64).powf(2.0 - pw));
    let gap = |j: i64, k: i64, n: i64| -> f64 {
        if direct {
            ((pow.get(n + k) + pow.get(n + j)) - (pow.get(n + j + k) + pow.get(n))).abs()
        } else {
            freq_quadruple_gap(j, k, n, alpha)
        }
    };
    let nonzero = |m: i64| -> Vec<i64> { (-m..=m).filter(|v| *v != 0).collect() };
    let js = nonzero(p.j_max);
    let ks = nonzero(p.k_max);
    let rows: Vec<GapRow> = js
        .par_iter()
        .map(|&j| {
            let mut row = GapRow {
                inner: Min::none(),
                outer: Min::none(),
                far: Min::none(),
                asym: false,
            };
            for &k in &ks {
                // the mirrored pair is evaluated in the other order when it lies in the box
                let mirror = k.abs() <= p.j_max && j.abs() <= p.k_max;
                let jk = (j.abs() * k.abs()) as f64;
                for n in -n2..=n2 {
                    let g = gap(j, k, n);
                    if mirror && j < k && g != gap(k, j, n) {
                        row.asym = true;
                    }
                    let r = g * wgt.get(j.abs() + k.abs() + n.abs()) / jk;
                    row.outer.offer(r, (j, k, n));
                    if n.abs() <= p.n_max {
                        row.inner.offer(r, (j, k, n));
                        if n.abs() >= 4 * (j.abs() + k.abs()) {
                            row.far.offer(r, (j, k, n));
                        }
                    }
                }
            }
            row
        })
        .collect();
    let fold = |f: fn(&GapRow) -> Min| rows.iter().map(f).fold(Min::none(), Min::merge);
    let inner = fold(|r| r.inner);
    let outer = fold(|r| r.outer);
    let far = fold(|r| r.far);
    let asym = rows.iter().any(|r| r.asym);
    let at = |m: &Min| {
        [
            ("j", m.at.0 as f64),
            ("k", m.at.1 as f64),
            ("n", m.at.2 as f64),
        ]
    };
    rep.extremals
        .push(Extremal::new("min_ratio", inner.value, &at(&inner)));
    rep.extremals.push(Extremal::new(
        "min_ratio_doubled_box",
        outer.value,
        &at(&outer),
    ));
    rep.extremals
        .push(Extremal::new("min_ratio_far_field", far.value, &at(&far)));
    let mut t = Table::new(
        "box",
        &["n_max", "min_ratio", "argmin_j", "argmin_k", "argmin_n"],
    );
    for (nm, m) in [(p.n_max, inner), (n2, outer)] {
        t.push(vec![
            nm as f64,
            m.value,
            m.at.0 as f64,
            m.at.1 as f64,
            m.at.2 as f64,
        ]);
    }
    rep.tables.push(t);
    rep.check(
        "symmetry",
        !asym,
        "g(j,k,n) = g(k,j,n) at every scanned point",
    );
    rep.check(
        "positive",
        inner.value > 0.0 && outer.value > 0.0,
        format!("min ratio {:.6e}", inner.value),
    );
    let c = rel_change(inner.value, outer.value);
    rep.check(
        "box_stability",
        c < p.tolerance,
        format!("relative change {:.4}% when the n box doubles", 100.0 * c),
    );
    rep.verdict = if rep.pass {
        "consistent with a positive lower bound".into()
    } else {
        "lower bound not confirmed".into()
    };
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        assert_eq!(audit_phi(0.3, 0).unwrap(), 1.0);
        assert!((audit_phi(2.0, 3).unwrap() - 2.6).abs() < 1e-14);
        assert!((audit_phi(2.0, -3).unwrap() - 2.6).abs() < 1e-14);
        assert!(audit_phi(-1.0, 3).is_err());
    }

    #[test]
    fn phi_growth_regimes() {
        let r = audit_phi_growth(PhiParams::default()).unwrap();
        let e = r.extremal("fitted_exponent").unwrap().value;
        assert!((0.45..=0.55).contains(&e), "{e}");
        assert!(r.pass);
        for beta in [1.0, 2.0] {
            let r = audit_phi_growth(PhiParams {
                beta,
                ..PhiParams::default()
            })
            .unwrap();
            assert!(r.pass, "{beta}: {:?}", r.checks);
        }
    }

    #[test]
    fn sum_lemma_at_origin() {
        // Σ_n (1+n²)^{-2} = (π/2) coth π + (π²/2) csch² π
        let pi = std::f64::consts::PI;
        let exact = 0.5 * pi / pi.tanh() + 0.5 * pi * pi / pi.sinh().powi(2);
        let r = audit_sum_lemma(2.0, 2.0, 0, 0, 200_000).unwrap();
        assert!((r - exact).abs() < 1e-12, "{r} {exact}");
        assert!(audit_sum_lemma(0.5, 0.9, 0, 0, 10).is_err());
        assert!(audit_sum_lemma(0.6, 0.3, 0, 0, 10).is_err());
    }

    #[test]
    fn sum_lemma_translation() {
        let a = audit_sum_lemma(1.2, 0.9, 5, -3, 1000).unwrap();
        let b = audit_sum_lemma(1.2, 0.9, 105, 97, 1000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sum_lemma_scan_matches_pointwise() {
        let p = SumLemmaParams {
            beta: 1.2,
            gamma: 0.9,
            k_max: 5,
            truncations: vec![100, 200],
            tolerance: 0.5,
        };
        let r = audit_sum_lemma_scan(&p).unwrap();
        let e = r.extremal("sup_ratio_K100").unwrap();
        let (k1, k2) = (e.at[0].1 as i64, e.at[1].1 as i64);
        let direct = audit_sum_lemma(1.2, 0.9, k1, k2, 100).unwrap();
        assert!((direct - e.value).abs() < 1e-12 * direct);
        assert!(r.check_named("truncation_monotone").unwrap().pass);
    }

    #[test]
    fn gap_ratio_examples() {
        let a = Alpha::new(0.75).unwrap();
        let r = gap_ratio(1, 1, 0, a);
        let want = (2.0 - 2f64.powf(1.5)).abs() * 2f64.sqrt();
        assert!((r - want).abs() < 1e-14);
        assert!((r - 1.171_572_875).abs() < 1e-9);
        assert_eq!(gap_ratio(3, -7, 11, a), gap_ratio(-7, 3, 11, a));
    }

    #[test]
    fn small_gap_scan() {
        let p = GapParams {
            alpha: Alpha::new(0.75).unwrap(),
            j_max: 4,
            k_max: 4,
            n_max: 20,
            tolerance: 0.5,
        };
        let r = audit_freq_lower_bound(&p).unwrap();
        assert!(r.check_named("symmetry").unwrap().pass);
        let m = r.extremal("min_ratio").unwrap();
        // brute force
        let mut best = f64::INFINITY;
        for j in -4i64..=4 {
            for k in -4i64..=4 {
                for n in -20..=20 {
                    if j != 0 && k != 0 {
                        best = best.min(gap_ratio(j, k, n, p.alpha));
                    }
                }
            }
        }
        assert!((m.value - best).abs() <= 1e-12 * best);
        assert!(m.value > 0.0);
    }
}
