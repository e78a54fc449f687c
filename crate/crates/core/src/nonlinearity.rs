//! The cubic nonlinearity `|u|²u` and its resonant decomposition
//!
//! ```text
//! (|u|²u)^(k) = Σ_{k1,k2} û(k1) conj(û(k2)) û(k − k1 + k2)
//!             = P û(k) + ρ̂(k) + R̂(k),
//! P = (1/π)‖u‖²_{L²} = 2 Σ|û|²,   ρ̂(k) = −|û(k)|² û(k),
//! R̂(k) = Σ_{k1 ≠ k, k2 ≠ k1} û(k1) conj(û(k2)) û(k − k1 + k2).
//! ```
//!
//! The fast routes go through a 2×-padded physical grid, which is exact for cubic
//! products of band-limited fields. The convolution routes are kept as oracles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{bracket, SpectralField, PAD_FACTOR};

/// How pointwise products are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    /// 2× zero padding; the product equals the exact triple convolution on the band.
    #[default]
    Strict,
    /// Products on the collocation grid itself (aliased).
    None,
}

/// Largest grid accepted by the `O(M³)` convolution oracles.
pub const ORACLE_MAX_M: usize = 256;

/// Transform of `u · conj(v) · w` restricted to the band of the grid.
pub fn trilinear_product(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
    dealias: Dealias,
) -> Result<SpectralField> {
    same_grid(&[u, v, w])?;
    let factor = match dealias {
        Dealias::Strict => PAD_FACTOR,
        Dealias::None => 1,
    };
    let pu = u.physical_padded(factor);
    let pv = v.physical_padded(factor);
    let pw = w.physical_padded(factor);
    let prod = pu
        .iter()
        .zip(&pv)
        .zip(&pw)
        .map(|((a, b), c)| a * b.conj() * c)
        .collect();
    Ok(SpectralField::from_physical_truncated(u.grid(), prod))
}

/// Transform of `|u|²u`.
pub fn cubic(field: &SpectralField, dealias: Dealias) -> SpectralField {
    let factor = match dealias {
        Dealias::Strict => PAD_FACTOR,
        Dealias::None => 1,
    };
    let prod = field
        .physical_padded(factor)
        .into_iter()
        .map(|z| z * z.norm_sqr())
        .collect();
    SpectralField::from_physical_truncated(field.grid(), prod)
}

fn same_grid(fields: &[&SpectralField]) -> Result<()> {
    let g = fields[0].grid();
    if fields.iter().any(|f| f.grid() != g) {
        return Err(Error::config("fields live on different grids"));
    }
    Ok(())
}

fn oracle_guard(field: &SpectralField) -> Result<()> {
    let m = field.grid().size();
    if m > ORACLE_MAX_M {
        return Err(Error::Cost(format!(
            "convolution oracle is O(M³); refusing M = {m} > {ORACLE_MAX_M}"
        )));
    }
    Ok(())
}

/// Direct triple sum over all `(k1, k2)` with `k − k1 + k2` on the band.
pub fn cubic_oracle(field: &SpectralField) -> Result<SpectralField> {
    trilinear_oracle(field, field, field, |_, _, _| true)
}

/// The literal restricted sum defining `R̂(u, v, w)`.
pub fn remainder_oracle(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
) -> Result<SpectralField> {
    trilinear_oracle(u, v, w, |k, k1, k2| k1 != k && k2 != k1)
}

fn trilinear_oracle(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
    keep: impl Fn(i64, i64, i64) -> bool,
) -> Result<SpectralField> {
    same_grid(&[u, v, w])?;
    oracle_guard(u)?;
    let grid = u.grid();
    let (lo, hi) = (grid.k_min(), grid.k_max());
    let coeffs = grid
        .wavenumbers()
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k1 in lo..=hi {
                let a = u.coeff(k1);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k2 in lo..=hi {
                    let k3 = k - k1 + k2;
                    if k3 < lo || k3 > hi || !keep(k, k1, k2) {
                        continue;
                    }
                    acc += a * v.coeff(k2).conj() * w.coeff(k3);
                }
            }
            acc
        })
        .collect();
    Ok(SpectralField::from_coeffs_unchecked(grid, coeffs))
}

/// `P`, `ρ` and `R` of the resonant decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonantParts {
    pub p: f64,
    pub rho: SpectralField,
    pub r: SpectralField,
}

impl ResonantParts {
    /// `P·u + ρ + R`, which reconstructs the cubic transform.
    pub fn reassemble(&self, field: &SpectralField) -> SpectralField {
        let pu = field * self.p;
        &(&pu + &self.rho) + &self.r
    }
}

/// `P = (1/π) · 2π Σ|c_k|² = 2 Σ|c_k|²`.
pub fn resonant_constant(field: &SpectralField) -> f64 {
    2.0 * field.sum_sq()
}

/// `ρ̂(k) = −|û(k)|² û(k)`.
pub fn rho(field: &SpectralField) -> SpectralField {
    field.map_modes(|_, c| -c * c.norm_sqr())
}

/// Fast decomposition; `R` is obtained as `cubic − P·u − ρ`.
pub fn resonant_decompose(field: &SpectralField) -> ResonantParts {
    let p = resonant_constant(field);
    let rho = rho(field);
    let full = cubic(field, Dealias::Strict);
    let r = &(&full - &(field * p)) - &rho;
    ResonantParts { p, rho, r }
}

/// Decomposition with `R` from the literal restricted double sum.
pub fn resonant_decompose_oracle(field: &SpectralField) -> Result<ResonantParts> {
    Ok(ResonantParts {
        p: resonant_constant(field),
        rho: rho(field),
        r: remainder_oracle(field, field, field)?,
    })
}

/// Multilinear `ρ(u,v,w)` and `R(u,v,w)`.
///
/// `ρ̂(u,v,w)(k) = −û(k) conj(v̂(k)) ŵ(k)` so that the diagonal `u = v = w` gives back
/// `ρ(u)`; `R` is the restricted sum, computed as the full trilinear product minus the
/// two excluded index families
/// (`k1 = k`: `û(k) Σ conj(v̂) ŵ`, and `k2 = k1`: `ŵ(k) Σ û conj(v̂)`, sharing `k1 = k2 = k`).
pub fn resonant_decompose_multilinear(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
) -> Result<(SpectralField, SpectralField)> {
    let full = trilinear_product(u, v, w, Dealias::Strict)?;
    let vw: Complex64 = v
        .coeffs()
        .iter()
        .zip(w.coeffs())
        .map(|(b, c)| b.conj() * c)
        .sum();
    let uv: Complex64 = u
        .coeffs()
        .iter()
        .zip(v.coeffs())
        .map(|(a, b)| a * b.conj())
        .sum();
    let grid = u.grid();
    let mut rho = Vec::with_capacity(grid.size());
    let mut r = Vec::with_capacity(grid.size());
    for (i, t) in full.coeffs().iter().enumerate() {
        let (a, b, c) = (u.coeffs()[i], v.coeffs()[i], w.coeffs()[i]);
        let diag = a * b.conj() * c;
        rho.push(-diag);
        r.push(t - a * vw - c * uv + diag);
    }
    Ok((
        SpectralField::from_coeffs_unchecked(grid, rho),
        SpectralField::from_coeffs_unchecked(grid, r),
    ))
}

/// `‖ρ(u)‖_{H^{s+c}} = sqrt(Σ |û(k)|⁶ ⟨k⟩^{2s+2c})`.
pub fn rho_sobolev_norm(field: &SpectralField, s: f64, c: f64) -> f64 {
    let value = field
        .modes()
        .map(|(k, z)| z.norm_sqr().powi(3) * bracket(k as f64).powf(2.0 * (s + c)))
        .sum::<f64>()
        .sqrt();
    debug_assert!({
        let direct = crate::spectral::sobolev_norm(&rho(field), s + c);
        (direct - value).abs() <= 1e-12 * value.max(f64::MIN_POSITIVE)
    });
    value
}
