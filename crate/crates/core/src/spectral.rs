//! Periodic grid, discrete Fourier transforms and Sobolev/Lebesgue norms.
//!
//! Coefficients follow the continuum convention
//! `c_k = (1/2π) ∫ f(x) e^{-ikx} dx`, realised on the grid as
//! `c_k = (1/M) Σ_j f(x_j) e^{-ik x_j}` with `x_j = 2πj/M`, so that
//! `f(x_j) = Σ_k c_k e^{ik x_j}` and `(1/2π)∫|f|² = Σ|c_k|²`.
//!
//! The `H^s` norm carries no `2π` (`‖f‖²_{H^s} = Σ ⟨k⟩^{2s} |c_k|²`) while the
//! Lebesgue norms are continuum integrals over `[0, 2π)` (`‖f‖²_{L²} = 2π Σ|c_k|²`).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zero-padding factor used for physical-space quadratures and products.
pub const PAD_FACTOR: usize = 2;

/// Japanese bracket `⟨k⟩ = (1 + k²)^{1/2}`.
#[inline]
pub fn bracket(k: f64) -> f64 {
    (1.0 + k * k).sqrt()
}

/// Collocation grid on `[0, 2π)` with `M` points and frequencies `-M/2 ..= M/2 - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct GridSpec {
    m: usize,
}

impl GridSpec {
    pub fn new(m: usize) -> Result<Self> {
        if m < 4 || !m.is_multiple_of(2) {
            return Err(Error::config(format!(
                "grid size must be even and at least 4, got {m}"
            )));
        }
        Ok(GridSpec { m })
    }

    /// Number of collocation points (and of coefficients).
    pub fn size(&self) -> usize {
        self.m
    }

    pub fn k_min(&self) -> i64 {
        -(self.m as i64) / 2
    }

    pub fn k_max(&self) -> i64 {
        self.m as i64 / 2 - 1
    }

    /// Wavenumber stored at FFT-ordered slot `index`.
    #[inline]
    pub fn wavenumber(&self, index: usize) -> i64 {
        if index < self.m / 2 {
            index as i64
        } else {
            index as i64 - self.m as i64
        }
    }

    /// FFT-ordered slot of wavenumber `k`, if it is resolved by the grid.
    #[inline]
    pub fn index(&self, k: i64) -> Option<usize> {
        if k < self.k_min() || k > self.k_max() {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + self.m as i64) as usize)
        }
    }

    pub fn wavenumbers(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.m).map(move |i| self.wavenumber(i))
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.m)
            .map(|j| 2.0 * PI * j as f64 / self.m as f64)
            .collect()
    }
}

impl TryFrom<usize> for GridSpec {
    type Error = Error;
    fn try_from(m: usize) -> Result<Self> {
        GridSpec::new(m)
    }
}

impl From<GridSpec> for usize {
    fn from(g: GridSpec) -> usize {
        g.m
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M={}", self.m)
    }
}

type PlanKey = (usize, bool);
type PlanCache = (FftPlanner<f64>, HashMap<PlanKey, Arc<dyn Fft<f64>>>);

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<PlanCache>> = OnceLock::new();
    let cell = PLANS.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cell.lock().expect("fft plan cache poisoned");
    let (planner, cache) = &mut *guard;
    cache
        .entry((len, forward))
        .or_insert_with(|| {
            let dir = if forward {
                FftDirection::Forward
            } else {
                FftDirection::Inverse
            };
            planner.plan_fft(len, dir)
        })
        .clone()
}

/// Unnormalised in-place DFT of the given direction.
pub(crate) fn fft_in_place(buf: &mut [Complex64], forward: bool) {
    plan(buf.len(), forward).process(buf);
}

/// Fourier coefficients of a periodic function on a fixed grid, stored in FFT order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.size()],
        }
    }

    /// Build from FFT-ordered coefficients.
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.size() {
            return Err(Error::config(format!(
                "expected {} coefficients, got {}",
                grid.size(),
                coeffs.len()
            )));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::input("non-finite Fourier coefficient"));
        }
        Ok(SpectralField { grid, coeffs })
    }

    /// Field with the listed `(k, c_k)` modes and zeros elsewhere.
    pub fn from_modes(grid: GridSpec, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut f = SpectralField::zeros(grid);
        for &(k, c) in modes {
            let i = grid
                .index(k)
                .ok_or_else(|| Error::config(format!("mode {k} not resolved on {grid}")))?;
            f.coeffs[i] += c;
        }
        if f.coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::input("non-finite Fourier coefficient"));
        }
        Ok(f)
    }

    /// Field whose coefficient at `k` is `profile(k)`.
    pub fn from_fn(grid: GridSpec, profile: impl Fn(i64) -> Complex64) -> Result<Self> {
        let coeffs = grid.wavenumbers().map(profile).collect();
        SpectralField::from_coeffs(grid, coeffs)
    }

    pub(crate) fn from_coeffs_unchecked(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.size());
        SpectralField { grid, coeffs }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at wavenumber `k`; zero when `k` is outside the grid band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.grid
            .index(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// `(k, c_k)` pairs in FFT order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.grid.wavenumber(i), c))
    }

    /// Multiply every coefficient by `multiplier(k)`.
    pub fn map_modes(&self, multiplier: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let coeffs = self.modes().map(|(k, c)| multiplier(k, c)).collect();
        SpectralField::from_coeffs_unchecked(self.grid, coeffs)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// `Σ_k |c_k|²`.
    pub fn sum_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self, spec: NormSpec) -> f64 {
        norm(self, spec)
    }

    pub fn scale(&self, a: Complex64) -> Self {
        SpectralField::from_coeffs_unchecked(self.grid, self.coeffs.iter().map(|c| c * a).collect())
    }

    fn assert_same_grid(&self, other: &SpectralField) {
        assert_eq!(
            self.grid, other.grid,
            "spectral fields live on different grids"
        );
    }

    /// Largest `|a_k - b_k|` relative to the largest `|a_k|`, a convenient comparison.
    pub fn max_rel_diff(&self, other: &SpectralField) -> f64 {
        self.assert_same_grid(other);
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0_f64, f64::max)
            / scale
    }

    /// Physical samples on the zero-padded grid of `factor · M` points.
    pub fn physical_padded(&self, factor: usize) -> Vec<Complex64> {
        let m = self.grid.size();
        let mp = m * factor.max(1);
        let mut buf = vec![Complex64::new(0.0, 0.0); mp];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let k = self.grid.wavenumber(i);
            let slot = if k >= 0 {
                k as usize
            } else {
                (k + mp as i64) as usize
            };
            buf[slot] = c;
        }
        fft_in_place(&mut buf, false);
        buf
    }

    /// Coefficients on `grid` of a function sampled on a finer grid (`samples.len()` a
    /// multiple of `M`): forward transform, then truncation to the band of `grid`.
    pub fn from_physical_truncated(grid: GridSpec, mut samples: Vec<Complex64>) -> Self {
        let mp = samples.len();
        debug_assert!(mp >= grid.size() && mp.is_multiple_of(grid.size()));
        fft_in_place(&mut samples, true);
        let inv = 1.0 / mp as f64;
        let coeffs = grid
            .wavenumbers()
            .map(|k| {
                let slot = if k >= 0 {
                    k as usize
                } else {
                    (k + mp as i64) as usize
                };
                samples[slot] * inv
            })
            .collect();
        SpectralField::from_coeffs_unchecked(grid, coeffs)
    }
}

impl<'a> Add<&'a SpectralField> for &'a SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &'a SpectralField) -> SpectralField {
        self.assert_same_grid(rhs);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        SpectralField::from_coeffs_unchecked(self.grid, coeffs)
    }
}

impl<'a> Sub<&'a SpectralField> for &'a SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &'a SpectralField) -> SpectralField {
        self.assert_same_grid(rhs);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        SpectralField::from_coeffs_unchecked(self.grid, coeffs)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

/// `c_k = (1/M) Σ_j values_j e^{-ik x_j}`.
pub fn forward_transform(values: &[Complex64], grid: GridSpec) -> Result<SpectralField> {
    if values.len() != grid.size() {
        return Err(Error::config(format!(
            "expected {} samples for {grid}, got {}",
            grid.size(),
            values.len()
        )));
    }
    if values
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::input("non-finite sample"));
    }
    let mut buf = values.to_vec();
    fft_in_place(&mut buf, true);
    let inv = 1.0 / grid.size() as f64;
    buf.iter_mut().for_each(|c| *c *= inv);
    Ok(SpectralField::from_coeffs_unchecked(grid, buf))
}

/// `u(x_j) = Σ_k c_k e^{ik x_j}`.
pub fn inverse_transform(field: &SpectralField) -> Vec<Complex64> {
    let mut buf = field.coeffs.clone();
    fft_in_place(&mut buf, false);
    buf
}

/// Which norm to compute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    Sobolev { s: f64 },
    Lebesgue2,
    Lebesgue4,
    LebesgueInf,
}

impl NormSpec {
    pub fn sobolev(s: f64) -> Self {
        NormSpec::Sobolev { s }
    }

    /// Short column label (`H^0.5`, `L2`, `L4`, `Linf`).
    pub fn label(&self) -> String {
        match self {
            NormSpec::Sobolev { s } => format!("H^{s}"),
            NormSpec::Lebesgue2 => "L2".to_string(),
            NormSpec::Lebesgue4 => "L4".to_string(),
            NormSpec::LebesgueInf => "Linf".to_string(),
        }
    }

    /// Inverse of [`NormSpec::label`].
    pub fn parse(label: &str) -> Result<Self> {
        let spec = match label.trim() {
            "L2" => NormSpec::Lebesgue2,
            "L4" => NormSpec::Lebesgue4,
            "Linf" => NormSpec::LebesgueInf,
            other => {
                let s = other
                    .strip_prefix("H^")
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|s| s.is_finite())
                    .ok_or_else(|| Error::config(format!("unknown norm `{other}`")))?;
                NormSpec::Sobolev { s }
            }
        };
        Ok(spec)
    }
}

/// `‖f‖_{H^s} = sqrt(Σ ⟨k⟩^{2s} |c_k|²)`.
pub fn sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    field
        .modes()
        .map(|(k, c)| (1.0 + (k * k) as f64).powf(s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `∫_0^{2π} |f|⁴ dx`, exact for band-limited fields on the 2×-padded grid.
pub fn quartic_integral(field: &SpectralField) -> f64 {
    let u = field.physical_padded(PAD_FACTOR);
    let mp = u.len() as f64;
    2.0 * PI / mp * u.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum::<f64>()
}

pub fn norm(field: &SpectralField, spec: NormSpec) -> f64 {
    match spec {
        NormSpec::Sobolev { s } => sobolev_norm(field, s),
        NormSpec::Lebesgue2 => (2.0 * PI * field.sum_sq()).sqrt(),
        NormSpec::Lebesgue4 => quartic_integral(field).powf(0.25),
        NormSpec::LebesgueInf => field
            .physical_padded(PAD_FACTOR)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max),
    }
}

/// Wavenumbers in the order `0, 1, -1, 2, -2, …` up to `|k| = kmax`, so that random
/// phases drawn in this order agree on the shared band across resolutions.
fn outward_order(kmax: i64) -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..=kmax).flat_map(|k| [k, -k]))
}

/// `c_k = ⟨k⟩^{-σ} e^{iθ_k}` with seeded uniform phases; the `-M/2` mode is zero.
///
/// Phases are drawn outward from `k = 0`, so fields with the same seed on grids of
/// different size coincide on their common band.
pub fn random_field(grid: GridSpec, sigma: f64, seed: u64) -> SpectralField {
    random_field_with(grid, seed, |k| bracket(k as f64).powf(-sigma))
}

/// Random-phase field with prescribed moduli `amplitude(k)`, same phase stream as
/// [`random_field`].
pub fn random_field_with(
    grid: GridSpec,
    seed: u64,
    amplitude: impl Fn(i64) -> f64,
) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    for k in outward_order(grid.k_max()) {
        let theta: f64 = rng.random::<f64>() * 2.0 * PI;
        let i = grid.index(k).expect("k within band");
        f.coeffs[i] = Complex64::from_polar(amplitude(k), theta);
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(GridSpec::new(3).is_err());
        assert!(GridSpec::new(2).is_err());
        assert!(GridSpec::new(7).is_err());
        let g = GridSpec::new(8).unwrap();
        assert_eq!(g.k_min(), -4);
        assert_eq!(g.k_max(), 3);
        assert_eq!(g.wavenumbers().count(), 8);
        assert!(g.wavenumbers().any(|k| k == 0));
        for k in -4..=3 {
            assert_eq!(g.wavenumber(g.index(k).unwrap()), k);
        }
        assert_eq!(g.index(4), None);
    }

    #[test]
    fn single_mode_forward() {
        let g = GridSpec::new(8).unwrap();
        let vals: Vec<_> = g
            .nodes()
            .iter()
            .map(|&x| Complex64::from_polar(1.0, x))
            .collect();
        let f = forward_transform(&vals, g).unwrap();
        for (k, ck) in f.modes() {
            let want = if k == 1 { 1.0 } else { 0.0 };
            assert!((ck - c(want, 0.0)).norm() < 1e-14, "k={k} {ck}");
        }
    }

    #[test]
    fn constant_and_cosine() {
        let g = GridSpec::new(16).unwrap();
        let ones = vec![c(1.0, 0.0); 16];
        let f = forward_transform(&ones, g).unwrap();
        assert!((f.coeff(0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(f
            .modes()
            .filter(|&(k, _)| k != 0)
            .all(|(_, v)| v.norm() < 1e-15));

        let vals: Vec<_> = g.nodes().iter().map(|&x| c((2.0 * x).cos(), 0.0)).collect();
        let f = forward_transform(&vals, g).unwrap();
        for (k, ck) in f.modes() {
            let want = if k.abs() == 2 { 0.5 } else { 0.0 };
            assert!((ck - c(want, 0.0)).norm() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn forward_errors() {
        let g = GridSpec::new(8).unwrap();
        assert!(matches!(
            forward_transform(&[c(1.0, 0.0); 7], g),
            Err(Error::Config(_))
        ));
        let mut v = vec![c(0.0, 0.0); 8];
        v[3] = c(f64::NAN, 0.0);
        assert!(matches!(forward_transform(&v, g), Err(Error::Input(_))));
    }

    #[test]
    fn inverse_single_and_zero() {
        let g = GridSpec::new(8).unwrap();
        let f = SpectralField::from_modes(g, &[(1, c(1.0, 0.0))]).unwrap();
        for (u, x) in inverse_transform(&f).iter().zip(g.nodes()) {
            assert!((u - Complex64::from_polar(1.0, x)).norm() < 1e-14);
        }
        assert!(inverse_transform(&SpectralField::zeros(g))
            .iter()
            .all(|z| z.norm() == 0.0));
    }

    #[test]
    fn norm_examples() {
        let g = GridSpec::new(16).unwrap();
        let e1 = SpectralField::from_modes(g, &[(1, c(1.0, 0.0))]).unwrap();
        for s in [0.0, 0.5, 1.0, 2.3] {
            assert!((norm(&e1, NormSpec::sobolev(s)) - 2f64.powf(s / 2.0)).abs() < 1e-14);
        }
        assert!((norm(&e1, NormSpec::Lebesgue2) - (2.0 * PI).sqrt()).abs() < 1e-14);
        let one = SpectralField::from_modes(g, &[(0, c(1.0, 0.0))]).unwrap();
        assert!((norm(&one, NormSpec::sobolev(3.7)) - 1.0).abs() < 1e-15);
        assert!((norm(&one, NormSpec::Lebesgue2) - (2.0 * PI).sqrt()).abs() < 1e-14);
        let two = SpectralField::from_modes(g, &[(1, c(1.0, 0.0)), (2, c(1.0, 0.0))]).unwrap();
        assert!((norm(&two, NormSpec::sobolev(1.0)) - 7f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn lebesgue4_and_inf_single_mode() {
        let g = GridSpec::new(32).unwrap();
        for k in [-16, -3, 0, 5, 15] {
            let a = c(0.7, -1.3);
            let f = SpectralField::from_modes(g, &[(k, a)]).unwrap();
            let l4 = norm(&f, NormSpec::Lebesgue4);
            assert!((l4 - a.norm() * (2.0 * PI).powf(0.25)).abs() < 1e-10);
            assert!((norm(&f, NormSpec::LebesgueInf) - a.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn random_field_determinism_and_band() {
        let g = GridSpec::new(64).unwrap();
        let a = random_field(g, 1.5, 11);
        let b = random_field(g, 1.5, 11);
        assert_eq!(a, b);
        assert_ne!(a, random_field(g, 1.5, 12));
        assert_eq!(a.coeff(-32), Complex64::new(0.0, 0.0));
        for (k, ck) in a.modes().filter(|&(k, _)| k != -32) {
            assert!((ck.norm() - bracket(k as f64).powf(-1.5)).abs() < 1e-15);
        }
        // shared band agrees across resolutions
        let big = random_field(GridSpec::new(256).unwrap(), 1.5, 11);
        for k in -31..=31 {
            assert_eq!(a.coeff(k), big.coeff(k));
        }
    }

    #[test]
    fn random_field_smooth_h1_bound() {
        let g = GridSpec::new(128).unwrap();
        let f = random_field(g, 10.0, 3);
        let bound: f64 = (-64..64)
            .map(|k: i64| bracket(k as f64).powf(2.0 - 20.0))
            .sum();
        assert!(norm(&f, NormSpec::sobolev(1.0)) <= bound.sqrt() + 1e-15);
    }

    #[test]
    fn random_field_norms_across_resolution() {
        // σ = 1.1: H^s is uniformly bounded in M only for s < σ - 1/2 = 0.6.
        let fields: Vec<_> = [256usize, 512, 1024]
            .iter()
            .map(|&m| random_field(GridSpec::new(m).unwrap(), 1.1, 5))
            .collect();
        let low: Vec<f64> = fields
            .iter()
            .map(|f| norm(f, NormSpec::sobolev(0.1)))
            .collect();
        for w in low.windows(2) {
            assert!((w[1] / w[0] - 1.0).abs() < 0.02, "{low:?}");
        }
        for s in [0.7, 1.0] {
            let n: Vec<f64> = fields
                .iter()
                .map(|f| norm(f, NormSpec::sobolev(s)))
                .collect();
            assert!(n[0] < n[1] && n[1] < n[2], "s={s}: {n:?}");
        }
    }

    #[test]
    fn norm_label_roundtrip() {
        for spec in [
            NormSpec::sobolev(0.75),
            NormSpec::sobolev(-1.0),
            NormSpec::Lebesgue2,
            NormSpec::Lebesgue4,
            NormSpec::LebesgueInf,
        ] {
            assert_eq!(NormSpec::parse(&spec.label()).unwrap(), spec);
        }
        assert!(NormSpec::parse("W^1").is_err());
    }
}
