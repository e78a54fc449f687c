//! Run configuration: one optional TOML section per subcommand.

use std::path::Path;

use serde::{Deserialize, Serialize};

use fracnls::audits::{
    GapParams, MnParams, PhiParams, SmoothingRunParams, SmoothingSumParams, StrichartzParams,
    SumLemmaParams,
};
use fracnls::evolution::{EvolutionConfig, Integrator};
use fracnls::fractional::Alpha;
use fracnls::highlow::HighLowParams;
use fracnls::invariants::Sign;
use fracnls::nonlinearity::Dealias;
use fracnls::spectral::{GridSpec, NormSpec};
use fracnls::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub alpha: Alpha,
    /// `+1` focusing, `−1` defocusing, `0` linear.
    pub mu: f64,
    /// Data `c_k = A ⟨k⟩^{−σ} e^{iθ_k}`.
    pub sigma: f64,
    pub amplitude: f64,
    pub seed: u64,
    pub m: usize,
    pub t_end: f64,
    pub dt: f64,
    pub integrator: Integrator,
    pub dealias: Dealias,
    pub gauged: bool,
    pub sample_every: usize,
    /// Norm labels tracked along the run: `L2`, `L4`, `Linf`, `H^s`.
    pub norms: Vec<String>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            alpha: Alpha::new(0.75).expect("valid"),
            mu: -1.0,
            sigma: 1.2,
            amplitude: 1.0,
            seed: 1,
            m: 512,
            t_end: 1.0,
            dt: 1e-3,
            integrator: Integrator::StrangSplit,
            dealias: Dealias::Strict,
            gauged: false,
            sample_every: 10,
            norms: vec!["L4".into(), "Linf".into()],
        }
    }
}

impl SimulateConfig {
    pub fn evolution(&self) -> Result<EvolutionConfig> {
        let mut c = EvolutionConfig::new(self.alpha, Sign::from_mu(self.mu)?, self.dt);
        c.integrator = self.integrator;
        c.dealias = self.dealias;
        c.gauged = self.gauged;
        c.sample_every = self.sample_every;
        c.norms = self
            .norms
            .iter()
            .map(|n| NormSpec::parse(n))
            .collect::<Result<_>>()?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        GridSpec::new(self.m)?;
        self.evolution()?;
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Config(format!(
                "final time must be nonnegative, got {}",
                self.t_end
            )));
        }
        if !(self.sigma.is_finite() && self.amplitude.is_finite()) {
            return Err(Error::Config("sigma and amplitude must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_phi: Option<PhiParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_sums: Option<SumLemmaParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_gap: Option<GapParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_strichartz: Option<StrichartzParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_mn: Option<MnParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_smoothing_sum: Option<SmoothingSumParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_smoothing_run: Option<SmoothingRunParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub highlow: Option<HighLowParams>,
}

impl RunConfig {
    /// Section-level invariants that are cheap to check before running.
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = &self.simulate {
            s.validate().map_err(at("simulate"))?;
        }
        if let Some(h) = &self.highlow {
            h.config.validate().map_err(at("highlow.config"))?;
            GridSpec::new(h.m).map_err(at("highlow"))?;
            if h.cutoffs.iter().any(|&n| n == 0 || n >= h.m as u64 / 2) {
                return Err(Error::Config(format!(
                    "[highlow] cutoffs must lie in 1..M/2 = {}",
                    h.m / 2
                )));
            }
        }
        Ok(())
    }

    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}

fn at(key: &'static str) -> impl Fn(Error) -> Error {
    move |e| Error::Config(format!("[{key}] {}", strip(&e)))
}

fn strip(e: &Error) -> String {
    match e {
        Error::Config(m) | Error::Input(m) | Error::Cost(m) | Error::Io(m) => m.clone(),
        other => other.to_string(),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_simulate_echoes_defaults() {
        let cfg = parse_config("[simulate]\n").unwrap();
        assert_eq!(cfg.simulate, Some(SimulateConfig::default()));
        let echo = cfg.echo();
        assert!(echo.contains("sigma = 1.2"));
        assert_eq!(parse_config(&echo).unwrap(), cfg);
    }

    #[test]
    fn alpha_out_of_range() {
        let e = parse_config("[simulate]\nalpha = 1.2\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("alpha out of (1/2,1)"), "{e}");
    }

    #[test]
    fn highlow_ordering() {
        let e = parse_config("[highlow.config]\ns = 0.9\ns0 = 0.95\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("s0 < s < alpha"), "{e}");
        assert!(e.contains("highlow.config"), "{e}");
    }

    #[test]
    fn unknown_key_and_type_mismatch() {
        let e = parse_config("[audit_gap]\njmax = 3\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("jmax"), "{e}");
        let e = parse_config("[audit_gap]\nj_max = \"ten\"\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("j_max"), "{e}");
    }

    #[test]
    fn every_section_round_trips() {
        let cfg = RunConfig {
            simulate: Some(SimulateConfig::default()),
            audit_phi: Some(PhiParams::default()),
            audit_sums: Some(SumLemmaParams::default()),
            audit_gap: Some(GapParams::default()),
            audit_strichartz: Some(StrichartzParams::default()),
            audit_mn: Some(MnParams::default()),
            audit_smoothing_sum: Some(SmoothingSumParams::default()),
            audit_smoothing_run: Some(SmoothingRunParams::default()),
            highlow: Some(HighLowParams::default()),
        };
        assert_eq!(parse_config(&cfg.echo()).unwrap(), cfg);
    }
}
