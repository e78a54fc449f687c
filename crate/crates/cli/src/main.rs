mod config;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{load_config, RunConfig, SimulateConfig};
use fracnls::audits::{
    audit_freq_lower_bound, audit_mn_sum, audit_phi_growth, audit_smoothing_sum,
    audit_smoothing_trajectory, audit_strichartz, audit_sum_lemma_scan, AuditReport, Extremal,
};
use fracnls::evolution::{evolve, Integrator};
use fracnls::fractional::Alpha;
use fracnls::highlow::{audit_highlow, DeltaRule, StageUpdate};
use fracnls::nonlinearity::Dealias;
use fracnls::spectral::{random_field, GridSpec};
use fracnls::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fracnls",
    version,
    about = "Fractional cubic NLS simulator and estimate audits"
)]
struct Cli {
    /// TOML file with one section per subcommand; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Record wall time in the JSON report (breaks byte-identical reruns).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve random-phase data and write the trajectory.
    Simulate(SimulateArgs),
    /// Growth of the one-dimensional sum phi_beta(k).
    AuditPhi(PhiArgs),
    /// Convolution-sum lemma scan under truncation doubling.
    AuditSums(SumsArgs),
    /// Lower bound for the frequency quadruple gap.
    AuditGap(GapArgs),
    /// L4 Strichartz ratio over a profile corpus.
    AuditStrichartz(StrichartzArgs),
    /// Multiplier sum M_n.
    AuditMn(MnArgs),
    /// Smoothing multiplier sum M(n) and its failure probe.
    AuditSmoothingSum(SmoothingSumArgs),
    /// Nonlinear smoothing along trajectories.
    AuditSmoothingRun(SmoothingRunArgs),
    /// High-low frequency decomposition over stages.
    Highlow(HighLowArgs),
    /// Quick end-to-end checks.
    Selftest,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long = "T")]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_enum)]
    integrator: Option<IntegratorArg>,
    /// Form products on the collocation grid (no padding).
    #[arg(long)]
    aliased: bool,
    #[arg(long)]
    gauged: bool,
    #[arg(long)]
    sample_every: Option<usize>,
    /// Comma-separated norm labels (L2, L4, Linf, H^s).
    #[arg(long, value_delimiter = ',')]
    norms: Option<Vec<String>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    StrangSplit,
    IfRk4,
}

impl From<IntegratorArg> for Integrator {
    fn from(a: IntegratorArg) -> Self {
        match a {
            IntegratorArg::StrangSplit => Integrator::StrangSplit,
            IntegratorArg::IfRk4 => Integrator::IfRk4,
        }
    }
}

#[derive(Args)]
struct PhiArgs {
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    k_lo: Option<i64>,
    #[arg(long)]
    k_hi: Option<i64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args)]
struct SumsArgs {
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    kmax: Option<i64>,
    #[arg(long, value_delimiter = ',')]
    truncations: Option<Vec<i64>>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct GapArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    jmax: Option<i64>,
    #[arg(long)]
    kmax: Option<i64>,
    #[arg(long)]
    nmax: Option<i64>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct StrichartzArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    ladder: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    s_values: Option<Vec<f64>>,
    #[arg(long)]
    time_nodes: Option<usize>,
}

#[derive(Args)]
struct MnArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    bprime: Option<f64>,
    #[arg(long)]
    nmax: Option<i64>,
    #[arg(long)]
    ktrunc: Option<i64>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct SmoothingSumArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    nmax: Option<i64>,
    #[arg(long)]
    ktrunc: Option<i64>,
    #[arg(long)]
    probe_c: Option<f64>,
}

#[derive(Args)]
struct SmoothingRunArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "T")]
    t_end: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    ladder: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct HighLowArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    s0: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    cutoffs: Option<Vec<u64>>,
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long, value_enum)]
    delta_rule: Option<DeltaRuleArg>,
    /// Fixed stage length; overrides the rule.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Re-project u onto low/high parts after each stage.
    #[arg(long)]
    reproject: bool,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    amplitude: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DeltaRuleArg {
    Cutoff,
    Heuristic,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn alpha(v: Option<f64>) -> Result<Option<Alpha>> {
    v.map(Alpha::new).transpose()
}

/// Section from the config file (or defaults) with flag overrides applied.
fn build(cmd: &Command, file: RunConfig) -> Result<RunConfig> {
    let mut out = RunConfig::default();
    match cmd {
        Command::Simulate(a) => {
            let mut c = file.simulate.unwrap_or_default();
            set(&mut c.alpha, alpha(a.alpha)?);
            set(&mut c.mu, a.mu);
            set(&mut c.sigma, a.sigma);
            set(&mut c.amplitude, a.amplitude);
            set(&mut c.seed, a.seed);
            set(&mut c.m, a.m);
            set(&mut c.t_end, a.t_end);
            set(&mut c.dt, a.dt);
            set(&mut c.integrator, a.integrator.map(Into::into));
            if a.aliased {
                c.dealias = Dealias::None;
            }
            c.gauged |= a.gauged;
            set(&mut c.sample_every, a.sample_every);
            set(&mut c.norms, a.norms.clone());
            out.simulate = Some(c);
        }
        Command::AuditPhi(a) => {
            let mut c = file.audit_phi.unwrap_or_default();
            set(&mut c.beta, a.beta);
            set(&mut c.k_lo, a.k_lo);
            set(&mut c.k_hi, a.k_hi);
            set(&mut c.points, a.points);
            out.audit_phi = Some(c);
        }
        Command::AuditSums(a) => {
            let mut c = file.audit_sums.unwrap_or_default();
            set(&mut c.beta, a.beta);
            set(&mut c.gamma, a.gamma);
            set(&mut c.k_max, a.kmax);
            set(&mut c.truncations, a.truncations.clone());
            set(&mut c.tolerance, a.tolerance);
            out.audit_sums = Some(c);
        }
        Command::AuditGap(a) => {
            let mut c = file.audit_gap.unwrap_or_default();
            set(&mut c.alpha, alpha(a.alpha)?);
            set(&mut c.j_max, a.jmax);
            set(&mut c.k_max, a.kmax);
            set(&mut c.n_max, a.nmax);
            set(&mut c.tolerance, a.tolerance);
            out.audit_gap = Some(c);
        }
        Command::AuditStrichartz(a) => {
            let mut c = file.audit_strichartz.unwrap_or_default();
            if let Some(al) = alpha(a.alpha)? {
                // the default exponents follow alpha unless given
                let fresh = fracnls::audits::StrichartzParams::standard(al);
                c.alpha = al;
                if a.s_values.is_none() {
                    c.s_values = fresh.s_values;
                }
            }
            set(&mut c.ladder, a.ladder.clone());
            set(&mut c.s_values, a.s_values.clone());
            if a.time_nodes.is_some() {
                c.time_nodes = a.time_nodes;
            }
            out.audit_strichartz = Some(c);
        }
        Command::AuditMn(a) => {
            let mut c = file.audit_mn.unwrap_or_default();
            set(&mut c.alpha, alpha(a.alpha)?);
            set(&mut c.s, a.s);
            set(&mut c.bprime, a.bprime);
            set(&mut c.n_max, a.nmax);
            set(&mut c.k_trunc, a.ktrunc);
            set(&mut c.tolerance, a.tolerance);
            out.audit_mn = Some(c);
        }
        Command::AuditSmoothingSum(a) => {
            let mut c = file.audit_smoothing_sum.unwrap_or_default();
            set(&mut c.alpha, alpha(a.alpha)?);
            set(&mut c.s, a.s);
            set(&mut c.c, a.c);
            set(&mut c.eps, a.eps);
            set(&mut c.n_max, a.nmax);
            set(&mut c.k_trunc, a.ktrunc);
            if a.probe_c.is_some() {
                c.probe_c = a.probe_c;
            }
            out.audit_smoothing_sum = Some(c);
        }
        Command::AuditSmoothingRun(a) => {
            let mut c = file.audit_smoothing_run.unwrap_or_default();
            set(&mut c.alpha, alpha(a.alpha)?);
            set(&mut c.s, a.s);
            set(&mut c.c, a.c);
            set(&mut c.t_end, a.t_end);
            set(&mut c.ladder, a.ladder.clone());
            set(&mut c.seed, a.seed);
            set(&mut c.dt, a.dt);
            out.audit_smoothing_run = Some(c);
        }
        Command::Highlow(a) => {
            let mut p = file.highlow.unwrap_or_default();
            let c = &mut p.config;
            set(&mut c.alpha, alpha(a.alpha)?);
            set(&mut c.s, a.s);
            set(&mut c.s0, a.s0);
            set(&mut c.stages, a.stages);
            set(
                &mut c.delta_rule,
                a.delta_rule.map(|r| match r {
                    DeltaRuleArg::Cutoff => DeltaRule::Cutoff,
                    DeltaRuleArg::Heuristic => DeltaRule::Heuristic,
                }),
            );
            set(&mut c.delta_rule, a.delta.map(DeltaRule::Fixed));
            set(&mut c.c0, a.c0);
            set(&mut c.dt, a.dt);
            if a.reproject {
                c.stage_update = StageUpdate::Reproject;
            }
            set(&mut p.cutoffs, a.cutoffs.clone());
            set(&mut p.m, a.m);
            set(&mut p.seed, a.seed);
            set(&mut p.amplitude, a.amplitude);
            out.highlow = Some(p);
        }
        Command::Selftest => {}
    }
    out.validate()?;
    Ok(out)
}

fn simulate(c: &SimulateConfig, dir: &Path) -> Result<AuditReport> {
    let cfg = c.evolution()?;
    let u0 = random_field(GridSpec::new(c.m)?, c.sigma, c.seed).scale(c.amplitude.into());
    let rec = evolve(&u0, c.t_end, &cfg)?;
    std::fs::create_dir_all(dir)?;
    let f = std::fs::File::create(dir.join("simulate_trajectory.csv"))?;
    rec.write_csv(std::io::BufWriter::new(f))?;
    let mut rep = AuditReport::new("simulate", c);
    rep.extremals
        .push(Extremal::new("mass_drift", rec.mass_drift(), &[]));
    rep.extremals
        .push(Extremal::new("energy_drift", rec.energy_drift(), &[]));
    rep.extremals
        .push(Extremal::new("gauge_p", rec.gauge_p, &[]));
    rep.verdict = format!("{} samples to t = {}", rec.len(), c.t_end);
    Ok(rep)
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<AuditReport> {
    let mut rep = match &cli.cmd {
        Command::Simulate(_) => simulate(cfg.simulate.as_ref().expect("section"), &cli.out)?,
        Command::AuditPhi(_) => audit_phi_growth(cfg.audit_phi.expect("section"))?,
        Command::AuditSums(_) => audit_sum_lemma_scan(cfg.audit_sums.as_ref().expect("section"))?,
        Command::AuditGap(_) => audit_freq_lower_bound(cfg.audit_gap.as_ref().expect("section"))?,
        Command::AuditStrichartz(_) => {
            audit_strichartz(cfg.audit_strichartz.as_ref().expect("section"))?
        }
        Command::AuditMn(_) => audit_mn_sum(cfg.audit_mn.as_ref().expect("section"))?,
        Command::AuditSmoothingSum(_) => {
            audit_smoothing_sum(cfg.audit_smoothing_sum.as_ref().expect("section"))?
        }
        Command::AuditSmoothingRun(_) => {
            audit_smoothing_trajectory(cfg.audit_smoothing_run.as_ref().expect("section"))?
        }
        Command::Highlow(_) => audit_highlow(cfg.highlow.as_ref().expect("section"))?,
        Command::Selftest => unreachable!("handled before"),
    };
    if rep.verdict.is_empty() {
        rep.verdict = if rep.pass {
            "pass".into()
        } else {
            "see checks".into()
        };
    }
    Ok(rep)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Instability { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    if matches!(cli.cmd, Command::Selftest) {
        let failed = selftest::run();
        return ExitCode::from(u8::from(failed > 0));
    }
    let file = match cli.config.as_deref().map(load_config).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cfg = match build(&cli.cmd, file) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let result = run(&cli, &cfg).and_then(|mut rep| {
        if cli.timing {
            rep.runtime_seconds = Some(start.elapsed().as_secs_f64());
        }
        let mut paths = rep.write_to(&cli.out)?;
        let echo = cli.out.join(format!("{}_config.toml", rep.name));
        std::fs::write(&echo, cfg.echo())?;
        paths.push(echo);
        Ok((rep, paths))
    });
    match result {
        Ok((rep, paths)) => {
            println!("{}: {}", rep.name, rep.verdict);
            for c in &rep.checks {
                println!(
                    "  {} {}: {}",
                    if c.pass { "ok  " } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            for e in &rep.extremals {
                println!("  {} = {:e}", e.label, e.value);
            }
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::from(u8::from(!rep.pass))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
