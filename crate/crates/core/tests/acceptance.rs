//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use fracnls::audits::*;
use fracnls::evolution::{evolve, EvolutionConfig, Integrator};
use fracnls::fractional::Alpha;
use fracnls::highlow::{
    audit_hamiltonian_difference, audit_highlow, HamiltonianCorpusParams, HighLowParams,
};
use fracnls::invariants::Sign;
use fracnls::nonlinearity::{cubic, cubic_oracle, resonant_decompose_oracle, Dealias};
use fracnls::spectral::{random_field, GridSpec, SpectralField};
use fracnls::Result;

type Outcome = Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome);

fn alpha(a: f64) -> Alpha {
    Alpha::new(a).unwrap()
}

/// `‖a − b‖ / ‖b‖` in coefficient ℓ².
fn rel_l2(a: &SpectralField, b: &SpectralField) -> f64 {
    (a - b).sum_sq().sqrt() / b.sum_sq().sqrt()
}

fn pct(v: f64) -> String {
    format!("{:.3}%", 100.0 * v)
}

fn checks(r: &AuditReport, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in names {
        let c = r.check_named(n).expect("check present");
        ok &= c.pass;
        parts.push(format!(
            "{}{}: {}",
            if c.pass { "" } else { "FAILED " },
            c.name,
            c.detail
        ));
    }
    (ok, parts.join(" | "))
}

fn decomposition() -> Outcome {
    let mut worst_decomp = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for (i, m) in [16usize, 32, 64].into_iter().enumerate() {
        let g = GridSpec::new(m)?;
        let count = [67, 67, 66][i];
        for j in 0..count {
            let seed = 1000 * m as u64 + j;
            let sigma = 0.5 + (j % 7) as f64 * 0.4;
            let u = random_field(g, sigma, seed);
            let fast = cubic(&u, Dealias::Strict);
            let parts = resonant_decompose_oracle(&u)?;
            worst_decomp = worst_decomp.max(rel_l2(&parts.reassemble(&u), &fast));
            worst_oracle = worst_oracle.max(rel_l2(&fast, &cubic_oracle(&u)?));
        }
    }
    Ok((
        worst_decomp <= 1e-12 && worst_oracle <= 1e-12,
        format!("200 fields, max |cubic - (Pu + rho + R)| {worst_decomp:.2e}, max |fast - oracle| {worst_oracle:.2e} (tol 1e-12)"),
    ))
}

fn conservation() -> Outcome {
    let g = GridSpec::new(512)?;
    let u0 = random_field(g, 3.0, 1);
    let mut drifts = Vec::new();
    let mut mass = 0.0f64;
    for dt in [1e-3, 5e-4, 2.5e-4] {
        let mut c = EvolutionConfig::new(alpha(0.75), Sign::Defocusing, dt);
        c.integrator = Integrator::StrangSplit;
        let rec = evolve(&u0, 1.0, &c)?;
        drifts.push(rec.energy_drift());
        mass = mass.max(rec.mass_drift());
    }
    let orders: Vec<f64> = drifts.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ok = mass <= 1e-10 && drifts[0] <= 1e-6 && orders.iter().all(|p| (1.9..=2.1).contains(p));
    Ok((
        ok,
        format!(
            "mass drift {mass:.2e} (tol 1e-10), energy drift at dt=1e-3 {:.2e} (tol 1e-6), observed orders {:.3}, {:.3} (window [1.9, 2.1])",
            drifts[0], orders[0], orders[1]
        ),
    ))
}

fn lower_bound() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for a in [0.6, 0.75, 0.9] {
        let r = audit_freq_lower_bound(&GapParams {
            alpha: alpha(a),
            j_max: 50,
            k_max: 50,
            n_max: 500,
            tolerance: 0.02,
        })?;
        let (pass, _) = checks(&r, &["positive", "box_stability"]);
        ok &= pass;
        let lo = r.extremal("min_ratio").unwrap().value;
        let hi = r.extremal("min_ratio_doubled_box").unwrap().value;
        parts.push(format!(
            "alpha {a}: min {lo:.5}, doubled box {hi:.5}, change {}",
            pct(rel_change(lo, hi))
        ));
    }
    Ok((ok, parts.join("; ") + " (tol 2%)"))
}

fn sum_lemma() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (b, gm) in [(1.2, 0.9), (2.0, 2.0), (1.01, 0.5)] {
        let r = audit_sum_lemma_scan(&SumLemmaParams {
            beta: b,
            gamma: gm,
            k_max: 200,
            truncations: vec![1000, 10000],
            tolerance: 0.01,
        })?;
        let c = r.check_named("truncation_stability").unwrap();
        ok &= c.pass;
        parts.push(format!(
            "({b}, {gm}) {}: {}",
            if c.pass { "ok" } else { "FAILED" },
            c.detail
        ));
    }
    Ok((ok, parts.join("; ") + " (tol 1%)"))
}

fn strichartz() -> Outcome {
    let a = alpha(0.75);
    let mut p = StrichartzParams::standard(a);
    p.profiles = vec![
        Profile::NearExtremal,
        Profile::Dirichlet,
        Profile::RandomPhase { seed: 1 },
    ];
    let r = audit_strichartz(&p)?;
    let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
    Ok(checks(&r, &names))
}

fn multiplier_sums() -> Outcome {
    let a = alpha(0.75);
    let mn = audit_mn_sum(&MnParams {
        alpha: a,
        s: 0.2,
        bprime: 0.49,
        n_max: 256,
        k_trunc: 2048,
        tolerance: 0.05,
    })?;
    let sm = audit_smoothing_sum(&SmoothingSumParams {
        alpha: a,
        s: 0.6,
        c: 0.2,
        eps: 0.01,
        n_max: 256,
        k_trunc: 1024,
        tolerance: 0.05,
        probe_c: None,
    })?;
    let (ok1, d1) = checks(&mn, &["truncation_stability"]);
    let (ok2, d2) = checks(&sm, &["truncation_stability", "failure_probe"]);
    Ok((ok1 && ok2, format!("M_n: {d1} | M(n): {d2}")))
}

fn smoothing_run() -> Outcome {
    let r = audit_smoothing_trajectory(&SmoothingRunParams::standard(alpha(0.75)))?;
    Ok(checks(
        &r,
        &["w_resolution_stable", "data_rough", "gauge_phase_removal"],
    ))
}

fn high_low() -> Outcome {
    let r = audit_highlow(&HighLowParams::standard())?;
    Ok(checks(
        &r,
        &[
            "reconstruction",
            "low_hamiltonian_conserved",
            "scaling_sign",
        ],
    ))
}

fn small_audits() -> Result<Vec<AuditReport>> {
    let a = alpha(0.75);
    let mut st = StrichartzParams::standard(a);
    st.ladder = vec![32, 64];
    let mut sr = SmoothingRunParams::standard(a);
    sr.ladder = vec![64, 128];
    sr.t_end = 0.05;
    sr.dt = 1e-3;
    sr.sample_every = 10;
    let mut hl = HighLowParams::standard();
    hl.m = 128;
    let mut hd = HamiltonianCorpusParams::standard();
    hd.pairs = 60;
    Ok(vec![
        audit_phi_growth(PhiParams::default())?,
        audit_sum_lemma_scan(&SumLemmaParams {
            beta: 1.2,
            gamma: 0.9,
            k_max: 20,
            truncations: vec![100, 200],
            tolerance: 0.01,
        })?,
        audit_freq_lower_bound(&GapParams {
            alpha: a,
            j_max: 8,
            k_max: 8,
            n_max: 60,
            tolerance: 0.02,
        })?,
        audit_strichartz(&st)?,
        audit_mn_sum(&MnParams {
            alpha: a,
            s: 0.2,
            bprime: 0.49,
            n_max: 16,
            k_trunc: 64,
            tolerance: 0.05,
        })?,
        audit_smoothing_sum(&SmoothingSumParams {
            alpha: a,
            s: 0.6,
            c: 0.2,
            eps: 0.01,
            n_max: 16,
            k_trunc: 64,
            tolerance: 0.05,
            probe_c: None,
        })?,
        audit_smoothing_trajectory(&sr)?,
        audit_highlow(&hl)?,
        audit_hamiltonian_difference(&hd)?,
    ])
}

fn write_all(threads: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    let reports = pool.install(small_audits)?;
    let mut paths = Vec::new();
    for r in reports {
        paths.extend(r.write_to(dir)?);
    }
    Ok(paths)
}

fn reproducibility() -> Outcome {
    let base = std::env::temp_dir().join(format!("fracnls-acceptance-{}", std::process::id()));
    let runs = [(1, "a"), (1, "b"), (4, "c")];
    let mut outputs = Vec::new();
    for (threads, tag) in runs {
        let dir = base.join(tag);
        let paths = write_all(threads, &dir)?;
        let mut files = Vec::new();
        for p in paths {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            files.push((name, std::fs::read(&p)?));
        }
        outputs.push(files);
    }
    let _ = std::fs::remove_dir_all(&base);
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    Ok((
        same,
        format!(
            "{} files compared across runs with 1, 1 and 4 threads",
            outputs[0].len()
        ),
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 decomposition identity", decomposition),
        ("2 conservation", conservation),
        ("3 frequency lower bound", lower_bound),
        ("4 convolution sum", sum_lemma),
        ("5 Strichartz ratio", strichartz),
        ("6 multiplier sums", multiplier_sums),
        ("7 smoothing trajectory", smoothing_run),
        ("8 high-low", high_low),
        ("9 reproducibility", reproducibility),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let (pass, detail) = match run() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {name}: {} ({:.1}s) {detail}",
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
