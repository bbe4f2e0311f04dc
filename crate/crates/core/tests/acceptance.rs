//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use hconc::extremal::{baseline_function, baseline_witness, maximize_beta, sharpness_report, SearchConfig};
use hconc::functionals::{DeltaStrategy, GradientMode};
use hconc::matrix::{
    check_matrix_moments, check_schatten_vs_operator, khintchine_report, normalize_p, MatrixFunction,
    MomentVariant,
};
use hconc::report::{CheckResult, Status};
use hconc::verify::{
    check_beta_ode, check_deriv_bound, check_diff1, check_ent_gt, check_ent_orlicz, check_gamma_comparison,
    check_lsi, check_orlicz2, check_separate_convexity_with, check_sqrtp, check_talagrand, default_tau,
    mix_seed, random_function, random_half_zero, random_nonnegative, run_suite, NormalizedFunction,
    SuiteConfig,
};
use hconc::{functionals::LineProbe, SpaceDescriptor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const P_EXACT: GradientMode = GradientMode::P(DeltaStrategy::Exact);

fn fails(rows: &[CheckResult]) -> usize {
    rows.iter().filter(|r| r.status == Status::Fail).count()
}

fn zero_fails(label: &str, rows: &[CheckResult]) -> Outcome {
    match fails(rows) {
        0 => Ok(format!("{label}: {} rows, 0 fail", rows.len())),
        k => {
            let first = rows.iter().find(|r| r.status == Status::Fail).unwrap();
            Err(format!(
                "{label}: {k} of {} rows fail, first {} lhs={} rhs={}",
                rows.len(),
                first.check,
                first.lhs,
                first.rhs
            ))
        }
    }
}

fn err(e: hconc::Error) -> String {
    format!("error: {e}")
}

fn grid(a: f64, b: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut p = a;
    while p <= b {
        v.push(p);
        p += 1.0;
    }
    v
}

/// `(E |Σx_i/√n|ᵖ)^{1/p}` by direct enumeration over sign patterns.
fn rademacher_moment(n: usize, p: f64) -> f64 {
    let mut acc = 0.0;
    for mask in 0u32..(1 << n) {
        let s = n as f64 - 2.0 * mask.count_ones() as f64;
        acc += (s.abs() / (n as f64).sqrt()).powf(p);
    }
    (acc / (1u64 << n) as f64).powf(1.0 / p)
}

fn spaces() -> Vec<SpaceDescriptor> {
    vec![
        SpaceDescriptor::scalar(),
        SpaceDescriptor::euclidean(3).unwrap(),
        SpaceDescriptor::schatten(3.0, 3).unwrap(),
        SpaceDescriptor::operator(3).unwrap(),
    ]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rows = Vec::new();
    for k in 0..1000u64 {
        let n = 1 + (k % 8) as usize;
        let g = random_nonnegative(n, mix_seed(101, k, 0)).map_err(err)?;
        rows.push(check_lsi(&g).map_err(err)?);
        rows.push(check_ent_gt(&g).map_err(err)?);
    }
    let elapsed = start.elapsed();
    let msg = zero_fails("lsi+ent_mg on 1000 g, n<=8", &rows)?;
    if elapsed >= Duration::from_secs(30) {
        return Err(format!("{msg}, runtime {elapsed:?} >= 30s"));
    }
    Ok(format!("{msg}, {:.2}s", elapsed.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let mut rows = Vec::new();
    for k in 0..1000u64 {
        let n = 1 + (k % 8) as usize;
        let g = random_nonnegative(n, mix_seed(101, k, 0)).map_err(err)?;
        rows.push(check_ent_orlicz(&g).map_err(err)?);
    }
    let msg = zero_fails("ent_orlicz on 1000 g", &rows)?;
    let mut reports = Vec::new();
    for k in 0..200u64 {
        let n = 2 + (k % 7) as usize;
        let g = random_half_zero(n, mix_seed(102, k, 0)).map_err(err)?;
        if let Some(r) = check_talagrand(&g, 2.0).map_err(err)? {
            reports.push(r);
        }
    }
    if reports.len() != 200 || reports.iter().any(|r| r.status != Status::Report) {
        return Err(format!("{msg}; {} talagrand report rows, expected 200", reports.len()));
    }
    let ratios: Vec<f64> = reports.iter().filter_map(|r| r.param_f64("ratio")).collect();
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(format!("{msg}; 200 talagrand report rows, max ratio {max:.4}"))
}

fn criterion_3() -> Outcome {
    let mut conv = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let all = spaces();
    for k in 0..10_000u64 {
        let space = &all[(k % 4) as usize];
        let n = 2 + (k % 3) as usize;
        let f = random_function(space, n, mix_seed(103, k, 1), None).map_err(err)?;
        let probe = LineProbe::new(&f, space).map_err(err)?;
        let p = [2.0, 4.0, 8.0][(k % 3) as usize];
        let x = rng.random_range(0..f.len());
        let i = rng.random_range(0..n);
        let s1 = rng.random_range(-3.0..=3.0);
        let s2 = rng.random_range(-3.0..=3.0);
        conv.push(check_separate_convexity_with(&probe, p, x, i, s1, s2).map_err(err)?);
    }
    let a = zero_fails("separate_convexity 1e4", &conv)?;
    let mut deriv = Vec::new();
    for space in &all {
        for k in 0..200u64 {
            let n = 1 + (k % 4) as usize;
            let f = random_function(space, n, mix_seed(104, k, 0), None).map_err(err)?;
            for p in [2.0, 4.0, 8.0] {
                for eps in [1e-3, 1.0] {
                    deriv.push(check_deriv_bound(&f, space, p, eps).map_err(err)?);
                }
            }
        }
    }
    let b = zero_fails("deriv_bound 200 f x 4 spaces", &deriv)?;
    Ok(format!("{a}; {b}"))
}

fn criterion_4() -> Outcome {
    let p_grid = grid(2.0, 16.0);
    let mut rows = Vec::new();
    for (mi, mode) in [GradientMode::Gamma, P_EXACT].into_iter().enumerate() {
        for (si, space) in spaces()[..3].iter().enumerate() {
            for k in 0..300u64 {
                let n = 1 + (k % 5) as usize;
                let seed = mix_seed(105, k, (mi * 3 + si) as u64);
                let f = random_function(space, n, seed, Some(mode)).map_err(err)?;
                let nf = NormalizedFunction::certify(f, space, mode).map_err(err)?;
                for &p in &p_grid {
                    rows.push(check_orlicz2(&nf, p).map_err(err)?);
                    rows.push(check_diff1(&nf, p).map_err(err)?);
                    rows.extend(check_beta_ode(&nf, p).map_err(err)?);
                }
            }
        }
    }
    zero_fails("orlicz2+diff1+beta_ode, 2 modes x 3 spaces x 300 f, p 2..16", &rows)
}

fn criterion_5() -> Outcome {
    let space = SpaceDescriptor::scalar();
    let p_grid = grid(2.0, 16.0);
    let mut rows = Vec::new();
    for n in [2usize, 4, 8, 16] {
        let f = baseline_function(&space, n).map_err(err)?;
        let nf = NormalizedFunction::certify(f, &space, GradientMode::Gamma).map_err(err)?;
        rows.extend(check_gamma_comparison(&nf, &p_grid).map_err(err)?);
    }
    let cmp: Vec<_> = rows.iter().filter(|r| r.check == "gamma_comparison").collect();
    if cmp.iter().any(|r| r.status != Status::Pass) {
        return Err("gamma_comparison row not passing on the baseline family".into());
    }
    let worst = rows
        .iter()
        .filter(|r| r.check == "gamma_ode")
        .map(|r| r.lhs)
        .fold(0.0, f64::max);
    let msg = zero_fails("gamma_comparison+gamma_ode, n in {2,4,8,16}", &rows)?;
    Ok(format!("{msg}, max ode residual {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let space = SpaceDescriptor::scalar();
    let nf = NormalizedFunction::certify(baseline_function(&space, 4).map_err(err)?, &space, P_EXACT)
        .map_err(err)?;
    let r4 = check_sqrtp(&nf, 4.0).map_err(err)?;
    let r2 = check_sqrtp(&nf, 2.0).map_err(err)?;
    let want4 = rademacher_moment(4, 4.0);
    if (r4.lhs - want4).abs() > 1e-9 || (r4.lhs - 1.2574).abs() > 1e-4 || (r4.rhs - 8f64.sqrt()).abs() > 1e-9 {
        return Err(format!("p=4: lhs {} rhs {}, oracle {want4}", r4.lhs, r4.rhs));
    }
    if (r2.lhs - 1.0).abs() > 1e-9 || (r2.rhs - 2.0).abs() > 1e-9 {
        return Err(format!("p=2: lhs {} rhs {}", r2.lhs, r2.rhs));
    }
    if r4.status != Status::Pass || r2.status != Status::Pass {
        return Err("baseline sqrtp rows not passing".into());
    }
    let cfg = SuiteConfig {
        trials: 200,
        seed: 106,
        p_grid: grid(2.0, 16.0),
        mode: P_EXACT,
        ..SuiteConfig::default()
    };
    let report = run_suite(&cfg).map_err(err)?;
    let sq: Vec<_> = report.rows("sqrtp").cloned().collect();
    let shortfalls = sq.iter().filter(|r| r.status == Status::Report).count();
    let msg = zero_fails("random scalar suite", &report.results)?;
    Ok(format!(
        "baseline n=4: {:.4} <= {:.4} (p=4), {:.4} <= {:.4} (p=2); {msg}; sqrtp shortfalls {shortfalls}/{}",
        r4.lhs,
        r4.rhs,
        r2.lhs,
        r2.rhs,
        sq.len()
    ))
}

fn criterion_7() -> Outcome {
    let mut series = Vec::new();
    let mut reports = 0;
    for (si, space) in spaces()[..3].iter().enumerate() {
        let cfg = SuiteConfig {
            space: *space,
            trials: 100,
            seed: mix_seed(107, si as u64, 0),
            n: 3,
            tau: default_tau(),
            c0_report: 1.0,
            ..SuiteConfig::default()
        };
        let report = run_suite(&cfg).map_err(err)?;
        series.extend(report.rows("exp_moment_series").cloned());
        for r in report.rows("exp_moment") {
            if r.check == "exp_moment" && r.status == Status::Report && r.param_f64("c0") == Some(1.0) {
                reports += 1;
            }
        }
    }
    let worst = series.iter().map(|r| r.lhs).fold(0.0, f64::max);
    if worst >= 1e-8 || reports != 300 {
        return Err(format!("max series gap {worst:.2e}, {reports} report rows"));
    }
    let msg = zero_fails("exp_moment_series, 3 spaces x 100 f", &series)?;
    Ok(format!("{msg}, max gap {worst:.2e}, {reports} report rows with c0=1"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut pop = Vec::new();
    for _ in 0..10_000 {
        let d = rng.random_range(1..=8usize);
        let p = [1.0, 2.0, 2.5, 3.0, 4.0, 8.0][rng.random_range(0..6usize)];
        let a: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
        pop.push(check_schatten_vs_operator(&a, d, p).map_err(err)?);
    }
    let a = zero_fails("schatten_vs_operator 1e4", &pop)?;
    let mut m2 = Vec::new();
    let mut ratios = Vec::new();
    for k in 0..100u64 {
        let p = if k % 2 == 0 { 2.0 } else { 2.5 };
        let n = 1 + (k % 4) as usize;
        let space = SpaceDescriptor::schatten(p, 8).map_err(err)?;
        let raw = random_function(&space, n, mix_seed(108, k, 1), None).map_err(err)?;
        let f = normalize_p(&MatrixFunction::new(raw, 8).map_err(err)?, p).map_err(err)?;
        m2.push(check_matrix_moments(&f, p, MomentVariant::M2, 1.0).map_err(err)?);
        for x in 0..f.function().len() {
            let r = khintchine_report(&f, p, x, 1.0).map_err(err)?;
            ratios.push(r.param_f64("ratio").unwrap());
        }
    }
    let b = zero_fails("m2 on 100 f (d=8)", &m2)?;
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    if min.is_nan() || min <= 0.0 {
        return Err(format!("{a}; {b}; khintchine min ratio {min}"));
    }
    Ok(format!("{a}; {b}; khintchine ratios in [{min:.4}, {max:.4}] over {}", ratios.len()))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let cfg = SearchConfig {
        n: 4,
        p: 8.0,
        restarts: 8,
        iterations: 5000,
        seed: 109,
        ..SearchConfig::default()
    };
    let w = maximize_beta(&cfg).map_err(err)?;
    let base = baseline_witness(4, 8.0).map_err(err)?.achieved;
    let oracle = rademacher_moment(4, 8.0);
    if (base - oracle).abs() > 1e-12 {
        return Err(format!("baseline {base} disagrees with enumeration {oracle}"));
    }
    if w.constraint_residual > 1e-8 {
        return Err(format!("residual {:.3e} > 1e-8", w.constraint_residual));
    }
    if w.achieved < base - 1e-9 {
        return Err(format!("achieved {} < baseline {base}", w.achieved));
    }
    let s = sharpness_report(4.0, 0.25, &w).map_err(err)?;
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(300) {
        return Err(format!("runtime {elapsed:?} >= 5 min"));
    }
    Ok(format!(
        "achieved {:.6} (baseline {base:.6}), residual {:.1e}; sharpness at p={}: {:.4} vs Q=4, met={}; {:.2}s",
        w.achieved,
        w.constraint_residual,
        s.p,
        s.achieved,
        s.target_met,
        elapsed.as_secs_f64()
    ))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |name: &str| -> Result<Vec<u8>, String> {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_hconc"))
            .args(["verify", "--n", "4", "--space", "euclidean", "--d", "2", "--trials", "40", "--seed", "7"])
            .arg("--out")
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("verify exited with {status}"));
        }
        std::fs::read(&path).map_err(|e| e.to_string())
    };
    let a = run("a.json")?;
    let b = run("b.json")?;
    if a.is_empty() || a != b {
        return Err("report files differ".into());
    }
    Ok(format!("two runs byte-identical ({} bytes)", a.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("LSI suite", criterion_1),
        ("Orlicz/entropy suite", criterion_2),
        ("convexity chain", criterion_3),
        ("moment chain", criterion_4),
        ("comparison lemma", criterion_5),
        ("moment growth at (2,1)", criterion_6),
        ("exponential moment series", criterion_7),
        ("matrix suite", criterion_8),
        ("extremal search", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
