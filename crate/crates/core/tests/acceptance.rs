//! Acceptance criteria. Runs as a plain binary (`harness = false`) so every
//! criterion prints one PASS/FAIL line in order; exits nonzero if any fail.

use std::process::{Command, ExitCode};
use std::time::Instant;

use purebirth::montecarlo::{estimate_absorption_time_with, explosion_study_with};
use purebirth::{
    empirical_distribution_at, estimate_absorption_time, expected_absorption_time, explosion_study,
    forward_grid, forward_probabilities, powerlaw_expected_time, Execution, ModelSpec, PowerLawRegime,
    SolverConfig,
};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

/// (1999 / 620) · H_1999, 40-digit direct summation.
const EXACT_A_ORACLE: f64 = 26.367029579220894;
/// Σ_{k=1}^{999} 1/k², 40-digit direct summation.
const BASEL_999_ORACLE: f64 = 1.6439335666815598;

fn purebirth(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_purebirth"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn csv_value(bytes: &[u8], name: &str) -> Result<f64, String> {
    let mut r = csv::Reader::from_reader(bytes);
    let idx = r
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .position(|h| h == name)
        .ok_or(format!("no column {name}"))?;
    let rec = r.records().next().ok_or("no rows")?.map_err(|e| e.to_string())?;
    rec[idx].parse().map_err(|e| format!("{e}"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn recipe(args: &[&str], target: f64) -> Outcome {
    let start = Instant::now();
    let out = purebirth(args)?;
    let approx = csv_value(&out, "approx_mean")?;
    ensure((approx - target).abs() <= 0.01, || {
        format!("approx {approx} vs {target} ± 0.01")
    })?;
    Ok(format!(
        "approx = {approx:.4} ({} ms)",
        start.elapsed().as_millis()
    ))
}

fn criterion_1() -> Outcome {
    recipe(
        &[
            "expect-time",
            "--family",
            "yule",
            "--N",
            "2000",
            "--mu",
            "1",
            "--p",
            "0.31",
            "--unit",
            "hours",
        ],
        24.52,
    )
}

fn criterion_2() -> Outcome {
    recipe(
        &[
            "expect-time",
            "--family",
            "yule",
            "--N",
            "6700",
            "--mu",
            "3",
            "--p",
            "0.31",
            "--unit",
            "days",
        ],
        9.47,
    )
}

fn criterion_3() -> Outcome {
    let model = ModelSpec::yule(2000, 1.0, 0.31)
        .build()
        .map_err(|e| e.to_string())?;
    let r = expected_absorption_time(&model, 1).map_err(|e| e.to_string())?;
    let closed = r.closed_form.ok_or("no closed form")?;
    let approx = r.approx_mean.ok_or("no approximation")?;
    let rel = |a: f64, b: f64| (a - b).abs() / b;
    ensure(rel(closed, EXACT_A_ORACLE) <= 1e-10, || {
        format!("closed form {closed} vs oracle")
    })?;
    ensure(rel(r.exact_mean, EXACT_A_ORACLE) <= 1e-10, || {
        format!("direct sum {} vs oracle", r.exact_mean)
    })?;
    ensure(closed > approx, || format!("exact {closed} <= approx {approx}"))?;
    Ok(format!("exact = {closed:.6} > approx = {approx:.6}"))
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in [2u64, 3, 10, 100, 2000, 6700, 100_000] {
        for p in [0.01, 0.05, 0.155, 0.31, 0.5] {
            for rate in [0.25, 1.0, 3.0] {
                for (a, b) in [
                    (
                        ModelSpec::hypergeometric(n, rate, p),
                        ModelSpec::hypergeometric(n, rate, 2.0 * p),
                    ),
                    (ModelSpec::yule(n, rate, p), ModelSpec::yule(n, rate, 2.0 * p)),
                ] {
                    let ea = expected_absorption_time(&a.build().unwrap(), 1)
                        .unwrap()
                        .exact_mean;
                    let eb = expected_absorption_time(&b.build().unwrap(), 1)
                        .unwrap()
                        .exact_mean;
                    worst = worst.max((ea - 2.0 * eb).abs() / ea);
                    count += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-12, || format!("worst relative deviation {worst:e}"))?;
    Ok(format!("{count} models, worst relative deviation {worst:.1e}"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let model = ModelSpec::power_law(1.0, 1.0, Some(200))
        .build()
        .map_err(|e| e.to_string())?;
    let times = [0.1, 0.5, 1.0, 2.0];
    let snaps = forward_grid(&model, 1, &times, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let mut sup: f64 = 0.0;
    let mut defect: f64 = 0.0;
    for s in &snaps {
        let t = s.time;
        for j in 1..200u64 {
            let oracle = (-t).exp() * (1.0 - (-t).exp()).powi(j as i32 - 1);
            sup = sup.max((s.probability(j) - oracle).abs());
        }
        defect = defect.max(s.mass_defect);
    }
    ensure(sup <= 1e-6, || format!("sup-norm error {sup:e}"))?;
    ensure(defect <= 1e-8, || format!("mass defect {defect:e}"))?;
    Ok(format!(
        "sup error {sup:.1e}, mass defect {defect:.1e} ({} ms)",
        start.elapsed().as_millis()
    ))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut worst_z: f64 = 0.0;
    let mut worst_tv: f64 = 0.0;
    let mut models = 0u64;
    let cfg = SolverConfig::default();
    for n in [2u64, 3, 5, 10, 50] {
        for p in [0.31, 1.0] {
            for lambda in [0.5, 1.0, 3.0] {
                let model = ModelSpec::hypergeometric(n, lambda, p).build().unwrap();
                let seed = 6_000 + models;
                models += 1;
                let exact = expected_absorption_time(&model, 1).unwrap().exact_mean;
                let s = estimate_absorption_time(&model, 1, 100_000, seed).unwrap();
                let z = (s.mean - exact).abs() / s.std_error;
                ensure(z <= 4.0, || {
                    format!("N={n} p={p} λ={lambda}: mean {} vs {exact}, z = {z:.2}", s.mean)
                })?;
                worst_z = worst_z.max(z);
                for t in [exact / 4.0, exact] {
                    let h = empirical_distribution_at(&model, 1, t, 100_000, seed).unwrap();
                    let snap = forward_probabilities(&model, 1, t, &cfg).unwrap();
                    let tv = h.total_variation(&snap);
                    ensure(tv <= 0.01, || format!("N={n} p={p} λ={lambda} t={t}: TV {tv}"))?;
                    worst_tv = worst_tv.max(tv);
                }
            }
        }
    }
    Ok(format!(
        "{models} models, max |z| = {worst_z:.2}, max TV = {worst_tv:.4} ({} ms)",
        start.elapsed().as_millis()
    ))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let narrow = ModelSpec::power_law(1.0, 2.0, Some(1000)).build().unwrap();
    let wide = ModelSpec::power_law(1.0, 2.0, Some(2000)).build().unwrap();
    let a = explosion_study(&narrow, 1, 10_000, 7).map_err(|e| e.to_string())?;
    let b = explosion_study(&wide, 1, 10_000, 7).map_err(|e| e.to_string())?;
    ensure((a.partial_sum - BASEL_999_ORACLE).abs() <= 1e-12, || {
        format!("partial sum {} vs oracle", a.partial_sum)
    })?;
    let z = (a.summary.mean - BASEL_999_ORACLE).abs() / a.summary.std_error;
    ensure(z <= 3.0, || {
        format!(
            "cap 1000 mean {} vs {BASEL_999_ORACLE}, z = {z:.2}",
            a.summary.mean
        )
    })?;
    let shift = (b.summary.mean - a.summary.mean).abs();
    let bound = 1e-3 + 3.0 * b.summary.std_error;
    ensure(shift < bound, || {
        format!("cap doubling moved mean by {shift} >= {bound}")
    })?;
    Ok(format!(
        "mean {:.5} ± {:.5} (oracle {BASEL_999_ORACLE:.5}), cap doubling shift {shift:.2e} < {bound:.2e} ({} ms)",
        a.summary.mean,
        a.summary.std_error,
        start.elapsed().as_millis()
    ))
}

fn criterion_8() -> Outcome {
    for c in [1.0, 3.0] {
        for n in 1..=10_000u64 {
            let value = powerlaw_expected_time(c, PowerLawRegime::Damped, n)
                .unwrap()
                .value;
            let nf = n as f64;
            let closed = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 6.0 / c;
            ensure(value == closed, || format!("c={c} n={n}: {value} != {closed}"))?;
        }
    }
    let e_n = powerlaw_expected_time(1.0, PowerLawRegime::Damped, 10_000)
        .unwrap()
        .value;
    let e_2n = powerlaw_expected_time(1.0, PowerLawRegime::Damped, 20_000)
        .unwrap()
        .value;
    let ratio = e_2n / e_n;
    ensure((ratio - 8.0).abs() <= 0.08, || format!("E(2n)/E(n) = {ratio}"))?;
    Ok(format!("exact for n ≤ 10^4, E(2n)/E(n) = {ratio:.6} at n = 10^4"))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dump = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let commands: Vec<Vec<String>> = [
        "expect-time --family yule --N 2000 --mu 1 --p 0.31 --unit hours --format json",
        "forward --family hypergeometric --N 30 --lambda 1 --p 0.31 --t-grid 0,1,5,20",
        "sweep --family yule --N 500 --mu 1 --vary p --values 0.155,0.31,0.62",
        "simulate --family yule --N 300 --mu 1 --p 0.31 --replicates 20000 --seed 99",
        "simulate --family hypergeometric --N 50 --lambda 2 --p 0.31 --replicates 20000 --seed 5 --format json",
        "explosion --c 1 --cap 1000 --replicates 5000 --seed 11",
    ]
    .iter()
    .map(|c| c.split_whitespace().map(String::from).collect())
    .collect();
    let mut runs = 0;
    for (i, cmd) in commands.iter().enumerate() {
        let args: Vec<&str> = cmd.iter().map(String::as_str).collect();
        let first = purebirth(&args)?;
        let second = purebirth(&args)?;
        ensure(first == second, || format!("{cmd:?} differs between runs"))?;
        runs += 2;
        if matches!(args[0], "simulate" | "explosion") {
            let mut serial = args.clone();
            serial.push("--serial");
            ensure(purebirth(&serial)? == first, || {
                format!("{cmd:?} differs serial vs parallel")
            })?;
            runs += 1;
        }
        if args[0] == "simulate" {
            let (a, b) = (dump(&format!("a{i}.csv")), dump(&format!("b{i}.csv")));
            // keep the dump small
            let mut few = args.clone();
            let r = few.iter().position(|a| *a == "--replicates").unwrap();
            few[r + 1] = "200";
            let mut with_a = few.clone();
            with_a.extend(["--dump-trajectories", &a]);
            let mut with_b = few;
            with_b.extend(["--dump-trajectories", &b, "--serial"]);
            purebirth(&with_a)?;
            purebirth(&with_b)?;
            let (fa, fb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
            ensure(fa == fb, || format!("{cmd:?} trajectory dumps differ"))?;
            runs += 2;
        }
    }
    // library level, large replicate count
    let model = ModelSpec::yule(1000, 1.0, 0.31).build().unwrap();
    let serial = estimate_absorption_time_with(&model, 1, 100_000, 123, Execution::Serial).unwrap();
    let parallel = estimate_absorption_time_with(&model, 1, 100_000, 123, Execution::Parallel).unwrap();
    ensure(serial == parallel, || {
        "library summary differs serial vs parallel".into()
    })?;
    let power = ModelSpec::power_law(1.0, 2.0, Some(500)).build().unwrap();
    let es = explosion_study_with(&power, 1, 20_000, 5, Execution::Serial).unwrap();
    let ep = explosion_study_with(&power, 1, 20_000, 5, Execution::Parallel).unwrap();
    ensure(es == ep, || "explosion study differs serial vs parallel".into())?;
    Ok(format!(
        "{runs} CLI runs byte-identical ({} ms)",
        start.elapsed().as_millis()
    ))
}

fn main() -> ExitCode {
    let criteria: [Check; 9] = [
        ("tournament approximation 24.52 h ± 0.01", criterion_1),
        ("cruise-ship approximation 9.47 d ± 0.01", criterion_2),
        ("exact vs approximate diagnostic", criterion_3),
        ("doubling p halves E(T) to 1e-12", criterion_4),
        ("forward solver vs linear-rate closed form", criterion_5),
        (
            "Monte Carlo vs analytic mean and forward distribution",
            criterion_6,
        ),
        ("finite cap-hitting time for λ_k = k²", criterion_7),
        ("cubic growth for λ_k = c/k²", criterion_8),
        ("byte-identical reproducibility", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  [{}] {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  [{}] {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
