//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use pgst_core::{
    build_sector, classify_length, eigensystem, enumerate_configs, fidelity, mirror_fidelities,
    ostrowski_bound, pgst_condition_set, propagator, rho_out, validate_slater, ChainSpec,
    Complex64, InputState, Readout,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = fn() -> Check;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pgst(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pgst"))
        .args(args)
        .env_remove("PGST_CONFIG")
        .output()
        .map_err(|e| format!("spawn failed: {e}"))?;
    let stdout = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "`pgst {}` exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Ok(stdout)
}

/// Data rows (header included) of a CSV report.
fn table(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn footer_value(csv: &str, record: &str, key: &str) -> Option<f64> {
    let prefix = format!("# {record} ");
    // skip the `# fit = true` echo line
    let line = csv
        .lines()
        .find(|l| l.starts_with(&prefix) && !l.contains(" = "))?;
    line[prefix.len()..]
        .split(' ')
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .and_then(|v| v.parse().ok())
}

fn chain(n: usize) -> ChainSpec {
    ChainSpec::new(n).expect("valid length")
}

fn perfect_transfer() -> Check {
    let f2 = mirror_fidelities(chain(2), 1, FRAC_PI_2).map_err(|e| e.to_string())?[0];
    let f3 = mirror_fidelities(chain(3), 1, PI / SQRT_2).map_err(|e| e.to_string())?[0];
    ensure((f2 - 1.0).abs() < 1e-12, || format!("n=2: {f2}"))?;
    ensure((f3 - 1.0).abs() < 1e-12, || format!("n=3: {f3}"))?;
    Ok(format!(
        "|1-F| = {:.1e}, {:.1e}",
        (f2 - 1.0).abs(),
        (f3 - 1.0).abs()
    ))
}

fn keystone() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    let mut comparisons = 0;
    for r in [2usize, 3] {
        let rep = validate_slater(8, r, 20, 50.0, &mut rng).map_err(|e| e.to_string())?;
        worst = worst.max(rep.max_discrepancy);
        comparisons += rep.comparisons;
    }
    ensure(worst < 1e-10, || format!("max discrepancy {worst:e}"))?;
    let csv = pgst(&[
        "validate", "--n-max", "8", "--r-max", "3", "--trials", "20", "--seed", "42",
    ])?;
    let rows = table(&csv);
    ensure(rows[1].last().is_some_and(|p| p == "true"), || {
        format!("cli validate: {:?}", rows[1])
    })?;
    Ok(format!("{comparisons} comparisons, max {worst:.2e}"))
}

fn reported_transfer_time() -> Check {
    let csv = pgst(&["tmin", "--n", "10", "--m", "3", "--eps", "0.1"])?;
    let rows = table(&csv);
    let t: f64 = rows[1][3]
        .parse()
        .map_err(|_| format!("bad row {:?}", rows[1]))?;
    ensure(rows[1][4] == "true", || "not found".into())?;
    ensure((t - 546.0).abs() <= 0.02 * 546.0, || format!("t_min = {t}"))?;
    Ok(format!("t_min = {t}"))
}

fn growth_exponent() -> Check {
    let csv = pgst(&[
        "sweep",
        "--axis",
        "n",
        "--n",
        "6,7,9,10,12,13,15",
        "--m",
        "3",
        "--eps",
        "0.2",
        "--fit",
    ])?;
    let rows = table(&csv);
    ensure(rows.iter().skip(1).all(|r| r[2] == "true"), || {
        "a length was not found".into()
    })?;
    let b = footer_value(&csv, "fit", "b").ok_or("no fit footer")?;
    let a = footer_value(&csv, "fit", "a").ok_or("no fit footer")?;
    ensure((b - 0.6852).abs() <= 0.15 * 0.6852, || format!("b = {b}"))?;
    Ok(format!("t_min ~ {a:.3} e^({b:.4} n)"))
}

fn tolerance_and_width_monotone() -> Check {
    let mut previous: Option<Vec<f64>> = None;
    let mut summary = Vec::new();
    for m in 1..=4 {
        let ms = m.to_string();
        let csv = pgst(&[
            "sweep",
            "--axis",
            "eps",
            "--n",
            "10",
            "--m",
            &ms,
            "--eps",
            "0.3,0.25,0.2,0.15,0.1",
            "--t-max",
            "30000",
        ])?;
        // an unfound crossing would count as +inf
        let times: Vec<f64> = table(&csv)
            .iter()
            .skip(1)
            .map(|r| {
                if r[2] == "true" {
                    r[1].parse().unwrap_or(f64::NAN)
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        ensure(
            times.len() == 5 && times.iter().all(|t| !t.is_nan()),
            || format!("m={m}: {times:?}"),
        )?;
        ensure(times.windows(2).all(|w| w[0] <= w[1]), || {
            format!("m={m} not monotone in eps: {times:?}")
        })?;
        if let Some(prev) = &previous {
            ensure(prev.iter().zip(&times).all(|(a, b)| a <= b), || {
                format!("m={m} earlier than m={}: {prev:?} vs {times:?}", m - 1)
            })?;
        }
        summary.push(format!("m={m}: {:.1}", times[4]));
        previous = Some(times);
    }
    Ok(format!("t_min at eps=0.1: {}", summary.join(", ")))
}

fn classifier_table() -> Check {
    const PGST: [u64; 33] = [
        1, 2, 3, 4, 5, 6, 7, 9, 10, 12, 13, 15, 16, 18, 21, 22, 25, 28, 30, 31, 33, 36, 37, 40, 42,
        45, 46, 52, 57, 58, 60, 61, 63,
    ];
    for n in 1..=64u64 {
        let class = classify_length(n).map_err(|e| e.to_string())?;
        ensure(class.is_pgst() == PGST.contains(&n), || format!("n={n}"))?;
    }
    let csv = pgst(&["classify", "--n", "1..64"])?;
    let rows = table(&csv);
    let anchor = |n: usize| rows[n].clone();
    ensure(
        anchor(7)[1] == "yes" && anchor(7)[3].contains("k=3"),
        || format!("{:?}", anchor(7)),
    )?;
    ensure(
        anchor(10)[1] == "yes" && anchor(10)[3].contains("p=11"),
        || format!("{:?}", anchor(10)),
    )?;
    ensure([8, 11, 14].iter().all(|&n| anchor(n)[1] == "no"), || {
        "8/11/14".into()
    })?;
    Ok(format!("{} of 64 lengths admit PGST", PGST.len()))
}

fn invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // unitarity and group property
    for _ in 0..50 {
        let n = rng.random_range(1..=16usize);
        let (t1, t2) = (rng.random_range(0.0..60.0), rng.random_range(0.0..60.0));
        let u1 = propagator(chain(n), t1);
        let u2 = propagator(chain(n), t2);
        let u12 = propagator(chain(n), t1 + t2);
        ensure(u1.unitarity_residual() < 1e-12, || {
            format!("unitarity n={n} t={t1}")
        })?;
        let gap = (u1.matrix() * u2.matrix() - u12.matrix()).norm();
        ensure(gap < 1e-11, || format!("group property n={n}: {gap:e}"))?;
    }

    // sector spectrum is the sum of occupied single-particle levels
    for n in 2..=8 {
        let single = eigensystem(chain(n)).eigenvalues().to_vec();
        for r in 1..=3.min(n) {
            let mut want: Vec<f64> = enumerate_configs(n, r)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|c| c.positions().iter().map(|&k| single[k - 1]).sum())
                .collect();
            let h = build_sector(n, r).map_err(|e| e.to_string())?;
            let mut got: Vec<f64> = h.evolver().eigenvalues().iter().copied().collect();
            want.sort_by(f64::total_cmp);
            got.sort_by(f64::total_cmp);
            ensure(want.len() == got.len(), || {
                format!("sector size n={n} r={r}")
            })?;
            let dev = want
                .iter()
                .zip(&got)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            ensure(dev < 1e-9, || format!("sum rule n={n} r={r}: {dev:e}"))?;
        }
    }

    // Ostrowski lower bound against an independent LU determinant
    for trial in 0..100 {
        let r = rng.random_range(1..=6usize);
        let mut a = DMatrix::from_fn(r, r, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        for i in 0..r {
            let off: f64 = (0..r).filter(|&j| j != i).map(|j| a[(i, j)].norm()).sum();
            a[(i, i)] = Complex64::from_polar(
                off + rng.random_range(0.01..2.0),
                rng.random_range(0.0..TAU),
            );
        }
        let bound = ostrowski_bound(&a).map_err(|e| e.to_string())?;
        let det = a.lu().determinant().norm();
        ensure(bound > 0.0 && bound <= det * (1.0 + 1e-12), || {
            format!("Ostrowski trial {trial}")
        })?;
    }

    // output register is a density matrix
    for trial in 0..50 {
        let (n, m) = [(4usize, 2usize), (7, 3), (10, 3), (9, 4)][trial % 4];
        let input = InputState::random(m, &mut rng);
        let rho = rho_out(n, m, &input, rng.random_range(0.0..200.0)).map_err(|e| e.to_string())?;
        ensure(
            (rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12,
            || format!("trace, trial {trial}"),
        )?;
        ensure(rho.hermiticity_residual() < 1e-12, || {
            format!("hermiticity, trial {trial}")
        })?;
        ensure(rho.min_eigenvalue() > -1e-10, || {
            format!("positivity, trial {trial}")
        })?;
        let f = fidelity(&input, &rho, Readout::Raw).map_err(|e| e.to_string())?;
        ensure((-1e-12..=1.0 + 1e-10).contains(&f), || {
            format!("fidelity {f}")
        })?;
    }

    // determinant chain bound on every grid point where the premise holds
    let spec = chain(10);
    let mut checked = 0usize;
    for i in 1..=200_000 {
        let t = i as f64 * 0.1;
        let singles = mirror_fidelities(spec, 3, t).map_err(|e| e.to_string())?;
        let delta = 1.0 - singles.iter().copied().fold(f64::INFINITY, f64::min);
        for (config, value) in pgst_condition_set(spec, 3, t)
            .map_err(|e| e.to_string())?
            .iter()
        {
            let r = config.r();
            let base = 1.0 - r as f64 * (2.0 * delta).sqrt();
            if r >= 2 && base > 0.0 {
                let bound = base.powi(r as i32);
                ensure(value >= bound, || {
                    format!("t={t} {config}: {value} < {bound}")
                })?;
                checked += 1;
            }
        }
    }
    ensure(checked > 0, || "premise never held".into())?;
    Ok(format!(
        "all suites green; chain bound checked at {checked} points"
    ))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for jobs in ["1", "8"] {
        let path = dir.path().join(format!("sweep_{jobs}.csv"));
        let p = path.to_str().ok_or("non-utf8 temp path")?;
        pgst(&[
            "sweep",
            "--axis",
            "n",
            "--n",
            "6,7,9,10,12",
            "--m",
            "3",
            "--eps",
            "0.2",
            "--fit",
            "--jobs",
            jobs,
            "--out",
            p,
        ])?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || {
        "outputs differ between --jobs 1 and --jobs 8".into()
    })?;
    Ok(format!("{} identical bytes", outputs[0].len()))
}

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("perfect-transfer sanity", perfect_transfer),
        ("Slater vs sector oracle", keystone),
        ("t_min(n=10, m=3, eps=0.1) ~ 546", reported_transfer_time),
        ("exponential growth exponent", growth_exponent),
        ("monotone in eps and m", tolerance_and_width_monotone),
        ("classifier table 1..64", classifier_table),
        ("invariant suites", invariants),
        ("determinism across --jobs", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  criterion {}: {name} [{secs:.1}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {}: {name} [{secs:.1}s] {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
