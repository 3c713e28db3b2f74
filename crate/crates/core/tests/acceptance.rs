//! Acceptance checks. Runs without the libtest harness so every line is
//! printed; exits non-zero when any check fails.
//!
//! Run: cargo test --release --test acceptance

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use leadlag::granger::{granger_test, GrangerVariant};
use leadlag::indicator::{
    average_profile, explanatory_power, indicator_series, lag_profiles, WindowSpec,
};
use leadlag::rmt::{
    lmax_sample, mp_density, mp_histogram_check, standardized_lmax_sample, tw_cdf, MpParams,
    TwTable,
};
use leadlag::stats;
use leadlag::synth::{coupled_pair, coupled_panel, iid_panel, CouplingSpec, CAUSE, EFFECT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Fixed seed for single-draw checks.
const SEED: u64 = 42;

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.detail.push_str(&format!(
        " time={:.2}s (budget {}s)",
        elapsed.as_secs_f64(),
        budget.as_secs()
    ));
    if elapsed > budget {
        out.pass = false;
    }
    out
}

fn coupled(seed: u64) -> CouplingSpec<f64> {
    CouplingSpec {
        true_lag: 2,
        beta: 0.9,
        noise_sigma: 0.5,
        len: 400,
        seed,
    }
}

fn tw_rules_of_thumb() -> Outcome {
    timed(Duration::from_secs(5), || {
        let table = TwTable::<f64>::standard().expect("table");
        let f0 = tw_cdf(0.0, &table);
        let f1 = tw_cdf(1.0, &table);
        let f2 = tw_cdf(2.0, &table);
        Outcome {
            pass: (f0 - 0.83).abs() <= 0.01
                && (f1 - 0.95).abs() <= 0.01
                && (f2 - 0.99).abs() <= 0.005,
            detail: format!("F1(0)={f0:.5} F1(1)={f1:.5} F1(2)={f2:.5}"),
        }
    })
}

fn tw_edge_law() -> Outcome {
    timed(Duration::from_secs(120), || {
        let table = TwTable::<f64>::standard().expect("table");
        let sample = standardized_lmax_sample::<f64>(100, 100, 2000, SEED).expect("sample");
        let ks = stats::ks_distance(&sample, |s| table.cdf(s));
        let below = sample.iter().filter(|&&s| s <= 0.0).count() as f64 / sample.len() as f64;
        Outcome {
            pass: sample.len() == 2000 && ks < 0.05 && (0.80..=0.86).contains(&below),
            detail: format!("n=p=100 R={} KS={ks:.4} P(<=0)={below:.4}", sample.len()),
        }
    })
}

// Midpoint rule on the density itself, independent of the library's
// angle-substituted integral. Each half of the support is mapped through
// t = edge ± (b − a)s², which removes the square-root edge behaviour.
fn density_mass(params: &MpParams<f64>) -> f64 {
    let (a, b) = (params.a, params.b);
    let width = b - a;
    let s_max = 0.5f64.sqrt();
    let panels = 200_000;
    let h = s_max / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        let s = (i as f64 + 0.5) * h;
        let jac = 2.0 * width * s;
        acc +=
            (mp_density(a + width * s * s, params) + mp_density(b - width * s * s, params)) * jac;
    }
    acc * h
}

fn mp_bulk_law() -> Outcome {
    timed(Duration::from_secs(60), || {
        let mut pass = true;
        let mut detail = String::new();
        for (ratio, p) in [(1.0, 1000usize), (0.5, 500)] {
            let check = mp_histogram_check::<f64>(1000, p, 4, 40, SEED).expect("mp check");
            let params = MpParams::<f64>::from_dims(1000, p).expect("params");
            let mass = density_mass(&params);
            pass &= check.mad < 0.02
                && (mass - 1.0).abs() <= 1e-3
                && (check.normalization - 1.0).abs() <= 1e-3;
            detail.push_str(&format!(
                "ratio={ratio}: MAD={:.4} mass={mass:.6}; ",
                check.mad
            ));
        }
        Outcome { pass, detail }
    })
}

fn strong_law() -> Outcome {
    let (n, p, reps) = (200usize, 200usize, 500usize);
    let l1 = lmax_sample::<f64>(n, p, reps, SEED).expect("sample");
    let mean = stats::mean(&l1.iter().map(|l| l / n as f64).collect::<Vec<_>>());
    let limit = (1.0 + (p as f64 / n as f64).sqrt()).powi(2);
    let rel = (mean - limit) / limit;
    Outcome {
        pass: rel.abs() <= 0.02,
        detail: format!(
            "mean(l1/n)={mean:.4} limit={limit} rel={:+.2}%",
            rel * 100.0
        ),
    }
}

fn explanatory_power_closed_form() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let rho: f64 = rng.random_range(-1.0..=1.0);
        let got = explanatory_power(rho).expect("rho in range");
        worst = worst.max((got - (1.0 + rho.abs()) / 2.0).abs());
    }
    Outcome {
        pass: worst <= 1e-10,
        detail: format!("max |error| over 1000 draws = {worst:.2e}"),
    }
}

fn mean_sigma(panel: &leadlag::Panel, effect: &str, cause: &str, spec: &WindowSpec) -> f64 {
    indicator_series(panel, effect, &[cause.to_string()], spec)
        .expect("series")
        .column_mean(0)
        .expect("non-empty")
}

fn separation() -> Outcome {
    timed(Duration::from_secs(120), || {
        let mut pass = true;
        let mut detail = String::new();
        for lag in [2usize, 5] {
            let spec = WindowSpec::new(60, lag).expect("spec");
            let (mut c, mut i) = (0.0, 0.0);
            for seed in 0..100 {
                c += mean_sigma(
                    &coupled_pair(&coupled(seed)).expect("pair"),
                    EFFECT,
                    CAUSE,
                    &spec,
                );
                i += mean_sigma(
                    &iid_panel::<f64>(2, 400, seed).expect("iid"),
                    "x2",
                    "x1",
                    &spec,
                );
            }
            let ratio = c / i;
            pass &= ratio >= 1.5;
            detail.push_str(&format!(
                "L={lag}: coupled={:.4} iid={:.4} ratio={ratio:.2}; ",
                c / 100.0,
                i / 100.0
            ));
        }
        Outcome { pass, detail }
    })
}

fn lag_recovery() -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for lag in [2usize, 5] {
        let spec = WindowSpec::new(60, lag).expect("spec");
        let hits = (0..50)
            .filter(|&seed| {
                let pair = coupled_pair(&coupled(seed)).expect("pair");
                let profiles = lag_profiles(&pair, EFFECT, CAUSE, &spec).expect("profiles");
                average_profile(&profiles).expect("profile").argmax() == 2
            })
            .count();
        pass &= hits * 10 >= 50 * 9;
        detail.push_str(&format!("L={lag}: {hits}/50; "));
    }
    Outcome { pass, detail }
}

// P(F > f) by Simpson on the Beta(d1/2, d2/2) density of u = d1 f / (d1 f + d2),
// normalized by the same quadrature over [0, 1]. Needs d1 >= 2.
fn f_sf_oracle(f: f64, d1: usize, d2: usize) -> f64 {
    let (a, b) = (d1 as f64 / 2.0, d2 as f64 / 2.0);
    let g = |u: f64| {
        if u <= 0.0 || u >= 1.0 {
            if (u <= 0.0 && a == 1.0) || (u >= 1.0 && b == 1.0) {
                1.0
            } else {
                0.0
            }
        } else {
            ((a - 1.0) * u.ln() + (b - 1.0) * (1.0 - u).ln()).exp()
        }
    };
    let simpson = |lo: f64, hi: f64, panels: usize| {
        let h = (hi - lo) / panels as f64;
        let mut acc = g(lo) + g(hi);
        for i in 1..panels {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(lo + h * i as f64);
        }
        acc * h / 3.0
    };
    let u0 = d1 as f64 * f / (d1 as f64 * f + d2 as f64);
    simpson(u0, 1.0, 400_000) / simpson(0.0, 1.0, 400_000)
}

fn granger_calibration() -> Outcome {
    let mut rejections = 0;
    let mut oracle_err = 0.0f64;
    for seed in 0..200u64 {
        let panel = iid_panel::<f64>(2, 400, seed).expect("iid");
        let stat = granger_test(
            panel.column("x1").unwrap(),
            panel.column("x2").unwrap(),
            2,
            GrangerVariant::RAW,
        )
        .expect("test");
        if stat.p_value < 0.05 {
            rejections += 1;
        }
        if seed < 20 {
            let oracle = f_sf_oracle(stat.f_statistic, stat.df_num, stat.df_den);
            oracle_err = oracle_err.max((oracle - stat.p_value).abs());
        }
    }
    let strong = (0..200u64)
        .filter(|&seed| {
            let spec = CouplingSpec {
                true_lag: 1,
                ..coupled(seed)
            };
            let pair = coupled_pair(&spec).expect("pair");
            let stat = granger_test(
                pair.column(EFFECT).unwrap(),
                pair.column(CAUSE).unwrap(),
                2,
                GrangerVariant::RAW,
            )
            .expect("test");
            stat.p_value < 1e-4
        })
        .count();
    let rate = rejections as f64 / 200.0;
    Outcome {
        pass: (0.01..=0.10).contains(&rate) && strong * 100 >= 200 * 95 && oracle_err <= 1e-6,
        detail: format!(
            "null rejection rate={rate:.3} coupled p<1e-4 in {strong}/200 max |p - oracle|={oracle_err:.2e}"
        ),
    }
}

fn spearman_of(a: &[Option<f64>], b: &[Option<f64>]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = a
        .iter()
        .zip(b)
        .filter_map(|(u, v)| Some(((*u)?, (*v)?)))
        .unzip();
    stats::spearman(&x, &y).expect("spearman")
}

fn lag_smoothing() -> Outcome {
    let rho_for = |seed: u64| {
        let panel = coupled_panel(&coupled(seed), 3).expect("panel");
        let causes = vec![CAUSE.to_string()];
        let s5 = indicator_series(&panel, EFFECT, &causes, &WindowSpec::new(60, 5).unwrap())
            .expect("L=5");
        let s10 = indicator_series(&panel, EFFECT, &causes, &WindowSpec::new(60, 10).unwrap())
            .expect("L=10");
        assert_eq!(s5.timestamps, s10.timestamps);
        spearman_of(&s5.column(0), &s10.column(0))
    };
    let rho = rho_for(SEED);
    let across: Vec<f64> = (0..100).map(rho_for).collect();
    Outcome {
        pass: rho > 0.8,
        detail: format!(
            "seed {SEED}: rho={rho:.4}; over 100 seeds mean={:.4}, {} exceed 0.8",
            stats::mean(&across),
            across.iter().filter(|&&r| r > 0.8).count()
        ),
    }
}

fn run_cli(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_leadlag"))
        .args(args)
        .output()
        .expect("spawn leadlag")
        .status
        .code()
        .unwrap_or(-1)
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let panel = path("panel.csv");
    let status = run_cli(&[
        "simulate",
        "--distractors",
        "3",
        "--seed",
        "7",
        "--out",
        &panel,
    ]);
    assert_eq!(status, 0);

    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("twtable", vec!["twtable", "--step", "0.01"]),
        (
            "validate-rmt",
            vec![
                "validate-rmt",
                "--n",
                "30",
                "--p",
                "20",
                "--replications",
                "50",
                "--mp-n",
                "200",
                "--mp-matrices",
                "1",
            ],
        ),
        (
            "simulate",
            vec!["simulate", "--kind", "iid", "--n-series", "4"],
        ),
        (
            "indicator",
            vec![
                "indicator",
                "--input",
                &panel,
                "--effect",
                "effect",
                "--max-lag",
                "5",
            ],
        ),
        (
            "granger",
            vec![
                "granger",
                "--input",
                &panel,
                "--effect",
                "effect",
                "--variants",
                "raw,diff,winsor,diff_winsor",
            ],
        ),
        (
            "compare",
            vec!["compare", "--input", &panel, "--effect", "effect"],
        ),
    ];
    let mut failures = Vec::new();
    for (name, args) in &cases {
        for format in ["csv", "json"] {
            let mut outputs = Vec::new();
            for run in 0..2 {
                let out = path(&format!("{name}-{format}-{run}"));
                let mut full: Vec<&str> = args.clone();
                full.extend(["--seed", "11", "--format", format, "--out", &out]);
                let status = run_cli(&full);
                outputs.push((status, std::fs::read(&out).unwrap_or_default()));
            }
            let same = outputs[0] == outputs[1] && outputs[0].0 == 0 && !outputs[0].1.is_empty();
            if !same {
                failures.push(format!("{name}/{format}"));
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{} subcommands x 2 formats byte-identical", cases.len())
        } else {
            format!("differing or failing: {}", failures.join(", "))
        },
    }
}

fn main() {
    let checks: [(&str, Check); 10] = [
        ("tw_rules_of_thumb", tw_rules_of_thumb),
        ("tw_edge_law_n100", tw_edge_law),
        ("mp_bulk_law", mp_bulk_law),
        ("lmax_strong_law", strong_law),
        (
            "explanatory_power_closed_form",
            explanatory_power_closed_form,
        ),
        ("coupled_vs_iid_separation", separation),
        ("lag_recovery", lag_recovery),
        ("granger_calibration", granger_calibration),
        ("higher_lag_smoothing", lag_smoothing),
        ("cli_determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ),
        });
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "[{:02}] {} {name}: {}",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        checks.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
