//! Acceptance runner. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::cell::Cell;
use std::f64::consts::{E, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use phirg_cli::run_cli;
use phirg_core::correlator::{
    s_table, two_point_beta0, two_point_trace_series, vertex_finite, vertex_series,
};
use phirg_core::dimreg::{alpha_table, bubble_table, xi_series, TheoryConfig};
use phirg_core::rgflow::{
    coupling_closed, coupling_closed_log, coupling_rhs, integrate_mass_flow, lambda_coefficients,
    mass_flow_l4_closed, mass_rhs, CouplingFlowParams,
};
use phirg_core::statespace::{
    factorize, factorize_two_loop, project_nondiagonal, trace_of_factors, LoopFactorization,
    RootChoice,
};
use phirg_core::validity::{validity_intervals, validity_l4_bound, validity_l6_qv};
use phirg_core::LaurentSeries;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::Value;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn cfg(l: u32, m: f64) -> TheoryConfig {
    TheoryConfig::new(l, m).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run_props<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn coefficients() -> Check {
    let pi2 = PI * PI;
    let pi4 = pi2 * pi2;
    let one = cfg(6, 1.0);
    let lam = lambda_coefficients(&one.with_coupling(0.5).unwrap()).map_err(|e| e.to_string())?;
    let checks = [
        (
            "alpha_-1",
            alpha_table(1.0).unwrap().get(-1).unwrap(),
            -1.0 / (8.0 * pi2),
        ),
        (
            "eta_-1",
            bubble_table(1.0).unwrap().get(-1).unwrap(),
            -3.0 / (16.0 * pi2),
        ),
        (
            "xi_-2",
            xi_series(1.0, 2).unwrap().coeff_at(-2).unwrap(),
            1.0 / (64.0 * pi4),
        ),
        ("S_0", s_table(&one).unwrap()[0], 3.0 / (128.0 * pi4)),
        ("Lambda_1", lam.lambda_table()[1], -3.0 / (128.0 * pi4)),
    ];
    let mut worst: f64 = 0.0;
    for (name, got, want) in checks {
        let r = rel(got, want);
        ensure(r <= 1e-12, format!("{name}: {got} vs {want}"))?;
        worst = worst.max(r);
    }
    Ok(format!("max relative error {worst:.1e}"))
}

fn l4_chain() -> Check {
    let c = cfg(4, 1.0);
    let s = s_table(&c).unwrap();
    let eta = bubble_table(1.0).unwrap();
    ensure(s[0] == eta.get(-1).unwrap(), "S_0 != eta_-1")?;
    ensure(s[1] == eta.get(0).unwrap(), "S_1 != eta_0")?;
    let p = CouplingFlowParams::new(0.5, 1.0, vec![-3.0 / (16.0 * PI * PI)]).unwrap();
    let got = coupling_closed(&p, 4, E).unwrap();
    let want = 0.504_794_977_306_001_667_76;
    ensure(
        (got - want).abs() <= 1e-9,
        format!("coupling {got} vs {want}"),
    )?;
    Ok(format!("coupling(e) = {got}"))
}

fn mass_flow_oracle() -> Check {
    let start = Instant::now();
    let (mut worst, mut steps): (f64, usize) = (0.0, 0);
    for lambda0 in [0.01, 0.1] {
        let c = cfg(4, 1.0).with_coupling(lambda0).unwrap();
        let traj = integrate_mass_flow(&c, 1.0, 100.0, 1e-10, 200).map_err(|e| e.to_string())?;
        steps += traj.stats.accepted;
        for s in traj.samples() {
            let want = mass_flow_l4_closed(1.0, lambda0, s.mu, 1.0).unwrap();
            worst = worst.max(rel(s.value, want));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-8, format!("relative error {worst:e}"))?;
    ensure(elapsed < 1.0, format!("took {elapsed:.3} s"))?;
    Ok(format!(
        "max relative error {worst:.1e}, {steps} steps, {:.1} ms",
        elapsed * 1e3
    ))
}

fn coupling_consistency() -> Check {
    let mut worst: f64 = 0.0;
    for l in [4, 6] {
        let c = cfg(l, 1.0).with_coupling(0.5).unwrap();
        let p = lambda_coefficients(&c).unwrap();
        for i in 0..20 {
            let mu = (-5.0 + 10.0 * i as f64 / 19.0).exp() * 1.003;
            let h = 1e-5 * mu;
            let fd = (coupling_closed(&p, l, mu + h).unwrap()
                - coupling_closed(&p, l, mu - h).unwrap())
                / (2.0 * h);
            let lam = coupling_closed(&p, l, mu).unwrap();
            let rhs = coupling_rhs(&c.with_mu(mu).unwrap(), lam).unwrap();
            let r = rel(fd, rhs);
            ensure(r <= 1e-5, format!("l={l} mu={mu}: {fd} vs {rhs}"))?;
            worst = worst.max(r);
        }
    }
    Ok(format!("max relative error {worst:.1e}"))
}

fn validity_boundaries() -> Check {
    let mut worst_gap: f64 = 0.0;
    for lambda_s in [0.1, 0.5, 0.9] {
        let p = lambda_coefficients(&cfg(4, 1.0).with_coupling(lambda_s).unwrap()).unwrap();
        let x = validity_l4_bound(&p).unwrap();
        let lam = coupling_closed_log(&p, 4, x).unwrap();
        ensure(
            (lam.abs() - 1.0).abs() <= 1e-9,
            format!("l=4 endpoint coupling {lam}"),
        )?;
        let dom = validity_intervals(&p, 4).unwrap();
        ensure(dom.intervals.len() == 1, "l=4: expected one interval")?;
        let gap = (dom.intervals[0].ln_hi - x).abs();
        ensure(
            gap <= 1e-10 * x.abs().max(1.0),
            format!("l=4 generic vs closed {gap:e}"),
        )?;
        worst_gap = worst_gap.max(gap);
    }
    let p = lambda_coefficients(&cfg(6, 1.0).with_coupling(0.5).unwrap()).unwrap();
    let (q, v) = validity_l6_qv(&p).unwrap();
    ensure(
        rel(q, 64.468_426_976_904_534_111) <= 1e-9,
        format!("q = {q}"),
    )?;
    ensure(
        rel(v, 0.238_452_145_516_939_483_09) <= 1e-9,
        format!("v = {v}"),
    )?;
    let dom = validity_intervals(&p, 6).unwrap();
    ensure(dom.intervals.len() == 1, "l=6: expected one interval")?;
    let iv = &dom.intervals[0];
    for (closed, generic) in [(v - q, iv.ln_lo), (v + q, iv.ln_hi)] {
        let lam = coupling_closed_log(&p, 6, closed).unwrap();
        ensure(
            (lam.abs() - 1.0).abs() <= 1e-9,
            format!("l=6 endpoint coupling {lam}"),
        )?;
        let gap = (closed - generic).abs();
        ensure(
            gap <= 1e-10 * closed.abs().max(1.0),
            format!("l=6 generic vs closed {gap:e}"),
        )?;
        worst_gap = worst_gap.max(gap);
    }
    Ok(format!("max ln-mu gap {worst_gap:.1e}"))
}

fn admissible() -> impl Strategy<Value = [f64; 3]> {
    (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0)
        .prop_filter("double pole", |(d1, _, d2, _)| (d1 * d2).abs() > 1e-3)
        .prop_map(|(d1, n1, d2, n2)| {
            let f = LoopFactorization::from_pairs(&[(d1, n1), (d2, n2)]).unwrap();
            let t = trace_of_factors(&f);
            [
                t.coeff_at(-2).unwrap(),
                t.coeff_at(-1).unwrap(),
                t.coeff_at(0).unwrap(),
            ]
        })
}

fn projection_suite() -> Check {
    let beta = |b: [f64; 3]| LaurentSeries::new(-2, b.to_vec()).unwrap();
    run_props(
        1000,
        (admissible(), 0.1f64..10.0, any::<bool>()),
        |(b, g, larger)| {
            let root = if larger {
                RootChoice::Larger
            } else {
                RootChoice::Smaller
            };
            let t = trace_of_factors(&factorize(&beta(b), 2, g, root).unwrap());
            let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (k, want) in (-2..=0).zip(b) {
                prop_assert!((t.coeff_at(k).unwrap() - want).abs() <= 1e-12 * scale);
            }
            Ok(())
        },
    )?;
    run_props(256, admissible(), |b| {
        for g in [0.25, 0.5, 1.0, 3.0, 17.0] {
            let f = factorize(&beta(b), 2, g, RootChoice::Smaller).unwrap();
            prop_assert!((project_nondiagonal(&f) - b[2]).abs() <= 1e-12 * b[2].abs().max(1.0));
        }
        Ok(())
    })?;
    let seen = [Cell::new(0u32), Cell::new(0u32)];
    run_props(
        1000,
        (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0),
        |(b2, b1, b0)| {
            prop_assume!(b2 != 0.0);
            let disc = b1 * b1 - 4.0 * b2 * b0;
            let got = factorize_two_loop(b2, b1, b0, 1.0, RootChoice::Smaller);
            prop_assert_eq!(got.is_ok(), disc >= 0.0);
            let n = &seen[usize::from(disc >= 0.0)];
            n.set(n.get() + 1);
            Ok(())
        },
    )?;
    ensure(
        seen[0].get() > 0 && seen[1].get() > 0,
        "both discriminant signs must be exercised",
    )?;
    Ok(format!(
        "existence checked on {} + {} triples",
        seen[1].get(),
        seen[0].get()
    ))
}

fn dual_route() -> Check {
    run_props(20, (0.05f64..20.0, -3.0f64..3.0), |(m, log_mu)| {
        for l in [4, 6] {
            let c = cfg(l, m).with_mu(log_mu.exp()).unwrap();
            let closed = two_point_beta0(&c).unwrap().beta0;
            let series = two_point_trace_series(&c, 1.0)
                .unwrap()
                .finite_part()
                .unwrap();
            prop_assert!(
                rel(closed, series) <= 1e-10,
                "beta0 l={} {} {}",
                l,
                closed,
                series
            );
            let closed = vertex_finite(&c, None).unwrap().constant_part;
            let series = vertex_series(&c).unwrap().finite_part().unwrap();
            prop_assert!(
                rel(closed, series) <= 1e-10,
                "vertex l={} {} {}",
                l,
                closed,
                series
            );
        }
        Ok(())
    })?;
    Ok("20 random (m0sq, mu) points, l = 4 and 6".into())
}

// max over the flow of |d/dμ [m₀²(μ) + σ λ₀ β₀(m₀²(μ), μ)]|.
fn stationarity_residual(lambda0: f64, sigma: f64) -> f64 {
    let base = cfg(4, 1.0).with_coupling(lambda0).unwrap();
    let traj = integrate_mass_flow(&base, 1.0, 100.0, 1e-12, 25).unwrap();
    let beta0 = |m: f64, mu: f64| {
        two_point_beta0(&cfg(4, m).with_mu(mu).unwrap())
            .unwrap()
            .beta0
    };
    traj.samples()
        .iter()
        .map(|s| {
            let (m, mu) = (s.value, s.mu);
            let dm = mass_rhs(&base.with_m0sq(m).unwrap().with_mu(mu).unwrap()).unwrap();
            let (hm, hmu) = (1e-5 * m, 1e-5 * mu);
            let db_dm = (beta0(m + hm, mu) - beta0(m - hm, mu)) / (2.0 * hm);
            let db_dmu = (beta0(m, mu + hmu) - beta0(m, mu - hmu)) / (2.0 * hmu);
            (dm * (1.0 + sigma * lambda0 * db_dm) + sigma * lambda0 * db_dmu).abs()
        })
        .fold(0.0, f64::max)
}

fn stationarity() -> Check {
    let mut passing = Vec::new();
    let mut report = String::new();
    for sigma in [1.0, -1.0] {
        let c_small = stationarity_residual(0.01, sigma) / 0.01f64.powi(2);
        let c_large = stationarity_residual(0.1, sigma) / 0.1f64.powi(2);
        let ratio = c_large / c_small;
        if (0.5..=2.0).contains(&ratio) {
            passing.push(sigma);
            report = format!("sigma = {sigma:+}, C = {c_small:.3e}, rescaled ratio {ratio:.3}");
        }
    }
    ensure(passing.len() == 1, format!("passing signs: {passing:?}"))?;
    Ok(report)
}

fn series() -> impl Strategy<Value = LaurentSeries> {
    (-3i32..=1, proptest::collection::vec(-10.0f64..10.0, 1..6))
        .prop_filter("nonzero leading coefficient", |(_, c)| c[0].abs() > 1e-3)
        .prop_map(|(min, c)| LaurentSeries::new(min, c).unwrap())
}

fn close(a: &LaurentSeries, b: &LaurentSeries, tol: f64) -> Result<(), TestCaseError> {
    prop_assert_eq!(a.max_reliable_order(), b.max_reliable_order());
    let scale = a
        .coeffs()
        .iter()
        .chain(b.coeffs())
        .fold(1.0f64, |m, c| m.max(c.abs()));
    for k in a.min_order().min(b.min_order())..=a.max_reliable_order() {
        let (x, y) = (a.coeff_at(k).unwrap(), b.coeff_at(k).unwrap());
        prop_assert!((x - y).abs() <= tol * scale, "order {}: {} vs {}", k, x, y);
    }
    Ok(())
}

fn series_laws() -> Check {
    run_props(256, (series(), series(), series()), |(a, b, c)| {
        close(&(&a + &b), &(&b + &a), 1e-12)?;
        close(&(&(&a + &b) + &c), &(&a + &(&b + &c)), 1e-12)?;
        close(&(&a * &b), &(&b * &a), 1e-12)?;
        close(&(&(&a * &b) * &c), &(&a * &(&b * &c)), 1e-12)?;
        let bc = &b + &c;
        if bc.min_order() == b.min_order().min(c.min_order()) {
            close(&(&a * &bc), &(&(&a * &b) + &(&a * &c)), 1e-12)?;
        }
        let copy = a.clone();
        prop_assert!((&a - &copy).is_zero());
        Ok(())
    })?;
    run_props(256, (series(), 0u32..6), |(a, p)| {
        let mut want = LaurentSeries::constant(1.0, a.max_reliable_order() - a.min_order());
        for _ in 0..p {
            want = &want * &a;
        }
        close(&a.pow_int(p), &want, 1e-12)
    })?;
    let junk = proptest::collection::vec(-1e6f64..1e6, 1..4);
    run_props(
        256,
        (series(), series(), junk, 1u32..4),
        |(a, b, junk, p)| {
            let mut padded = a.coeffs().to_vec();
            padded.extend(&junk);
            let noisy = LaurentSeries::new(a.min_order(), padded).unwrap();
            let clean_ops = [&a * &b, &a + &b, a.pow_int(p)];
            let noisy_ops = [&noisy * &b, &noisy + &b, noisy.pow_int(p)];
            for (clean, dirty) in clean_ops.iter().zip(&noisy_ops) {
                close(&dirty.truncate(clean.max_reliable_order()), clean, 1e-12)?;
            }
            Ok(())
        },
    )?;
    Ok("ring laws, pow, junk padding".into())
}

fn phirg(args: &[&str], threads: Option<&str>) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_phirg"));
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("RAYON_NUM_THREADS", n);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

const TOKENS: &[&str] = &[
    "coeffs",
    "beta0",
    "vertex",
    "factorize",
    "mass-flow",
    "coupling-flow",
    "validity",
    "--l",
    "--m0sq",
    "--m0sq-init",
    "--lambda0",
    "--lambda-s",
    "--mu",
    "--mu-start",
    "--mu-end",
    "--points",
    "--scale",
    "--tol",
    "--s",
    "--t",
    "--u",
    "--beta-2",
    "--beta-0",
    "--as-distance",
    "--format",
    "--config",
    "4",
    "6",
    "5",
    "0",
    "-1",
    "1",
    "1e300",
    "nan",
    "inf",
    "0.5",
    "abc",
    "",
    "log",
    "csv",
    "--",
    "--bogus",
    "9e99999",
];

fn cli_contract() -> Check {
    let doc = |args: &[&str]| -> Result<Value, String> {
        let (code, out, err) = phirg(args, None);
        ensure(code == 0, format!("{args:?} exited {code}: {err}"))?;
        serde_json::from_str(&out).map_err(|e| e.to_string())
    };

    let coeffs = doc(&["coeffs", "--l", "6", "--m0sq", "1", "--format", "json"])?;
    let s0 = coeffs["values"]["S"][0].as_f64().unwrap_or(f64::NAN);
    ensure(rel(s0, 2.40609e-4) < 1e-5, format!("S_0 = {s0}"))?;
    for key in ["alpha", "xi", "S", "Lambda"] {
        ensure(
            !coeffs["values"][key].is_null(),
            format!("coeffs lacks {key}"),
        )?;
    }

    let dist = doc(&[
        "validity",
        "--l",
        "6",
        "--lambda-s",
        "0.5",
        "--m0sq",
        "1",
        "--as-distance",
    ])?;
    let ivs = dist["values"]["intervals"]
        .as_array()
        .cloned()
        .unwrap_or_default();
    ensure(ivs.len() == 1, "validity: expected one interval")?;
    let (q, v) = (64.468_426_976_904_534_111, 0.238_452_145_516_939_483_09);
    let lo = ivs[0]["ln_lo"].as_f64().unwrap_or(f64::NAN);
    let hi = ivs[0]["ln_hi"].as_f64().unwrap_or(f64::NAN);
    ensure(
        rel(lo, -q - v) < 1e-9 && rel(hi, q - v) < 1e-9,
        format!("interval ({lo}, {hi})"),
    )?;

    let vertex = doc(&["vertex", "--l", "6", "--m0sq", "1", "--mu", "1"])?;
    ensure(
        vertex["values"]["f0_included"] == false,
        "vertex l=6 must omit f0",
    )?;
    ensure(
        vertex["values"]["constant_part"].is_number(),
        "vertex lacks constant part",
    )?;

    let sweep = [
        "coupling-flow",
        "--l",
        "6",
        "--lambda-s",
        "0.5",
        "--m0sq",
        "1",
        "--mu-start",
        "0.01",
        "--mu-end",
        "1e40",
        "--points",
        "300",
        "--format",
        "csv",
    ];
    let first = phirg(&sweep, Some("1"));
    ensure(first.0 == 0, "sweep failed")?;
    for threads in [None, Some("1"), Some("4")] {
        ensure(
            phirg(&sweep, threads) == first,
            format!("rerun differs ({threads:?} threads)"),
        )?;
    }

    let mut fuzzed = 0;
    run_props(
        300,
        proptest::collection::vec(0..TOKENS.len(), 0..9),
        |picks| {
            let mut argv = vec!["phirg".to_string()];
            argv.extend(picks.iter().map(|&i| TOKENS[i].to_string()));
            let out = run_cli(&argv);
            prop_assert!(
                [0, 2, 3].contains(&out.code),
                "exit {} for {:?}",
                out.code,
                argv
            );
            if out.code != 0 {
                let e: Value = serde_json::from_str(&out.stderr)
                    .map_err(|e| TestCaseError::fail(format!("stderr not JSON: {e}")))?;
                prop_assert!(e["error"]["kind"].is_string() && e["error"]["message"].is_string());
            }
            Ok(())
        },
    )?;
    fuzzed += 300;
    for args in [
        &["coeffs", "--l", "5"][..],
        &["--bogus"],
        &["validity", "--l", "4", "--lambda-s", "x"],
    ] {
        let (code, _, err) = phirg(args, None);
        ensure(code == 2, format!("{args:?} exited {code}"))?;
        ensure(
            serde_json::from_str::<Value>(&err).is_ok(),
            "usage error not JSON",
        )?;
    }
    Ok(format!(
        "3 examples, 4 identical reruns, {fuzzed} fuzzed argv"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("coefficient reproduction", coefficients),
        ("l=4 specialization chain", l4_chain),
        ("mass-flow oracle", mass_flow_oracle),
        ("coupling ODE consistency", coupling_consistency),
        ("validity boundaries", validity_boundaries),
        ("projection suite", projection_suite),
        ("dual-route finite parts", dual_route),
        ("first-order mu-stationarity", stationarity),
        ("series-algebra laws", series_laws),
        ("CLI contract", cli_contract),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
