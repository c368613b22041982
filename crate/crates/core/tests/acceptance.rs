//! Acceptance suite: one numbered criterion per check, each printing a single
//! `PASS` or `FAIL` line. Pass substrings as arguments to run a subset, e.g.
//! `cargo test --test acceptance -- 4 8`.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qpsk_receiver::bayes::{initial_state, InferenceModel};
use qpsk_receiver::bounds::{gram_eigenvalues, gram_first_row, helstrom_qpsk, sql_heterodyne};
use qpsk_receiver::delay::{
    off_prob_swing_analytic, off_prob_swing_discrete, split_coefficients, DelayParams,
};
use qpsk_receiver::enumerate::{enumerate_error_probability, EnumerationResult};
use qpsk_receiver::monte_carlo::{estimate_error, estimate_error_with_threads, DelayTiming};
use qpsk_receiver::{ChannelModel, Outcome, ReceiverConfig, RngSpec, SimulationResult};

const SEED: u64 = 20_110_613;
const TRIALS: u64 = 1_000_000;

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn exact(cfg: &ReceiverConfig) -> EnumerationResult {
    enumerate_error_probability(
        &cfg.inference_model().unwrap(),
        Some(&cfg.truth_model().unwrap()),
    )
    .unwrap()
}

fn simulate(cfg: &ReceiverConfig, trials: u64) -> SimulationResult {
    estimate_error(cfg, trials, &RngSpec::new(SEED)).unwrap()
}

fn ideal_pe(alpha_sq: f64, stages: usize) -> f64 {
    exact(&ReceiverConfig::ideal(alpha_sq, stages)).error_prob
}

fn combined(a: &SimulationResult, b: &SimulationResult) -> f64 {
    a.stderr.hypot(b.stderr)
}

fn zero_signal() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for cfg in [
        ReceiverConfig::ideal(0.0, 10),
        ReceiverConfig::experimental(0.0, 10),
    ] {
        let e = exact(&cfg).error_prob;
        let mc = simulate(&cfg, 10_000);
        ok &= e == 0.75 && (mc.error_prob - 0.75).abs() <= 3.0 * mc.stderr;
        notes.push(format!("enum {e} mc {}", mc.error_prob));
    }
    let sql = sql_heterodyne(0.0);
    let hel = helstrom_qpsk(0.0).unwrap();
    ok &= sql == 0.75 && (hel - 0.75).abs() <= 1e-15;
    verdict(
        ok,
        format!("{}; sql {sql}; helstrom {hel}", notes.join("; ")),
    )
}

fn sql_beat_at_three_stages() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for a in [0.5, 1.0, 2.0, 5.0] {
        let pe = ideal_pe(a, 3);
        let sql = sql_heterodyne(a);
        ok &= pe < sql;
        notes.push(format!(
            "a2={a}: {pe:.6} {} {sql:.6}",
            if pe < sql { "<" } else { ">=" }
        ));
    }
    verdict(ok, notes.join("; "))
}

fn stage_ordering() -> Verdict {
    const SLACK: f64 = 1e-10;
    let mut ok = true;
    let mut notes = Vec::new();
    for a in [0.5, 1.0, 2.0, 4.0] {
        let chain = [
            ("helstrom", helstrom_qpsk(a).unwrap()),
            ("M10", ideal_pe(a, 10)),
            ("M4", ideal_pe(a, 4)),
            ("M3", ideal_pe(a, 3)),
            ("sql", sql_heterodyne(a)),
        ];
        let broken: Vec<String> = chain
            .windows(2)
            .filter(|w| w[0].1 > w[1].1 + SLACK)
            .map(|w| format!("{}>{}", w[0].0, w[1].0))
            .collect();
        ok &= broken.is_empty();
        let values: Vec<String> = chain.iter().map(|(_, v)| format!("{v:.5}")).collect();
        notes.push(format!(
            "a2={a}: [{}]{}",
            values.join(" "),
            if broken.is_empty() {
                String::new()
            } else {
                format!(" broken {}", broken.join(","))
            }
        ));
    }
    verdict(ok, notes.join("; "))
}

fn oracle_equivalence() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut max_stderr: f64 = 0.0;
    let mut failures = Vec::new();
    for m in [3, 4, 10] {
        for a in [0.25, 1.0, 4.0, 9.0] {
            let cfg = ReceiverConfig::experimental(a, m);
            let e = exact(&cfg).error_prob;
            let mc = simulate(&cfg, TRIALS);
            let z = (mc.error_prob - e).abs() / mc.stderr;
            worst = worst.max(z);
            max_stderr = max_stderr.max(mc.stderr);
            if z > 3.0 {
                failures.push(format!("M={m} a2={a} z={z:.2}"));
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "12 points, max |z| {worst:.2}, max stderr {max_stderr:.2e}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!(", over 3: {}", failures.join(" "))
            }
        ),
    )
}

fn experimental_sql_violation() -> Verdict {
    let mut below = Vec::new();
    for k in 2..=10 {
        let a = k as f64;
        let mc = simulate(&ReceiverConfig::experimental(a, 10), TRIALS);
        let sql = sql_heterodyne(a);
        if mc.error_prob < sql {
            below.push(format!("{a}({:.4}<{sql:.4})", mc.error_prob));
        }
    }
    verdict(
        below.len() >= 3,
        format!("{} of 9 points below SQL: {}", below.len(), below.join(" ")),
    )
}

fn four_stage_floor() -> Verdict {
    let grid: Vec<f64> = (1..=48).map(|k| k as f64 * 0.25).collect();
    let pe: Vec<f64> = grid
        .iter()
        .map(|&a| exact(&ReceiverConfig::experimental(a, 4)).error_prob)
        .collect();
    let (i_min, p_min) = pe
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let last = *pe.last().unwrap();
    let interior = i_min > 0 && i_min + 1 < pe.len();
    verdict(
        interior && last > 0.8 * p_min,
        format!(
            "min {p_min:.5} at a2={}, P(12) {last:.5} = {:.3} x min",
            grid[i_min],
            last / p_min
        ),
    )
}

fn break_even_efficiency() -> Verdict {
    const ETA_T: f64 = 0.90;
    let alphas: Vec<f64> = (1..=240).map(|k| k as f64 * 0.05).collect();
    let margin = |eta_spd: f64| -> f64 {
        alphas
            .iter()
            .map(|&a| {
                let cfg = ReceiverConfig {
                    eta_total: ETA_T * eta_spd,
                    ..ReceiverConfig::experimental(a, 10)
                };
                exact(&cfg).error_prob - sql_heterodyne(a)
            })
            .fold(f64::INFINITY, f64::min)
    };
    let found = (0..=100)
        .map(|k| 0.50 + k as f64 * 0.005)
        .find(|&eta| margin(eta) < 0.0);
    match found {
        Some(eta) => verdict(
            (eta - 0.65).abs() <= 0.03 + 1e-12,
            format!("break-even eta_spd {eta:.3} (eta_total {:.4})", ETA_T * eta),
        ),
        None => verdict(false, "no efficiency up to 1.0 beats the SQL"),
    }
}

fn delay_coincidence() -> Verdict {
    let mut max_diff: f64 = 0.0;
    for dt in [1.0, 1.1, 1.5, 2.0, 3.0] {
        for m in [3, 4, 10, 20] {
            for a in [0.5, 3.3, 9.4, 12.0] {
                let plain = ReceiverConfig {
                    delta_t_us: dt,
                    ..ReceiverConfig::experimental(a, m)
                };
                let delayed = ReceiverConfig {
                    delay: Some(DelayTiming::default()),
                    ..plain
                };
                let (t0, t1) = (plain.truth_model().unwrap(), delayed.truth_model().unwrap());
                for s in 0..4 {
                    for prev in 0..4 {
                        for target in 0..4 {
                            let d = (t0.bin_off_probability(s, prev, target).unwrap()
                                - t1.bin_off_probability(s, prev, target).unwrap())
                            .abs();
                            max_diff = max_diff.max(d);
                        }
                    }
                }
            }
        }
    }
    let with_delay = |a: f64, dt: f64| {
        simulate(
            &ReceiverConfig {
                delta_t_us: dt,
                delay: Some(DelayTiming::default()),
                ..ReceiverConfig::experimental(a, 10)
            },
            TRIALS,
        )
    };
    let plain_94 = simulate(&ReceiverConfig::experimental(9.4, 10), TRIALS);
    let (hi0, hi1) = (with_delay(9.4, 0.0), with_delay(9.4, 1.1));
    let (lo0, lo1) = (with_delay(3.3, 0.0), with_delay(3.3, 1.1));
    let z_hi = (hi0.error_prob - hi1.error_prob) / combined(&hi0, &hi1);
    let gap_hi = hi0.error_prob - hi1.error_prob;
    let gap_lo = lo0.error_prob - lo1.error_prob;
    let identical = plain_94.error_prob == hi1.error_prob;
    verdict(
        max_diff <= 1e-12 && identical && z_hi > 5.0 && gap_lo < gap_hi,
        format!(
            "per-bin max diff {max_diff:.1e}; a2=9.4: {:.5} (dt=0) vs {:.5} (dt=1.1), z={z_hi:.1}; \
             a2=3.3: {:.5} vs {:.5}; delay-free sweep identical: {identical}",
            hi0.error_prob, hi1.error_prob, lo0.error_prob, lo1.error_prob
        ),
    )
}

fn discard_tradeoff() -> Verdict {
    let stages: Vec<usize> = (3..=30).collect();
    let curve = |discard_loss: bool| -> Vec<SimulationResult> {
        stages
            .iter()
            .map(|&m| {
                simulate(
                    &ReceiverConfig {
                        discard_loss,
                        ..ReceiverConfig::experimental(4.0, m)
                    },
                    TRIALS,
                )
            })
            .collect()
    };
    let with = curve(true);
    let without = curve(false);
    let (i_min, best) = with
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.error_prob.total_cmp(&b.1.error_prob))
        .unwrap();
    let tail = with.last().unwrap();
    let rise = (tail.error_prob - best.error_prob) / combined(tail, best);
    let rises = i_min + 1 < with.len() && rise > 3.0;
    let violations: Vec<String> = without
        .windows(2)
        .zip(&stages)
        .filter(|(w, _)| w[1].error_prob > w[0].error_prob + 3.0 * combined(&w[0], &w[1]))
        .map(|(_, m)| format!("{m}->{}", m + 1))
        .collect();
    verdict(
        rises && violations.is_empty(),
        format!(
            "with discard: min {:.5} at M={}, P(30) {:.5} ({rise:.1} sigma above); \
             without: P(3) {:.5} -> P(30) {:.5}, rises beyond 3 sigma: {}",
            best.error_prob,
            stages[i_min],
            tail.error_prob,
            without[0].error_prob,
            without.last().unwrap().error_prob,
            if violations.is_empty() {
                "none".to_owned()
            } else {
                violations.join(" ")
            }
        ),
    )
}

fn swing_convergence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let sc = split_coefficients(&DelayParams::default()).unwrap();
    let ch = ChannelModel::new(0.65 * (1.0 - 9.0 * 1.1 / 200.0), 0.996).unwrap();
    let mut worst: f64 = 0.0;
    let mut ratios = Vec::new();
    for _ in 0..100 {
        let m = rng.random_range(0..4);
        let prev = rng.random_range(0..4);
        let new = (prev + rng.random_range(1..4)) % 4;
        let gamma_sq = rng.random_range(0.0..1.2);
        let analytic = off_prob_swing_analytic(m, prev, new, gamma_sq, &sc, &ch);
        let err = |l| {
            (off_prob_swing_discrete(m, prev, new, gamma_sq, &sc, &ch, l).unwrap() - analytic).abs()
        };
        let (e2, e4) = (err(100), err(10_000));
        worst = worst.max(e4);
        if e4 > 1e-13 {
            ratios.push(e2 / e4);
        }
    }
    ratios.sort_by(f64::total_cmp);
    let (lo, hi) = (ratios[0], ratios[ratios.len() - 1]);
    let one_over_l = lo > 50.0 && hi < 200.0;
    verdict(
        worst <= 1e-6 && one_over_l,
        format!(
            "max |discrete(1e4) - analytic| {worst:.2e} (bound 1e-6); err(1e2)/err(1e4) in [{lo:.1}, {hi:.1}] over {} draws",
            ratios.len()
        ),
    )
}

fn property_suites() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut parts = Vec::new();
    let mut all = true;
    let mut record = |name: &str, ok: bool, note: String| {
        all &= ok;
        parts.push(format!(
            "{name} {} ({note})",
            if ok { "ok" } else { "FAILED" }
        ));
    };

    let mut norm_dev: f64 = 0.0;
    for _ in 0..500 {
        let stages = rng.random_range(1..40);
        let model = InferenceModel::new(
            rng.random_range(0.0..12.0),
            stages,
            ChannelModel::new(rng.random_range(0.05..1.0), rng.random_range(0.9..1.0)).unwrap(),
            rng.random_range(0.0..0.05),
        )
        .unwrap();
        let table = model.likelihood_table();
        let mut state = initial_state();
        for _ in 0..stages {
            let e = if rng.random_bool(0.5) {
                Outcome::On
            } else {
                Outcome::Off
            };
            let Ok(next) = state.update(e, &table) else {
                break;
            };
            state = next;
            norm_dev = norm_dev.max((state.posterior.probs().iter().sum::<f64>() - 1.0).abs());
        }
    }
    record(
        "normalisation",
        norm_dev <= 1e-10,
        format!("max dev {norm_dev:.1e}"),
    );

    let mut mass_dev: f64 = 0.0;
    let mut sym_dev: f64 = 0.0;
    for m in [3, 4, 10] {
        for a in [1.0, 4.0] {
            for cfg in [
                ReceiverConfig::ideal(a, m),
                ReceiverConfig::experimental(a, m),
            ] {
                let r = exact(&cfg);
                for mass in r.branch_mass {
                    mass_dev = mass_dev.max((mass - 1.0).abs());
                }
                let hi = r.per_symbol_error.iter().copied().fold(f64::MIN, f64::max);
                let lo = r.per_symbol_error.iter().copied().fold(f64::MAX, f64::min);
                sym_dev = sym_dev.max(hi - lo);
            }
        }
    }
    record(
        "branch completeness",
        mass_dev <= 1e-10,
        format!("max dev {mass_dev:.1e}"),
    );
    record(
        "per-symbol symmetry",
        sym_dev <= 1e-10,
        format!("max spread {sym_dev:.3e}"),
    );

    let hel_ok = (0..=240).all(|k| {
        let a = k as f64 * 0.05;
        helstrom_qpsk(a).unwrap() <= sql_heterodyne(a)
    });
    record("helstrom<=sql", hel_ok, "a2 in [0,12]".into());

    let mut srm_dev: f64 = 0.0;
    for k in 0..=48 {
        let a = k as f64 * 0.25;
        let row = gram_first_row(a);
        let g = Matrix4::from_fn(|i, j| row[(j + 4 - i) % 4]);
        let mut dense: Vec<f64> = g
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|l| l.max(0.0))
            .collect();
        let mut circ = gram_eigenvalues(a).unwrap().to_vec();
        dense.sort_by(f64::total_cmp);
        circ.sort_by(f64::total_cmp);
        for (d, c) in dense.iter().zip(&circ) {
            srm_dev = srm_dev.max((d - c).abs());
        }
        let s: f64 = dense.iter().map(|l| l.sqrt()).sum();
        srm_dev = srm_dev.max((1.0 - s * s / 16.0 - helstrom_qpsk(a).unwrap()).abs());
    }
    record(
        "srm vs eigensolver",
        srm_dev <= 1e-10,
        format!("max dev {srm_dev:.1e}"),
    );

    let cfg = ReceiverConfig::experimental(3.0, 10);
    let spec = RngSpec::new(SEED);
    let base = estimate_error_with_threads(&cfg, 100_003, &spec, 1).unwrap();
    let same = [2, 4, 7]
        .iter()
        .all(|&n| estimate_error_with_threads(&cfg, 100_003, &spec, n).unwrap() == base);
    record("worker determinism", same, "1, 2, 4, 7 workers".into());

    verdict(all, parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 11] = [
        ("zero-signal limit", zero_signal),
        ("SQL beat at M=3", sql_beat_at_three_stages),
        ("stage ordering", stage_ordering),
        ("Monte Carlo vs enumeration", oracle_equivalence),
        ("experimental SQL violation", experimental_sql_violation),
        ("M=4 error floor", four_stage_floor),
        ("break-even efficiency", break_even_efficiency),
        ("delay coincidence", delay_coincidence),
        ("discard-loss trade-off", discard_tradeoff),
        ("swing-limit convergence", swing_convergence),
        ("property suites", property_suites),
    ];
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for (i, (name, _)) in criteria.iter().enumerate() {
            println!("{} {name}: test", i + 1);
        }
        return ExitCode::SUCCESS;
    }
    let filters: Vec<String> = args.into_iter().filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filters.is_empty()
            && !filters
                .iter()
                .any(|f| *f == id || name.contains(f.as_str()))
        {
            continue;
        }
        let start = Instant::now();
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} {id:>2} {name} [{:.1}s]: {}",
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    } else {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    }
}
