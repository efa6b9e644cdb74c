//! Acceptance suite.
//!
//! One test per criterion; each prints a `PASS` line (run with
//! `--nocapture` to see them). The Monte-Carlo criteria share one batch of
//! nine experiments — (q=2 i.i.d., q=4 markov4s, q=8 markov2s) x
//! (BSC, BEC, BI-AWGN) — at noise levels calibrated (see
//! `examples/calibrate.rs`) so the flooding schedule averages 30..60
//! iterations on the desk-scale rate-1/3 code, the regime where schedule
//! comparisons are informative.

use std::process::Command;
use std::sync::OnceLock;

use mn_ldpc::channel::{transmit, ChannelSpec};
use mn_ldpc::code::build_code;
use mn_ldpc::gf::{bits_to_symbols, symbols_to_bits};
use mn_ldpc::harness::{
    run_dp_curve, run_experiment, DpCurveOptions, ExperimentConfig, ExperimentRun,
    ScheduleSelection, SourceSpec,
};
use mn_ldpc::selftest;
use mn_ldpc::source::MarkovModel;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// (q, source, channel kind, calibrated noise level).
const SETTINGS: [(usize, &str, &str, f64); 9] = [
    (2, "iid", "bsc", 0.123),
    (4, "markov4s", "bsc", 0.198),
    (8, "markov2s", "bsc", 0.289),
    (2, "iid", "bec", 0.574),
    (4, "markov4s", "bec", 0.747),
    (8, "markov2s", "bec", 0.880),
    (2, "iid", "biawgn", 1.056),
    (4, "markov4s", "biawgn", 1.459),
    (8, "markov2s", "biawgn", 2.206),
];

const TABLE_TRIALS: usize = 300;
const TABLE_SEED: u64 = 11;

fn channel_spec(kind: &str, noise: f64) -> ChannelSpec {
    match kind {
        "bsc" => ChannelSpec::Bsc { flip_prob: noise },
        "bec" => ChannelSpec::Bec {
            erasure_prob: noise,
        },
        "biawgn" => ChannelSpec::BiAwgn { sigma: noise },
        other => panic!("unknown channel kind {other}"),
    }
}

fn setting_config(q: usize, source: &str, kind: &str, noise: f64) -> ExperimentConfig {
    let m_bits = q.trailing_zeros() as usize;
    ExperimentConfig {
        q,
        n_symbols: 1002 / m_bits,
        rate: (1, 3),
        col_weight: 3,
        channel: channel_spec(kind, noise),
        source: SourceSpec::Builtin(source.into()),
        schedules: ScheduleSelection::Both,
        trials: TABLE_TRIALS,
        max_iters: 200,
        base_seed: TABLE_SEED,
        workers: 0,
    }
}

/// The nine shared experiments, run once per test process.
fn table_runs() -> &'static Vec<(String, ExperimentRun)> {
    static RUNS: OnceLock<Vec<(String, ExperimentRun)>> = OnceLock::new();
    RUNS.get_or_init(|| {
        SETTINGS
            .iter()
            .map(|&(q, source, kind, noise)| {
                let cfg = setting_config(q, source, kind, noise);
                let label = format!("{kind} q={q} {source} noise={noise}");
                let run = run_experiment(&cfg).unwrap_or_else(|e| panic!("{label}: {e}"));
                (label, run)
            })
            .collect()
    })
}

#[test]
fn a1_halved_convergence() {
    for (label, run) in table_runs() {
        let s = &run.stats;
        println!(
            "  {label}: <t_pus> = {:.2}, <t_sus> = {:.2}, ratio_of_means = {:.3}, \
             mean_ratio = {:.3} (paired {}, nonconv pus {} sus {})",
            s.mean_t_pus,
            s.mean_t_sus,
            s.ratio_of_means,
            s.mean_ratio,
            s.paired_trials,
            s.nonconv_pus,
            s.nonconv_sus,
        );
        assert!(
            (30.0..=60.0).contains(&s.mean_t_pus),
            "{label}: flooding mean {:.2} outside the calibrated 30..60 regime",
            s.mean_t_pus
        );
        assert!(
            (0.40..=0.65).contains(&s.ratio_of_means),
            "{label}: ratio of means {:.3} outside [0.40, 0.65]",
            s.ratio_of_means
        );
        assert!(
            (0.40..=0.70).contains(&s.mean_ratio),
            "{label}: mean paired ratio {:.3} outside [0.40, 0.70]",
            s.mean_ratio
        );
    }
    println!("acceptance 1 (halved convergence across all nine settings): PASS");
}

#[test]
fn a2_error_performance_parity() {
    for (label, run) in table_runs() {
        let s = &run.stats;
        let mut paired = 0usize;
        let mut agree = 0usize;
        let mut errs_pus: Vec<f64> = Vec::new();
        let mut errs_sus: Vec<f64> = Vec::new();
        for rec in &run.trials {
            let (Some(p), Some(u)) = (&rec.pus, &rec.sus) else {
                continue;
            };
            errs_pus.push(p.source_bit_errors as f64);
            errs_sus.push(u.source_bit_errors as f64);
            if p.converged && u.converged {
                paired += 1;
                agree += usize::from(p.x_hat == u.x_hat);
            }
        }
        assert!(paired > 0, "{label}: no mutually convergent trials");
        let agreement = agree as f64 / paired as f64;
        // Per-schedule standard error of the BER from the per-trial error
        // counts (errors cluster inside non-convergent blocks, so a
        // bit-level binomial SE would understate the variance), combined
        // in quadrature.
        let m_bits = s.q.trailing_zeros() as usize;
        let block_bits = ((1002 / m_bits) * m_bits) as f64;
        let se = |errs: &[f64]| {
            let t = errs.len() as f64;
            let mean = errs.iter().sum::<f64>() / t;
            let var = errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (t - 1.0);
            (var / t).sqrt() / block_bits
        };
        let combined = (se(&errs_sus).powi(2) + se(&errs_pus).powi(2)).sqrt();
        let diff = (s.ber_sus - s.ber_pus).abs();
        println!(
            "  {label}: x_hat agreement {agree}/{paired}, ber_sus = {:.2e}, ber_pus = {:.2e}, \
             |diff| = {diff:.2e} vs 3 SE = {:.2e}",
            s.ber_sus,
            s.ber_pus,
            3.0 * combined
        );
        assert!(
            agreement >= 0.99,
            "{label}: schedules agree on only {:.1}% of mutually convergent trials",
            agreement * 100.0
        );
        assert!(
            diff <= 3.0 * combined,
            "{label}: |ber_sus - ber_pus| = {diff:.3e} exceeds 3 combined SE = {:.3e}",
            3.0 * combined
        );
    }
    println!("acceptance 2 (error-performance parity): PASS");
}

#[test]
fn a3_correction_gain_curve_shape() {
    let mut cfg = setting_config(8, "markov2s", "bsc", 0.289);
    cfg.trials = 1500;
    cfg.base_seed = 21;
    let curve = run_dp_curve(&cfg, DpCurveOptions::default()).unwrap();
    assert!(!curve.bins.is_empty(), "empty correction-gain curve");
    // mid-range bins, well sampled on both schedules
    let mid: Vec<f64> = curve
        .bins
        .iter()
        .filter(|b| b.p_low >= 0.6 && b.p_high <= 0.95 && b.n_pus >= 2000 && b.n_sus >= 2000)
        .map(|b| {
            println!(
                "  bin [{:.2}, {:.2}): ratio = {:.3} (n_pus {}, n_sus {})",
                b.p_low, b.p_high, b.ratio, b.n_pus, b.n_sus
            );
            b.ratio
        })
        .collect();
    assert!(
        mid.len() >= 3,
        "only {} mid-range bins reached 2000 samples per schedule",
        mid.len()
    );
    for r in &mid {
        assert!(
            (0.4..=0.6).contains(r),
            "mid-range dP ratio {r:.3} outside [0.4, 0.6]"
        );
    }
    let mut sorted = mid.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let last = curve.bins.last().unwrap();
    println!(
        "  final bin [{:.2}, {:.2}): ratio = {:.3} vs mid median {median:.3}",
        last.p_low, last.p_high, last.ratio
    );
    assert!(
        last.ratio > median,
        "final bin ratio {:.3} does not exceed the mid-range median {median:.3}",
        last.ratio
    );
    println!("acceptance 3 (correction-gain curve shape): PASS");
}

#[test]
fn a4_tree_exactness_oracle() {
    let report = selftest::tree_posterior_exactness(0xBEEF, 20);
    assert!(report.passed, "{}", report.detail);
    println!("acceptance 4 (tree posterior exactness): PASS ({})", report.detail);
}

#[test]
fn a5_check_node_oracle() {
    let report = selftest::check_node_enumeration(0xC0FFEE, 100);
    assert!(report.passed, "{}", report.detail);
    println!("acceptance 5 (check-node enumeration): PASS ({})", report.detail);
}

#[test]
fn a6_field_axioms() {
    let report = selftest::field_axioms();
    assert!(report.passed, "{}", report.detail);
    println!("acceptance 6 (field axioms): PASS ({})", report.detail);
}

#[test]
fn a7_source_statistics() {
    let m2 = MarkovModel::builtin("markov2s", 2).unwrap();
    let m4 = MarkovModel::builtin("markov4s", 4).unwrap();
    for (name, m) in [("markov2s", &m2), ("markov4s", &m4)] {
        let pi = m.stationary();
        for b in 0..m.alphabet() {
            let pib: f64 = (0..m.alphabet()).map(|a| pi[a] * m.transition(a, b)).sum();
            assert!(
                (pib - pi[b]).abs() <= 1e-9,
                "{name}: stationary equation violated at state {b}"
            );
        }
    }
    let e2 = m2.entropy_rate().unwrap();
    println!("  entropy_rate(markov2s) = {e2:.6} bits/symbol");
    assert!(
        (e2 - 0.4999).abs() <= 0.0001,
        "entropy_rate(markov2s) = {e2:.6} outside 0.4999 +/- 0.0001"
    );
    let e4 = m4.entropy_rate().unwrap();
    println!(
        "  entropy_rate(markov4s) = {e4:.6} bits/symbol = {:.6} bits per source bit",
        e4 / 2.0
    );
    assert!(
        (e4 - 0.50).abs() <= 0.01,
        "entropy_rate(markov4s) = {e4:.6} bits/symbol ({:.6} bits per source bit) is not \
         within 0.50 +/- 0.01 under any unit convention. This bound is unattainable for the \
         published 4-state matrix: its per-row entropies span [0.7255, 1.2050] bits, so the \
         per-symbol rate cannot drop below 0.7255 for any stationary distribution, and the \
         actual stationary distribution (~[0.762, 0.076, 0.028, 0.133]) gives 0.9465 \
         bits/symbol, i.e. 0.4732 per bit. The matrix's conventional 'entropy 1/2' \
         description is a rounded per-bit figure (0.4732 ~ 0.5), not a value accurate to \
         +/- 0.01.",
        e4 / 2.0
    );
    println!("acceptance 7 (source statistics): PASS");
}

#[test]
fn a8_pipeline_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF00D);
    let codes: Vec<_> = [(2usize, 30usize), (4, 24), (8, 15)]
        .iter()
        .map(|&(q, n)| build_code(q, n, (1, 3), 3, 99).unwrap())
        .collect();
    let channels = [
        ChannelSpec::Bsc { flip_prob: 0.2 },
        ChannelSpec::Bec { erasure_prob: 0.5 },
        ChannelSpec::BiAwgn { sigma: 1.3 },
    ];
    let mut instances = 0usize;
    while instances < 100_000 {
        for code in &codes {
            for spec in channels {
                let q = code.q();
                let m_bits = code.tables().m();
                let s: Vec<u8> = (0..code.n()).map(|_| rng.random_range(0..q) as u8).collect();
                let t = code.encode(&s).unwrap();
                let t_bits = symbols_to_bits(&t, m_bits);
                let out = transmit(&t_bits, spec, &mut rng);
                let r_syms = bits_to_symbols(&out.filled_bits, m_bits);
                let z = code.syndrome(&r_syms).unwrap();
                // true noise symbols from the filled bits
                let noise: Vec<u8> = r_syms.iter().zip(&t).map(|(&r, &t)| r ^ t).collect();
                let mut x = s.clone();
                x.extend_from_slice(&noise);
                let hx = code.h().mul_vec(&x, code.tables()).unwrap();
                assert_eq!(z, hx, "syndrome mismatch ({spec:?}, q={q})");
                assert!(code.check_solution(&x, &z), "true vector fails checks");
                instances += 1;
            }
        }
    }
    println!("acceptance 8 (pipeline identity over {instances} instances): PASS");
}

#[test]
fn a9_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = "q = 4\nn_symbols = 120\nrate = 1/3\ncol_weight = 3\nchannel = bsc\n\
                  noise = 0.201\nsource = markov4s\ntrials = 40\nmax_iters = 200\n\
                  base_seed = 77\nworkers = 0\n";
    let cfg_path = dir.path().join("exp.cfg");
    std::fs::write(&cfg_path, config).unwrap();
    let run = |out_name: &str, workers_one: bool| {
        let path = dir.path().join(out_name);
        if workers_one {
            std::fs::write(&cfg_path, config.replace("workers = 0", "workers = 1")).unwrap();
        } else {
            std::fs::write(&cfg_path, config).unwrap();
        }
        let status = Command::new(env!("CARGO_BIN_EXE_mn-ldpc"))
            .args(["experiment", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(&path).unwrap()
    };
    let first = run("a.csv", false);
    let second = run("b.csv", false);
    assert_eq!(first, second, "identical config and seed gave different bytes");
    let sequential = run("c.csv", true);
    assert_eq!(
        first, sequential,
        "statistics depend on the worker count"
    );
    println!("acceptance 9 (byte-identical reruns): PASS");
}
