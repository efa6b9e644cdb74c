//! Monte-Carlo experiment driver.
//!
//! Each trial derives its own RNG stream from the experiment seed,
//! generates a source block, encodes and transmits it once, then decodes
//! the identical received block under both schedules. Trials run
//! concurrently (rayon, behind the `parallel` feature) and are aggregated
//! in trial order, so results are bit-identical for any worker count.

mod config;
mod csv;

pub use config::{parse_rate, ExperimentConfig, ScheduleSelection, SourceSpec};
pub use csv::{
    curve_csv, format_sig6, stats_csv, trials_csv, write_curve_csv, write_stats_csv,
    write_trials_csv,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::code::{build_code, SparseCode};
use crate::decoder::{decode_pus, decode_sus, init_messages, DecodeResult};
use crate::gf::{bits_to_symbols, symbols_to_bits};
use crate::source::MarkovModel;
use crate::{channel, Error, Result};

/// One schedule's result on one trial.
#[derive(Debug, Clone)]
pub struct ScheduleOutcome {
    pub converged: bool,
    pub iterations: usize,
    /// Source-bit errors of the final estimate, converged or not.
    pub source_bit_errors: usize,
    /// The clipped estimate of [s; n].
    pub x_hat: Vec<u8>,
    /// Correct-source-bit fraction after each iteration.
    pub trace: Vec<f64>,
}

/// Per-trial record: iteration counts, convergence flags and bit errors
/// for whichever schedules ran.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub pus: Option<ScheduleOutcome>,
    pub sus: Option<ScheduleOutcome>,
}

/// Aggregated schedule-comparison statistics for one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentStats {
    pub channel: String,
    pub q: usize,
    pub source: String,
    pub noise: f64,
    pub trials: usize,
    /// Trials on which both schedules converged; iteration means and the
    /// paired ratio statistics are taken over exactly these.
    pub paired_trials: usize,
    pub mean_t_sus: f64,
    pub mean_t_pus: f64,
    /// <t_SUS> / <t_PUS>.
    pub ratio_of_means: f64,
    /// <t_SUS / t_PUS>, the mean of the per-trial paired ratio.
    pub mean_ratio: f64,
    /// Sample standard deviation of the per-trial ratio (0 for one trial).
    pub std_ratio: f64,
    /// Source-bit error rates over all trials, non-convergent included.
    pub ber_sus: f64,
    pub ber_pus: f64,
    pub nonconv_sus: usize,
    pub nonconv_pus: usize,
}

/// Everything an experiment produces.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub stats: ExperimentStats,
    pub trials: Vec<TrialRecord>,
}

/// SplitMix64: the fixed mixing function deriving per-trial seeds as
/// `mix(base_seed + (index + 1) * 0x9E3779B97F4A7C15)`.
pub fn mix_seed(base_seed: u64, trial_index: u64) -> u64 {
    let mut z = base_seed.wrapping_add((trial_index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs every trial of the configured experiment and returns the records
/// in trial order.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let code = build_code(cfg.q, cfg.n_symbols, cfg.rate, cfg.col_weight, cfg.base_seed)?;
    let model = cfg.source.model(cfg.q)?;
    map_trials(cfg, &code, &model)
}

#[cfg(feature = "parallel")]
fn map_trials(
    cfg: &ExperimentConfig,
    code: &SparseCode,
    model: &MarkovModel,
) -> Result<Vec<TrialRecord>> {
    if cfg.workers == 1 {
        return (0..cfg.trials).map(|t| run_trial(cfg, code, model, t)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("could not build worker pool: {e}")))?;
    pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, code, model, t))
            .collect()
    })
}

#[cfg(not(feature = "parallel"))]
fn map_trials(
    cfg: &ExperimentConfig,
    code: &SparseCode,
    model: &MarkovModel,
) -> Result<Vec<TrialRecord>> {
    (0..cfg.trials).map(|t| run_trial(cfg, code, model, t)).collect()
}

fn run_trial(
    cfg: &ExperimentConfig,
    code: &SparseCode,
    model: &MarkovModel,
    trial: usize,
) -> Result<TrialRecord> {
    let seed = mix_seed(cfg.base_seed, trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m_bits = code.tables().m();
    let s = model.generate(code.n(), &mut rng);
    let t = code.encode(&s)?;
    let t_bits = symbols_to_bits(&t, m_bits);
    let out = channel::transmit(&t_bits, cfg.channel, &mut rng);
    let r_syms = bits_to_symbols(&out.filled_bits, m_bits);
    let z = code.syndrome(&r_syms)?;
    let init = init_messages(code, &out, model);

    let outcome = |res: DecodeResult| ScheduleOutcome {
        converged: res.converged,
        iterations: res.iterations,
        source_bit_errors: bit_errors(&res.x_hat[..code.n()], &s),
        x_hat: res.x_hat,
        trace: res.correct_source_fraction,
    };
    let pus = cfg.schedules.runs_pus().then(|| {
        let mut msgs = init.clone();
        outcome(decode_pus(code, &z, &mut msgs, model, cfg.max_iters, &s))
    });
    let sus = cfg.schedules.runs_sus().then(|| {
        let mut msgs = init.clone();
        outcome(decode_sus(code, &z, &mut msgs, model, cfg.max_iters, &s))
    });
    Ok(TrialRecord {
        trial,
        seed,
        pus,
        sus,
    })
}

fn bit_errors(x: &[u8], truth: &[u8]) -> usize {
    x.iter()
        .zip(truth)
        .map(|(&a, &b)| (a ^ b).count_ones() as usize)
        .sum()
}

/// Runs the experiment and aggregates the summary statistics.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    let records = run_trials(cfg)?;
    let stats = aggregate(cfg, &records);
    Ok(ExperimentRun {
        stats,
        trials: records,
    })
}

fn aggregate(cfg: &ExperimentConfig, records: &[TrialRecord]) -> ExperimentStats {
    let n_bits = cfg.n_symbols as f64 * (cfg.q.trailing_zeros() as f64);
    let total_bits = n_bits * records.len() as f64;

    let mut paired: Vec<(f64, f64)> = Vec::new(); // (t_sus, t_pus)
    let mut err_sus = 0usize;
    let mut err_pus = 0usize;
    let mut nonconv_sus = 0usize;
    let mut nonconv_pus = 0usize;
    let mut own_sus: Vec<f64> = Vec::new();
    let mut own_pus: Vec<f64> = Vec::new();
    for rec in records {
        if let Some(p) = &rec.pus {
            err_pus += p.source_bit_errors;
            if p.converged {
                own_pus.push(p.iterations as f64);
            } else {
                nonconv_pus += 1;
            }
        }
        if let Some(s) = &rec.sus {
            err_sus += s.source_bit_errors;
            if s.converged {
                own_sus.push(s.iterations as f64);
            } else {
                nonconv_sus += 1;
            }
        }
        if let (Some(p), Some(s)) = (&rec.pus, &rec.sus) {
            if p.converged && s.converged {
                paired.push((s.iterations as f64, p.iterations as f64));
            }
        }
    }

    // With both schedules present, iteration means are taken over the
    // mutually convergent trials so that they pair with the ratio columns;
    // a single-schedule run falls back to its own convergent trials.
    let both = cfg.schedules == ScheduleSelection::Both;
    let mean = |v: &[f64]| {
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let (mean_t_sus, mean_t_pus) = if both {
        (
            mean(&paired.iter().map(|&(s, _)| s).collect::<Vec<_>>()),
            mean(&paired.iter().map(|&(_, p)| p).collect::<Vec<_>>()),
        )
    } else {
        (mean(&own_sus), mean(&own_pus))
    };
    let ratios: Vec<f64> = paired.iter().map(|&(s, p)| s / p).collect();
    let mean_ratio = mean(&ratios);
    let std_ratio = if ratios.len() > 1 {
        let m = mean_ratio;
        (ratios.iter().map(|r| (r - m) * (r - m)).sum::<f64>() / (ratios.len() - 1) as f64).sqrt()
    } else if ratios.len() == 1 {
        0.0
    } else {
        f64::NAN
    };

    ExperimentStats {
        channel: cfg.channel.kind_name().to_string(),
        q: cfg.q,
        source: cfg.source.name(),
        noise: cfg.channel.noise_param(),
        trials: records.len(),
        paired_trials: paired.len(),
        mean_t_sus,
        mean_t_pus,
        ratio_of_means: mean_t_sus / mean_t_pus,
        mean_ratio,
        std_ratio,
        ber_sus: if cfg.schedules.runs_sus() {
            err_sus as f64 / total_bits
        } else {
            f64::NAN
        },
        ber_pus: if cfg.schedules.runs_pus() {
            err_pus as f64 / total_bits
        } else {
            f64::NAN
        },
        nonconv_sus,
        nonconv_pus,
    }
}

/// Options for the correction-gain curve.
#[derive(Debug, Clone, Copy)]
pub struct DpCurveOptions {
    /// Width of the bins over the current correct fraction P.
    pub bin_width: f64,
    /// A bin is reported only when both schedules contribute at least this
    /// many samples.
    pub min_count: usize,
}

impl Default for DpCurveOptions {
    fn default() -> Self {
        DpCurveOptions {
            bin_width: 0.02,
            min_count: 30,
        }
    }
}

/// One reported bin of the correction-gain curve.
#[derive(Debug, Clone)]
pub struct DpBin {
    pub p_low: f64,
    pub p_high: f64,
    pub mean_dp_pus: f64,
    pub mean_dp_sus: f64,
    /// <dP_PUS> / <dP_SUS>.
    pub ratio: f64,
    pub n_pus: usize,
    pub n_sus: usize,
}

/// Correction gain dP binned by current correct fraction P, per schedule,
/// with the per-bin PUS/SUS ratio.
#[derive(Debug, Clone)]
pub struct DeltaPCurve {
    pub bin_width: f64,
    pub min_count: usize,
    /// Reported bins in ascending P order; bins below `min_count` on
    /// either schedule are omitted, not zero-filled.
    pub bins: Vec<DpBin>,
}

/// Runs the experiment and bins the per-iteration correction gains
/// dP(t) = P(t+1) - P(t) by the bin of P(t), separately per schedule.
pub fn run_dp_curve(cfg: &ExperimentConfig, opts: DpCurveOptions) -> Result<DeltaPCurve> {
    if cfg.schedules != ScheduleSelection::Both {
        return Err(Error::Config(
            "the correction-gain curve needs both schedules".into(),
        ));
    }
    if !(opts.bin_width > 0.0 && opts.bin_width <= 1.0) {
        return Err(Error::Config(format!(
            "bin width {} outside (0, 1]",
            opts.bin_width
        )));
    }
    let records = run_trials(cfg)?;
    let num_bins = (1.0 / opts.bin_width).ceil() as usize;
    let mut sum = vec![[0.0f64; 2]; num_bins];
    let mut count = vec![[0usize; 2]; num_bins];
    for rec in &records {
        for (slot, outcome) in [(0usize, &rec.pus), (1usize, &rec.sus)] {
            let Some(outcome) = outcome else { continue };
            for w in outcome.trace.windows(2) {
                let p = w[0];
                // P = 1 means the source block is already fully correct
                // (only noise symbols still settling): no correction gain
                // is possible from that state, so it is not part of the
                // gain curve.
                if p >= 1.0 {
                    continue;
                }
                let dp = w[1] - w[0];
                let bin = ((p / opts.bin_width) as usize).min(num_bins - 1);
                sum[bin][slot] += dp;
                count[bin][slot] += 1;
            }
        }
    }
    let mut bins = Vec::new();
    for b in 0..num_bins {
        let (n_pus, n_sus) = (count[b][0], count[b][1]);
        if n_pus < opts.min_count || n_sus < opts.min_count {
            continue;
        }
        let mean_dp_pus = sum[b][0] / n_pus as f64;
        let mean_dp_sus = sum[b][1] / n_sus as f64;
        bins.push(DpBin {
            p_low: b as f64 * opts.bin_width,
            p_high: (b + 1) as f64 * opts.bin_width,
            mean_dp_pus,
            mean_dp_sus,
            ratio: mean_dp_pus / mean_dp_sus,
            n_pus,
            n_sus,
        });
    }
    Ok(DeltaPCurve {
        bin_width: opts.bin_width,
        min_count: opts.min_count,
        bins,
    })
}

/// Bisects the channel noise level until the PUS iteration mean over
/// `probe_trials` trials lands inside `target`, between `lo` and `hi`.
/// Returns the noise level and the achieved mean. The mean is taken over
/// convergent trials; a level where more than a tenth of the probes fail
/// counts as beyond threshold.
pub fn calibrate_noise(
    cfg: &ExperimentConfig,
    lo: f64,
    hi: f64,
    target: (f64, f64),
    probe_trials: usize,
) -> Result<(f64, f64)> {
    assert!(lo < hi && target.0 < target.1);
    let mut probe_cfg = cfg.clone();
    probe_cfg.trials = probe_trials;
    probe_cfg.schedules = ScheduleSelection::Pus;
    let mut eval = |noise: f64| -> Result<f64> {
        probe_cfg.channel = cfg.channel.with_noise_param(noise);
        let run = run_experiment(&probe_cfg)?;
        if run.stats.nonconv_pus * 10 > probe_trials {
            return Ok(f64::INFINITY);
        }
        Ok(run.stats.mean_t_pus)
    };
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..24 {
        let mid = 0.5 * (lo + hi);
        let mean = eval(mid)?;
        if mean < target.0 {
            lo = mid;
        } else if mean > target.1 || mean.is_nan() {
            hi = mid;
        } else {
            return Ok((mid, mean));
        }
    }
    Err(Error::Config(format!(
        "noise calibration did not land in {target:?} between {lo} and {hi}"
    )))
}
