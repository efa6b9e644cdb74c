//! Finds, for each of the nine standard transmission settings, the channel
//! noise level at which the flooding schedule averages a few dozen
//! iterations on the desk-scale rate-1/3 code. Useful after changing the
//! construction, since thresholds move with it.
//!
//! Run with: cargo run --release --example calibrate [-- <lo> <hi>]
//! where (lo, hi) is the target window for the PUS iteration mean
//! (default 35..50).

use mn_ldpc::channel::ChannelSpec;
use mn_ldpc::harness::{calibrate_noise, ExperimentConfig, ScheduleSelection, SourceSpec};

fn main() {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("targets must be numbers"))
        .collect();
    let target = match args.as_slice() {
        [] => (35.0, 50.0),
        [lo, hi] if lo < hi => (*lo, *hi),
        _ => panic!("usage: calibrate [<lo> <hi>]"),
    };
    let settings: &[(usize, &str, ChannelSpec, f64, f64)] = &[
        (2, "iid", ChannelSpec::Bsc { flip_prob: 0.1 }, 0.02, 0.17),
        (4, "markov4s", ChannelSpec::Bsc { flip_prob: 0.1 }, 0.05, 0.27),
        (8, "markov2s", ChannelSpec::Bsc { flip_prob: 0.1 }, 0.05, 0.35),
        (2, "iid", ChannelSpec::Bec { erasure_prob: 0.3 }, 0.20, 0.66),
        (4, "markov4s", ChannelSpec::Bec { erasure_prob: 0.3 }, 0.30, 0.84),
        (8, "markov2s", ChannelSpec::Bec { erasure_prob: 0.3 }, 0.30, 0.94),
        (2, "iid", ChannelSpec::BiAwgn { sigma: 1.0 }, 0.40, 1.10),
        (4, "markov4s", ChannelSpec::BiAwgn { sigma: 1.0 }, 0.60, 1.70),
        (8, "markov2s", ChannelSpec::BiAwgn { sigma: 1.0 }, 0.80, 2.60),
    ];
    for &(q, source, channel, lo, hi) in settings {
        let m_bits = q.trailing_zeros() as usize;
        let cfg = ExperimentConfig {
            q,
            n_symbols: 1002 / m_bits,
            rate: (1, 3),
            col_weight: 3,
            channel,
            source: SourceSpec::Builtin(source.into()),
            schedules: ScheduleSelection::Both,
            trials: 300,
            max_iters: 200,
            base_seed: 1,
            workers: 0,
        };
        match calibrate_noise(&cfg, lo, hi, target, 60) {
            Ok((noise, mean)) => println!(
                "q={q:<2} source={source:<9} channel={:<7} noise={noise:.5}  <t_pus>~{mean:.1}",
                channel.kind_name()
            ),
            Err(e) => println!(
                "q={q:<2} source={source:<9} channel={:<7} calibration failed: {e}",
                channel.kind_name()
            ),
        }
    }
}
