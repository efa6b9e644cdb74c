//! Deterministic CSV emission.
//!
//! Floats are printed with six significant digits and a `.` decimal
//! separator; identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use super::{DeltaPCurve, ExperimentStats, TrialRecord};
use crate::{Error, Result};

/// Six-significant-digit fixed-point formatting (no exponent notation).
pub fn format_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (5 - exp).clamp(0, 17) as usize;
    format!("{x:.decimals$}")
}

fn opt_usize(v: Option<usize>) -> String {
    v.map_or_else(|| "nan".into(), |x| x.to_string())
}

fn opt_flag(v: Option<bool>) -> String {
    v.map_or_else(|| "nan".into(), |x| u8::from(x).to_string())
}

/// Renders the one-row statistics table.
pub fn stats_csv(stats: &ExperimentStats) -> String {
    let mut out = String::from(
        "channel,q,source,noise,trials,paired_trials,mean_t_sus,mean_t_pus,\
         ratio_of_means,mean_ratio,std_ratio,ber_sus,ber_pus,nonconv_sus,nonconv_pus\n",
    );
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        stats.channel,
        stats.q,
        stats.source,
        format_sig6(stats.noise),
        stats.trials,
        stats.paired_trials,
        format_sig6(stats.mean_t_sus),
        format_sig6(stats.mean_t_pus),
        format_sig6(stats.ratio_of_means),
        format_sig6(stats.mean_ratio),
        format_sig6(stats.std_ratio),
        format_sig6(stats.ber_sus),
        format_sig6(stats.ber_pus),
        stats.nonconv_sus,
        stats.nonconv_pus,
    );
    out
}

/// Renders the per-trial log, one row per trial in trial order.
pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("trial,seed,t_sus,t_pus,conv_sus,conv_pus,errs_sus,errs_pus\n");
    for rec in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            rec.trial,
            rec.seed,
            opt_usize(rec.sus.as_ref().map(|s| s.iterations)),
            opt_usize(rec.pus.as_ref().map(|p| p.iterations)),
            opt_flag(rec.sus.as_ref().map(|s| s.converged)),
            opt_flag(rec.pus.as_ref().map(|p| p.converged)),
            opt_usize(rec.sus.as_ref().map(|s| s.source_bit_errors)),
            opt_usize(rec.pus.as_ref().map(|p| p.source_bit_errors)),
        );
    }
    out
}

/// Renders the correction-gain curve, one row per reported bin, ascending.
pub fn curve_csv(curve: &DeltaPCurve) -> String {
    let mut out = String::from("p_bin_low,p_bin_high,mean_dp_pus,mean_dp_sus,ratio,n_pus,n_sus\n");
    for bin in &curve.bins {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            format_sig6(bin.p_low),
            format_sig6(bin.p_high),
            format_sig6(bin.mean_dp_pus),
            format_sig6(bin.mean_dp_sus),
            format_sig6(bin.ratio),
            bin.n_pus,
            bin.n_sus,
        );
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_stats_csv(stats: &ExperimentStats, path: &Path) -> Result<()> {
    write_file(path, &stats_csv(stats))
}

pub fn write_trials_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    write_file(path, &trials_csv(records))
}

pub fn write_curve_csv(curve: &DeltaPCurve, path: &Path) -> Result<()> {
    write_file(path, &curve_csv(curve))
}
