//! Reflection, insertion and crosstalk figures of merit.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::CMat;

use super::sparams::SParameterBlock;

/// Magnitudes below this are clamped before taking decibels.
pub const DB_FLOOR: f64 = 1e-20;

pub fn to_db(mag: f64) -> f64 {
    20.0 * mag.max(DB_FLOOR).log10()
}

fn signals_of(s: &CMat) -> Result<usize> {
    if s.nrows() != s.ncols() || !s.nrows().is_multiple_of(2) {
        return Err(Error::Mismatch(format!("S-matrix is {:?}, expected 2N x 2N", s.shape())));
    }
    Ok(s.nrows() / 2)
}

/// `sqrt(sum_a |S(top_v, top_a)|^2 + |S(top_v, bottom_a)|^2)` over aggressors
/// `a != v`.
pub fn victim_total_from_matrix(s: &CMat, v: usize) -> Result<f64> {
    let n = signals_of(s)?;
    if v >= n {
        return Err(Error::param("victim", format!("signal {v} out of range for {n} signals")));
    }
    let total: f64 = (0..n).filter(|&a| a != v).map(|a| s[(v, a)].norm_sqr() + s[(v, n + a)].norm_sqr()).sum();
    Ok(total.sqrt())
}

pub fn victim_total_crosstalk(s: &SParameterBlock, f_hz: f64, v: usize) -> Result<f64> {
    victim_total_from_matrix(s.at(f_hz)?, v)
}

/// `(1 / (s (s-1))) sum_v |dB(X_v)|` from per-victim totals.
pub fn average_from_totals(totals: &[f64]) -> Result<f64> {
    let s = totals.len();
    if s < 2 {
        return Err(Error::param("signals", format!("average crosstalk needs at least two signals, got {s}")));
    }
    let sum: f64 = totals.iter().map(|&x| to_db(x).abs()).sum();
    Ok(sum / (s * (s - 1)) as f64)
}

pub fn average_crosstalk(s: &SParameterBlock, f_hz: f64) -> Result<f64> {
    let m = s.at(f_hz)?;
    let totals = (0..s.signal_count()).map(|v| victim_total_from_matrix(m, v)).collect::<Result<Vec<_>>>()?;
    average_from_totals(&totals)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairCoupling {
    pub victim: usize,
    pub aggressor: usize,
    pub db: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrosstalkReport {
    pub frequency_hz: f64,
    /// Linear magnitude per victim, in signal order.
    pub victim_totals: Vec<f64>,
    pub worst_victim: Option<usize>,
    pub worst_victim_db: f64,
    pub worst_next: Option<PairCoupling>,
    pub worst_fext: Option<PairCoupling>,
    /// Array average in dB; absent with fewer than two signals.
    pub average_db: Option<f64>,
}

pub fn crosstalk_report_from_matrix(s: &CMat, frequency_hz: f64) -> Result<CrosstalkReport> {
    let n = signals_of(s)?;
    let totals = (0..n).map(|v| victim_total_from_matrix(s, v)).collect::<Result<Vec<_>>>()?;
    let worst_victim = (0..n).filter(|_| n >= 2).max_by(|&a, &b| totals[a].total_cmp(&totals[b]));
    let mut worst_next: Option<PairCoupling> = None;
    let mut worst_fext: Option<PairCoupling> = None;
    for v in 0..n {
        for a in (0..n).filter(|&a| a != v) {
            let next = to_db(s[(v, a)].norm());
            let fext = to_db(s[(v, n + a)].norm());
            if worst_next.as_ref().is_none_or(|w| next > w.db) {
                worst_next = Some(PairCoupling { victim: v, aggressor: a, db: next });
            }
            if worst_fext.as_ref().is_none_or(|w| fext > w.db) {
                worst_fext = Some(PairCoupling { victim: v, aggressor: a, db: fext });
            }
        }
    }
    Ok(CrosstalkReport {
        frequency_hz,
        worst_victim_db: worst_victim.map_or(to_db(0.0), |v| to_db(totals[v])),
        average_db: if n >= 2 { Some(average_from_totals(&totals)?) } else { None },
        victim_totals: totals,
        worst_victim,
        worst_next,
        worst_fext,
    })
}

pub fn crosstalk_report(s: &SParameterBlock, f_hz: f64) -> Result<CrosstalkReport> {
    crosstalk_report_from_matrix(s.at(f_hz)?, f_hz)
}

/// `max_i dB|S(top_i, top_i)|`.
pub fn max_reflection_db(s: &CMat) -> Result<f64> {
    let n = signals_of(s)?;
    Ok((0..n).map(|i| to_db(s[(i, i)].norm())).fold(f64::NEG_INFINITY, f64::max))
}

/// Mean over signals of `dB|S(bottom_i, top_i)|`.
pub fn mean_insertion_db(s: &CMat) -> Result<f64> {
    let n = signals_of(s)?;
    if n == 0 {
        return Err(Error::param("signals", "no signal ports"));
    }
    Ok((0..n).map(|i| to_db(s[(n + i, i)].norm())).sum::<f64>() / n as f64)
}
