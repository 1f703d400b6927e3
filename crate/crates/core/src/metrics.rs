//! SINR and rate of a scheduled block. Inter-cell interference is treated as
//! Gaussian noise, and rates are in bits per channel use.

use std::f64::consts::LN_2;

use crate::channel::ChannelRealization;
use crate::scheduling::{DosParams, SchedulingDecision};

#[derive(Debug, Clone, PartialEq)]
pub struct CellMetrics {
    pub sinr: Vec<f64>,
    pub rate: Vec<f64>,
    pub sum_rate: f64,
}

impl CellMetrics {
    pub fn evaluate(ch: &ChannelRealization, decision: &SchedulingDecision, snr: f64) -> Self {
        let sinr: Vec<f64> = (0..ch.cells())
            .map(|i| sinr(ch, decision, i, snr))
            .collect();
        let rate: Vec<f64> = sinr.iter().map(|&s| per_cell_rate(s)).collect();
        let sum_rate = rate.iter().sum();
        Self {
            sinr,
            rate,
            sum_rate,
        }
    }

    pub fn mean_rate(&self) -> f64 {
        self.sum_rate / self.rate.len() as f64
    }
}

/// SINR at BS `bs` given one transmitting user per cell. `snr` is `P/N0`;
/// in flat mode link gains are `β²|h|²`, in geometric mode absolute gains.
pub fn sinr(ch: &ChannelRealization, decision: &SchedulingDecision, bs: usize, snr: f64) -> f64 {
    let signal = ch.link_gain(bs, bs, decision.selected[bs]) * snr;
    let interference: f64 = decision
        .selected
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != bs)
        .map(|(k, &u)| ch.link_gain(bs, k, u))
        .sum::<f64>()
        * snr;
    signal / (1.0 + interference)
}

pub fn per_cell_rate(sinr: f64) -> f64 {
    sinr.ln_1p() / LN_2
}

/// `K·log2(1 + η_tr·SNR / (1 + K·η_I))`: the sum rate guaranteed when every
/// cell schedules a user meeting both DOS criteria (SNR-normalised η_I).
pub fn sum_rate_lower_bound(params: &DosParams, cells: usize, snr: f64) -> f64 {
    let k = cells as f64;
    k * per_cell_rate(params.eta_tr * snr / (1.0 + k * params.eta_i))
}

/// Sum rate with every inter-cell interference term removed.
pub fn genie_rate(ch: &ChannelRealization, decision: &SchedulingDecision, snr: f64) -> f64 {
    decision
        .selected
        .iter()
        .enumerate()
        .map(|(i, &u)| per_cell_rate(ch.link_gain(i, i, u) * snr))
        .sum()
}
