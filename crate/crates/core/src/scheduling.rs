//! User selection: distributed opportunistic scheduling (DOS) and the
//! baselines it is compared against.
//!
//! DOS lets every user test two local criteria before a block starts:
//! its desired-link gain must reach `eta_tr`, and the interference it would
//! generate at the other base stations must stay below `eta_i`. Each BS then
//! grants one of the users that requested transmission uniformly at random.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{config_err, Result};

/// Reference level against which generated interference is compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterferenceNorm {
    /// `Σ β²|h|² · SNR`: interference relative to the noise floor of the victim BS.
    #[default]
    Snr,
    /// `Σ β²|h|²`: the raw cross-link power gain, independent of the operating SNR.
    Unit,
}

/// Logarithm used when the desired-gain threshold is derived as `ε·log N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogBase {
    /// `Pr{|h|² ≥ ε ln N} = N^-ε` for unit-mean exponential gains.
    #[default]
    Natural,
    Base2,
}

pub fn eta_tr_from_epsilon(epsilon: f64, users: usize, base: LogBase) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(config_err(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if users == 0 {
        return Err(config_err("number of users per cell N must be at least 1"));
    }
    let n = users as f64;
    Ok(epsilon
        * match base {
            LogBase::Natural => n.ln(),
            LogBase::Base2 => n.log2(),
        })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DosParams {
    pub eta_tr: f64,
    pub eta_i: f64,
    pub norm: InterferenceNorm,
}

impl DosParams {
    pub fn new(eta_tr: f64, eta_i: f64, norm: InterferenceNorm) -> Result<Self> {
        if !(eta_tr >= 0.0 && eta_tr.is_finite()) {
            return Err(config_err(format!(
                "eta_tr must be finite and >= 0, got {eta_tr}"
            )));
        }
        // +inf is allowed and disables the interference criterion
        if !(eta_i > 0.0) {
            return Err(config_err(format!("eta_I must be > 0, got {eta_i}")));
        }
        Ok(Self {
            eta_tr,
            eta_i,
            norm,
        })
    }

    pub fn from_epsilon(
        epsilon: f64,
        users: usize,
        eta_i: f64,
        base: LogBase,
        norm: InterferenceNorm,
    ) -> Result<Self> {
        Self::new(eta_tr_from_epsilon(epsilon, users, base)?, eta_i, norm)
    }

    /// Factor turning a raw cross-gain sum into the quantity compared with `eta_i`.
    pub fn interference_scale(&self, snr: f64) -> f64 {
        match self.norm {
            InterferenceNorm::Snr => snr,
            InterferenceNorm::Unit => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserQualification {
    pub desired_gain: f64,
    pub generated_interference: f64,
    pub passes_signal: bool,
    pub passes_interference: bool,
}

impl UserQualification {
    pub fn qualified(&self) -> bool {
        self.passes_signal && self.passes_interference
    }
}

/// Outcome of every user's self-test for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct QualificationReport {
    cells: usize,
    users: usize,
    entries: Vec<UserQualification>,
}

impl QualificationReport {
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn get(&self, cell: usize, user: usize) -> &UserQualification {
        &self.entries[cell * self.users + user]
    }

    pub fn cell(&self, cell: usize) -> &[UserQualification] {
        &self.entries[cell * self.users..(cell + 1) * self.users]
    }

    pub fn qualifier_count(&self, cell: usize) -> usize {
        self.cell(cell).iter().filter(|q| q.qualified()).count()
    }

    pub fn interference_passers(&self, cell: usize) -> usize {
        self.cell(cell)
            .iter()
            .filter(|q| q.passes_interference)
            .count()
    }
}

/// One selected user per cell plus how the selection came about.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulingDecision {
    pub selected: Vec<usize>,
    /// DOS/DOS-max: no user met the criteria and the fallback rule picked one.
    pub fallback_used: Vec<bool>,
    /// DOS: users passing both criteria. DOS-max: users passing the
    /// interference criterion. Zero for the baselines.
    pub qualifier_count: Vec<usize>,
}

impl SchedulingDecision {
    fn baseline(selected: Vec<usize>) -> Self {
        let cells = selected.len();
        Self {
            selected,
            fallback_used: vec![false; cells],
            qualifier_count: vec![0; cells],
        }
    }

    pub fn cells(&self) -> usize {
        self.selected.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    Dos,
    DosMax,
    #[serde(rename = "maxsnr")]
    MaxSnr,
    #[serde(rename = "mingi")]
    MinGi,
    Random,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 5] = [
        SchedulerKind::Dos,
        SchedulerKind::DosMax,
        SchedulerKind::MaxSnr,
        SchedulerKind::MinGi,
        SchedulerKind::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchedulerKind::Dos => "dos",
            SchedulerKind::DosMax => "dos-max",
            SchedulerKind::MaxSnr => "maxsnr",
            SchedulerKind::MinGi => "mingi",
            SchedulerKind::Random => "random",
        }
    }

    pub fn uses_eta_i(self) -> bool {
        matches!(self, SchedulerKind::Dos | SchedulerKind::DosMax)
    }

    pub fn uses_eta_tr(self) -> bool {
        self == SchedulerKind::Dos
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchedulerKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        SchedulerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                config_err(format!(
                    "unknown scheduler {s:?} (expected dos, dos-max, maxsnr, mingi or random)"
                ))
            })
    }
}

fn build_report(
    ch: &ChannelRealization,
    params: &DosParams,
    snr: f64,
    gain_factor: f64,
) -> QualificationReport {
    let scale = params.interference_scale(snr) * gain_factor;
    let (cells, users) = (ch.cells(), ch.users());
    let mut entries = Vec::with_capacity(cells * users);
    for k in 0..cells {
        for (&d, &x) in ch.desired_gains(k).iter().zip(ch.cross_gain_sums(k)) {
            let desired_gain = d * gain_factor;
            let generated_interference = x * scale;
            entries.push(UserQualification {
                desired_gain,
                generated_interference,
                passes_signal: desired_gain >= params.eta_tr,
                passes_interference: generated_interference <= params.eta_i,
            });
        }
    }
    QualificationReport {
        cells,
        users,
        entries,
    }
}

/// Evaluates both DOS criteria for every user. `snr` is the linear `P/N0`.
pub fn qualify(ch: &ChannelRealization, params: &DosParams, snr: f64) -> QualificationReport {
    build_report(ch, params, snr, 1.0)
}

/// Criteria on squared vector norms over a subchannel of `subcarriers`
/// carriers whose per-carrier responses are identical, so `‖h‖² = N_sub·|h|²`.
pub fn qualify_multicarrier(
    ch: &ChannelRealization,
    subcarriers: usize,
    params: &DosParams,
    snr: f64,
) -> Result<QualificationReport> {
    if subcarriers < 1 {
        return Err(config_err("a subchannel needs at least one subcarrier"));
    }
    Ok(build_report(ch, params, snr, subcarriers as f64))
}

/// Lowest index wins ties.
fn argmax_by<I: Iterator<Item = (usize, f64)>>(it: I) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (u, v) in it {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((u, v));
        }
    }
    best.map(|(u, _)| u)
}

fn argmin_by<I: Iterator<Item = (usize, f64)>>(it: I) -> Option<usize> {
    argmax_by(it.map(|(u, v)| (u, -v)))
}

fn fallback(cell: &[UserQualification]) -> usize {
    argmax_by(
        cell.iter()
            .enumerate()
            .filter(|(_, q)| q.passes_interference)
            .map(|(u, q)| (u, q.desired_gain)),
    )
    .or_else(|| {
        argmin_by(
            cell.iter()
                .enumerate()
                .map(|(u, q)| (u, q.generated_interference)),
        )
    })
    .expect("a cell has at least one user")
}

/// Random grant among users passing both criteria. When nobody qualifies the
/// BS takes the strongest user among those passing the interference test,
/// or the minimum-interference user if that set is empty too.
pub fn schedule_dos<R: Rng + ?Sized>(
    report: &QualificationReport,
    rng: &mut R,
) -> SchedulingDecision {
    let mut selected = Vec::with_capacity(report.cells);
    let mut fallback_used = Vec::with_capacity(report.cells);
    let mut qualifier_count = Vec::with_capacity(report.cells);
    for k in 0..report.cells {
        let cell = report.cell(k);
        let m = cell.iter().filter(|q| q.qualified()).count();
        qualifier_count.push(m);
        if m > 0 {
            let pick = rng.random_range(0..m);
            let u = cell
                .iter()
                .enumerate()
                .filter(|(_, q)| q.qualified())
                .nth(pick)
                .map(|(u, _)| u)
                .expect("pick < qualifier count");
            selected.push(u);
            fallback_used.push(false);
        } else {
            selected.push(fallback(cell));
            fallback_used.push(true);
        }
    }
    SchedulingDecision {
        selected,
        fallback_used,
        qualifier_count,
    }
}

/// Strongest desired link among users passing the interference criterion;
/// `eta_tr` is ignored.
pub fn schedule_dos_max(report: &QualificationReport) -> SchedulingDecision {
    let mut selected = Vec::with_capacity(report.cells);
    let mut fallback_used = Vec::with_capacity(report.cells);
    let mut qualifier_count = Vec::with_capacity(report.cells);
    for k in 0..report.cells {
        let cell = report.cell(k);
        qualifier_count.push(cell.iter().filter(|q| q.passes_interference).count());
        let best = argmax_by(
            cell.iter()
                .enumerate()
                .filter(|(_, q)| q.passes_interference)
                .map(|(u, q)| (u, q.desired_gain)),
        );
        match best {
            Some(u) => {
                selected.push(u);
                fallback_used.push(false);
            }
            None => {
                selected.push(fallback(cell));
                fallback_used.push(true);
            }
        }
    }
    SchedulingDecision {
        selected,
        fallback_used,
        qualifier_count,
    }
}

pub fn schedule_maxsnr(ch: &ChannelRealization) -> SchedulingDecision {
    SchedulingDecision::baseline(
        (0..ch.cells())
            .map(|k| argmax_by(ch.desired_gains(k).iter().copied().enumerate()).unwrap())
            .collect(),
    )
}

pub fn schedule_mingi(ch: &ChannelRealization) -> SchedulingDecision {
    SchedulingDecision::baseline(
        (0..ch.cells())
            .map(|k| argmin_by(ch.cross_gain_sums(k).iter().copied().enumerate()).unwrap())
            .collect(),
    )
}

pub fn schedule_random<R: Rng + ?Sized>(
    cells: usize,
    users: usize,
    rng: &mut R,
) -> SchedulingDecision {
    SchedulingDecision::baseline((0..cells).map(|_| rng.random_range(0..users)).collect())
}

/// Runs scheduler `kind` on one block. `params` is only consulted by DOS and DOS-max.
pub fn schedule<R: Rng + ?Sized>(
    kind: SchedulerKind,
    ch: &ChannelRealization,
    params: &DosParams,
    snr: f64,
    rng: &mut R,
) -> SchedulingDecision {
    match kind {
        SchedulerKind::Dos => schedule_dos(&qualify(ch, params, snr), rng),
        SchedulerKind::DosMax => schedule_dos_max(&qualify(ch, params, snr)),
        SchedulerKind::MaxSnr => schedule_maxsnr(ch),
        SchedulerKind::MinGi => schedule_mingi(ch),
        SchedulerKind::Random => schedule_random(ch.cells(), ch.users(), rng),
    }
}
