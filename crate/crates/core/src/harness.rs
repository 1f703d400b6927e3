//! Monte Carlo sweeps over the scenario grid.
//!
//! Each trial draws one channel block per `(K, N)` pair and evaluates every
//! `(power, scheduler, η_I)` combination on that same block, so schedulers,
//! thresholds and power points are compared on common random numbers.
//! Trial streams are keyed on `(seed, K, N, trial)`; results are reduced in
//! trial order and do not depend on how many worker threads ran them.

use rayon::prelude::*;

use crate::analysis::prob_at_least_one;
use crate::channel::{
    draw_flat, draw_geometric, place_users_uniform, BetaMatrix, ChannelRealization, HexLayout,
    PathLossModel,
};
use crate::error::{config_err, Result};
use crate::metrics::{genie_rate, CellMetrics};
use crate::rng::{stream, Domain};
use crate::scheduling::{
    eta_tr_from_epsilon, schedule, DosParams, InterferenceNorm, LogBase, SchedulerKind,
};

const CHUNK: usize = 512;
const Z95: f64 = 1.96;

/// Default η_I search grid: 0.1, 0.2, …, 2.5.
pub fn default_eta_grid() -> Vec<f64> {
    (1..=25).map(|j| f64::from(j) / 10.0).collect()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerKind {
    /// Received SNR in dB (flat mode).
    SnrDb,
    /// Transmit power in dBm (geometric mode).
    TxPowerDbm,
}

impl PowerKind {
    pub fn column(self) -> &'static str {
        match self {
            PowerKind::SnrDb => "snr_db",
            PowerKind::TxPowerDbm => "tx_power_dbm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAxis {
    pub kind: PowerKind,
    pub values: Vec<f64>,
}

impl PowerAxis {
    pub fn snr_db(values: Vec<f64>) -> Self {
        Self {
            kind: PowerKind::SnrDb,
            values,
        }
    }

    pub fn tx_power_dbm(values: Vec<f64>) -> Self {
        Self {
            kind: PowerKind::TxPowerDbm,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricParams {
    pub cell_radius_m: f64,
    pub path_loss: PathLossModel,
    pub noise_dbm: f64,
}

impl GeometricParams {
    /// Hexagonal 500 m cells, exponent 3, 8 dB shadowing, −104 dBm noise.
    pub fn table2() -> Self {
        Self {
            cell_radius_m: 500.0,
            path_loss: PathLossModel {
                exponent: 3.0,
                shadow_std_db: 8.0,
                reference_distance_m: 1.0,
            },
            noise_dbm: -104.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelMode {
    /// β from the given matrix, or all ones.
    Flat {
        beta: Option<BetaMatrix>,
    },
    Geometric(GeometricParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaTr {
    /// `ε·log N` in the given base.
    Epsilon {
        epsilon: f64,
        base: LogBase,
    },
    Fixed(f64),
}

impl EtaTr {
    pub fn resolve(&self, users: usize) -> Result<f64> {
        match *self {
            EtaTr::Epsilon { epsilon, base } => eta_tr_from_epsilon(epsilon, users, base),
            EtaTr::Fixed(v) => Ok(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateScope {
    /// Sum rate divided by K.
    #[default]
    AllCells,
    /// Rate of the cell served by BS 0 (the cluster center in geometric mode).
    CenterCell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub cells: Vec<usize>,
    pub users: Vec<usize>,
    pub power: PowerAxis,
    pub eta_i: Vec<f64>,
    pub schedulers: Vec<SchedulerKind>,
    pub trials: usize,
    pub master_seed: u64,
    pub channel: ChannelMode,
    pub eta_tr: EtaTr,
    pub norm: InterferenceNorm,
    pub rate_scope: RateScope,
}

impl SweepSpec {
    /// Flat β=1 spec with default thresholds (ε = 0.5, natural log, SNR norm).
    pub fn flat(cells: Vec<usize>, users: Vec<usize>, snr_db: Vec<f64>) -> Self {
        Self {
            cells,
            users,
            power: PowerAxis::snr_db(snr_db),
            eta_i: vec![0.5],
            schedulers: vec![SchedulerKind::DosMax],
            trials: 10_000,
            master_seed: 1,
            channel: ChannelMode::Flat { beta: None },
            eta_tr: EtaTr::Epsilon {
                epsilon: 0.5,
                base: LogBase::Natural,
            },
            norm: InterferenceNorm::Snr,
            rate_scope: RateScope::AllCells,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(config_err("cell-count axis is empty"));
        }
        if self.users.is_empty() {
            return Err(config_err("users-per-cell axis is empty"));
        }
        if self.power.values.is_empty() {
            return Err(config_err(format!(
                "{} axis is empty",
                self.power.kind.column()
            )));
        }
        if self.schedulers.is_empty() {
            return Err(config_err("scheduler list is empty"));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be >= 1"));
        }
        if self.cells.contains(&0) {
            return Err(config_err("K must be >= 1"));
        }
        if self.users.contains(&0) {
            return Err(config_err("N must be >= 1"));
        }
        if self.power.values.iter().any(|v| !v.is_finite()) {
            return Err(config_err("power axis values must be finite"));
        }
        if self.schedulers.iter().any(|s| s.uses_eta_i()) {
            if self.eta_i.is_empty() {
                return Err(config_err("eta_I axis is empty"));
            }
            if let Some(e) = self.eta_i.iter().find(|e| !(**e > 0.0)) {
                return Err(config_err(format!("eta_I must be > 0, got {e}")));
            }
        }
        for &n in &self.users {
            let eta_tr = self.eta_tr.resolve(n)?;
            DosParams::new(eta_tr, 1.0, self.norm)?;
        }
        match &self.channel {
            ChannelMode::Flat { beta } => {
                if self.power.kind != PowerKind::SnrDb {
                    return Err(config_err("flat mode sweeps snr_db"));
                }
                if let Some(b) = beta {
                    if let Some(k) = self.cells.iter().find(|&&k| k != b.cells()) {
                        return Err(config_err(format!(
                            "beta matrix is {0}x{0} but the cell axis contains K={k}",
                            b.cells()
                        )));
                    }
                }
            }
            ChannelMode::Geometric(g) => {
                if self.power.kind != PowerKind::TxPowerDbm {
                    return Err(config_err("geometric mode sweeps tx_power_dbm"));
                }
                g.path_loss.validate()?;
                if !g.noise_dbm.is_finite() {
                    return Err(config_err("noise power must be finite"));
                }
                for &k in &self.cells {
                    HexLayout::cluster(k, g.cell_radius_m)?;
                }
            }
        }
        Ok(())
    }

    /// Linear `P/N0` for a power-axis value.
    pub fn snr_linear(&self, power: f64) -> f64 {
        match &self.channel {
            ChannelMode::Flat { .. } => db_to_linear(power),
            ChannelMode::Geometric(g) => db_to_linear(power - g.noise_dbm),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheduler: SchedulerKind,
    pub cells: usize,
    pub users: usize,
    pub power: f64,
    pub eta_i: Option<f64>,
    pub eta_tr: Option<f64>,
    pub mean_rate: f64,
    pub std_err: f64,
    pub ci95: f64,
    pub qualifier_mean: f64,
    pub fallback_frac: f64,
    pub genie_mean: f64,
    pub trials: usize,
    pub seed: u64,
}

impl SweepRow {
    pub fn ci_low(&self) -> f64 {
        self.mean_rate - self.ci95
    }

    pub fn ci_high(&self) -> f64 {
        self.mean_rate + self.ci95
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub power_kind: PowerKind,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// First row matching the filters; `eta_i = None` matches η-free schedulers.
    pub fn find(
        &self,
        scheduler: SchedulerKind,
        cells: usize,
        users: usize,
        power: f64,
        eta_i: Option<f64>,
    ) -> Option<&SweepRow> {
        self.rows.iter().find(|r| {
            r.scheduler == scheduler
                && r.cells == cells
                && r.users == users
                && r.power == power
                && r.eta_i == eta_i
        })
    }
}

#[derive(Debug, Clone)]
struct Evaluation {
    scheduler: SchedulerKind,
    power: f64,
    snr: f64,
    params: DosParams,
    eta_i: Option<f64>,
    eta_tr: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Outcome {
    rate: f64,
    genie: f64,
    qualifiers: f64,
    fallback: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    n: usize,
    mean: f64,
    m2: f64,
    genie: f64,
    qualifiers: f64,
    fallback: f64,
}

impl Accumulator {
    fn push(&mut self, o: &Outcome) {
        self.n += 1;
        let delta = o.rate - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (o.rate - self.mean);
        self.genie += o.genie;
        self.qualifiers += o.qualifiers;
        self.fallback += o.fallback;
    }

    fn std_err(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let var = (self.m2 / (self.n - 1) as f64).max(0.0);
        (var / self.n as f64).sqrt()
    }
}

enum Drawer {
    Flat(BetaMatrix),
    Geometric(HexLayout, PathLossModel),
}

impl Drawer {
    fn draw(
        &self,
        seed: u64,
        cells: usize,
        users: usize,
        trial: u64,
    ) -> Result<ChannelRealization> {
        let mut rng = stream(seed, Domain::Channel, cells, users, trial);
        match self {
            Drawer::Flat(beta) => draw_flat(cells, users, beta, &mut rng),
            Drawer::Geometric(layout, model) => {
                let mut geo_rng = stream(seed, Domain::Geometry, cells, users, trial);
                let geom = place_users_uniform(layout, users, &mut geo_rng)?;
                draw_geometric(&geom, model, &mut rng)
            }
        }
    }
}

fn evaluations(spec: &SweepSpec, users: usize) -> Result<Vec<Evaluation>> {
    let eta_tr = spec.eta_tr.resolve(users)?;
    let mut evals = Vec::new();
    for &power in &spec.power.values {
        let snr = spec.snr_linear(power);
        for &scheduler in &spec.schedulers {
            if scheduler.uses_eta_i() {
                for &eta_i in &spec.eta_i {
                    evals.push(Evaluation {
                        scheduler,
                        power,
                        snr,
                        params: DosParams::new(eta_tr, eta_i, spec.norm)?,
                        eta_i: Some(eta_i),
                        eta_tr: scheduler.uses_eta_tr().then_some(eta_tr),
                    });
                }
            } else {
                evals.push(Evaluation {
                    scheduler,
                    power,
                    snr,
                    params: DosParams::new(0.0, f64::INFINITY, spec.norm)?,
                    eta_i: None,
                    eta_tr: None,
                });
            }
        }
    }
    Ok(evals)
}

fn run_trial(
    spec: &SweepSpec,
    drawer: &Drawer,
    evals: &[Evaluation],
    cells: usize,
    users: usize,
    trial: u64,
) -> Result<Vec<Outcome>> {
    let ch = drawer.draw(spec.master_seed, cells, users, trial)?;
    let k = cells as f64;
    Ok(evals
        .iter()
        .map(|ev| {
            let mut rng = stream(spec.master_seed, Domain::Scheduler, cells, users, trial);
            let decision = schedule(ev.scheduler, &ch, &ev.params, ev.snr, &mut rng);
            let metrics = CellMetrics::evaluate(&ch, &decision, ev.snr);
            let (rate, genie) = match spec.rate_scope {
                RateScope::AllCells => {
                    (metrics.mean_rate(), genie_rate(&ch, &decision, ev.snr) / k)
                }
                RateScope::CenterCell => {
                    let center = ch.link_gain(0, 0, decision.selected[0]) * ev.snr;
                    (metrics.rate[0], crate::metrics::per_cell_rate(center))
                }
            };
            Outcome {
                rate,
                genie,
                qualifiers: decision.qualifier_count.iter().sum::<usize>() as f64 / k,
                fallback: decision.fallback_used.iter().filter(|&&f| f).count() as f64 / k,
            }
        })
        .collect())
}

/// Runs every grid point of `spec` and returns one row per point.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &cells in &spec.cells {
        let drawer = match &spec.channel {
            ChannelMode::Flat { beta } => {
                Drawer::Flat(beta.clone().unwrap_or_else(|| BetaMatrix::ones(cells)))
            }
            ChannelMode::Geometric(g) => {
                Drawer::Geometric(HexLayout::cluster(cells, g.cell_radius_m)?, g.path_loss)
            }
        };
        for &users in &spec.users {
            let evals = evaluations(spec, users)?;
            let mut acc = vec![Accumulator::default(); evals.len()];
            let mut start = 0;
            while start < spec.trials {
                let end = (start + CHUNK).min(spec.trials);
                let chunk: Vec<Vec<Outcome>> = (start..end)
                    .into_par_iter()
                    .map(|t| run_trial(spec, &drawer, &evals, cells, users, t as u64))
                    .collect::<Result<_>>()?;
                for outcomes in &chunk {
                    for (a, o) in acc.iter_mut().zip(outcomes) {
                        a.push(o);
                    }
                }
                start = end;
            }
            for (ev, a) in evals.iter().zip(&acc) {
                let n = a.n as f64;
                let std_err = a.std_err();
                rows.push(SweepRow {
                    scheduler: ev.scheduler,
                    cells,
                    users,
                    power: ev.power,
                    eta_i: ev.eta_i,
                    eta_tr: ev.eta_tr,
                    mean_rate: a.mean,
                    std_err,
                    ci95: Z95 * std_err,
                    qualifier_mean: a.qualifiers / n,
                    fallback_frac: a.fallback / n,
                    genie_mean: a.genie / n,
                    trials: a.n,
                    seed: spec.master_seed,
                });
            }
        }
    }
    Ok(SweepResult {
        power_kind: spec.power.kind,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaEntry {
    pub scheduler: SchedulerKind,
    pub cells: usize,
    pub users: usize,
    pub power: f64,
    pub optimal_eta_i: f64,
    pub rate: f64,
    pub ci95: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaTable {
    pub power_kind: PowerKind,
    pub entries: Vec<EtaEntry>,
    /// The full rate-vs-η_I sweep the table was read from.
    pub sweep: SweepResult,
}

impl EtaTable {
    pub fn get(&self, cells: usize, users: usize) -> Option<&EtaEntry> {
        self.entries
            .iter()
            .find(|e| e.cells == cells && e.users == users)
    }
}

/// Argmax of the mean rate over the η_I axis for every threshold-driven
/// scheduler, `(K, N)` and power point. Ties go to the smaller η_I.
pub fn find_optimal_eta(spec: &SweepSpec) -> Result<EtaTable> {
    let mut spec = spec.clone();
    spec.schedulers.retain(|s| s.uses_eta_i());
    if spec.schedulers.is_empty() {
        return Err(config_err(
            "eta table needs a threshold scheduler (dos or dos-max)",
        ));
    }
    let sweep = run_sweep(&spec)?;
    let mut entries: Vec<EtaEntry> = Vec::new();
    for row in &sweep.rows {
        let eta = row.eta_i.expect("threshold schedulers carry eta_I");
        let existing = entries.iter_mut().find(|e| {
            e.scheduler == row.scheduler
                && e.cells == row.cells
                && e.users == row.users
                && e.power == row.power
        });
        let candidate = EtaEntry {
            scheduler: row.scheduler,
            cells: row.cells,
            users: row.users,
            power: row.power,
            optimal_eta_i: eta,
            rate: row.mean_rate,
            ci95: row.ci95,
            trials: row.trials,
            seed: row.seed,
        };
        match existing {
            None => entries.push(candidate),
            Some(best) => {
                if row.mean_rate > best.rate
                    || (row.mean_rate == best.rate && eta < best.optimal_eta_i)
                {
                    *best = candidate;
                }
            }
        }
    }
    Ok(EtaTable {
        power_kind: sweep.power_kind,
        entries,
        sweep,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub users: usize,
    pub eta_tr: f64,
    pub mean_rate: f64,
    pub ci95: f64,
    /// Fraction of (trial, cell) pairs with at least one qualifier.
    pub nonempty_freq: f64,
    pub nonempty_se: f64,
    /// Closed-form probability of at least one qualifier (β = 1).
    pub predicted_nonempty: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    /// Least-squares `a` in `rate ≈ a + log2(ln N)`.
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingProbe {
    pub cells: usize,
    pub snr_db: f64,
    pub epsilon: f64,
    pub eta_i: f64,
    pub norm: InterferenceNorm,
    pub trials: usize,
    pub seed: u64,
}

/// Mean DOS rate and qualifier statistics as `N` grows (flat mode, β = 1).
pub fn scaling_probe(probe: &ScalingProbe, users: &[usize]) -> Result<ScalingReport> {
    if users.is_empty() {
        return Err(config_err("N list is empty"));
    }
    if let Some(n) = users.iter().find(|&&n| n < 2) {
        return Err(config_err(format!("scaling probe needs N >= 2, got {n}")));
    }
    let mut spec = SweepSpec::flat(vec![probe.cells], users.to_vec(), vec![probe.snr_db]);
    spec.schedulers = vec![SchedulerKind::Dos];
    spec.eta_i = vec![probe.eta_i];
    spec.eta_tr = EtaTr::Epsilon {
        epsilon: probe.epsilon,
        base: LogBase::Natural,
    };
    spec.norm = probe.norm;
    spec.trials = probe.trials;
    spec.master_seed = probe.seed;
    let sweep = run_sweep(&spec)?;
    let snr = db_to_linear(probe.snr_db);

    let samples = (probe.trials * probe.cells) as f64;
    let points = sweep
        .rows
        .iter()
        .map(|row| {
            let eta_tr = row.eta_tr.expect("dos rows carry eta_tr");
            let params = DosParams::new(eta_tr, probe.eta_i, probe.norm)?;
            let freq = 1.0 - row.fallback_frac;
            Ok(ScalingPoint {
                users: row.users,
                eta_tr,
                mean_rate: row.mean_rate,
                ci95: row.ci95,
                nonempty_freq: freq,
                nonempty_se: (freq * (1.0 - freq) / samples).sqrt(),
                predicted_nonempty: prob_at_least_one(probe.cells, row.users, snr, &params)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let offsets: Vec<f64> = points
        .iter()
        .map(|p| p.mean_rate - (p.users as f64).ln().log2())
        .collect();
    let intercept = offsets.iter().sum::<f64>() / offsets.len() as f64;
    let residuals = offsets.iter().map(|o| o - intercept).collect();
    Ok(ScalingReport {
        points,
        intercept,
        residuals,
    })
}

/// Empirical frequency of cells with at least one user passing both DOS
/// criteria, from `samples` independent cells (flat mode, β = 1). Returns
/// the frequency and its binomial standard error.
pub fn qualifier_frequency(
    cells: usize,
    users: usize,
    snr: f64,
    params: &DosParams,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(config_err("need at least one sample"));
    }
    let beta = BetaMatrix::ones(cells);
    let realizations = samples.div_ceil(cells);
    let hits: usize = (0..realizations)
        .into_par_iter()
        .map(|t| -> Result<usize> {
            let mut rng = stream(seed, Domain::Channel, cells, users, t as u64);
            let ch = draw_flat(cells, users, &beta, &mut rng)?;
            let report = crate::scheduling::qualify(&ch, params, snr);
            // the last realization may contribute fewer cells
            let used = cells.min(samples - t * cells);
            Ok((0..used).filter(|&k| report.qualifier_count(k) > 0).count())
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let freq = hits as f64 / samples as f64;
    Ok((freq, (freq * (1.0 - freq) / samples as f64).sqrt()))
}
