//! End-to-end reproduction checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Run with `cargo test --release --test acceptance`
//! (a few minutes on one core).

use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use dos_sim::analysis::{chi2_cdf, lemma2_bound, prob_at_least_one};
use dos_sim::channel::{
    draw_flat, BetaMatrix, ChannelRealization, LargeScaleGains, SmallScaleGains,
};
use dos_sim::harness::{
    default_eta_grid, find_optimal_eta, qualifier_frequency, run_sweep, scaling_probe, ChannelMode,
    GeometricParams, PowerAxis, ScalingProbe, SweepSpec,
};
use dos_sim::metrics::{sum_rate_lower_bound, CellMetrics};
use dos_sim::rng::{stream, Domain, SimRng};
use dos_sim::scheduling::{
    qualify, schedule, schedule_dos, schedule_dos_max, schedule_maxsnr, DosParams,
    InterferenceNorm, LogBase, SchedulerKind,
};

const SEED: u64 = 1;
/// Independent seed for picking η_I before the measured run.
const CALIBRATION_SEED: u64 = 0x5eed_ca1b;

const TABLE1_TRIALS: usize = 10_000;
const TABLE1_SNR_DB: f64 = 20.0;
/// (K, N, lower, upper) bounds on the rate-maximising η_I.
const TABLE1_TARGETS: [(usize, usize, f64, f64); 4] = [
    (3, 50, 0.5, 0.9),
    (3, 100, 0.3, 0.7),
    (4, 100, 1.1, 1.5),
    (5, 100, 1.6, 2.0),
];
const GRID_EPS: f64 = 1e-9;

const FIG2_TRIALS: usize = 10_000;
const FIG2_SNR_DB: [f64; 4] = [0.0, 10.0, 20.0, 30.0];
const FIG2_STRICT_FROM_DB: f64 = 20.0;
const FIG2_ETA_I: f64 = 0.5;

const FIG3_TRIALS: usize = 1_000;
const FIG3_TX_DBM: [f64; 7] = [-40.0, -35.0, -30.0, -25.0, -20.0, -15.0, -10.0];
const FIG3_ETA_GRID: [f64; 9] = [1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1e3, 3e3, 1e4];

const LEMMA2_CELLS: std::ops::RangeInclusive<usize> = 2..=8;

const EQ8_SAMPLES: usize = 100_000;
const EQ8_POINTS: [(usize, usize, f64); 6] = [
    (2, 100, 10.0),
    (2, 100, 100.0),
    (3, 100, 10.0),
    (3, 100, 100.0),
    (2, 10_000, 100.0),
    (3, 10_000, 10.0),
];
const EQ8_MAX_Z: f64 = 3.0;
const EPSILON: f64 = 0.5;
const ETA_I: f64 = 0.5;

const EQ10_TRIALS: usize = 10_000;
const EQ10_CELLS: usize = 3;
const EQ10_USERS: usize = 10_000;
const EQ10_SNR: [f64; 2] = [100.0, 1.0];

const SCALING_USERS: [usize; 3] = [100, 1_000, 10_000];
const SCALING_TRIALS: usize = 10_000;
const SCALING_FINAL_FREQ: f64 = 0.9;

/// One-sample KS critical value at the 1% level, asymptotic form c/√n.
const KS_C_1PCT: f64 = 1.6276;
const KS_SAMPLES: usize = 100_000;
const KS_SUM_SAMPLES: usize = 20_000;
const GOF_ALPHA: f64 = 0.01;
const GOF_DRAWS: usize = 50_000;
const ARGMAX_REALIZATIONS: usize = 1_000;

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 8] = [
        ("table-1 optimal eta_I", table1),
        ("flat-mode scheme ordering", fig2),
        ("geometric scheme ordering", fig3),
        ("lemma-2 bound grid", lemma2_grid),
        ("qualification probability oracle", eq8),
        ("per-realization sum-rate bound", eq10),
        ("rate scaling trend in N", scaling),
        ("distributional suites", distributions),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let out = check();
        failed += usize::from(!out.pass);
        println!(
            "{} {name} ({:.1}s)\n{}",
            if out.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            out.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn table1() -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for (cells, users) in [(3, vec![50, 100]), (4, vec![100]), (5, vec![100])] {
        let mut spec = SweepSpec::flat(vec![cells], users, vec![TABLE1_SNR_DB]);
        spec.schedulers = vec![SchedulerKind::DosMax];
        spec.eta_i = default_eta_grid();
        spec.norm = InterferenceNorm::Unit;
        spec.trials = TABLE1_TRIALS;
        spec.master_seed = SEED;
        let table = find_optimal_eta(&spec).expect("table sweep");
        for e in &table.entries {
            let &(_, _, lo, hi) = TABLE1_TARGETS
                .iter()
                .find(|t| t.0 == e.cells && t.1 == e.users)
                .expect("target");
            let ok = e.optimal_eta_i >= lo - GRID_EPS && e.optimal_eta_i <= hi + GRID_EPS;
            pass &= ok;
            detail += &format!(
                "    K={} N={}: eta_I*={} in [{lo}, {hi}]: {ok} (rate {:.4} ± {:.4})\n",
                e.cells, e.users, e.optimal_eta_i, e.rate, e.ci95
            );
        }
    }
    Outcome { pass, detail }
}

fn fig2() -> Outcome {
    let mut spec = SweepSpec::flat(vec![3], vec![100], FIG2_SNR_DB.to_vec());
    spec.schedulers = vec![
        SchedulerKind::DosMax,
        SchedulerKind::MaxSnr,
        SchedulerKind::MinGi,
    ];
    spec.eta_i = vec![FIG2_ETA_I];
    spec.norm = InterferenceNorm::Unit;
    spec.trials = FIG2_TRIALS;
    spec.master_seed = SEED;
    let res = run_sweep(&spec).expect("sweep");
    let mut pass = true;
    let mut detail = String::new();
    for snr in FIG2_SNR_DB {
        let d = res
            .find(SchedulerKind::DosMax, 3, 100, snr, Some(FIG2_ETA_I))
            .unwrap();
        let m = res.find(SchedulerKind::MaxSnr, 3, 100, snr, None).unwrap();
        let g = res.find(SchedulerKind::MinGi, 3, 100, snr, None).unwrap();
        let ok = if snr >= FIG2_STRICT_FROM_DB {
            d.ci_low() > m.ci_high() && d.ci_low() > g.ci_high()
        } else {
            // only a significant deficit counts against low-SNR points
            d.mean_rate >= m.mean_rate - (d.ci95 + m.ci95)
                && d.mean_rate >= g.mean_rate - (d.ci95 + g.ci95)
        };
        pass &= ok;
        detail += &format!(
            "    {snr:>4} dB: dos-max {:.4}±{:.4}  maxsnr {:.4}±{:.4}  mingi {:.4}±{:.4}: {ok}\n",
            d.mean_rate, d.ci95, m.mean_rate, m.ci95, g.mean_rate, g.ci95
        );
    }
    Outcome { pass, detail }
}

fn fig3_spec(
    power: Vec<f64>,
    eta: Vec<f64>,
    schedulers: Vec<SchedulerKind>,
    seed: u64,
) -> SweepSpec {
    let mut spec = SweepSpec::flat(vec![7], vec![500], vec![0.0]);
    spec.power = PowerAxis::tx_power_dbm(power);
    spec.channel = ChannelMode::Geometric(GeometricParams::table2());
    spec.eta_i = eta;
    spec.schedulers = schedulers;
    spec.norm = InterferenceNorm::Snr;
    spec.trials = FIG3_TRIALS;
    spec.master_seed = seed;
    spec
}

fn fig3() -> Outcome {
    let calib = find_optimal_eta(&fig3_spec(
        FIG3_TX_DBM.to_vec(),
        FIG3_ETA_GRID.to_vec(),
        vec![SchedulerKind::DosMax],
        CALIBRATION_SEED,
    ))
    .expect("calibration");
    let mut pass = true;
    let mut detail = String::new();
    for p in FIG3_TX_DBM {
        let eta = calib
            .entries
            .iter()
            .find(|e| e.power == p)
            .expect("calibrated point")
            .optimal_eta_i;
        let spec = fig3_spec(
            vec![p],
            vec![eta],
            vec![
                SchedulerKind::DosMax,
                SchedulerKind::MaxSnr,
                SchedulerKind::MinGi,
            ],
            SEED,
        );
        let res = run_sweep(&spec).expect("sweep");
        let d = res
            .find(SchedulerKind::DosMax, 7, 500, p, Some(eta))
            .unwrap();
        let m = res.find(SchedulerKind::MaxSnr, 7, 500, p, None).unwrap();
        let g = res.find(SchedulerKind::MinGi, 7, 500, p, None).unwrap();
        let ok =
            d.mean_rate >= m.mean_rate && m.mean_rate >= g.mean_rate && m.ci_low() > g.ci_high();
        pass &= ok;
        detail += &format!(
            "    {p:>5} dBm (eta_I={eta}): dos-max {:.4}±{:.4}  maxsnr {:.4}±{:.4}  mingi {:.4}±{:.4}: {ok}\n",
            d.mean_rate, d.ci95, m.mean_rate, m.ci95, g.mean_rate, g.ci95
        );
    }
    Outcome { pass, detail }
}

fn lemma2_grid() -> Outcome {
    let mut violations = 0;
    let mut checked = 0;
    for k in LEMMA2_CELLS {
        for j in 1..200 {
            let x = j as f64 / 100.0;
            checked += 1;
            if lemma2_bound(k, x).unwrap() > chi2_cdf(k, x).unwrap() {
                violations += 1;
            }
        }
    }
    Outcome {
        pass: violations == 0,
        detail: format!("    {violations} violations over {checked} (K, x) points\n"),
    }
}

fn eq8() -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for (cells, users, snr) in EQ8_POINTS {
        let params = DosParams::from_epsilon(
            EPSILON,
            users,
            ETA_I,
            LogBase::Natural,
            InterferenceNorm::Snr,
        )
        .unwrap();
        let p = prob_at_least_one(cells, users, snr, &params).unwrap();
        let (freq, _) = qualifier_frequency(cells, users, snr, &params, EQ8_SAMPLES, SEED).unwrap();
        let se = (p * (1.0 - p) / EQ8_SAMPLES as f64).sqrt();
        let z = if se > 0.0 {
            (freq - p) / se
        } else if freq == p {
            0.0
        } else {
            f64::INFINITY
        };
        let ok = z.abs() <= EQ8_MAX_Z;
        pass &= ok;
        detail += &format!(
            "    K={cells} N={users} SNR={snr}: predicted {p:.6}, observed {freq:.6}, z={z:.2}: {ok}\n"
        );
    }
    Outcome { pass, detail }
}

/// (trials with every cell fully qualified, violations, smallest slack).
fn eq10_point(snr: f64) -> (usize, usize, f64) {
    let params = DosParams::from_epsilon(
        EPSILON,
        EQ10_USERS,
        ETA_I,
        LogBase::Natural,
        InterferenceNorm::Snr,
    )
    .unwrap();
    let bound = sum_rate_lower_bound(&params, EQ10_CELLS, snr);
    let beta = BetaMatrix::ones(EQ10_CELLS);
    (0..EQ10_TRIALS as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(SEED, Domain::Channel, EQ10_CELLS, EQ10_USERS, t);
            let ch = draw_flat(EQ10_CELLS, EQ10_USERS, &beta, &mut rng).unwrap();
            let mut srng = stream(SEED, Domain::Scheduler, EQ10_CELLS, EQ10_USERS, t);
            let dec = schedule_dos(&qualify(&ch, &params, snr), &mut srng);
            if dec.fallback_used.iter().any(|&f| f) {
                return (0, 0, f64::INFINITY);
            }
            let sum = CellMetrics::evaluate(&ch, &dec, snr).sum_rate;
            (1, usize::from(sum < bound), sum - bound)
        })
        .reduce(
            || (0, 0, f64::INFINITY),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2.min(b.2)),
        )
}

fn eq10() -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for snr in EQ10_SNR {
        let (qualified, violations, slack) = eq10_point(snr);
        pass &= violations == 0;
        detail += &format!(
            "    K={EQ10_CELLS} N={EQ10_USERS} SNR={snr}: {qualified}/{EQ10_TRIALS} fully qualified trials, {violations} violations, min slack {slack:.4}\n"
        );
    }
    Outcome { pass, detail }
}

fn scaling() -> Outcome {
    let probe = ScalingProbe {
        cells: 3,
        snr_db: 20.0,
        epsilon: EPSILON,
        eta_i: ETA_I,
        norm: InterferenceNorm::Unit,
        trials: SCALING_TRIALS,
        seed: SEED,
    };
    let report = scaling_probe(&probe, &SCALING_USERS).expect("probe");
    let pts = &report.points;
    let rates_up = pts.windows(2).all(|w| w[1].mean_rate > w[0].mean_rate);
    let increments: Vec<f64> = pts
        .windows(2)
        .map(|w| w[1].mean_rate - w[0].mean_rate)
        .collect();
    let shrinking = increments.windows(2).all(|w| w[1] < w[0]);
    let freq_up = pts
        .windows(2)
        .all(|w| w[1].nonempty_freq > w[0].nonempty_freq);
    let near_one = pts.last().unwrap().nonempty_freq >= SCALING_FINAL_FREQ;
    let mut detail = String::new();
    for p in pts {
        detail += &format!(
            "    N={:>6}: rate {:.4}±{:.4}, nonempty {:.4} (predicted {:.4})\n",
            p.users, p.mean_rate, p.ci95, p.nonempty_freq, p.predicted_nonempty
        );
    }
    detail += &format!(
        "    rate increasing: {rates_up}, increments {increments:.4?} shrinking: {shrinking}, nonempty increasing: {freq_up}, final >= {SCALING_FINAL_FREQ}: {near_one}\n"
    );
    Outcome {
        pass: rates_up && shrinking && freq_up && near_one,
        detail,
    }
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// A block where the first `QUALIFIERS` users of every cell pass both
/// criteria and the rest fail the desired-gain test.
fn uniformity_channel() -> ChannelRealization {
    const CELLS: usize = 2;
    const USERS: usize = 12;
    const QUALIFIERS: usize = 5;
    let mut g = vec![0.0; CELLS * CELLS * USERS];
    for bs in 0..CELLS {
        for cell in 0..CELLS {
            for u in 0..USERS {
                g[(bs * CELLS + cell) * USERS + u] = match (bs == cell, u < QUALIFIERS) {
                    (true, true) => 3.0,
                    (true, false) => 0.1,
                    (false, _) => 0.01,
                };
            }
        }
    }
    let small = SmallScaleGains::new(CELLS, USERS, g).unwrap();
    ChannelRealization::new(small, LargeScaleGains::Flat(BetaMatrix::ones(CELLS))).unwrap()
}

fn distributions() -> Outcome {
    let mut detail = String::new();
    let mut pass = true;

    let mut rng = SimRng::seed_from_u64(SEED);
    let draws = SmallScaleGains::draw(1, KS_SAMPLES, &mut rng).unwrap();
    let d = ks_statistic(draws.as_slice().to_vec(), |x| 1.0 - (-x).exp());
    let crit = KS_C_1PCT / (KS_SAMPLES as f64).sqrt();
    pass &= d < crit;
    detail += &format!("    |h|^2 vs Exp(1): D={d:.5} < {crit:.5}: {}\n", d < crit);

    let crit = KS_C_1PCT / (KS_SUM_SAMPLES as f64).sqrt();
    for cells in [2, 3, 5, 8] {
        let mut rng = SimRng::seed_from_u64(SEED + cells as u64);
        let g = SmallScaleGains::draw(cells - 1, KS_SUM_SAMPLES, &mut rng).unwrap();
        let sums: Vec<f64> = (0..KS_SUM_SAMPLES)
            .map(|u| 2.0 * (0..cells - 1).map(|c| g.get(0, c, u)).sum::<f64>())
            .collect();
        let d = ks_statistic(sums, |x| chi2_cdf(cells, x).unwrap());
        pass &= d < crit;
        detail += &format!(
            "    2x sum of {} Exp(1) vs chi2_cdf(K={cells}): D={d:.5} < {crit:.5}: {}\n",
            cells - 1,
            d < crit
        );
    }

    let ch = uniformity_channel();
    let params = DosParams::new(1.0, 1.0, InterferenceNorm::Unit).unwrap();
    let report = qualify(&ch, &params, 1.0);
    let q = report.qualifier_count(0);
    let mut counts = vec![0usize; q];
    let mut rng = SimRng::seed_from_u64(SEED);
    for _ in 0..GOF_DRAWS {
        counts[schedule_dos(&report, &mut rng).selected[0]] += 1;
    }
    let expect = GOF_DRAWS as f64 / q as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expect).powi(2) / expect)
        .sum();
    let p_value = 1.0 - ChiSquared::new((q - 1) as f64).unwrap().cdf(stat);
    let ok = q == 5 && p_value > GOF_ALPHA;
    pass &= ok;
    detail += &format!("    random grant over {q} qualifiers: chi2={stat:.3}, p={p_value:.3} > {GOF_ALPHA}: {ok}\n");

    let open = DosParams::new(0.0, f64::INFINITY, InterferenceNorm::Snr).unwrap();
    let beta = BetaMatrix::ones(3);
    let mismatches = (0..ARGMAX_REALIZATIONS as u64)
        .filter(|&t| {
            let mut rng = stream(SEED, Domain::Channel, 3, 50, t);
            let ch = draw_flat(3, 50, &beta, &mut rng).unwrap();
            let mut srng = stream(SEED, Domain::Scheduler, 3, 50, t);
            let a = schedule(SchedulerKind::DosMax, &ch, &open, 10.0, &mut srng);
            let b = schedule_maxsnr(&ch);
            a.selected != b.selected
                || schedule_dos_max(&qualify(&ch, &open, 10.0)).selected != b.selected
        })
        .count();
    pass &= mismatches == 0;
    detail += &format!(
        "    dos-max(eta_I=inf) vs maxsnr: {mismatches} mismatches in {ARGMAX_REALIZATIONS} realizations\n"
    );

    Outcome { pass, detail }
}
